//! Run configuration: one JSON document, defaults for every field, dotted-path
//! overrides from the command line, and field-level validation.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::band::{BandSettings, InteractionScenario, LatticeGeometry, PERIOD};
use crate::error::{Error, Result};
use crate::evolution::{RampConfig, SpeciesConstraint};
use crate::fock::{binomial, sector_dimension, DIMENSION_CAP};
use crate::hamiltonian::{Boundary, DirectionVector, SpinAxis};
use crate::oracle::OracleParams;
use crate::protocol::ProtocolSpec;
use crate::separability::FULL_SPACE_SITES;

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedDirection {
    /// `(1, i, 0)`.
    Raising,
    /// `(0, 1, i)`.
    RotatedRaising,
    X,
    Y,
    Z,
}

/// A named direction or three `[re, im]` components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirectionSpec {
    Named(NamedDirection),
    Components([[f64; 2]; 3]),
}

impl DirectionSpec {
    pub fn vector(&self) -> DirectionVector {
        match *self {
            DirectionSpec::Named(NamedDirection::Raising) => DirectionVector::raising(),
            DirectionSpec::Named(NamedDirection::RotatedRaising) => DirectionVector::rotated_raising(),
            DirectionSpec::Named(NamedDirection::X) => DirectionVector::axis(SpinAxis::X),
            DirectionSpec::Named(NamedDirection::Y) => DirectionVector::axis(SpinAxis::Y),
            DirectionSpec::Named(NamedDirection::Z) => DirectionVector::axis(SpinAxis::Z),
            DirectionSpec::Components(c) => {
                let z = |k: usize| Complex64::new(c[k][0], c[k][1]);
                DirectionVector::new(z(0), z(1), z(2))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundSection {
    /// Lattice depth; `V_i` when absent.
    pub depth: Option<f64>,
    /// `null` searches the whole `N`-particle space.
    pub constraint: Option<SpeciesConstraint>,
    pub dump_state: bool,
}

impl Default for GroundSection {
    fn default() -> Self {
        Self {
            depth: None,
            constraint: Some(SpeciesConstraint::AllA),
            dump_state: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub tau_grid: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            tau_grid: vec![
                1000.0, 2000.0, 2600.0, 5000.0, 10000.0, 15000.0, 19100.0, 25000.0, 30000.0, 35700.0, 40000.0,
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseDiagramSection {
    pub sites: usize,
    pub particles: Vec<usize>,
    pub j_over_u: Vec<f64>,
}

impl Default for PhaseDiagramSection {
    fn default() -> Self {
        Self {
            sites: 5,
            particles: (1..=10).collect(),
            j_over_u: vec![
                0.005, 0.01, 0.015, 0.02, 0.03, 0.05, 0.08, 0.1, 0.15, 0.2, 0.3, 0.5, 0.8, 1.0, 1.5, 2.0,
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandTableSection {
    pub v_min: f64,
    pub v_max: f64,
    pub points: usize,
}

impl Default for BandTableSection {
    fn default() -> Self {
        Self {
            v_min: 2.0,
            v_max: 45.0,
            points: 44,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub j: f64,
    pub u_aa: f64,
    pub u_ab: f64,
    pub dt: f64,
    pub t_max: f64,
    pub sample_every: usize,
    pub tolerance: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            j: 1.0,
            u_aa: 0.5,
            u_ab: 0.475,
            dt: 1e-3,
            t_max: 5.0,
            sample_every: 100,
            tolerance: 1e-8,
        }
    }
}

impl OracleSection {
    pub fn params(&self) -> OracleParams {
        OracleParams {
            j: self.j,
            u_aa: self.u_aa,
            u_ab: self.u_ab,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSection {
    pub samples: usize,
    pub sites: Vec<usize>,
    pub restarts: usize,
    /// Name of a check whose bound is replaced by a negative number, forcing it
    /// to fail; used to test the failure path.
    pub inject_fault: Option<String>,
}

impl Default for AuditSection {
    fn default() -> Self {
        Self {
            samples: 10_000,
            sites: vec![2, 3],
            restarts: 4,
            inject_fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub particles: usize,
    #[serde(rename = "M")]
    pub sites: usize,
    #[serde(rename = "V_i")]
    pub v_initial: f64,
    #[serde(rename = "V_f")]
    pub v_final: f64,
    pub tau: f64,
    pub dt: f64,
    pub cadence: usize,
    pub direction: DirectionSpec,
    pub seed: u64,
    pub output: PathBuf,
    pub boundary: Boundary,
    /// In units of `1/k_L`; sets `a_AA = a_BB`.
    pub scattering_length: f64,
    /// `U_AB / U_AA`.
    pub inter_ratio: f64,
    pub table_points: usize,
    pub symmetric: bool,
    pub energy_shift: bool,
    pub norm_tolerance: f64,
    pub stability_limit: f64,
    pub ground: GroundSection,
    pub sweep: SweepSection,
    pub phase_diagram: PhaseDiagramSection,
    pub band_table: BandTableSection,
    pub oracle: OracleSection,
    pub audit: AuditSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let spec = ProtocolSpec::default();
        Self {
            particles: spec.particles,
            sites: spec.sites,
            v_initial: spec.v_initial,
            v_final: spec.v_final,
            tau: 19100.0,
            dt: spec.ramp.dt,
            cadence: spec.ramp.cadence,
            direction: DirectionSpec::Named(NamedDirection::RotatedRaising),
            seed: 20_240_601,
            output: PathBuf::from("out"),
            boundary: spec.boundary,
            scattering_length: spec.geometry.a_aa,
            inter_ratio: 0.95,
            table_points: spec.table_points,
            symmetric: spec.symmetric,
            energy_shift: spec.energy_shift,
            norm_tolerance: spec.ramp.norm_tolerance,
            stability_limit: spec.ramp.stability_limit,
            ground: GroundSection::default(),
            sweep: SweepSection::default(),
            phase_diagram: PhaseDiagramSection::default(),
            band_table: BandTableSection::default(),
            oracle: OracleSection::default(),
            audit: AuditSection::default(),
        }
    }
}

fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

/// Reject keys of `given` that do not exist in `reference`, naming the dotted path.
fn check_keys(given: &Value, reference: &Value, path: &str) -> Result<()> {
    if let (Value::Object(g), Value::Object(r)) = (given, reference) {
        for (k, v) in g {
            let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
            match r.get(k) {
                None => return Err(config_error(&p, "unknown field")),
                Some(rv) => check_keys(v, rv, &p)?,
            }
        }
    }
    Ok(())
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k.as_str()) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

/// `key=value` with a dotted key; the value is parsed as JSON and falls back to a string.
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| config_error(s, "override must look like key=value"))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| config_error(key, "path descends into a non-object"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

impl RunConfig {
    /// Defaults, then the JSON file (if any), then `key=value` overrides in order.
    pub fn load(file: Option<&Path>, overrides: &[(String, Value)]) -> Result<Self> {
        let reference = serde_json::to_value(RunConfig::default())?;
        let mut user = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| config_error("--config", format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| config_error("--config", format!("invalid JSON: {e}")))?
            }
            None => Value::Object(Default::default()),
        };
        for (k, v) in overrides {
            set_path(&mut user, k, v.clone())?;
        }
        check_keys(&user, &reference, "")?;
        let mut merged = reference;
        merge(&mut merged, user);
        serde_json::from_value(merged).map_err(|e| config_error("config", e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let user: Value = serde_json::from_str(text).map_err(|e| config_error("config", e.to_string()))?;
        let reference = serde_json::to_value(RunConfig::default())?;
        check_keys(&user, &reference, "")?;
        let mut merged = reference;
        merge(&mut merged, user);
        serde_json::from_value(merged).map_err(|e| config_error("config", e.to_string()))
    }

    pub fn geometry(&self) -> LatticeGeometry {
        LatticeGeometry {
            lx: PERIOD,
            ly: PERIOD,
            a_aa: self.scattering_length,
            a_bb: self.scattering_length,
            a_ab: self.inter_ratio * self.scattering_length,
        }
    }

    pub fn scenario(&self) -> InteractionScenario {
        InteractionScenario::Symmetric {
            inter_ratio: self.inter_ratio,
        }
    }

    pub fn protocol_spec(&self) -> ProtocolSpec {
        ProtocolSpec {
            particles: self.particles,
            sites: self.sites,
            v_initial: self.v_initial,
            v_final: self.v_final,
            direction: self.direction.vector(),
            geometry: self.geometry(),
            scenario: self.scenario(),
            bands: BandSettings::default(),
            table_points: self.table_points,
            boundary: self.boundary,
            symmetric: self.symmetric,
            energy_shift: self.energy_shift,
            ramp: RampConfig {
                dt: self.dt,
                cadence: self.cadence,
                norm_tolerance: self.norm_tolerance,
                stability_limit: self.stability_limit,
            },
        }
    }

    fn validate_sector(&self, n: usize, m: usize, n_field: &str, m_field: &str) -> Result<()> {
        if m == 0 {
            return Err(config_error(m_field, "number of sites must be >= 1"));
        }
        if n == 0 {
            return Err(config_error(n_field, "number of particles must be >= 1"));
        }
        let d = sector_dimension(n, m).unwrap_or(u128::MAX);
        if d > DIMENSION_CAP as u128 {
            return Err(config_error(
                n_field,
                format!("N = {n}, M = {m} gives dimension {d}, above the cap {DIMENSION_CAP}"),
            ));
        }
        Ok(())
    }

    /// Checks shared by every command that runs the protocol.
    pub fn validate_protocol(&self) -> Result<()> {
        self.validate_sector(self.particles, self.sites, "N", "M")?;
        for (f, v) in [("V_i", self.v_initial), ("V_f", self.v_final)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(config_error(f, format!("depth must be finite and >= 0, got {v}")));
            }
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(config_error("tau", format!("ramp time must be finite and >= 0, got {}", self.tau)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(config_error("dt", format!("time step must be > 0, got {}", self.dt)));
        }
        if self.cadence == 0 {
            return Err(config_error("cadence", "sampling cadence must be >= 1"));
        }
        let e = self.direction.vector();
        if !e.is_admissible() {
            return Err(config_error(
                "direction",
                format!("not admissible: lambda_max = {:.6} > 1", e.lambda_max()),
            ));
        }
        for (f, v) in [
            ("scattering_length", self.scattering_length),
            ("inter_ratio", self.inter_ratio),
            ("norm_tolerance", self.norm_tolerance),
            ("stability_limit", self.stability_limit),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(config_error(f, format!("must be finite and > 0, got {v}")));
            }
        }
        if self.table_points < 4 {
            return Err(config_error("table_points", "need at least 4 table points"));
        }
        Ok(())
    }

    pub fn validate_ground(&self) -> Result<()> {
        self.validate_protocol()?;
        if let Some(d) = self.ground.depth {
            if !(d.is_finite() && d >= 0.0) {
                return Err(config_error("ground.depth", format!("depth must be >= 0, got {d}")));
            }
        }
        if let Some(SpeciesConstraint::Populations { n_a, n_b }) = self.ground.constraint {
            if n_a + n_b != self.particles {
                return Err(config_error(
                    "ground.constraint",
                    format!("n_a + n_b = {} differs from N = {}", n_a + n_b, self.particles),
                ));
            }
        }
        Ok(())
    }

    pub fn validate_sweep(&self) -> Result<()> {
        self.validate_protocol()?;
        if self.sweep.tau_grid.is_empty() {
            return Err(config_error("sweep.tau_grid", "grid must not be empty"));
        }
        if let Some(t) = self.sweep.tau_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(config_error("sweep.tau_grid", format!("ramp times must be >= 0, got {t}")));
        }
        Ok(())
    }

    pub fn validate_phase_diagram(&self) -> Result<()> {
        let pd = &self.phase_diagram;
        if pd.sites == 0 {
            return Err(config_error("phase_diagram.sites", "number of sites must be >= 1"));
        }
        if pd.particles.is_empty() || pd.j_over_u.is_empty() {
            return Err(config_error("phase_diagram", "particle and J/U grids must not be empty"));
        }
        for &n in &pd.particles {
            if n == 0 {
                return Err(config_error("phase_diagram.particles", "particle numbers must be >= 1"));
            }
            let d = binomial((n + pd.sites - 1) as u128, n as u128).unwrap_or(u128::MAX);
            if d > DIMENSION_CAP as u128 {
                return Err(config_error(
                    "phase_diagram.particles",
                    format!("N = {n} on {} sites gives dimension {d}, above the cap", pd.sites),
                ));
            }
        }
        if let Some(x) = pd.j_over_u.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(config_error("phase_diagram.j_over_u", format!("values must be > 0, got {x}")));
        }
        Ok(())
    }

    pub fn validate_band_table(&self) -> Result<()> {
        let b = &self.band_table;
        if !(b.v_min.is_finite() && b.v_min >= 0.0 && b.v_max > b.v_min && b.v_max.is_finite()) {
            return Err(config_error("band_table", format!("need 0 <= v_min < v_max, got [{}, {}]", b.v_min, b.v_max)));
        }
        if b.points < 2 {
            return Err(config_error("band_table.points", "need at least 2 points"));
        }
        if !(self.scattering_length > 0.0 && self.inter_ratio > 0.0) {
            return Err(config_error("scattering_length", "scattering lengths must be > 0"));
        }
        Ok(())
    }

    pub fn validate_oracle(&self) -> Result<()> {
        let o = &self.oracle;
        if !(o.j.is_finite() && o.j > 0.0) {
            return Err(config_error("oracle.j", format!("hopping must be > 0, got {}", o.j)));
        }
        if !(o.u_aa.is_finite() && o.u_ab.is_finite()) {
            return Err(config_error("oracle.u_aa", "interactions must be finite"));
        }
        if !(o.dt.is_finite() && o.dt > 0.0) {
            return Err(config_error("oracle.dt", format!("time step must be > 0, got {}", o.dt)));
        }
        if !(o.t_max.is_finite() && o.t_max >= 0.0) {
            return Err(config_error("oracle.t_max", format!("must be >= 0, got {}", o.t_max)));
        }
        if o.sample_every == 0 {
            return Err(config_error("oracle.sample_every", "must be >= 1"));
        }
        if !(o.tolerance > 0.0) {
            return Err(config_error("oracle.tolerance", "must be > 0"));
        }
        Ok(())
    }

    pub fn validate_audit(&self) -> Result<()> {
        let a = &self.audit;
        if a.samples == 0 {
            return Err(config_error("audit.samples", "must be >= 1"));
        }
        if a.sites.is_empty() || a.sites.iter().any(|&m| m == 0 || m > FULL_SPACE_SITES) {
            return Err(config_error(
                "audit.sites",
                format!("site counts must lie in 1..={FULL_SPACE_SITES}, got {:?}", a.sites),
            ));
        }
        if a.restarts == 0 {
            return Err(config_error("audit.restarts", "must be >= 1"));
        }
        self.validate_oracle()
    }
}
