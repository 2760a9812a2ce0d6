//! The seven subcommands. Each writes its files into the configured output
//! directory and returns a summary; wall time goes to a separate `timing.json`
//! so every other file is reproducible bit for bit.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::band::{band_diagnostics, lattice_params, BandSettings, LatticeParams};
use crate::error::{Error, Result};
use crate::evolution::ground_state;
use crate::fock::FockBasis;
use crate::hamiltonian::{Boundary, DirectionVector, HamiltonianParts};
use crate::observables::{
    condensate_fraction, correlator, ghz_reference, phase_state_identities, quasimomentum_occupation, site_variance,
    Decomposer,
};
use crate::oracle::{oracle_vs_numeric, richardson_order, table_deviations};
use crate::protocol::{Protocol, ProtocolRun};
use crate::separability::{
    audit_lemma, audit_separability_bound, coherent_product_state, is_raising_family, max_correlator_search,
};

use super::config::{RunConfig, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ground,
    Ramp,
    Sweep,
    PhaseDiagram,
    BandTable,
    Oracle,
    Audit,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ground => "ground",
            Command::Ramp => "ramp",
            Command::Sweep => "sweep",
            Command::PhaseDiagram => "phase-diagram",
            Command::BandTable => "band-table",
            Command::Oracle => "oracle",
            Command::Audit => "audit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CommandOutcome {
    pub files: Vec<PathBuf>,
    /// False when a numerical check failed; the driver exits with 1.
    pub passed: bool,
    pub summary: Value,
    /// Names of the checks or points that failed.
    pub failures: Vec<String>,
}

/// Version string plus the full configuration, embedded in every output.
pub fn provenance(config: &RunConfig) -> Value {
    json!({ "version": VERSION, "config": config })
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// CSV writer that starts with a `#`-prefixed provenance line.
fn csv_file(path: &Path, config: &RunConfig) -> Result<BufWriter<File>> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {}", serde_json::to_string(&provenance(config))?)?;
    Ok(w)
}

fn fmt(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn run(command: Command, config: &RunConfig) -> Result<CommandOutcome> {
    match command {
        Command::Ground => config.validate_ground()?,
        Command::Ramp => config.validate_protocol()?,
        Command::Sweep => config.validate_sweep()?,
        Command::PhaseDiagram => config.validate_phase_diagram()?,
        Command::BandTable => config.validate_band_table()?,
        Command::Oracle => config.validate_oracle()?,
        Command::Audit => config.validate_audit()?,
    }
    fs::create_dir_all(&config.output)?;
    let start = Instant::now();
    let mut outcome = match command {
        Command::Ground => cmd_ground(config),
        Command::Ramp => cmd_ramp(config),
        Command::Sweep => cmd_sweep(config),
        Command::PhaseDiagram => cmd_phase_diagram(config),
        Command::BandTable => cmd_band_table(config),
        Command::Oracle => cmd_oracle(config),
        Command::Audit => cmd_audit(config),
    }?;
    let timing = config.output.join("timing.json");
    write_json(
        &timing,
        &json!({
            "command": command.name(),
            "wall_seconds": start.elapsed().as_secs_f64(),
            "threads": rayon::current_num_threads(),
        }),
    )?;
    outcome.files.push(timing);
    Ok(outcome)
}

pub fn cmd_ground(config: &RunConfig) -> Result<CommandOutcome> {
    let depth = config.ground.depth.unwrap_or(config.v_initial);
    let params = lattice_params(depth, &config.geometry(), config.scenario(), BandSettings::default())?;
    let basis = Arc::new(FockBasis::full(config.particles, config.sites)?);
    let parts = HamiltonianParts::build(&basis, config.boundary)?;
    let gs = ground_state(&parts.hamiltonian_at(&params), &basis, config.ground.constraint)?;
    let variances = (0..config.sites)
        .map(|i| site_variance(&gs.state, i))
        .collect::<Result<Vec<_>>>()?;
    let summary = json!({
        "provenance": provenance(config),
        "depth": depth,
        "params": params,
        "dimension": basis.dim(),
        "energy": gs.energy,
        "residual": gs.residual,
        "fc": condensate_fraction(&gs.state),
        "variances": variances,
        "N0": quasimomentum_occupation(&gs.state, 0.0)?,
    });
    let mut files = vec![config.output.join("ground.json")];
    write_json(&files[0], &summary)?;
    if config.ground.dump_state {
        let path = config.output.join("ground_state.csv");
        let mut w = csv_file(&path, config)?;
        writeln!(w, "index,state,re,im")?;
        for (k, a) in gs.state.amplitudes().iter().enumerate() {
            if a.norm_sqr() > 0.0 {
                writeln!(w, "{k},{},{},{}", basis.state(k), fmt(a.re), fmt(a.im))?;
            }
        }
        w.flush()?;
        files.push(path);
    }
    Ok(CommandOutcome {
        files,
        passed: true,
        summary,
        failures: Vec::new(),
    })
}

fn run_summary(config: &RunConfig, protocol: &Protocol, run: &ProtocolRun) -> Value {
    json!({
        "provenance": provenance(config),
        "tau": run.tau,
        "steps": run.outcome.steps,
        "dt": run.outcome.dt,
        "propagation_dimension": protocol.hamiltonian(run.tau).map(|h| h.subspace().map_or(protocol.basis.dim(), |s| s.dim())).ok(),
        "ground_energy": protocol.ground.energy,
        "bound": run.bound,
        "initial_C2": run.initial_c2,
        "final_C2": run.final_c2,
        "max_C2": run.max_c2,
        "max_C2_time": run.max_c2_time,
        "first_bound_break": run.first_bound_break,
        "decomposition": run.decomposition,
        "max_norm_drift": run.outcome.max_norm_drift,
        "max_number_drift": run.outcome.max_number_drift,
    })
}

fn write_ramp(config: &RunConfig, protocol: &Protocol, run: &ProtocolRun) -> Result<(Vec<PathBuf>, Value)> {
    let csv = config.output.join("ramp.csv");
    let mut w = csv_file(&csv, config)?;
    run.outcome.log.write_csv(&mut w)?;
    w.flush()?;
    let summary = run_summary(config, protocol, run);
    let js = config.output.join("ramp.json");
    write_json(&js, &summary)?;
    Ok((vec![csv, js], summary))
}

pub fn cmd_ramp(config: &RunConfig) -> Result<CommandOutcome> {
    let protocol = Protocol::prepare(config.protocol_spec())?;
    let run = protocol.run(config.tau)?;
    let (files, summary) = write_ramp(config, &protocol, &run)?;
    Ok(CommandOutcome {
        files,
        passed: true,
        summary,
        failures: Vec::new(),
    })
}

#[derive(Debug, Clone, Serialize)]
struct SweepPoint {
    tau: f64,
    #[serde(rename = "C2_final")]
    c2_final: Option<f64>,
    #[serde(rename = "max_C2")]
    max_c2: Option<f64>,
    first_bound_break: Option<f64>,
    phases: Vec<f64>,
    magnitudes: Vec<f64>,
    residual: Option<f64>,
    error: Option<String>,
}

pub fn cmd_sweep(config: &RunConfig) -> Result<CommandOutcome> {
    let protocol = Protocol::prepare(config.protocol_spec())?;
    let grid = &config.sweep.tau_grid;
    let runs: Vec<Result<ProtocolRun>> = grid.par_iter().map(|&tau| protocol.run(tau)).collect();
    let phase_names = if config.particles == config.sites {
        Decomposer::new(&protocol.basis)?.column_names().0
    } else {
        Vec::new()
    };
    let points: Vec<SweepPoint> = grid
        .iter()
        .zip(&runs)
        .map(|(&tau, r)| match r {
            Ok(run) => {
                let (phases, magnitudes, residual) = match &run.decomposition {
                    Some(d) => (
                        d.entries[1..].iter().map(|e| e.phase).collect(),
                        d.entries.iter().map(|e| e.magnitude).collect(),
                        Some(d.residual),
                    ),
                    None => (Vec::new(), Vec::new(), None),
                };
                SweepPoint {
                    tau,
                    c2_final: Some(run.final_c2),
                    max_c2: Some(run.max_c2),
                    first_bound_break: run.first_bound_break,
                    phases,
                    magnitudes,
                    residual,
                    error: None,
                }
            }
            Err(e) => SweepPoint {
                tau,
                c2_final: None,
                max_c2: None,
                first_bound_break: None,
                phases: Vec::new(),
                magnitudes: Vec::new(),
                residual: None,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let csv = config.output.join("sweep.csv");
    let mut w = csv_file(&csv, config)?;
    write!(w, "tau,C2_final")?;
    for n in &phase_names {
        write!(w, ",{n}")?;
    }
    writeln!(w)?;
    for p in points.iter().filter(|p| p.error.is_none()) {
        write!(w, "{},{}", fmt(p.tau), fmt(p.c2_final.unwrap_or(f64::NAN)))?;
        for x in &p.phases {
            write!(w, ",{}", fmt(*x))?;
        }
        writeln!(w)?;
    }
    w.flush()?;

    let bound = crate::separability::separability_bound(config.particles, config.sites);
    let above: Vec<f64> = points
        .iter()
        .filter(|p| p.c2_final.is_some_and(|c| c > bound))
        .map(|p| p.tau)
        .collect();
    let argmax = points
        .iter()
        .filter_map(|p| p.c2_final.map(|c| (p.tau, c)))
        .fold(None, |best: Option<(f64, f64)>, x| match best {
            Some(b) if b.1 >= x.1 => Some(b),
            _ => Some(x),
        });
    let failures: Vec<String> = points
        .iter()
        .filter_map(|p| p.error.as_ref().map(|e| format!("tau = {}: {e}", p.tau)))
        .collect();
    let summary = json!({
        "provenance": provenance(config),
        "bound": bound,
        "phase_columns": phase_names,
        "points": points,
        "window": {
            "taus_above_bound": above,
            "lower": above.first(),
            "upper": above.last(),
        },
        "argmax_tau": argmax.map(|a| a.0),
        "argmax_C2_final": argmax.map(|a| a.1),
        "failures": failures,
    });
    let js = config.output.join("sweep.json");
    write_json(&js, &summary)?;
    let mut files = vec![csv, js];
    if grid.len() == 1 {
        if let Ok(run) = &runs[0] {
            files.extend(write_ramp(config, &protocol, run)?.0);
        }
    }
    Ok(CommandOutcome {
        files,
        passed: failures.is_empty(),
        summary,
        failures,
    })
}

#[derive(Debug, Clone, Serialize)]
struct PhaseCell {
    nu: f64,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "J_over_U")]
    j_over_u: f64,
    fc: Option<f64>,
    var1: Option<f64>,
    error: Option<String>,
}

/// Single-species ground state with `U = 1` and hopping `J/U`.
pub fn phase_diagram_cell(basis: &Arc<FockBasis>, parts: &HamiltonianParts, j_over_u: f64) -> Result<(f64, f64)> {
    let params = LatticeParams {
        j: j_over_u,
        u_aa: 1.0,
        u_bb: 1.0,
        u_ab: 1.0,
    };
    let gs = ground_state(&parts.hamiltonian_at(&params), basis, None)?;
    Ok((condensate_fraction(&gs.state), site_variance(&gs.state, 0)?))
}

pub fn cmd_phase_diagram(config: &RunConfig) -> Result<CommandOutcome> {
    let pd = &config.phase_diagram;
    let m = pd.sites;
    let sectors: Vec<(usize, Result<(Arc<FockBasis>, HamiltonianParts)>)> = pd
        .particles
        .par_iter()
        .map(|&n| {
            let built = FockBasis::species(n, 0, m).and_then(|b| {
                let b = Arc::new(b);
                let parts = HamiltonianParts::build(&b, Boundary::Periodic)?;
                Ok((b, parts))
            });
            (n, built)
        })
        .collect();
    let cells: Vec<PhaseCell> = sectors
        .par_iter()
        .flat_map_iter(|(n, built)| {
            pd.j_over_u.iter().map(move |&x| {
                let res = match built {
                    Ok((b, parts)) => phase_diagram_cell(b, parts, x),
                    Err(e) => Err(Error::InvalidSector(e.to_string())),
                };
                let (fc, var1, error) = match res {
                    Ok((f, v)) => (Some(f), Some(v), None),
                    Err(e) => (None, None, Some(e.to_string())),
                };
                PhaseCell {
                    nu: *n as f64 / m as f64,
                    n: *n,
                    j_over_u: x,
                    fc,
                    var1,
                    error,
                }
            })
        })
        .collect();
    let csv = config.output.join("phase_diagram.csv");
    let mut w = csv_file(&csv, config)?;
    writeln!(w, "nu,N,J_over_U,fc,var1")?;
    for c in cells.iter().filter(|c| c.error.is_none()) {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt(c.nu),
            c.n,
            fmt(c.j_over_u),
            fmt(c.fc.unwrap_or(f64::NAN)),
            fmt(c.var1.unwrap_or(f64::NAN))
        )?;
    }
    w.flush()?;
    let failures: Vec<String> = cells
        .iter()
        .filter_map(|c| c.error.as_ref().map(|e| format!("N = {}, J/U = {}: {e}", c.n, c.j_over_u)))
        .collect();
    let summary = json!({
        "provenance": provenance(config),
        "sites": m,
        "cells": cells,
        "failures": failures,
    });
    let js = config.output.join("phase_diagram.json");
    write_json(&js, &summary)?;
    Ok(CommandOutcome {
        files: vec![csv, js],
        passed: failures.is_empty(),
        summary,
        failures,
    })
}

pub fn cmd_band_table(config: &RunConfig) -> Result<CommandOutcome> {
    let b = &config.band_table;
    let geom = config.geometry();
    let grid: Vec<f64> = if b.points == 1 {
        vec![b.v_min]
    } else {
        (0..b.points)
            .map(|k| b.v_min + (b.v_max - b.v_min) * k as f64 / (b.points - 1) as f64)
            .collect()
    };
    let rows = grid
        .par_iter()
        .map(|&v| band_diagnostics(v, &geom, BandSettings::default()))
        .collect::<Result<Vec<_>>>()?;
    let csv = config.output.join("band_table.csv");
    let mut w = csv_file(&csv, config)?;
    writeln!(w, "v0,J,J2,J_gauss,U_AA,U_BB,U_AB,U0001,U_gauss,residual")?;
    for r in &rows {
        let u_ab = config.inter_ratio * r.u0000;
        writeln!(
            w,
            "{}",
            [r.v0, r.j1, r.j2, r.j_gauss, r.u0000, r.u0000, u_ab, r.u0001, r.u_gauss, r.reconstruction_residual]
                .map(fmt)
                .join(",")
        )?;
    }
    w.flush()?;
    let summary = json!({ "provenance": provenance(config), "rows": rows });
    let js = config.output.join("band_table.json");
    write_json(&js, &summary)?;
    Ok(CommandOutcome {
        files: vec![csv, js],
        passed: true,
        summary,
        failures: Vec::new(),
    })
}

/// Step used for the convergence-order estimate; small enough to be
/// asymptotic, large enough that round-off does not dominate the error.
pub const RICHARDSON_DT: f64 = 0.02;

pub fn cmd_oracle(config: &RunConfig) -> Result<CommandOutcome> {
    let o = &config.oracle;
    let p = o.params();
    let cmp = oracle_vs_numeric(&p, o.dt, o.t_max, o.sample_every)?;
    let order = richardson_order(&p, RICHARDSON_DT, o.t_max)?;
    let a = config.output.join("oracle_analytic.csv");
    let n = config.output.join("oracle_numeric.csv");
    let mut wa = csv_file(&a, config)?;
    let mut wn = csv_file(&n, config)?;
    cmp.write_csv(&mut wa, &mut wn)?;
    wa.flush()?;
    wn.flush()?;
    let deviation_ok = cmp.max_deviation < o.tolerance;
    let order_ok = (order - 4.0).abs() <= 0.3;
    let mut failures = Vec::new();
    if !deviation_ok {
        failures.push(cmp.check(o.tolerance).unwrap_err().to_string());
    }
    if !order_ok {
        failures.push(format!("convergence order {order:.3} outside 4 ± 0.3"));
    }
    let summary = json!({
        "provenance": provenance(config),
        "max_deviation": cmp.max_deviation,
        "worst_index": cmp.worst_index,
        "worst_time": cmp.worst_time,
        "tolerance": o.tolerance,
        "richardson_dt": RICHARDSON_DT,
        "richardson_order": order,
        "passed": failures.is_empty(),
    });
    let js = config.output.join("oracle.json");
    write_json(&js, &summary)?;
    Ok(CommandOutcome {
        files: vec![a, n, js],
        passed: failures.is_empty(),
        summary,
        failures,
    })
}

/// One line of the audit report: passes when `value <= bound`.
#[derive(Debug, Clone, Serialize)]
pub struct AuditCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
    pub passed: bool,
    pub seed: Option<u64>,
    pub detail: Value,
}

impl AuditCheck {
    fn new(name: String, value: f64, bound: f64, seed: Option<u64>, detail: Value) -> Self {
        Self {
            name,
            value,
            bound,
            margin: bound - value,
            passed: value <= bound,
            seed,
            detail,
        }
    }
}

fn direction_label(e: &DirectionVector) -> String {
    if *e == DirectionVector::raising() {
        "raising".into()
    } else if *e == DirectionVector::rotated_raising() {
        "rotated_raising".into()
    } else {
        let c = e.components();
        format!(
            "({:.3}{:+.3}i,{:.3}{:+.3}i,{:.3}{:+.3}i)",
            c[0].re, c[0].im, c[1].re, c[1].im, c[2].re, c[2].im
        )
    }
}

/// Every check of the audit battery, before fault injection.
pub fn audit_checks(config: &RunConfig) -> Result<Vec<AuditCheck>> {
    let a = &config.audit;
    let seed = config.seed;
    let mut directions = vec![DirectionVector::raising(), DirectionVector::rotated_raising()];
    let e_cfg = config.direction.vector();
    if !directions.contains(&e_cfg) {
        directions.push(e_cfg);
    }
    let mut checks = Vec::new();
    for &m in &a.sites {
        for e in &directions {
            let tag = format!("M{m}.{}", direction_label(e));
            let lemma = audit_lemma(m, e, a.samples, seed)?;
            checks.push(AuditCheck::new(
                format!("lemma.{tag}"),
                lemma.max_sum,
                lemma.bound + crate::separability::BOUND_SLACK,
                Some(seed),
                json!({ "max_mean_gap": lemma.max_mean_gap, "worst": lemma.worst }),
            ));
            checks.push(AuditCheck::new(
                format!("mean_gap.{tag}"),
                lemma.max_mean_gap,
                1e-12,
                Some(seed),
                Value::Null,
            ));
            let bound = audit_separability_bound(m, e, a.samples, seed)?;
            checks.push(AuditCheck::new(
                format!("bound.{tag}"),
                bound.max_value,
                bound.bound + crate::separability::BOUND_SLACK,
                Some(seed),
                serde_json::to_value(&bound)?,
            ));
            checks.push(AuditCheck::new(
                format!("linearity.{tag}"),
                bound.full_space_deviation.max(bound.linearity_deviation),
                1e-12,
                Some(seed),
                Value::Null,
            ));
            let search = max_correlator_search(m, e, seed, a.restarts)?;
            checks.push(AuditCheck::new(
                format!("max.{tag}"),
                search.value,
                0.25 + 1e-6,
                Some(seed),
                serde_json::to_value(&search)?,
            ));
            if is_raising_family(e) {
                checks.push(AuditCheck::new(
                    format!("max_attained.{tag}"),
                    (search.value_at_quarter_pi - 0.25).abs(),
                    1e-6,
                    None,
                    json!({ "theta": search.theta, "phi": search.phi }),
                ));
            }
            let coh = coherent_product_state(m, e)?.correlator(e).norm_sqr();
            let target = (e.lambda_max() / 4.0).powi(m as i32);
            checks.push(AuditCheck::new(
                format!("coherent.{tag}"),
                (coh - target).abs(),
                1e-10,
                None,
                json!({ "C2": coh, "expected": target }),
            ));
        }
        let basis = Arc::new(FockBasis::full(m, m)?);
        let ghz = correlator(&ghz_reference(&basis)?, &DirectionVector::raising())?.modulus_sq;
        checks.push(AuditCheck::new(
            format!("ghz.M{m}"),
            (ghz - 0.25).abs(),
            1e-12,
            None,
            json!({ "C2": ghz }),
        ));
    }
    let o = &config.oracle;
    let cmp = oracle_vs_numeric(&o.params(), o.dt, o.t_max, o.sample_every)?;
    checks.push(AuditCheck::new(
        "oracle".into(),
        cmp.max_deviation,
        o.tolerance,
        None,
        json!({ "worst_index": cmp.worst_index, "worst_time": cmp.worst_time }),
    ));
    let tables = table_deviations(&o.params())?;
    checks.push(AuditCheck::new(
        "tables".into(),
        tables.max_deviation(),
        1e-12,
        None,
        serde_json::to_value(tables)?,
    ));
    let six = Arc::new(FockBasis::full(6, 6)?);
    let ids = phase_state_identities(&six)?;
    checks.push(AuditCheck::new(
        "phase_identities".into(),
        ids.max_deviation(),
        1e-12,
        None,
        serde_json::to_value(ids)?,
    ));
    Ok(checks)
}

pub fn cmd_audit(config: &RunConfig) -> Result<CommandOutcome> {
    let mut checks = audit_checks(config)?;
    if let Some(fault) = &config.audit.inject_fault {
        let mut hit = false;
        for c in checks.iter_mut().filter(|c| c.name.starts_with(fault.as_str())) {
            c.bound = -1.0;
            c.margin = c.bound - c.value;
            c.passed = false;
            hit = true;
        }
        if !hit {
            return Err(Error::Config {
                field: "audit.inject_fault".into(),
                message: format!("no check is named `{fault}`"),
            });
        }
    }
    let failures: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    let summary = json!({
        "provenance": provenance(config),
        "seed": config.seed,
        "passed": failures.is_empty(),
        "failures": failures,
        "checks": checks,
    });
    let js = config.output.join("audit.json");
    write_json(&js, &summary)?;
    Ok(CommandOutcome {
        files: vec![js],
        passed: failures.is_empty(),
        summary,
        failures,
    })
}
