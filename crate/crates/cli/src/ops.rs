//! Command implementations and structured output emission.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use nlslab_core::diagnostics::{
    self, classify, localized_virial, threshold_relations, Assumption, DiagnosticsRecord,
};
use nlslab_core::evolution::{
    evolve, exact_pseudo_conformal, pseudo_conformal_data, EvolveConfig, EvolveStatus,
};
use nlslab_core::groundstate::{
    optimal_gn_constant, solve_ground_state, verify_pohozaev, EllipticParams, GroundStateResult,
};
use nlslab_core::nonlinearity::{check_mass_resonance, validate_hypotheses};
use nlslab_core::{FieldState, GridSpec, SystemSpec};

use crate::scenario::{
    load_spec, make_grid, write_manifest, AppError, Cli, ClassifyArgs, Command, EvolveArgs,
    GroundStateArgs, PseudoConformalArgs, ValidateArgs, VirialCheckArgs,
};

pub fn dispatch(cli: &Cli, argv: &[String]) -> Result<(), AppError> {
    match &cli.command {
        Command::Validate(a) => run_validate(a, argv),
        Command::GroundState(a) => run_ground_state(a, argv),
        Command::Evolve(a) => run_evolve(a, argv),
        Command::Classify(a) => run_classify(a, argv),
        Command::PseudoConformal(a) => run_pseudo_conformal(a, argv),
        Command::VirialCheck(a) => run_virial_check(a, argv),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::Usage(format!("serialization: {e}")))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

fn write_series_csv(path: &Path, series: &[DiagnosticsRecord]) -> Result<(), AppError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "t",
        "Q",
        "E",
        "K",
        "L",
        "P",
        "V",
        "Vdot",
        "Vddot_formula",
        "Vddot_fd",
        "sup_norm",
    ])
    .map_err(csv_err)?;
    let fmt = |x: f64| -> String {
        let mut buf = ryu_format(x);
        buf.shrink_to_fit();
        buf
    };
    for r in series {
        let row = [
            fmt(r.t),
            fmt(r.q),
            fmt(r.e),
            fmt(r.k),
            fmt(r.l),
            fmt(r.p),
            fmt(r.v),
            fmt(r.vdot),
            r.vddot_formula.map(fmt).unwrap_or_default(),
            r.vddot_fd.map(fmt).unwrap_or_default(),
            fmt(r.sup_norm),
        ];
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn ryu_format(x: f64) -> String {
    // Shortest round-trip formatting, deterministic across runs.
    format!("{x}")
}

fn csv_err(e: csv::Error) -> AppError {
    AppError::Usage(format!("csv: {e}"))
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        csv_err(e)
    }
}

fn gaussian_data(grid: GridSpec, l: usize) -> FieldState {
    FieldState::from_fn(grid, l, |_, x| {
        Complex64::new((-x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
    })
}

fn load_init(
    init: &Option<std::path::PathBuf>,
    grid: GridSpec,
    l: usize,
) -> Result<FieldState, AppError> {
    match init {
        Some(path) => {
            let state = FieldState::load(path)?;
            if state.grid != grid || state.l() != l {
                return Err(AppError::Usage(format!(
                    "init field {} does not match the requested grid/components",
                    path.display()
                )));
            }
            Ok(state)
        }
        None => Ok(gaussian_data(grid, l)),
    }
}

// ---------------------------------------------------------------- validate

fn run_validate(args: &ValidateArgs, argv: &[String]) -> Result<(), AppError> {
    let spec = load_spec(&args.common.spec, args.common.n)?;
    let report = validate_hypotheses(&spec, args.common.seed);
    write_manifest(&args.common.out, argv, &spec, None, args.common.seed)?;
    write_json(&args.common.out.join("report.json"), &report)?;
    for e in &report.entries {
        println!("{}: {:?} ({})", e.name, e.status, e.detail);
    }
    println!("mass_resonant={}", report.mass_resonant);
    match &report.sigma {
        Some(s) => println!("sigma={s:?}"),
        None => println!("sigma=none"),
    }
    if report.all_pass() {
        println!("validate: ok");
        Ok(())
    } else {
        Err(AppError::Validation("hypothesis check failed".into()))
    }
}

// ------------------------------------------------------------ ground-state

fn solve_with(
    spec: &SystemSpec,
    grid: GridSpec,
    omega: f64,
    init: Option<FieldState>,
    tol: f64,
    max_iter: usize,
) -> Result<GroundStateResult, AppError> {
    let params = EllipticParams::new(spec.clone(), omega)?;
    Ok(solve_ground_state(&params, grid, init, tol, max_iter)?)
}

#[derive(Serialize)]
struct GroundStateReport<'a> {
    omega: f64,
    iterations: usize,
    converged: bool,
    failure: &'a Option<String>,
    residual: f64,
    functionals: nlslab_core::groundstate::Functionals,
    pohozaev: nlslab_core::groundstate::PohozaevReport,
    optimal_gn_constant: f64,
}

fn run_ground_state(args: &GroundStateArgs, argv: &[String]) -> Result<(), AppError> {
    let spec = load_spec(&args.common.spec, args.common.n)?;
    let grid = make_grid(&spec, &args.grid)?;
    write_manifest(&args.common.out, argv, &spec, Some(&grid), args.common.seed)?;
    let init = match &args.init {
        Some(path) => Some(load_init(&Some(path.clone()), grid, spec.l)?),
        None => None,
    };
    let gs = solve_with(&spec, grid, args.omega, init, args.tol, args.max_iter)?;
    let report = GroundStateReport {
        omega: gs.omega,
        iterations: gs.iterations,
        converged: gs.converged,
        failure: &gs.failure,
        residual: gs.residual,
        functionals: gs.functionals,
        pohozaev: verify_pohozaev(&gs, &spec),
        optimal_gn_constant: optimal_gn_constant(&gs, &spec),
    };
    write_json(&args.common.out.join("report.json"), &report)?;
    gs.psi.save(&args.common.out.join("psi.nlsfld"))?;
    println!(
        "ground-state: converged={} iterations={} residual={:e}",
        gs.converged, gs.iterations, gs.residual
    );
    if gs.converged {
        Ok(())
    } else {
        Err(AppError::Numerical(format!(
            "ground state did not converge: {}",
            gs.failure.as_deref().unwrap_or("unknown")
        )))
    }
}

// ------------------------------------------------------------------ evolve

#[derive(Serialize)]
struct EvolveReport {
    status: String,
    final_t: f64,
    records: usize,
    mass_drift: f64,
    energy_drift: f64,
}

fn run_evolve(args: &EvolveArgs, argv: &[String]) -> Result<(), AppError> {
    let spec = load_spec(&args.common.spec, args.common.n)?;
    let grid = make_grid(&spec, &args.grid)?;
    write_manifest(&args.common.out, argv, &spec, Some(&grid), args.common.seed)?;
    let data = load_init(&args.init, grid, spec.l)?;
    let cfg = EvolveConfig {
        dt: args.dt,
        t_end: args.t_end,
        blowup_factor: args.blowup_factor,
        snapshot_stride: args.stride,
        adaptive: args.adaptive,
        ..Default::default()
    };
    let outcome = evolve(&data, &spec, &cfg)?;
    write_series_csv(&args.common.out.join("series.csv"), &outcome.series)?;
    outcome
        .final_state
        .save(&args.common.out.join("final.nlsfld"))?;
    let (status, failure) = match outcome.status {
        EvolveStatus::ReachedTEnd => ("reached-t-end".to_string(), None),
        EvolveStatus::BlowUpDetected(t) => (
            format!("blow-up-detected at t={t}"),
            Some(format!("blow-up detected at t = {t}")),
        ),
        EvolveStatus::Invalid(t) => (
            format!("invalid at t={t}"),
            Some(format!("non-finite state at t = {t}")),
        ),
    };
    let first = outcome.series.first();
    let last = outcome.series.last();
    let drift = |get: fn(&DiagnosticsRecord) -> f64| -> f64 {
        match (first, last) {
            (Some(a), Some(b)) if get(a).abs() > 0.0 => (get(b) / get(a) - 1.0).abs(),
            _ => 0.0,
        }
    };
    let report = EvolveReport {
        status: status.clone(),
        final_t: outcome.final_state.t,
        records: outcome.series.len(),
        mass_drift: drift(|r| r.q),
        energy_drift: drift(|r| r.e),
    };
    write_json(&args.common.out.join("report.json"), &report)?;
    println!(
        "evolve: {} final_t={} records={}",
        status, report.final_t, report.records
    );
    match failure {
        None => Ok(()),
        Some(msg) => Err(AppError::Numerical(msg)),
    }
}

// ---------------------------------------------------------------- classify

fn parse_assumption(s: &str) -> Result<Assumption, AppError> {
    match s {
        "radial" => Ok(Assumption::Radial),
        "finite-variance" | "finite_variance" => Ok(Assumption::FiniteVariance),
        other => Err(AppError::Usage(format!(
            "--assume must be 'radial' or 'finite-variance', got '{other}'"
        ))),
    }
}

#[derive(Serialize)]
struct ClassifyReport {
    verdict: nlslab_core::diagnostics::Verdict,
    threshold_relations: nlslab_core::diagnostics::ThresholdRelations,
    ground_state_converged: bool,
    ground_state_residual: f64,
}

fn run_classify(args: &ClassifyArgs, argv: &[String]) -> Result<(), AppError> {
    let spec = load_spec(&args.common.spec, args.common.n)?;
    let grid = make_grid(&spec, &args.grid)?;
    write_manifest(&args.common.out, argv, &spec, Some(&grid), args.common.seed)?;
    let assumption = parse_assumption(&args.assume)?;
    let gs = solve_with(&spec, grid, args.omega, None, args.tol, args.max_iter)?;
    if !gs.converged {
        return Err(AppError::Numerical(format!(
            "reference ground state did not converge: {}",
            gs.failure.as_deref().unwrap_or("unknown")
        )));
    }
    let data = match &args.init {
        Some(path) => load_init(&Some(path.clone()), grid, spec.l)?,
        None => {
            let mut d = gs.psi.clone();
            for c in d.components.iter_mut() {
                for v in c.iter_mut() {
                    *v *= args.amplitude;
                }
            }
            d
        }
    };
    let verdict = classify(&data, &spec, &gs, assumption)?;
    let report = ClassifyReport {
        verdict,
        threshold_relations: threshold_relations(&gs, &spec),
        ground_state_converged: gs.converged,
        ground_state_residual: gs.residual,
    };
    write_json(&args.common.out.join("verdict.json"), &report)?;
    println!(
        "classify: {:?} (regime {:?}, s_c = {})",
        report.verdict.classification, report.verdict.regime, report.verdict.s_c
    );
    println!("reason: {}", report.verdict.reason);
    Ok(())
}

// -------------------------------------------------------- pseudo-conformal

#[derive(Serialize)]
struct PseudoConformalReport {
    big_t: f64,
    q_psi: f64,
    q_data: f64,
    q_rel_err: f64,
    sampled_times: Vec<f64>,
}

fn run_pseudo_conformal(args: &PseudoConformalArgs, argv: &[String]) -> Result<(), AppError> {
    // The transform is defined for the potential-free linear part, so the
    // beta coefficients are dropped up front (a no-op when already zero).
    let spec = load_spec(&args.common.spec, args.common.n)?.with_zero_beta();
    let grid = make_grid(&spec, &args.grid)?;
    write_manifest(&args.common.out, argv, &spec, Some(&grid), args.common.seed)?;
    let gs = solve_with(&spec, grid, 1.0, None, args.tol, args.max_iter)?;
    if !gs.converged {
        return Err(AppError::Numerical(format!(
            "ground state did not converge: {}",
            gs.failure.as_deref().unwrap_or("unknown")
        )));
    }
    let data = pseudo_conformal_data(&gs, args.big_t, &spec)?;
    data.save(&args.common.out.join("data.nlsfld"))?;
    let q_psi = diagnostics::mass(&gs.psi, &spec)?;
    let q_data = diagnostics::mass(&data, &spec)?;
    let resonant = check_mass_resonance(&spec);
    let mut series = Vec::new();
    for &t in &args.times {
        let exact = exact_pseudo_conformal(&gs, args.big_t, t, &spec)?;
        exact.save(&args.common.out.join(format!("exact_t{t}.nlsfld")))?;
        series.push(DiagnosticsRecord::build(&exact, &spec, resonant)?);
    }
    if !series.is_empty() {
        write_series_csv(&args.common.out.join("exact_series.csv"), &series)?;
    }
    let report = PseudoConformalReport {
        big_t: args.big_t,
        q_psi,
        q_data,
        q_rel_err: (q_data - q_psi).abs() / q_psi.max(1e-300),
        sampled_times: args.times.clone(),
    };
    write_json(&args.common.out.join("report.json"), &report)?;
    println!(
        "pseudo-conformal: T={} Q(psi)={} Q(data)={} rel_err={:e}",
        report.big_t, report.q_psi, report.q_data, report.q_rel_err
    );
    Ok(())
}

// ------------------------------------------------------------ virial-check

#[derive(Serialize)]
struct LocalizedReport {
    big_r: f64,
    v_r: f64,
    vddot: f64,
}

#[derive(Serialize)]
struct VirialReport {
    record: DiagnosticsRecord,
    mass_resonant: bool,
    radial: bool,
    /// Closed-form variance second derivative (resonant systems only).
    vddot_formula: Option<f64>,
    localized: Option<LocalizedReport>,
    localized_skipped: Option<String>,
}

fn run_virial_check(args: &VirialCheckArgs, argv: &[String]) -> Result<(), AppError> {
    let spec = load_spec(&args.common.spec, args.common.n)?;
    let grid = make_grid(&spec, &args.grid)?;
    write_manifest(&args.common.out, argv, &spec, Some(&grid), args.common.seed)?;
    let data = load_init(&args.init, grid, spec.l)?;
    let resonant = check_mass_resonance(&spec);
    let radial = diagnostics::is_radial(&data, 1e-8);
    let record = DiagnosticsRecord::build(&data, &spec, resonant)?;
    let vddot_formula = diagnostics::virial_rhs(&data, &spec)?;
    let (localized, localized_skipped) = if resonant && radial {
        let (v_r, vddot) = localized_virial(&data, &spec, args.big_r)?;
        (
            Some(LocalizedReport {
                big_r: args.big_r,
                v_r,
                vddot,
            }),
            None,
        )
    } else {
        let why = if !resonant {
            "system is not mass-resonant"
        } else {
            "data is not radially symmetric"
        };
        (None, Some(why.to_string()))
    };
    let report = VirialReport {
        record,
        mass_resonant: resonant,
        radial,
        vddot_formula,
        localized,
        localized_skipped,
    };
    write_json(&args.common.out.join("report.json"), &report)?;
    println!(
        "virial-check: V={} Vdot={} Vddot_formula={:?} localized={}",
        report.record.v,
        report.record.vdot,
        report.vddot_formula,
        report.localized.is_some()
    );
    Ok(())
}
