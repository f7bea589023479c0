//! Ground states of the stationary elliptic system
//! -gamma_k Delta psi_k + b_k psi_k = f_k(psi), b_k = sigma_k alpha_k omega/2 + beta_k,
//! via a generalized Petviashvili iteration, plus the variational
//! functionals and the algebraic identities they satisfy at a solution.

use serde::Serialize;

use crate::error::CoreError;
use crate::nonlinearity::SystemSpec;
use crate::spectral::{self, FieldState, GridSpec};
use crate::Complex;

/// Critical Sobolev index s_c = n/2 - 2/(p - 1).
pub fn critical_index(n: usize, p: f64) -> f64 {
    n as f64 / 2.0 - 2.0 / (p - 1.0)
}

#[derive(Debug, Clone)]
pub struct EllipticParams {
    pub spec: SystemSpec,
    pub omega: f64,
    pub b: Vec<f64>,
}

impl EllipticParams {
    pub fn new(spec: SystemSpec, omega: f64) -> Result<Self, CoreError> {
        let sigma = spec.sigma.clone().ok_or_else(|| {
            CoreError::InvalidParameter(
                "elliptic problem needs a positive sigma vector (gauge structure)".into(),
            )
        })?;
        let b: Vec<f64> = sigma
            .iter()
            .zip(&spec.alpha)
            .zip(&spec.beta)
            .map(|((s, a), beta)| s * a * omega / 2.0 + beta)
            .collect();
        if b.iter().any(|&bk| bk <= 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "all b_k = sigma_k alpha_k omega/2 + beta_k must be > 0, got {b:?}"
            )));
        }
        Ok(EllipticParams { spec, omega, b })
    }
}

/// All the scalar functionals of a field in one record.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Functionals {
    /// K = sum gamma_k ||grad u_k||^2
    pub k: f64,
    /// L = sum beta_k ||u_k||^2
    pub l: f64,
    /// Qcal = sum b_k ||u_k||^2
    pub qcal: f64,
    /// P = Re int F(u)
    pub p: f64,
    /// Action I = (K + Qcal)/2 - P
    pub i: f64,
    /// Weinstein quotient J (absent when P vanishes)
    pub j: Option<f64>,
    /// Mass Q = sum (sigma_k alpha_k / 2) ||u_k||^2
    pub q: f64,
    /// Energy E = K + L - 2P
    pub e: f64,
}

/// P = Re int F(u) dx.
pub fn potential_energy(u: &FieldState, spec: &SystemSpec) -> Result<f64, CoreError> {
    let mut z = vec![Complex::default(); spec.l];
    let vals: Vec<f64> = (0..u.grid.len())
        .map(|flat| {
            for (k, c) in u.components.iter().enumerate() {
                z[k] = c[flat];
            }
            spec.potential.eval(&z).re
        })
        .collect();
    spectral::integrate(&vals, &u.grid)
}

pub fn functionals(u: &FieldState, params: &EllipticParams) -> Result<Functionals, CoreError> {
    let spec = &params.spec;
    let sigma = spec.sigma.as_ref().expect("EllipticParams guarantees sigma");
    let mut k = 0.0;
    let mut l = 0.0;
    let mut qcal = 0.0;
    let mut q = 0.0;
    for (kk, comp) in u.components.iter().enumerate() {
        let grad = spectral::gradient_norm_sq(comp, &u.grid)?;
        let mass = spectral::norm_sq(comp, &u.grid)?;
        k += spec.gamma[kk] * grad;
        l += spec.beta[kk] * mass;
        qcal += params.b[kk] * mass;
        q += sigma[kk] * spec.alpha[kk] / 2.0 * mass;
    }
    let p = potential_energy(u, spec)?;
    let i = (k + qcal) / 2.0 - p;
    let s_c = critical_index(spec.n, spec.p as f64);
    let pe = spec.p as f64;
    let j = if p.abs() > 1e-14 * k.max(qcal).max(1.0) {
        Some(qcal.powf((pe - 1.0) * (1.0 - s_c) / 2.0) * k.powf((pe - 1.0) * s_c / 2.0 + 1.0) / p)
    } else {
        None
    };
    Ok(Functionals {
        k,
        l,
        qcal,
        p,
        i,
        j,
        q,
        e: k + l - 2.0 * p,
    })
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub psi: FieldState,
    pub omega: f64,
    pub functionals: Functionals,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Why a run ended non-converged, when it did.
    pub failure: Option<String>,
}

fn apply_elliptic_op(
    comp: &[Complex],
    grid: &GridSpec,
    gamma: f64,
    b: f64,
) -> Result<Vec<Complex>, CoreError> {
    let lap = spectral::laplacian(comp, grid)?;
    Ok(comp
        .iter()
        .zip(&lap)
        .map(|(u, lu)| -gamma * lu + b * u)
        .collect())
}

fn invert_elliptic_op(comp: &[Complex], grid: &GridSpec, gamma: f64, b: f64) -> Vec<Complex> {
    let mut out = comp.to_vec();
    spectral::apply_multiplier(&mut out, grid, |xi| {
        let k2: f64 = xi.iter().map(|x| x * x).sum();
        Complex::new(1.0 / (gamma * k2 + b), 0.0)
    });
    out
}

fn eval_f_field(u: &FieldState, spec: &SystemSpec) -> Vec<Vec<Complex>> {
    let mut z = vec![Complex::default(); spec.l];
    let mut out = vec![vec![Complex::default(); u.grid.len()]; spec.l];
    let mut fz = vec![Complex::default(); spec.l];
    for flat in 0..u.grid.len() {
        for (k, c) in u.components.iter().enumerate() {
            z[k] = c[flat];
        }
        spec.f.eval(&z, &mut fz);
        for k in 0..spec.l {
            out[k][flat] = fz[k];
        }
    }
    out
}

/// Sup-norm of the elliptic residual -gamma_k Delta psi_k + b_k psi_k - f_k(psi).
pub fn elliptic_residual(psi: &FieldState, params: &EllipticParams) -> Result<f64, CoreError> {
    let f = eval_f_field(psi, &params.spec);
    let mut worst = 0.0f64;
    for k in 0..params.spec.l {
        let op = apply_elliptic_op(&psi.components[k], &psi.grid, params.spec.gamma[k], params.b[k])?;
        for (a, b) in op.iter().zip(&f[k]) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

/// Generalized Petviashvili iteration with stabilizer exponent p/(p-1).
///
/// psi <- M^{p/(p-1)} (-gamma_k Delta + b_k)^{-1} f_k(psi),
/// M = sum_k <(-gamma_k Delta + b_k) psi_k, psi_k> / sum_k <f_k(psi), psi_k>
/// (real L^2 inner products). Components are projected to their real part
/// every step; the sought profiles are real.
///
/// Each step is averaged with the previous iterate (relaxation factor 1/2).
/// Coupled systems can have neutrally stable period-2 modes of the plain
/// map -- e.g. for F = conj(z1)^2 z2 the component ratio r = psi1/psi2 maps
/// to 2/r, whose derivative at the fixed point sqrt(2) has modulus one, so
/// the undamped iteration oscillates forever. Averaging maps an eigenvalue
/// lambda of the linearized step to (1 + lambda)/2, which is a strict
/// contraction whenever the plain map is non-expansive, and leaves the
/// fixed points unchanged.
pub fn solve_ground_state(
    params: &EllipticParams,
    grid: GridSpec,
    init: Option<FieldState>,
    tol: f64,
    max_iter: usize,
) -> Result<GroundStateResult, CoreError> {
    let spec = &params.spec;
    if grid.n != spec.n {
        return Err(CoreError::Grid(format!(
            "grid dimension {} does not match system dimension {}",
            grid.n, spec.n
        )));
    }
    let mut psi = match init {
        Some(state) => {
            if state.l() != spec.l || state.grid != grid {
                return Err(CoreError::DimensionMismatch(
                    "initial guess does not match grid/component count".into(),
                ));
            }
            state
        }
        None => FieldState::from_fn(grid, spec.l, |_, x| {
            Complex::new((-x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
        }),
    };
    // Real projection of the guess up front.
    for c in psi.components.iter_mut() {
        for v in c.iter_mut() {
            *v = Complex::new(v.re, 0.0);
        }
    }
    if potential_energy(&psi, spec)? <= 0.0 {
        return Err(CoreError::InitialGuessOutsideP);
    }

    let exponent = spec.p as f64 / (spec.p as f64 - 1.0);
    let mut iterations = 0;
    let mut reached_tol = false;
    let mut last_update = f64::INFINITY;
    let mut polish = 0usize;
    while iterations < max_iter {
        iterations += 1;
        let f = eval_f_field(&psi, spec);
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..spec.l {
            num += spec.gamma[k] * spectral::gradient_norm_sq(&psi.components[k], &grid)?
                + params.b[k] * spectral::norm_sq(&psi.components[k], &grid)?;
            let prod: Vec<f64> = f[k]
                .iter()
                .zip(&psi.components[k])
                .map(|(a, b)| (a * b.conj()).re)
                .collect();
            den += spectral::integrate(&prod, &grid)?;
        }
        let m = num / den;
        if !(1e-8..=1e8).contains(&m) || !m.is_finite() {
            let functionals = functionals(&psi, params)?;
            let residual = elliptic_residual(&psi, params)?;
            return Ok(GroundStateResult {
                psi,
                omega: params.omega,
                functionals,
                residual,
                iterations,
                converged: false,
                failure: Some(format!("stabilizer diverged: M = {m:e}")),
            });
        }
        let scale = m.powf(exponent);
        let theta = 0.5; // relaxation factor, see above
        let mut update = 0.0f64;
        for k in 0..spec.l {
            let mut new_c = invert_elliptic_op(&f[k], &grid, spec.gamma[k], params.b[k]);
            for (v, old) in new_c.iter_mut().zip(&psi.components[k]) {
                let proposed = scale * v.re;
                *v = Complex::new((1.0 - theta) * old.re + theta * proposed, 0.0);
            }
            for (a, b) in new_c.iter().zip(&psi.components[k]) {
                update = update.max((a - b).norm());
            }
            psi.components[k] = new_c;
        }
        if update < tol {
            reached_tol = true;
            // Keep polishing while the update still decreases: this drives
            // the iterate to the discrete fixed point, where the elliptic
            // residual is roundoff-level.
            polish += 1;
            if update >= last_update || update < 1e-15 || polish > 40 {
                break;
            }
        }
        last_update = update;
    }

    let functionals = functionals(&psi, params)?;
    let residual = elliptic_residual(&psi, params)?;
    let pohozaev = verify_pohozaev_raw(&functionals, spec);
    let identities_ok = pohozaev.max_relative_error() < 1e-4;
    Ok(GroundStateResult {
        psi,
        omega: params.omega,
        functionals,
        residual,
        iterations,
        converged: reached_tol && identities_ok,
        failure: if reached_tol && !identities_ok {
            Some("variational identities violated beyond tolerance".into())
        } else if !reached_tol {
            Some("iteration budget exhausted".into())
        } else {
            None
        },
    })
}

/// Relative errors of the algebraic identities a nontrivial solution of the
/// elliptic system must satisfy: P = 2I/(p-1), K = nI, Qcal = 2(1-s_c) I,
/// and the closed form of J in terms of I alone.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PohozaevReport {
    pub p_identity: f64,
    pub k_identity: f64,
    pub qcal_identity: f64,
    pub j_identity: f64,
    pub applicable: bool,
}

impl PohozaevReport {
    pub fn max_relative_error(&self) -> f64 {
        self.p_identity
            .max(self.k_identity)
            .max(self.qcal_identity)
            .max(self.j_identity)
    }
}

fn verify_pohozaev_raw(fx: &Functionals, spec: &SystemSpec) -> PohozaevReport {
    let i = fx.i;
    if i.abs() < 1e-14 {
        return PohozaevReport {
            p_identity: 0.0,
            k_identity: 0.0,
            qcal_identity: 0.0,
            j_identity: 0.0,
            applicable: false,
        };
    }
    let pe = spec.p as f64;
    let n = spec.n as f64;
    let s_c = critical_index(spec.n, pe);
    let p_identity = (fx.p - 2.0 * i / (pe - 1.0)).abs() / i.abs();
    let k_identity = (fx.k - n * i).abs() / i.abs();
    let qcal_identity = (fx.qcal - 2.0 * (1.0 - s_c) * i).abs() / i.abs();
    let j_closed = (pe - 1.0) * n.powf((pe - 1.0) * s_c / 2.0 + 1.0) / 2.0
        * (2.0 * (1.0 - s_c)).powf((pe - 1.0) * (1.0 - s_c) / 2.0)
        * i.powf((pe - 1.0) / 2.0);
    let j_identity = match fx.j {
        Some(j) => (j - j_closed).abs() / j_closed.abs(),
        None => f64::INFINITY,
    };
    PohozaevReport {
        p_identity,
        k_identity,
        qcal_identity,
        j_identity,
        applicable: true,
    }
}

pub fn verify_pohozaev(result: &GroundStateResult, spec: &SystemSpec) -> PohozaevReport {
    verify_pohozaev_raw(&result.functionals, spec)
}

/// Optimal constant of the vector Gagliardo-Nirenberg inequality
/// P(u) <= C_opt Qcal(u)^{(p-1)(1-s_c)/2} K(u)^{(p-1)s_c/2+1},
/// attained at the ground state.
pub fn optimal_gn_constant(result: &GroundStateResult, spec: &SystemSpec) -> f64 {
    let pe = spec.p as f64;
    let n = spec.n as f64;
    let s_c = critical_index(spec.n, pe);
    2.0 * (2.0 * (1.0 - s_c)).powf((pe - 1.0) * s_c / 2.0)
        / ((pe - 1.0)
            * n.powf((pe - 1.0) * s_c / 2.0 + 1.0)
            * result.functionals.qcal.powf((pe - 1.0) / 2.0))
}
