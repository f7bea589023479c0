//! Trajectory diagnostics: conserved quantities, variance/virial identities
//! (global and localized radial), and the global-existence vs blow-up
//! classifier.

mod classify;
mod virial;

pub use classify::{
    classify, classify_thresholds, threshold_relations, Assumption, Classification,
    ThresholdInputs, ThresholdRelations, Verdict,
};
pub use virial::{chi, chi_d1, chi_d2, chi_d3, chi_d4, localized_virial, CHI_PLATEAU};

use serde::Serialize;

use crate::error::CoreError;
use crate::groundstate;
use crate::nonlinearity::{check_mass_resonance, SystemSpec};
use crate::spectral::{self, FieldState};
use crate::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    L2Subcritical,
    L2Critical,
    Intercritical,
    H1CriticalOrBeyond,
}

/// s_c = n/2 - 2/(p-1) together with the criticality regime label.
pub fn critical_index(n: usize, p: f64) -> (f64, Regime) {
    let s_c = groundstate::critical_index(n, p);
    let regime = if s_c < 0.0 {
        Regime::L2Subcritical
    } else if s_c == 0.0 {
        Regime::L2Critical
    } else if s_c < 1.0 {
        Regime::Intercritical
    } else {
        Regime::H1CriticalOrBeyond
    };
    (s_c, regime)
}

/// Mass Q = sum (sigma_k alpha_k / 2) ||u_k||^2.
pub fn mass(u: &FieldState, spec: &SystemSpec) -> Result<f64, CoreError> {
    let sigma = spec.sigma.as_ref().ok_or_else(|| {
        CoreError::InvalidParameter("mass needs the sigma vector (gauge structure)".into())
    })?;
    let mut q = 0.0;
    for (k, comp) in u.components.iter().enumerate() {
        q += sigma[k] * spec.alpha[k] / 2.0 * spectral::norm_sq(comp, &u.grid)?;
    }
    Ok(q)
}

/// (K, L, P, E) with K = sum gamma_k ||grad u_k||^2, L = sum beta_k ||u_k||^2,
/// P = Re int F(u), E = K + L - 2P.
pub fn energy_parts(u: &FieldState, spec: &SystemSpec) -> Result<(f64, f64, f64, f64), CoreError> {
    let mut k = 0.0;
    let mut l = 0.0;
    for (kk, comp) in u.components.iter().enumerate() {
        k += spec.gamma[kk] * spectral::gradient_norm_sq(comp, &u.grid)?;
        l += spec.beta[kk] * spectral::norm_sq(comp, &u.grid)?;
    }
    let p = groundstate::potential_energy(u, spec)?;
    Ok((k, l, p, k + l - 2.0 * p))
}

/// Weighted variance V = sum (alpha_k^2/gamma_k) int |x|^2 |u_k|^2 and its
/// time derivative by the moment formula
/// V' = 4 sum alpha_k Im int (grad u_k . x) conj(u_k).
pub fn variance(u: &FieldState, spec: &SystemSpec) -> Result<(f64, f64), CoreError> {
    let grid = u.grid;
    let mut v = 0.0;
    let mut vdot = 0.0;
    let mut idx = [0usize; 3];
    for (k, comp) in u.components.iter().enumerate() {
        let weighted: Vec<f64> = comp
            .iter()
            .enumerate()
            .map(|(flat, z)| grid.radius_sq(flat) * z.norm_sqr())
            .collect();
        v += spec.alpha[k].powi(2) / spec.gamma[k] * spectral::integrate(&weighted, &grid)?;

        let mut moment = vec![0.0f64; grid.len()];
        for ax in 0..grid.n {
            let d = spectral::derivative(comp, &grid, ax)?;
            for (flat, m) in moment.iter_mut().enumerate() {
                grid.unravel(flat, &mut idx[..grid.n]);
                let x = grid.coord(idx[ax]);
                *m += (d[flat] * x * comp[flat].conj()).im;
            }
        }
        vdot += 4.0 * spec.alpha[k] * spectral::integrate(&moment, &grid)?;
    }
    Ok((v, vdot))
}

/// Right-hand side of the variance identity
/// V'' = 2n(p-1)E - 2n(p-1)L + 2(4 - np + n)K,
/// valid under mass resonance; `None` otherwise (the residual against it is
/// still interesting data, but the identity is not asserted).
pub fn virial_rhs(u: &FieldState, spec: &SystemSpec) -> Result<Option<f64>, CoreError> {
    if !check_mass_resonance(spec) {
        return Ok(None);
    }
    Ok(Some(virial_rhs_unchecked(u, spec)?))
}

/// The same right-hand side evaluated without the resonance gate.
pub fn virial_rhs_unchecked(u: &FieldState, spec: &SystemSpec) -> Result<f64, CoreError> {
    let (k, l, _p, e) = energy_parts(u, spec)?;
    let n = spec.n as f64;
    let pe = spec.p as f64;
    Ok(2.0 * n * (pe - 1.0) * e - 2.0 * n * (pe - 1.0) * l
        + 2.0 * (4.0 - n * pe + n) * k)
}

/// One row of a trajectory's diagnostic series.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub q: f64,
    pub e: f64,
    pub k: f64,
    pub l: f64,
    pub p: f64,
    pub v: f64,
    pub vdot: f64,
    /// Closed-form V'' (absent when the system is not mass-resonant).
    pub vddot_formula: Option<f64>,
    /// Central-difference V'' from the V series; filled in after the run.
    pub vddot_fd: Option<f64>,
    pub sup_norm: f64,
    pub boundary_mass: f64,
}

impl DiagnosticsRecord {
    pub fn build(u: &FieldState, spec: &SystemSpec, resonant: bool) -> Result<Self, CoreError> {
        let q = mass(u, spec)?;
        let (k, l, p, e) = energy_parts(u, spec)?;
        let (v, vdot) = variance(u, spec)?;
        let vddot_formula = if resonant {
            Some(virial_rhs_unchecked(u, spec)?)
        } else {
            None
        };
        Ok(DiagnosticsRecord {
            t: u.t,
            q,
            e,
            k,
            l,
            p,
            v,
            vdot,
            vddot_formula,
            vddot_fd: None,
            sup_norm: u.sup_norm(),
            boundary_mass: u.boundary_sup(),
        })
    }
}

/// Fill the vddot_fd column by central-differencing the V series (interior
/// records only; requires at least three records with distinct times).
pub fn fill_vddot_fd(series: &mut [DiagnosticsRecord]) {
    if series.len() < 3 {
        return;
    }
    for i in 1..series.len() - 1 {
        let (tm, t0, tp) = (series[i - 1].t, series[i].t, series[i + 1].t);
        let (vm, v0, vp) = (series[i - 1].v, series[i].v, series[i + 1].v);
        let hm = t0 - tm;
        let hp = tp - t0;
        if hm <= 0.0 || hp <= 0.0 {
            continue;
        }
        // Nonuniform central second difference.
        let fd = 2.0 * (hm * vp - (hm + hp) * v0 + hp * vm) / (hm * hp * (hm + hp));
        series[i].vddot_fd = Some(fd);
    }
}

/// Grid-level radial symmetry check: invariance (within tol, relative to the
/// sup norm) under every axis reflection and under coordinate transposition.
pub fn is_radial(u: &FieldState, tol: f64) -> bool {
    let grid = u.grid;
    let n = grid.points_per_axis;
    let sup = u.sup_norm().max(1e-300);
    let mut idx = [0usize; 3];
    let ravel = |idx: &[usize]| -> usize {
        let mut flat = 0;
        for &i in idx {
            flat = flat * n + i;
        }
        flat
    };
    for comp in &u.components {
        for (flat, v) in comp.iter().enumerate() {
            grid.unravel(flat, &mut idx[..grid.n]);
            // Reflections x_ax -> -x_ax (periodic index N - j mod N).
            for ax in 0..grid.n {
                let mut jdx = [0usize; 3];
                jdx[..grid.n].copy_from_slice(&idx[..grid.n]);
                jdx[ax] = (n - idx[ax]) % n;
                let w = comp[ravel(&jdx[..grid.n])];
                if (v - w).norm() > tol * sup {
                    return false;
                }
            }
            // One transposition suffices with the reflections to generate
            // the full symmetry group for n <= 3.
            if grid.n >= 2 {
                let mut jdx = [0usize; 3];
                jdx[..grid.n].copy_from_slice(&idx[..grid.n]);
                jdx.swap(0, 1);
                let w = comp[ravel(&jdx[..grid.n])];
                if (v - w).norm() > tol * sup {
                    return false;
                }
            }
            if grid.n == 3 {
                let mut jdx = [0usize; 3];
                jdx[..grid.n].copy_from_slice(&idx[..grid.n]);
                jdx.swap(1, 2);
                let w = comp[ravel(&jdx[..grid.n])];
                if (v - w).norm() > tol * sup {
                    return false;
                }
            }
        }
    }
    true
}

pub(crate) fn eval_potential_field(u: &FieldState, spec: &SystemSpec) -> Vec<Complex> {
    let mut z = vec![Complex::default(); spec.l];
    (0..u.grid.len())
        .map(|flat| {
            for (k, c) in u.components.iter().enumerate() {
                z[k] = c[flat];
            }
            spec.potential.eval(&z)
        })
        .collect()
}

#[cfg(test)]
mod tests;
