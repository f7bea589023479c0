//! Localized radial virial expression with an explicit cutoff.
//!
//! The cutoff chi is r^2 for r <= 1 and a constant for r >= 3, joined on
//! [1, 3] by integrating a quintic Hermite bridge for chi': the bridge
//! matches (value, slope, curvature) = (2, 2, 0) at r = 1 and (0, 0, 0) at
//! r = 3, which gives chi itself the contact data (1, 2, 2) and (c, 0, 0)
//! and keeps chi'' <= 2 and chi' >= 0 everywhere without any clamping.

use crate::error::CoreError;
use crate::nonlinearity::{check_mass_resonance, SystemSpec};
use crate::spectral::{self, FieldState};

// chi'(1 + s) = 2 + 2s + A s^3 + B s^4 + C s^5 on s in [0, 2].
const A: f64 = -11.0 / 2.0;
const B: f64 = 31.0 / 8.0;
const C: f64 = -3.0 / 4.0;

/// chi(r) for r >= 3.
pub const CHI_PLATEAU: f64 = 19.0 / 5.0;

pub fn chi(r: f64) -> f64 {
    if r <= 1.0 {
        r * r
    } else if r >= 3.0 {
        CHI_PLATEAU
    } else {
        let s = r - 1.0;
        1.0 + 2.0 * s + s * s
            + A * s.powi(4) / 4.0
            + B * s.powi(5) / 5.0
            + C * s.powi(6) / 6.0
    }
}

pub fn chi_d1(r: f64) -> f64 {
    if r <= 1.0 {
        2.0 * r
    } else if r >= 3.0 {
        0.0
    } else {
        let s = r - 1.0;
        2.0 + 2.0 * s + A * s.powi(3) + B * s.powi(4) + C * s.powi(5)
    }
}

pub fn chi_d2(r: f64) -> f64 {
    if r <= 1.0 {
        2.0
    } else if r >= 3.0 {
        0.0
    } else {
        let s = r - 1.0;
        2.0 + 3.0 * A * s * s + 4.0 * B * s.powi(3) + 5.0 * C * s.powi(4)
    }
}

pub fn chi_d3(r: f64) -> f64 {
    if !(1.0..3.0).contains(&r) {
        0.0
    } else {
        let s = r - 1.0;
        6.0 * A * s + 12.0 * B * s * s + 20.0 * C * s.powi(3)
    }
}

pub fn chi_d4(r: f64) -> f64 {
    if !(1.0..3.0).contains(&r) {
        0.0
    } else {
        let s = r - 1.0;
        6.0 * A + 24.0 * B * s + 60.0 * C * s * s
    }
}

/// Radial Laplacian of chi_R(r) = R^2 chi(r/R) in dimension n.
fn laplacian_chi_r(r: f64, big_r: f64, n: f64) -> f64 {
    let s = r / big_r;
    if s <= 1.0 {
        2.0 * n
    } else {
        chi_d2(s) + (n - 1.0) * big_r * chi_d1(s) / r
    }
}

/// Radial bilaplacian of chi_R in dimension n.
fn bilaplacian_chi_r(r: f64, big_r: f64, n: f64) -> f64 {
    let s = r / big_r;
    if s <= 1.0 || s >= 3.0 {
        0.0
    } else {
        chi_d4(s) / (big_r * big_r)
            + 2.0 * (n - 1.0) * chi_d3(s) / (big_r * r)
            + (n - 1.0) * (n - 3.0) * chi_d2(s) / (r * r)
            - (n - 1.0) * (n - 3.0) * big_r * chi_d1(s) / (r * r * r)
    }
}

/// Localized variance V_R = (1/2) int chi_R sum (alpha_k^2/gamma_k) |u_k|^2
/// and the localized second derivative
///   2 int chi_R'' sum gamma_k |grad u_k|^2
///   - (1/2) int Delta^2 chi_R sum gamma_k |u_k|^2
///   + (1 - p) Re int Delta chi_R F(u),
/// scaled by 2 so that for R large enough to cover the support the value
/// coincides with `virial_rhs` (which tracks V, not V/2).
pub fn localized_virial(
    u: &FieldState,
    spec: &SystemSpec,
    big_r: f64,
) -> Result<(f64, f64), CoreError> {
    if !super::is_radial(u, 1e-8) {
        return Err(CoreError::NonRadial(
            "localized virial needs radially symmetric data".into(),
        ));
    }
    if !check_mass_resonance(spec) {
        return Err(CoreError::InvalidParameter(
            "localized virial identity needs the mass-resonance condition".into(),
        ));
    }
    let grid = u.grid;
    let n = grid.n as f64;
    let len = grid.len();

    let radii: Vec<f64> = (0..len).map(|flat| grid.radius_sq(flat).sqrt()).collect();

    // V_R.
    let mut weight = vec![0.0f64; len];
    for (k, comp) in u.components.iter().enumerate() {
        let w = spec.alpha[k].powi(2) / spec.gamma[k];
        for (flat, z) in comp.iter().enumerate() {
            let r = radii[flat];
            weight[flat] += 0.5 * big_r * big_r * chi(r / big_r) * w * z.norm_sqr();
        }
    }
    let v_r = spectral::integrate(&weight, &grid)?;

    // Gradient term: 2 int chi'' (r/R) sum gamma_k |grad u_k|^2.
    let mut grad_term = vec![0.0f64; len];
    for (k, comp) in u.components.iter().enumerate() {
        for ax in 0..grid.n {
            let d = spectral::derivative(comp, &grid, ax)?;
            for (flat, z) in d.iter().enumerate() {
                grad_term[flat] += spec.gamma[k] * z.norm_sqr();
            }
        }
    }
    for (flat, g) in grad_term.iter_mut().enumerate() {
        *g *= 2.0 * chi_d2(radii[flat] / big_r);
    }
    let gradient = spectral::integrate(&grad_term, &grid)?;

    // Bilaplacian term: -(1/2) int Delta^2 chi_R sum gamma_k |u_k|^2.
    let mut bil = vec![0.0f64; len];
    for (k, comp) in u.components.iter().enumerate() {
        for (flat, z) in comp.iter().enumerate() {
            bil[flat] += spec.gamma[k] * z.norm_sqr();
        }
    }
    for (flat, b) in bil.iter_mut().enumerate() {
        *b *= -0.5 * bilaplacian_chi_r(radii[flat], big_r, n);
    }
    let bilap = spectral::integrate(&bil, &grid)?;

    // Potential term: (1 - p) Re int Delta chi_R F(u).
    let f_vals = super::eval_potential_field(u, spec);
    let pot: Vec<f64> = f_vals
        .iter()
        .enumerate()
        .map(|(flat, fv)| laplacian_chi_r(radii[flat], big_r, n) * fv.re)
        .collect();
    let potential = (1.0 - spec.p as f64) * spectral::integrate(&pot, &grid)?;

    Ok((v_r, 2.0 * (gradient + bilap + potential)))
}
