//! Built-in example systems.

use super::{Monomial, Potential, SystemSpec};
use crate::error::CoreError;
use crate::Complex;

fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Quadratic two-component system: F = z̄₁² z₂ with α = (1, 1), γ = (1, κ),
/// β = (0, 0). Mass-resonant exactly at κ = 1/2.
pub fn quadratic_spec(kappa: f64, n: usize) -> Result<SystemSpec, CoreError> {
    if kappa <= 0.0 {
        return Err(CoreError::InvalidParameter("kappa must be > 0".into()));
    }
    let potential = Potential::new(
        2,
        2,
        vec![Monomial {
            coeff: c(1.0),
            exps: vec![(0, 2), (1, 0)],
        }],
    )?;
    SystemSpec::new(
        n,
        2,
        vec![1.0, 1.0],
        vec![1.0, kappa],
        vec![0.0, 0.0],
        potential,
    )
}

/// Cubic two-component system:
/// F = (1/36)|z₁|⁴ + (9/4)|z₂|⁴ + |z₁|²|z₂|² + (1/9) z̄₁³ z₂
/// with α = (1, σ), γ = (1, 1), β = (1, μ). Mass-resonant exactly at σ = 3.
pub fn cubic_spec(sigma: f64, mu: f64, n: usize) -> Result<SystemSpec, CoreError> {
    if sigma <= 0.0 || mu <= 0.0 {
        return Err(CoreError::InvalidParameter("sigma and mu must be > 0".into()));
    }
    let potential = Potential::new(
        2,
        3,
        vec![
            Monomial {
                coeff: c(1.0 / 36.0),
                exps: vec![(2, 2), (0, 0)],
            },
            Monomial {
                coeff: c(9.0 / 4.0),
                exps: vec![(0, 0), (2, 2)],
            },
            Monomial {
                coeff: c(1.0),
                exps: vec![(1, 1), (1, 1)],
            },
            Monomial {
                coeff: c(1.0 / 9.0),
                exps: vec![(0, 3), (1, 0)],
            },
        ],
    )?;
    SystemSpec::new(
        n,
        3,
        vec![1.0, sigma],
        vec![1.0, 1.0],
        vec![1.0, mu],
        potential,
    )
}

/// Scalar cubic equation: l = 1, F = |z|⁴/4, f = |z|² z.
pub fn single_cubic_spec(n: usize) -> Result<SystemSpec, CoreError> {
    let potential = Potential::new(
        1,
        3,
        vec![Monomial {
            coeff: c(0.25),
            exps: vec![(2, 2)],
        }],
    )?;
    SystemSpec::new(n, 3, vec![1.0], vec![1.0], vec![0.0], potential)
}

/// Resolve a preset expression such as `quadratic(kappa=0.5)`,
/// `cubic(sigma=3, mu=1)` or `single_cubic` for dimension n.
pub fn preset(expr: &str, n: usize) -> Result<SystemSpec, CoreError> {
    let expr = expr.trim();
    let (name, args) = match expr.split_once('(') {
        Some((name, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| CoreError::UnknownPreset(expr.to_string()))?;
            (name.trim(), parse_args(inner)?)
        }
        None => (expr, Vec::new()),
    };
    let get = |key: &str, default: Option<f64>| -> Result<f64, CoreError> {
        for (k, v) in &args {
            if k == key {
                return Ok(*v);
            }
        }
        default.ok_or_else(|| {
            CoreError::InvalidParameter(format!("preset {name} requires parameter {key}"))
        })
    };
    match name {
        "quadratic" => quadratic_spec(get("kappa", None)?, n),
        "cubic" => cubic_spec(get("sigma", None)?, get("mu", Some(1.0))?, n),
        "single_cubic" => single_cubic_spec(n),
        _ => Err(CoreError::UnknownPreset(expr.to_string())),
    }
}

fn parse_args(inner: &str) -> Result<Vec<(String, f64)>, CoreError> {
    let mut out = Vec::new();
    for part in inner.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part.split_once('=').ok_or_else(|| {
            CoreError::InvalidParameter(format!("preset argument must be key=value: {part:?}"))
        })?;
        let value: f64 = v.trim().parse().map_err(|_| {
            CoreError::InvalidParameter(format!("invalid preset argument value: {:?}", v.trim()))
        })?;
        out.push((k.trim().to_string(), value));
    }
    Ok(out)
}
