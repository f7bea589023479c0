//! Dichotomy classifier: given the conserved quantities of the data and the
//! ground-state thresholds at frequency 1 with no linear potential, decide
//! which global-existence or blow-up statement applies.

use serde::Serialize;

use crate::error::CoreError;
use crate::groundstate::{self, GroundStateResult};
use crate::nonlinearity::{check_mass_resonance, SystemSpec};
use crate::spectral::FieldState;

use super::{critical_index, mass, energy_parts, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assumption {
    FiniteVariance,
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    GlobalByTheorem1i,
    GlobalByTheorem1ii,
    GlobalByTheorem2i,
    BlowUpCandidateByTheorem2ii,
    Indeterminate,
}

/// Ground-state side of the threshold comparisons, all at (omega, beta) =
/// (1, 0) where the action mass Qcal coincides with the conserved mass Q.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThresholdInputs {
    pub q_psi: f64,
    pub k_psi: f64,
    /// Energy of the ground state with beta = 0: K - 2P.
    pub e_psi: f64,
    pub c_opt: f64,
}

impl ThresholdInputs {
    pub fn from_ground_state(gs: &GroundStateResult, spec: &SystemSpec) -> Result<Self, CoreError> {
        if !gs.converged {
            return Err(CoreError::NotConverged(
                "classifier thresholds need a converged ground state".into(),
            ));
        }
        let fx = &gs.functionals;
        Ok(ThresholdInputs {
            q_psi: fx.q,
            k_psi: fx.k,
            e_psi: fx.k - 2.0 * fx.p,
            c_opt: groundstate::optimal_gn_constant(gs, spec),
        })
    }

    /// Synthetic thresholds from the exact algebraic relations, normalized
    /// to Q(psi) = q_psi. Useful in dimensions where no grid solve is
    /// available but the classifier algebra is still well defined.
    pub fn synthetic(n: usize, p: u32, q_psi: f64) -> Self {
        let (s_c, _) = critical_index(n, p as f64);
        let nf = n as f64;
        let pe = p as f64;
        let k_psi = nf / (2.0 * (1.0 - s_c)) * q_psi;
        let e_psi = s_c / (1.0 - s_c) * q_psi;
        let c_opt = 2.0 * (2.0 * (1.0 - s_c)).powf((pe - 1.0) * s_c / 2.0)
            / ((pe - 1.0) * nf.powf((pe - 1.0) * s_c / 2.0 + 1.0) * q_psi.powf((pe - 1.0) / 2.0));
        ThresholdInputs {
            q_psi,
            k_psi,
            e_psi,
            c_opt,
        }
    }
}

/// Every number that went into a classification.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThresholdRecord {
    pub q0: f64,
    pub e0: f64,
    pub k0: f64,
    pub q_psi: f64,
    pub e_psi: f64,
    pub k_psi: f64,
    /// Q(u0)^{1-s_c} E(u0)^{s_c} vs Q(psi)^{1-s_c} Ecal(psi)^{s_c}.
    pub sharp1_left: f64,
    pub sharp1_right: f64,
    /// Q(u0)^{1-s_c} K(u0)^{s_c} vs Q(psi)^{1-s_c} K(psi)^{s_c}; the same
    /// pair serves as the gradient blow-up comparison with '>'.
    pub sharp2_left: f64,
    pub sharp2_right: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub regime: Regime,
    pub s_c: f64,
    pub thresholds: ThresholdRecord,
    /// gamma = (bq)^{-1/(q-1)} of the comparison argument (intercritical
    /// only), cross-checked against its closed form in the masses.
    pub gamma_threshold: Option<f64>,
    pub gamma_crosscheck_rel: Option<f64>,
    pub mass_resonant: bool,
    pub assumption: Assumption,
    pub classification: Classification,
    pub reason: String,
}

/// Pure-algebra classifier over precomputed scalars; `classify` is a thin
/// wrapper computing them from fields.
#[allow(clippy::too_many_arguments)]
pub fn classify_thresholds(
    n: usize,
    p: u32,
    q0: f64,
    e0: f64,
    k0: f64,
    inputs: &ThresholdInputs,
    mass_resonant: bool,
    assumption: Assumption,
) -> Verdict {
    let pe = p as f64;
    let (s_c, regime) = critical_index(n, pe);
    // E(u0)^{s_c} for negative energy: the comparison is monotone in E, so
    // negative energy sits strictly below any positive threshold.
    let pow_signed = |base: f64, exp: f64| -> f64 {
        if base < 0.0 {
            f64::NEG_INFINITY
        } else {
            base.powf(exp)
        }
    };
    let sharp1_left = q0.powf(1.0 - s_c) * pow_signed(e0, s_c);
    let sharp1_right = inputs.q_psi.powf(1.0 - s_c) * pow_signed(inputs.e_psi, s_c);
    let sharp2_left = q0.powf(1.0 - s_c) * k0.powf(s_c);
    let sharp2_right = inputs.q_psi.powf(1.0 - s_c) * inputs.k_psi.powf(s_c);
    let thresholds = ThresholdRecord {
        q0,
        e0,
        k0,
        q_psi: inputs.q_psi,
        e_psi: inputs.e_psi,
        k_psi: inputs.k_psi,
        sharp1_left,
        sharp1_right,
        sharp2_left,
        sharp2_right,
    };

    let (gamma_threshold, gamma_crosscheck_rel) = if s_c > 0.0 && s_c < 1.0 {
        let q_exp = (pe - 1.0) * s_c / 2.0 + 1.0;
        let b = 2.0 * inputs.c_opt * q0.powf((pe - 1.0) * (1.0 - s_c) / 2.0);
        let gamma = (b * q_exp).powf(-1.0 / (q_exp - 1.0));
        let closed = n as f64 / (2.0 * (1.0 - s_c)) * inputs.q_psi.powf(1.0 / s_c)
            / q0.powf((1.0 - s_c) / s_c);
        (Some(gamma), Some((gamma - closed).abs() / closed))
    } else {
        (None, None)
    };

    let (classification, reason) = match regime {
        Regime::L2Subcritical => (
            Classification::GlobalByTheorem1i,
            "subcritical exponent: global existence is unconditional".to_string(),
        ),
        Regime::L2Critical => {
            if q0 < inputs.q_psi {
                (
                    Classification::GlobalByTheorem1ii,
                    format!("critical mass condition: Q(u0) = {q0:.6e} < Q(psi) = {:.6e}", inputs.q_psi),
                )
            } else {
                (
                    Classification::Indeterminate,
                    "critical regime with Q(u0) >= Q(psi): no statement applies".to_string(),
                )
            }
        }
        Regime::Intercritical => {
            let sharp1 = sharp1_left < sharp1_right;
            let sharp2 = sharp2_left < sharp2_right;
            let gradient = sharp2_left > sharp2_right;
            // The radial blow-up statement needs p below both the
            // energy-critical exponent and 5.
            let radial_p_ok = if n >= 3 {
                pe < ((n as f64 + 2.0) / (n as f64 - 2.0)).min(5.0)
            } else {
                pe < 5.0
            };
            let assumption_ok = match assumption {
                Assumption::FiniteVariance => true,
                Assumption::Radial => radial_p_ok,
            };
            if sharp1 && sharp2 {
                (
                    Classification::GlobalByTheorem2i,
                    "mass-energy and mass-gradient products both below the ground-state thresholds"
                        .to_string(),
                )
            } else if sharp1 && gradient && mass_resonant && assumption_ok {
                (
                    Classification::BlowUpCandidateByTheorem2ii,
                    "mass-energy product below and mass-gradient product above the thresholds, \
                     with mass resonance and the asserted decay hypothesis"
                        .to_string(),
                )
            } else {
                let why = if !sharp1 {
                    "mass-energy product not below the ground-state threshold"
                } else if gradient && !mass_resonant {
                    "gradient condition holds but the system is not mass-resonant"
                } else if gradient && !assumption_ok {
                    "gradient condition holds but the radial statement needs a smaller exponent"
                } else {
                    "data sits exactly at a threshold"
                };
                (Classification::Indeterminate, why.to_string())
            }
        }
        Regime::H1CriticalOrBeyond => (
            Classification::Indeterminate,
            "exponent at or beyond the energy-critical range: out of scope".to_string(),
        ),
    };

    Verdict {
        regime,
        s_c,
        thresholds,
        gamma_threshold,
        gamma_crosscheck_rel,
        mass_resonant,
        assumption,
        classification,
        reason,
    }
}

pub fn classify(
    u0: &FieldState,
    spec: &SystemSpec,
    gs: &GroundStateResult,
    assumption: Assumption,
) -> Result<Verdict, CoreError> {
    let inputs = ThresholdInputs::from_ground_state(gs, spec)?;
    let q0 = mass(u0, spec)?;
    let (k0, _l0, _p0, e0) = energy_parts(u0, spec)?;
    Ok(classify_thresholds(
        spec.n,
        spec.p,
        q0,
        e0,
        k0,
        &inputs,
        check_mass_resonance(spec),
        assumption,
    ))
}

/// Residuals of the exact ground-state relations used as a quality gate:
/// K(psi) = n/(2(1-s_c)) Q(psi) and Ecal(psi) = s_c/(1-s_c) Q(psi).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThresholdRelations {
    pub k_residual: f64,
    pub e_residual: f64,
}

pub fn threshold_relations(gs: &GroundStateResult, spec: &SystemSpec) -> ThresholdRelations {
    let fx = &gs.functionals;
    let (s_c, _) = critical_index(spec.n, spec.p as f64);
    let n = spec.n as f64;
    let e_psi = fx.k - 2.0 * fx.p;
    let k_target = n / (2.0 * (1.0 - s_c)) * fx.q;
    let e_target = s_c / (1.0 - s_c) * fx.q;
    ThresholdRelations {
        k_residual: (fx.k - k_target).abs() / fx.k.abs().max(1e-300),
        e_residual: (e_psi - e_target).abs() / e_psi.abs().max(fx.q.abs()).max(1e-300),
    }
}
