//! Symbolic layer: polynomial potentials F(z_1,...,z_l), their Wirtinger
//! derivatives f_k = dF/dz̄_k + conj(dF/dz_k), the sigma-vector behind the
//! gauge condition, and the mass-resonance test.
//!
//! Everything here is a finite sum of monomials in (z_j, z̄_j) with complex
//! coefficients, which keeps all structural hypotheses decidable or cheaply
//! checkable by sampling.

mod hypotheses;
mod parser;
mod preset;

pub use hypotheses::{validate_hypotheses, HypothesisReport, HypothesisStatus};
pub use parser::{parse_spec, serialize_spec};
pub use preset::{cubic_spec, preset, quadratic_spec, single_cubic_spec};

use crate::error::CoreError;
use crate::Complex;

/// One monomial c * prod_j z_j^{a_j} z̄_j^{b_j}.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: Complex,
    /// One (a_j, b_j) pair per component; length is always l.
    pub exps: Vec<(u32, u32)>,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&(a, b)| a + b).sum()
    }

    pub fn eval(&self, z: &[Complex]) -> Complex {
        let mut acc = self.coeff;
        for (j, &(a, b)) in self.exps.iter().enumerate() {
            acc *= z[j].powu(a) * z[j].conj().powu(b);
        }
        acc
    }

    /// Phase weight row (a_j - b_j), the exponent of e^{i sigma_j theta/2}
    /// picked up by this monomial under the gauge rotation.
    pub fn phase_row(&self) -> Vec<i64> {
        self.exps
            .iter()
            .map(|&(a, b)| a as i64 - b as i64)
            .collect()
    }
}

/// A polynomial in (z, z̄): a collected, canonically ordered monomial sum.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn collect(mut terms: Vec<Monomial>) -> Self {
        terms.sort_by(|x, y| x.exps.cmp(&y.exps));
        let mut out: Vec<Monomial> = Vec::new();
        for t in terms {
            match out.last_mut() {
                Some(last) if last.exps == t.exps => last.coeff += t.coeff,
                _ => out.push(t),
            }
        }
        out.retain(|t| t.coeff.norm() > 0.0);
        Polynomial { terms: out }
    }

    pub fn eval(&self, z: &[Complex]) -> Complex {
        self.terms.iter().map(|t| t.eval(z)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// The potential F: homogeneous of degree p+1, l components.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub l: usize,
    pub p: u32,
    pub terms: Vec<Monomial>,
}

impl Potential {
    pub fn new(l: usize, p: u32, terms: Vec<Monomial>) -> Result<Self, CoreError> {
        if l == 0 {
            return Err(CoreError::InvalidParameter("l must be >= 1".into()));
        }
        if p < 2 {
            return Err(CoreError::InvalidParameter(
                "p must be an integer >= 2 for a polynomial potential".into(),
            ));
        }
        if terms.is_empty() {
            return Err(CoreError::EmptyPotential);
        }
        for t in &terms {
            if t.exps.len() != l {
                return Err(CoreError::DimensionMismatch(format!(
                    "monomial has {} exponent pairs, expected l = {}",
                    t.exps.len(),
                    l
                )));
            }
            if t.degree() != p + 1 {
                return Err(CoreError::NonHomogeneous {
                    found: t.degree(),
                    expected: p + 1,
                });
            }
        }
        // p is also inferred from the terms; a declared/inferred mismatch is
        // already excluded by the per-term degree check above.
        Ok(Potential {
            l,
            p,
            terms: Polynomial::collect(terms).terms,
        })
    }

    pub fn eval(&self, z: &[Complex]) -> Complex {
        self.terms.iter().map(|t| t.eval(z)).sum()
    }
}

/// The coupled nonlinearities f_k, each a degree-p polynomial in (z, z̄).
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    pub components: Vec<Polynomial>,
}

impl Nonlinearity {
    pub fn eval(&self, z: &[Complex], out: &mut [Complex]) {
        for (k, comp) in self.components.iter().enumerate() {
            out[k] = comp.eval(z);
        }
    }

    pub fn eval_vec(&self, z: &[Complex]) -> Vec<Complex> {
        self.components.iter().map(|c| c.eval(z)).collect()
    }
}

/// f_k = dF/dz̄_k + conj(dF/dz_k), term by term on monomials.
///
/// Wirtinger rules on a monomial: d/dz̄_k lowers b_k and multiplies by b_k;
/// d/dz_k lowers a_k; conjugation swaps every (a_j, b_j) and conjugates the
/// coefficient.
pub fn derive_f(potential: &Potential) -> Nonlinearity {
    let l = potential.l;
    let mut components = Vec::with_capacity(l);
    for k in 0..l {
        let mut terms = Vec::new();
        for m in &potential.terms {
            let (a_k, b_k) = m.exps[k];
            if b_k > 0 {
                let mut exps = m.exps.clone();
                exps[k].1 -= 1;
                terms.push(Monomial {
                    coeff: m.coeff * b_k as f64,
                    exps,
                });
            }
            if a_k > 0 {
                let mut exps = m.exps.clone();
                exps[k].0 -= 1;
                let swapped: Vec<(u32, u32)> = exps.iter().map(|&(a, b)| (b, a)).collect();
                terms.push(Monomial {
                    coeff: m.coeff.conj() * a_k as f64,
                    exps: swapped,
                });
            }
        }
        components.push(Polynomial::collect(terms));
    }
    Nonlinearity { components }
}

/// Solve for sigma_k > 0 with sum_j sigma_j (a_j - b_j) = 0 on every
/// monomial of F, the per-monomial sufficient condition for the gauge
/// identity behind H4*. Normalized so sigma_1 = 2, matching the usual
/// presentation of the particular systems.
///
/// Returns `None` when the null space of the phase-row matrix contains no
/// strictly positive vector. The positive vector is searched as the
/// projection of the all-ones vector onto the null space (with a sign flip
/// fallback for one-dimensional null spaces), which covers every potential
/// whose admissible sigma set is a single ray or contains its barycenter.
pub fn find_sigma(potential: &Potential) -> Option<Vec<f64>> {
    let l = potential.l;
    let rows: Vec<Vec<f64>> = potential
        .terms
        .iter()
        .map(|m| m.phase_row().iter().map(|&v| v as f64).collect())
        .filter(|r: &Vec<f64>| r.iter().any(|&v| v != 0.0))
        .collect();

    let basis = null_space(&rows, l);
    if basis.is_empty() {
        return None;
    }
    // Projection of the all-ones vector onto span(basis); basis is orthonormal.
    let mut cand = vec![0.0; l];
    for q in &basis {
        let dot: f64 = q.iter().sum();
        for (c, &qi) in cand.iter_mut().zip(q.iter()) {
            *c += dot * qi;
        }
    }
    let positive = |v: &[f64]| v.iter().all(|&x| x > 1e-9);
    let chosen = if positive(&cand) {
        Some(cand)
    } else if basis.len() == 1 {
        let flipped: Vec<f64> = basis[0].iter().map(|&x| -x).collect();
        if positive(&basis[0]) {
            Some(basis[0].clone())
        } else if positive(&flipped) {
            Some(flipped)
        } else {
            None
        }
    } else {
        None
    };
    chosen.map(|v| {
        let scale = 2.0 / v[0];
        v.iter()
            .map(|&x| {
                let y = x * scale;
                // The Gram-Schmidt arithmetic leaves ~1e-15 noise on what
                // are exact rationals; snap displayed values back.
                let r = y.round();
                if (y - r).abs() < 1e-9 {
                    r
                } else {
                    y
                }
            })
            .collect()
    })
}

/// Orthonormal basis of the null space of the given row matrix in R^l.
fn null_space(rows: &[Vec<f64>], l: usize) -> Vec<Vec<f64>> {
    // Gram-Schmidt a basis of the row space, then complete to R^l and keep
    // the complement.
    let mut row_basis: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let mut v = r.clone();
        for q in &row_basis {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= dot * qi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            row_basis.push(v);
        }
    }
    let mut null_basis = Vec::new();
    for j in 0..l {
        let mut v = vec![0.0; l];
        v[j] = 1.0;
        for q in row_basis.iter().chain(null_basis.iter()) {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= dot * qi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            null_basis.push(v);
        }
    }
    null_basis
}

/// Full system description: parameters, potential, derived nonlinearities.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    /// Spatial dimension. Grids support n <= 3; larger n is accepted for
    /// the algebraic classifier paths.
    pub n: usize,
    pub l: usize,
    pub p: u32,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub potential: Potential,
    pub f: Nonlinearity,
    pub sigma: Option<Vec<f64>>,
}

impl SystemSpec {
    pub fn new(
        n: usize,
        p: u32,
        alpha: Vec<f64>,
        gamma: Vec<f64>,
        beta: Vec<f64>,
        potential: Potential,
    ) -> Result<Self, CoreError> {
        let l = potential.l;
        if !(1..=6).contains(&n) {
            return Err(CoreError::InvalidParameter(format!(
                "dimension n = {n} out of range 1..=6"
            )));
        }
        if alpha.len() != l || gamma.len() != l || beta.len() != l {
            return Err(CoreError::DimensionMismatch(format!(
                "alpha/gamma/beta must each have length l = {l}"
            )));
        }
        if alpha.iter().any(|&a| a <= 0.0) {
            return Err(CoreError::InvalidParameter("alpha_k must be > 0".into()));
        }
        if gamma.iter().any(|&g| g <= 0.0) {
            return Err(CoreError::InvalidParameter("gamma_k must be > 0".into()));
        }
        if beta.iter().any(|&b| b < 0.0) {
            return Err(CoreError::InvalidParameter("beta_k must be >= 0".into()));
        }
        if p != potential.p {
            return Err(CoreError::InvalidParameter(format!(
                "declared p = {} but potential has p = {}",
                p, potential.p
            )));
        }
        let f = derive_f(&potential);
        let sigma = find_sigma(&potential);
        Ok(SystemSpec {
            n,
            l,
            p,
            alpha,
            gamma,
            beta,
            potential,
            f,
            sigma,
        })
    }

    /// Same system posed in a different spatial dimension.
    pub fn with_dimension(&self, n: usize) -> Result<Self, CoreError> {
        SystemSpec::new(
            n,
            self.p,
            self.alpha.clone(),
            self.gamma.clone(),
            self.beta.clone(),
            self.potential.clone(),
        )
    }

    /// Same system with beta_k = 0 (the pseudo-conformal setting).
    pub fn with_zero_beta(&self) -> Self {
        let mut s = self.clone();
        s.beta = vec![0.0; s.l];
        s
    }
}

/// Mass resonance: Im sum_k (alpha_k/gamma_k) f_k(z) z̄_k vanishes
/// identically. Checked symbolically by expanding the sum and pairing each
/// monomial with its conjugate, then confirmed at 64 pseudo-random points.
pub fn check_mass_resonance(spec: &SystemSpec) -> bool {
    let weights: Vec<f64> = spec
        .alpha
        .iter()
        .zip(&spec.gamma)
        .map(|(a, g)| a / g)
        .collect();
    if !imaginary_part_vanishes(&spec.f, &weights) {
        return false;
    }
    // Numerical confirmation.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    for _ in 0..64 {
        let z: Vec<Complex> = (0..spec.l)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let s: Complex = spec
            .f
            .eval_vec(&z)
            .iter()
            .zip(&z)
            .zip(&weights)
            .map(|((fk, zk), w)| w * fk * zk.conj())
            .sum();
        let scale: f64 = z.iter().map(|v| v.norm()).sum::<f64>().powi(spec.p as i32 + 1);
        if s.im.abs() > 1e-12 * scale.max(1e-30) {
            return false;
        }
    }
    true
}

/// Im sum_k w_k f_k(z) z̄_k == 0 identically, i.e. the expanded polynomial
/// equals its own conjugate.
pub(crate) fn imaginary_part_vanishes(f: &Nonlinearity, weights: &[f64]) -> bool {
    let mut terms = Vec::new();
    for (k, comp) in f.components.iter().enumerate() {
        for m in &comp.terms {
            let mut exps = m.exps.clone();
            exps[k].1 += 1; // multiply by z̄_k
            terms.push(Monomial {
                coeff: m.coeff * weights[k],
                exps,
            });
        }
    }
    let s = Polynomial::collect(terms);
    let scale = s
        .terms
        .iter()
        .map(|t| t.coeff.norm())
        .fold(0.0_f64, f64::max)
        .max(1e-30);
    // S real-valued <=> coeff(a,b) == conj(coeff(b,a)) for every term.
    for t in &s.terms {
        let swapped: Vec<(u32, u32)> = t.exps.iter().map(|&(a, b)| (b, a)).collect();
        let partner = s
            .terms
            .iter()
            .find(|u| u.exps == swapped)
            .map(|u| u.coeff)
            .unwrap_or_default();
        if (t.coeff - partner.conj()).norm() > 1e-12 * scale {
            return false;
        }
    }
    true
}

/// Growth/gauge sanity evaluation: f at a point, as a standalone helper.
pub fn eval_f(f: &Nonlinearity, z: &[Complex]) -> Vec<Complex> {
    f.eval_vec(z)
}
