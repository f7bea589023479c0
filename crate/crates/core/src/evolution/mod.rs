//! Time integration of the coupled Cauchy problem by Strang splitting, with
//! adaptive step control, blow-up detection, and the exact pseudo-conformal
//! blow-up solutions used as reference trajectories.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::CoreError;
use crate::groundstate::{critical_index, GroundStateResult};
use crate::nonlinearity::{check_mass_resonance, SystemSpec};
use crate::spectral::{self, FieldState, GridSpec};
use crate::Complex;

#[derive(Debug, Clone, Copy)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    pub dt_min: f64,
    pub blowup_factor: f64,
    pub snapshot_stride: usize,
    pub adaptive: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            dt: 1e-3,
            t_end: 1.0,
            dt_min: 1e-9,
            blowup_factor: 1e6,
            snapshot_stride: 100,
            adaptive: false,
        }
    }
}

impl EvolveConfig {
    fn validate(&self) -> Result<(), CoreError> {
        if !(self.dt > self.dt_min && self.dt_min > 0.0) {
            return Err(CoreError::InvalidParameter(
                "need dt > dt_min > 0".into(),
            ));
        }
        if self.blowup_factor <= 1.0 {
            return Err(CoreError::InvalidParameter(
                "blowup_factor must exceed 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvolveStatus {
    ReachedTEnd,
    /// Last resolved time before the detector fired.
    BlowUpDetected(f64),
    /// Non-finite state first seen at this time.
    Invalid(f64),
}

#[derive(Debug)]
pub struct EvolveOutcome {
    pub final_state: FieldState,
    pub status: EvolveStatus,
    pub series: Vec<DiagnosticsRecord>,
}

/// Split-step integrator with cached FFT plans and linear multipliers.
pub struct Stepper {
    spec: SystemSpec,
    grid: GridSpec,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// |xi|^2 per flat index.
    k2: Vec<f64>,
    /// exp(i (dt/2) (-gamma_k |xi|^2 - beta_k)/alpha_k) per component,
    /// cached for the current dt.
    half_mult: Vec<Vec<Complex>>,
    cached_dt: f64,
}

impl Stepper {
    pub fn new(spec: SystemSpec, grid: GridSpec) -> Result<Self, CoreError> {
        if grid.n != spec.n {
            return Err(CoreError::Grid(format!(
                "grid dimension {} does not match system dimension {}",
                grid.n, spec.n
            )));
        }
        let mut planner = FftPlanner::new();
        let n = grid.points_per_axis;
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let mut idx = [0usize; 3];
        let k2: Vec<f64> = (0..grid.len())
            .map(|flat| {
                grid.unravel(flat, &mut idx[..grid.n]);
                (0..grid.n).map(|ax| grid.freq(idx[ax]).powi(2)).sum()
            })
            .collect();
        Ok(Stepper {
            spec,
            grid,
            fft,
            ifft,
            k2,
            half_mult: Vec::new(),
            cached_dt: f64::NAN,
        })
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    fn fftn_cached(&self, data: &mut [Complex], inverse: bool) {
        let n = self.grid.points_per_axis;
        let plan = if inverse { &self.ifft } else { &self.fft };
        let mut line = vec![Complex::default(); n];
        for axis in 0..self.grid.n {
            let stride = n.pow((self.grid.n - 1 - axis) as u32);
            let block = stride * n;
            let nlines = data.len() / n;
            for li in 0..nlines {
                let base = (li / stride) * block + (li % stride);
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride];
                }
                plan.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
        if inverse {
            let scale = 1.0 / (n as f64).powi(self.grid.n as i32);
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    fn ensure_multipliers(&mut self, dt: f64) {
        if self.cached_dt == dt && !self.half_mult.is_empty() {
            return;
        }
        self.half_mult = (0..self.spec.l)
            .map(|k| {
                let gamma = self.spec.gamma[k];
                let beta = self.spec.beta[k];
                let alpha = self.spec.alpha[k];
                self.k2
                    .iter()
                    .map(|&k2| {
                        let phase = dt / 2.0 * (-gamma * k2 - beta) / alpha;
                        Complex::new(0.0, phase).exp()
                    })
                    .collect()
            })
            .collect();
        self.cached_dt = dt;
    }

    fn half_linear(&self, state: &mut FieldState) {
        for (k, comp) in state.components.iter_mut().enumerate() {
            self.fftn_cached(comp, false);
            for (v, m) in comp.iter_mut().zip(&self.half_mult[k]) {
                *v *= m;
            }
            self.fftn_cached(comp, true);
        }
    }

    /// Pointwise classical Runge-Kutta for du_k/dt = (i/alpha_k) f_k(u).
    fn nonlinear_rk4(&self, state: &mut FieldState, dt: f64) {
        let l = self.spec.l;
        let mut z = vec![Complex::default(); l];
        let mut zt = vec![Complex::default(); l];
        let mut k1 = vec![Complex::default(); l];
        let mut k2 = vec![Complex::default(); l];
        let mut k3 = vec![Complex::default(); l];
        let mut k4 = vec![Complex::default(); l];
        let mut fz = vec![Complex::default(); l];
        let rhs = |f: &mut [Complex], z: &[Complex], fz: &mut [Complex], spec: &SystemSpec| {
            spec.f.eval(z, fz);
            for k in 0..z.len() {
                f[k] = Complex::new(0.0, 1.0) / spec.alpha[k] * fz[k];
            }
        };
        for flat in 0..self.grid.len() {
            for k in 0..l {
                z[k] = state.components[k][flat];
            }
            rhs(&mut k1, &z, &mut fz, &self.spec);
            for k in 0..l {
                zt[k] = z[k] + dt / 2.0 * k1[k];
            }
            rhs(&mut k2, &zt, &mut fz, &self.spec);
            for k in 0..l {
                zt[k] = z[k] + dt / 2.0 * k2[k];
            }
            rhs(&mut k3, &zt, &mut fz, &self.spec);
            for k in 0..l {
                zt[k] = z[k] + dt * k3[k];
            }
            rhs(&mut k4, &zt, &mut fz, &self.spec);
            for k in 0..l {
                state.components[k][flat] =
                    z[k] + dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
            }
        }
    }

    /// One Strang step: half linear, full nonlinear, half linear.
    pub fn step(&mut self, state: &mut FieldState, dt: f64) {
        self.ensure_multipliers(dt);
        self.half_linear(state);
        self.nonlinear_rk4(state, dt);
        self.half_linear(state);
        state.t += dt;
    }
}

/// Free function mirroring `Stepper::step` for one-off use.
pub fn step(state: &FieldState, dt: f64, spec: &SystemSpec) -> Result<FieldState, CoreError> {
    let mut stepper = Stepper::new(spec.clone(), state.grid)?;
    let mut out = state.clone();
    stepper.step(&mut out, dt);
    Ok(out)
}

fn kinetic(state: &FieldState, spec: &SystemSpec) -> Result<f64, CoreError> {
    let mut k = 0.0;
    for (kk, comp) in state.components.iter().enumerate() {
        k += spec.gamma[kk] * spectral::gradient_norm_sq(comp, &state.grid)?;
    }
    Ok(k)
}

/// Integrate to t_end, recording diagnostics every snapshot_stride steps.
///
/// With `adaptive` on, dt halves whenever K doubles since the last
/// adaptation and doubles back (capped at the initial dt) after 100 steps
/// without one. Blow-up is declared when K exceeds blowup_factor * K(u0)
/// or when dt falls under dt_min.
pub fn evolve(
    u0: &FieldState,
    spec: &SystemSpec,
    cfg: &EvolveConfig,
) -> Result<EvolveOutcome, CoreError> {
    cfg.validate()?;
    let resonant = check_mass_resonance(spec);
    let mut stepper = Stepper::new(spec.clone(), u0.grid)?;
    let mut state = u0.clone();
    let mut series = vec![DiagnosticsRecord::build(&state, spec, resonant)?];
    let k0 = kinetic(&state, spec)?.max(1e-300);
    let mut dt = cfg.dt;
    let mut k_ref = k0;
    let mut stable_steps = 0usize;
    let mut step_count = 0usize;

    let status = loop {
        if state.t >= cfg.t_end - 1e-14 {
            break EvolveStatus::ReachedTEnd;
        }
        let this_dt = dt.min(cfg.t_end - state.t);
        stepper.step(&mut state, this_dt);
        step_count += 1;
        if !state.is_finite() {
            break EvolveStatus::Invalid(state.t);
        }
        if cfg.adaptive || step_count % cfg.snapshot_stride == 0 {
            let k = kinetic(&state, spec)?;
            if k > cfg.blowup_factor * k0 {
                break EvolveStatus::BlowUpDetected(state.t);
            }
            if cfg.adaptive {
                if k > 2.0 * k_ref {
                    dt /= 2.0;
                    k_ref = k;
                    stable_steps = 0;
                    if dt < cfg.dt_min {
                        break EvolveStatus::BlowUpDetected(state.t);
                    }
                } else {
                    stable_steps += 1;
                    if stable_steps >= 100 && dt < cfg.dt {
                        dt = (dt * 2.0).min(cfg.dt);
                        stable_steps = 0;
                    }
                }
            }
        }
        if step_count % cfg.snapshot_stride == 0 {
            series.push(DiagnosticsRecord::build(&state, spec, resonant)?);
        }
    };
    if series.last().map(|r| r.t) != Some(state.t) && state.is_finite() {
        series.push(DiagnosticsRecord::build(&state, spec, resonant)?);
    }
    diagnostics::fill_vddot_fd(&mut series);
    Ok(EvolveOutcome {
        final_state: state,
        status,
        series,
    })
}

fn require_critical_resonant(spec: &SystemSpec) -> Result<(), CoreError> {
    let s_c = critical_index(spec.n, spec.p as f64);
    if s_c.abs() > 1e-12 {
        return Err(CoreError::NotL2Critical);
    }
    if !check_mass_resonance(spec) {
        return Err(CoreError::NotMassResonant);
    }
    Ok(())
}

/// Initial data of the exact blow-up solution built from a ground state:
/// v_k(x, 0) = T^{2/(1-p)} exp(-i (alpha_k/gamma_k) |x|^2/(4T)) psi_k(x/T).
///
/// The dilation psi(x/T) is realized by re-gridding: the returned state
/// keeps the sample values and scales the box to T * L. The caller must
/// evolve it with the beta-free system.
pub fn pseudo_conformal_data(
    psi: &GroundStateResult,
    big_t: f64,
    spec: &SystemSpec,
) -> Result<FieldState, CoreError> {
    require_critical_resonant(spec)?;
    if !(big_t > 0.0) {
        return Err(CoreError::InvalidParameter("T must be > 0".into()));
    }
    let src_grid = psi.psi.grid;
    let grid = GridSpec::new(
        src_grid.n,
        src_grid.points_per_axis,
        big_t * src_grid.half_length,
    )?;
    let amp = big_t.powf(2.0 / (1.0 - spec.p as f64));
    let mut out = FieldState::zeros(grid, spec.l);
    let mut idx = [0usize; 3];
    for k in 0..spec.l {
        let a_over_g = spec.alpha[k] / spec.gamma[k];
        for flat in 0..grid.len() {
            grid.unravel(flat, &mut idx[..grid.n]);
            let r2: f64 = (0..grid.n).map(|ax| grid.coord(idx[ax]).powi(2)).sum();
            let phase = Complex::new(0.0, -a_over_g * r2 / (4.0 * big_t)).exp();
            out.components[k][flat] = amp * phase * psi.psi.components[k][flat];
        }
    }
    out.t = 0.0;
    Ok(out)
}

/// Closed-form blow-up solution at time t in [0, T), sampled on the same
/// box as `pseudo_conformal_data`:
/// v_k(x,t) = (T-t)^{2/(1-p)}
///            exp(-i a_k |x|^2/(4(T-t)) + i a_k t/(T(T-t))) psi_k(x/(T-t)),
/// a_k = alpha_k/gamma_k. psi is evaluated off-grid by 4x Fourier
/// upsampling followed by cubic (Catmull-Rom) interpolation, with zero
/// extension outside the ground-state box.
pub fn exact_pseudo_conformal(
    psi: &GroundStateResult,
    big_t: f64,
    t: f64,
    spec: &SystemSpec,
) -> Result<FieldState, CoreError> {
    require_critical_resonant(spec)?;
    if !(0.0..big_t).contains(&t) {
        return Err(CoreError::TimeOutOfRange {
            t,
            blowup_time: big_t,
        });
    }
    let src_grid = psi.psi.grid;
    let grid = GridSpec::new(
        src_grid.n,
        src_grid.points_per_axis,
        big_t * src_grid.half_length,
    )?;
    let remaining = big_t - t;
    let amp = remaining.powf(2.0 / (1.0 - spec.p as f64));

    let fine: Vec<Upsampled> = psi
        .psi
        .components
        .iter()
        .map(|c| Upsampled::new(c, &src_grid, 4))
        .collect();

    let mut out = FieldState::zeros(grid, spec.l);
    out.t = t;
    let mut idx = [0usize; 3];
    let mut y = [0.0f64; 3];
    for k in 0..spec.l {
        let a_over_g = spec.alpha[k] / spec.gamma[k];
        for flat in 0..grid.len() {
            grid.unravel(flat, &mut idx[..grid.n]);
            let mut r2 = 0.0;
            for ax in 0..grid.n {
                let x = grid.coord(idx[ax]);
                r2 += x * x;
                y[ax] = x / remaining;
            }
            let val = fine[k].eval(&y[..grid.n]);
            let phase = Complex::new(
                0.0,
                -a_over_g * r2 / (4.0 * remaining) + a_over_g * t / (big_t * remaining),
            )
            .exp();
            out.components[k][flat] = amp * phase * val;
        }
    }
    Ok(out)
}

/// Fourier-upsampled copy of a field with separable Catmull-Rom evaluation
/// at arbitrary points (zero outside the box).
struct Upsampled {
    grid: GridSpec,
    data: Vec<Complex>,
}

impl Upsampled {
    fn new(field: &[Complex], grid: &GridSpec, factor: usize) -> Upsampled {
        let n = grid.points_per_axis;
        let m = n * factor;
        let mut hat = field.to_vec();
        spectral::fftn(&mut hat, grid, false);
        // The inverse transform below divides by m^n, while these
        // coefficients came from n^n samples: compensate by factor^n.
        let rescale = (factor as f64).powi(grid.n as i32);
        for v in hat.iter_mut() {
            *v *= rescale;
        }
        // Zero-pad the spectrum axis by axis into an m^n array.
        let mut padded = vec![Complex::default(); m.pow(grid.n as u32)];
        let mut idx = [0usize; 3];
        for (flat, v) in hat.iter().enumerate() {
            grid.unravel(flat, &mut idx[..grid.n]);
            // A coarse Nyquist coefficient is split evenly between +N/2 and
            // -N/2 on the fine grid so real input keeps a real interpolant.
            let axes_split: Vec<usize> = (0..grid.n).filter(|&ax| idx[ax] == n / 2).collect();
            let count = 1usize << axes_split.len();
            for mask in 0..count {
                let mut pos = 0usize;
                for ax in 0..grid.n {
                    let k = idx[ax];
                    let mapped = if k == n / 2 {
                        let which = axes_split.iter().position(|&a| a == ax).unwrap();
                        if mask >> which & 1 == 0 {
                            n / 2
                        } else {
                            m - n / 2
                        }
                    } else if k < n / 2 {
                        k
                    } else {
                        m - (n - k)
                    };
                    pos = pos * m + mapped;
                }
                padded[pos] += v / count as f64;
            }
        }
        let fine_grid = GridSpec {
            n: grid.n,
            points_per_axis: m,
            half_length: grid.half_length,
        };
        spectral::fftn(&mut padded, &fine_grid, true);
        Upsampled {
            grid: fine_grid,
            data: padded,
        }
    }

    fn eval(&self, y: &[f64]) -> Complex {
        let l = self.grid.half_length;
        let h = self.grid.spacing();
        let m = self.grid.points_per_axis;
        // Zero extension outside the open box.
        for &yi in y {
            if yi < -l || yi >= l {
                return Complex::default();
            }
        }
        // Separable Catmull-Rom over the 4^n neighborhood.
        let mut base = [0isize; 3];
        let mut frac = [0.0f64; 3];
        for (ax, &yi) in y.iter().enumerate() {
            let pos = (yi + l) / h;
            let cell = pos.floor();
            base[ax] = cell as isize;
            frac[ax] = pos - cell;
        }
        let weights = |t: f64| -> [f64; 4] {
            // Catmull-Rom basis on nodes -1, 0, 1, 2.
            [
                ((-t + 2.0) * t - 1.0) * t * 0.5,
                ((3.0 * t - 5.0) * t * t + 2.0) * 0.5,
                ((-3.0 * t + 4.0) * t + 1.0) * t * 0.5,
                (t - 1.0) * t * t * 0.5,
            ]
        };
        let w: Vec<[f64; 4]> = (0..self.grid.n).map(|ax| weights(frac[ax])).collect();
        let mut acc = Complex::default();
        let dims = self.grid.n;
        let mut offs = [0usize; 3];
        let total = 4usize.pow(dims as u32);
        for combo in 0..total {
            let mut rem = combo;
            let mut weight = 1.0;
            let mut flat = 0usize;
            for ax in 0..dims {
                offs[ax] = rem % 4;
                rem /= 4;
                weight *= w[ax][offs[ax]];
                let j = (base[ax] + offs[ax] as isize - 1).rem_euclid(m as isize) as usize;
                flat = flat * m + j;
            }
            acc += weight * self.data[flat];
        }
        acc
    }
}

#[cfg(test)]
mod tests;
