//! Periodic pseudospectral substrate: Cartesian grid on [-L, L)^n, FFT-based
//! differential operators, and quadrature.
//!
//! Layout is a flat row-major `Vec<Complex>` of shape N^n (last axis
//! contiguous). Frequencies follow the standard DFT ordering with the
//! Nyquist mode assigned to -N/2; odd-derivative multipliers zero it.

use std::io::{Read, Write};
use std::path::Path;

use rustfft::FftPlanner;

use crate::error::CoreError;
use crate::Complex;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub points_per_axis: usize,
    pub half_length: f64,
}

impl GridSpec {
    pub fn new(n: usize, points_per_axis: usize, half_length: f64) -> Result<Self, CoreError> {
        if !(1..=3).contains(&n) {
            return Err(CoreError::Grid(format!("grid dimension {n} out of range 1..=3")));
        }
        if points_per_axis < 16 || !points_per_axis.is_power_of_two() {
            return Err(CoreError::Grid(format!(
                "points per axis must be a power of two >= 16, got {points_per_axis}"
            )));
        }
        if !(half_length > 0.0) {
            return Err(CoreError::Grid("half length must be > 0".into()));
        }
        Ok(GridSpec {
            n,
            points_per_axis,
            half_length,
        })
    }

    /// Total number of grid points N^n.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing h = 2L/N.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points_per_axis as f64
    }

    /// Quadrature weight h^n.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    /// Physical coordinate along one axis: x_j = -L + j h.
    pub fn coord(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing()
    }

    /// Frequency of DFT index k along one axis: (pi/L) * k̃ with k̃ in
    /// {-N/2, ..., N/2 - 1}.
    pub fn freq(&self, k: usize) -> f64 {
        let n = self.points_per_axis;
        let signed = if k < n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        };
        std::f64::consts::PI / self.half_length * signed as f64
    }

    /// Multi-index of a flat row-major position.
    pub fn unravel(&self, mut flat: usize, idx: &mut [usize]) {
        let n = self.points_per_axis;
        for ax in (0..self.n).rev() {
            idx[ax] = flat % n;
            flat /= n;
        }
    }

    /// |x|^2 at a flat position.
    pub fn radius_sq(&self, flat: usize) -> f64 {
        let mut idx = [0usize; 3];
        self.unravel(flat, &mut idx[..self.n]);
        (0..self.n).map(|ax| self.coord(idx[ax]).powi(2)).sum()
    }

    fn check_shape(&self, field: &[Complex]) -> Result<(), CoreError> {
        if field.len() != self.len() {
            return Err(CoreError::Grid(format!(
                "field length {} does not match grid size {}",
                field.len(),
                self.len()
            )));
        }
        Ok(())
    }
}

/// In-place n-dimensional DFT. Inverse includes the 1/N^n normalization.
pub fn fftn(data: &mut [Complex], grid: &GridSpec, inverse: bool) {
    let n = grid.points_per_axis;
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut line = vec![Complex::default(); n];
    for axis in 0..grid.n {
        // Row-major: stride of `axis` is n^(grid.n - 1 - axis).
        let stride = n.pow((grid.n - 1 - axis) as u32);
        let block = stride * n;
        let nlines = data.len() / n;
        for li in 0..nlines {
            let base = (li / stride) * block + (li % stride);
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[base + j * stride];
            }
            fft.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                data[base + j * stride] = *v;
            }
        }
    }
    if inverse {
        let scale = 1.0 / (n as f64).powi(grid.n as i32);
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Apply a multiplier m(xi) in frequency space: field <- IDFT(m * DFT(field)).
pub fn apply_multiplier<F>(field: &mut [Complex], grid: &GridSpec, mult: F)
where
    F: Fn(&[f64]) -> Complex,
{
    fftn(field, grid, false);
    multiply_in_freq(field, grid, mult);
    fftn(field, grid, true);
}

/// Multiply an already-transformed array by m(xi).
pub fn multiply_in_freq<F>(hat: &mut [Complex], grid: &GridSpec, mult: F)
where
    F: Fn(&[f64]) -> Complex,
{
    let mut idx = [0usize; 3];
    let mut xi = [0.0f64; 3];
    for (flat, v) in hat.iter_mut().enumerate() {
        let d = grid.n;
        let mut rem = flat;
        let n = grid.points_per_axis;
        for ax in (0..d).rev() {
            idx[ax] = rem % n;
            rem /= n;
        }
        for ax in 0..d {
            xi[ax] = grid.freq(idx[ax]);
        }
        *v *= mult(&xi[..d]);
    }
}

/// Spectral Laplacian: IDFT(-|xi|^2 DFT(field)).
pub fn laplacian(field: &[Complex], grid: &GridSpec) -> Result<Vec<Complex>, CoreError> {
    grid.check_shape(field)?;
    let mut out = field.to_vec();
    apply_multiplier(&mut out, grid, |xi| {
        Complex::new(-xi.iter().map(|x| x * x).sum::<f64>(), 0.0)
    });
    Ok(out)
}

/// Spectral partial derivative along `axis` (Nyquist mode zeroed).
pub fn derivative(field: &[Complex], grid: &GridSpec, axis: usize) -> Result<Vec<Complex>, CoreError> {
    grid.check_shape(field)?;
    if axis >= grid.n {
        return Err(CoreError::Grid(format!("axis {axis} out of range for n = {}", grid.n)));
    }
    let nyquist = std::f64::consts::PI / grid.half_length * (grid.points_per_axis as f64 / 2.0);
    let mut out = field.to_vec();
    apply_multiplier(&mut out, grid, |xi| {
        if (xi[axis] + nyquist).abs() < 1e-14 * nyquist.max(1.0) {
            Complex::default()
        } else {
            Complex::new(0.0, xi[axis])
        }
    });
    Ok(out)
}

/// Rectangle-rule quadrature h^n * sum (spectrally accurate on the torus).
pub fn integrate(field: &[f64], grid: &GridSpec) -> Result<f64, CoreError> {
    if field.len() != grid.len() {
        return Err(CoreError::Grid(format!(
            "field length {} does not match grid size {}",
            field.len(),
            grid.len()
        )));
    }
    Ok(grid.cell_volume() * field.iter().sum::<f64>())
}

/// ||field||_{L^2}^2 = h^n sum |field|^2.
pub fn norm_sq(field: &[Complex], grid: &GridSpec) -> Result<f64, CoreError> {
    grid.check_shape(field)?;
    Ok(grid.cell_volume() * field.iter().map(|v| v.norm_sqr()).sum::<f64>())
}

/// ||grad field||_{L^2}^2 by Parseval: (h^n / N^n) * sum |xi|^2 |DFT(field)|^2.
pub fn gradient_norm_sq(field: &[Complex], grid: &GridSpec) -> Result<f64, CoreError> {
    grid.check_shape(field)?;
    let mut hat = field.to_vec();
    fftn(&mut hat, grid, false);
    let mut idx = [0usize; 3];
    let n = grid.points_per_axis;
    let mut acc = 0.0;
    for (flat, v) in hat.iter().enumerate() {
        let mut rem = flat;
        for ax in (0..grid.n).rev() {
            idx[ax] = rem % n;
            rem /= n;
        }
        let k2: f64 = (0..grid.n).map(|ax| grid.freq(idx[ax]).powi(2)).sum();
        acc += k2 * v.norm_sqr();
    }
    Ok(acc * grid.cell_volume() / (n as f64).powi(grid.n as i32))
}

/// l complex-valued grid functions at a common time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: GridSpec,
    pub t: f64,
    pub components: Vec<Vec<Complex>>,
}

impl FieldState {
    pub fn zeros(grid: GridSpec, l: usize) -> Self {
        FieldState {
            grid,
            t: 0.0,
            components: vec![vec![Complex::default(); grid.len()]; l],
        }
    }

    /// Fill every component from a function of the physical coordinates.
    pub fn from_fn<F>(grid: GridSpec, l: usize, mut f: F) -> Self
    where
        F: FnMut(usize, &[f64]) -> Complex,
    {
        let mut state = FieldState::zeros(grid, l);
        let mut idx = [0usize; 3];
        let mut x = [0.0f64; 3];
        for k in 0..l {
            for flat in 0..grid.len() {
                grid.unravel(flat, &mut idx[..grid.n]);
                for ax in 0..grid.n {
                    x[ax] = grid.coord(idx[ax]);
                }
                state.components[k][flat] = f(k, &x[..grid.n]);
            }
        }
        state
    }

    pub fn l(&self) -> usize {
        self.components.len()
    }

    pub fn sup_norm(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }

    /// Largest modulus over the boundary faces of the box (tail indicator).
    pub fn boundary_sup(&self) -> f64 {
        let n = self.grid.points_per_axis;
        let mut idx = [0usize; 3];
        let mut best = 0.0f64;
        for c in &self.components {
            for (flat, v) in c.iter().enumerate() {
                self.grid.unravel(flat, &mut idx[..self.grid.n]);
                let on_boundary = (0..self.grid.n).any(|ax| idx[ax] == 0 || idx[ax] == n - 1);
                if on_boundary {
                    best = best.max(v.norm());
                }
            }
        }
        best
    }

    const MAGIC: &'static [u8; 8] = b"NLSFLD01";

    /// Binary snapshot: magic, header (n, N, L, l, t), then row-major
    /// (re, im) f64 pairs per component, all little-endian.
    pub fn save(&self, path: &Path) -> Result<(), CoreError> {
        let mut buf = Vec::with_capacity(48 + self.l() * self.grid.len() * 16);
        buf.extend_from_slice(Self::MAGIC);
        buf.extend_from_slice(&(self.grid.n as u64).to_le_bytes());
        buf.extend_from_slice(&(self.grid.points_per_axis as u64).to_le_bytes());
        buf.extend_from_slice(&self.grid.half_length.to_le_bytes());
        buf.extend_from_slice(&(self.l() as u64).to_le_bytes());
        buf.extend_from_slice(&self.t.to_le_bytes());
        for c in &self.components {
            for v in c {
                buf.extend_from_slice(&v.re.to_le_bytes());
                buf.extend_from_slice(&v.im.to_le_bytes());
            }
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CoreError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 48 || &bytes[..8] != Self::MAGIC {
            return Err(CoreError::BadFieldFile("missing or wrong magic header".into()));
        }
        let u64_at = |off: usize| u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let f64_at = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let n = u64_at(8) as usize;
        let points = u64_at(16) as usize;
        let half_length = f64_at(24);
        let l = u64_at(32) as usize;
        let t = f64_at(40);
        let grid = GridSpec::new(n, points, half_length)
            .map_err(|e| CoreError::BadFieldFile(format!("bad grid header: {e}")))?;
        let expected = 48 + l * grid.len() * 16;
        if bytes.len() != expected {
            return Err(CoreError::BadFieldFile(format!(
                "file length {} does not match header ({} expected)",
                bytes.len(),
                expected
            )));
        }
        let mut components = Vec::with_capacity(l);
        let mut off = 48;
        for _ in 0..l {
            let mut c = Vec::with_capacity(grid.len());
            for _ in 0..grid.len() {
                c.push(Complex::new(f64_at(off), f64_at(off + 8)));
                off += 16;
            }
            components.push(c);
        }
        Ok(FieldState { grid, t, components })
    }
}
