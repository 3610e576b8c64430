//! Periodic-box surrogate of R^n: lattice wavenumbers, dealiasing,
//! multi-dimensional complex FFTs, and the spectral field state.
//!
//! Spectral arrays hold Fourier-series coefficients c_k, so physical
//! samples are recovered by the unnormalized inverse transform. Decay
//! comparisons against whole-space rates are trusted only inside the
//! wraparound window t < L / (2 c_wave).

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{MgtError, Result};
use crate::params::PhysParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    pub dim: usize,
    pub points: usize,
    pub length: f64,
    pub dealias_fraction: f64,
}

impl TorusGrid {
    pub fn new(dim: usize, points: usize, length: f64, dealias_fraction: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(MgtError::UnsupportedDimension(dim as f64));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(MgtError::InvalidGrid(format!(
                "points per axis must be a power of two >= 16, got {points}"
            )));
        }
        if !(length > 0.0) {
            return Err(MgtError::NonPositiveParameter {
                name: "box_length",
                value: length,
            });
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(MgtError::InvalidGrid(format!(
                "dealias fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        Ok(Self {
            dim,
            points,
            length,
            dealias_fraction,
        })
    }

    pub fn total_modes(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Signed integer frequency of a 1-D index.
    pub fn freq_index(&self, i: usize) -> i64 {
        if i <= self.points / 2 {
            i as i64
        } else {
            i as i64 - self.points as i64
        }
    }

    /// Decompose a flat index into per-axis indices (row-major).
    fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for d in (0..self.dim).rev() {
            idx[d] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    /// |k| and integer |m|^2 for every lattice mode.
    pub fn wavenumbers(&self) -> (Vec<f64>, Vec<u64>) {
        let total = self.total_modes();
        let dk = self.dk();
        let mut kmag = Vec::with_capacity(total);
        let mut m2 = Vec::with_capacity(total);
        for flat in 0..total {
            let idx = self.unravel(flat);
            let mut s = 0i64;
            for d in 0..self.dim {
                let f = self.freq_index(idx[d]);
                s += f * f;
            }
            m2.push(s as u64);
            kmag.push(dk * (s as f64).sqrt());
        }
        (kmag, m2)
    }

    /// Per-axis signed wavenumber of every lattice mode.
    pub fn axis_wavenumbers(&self, axis: usize) -> Vec<f64> {
        let total = self.total_modes();
        let dk = self.dk();
        (0..total)
            .map(|flat| dk * self.freq_index(self.unravel(flat)[axis]) as f64)
            .collect()
    }

    /// True for modes removed by the 2/3-rule mask: any axis index with
    /// |m_i| > fraction * points / 2.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let cut = (self.dealias_fraction * self.points as f64 / 2.0).floor() as i64;
        let total = self.total_modes();
        (0..total)
            .map(|flat| {
                let idx = self.unravel(flat);
                (0..self.dim).any(|d| self.freq_index(idx[d]).abs() > cut)
            })
            .collect()
    }

    /// Fastest group speed sqrt((delta + tau)/tau); wraparound reaches the
    /// box center at t = L / (2 c_wave).
    pub fn trust_window(&self, params: &PhysParams) -> f64 {
        let c_wave = ((params.delta() + params.tau()) / params.tau()).sqrt();
        self.length / (2.0 * c_wave)
    }
}

/// Forward/inverse FFT pair acting in place on flat row-major arrays.
pub struct SpectralOps {
    grid: TorusGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    mask: Vec<bool>,
}

impl SpectralOps {
    pub fn new(grid: TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.points);
        let inverse = planner.plan_fft_inverse(grid.points);
        let mask = grid.dealias_mask();
        Self {
            grid,
            forward,
            inverse,
            mask,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points;
        let dim = self.grid.dim;
        let total = self.grid.total_modes();
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        // stride of the axis in the row-major layout
        for axis in 0..dim {
            let stride = n.pow((dim - 1 - axis) as u32);
            let lines = total / n;
            for l in 0..lines {
                // base index of this line
                let block = l / stride;
                let offset = l % stride;
                let base = block * stride * n + offset;
                for j in 0..n {
                    line[j] = data[base + j * stride];
                }
                fft.process(&mut line);
                for j in 0..n {
                    data[base + j * stride] = line[j];
                }
            }
        }
    }

    /// Physical samples -> series coefficients (forward, normalized by N^dim).
    pub fn to_spectral(&self, physical: &[Complex64]) -> Vec<Complex64> {
        let mut out = physical.to_vec();
        self.transform(&mut out, &self.forward);
        let scale = 1.0 / self.grid.total_modes() as f64;
        for v in &mut out {
            *v *= scale;
        }
        out
    }

    /// Series coefficients -> physical samples (unnormalized inverse).
    pub fn to_physical(&self, spectral: &[Complex64]) -> Vec<Complex64> {
        let mut out = spectral.to_vec();
        self.transform(&mut out, &self.inverse);
        out
    }

    /// Zero the masked modes in place.
    pub fn dealias(&self, spectral: &mut [Complex64]) {
        for (v, &masked) in spectral.iter_mut().zip(&self.mask) {
            if masked {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Spectral state of the lattice field: psi, psi_t, psi_tt and the
/// memory auxiliary W per mode.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub t: f64,
    pub psi: Vec<Complex64>,
    pub psi_t: Vec<Complex64>,
    pub psi_tt: Vec<Complex64>,
    pub w: Vec<Complex64>,
}

impl FieldState {
    pub fn from_data(psi: Vec<Complex64>, psi_t: Vec<Complex64>, psi_tt: Vec<Complex64>) -> Self {
        let w = vec![Complex64::new(0.0, 0.0); psi.len()];
        Self {
            t: 0.0,
            psi,
            psi_t,
            psi_tt,
            w,
        }
    }

    /// Largest |Im| of the physical samples of psi_t: a reality check.
    pub fn reality_defect(&self, ops: &SpectralOps) -> f64 {
        ops.to_physical(&self.psi_t)
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }
}

/// L^2(box) norm from series coefficients: (L^n sum |c_k|^2)^{1/2}.
pub fn l2_norm(grid: &TorusGrid, spectral: &[Complex64]) -> f64 {
    let vol = grid.length.powi(grid.dim as i32);
    (vol * spectral.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// Homogeneous Sobolev norm (L^n sum |k|^{2s} |c_k|^2)^{1/2}.
pub fn hs_norm(grid: &TorusGrid, kmag: &[f64], spectral: &[Complex64], s: f64) -> f64 {
    let vol = grid.length.powi(grid.dim as i32);
    let sum: f64 = spectral
        .iter()
        .zip(kmag)
        .map(|(z, &k)| {
            if k > 0.0 {
                k.powf(2.0 * s) * z.norm_sqr()
            } else {
                0.0
            }
        })
        .sum();
    (vol * sum).sqrt()
}

/// Band-limited Gaussian bump centered in the box, returned as series
/// coefficients of a real field.
pub fn gaussian_bump(
    grid: &TorusGrid,
    ops: &SpectralOps,
    amplitude: f64,
    width: f64,
) -> Vec<Complex64> {
    let n = grid.points;
    let total = grid.total_modes();
    let dx = grid.dx();
    let center = grid.length / 2.0;
    let mut physical = vec![Complex64::new(0.0, 0.0); total];
    for (flat, v) in physical.iter_mut().enumerate() {
        let idx = grid_unravel(grid, flat);
        let mut r2 = 0.0;
        for d in 0..grid.dim {
            let x = idx[d] as f64 * dx - center;
            r2 += x * x;
        }
        *v = Complex64::new(amplitude * (-r2 / (2.0 * width * width)).exp(), 0.0);
    }
    let _ = n;
    ops.to_spectral(&physical)
}

fn grid_unravel(grid: &TorusGrid, mut flat: usize) -> [usize; 3] {
    let mut idx = [0usize; 3];
    for d in (0..grid.dim).rev() {
        idx[d] = flat % grid.points;
        flat /= grid.points;
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(2, 64, 10.0, 2.0 / 3.0).is_ok());
        assert!(TorusGrid::new(4, 64, 10.0, 0.5).is_err());
        assert!(TorusGrid::new(2, 48, 10.0, 0.5).is_err());
        assert!(TorusGrid::new(2, 8, 10.0, 0.5).is_err());
    }

    #[test]
    fn fft_round_trip_and_parseval() {
        let grid = TorusGrid::new(2, 32, 7.0, 2.0 / 3.0).unwrap();
        let ops = SpectralOps::new(grid);
        let bump = gaussian_bump(&grid, &ops, 1.0, 0.8);
        let phys = ops.to_physical(&bump);
        let back = ops.to_spectral(&phys);
        for (a, b) in bump.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
        // Parseval: L^n sum |c|^2 = dx^n sum |psi_j|^2
        let lhs = grid.length.powi(2) * bump.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let rhs = grid.dx().powi(2) * phys.iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-10 * rhs);
    }

    #[test]
    fn single_mode_transforms_exactly() {
        let grid = TorusGrid::new(1, 32, 2.0 * std::f64::consts::PI, 2.0 / 3.0).unwrap();
        let ops = SpectralOps::new(grid);
        // cos(3x) has coefficients 1/2 at m = +-3
        let phys: Vec<Complex64> = (0..32)
            .map(|j| Complex64::new((3.0 * j as f64 * grid.dx()).cos(), 0.0))
            .collect();
        let spec = ops.to_spectral(&phys);
        for (i, v) in spec.iter().enumerate() {
            let m = grid.freq_index(i);
            let expect = if m.abs() == 3 { 0.5 } else { 0.0 };
            assert!(
                (v.re - expect).abs() < 1e-12 && v.im.abs() < 1e-12,
                "mode {m}"
            );
        }
    }

    #[test]
    fn dealias_mask_cuts_two_thirds() {
        let grid = TorusGrid::new(1, 32, 10.0, 2.0 / 3.0).unwrap();
        let mask = grid.dealias_mask();
        // cut = floor(2/3 * 16) = 10
        for (i, &m) in mask.iter().enumerate() {
            let f = grid.freq_index(i).abs();
            assert_eq!(m, f > 10, "index {i}, freq {f}");
        }
    }

    #[test]
    fn reality_of_gaussian_state() {
        let grid = TorusGrid::new(2, 16, 5.0, 2.0 / 3.0).unwrap();
        let ops = SpectralOps::new(grid);
        let bump = gaussian_bump(&grid, &ops, 0.01, 0.7);
        let state = FieldState::from_data(bump.clone(), bump.clone(), bump);
        assert!(state.reality_defect(&ops) < 1e-12);
    }

    #[test]
    fn trust_window_formula() {
        let grid = TorusGrid::new(1, 32, 100.0, 2.0 / 3.0).unwrap();
        let p = PhysParams::new(1.0, 1.0, 0.5, false).unwrap();
        assert!((grid.trust_window(&p) - 100.0 / (2.0 * 2.0_f64.sqrt())).abs() < 1e-12);
    }
}
