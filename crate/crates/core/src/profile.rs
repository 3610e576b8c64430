//! Radially symmetric Fourier-side initial data.
//!
//! Profiles store samples of f_hat(r) on a shared quadrature grid, for an
//! arbitrary real dimension n > 0. The Fourier convention is the
//! non-unitary forward transform, so a spatial Gaussian
//! a exp(-w |x|^2 / 2) has the closed-form transform
//! a (2 pi / w)^{n/2} exp(-r^2 / (2 w)); profiles are specified directly
//! on the Fourier side and no FFT is involved in the linear pipeline.

use num_complex::Complex64;

use crate::error::{MgtError, Result};
use crate::grid::RadialGrid;

/// Optional model for the profile beyond the grid truncation radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// |f_hat| decays at least as fast as a Gaussian; truncation error
    /// is negligible by grid construction.
    Negligible,
    /// |f_hat(r)| ~ r^{-a} beyond r_max; norms add the analytic
    /// power-law tail correction.
    Algebraic { a: f64 },
}

/// Samples of one radial Fourier profile on a quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub n: f64,
    pub grid: RadialGrid,
    pub values: Vec<Complex64>,
    pub label: String,
    pub tail: TailModel,
}

impl RadialProfile {
    pub fn from_fn(
        n: f64,
        grid: &RadialGrid,
        label: &str,
        tail: TailModel,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        if !(n > 0.0) {
            return Err(MgtError::NonPositiveParameter {
                name: "n",
                value: n,
            });
        }
        let values: Vec<Complex64> = grid.nodes.iter().map(|&r| f(r)).collect();
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(MgtError::InvalidGrid(format!(
                "profile `{label}` has non-finite samples"
            )));
        }
        Ok(Self {
            n,
            grid: grid.clone(),
            values,
            label: label.to_string(),
            tail,
        })
    }

    /// Zero profile on the given grid.
    pub fn zero(n: f64, grid: &RadialGrid) -> Self {
        Self::from_fn(n, grid, "zero", TailModel::Negligible, |_| {
            Complex64::new(0.0, 0.0)
        })
        .expect("zero profile is always valid")
    }

    pub fn value_at_index(&self, i: usize) -> Complex64 {
        self.values[i]
    }

    pub fn shares_grid_with(&self, other: &Self) -> bool {
        self.grid == other.grid && self.n == other.n
    }
}

/// Fourier transform of a spatial Gaussian: samples of
/// amplitude * exp(-width r^2 / 2).
///
/// `width` here is the Fourier-side width; the corresponding spatial
/// datum is amplitude (2 pi width)^{-n/2} exp(-|x|^2/(2 width)).
pub fn gaussian_profile(
    n: f64,
    amplitude: f64,
    width: f64,
    grid: &RadialGrid,
) -> Result<RadialProfile> {
    if !(width > 0.0) {
        return Err(MgtError::NonPositiveParameter {
            name: "width",
            value: width,
        });
    }
    RadialProfile::from_fn(n, grid, "gaussian", TailModel::Negligible, |r| {
        Complex64::new(amplitude * (-0.5 * width * r * r).exp(), 0.0)
    })
}

/// Algebraic-tail profile (1 + r^2)^{-a/2}, the canonical datum for
/// probing regularity loss. Requires a > n/2 so the datum lies in L^2.
pub fn algebraic_tail_profile(n: f64, a: f64, grid: &RadialGrid) -> Result<RadialProfile> {
    if a <= n / 2.0 {
        return Err(MgtError::InsufficientDecay { a, n });
    }
    RadialProfile::from_fn(n, grid, "algebraic_tail", TailModel::Algebraic { a }, |r| {
        Complex64::new((1.0 + r * r).powf(-a / 2.0), 0.0)
    })
}

/// The three Fourier-side initial data (phi0, phi1, phi2) on one grid.
#[derive(Debug, Clone)]
pub struct DataTriple {
    pub p0: RadialProfile,
    pub p1: RadialProfile,
    pub p2: RadialProfile,
}

impl DataTriple {
    pub fn new(p0: RadialProfile, p1: RadialProfile, p2: RadialProfile) -> Result<Self> {
        if !p0.shares_grid_with(&p1) || !p0.shares_grid_with(&p2) {
            return Err(MgtError::InvalidGrid(
                "data triple must share one quadrature grid".into(),
            ));
        }
        Ok(Self { p0, p1, p2 })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.p0.grid
    }

    pub fn n(&self) -> f64 {
        self.p0.n
    }

    pub fn at(&self, i: usize) -> (Complex64, Complex64, Complex64) {
        (self.p0.values[i], self.p1.values[i], self.p2.values[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid {
        RadialGrid::geometric(1e-4, 10.0, 400, 8).unwrap()
    }

    #[test]
    fn gaussian_closed_form_values() {
        let g = grid();
        let p = gaussian_profile(3.0, 1.0, 1.0, &g).unwrap();
        // f_hat(r) = exp(-r^2/2): spot values against the sampled nodes
        for (i, &r) in g.nodes.iter().enumerate() {
            assert!((p.values[i].re - (-0.5 * r * r).exp()).abs() < 1e-15);
        }
        // f_hat(0) -> 1 and f_hat(2) = e^{-2}
        assert!(((-0.5_f64 * 4.0).exp() - 0.135_335_283_236_612_7).abs() < 1e-15);

        let p2 = gaussian_profile(2.0, 2.0, 4.0, &g).unwrap();
        let idx = g.nodes.iter().position(|&r| r > 1.0).unwrap();
        let r = g.nodes[idx];
        assert!((p2.values[idx].re - 2.0 * (-2.0 * r * r).exp()).abs() < 1e-14);
    }

    #[test]
    fn algebraic_tail_values_and_l2_guard() {
        let g = grid();
        let p = algebraic_tail_profile(3.0, 4.0, &g).unwrap();
        let idx = g
            .nodes
            .iter()
            .position(|&r| (r - 1.0).abs() < 5e-2)
            .unwrap();
        let r = g.nodes[idx];
        assert!((p.values[idx].re - (1.0 + r * r).powf(-2.0)).abs() < 1e-14);

        // (n=2, a=3) at r = 3: 10^{-1.5}
        assert!(((1.0_f64 + 9.0).powf(-1.5) - 0.031_622_776_601_683_79).abs() < 1e-15);

        assert_eq!(
            algebraic_tail_profile(3.0, 1.0, &g),
            Err(MgtError::InsufficientDecay { a: 1.0, n: 3.0 })
        );
    }

    #[test]
    fn triple_requires_shared_grid() {
        let g = grid();
        let other = RadialGrid::geometric(1e-4, 10.0, 500, 8).unwrap();
        let p0 = gaussian_profile(3.0, 1.0, 1.0, &g).unwrap();
        let p1 = gaussian_profile(3.0, 1.0, 1.0, &g).unwrap();
        let bad = gaussian_profile(3.0, 1.0, 1.0, &other).unwrap();
        assert!(DataTriple::new(p0.clone(), p1.clone(), bad).is_err());
        let p2 = gaussian_profile(3.0, 1.0, 1.0, &g).unwrap();
        assert!(DataTriple::new(p0, p1, p2).is_ok());
    }
}
