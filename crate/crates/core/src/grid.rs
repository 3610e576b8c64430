//! Composite Gauss-Legendre quadrature on the radial frequency axis.

use crate::error::{MgtError, Result};

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton
/// iteration on the Legendre polynomial.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 2);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Radial quadrature grid: abscissas and weights of a composite
/// Gauss-Legendre rule, together with the truncation radius.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub r_lo: f64,
    pub r_max: f64,
}

impl RadialGrid {
    /// Geometric panels between `r_lo` and `r_max`. The panel count is
    /// chosen so the total node count is at least `min_nodes`.
    pub fn geometric(r_lo: f64, r_max: f64, min_nodes: usize, gl_order: usize) -> Result<Self> {
        if !(r_lo > 0.0) || !(r_max > r_lo) {
            return Err(MgtError::InvalidGrid(format!(
                "need 0 < r_lo < r_max, got r_lo = {r_lo}, r_max = {r_max}"
            )));
        }
        let panels = min_nodes.div_ceil(gl_order).max(2);
        let (xs, ws) = gauss_legendre(gl_order);
        let ratio = (r_max / r_lo).powf(1.0 / panels as f64);
        let mut nodes = Vec::with_capacity(panels * gl_order);
        let mut weights = Vec::with_capacity(panels * gl_order);
        let mut a = r_lo;
        for _ in 0..panels {
            let b = a * ratio;
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, w) in xs.iter().zip(&ws) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
            a = b;
        }
        Ok(Self {
            nodes,
            weights,
            r_lo,
            r_max,
        })
    }

    /// Default grid for whole-axis decay experiments: dense enough near
    /// the origin to resolve sin(beta r t) oscillations up to t ~ 1e4.
    pub fn decay_default(r_max: f64, min_nodes: usize) -> Result<Self> {
        Self::geometric(1e-5, r_max, min_nodes, 8)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Twice the panel density over the same range, for convergence checks.
    pub fn refined(&self) -> Self {
        Self::geometric(self.r_lo, self.r_max, 2 * self.len(), 8).expect("valid refined grid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_rule_integrates_polynomials_exactly() {
        let (xs, ws) = gauss_legendre(8);
        // degree 15 monomial: int_{-1}^{1} x^14 dx = 2/15
        let q: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(14)).sum();
        assert!((q - 2.0 / 15.0).abs() < 1e-14);
        let q: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(15)).sum();
        assert!(q.abs() < 1e-14);
    }

    #[test]
    fn geometric_grid_is_sorted_with_positive_weights() {
        let g = RadialGrid::geometric(1e-5, 50.0, 2000, 8).unwrap();
        assert!(g.len() >= 2000);
        assert!(g.weights.iter().all(|&w| w > 0.0));
        assert!(g.nodes.windows(2).all(|p| p[0] < p[1]));
        // total weight = r_max - r_lo
        let sum: f64 = g.weights.iter().sum();
        assert!((sum - (50.0 - 1e-5)).abs() < 1e-9 * 50.0);
    }

    #[test]
    fn gaussian_moment_on_geometric_grid() {
        // int_0^inf r^2 e^{-r^2} dr = sqrt(pi)/4, truncated tail < 1e-15
        let g = RadialGrid::geometric(1e-7, 12.0, 1200, 8).unwrap();
        let q: f64 = g
            .nodes
            .iter()
            .zip(&g.weights)
            .map(|(r, w)| w * r * r * (-r * r).exp())
            .sum();
        let exact = std::f64::consts::PI.sqrt() / 4.0;
        assert!((q - exact).abs() < 1e-12, "q = {q}, exact = {exact}");
    }

    #[test]
    fn degenerate_grid_rejected() {
        assert!(RadialGrid::geometric(0.0, 1.0, 100, 8).is_err());
        assert!(RadialGrid::geometric(2.0, 1.0, 100, 8).is_err());
    }
}
