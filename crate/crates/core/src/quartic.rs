//! The r-parameterized characteristic quartic
//! `tau^2 L^4 + 2 tau L^3 + (1 + tau (delta+tau) r^2) L^2 +
//! (delta + 2 tau) r^2 L + (1 - m tau) r^2 = 0`,
//! its numerical roots, the small- and large-frequency expansions, and
//! branch labeling along radial sweeps.

use nalgebra::Matrix4;
use num_complex::Complex64;
use std::sync::OnceLock;

use crate::error::{MgtError, Result};
use crate::params::PhysParams;

const RESIDUAL_TOL: f64 = 1e-10;

/// Real coefficients of the characteristic quartic at radial frequency r,
/// ordered from lambda^4 down to lambda^0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoeffs {
    pub c4: f64,
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub r: f64,
}

pub fn quartic_at(params: &PhysParams, r: f64) -> QuarticCoeffs {
    let (tau, delta, m) = (params.tau(), params.delta(), params.m());
    let r2 = r * r;
    QuarticCoeffs {
        c4: tau * tau,
        c3: 2.0 * tau,
        c2: 1.0 + tau * (delta + tau) * r2,
        c1: (delta + 2.0 * tau) * r2,
        c0: (1.0 - m * tau) * r2,
        r,
    }
}

impl QuarticCoeffs {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (((Complex64::from(self.c4) * z + self.c3) * z + self.c2) * z + self.c1) * z + self.c0
    }

    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        ((Complex64::from(4.0 * self.c4) * z + 3.0 * self.c3) * z + 2.0 * self.c2) * z + self.c1
    }

    /// Magnitude scale sum_k |c_k| |z|^k used to normalize residuals.
    pub fn scale(&self, z_abs: f64) -> f64 {
        let mut s = self.c4.abs();
        for c in [self.c3, self.c2, self.c1, self.c0] {
            s = s * z_abs + c.abs();
        }
        s.max(1.0)
    }
}

/// Asymptotic family tag for one characteristic root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchLabel {
    OscPlus,
    OscMinus,
    RelaxPlus,
    RelaxMinus,
}

impl BranchLabel {
    pub const ALL: [BranchLabel; 4] = [
        BranchLabel::OscPlus,
        BranchLabel::OscMinus,
        BranchLabel::RelaxPlus,
        BranchLabel::RelaxMinus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BranchLabel::OscPlus => "osc+",
            BranchLabel::OscMinus => "osc-",
            BranchLabel::RelaxPlus => "relax+",
            BranchLabel::RelaxMinus => "relax-",
        }
    }
}

/// The four roots at one radial frequency. When labeled, `roots[i]`
/// belongs to the family `BranchLabel::ALL[i]`.
#[derive(Debug, Clone)]
pub struct CharRoots {
    pub r: f64,
    pub roots: [Complex64; 4],
    pub residuals: [f64; 4],
    pub labeled: bool,
}

impl CharRoots {
    pub fn max_re(&self) -> f64 {
        self.roots
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_pairwise_gap(&self) -> f64 {
        let mut g = f64::INFINITY;
        for i in 0..4 {
            for j in (i + 1)..4 {
                g = g.min((self.roots[i] - self.roots[j]).norm());
            }
        }
        g
    }
}

/// Solve the quartic by companion-matrix eigenvalues followed by Newton
/// polishing on the polynomial itself.
pub fn solve_roots(coeffs: &QuarticCoeffs) -> Result<CharRoots> {
    if coeffs.c4 == 0.0 {
        return Err(MgtError::DegenerateLeadingCoefficient);
    }
    let a3 = coeffs.c3 / coeffs.c4;
    let a2 = coeffs.c2 / coeffs.c4;
    let a1 = coeffs.c1 / coeffs.c4;
    let a0 = coeffs.c0 / coeffs.c4;
    let companion = Matrix4::new(
        0.0, 0.0, 0.0, -a0, //
        1.0, 0.0, 0.0, -a1, //
        0.0, 1.0, 0.0, -a2, //
        0.0, 0.0, 1.0, -a3,
    );
    let eig = companion.complex_eigenvalues();
    let mut roots = [Complex64::new(0.0, 0.0); 4];
    let mut residuals = [0.0; 4];
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        let mut z = Complex64::new(eig[i].re, eig[i].im);
        let mut best = z;
        let mut best_res = coeffs.eval(z).norm() / coeffs.scale(z.norm());
        for _ in 0..8 {
            let dp = coeffs.eval_derivative(z);
            if dp.norm() == 0.0 {
                break;
            }
            z -= coeffs.eval(z) / dp;
            let res = coeffs.eval(z).norm() / coeffs.scale(z.norm());
            if res < best_res {
                best_res = res;
                best = z;
            }
            if res < 1e-16 {
                break;
            }
        }
        roots[i] = best;
        residuals[i] = best_res;
        worst = worst.max(best_res);
    }
    if worst > RESIDUAL_TOL {
        return Err(MgtError::PolishDivergence { residual: worst });
    }
    Ok(CharRoots {
        r: coeffs.r,
        roots,
        residuals,
        labeled: false,
    })
}

/// kappa_{+/-}(delta), the two relaxational large-frequency limit roots.
pub fn kappa(params: &PhysParams, plus: bool) -> f64 {
    let (tau, delta, m) = (params.tau(), params.delta(), params.m());
    let disc = delta * delta + 4.0 * tau * tau * (delta + tau) * m;
    let root = disc.sqrt();
    let sign = if plus { 1.0 } else { -1.0 };
    (-(delta + 2.0 * tau) + sign * root) / (2.0 * tau * (delta + tau))
}

/// Small-frequency expansion, ordered [osc+, osc-, relax+, relax-].
/// Order 1 keeps the O(r) terms; order 2 adds the O(r^2) real shift of
/// the oscillatory pair.
pub fn asymptotic_small(
    params: &PhysParams,
    r: f64,
    order: usize,
    eps: f64,
) -> Result<[Complex64; 4]> {
    if r >= eps {
        return Err(MgtError::OutOfZone {
            r,
            zone: "interior",
        });
    }
    Ok(asymptotic_small_unchecked(params, r, order))
}

pub fn asymptotic_small_unchecked(params: &PhysParams, r: f64, order: usize) -> [Complex64; 4] {
    let (tau, delta, m) = (params.tau(), params.delta(), params.m());
    let shift = if order >= 2 {
        -0.5 * (delta + 2.0 * m * tau * tau) * r * r
    } else {
        0.0
    };
    // for m tau > 1 the leading pair is real, +-sqrt(m tau - 1) r,
    // one branch growing (instability)
    let pair = if m * tau <= 1.0 {
        let beta = (1.0 - m * tau).sqrt();
        [
            Complex64::new(shift, beta * r),
            Complex64::new(shift, -beta * r),
        ]
    } else {
        let beta = (m * tau - 1.0).sqrt();
        [
            Complex64::new(shift + beta * r, 0.0),
            Complex64::new(shift - beta * r, 0.0),
        ]
    };
    let sq = (m * tau).sqrt();
    [
        pair[0],
        pair[1],
        Complex64::new(-1.0 / tau + sq * r, 0.0),
        Complex64::new(-1.0 / tau - sq * r, 0.0),
    ]
}

/// Large-frequency expansion, ordered [osc+, osc-, kappa+, kappa-],
/// branching on delta > 0 versus delta = 0.
pub fn asymptotic_large(params: &PhysParams, r: f64, cap_n: f64) -> Result<[Complex64; 4]> {
    if r <= cap_n {
        return Err(MgtError::OutOfZone {
            r,
            zone: "exterior",
        });
    }
    Ok(asymptotic_large_unchecked(params, r))
}

pub fn asymptotic_large_unchecked(params: &PhysParams, r: f64) -> [Complex64; 4] {
    let (tau, delta, m) = (params.tau(), params.delta(), params.m());
    let (osc_re, osc_im) = if delta > 0.0 {
        (
            -delta / (2.0 * tau * (delta + tau)),
            ((delta + tau) / tau).sqrt() * r,
        )
    } else {
        (-m / (tau * tau) / (r * r), r + 0.5 * m / tau / r)
    };
    [
        Complex64::new(osc_re, osc_im),
        Complex64::new(osc_re, -osc_im),
        Complex64::new(kappa(params, true), 0.0),
        Complex64::new(kappa(params, false), 0.0),
    ]
}

/// Largest real part over the four roots, maximized over a radial grid.
#[derive(Debug, Clone, Copy)]
pub struct SpectralAbscissa {
    pub value: f64,
    pub at_r: f64,
}

pub fn spectral_abscissa(params: &PhysParams, r_grid: &[f64]) -> Result<SpectralAbscissa> {
    let mut out = SpectralAbscissa {
        value: f64::NEG_INFINITY,
        at_r: f64::NAN,
    };
    for &r in r_grid {
        let roots = solve_roots(&quartic_at(params, r))?;
        let re = roots.max_re();
        if re > out.value {
            out = SpectralAbscissa { value: re, at_r: r };
        }
    }
    Ok(out)
}

fn perms4() -> &'static [[usize; 4]] {
    static PERMS: OnceLock<Vec<[usize; 4]>> = OnceLock::new();
    PERMS.get_or_init(|| {
        let mut out = Vec::with_capacity(24);
        let mut idx = [0usize, 1, 2, 3];
        heap_perm(&mut idx, 4, &mut out);
        out
    })
}

fn heap_perm(a: &mut [usize; 4], k: usize, out: &mut Vec<[usize; 4]>) {
    if k == 1 {
        out.push(*a);
        return;
    }
    for i in 0..k {
        heap_perm(a, k - 1, out);
        if k.is_multiple_of(2) {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
}

/// Minimal-total-cost assignment of `cur` roots to `prev` roots.
/// Returns the permutation p with cur[p[i]] following prev[i].
fn best_assignment(prev: &[Complex64; 4], cur: &[Complex64; 4]) -> [usize; 4] {
    let mut best = f64::INFINITY;
    let mut best_p = [0usize, 1, 2, 3];
    for p in perms4() {
        let c: f64 = (0..4).map(|i| (cur[p[i]] - prev[i]).norm()).sum();
        if c < best {
            best = c;
            best_p = *p;
        }
    }
    best_p
}

/// Ambiguity test: the assignment of prev[i] is ambiguous when the
/// second-nearest current root is within `factor` of the assigned one.
fn assignment_ambiguous(prev: &[Complex64; 4], cur: &[Complex64; 4], p: &[usize; 4]) -> bool {
    let scale: f64 = cur.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..4 {
        let d1 = (cur[p[i]] - prev[i]).norm();
        if d1 <= 1e-9 * scale {
            continue;
        }
        let d2 = (0..4)
            .filter(|&j| j != p[i])
            .map(|j| (cur[j] - prev[i]).norm())
            .fold(f64::INFINITY, f64::min);
        if d2 < 2.0 * d1 {
            return true;
        }
    }
    false
}

/// Label the roots at a single frequency by nearest-neighbor matching
/// against the four asymptotic family predictions.
pub fn label_by_family(mut roots: CharRoots, family: &[Complex64; 4]) -> CharRoots {
    let p = best_assignment(family, &roots.roots);
    let mut new_roots = [Complex64::new(0.0, 0.0); 4];
    let mut new_res = [0.0; 4];
    for i in 0..4 {
        new_roots[i] = roots.roots[p[i]];
        new_res[i] = roots.residuals[p[i]];
    }
    roots.roots = new_roots;
    roots.residuals = new_res;
    roots.labeled = true;
    roots
}

/// Solve and label the roots along an increasing radial grid.
///
/// Labels are anchored at the smallest grid point by the small-frequency
/// families and propagated by nearest-neighbor matching. A genuine root
/// collision (or a grid too coarse to pair consecutive root sets) yields
/// `BranchAmbiguity` with the offending radius; collisions do occur in
/// the bounded zone when m*tau is close to 1, in which case zone-local
/// labels (`label_by_family`) remain well defined.
pub fn match_branches(params: &PhysParams, r_grid: &[f64]) -> Result<Vec<CharRoots>> {
    let mut out = Vec::with_capacity(r_grid.len());
    let mut prev: Option<[Complex64; 4]> = None;
    for &r in r_grid {
        let solved = solve_roots(&quartic_at(params, r))?;
        let labeled = match prev {
            None => {
                let anchor = asymptotic_small_unchecked(params, r, 2);
                label_by_family(solved, &anchor)
            }
            Some(ref prev_roots) => {
                let p = best_assignment(prev_roots, &solved.roots);
                if assignment_ambiguous(prev_roots, &solved.roots, &p) {
                    return Err(MgtError::BranchAmbiguity { r });
                }
                label_by_family(solved, prev_roots)
            }
        };
        prev = Some(labeled.roots);
        out.push(labeled);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(tau: f64, delta: f64, m: f64) -> PhysParams {
        PhysParams::new(tau, delta, m, false).unwrap()
    }

    #[test]
    fn coefficients_match_hand_substitution() {
        let c = quartic_at(&params(1.0, 0.0, 0.5), 0.0);
        assert_eq!((c.c4, c.c3, c.c2, c.c1, c.c0), (1.0, 2.0, 1.0, 0.0, 0.0));

        let c = quartic_at(&params(1.0, 1.0, 0.5), 1.0);
        assert_eq!((c.c4, c.c3, c.c2, c.c1, c.c0), (1.0, 2.0, 3.0, 3.0, 0.5));

        let c = quartic_at(&params(0.5, 0.0, 1.0), 2.0);
        assert_eq!((c.c4, c.c3, c.c2, c.c1, c.c0), (0.25, 1.0, 2.0, 4.0, 2.0));
    }

    #[test]
    fn constructed_quartic_recovered() {
        // roots {-1,-2,-3,-4}: x^4 + 10x^3 + 35x^2 + 50x + 24
        let c = QuarticCoeffs {
            c4: 1.0,
            c3: 10.0,
            c2: 35.0,
            c1: 50.0,
            c0: 24.0,
            r: 0.0,
        };
        let mut got: Vec<f64> = solve_roots(&c)
            .unwrap()
            .roots
            .iter()
            .map(|z| z.re)
            .collect();
        got.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip([-4.0, -3.0, -2.0, -1.0]) {
            assert!((g - e).abs() < 1e-12, "got {g}, expected {e}");
        }
    }

    #[test]
    fn r_zero_double_roots() {
        let p = params(0.5, 1.0, 1.0);
        let roots = solve_roots(&quartic_at(&p, 0.0)).unwrap();
        let mut zeros = 0;
        let mut relax = 0;
        for z in roots.roots {
            if z.norm() < 1e-7 {
                zeros += 1;
            }
            if (z - Complex64::new(-2.0, 0.0)).norm() < 1e-6 {
                relax += 1;
            }
        }
        assert_eq!((zeros, relax), (2, 2));
    }

    #[test]
    fn residuals_vieta_and_negativity_on_sample() {
        let p = params(1.0, 1.0, 0.5);
        for &r in &[1e-3, 0.1, 1.0, 10.0, 1e3] {
            let c = quartic_at(&p, r);
            let roots = solve_roots(&c).unwrap();
            for (z, res) in roots.roots.iter().zip(roots.residuals) {
                assert!(res <= 1e-10, "residual {res} at r={r}");
                assert!(z.re < 0.0, "root {z} at r={r}");
                // scale definition sanity
                assert!(c.eval(*z).norm() <= 1e-10 * c.scale(z.norm()));
            }
            let sum: Complex64 = roots.roots.iter().sum();
            let prod: Complex64 = roots.roots.iter().product();
            assert!((sum - Complex64::from(-c.c3 / c.c4)).norm() < 1e-8 * (c.c3 / c.c4).abs());
            assert!(
                (prod - Complex64::from(c.c0 / c.c4)).norm()
                    < 1e-8 * (c.c0 / c.c4).abs().max(1e-30)
            );
        }
    }

    #[test]
    fn kappa_values_and_instability() {
        let p = params(1.0, 2.0, 0.5);
        assert!((kappa(&p, true) - (-4.0 + 10.0_f64.sqrt()) / 6.0).abs() < 1e-14);

        // tau=0.5, m=1, delta=0: kappa = 2(-1 +- sqrt(0.5))
        let p = params(0.5, 0.0, 1.0);
        assert!((kappa(&p, true) - 2.0 * (-1.0 + 0.5_f64.sqrt())).abs() < 1e-12);
        assert!((kappa(&p, false) - 2.0 * (-1.0 - 0.5_f64.sqrt())).abs() < 1e-12);

        // instability: kappa+ = (-2.1 + sqrt(8.81))/2.2 > 0 when m tau > 1
        let p = PhysParams::new(1.0, 0.1, 2.0, true).unwrap();
        let k = kappa(&p, true);
        assert!((k - 0.394_620_189_059_620_9).abs() < 1e-12, "kappa+ = {k}");
    }

    #[test]
    fn kappa_negative_on_random_stable_parameters() {
        // deterministic low-discrepancy sweep over the stable region
        let mut x = 0.5_f64;
        for _ in 0..200 {
            x = (x + 0.618_033_988_749_894_8) % 1.0;
            let tau = 0.05 + 1.95 * x;
            let y = (x * 7.0) % 1.0;
            let delta = 2.0 * y;
            let z = (x * 13.0) % 1.0;
            let m = (0.05 + 0.9 * z) / tau;
            let p = params(tau, delta, m);
            assert!(kappa(&p, true) < 0.0);
            assert!(kappa(&p, false) < 0.0);
        }
    }

    #[test]
    fn small_r_expansion_example() {
        let p = params(1.0, 1.0, 0.5);
        let a = asymptotic_small(&p, 1e-3, 2, 0.05).unwrap();
        assert!((a[0] - Complex64::new(-1e-6, 0.5_f64.sqrt() * 1e-3)).norm() < 1e-12);
        assert!(asymptotic_small(&p, 0.1, 2, 0.05).is_err());

        // relax pair -> -1/tau as r -> 0
        let p = params(0.5, 0.0, 1.0);
        let a = asymptotic_small(&p, 1e-9, 2, 0.05).unwrap();
        assert!((a[2].re + 2.0).abs() < 1e-4);
    }

    #[test]
    fn small_r_expansion_error_is_cubic() {
        let p = params(1.0, 1.0, 0.5);
        let mut ratios = Vec::new();
        for i in 0..10 {
            let r = 0.005 * 1.26_f64.powi(i); // last decade before eps = 0.05
            let numeric = solve_roots(&quartic_at(&p, r)).unwrap();
            let asym = asymptotic_small_unchecked(&p, r, 2);
            let labeled = label_by_family(numeric, &asym);
            let err = (labeled.roots[0] - asym[0]).norm();
            ratios.push(err / r.powi(3));
        }
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 4.0, "ratio spread {max}/{min}");
    }

    #[test]
    fn large_r_families() {
        // delta = 0: Re(osc) ~ -m/tau^2 r^-2
        let p = params(1.0, 0.0, 0.5);
        let a = asymptotic_large(&p, 100.0, 20.0).unwrap();
        assert!((a[0].re + 0.5e-4).abs() < 1e-18);
        let numeric = solve_roots(&quartic_at(&p, 100.0)).unwrap();
        let labeled = label_by_family(numeric, &a);
        assert!((labeled.roots[0].re - a[0].re).abs() / a[0].re.abs() < 0.05);

        // delta > 0: imaginary slope sqrt((delta+tau)/tau)
        let p = params(1.0, 1.0, 0.5);
        let a = asymptotic_large(&p, 500.0, 20.0).unwrap();
        assert!((a[0].im / 500.0 - 2.0_f64.sqrt()).abs() < 1e-12);
        assert!(asymptotic_large(&p, 1.0, 20.0).is_err());
    }

    #[test]
    fn branch_matching_continuous_for_well_separated_families() {
        let p = params(1.0, 1.0, 0.5);
        let grid: Vec<f64> = (0..500)
            .map(|i| 1e-3 * (1e6_f64).powf(i as f64 / 499.0))
            .collect();
        let labeled = match_branches(&p, &grid).unwrap();
        // conjugate symmetry of the osc pair at the small end
        let first = &labeled[0];
        assert!((first.roots[0] - first.roots[1].conj()).norm() < 1e-10);
        // final labels land on the large-frequency families
        let last = labeled.last().unwrap();
        let fam = asymptotic_large_unchecked(&p, last.r);
        for i in 0..4 {
            assert!(
                (last.roots[i] - fam[i]).norm() < 0.05 * (1.0 + fam[i].norm()),
                "branch {i}: {} vs {}",
                last.roots[i],
                fam[i]
            );
        }
        // no discontinuous jumps
        for w in labeled.windows(2) {
            for i in 0..4 {
                let step = (w[1].roots[i] - w[0].roots[i]).norm();
                assert!(step < 0.1 * (1.0 + w[1].roots[i].norm()));
            }
        }
    }

    #[test]
    fn branch_matching_detects_coarse_grid() {
        let p = params(1.0, 1.0, 0.5);
        let grid = [1e-3, 1e3];
        assert!(matches!(
            match_branches(&p, &grid),
            Err(MgtError::BranchAmbiguity { .. })
        ));
    }

    #[test]
    fn relax_pair_splits_from_minus_one_over_tau() {
        // tau=0.5, delta=0, m=1: relax branches real, -2 +- sqrt(m tau) r near r=0
        let p = params(0.5, 0.0, 1.0);
        let grid: Vec<f64> = (0..100).map(|i| 1e-4 * 1.05_f64.powi(i)).collect();
        let labeled = match_branches(&p, &grid).unwrap();
        for lr in &labeled {
            if lr.r < 0.01 {
                let expect = (0.5_f64).sqrt() * lr.r;
                assert!(lr.roots[2].im.abs() < 1e-9);
                assert!((lr.roots[2].re + 2.0 - expect).abs() < 0.1 * expect + 1e-6);
                assert!((lr.roots[3].re + 2.0 + expect).abs() < 0.1 * expect + 1e-6);
            }
        }
    }

    #[test]
    fn abscissa_signs() {
        let grid: Vec<f64> = (0..200)
            .map(|i| 1e-3 * (1e6_f64).powf(i as f64 / 199.0))
            .collect();
        let p = params(1.0, 1.0, 0.5);
        assert!(spectral_abscissa(&p, &grid).unwrap().value < 0.0);

        let p = PhysParams::new(1.0, 0.1, 2.0, true).unwrap();
        let a = spectral_abscissa(&p, &grid).unwrap();
        assert!(a.value > 0.0, "unstable abscissa {}", a.value);
    }
}
