//! Sobolev norms by radial quadrature for arbitrary real dimension,
//! the oscillatory-integral oracle, the reference rate envelopes, and
//! the regularity-loss probe.

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{MgtError, Result};
use crate::fit::{fit_decay, log_times, DecayFit, FitModel};
use crate::grid::{gauss_legendre, RadialGrid};
use crate::mode::ModeSolution;
use crate::params::{FrequencyZones, PhysParams, Zone};
use crate::profile::{algebraic_tail_profile, DataTriple, RadialProfile, TailModel};

/// Surface area of the unit sphere in n dimensions,
/// omega_{n-1} = 2 pi^{n/2} / Gamma(n/2); n may be any positive real.
pub fn sphere_surface(n: f64) -> f64 {
    2.0 * std::f64::consts::PI.powf(n / 2.0) / gamma(n / 2.0)
}

fn parseval_prefactor(n: f64) -> f64 {
    (2.0 * std::f64::consts::PI).powf(-n) * sphere_surface(n)
}

const TRUNCATION_TOL: f64 = 1e-6;

/// Homogeneous H^s norm of a radial Fourier profile:
/// ((2 pi)^{-n} omega_{n-1} int r^{2s+n-1} |f_hat|^2 dr)^{1/2},
/// with an analytic power-law tail correction for algebraic profiles.
pub fn radial_hs_norm(profile: &RadialProfile, s: f64) -> Result<f64> {
    let n = profile.n;
    let p = 2.0 * s + n - 1.0;
    if p <= -1.0 && profile.values[0].norm() > 0.0 {
        return Err(MgtError::DivergentAtOrigin { exponent: p });
    }
    let mut acc = 0.0;
    for ((&r, &w), v) in profile
        .grid
        .nodes
        .iter()
        .zip(&profile.grid.weights)
        .zip(&profile.values)
    {
        acc += w * r.powf(p) * v.norm_sqr();
    }
    let tail = match profile.tail {
        TailModel::Negligible => {
            // crude one-scale-length estimate from the last sample
            let r = *profile.grid.nodes.last().unwrap();
            let v = profile.values.last().unwrap().norm_sqr();
            v * r.powf(p) * r
        }
        TailModel::Algebraic { a } => {
            let r = profile.grid.r_max;
            let q = p - 2.0 * a;
            if q >= -1.0 {
                return Err(MgtError::TruncationWarning {
                    tail: f64::INFINITY,
                    tol: TRUNCATION_TOL,
                });
            }
            // |f(r)|^2 ~ (f(r_max) r_max^a)^2 r^{-2a} beyond r_max
            let c2 = profile.values.last().unwrap().norm_sqr() * r.powf(2.0 * a);
            c2 * r.powf(q + 1.0) / (-q - 1.0)
        }
    };
    match profile.tail {
        TailModel::Negligible => {
            if tail > TRUNCATION_TOL * acc.max(1e-300) {
                return Err(MgtError::TruncationWarning {
                    tail,
                    tol: TRUNCATION_TOL,
                });
            }
        }
        TailModel::Algebraic { .. } => acc += tail,
    }
    Ok((parseval_prefactor(n) * acc).sqrt())
}

/// Zone restriction for solution norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    All,
    Zone(Zone),
}

/// Evolves every grid mode of a data triple once and then evaluates
/// Sobolev norms of time derivatives at arbitrary times.
pub struct SolutionNormEvaluator {
    n: f64,
    grid: RadialGrid,
    modes: Vec<ModeSolution>,
}

impl SolutionNormEvaluator {
    pub fn new(params: &PhysParams, data: &DataTriple) -> Result<Self> {
        let grid = data.grid().clone();
        let modes: Vec<ModeSolution> = grid
            .nodes
            .par_iter()
            .enumerate()
            .map(|(i, &r)| {
                let (d0, d1, d2) = data.at(i);
                ModeSolution::new(params, r, d0, d1, d2)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            n: data.n(),
            grid,
            modes,
        })
    }

    /// ||  |D|^s d_t^k phi(t) ||_{L^2}, optionally restricted to one zone.
    pub fn norm_at(
        &self,
        t: f64,
        s: f64,
        k: usize,
        restriction: Restriction,
        zones: &FrequencyZones,
    ) -> f64 {
        let p = 2.0 * s + self.n - 1.0;
        let mut acc = 0.0;
        let mut first_in_range: Option<(f64, f64)> = None;
        for ((&r, &w), mode) in self
            .grid
            .nodes
            .iter()
            .zip(&self.grid.weights)
            .zip(&self.modes)
        {
            match restriction {
                Restriction::All => {}
                Restriction::Zone(z) => {
                    if zones.classify(r) != z {
                        continue;
                    }
                }
            }
            let v = mode.u_derivative(t, k).norm_sqr();
            if first_in_range.is_none() {
                first_in_range = Some((r, v));
            }
            acc += w * r.powf(p) * v;
        }
        // analytic stub on [0, r_lo): the mode amplitude is bounded there,
        // approximate it by the first sampled value
        if matches!(restriction, Restriction::All)
            || matches!(restriction, Restriction::Zone(Zone::Interior))
        {
            if let Some((_, v)) = first_in_range {
                let r_lo = self.grid.r_lo;
                acc += v * r_lo.powf(p + 1.0) / (p + 1.0);
            }
        }
        (parseval_prefactor(self.n) * acc).sqrt()
    }

    /// Time history of a norm over log-spaced samples.
    pub fn history(
        &self,
        times: &[f64],
        s: f64,
        k: usize,
        restriction: Restriction,
        zones: &FrequencyZones,
    ) -> Vec<f64> {
        times
            .par_iter()
            .map(|&t| self.norm_at(t, s, k, restriction, zones))
            .collect()
    }
}

/// One-shot solution norm (see `SolutionNormEvaluator` for sweeps).
pub fn solution_norm(
    params: &PhysParams,
    data: &DataTriple,
    t: f64,
    s: f64,
    k: usize,
    restriction: Restriction,
    zones: &FrequencyZones,
) -> Result<f64> {
    Ok(SolutionNormEvaluator::new(params, data)?.norm_at(t, s, k, restriction, zones))
}

/// The four-branch reference envelope D_{n,s}(t) for || phi(t) ||_{H^s-dot}.
/// The piecewise definition is reproduced verbatim; it is not continuous
/// across the n = 2 - 2s boundary.
pub fn dns_reference(n: f64, s: f64, t: f64) -> f64 {
    let base = 1.0 + t;
    if n < 3.0 - 2.0 * s {
        if n < 2.0 - 2.0 * s {
            base.powf(1.0 - s - n / 2.0)
        } else if n == 2.0 - 2.0 * s {
            base.powf(0.5 - s / 2.0 - n / 4.0) * (std::f64::consts::E + t).ln().sqrt()
        } else {
            base.powf(1.0 - 5.0 * s / 6.0 - 5.0 * n / 12.0)
        }
    } else {
        base.powf(0.5 - s / 2.0 - n / 4.0)
    }
}

/// The L^2 envelope P_n(t) of the nonlinear theorems:
/// sqrt(ln(e+t)) in two dimensions, (1+t)^{1/2 - n/4} above.
pub fn pn_reference(n: f64, t: f64) -> Result<f64> {
    if n < 2.0 {
        return Err(MgtError::UnsupportedDimension(n));
    }
    if n == 2.0 {
        Ok((std::f64::consts::E + t).ln().sqrt())
    } else {
        Ok((1.0 + t).powf(0.5 - n / 4.0))
    }
}

const OSC_PANEL_BUDGET: usize = 2_000_000;

/// G(t) = int_0^eps r^{2s+n-3} sin^2(r t) e^{-c r^2 t} dr, resolved by
/// panels no wider than a quarter oscillation period, with the analytic
/// sin^2(rt) ~ (rt)^2 stub below r = 1e-3/t.
pub fn osc_integral(n: f64, s: f64, c: f64, t: f64, eps: f64) -> Result<f64> {
    if 2.0 * s + n - 1.0 < 0.0 {
        return Err(MgtError::DivergentAtOrigin {
            exponent: 2.0 * s + n - 3.0,
        });
    }
    assert!(c > 0.0 && t > 0.0 && eps > 0.0);
    let p = 2.0 * s + n - 3.0;
    let r0 = 1e-3 / t;
    let stub = t * t * r0.powf(2.0 * s + n) / (2.0 * s + n);
    // e^{-60} leaves no mass beyond the cut
    let r_cut = eps.min((60.0 / (c * t)).sqrt());
    if r_cut <= r0 {
        return Ok(stub);
    }
    let integrand = |r: f64| r.powf(p) * (r * t).sin().powi(2) * (-c * r * r * t).exp();
    let (xs, ws) = gauss_legendre(8);
    let mut acc = 0.0;
    let mut integrate_panel = |a: f64, b: f64| {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in xs.iter().zip(&ws) {
            s += w * integrand(mid + half * x);
        }
        acc += s * half;
    };
    let width = std::f64::consts::PI / (4.0 * t);
    // geometric panels through the power-law region [r0, width]
    let mut a = r0;
    if width > r0 {
        let panels = 12usize;
        let ratio = (width / r0).powf(1.0 / panels as f64);
        for _ in 0..panels {
            let b = (a * ratio).min(r_cut);
            if b <= a {
                break;
            }
            integrate_panel(a, b);
            a = b;
        }
    }
    if a < r_cut {
        let count = ((r_cut - a) / width).ceil() as usize;
        if count > OSC_PANEL_BUDGET {
            return Err(MgtError::ResolutionBudgetExceeded {
                panels: count,
                budget: OSC_PANEL_BUDGET,
            });
        }
        for i in 0..count {
            let lo = a + i as f64 * width;
            let hi = (lo + width).min(r_cut);
            integrate_panel(lo, hi);
        }
    }
    Ok(stub + acc)
}

/// || chi_ext |xi|^{-s} e^{-c t / |xi|^2} ||_{L^inf} over r > N:
/// the stationary point sits at r^2 = 2 c t / s, clamped to the boundary.
pub fn sup_exterior_weight(s: f64, c: f64, t: f64, cap_n: f64) -> f64 {
    assert!(s >= 0.0);
    if s == 0.0 {
        return 1.0;
    }
    let r2_star = 2.0 * c * t / s;
    let r2 = r2_star.max(cap_n * cap_n);
    r2.powf(-s / 2.0) * (-c * t / r2).exp()
}

/// Outcome of the regularity-loss probe: the fitted exterior-zone decay
/// exponent at delta = 0 and the exponential log-slope of the viscous
/// companion run on identical data.
#[derive(Debug, Clone)]
pub struct RegularityLossReport {
    pub gamma: f64,
    pub tail_exponent: f64,
    pub inviscid_fit: DecayFit,
    pub viscous_log_slope: f64,
}

/// Probe the (1+t)^{-gamma/2} exterior-zone rate of the inviscid equation
/// with a datum whose Fourier tail sits a small margin inside the
/// H^{s+gamma-1} regularity the theorem asks of phi1.
pub fn regularity_loss_probe(
    params: &PhysParams,
    zones: &FrequencyZones,
    n: f64,
    s: f64,
    gamma: f64,
) -> Result<RegularityLossReport> {
    const MARGIN: f64 = 0.1;
    let inviscid = params.with_delta(0.0)?;
    let a = s + gamma + n / 2.0 - 1.0 + MARGIN;
    let cap = zones.cap_n();
    let grid = RadialGrid::geometric(cap, 3e4, 1500, 8)?;
    let f1 = algebraic_tail_profile(n, a, &grid)?;
    let zero = RadialProfile::zero(n, &grid);
    let data = DataTriple::new(zero.clone(), f1, zero)?;

    let times = log_times(1e3, 1e5, 25);
    let eval = SolutionNormEvaluator::new(&inviscid, &data)?;
    let history = eval.history(&times, s, 0, Restriction::Zone(Zone::Exterior), zones);
    let inviscid_fit = fit_decay(&times, &history, FitModel::Power)?;

    // viscous companion: exterior norm decays exponentially, fit log-linear in t
    let viscous_params = if params.delta() > 0.0 {
        *params
    } else {
        params.with_delta(1.0)?
    };
    let eval_v = SolutionNormEvaluator::new(&viscous_params, &data)?;
    let tv: Vec<f64> = (0..12).map(|i| 1.0 + 39.0 * i as f64 / 11.0).collect();
    let hv = eval_v.history(&tv, s, 0, Restriction::Zone(Zone::Exterior), zones);
    let n_pts = tv.len() as f64;
    let sx: f64 = tv.iter().sum();
    let sy: f64 = hv.iter().map(|v| v.ln()).sum();
    let sxx: f64 = tv.iter().map(|x| x * x).sum();
    let sxy: f64 = tv.iter().zip(&hv).map(|(x, v)| x * v.ln()).sum();
    let viscous_log_slope = (n_pts * sxy - sx * sy) / (n_pts * sxx - sx * sx);

    Ok(RegularityLossReport {
        gamma,
        tail_exponent: a,
        inviscid_fit,
        viscous_log_slope,
    })
}
