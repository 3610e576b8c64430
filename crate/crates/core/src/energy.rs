//! Per-mode Fourier-space energy functionals, their dissipation
//! identities, the viscous-minus-inviscid difference solver, and the
//! vanishing-sound-diffusivity experiments.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{MgtError, Result};
use crate::mode::{memory_cross, ModeSolution, ModeState};
use crate::norms::sphere_surface;
use crate::params::PhysParams;
use crate::profile::{DataTriple, TailModel};

/// Coupling constant k = (tau + delta/2) / (tau (delta + tau)),
/// always inside [1/(2 tau), 1/tau].
pub fn coupling_k(params: &PhysParams) -> f64 {
    let (tau, delta) = (params.tau(), params.delta());
    let k = (tau + delta / 2.0) / (tau * (delta + tau));
    debug_assert!(k >= 1.0 / (2.0 * tau) - 1e-12 && k <= 1.0 / tau + 1e-12);
    k
}

/// Energy functionals of one mode at one instant, together with the
/// auxiliaries they are built from.
#[derive(Debug, Clone, Copy)]
pub struct EnergyState {
    pub e1: f64,
    pub e2: f64,
    pub e_total: f64,
    pub k: f64,
    pub aux_w: Complex64,
    pub aux_v: f64,
    pub history_term: f64,
}

/// Evaluate E1, E2 and E = E1 + k E2 from a mode state plus the memory
/// square V(t) = int g(t-eta) |u(eta)|^2 d eta.
pub fn energies(params: &PhysParams, state: &ModeState, v: f64) -> EnergyState {
    let (tau, delta, m) = (params.tau(), params.delta(), params.m());
    let r2 = state.r * state.r;
    let gt = params.kernel().eval(state.t);
    let (u, ut, utt, w) = (state.u, state.ut, state.utt, state.w);

    // reconstruction identity for the history term
    let h = tau * (m - gt) * u.norm_sqr() - 2.0 * (u * w.conj()).re + v;

    let e1 = tau * utt.norm_sqr()
        + (delta + tau) * r2 * ut.norm_sqr()
        + 2.0 * r2 * (u * ut.conj()).re
        + r2 / tau * h
        + gt * r2 * u.norm_sqr()
        - 2.0 * r2 * (w * ut.conj()).re;
    let e2 = r2 * u.norm_sqr()
        + ut.norm_sqr()
        + 2.0 * tau * (utt * ut.conj()).re
        + r2 * h
        + tau * (gt - m) * r2 * u.norm_sqr();
    let k = coupling_k(params);
    EnergyState {
        e1,
        e2,
        e_total: e1 + k * e2,
        k,
        aux_w: w,
        aux_v: v,
        history_term: h,
    }
}

/// Analytic right sides of the two dissipation identities at one instant;
/// `forcing` is phi_t^0(t, r) of the inhomogeneous (difference) problem,
/// zero for a homogeneous trajectory.
///
/// The difference u = phi^delta - phi^0 satisfies
/// tau u_ttt + u_tt + r^2 u + (delta+tau) r^2 u_t - r^2 g*u
///   = -delta r^2 phi_t^0
/// on the Fourier side (checked against the exact difference by a forced
/// integrator), so the forcing enters both identities with a minus sign.
pub fn energy_rhs(
    params: &PhysParams,
    state: &ModeState,
    v: f64,
    forcing: Complex64,
) -> (f64, f64) {
    let (tau, delta, m) = (params.tau(), params.delta(), params.m());
    let r2 = state.r * state.r;
    let gt = params.kernel().eval(state.t);
    let (u, ut, utt, w) = (state.u, state.ut, state.utt, state.w);
    let h = tau * (m - gt) * u.norm_sqr() - 2.0 * (u * w.conj()).re + v;

    let rhs1 = -2.0 * utt.norm_sqr() + 2.0 * r2 * ut.norm_sqr()
        - r2 / (tau * tau) * h
        - gt / tau * r2 * u.norm_sqr()
        - 2.0 * delta * r2 * (forcing * utt.conj()).re;
    let rhs2 = -2.0 * (delta + tau) * r2 * ut.norm_sqr() + 2.0 * tau * utt.norm_sqr()
        - gt * r2 * u.norm_sqr()
        - r2 / tau * h
        - 2.0 * delta * r2 * (forcing * ut.conj()).re;
    (rhs1, rhs2)
}

/// A mode trajectory the energy identities apply to: either a
/// homogeneous solution or a viscous-minus-inviscid difference.
pub enum EnergyTrajectory<'a> {
    Homogeneous(&'a ModeSolution),
    Difference(&'a DifferenceMode),
}

impl EnergyTrajectory<'_> {
    pub fn state(&self, t: f64) -> ModeState {
        match self {
            EnergyTrajectory::Homogeneous(s) => s.state_at(t),
            EnergyTrajectory::Difference(d) => d.state_at(t),
        }
    }

    pub fn memory_square(&self, t: f64) -> f64 {
        match self {
            EnergyTrajectory::Homogeneous(s) => s.memory_square_at(t),
            EnergyTrajectory::Difference(d) => d.memory_square_at(t),
        }
    }

    pub fn forcing(&self, t: f64) -> Complex64 {
        match self {
            EnergyTrajectory::Homogeneous(_) => Complex64::new(0.0, 0.0),
            EnergyTrajectory::Difference(d) => d.inviscid_ut(t),
        }
    }
}

/// |dE_i/dt (central difference) - analytic RHS| for both identities.
/// Second-order in dt by construction of the stencil.
pub fn energy_balance_residual(
    params: &PhysParams,
    traj: &EnergyTrajectory,
    t: f64,
    dt: f64,
) -> Result<(f64, f64)> {
    if t - dt < 0.0 {
        return Err(MgtError::StencilOutOfRange { t, dt });
    }
    let em = energies(params, &traj.state(t - dt), traj.memory_square(t - dt));
    let ep = energies(params, &traj.state(t + dt), traj.memory_square(t + dt));
    let mid = traj.state(t);
    let v = traj.memory_square(t);
    let (rhs1, rhs2) = energy_rhs(params, &mid, v, traj.forcing(t));
    let d1 = (ep.e1 - em.e1) / (2.0 * dt);
    let d2 = (ep.e2 - em.e2) / (2.0 * dt);
    Ok(((d1 - rhs1).abs(), (d2 - rhs2).abs()))
}

/// The difference u_hat = phi_hat^delta - phi_hat^0 of two runs with
/// identical data; it solves the MGT equation forced by
/// -delta * Delta phi_t^0.
pub struct DifferenceMode {
    pub viscous_params: PhysParams,
    viscous: ModeSolution,
    inviscid: ModeSolution,
    r: f64,
}

impl DifferenceMode {
    pub fn new(
        params: &PhysParams,
        r: f64,
        d0: Complex64,
        d1: Complex64,
        d2: Complex64,
    ) -> Result<Self> {
        let inviscid_params = params.with_delta(0.0)?;
        Ok(Self {
            viscous_params: *params,
            viscous: ModeSolution::new(params, r, d0, d1, d2)?,
            inviscid: ModeSolution::new(&inviscid_params, r, d0, d1, d2)?,
            r,
        })
    }

    pub fn state_at(&self, t: f64) -> ModeState {
        let a = self.viscous.state_at(t);
        let b = self.inviscid.state_at(t);
        ModeState {
            t,
            r: self.r,
            u: a.u - b.u,
            ut: a.ut - b.ut,
            utt: a.utt - b.utt,
            w: a.w - b.w,
        }
    }

    /// Forcing base phi_t^0 of the inhomogeneous equation.
    pub fn inviscid_ut(&self, t: f64) -> Complex64 {
        self.inviscid.state_at(t).ut
    }

    /// int_0^t |phi_t^0(eta)|^2 d eta, for the Gronwall bound.
    pub fn forcing_square_integral(&self, t: f64) -> f64 {
        match self.inviscid.coeffs() {
            Some(mc) => {
                // sum over pairs of (e^{mu t} - 1)/mu with mu = l_j + conj(l_k)
                let mut acc = Complex64::new(0.0, 0.0);
                for (cj, lj) in mc.c.iter().zip(mc.roots) {
                    for (ck, lk) in mc.c.iter().zip(mc.roots) {
                        let amp = cj * lj * (ck * lk).conj();
                        let mu = lj + lk.conj();
                        let phi = if (mu * t).norm() < 1e-4 {
                            let x = mu * t;
                            Complex64::from(t) * (Complex64::from(1.0) + x / 2.0 + x * x / 6.0)
                        } else {
                            ((mu * t).exp() - 1.0) / mu
                        };
                        acc += amp * phi;
                    }
                }
                acc.re
            }
            None => {
                let n = 512usize;
                let h = t / n as f64;
                let f = |eta: f64| self.inviscid.state_at(eta).ut.norm_sqr();
                let mut acc = f(0.0) + f(t);
                for i in 1..n {
                    acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
                }
                acc * h / 3.0
            }
        }
    }

    /// V(t) of the difference, assembled from the three pairwise cross
    /// memory integrals (V is quadratic in the state).
    pub fn memory_square_at(&self, t: f64) -> f64 {
        match (self.viscous.coeffs(), self.inviscid.coeffs()) {
            (Some(a), Some(b)) => {
                let p = &self.viscous_params;
                let vv = memory_cross(p, a, a, t).re;
                let ii = memory_cross(p, b, b, t).re;
                let vi = memory_cross(p, a, b, t);
                vv - 2.0 * vi.re + ii
            }
            _ => {
                let g = self.viscous_params.kernel();
                let n = 512usize;
                let h = t / n as f64;
                let f = |eta: f64| g.eval(t - eta) * self.state_at(eta).u.norm_sqr();
                let mut acc = f(0.0) + f(t);
                for i in 1..n {
                    acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
                }
                acc * h / 3.0
            }
        }
    }
}

/// One record of the delta sweep.
#[derive(Debug, Clone, Copy)]
pub struct InviscidRecord {
    pub delta: f64,
    /// sup over the time grid of the combined weighted L1 proxies.
    pub m_sup: f64,
    /// time at which the sup is attained.
    pub at_t: f64,
}

fn l1_prefactor(n: f64) -> f64 {
    (2.0 * std::f64::consts::PI).powf(-n) * sphere_surface(n)
}

fn check_weighted_data(data: &DataTriple, s0: f64) -> Result<()> {
    let n = data.n();
    if s0 <= n + 2.0 {
        return Err(MgtError::WeightDivergence { s0 });
    }
    for (profile, weight) in [(&data.p0, 1.0 + s0), (&data.p1, 1.0 + s0), (&data.p2, s0)] {
        if let TailModel::Algebraic { a } = profile.tail {
            if a <= n + weight {
                return Err(MgtError::WeightDivergence { s0 });
            }
        }
    }
    Ok(())
}

/// M(delta) = sup_t [ ||r (u_t + k u)||_{L1} + ||u_tt + k u_t||_{L1}
///                     + sqrt(g(t)) ||r u||_{L1} ]
/// over the difference modes of a delta sweep, with the radial
/// Hausdorff-Young majorant (2 pi)^{-n} omega_{n-1} int r^{n-1} |.| dr
/// standing in for the physical-space sup norms.
pub fn inviscid_metrics(
    base: &PhysParams,
    deltas: &[f64],
    data: &DataTriple,
    s0: f64,
    t_grid: &[f64],
) -> Result<Vec<InviscidRecord>> {
    check_weighted_data(data, s0)?;
    let n = data.n();
    let grid = data.grid();
    let pref = l1_prefactor(n);
    deltas
        .par_iter()
        .map(|&delta| {
            let params = base.with_delta(delta)?;
            let k = coupling_k(&params);
            let modes: Vec<DifferenceMode> = grid
                .nodes
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    let (d0, d1, d2) = data.at(i);
                    DifferenceMode::new(&params, r, d0, d1, d2)
                })
                .collect::<Result<_>>()?;
            let mut best = (0.0_f64, t_grid.first().copied().unwrap_or(0.0));
            for &t in t_grid {
                let gt = params.kernel().eval(t).sqrt();
                let mut q1 = 0.0;
                let mut q2 = 0.0;
                let mut q3 = 0.0;
                for (mode, (&r, &w)) in modes.iter().zip(grid.nodes.iter().zip(&grid.weights)) {
                    let s = mode.state_at(t);
                    let rw = w * r.powf(n - 1.0);
                    q1 += rw * r * (s.ut + s.u * k).norm();
                    q2 += rw * (s.utt + s.ut * k).norm();
                    q3 += rw * r * s.u.norm() * gt;
                }
                let total = pref * (q1 + q2 + q3);
                if total > best.0 {
                    best = (total, t);
                }
            }
            Ok(InviscidRecord {
                delta,
                m_sup: best.0,
                at_t: best.1,
            })
        })
        .collect()
}

/// sup over [0, T] of the L1 proxy of |u_hat(t, .)| for the difference
/// mode family; compared against the sqrt(delta) e^{T/(2 tau)} envelope.
pub fn finite_time_sup_diff(
    params: &PhysParams,
    data: &DataTriple,
    t_cap: f64,
    samples: usize,
) -> Result<f64> {
    let n = data.n();
    if n < 2.0 {
        return Err(MgtError::UnsupportedDimension(n));
    }
    if t_cap == 0.0 {
        return Ok(0.0);
    }
    let grid = data.grid();
    let modes: Vec<DifferenceMode> = grid
        .nodes
        .par_iter()
        .enumerate()
        .map(|(i, &r)| {
            let (d0, d1, d2) = data.at(i);
            DifferenceMode::new(params, r, d0, d1, d2)
        })
        .collect::<Result<_>>()?;
    let pref = l1_prefactor(n);
    let mut sup: f64 = 0.0;
    for i in 0..=samples {
        let t = t_cap * i as f64 / samples as f64;
        let mut acc = 0.0;
        for (mode, (&r, &w)) in modes.iter().zip(grid.nodes.iter().zip(&grid.weights)) {
            acc += w * r.powf(n - 1.0) * mode.state_at(t).u.norm();
        }
        sup = sup.max(pref * acc);
    }
    Ok(sup)
}
