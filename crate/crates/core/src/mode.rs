//! Exact per-mode evolution of the fourth-order Fourier ODE.
//!
//! The primary path synthesizes u_hat(t) = sum_j c_j exp(lambda_j t) from
//! the characteristic roots, with the Cramer coefficients of the 4x4
//! Vandermonde system. Near-degenerate roots fall back to the matrix
//! exponential of the equivalent first-order system
//! y = (u, u_t, u_tt, W), which is also the integro-differential oracle's
//! formulation: W(t) = int_0^t g(t-eta) u(eta) d eta replaces the memory
//! convolution exactly because the kernel is a single exponential.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{MgtError, Result};
use crate::params::{FrequencyZones, PhysParams, Zone};
use crate::quartic::{quartic_at, solve_roots};

// Exact double roots split by ~sqrt(machine epsilon) through the
// companion eigensolve, so the fallback trigger must sit well above that.
const DEGENERACY_GAP: f64 = 1e-6;

/// One Fourier mode (and its memory auxiliary) at a time instant.
#[derive(Debug, Clone, Copy)]
pub struct ModeState {
    pub t: f64,
    pub r: f64,
    pub u: Complex64,
    pub ut: Complex64,
    pub utt: Complex64,
    pub w: Complex64,
}

impl ModeState {
    pub fn as_vector(&self) -> [Complex64; 4] {
        [self.u, self.ut, self.utt, self.w]
    }

    pub fn max_component(&self) -> f64 {
        self.as_vector()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Cramer coefficients of one mode together with a condition estimate
/// of the Vandermonde system.
#[derive(Debug, Clone)]
pub struct ModeCoeffs {
    pub c: [Complex64; 4],
    pub roots: [Complex64; 4],
    pub cond: f64,
}

/// Compatibility datum phi3_hat = (Delta phi0 + (delta+tau) Delta phi1 - phi2)/tau
/// on the Fourier side (Delta -> -r^2).
pub fn third_datum(
    params: &PhysParams,
    r: f64,
    d0: Complex64,
    d1: Complex64,
    d2: Complex64,
) -> Complex64 {
    let r2 = r * r;
    (-d0 * r2 - d1 * (params.delta() + params.tau()) * r2 - d2) / params.tau()
}

fn det4(m: &[[Complex64; 4]; 4]) -> Complex64 {
    let mut det = Complex64::new(0.0, 0.0);
    for j in 0..4 {
        let mut minor = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (ri, row) in m.iter().enumerate().skip(1) {
            let mut ci = 0;
            for (cj, v) in row.iter().enumerate() {
                if cj != j {
                    minor[ri - 1][ci] = *v;
                    ci += 1;
                }
            }
        }
        let d3 = minor[0][0] * (minor[1][1] * minor[2][2] - minor[1][2] * minor[2][1])
            - minor[0][1] * (minor[1][0] * minor[2][2] - minor[1][2] * minor[2][0])
            + minor[0][2] * (minor[1][0] * minor[2][1] - minor[1][1] * minor[2][0]);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        det += m[0][j] * d3 * sign;
    }
    det
}

/// Vandermonde determinant by the product formula prod_{j<i}(l_i - l_j).
pub fn vandermonde_det(roots: &[Complex64; 4]) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for j in 0..4 {
        for i in (j + 1)..4 {
            det *= roots[i] - roots[j];
        }
    }
    det
}

/// Solve the Vandermonde system A c = (d0, d1, d2, d3)^T by Cramer's rule.
pub fn cramer_coeffs(roots: &[Complex64; 4], data: &[Complex64; 4]) -> Result<ModeCoeffs> {
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut min_gap = f64::INFINITY;
    for i in 0..4 {
        for j in (i + 1)..4 {
            min_gap = min_gap.min((roots[i] - roots[j]).norm());
        }
    }
    if min_gap < DEGENERACY_GAP * scale {
        return Err(MgtError::DegenerateRoots { gap: min_gap });
    }

    let det_a = vandermonde_det(roots);
    let mut a = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (k, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = roots[j].powu(k as u32);
        }
    }
    let mut c = [Complex64::new(0.0, 0.0); 4];
    for j in 0..4 {
        let mut aj = a;
        for k in 0..4 {
            aj[k][j] = data[k];
        }
        c[j] = det4(&aj) / det_a;
    }

    // crude condition estimate: infinity norms of A and A^{-1}
    let am = Matrix4::from_fn(|i, j| a[i][j]);
    let cond = match am.try_inverse() {
        Some(inv) => {
            let norm = |m: &Matrix4<Complex64>| {
                (0..4)
                    .map(|i| (0..4).map(|j| m[(i, j)].norm()).sum::<f64>())
                    .fold(0.0, f64::max)
            };
            norm(&am) * norm(&inv)
        }
        None => f64::INFINITY,
    };
    Ok(ModeCoeffs {
        c,
        roots: *roots,
        cond,
    })
}

/// First-order system matrix of the original integro-differential mode:
/// y' = A y with y = (u, u_t, u_tt, W). Its eigenvalues are exactly the
/// characteristic quartic roots.
pub fn system_matrix(params: &PhysParams, r: f64) -> Matrix4<f64> {
    let (tau, delta, m) = (params.tau(), params.delta(), params.m());
    let r2 = r * r;
    Matrix4::new(
        0.0,
        1.0,
        0.0,
        0.0, //
        0.0,
        0.0,
        1.0,
        0.0, //
        -r2 / tau,
        -(delta + tau) * r2 / tau,
        -1.0 / tau,
        r2 / tau, //
        m,
        0.0,
        0.0,
        -1.0 / tau,
    )
}

/// Matrix exponential of a real 4x4 by [6/6] Pade with scaling and squaring.
pub fn expm4(a: &Matrix4<f64>) -> Matrix4<f64> {
    let norm = a.abs().row_sum().max();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a / 2f64.powi(s);
    const C: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let id = Matrix4::identity();
    let b2 = b * b;
    let b4 = b2 * b2;
    let b6 = b4 * b2;
    let even = id * C[0] + b2 * C[2] + b4 * C[4] + b6 * C[6];
    let odd = b * (id * C[1] + b2 * C[3] + b4 * C[5]);
    let num = even + odd;
    let den = even - odd;
    let mut e = den.try_inverse().expect("Pade denominator invertible") * num;
    for _ in 0..s {
        e = e * e;
    }
    e
}

fn apply_real4(m: &Matrix4<f64>, y: &[Complex64; 4]) -> [Complex64; 4] {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (i, o) in out.iter_mut().enumerate() {
        for (j, v) in y.iter().enumerate() {
            *o += v * m[(i, j)];
        }
    }
    out
}

/// Matrix exponential of a real dynamic matrix, same Pade scheme as
/// `expm4`. Used for the block (Van Loan) construction of source
/// integrals; not a hot path.
pub fn expm_dyn(a: &nalgebra::DMatrix<f64>) -> nalgebra::DMatrix<f64> {
    let dim = a.nrows();
    let norm = a.abs().row_sum().max();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a / 2f64.powi(s);
    const C: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let id = nalgebra::DMatrix::<f64>::identity(dim, dim);
    let b2 = &b * &b;
    let b4 = &b2 * &b2;
    let b6 = &b4 * &b2;
    let even = &id * C[0] + &b2 * C[2] + &b4 * C[4] + &b6 * C[6];
    let odd = &b * (&id * C[1] + &b2 * C[3] + &b4 * C[5]);
    let num = &even + &odd;
    let den = &even - &odd;
    let mut e = den.try_inverse().expect("Pade denominator invertible") * num;
    for _ in 0..s {
        e = &e * &e;
    }
    e
}

/// (exp(mu t) - 1)/mu, stable for small |mu t|.
fn phi1(mu: Complex64, t: f64) -> Complex64 {
    let x = mu * t;
    if x.norm() < 1e-4 {
        Complex64::from(t) * (Complex64::from(1.0) + x / 2.0 + x * x / 6.0 + x * x * x / 24.0)
    } else {
        (x.exp() - 1.0) / mu
    }
}

enum Evolution {
    /// Root synthesis with Cramer coefficients.
    Synthesis(ModeCoeffs),
    /// Near-degenerate roots: dense matrix exponential of the 4x4 system.
    MatrixExp,
}

/// Precomputed exact evolution of one mode for fixed data.
pub struct ModeSolution {
    params: PhysParams,
    r: f64,
    data: [Complex64; 4],
    path: Evolution,
    sys: Matrix4<f64>,
}

impl ModeSolution {
    pub fn new(
        params: &PhysParams,
        r: f64,
        d0: Complex64,
        d1: Complex64,
        d2: Complex64,
    ) -> Result<Self> {
        let d3 = third_datum(params, r, d0, d1, d2);
        let roots = solve_roots(&quartic_at(params, r))?;
        let path = match cramer_coeffs(&roots.roots, &[d0, d1, d2, d3]) {
            Ok(coeffs) => Evolution::Synthesis(coeffs),
            Err(MgtError::DegenerateRoots { .. }) => Evolution::MatrixExp,
            Err(e) => return Err(e),
        };
        Ok(Self {
            params: *params,
            r,
            data: [d0, d1, d2, Complex64::new(0.0, 0.0)],
            path,
            sys: system_matrix(params, r),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.path, Evolution::MatrixExp)
    }

    pub fn coeffs(&self) -> Option<&ModeCoeffs> {
        match &self.path {
            Evolution::Synthesis(c) => Some(c),
            Evolution::MatrixExp => None,
        }
    }

    pub fn state_at(&self, t: f64) -> ModeState {
        match &self.path {
            Evolution::Synthesis(mc) => {
                let tau = self.params.tau();
                let m = self.params.m();
                let mut u = Complex64::new(0.0, 0.0);
                let mut ut = u;
                let mut utt = u;
                let mut w = u;
                let decay = (-t / tau).exp();
                for (cj, lj) in mc.c.iter().zip(mc.roots) {
                    let e = (lj * t).exp();
                    u += cj * e;
                    ut += cj * lj * e;
                    utt += cj * lj * lj * e;
                    // W(t) = m sum_j c_j e^{-t/tau} phi1(lambda_j + 1/tau, t)
                    w += cj * phi1(lj + 1.0 / tau, t) * decay * m;
                }
                ModeState {
                    t,
                    r: self.r,
                    u,
                    ut,
                    utt,
                    w,
                }
            }
            Evolution::MatrixExp => {
                let e = expm4(&(self.sys * t));
                let y = apply_real4(&e, &self.data);
                ModeState {
                    t,
                    r: self.r,
                    u: y[0],
                    ut: y[1],
                    utt: y[2],
                    w: y[3],
                }
            }
        }
    }

    /// k-th time derivative of u_hat, k <= 3 (synthesis path only for k = 3).
    pub fn u_derivative(&self, t: f64, k: usize) -> Complex64 {
        match &self.path {
            Evolution::Synthesis(mc) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (cj, lj) in mc.c.iter().zip(mc.roots) {
                    acc += cj * lj.powu(k as u32) * (lj * t).exp();
                }
                acc
            }
            Evolution::MatrixExp => {
                let s = self.state_at(t);
                match k {
                    0 => s.u,
                    1 => s.ut,
                    2 => s.utt,
                    _ => {
                        // u''' from the governing equation
                        let tau = self.params.tau();
                        let r2 = self.r * self.r;
                        (-s.utt - s.u * r2 - s.ut * (self.params.delta() + tau) * r2 + s.w * r2)
                            / tau
                    }
                }
            }
        }
    }

    /// V(t) = int_0^t g(t-eta) |u(eta)|^2 d eta in closed form
    /// (synthesis path) or by Simpson quadrature (degenerate path).
    pub fn memory_square_at(&self, t: f64) -> f64 {
        match &self.path {
            Evolution::Synthesis(mc) => {
                let tau = self.params.tau();
                let m = self.params.m();
                let decay = (-t / tau).exp();
                let mut acc = Complex64::new(0.0, 0.0);
                for (cj, lj) in mc.c.iter().zip(mc.roots) {
                    for (ck, lk) in mc.c.iter().zip(mc.roots) {
                        let mu = lj + lk.conj() + 1.0 / tau;
                        acc += cj * ck.conj() * phi1(mu, t) * decay * m;
                    }
                }
                acc.re
            }
            Evolution::MatrixExp => {
                let n = 256usize;
                let h = t / n as f64;
                let g = self.params.kernel();
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

/// Cross memory integral int_0^t g(t-eta) u_a(eta) conj(u_b(eta)) d eta
/// for two synthesized modes sharing the kernel parameters.
pub fn memory_cross(params: &PhysParams, a: &ModeCoeffs, b: &ModeCoeffs, t: f64) -> Complex64 {
    let tau = params.tau();
    let m = params.m();
    let decay = (-t / tau).exp();
    let mut acc = Complex64::new(0.0, 0.0);
    for (cj, lj) in a.c.iter().zip(a.roots) {
        for (ck, lk) in b.c.iter().zip(b.roots) {
            let mu = lj + lk.conj() + 1.0 / tau;
            acc += cj * ck.conj() * phi1(mu, t) * decay * m;
        }
    }
    acc
}

/// Exact mode evolution: initial data (d0, d1, d2), compatibility datum
/// applied internally, memory auxiliary from the exact convolution.
pub fn evolve_mode(
    params: &PhysParams,
    r: f64,
    d0: Complex64,
    d1: Complex64,
    d2: Complex64,
    t: f64,
) -> Result<ModeState> {
    Ok(ModeSolution::new(params, r, d0, d1, d2)?.state_at(t))
}

/// Restart from a full state: advance (u, u_t, u_tt, W) by dt through the
/// matrix exponential of the first-order system.
pub fn propagate_state(params: &PhysParams, state: &ModeState, dt: f64) -> ModeState {
    let e = expm4(&(system_matrix(params, state.r) * dt));
    let y = apply_real4(&e, &state.as_vector());
    ModeState {
        t: state.t + dt,
        r: state.r,
        u: y[0],
        ut: y[1],
        utt: y[2],
        w: y[3],
    }
}

pub fn max_root_norm(params: &PhysParams, r: f64) -> Result<f64> {
    let roots = solve_roots(&quartic_at(params, r))?;
    Ok(roots.roots.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Classical RK4 on the original third-order integro-differential system
/// with the memory auxiliary: y = (u, u_t, u_tt, W),
/// y' = (u_t, u_tt, (-u_tt - r^2 u - (delta+tau) r^2 u_t + r^2 W)/tau,
///       -W/tau + m u).
pub fn mode_oracle(
    params: &PhysParams,
    r: f64,
    d0: Complex64,
    d1: Complex64,
    d2: Complex64,
    t: f64,
    dt: f64,
) -> Result<ModeState> {
    let lambda_max = max_root_norm(params, r)?;
    if lambda_max * dt >= 0.5 {
        return Err(MgtError::StepTooLarge { dt, lambda_max });
    }
    let (tau, delta, m) = (params.tau(), params.delta(), params.m());
    let r2 = r * r;
    let rhs = |y: &[Complex64; 4]| -> [Complex64; 4] {
        [
            y[1],
            y[2],
            (-y[2] - y[0] * r2 - y[1] * (delta + tau) * r2 + y[3] * r2) / tau,
            -y[3] / tau + y[0] * m,
        ]
    };
    let mut y = [d0, d1, d2, Complex64::new(0.0, 0.0)];
    let steps = (t / dt).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    for _ in 0..steps {
        let k1 = rhs(&y);
        let y2 = add_scaled(&y, &k1, h / 2.0);
        let k2 = rhs(&y2);
        let y3 = add_scaled(&y, &k2, h / 2.0);
        let k3 = rhs(&y3);
        let y4 = add_scaled(&y, &k3, h);
        let k4 = rhs(&y4);
        for i in 0..4 {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    Ok(ModeState {
        t,
        r,
        u: y[0],
        ut: y[1],
        utt: y[2],
        w: y[3],
    })
}

fn add_scaled(y: &[Complex64; 4], k: &[Complex64; 4], h: f64) -> [Complex64; 4] {
    [
        y[0] + k[0] * h,
        y[1] + k[1] * h,
        y[2] + k[2] * h,
        y[3] + k[3] * h,
    ]
}

/// Fundamental-solution symbol: the k-th time derivative of the slot-j
/// kernel K_hat_j(t, r) (unit datum in slot j, others zero).
pub fn kernel_hat(
    params: &PhysParams,
    r: f64,
    t: f64,
    slot: usize,
    derivative: usize,
) -> Result<Complex64> {
    assert!(slot < 3 && derivative < 3);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let d = [
        if slot == 0 { one } else { zero },
        if slot == 1 { one } else { zero },
        if slot == 2 { one } else { zero },
    ];
    let sol = ModeSolution::new(params, r, d[0], d[1], d[2])?;
    Ok(sol.u_derivative(t, derivative))
}

/// Calibrated envelope constants (C, c) per frequency zone.
#[derive(Debug, Clone, Copy)]
pub struct ZoneConstants {
    pub interior: (f64, f64),
    pub bounded: (f64, f64),
    pub exterior: (f64, f64),
}

/// Decay rates of the per-zone envelopes, shrunk by a 10% margin.
///
/// The interior rate is inherited from the oscillatory-pair real part;
/// the bounded and exterior rates are fitted from the sampled spectral
/// decay (the large-frequency expansion rates are only valid for
/// r >> sqrt(m)/tau, which the fixed zone threshold N does not
/// guarantee across the parameter sweep).
pub fn envelope_rates(params: &PhysParams, zones: &FrequencyZones) -> Result<(f64, f64, f64)> {
    let (tau, delta, m) = (params.tau(), params.delta(), params.m());
    let c_int = 0.45 * (delta + 2.0 * m * tau * tau);
    let log_grid = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect()
    };
    let c_bdd = 0.9
        * (-crate::quartic::spectral_abscissa(params, &log_grid(zones.eps(), zones.cap_n(), 60))?
            .value);
    // slowest modal decay over the exterior zone, scaled to the shape:
    // e^{-c t} for delta > 0, e^{-c t / r^2} for delta = 0
    let mut c_ext = f64::INFINITY;
    for &r in &log_grid(zones.cap_n(), zones.cap_n() * 60.0, 80) {
        let rate = -solve_roots(&quartic_at(params, r))?.max_re();
        c_ext = c_ext.min(if delta > 0.0 { rate } else { rate * r * r });
    }
    if delta == 0.0 {
        // beyond the sampled range the scaled rate r^2 rho(r) approaches
        // m/tau^2 from whichever side; cap by the limit to stay valid
        c_ext = c_ext.min(m / (tau * tau));
    }
    Ok((c_int, c_bdd, 0.9 * c_ext))
}

/// Per-slot envelope shapes of the pointwise kernel estimate, without
/// the multiplicative constant.
pub fn bound_shape(params: &PhysParams, zone: Zone, c: f64, r: f64, t: f64, slot: usize) -> f64 {
    let beta = (1.0 - params.m_tau()).sqrt();
    match zone {
        Zone::Interior => {
            let e = (-c * r * r * t).exp();
            if slot == 0 {
                e
            } else {
                (beta * r * t).sin().abs() / r * e
            }
        }
        Zone::Bounded => (-c * t).exp(),
        Zone::Exterior => {
            let e = if params.delta() > 0.0 {
                (-c * t).exp()
            } else {
                (-c * t / (r * r)).exp()
            };
            let power = if slot == 2 { r * r } else { r };
            e / power
        }
    }
}

/// Per-zone logarithmic radial grids used for envelope calibration:
/// [interior, bounded, exterior].
pub fn calibration_grids(zones: &FrequencyZones, r_points: usize) -> [Vec<f64>; 3] {
    let zone_grid = |lo: f64, hi: f64| -> Vec<f64> {
        (0..r_points)
            .map(|i| lo * (hi / lo).powf(i as f64 / (r_points - 1) as f64))
            .collect()
    };
    [
        zone_grid(zones.eps() * 1e-3, zones.eps() * 0.999),
        zone_grid(zones.eps(), zones.cap_n()),
        zone_grid(zones.cap_n() * 1.001, zones.cap_n() * 50.0),
    ]
}

/// Logarithmic calibration time grid.
pub fn calibration_times(t_points: usize, t_range: (f64, f64)) -> Vec<f64> {
    (0..t_points)
        .map(|i| t_range.0 * (t_range.1 / t_range.0).powf(i as f64 / (t_points - 1) as f64))
        .collect()
}

/// Fit the single constant C per zone as the max ratio |K_hat_j| / shape
/// over an (r, t) product grid, using the rates from `envelope_rates`.
pub fn calibrate_bounds(
    params: &PhysParams,
    zones: &FrequencyZones,
    r_points: usize,
    t_points: usize,
    t_range: (f64, f64),
) -> Result<ZoneConstants> {
    let (c_int, c_bdd, c_ext) = envelope_rates(params, zones)?;
    let t_grid = calibration_times(t_points, t_range);
    let [interior, bounded, exterior] = calibration_grids(zones, r_points);

    let fit = |rs: &[f64], zone: Zone, c: f64| -> Result<f64> {
        let mut cmax: f64 = 1.0;
        for &r in rs {
            let mut sols = Vec::with_capacity(3);
            for slot in 0..3 {
                let one = Complex64::new(1.0, 0.0);
                let zero = Complex64::new(0.0, 0.0);
                let d: [Complex64; 3] = std::array::from_fn(|k| if k == slot { one } else { zero });
                sols.push(ModeSolution::new(params, r, d[0], d[1], d[2])?);
            }
            for &t in &t_grid {
                for (slot, sol) in sols.iter().enumerate() {
                    let shape = bound_shape(params, zone, c, r, t, slot);
                    if shape > 0.0 {
                        cmax = cmax.max(sol.state_at(t).u.norm() / shape);
                    }
                }
            }
        }
        Ok(cmax)
    };

    Ok(ZoneConstants {
        interior: (fit(&interior, Zone::Interior, c_int)?, c_int),
        bounded: (fit(&bounded, Zone::Bounded, c_bdd)?, c_bdd),
        exterior: (fit(&exterior, Zone::Exterior, c_ext)?, c_ext),
    })
}

/// Right side of the pointwise estimate in the zone containing r, for
/// absolute data (|phi0|, |phi1|, |phi2|).
pub fn pointwise_bound(
    params: &PhysParams,
    zones: &FrequencyZones,
    consts: &ZoneConstants,
    r: f64,
    t: f64,
    data_abs: [f64; 3],
) -> f64 {
    let zone = zones.classify(r);
    let (big_c, c) = match zone {
        Zone::Interior => consts.interior,
        Zone::Bounded => consts.bounded,
        Zone::Exterior => consts.exterior,
    };
    let mut acc = 0.0;
    for (slot, amp) in data_abs.iter().enumerate() {
        acc += amp * bound_shape(params, zone, c, r, t, slot);
    }
    big_c * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector4;

    fn params(tau: f64, delta: f64, m: f64) -> PhysParams {
        PhysParams::new(tau, delta, m, false).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn third_datum_hand_values() {
        let p = params(1.0, 1.0, 0.5);
        assert_eq!(third_datum(&p, 3.0, c(0.0), c(0.0), c(1.0)), c(-1.0));
        assert_eq!(third_datum(&p, 1.0, c(1.0), c(0.0), c(0.0)), c(-1.0));
        let p = params(0.5, 0.0, 1.0);
        assert_eq!(third_datum(&p, 2.0, c(0.0), c(1.0), c(0.0)), c(-4.0));
    }

    #[test]
    fn vandermonde_det_product_formula() {
        let roots = [c(1.0), c(2.0), c(3.0), c(4.0)];
        assert!((vandermonde_det(&roots) - c(12.0)).norm() < 1e-14);
    }

    #[test]
    fn cramer_reconstruction_identities() {
        let roots = [c(1.0), c(2.0), c(3.0), c(4.0)];
        let mc = cramer_coeffs(&roots, &[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        let s0: Complex64 = mc.c.iter().sum();
        let s1: Complex64 = mc.c.iter().zip(roots).map(|(cj, l)| cj * l).sum();
        assert!((s0 - c(1.0)).norm() < 1e-12);
        assert!(s1.norm() < 1e-12);
    }

    #[test]
    fn cramer_matches_lu_solve() {
        let p = params(1.0, 1.0, 0.5);
        let roots = solve_roots(&quartic_at(&p, 1.0)).unwrap();
        let data = [
            c(1.0),
            c(0.0),
            c(0.0),
            third_datum(&p, 1.0, c(1.0), c(0.0), c(0.0)),
        ];
        let mc = cramer_coeffs(&roots.roots, &data).unwrap();

        let a = Matrix4::from_fn(|i, j| roots.roots[j].powu(i as u32));
        let b = Vector4::from_row_slice(&data);
        let x = a.lu().solve(&b).unwrap();
        for j in 0..4 {
            assert!((mc.c[j] - x[j]).norm() < 1e-10, "coefficient {j}");
        }
        assert!(mc.cond.is_finite());
    }

    #[test]
    fn cramer_rejects_degenerate_roots() {
        let roots = [c(1.0), c(1.0 + 1e-12), c(3.0), c(4.0)];
        assert!(matches!(
            cramer_coeffs(&roots, &[c(1.0); 4]),
            Err(MgtError::DegenerateRoots { .. })
        ));
    }

    #[test]
    fn initial_conditions_exact() {
        let p = params(0.7, 0.2, 0.9);
        let s = evolve_mode(&p, 2.5, c(0.3), c(-0.4), c(0.8), 0.0).unwrap();
        assert!((s.u - c(0.3)).norm() < 1e-12);
        assert!((s.ut - c(-0.4)).norm() < 1e-12);
        assert!((s.utt - c(0.8)).norm() < 1e-12);
        assert!(s.w.norm() < 1e-12);
    }

    #[test]
    fn oracle_matches_synthesis() {
        let p = params(0.5, 0.0, 1.0);
        let (r, t) = (5.0, 2.0);
        let d = (c(0.3), c(-0.2), c(0.15));
        let lmax = max_root_norm(&p, r).unwrap();
        let dt = (0.4 / lmax).min(2e-4);
        let exact = evolve_mode(&p, r, d.0, d.1, d.2, t).unwrap();
        let approx = mode_oracle(&p, r, d.0, d.1, d.2, t, dt).unwrap();
        let scale = exact.max_component().max(1.0);
        for (a, b) in exact.as_vector().iter().zip(approx.as_vector()) {
            assert!((a - b).norm() / scale < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn oracle_rejects_large_steps() {
        let p = params(0.5, 0.0, 1.0);
        assert!(matches!(
            mode_oracle(&p, 50.0, c(1.0), c(0.0), c(0.0), 1.0, 0.1),
            Err(MgtError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn oracle_is_fourth_order() {
        let p = params(1.0, 1.0, 0.5);
        let (r, t) = (1.0, 1.0);
        let exact = evolve_mode(&p, r, c(1.0), c(0.0), c(0.0), t).unwrap();
        let err = |dt: f64| {
            let s = mode_oracle(&p, r, c(1.0), c(0.0), c(0.0), t, dt).unwrap();
            (s.u - exact.u).norm()
        };
        let e1 = err(0.02);
        let e2 = err(0.01);
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.3, "observed order {order}");
    }

    #[test]
    fn zero_mode_conserves_first_datum() {
        let p = params(1.0, 1.0, 0.5);
        // r = 0 goes through the matrix-exponential fallback
        let sol = ModeSolution::new(&p, 0.0, c(1.0), c(0.0), c(0.0)).unwrap();
        assert!(sol.is_degenerate());
        for t in [0.5, 2.0, 10.0] {
            assert!((sol.state_at(t).u - c(1.0)).norm() < 1e-12);
        }
        // cross-check against the oracle at r = 1e-6
        let s = evolve_mode(&p, 1e-6, c(1.0), c(0.0), c(0.0), 4.0).unwrap();
        let o = mode_oracle(&p, 1e-6, c(1.0), c(0.0), c(0.0), 4.0, 1e-3).unwrap();
        assert!((s.u - c(1.0)).norm() < 1e-6);
        assert!((s.u - o.u).norm() < 1e-8);
        assert!((s.w - o.w).norm() < 1e-8);
    }

    #[test]
    fn eigenvalues_of_system_match_quartic_roots() {
        let p = params(0.5, 0.1, 1.8);
        for &r in &[1e-3, 0.3, 2.0, 40.0] {
            let a = system_matrix(&p, r);
            let eig = a.complex_eigenvalues();
            let roots = solve_roots(&quartic_at(&p, r)).unwrap().roots;
            for i in 0..4 {
                let e = Complex64::new(eig[i].re, eig[i].im);
                let d = roots
                    .iter()
                    .map(|z| (z - e).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(d < 1e-8 * (1.0 + e.norm()), "eigenvalue {e} off by {d}");
            }
        }
    }

    #[test]
    fn expm_semigroup_and_identity() {
        let p = params(1.0, 0.3, 0.7);
        let a = system_matrix(&p, 3.0);
        let e0 = expm4(&(a * 0.0));
        assert!((e0 - Matrix4::identity()).abs().max() < 1e-14);
        let e1 = expm4(&(a * 0.7));
        let e2 = expm4(&(a * 0.35));
        assert!((e2 * e2 - e1).abs().max() < 1e-11);
    }

    #[test]
    fn semigroup_restart_matches_direct_evolution() {
        let p = params(1.0, 1.0, 0.5);
        let sol = ModeSolution::new(&p, 2.0, c(0.4), c(0.1), c(-0.3)).unwrap();
        let (t1, t2) = (1.3, 0.9);
        let mid = sol.state_at(t1);
        let restarted = propagate_state(&p, &mid, t2);
        let direct = sol.state_at(t1 + t2);
        let scale = direct.max_component().max(1.0);
        for (a, b) in restarted.as_vector().iter().zip(direct.as_vector()) {
            assert!((a - b).norm() / scale < 1e-8);
        }
    }

    #[test]
    fn kernel_initial_values() {
        let p = params(0.8, 0.4, 1.1);
        for slot in 0..3 {
            for k in 0..3 {
                let v = kernel_hat(&p, 1.7, 0.0, slot, k).unwrap();
                let expect = if slot == k { 1.0 } else { 0.0 };
                assert!((v - c(expect)).norm() < 1e-12, "slot {slot} derivative {k}");
            }
        }
    }

    #[test]
    fn calibrated_bound_dominates_on_offset_grid() {
        let p = params(1.0, 0.0, 0.5);
        let zones = FrequencyZones::default();
        let consts = calibrate_bounds(&p, &zones, 40, 40, (0.05, 80.0)).unwrap();
        assert!(consts.interior.0 < 1e4);
        assert!(consts.bounded.0 < 1e4);
        assert!(consts.exterior.0 < 1e4);

        // offset verification grid, unit data
        for i in 0..33 {
            let r = 6e-5 * (3e5_f64).powf(i as f64 / 32.0);
            let sol = ModeSolution::new(&p, r, c(1.0), c(1.0), c(1.0)).unwrap();
            for j in 0..33 {
                let t = 0.07 * (1e3_f64).powf(j as f64 / 32.0);
                let bound = pointwise_bound(&p, &zones, &consts, r, t, [1.0, 1.0, 1.0]);
                let v = sol.state_at(t).u.norm();
                assert!(
                    v <= 2.0 * bound + 1e-12,
                    "bound violated at r={r}, t={t}: |u|={v}, bound={bound}"
                );
            }
        }
    }

    #[test]
    fn memory_square_closed_form_matches_quadrature() {
        let p = params(1.0, 1.0, 0.5);
        let sol = ModeSolution::new(&p, 0.7, c(0.3), c(-0.2), c(0.1)).unwrap();
        let t = 1.3;
        let v = sol.memory_square_at(t);
        let g = p.kernel();
        let n = 20_000;
        let h = t / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let eta = i as f64 * h;
            let val = g.eval(t - eta) * sol.state_at(eta).u.norm_sqr();
            acc += val * if i == 0 || i == n { 0.5 } else { 1.0 };
        }
        acc *= h;
        assert!((v - acc).abs() < 1e-7 * acc.max(1e-12), "{v} vs {acc}");
    }
}
