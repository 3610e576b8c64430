//! Pseudospectral solver for the viscous JMGT equation on a periodic box.
//!
//! Two independent integrators share the exact per-mode linear
//! propagator: a Picard iteration on the Duhamel fixed point
//! psi -> psi_lin + K2 * F[psi], and an exponential time differencing
//! stepper with trapezoidal source treatment. The nonlinear source is
//! formed in physical space and dealiased by the 2/3-rule mask.

use nalgebra::{DMatrix, Matrix4, Vector4};
use num_complex::Complex64;
use std::collections::HashMap;

use crate::error::{MgtError, Result};
use crate::fit::{fit_decay, DecayFit, FitModel};
use crate::mode::{expm_dyn, system_matrix};
use crate::norms::pn_reference;
use crate::params::PhysParams;
use crate::torus::{hs_norm, l2_norm, FieldState, SpectralOps, TorusGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearKind {
    Kuznetsov,
    Westervelt,
}

#[derive(Debug, Clone, Copy)]
pub struct NonlinearConfig {
    pub kind: NonlinearKind,
    pub k_ab: f64,
}

impl NonlinearConfig {
    pub fn new(kind: NonlinearKind, k_ab: f64) -> Result<Self> {
        if !(k_ab > 0.0) {
            return Err(MgtError::NonPositiveParameter {
                name: "k_ab",
                value: k_ab,
            });
        }
        Ok(Self { kind, k_ab })
    }
}

/// Exact one-step operators per distinct lattice |m|^2: the homogeneous
/// propagator E = e^{A dt} and the two Duhamel source integrals
/// w0 = int_0^dt e^{A(dt-s)} e3 ds, w1 = int_0^dt e^{A(dt-s)} e3 s ds.
struct StepOp {
    e: Matrix4<f64>,
    w0: Vector4<f64>,
    w1: Vector4<f64>,
}

fn step_table(params: &PhysParams, grid: &TorusGrid, dt: f64, m2s: &[u64]) -> HashMap<u64, StepOp> {
    let dk = grid.dk();
    let mut distinct: Vec<u64> = m2s.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let mut table = HashMap::with_capacity(distinct.len());
    for &m2 in &distinct {
        let r = dk * (m2 as f64).sqrt();
        let a = system_matrix(params, r);
        // block (Van Loan) matrix for the homogeneous step and the
        // constant/linear source integrals in one exponential
        let mut big = DMatrix::<f64>::zeros(6, 6);
        for i in 0..4 {
            for j in 0..4 {
                big[(i, j)] = a[(i, j)];
            }
        }
        big[(2, 4)] = 1.0; // source enters the u_tt equation
        big[(4, 5)] = 1.0;
        let e_big = expm_dyn(&(big * dt));
        let e = Matrix4::from_fn(|i, j| e_big[(i, j)]);
        let w0 = Vector4::from_fn(|i, _| e_big[(i, 4)]);
        let w1 = Vector4::from_fn(|i, _| e_big[(i, 5)]);
        table.insert(m2, StepOp { e, w0, w1 });
    }
    table
}

/// Time history of the spectral state at stored sample instants.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TorusGrid,
    pub times: Vec<f64>,
    pub states: Vec<FieldState>,
}

#[derive(Debug, Clone, Copy)]
pub struct PicardReport {
    pub iterations: usize,
    pub contraction: f64,
    pub final_diff: f64,
}

pub struct JmgtSolver {
    params: PhysParams,
    grid: TorusGrid,
    ops: SpectralOps,
    kmag: Vec<f64>,
    m2: Vec<u64>,
}

impl JmgtSolver {
    pub fn new(params: &PhysParams, grid: TorusGrid) -> Self {
        let ops = SpectralOps::new(grid);
        let (kmag, m2) = grid.wavenumbers();
        Self {
            params: *params,
            grid,
            ops,
            kmag,
            m2,
        }
    }

    pub fn ops(&self) -> &SpectralOps {
        &self.ops
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn kmag(&self) -> &[f64] {
        &self.kmag
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Spectral source F_hat of the chosen nonlinearity, products formed
    /// in physical space and the result dealiased.
    pub fn nonlinearity(&self, state: &FieldState, config: &NonlinearConfig) -> Vec<Complex64> {
        let pt = self.ops.to_physical(&state.psi_t);
        let ptt = self.ops.to_physical(&state.psi_tt);
        let total = self.grid.total_modes();
        let mut phys = vec![Complex64::new(0.0, 0.0); total];
        match config.kind {
            NonlinearKind::Westervelt => {
                let c = 2.0 * (1.0 + config.k_ab);
                for i in 0..total {
                    phys[i] = Complex64::new(c * pt[i].re * ptt[i].re, 0.0);
                }
            }
            NonlinearKind::Kuznetsov => {
                let c = 2.0 * config.k_ab;
                for i in 0..total {
                    phys[i] = Complex64::new(c * pt[i].re * ptt[i].re, 0.0);
                }
                // + 2 grad psi . grad psi_t
                for axis in 0..self.grid.dim {
                    let ks = self.grid.axis_wavenumbers(axis);
                    let dpsi: Vec<Complex64> = state
                        .psi
                        .iter()
                        .zip(&ks)
                        .map(|(v, &k)| v * Complex64::new(0.0, k))
                        .collect();
                    let dpsit: Vec<Complex64> = state
                        .psi_t
                        .iter()
                        .zip(&ks)
                        .map(|(v, &k)| v * Complex64::new(0.0, k))
                        .collect();
                    let gp = self.ops.to_physical(&dpsi);
                    let gpt = self.ops.to_physical(&dpsit);
                    for i in 0..total {
                        phys[i].re += 2.0 * gp[i].re * gpt[i].re;
                    }
                }
            }
        }
        let mut spec = self.ops.to_spectral(&phys);
        self.ops.dealias(&mut spec);
        spec
    }

    fn apply_homogeneous(
        &self,
        table: &HashMap<u64, StepOp>,
        state: &FieldState,
        dt: f64,
    ) -> FieldState {
        let total = self.grid.total_modes();
        let mut out = state.clone();
        out.t = state.t + dt;
        for i in 0..total {
            let op = &table[&self.m2[i]];
            let y = [state.psi[i], state.psi_t[i], state.psi_tt[i], state.w[i]];
            let mut z = [Complex64::new(0.0, 0.0); 4];
            for (row, zr) in z.iter_mut().enumerate() {
                for (col, yv) in y.iter().enumerate() {
                    *zr += yv * op.e[(row, col)];
                }
            }
            out.psi[i] = z[0];
            out.psi_t[i] = z[1];
            out.psi_tt[i] = z[2];
            out.w[i] = z[3];
        }
        out
    }

    /// Exact homogeneous advance of every lattice mode by dt.
    pub fn linear_propagator_step(&self, state: &FieldState, dt: f64) -> FieldState {
        let table = step_table(&self.params, &self.grid, dt, &self.m2);
        self.apply_homogeneous(&table, state, dt)
    }

    /// ETD stepper: exact linear propagator plus trapezoidal treatment of
    /// the Duhamel source over each step (predictor-corrector, order 2).
    /// With `config = None` the evolution is exactly linear.
    pub fn etd_solve(
        &self,
        data: &FieldState,
        config: Option<&NonlinearConfig>,
        dt: f64,
        t_end: f64,
        sample_times: &[f64],
    ) -> Result<Trajectory> {
        let tau = self.params.tau();
        let steps = (t_end / dt).round().max(1.0) as usize;
        let h = t_end / steps as f64;
        let table = step_table(&self.params, &self.grid, h, &self.m2);
        let mut state = data.clone();
        self.dealias_state(&mut state);
        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut next_sample = 0usize;
        let mut record = |t: f64, s: &FieldState, next_sample: &mut usize| {
            while *next_sample < sample_times.len() && sample_times[*next_sample] <= t + h * 0.5 {
                times.push(s.t);
                states.push(s.clone());
                *next_sample += 1;
            }
        };
        record(0.0, &state, &mut next_sample);
        for _ in 0..steps {
            state = match config {
                None => self.apply_homogeneous(&table, &state, h),
                Some(cfg) => {
                    let f0 = self.nonlinearity(&state, cfg);
                    // predictor: constant source over the step
                    let mut pred = self.apply_homogeneous(&table, &state, h);
                    let total = self.grid.total_modes();
                    for i in 0..total {
                        let op = &table[&self.m2[i]];
                        let s0 = f0[i] / tau;
                        pred.psi[i] += s0 * op.w0[0];
                        pred.psi_t[i] += s0 * op.w0[1];
                        pred.psi_tt[i] += s0 * op.w0[2];
                        pred.w[i] += s0 * op.w0[3];
                    }
                    let f1 = self.nonlinearity(&pred, cfg);
                    // corrector: linear-in-s source
                    let mut next = pred;
                    for i in 0..total {
                        let op = &table[&self.m2[i]];
                        let ds = (f1[i] - f0[i]) / (tau * h);
                        next.psi[i] += ds * op.w1[0];
                        next.psi_t[i] += ds * op.w1[1];
                        next.psi_tt[i] += ds * op.w1[2];
                        next.w[i] += ds * op.w1[3];
                    }
                    next
                }
            };
            record(state.t, &state, &mut next_sample);
        }
        Ok(Trajectory {
            grid: self.grid,
            times,
            states,
        })
    }

    fn dealias_state(&self, state: &mut FieldState) {
        self.ops.dealias(&mut state.psi);
        self.ops.dealias(&mut state.psi_t);
        self.ops.dealias(&mut state.psi_tt);
        self.ops.dealias(&mut state.w);
    }

    /// Picard-Duhamel fixed point on a uniform sample grid:
    /// psi^{(m+1)}(t_i) = psi_lin(t_i) plus the mode-wise integral
    /// int_0^{t_i} K2(t_i - s) F[psi^{(m)}](s) ds,
    /// the integral by composite Simpson on the stored samples.
    pub fn picard_solve(
        &self,
        data: &FieldState,
        config: &NonlinearConfig,
        t_end: f64,
        intervals: usize,
        tol: f64,
        max_iter: usize,
    ) -> Result<(Trajectory, PicardReport)> {
        let tau = self.params.tau();
        let total = self.grid.total_modes();
        let h = t_end / intervals as f64;
        let table = step_table(&self.params, &self.grid, h, &self.m2);

        // kernel rows K2, K2', K2'' per distinct m^2 and lag
        let mut kernel: HashMap<u64, Vec<[f64; 3]>> = HashMap::new();
        for (&m2v, op) in &table {
            let mut rows = Vec::with_capacity(intervals + 1);
            let mut v = Vector4::new(0.0, 0.0, 1.0, 0.0); // unit third datum, W = 0
            rows.push([0.0, 0.0, 1.0]);
            for _ in 0..intervals {
                v = op.e * v;
                rows.push([v[0], v[1], v[2]]);
            }
            kernel.insert(m2v, rows);
        }

        // exact linear trajectory on the sample grid
        let mut lin = Vec::with_capacity(intervals + 1);
        let mut state = data.clone();
        self.dealias_state(&mut state);
        lin.push(state.clone());
        for _ in 0..intervals {
            state = self.apply_homogeneous(&table, &state, h);
            lin.push(state.clone());
        }

        let mut current: Vec<FieldState> = lin.clone();
        let mut prev_diff = f64::NAN;
        let mut contraction = f64::NAN;
        let mut converged = false;
        let mut iterations = 0usize;
        let mut final_diff = f64::NAN;
        let scale: f64 = lin
            .iter()
            .map(|s| l2_norm(&self.grid, &s.psi_t))
            .fold(0.0, f64::max)
            .max(1e-300);
        for it in 0..max_iter {
            iterations = it + 1;
            let sources: Vec<Vec<Complex64>> = current
                .iter()
                .map(|s| self.nonlinearity(s, config))
                .collect();
            let mut next = lin.clone();
            for i in 1..=intervals {
                let weights = quad_weights(i, h);
                for (j, &wq) in weights.iter().enumerate() {
                    if wq == 0.0 {
                        continue;
                    }
                    let lag = i - j;
                    for mode in 0..total {
                        let rows = &kernel[&self.m2[mode]];
                        let k = rows[lag];
                        let f = sources[j][mode] * (wq / tau);
                        next[i].psi[mode] += f * k[0];
                        next[i].psi_t[mode] += f * k[1];
                        next[i].psi_tt[mode] += f * k[2];
                    }
                }
            }
            // sup over samples of the L2 distance in psi_t, relative
            let mut diff: f64 = 0.0;
            for (a, b) in next.iter().zip(&current) {
                let d: f64 = a
                    .psi_t
                    .iter()
                    .zip(&b.psi_t)
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
                    * self.grid.length.powi(self.grid.dim as i32).sqrt();
                diff = diff.max(d);
            }
            let rel = diff / scale;
            if prev_diff.is_finite() && prev_diff > 0.0 {
                contraction = rel / prev_diff;
            }
            prev_diff = rel;
            current = next;
            final_diff = rel;
            if rel < tol {
                converged = true;
                break;
            }
        }
        if !converged && !(contraction < 1.0) {
            return Err(MgtError::NoContraction {
                factor: contraction,
                iters: iterations,
            });
        }
        // post-hoc quadrature check: the endpoint Duhamel integral on
        // every second sample must agree with the fine one
        if intervals.is_multiple_of(2) && intervals >= 8 {
            let sources: Vec<Vec<Complex64>> = current
                .iter()
                .map(|s| self.nonlinearity(s, config))
                .collect();
            let fine = self.duhamel_endpoint(&kernel, &sources, intervals, 1, h);
            let coarse = self.duhamel_endpoint(&kernel, &sources, intervals, 2, h);
            let gap: f64 = fine
                .iter()
                .zip(&coarse)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / (tau * scale);
            if gap > 1e-4 {
                return Err(MgtError::QuadratureUnderResolved { change: gap });
            }
        }
        let times: Vec<f64> = (0..=intervals).map(|i| i as f64 * h).collect();
        for (s, &t) in current.iter_mut().zip(&times) {
            s.t = t;
        }
        Ok((
            Trajectory {
                grid: self.grid,
                times,
                states: current,
            },
            PicardReport {
                iterations,
                contraction,
                final_diff,
            },
        ))
    }

    /// Endpoint of int_0^{T} dK2/dt (T - s) F(s) ds on the sample grid
    /// thinned by `stride` (quadrature-resolution comparisons).
    fn duhamel_endpoint(
        &self,
        kernel: &HashMap<u64, Vec<[f64; 3]>>,
        sources: &[Vec<Complex64>],
        intervals: usize,
        stride: usize,
        h: f64,
    ) -> Vec<Complex64> {
        let total = self.grid.total_modes();
        let steps = intervals / stride;
        let weights = quad_weights(steps, h * stride as f64);
        let mut out = vec![Complex64::new(0.0, 0.0); total];
        for (jj, &wq) in weights.iter().enumerate() {
            let j = jj * stride;
            let lag = intervals - j;
            for mode in 0..total {
                let rows = &kernel[&self.m2[mode]];
                out[mode] += sources[j][mode] * wq * rows[lag][1];
            }
        }
        out
    }

    /// ETD run whose step size is validated by halving: errs when the
    /// endpoint moves by more than `tol` relative.
    pub fn etd_solve_checked(
        &self,
        data: &FieldState,
        config: Option<&NonlinearConfig>,
        dt: f64,
        t_end: f64,
        sample_times: &[f64],
        tol: f64,
    ) -> Result<Trajectory> {
        let coarse = self.etd_solve(data, config, dt, t_end, &[t_end])?;
        let fine = self.etd_solve(data, config, dt / 2.0, t_end, &[t_end])?;
        let a = &coarse.states.last().unwrap().psi_t;
        let b = &fine.states.last().unwrap().psi_t;
        let scale: f64 = b
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
            .max(1e-300);
        let change = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / scale;
        if change > tol {
            return Err(MgtError::StepRefinementFailed { change });
        }
        self.etd_solve(data, config, dt, t_end, sample_times)
    }
}

/// Composite quadrature weights over i uniform intervals: Simpson where
/// the count is even, Simpson + 3/8 closure when odd.
fn quad_weights(i: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; i + 1];
    match i {
        0 => {}
        1 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        _ if i.is_multiple_of(2) => {
            simpson_into(&mut w, 0, i, h);
        }
        3 => {
            three_eighths_into(&mut w, 0, h);
        }
        _ => {
            simpson_into(&mut w, 0, i - 3, h);
            three_eighths_into(&mut w, i - 3, h);
        }
    }
    w
}

fn simpson_into(w: &mut [f64], from: usize, to: usize, h: f64) {
    w[from] += h / 3.0;
    w[to] += h / 3.0;
    for j in (from + 1)..to {
        w[j] += if (j - from).is_multiple_of(2) {
            2.0 * h / 3.0
        } else {
            4.0 * h / 3.0
        };
    }
}

fn three_eighths_into(w: &mut [f64], from: usize, h: f64) {
    let c = 3.0 * h / 8.0;
    w[from] += c;
    w[from + 1] += 3.0 * c;
    w[from + 2] += 3.0 * c;
    w[from + 3] += c;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormFlavor {
    Xs,
    Ys,
}

/// Weighted evolution-space norm of a stored trajectory.
pub fn evolution_norm(traj: &Trajectory, kmag: &[f64], flavor: NormFlavor, s: f64) -> Result<f64> {
    if traj.states.is_empty() {
        return Err(MgtError::MissingDerivatives);
    }
    let n = traj.grid.dim as f64;
    let mut sup: f64 = 0.0;
    for (state, &t) in traj.states.iter().zip(&traj.times) {
        let mut val = 0.0;
        let arrays = [&state.psi, &state.psi_t, &state.psi_tt];
        if flavor == NormFlavor::Xs {
            val += l2_norm(&traj.grid, &state.psi) / pn_reference(n, t)?;
        }
        for l in 1..=2usize {
            val += (1.0 + t).powf(-0.5 + l as f64 / 2.0 + n / 4.0) * l2_norm(&traj.grid, arrays[l]);
        }
        let l_range = if flavor == NormFlavor::Xs {
            0..=2
        } else {
            1..=2
        };
        for l in l_range {
            val += (1.0 + t).powf(0.5 + s / 2.0 + n / 4.0)
                * hs_norm(&traj.grid, kmag, arrays[l], s + 2.0 - l as f64);
        }
        sup = sup.max(val);
    }
    Ok(sup)
}

/// Fitted decay exponents of the trajectory norms inside a time window.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub entries: Vec<(String, DecayFit)>,
}

pub fn nonlinear_decay_report(
    traj: &Trajectory,
    kmag: &[f64],
    s: f64,
    window: (f64, f64),
) -> Result<DecayReport> {
    let idx: Vec<usize> = traj
        .times
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= window.0 && t <= window.1)
        .map(|(i, _)| i)
        .collect();
    if idx.len() < 8 {
        return Err(MgtError::WindowTooShort {
            got: idx.len(),
            need: 8,
        });
    }
    let ts: Vec<f64> = idx.iter().map(|&i| traj.times[i]).collect();
    let mut entries = Vec::new();
    let mut push = |name: &str, values: Vec<f64>| -> Result<()> {
        entries.push((name.to_string(), fit_decay(&ts, &values, FitModel::Power)?));
        Ok(())
    };
    push(
        "psi_t_L2",
        idx.iter()
            .map(|&i| l2_norm(&traj.grid, &traj.states[i].psi_t))
            .collect(),
    )?;
    push(
        "psi_tt_L2",
        idx.iter()
            .map(|&i| l2_norm(&traj.grid, &traj.states[i].psi_tt))
            .collect(),
    )?;
    for l in 0..=2usize {
        let arrays: Vec<f64> = idx
            .iter()
            .map(|&i| {
                let st = &traj.states[i];
                let arr = match l {
                    0 => &st.psi,
                    1 => &st.psi_t,
                    _ => &st.psi_tt,
                };
                hs_norm(&traj.grid, kmag, arr, s + 2.0 - l as f64)
            })
            .collect();
        push(&format!("dt{l}_psi_Hs{}", s + 2.0 - l as f64), arrays)?;
    }
    Ok(DecayReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::evolve_mode;
    use crate::torus::gaussian_bump;

    fn params() -> PhysParams {
        PhysParams::new(1.0, 1.0, 0.5, false).unwrap()
    }

    fn small_solver(dim: usize, points: usize, length: f64) -> JmgtSolver {
        let grid = TorusGrid::new(dim, points, length, 2.0 / 3.0).unwrap();
        JmgtSolver::new(&params(), grid)
    }

    fn gaussian_state(solver: &JmgtSolver, amp: f64, width: f64) -> FieldState {
        let bump = gaussian_bump(solver.grid(), solver.ops(), amp, width);
        FieldState::from_data(bump.clone(), bump.clone(), bump)
    }

    #[test]
    fn quad_weights_integrate_smooth_functions() {
        // int_0^1 e^x dx with 7 (odd) and 8 (even) intervals
        for n in [7usize, 8, 3, 2, 1] {
            let h = 1.0 / n as f64;
            let w = quad_weights(n, h);
            let q: f64 = w
                .iter()
                .enumerate()
                .map(|(j, &wq)| wq * (j as f64 * h).exp())
                .sum();
            let exact = std::f64::consts::E - 1.0;
            // single-interval trapezoid is crude; everything else is sharp
            let tol = match n {
                1 => 0.15,
                2 => 5e-3,
                _ => 1e-3,
            };
            assert!((q - exact).abs() < tol, "n = {n}: {q} vs {exact}");
        }
    }

    #[test]
    fn westervelt_source_single_mode_trigonometry() {
        // psi_t = psi_tt = cos(x) on [0, 2pi): F = 3 cos^2 = 1.5 + 1.5 cos(2x)
        let grid = TorusGrid::new(1, 32, 2.0 * std::f64::consts::PI, 2.0 / 3.0).unwrap();
        let solver = JmgtSolver::new(&params(), grid);
        let phys: Vec<Complex64> = (0..32)
            .map(|j| Complex64::new((j as f64 * grid.dx()).cos(), 0.0))
            .collect();
        let spec = solver.ops().to_spectral(&phys);
        let state = FieldState::from_data(vec![Complex64::new(0.0, 0.0); 32], spec.clone(), spec);
        let cfg = NonlinearConfig::new(NonlinearKind::Westervelt, 0.5).unwrap();
        let f = solver.nonlinearity(&state, &cfg);
        for (i, v) in f.iter().enumerate() {
            let m = grid.freq_index(i);
            let expect = match m {
                0 => 1.5,
                2 | -2 => 0.75,
                _ => 0.0,
            };
            assert!((v.re - expect).abs() < 1e-12, "mode {m}: {v}");
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn kuznetsov_reduces_without_gradients() {
        // spatially constant psi: gradient term vanishes
        let solver = small_solver(1, 16, 10.0);
        let total = 16;
        let mut psi_t = vec![Complex64::new(0.0, 0.0); total];
        psi_t[0] = Complex64::new(0.3, 0.0);
        let mut psi_tt = vec![Complex64::new(0.0, 0.0); total];
        psi_tt[0] = Complex64::new(0.2, 0.0);
        let state = FieldState::from_data(vec![Complex64::new(0.0, 0.0); total], psi_t, psi_tt);
        let cfg = NonlinearConfig::new(NonlinearKind::Kuznetsov, 0.7).unwrap();
        let f = solver.nonlinearity(&state, &cfg);
        assert!((f[0].re - 2.0 * 0.7 * 0.3 * 0.2).abs() < 1e-14);
        for v in &f[1..] {
            assert!(v.norm() < 1e-14);
        }
    }

    #[test]
    fn zero_state_zero_source() {
        let solver = small_solver(2, 16, 5.0);
        let total = solver.grid().total_modes();
        let z = vec![Complex64::new(0.0, 0.0); total];
        let state = FieldState::from_data(z.clone(), z.clone(), z);
        let cfg = NonlinearConfig::new(NonlinearKind::Westervelt, 0.5).unwrap();
        assert!(solver
            .nonlinearity(&state, &cfg)
            .iter()
            .all(|v| v.norm() == 0.0));
    }

    #[test]
    fn propagator_matches_mode_evolution() {
        let solver = small_solver(1, 32, 20.0);
        let state = gaussian_state(&solver, 1.0, 1.5);
        let dt = 0.7;
        let stepped = solver.linear_propagator_step(&state, dt);
        for (i, &k) in solver.kmag().iter().enumerate() {
            let expect = evolve_mode(
                &params(),
                k,
                state.psi[i],
                state.psi_t[i],
                state.psi_tt[i],
                dt,
            )
            .unwrap();
            assert!((stepped.psi[i] - expect.u).norm() < 1e-10, "mode {i}");
            assert!((stepped.psi_t[i] - expect.ut).norm() < 1e-10);
        }
    }

    #[test]
    fn propagator_step_is_exact_semigroup() {
        let solver = small_solver(1, 32, 20.0);
        let state = gaussian_state(&solver, 1.0, 1.5);
        let one = solver.linear_propagator_step(&state, 0.8);
        let half = solver.linear_propagator_step(&solver.linear_propagator_step(&state, 0.4), 0.4);
        for (a, b) in one.psi_t.iter().zip(&half.psi_t) {
            assert!((a - b).norm() < 1e-10);
        }
        // dt = 0: identity
        let id = solver.linear_propagator_step(&state, 0.0);
        for (a, b) in id.psi.iter().zip(&state.psi) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn etd_linear_mode_is_dt_independent() {
        let solver = small_solver(1, 16, 10.0);
        let state = gaussian_state(&solver, 0.5, 1.0);
        let coarse = solver.etd_solve(&state, None, 0.5, 2.0, &[2.0]).unwrap();
        let fine = solver.etd_solve(&state, None, 0.01, 2.0, &[2.0]).unwrap();
        for (a, b) in coarse.states[0].psi_t.iter().zip(&fine.states[0].psi_t) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn etd_observed_order_two() {
        let solver = small_solver(1, 32, 40.0);
        let state = gaussian_state(&solver, 0.05, 1.5);
        let cfg = NonlinearConfig::new(NonlinearKind::Westervelt, 0.5).unwrap();
        let endpoint = |dt: f64| {
            let traj = solver
                .etd_solve(&state, Some(&cfg), dt, 2.0, &[2.0])
                .unwrap();
            traj.states[0].psi_t.clone()
        };
        let reference = endpoint(0.00125);
        let err = |dt: f64| {
            endpoint(dt)
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let e1 = err(0.04);
        let e2 = err(0.02);
        let order = (e1 / e2).log2();
        assert!(order > 1.7, "observed order {order}");
    }

    #[test]
    fn picard_zero_data_converges_immediately() {
        let solver = small_solver(1, 16, 10.0);
        let total = solver.grid().total_modes();
        let z = vec![Complex64::new(0.0, 0.0); total];
        let state = FieldState::from_data(z.clone(), z.clone(), z);
        let cfg = NonlinearConfig::new(NonlinearKind::Westervelt, 0.5).unwrap();
        let (traj, report) = solver.picard_solve(&state, &cfg, 1.0, 8, 1e-10, 5).unwrap();
        assert_eq!(report.iterations, 1);
        assert!(traj
            .states
            .iter()
            .all(|s| s.psi_t.iter().all(|v| v.norm() == 0.0)));
    }

    #[test]
    fn picard_agrees_with_etd_on_small_data() {
        let solver = small_solver(1, 64, 64.0 * std::f64::consts::PI / 16.0);
        let state = gaussian_state(&solver, 1e-2, 1.0);
        let cfg = NonlinearConfig::new(NonlinearKind::Westervelt, 0.5).unwrap();
        let t_end = 4.0;
        let (ptraj, report) = solver
            .picard_solve(&state, &cfg, t_end, 160, 1e-9, 12)
            .unwrap();
        assert!(
            report.contraction < 0.5,
            "contraction {}",
            report.contraction
        );
        let etraj = solver
            .etd_solve(&state, Some(&cfg), 0.002, t_end, &[t_end])
            .unwrap();
        let p_end = ptraj.states.last().unwrap();
        let e_end = &etraj.states[0];
        let scale = l2_norm(solver.grid(), &e_end.psi_t);
        let diff: f64 = p_end
            .psi_t
            .iter()
            .zip(&e_end.psi_t)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            * solver.grid().length.powi(1).sqrt();
        assert!(
            diff / scale < 1e-6,
            "relative endpoint gap {}",
            diff / scale
        );
    }

    #[test]
    fn frozen_source_single_iteration_matches_forced_integration() {
        // With the source frozen to F[psi_lin], one Picard sweep is the
        // forced linear solution; integrate that system mode by mode
        // with RK4 on exactly propagated linear states and compare.
        let solver = small_solver(1, 32, 10.0);
        let state = gaussian_state(&solver, 0.05, 1.0);
        let cfg = NonlinearConfig::new(NonlinearKind::Westervelt, 0.5).unwrap();
        let (t_end, intervals) = (3.0, 120);
        // tol so large the first sweep "converges": current = psi^(1)
        let (ptraj, report) = solver.picard_solve(&state, &cfg, t_end, intervals, 1e9, 3).unwrap();
        assert_eq!(report.iterations, 1);

        // tabulate F[psi_lin] on the RK4 half-step grid
        let steps = 3000usize;
        let h = t_end / steps as f64;
        let mut lin = state.clone();
        solver.dealias_state(&mut lin);
        let mut sources = Vec::with_capacity(2 * steps + 1);
        let mut cur = lin.clone();
        sources.push(solver.nonlinearity(&cur, &cfg));
        for _ in 0..(2 * steps) {
            cur = solver.linear_propagator_step(&cur, h / 2.0);
            sources.push(solver.nonlinearity(&cur, &cfg));
        }
        // forced RK4 per mode: y' = A y + e3 F(t)/tau
        let params = *solver.params();
        let tau = params.tau();
        let total = solver.grid().total_modes();
        let mut endpoint = vec![Complex64::new(0.0, 0.0); total];
        for mode in 0..total {
            let r = solver.kmag()[mode];
            let a = system_matrix(&params, r);
            let mut y = [
                lin.psi[mode],
                lin.psi_t[mode],
                lin.psi_tt[mode],
                Complex64::new(0.0, 0.0),
            ];
            let rhs = |y: &[Complex64; 4], f: Complex64| -> [Complex64; 4] {
                let mut out = [Complex64::new(0.0, 0.0); 4];
                for i in 0..4 {
                    for (j, v) in y.iter().enumerate() {
                        out[i] += v * a[(i, j)];
                    }
                }
                out[2] += f / tau;
                out
            };
            for s in 0..steps {
                let (f0, f1, f2) = (sources[2 * s][mode], sources[2 * s + 1][mode], sources[2 * s + 2][mode]);
                let k1 = rhs(&y, f0);
                let y2: [Complex64; 4] = std::array::from_fn(|j| y[j] + k1[j] * (h / 2.0));
                let k2 = rhs(&y2, f1);
                let y3: [Complex64; 4] = std::array::from_fn(|j| y[j] + k2[j] * (h / 2.0));
                let k3 = rhs(&y3, f1);
                let y4: [Complex64; 4] = std::array::from_fn(|j| y[j] + k3[j] * h);
                let k4 = rhs(&y4, f2);
                for j in 0..4 {
                    y[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
                }
            }
            endpoint[mode] = y[0];
        }
        let got = &ptraj.states.last().unwrap().psi;
        let scale: f64 = endpoint.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        for (a, b) in got.iter().zip(&endpoint) {
            assert!((a - b).norm() / scale < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn xs_norm_stable_through_trust_window() {
        // linear baseline: the weighted evolution norm saturates rather
        // than growing as the horizon extends inside the trust window
        let solver = small_solver(2, 64, 64.0 * std::f64::consts::PI);
        let state = gaussian_state(&solver, 1e-2, 2.0);
        let trust = solver.grid().trust_window(&params());
        let norm_to = |t_end: f64| {
            let samples: Vec<f64> = (0..24).map(|i| t_end * (i + 1) as f64 / 24.0).collect();
            let traj = solver
                .etd_solve(&state, None, t_end / 240.0, t_end, &samples)
                .unwrap();
            evolution_norm(&traj, solver.kmag(), NormFlavor::Xs, 0.5).unwrap()
        };
        let a = norm_to(0.5 * trust);
        let b = norm_to(0.95 * trust);
        assert!((a - b).abs() / a < 0.05, "Xs drifted: {a} vs {b}");
    }

    #[test]
    fn etd_step_check_accepts_resolved_and_rejects_coarse() {
        let solver = small_solver(1, 32, 40.0);
        let state = gaussian_state(&solver, 0.05, 1.5);
        let cfg = NonlinearConfig::new(NonlinearKind::Westervelt, 0.5).unwrap();
        assert!(solver
            .etd_solve_checked(&state, Some(&cfg), 0.01, 2.0, &[2.0], 1e-5)
            .is_ok());
        assert!(matches!(
            solver.etd_solve_checked(&state, Some(&cfg), 0.5, 2.0, &[2.0], 1e-12),
            Err(MgtError::StepRefinementFailed { .. })
        ));
    }

    #[test]
    fn dealiased_modes_stay_zero_and_real() {
        let solver = small_solver(1, 32, 15.0);
        let state = gaussian_state(&solver, 0.05, 1.2);
        let cfg = NonlinearConfig::new(NonlinearKind::Kuznetsov, 0.5).unwrap();
        let f = solver.nonlinearity(&state, &cfg);
        for (i, &masked) in solver.ops().mask().iter().enumerate() {
            if masked {
                assert_eq!(f[i], Complex64::new(0.0, 0.0));
            }
        }
        let traj = solver
            .etd_solve(&state, Some(&cfg), 0.05, 1.0, &[1.0])
            .unwrap();
        assert!(traj.states[0].reality_defect(solver.ops()) < 1e-12);
    }

    #[test]
    fn evolution_norm_zero_trajectory_and_t0_weights() {
        let solver = small_solver(2, 16, 6.0);
        let total = solver.grid().total_modes();
        let z = vec![Complex64::new(0.0, 0.0); total];
        let state = FieldState::from_data(z.clone(), z.clone(), z);
        let traj = Trajectory {
            grid: *solver.grid(),
            times: vec![0.0],
            states: vec![state],
        };
        assert_eq!(
            evolution_norm(&traj, solver.kmag(), NormFlavor::Xs, 0.5).unwrap(),
            0.0
        );

        // at t = 0 all weights equal 1, so Ys reduces to the data Sobolev norms
        let gs = gaussian_state(&solver, 0.1, 0.9);
        let expect = l2_norm(solver.grid(), &gs.psi_t)
            + l2_norm(solver.grid(), &gs.psi_tt)
            + hs_norm(solver.grid(), solver.kmag(), &gs.psi_t, 1.5)
            + hs_norm(solver.grid(), solver.kmag(), &gs.psi_tt, 0.5);
        let traj = Trajectory {
            grid: *solver.grid(),
            times: vec![0.0],
            states: vec![gs],
        };
        let got = evolution_norm(&traj, solver.kmag(), NormFlavor::Ys, 0.5).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn smallness_monotonicity_of_contraction() {
        let solver = small_solver(1, 64, 12.0);
        let cfg = NonlinearConfig::new(NonlinearKind::Westervelt, 0.5).unwrap();
        let mut factors = Vec::new();
        for amp in [4e-2, 2e-2, 1e-2] {
            let state = gaussian_state(&solver, amp, 1.0);
            let (_, report) = solver
                .picard_solve(&state, &cfg, 3.0, 120, 1e-10, 12)
                .unwrap();
            factors.push(report.contraction);
        }
        assert!(
            factors[0] > factors[1] && factors[1] > factors[2],
            "{factors:?}"
        );
    }
}
