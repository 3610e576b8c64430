//! Cross-validation of the exact synthesis path against the
//! integro-differential oracle over randomized parameters and data.

use mgtlab::mode::{evolve_mode, max_root_norm, mode_oracle, propagate_state, ModeSolution};
use mgtlab::params::PhysParams;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn random_case(rng: &mut ChaCha12Rng) -> (PhysParams, f64, [Complex64; 3], f64) {
    let tau = rng.gen_range(0.2..1.2);
    let delta = if rng.gen_bool(0.25) {
        0.0
    } else {
        rng.gen_range(0.0..1.5)
    };
    let m_tau = rng.gen_range(0.05..0.95);
    let params = PhysParams::new(tau, delta, m_tau / tau, false).unwrap();
    let r = 10f64.powf(rng.gen_range(-2.0..0.7));
    let data =
        std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let t = rng.gen_range(0.1..10.0);
    (params, r, data, t)
}

fn oracle_dt(params: &PhysParams, r: f64, t: f64) -> f64 {
    let lmax = max_root_norm(params, r).unwrap().max(1e-3);
    // RK4 global error ~ t |l|^5 dt^4 / 2880; aim below 1e-10
    let acc = (2880.0 * 1e-10 / (t * lmax.powi(5))).powf(0.25);
    acc.min(0.4 / lmax).min(0.05)
}

#[test]
fn randomized_oracle_equivalence() {
    let mut rng = ChaCha12Rng::seed_from_u64(20260809);
    let mut worst = 0.0_f64;
    for _ in 0..40 {
        let (params, r, d, t) = random_case(&mut rng);
        let dt = oracle_dt(&params, r, t);
        let exact = evolve_mode(&params, r, d[0], d[1], d[2], t).unwrap();
        let rk = mode_oracle(&params, r, d[0], d[1], d[2], t, dt).unwrap();
        let scale = exact.max_component().max(1.0);
        for (a, b) in exact.as_vector().iter().zip(rk.as_vector()) {
            worst = worst.max((a - b).norm() / scale);
        }
    }
    assert!(worst < 1e-8, "worst relative deviation {worst:e}");
}

#[test]
fn randomized_semigroup_property() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for _ in 0..25 {
        let (params, r, d, t) = random_case(&mut rng);
        let sol = ModeSolution::new(&params, r, d[0], d[1], d[2]).unwrap();
        let t1 = 0.4 * t;
        let direct = sol.state_at(t);
        let restarted = propagate_state(&params, &sol.state_at(t1), t - t1);
        let scale = direct.max_component().max(1.0);
        for (a, b) in direct.as_vector().iter().zip(restarted.as_vector()) {
            assert!((a - b).norm() / scale < 1e-8);
        }
    }
}
