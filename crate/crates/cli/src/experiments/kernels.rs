//! `kernels` subcommand: calibrate the pointwise envelope constants
//! (C, c) per frequency zone and tabulate kernel magnitudes against the
//! calibrated bound.

use crate::config::Config;
use crate::report::{check_flag, compare_rates, Csv, ExperimentOutput, Sided};
use mgtlab::mode::{calibrate_bounds, pointwise_bound, ModeSolution};
use mgtlab::params::Zone;
use num_complex::Complex64;

pub fn run(cfg: &Config) -> anyhow::Result<ExperimentOutput> {
    let params = cfg.phys_params()?;
    let zones = cfg.frequency_zones()?;
    let kc = &cfg.kernels;
    let consts = calibrate_bounds(
        &params,
        &zones,
        kc.r_points,
        kc.t_points,
        (kc.t_min, kc.t_max),
    )?;

    let mut out = ExperimentOutput::default();
    for (zone, (big_c, c)) in [
        (Zone::Interior, consts.interior),
        (Zone::Bounded, consts.bounded),
        (Zone::Exterior, consts.exterior),
    ] {
        out.checks.push(compare_rates(
            &format!("envelope_constant_{}", zone.name()),
            big_c,
            0.0,
            1e6,
            Sided::Upper,
        ));
        out.checks.push(check_flag(
            &format!("envelope_rate_{}_positive", zone.name()),
            c > 0.0,
        ));
    }

    // tabulate |K_j| and the unit-data bound on a coarser display grid,
    // verifying domination along the way
    let mut csv = Csv::new(&["r", "t", "k0_abs", "k1_abs", "k2_abs", "u_abs", "bound"]);
    let r_list: Vec<f64> = (0..12)
        .map(|i| {
            zones.eps() * 1e-2 * (zones.cap_n() * 40.0 / (zones.eps() * 1e-2)).powf(i as f64 / 11.0)
        })
        .collect();
    let t_list: Vec<f64> = (0..12)
        .map(|i| kc.t_min * (kc.t_max / kc.t_min).powf(i as f64 / 11.0))
        .collect();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut dominated = true;
    for &r in &r_list {
        let slots = [
            ModeSolution::new(&params, r, one, zero, zero)?,
            ModeSolution::new(&params, r, zero, one, zero)?,
            ModeSolution::new(&params, r, zero, zero, one)?,
        ];
        let combined = ModeSolution::new(&params, r, one, one, one)?;
        for &t in &t_list {
            let k: Vec<f64> = slots.iter().map(|s| s.state_at(t).u.norm()).collect();
            let u = combined.state_at(t).u.norm();
            let bound = pointwise_bound(&params, &zones, &consts, r, t, [1.0, 1.0, 1.0]);
            // display grid is offset from the calibration grid, so allow
            // a modest envelope-robustness margin
            if u > bound * 1.25 + 1e-300 {
                dominated = false;
            }
            csv.row(&[r, t, k[0], k[1], k[2], u, bound]);
        }
    }
    out.push_csv("kernels.csv", csv);
    out.checks
        .push(check_flag("bound_dominates_offset_grid", dominated));
    Ok(out)
}
