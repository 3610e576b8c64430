//! `inviscid` subcommand: the vanishing-sound-diffusivity sweep M(delta),
//! the finite-time growth check, and an energy subreport per sampled mode.

use crate::config::Config;
use crate::report::{check_flag, compare_rates, Csv, ExperimentOutput, Sided};
use mgtlab::energy::{
    coupling_k, energies, energy_balance_residual, finite_time_sup_diff, inviscid_metrics,
    DifferenceMode, EnergyTrajectory,
};
use mgtlab::fit::log_times;
use mgtlab::mode::ModeSolution;
use num_complex::Complex64;

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let sx: f64 = lx.iter().sum();
    let sy: f64 = ly.iter().sum();
    let sxx: f64 = lx.iter().map(|x| x * x).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

pub fn run(cfg: &Config) -> anyhow::Result<ExperimentOutput> {
    let base = cfg.phys_params()?.with_delta(0.0)?;
    let data = cfg.data_triple()?;
    let inv = &cfg.inviscid;
    let t_grid = log_times(inv.t_min, 1e2 * base.tau(), inv.t_points);

    let mut out = ExperimentOutput::default();

    // M(delta) sweep and running slope estimates
    let records = inviscid_metrics(&base, &inv.deltas, &data, inv.s0, &t_grid)?;
    let mut csv = Csv::new(&["delta", "m_sup", "at_t", "running_slope"]);
    let mut ds = Vec::new();
    let mut ms = Vec::new();
    for rec in &records {
        if rec.delta > 0.0 {
            ds.push(rec.delta);
            ms.push(rec.m_sup);
        }
        let running = if ds.len() >= 2 {
            loglog_slope(&ds, &ms)
        } else {
            f64::NAN
        };
        csv.row(&[rec.delta, rec.m_sup, rec.at_t, running]);
    }
    out.push_csv("inviscid.csv", csv);
    let slope = loglog_slope(&ds, &ms);
    out.checks
        .push(compare_rates("m_delta_slope", slope, 0.5, 0.05, Sided::Two));

    // sup insensitivity to extending the time window
    let extended = log_times(inv.t_min, 2e2 * base.tau(), inv.t_points * 2);
    let rec2 = inviscid_metrics(&base, &[ds[0]], &data, inv.s0, &extended)?;
    let drift = (rec2[0].m_sup - ms[0]).abs() / ms[0];
    out.checks.push(compare_rates(
        "m_sup_window_drift",
        drift,
        0.0,
        0.01,
        Sided::Upper,
    ));

    // finite-time growth: ln sup over [0, T] grows no faster than T/(2 tau)
    let delta_ft = ds[0];
    let params_ft = base.with_delta(delta_ft)?;
    let t_caps: Vec<f64> = (0..5)
        .map(|i| base.tau() * (2.0 + 2.0 * i as f64))
        .collect();
    let mut sups = Vec::new();
    let mut csv = Csv::new(&["t_cap", "sup_diff"]);
    for &t_cap in &t_caps {
        let sup = finite_time_sup_diff(&params_ft, &data, t_cap, 40)?;
        csv.row(&[t_cap, sup]);
        sups.push(sup);
    }
    out.push_csv("inviscid_growth.csv", csv);
    let n = t_caps.len() as f64;
    let sy: f64 = sups.iter().map(|v| v.ln()).sum();
    let sx: f64 = t_caps.iter().sum();
    let sxx: f64 = t_caps.iter().map(|x| x * x).sum();
    let sxy: f64 = t_caps.iter().zip(&sups).map(|(x, v)| x * v.ln()).sum();
    let growth = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.checks.push(compare_rates(
        "finite_time_growth_rate",
        growth,
        1.0 / (2.0 * base.tau()),
        0.05,
        Sided::Upper,
    ));

    // energy subreport on a few sampled modes
    let one = Complex64::new(1.0, 0.0);
    let mut csv = Csv::new(&["r", "e_total_start", "e_total_end", "k", "residual_order"]);
    let mut monotone = true;
    let mut orders_ok = true;
    for i in 0..6 {
        let r = 0.05 * (100.0_f64).powf(i as f64 / 5.0);
        let sol = ModeSolution::new(&base, r, one, one, one)?;
        let traj = EnergyTrajectory::Homogeneous(&sol);
        let mut prev = f64::INFINITY;
        let mut e_start = 0.0;
        let mut e_end = 0.0;
        for j in 0..60 {
            let t = 20.0 * j as f64 / 59.0;
            let e = energies(&base, &sol.state_at(t), sol.memory_square_at(t));
            if j == 0 {
                e_start = e.e_total;
            }
            e_end = e.e_total;
            if e.e_total > prev + 1e-9 * prev.abs().max(1.0) {
                monotone = false;
            }
            prev = e.e_total;
        }
        let (r1a, _) = energy_balance_residual(&base, &traj, 1.0, 1e-2)?;
        let (r1b, _) = energy_balance_residual(&base, &traj, 1.0, 5e-3)?;
        let order = (r1a / r1b).log2();
        if !(1.6..=2.4).contains(&order) {
            orders_ok = false;
        }
        csv.row(&[r, e_start, e_end, coupling_k(&base), order]);
    }
    out.push_csv("inviscid_energy.csv", csv);
    out.checks
        .push(check_flag("inviscid_energy_non_increasing", monotone));
    out.checks
        .push(check_flag("energy_residual_second_order", orders_ok));

    // difference-mode dissipation spot check at one (r, t)
    let params_d = base.with_delta(delta_ft)?;
    let dm = DifferenceMode::new(&params_d, 1.0, one, one, one)?;
    let traj = EnergyTrajectory::Difference(&dm);
    let (res1, res2) = energy_balance_residual(&params_d, &traj, 2.0, 1e-3)?;
    out.checks.push(compare_rates(
        "difference_identity_residual",
        res1.max(res2),
        0.0,
        1e-4,
        Sided::Upper,
    ));

    Ok(out)
}
