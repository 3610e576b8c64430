//! `decay` subcommand: solution-norm histories by radial quadrature,
//! zone-restricted variants, and the fitted exponent against the
//! four-branch reference envelope and its derivative-rate analogues.

use crate::config::Config;
use crate::report::{check_flag, compare_rates, Csv, ExperimentOutput, Sided};
use mgtlab::fit::{fit_decay, log_times, FitModel};
use mgtlab::norms::{dns_reference, Restriction, SolutionNormEvaluator};
use mgtlab::params::Zone;

/// Expected decay exponent of || |D|^s d_t^k phi ||_{L2} for L1 data:
/// the four-branch envelope at k = 0, the single power thereafter.
/// Returns (exponent, has_sqrt_log_factor).
pub fn expected_exponent(n: f64, s: f64, k: usize) -> (f64, bool) {
    if k == 0 {
        if n < 3.0 - 2.0 * s {
            if n < 2.0 - 2.0 * s {
                (1.0 - s - n / 2.0, false)
            } else if (n - (2.0 - 2.0 * s)).abs() < 1e-12 {
                (0.5 - s / 2.0 - n / 4.0, true)
            } else {
                (1.0 - 5.0 * s / 6.0 - 5.0 * n / 12.0, false)
            }
        } else {
            (0.5 - s / 2.0 - n / 4.0, false)
        }
    } else {
        (0.5 - (s + k as f64) / 2.0 - n / 4.0, false)
    }
}

pub fn run(cfg: &Config) -> anyhow::Result<ExperimentOutput> {
    let params = cfg.phys_params()?;
    let zones = cfg.frequency_zones()?;
    let data = cfg.data_triple()?;
    let n = data.n();
    let (s, k) = (cfg.fit.s, cfg.fit.k);
    let times = log_times(cfg.fit.t_min, cfg.fit.t_max, cfg.fit.samples);

    let eval = SolutionNormEvaluator::new(&params, &data)?;
    let mut csv = Csv::new(&[
        "t",
        "norm",
        "interior",
        "bounded",
        "exterior",
        "dns_reference",
    ]);
    let mut history = Vec::with_capacity(times.len());
    for &t in &times {
        let full = eval.norm_at(t, s, k, Restriction::All, &zones);
        let int = eval.norm_at(t, s, k, Restriction::Zone(Zone::Interior), &zones);
        let bdd = eval.norm_at(t, s, k, Restriction::Zone(Zone::Bounded), &zones);
        let ext = eval.norm_at(t, s, k, Restriction::Zone(Zone::Exterior), &zones);
        history.push(full);
        csv.row(&[t, full, int, bdd, ext, dns_reference(n, s, t)]);
    }

    let (expected, log_branch) = expected_exponent(n, s, k);
    let model = if log_branch {
        FitModel::PowerLogHalf
    } else {
        FitModel::Power
    };
    let fit = fit_decay(&times, &history, model)?;

    let mut out = ExperimentOutput::default();
    out.push_csv("decay.csv", csv);
    let record = compare_rates(
        &format!("decay_exponent_n{n}_s{s}_k{k}"),
        fit.exponent,
        expected,
        cfg.fit.tolerance,
        Sided::Two,
    );
    let fit_json = serde_json::json!({
        "exponent": fit.exponent,
        "expected": expected,
        "log_half_factor": log_branch,
        "rss": fit.rss,
        "window": [fit.window.0, fit.window.1],
        "points": fit.points,
        "pass": record.pass,
    });
    out.artifacts.push((
        "decay_fit.json".to_string(),
        format!("{}\n", serde_json::to_string_pretty(&fit_json)?),
    ));
    out.checks.push(record);
    out.checks.push(check_flag("fit_residual_ok", fit.valid));
    Ok(out)
}
