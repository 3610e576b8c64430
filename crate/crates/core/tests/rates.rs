//! Rate-fit stability: fitted exponents are insensitive to grid
//! resolution, truncation radius, and the zone thresholds.

use mgtlab::fit::{fit_decay, log_times, FitModel};
use mgtlab::grid::RadialGrid;
use mgtlab::norms::{regularity_loss_probe, Restriction, SolutionNormEvaluator};
use mgtlab::params::{FrequencyZones, PhysParams};
use mgtlab::profile::{gaussian_profile, DataTriple};

fn gaussian_triple(n: f64, grid: &RadialGrid) -> DataTriple {
    let p = gaussian_profile(n, 1.0, 1.0, grid).unwrap();
    DataTriple::new(p.clone(), p.clone(), p).unwrap()
}

fn fitted_l2_exponent(grid: &RadialGrid, zones: &FrequencyZones) -> f64 {
    let params = PhysParams::new(1.0, 1.0, 0.5, false).unwrap();
    let data = gaussian_triple(3.0, grid);
    let eval = SolutionNormEvaluator::new(&params, &data).unwrap();
    let ts = log_times(10.0, 1e4, 17);
    let vs = eval.history(&ts, 0.0, 0, Restriction::All, zones);
    fit_decay(&ts, &vs, FitModel::Power).unwrap().exponent
}

#[test]
fn l2_rate_invariant_under_refinement_and_zone_choice() {
    let zones = FrequencyZones::default();
    let base = RadialGrid::decay_default(50.0, 2400).unwrap();
    let e0 = fitted_l2_exponent(&base, &zones);
    assert!((e0 + 0.25).abs() < 0.05, "baseline exponent {e0}");

    // doubled resolution
    let fine = RadialGrid::decay_default(50.0, 4800).unwrap();
    let e1 = fitted_l2_exponent(&fine, &zones);
    assert!((e0 - e1).abs() < 0.01, "{e0} vs {e1}");

    // doubled truncation radius
    let wide = RadialGrid::decay_default(100.0, 2800).unwrap();
    let e2 = fitted_l2_exponent(&wide, &zones);
    assert!((e0 - e2).abs() < 0.01, "{e0} vs {e2}");

    // perturbed zone thresholds do not move the whole-axis fit
    let other = FrequencyZones::new(0.075, 10.0).unwrap();
    let e3 = fitted_l2_exponent(&base, &other);
    assert!((e0 - e3).abs() < 0.01, "{e0} vs {e3}");
}

#[test]
fn gamma_zero_probe_shows_no_exterior_decay() {
    // demanding no extra regularity buys no exterior-zone decay: the
    // fitted exponent sits at zero (up to the small tail margin)
    let params = PhysParams::new(1.0, 0.0, 0.5, false).unwrap();
    let zones = FrequencyZones::default();
    let report = regularity_loss_probe(&params, &zones, 3.0, 1.0, 0.0).unwrap();
    assert!(
        report.inviscid_fit.exponent.abs() < 0.1,
        "exponent {}",
        report.inviscid_fit.exponent
    );
}
