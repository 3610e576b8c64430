//! `roots` subcommand: labeled characteristic-root branches along a
//! radial sweep, with residual, Vieta, and stability verdicts.

use crate::config::Config;
use crate::report::{check_flag, compare_rates, Csv, ExperimentOutput, Sided};
use mgtlab::fit::log_times;
use mgtlab::params::PhysParams;
use mgtlab::quartic::{
    asymptotic_large_unchecked, asymptotic_small_unchecked, label_by_family, match_branches,
    quartic_at, solve_roots, spectral_abscissa, CharRoots,
};
use mgtlab::MgtError;
use num_complex::Complex64;

/// Continuation labels where well posed; after a genuine branch
/// collision the labels re-anchor on the zone-local families.
pub fn labeled_sweep(
    params: &PhysParams,
    grid: &[f64],
    eps: f64,
    cap_n: f64,
) -> anyhow::Result<(Vec<CharRoots>, bool)> {
    match match_branches(params, grid) {
        Ok(rows) => Ok((rows, true)),
        Err(MgtError::BranchAmbiguity { .. }) => {
            let rows = grid
                .iter()
                .map(|&r| {
                    let solved = solve_roots(&quartic_at(params, r))?;
                    // in the bounded zone pick whichever family set sits closer
                    let small = asymptotic_small_unchecked(params, r, 2);
                    let large = asymptotic_large_unchecked(params, r);
                    let family = if r < eps {
                        small
                    } else if r > cap_n {
                        large
                    } else {
                        let score = |fam: &[num_complex::Complex64; 4]| -> f64 {
                            solved
                                .roots
                                .iter()
                                .map(|z| {
                                    fam.iter().map(|f| (z - f).norm()).fold(f64::MAX, f64::min)
                                })
                                .sum()
                        };
                        if score(&small) <= score(&large) {
                            small
                        } else {
                            large
                        }
                    };
                    Ok(label_by_family(solved, &family))
                })
                .collect::<Result<Vec<_>, MgtError>>()?;
            Ok((rows, false))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn run(cfg: &Config) -> anyhow::Result<ExperimentOutput> {
    let params = cfg.phys_params()?;
    let zones = cfg.frequency_zones()?;
    let grid = log_times(1e-3, 1e3, 500);
    let (rows, continuous) = labeled_sweep(&params, &grid, zones.eps(), zones.cap_n())?;

    let mut csv = Csv::new(&[
        "r",
        "re_osc_p",
        "im_osc_p",
        "re_osc_m",
        "im_osc_m",
        "re_relax_p",
        "im_relax_p",
        "re_relax_m",
        "im_relax_m",
        "max_residual",
    ]);
    let mut worst_residual: f64 = 0.0;
    let mut worst_vieta: f64 = 0.0;
    for row in &rows {
        let res = row.residuals.iter().cloned().fold(0.0, f64::max);
        worst_residual = worst_residual.max(res);
        let c = quartic_at(&params, row.r);
        let sum: Complex64 = row.roots.iter().sum();
        let prod: Complex64 = row.roots.iter().product();
        let sum_ref = -c.c3 / c.c4;
        let prod_ref = c.c0 / c.c4;
        worst_vieta = worst_vieta
            .max((sum - sum_ref).norm() / sum_ref.abs().max(1e-300))
            .max((prod - prod_ref).norm() / prod_ref.abs().max(1e-300));
        csv.row(&[
            row.r,
            row.roots[0].re,
            row.roots[0].im,
            row.roots[1].re,
            row.roots[1].im,
            row.roots[2].re,
            row.roots[2].im,
            row.roots[3].re,
            row.roots[3].im,
            res,
        ]);
    }

    let abscissa = spectral_abscissa(&params, &grid)?;
    let mut out = ExperimentOutput::default();
    out.push_csv("roots.csv", csv);
    out.checks.push(compare_rates(
        "max_root_residual",
        worst_residual,
        0.0,
        1e-10,
        Sided::Upper,
    ));
    out.checks.push(compare_rates(
        "max_vieta_error",
        worst_vieta,
        0.0,
        1e-8,
        Sided::Upper,
    ));
    if params.is_stable() {
        out.checks.push(compare_rates(
            "spectral_abscissa",
            abscissa.value,
            0.0,
            0.0,
            Sided::Upper,
        ));
    } else {
        out.checks.push(check_flag(
            "unstable_abscissa_positive",
            abscissa.value > 0.0,
        ));
    }
    out.checks.push(check_flag(
        if continuous {
            "labels_continued"
        } else {
            "labels_zone_anchored"
        },
        true,
    ));
    // the interior/exterior ends must sit on the asymptotic families
    let first = &rows[0];
    let small = asymptotic_small_unchecked(&params, first.r, 2);
    let anchored =
        (0..4).all(|i| (first.roots[i] - small[i]).norm() < 0.05 * (1.0 + small[i].norm()));
    out.checks.push(check_flag("small_r_anchor", anchored));
    Ok(out)
}
