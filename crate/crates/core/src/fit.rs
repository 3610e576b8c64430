//! Least-squares estimation of power-law (optionally x sqrt(log)) decay
//! exponents from log-spaced norm histories.

use crate::error::{MgtError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// v ~ (1+t)^p
    Power,
    /// v ~ (1+t)^p (ln(e+t))^{1/2}
    PowerLogHalf,
}

/// Fitted decay exponent with residual diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub exponent: f64,
    pub log_amplitude: f64,
    pub model: FitModel,
    pub rss: f64,
    pub window: (f64, f64),
    pub points: usize,
    /// False when the residual is too large for the exponent to mean much.
    pub valid: bool,
}

const MIN_SAMPLES: usize = 8;
const VALID_MEAN_SQ: f64 = 0.04; // log-residual rms 0.2

pub fn fit_decay(times: &[f64], values: &[f64], model: FitModel) -> Result<DecayFit> {
    if times.len() < MIN_SAMPLES || times.len() != values.len() {
        return Err(MgtError::InsufficientSamples {
            need: MIN_SAMPLES,
            got: times.len().min(values.len()),
        });
    }
    for &v in values {
        if !(v > 0.0) {
            return Err(MgtError::NonPositiveValues(v));
        }
    }
    let xs: Vec<f64> = times.iter().map(|&t| (1.0 + t).ln()).collect();
    let ys: Vec<f64> = values
        .iter()
        .zip(times)
        .map(|(&v, &t)| {
            let mut y = v.ln();
            if model == FitModel::PowerLogHalf {
                y -= 0.5 * (std::f64::consts::E + t).ln().ln();
            }
            y
        })
        .collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    Ok(DecayFit {
        exponent: slope,
        log_amplitude: intercept,
        model,
        rss,
        window: (times[0], *times.last().unwrap()),
        points: times.len(),
        valid: rss / n <= VALID_MEAN_SQ,
    })
}

/// Log-spaced sample times for rate fits.
pub fn log_times(t_min: f64, t_max: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| t_min * (t_max / t_min).powf(i as f64 / (count - 1) as f64))
        .collect()
}
