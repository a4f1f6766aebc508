use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum::SpectrumResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub freqs_hz: Vec<f64>,
    pub analytic: Vec<f64>,
    pub estimated: Vec<f64>,
    /// `|estimated - analytic| / analytic` per grid point.
    pub rel_err: Vec<f64>,
    /// Relative error of the band-averaged power.
    pub band_rel_err: f64,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn rel_err(est: f64, ana: f64) -> f64 {
    if ana == 0.0 {
        if est == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        (est - ana).abs() / ana.abs()
    }
}

fn same_grid(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0))
}

/// Linear interpolation of `(xs, ys)` at `x`, clamped at the ends.
fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let hi = xs.partition_point(|&v| v <= x);
    let w = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
    ys[hi - 1] + w * (ys[hi] - ys[hi - 1])
}

/// Compares an estimate against the analytic spectrum on the analytic grid.
///
/// An estimate on a different grid is linearly interpolated onto it; its
/// grid must reach within one bin spacing of both ends of the analytic grid.
pub fn compare(analytic: &SpectrumResult, estimated: &SpectrumResult, tolerance: f64) -> Result<Comparison> {
    if analytic.unit != estimated.unit {
        return Err(Error::GridMismatch("spectra carry different units".into()));
    }
    if analytic.freqs_hz.is_empty() || estimated.freqs_hz.is_empty() {
        return Err(Error::GridMismatch("empty spectrum".into()));
    }
    let est: Vec<f64> = if same_grid(&analytic.freqs_hz, &estimated.freqs_hz) {
        estimated.values.clone()
    } else {
        let xs = &estimated.freqs_hz;
        if xs.len() < 2 {
            return Err(Error::GridMismatch(
                "cannot rebin a single-point estimate".into(),
            ));
        }
        let spacing = xs[1] - xs[0];
        let (lo, hi) = (analytic.freqs_hz[0], *analytic.freqs_hz.last().unwrap());
        if lo < xs[0] - spacing || hi > xs[xs.len() - 1] + spacing {
            return Err(Error::GridMismatch(format!(
                "estimate covers [{}, {}] Hz, analytic grid spans [{lo}, {hi}] Hz",
                xs[0],
                xs[xs.len() - 1]
            )));
        }
        analytic
            .freqs_hz
            .iter()
            .map(|&f| interp(xs, &estimated.values, f))
            .collect()
    };

    let rel: Vec<f64> = est
        .iter()
        .zip(&analytic.values)
        .map(|(&e, &a)| rel_err(e, a))
        .collect();
    let band_rel_err = rel_err(est.iter().sum(), analytic.values.iter().sum());
    let max_rel_err = rel.iter().cloned().fold(0.0, f64::max);
    Ok(Comparison {
        freqs_hz: analytic.freqs_hz.clone(),
        analytic: analytic.values.clone(),
        estimated: est,
        rel_err: rel,
        band_rel_err,
        max_rel_err,
        tolerance,
        pass: band_rel_err <= tolerance,
    })
}
