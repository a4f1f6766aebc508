//! Averaged-periodogram PSD estimation.

use std::sync::Arc;

use rustfft::{num_complex::Complex64, Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    #[default]
    Hann,
}

impl Window {
    /// Periodic window coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| {
                    let x = std::f64::consts::PI * i as f64 / n as f64;
                    x.sin().powi(2)
                })
                .collect(),
        }
    }
}

/// Running sum of windowed periodograms over non-overlapping segments.
pub(crate) struct Periodogram {
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    window_power: f64,
    /// Bins kept, `0..n_bins`.
    n_bins: usize,
}

impl Periodogram {
    pub fn new(segment_len: usize, window: Window, n_bins: usize) -> Self {
        let window = window.coefficients(segment_len);
        let window_power = window.iter().map(|w| w * w).sum();
        Self {
            fft: FftPlanner::new().plan_fft_forward(segment_len),
            window,
            window_power,
            n_bins: n_bins.min(segment_len / 2 + 1),
        }
    }

    fn segment_len(&self) -> usize {
        self.window.len()
    }

    /// Adds `|X_k|^2` of every full segment into `acc`; returns the segment count.
    pub fn accumulate(&self, series: &[f64], acc: &mut [f64]) -> usize {
        let n = self.segment_len();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let mut count = 0;
        for seg in series.chunks_exact(n) {
            for ((b, &x), &w) in buf.iter_mut().zip(seg).zip(&self.window) {
                *b = Complex64::new(x * w, 0.0);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (a, x) in acc.iter_mut().zip(&buf[..self.n_bins]) {
                *a += x.norm_sqr();
            }
            count += 1;
        }
        count
    }

    /// Single-sided density from summed `|X_k|^2`.
    ///
    /// Every kept bin, DC included, is doubled: the estimate then approximates
    /// the continuous single-sided density of a zero-mean process at `f = 0`
    /// too.
    pub fn density(&self, acc: &[f64], segments: usize, sample_rate_hz: f64) -> Vec<f64> {
        let norm = 2.0 / (segments as f64 * sample_rate_hz * self.window_power);
        acc.iter().map(|a| a * norm).collect()
    }
}

pub(crate) fn bins_within(bandwidth_hz: f64, sample_rate_hz: f64, segment_len: usize) -> usize {
    let df = sample_rate_hz / segment_len as f64;
    ((bandwidth_hz / df).floor() as usize + 1).min(segment_len / 2 + 1)
}

/// Single-sided Welch estimate of `series` on the FFT bins inside
/// `[0, bandwidth_hz]`, non-overlapping segments.
pub fn welch_psd(
    series: &[f64],
    sample_rate_hz: f64,
    segment_len: usize,
    window: Window,
    bandwidth_hz: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if segment_len == 0 || series.len() < 2 * segment_len {
        return Err(Error::TooShort {
            len: series.len(),
            segment_len,
        });
    }
    let n_bins = bins_within(bandwidth_hz, sample_rate_hz, segment_len);
    let p = Periodogram::new(segment_len, window, n_bins);
    let mut acc = vec![0.0; p.n_bins];
    let segs = p.accumulate(series, &mut acc);
    let df = sample_rate_hz / segment_len as f64;
    let freqs = (0..p.n_bins).map(|k| k as f64 * df).collect();
    Ok((freqs, p.density(&acc, segs, sample_rate_hz)))
}
