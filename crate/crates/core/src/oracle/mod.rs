//! Monte Carlo cross-check of the analytic spectrum.
//!
//! Gaussian vacuum realisations are synthesised around every frequency-matrix
//! entry, optionally squeezed, beaten against the classical components,
//! demodulated in the time domain and fed through an averaged periodogram.
//! Only the classical × vacuum cross terms of the photocurrent are kept.
//!
//! Trials draw from independent ChaCha streams keyed by `(seed, trial)` and
//! are reduced in trial order, so results are bit-identical for a given seed
//! whatever the thread count.

mod compare;
mod synth;
mod welch;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use compare::{compare, Comparison};
pub use synth::{synthesize_current, Synthesizer};
pub use welch::{welch_psd, Window};

use crate::error::{Error, Result};
use crate::model::{DemodStage, Scheme, SqueezerSpec};
use crate::spectrum::{Analysis, SpectrumResult, SpectrumUnit};
use welch::{bins_within, Periodogram};

pub const DEFAULT_SEGMENT_LEN: usize = 4096;
pub const DEFAULT_SEGMENTS_PER_TRIAL: usize = 16;
pub const DEFAULT_TRIALS: usize = 25;
pub const DEFAULT_GUARD_FACTOR: f64 = 10.0;
/// Records longer than this are refused rather than allocated.
pub const MAX_TRIAL_LEN: usize = 1 << 26;
/// The estimate must resolve the detection band with at least this many bins.
pub const MIN_BINS_IN_BAND: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub sample_rate_hz: f64,
    /// Length of one trial record.
    pub duration_s: f64,
    pub n_trials: usize,
    pub seed: u64,
    pub segment_len: usize,
    pub window: Window,
    /// Vacuum is synthesised out to `B (1 + guard_factor)` around each entry.
    pub guard_factor: f64,
}

impl OracleConfig {
    /// Defaults sized for `scheme`: a power-of-two sample rate above
    /// `2.5 (max |F_nd| + B)`, 4096-sample Hann segments, 16 segments per
    /// trial and 25 trials (400 segments).
    pub fn for_setup(scheme: &Scheme, demods: &[DemodStage]) -> Result<Self> {
        let matrix = crate::freq_matrix::build_frequency_matrix(scheme, demods)?;
        let b = scheme.config().bandwidth_hz;
        let needed = 2.5 * (matrix.max_abs_offset() + b);
        let sample_rate_hz = (needed.ceil() as u64).max(2).next_power_of_two() as f64;
        Ok(Self {
            sample_rate_hz,
            duration_s: (DEFAULT_SEGMENTS_PER_TRIAL * DEFAULT_SEGMENT_LEN) as f64 / sample_rate_hz,
            n_trials: DEFAULT_TRIALS,
            seed: 0,
            segment_len: DEFAULT_SEGMENT_LEN,
            window: Window::Hann,
            guard_factor: DEFAULT_GUARD_FACTOR,
        })
    }

    pub fn trial_len(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn segments_per_trial(&self) -> usize {
        self.trial_len() / self.segment_len.max(1)
    }

    pub fn total_segments(&self) -> usize {
        self.segments_per_trial() * self.n_trials
    }

    pub fn validate(&self, max_abs_offset_hz: f64, bandwidth_hz: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidOracleConfig(m));
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return bad("sample rate must be positive".into());
        }
        if self.sample_rate_hz <= 2.0 * (max_abs_offset_hz + bandwidth_hz) {
            return Err(Error::AliasedScheme {
                sample_rate_hz: self.sample_rate_hz,
                max_offset_hz: max_abs_offset_hz,
                bandwidth_hz,
            });
        }
        if self.n_trials == 0 {
            return bad("at least one trial is required".into());
        }
        if self.segment_len < 2 {
            return bad("segment length must be at least 2".into());
        }
        if !(self.guard_factor >= 0.0 && self.guard_factor.is_finite()) {
            return bad("guard factor must be nonnegative".into());
        }
        if !(self.duration_s > 0.0) || self.trial_len() < 2 * self.segment_len {
            return Err(Error::TooShort {
                len: self.trial_len(),
                segment_len: self.segment_len,
            });
        }
        if self.trial_len() > MAX_TRIAL_LEN {
            return bad(format!(
                "trial record of {} samples exceeds the limit of {MAX_TRIAL_LEN}",
                self.trial_len()
            ));
        }
        let bins = bins_within(bandwidth_hz, self.sample_rate_hz, self.segment_len);
        if bins < MIN_BINS_IN_BAND {
            return bad(format!(
                "segments of {} samples at {} Hz resolve the {bandwidth_hz} Hz band with only {bins} bins",
                self.segment_len, self.sample_rate_hz
            ));
        }
        Ok(())
    }
}

/// Welch estimate of a single record on `[0, B]`, in W^2/Hz.
pub fn estimate_psd(series: &[f64], cfg: &OracleConfig, bandwidth_hz: f64) -> Result<SpectrumResult> {
    let (freqs_hz, values) = welch_psd(series, cfg.sample_rate_hz, cfg.segment_len, cfg.window, bandwidth_hz)?;
    Ok(SpectrumResult {
        freqs_hz,
        values,
        unit: SpectrumUnit::Si,
        breakdown: None,
    })
}

/// Synthesises every trial and returns the segment-averaged estimate in the
/// same units as the analytic spectrum of `scheme`.
pub fn estimate_spectrum(
    scheme: &Scheme,
    demods: &[DemodStage],
    squeezers: &[SqueezerSpec],
    cfg: &OracleConfig,
) -> Result<SpectrumResult> {
    let synth = Synthesizer::new(scheme, demods, squeezers, cfg)?;
    let b = scheme.config().bandwidth_hz;
    let n_bins = bins_within(b, cfg.sample_rate_hz, cfg.segment_len);
    let pgram = Periodogram::new(cfg.segment_len, cfg.window, n_bins);

    let per_trial: Vec<(Vec<f64>, usize)> = (0..cfg.n_trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut acc = vec![0.0; n_bins];
            let segs = pgram.accumulate(&synth.trial(t), &mut acc);
            (acc, segs)
        })
        .collect();
    let mut acc = vec![0.0; n_bins];
    let mut segs = 0;
    for (a, s) in &per_trial {
        for (x, y) in acc.iter_mut().zip(a) {
            *x += y;
        }
        segs += s;
    }

    let scale = scheme.config().output_scale(demods.len());
    let df = cfg.sample_rate_hz / cfg.segment_len as f64;
    Ok(SpectrumResult {
        freqs_hz: (0..n_bins).map(|k| k as f64 * df).collect(),
        values: pgram
            .density(&acc, segs, cfg.sample_rate_hz)
            .into_iter()
            .map(|v| v * scale)
            .collect(),
        unit: SpectrumUnit::of(scheme.config()),
        breakdown: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub seed: u64,
    pub n_trials: usize,
    pub n_segments: usize,
    pub sample_rate_hz: f64,
    pub segment_len: usize,
    pub window: Window,
    pub unit: SpectrumUnit,
    pub comparison: Comparison,
}

/// Runs the oracle and compares it with the analytic spectrum evaluated on
/// the estimate's own frequency bins.
pub fn run_oracle(
    scheme: &Scheme,
    demods: &[DemodStage],
    squeezers: &[SqueezerSpec],
    cfg: &OracleConfig,
    tolerance: f64,
) -> Result<OracleReport> {
    let estimated = estimate_spectrum(scheme, demods, squeezers, cfg)?;
    let analytic = Analysis::new(scheme, demods, squeezers)?.spectrum(
        scheme,
        demods,
        &estimated.freqs_hz,
        false,
    )?;
    Ok(OracleReport {
        seed: cfg.seed,
        n_trials: cfg.n_trials,
        n_segments: cfg.total_segments(),
        sample_rate_hz: cfg.sample_rate_hz,
        segment_len: cfg.segment_len,
        window: cfg.window,
        unit: analytic.unit,
        comparison: compare(&analytic, &estimated, tolerance)?,
    })
}
