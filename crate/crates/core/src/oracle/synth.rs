//! Time-domain synthesis of the linearised, demodulated photocurrent.
//!
//! The vacuum field is built on the discrete frequency grid of one trial
//! record, `F_k = k fs / L`. Each active bin receives an independent circular
//! Gaussian amplitude with `E|q_k|^2 = E(F_k) dF / 4`, which makes the
//! single-sided PSD of `2 Re(c* q e^{-2 pi i F t})` equal to `|c|^2 E`. Bins
//! mirrored about a squeezer reference are then mixed by its transfer set.
//! The optical carrier is factored out, so the record only has to resolve
//! sideband offsets.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{ClassicalComponent, DemodStage, Scheme};
use crate::spectrum::Analysis;
use crate::squeeze::{pure_squeeze_transfers, TransferSet};
use crate::model::SqueezerSpec;

use super::OracleConfig;

struct SqueezeBand {
    transfer: TransferSet,
    /// `(upper, lower)` array indices; equal for the bin at the reference.
    pairs: Vec<(usize, usize)>,
}

/// Precomputed synthesis plan for one detection setup.
pub struct Synthesizer {
    trial_len: usize,
    sample_rate_hz: f64,
    seed: u64,
    /// `(array index, amplitude scale)` of every bin carrying noise.
    active: Vec<(usize, f64)>,
    bands: Vec<SqueezeBand>,
    components: Vec<ClassicalComponent>,
    demods: Vec<DemodStage>,
    fft: Arc<dyn Fft<f64>>,
}

impl Synthesizer {
    pub fn new(
        scheme: &Scheme,
        demods: &[DemodStage],
        squeezers: &[SqueezerSpec],
        cfg: &OracleConfig,
    ) -> Result<Self> {
        let config = scheme.config();
        let b = config.bandwidth_hz;
        let analysis = Analysis::new(scheme, demods, squeezers)?;
        cfg.validate(analysis.matrix.max_abs_offset(), b)?;

        let fs = cfg.sample_rate_hz;
        let len = cfg.trial_len();
        let df = fs / len as f64;
        let half = (len / 2) as i64;
        let index = |k: i64| k.rem_euclid(len as i64) as usize;
        let freq_of = |i: usize| {
            let k = i as i64;
            (if k >= half { k - len as i64 } else { k }) as f64 * df
        };

        let mut entries: Vec<f64> = analysis.matrix.cells().map(|c| analysis.matrix.get(c)).collect();
        entries.sort_by(f64::total_cmp);
        entries.dedup_by(|a, b| (*a - *b).abs() <= config.coincidence_tol_hz);

        let reach = b + cfg.guard_factor * b;
        let mut on = vec![false; len];
        for &f in &entries {
            let lo = ((f - reach) / df).ceil().max(-(half as f64)) as i64;
            let hi = ((f + reach) / df).floor().min((half - 1) as f64) as i64;
            for k in lo..=hi {
                on[index(k)] = true;
            }
        }
        let active = (0..len)
            .filter(|&i| on[i])
            .map(|i| (i, (config.energy(freq_of(i)).max(0.0) * df / 4.0).sqrt()))
            .collect();

        let mut bands = Vec::new();
        for spec in squeezers {
            let nearest_other = entries
                .iter()
                .map(|f| (f - spec.ref_offset_hz).abs())
                .filter(|&d| d > config.coincidence_tol_hz)
                .fold(f64::INFINITY, f64::min);
            let halfwidth = reach.min(nearest_other - b);
            let twice = 2.0 * spec.ref_offset_hz / df;
            let k_sum = twice.round();
            if (twice - k_sum).abs() > 1e-6 {
                return Err(Error::MisalignedSqueezer {
                    ref_offset_hz: spec.ref_offset_hz,
                    spacing_hz: df,
                });
            }
            let k_sum = k_sum as i64;
            let first = k_sum.div_euclid(2) + k_sum.rem_euclid(2);
            let last = ((spec.ref_offset_hz + halfwidth) / df).floor() as i64;
            let pairs = (first..=last)
                .map(|up| (index(up), index(k_sum - up)))
                .filter(|&(u, l)| on[u] && on[l])
                .collect();
            bands.push(SqueezeBand {
                transfer: pure_squeeze_transfers(spec, halfwidth),
                pairs,
            });
        }

        Ok(Self {
            trial_len: len,
            sample_rate_hz: fs,
            seed: cfg.seed,
            active,
            bands,
            components: scheme.components().to_vec(),
            demods: demods.to_vec(),
            fft: FftPlanner::new().plan_fft_forward(len),
        })
    }

    pub fn trial_len(&self) -> usize {
        self.trial_len
    }

    /// Vacuum amplitudes of one trial on the record's frequency grid.
    fn vacuum(&self, trial: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        let mut q = vec![Complex64::new(0.0, 0.0); self.trial_len];
        let norm = std::f64::consts::FRAC_1_SQRT_2;
        for &(i, scale) in &self.active {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            q[i] = Complex64::new(re, im) * (scale * norm);
        }
        for band in &self.bands {
            let t = &band.transfer;
            let input: Vec<(Complex64, Complex64)> =
                band.pairs.iter().map(|&(u, l)| (q[u], q[l])).collect();
            for (&(u, l), &(qu, ql)) in band.pairs.iter().zip(&input) {
                let (su, sl_conj) = t.apply(qu, ql.conj());
                q[u] = su;
                if l != u {
                    q[l] = sl_conj.conj();
                }
            }
        }
        q
    }

    /// Demodulated photocurrent of one trial.
    pub fn trial(&self, trial: u64) -> Vec<f64> {
        let mut field = self.vacuum(trial);
        // Q(t_n) = sum_k q_k e^{-2 pi i k n / L}
        self.fft.process(&mut field);

        let fs = self.sample_rate_hz;
        let carriers: Vec<(f64, Complex64)> = self
            .components
            .iter()
            .map(|c| (c.offset_hz / fs, c.amplitude.conj()))
            .collect();
        let mixers: Vec<(f64, f64)> = self
            .demods
            .iter()
            .map(|d| (d.freq_hz / fs, d.phase_rad))
            .collect();

        field
            .iter()
            .enumerate()
            .map(|(n, &q)| {
                let n = n as f64;
                let beat: Complex64 = carriers
                    .iter()
                    .map(|&(ratio, cc)| cc * Complex64::from_polar(1.0, TAU * (ratio * n).fract()))
                    .sum();
                let current = 2.0 * (beat * q).re;
                mixers.iter().fold(current, |acc, &(ratio, phase)| {
                    acc * (TAU * (ratio * n).fract() + phase).cos()
                })
            })
            .collect()
    }
}

/// All trial records of the setup, in trial order.
pub fn synthesize_current(
    scheme: &Scheme,
    demods: &[DemodStage],
    squeezers: &[SqueezerSpec],
    cfg: &OracleConfig,
) -> Result<Vec<Vec<f64>>> {
    let synth = Synthesizer::new(scheme, demods, squeezers, cfg)?;
    Ok((0..cfg.n_trials as u64).map(|t| synth.trial(t)).collect())
}
