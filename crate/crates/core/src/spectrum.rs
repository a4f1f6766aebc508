//! Analytic quantum-noise spectrum of the demodulated photocurrent.
//!
//! Every matrix cell `(n, d)` carries the effective amplitude
//! `a_nd = c_n e^{-i phi(d)}`. A coincidence group adds the conjugated
//! amplitudes coherently before squaring; a unique entry contributes on its
//! own. With `M` demodulations each contribution carries a factor `1/4^M`.
//!
//! Squeezed entries go through the two-sideband form
//!
//! ```text
//! S = 1/(2 4^M) [ |X|^2 E(F_g + F) + |Y|^2 E(F_g - F) ]
//! X = sum_j (a_j* t00 + a_j t10),   Y = sum_j (a_j* t01 + a_j t11)
//! ```
//!
//! where `E` is the noise energy per quantum. For vacuum, `E(F_g ± F) =
//! h (f0 + F_g)(1 ± F / (f0 + F_g))`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Cell, Error, Result};
use crate::freq_matrix::{
    build_frequency_matrix, demod_phase, group_entries, CoincidenceGroup, FrequencyMatrix, Grouping,
};
use crate::model::{
    validate_squeezers, ClassicalComponent, DemodStage, DetectionConfig, Scheme, SqueezerSpec,
    PLANCK,
};
use crate::squeeze::{pure_squeeze_transfers, TransferSet};

pub const DEFAULT_GRID_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectrumUnit {
    /// W^2/Hz.
    #[serde(rename = "W^2/Hz")]
    Si,
    /// Units of `h f0`.
    #[serde(rename = "h*f0")]
    Normalized,
}

impl SpectrumUnit {
    pub fn of(config: &DetectionConfig) -> Self {
        if config.normalized_units {
            Self::Normalized
        } else {
            Self::Si
        }
    }
}

/// One term of the sum, sampled on the result grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contribution {
    pub label: String,
    pub cells: Vec<Cell>,
    pub freq_hz: f64,
    pub squeezed: bool,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub freqs_hz: Vec<f64>,
    pub values: Vec<f64>,
    pub unit: SpectrumUnit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakdown: Option<Vec<Contribution>>,
}

impl SpectrumResult {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `n` uniformly spaced points on `[0, bandwidth_hz]`.
pub fn uniform_grid(bandwidth_hz: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| bandwidth_hz * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub fn validate_grid(grid: &[f64], bandwidth_hz: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if grid.iter().any(|&f| !(0.0..=bandwidth_hz).contains(&f)) {
        return Err(Error::InvalidGrid(format!(
            "grid points must lie in [0, {bandwidth_hz}] Hz"
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Everything a single contribution needs to be evaluated.
#[derive(Debug, Clone, Copy)]
pub struct Context<'a> {
    pub config: &'a DetectionConfig,
    pub components: &'a [ClassicalComponent],
    pub demods: &'a [DemodStage],
    pub matrix: &'a FrequencyMatrix,
}

impl<'a> Context<'a> {
    pub fn new(scheme: &'a Scheme, demods: &'a [DemodStage], matrix: &'a FrequencyMatrix) -> Self {
        Self {
            config: scheme.config(),
            components: scheme.components(),
            demods,
            matrix,
        }
    }

    /// `a_nd = c_n e^{-i phi(d)}`.
    pub fn effective_amplitude(&self, (n, d): Cell) -> Complex64 {
        let phi = demod_phase(d, self.demods).expect("column index within matrix");
        self.components[n].amplitude * Complex64::from_polar(1.0, -phi)
    }

    fn demod_weight(&self) -> f64 {
        0.25f64.powi(self.demods.len() as i32)
    }

    /// `1/2 [|x|^2 E(center + F) + |y|^2 E(center - F)]`, before demodulation
    /// weighting.
    fn two_sideband(&self, x: Complex64, y: Complex64, center_hz: f64, f: f64) -> f64 {
        0.5 * (x.norm_sqr() * self.config.energy(center_hz + f)
            + y.norm_sqr() * self.config.energy(center_hz - f))
    }

    fn squeezed_sum(&self, amps: &[Complex64], t: &TransferSet, center_hz: f64, f: f64) -> f64 {
        let (up, down) = (center_hz + f, center_hz - f);
        let (t00, t10) = (t.t00_at(up), t.t10_at(up));
        let (t01, t11) = (t.t01_at(down), t.t11_at(down));
        let x: Complex64 = amps.iter().map(|a| a.conj() * t00 + a * t10).sum();
        let y: Complex64 = amps.iter().map(|a| a.conj() * t01 + a * t11).sum();
        self.two_sideband(x, y, center_hz, f)
    }
}

/// Contribution of a unique matrix entry at current frequency `f`.
pub fn unique_contribution(cell: Cell, f: f64, transfer: Option<&TransferSet>, ctx: &Context) -> f64 {
    let fnd = ctx.matrix.get(cell);
    let raw = match transfer {
        None => ctx.config.energy(fnd) * ctx.components[cell.0].power(),
        Some(t) => ctx.squeezed_sum(&[ctx.effective_amplitude(cell)], t, fnd, f),
    };
    raw * ctx.demod_weight()
}

/// Contribution of a coincidence group at current frequency `f`.
pub fn group_contribution(
    group: &CoincidenceGroup,
    f: f64,
    transfer: Option<&TransferSet>,
    ctx: &Context,
) -> Result<f64> {
    let fg = group.freq_hz;
    let amps: Vec<Complex64> = group
        .members
        .iter()
        .map(|&c| ctx.effective_amplitude(c))
        .collect();
    let raw = match transfer {
        None => {
            let coherent: Complex64 = amps.iter().map(|a| a.conj()).sum();
            ctx.config.energy(fg) * coherent.norm_sqr()
        }
        Some(t) => {
            if (t.ref_offset_hz - fg).abs() > ctx.config.coincidence_tol_hz {
                return Err(Error::SqueezerNotCentered {
                    ref_offset_hz: t.ref_offset_hz,
                    group_hz: fg,
                });
            }
            ctx.squeezed_sum(&amps, t, fg, f)
        }
    };
    Ok(raw * ctx.demod_weight())
}

/// Matrix, coincidence groups and squeezer bindings of one detection setup.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub matrix: FrequencyMatrix,
    pub grouping: Grouping,
    pub group_transfers: Vec<Option<TransferSet>>,
    pub unique_transfers: Vec<Option<TransferSet>>,
}

impl Analysis {
    /// Builds the matrix and binds each squeezer to the group or unique entry
    /// at its reference frequency. Transfers are valid over `ref ± B`.
    pub fn new(scheme: &Scheme, demods: &[DemodStage], squeezers: &[SqueezerSpec]) -> Result<Self> {
        let b = scheme.config().bandwidth_hz;
        Self::with_transfers(scheme, demods, squeezers, |s| pure_squeeze_transfers(s, b))
    }

    pub fn with_transfers(
        scheme: &Scheme,
        demods: &[DemodStage],
        squeezers: &[SqueezerSpec],
        make: impl Fn(&SqueezerSpec) -> TransferSet,
    ) -> Result<Self> {
        validate_squeezers(squeezers)?;
        let matrix = build_frequency_matrix(scheme, demods)?;
        let grouping = group_entries(&matrix, scheme.config())?;
        let tol = scheme.config().coincidence_tol_hz;

        let mut group_owner: Vec<Option<usize>> = vec![None; grouping.groups.len()];
        let mut unique_owner: Vec<Option<usize>> = vec![None; grouping.uniques.len()];
        for (s, spec) in squeezers.iter().enumerate() {
            let hits = |f: f64| (f - spec.ref_offset_hz).abs() <= tol;
            let slot = if let Some(g) = grouping.groups.iter().position(|g| hits(g.freq_hz)) {
                &mut group_owner[g]
            } else if let Some(u) = grouping.uniques.iter().position(|&c| hits(matrix.get(c))) {
                &mut unique_owner[u]
            } else {
                return Err(Error::UnmatchedSqueezer(s));
            };
            if let Some(prev) = slot.replace(s) {
                return Err(Error::MultipleSqueezers(prev, s));
            }
        }

        let bind = |owner: Vec<Option<usize>>| -> Vec<Option<TransferSet>> {
            owner.into_iter().map(|o| o.map(|s| make(&squeezers[s]))).collect()
        };
        Ok(Self {
            group_transfers: bind(group_owner),
            unique_transfers: bind(unique_owner),
            matrix,
            grouping,
        })
    }

    /// Evaluates the summed spectrum on `grid`.
    pub fn spectrum(
        &self,
        scheme: &Scheme,
        demods: &[DemodStage],
        grid: &[f64],
        breakdown: bool,
    ) -> Result<SpectrumResult> {
        let config = scheme.config();
        validate_grid(grid, config.bandwidth_hz)?;
        let ctx = Context::new(scheme, demods, &self.matrix);
        let scale = config.output_scale(demods.len());

        let mut terms = Vec::with_capacity(self.grouping.groups.len() + self.grouping.uniques.len());
        for (g, t) in self.grouping.groups.iter().zip(&self.group_transfers) {
            let values = grid
                .iter()
                .map(|&f| group_contribution(g, f, t.as_ref(), &ctx).map(|v| v * scale))
                .collect::<Result<Vec<_>>>()?;
            let label = g
                .members
                .iter()
                .map(|(n, d)| format!("{n}.{d}"))
                .collect::<Vec<_>>()
                .join("+");
            terms.push(Contribution {
                label: format!("g{label}"),
                cells: g.members.clone(),
                freq_hz: g.freq_hz,
                squeezed: t.is_some(),
                values,
            });
        }
        for (&cell, t) in self.grouping.uniques.iter().zip(&self.unique_transfers) {
            let values = grid
                .iter()
                .map(|&f| unique_contribution(cell, f, t.as_ref(), &ctx) * scale)
                .collect();
            terms.push(Contribution {
                label: format!("u{}.{}", cell.0, cell.1),
                cells: vec![cell],
                freq_hz: self.matrix.get(cell),
                squeezed: t.is_some(),
                values,
            });
        }

        let values = (0..grid.len())
            .map(|i| terms.iter().map(|t| t.values[i]).sum())
            .collect();
        Ok(SpectrumResult {
            freqs_hz: grid.to_vec(),
            values,
            unit: SpectrumUnit::of(config),
            breakdown: breakdown.then_some(terms),
        })
    }
}

/// Total single-sided PSD on `grid`: the sum over all coincidence groups and
/// unique entries.
pub fn total_spectrum(
    scheme: &Scheme,
    demods: &[DemodStage],
    squeezers: &[SqueezerSpec],
    grid: &[f64],
    breakdown: bool,
) -> Result<SpectrumResult> {
    Analysis::new(scheme, demods, squeezers)?.spectrum(scheme, demods, grid, breakdown)
}

/// Shot noise of a single component of power `p0_w` whose band sits near,
/// but not on, a squeezer reference: `P0 h f0 cosh 2r`. Diagnostic only.
pub fn off_center_penalty(p0_w: f64, spec: &SqueezerSpec, config: &DetectionConfig) -> f64 {
    p0_w * PLANCK * config.f0_hz * (2.0 * spec.r).cosh() * config.output_scale(0)
}

/// Phases minimising a two-member group under one demodulation and pure
/// squeezing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalPhases {
    pub squeeze_phase: f64,
    pub demod_phase: f64,
    pub alpha: f64,
    pub delta_alpha: f64,
}

/// `c1` is the amplitude of the member in column 1 (`F + D`), `c2` the one
/// in column 0 (`F - D`).
pub fn optimal_phases(c1: Complex64, c2: Complex64) -> Result<OptimalPhases> {
    if c1 == Complex64::new(0.0, 0.0) || c2 == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroAmplitude);
    }
    let delta_alpha = c2.arg() - c1.arg();
    let demod_phase = (std::f64::consts::PI - delta_alpha) / 2.0;
    let alpha = (c1 * Complex64::from_polar(1.0, -demod_phase)
        + c2 * Complex64::from_polar(1.0, demod_phase))
    .arg();
    Ok(OptimalPhases {
        squeeze_phase: std::f64::consts::FRAC_PI_2 + alpha,
        demod_phase,
        alpha,
        delta_alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_scheme;
    use std::f64::consts::PI;

    const F0: f64 = 2.8e14;

    fn cfg(b: f64) -> DetectionConfig {
        DetectionConfig::new(F0, b)
    }

    fn hf0() -> f64 {
        PLANCK * F0
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn single_component_is_flat() {
        let s = validate_scheme(
            &[ClassicalComponent::from_power(0.0, 2.5, 0.3)],
            &cfg(1000.0),
        )
        .unwrap();
        let r = total_spectrum(&s, &[], &[], &uniform_grid(1000.0, 11), false).unwrap();
        for v in &r.values {
            assert!(rel(*v, 2.5 * hf0()) < 1e-12);
        }
        assert_eq!(r.unit, SpectrumUnit::Si);
    }

    #[test]
    fn equal_amplitudes_zero_phase_group() {
        let s = validate_scheme(
            &[
                ClassicalComponent::from_power(0.0, 1.0, 0.0),
                ClassicalComponent::from_power(30e6, 1.0, 0.0),
            ],
            &cfg(1000.0).narrowband(true),
        )
        .unwrap();
        let d = [DemodStage::new(15e6, 0.0)];
        let a = Analysis::new(&s, &d, &[]).unwrap();
        let ctx = Context::new(&s, &d, &a.matrix);
        let g = group_contribution(&a.grouping.groups[0], 10.0, None, &ctx).unwrap();
        assert!(rel(g, hf0()) < 1e-12);
    }

    #[test]
    fn unmatched_and_duplicate_squeezers() {
        let s = validate_scheme(&[ClassicalComponent::from_power(0.0, 1.0, 0.0)], &cfg(1000.0))
            .unwrap();
        let d = [DemodStage::new(15e6, 0.0)];
        let off = SqueezerSpec::new(15e6 + 5000.0, 1.0, 0.0);
        assert_eq!(
            Analysis::new(&s, &d, &[off]).unwrap_err(),
            Error::UnmatchedSqueezer(0)
        );
        let on = SqueezerSpec::new(15e6, 1.0, 0.0);
        assert_eq!(
            Analysis::new(&s, &d, &[on, on]).unwrap_err(),
            Error::MultipleSqueezers(0, 1)
        );
        let a = Analysis::new(&s, &d, &[on]).unwrap();
        assert!(a.unique_transfers[1].is_some());
        assert!(a.unique_transfers[0].is_none());
    }

    #[test]
    fn group_rejects_off_centre_transfer() {
        let s = validate_scheme(
            &[
                ClassicalComponent::from_power(0.0, 1.0, 0.0),
                ClassicalComponent::from_power(30e6, 1.0, 0.0),
            ],
            &cfg(1000.0),
        )
        .unwrap();
        let d = [DemodStage::new(15e6, 0.0)];
        let a = Analysis::new(&s, &d, &[]).unwrap();
        let ctx = Context::new(&s, &d, &a.matrix);
        let t = pure_squeeze_transfers(&SqueezerSpec::new(15e6 + 10.0, 0.5, 0.0), 1000.0);
        assert!(matches!(
            group_contribution(&a.grouping.groups[0], 0.0, Some(&t), &ctx),
            Err(Error::SqueezerNotCentered { .. })
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(validate_grid(&[], 10.0).is_err());
        assert!(validate_grid(&[0.0, 11.0], 10.0).is_err());
        assert!(validate_grid(&[1.0, 1.0], 10.0).is_err());
        assert!(validate_grid(&[0.0, 5.0, 10.0], 10.0).is_ok());
        assert_eq!(uniform_grid(10.0, 3), vec![0.0, 5.0, 10.0]);
    }

    #[test]
    fn rectifier_and_normalised_scaling() {
        let comps = [
            ClassicalComponent::from_power(0.0, 1.0, 0.0),
            ClassicalComponent::from_power(30e6, 2.0, 0.4),
        ];
        let d = [DemodStage::new(15e6, 0.2), DemodStage::new(1e6, 0.1)];
        let base = validate_scheme(&comps, &cfg(1000.0)).unwrap();
        let grid = uniform_grid(1000.0, 5);
        let plain = total_spectrum(&base, &d, &[], &grid, false).unwrap();

        let mut c = cfg(1000.0);
        c.rectifier_equivalent = true;
        let rect = total_spectrum(&base.with_config(c).unwrap(), &d, &[], &grid, false).unwrap();
        let k = (4.0 / PI).powi(4);
        for (a, b) in plain.values.iter().zip(&rect.values) {
            assert!(rel(*b, a * k) < 1e-12);
        }

        let norm = total_spectrum(
            &base.with_config(cfg(1000.0).normalized(true)).unwrap(),
            &d,
            &[],
            &grid,
            false,
        )
        .unwrap();
        assert_eq!(norm.unit, SpectrumUnit::Normalized);
        for (a, b) in plain.values.iter().zip(&norm.values) {
            assert!(rel(*b, a / hf0()) < 1e-12);
        }
    }

    #[test]
    fn off_center_penalty_values() {
        let c = cfg(1000.0);
        let sq = |r| SqueezerSpec::new(5000.0, r, 0.0);
        assert!(rel(off_center_penalty(1.0, &sq(0.0), &c), hf0()) < 1e-15);
        assert!(rel(off_center_penalty(1.0, &sq(1.0), &c), 3.762_195_691_083_631 * hf0()) < 1e-14);
    }

    #[test]
    fn optimal_phase_examples() {
        let one = Complex64::new(1.0, 0.0);
        let p = optimal_phases(one, one).unwrap();
        assert_eq!(p.delta_alpha, 0.0);
        assert!((p.demod_phase - PI / 2.0).abs() < 1e-15);

        let p = optimal_phases(one, Complex64::new(0.0, 1.0)).unwrap();
        assert!((p.delta_alpha - PI / 2.0).abs() < 1e-15);
        assert!((p.demod_phase - PI / 4.0).abs() < 1e-15);

        assert_eq!(
            optimal_phases(one, Complex64::new(0.0, 0.0)),
            Err(Error::ZeroAmplitude)
        );
    }
}
