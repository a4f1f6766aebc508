//! Domain types shared by the matrix builder, the spectrum evaluator and the
//! Monte Carlo oracle.
//!
//! Frequencies are stored as offsets from the optical reference `f0`, in Hz.
//! Classical amplitudes are complex numbers in sqrt(W), so `|c|^2` is the
//! optical power in W. Photodiode responsivity is taken as 1, so all spectra
//! are light-power spectral densities (W^2/Hz).
//!
//! The linearisation that drops terms quadratic in the vacuum amplitudes holds
//! when every component carries much more than `h f0 / tau` of power for the
//! averaging time `tau`. That time is not modelled here.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planck constant, SI-exact value (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Default tolerance for treating two matrix entries as the same frequency.
pub const DEFAULT_COINCIDENCE_TOL_HZ: f64 = 1e-3;

/// `bandwidth_hz` must stay below `f0_hz / BANDWIDTH_RATIO`.
pub const BANDWIDTH_RATIO: f64 = 1e3;

/// One discrete classical field line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalComponent {
    pub offset_hz: f64,
    pub amplitude: Complex64,
}

impl ClassicalComponent {
    pub fn new(offset_hz: f64, amplitude: Complex64) -> Self {
        Self {
            offset_hz,
            amplitude,
        }
    }

    /// Builds `c = sqrt(P) e^{i theta}`.
    pub fn from_power(offset_hz: f64, power_w: f64, phase_rad: f64) -> Self {
        Self::new(offset_hz, Complex64::from_polar(power_w.sqrt(), phase_rad))
    }

    pub fn power(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

/// One harmonic demodulation `cos(2 pi D t + phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemodStage {
    pub freq_hz: f64,
    pub phase_rad: f64,
}

impl DemodStage {
    pub fn new(freq_hz: f64, phase_rad: f64) -> Self {
        Self { freq_hz, phase_rad }
    }
}

pub fn validate_demods(demods: &[DemodStage]) -> Result<()> {
    for (i, d) in demods.iter().enumerate() {
        if !(d.freq_hz > 0.0 && d.freq_hz.is_finite() && d.phase_rad.is_finite()) {
            return Err(Error::InvalidDemod(i));
        }
    }
    Ok(())
}

/// Squeezing with factor `r` and phase `phi` about `f0 + ref_offset_hz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezerSpec {
    pub ref_offset_hz: f64,
    pub r: f64,
    pub phi_rad: f64,
}

impl SqueezerSpec {
    pub fn new(ref_offset_hz: f64, r: f64, phi_rad: f64) -> Self {
        Self {
            ref_offset_hz,
            r,
            phi_rad,
        }
    }
}

pub fn validate_squeezers(squeezers: &[SqueezerSpec]) -> Result<()> {
    for (i, s) in squeezers.iter().enumerate() {
        if !(s.r >= 0.0 && s.r.is_finite() && s.phi_rad.is_finite() && s.ref_offset_hz.is_finite())
        {
            return Err(Error::InvalidSqueezer(i));
        }
    }
    Ok(())
}

/// Piecewise-linear noise energy (J) as a function of sideband offset (Hz).
///
/// Replaces the vacuum energy `h f` when modelling stationary technical noise.
/// Values beyond the first and last knot are held constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTable {
    knots: Vec<(f64, f64)>,
}

impl EnergyTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidConfig("energy table is empty".into()));
        }
        for (i, &(f, e)) in knots.iter().enumerate() {
            if !f.is_finite() || !(e >= 0.0 && e.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "energy table knot {i} must have a finite offset and a finite, nonnegative energy"
                )));
            }
            if i > 0 && f <= knots[i - 1].0 {
                return Err(Error::InvalidConfig(
                    "energy table offsets must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, offset_hz: f64) -> f64 {
        let k = &self.knots;
        if offset_hz <= k[0].0 {
            return k[0].1;
        }
        if offset_hz >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let hi = k.partition_point(|&(f, _)| f <= offset_hz);
        let (f_lo, e_lo) = k[hi - 1];
        let (f_hi, e_hi) = k[hi];
        let w = (offset_hz - f_lo) / (f_hi - f_lo);
        e_lo + w * (e_hi - e_lo)
    }
}

/// Detection parameters shared by every stage of the calculation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub f0_hz: f64,
    pub bandwidth_hz: f64,
    pub coincidence_tol_hz: f64,
    /// Replace every vacuum energy `h (f0 + F)` by `h f0`.
    pub narrowband: bool,
    /// Report spectra in units of `h f0`.
    pub normalized_units: bool,
    /// Scale the final spectrum by `(4/pi)^(2M)` to quote the rectifying
    /// demodulator equivalent.
    pub rectifier_equivalent: bool,
    pub noise_energy_override: Option<EnergyTable>,
}

impl DetectionConfig {
    pub fn new(f0_hz: f64, bandwidth_hz: f64) -> Self {
        Self {
            f0_hz,
            bandwidth_hz,
            coincidence_tol_hz: DEFAULT_COINCIDENCE_TOL_HZ,
            narrowband: false,
            normalized_units: false,
            rectifier_equivalent: false,
            noise_energy_override: None,
        }
    }

    pub fn narrowband(mut self, on: bool) -> Self {
        self.narrowband = on;
        self
    }

    pub fn normalized(mut self, on: bool) -> Self {
        self.normalized_units = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f0_hz > 0.0 && self.f0_hz.is_finite()) {
            return Err(Error::InvalidConfig("reference frequency must be positive".into()));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(Error::InvalidConfig("bandwidth must be positive".into()));
        }
        if !(self.coincidence_tol_hz >= 0.0 && self.coincidence_tol_hz < self.bandwidth_hz) {
            return Err(Error::InvalidConfig(
                "coincidence tolerance must lie in [0, bandwidth)".into(),
            ));
        }
        if self.bandwidth_hz >= self.f0_hz / BANDWIDTH_RATIO {
            return Err(Error::BandwidthTooLarge {
                bandwidth_hz: self.bandwidth_hz,
                f0_hz: self.f0_hz,
            });
        }
        Ok(())
    }

    /// Energy per noise quantum at sideband offset `offset_hz`, in J.
    pub fn energy(&self, offset_hz: f64) -> f64 {
        if let Some(table) = &self.noise_energy_override {
            table.eval(offset_hz)
        } else if self.narrowband {
            PLANCK * self.f0_hz
        } else {
            PLANCK * (self.f0_hz + offset_hz)
        }
    }

    /// Multiplier applied to every reported spectral value.
    pub fn output_scale(&self, n_demods: usize) -> f64 {
        let mut scale = 1.0;
        if self.normalized_units {
            scale /= PLANCK * self.f0_hz;
        }
        if self.rectifier_equivalent {
            scale *= (4.0 / std::f64::consts::PI).powi(2 * n_demods as i32);
        }
        scale
    }
}

/// A validated set of classical components, sorted by offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Scheme {
    components: Vec<ClassicalComponent>,
    original_index: Vec<usize>,
    config: DetectionConfig,
}

impl Scheme {
    pub fn components(&self) -> &[ClassicalComponent] {
        &self.components
    }

    pub fn config(&self) -> &DetectionConfig {
        &self.config
    }

    /// Position of canonical row `n` in the list originally passed in.
    pub fn original_index(&self, n: usize) -> usize {
        self.original_index[n]
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Same components with a replaced configuration, revalidated.
    pub fn with_config(&self, config: DetectionConfig) -> Result<Self> {
        let mut out = validate_scheme(&self.components, &config)?;
        out.original_index = self.original_index.clone();
        Ok(out)
    }
}

/// Checks component invariants and pairwise disjointness of the detection
/// bands `[F_i - B, F_i + B]`, then sorts components by offset.
pub fn validate_scheme(components: &[ClassicalComponent], config: &DetectionConfig) -> Result<Scheme> {
    if components.is_empty() {
        return Err(Error::EmptyScheme);
    }
    config.validate()?;
    for (i, c) in components.iter().enumerate() {
        let p = c.power();
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::NonPositivePower(i));
        }
        if !c.offset_hz.is_finite() || c.offset_hz <= -config.f0_hz {
            return Err(Error::NonPositiveFrequency(i));
        }
    }

    let mut order: Vec<usize> = (0..components.len()).collect();
    order.sort_by(|&a, &b| components[a].offset_hz.total_cmp(&components[b].offset_hz));

    // Sorted, so only neighbours can be the closest pair.
    let two_b = 2.0 * config.bandwidth_hz;
    for w in order.windows(2) {
        let gap = components[w[1]].offset_hz - components[w[0]].offset_hz;
        if gap < two_b {
            let (i, j) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::OverlappingComponents(i, j));
        }
    }

    Ok(Scheme {
        components: order.iter().map(|&i| components[i]).collect(),
        original_index: order,
        config: config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> DetectionConfig {
        DetectionConfig::new(2.8e14, 1000.0)
    }

    fn unit(offset: f64) -> ClassicalComponent {
        ClassicalComponent::new(offset, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn carrier_and_subcarrier_are_valid() {
        let s = validate_scheme(&[unit(0.0), unit(30e6)], &cfg()).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn single_component_is_valid() {
        assert!(validate_scheme(&[unit(5e6)], &cfg()).is_ok());
    }

    #[test]
    fn overlapping_bands_rejected() {
        let err = validate_scheme(&[unit(0.0), unit(1500.0)], &cfg()).unwrap_err();
        assert_eq!(err, Error::OverlappingComponents(0, 1));
        // exactly touching bands are fine
        assert!(validate_scheme(&[unit(0.0), unit(2000.0)], &cfg()).is_ok());
    }

    #[test]
    fn overlap_reports_original_indices() {
        let err = validate_scheme(&[unit(1500.0), unit(9e6), unit(0.0)], &cfg()).unwrap_err();
        assert_eq!(err, Error::OverlappingComponents(0, 2));
    }

    #[test]
    fn zero_power_and_bad_frequency_rejected() {
        let zero = ClassicalComponent::new(1e6, Complex64::new(0.0, 0.0));
        assert_eq!(
            validate_scheme(&[unit(0.0), zero], &cfg()).unwrap_err(),
            Error::NonPositivePower(1)
        );
        assert_eq!(
            validate_scheme(&[unit(-3e14)], &cfg()).unwrap_err(),
            Error::NonPositiveFrequency(0)
        );
        assert_eq!(validate_scheme(&[], &cfg()).unwrap_err(), Error::EmptyScheme);
    }

    #[test]
    fn bandwidth_must_be_small() {
        let c = DetectionConfig::new(1e6, 1000.0);
        assert!(matches!(
            validate_scheme(&[unit(0.0)], &c),
            Err(Error::BandwidthTooLarge { .. })
        ));
        let mut c = cfg();
        c.coincidence_tol_hz = 1000.0;
        assert!(matches!(validate_scheme(&[unit(0.0)], &c), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn sorted_with_original_indices() {
        let s = validate_scheme(&[unit(30e6), unit(-10e6), unit(0.0)], &cfg()).unwrap();
        let offs: Vec<f64> = s.components().iter().map(|c| c.offset_hz).collect();
        assert_eq!(offs, vec![-10e6, 0.0, 30e6]);
        assert_eq!(
            (0..3).map(|n| s.original_index(n)).collect::<Vec<_>>(),
            vec![1, 2, 0]
        );
    }

    #[test]
    fn power_phase_conversion() {
        let c = ClassicalComponent::from_power(0.0, 4.0, std::f64::consts::FRAC_PI_2);
        assert!((c.amplitude - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert!((c.power() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn energy_modes() {
        let mut c = cfg();
        assert_eq!(c.energy(1e6), PLANCK * (2.8e14 + 1e6));
        c.narrowband = true;
        assert_eq!(c.energy(1e6), PLANCK * 2.8e14);
        c.noise_energy_override = Some(EnergyTable::new(vec![(0.0, 1.0), (10.0, 3.0)]).unwrap());
        assert_eq!(c.energy(5.0), 2.0);
        assert_eq!(c.energy(-1.0), 1.0);
        assert_eq!(c.energy(20.0), 3.0);
    }

    #[test]
    fn energy_table_rejects_bad_knots() {
        assert!(EnergyTable::new(vec![]).is_err());
        assert!(EnergyTable::new(vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(EnergyTable::new(vec![(1.0, -1.0)]).is_err());
    }

    #[test]
    fn demod_and_squeezer_validation() {
        assert_eq!(
            validate_demods(&[DemodStage::new(1.0, 0.0), DemodStage::new(0.0, 0.0)]),
            Err(Error::InvalidDemod(1))
        );
        assert_eq!(
            validate_squeezers(&[SqueezerSpec::new(0.0, -0.1, 0.0)]),
            Err(Error::InvalidSqueezer(0))
        );
    }
}
