//! On-disk description of a detection setup.
//!
//! JSON is the normative format; files ending in `.toml` are read with the
//! same schema. Angles are radians unless the caller asks for degrees.

use std::path::Path;

use hetspec_core::spectrum::DEFAULT_GRID_POINTS;
use hetspec_core::{
    uniform_grid, validate_scheme, ClassicalComponent, DemodStage, DetectionConfig, EnergyTable,
    Scheme, SqueezerSpec,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    pub reference_hz: f64,
    pub bandwidth_hz: f64,
    pub components: Vec<ComponentEntry>,
    #[serde(default)]
    pub demodulations: Vec<DemodStage>,
    #[serde(default)]
    pub squeezers: Vec<SqueezerSpec>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentEntry {
    pub offset_hz: f64,
    pub amplitude: Amplitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Cartesian(Cartesian),
    Polar(Polar),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cartesian {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polar {
    pub power_w: f64,
    pub phase_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyKnot {
    pub offset_hz: f64,
    pub energy_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Options {
    pub narrowband: bool,
    pub normalized_units: bool,
    pub coincidence_tol_hz: f64,
    pub rectifier_equivalent: bool,
    pub grid_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_energy_override: Option<Vec<EnergyKnot>>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            narrowband: false,
            normalized_units: false,
            coincidence_tol_hz: hetspec_core::model::DEFAULT_COINCIDENCE_TOL_HZ,
            rectifier_equivalent: false,
            grid_points: DEFAULT_GRID_POINTS,
            noise_energy_override: None,
        }
    }
}

/// A parsed and validated setup, ready for the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub scheme: Scheme,
    pub demods: Vec<DemodStage>,
    pub squeezers: Vec<SqueezerSpec>,
    pub grid: Vec<f64>,
}

impl SchemeFile {
    pub fn parse(text: &str, toml_syntax: bool) -> Result<Self, CliError> {
        if toml_syntax {
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
        } else {
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let toml_syntax = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        Self::parse(&text, toml_syntax)
    }

    /// Reinterprets every phase in the file as degrees.
    pub fn degrees_to_radians(mut self) -> Self {
        for c in &mut self.components {
            if let Amplitude::Polar(p) = &mut c.amplitude {
                p.phase_rad = p.phase_rad.to_radians();
            }
        }
        for d in &mut self.demodulations {
            d.phase_rad = d.phase_rad.to_radians();
        }
        for s in &mut self.squeezers {
            s.phi_rad = s.phi_rad.to_radians();
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scheme file serializes")
    }

    pub fn setup(&self) -> Result<Setup, CliError> {
        let o = &self.options;
        let mut config = DetectionConfig::new(self.reference_hz, self.bandwidth_hz)
            .narrowband(o.narrowband)
            .normalized(o.normalized_units);
        config.coincidence_tol_hz = o.coincidence_tol_hz;
        config.rectifier_equivalent = o.rectifier_equivalent;
        config.noise_energy_override = o
            .noise_energy_override
            .as_ref()
            .map(|knots| EnergyTable::new(knots.iter().map(|k| (k.offset_hz, k.energy_j)).collect()))
            .transpose()?;

        let components: Vec<ClassicalComponent> = self
            .components
            .iter()
            .map(|c| match c.amplitude {
                Amplitude::Cartesian(Cartesian { re, im }) => {
                    ClassicalComponent::new(c.offset_hz, Complex64::new(re, im))
                }
                Amplitude::Polar(Polar { power_w, phase_rad }) => {
                    ClassicalComponent::from_power(c.offset_hz, power_w, phase_rad)
                }
            })
            .collect();
        let scheme = validate_scheme(&components, &config)?;
        if o.grid_points == 0 {
            return Err(CliError::Config("grid_points must be at least 1".into()));
        }
        Ok(Setup {
            scheme,
            demods: self.demodulations.clone(),
            squeezers: self.squeezers.clone(),
            grid: uniform_grid(self.bandwidth_hz, o.grid_points),
        })
    }

    /// Inverse of [`SchemeFile::setup`]: components are written back in their
    /// original order with Cartesian amplitudes.
    pub fn from_setup(setup: &Setup) -> Self {
        let scheme = &setup.scheme;
        let config = scheme.config();
        let mut components = vec![None; scheme.len()];
        for (n, c) in scheme.components().iter().enumerate() {
            components[scheme.original_index(n)] = Some(ComponentEntry {
                offset_hz: c.offset_hz,
                amplitude: Amplitude::Cartesian(Cartesian {
                    re: c.amplitude.re,
                    im: c.amplitude.im,
                }),
            });
        }
        Self {
            reference_hz: config.f0_hz,
            bandwidth_hz: config.bandwidth_hz,
            components: components.into_iter().map(|c| c.expect("permutation")).collect(),
            demodulations: setup.demods.clone(),
            squeezers: setup.squeezers.clone(),
            options: Options {
                narrowband: config.narrowband,
                normalized_units: config.normalized_units,
                coincidence_tol_hz: config.coincidence_tol_hz,
                rectifier_equivalent: config.rectifier_equivalent,
                grid_points: setup.grid.len(),
                noise_energy_override: config.noise_energy_override.as_ref().map(|t| {
                    t.knots()
                        .iter()
                        .map(|&(offset_hz, energy_j)| EnergyKnot { offset_hz, energy_j })
                        .collect()
                }),
            },
        }
    }
}
