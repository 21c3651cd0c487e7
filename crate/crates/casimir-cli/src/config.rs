//! Run configuration: a sectioned key-value file (TOML) plus flag
//! overrides; flags win over the file.

use casimir_core::constants::{ev_to_angular_frequency, nm_to_m, per_cm3_to_per_m3};
use casimir_core::{
    CarrierProperties, DielectricModel, Geometry, ScreeningChannels, ScreeningLength,
    ScreeningPlacement, ScreeningRule, ThermalConfiguration,
};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Toml(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub material: MaterialSection,
    pub geometry: GeometrySection,
    pub run: RunSection,
    #[serde(default)]
    pub entropy: Option<EntropySection>,
    #[serde(default)]
    pub compare: Option<CompareSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub model: String,
    #[serde(default)]
    pub plasma_frequency_ev: Option<f64>,
    #[serde(default)]
    pub relaxation_ev: Option<f64>,
    #[serde(default)]
    pub relaxation_exponent: Option<f64>,
    #[serde(default)]
    pub core_constant: Option<f64>,
    #[serde(default)]
    pub carrier_concentration_cm3: Option<f64>,
    #[serde(default)]
    pub fermi_energy_ev: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    #[serde(default)]
    pub gap_nm: Option<f64>,
    #[serde(default)]
    pub gap_range_nm: Option<GapRange>,
    #[serde(default)]
    pub sphere_radius_um: Option<f64>,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct GapRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub temperature_k: f64,
    #[serde(default)]
    pub screening: Option<String>,
    #[serde(default)]
    pub screening_length: Option<String>,
    #[serde(default)]
    pub screening_inverse_sq_m2: Option<f64>,
    #[serde(default)]
    pub screening_channels: Option<String>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropySection {
    pub temperatures_k: Vec<f64>,
    #[serde(default)]
    pub step_k: Option<f64>,
    #[serde(default)]
    pub verdict: bool,
    #[serde(default)]
    pub closed_form: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub dataset: PathBuf,
    pub kind: String,
}

/// Resolved run parameters after merging file and flags.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub base: ThermalConfiguration,
    pub gaps: Vec<f64>,
    pub tolerance: f64,
    pub entropy: Option<ResolvedEntropy>,
    pub compare: Option<ResolvedCompare>,
}

#[derive(Debug, Clone)]
pub struct ResolvedEntropy {
    pub temperatures: Vec<f64>,
    pub step: Option<f64>,
    pub verdict: bool,
    pub closed_form: bool,
}

#[derive(Debug, Clone)]
pub struct ResolvedCompare {
    pub dataset: PathBuf,
    pub kind: casimir_core::compare::DatasetKind,
}

/// Flag overrides (flags win over the file).
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub tolerance: Option<f64>,
    pub screening: Option<String>,
    pub model: Option<String>,
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<ResolvedRun, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: FileConfig = toml::from_str(&text).map_err(|e| ConfigError::Toml(e.to_string()))?;
    resolve(&file, overrides)
}

pub fn resolve(file: &FileConfig, overrides: &Overrides) -> Result<ResolvedRun, ConfigError> {
    let model_name = overrides
        .model
        .as_deref()
        .unwrap_or(file.material.model.as_str());
    let need = |v: Option<f64>, key: &str| {
        v.ok_or_else(|| {
            ConfigError::Invalid(format!("material.{key} is required for model `{model_name}`"))
        })
    };
    let m = &file.material;
    let model = match model_name {
        "ideal" => DielectricModel::IdealMetal,
        "plasma" => DielectricModel::Plasma {
            plasma_frequency: ev_to_angular_frequency(need(
                m.plasma_frequency_ev,
                "plasma_frequency_ev",
            )?),
        },
        "drude" => DielectricModel::Drude {
            plasma_frequency: ev_to_angular_frequency(need(
                m.plasma_frequency_ev,
                "plasma_frequency_ev",
            )?),
            relaxation: ev_to_angular_frequency(need(m.relaxation_ev, "relaxation_ev")?),
            relaxation_exponent: m.relaxation_exponent.unwrap_or(0.0),
        },
        "drude-core" => DielectricModel::DrudeWithCore {
            core_constant: need(m.core_constant, "core_constant")?,
            plasma_frequency: ev_to_angular_frequency(need(
                m.plasma_frequency_ev,
                "plasma_frequency_ev",
            )?),
            relaxation: ev_to_angular_frequency(need(m.relaxation_ev, "relaxation_ev")?),
        },
        other => {
            return Err(ConfigError::Invalid(format!(
                "material.model must be one of ideal|plasma|drude|drude-core, got `{other}`"
            )))
        }
    };
    let carriers = CarrierProperties {
        concentration: per_cm3_to_per_m3(m.carrier_concentration_cm3.unwrap_or(5.9e22)),
        fermi_energy: m
            .fermi_energy_ev
            .map(|e| e * casimir_core::constants::EV),
        core_constant: m.core_constant.unwrap_or(1.0),
    };
    let placement = match overrides
        .screening
        .as_deref()
        .or(file.run.screening.as_deref())
        .unwrap_or("none")
    {
        "none" => ScreeningPlacement::None,
        "n0" => ScreeningPlacement::ZeroFrequencyOnly,
        "all" => ScreeningPlacement::AllTerms,
        other => {
            return Err(ConfigError::Invalid(format!(
                "screening must be none|n0|all, got `{other}`"
            )))
        }
    };
    let length = match file.run.screening_length.as_deref().unwrap_or("debye-huckel") {
        "debye-huckel" => ScreeningLength::DebyeHuckel,
        "thomas-fermi" => ScreeningLength::ThomasFermi,
        "fixed" => ScreeningLength::Fixed(file.run.screening_inverse_sq_m2.ok_or_else(|| {
            ConfigError::Invalid(
                "run.screening_inverse_sq_m2 is required with screening_length = \"fixed\"".into(),
            )
        })?),
        other => {
            return Err(ConfigError::Invalid(format!(
                "screening_length must be debye-huckel|thomas-fermi|fixed, got `{other}`"
            )))
        }
    };
    let channels = match file.run.screening_channels.as_deref().unwrap_or("both") {
        "both" => ScreeningChannels::Both,
        "te-only" => ScreeningChannels::TeOnly,
        other => {
            return Err(ConfigError::Invalid(format!(
                "screening_channels must be both|te-only, got `{other}`"
            )))
        }
    };
    let gaps = match (file.geometry.gap_nm, file.geometry.gap_range_nm) {
        (Some(g), None) => vec![nm_to_m(g)],
        (None, Some(range)) => {
            if range.points < 2 || range.max <= range.min {
                return Err(ConfigError::Invalid(
                    "geometry.gap_range_nm needs min < max and points >= 2".into(),
                ));
            }
            (0..range.points)
                .map(|i| {
                    nm_to_m(
                        range.min
                            + (range.max - range.min) * i as f64 / (range.points - 1) as f64,
                    )
                })
                .collect()
        }
        (Some(_), Some(_)) => {
            return Err(ConfigError::Invalid(
                "geometry must give exactly one of gap_nm or gap_range_nm, not both".into(),
            ))
        }
        (None, None) => {
            return Err(ConfigError::Invalid(
                "geometry must give exactly one of gap_nm or gap_range_nm".into(),
            ))
        }
    };
    let geometry = match file.geometry.sphere_radius_um {
        Some(r_um) => Geometry::SpherePlate {
            radius: r_um * 1e-6,
        },
        None => Geometry::ParallelPlates,
    };
    let tolerance = overrides
        .tolerance
        .or(file.run.tolerance)
        .unwrap_or(1e-8);
    let entropy = file.entropy.as_ref().map(|e| ResolvedEntropy {
        temperatures: e.temperatures_k.clone(),
        step: e.step_k,
        verdict: e.verdict,
        closed_form: e.closed_form,
    });
    let compare = match &file.compare {
        None => None,
        Some(c) => Some(ResolvedCompare {
            dataset: c.dataset.clone(),
            kind: match c.kind.as_str() {
                "pressure" => casimir_core::compare::DatasetKind::Pressure,
                "force" => casimir_core::compare::DatasetKind::Force,
                other => {
                    return Err(ConfigError::Invalid(format!(
                        "compare.kind must be pressure|force, got `{other}`"
                    )))
                }
            },
        }),
    };
    let base = ThermalConfiguration {
        gap: gaps[0],
        temperature: file.run.temperature_k,
        geometry,
        model,
        carriers,
        screening: ScreeningRule {
            placement,
            length,
            channels,
        },
    };
    Ok(ResolvedRun {
        base,
        gaps,
        tolerance,
        entropy,
        compare,
    })
}
