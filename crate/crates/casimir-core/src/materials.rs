//! Dielectric models along the imaginary frequency axis and free-carrier
//! screening lengths (Debye-Hückel, Thomas-Fermi).

use crate::constants::{C, EPSILON_0, E_CHARGE, HBAR, KB, M_ELECTRON};
use thiserror::Error;

/// Reference temperature for the relaxation scaling gamma(T), K.
pub const RELAXATION_REFERENCE_T: f64 = 300.0;

#[derive(Debug, Error, PartialEq)]
pub enum MaterialError {
    #[error("permittivity requires xi > 0, got {0:.3e} rad/s")]
    InvalidFrequency(f64),
    #[error("the ideal-metal model has no finite permittivity; use the ideal-metal reflection limit")]
    IdealMetalPermittivity,
    #[error("temperature must be positive, got {0} K")]
    InvalidTemperature(f64),
    #[error("carrier concentration must be positive, got {0:.3e} m^-3")]
    InvalidCarrierConcentration(f64),
    #[error("invalid material parameter: {0}")]
    InvalidParameter(String),
}

/// Dielectric response evaluated at imaginary frequencies xi (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DielectricModel {
    /// Formal epsilon -> infinity limit; reflections are taken directly.
    IdealMetal,
    /// eps(i xi) = 1 + wp^2 / xi^2.
    Plasma { plasma_frequency: f64 },
    /// eps(i xi) = 1 + wp^2 / (xi (xi + gamma(T))), with
    /// gamma(T) = relaxation * (T / 300 K)^relaxation_exponent.
    Drude {
        plasma_frequency: f64,
        relaxation: f64,
        relaxation_exponent: f64,
    },
    /// eps(i xi) = core_constant + wp^2 / (xi (xi + gamma)).
    DrudeWithCore {
        core_constant: f64,
        plasma_frequency: f64,
        relaxation: f64,
    },
}

impl DielectricModel {
    pub fn validate(&self) -> Result<(), MaterialError> {
        let check = |wp: f64, gam: f64, core: f64| {
            if wp <= 0.0 {
                return Err(MaterialError::InvalidParameter(format!(
                    "plasma_frequency must be > 0, got {wp:.3e}"
                )));
            }
            if gam < 0.0 {
                return Err(MaterialError::InvalidParameter(format!(
                    "relaxation must be >= 0, got {gam:.3e}"
                )));
            }
            if core < 1.0 {
                return Err(MaterialError::InvalidParameter(format!(
                    "core_constant must be >= 1, got {core}"
                )));
            }
            Ok(())
        };
        match *self {
            DielectricModel::IdealMetal => Ok(()),
            DielectricModel::Plasma { plasma_frequency } => check(plasma_frequency, 0.0, 1.0),
            DielectricModel::Drude {
                plasma_frequency,
                relaxation,
                relaxation_exponent,
            } => {
                if relaxation_exponent < 0.0 {
                    return Err(MaterialError::InvalidParameter(format!(
                        "relaxation_exponent must be >= 0, got {relaxation_exponent}"
                    )));
                }
                check(plasma_frequency, relaxation, 1.0)
            }
            DielectricModel::DrudeWithCore {
                core_constant,
                plasma_frequency,
                relaxation,
            } => check(plasma_frequency, relaxation, core_constant),
        }
    }

    /// Relaxation frequency at temperature `t`, rad/s.
    pub fn relaxation_at(&self, t: f64) -> f64 {
        match *self {
            DielectricModel::Drude {
                relaxation,
                relaxation_exponent,
                ..
            } => {
                if relaxation_exponent == 0.0 {
                    relaxation
                } else {
                    relaxation * (t / RELAXATION_REFERENCE_T).powf(relaxation_exponent)
                }
            }
            DielectricModel::DrudeWithCore { relaxation, .. } => relaxation,
            _ => 0.0,
        }
    }

    /// True for any model describing free carriers (everything but vacuum;
    /// the TM zero mode takes the metallic eps -> infinity limit for these).
    pub fn is_conductor(&self) -> bool {
        true
    }
}

/// eps(i xi) at xi > 0 and temperature `t`.
pub fn permittivity_imag(model: &DielectricModel, xi: f64, t: f64) -> Result<f64, MaterialError> {
    if xi <= 0.0 || !xi.is_finite() {
        return Err(MaterialError::InvalidFrequency(xi));
    }
    match *model {
        DielectricModel::IdealMetal => Err(MaterialError::IdealMetalPermittivity),
        DielectricModel::Plasma { plasma_frequency } => {
            Ok(1.0 + (plasma_frequency / xi).powi(2))
        }
        DielectricModel::Drude {
            plasma_frequency, ..
        } => {
            let gam = model.relaxation_at(t);
            Ok(1.0 + plasma_frequency * plasma_frequency / (xi * (xi + gam)))
        }
        DielectricModel::DrudeWithCore {
            core_constant,
            plasma_frequency,
            relaxation,
        } => Ok(core_constant + plasma_frequency * plasma_frequency / (xi * (xi + relaxation))),
    }
}

/// (eps(i xi) - 1) * xi^2 / c^2, the material part of gamma_1^2, computed
/// without forming eps itself (safe for xi both far below and far above wp).
pub(crate) fn eps_minus_one_xi2_over_c2(model: &DielectricModel, xi: f64, t: f64) -> f64 {
    match *model {
        DielectricModel::IdealMetal => f64::INFINITY,
        DielectricModel::Plasma { plasma_frequency } => {
            (plasma_frequency / C) * (plasma_frequency / C)
        }
        DielectricModel::Drude {
            plasma_frequency, ..
        } => {
            let gam = model.relaxation_at(t);
            plasma_frequency * plasma_frequency * xi / ((xi + gam) * C * C)
        }
        DielectricModel::DrudeWithCore {
            core_constant,
            plasma_frequency,
            relaxation,
        } => {
            plasma_frequency * plasma_frequency * xi / ((xi + relaxation) * C * C)
                + (core_constant - 1.0) * xi * xi / (C * C)
        }
    }
}

/// Free-carrier data used by the screening lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierProperties {
    /// Total carrier concentration, 1/m^3.
    pub concentration: f64,
    /// Fermi energy, J. Derived from the concentration when absent.
    pub fermi_energy: Option<f64>,
    /// Dielectric constant of the core electrons entering lambda^-2.
    pub core_constant: f64,
}

impl CarrierProperties {
    pub fn new(concentration: f64) -> Self {
        Self {
            concentration,
            fermi_energy: None,
            core_constant: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        if self.concentration <= 0.0 {
            return Err(MaterialError::InvalidCarrierConcentration(
                self.concentration,
            ));
        }
        if let Some(ef) = self.fermi_energy {
            if ef <= 0.0 {
                return Err(MaterialError::InvalidParameter(format!(
                    "fermi_energy must be > 0, got {ef:.3e}"
                )));
            }
        }
        if self.core_constant < 1.0 {
            return Err(MaterialError::InvalidParameter(format!(
                "core_constant must be >= 1, got {}",
                self.core_constant
            )));
        }
        Ok(())
    }

    /// Explicit Fermi energy if set, else the free-electron value.
    pub fn fermi_energy_or_derived(&self) -> Result<f64, MaterialError> {
        match self.fermi_energy {
            Some(ef) => Ok(ef),
            None => fermi_energy_free_electron(self.concentration),
        }
    }
}

/// Where the screening term lambda^-2 enters the Matsubara sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScreeningPolicy {
    /// No screening anywhere.
    None,
    /// lambda^-2 added to gamma_1 only in the n = 0 term.
    ZeroFrequencyOnly { inverse_sq: f64 },
    /// lambda^-2 added to gamma_1 in every Matsubara term.
    AllTerms { inverse_sq: f64 },
}

impl ScreeningPolicy {
    /// lambda^-2 acting on the term of index n.
    #[inline]
    pub fn inverse_sq_at(&self, n: u32) -> f64 {
        match *self {
            ScreeningPolicy::None => 0.0,
            ScreeningPolicy::ZeroFrequencyOnly { inverse_sq } => {
                if n == 0 {
                    inverse_sq
                } else {
                    0.0
                }
            }
            ScreeningPolicy::AllTerms { inverse_sq } => inverse_sq,
        }
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        let v = match *self {
            ScreeningPolicy::None => 0.0,
            ScreeningPolicy::ZeroFrequencyOnly { inverse_sq }
            | ScreeningPolicy::AllTerms { inverse_sq } => inverse_sq,
        };
        if v < 0.0 || !v.is_finite() {
            return Err(MaterialError::InvalidParameter(format!(
                "screening inverse_sq must be >= 0 and finite, got {v:.3e}"
            )));
        }
        Ok(())
    }
}

/// How the screening length is obtained from material data. Unlike
/// [`ScreeningPolicy`], which carries a resolved number, the rule knows the
/// temperature dependence, so entropy differentiation can propagate T into
/// lambda(T).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScreeningLength {
    /// lambda^-2 = e^2 c_t / (eps_core eps_0 kB T); diverges as T -> 0.
    DebyeHuckel,
    /// lambda^-2 = 3 e^2 c_t / (eps_0 E_F); temperature independent.
    ThomasFermi,
    /// A fixed inverse square length, 1/m^2.
    Fixed(f64),
}

/// Placement of the screening term over Matsubara indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScreeningPlacement {
    None,
    ZeroFrequencyOnly,
    AllTerms,
}

/// Which polarization channels receive the screened gamma_1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScreeningChannels {
    /// Screen gamma_1 wherever it appears (TE and TM).
    #[default]
    Both,
    /// Screen only the transverse electric channel.
    TeOnly,
}

/// Full screening prescription: placement plus length model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreeningRule {
    pub placement: ScreeningPlacement,
    pub length: ScreeningLength,
    pub channels: ScreeningChannels,
}

impl ScreeningRule {
    pub fn none() -> Self {
        Self {
            placement: ScreeningPlacement::None,
            length: ScreeningLength::Fixed(0.0),
            channels: ScreeningChannels::Both,
        }
    }

    /// Resolves the rule into a per-term policy at temperature `t`.
    pub fn resolve(
        &self,
        carriers: &CarrierProperties,
        t: f64,
    ) -> Result<ScreeningPolicy, MaterialError> {
        if matches!(self.placement, ScreeningPlacement::None) {
            return Ok(ScreeningPolicy::None);
        }
        let inverse_sq = match self.length {
            ScreeningLength::DebyeHuckel => debye_huckel_inverse_sq(carriers, t)?,
            ScreeningLength::ThomasFermi => thomas_fermi_inverse_sq(carriers)?,
            ScreeningLength::Fixed(v) => v,
        };
        Ok(match self.placement {
            ScreeningPlacement::ZeroFrequencyOnly => ScreeningPolicy::ZeroFrequencyOnly {
                inverse_sq,
            },
            ScreeningPlacement::AllTerms => ScreeningPolicy::AllTerms { inverse_sq },
            ScreeningPlacement::None => unreachable!(),
        })
    }
}

/// Debye-Hückel inverse square screening length, 1/m^2.
pub fn debye_huckel_inverse_sq(
    carriers: &CarrierProperties,
    t: f64,
) -> Result<f64, MaterialError> {
    if t <= 0.0 {
        return Err(MaterialError::InvalidTemperature(t));
    }
    carriers.validate()?;
    Ok(E_CHARGE * E_CHARGE * carriers.concentration
        / (carriers.core_constant * EPSILON_0 * KB * t))
}

/// Thomas-Fermi inverse square screening length, 1/m^2 (T independent).
pub fn thomas_fermi_inverse_sq(carriers: &CarrierProperties) -> Result<f64, MaterialError> {
    carriers.validate()?;
    let ef = carriers.fermi_energy_or_derived()?;
    Ok(3.0 * E_CHARGE * E_CHARGE * carriers.concentration / (EPSILON_0 * ef))
}

/// Free-electron Fermi energy E_F = hbar^2 (3 pi^2 c_t)^(2/3) / (2 m_e), J.
pub fn fermi_energy_free_electron(concentration: f64) -> Result<f64, MaterialError> {
    if concentration <= 0.0 {
        return Err(MaterialError::InvalidCarrierConcentration(concentration));
    }
    let k = (3.0 * std::f64::consts::PI * std::f64::consts::PI * concentration).powf(2.0 / 3.0);
    Ok(HBAR * HBAR * k / (2.0 * M_ELECTRON))
}

/// Gold defaults: wp = 9.0 eV, gamma = 0.035 eV, c_t = 5.9e22 cm^-3.
pub fn gold_drude(relaxation_exponent: f64) -> (DielectricModel, CarrierProperties) {
    (
        DielectricModel::Drude {
            plasma_frequency: crate::constants::ev_to_angular_frequency(9.0),
            relaxation: crate::constants::ev_to_angular_frequency(0.035),
            relaxation_exponent,
        },
        CarrierProperties::new(crate::constants::per_cm3_to_per_m3(5.9e22)),
    )
}
