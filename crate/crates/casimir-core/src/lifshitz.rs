//! Matsubara-sum Lifshitz free energy per unit area, its gap derivative
//! (pressure), and the sphere-plate force in the proximity force
//! approximation.
//!
//! Each Matsubara term is a wavevector integral taken in the scaled
//! variable y = 2 gamma_0 d, where the integrand decays like e^-y. The
//! n = 0 term carries the 1/2 prime-sum weight.

use crate::constants::{C, HBAR, KB};
use crate::materials::{
    eps_minus_one_xi2_over_c2, permittivity_imag, CarrierProperties, DielectricModel,
    MaterialError, ScreeningChannels, ScreeningPolicy, ScreeningRule,
};
use crate::quadrature::{adaptive, ln_one_minus_r2_exp, Accumulator, QuadratureError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LifshitzError {
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("Matsubara sum did not converge after {n_max} terms (partial sum {partial:.6e})")]
    NonConvergence { n_max: u32, partial: f64 },
    #[error("quadrature failure in term n = {n}: {source}")]
    QuadratureFailure { n: u32, source: QuadratureError },
    #[error("geometry mismatch: operation requires {expected}")]
    GeometryMismatch { expected: &'static str },
}

/// Plate-plate gap or sphere-plate arrangement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    ParallelPlates,
    SpherePlate { radius: f64 },
}

/// Complete description of one evaluation: geometry, temperature and the
/// (identical) material of both bodies.
#[derive(Debug, Clone, Copy)]
pub struct ThermalConfiguration {
    /// Gap between the surfaces, m.
    pub gap: f64,
    /// Temperature, K. Zero is legal only for the zero-temperature path.
    pub temperature: f64,
    pub geometry: Geometry,
    pub model: DielectricModel,
    pub carriers: CarrierProperties,
    pub screening: ScreeningRule,
}

impl ThermalConfiguration {
    pub fn validate(&self) -> Result<(), LifshitzError> {
        if !(self.gap > 0.0 && self.gap.is_finite()) {
            return Err(LifshitzError::InvalidConfiguration(format!(
                "gap must be positive, got {:.3e} m",
                self.gap
            )));
        }
        if self.temperature < 0.0 || !self.temperature.is_finite() {
            return Err(LifshitzError::InvalidConfiguration(format!(
                "temperature must be >= 0, got {} K",
                self.temperature
            )));
        }
        if let Geometry::SpherePlate { radius } = self.geometry {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(LifshitzError::InvalidConfiguration(format!(
                    "sphere radius must be positive, got {radius:.3e} m"
                )));
            }
        }
        self.model.validate()?;
        self.carriers.validate()?;
        Ok(())
    }

    /// Screening policy resolved at temperature `t`.
    pub fn policy_at(&self, t: f64) -> Result<ScreeningPolicy, MaterialError> {
        self.screening.resolve(&self.carriers, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Te,
    Tm,
}

/// One Matsubara term of one channel: index and value in J/m^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerTerm {
    pub n: u32,
    pub value: f64,
}

/// Result of summing one polarization channel.
#[derive(Debug, Clone)]
pub struct ChannelResult {
    pub channel: Channel,
    /// Free energy per unit area, J/m^2.
    pub free_energy: f64,
    pub per_term: Vec<PerTerm>,
    /// Index of the last evaluated Matsubara term.
    pub n_max: u32,
    pub truncation_error: f64,
    pub quadrature_error: f64,
}

/// Both channels of the free energy.
#[derive(Debug, Clone)]
pub struct FreeEnergyResult {
    pub te: ChannelResult,
    pub tm: ChannelResult,
}

impl FreeEnergyResult {
    pub fn total(&self) -> f64 {
        self.te.free_energy + self.tm.free_energy
    }

    pub fn error_estimate(&self) -> f64 {
        self.te.truncation_error
            + self.te.quadrature_error
            + self.tm.truncation_error
            + self.tm.quadrature_error
    }

    pub fn n_max(&self) -> u32 {
        self.te.n_max.max(self.tm.n_max)
    }
}

/// Pressure between parallel plates.
#[derive(Debug, Clone, Copy)]
pub struct PressureResult {
    /// Pa; negative means attraction.
    pub pressure: f64,
    pub n_max: u32,
    pub error_estimate: f64,
}

/// Matsubara frequency xi_n = 2 pi n kB T / hbar, rad/s.
pub fn matsubara_frequency(n: u32, t: f64) -> Result<f64, LifshitzError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(LifshitzError::InvalidConfiguration(format!(
            "matsubara_frequency requires T > 0, got {t}"
        )));
    }
    // n times the spacing, so linearity in n is exact in floating point
    Ok(n as f64 * (2.0 * std::f64::consts::PI * KB * t / HBAR))
}

/// TE reflection coefficient (gamma_1 - gamma_0)/(gamma_1 + gamma_0).
pub fn reflection_te(gamma0: f64, gamma1: f64) -> Result<f64, LifshitzError> {
    if !(gamma0 > 0.0) || !(gamma1 > 0.0) {
        return Err(LifshitzError::InvalidConfiguration(format!(
            "reflection_te requires positive wavevectors, got gamma0 = {gamma0:.3e}, gamma1 = {gamma1:.3e}"
        )));
    }
    if gamma1.is_infinite() {
        return Ok(1.0);
    }
    Ok((gamma1 - gamma0) / (gamma1 + gamma0))
}

/// TM reflection coefficient (eps gamma_0 - gamma_1)/(eps gamma_0 + gamma_1).
/// `eps = f64::INFINITY` selects the metallic limit 1.
pub fn reflection_tm(eps: f64, gamma0: f64, gamma1: f64) -> Result<f64, LifshitzError> {
    if eps < 1.0 {
        return Err(LifshitzError::InvalidConfiguration(format!(
            "reflection_tm requires eps >= 1, got {eps:.6e}"
        )));
    }
    if !(gamma0 > 0.0) || !(gamma1 > 0.0) {
        return Err(LifshitzError::InvalidConfiguration(
            "reflection_tm requires positive wavevectors".into(),
        ));
    }
    if eps.is_infinite() {
        return Ok(1.0);
    }
    if gamma1.is_infinite() {
        return Ok(-1.0);
    }
    Ok((eps * gamma0 - gamma1) / (eps * gamma0 + gamma1))
}

/// gamma_1 of the zero mode at transverse wavevector q. For the Drude
/// family the material term eps(i xi) xi^2 vanishes with xi; the plasma
/// model keeps wp^2/c^2; the ideal metal is the formal infinite limit.
pub fn zero_mode_gamma1(
    q: f64,
    policy: &ScreeningPolicy,
    model: &DielectricModel,
) -> Result<f64, LifshitzError> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(LifshitzError::InvalidConfiguration(format!(
            "zero_mode_gamma1 requires q > 0, got {q:.3e}"
        )));
    }
    policy.validate()?;
    let material = match *model {
        DielectricModel::IdealMetal => return Ok(f64::INFINITY),
        DielectricModel::Plasma { plasma_frequency } => {
            (plasma_frequency / C) * (plasma_frequency / C)
        }
        DielectricModel::Drude { .. } | DielectricModel::DrudeWithCore { .. } => 0.0,
    };
    Ok((q * q + policy.inverse_sq_at(0) + material).sqrt())
}

/// Per-term ingredients, in units scaled by 2d (so the exponent is just y).
pub(crate) struct TermKernel {
    /// y_n = 2 xi_n d / c: lower integration limit in the y variable.
    pub y_n: f64,
    /// (2d)^2 (lambda^-2 + (eps-1) xi^2/c^2) for the TE channel.
    pub k2_te: f64,
    /// Same for the TM channel (depends on the channel rule).
    pub k2_tm: f64,
    /// eps(i xi_n); infinity flags the metallic limit.
    pub eps: f64,
    pub ideal: bool,
}

impl TermKernel {
    /// ln(1 - r^2 e^{-y}) for one channel at scaled wavevector y >= y_n.
    #[inline]
    pub fn log_integrand(&self, y: f64, channel: Channel) -> f64 {
        if self.ideal {
            return ln_one_minus_r2_exp(0.0, y);
        }
        match channel {
            Channel::Te => {
                if self.k2_te == 0.0 {
                    return 0.0;
                }
                let g1 = (y * y + self.k2_te).sqrt();
                let r = self.k2_te / ((g1 + y) * (g1 + y));
                let om = (2.0 * y / (g1 + y)) * (1.0 + r);
                ln_one_minus_r2_exp(om, y)
            }
            Channel::Tm => {
                if self.eps.is_infinite() {
                    return ln_one_minus_r2_exp(0.0, y);
                }
                let g1 = (y * y + self.k2_tm).sqrt();
                let denom = self.eps * y + g1;
                let r = (self.eps * y - g1) / denom;
                let om = (2.0 * g1 / denom) * (1.0 + r);
                ln_one_minus_r2_exp(om, y)
            }
        }
    }

    /// r^2 e^{-y} / (1 - r^2 e^{-y}) for one channel at scaled y.
    #[inline]
    pub(crate) fn pressure_integrand(&self, y: f64, channel: Channel) -> f64 {
        let (r2, om) = if self.ideal {
            (1.0, 0.0)
        } else {
            match channel {
                Channel::Te => {
                    if self.k2_te == 0.0 {
                        return 0.0;
                    }
                    let g1 = (y * y + self.k2_te).sqrt();
                    let r = self.k2_te / ((g1 + y) * (g1 + y));
                    (r * r, (2.0 * y / (g1 + y)) * (1.0 + r))
                }
                Channel::Tm => {
                    if self.eps.is_infinite() {
                        (1.0, 0.0)
                    } else {
                        let g1 = (y * y + self.k2_tm).sqrt();
                        let denom = self.eps * y + g1;
                        let r = (self.eps * y - g1) / denom;
                        (r * r, (2.0 * g1 / denom) * (1.0 + r))
                    }
                }
            }
        };
        let ex = (-y).exp();
        let numer = r2 * ex;
        if numer == 0.0 {
            return 0.0;
        }
        let one_minus = (-(-y).exp_m1()) + ex * om;
        numer / one_minus
    }
}

/// The Matsubara-sum engine for one configuration. The material
/// temperature is tracked separately from the Matsubara temperature so the
/// entropy machinery can freeze material parameters while varying T.
pub(crate) struct Engine {
    pub d: f64,
    pub t_eval: f64,
    pub xi1: f64,
    policy: ScreeningPolicy,
    channels: ScreeningChannels,
    model: DielectricModel,
    t_material: f64,
    /// Frequency scale for the truncation rule; 0 when the model has none.
    wp: f64,
}

impl Engine {
    pub fn new(cfg: &ThermalConfiguration) -> Result<Self, LifshitzError> {
        Self::with_material_temperature(cfg, cfg.temperature)
    }

    /// Matsubara spacing and prefactor at cfg.temperature, but material
    /// parameters (relaxation, screening length) resolved at `t_material`.
    pub fn with_material_temperature(
        cfg: &ThermalConfiguration,
        t_material: f64,
    ) -> Result<Self, LifshitzError> {
        cfg.validate()?;
        if cfg.temperature <= 0.0 {
            return Err(LifshitzError::InvalidConfiguration(
                "the Matsubara sum requires T > 0; use the zero-temperature path in `thermo`"
                    .into(),
            ));
        }
        let policy = cfg.policy_at(t_material)?;
        policy.validate()?;
        Ok(Self {
            d: cfg.gap,
            t_eval: cfg.temperature,
            xi1: 2.0 * std::f64::consts::PI * KB * cfg.temperature / HBAR,
            policy,
            channels: cfg.screening.channels,
            model: cfg.model,
            t_material,
            wp: match cfg.model {
                DielectricModel::IdealMetal => 0.0,
                DielectricModel::Plasma { plasma_frequency }
                | DielectricModel::Drude {
                    plasma_frequency, ..
                }
                | DielectricModel::DrudeWithCore {
                    plasma_frequency, ..
                } => plasma_frequency,
            },
        })
    }

    pub fn kernel(&self, n: u32) -> TermKernel {
        let scale = 2.0 * self.d;
        let lam2 = self.policy.inverse_sq_at(n);
        let lam2_tm = if self.channels == ScreeningChannels::Both {
            lam2
        } else {
            0.0
        };
        if matches!(self.model, DielectricModel::IdealMetal) {
            return TermKernel {
                y_n: 2.0 * self.xi1 * n as f64 * self.d / C,
                k2_te: 0.0,
                k2_tm: 0.0,
                eps: f64::INFINITY,
                ideal: true,
            };
        }
        if n == 0 {
            let material = match self.model {
                DielectricModel::Plasma { plasma_frequency } => {
                    (plasma_frequency / C) * (plasma_frequency / C)
                }
                // Drude family: eps(i xi) xi^2 -> 0 with xi
                _ => 0.0,
            };
            // TM zero mode: eps(i0) diverges for free carriers
            return TermKernel {
                y_n: 0.0,
                k2_te: (lam2 + material) * scale * scale,
                k2_tm: (lam2_tm + material) * scale * scale,
                eps: f64::INFINITY,
                ideal: false,
            };
        }
        let xi = self.xi1 * n as f64;
        let y_n = 2.0 * xi * self.d / C;
        let mat = eps_minus_one_xi2_over_c2(&self.model, xi, self.t_material);
        let eps = permittivity_imag(&self.model, xi, self.t_material)
            .expect("xi > 0 and model is not ideal");
        TermKernel {
            y_n,
            k2_te: (lam2 + mat) * scale * scale,
            k2_tm: (lam2_tm + mat) * scale * scale,
            eps,
            ideal: false,
        }
    }

    /// Kernel at an arbitrary continuous frequency xi > 0, as needed by the
    /// zero-temperature integral. Screening enters only under the
    /// all-terms placement; a zero-frequency-only term has measure zero in
    /// the integral.
    pub(crate) fn continuous_kernel(&self, xi: f64) -> TermKernel {
        let scale = 2.0 * self.d;
        let y_n = 2.0 * xi * self.d / C;
        if matches!(self.model, DielectricModel::IdealMetal) {
            return TermKernel {
                y_n,
                k2_te: 0.0,
                k2_tm: 0.0,
                eps: f64::INFINITY,
                ideal: true,
            };
        }
        let lam2 = match self.policy {
            ScreeningPolicy::AllTerms { inverse_sq } => inverse_sq,
            _ => 0.0,
        };
        let lam2_tm = if self.channels == ScreeningChannels::Both {
            lam2
        } else {
            0.0
        };
        let mat = eps_minus_one_xi2_over_c2(&self.model, xi, self.t_material);
        let eps = permittivity_imag(&self.model, xi, self.t_material)
            .expect("xi > 0 and model is not ideal");
        TermKernel {
            y_n,
            k2_te: (lam2 + mat) * scale * scale,
            k2_tm: (lam2_tm + mat) * scale * scale,
            eps,
            ideal: false,
        }
    }

    /// One free-energy term of one channel, J/m^2, with its quadrature
    /// error estimate; prime-sum weight included.
    fn free_energy_term(
        &self,
        n: u32,
        channel: Channel,
        abs_tol: f64,
        rel_tol: f64,
    ) -> Result<(f64, f64), LifshitzError> {
        let kernel = self.kernel(n);
        if n == 0 && !kernel.ideal && channel == Channel::Te && kernel.k2_te == 0.0 {
            return Ok((0.0, 0.0));
        }
        if kernel.y_n > 745.0 {
            return Ok((0.0, 0.0));
        }
        let weight = if n == 0 { 0.5 } else { 1.0 };
        let pref = weight * KB * self.t_eval / (8.0 * std::f64::consts::PI * self.d * self.d);
        let upper = kernel.y_n + 60.0;
        let (val, err) = adaptive(
            |y| y * kernel.log_integrand(y, channel),
            kernel.y_n,
            upper,
            abs_tol / pref,
            rel_tol,
        )
        .map_err(|source| LifshitzError::QuadratureFailure { n, source })?;
        let tail = (1.0 + upper) * (-upper).exp() / (-(-upper).exp_m1());
        Ok((pref * val, pref * (err + tail)))
    }

    /// One pressure term (both channels summed), Pa, with error estimate.
    fn pressure_term(
        &self,
        n: u32,
        abs_tol: f64,
        rel_tol: f64,
    ) -> Result<(f64, f64), LifshitzError> {
        let kernel = self.kernel(n);
        if kernel.y_n > 745.0 {
            return Ok((0.0, 0.0));
        }
        let weight = if n == 0 { 0.5 } else { 1.0 };
        let pref =
            weight * KB * self.t_eval / (8.0 * std::f64::consts::PI * self.d * self.d * self.d);
        let upper = kernel.y_n + 60.0;
        let (val, err) = adaptive(
            |y| {
                y * y
                    * (kernel.pressure_integrand(y, Channel::Te)
                        + kernel.pressure_integrand(y, Channel::Tm))
            },
            kernel.y_n,
            upper,
            abs_tol / pref,
            rel_tol,
        )
        .map_err(|source| LifshitzError::QuadratureFailure { n, source })?;
        let tail =
            2.0 * (upper * upper + 2.0 * upper + 2.0) * (-upper).exp() / (-(-upper).exp_m1());
        Ok((-pref * val, pref * (err + tail)))
    }

    /// Truncation decision. Returns the geometric tail estimate once the
    /// spec rule holds (term negligible AND xi_n > 10 wp) and the tail
    /// itself is small enough to honour the error contract.
    fn truncation(
        &self,
        n: u32,
        term_abs: f64,
        prev_abs: f64,
        partial_abs: f64,
        tolerance: f64,
    ) -> Option<f64> {
        if n < 4 {
            return None;
        }
        if 2.0 * self.xi1 * n as f64 * self.d / C > 745.0 {
            return Some(0.0);
        }
        if term_abs >= tolerance * partial_abs / 10.0 {
            return None;
        }
        if self.xi1 * n as f64 <= 10.0 * self.wp {
            return None;
        }
        let ratio = if prev_abs > 0.0 && term_abs > 0.0 {
            (term_abs / prev_abs).clamp(0.0, 0.999)
        } else {
            0.5
        };
        let tail = term_abs * ratio / (1.0 - ratio);
        (tail <= tolerance * partial_abs / 2.0).then_some(tail)
    }
}

const MAX_TERMS: u32 = 2_000_000;

fn validate_tolerance(tolerance: f64) -> Result<(), LifshitzError> {
    if !(tolerance > 1e-12 && tolerance < 1e-2) {
        return Err(LifshitzError::InvalidConfiguration(format!(
            "tolerance must lie in (1e-12, 1e-2), got {tolerance:.3e}"
        )));
    }
    Ok(())
}

/// Free energy per unit area of one polarization channel, J/m^2.
pub fn free_energy_channel(
    cfg: &ThermalConfiguration,
    channel: Channel,
    tolerance: f64,
) -> Result<ChannelResult, LifshitzError> {
    validate_tolerance(tolerance)?;
    let engine = Engine::new(cfg)?;
    let rel = tolerance / 4.0;
    let mut acc = Accumulator::new();
    let mut per_term = Vec::new();
    let mut quad = 0.0;
    let mut prev_abs = 0.0;
    let mut n = 0u32;
    loop {
        let abs_tol = tolerance * acc.value().abs() / 100.0;
        let (value, err) = engine.free_energy_term(n, channel, abs_tol, rel)?;
        acc.add(value);
        quad += err;
        per_term.push(PerTerm { n, value });
        if n > 0 {
            if let Some(truncation) =
                engine.truncation(n, value.abs(), prev_abs, acc.value().abs(), tolerance)
            {
                return Ok(ChannelResult {
                    channel,
                    free_energy: acc.value(),
                    per_term,
                    n_max: n,
                    truncation_error: truncation,
                    quadrature_error: quad,
                });
            }
        }
        prev_abs = value.abs();
        n += 1;
        if n > MAX_TERMS {
            return Err(LifshitzError::NonConvergence {
                n_max: n,
                partial: acc.value(),
            });
        }
    }
}

/// Free energy per unit area, both channels.
pub fn free_energy_total(
    cfg: &ThermalConfiguration,
    tolerance: f64,
) -> Result<FreeEnergyResult, LifshitzError> {
    Ok(FreeEnergyResult {
        te: free_energy_channel(cfg, Channel::Te, tolerance)?,
        tm: free_energy_channel(cfg, Channel::Tm, tolerance)?,
    })
}

/// Casimir pressure between parallel plates, Pa (negative = attraction),
/// from the term-wise analytic d-derivative of the free energy.
pub fn pressure(
    cfg: &ThermalConfiguration,
    tolerance: f64,
) -> Result<PressureResult, LifshitzError> {
    validate_tolerance(tolerance)?;
    if !matches!(cfg.geometry, Geometry::ParallelPlates) {
        return Err(LifshitzError::GeometryMismatch {
            expected: "ParallelPlates",
        });
    }
    let engine = Engine::new(cfg)?;
    let rel = tolerance / 4.0;
    let mut acc = Accumulator::new();
    let mut quad = 0.0;
    let mut prev_abs = 0.0;
    let mut n = 0u32;
    loop {
        let abs_tol = tolerance * acc.value().abs() / 100.0;
        let (value, err) = engine.pressure_term(n, abs_tol, rel)?;
        acc.add(value);
        quad += err;
        if n > 0 {
            if let Some(truncation) =
                engine.truncation(n, value.abs(), prev_abs, acc.value().abs(), tolerance)
            {
                return Ok(PressureResult {
                    pressure: acc.value(),
                    n_max: n,
                    error_estimate: quad + truncation,
                });
            }
        }
        prev_abs = value.abs();
        n += 1;
        if n > MAX_TERMS {
            return Err(LifshitzError::NonConvergence {
                n_max: n,
                partial: acc.value(),
            });
        }
    }
}

/// Sphere-plate force by the proximity force approximation,
/// F = 2 pi R F_pp(d, T), in N (negative = attraction).
pub fn sphere_plate_force(
    cfg: &ThermalConfiguration,
    tolerance: f64,
) -> Result<(f64, FreeEnergyResult), LifshitzError> {
    let radius = match cfg.geometry {
        Geometry::SpherePlate { radius } => radius,
        Geometry::ParallelPlates => {
            return Err(LifshitzError::GeometryMismatch {
                expected: "SpherePlate",
            })
        }
    };
    if radius / cfg.gap < 100.0 {
        log::warn!(
            "PFA validity is marginal: R/d = {:.1} < 100",
            radius / cfg.gap
        );
    }
    let fe = free_energy_total(cfg, tolerance)?;
    Ok((2.0 * std::f64::consts::PI * radius * fe.total(), fe))
}
