//! Low-temperature machinery: Abel-Plana summation, the zero-temperature
//! limit of the Lifshitz sum, entropy by temperature differentiation, the
//! closed-form zero-temperature entropy of the screened TE prescription,
//! and a Nernst-theorem verdict.
//!
//! The finite-difference entropy resolves free-energy differences twelve
//! or more orders below the free energy itself. It therefore evaluates
//! every Matsubara term on a grid that is frozen per temperature point and
//! accumulates the two temperatures node by node, so quadrature error
//! cancels in the difference instead of swamping it.

use crate::constants::{C, HBAR, KB};
use crate::lifshitz::{Channel, Engine, Geometry, LifshitzError, ThermalConfiguration};
use crate::materials::{thomas_fermi_inverse_sq, DielectricModel, MaterialError, ScreeningLength};
use crate::quadrature::{adaptive, gauss_legendre, Accumulator, QuadratureError};
use once_cell::sync::Lazy;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ThermoError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("finite-difference step too large: S(h) and S(h/2) disagree by {disagreement:.3e} against scale {scale:.3e}")]
    StepTooLarge { disagreement: f64, scale: f64 },
    #[error("temperature sequence must be strictly decreasing with at least 4 points")]
    BadTemperatureSequence,
    #[error("extrapolation fit did not converge: {0}")]
    FitInsufficient(String),
    #[error(transparent)]
    Lifshitz(#[from] LifshitzError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Result of an Abel-Plana evaluation of a primed sum.
#[derive(Debug, Clone, Copy)]
pub struct AbelPlanaResult {
    /// First right-hand-side term: the integral of f over the real index.
    pub integral_term: f64,
    /// Second term: the (e^{2 pi t} - 1)^-1 contour integral.
    pub boundary_term: f64,
    pub total: f64,
    pub error_estimate: f64,
}

/// Primed sum over integers via the Abel-Plana identity. `f` is the
/// real-index function; `g` must be the analytically continued difference
/// i [f(it) - f(-it)] supplied by the caller as a real function (no
/// symbolic continuation happens here). Both integrands must decay.
pub fn abel_plana_sum<F, G>(f: F, g: G, tolerance: f64) -> Result<AbelPlanaResult, ThermoError>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(ThermoError::InvalidInput(format!(
            "tolerance must lie in (0, 1), got {tolerance:.3e}"
        )));
    }
    let (integral_term, err_f) = semi_infinite(&f, tolerance)?;
    let boundary_integrand = |t: f64| g(t) / (2.0 * std::f64::consts::PI * t).exp_m1();
    let (boundary_term, err_g) = semi_infinite(&boundary_integrand, tolerance)?;
    Ok(AbelPlanaResult {
        integral_term,
        boundary_term,
        total: integral_term + boundary_term,
        error_estimate: err_f + err_g,
    })
}

/// Adaptive integral over [0, infinity) by expanding dyadic windows until
/// three consecutive windows are negligible.
fn semi_infinite<F: Fn(f64) -> f64>(f: &F, tolerance: f64) -> Result<(f64, f64), ThermoError> {
    let mut acc = Accumulator::new();
    let mut err = 0.0;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut quiet = 0u32;
    for _ in 0..64 {
        let scale = acc.value().abs();
        let (v, e) = adaptive(f, lo, hi, tolerance * scale / 64.0, tolerance / 8.0)?;
        acc.add(v);
        err += e;
        if v.abs() <= tolerance * acc.value().abs() / 8.0 && hi >= 8.0 {
            quiet += 1;
            if quiet >= 3 {
                return Ok((acc.value(), err + v.abs()));
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(ThermoError::InvalidInput(
        "semi-infinite integrand did not decay within the window budget".into(),
    ))
}

/// Zero-temperature free energy per unit area, J/m^2: the integral term of
/// the Abel-Plana identity applied to the Matsubara sum, i.e. the T -> 0
/// limit in which the sum becomes an integral over continuous frequency.
pub fn zero_temperature_free_energy(
    cfg: &ThermalConfiguration,
    tolerance: f64,
) -> Result<f64, ThermoError> {
    zero_temperature_integral(cfg, tolerance, false)
}

/// Channel-resolved zero-temperature free energy, J/m^2.
pub fn zero_temperature_free_energy_channel(
    cfg: &ThermalConfiguration,
    channel: Channel,
    tolerance: f64,
) -> Result<f64, ThermoError> {
    zero_temperature_integral_select(cfg, tolerance, false, Some(channel))
}

/// Zero-temperature Casimir pressure between parallel plates, Pa.
pub fn zero_temperature_pressure(
    cfg: &ThermalConfiguration,
    tolerance: f64,
) -> Result<f64, ThermoError> {
    if !matches!(cfg.geometry, Geometry::ParallelPlates) {
        return Err(LifshitzError::GeometryMismatch {
            expected: "ParallelPlates",
        }
        .into());
    }
    zero_temperature_integral(cfg, tolerance, true)
}

/// Zero-temperature sphere-plate force via the proximity force
/// approximation, N.
pub fn zero_temperature_sphere_plate_force(
    cfg: &ThermalConfiguration,
    tolerance: f64,
) -> Result<f64, ThermoError> {
    let radius = match cfg.geometry {
        Geometry::SpherePlate { radius } => radius,
        Geometry::ParallelPlates => {
            return Err(LifshitzError::GeometryMismatch {
                expected: "SpherePlate",
            }
            .into())
        }
    };
    if radius / cfg.gap < 100.0 {
        log::warn!(
            "PFA validity is marginal: R/d = {:.1} < 100",
            radius / cfg.gap
        );
    }
    let mut flat = *cfg;
    flat.geometry = Geometry::ParallelPlates;
    Ok(2.0 * std::f64::consts::PI * radius * zero_temperature_integral(&flat, tolerance, false)?)
}

/// Shared double integral for the zero-temperature limit. Continuous
/// Matsubara frequency xi = s c / (2 d); inner wavevector variable
/// y = 2 gamma_0 d as in the finite-T engine.
fn zero_temperature_integral(
    cfg: &ThermalConfiguration,
    tolerance: f64,
    pressure: bool,
) -> Result<f64, ThermoError> {
    zero_temperature_integral_select(cfg, tolerance, pressure, None)
}

fn zero_temperature_integral_select(
    cfg: &ThermalConfiguration,
    tolerance: f64,
    pressure: bool,
    channel: Option<Channel>,
) -> Result<f64, ThermoError> {
    cfg.validate()?;
    if matches!(cfg.screening.length, ScreeningLength::DebyeHuckel)
        && !matches!(
            cfg.screening.placement,
            crate::materials::ScreeningPlacement::None
        )
    {
        return Err(ThermoError::InvalidInput(
            "Debye-Hückel screening diverges at T = 0; use ThomasFermi or Fixed".into(),
        ));
    }
    // a surrogate engine at 1 K supplies material evaluation at T -> 0
    let mut surrogate = *cfg;
    surrogate.temperature = 1.0;
    let engine = Engine::with_material_temperature(&surrogate, 0.0)?;
    let d = cfg.gap;
    let inner_rel = tolerance / 16.0;
    let channel_sum = |f: &mut dyn FnMut(Channel) -> f64| match channel {
        Some(ch) => f(ch),
        None => f(Channel::Te) + f(Channel::Tm),
    };
    let outer = |s: f64| -> f64 {
        let kernel = engine.continuous_kernel(s * C / (2.0 * d));
        let upper = s + 60.0;
        let (val, _) = if pressure {
            adaptive(
                |y| channel_sum(&mut |ch| y * y * kernel.pressure_integrand(y, ch)),
                s,
                upper,
                0.0,
                inner_rel,
            )
            .unwrap_or((f64::NAN, f64::NAN))
        } else {
            adaptive(
                |y| channel_sum(&mut |ch| y * kernel.log_integrand(y, ch)),
                s,
                upper,
                0.0,
                inner_rel,
            )
            .unwrap_or((f64::NAN, f64::NAN))
        };
        val
    };
    let (value, _err) = semi_infinite(&outer, tolerance)?;
    if !value.is_finite() {
        return Err(ThermoError::InvalidInput(
            "zero-temperature inner quadrature failed".into(),
        ));
    }
    let pref = HBAR * C / (32.0 * std::f64::consts::PI.powi(2));
    Ok(if pressure {
        -pref / d.powi(4) * value
    } else {
        pref / d.powi(3) * value
    })
}

/// How the temperature dependence propagates into the free energy when
/// differentiating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Propagation {
    /// Matsubara spacing, relaxation gamma(T) and screening lambda(T) all move.
    #[default]
    Full,
    /// Material parameters pinned at the base temperature; only the
    /// Matsubara structure moves. Isolates the eps(omega, T) channel.
    FrozenMaterial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMethod {
    FiniteDifference,
    AbelPlanaAnalytic,
    ZeroTemperatureClosedForm,
}

/// One entropy evaluation.
#[derive(Debug, Clone, Copy)]
pub struct EntropyPoint {
    /// Temperature, K (0 for the closed form).
    pub temperature: f64,
    /// Entropy per unit area, J/(K m^2).
    pub entropy: f64,
    pub method: EntropyMethod,
    /// Richardson disagreement |S_h - S_{h/2}|, a step-quality indicator.
    pub step_disagreement: f64,
}

// ---- frozen quadrature grids for the stiff entropy path ----

struct StiffGrid {
    /// cosh(v) and folded weights w * sinh(v) * cosh(v) at the v nodes.
    cosh_v: Vec<f64>,
    weight_v: Vec<f64>,
    /// graded u grid for the n = 0 term (log endpoint at u = 0)
    u0_nodes: Vec<f64>,
    u0_weights: Vec<f64>,
}

static STIFF_GRID: Lazy<StiffGrid> = Lazy::new(|| {
    let rule = gauss_legendre(24);
    let mut v_edges: Vec<f64> = vec![0.0, 0.125, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0];
    let mut v = 4.0;
    while v <= 14.0 {
        v_edges.push(v);
        v += 1.0;
    }
    let (mut cosh_v, mut weight_v) = (Vec::new(), Vec::new());
    for pair in v_edges.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let mid = 0.5 * (pair[0] + pair[1]);
        for (&x, &w) in rule.0.iter().zip(rule.1.iter()) {
            let vv = mid + half * x;
            cosh_v.push(vv.cosh());
            weight_v.push(half * w * vv.sinh() * vv.cosh());
        }
    }
    // u grid: dyadic grading from 2^-45 up to 1, then doubling panels to 64
    let mut u_edges = vec![0.0];
    for k in (0..=44).rev() {
        u_edges.push(0.5f64.powi(k + 1));
    }
    for &e in &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
        u_edges.push(e);
    }
    let (mut u0_nodes, mut u0_weights) = (Vec::new(), Vec::new());
    for pair in u_edges.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let mid = 0.5 * (pair[0] + pair[1]);
        for (&x, &w) in rule.0.iter().zip(rule.1.iter()) {
            u0_nodes.push(mid + half * x);
            u0_weights.push(half * w);
        }
    }
    StiffGrid {
        cosh_v,
        weight_v,
        u0_nodes,
        u0_weights,
    }
});

/// n = 0 term of J' on the graded grid (prime weight applied by caller).
fn stiff_j_zero(engine: &Engine) -> f64 {
    let grid = &*STIFF_GRID;
    let kernel = engine.kernel(0);
    let mut acc = Accumulator::new();
    for (&u, &w) in grid.u0_nodes.iter().zip(&grid.u0_weights) {
        let g = kernel.log_integrand(u, Channel::Te) + kernel.log_integrand(u, Channel::Tm);
        acc.add(w * u * g);
    }
    acc.value()
}

/// Streams the paired difference and sum of J' over two engines sharing
/// the same index set: returns (D, A) with D = J'_p - J'_m, A = J'_p + J'_m,
/// where J' = (1/2) J_0 + sum_{n>=1} J_n and J_n = int u (g_te + g_tm) du
/// in 2d-scaled units, so that F = kB T_eval / (8 pi d^2) J'.
fn stiff_paired(engine_p: &Engine, engine_m: &Engine, n_max: u32) -> (f64, f64) {
    let grid = &*STIFF_GRID;
    let j0p = stiff_j_zero(engine_p);
    let j0m = stiff_j_zero(engine_m);
    let mut d_acc = Accumulator::new();
    let mut a_acc = Accumulator::new();
    d_acc.add(0.5 * (j0p - j0m));
    a_acc.add(0.5 * (j0p + j0m));
    for n in 1..=n_max {
        let kp = engine_p.kernel(n);
        let km = engine_m.kernel(n);
        let yp2 = kp.y_n * kp.y_n;
        let ym2 = km.y_n * km.y_n;
        let y_min = kp.y_n.min(km.y_n);
        let cut = y_min + 60.0;
        for i in 0..grid.weight_v.len() {
            let ch = grid.cosh_v[i];
            if y_min * ch > cut {
                break;
            }
            let y_p = kp.y_n * ch;
            let y_m = km.y_n * ch;
            let gp =
                yp2 * (kp.log_integrand(y_p, Channel::Te) + kp.log_integrand(y_p, Channel::Tm));
            let gm =
                ym2 * (km.log_integrand(y_m, Channel::Te) + km.log_integrand(y_m, Channel::Tm));
            let w = grid.weight_v[i];
            d_acc.add(w * (gp - gm));
            a_acc.add(w * (gp + gm));
        }
    }
    (d_acc.value(), a_acc.value())
}

fn stiff_n_max(t_lowest: f64, d: f64) -> u32 {
    let y1 = 2.0 * (2.0 * std::f64::consts::PI * KB * t_lowest / HBAR) * d / C;
    ((65.0 / y1).ceil() as u32).max(8)
}

/// Free energy per unit area on the frozen entropy grid, J/m^2. This
/// integrates each term in the wavevector variable u = 2 q d from zero
/// (through a sinh-stretched node layout), an independent parameterization
/// of the same integrals that `lifshitz::free_energy_total` takes in
/// y = 2 gamma_0 d from y_n; the two routes must agree.
pub fn free_energy_fixed_grid(cfg: &ThermalConfiguration) -> Result<f64, ThermoError> {
    let engine = Engine::new(cfg)?;
    let n_max = stiff_n_max(cfg.temperature, cfg.gap);
    let (_, a_sum) = stiff_paired(&engine, &engine, n_max);
    let pref = KB * cfg.temperature / (8.0 * std::f64::consts::PI * cfg.gap * cfg.gap);
    Ok(pref * 0.5 * a_sum)
}

/// Central-difference entropy at one step size, with node-paired
/// accumulation of the two temperatures.
fn entropy_central_difference(
    cfg: &ThermalConfiguration,
    t: f64,
    h: f64,
    n_max: u32,
    propagation: Propagation,
) -> Result<f64, ThermoError> {
    let build = |t_eval: f64| -> Result<Engine, ThermoError> {
        let mut c = *cfg;
        c.temperature = t_eval;
        let t_material = match propagation {
            Propagation::Full => t_eval,
            Propagation::FrozenMaterial => t,
        };
        Ok(Engine::with_material_temperature(&c, t_material)?)
    };
    let engine_p = build(t + h)?;
    let engine_m = build(t - h)?;
    let (d_sum, a_sum) = stiff_paired(&engine_p, &engine_m, n_max);
    let pref = KB / (16.0 * std::f64::consts::PI * cfg.gap * cfg.gap);
    Ok(-pref * (t * d_sum / h + a_sum))
}

/// Entropy per unit area S = -dF/dT by central differences with
/// Richardson extrapolation over h and h/2. All temperature dependences
/// (Matsubara spacing, relaxation, screening length) propagate unless
/// `FrozenMaterial` pins the material at the base temperature.
pub fn entropy_finite_difference_with(
    cfg: &ThermalConfiguration,
    t: f64,
    step: Option<f64>,
    propagation: Propagation,
) -> Result<EntropyPoint, ThermoError> {
    cfg.validate()?;
    if !(t > 0.0) {
        return Err(ThermoError::InvalidInput(format!(
            "entropy requires T > 0, got {t}"
        )));
    }
    let h = step.unwrap_or(t / 10.0);
    if !(h > 0.0) || h > t / 10.0 * (1.0 + 1e-12) {
        return Err(ThermoError::InvalidInput(format!(
            "step must satisfy 0 < h <= T/10, got h = {h}, T = {t}"
        )));
    }
    let n_max = stiff_n_max(t - h, cfg.gap);
    let s_h = entropy_central_difference(cfg, t, h, n_max, propagation)?;
    let s_h2 = entropy_central_difference(cfg, t, 0.5 * h, n_max, propagation)?;
    let richardson = (4.0 * s_h2 - s_h) / 3.0;
    let disagreement = (s_h - s_h2).abs();
    // curvature test: the two step sizes must already roughly agree
    let scale = richardson.abs().max(1e-300);
    if disagreement > 0.5 * scale && disagreement > 1e-25 {
        return Err(ThermoError::StepTooLarge {
            disagreement,
            scale,
        });
    }
    Ok(EntropyPoint {
        temperature: t,
        entropy: richardson,
        method: EntropyMethod::FiniteDifference,
        step_disagreement: disagreement,
    })
}

/// Entropy by finite differences with full temperature propagation.
pub fn entropy_finite_difference(
    cfg: &ThermalConfiguration,
    t: f64,
    step: Option<f64>,
) -> Result<EntropyPoint, ThermoError> {
    entropy_finite_difference_with(cfg, t, step, Propagation::Full)
}

/// Entropy from the temperature derivative of an Abel-Plana boundary term
/// (the integral term carries no T dependence), by central differences
/// with Richardson extrapolation.
pub fn entropy_from_boundary_term<B>(
    boundary: B,
    t: f64,
    h: f64,
) -> Result<EntropyPoint, ThermoError>
where
    B: Fn(f64) -> Result<f64, ThermoError>,
{
    if !(t > 0.0 && h > 0.0 && h < t) {
        return Err(ThermoError::InvalidInput(
            "entropy_from_boundary_term requires 0 < h < T".into(),
        ));
    }
    let s_at = |hh: f64| -> Result<f64, ThermoError> {
        Ok(-(boundary(t + hh)? - boundary(t - hh)?) / (2.0 * hh))
    };
    let s_h = s_at(h)?;
    let s_h2 = s_at(0.5 * h)?;
    Ok(EntropyPoint {
        temperature: t,
        entropy: (4.0 * s_h2 - s_h) / 3.0,
        method: EntropyMethod::AbelPlanaAnalytic,
        step_disagreement: (s_h - s_h2).abs(),
    })
}

/// Closed-form zero-temperature entropy of the screened prescription:
///
/// S(0) = kB/(4 pi) int_0^inf q dq ln[(1 - r1^2 e^{-2qd})/(1 - r2^2 e^{-2qd})]
///
/// with r_i = (delta_i - q)/(delta_i + q), delta_1 carrying the plasma
/// term wp^2/c^2 on top of the Thomas-Fermi delta_2. Negative for wp > 0.
pub fn entropy_zero_temp(
    d: f64,
    plasma_frequency: f64,
    tf_inverse_sq: f64,
    tolerance: f64,
) -> Result<EntropyPoint, ThermoError> {
    if !(d > 0.0) || plasma_frequency < 0.0 || tf_inverse_sq < 0.0 {
        return Err(ThermoError::InvalidInput(
            "entropy_zero_temp requires d > 0, wp >= 0, lambda^-2 >= 0".into(),
        ));
    }
    if plasma_frequency == 0.0 {
        return Ok(EntropyPoint {
            temperature: 0.0,
            entropy: 0.0,
            method: EntropyMethod::ZeroTemperatureClosedForm,
            step_disagreement: 0.0,
        });
    }
    let wc2 = (plasma_frequency / C) * (plasma_frequency / C);
    // integrand in u = q d, with the log difference taken cancellation-free
    let integrand = |u: f64| -> f64 {
        let q = u / d;
        let q2 = q * q;
        let d1 = (q2 + tf_inverse_sq + wc2).sqrt();
        let d2 = (q2 + tf_inverse_sq).sqrt();
        let r1 = (d1 - q) / (d1 + q);
        let r2 = (d2 - q) / (d2 + q);
        // r1 - r2 = 2 q (d1 - d2)/((d1+q)(d2+q)); d1 - d2 = wc2/(d1+d2)
        let dr = 2.0 * q * (wc2 / (d1 + d2)) / ((d1 + q) * (d2 + q));
        let e = (-2.0 * u).exp();
        let b = r2 * r2 * e;
        u * (-(dr) * (r1 + r2) * e / (1.0 - b)).ln_1p()
    };
    // split at u = 1 to tame the logarithmic scale near q -> 0
    let (low, _) =
        adaptive(integrand, 0.0, 1.0, 0.0, tolerance / 4.0).map_err(ThermoError::Quadrature)?;
    let (high, _) =
        adaptive(integrand, 1.0, 60.0, 0.0, tolerance / 4.0).map_err(ThermoError::Quadrature)?;
    let value = KB / (4.0 * std::f64::consts::PI * d * d) * (low + high);
    Ok(EntropyPoint {
        temperature: 0.0,
        entropy: value,
        method: EntropyMethod::ZeroTemperatureClosedForm,
        step_disagreement: 0.0,
    })
}

/// The closed form for a configuration: Thomas-Fermi length from the
/// carrier data, plasma frequency from the model. Ideal-metal and plasma
/// boundaries have no zero-mode mismatch, so their value is zero.
pub fn entropy_zero_temp_for(
    cfg: &ThermalConfiguration,
    tolerance: f64,
) -> Result<EntropyPoint, ThermoError> {
    let wp = match cfg.model {
        DielectricModel::IdealMetal | DielectricModel::Plasma { .. } => {
            return Ok(EntropyPoint {
                temperature: 0.0,
                entropy: 0.0,
                method: EntropyMethod::ZeroTemperatureClosedForm,
                step_disagreement: 0.0,
            })
        }
        DielectricModel::Drude {
            plasma_frequency, ..
        }
        | DielectricModel::DrudeWithCore {
            plasma_frequency, ..
        } => plasma_frequency,
    };
    let tf = thomas_fermi_inverse_sq(&cfg.carriers)?;
    entropy_zero_temp(cfg.gap, wp, tf, tolerance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NernstVerdict {
    Satisfies,
    Violates,
    Inconclusive,
}

impl std::fmt::Display for NernstVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NernstVerdict::Satisfies => write!(f, "SATISFIES"),
            NernstVerdict::Violates => write!(f, "VIOLATES"),
            NernstVerdict::Inconclusive => write!(f, "INCONCLUSIVE"),
        }
    }
}

/// Nernst-theorem analysis record.
#[derive(Debug, Clone)]
pub struct NernstReport {
    pub verdict: NernstVerdict,
    /// S(0) extrapolated from the finite-difference sequence.
    pub s0_extrapolated: f64,
    /// S(0) from the closed form.
    pub s0_closed_form: f64,
    /// |extrapolated - closed| / |closed| (infinite when closed = 0).
    pub discrepancy: f64,
    pub extrapolation_error: f64,
    pub points: Vec<EntropyPoint>,
}

/// Least-squares fit of S(T) on the monomials T^p for p in `powers`.
fn fit_powers(ts: &[f64], ss: &[f64], powers: &[u32]) -> Result<Vec<f64>, ThermoError> {
    let m = powers.len();
    let n = ts.len();
    if n < m {
        return Err(ThermoError::FitInsufficient(format!(
            "{n} points cannot determine {m} coefficients"
        )));
    }
    // normal equations A^T A x = A^T b
    let mut ata = vec![0.0f64; m * m];
    let mut x = vec![0.0f64; m];
    for k in 0..n {
        let row: Vec<f64> = powers.iter().map(|&p| ts[k].powi(p as i32)).collect();
        for i in 0..m {
            x[i] += row[i] * ss[k];
            for j in 0..m {
                ata[i * m + j] += row[i] * row[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&a, &b| ata[a * m + col].abs().total_cmp(&ata[b * m + col].abs()))
            .unwrap();
        if ata[pivot * m + col].abs() < 1e-300 {
            return Err(ThermoError::FitInsufficient(
                "singular normal equations".into(),
            ));
        }
        if pivot != col {
            for j in 0..m {
                ata.swap(col * m + j, pivot * m + j);
            }
            x.swap(col, pivot);
        }
        for row in (col + 1)..m {
            let factor = ata[row * m + col] / ata[col * m + col];
            for j in col..m {
                ata[row * m + j] -= factor * ata[col * m + j];
            }
            x[row] -= factor * x[col];
        }
    }
    for col in (0..m).rev() {
        for j in (col + 1)..m {
            let v = x[j];
            x[col] -= ata[col * m + j] * v;
        }
        x[col] /= ata[col * m + col];
    }
    Ok(x)
}

/// Fits the entropy sequence and extrapolates S(0), then compares against
/// the closed form. The temperatures must be strictly decreasing, at
/// least four points.
pub fn nernst_verdict(
    cfg: &ThermalConfiguration,
    temperatures: &[f64],
    tolerance: f64,
) -> Result<NernstReport, ThermoError> {
    if temperatures.len() < 4 || temperatures.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ThermoError::BadTemperatureSequence);
    }
    let mut points = Vec::with_capacity(temperatures.len());
    for &t in temperatures {
        points.push(entropy_finite_difference(cfg, t, None)?);
    }
    let ts: Vec<f64> = points.iter().map(|p| p.temperature).collect();
    let ss: Vec<f64> = points.iter().map(|p| p.entropy).collect();
    // Low-temperature structure of these models: S = S0 + b T^2 + c T^3 + d T^4
    // (no linear term once the relaxation channel is frozen out). The
    // alternate bases gauge basis sensitivity, the dominant uncertainty.
    let primary = fit_powers(&ts, &ss, &[0, 2, 3, 4])?[0];
    let alt_a = fit_powers(&ts, &ss, &[0, 2, 3])?[0];
    let alt_b = fit_powers(&ts, &ss, &[0, 1, 2, 3])?[0];
    let max_s = ss.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let extrapolation_error = (primary - alt_a).abs() + (primary - alt_b).abs() + 1e-7 * max_s;
    let closed = entropy_zero_temp_for(cfg, tolerance)?.entropy;
    let discrepancy = if closed != 0.0 {
        (primary - closed).abs() / closed.abs()
    } else {
        f64::INFINITY
    };
    let verdict = if primary.abs() <= 3.0 * extrapolation_error {
        NernstVerdict::Satisfies
    } else if closed == 0.0 || primary.signum() == closed.signum() {
        NernstVerdict::Violates
    } else {
        NernstVerdict::Inconclusive
    };
    Ok(NernstReport {
        verdict,
        s0_extrapolated: primary,
        s0_closed_form: closed,
        discrepancy,
        extrapolation_error,
        points,
    })
}
