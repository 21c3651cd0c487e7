//! WebAssembly bindings for the browser demo: gold plates with a
//! selectable dielectric model and screening prescription.
//!
//! Build with `wasm-pack build --target web` and open `www/index.html`
//! through any static file server.

use casimir_core::constants::ev_to_angular_frequency;
use casimir_core::lifshitz::{pressure, zero_mode_gamma1, Geometry, ThermalConfiguration};
use casimir_core::materials::{
    gold_drude, DielectricModel, ScreeningChannels, ScreeningLength, ScreeningPlacement,
    ScreeningRule,
};
use casimir_core::thermo::{entropy_finite_difference, entropy_zero_temp_for};
use wasm_bindgen::prelude::*;

fn build_config(model: &str, screening: &str, gap: f64, temperature: f64) -> Result<ThermalConfiguration, JsValue> {
    let (drude, carriers) = gold_drude(6.0);
    let model = match model {
        "ideal" => DielectricModel::IdealMetal,
        "plasma" => DielectricModel::Plasma {
            plasma_frequency: ev_to_angular_frequency(9.0),
        },
        "drude" => drude,
        other => return Err(JsValue::from_str(&format!("unknown model `{other}`"))),
    };
    let placement = match screening {
        "none" => ScreeningPlacement::None,
        "n0" => ScreeningPlacement::ZeroFrequencyOnly,
        "all" => ScreeningPlacement::AllTerms,
        other => return Err(JsValue::from_str(&format!("unknown screening `{other}`"))),
    };
    // Debye-Hückel above 30 K, Thomas-Fermi below (where it diverges)
    let length = if temperature > 30.0 {
        ScreeningLength::DebyeHuckel
    } else {
        ScreeningLength::ThomasFermi
    };
    Ok(ThermalConfiguration {
        gap,
        temperature,
        geometry: Geometry::ParallelPlates,
        model,
        carriers,
        screening: ScreeningRule {
            placement,
            length,
            channels: ScreeningChannels::Both,
        },
    })
}

/// Pressure versus separation: returns [d_nm, P_pa, d_nm, P_pa, ...].
#[wasm_bindgen]
pub fn pressure_sweep(
    model: &str,
    screening: &str,
    d_min_nm: f64,
    d_max_nm: f64,
    points: usize,
    temperature_k: f64,
) -> Result<Vec<f64>, JsValue> {
    if points < 2 || d_min_nm <= 0.0 || d_max_nm <= d_min_nm {
        return Err(JsValue::from_str("need 0 < d_min < d_max and points >= 2"));
    }
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let d_nm = d_min_nm + (d_max_nm - d_min_nm) * i as f64 / (points - 1) as f64;
        let cfg = build_config(model, screening, d_nm * 1e-9, temperature_k)?;
        let p = pressure(&cfg, 1e-6).map_err(|e| JsValue::from_str(&e.to_string()))?;
        out.push(d_nm);
        out.push(p.pressure);
    }
    Ok(out)
}

/// Entropy versus temperature at fixed separation:
/// returns [T_K, S, T_K, S, ...]. Temperatures below 30 K get slow.
#[wasm_bindgen]
pub fn entropy_curve(
    model: &str,
    screening: &str,
    d_nm: f64,
    t_min_k: f64,
    t_max_k: f64,
    points: usize,
) -> Result<Vec<f64>, JsValue> {
    if points < 2 || t_min_k <= 0.0 || t_max_k <= t_min_k {
        return Err(JsValue::from_str("need 0 < t_min < t_max and points >= 2"));
    }
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let t = t_min_k + (t_max_k - t_min_k) * i as f64 / (points - 1) as f64;
        let cfg = build_config(model, screening, d_nm * 1e-9, t)?;
        let s = entropy_finite_difference(&cfg, t, None)
            .map_err(|e| JsValue::from_str(&e.to_string()))?;
        out.push(t);
        out.push(s.entropy);
    }
    Ok(out)
}

/// Closed-form zero-temperature entropy for the screened Drude gold
/// configuration at the given separation, J/(K m^2).
#[wasm_bindgen]
pub fn entropy_zero_temperature(d_nm: f64) -> Result<f64, JsValue> {
    let cfg = build_config("drude", "all", d_nm * 1e-9, 1.0)?;
    entropy_zero_temp_for(&cfg, 1e-9)
        .map(|p| p.entropy)
        .map_err(|e| JsValue::from_str(&e.to_string()))
}

/// TE zero-mode reflection coefficient versus transverse wavevector:
/// returns [q_per_m, r_te, ...] on a log-spaced grid.
#[wasm_bindgen]
pub fn zero_mode_reflection(
    model: &str,
    screening: &str,
    q_min: f64,
    q_max: f64,
    points: usize,
    temperature_k: f64,
) -> Result<Vec<f64>, JsValue> {
    if points < 2 || q_min <= 0.0 || q_max <= q_min {
        return Err(JsValue::from_str("need 0 < q_min < q_max and points >= 2"));
    }
    let cfg = build_config(model, screening, 200e-9, temperature_k)?;
    let policy = cfg
        .policy_at(temperature_k)
        .map_err(|e| JsValue::from_str(&e.to_string()))?;
    let ratio = (q_max / q_min).ln();
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let q = q_min * (ratio * i as f64 / (points - 1) as f64).exp();
        let g1 = zero_mode_gamma1(q, &policy, &cfg.model)
            .map_err(|e| JsValue::from_str(&e.to_string()))?;
        let r = if g1.is_infinite() {
            1.0
        } else {
            (g1 - q) / (g1 + q)
        };
        out.push(q);
        out.push(r);
    }
    Ok(out)
}
