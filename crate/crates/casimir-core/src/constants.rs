//! Physical constants (CODATA 2018) and unit conversions.
//!
//! Every dimensional quantity in this crate is SI internally; the
//! conversions here are the only place where eV, cm^-3 or nm enter.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact).
pub const KB: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s (exact).
pub const C: f64 = 299_792_458.0;
/// Elementary charge, C (exact).
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_8128e-12;
/// Electron mass, kg.
pub const M_ELECTRON: f64 = 9.109_383_7015e-31;
/// One electronvolt, J (exact).
pub const EV: f64 = E_CHARGE;

/// Riemann zeta(3) (Apery's constant).
pub const ZETA_3: f64 = 1.202_056_903_159_594_2;

/// Converts a photon/plasmon energy in eV to an angular frequency in rad/s.
pub fn ev_to_angular_frequency(energy_ev: f64) -> f64 {
    energy_ev * EV / HBAR
}

/// Converts a carrier concentration in cm^-3 to m^-3.
pub fn per_cm3_to_per_m3(c_cm3: f64) -> f64 {
    c_cm3 * 1e6
}

/// Converts nanometres to metres.
pub fn nm_to_m(nm: f64) -> f64 {
    nm * 1e-9
}

/// The constants table printed by `print-constants`, as (name, value, unit).
pub fn constants_table() -> Vec<(&'static str, f64, &'static str)> {
    vec![
        ("hbar", HBAR, "J s"),
        ("k_B", KB, "J/K"),
        ("c", C, "m/s"),
        ("e", E_CHARGE, "C"),
        ("epsilon_0", EPSILON_0, "F/m"),
        ("m_e", M_ELECTRON, "kg"),
        ("eV", EV, "J"),
        ("zeta(3)", ZETA_3, ""),
    ]
}
