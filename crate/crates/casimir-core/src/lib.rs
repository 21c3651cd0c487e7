//! Thermal Casimir free energy, pressure, sphere-plate force and entropy
//! from the Lifshitz Matsubara representation, with interchangeable
//! dielectric models (ideal metal, plasma, Drude, Drude plus core
//! constant) and free-carrier screening prescriptions (Debye-Hückel,
//! Thomas-Fermi, applied to the zero mode only or to every term).
//!
//! The crate also carries the low-temperature machinery needed to probe
//! the Nernst heat theorem (Abel-Plana summation, finite-difference
//! entropy, the closed-form zero-temperature entropy) and a comparison
//! harness that scores theory curves against experimental datasets with
//! confidence-band exclusion verdicts.

pub mod compare;
pub mod constants;
pub mod lifshitz;
pub mod materials;
pub mod quadrature;
pub mod sweep;
pub mod thermo;

pub use lifshitz::{
    free_energy_channel, free_energy_total, matsubara_frequency, pressure, sphere_plate_force,
    Channel, ChannelResult, FreeEnergyResult, Geometry, LifshitzError, ThermalConfiguration,
};
pub use materials::{
    debye_huckel_inverse_sq, fermi_energy_free_electron, permittivity_imag,
    thomas_fermi_inverse_sq, CarrierProperties, DielectricModel, MaterialError, ScreeningChannels,
    ScreeningLength, ScreeningPlacement, ScreeningPolicy, ScreeningRule,
};
