//! Physical constants, ion species, RF drive parameters, and the unit
//! conversions shared by every other module.
//!
//! Everything downstream computes in SI; the conversions here are the only
//! sanctioned crossings between SI and the experiment-facing units
//! (electron-volts, motional quanta, dBc).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J s (CODATA 2018, exact via h).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Electron volt, J (exact).
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;
/// Elementary charge, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Atomic mass unit, kg.
pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;

/// Fixed CODATA constants bundled as a value type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub electron_volt: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        hbar: HBAR,
        electron_volt: ELECTRON_VOLT,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// Charge and mass of the transported ion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    /// Mass in kg.
    pub mass: f64,
    /// Charge in C.
    pub charge: f64,
    pub label: String,
}

impl IonSpecies {
    pub fn new(mass: f64, charge: f64, label: &str) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::Domain(format!("ion mass must be positive, got {mass}")));
        }
        if charge == 0.0 || !charge.is_finite() {
            return Err(Error::Domain(format!("ion charge must be nonzero, got {charge}")));
        }
        Ok(Self {
            mass,
            charge,
            label: label.to_owned(),
        })
    }

    /// 9Be+, the default transported species.
    pub fn beryllium_9() -> Self {
        Self {
            mass: 9.012_183_1 * ATOMIC_MASS,
            charge: ELEMENTARY_CHARGE,
            label: "9Be+".to_owned(),
        }
    }

    /// 24Mg+, also transported successfully.
    pub fn magnesium_24() -> Self {
        Self {
            mass: 23.985_041_7 * ATOMIC_MASS,
            charge: ELEMENTARY_CHARGE,
            label: "24Mg+".to_owned(),
        }
    }
}

impl Default for IonSpecies {
    fn default() -> Self {
        Self::beryllium_9()
    }
}

/// RF trap drive: peak voltage and drive angular frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RFDrive {
    /// Peak RF voltage V0 in volts.
    pub peak_voltage: f64,
    /// Drive angular frequency Omega_RF in rad/s.
    pub drive_angular_freq: f64,
}

impl RFDrive {
    pub fn new(peak_voltage: f64, drive_angular_freq: f64) -> Result<Self> {
        if !(peak_voltage > 0.0) {
            return Err(Error::Domain(format!(
                "peak voltage must be positive, got {peak_voltage}"
            )));
        }
        if !(drive_angular_freq > 0.0) {
            return Err(Error::Domain(format!(
                "drive angular frequency must be positive, got {drive_angular_freq}"
            )));
        }
        Ok(Self {
            peak_voltage,
            drive_angular_freq,
        })
    }
}

impl Default for RFDrive {
    /// V0 = 200 V, Omega_RF/2pi = 83 MHz.
    fn default() -> Self {
        Self {
            peak_voltage: 200.0,
            drive_angular_freq: 2.0 * std::f64::consts::PI * 83.0e6,
        }
    }
}

/// Converts a mean occupation to energy in eV at the given axial frequency.
///
/// With `include_zero_point` the result is `(nbar + 1/2) h f`, otherwise
/// `nbar h f`.
pub fn quanta_to_energy(nbar: f64, axial_freq_hz: f64, include_zero_point: bool) -> Result<f64> {
    if !(nbar >= 0.0) {
        return Err(Error::Domain(format!("nbar must be >= 0, got {nbar}")));
    }
    if !(axial_freq_hz > 0.0) {
        return Err(Error::Domain(format!(
            "axial frequency must be positive, got {axial_freq_hz}"
        )));
    }
    let n_eff = if include_zero_point { nbar + 0.5 } else { nbar };
    Ok(n_eff * PLANCK * axial_freq_hz / ELECTRON_VOLT)
}

/// Exact inverse of [`quanta_to_energy`] without the zero-point term.
pub fn energy_to_quanta(energy_ev: f64, axial_freq_hz: f64) -> Result<f64> {
    if !(energy_ev >= 0.0) {
        return Err(Error::Domain(format!("energy must be >= 0, got {energy_ev}")));
    }
    if !(axial_freq_hz > 0.0) {
        return Err(Error::Domain(format!(
            "axial frequency must be positive, got {axial_freq_hz}"
        )));
    }
    Ok(energy_ev * ELECTRON_VOLT / (PLANCK * axial_freq_hz))
}

/// Converts a dBc noise level to a one-sided fractional PSD `S_V / V0^2`
/// in 1/Hz: `10^(level/10)`.
pub fn dbc_to_fractional_psd(level_dbc: f64) -> f64 {
    10.0_f64.powf(level_dbc / 10.0)
}
