use crate::error::{Result, SubquantumError};

/// Physical constants of the model: `hbar`, particle mass `m`, angular
/// frequency `omega` of the reference oscillator, and the thermal energy `kT`.
///
/// Two derived coefficients appear throughout the crate and are exposed as
/// methods rather than stored, so they can never drift from their defining
/// formulas:
///
/// * `diffusion`:  D = hbar / (2 m)
/// * `inv_action`: alpha = 1 / (omega * hbar)
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    hbar: f64,
    mass: f64,
    omega: f64,
    kt: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(SubquantumError::InvalidConstant { name, value })
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64, omega: f64, kt: f64) -> Result<Self> {
        Ok(Self {
            hbar: positive("hbar", hbar)?,
            mass: positive("mass", mass)?,
            omega: positive("omega", omega)?,
            kt: positive("kT", kt)?,
        })
    }

    /// Natural units: hbar = m = omega = 1 and kT = hbar * omega.
    pub fn natural() -> Self {
        Self { hbar: 1.0, mass: 1.0, omega: 1.0, kt: 1.0 }
    }

    /// Like [`PhysicalConstants::new`] with the thermal energy pinned to the
    /// oscillator quantum, kT = hbar * omega.
    pub fn with_thermal_quantum(hbar: f64, mass: f64, omega: f64) -> Result<Self> {
        Self::new(hbar, mass, omega, hbar * omega)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn kt(&self) -> f64 {
        self.kt
    }

    /// Osmotic diffusion coefficient D = hbar / (2 m).
    pub fn diffusion(&self) -> f64 {
        self.hbar / (2.0 * self.mass)
    }

    /// Inverse action scale alpha = 1 / (omega * hbar).
    pub fn inv_action(&self) -> f64 {
        1.0 / (self.omega * self.hbar)
    }
}
