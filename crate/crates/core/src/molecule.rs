//! Physical molecule parameters and the unit conversions around them.
//!
//! Dynamics only depend on `β = B/(k_B T)` and on times measured in rotational
//! periods; everything else here is display metadata.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boltzmann constant in cm⁻¹/K.
pub const BOLTZMANN_CM_PER_K: f64 = 0.6950348;
/// Speed of light in cm/s.
pub const SPEED_OF_LIGHT_CM_PER_S: f64 = 2.997_924_58e10;
/// Reduced Planck constant in J·s.
pub const HBAR_J_S: f64 = 1.054_571_817e-34;
/// One debye in C·m.
pub const DEBYE_C_M: f64 = 3.335_640_95e-30;

/// LiCl rotational constant at the equilibrium distance, cm⁻¹.
pub const LICL_B_CM: f64 = 0.70652;
/// LiCl permanent dipole moment, debye.
pub const LICL_DIPOLE_DEBYE: f64 = 7.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeParams {
    pub name: String,
    /// Rotational constant `B`, cm⁻¹.
    pub rotational_constant_cm: f64,
    pub temperature_k: f64,
    /// Dimensionless pulse duration `ε = τ B` (B as angular frequency).
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dipole_debye: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarizability_anisotropy_a3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarizability_perpendicular_a3: Option<f64>,
}

impl MoleculeParams {
    pub fn licl(temperature_k: f64) -> Self {
        Self {
            name: "LiCl".into(),
            rotational_constant_cm: LICL_B_CM,
            temperature_k,
            epsilon: 0.01,
            dipole_debye: Some(LICL_DIPOLE_DEBYE),
            polarizability_anisotropy_a3: None,
            polarizability_perpendicular_a3: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be positive, got {v}")))
            }
        };
        positive(self.rotational_constant_cm, "rotational constant")?;
        positive(self.temperature_k, "temperature")?;
        positive(self.epsilon, "epsilon")?;
        Ok(())
    }

    /// `β = B/(k_B T)` with the given Boltzmann constant in cm⁻¹/K.
    pub fn beta_with(&self, boltzmann_cm_per_k: f64) -> f64 {
        self.rotational_constant_cm / (boltzmann_cm_per_k * self.temperature_k)
    }

    pub fn beta(&self) -> f64 {
        self.beta_with(BOLTZMANN_CM_PER_K)
    }

    /// `B` as an angular frequency, rad/s.
    pub fn angular_frequency(&self) -> f64 {
        2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_PER_S * self.rotational_constant_cm
    }

    /// `T_rot = π/B`, seconds.
    pub fn rotational_period_s(&self) -> f64 {
        std::f64::consts::PI / self.angular_frequency()
    }

    /// `τ = ε/B`, seconds.
    pub fn pulse_duration_s(&self) -> f64 {
        self.epsilon / self.angular_frequency()
    }

    /// Sets `ε` from a pulse duration in seconds.
    pub fn with_pulse_duration(mut self, tau_s: f64) -> Self {
        self.epsilon = tau_s * self.angular_frequency();
        self
    }

    /// Peak field (V/cm) of a rectangular pulse of duration `τ` producing the
    /// orientation kick area `A = μ₀ E τ / ħ`. Display only.
    pub fn orientation_field_v_per_cm(&self, kick_area: f64) -> Option<f64> {
        let mu = self.dipole_debye? * DEBYE_C_M;
        let e_v_per_m = kick_area * HBAR_J_S / (mu * self.pulse_duration_s());
        Some(e_v_per_m / 100.0)
    }
}
