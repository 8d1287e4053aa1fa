//! Physical constants in SI units.
//!
//! Every formula in the crate takes a [`PhysicalConstants`] value explicitly, so the
//! same code runs with CODATA values or with natural units (`hbar = c = k_B = 1`).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Newtonian constant of gravitation, m³/(kg·s²) (CODATA 2018).
pub const GRAVITATIONAL: f64 = 6.674_30e-11;
/// Standard laboratory gravitational acceleration used throughout, m/s².
pub const G_EARTH: f64 = 9.81;
/// Solar mass, kg. Fixed so the black-hole example is reproducible.
pub const SOLAR_MASS: f64 = 1.989e30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub k_b: f64,
    #[serde(rename = "G")]
    pub big_g: f64,
    pub g_earth: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        default_constants()
    }
}

/// SI defaults.
pub fn default_constants() -> PhysicalConstants {
    PhysicalConstants {
        hbar: HBAR,
        c: SPEED_OF_LIGHT,
        k_b: BOLTZMANN,
        big_g: GRAVITATIONAL,
        g_earth: G_EARTH,
    }
}

impl PhysicalConstants {
    /// `hbar = c = k_B = G = 1`, `g_earth = 1`.
    pub fn natural() -> Self {
        PhysicalConstants {
            hbar: 1.0,
            c: 1.0,
            k_b: 1.0,
            big_g: 1.0,
            g_earth: 1.0,
        }
    }

    pub fn c2(&self) -> f64 {
        self.c * self.c
    }

    /// Rejects non-positive or non-finite entries.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("hbar", self.hbar),
            ("c", self.c),
            ("k_B", self.k_b),
            ("G", self.big_g),
            ("g_earth", self.g_earth),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(domain(format!("constant {name} must be positive and finite, got {value}")));
            }
        }
        Ok(())
    }
}
