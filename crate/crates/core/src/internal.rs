//! Internal structure of the composite particle: N thermal harmonic modes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{domain, Error, Result};

/// Internal degrees of freedom of the particle.
///
/// `HighTemperature` stands for N modes with `hbar*omega << k_B*T`, where the mode
/// frequencies drop out of every observable. `Explicit` lists each angular frequency.
/// `n_modes` of the high-temperature form is a real number because realistic values
/// (~1e23) do not fit a machine integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InternalStateSpec {
    HighTemperature { n_modes: f64, temperature: f64 },
    Explicit { temperature: f64, frequencies: Vec<f64> },
}

impl InternalStateSpec {
    pub fn high_temperature(n_modes: f64, temperature: f64) -> Result<Self> {
        let spec = InternalStateSpec::HighTemperature { n_modes, temperature };
        spec.validate()?;
        Ok(spec)
    }

    pub fn explicit(temperature: f64, frequencies: Vec<f64>) -> Result<Self> {
        let spec = InternalStateSpec::Explicit { temperature, frequencies };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let temperature = self.temperature();
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(domain(format!("temperature must be finite and >= 0, got {temperature}")));
        }
        match self {
            InternalStateSpec::HighTemperature { n_modes, .. } => {
                if !(n_modes.is_finite() && *n_modes >= 0.0) {
                    return Err(domain(format!("n_modes must be finite and >= 0, got {n_modes}")));
                }
            }
            InternalStateSpec::Explicit { frequencies, .. } => {
                if let Some(bad) = frequencies.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                    return Err(domain(format!("mode frequencies must be positive, got {bad}")));
                }
            }
        }
        Ok(())
    }

    pub fn temperature(&self) -> f64 {
        match self {
            InternalStateSpec::HighTemperature { temperature, .. }
            | InternalStateSpec::Explicit { temperature, .. } => *temperature,
        }
    }

    pub fn n_modes(&self) -> f64 {
        match self {
            InternalStateSpec::HighTemperature { n_modes, .. } => *n_modes,
            InternalStateSpec::Explicit { frequencies, .. } => frequencies.len() as f64,
        }
    }

    /// Explicit frequency list, or `None` for the high-temperature form.
    pub fn frequencies(&self) -> Option<&[f64]> {
        match self {
            InternalStateSpec::HighTemperature { .. } => None,
            InternalStateSpec::Explicit { frequencies, .. } => Some(frequencies),
        }
    }

    /// Thermal occupation of every explicit mode.
    pub fn occupations(&self, consts: &PhysicalConstants) -> Result<Vec<f64>> {
        let temperature = self.temperature();
        match self.frequencies() {
            Some(ws) => ws
                .iter()
                .map(|&w| thermal_occupation(w, temperature, consts))
                .collect(),
            None => Err(domain("high-temperature spec has no explicit mode frequencies")),
        }
    }
}

/// Bose-Einstein occupation `1 / (exp(hbar*omega / k_B*T) - 1)`; zero at `T = 0`.
pub fn thermal_occupation(omega: f64, temperature: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(domain(format!("mode frequency must be positive, got {omega}")));
    }
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(domain(format!("temperature must be finite and >= 0, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = consts.hbar * omega / (consts.k_b * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Mean internal energy `<H_0>`.
pub fn mean_internal_energy(spec: &InternalStateSpec, consts: &PhysicalConstants) -> Result<f64> {
    spec.validate()?;
    let kt = consts.k_b * spec.temperature();
    match spec {
        InternalStateSpec::HighTemperature { n_modes, .. } => Ok(n_modes * kt),
        InternalStateSpec::Explicit { frequencies, .. } => {
            let occ = spec.occupations(consts)?;
            Ok(frequencies
                .iter()
                .zip(&occ)
                .map(|(w, n)| consts.hbar * w * n)
                .sum())
        }
    }
}

/// Internal energy variance `<H_0^2> - <H_0>^2`, summed over independent modes.
pub fn internal_energy_variance(spec: &InternalStateSpec, consts: &PhysicalConstants) -> Result<f64> {
    spec.validate()?;
    let kt = consts.k_b * spec.temperature();
    match spec {
        InternalStateSpec::HighTemperature { n_modes, .. } => Ok(n_modes * kt * kt),
        InternalStateSpec::Explicit { frequencies, .. } => {
            let occ = spec.occupations(consts)?;
            Ok(frequencies
                .iter()
                .zip(&occ)
                .map(|(w, n)| {
                    let e = consts.hbar * w;
                    e * e * n * (n + 1.0)
                })
                .sum())
        }
    }
}

/// Reads one angular frequency (rad/s) per line. A non-numeric first line is
/// treated as a header; blank lines and `#` comments are skipped.
pub fn load_frequencies(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_frequencies(&text, &path.display().to_string())
}

pub fn parse_frequencies(text: &str, source_name: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut first = true;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.split(',').next().unwrap_or("").trim();
        let parse_err = |message: String| Error::Parse {
            source_name: source_name.to_string(),
            line: idx + 1,
            message,
        };
        match field.parse::<f64>() {
            Ok(w) if w.is_finite() && w > 0.0 => out.push(w),
            Ok(w) => return Err(parse_err(format!("frequency must be positive, got {w}"))),
            // header row
            Err(_) if first => {}
            Err(e) => return Err(parse_err(format!("{e}: {field:?}"))),
        }
        first = false;
    }
    Ok(out)
}
