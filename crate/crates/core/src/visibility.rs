//! Closed-form visibility laws and decoherence timescales.
//!
//! The laboratory configuration is a particle held at rest in a superposition of
//! two heights `x1`, `x2` in a homogeneous field `g`. The branches accumulate a
//! proper-time difference `dtau = t * g * dx / c^2`, and the internal thermal modes
//! dephase relative to each other by `omega_i * dtau`.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::constants::PhysicalConstants;
use crate::error::{domain, Result};
use crate::internal::{thermal_occupation, InternalStateSpec};

/// Default cap on the number of explicit modes accepted by [`exact_visibility`].
pub const DEFAULT_MAX_EXPLICIT_MODES: usize = 1_000_000;

/// A timescale that may be infinite when the mechanism is switched off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Timescale {
    Finite(f64),
    /// No decoherence at all (zero temperature, separation, mode count, ...).
    Infinite,
}

impl Timescale {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Timescale::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Timescale::Finite(v) => Some(*v),
            Timescale::Infinite => None,
        }
    }

    /// Seconds, with `f64::INFINITY` for the infinite case.
    pub fn seconds(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub(crate) fn from_seconds(s: f64) -> Self {
        if s.is_finite() {
            Timescale::Finite(s)
        } else {
            Timescale::Infinite
        }
    }
}

impl fmt::Display for Timescale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Timescale::Finite(v) => write!(f, "{v:e}"),
            Timescale::Infinite => f.write_str("inf"),
        }
    }
}

// JSON has no infinity; the infinite case is written as the string "inf".
impl Serialize for Timescale {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Timescale::Finite(v) => s.serialize_f64(*v),
            Timescale::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Timescale {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Timescale::Finite(v)),
            Repr::Str(s) if s == "inf" => Ok(Timescale::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("invalid timescale {s:?}"))),
        }
    }
}

/// A particle at rest in a superposition of two heights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionConfig {
    pub mass: f64,
    pub x1: f64,
    pub x2: f64,
    pub hold_time: f64,
}

impl SuperpositionConfig {
    pub fn new(mass: f64, x1: f64, x2: f64, hold_time: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(domain(format!("mass must be positive, got {mass}")));
        }
        if !(hold_time.is_finite() && hold_time >= 0.0) {
            return Err(domain(format!("hold time must be >= 0, got {hold_time}")));
        }
        if !(x1.is_finite() && x2.is_finite()) {
            return Err(domain("positions must be finite"));
        }
        Ok(SuperpositionConfig { mass, x1, x2, hold_time })
    }

    pub fn delta_x(&self) -> f64 {
        self.x2 - self.x1
    }

    /// Proper-time difference accumulated in a homogeneous field `g`.
    pub fn proper_time_difference(&self, g: f64, consts: &PhysicalConstants) -> f64 {
        lab_proper_time_difference(self.hold_time, self.delta_x(), g, consts)
    }
}

/// `dtau = t * g * dx / c^2` for two static clocks separated vertically by `dx`.
pub fn lab_proper_time_difference(t: f64, delta_x: f64, g: f64, consts: &PhysicalConstants) -> f64 {
    t * g * delta_x / consts.c2()
}

/// Gravitating body for the weak-field Schwarzschild rewrite of the timescale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzschildSpec {
    pub central_mass: f64,
    pub radius: f64,
}

impl SchwarzschildSpec {
    /// Allows `radius` down to the Schwarzschild radius itself.
    pub fn new(central_mass: f64, radius: f64, consts: &PhysicalConstants) -> Result<Self> {
        if !(central_mass.is_finite() && central_mass > 0.0) {
            return Err(domain(format!("central mass must be positive, got {central_mass}")));
        }
        let rs = schwarzschild_radius(central_mass, consts);
        if !(radius.is_finite() && radius >= rs * (1.0 - 1e-12)) {
            return Err(domain(format!(
                "radius {radius} m lies inside the Schwarzschild radius {rs} m"
            )));
        }
        Ok(SchwarzschildSpec { central_mass, radius })
    }

    pub fn at_horizon(central_mass: f64, consts: &PhysicalConstants) -> Result<Self> {
        Self::new(central_mass, schwarzschild_radius(central_mass, consts), consts)
    }

    pub fn schwarzschild_radius(&self, consts: &PhysicalConstants) -> f64 {
        schwarzschild_radius(self.central_mass, consts)
    }

    /// Newtonian surface gravity `GM/R^2`.
    pub fn surface_gravity(&self, consts: &PhysicalConstants) -> f64 {
        consts.big_g * self.central_mass / (self.radius * self.radius)
    }
}

/// `R_s = 2GM/c^2`.
pub fn schwarzschild_radius(mass: f64, consts: &PhysicalConstants) -> f64 {
    2.0 * consts.big_g * mass / consts.c2()
}

/// Which law produced a visibility curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LawTag {
    #[serde(rename = "exact-product")]
    ExactProduct,
    #[serde(rename = "high-T")]
    HighTemperature,
    #[serde(rename = "gaussian")]
    Gaussian,
    #[serde(rename = "semiclassical")]
    Semiclassical,
    #[serde(rename = "master-equation")]
    MasterEquation,
    #[serde(rename = "oracle")]
    Oracle,
}

impl LawTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            LawTag::ExactProduct => "exact-product",
            LawTag::HighTemperature => "high-T",
            LawTag::Gaussian => "gaussian",
            LawTag::Semiclassical => "semiclassical",
            LawTag::MasterEquation => "master-equation",
            LawTag::Oracle => "oracle",
        }
    }
}

impl fmt::Display for LawTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Slack allowed above 1 before a visibility value is rejected (then clamped).
const VISIBILITY_SLACK: f64 = 1e-9;

/// Interferometric visibility sampled on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub law: LawTag,
}

impl VisibilityCurve {
    /// Validates the grid and the `[0, 1]` range; values within `1e-9` above 1 are clamped.
    pub fn new(times: Vec<f64>, mut values: Vec<f64>, law: LawTag) -> Result<Self> {
        if times.len() != values.len() {
            return Err(domain(format!(
                "curve has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("curve times must be strictly increasing"));
        }
        for v in values.iter_mut() {
            if !(v.is_finite() && *v >= 0.0 && *v <= 1.0 + VISIBILITY_SLACK) {
                return Err(domain(format!("visibility {v} outside [0, 1]")));
            }
            *v = v.min(1.0);
        }
        Ok(VisibilityCurve { times, values, law })
    }

    /// Evaluates `f` at every time.
    pub fn sample<F>(times: Vec<f64>, law: LawTag, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let values = times.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
        Self::new(times, values, law)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,V,law`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "V", "law"])?;
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([t.to_string(), v.to_string(), self.law.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `|prod_i [1 + n_i (1 - exp(-i omega_i dtau))]^-1|` for explicit thermal modes.
pub fn exact_visibility(spec: &InternalStateSpec, delta_tau: f64, consts: &PhysicalConstants) -> Result<f64> {
    exact_visibility_with_limit(spec, delta_tau, DEFAULT_MAX_EXPLICIT_MODES, consts)
}

/// [`exact_visibility`] with a caller-chosen cap on the explicit mode count.
pub fn exact_visibility_with_limit(
    spec: &InternalStateSpec,
    delta_tau: f64,
    max_modes: usize,
    consts: &PhysicalConstants,
) -> Result<f64> {
    spec.validate()?;
    if !delta_tau.is_finite() {
        return Err(domain(format!("proper-time difference must be finite, got {delta_tau}")));
    }
    let freqs = spec.frequencies().ok_or_else(|| {
        domain("exact visibility needs explicit mode frequencies; use the high-temperature law")
    })?;
    if freqs.len() > max_modes {
        return Err(domain(format!(
            "{} explicit modes exceeds the limit of {max_modes}",
            freqs.len()
        )));
    }
    let temperature = spec.temperature();
    // |z|^2 = 1 + 4 n (n + 1) sin^2(omega dtau / 2); accumulate -ln V in log space.
    let mut neg_log = 0.0;
    for &w in freqs {
        let n = thermal_occupation(w, temperature, consts)?;
        let s = (0.5 * w * delta_tau).sin();
        neg_log += 0.5 * (4.0 * n * (n + 1.0) * s * s).ln_1p();
    }
    Ok((-neg_log).exp())
}

/// Dimensionless dephasing angle `k_B T g dx t / (hbar c^2)` of the high-temperature law.
pub fn high_temperature_angle(temperature: f64, delta_x: f64, g: f64, t: f64, consts: &PhysicalConstants) -> f64 {
    consts.k_b * temperature * g * delta_x * t / (consts.hbar * consts.c2())
}

/// `(1 + theta^2)^(-N/2)`, the visibility once mode frequencies drop out.
pub fn high_temperature_visibility(
    n_modes: f64,
    temperature: f64,
    delta_x: f64,
    g: f64,
    t: f64,
    consts: &PhysicalConstants,
) -> Result<f64> {
    check_law_inputs(n_modes, temperature, t)?;
    let theta = high_temperature_angle(temperature, delta_x, g, t, consts);
    Ok((-0.5 * n_modes * (theta * theta).ln_1p()).exp())
}

/// `exp(-(t / tau_dec)^2)`.
pub fn gaussian_visibility(
    n_modes: f64,
    temperature: f64,
    delta_x: f64,
    g: f64,
    t: f64,
    consts: &PhysicalConstants,
) -> Result<f64> {
    check_law_inputs(n_modes, temperature, t)?;
    match decoherence_time(n_modes, temperature, delta_x, g, consts)? {
        Timescale::Infinite => Ok(1.0),
        Timescale::Finite(tau) => {
            let r = t / tau;
            Ok((-r * r).exp())
        }
    }
}

fn check_law_inputs(n_modes: f64, temperature: f64, t: f64) -> Result<()> {
    if !(n_modes.is_finite() && n_modes >= 0.0) {
        return Err(domain(format!("mode count must be >= 0, got {n_modes}")));
    }
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(domain(format!("temperature must be >= 0, got {temperature}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(domain(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

/// `tau_dec = sqrt(2/N) hbar c^2 / (k_B T g |dx|)`; infinite when any factor vanishes.
pub fn decoherence_time(
    n_modes: f64,
    temperature: f64,
    delta_x: f64,
    g: f64,
    consts: &PhysicalConstants,
) -> Result<Timescale> {
    if !(n_modes.is_finite() && n_modes >= 0.0) {
        return Err(domain(format!("mode count must be >= 0, got {n_modes}")));
    }
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(domain(format!("temperature must be >= 0, got {temperature}")));
    }
    if !(delta_x.is_finite() && g.is_finite()) {
        return Err(domain("separation and field strength must be finite"));
    }
    if n_modes == 0.0 || temperature == 0.0 || delta_x == 0.0 || g == 0.0 {
        return Ok(Timescale::Infinite);
    }
    let tau = (2.0 / n_modes).sqrt() * consts.hbar * consts.c2()
        / (consts.k_b * temperature * g.abs() * delta_x.abs());
    Ok(Timescale::from_seconds(tau))
}

/// `tau_dec = sqrt(8/N) hbar R^2 / (k_B T R_s |dx|)`.
pub fn decoherence_time_schwarzschild(
    n_modes: f64,
    temperature: f64,
    delta_x: f64,
    body: &SchwarzschildSpec,
    consts: &PhysicalConstants,
) -> Result<Timescale> {
    // Reuse the zero/validity handling of the laboratory form.
    if decoherence_time(n_modes, temperature, delta_x, 1.0, consts)?.is_infinite() {
        return Ok(Timescale::Infinite);
    }
    let rs = body.schwarzschild_radius(consts);
    let r2 = body.radius * body.radius;
    let tau = (8.0 / n_modes).sqrt() * consts.hbar * r2 / (consts.k_b * temperature * rs * delta_x.abs());
    Ok(Timescale::from_seconds(tau))
}

/// `T_H = hbar c^3 / (8 pi k_B G M)`.
pub fn hawking_temperature(mass: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(domain(format!("mass must be positive, got {mass}")));
    }
    Ok(consts.hbar * consts.c.powi(3) / (8.0 * std::f64::consts::PI * consts.k_b * consts.big_g * mass))
}

/// First-order gravitational redshift `omega (1 + phi / c^2)`.
pub fn redshifted_frequency(omega: f64, phi: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(domain(format!("frequency must be positive, got {omega}")));
    }
    Ok(omega * (1.0 + fractional_redshift(phi, consts)))
}

/// `phi / c^2`, the fractional frequency shift. Laboratory shifts sit below `f64`
/// epsilon relative to 1, so callers needing them should use this directly.
pub fn fractional_redshift(phi: f64, consts: &PhysicalConstants) -> f64 {
    phi / consts.c2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{default_constants, SOLAR_MASS};

    fn natural() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    #[test]
    fn exact_visibility_trivial_cases() {
        let k = natural();
        let spec = InternalStateSpec::explicit(1.0, vec![0.5, 1.0, 2.0]).unwrap();
        assert_eq!(exact_visibility(&spec, 0.0, &k).unwrap(), 1.0);
        let cold = InternalStateSpec::explicit(0.0, vec![0.5, 1.0, 2.0]).unwrap();
        for dtau in [0.1, 1.0, 17.0] {
            assert_eq!(exact_visibility(&cold, dtau, &k).unwrap(), 1.0);
        }
    }

    #[test]
    fn exact_visibility_matches_direct_complex_product() {
        use num_complex::Complex64;
        let k = natural();
        let ws = vec![0.3, 1.1, 2.5];
        let spec = InternalStateSpec::explicit(0.8, ws.clone()).unwrap();
        let dtau = 0.7;
        let mut prod = Complex64::new(1.0, 0.0);
        for &w in &ws {
            let n = 1.0 / ((w / 0.8f64).exp() - 1.0);
            prod *= Complex64::new(1.0, 0.0) + n * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -w * dtau));
        }
        let direct = 1.0 / prod.norm();
        let v = exact_visibility(&spec, dtau, &k).unwrap();
        assert!((v - direct).abs() < 1e-14, "{v} vs {direct}");
    }

    #[test]
    fn exact_visibility_requires_explicit_frequencies() {
        let spec = InternalStateSpec::high_temperature(10.0, 1.0).unwrap();
        assert!(exact_visibility(&spec, 0.1, &natural()).is_err());
    }

    #[test]
    fn exact_visibility_mode_cap() {
        let spec = InternalStateSpec::explicit(1.0, vec![1.0; 11]).unwrap();
        assert!(exact_visibility_with_limit(&spec, 0.1, 10, &natural()).is_err());
        assert!(exact_visibility_with_limit(&spec, 0.1, 11, &natural()).is_ok());
    }

    #[test]
    fn exact_visibility_large_mode_count_no_underflow() {
        let spec = InternalStateSpec::explicit(1.0, vec![0.01; 100_000]).unwrap();
        let v = exact_visibility(&spec, 1.0, &natural()).unwrap();
        assert!((0.0..1e-100).contains(&v));
    }

    #[test]
    fn high_temperature_law_at_zero_time() {
        assert_eq!(
            high_temperature_visibility(1e23, 300.0, 1e-3, 9.81, 0.0, &default_constants()).unwrap(),
            1.0
        );
    }

    #[test]
    fn high_temperature_law_converges_to_inverse_e() {
        // N theta^2 = 2 => (1 + 2/N)^(-N/2) -> e^-1
        let k = natural();
        let mut last_err = f64::INFINITY;
        for n in [1e2, 1e4, 1e6] {
            let theta = (2.0f64 / n).sqrt();
            let v = high_temperature_visibility(n, 1.0, 1.0, 1.0, theta, &k).unwrap();
            let err = (v - (-1.0f64).exp()).abs();
            assert!(err < last_err);
            last_err = err;
        }
        assert!(last_err < 1e-6);
    }

    #[test]
    fn high_temperature_law_at_decoherence_time() {
        let k = default_constants();
        let tau = decoherence_time(1e23, 300.0, 1e-3, 9.81, &k).unwrap().seconds();
        let v = high_temperature_visibility(1e23, 300.0, 1e-3, 9.81, tau, &k).unwrap();
        let e = (-1.0f64).exp();
        assert!((v - e).abs() / e < 1e-6);
    }

    #[test]
    fn gaussian_law() {
        let k = default_constants();
        let tau = decoherence_time(1e23, 300.0, 1e-3, 9.81, &k).unwrap().seconds();
        assert_eq!(gaussian_visibility(1e23, 300.0, 1e-3, 9.81, 0.0, &k).unwrap(), 1.0);
        let v = gaussian_visibility(1e23, 300.0, 1e-3, 9.81, tau, &k).unwrap();
        assert!((v - 0.367_879_441).abs() < 1e-9);
    }

    #[test]
    fn gaussian_tracks_high_temperature_law() {
        let k = natural();
        for n in [1e6, 1e8] {
            let tau = decoherence_time(n, 1.0, 1.0, 1.0, &k).unwrap().seconds();
            for i in 0..=20 {
                let t = tau * i as f64 / 20.0;
                let a = gaussian_visibility(n, 1.0, 1.0, 1.0, t, &k).unwrap();
                let b = high_temperature_visibility(n, 1.0, 1.0, 1.0, t, &k).unwrap();
                assert!((a - b).abs() <= 1e-3);
            }
        }
    }

    #[test]
    fn laboratory_decoherence_time() {
        let k = default_constants();
        let tau = decoherence_time(1e23, 300.0, 1e-3, 9.81, &k).unwrap().seconds();
        assert!((0.9e-6..=1.1e-6).contains(&tau), "{tau}");
        let half = decoherence_time(1e23, 300.0, 2e-3, 9.81, &k).unwrap().seconds();
        assert_eq!(tau / half, 2.0);
        let quarter = decoherence_time(4e23, 300.0, 1e-3, 9.81, &k).unwrap().seconds();
        assert_eq!(tau / quarter, 2.0);
    }

    #[test]
    fn decoherence_time_sign_of_separation_irrelevant() {
        let k = default_constants();
        let a = decoherence_time(1e20, 10.0, 1e-3, 9.81, &k).unwrap();
        let b = decoherence_time(1e20, 10.0, -1e-3, 9.81, &k).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn decoherence_time_no_decoherence_limits() {
        let k = default_constants();
        assert!(decoherence_time(0.0, 300.0, 1e-3, 9.81, &k).unwrap().is_infinite());
        assert!(decoherence_time(1e23, 0.0, 1e-3, 9.81, &k).unwrap().is_infinite());
        assert!(decoherence_time(1e23, 300.0, 0.0, 9.81, &k).unwrap().is_infinite());
        assert!(decoherence_time(1e23, 300.0, 1e-3, 0.0, &k).unwrap().is_infinite());
        assert!(decoherence_time(-1.0, 300.0, 1e-3, 9.81, &k).is_err());
    }

    #[test]
    fn natural_units_identity() {
        let k = natural();
        for (n, t, g, dx) in [(2.0, 1.0, 1.0, 1.0), (50.0, 3.0, 0.5, 0.2), (1e6, 0.1, 2.0, 7.0)] {
            let tau = decoherence_time(n, t, dx, g, &k).unwrap().seconds();
            let id = tau * t * g * dx * (n / 2.0f64).sqrt();
            assert!((id - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn black_hole_horizon_example() {
        let k = default_constants();
        let body = SchwarzschildSpec::at_horizon(5.0 * SOLAR_MASS, &k).unwrap();
        let rs = body.schwarzschild_radius(&k);
        assert!((rs - 1.477e4).abs() < 10.0, "{rs}");
        let tau = decoherence_time_schwarzschild(1e23, 1.0, 1e-9, &body, &k).unwrap().seconds();
        assert!(tau > 0.5e-9 && tau < 2e-9, "{tau}");
    }

    #[test]
    fn schwarzschild_matches_laboratory_form() {
        let k = default_constants();
        for (m, r) in [(5.97e24, 6.371e6), (SOLAR_MASS, 7e8), (10.0 * SOLAR_MASS, 1e5)] {
            let body = SchwarzschildSpec::new(m, r, &k).unwrap();
            let a = decoherence_time_schwarzschild(1e20, 4.0, 1e-6, &body, &k).unwrap().seconds();
            let b = decoherence_time(1e20, 4.0, 1e-6, body.surface_gravity(&k), &k).unwrap().seconds();
            assert!((a - b).abs() / b < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn schwarzschild_inverse_in_rs() {
        // halve the mass at fixed R => R_s halves => tau doubles
        let k = default_constants();
        let a = SchwarzschildSpec::new(2e30, 1e7, &k).unwrap();
        let b = SchwarzschildSpec::new(1e30, 1e7, &k).unwrap();
        let ta = decoherence_time_schwarzschild(1e20, 1.0, 1e-6, &a, &k).unwrap().seconds();
        let tb = decoherence_time_schwarzschild(1e20, 1.0, 1e-6, &b, &k).unwrap().seconds();
        assert!((tb / ta - 2.0).abs() < 1e-14);
    }

    #[test]
    fn schwarzschild_spec_rejects_inside_horizon() {
        let k = default_constants();
        let rs = schwarzschild_radius(SOLAR_MASS, &k);
        assert!(SchwarzschildSpec::new(SOLAR_MASS, 0.5 * rs, &k).is_err());
        assert!(SchwarzschildSpec::new(-1.0, 1.0, &k).is_err());
    }

    #[test]
    fn hawking_temperature_of_the_sun() {
        let k = default_constants();
        let th = hawking_temperature(SOLAR_MASS, &k).unwrap();
        // independent evaluation with literal constants
        let oracle = 1.054571817e-34 * 299792458f64.powi(3)
            / (8.0 * std::f64::consts::PI * 1.380649e-23 * 6.6743e-11 * 1.989e30);
        assert!((th - oracle).abs() / oracle < 1e-12);
        assert!((th - 6.2e-8).abs() < 0.05e-8, "{th}");
        let half = hawking_temperature(2.0 * SOLAR_MASS, &k).unwrap();
        assert!((th / half - 2.0).abs() < 1e-14);
        assert!(hawking_temperature(0.0, &k).is_err());
    }

    #[test]
    fn redshift_of_frequency() {
        let k = default_constants();
        assert_eq!(redshifted_frequency(5.0, 0.0, &k).unwrap(), 5.0);
        let frac = fractional_redshift(9.81 * 1.0, &k);
        assert!((frac - 1.0915e-16).abs() < 0.001e-16, "{frac}");
        let w = 1e15;
        assert!(redshifted_frequency(w, -9.81 * 100.0, &k).unwrap() < w);
        assert!(redshifted_frequency(w, 9.81 * 100.0, &k).unwrap() > w);
    }

    #[test]
    fn curve_validation() {
        assert!(VisibilityCurve::new(vec![0.0, 1.0], vec![1.0, 0.5], LawTag::Gaussian).is_ok());
        assert!(VisibilityCurve::new(vec![0.0, 0.0], vec![1.0, 0.5], LawTag::Gaussian).is_err());
        assert!(VisibilityCurve::new(vec![0.0, 1.0], vec![1.0, 1.5], LawTag::Gaussian).is_err());
        assert!(VisibilityCurve::new(vec![0.0], vec![1.0, 1.0], LawTag::Gaussian).is_err());
        let c = VisibilityCurve::new(vec![0.0], vec![1.0 + 1e-12], LawTag::Oracle).unwrap();
        assert_eq!(c.values[0], 1.0);
    }

    #[test]
    fn curve_csv_and_json() {
        let c = VisibilityCurve::new(vec![0.0, 0.5], vec![1.0, 0.25], LawTag::HighTemperature).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,V,law\n0,1,high-T\n0.5,0.25,high-T\n");
        let json = serde_json::to_string(&c).unwrap();
        let back: VisibilityCurve = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn timescale_serialization() {
        assert_eq!(serde_json::to_string(&Timescale::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Timescale::Finite(2.5)).unwrap(), "2.5");
        let t: Timescale = serde_json::from_str("\"inf\"").unwrap();
        assert!(t.is_infinite());
    }
}
