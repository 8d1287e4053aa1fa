//! Proper-time differences along semiclassical trajectory pairs.
//!
//! A composite particle carried along two well-localised paths decoheres according
//! to the characteristic function of its internal energy evaluated at the
//! proper-time difference between the paths. The per-unit-mass coupling is
//! `Gamma(x, v) = Phi(x) - v^2 / 2`, so `dtau = (1/c^2) * integral (Gamma_a - Gamma_b) dt`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{domain, Error, Result};
use crate::internal::InternalStateSpec;

/// Low-energy bound on trajectory speeds, `|v| / c`.
pub const MAX_SPEED_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `Phi(x) = g x`.
    Homogeneous { g: f64 },
    /// `Phi(x) = -G M / x` for `x > 0`.
    SchwarzschildWeak { mass: f64 },
    /// Linear interpolation through `(x, phi)` samples on a strictly increasing grid.
    Tabulated { x: Vec<f64>, phi: Vec<f64> },
}

impl PotentialSpec {
    pub fn tabulated(x: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let p = PotentialSpec::Tabulated { x, phi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Homogeneous { g } if !g.is_finite() => Err(domain("g must be finite")),
            PotentialSpec::SchwarzschildWeak { mass } if !(mass.is_finite() && *mass > 0.0) => {
                Err(domain(format!("central mass must be positive, got {mass}")))
            }
            PotentialSpec::Tabulated { x, phi } => {
                if x.len() != phi.len() || x.len() < 2 {
                    return Err(domain("tabulated potential needs at least two (x, phi) samples"));
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(domain("tabulated potential grid must be strictly increasing"));
                }
                if phi.iter().any(|p| !p.is_finite()) {
                    return Err(domain("tabulated potential values must be finite"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Reads columns `x, phi` with a header row into a tabulated potential.
    pub fn load_table(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::read_table(file, &path.display().to_string())
    }

    pub fn read_table<R: std::io::Read>(reader: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if headers != ["x", "phi"] {
            return Err(Error::Parse {
                source_name: source_name.to_string(),
                line: 1,
                message: format!("expected header [x, phi], found {headers:?}"),
            });
        }
        let (mut xs, mut phis) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut pair = [0.0; 2];
            for (c, v) in pair.iter_mut().enumerate() {
                let field = rec.get(c).unwrap_or("");
                *v = field.parse().map_err(|e| Error::Parse {
                    source_name: source_name.to_string(),
                    line: i + 2,
                    message: format!("{e}: {field:?}"),
                })?;
            }
            xs.push(pair[0]);
            phis.push(pair[1]);
        }
        Self::tabulated(xs, phis)
    }

    /// `Phi(x)` in m²/s².
    pub fn phi(&self, x: f64, consts: &PhysicalConstants) -> Result<f64> {
        if !x.is_finite() {
            return Err(domain(format!("position must be finite, got {x}")));
        }
        match self {
            PotentialSpec::Homogeneous { g } => Ok(g * x),
            PotentialSpec::SchwarzschildWeak { mass } => {
                if x <= 0.0 {
                    return Err(domain(format!("weak-field Schwarzschild potential needs x > 0, got {x}")));
                }
                Ok(-consts.big_g * mass / x)
            }
            PotentialSpec::Tabulated { x: xs, phi } => {
                let (lo, hi) = (xs[0], xs[xs.len() - 1]);
                if x < lo || x > hi {
                    return Err(domain(format!("x = {x} outside tabulated range [{lo}, {hi}]")));
                }
                let j = xs.partition_point(|&xi| xi <= x).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[j - 1], xs[j]);
                let f = (x - x0) / (x1 - x0);
                Ok(phi[j - 1] + f * (phi[j] - phi[j - 1]))
            }
        }
    }
}

/// Sampled positions and velocities of one branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSamples {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl PathSamples {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        PathSamples { x, v }
    }

    /// Particle at rest at `x` for `n` samples.
    pub fn at_rest(x: f64, n: usize) -> Self {
        PathSamples { x: vec![x; n], v: vec![0.0; n] }
    }
}

/// Two branches sampled on a shared strictly increasing time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPair {
    pub times: Vec<f64>,
    pub path_a: PathSamples,
    pub path_b: PathSamples,
}

impl TrajectoryPair {
    pub fn new(times: Vec<f64>, path_a: PathSamples, path_b: PathSamples, consts: &PhysicalConstants) -> Result<Self> {
        let pair = TrajectoryPair { times, path_a, path_b };
        pair.validate(consts)?;
        Ok(pair)
    }

    pub fn validate(&self, consts: &PhysicalConstants) -> Result<()> {
        let n = self.times.len();
        if n < 2 {
            return Err(domain("trajectory needs at least two time samples"));
        }
        for (name, p) in [("a", &self.path_a), ("b", &self.path_b)] {
            if p.x.len() != n || p.v.len() != n {
                return Err(domain(format!(
                    "path {name} has {} positions and {} velocities for {n} times",
                    p.x.len(),
                    p.v.len()
                )));
            }
            for &v in &p.v {
                check_speed(v, consts)?;
            }
        }
        if self.times.iter().any(|t| !t.is_finite()) || self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("trajectory times must be finite and strictly increasing"));
        }
        Ok(())
    }

    pub fn swapped(&self) -> Self {
        TrajectoryPair {
            times: self.times.clone(),
            path_a: self.path_b.clone(),
            path_b: self.path_a.clone(),
        }
    }

    /// Reads columns `t, x_a, v_a, x_b, v_b` with a header row.
    pub fn load_csv(path: impl AsRef<Path>, consts: &PhysicalConstants) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::read_csv(file, &path.display().to_string(), consts)
    }

    pub fn read_csv<R: std::io::Read>(reader: R, source_name: &str, consts: &PhysicalConstants) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.to_string()).collect();
        let expected = ["t", "x_a", "v_a", "x_b", "v_b"];
        if headers != expected {
            return Err(Error::Parse {
                source_name: source_name.to_string(),
                line: 1,
                message: format!("expected header {expected:?}, found {headers:?}"),
            });
        }
        let mut cols: [Vec<f64>; 5] = Default::default();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            for (c, col) in cols.iter_mut().enumerate() {
                let field = rec.get(c).unwrap_or("");
                let v = field.parse::<f64>().map_err(|e| Error::Parse {
                    source_name: source_name.to_string(),
                    line: i + 2,
                    message: format!("column {}: {e}: {field:?}", expected[c]),
                })?;
                col.push(v);
            }
        }
        let [t, xa, va, xb, vb] = cols;
        Self::new(t, PathSamples::new(xa, va), PathSamples::new(xb, vb), consts)
    }
}

fn check_speed(v: f64, consts: &PhysicalConstants) -> Result<()> {
    if !(v.is_finite() && v.abs() <= MAX_SPEED_FRACTION * consts.c) {
        return Err(domain(format!(
            "speed {v} m/s exceeds the low-energy bound {MAX_SPEED_FRACTION} c"
        )));
    }
    Ok(())
}

/// `Gamma = Phi(x) - v^2 / 2` (per unit mass).
pub fn gamma_coupling(x: f64, v: f64, pot: &PotentialSpec, consts: &PhysicalConstants) -> Result<f64> {
    check_speed(v, consts)?;
    Ok(pot.phi(x, consts)? - 0.5 * v * v)
}

/// `tau_a - tau_b`, trapezoid rule on the shared time grid.
pub fn proper_time_difference(pair: &TrajectoryPair, pot: &PotentialSpec, consts: &PhysicalConstants) -> Result<f64> {
    pair.validate(consts)?;
    pot.validate()?;
    let integrand = (0..pair.times.len())
        .map(|i| {
            let ga = gamma_coupling(pair.path_a.x[i], pair.path_a.v[i], pot, consts)?;
            let gb = gamma_coupling(pair.path_b.x[i], pair.path_b.v[i], pot, consts)?;
            Ok(ga - gb)
        })
        .collect::<Result<Vec<f64>>>()?;
    let integral: f64 = pair
        .times
        .windows(2)
        .zip(integrand.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum();
    Ok(integral / consts.c2())
}

/// Occupation-number distribution of one internal mode with frequency `omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDistribution {
    pub omega: f64,
    /// `probabilities[n]` is the weight of Fock level `n`.
    pub probabilities: Vec<f64>,
}

impl ModeDistribution {
    pub fn new(omega: f64, probabilities: Vec<f64>) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(domain(format!("mode frequency must be positive, got {omega}")));
        }
        if probabilities.is_empty() || probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(domain("occupation probabilities must be non-negative"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(domain(format!("occupation probabilities sum to {total}, not 1")));
        }
        Ok(ModeDistribution { omega, probabilities })
    }

    /// `|sum_n p_n exp(-i n omega dtau)|`.
    pub fn characteristic_modulus(&self, delta_tau: f64) -> f64 {
        let step = Complex64::from_polar(1.0, -self.omega * delta_tau);
        let mut phase = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for &p in &self.probabilities {
            acc += p * phase;
            phase *= step;
        }
        acc.norm()
    }
}

/// `|<exp(-i H_0 dtau / hbar)>|` for arbitrary per-mode occupation distributions.
pub fn characteristic_visibility(modes: &[ModeDistribution], delta_tau: f64) -> f64 {
    modes.iter().map(|m| m.characteristic_modulus(delta_tau)).product()
}

/// `|<exp(-i H_0 dtau / hbar)>|` for thermal internal modes.
///
/// Each thermal mode has the geometric distribution `p_n = (1 - q) q^n` with
/// `q = exp(-hbar omega / k_B T)`, whose characteristic function sums to
/// `(1 - q) / (1 - q exp(-i omega dtau))`.
pub fn semiclassical_visibility(spec: &InternalStateSpec, delta_tau: f64, consts: &PhysicalConstants) -> Result<f64> {
    spec.validate()?;
    let freqs = spec
        .frequencies()
        .ok_or_else(|| domain("semiclassical visibility needs explicit mode frequencies"))?;
    let temperature = spec.temperature();
    if temperature == 0.0 || delta_tau == 0.0 {
        return Ok(1.0);
    }
    let mut log_v = 0.0;
    for &w in freqs {
        let q = (-consts.hbar * w / (consts.k_b * temperature)).exp();
        let denom = Complex64::new(1.0, 0.0) - q * Complex64::from_polar(1.0, -w * delta_tau);
        log_v += (1.0 - q).ln() - denom.norm().ln();
    }
    Ok(log_v.exp())
}

/// `sqrt(-g00) = sqrt(1 + 2 Phi/c^2 + 2 Phi^2/c^4)` for the weak-field metric.
pub fn redshift_factor(phi: f64, consts: &PhysicalConstants) -> Result<f64> {
    Ok(1.0 + redshift_offset(phi, consts)?)
}

/// `sqrt(-g00) - 1`, computed without cancellation for tiny potentials.
pub fn redshift_offset(phi: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !phi.is_finite() {
        return Err(domain(format!("potential must be finite, got {phi}")));
    }
    let u = phi / consts.c2();
    let a = 2.0 * u + 2.0 * u * u;
    if !(1.0 + a > 0.0) {
        return Err(domain(format!("-g00 = {} is not positive", 1.0 + a)));
    }
    Ok((0.5 * a.ln_1p()).exp_m1())
}

/// Coefficients of the effective weak-field Hamiltonian
/// `m c^2 + (1 + Phi/c^2) H_0 + m Phi + m Phi^2 / (2 c^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveHamiltonian {
    /// Multiplier of the internal Hamiltonian, `1 + Phi/c^2`.
    pub internal_energy_factor: f64,
    /// Potential energy per unit rest mass, `Phi + Phi^2 / (2 c^2)`.
    pub potential_per_mass: f64,
}

pub fn effective_hamiltonian(phi: f64, consts: &PhysicalConstants) -> Result<EffectiveHamiltonian> {
    if !phi.is_finite() {
        return Err(domain(format!("potential must be finite, got {phi}")));
    }
    let c2 = consts.c2();
    Ok(EffectiveHamiltonian {
        internal_energy_factor: 1.0 + phi / c2,
        potential_per_mass: phi + phi * phi / (2.0 * c2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::default_constants;
    use crate::visibility::exact_visibility;

    fn natural() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    #[test]
    fn gamma_static_and_flat_limits() {
        let k = default_constants();
        let pot = PotentialSpec::Homogeneous { g: 9.81 };
        assert_eq!(gamma_coupling(2.0, 0.0, &pot, &k).unwrap(), 9.81 * 2.0);
        let flat = PotentialSpec::Homogeneous { g: 0.0 };
        assert_eq!(gamma_coupling(2.0, 30.0, &flat, &k).unwrap(), -450.0);
    }

    #[test]
    fn gamma_circular_orbit() {
        let k = default_constants();
        let mass = 5.97e24;
        let pot = PotentialSpec::SchwarzschildWeak { mass };
        let r = 4.2e7;
        let v = (k.big_g * mass / r).sqrt();
        let g = gamma_coupling(r, v, &pot, &k).unwrap();
        let expected = -1.5 * k.big_g * mass / r;
        assert!((g - expected).abs() / expected.abs() < 1e-14);
    }

    #[test]
    fn gamma_errors() {
        let k = default_constants();
        let pot = PotentialSpec::SchwarzschildWeak { mass: 1e24 };
        assert!(gamma_coupling(-1.0, 0.0, &pot, &k).is_err());
        let hom = PotentialSpec::Homogeneous { g: 9.81 };
        assert!(gamma_coupling(0.0, 1e6, &hom, &k).is_err());
    }

    #[test]
    fn tabulated_potential_interpolates() {
        let k = default_constants();
        let pot = PotentialSpec::tabulated(vec![0.0, 1.0, 3.0], vec![0.0, 10.0, 30.0]).unwrap();
        assert_eq!(pot.phi(0.5, &k).unwrap(), 5.0);
        assert_eq!(pot.phi(2.0, &k).unwrap(), 20.0);
        assert_eq!(pot.phi(3.0, &k).unwrap(), 30.0);
        assert_eq!(pot.phi(0.0, &k).unwrap(), 0.0);
        assert!(pot.phi(3.5, &k).is_err());
        assert!(PotentialSpec::tabulated(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    fn static_pair(x_a: f64, x_b: f64, t: f64, n: usize, k: &PhysicalConstants) -> TrajectoryPair {
        let times: Vec<f64> = (0..n).map(|i| t * i as f64 / (n - 1) as f64).collect();
        TrajectoryPair::new(times, PathSamples::at_rest(x_a, n), PathSamples::at_rest(x_b, n), k).unwrap()
    }

    #[test]
    fn identical_paths_have_no_difference() {
        let k = default_constants();
        let pair = static_pair(1.0, 1.0, 2.0, 11, &k);
        let pot = PotentialSpec::Homogeneous { g: 9.81 };
        assert_eq!(proper_time_difference(&pair, &pot, &k).unwrap(), 0.0);
    }

    #[test]
    fn static_heights_reproduce_laboratory_shift() {
        let k = default_constants();
        let pot = PotentialSpec::Homogeneous { g: 9.81 };
        let pair = static_pair(1e-3, 0.0, 1.5, 7, &k);
        let dtau = proper_time_difference(&pair, &pot, &k).unwrap();
        let expected = 9.81 * 1e-3 * 1.5 / k.c2();
        assert!((dtau - expected).abs() / expected < 1e-12);
        let swapped = proper_time_difference(&pair.swapped(), &pot, &k).unwrap();
        assert_eq!(swapped, -dtau);
    }

    #[test]
    fn trajectory_validation() {
        let k = default_constants();
        let bad = TrajectoryPair::new(vec![0.0, 1.0], PathSamples::at_rest(0.0, 3), PathSamples::at_rest(0.0, 2), &k);
        assert!(bad.is_err());
        let bad = TrajectoryPair::new(vec![1.0, 0.0], PathSamples::at_rest(0.0, 2), PathSamples::at_rest(0.0, 2), &k);
        assert!(bad.is_err());
        let fast = PathSamples::new(vec![0.0, 0.0], vec![0.0, 1e6]);
        assert!(TrajectoryPair::new(vec![0.0, 1.0], fast, PathSamples::at_rest(0.0, 2), &k).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let k = default_constants();
        let text = "t,x_a,v_a,x_b,v_b\n0,1,0,0,0\n1,1,0,0,0\n";
        let pair = TrajectoryPair::read_csv(text.as_bytes(), "mem", &k).unwrap();
        assert_eq!(pair.times, vec![0.0, 1.0]);
        assert_eq!(pair.path_a.x, vec![1.0, 1.0]);
        assert!(TrajectoryPair::read_csv("t,x\n0,1\n".as_bytes(), "mem", &k).is_err());
        assert!(TrajectoryPair::read_csv("t,x_a,v_a,x_b,v_b\n0,a,0,0,0\n".as_bytes(), "mem", &k).is_err());
    }

    #[test]
    fn semiclassical_equals_exact_for_thermal_modes() {
        let k = natural();
        let spec = InternalStateSpec::explicit(1.3, vec![0.2, 0.9, 1.7, 4.0]).unwrap();
        assert_eq!(semiclassical_visibility(&spec, 0.0, &k).unwrap(), 1.0);
        for dtau in [0.01, 0.3, 1.0, 2.5, -0.7] {
            let a = semiclassical_visibility(&spec, dtau, &k).unwrap();
            let b = exact_visibility(&spec, dtau, &k).unwrap();
            assert!((a - b).abs() <= 1e-13 * b.max(1e-300), "{a} vs {b}");
        }
    }

    #[test]
    fn fock_superposition_gives_cosine() {
        let w = 2.0;
        let mode = ModeDistribution::new(w, vec![0.5, 0.5]).unwrap();
        for dtau in [0.0, 0.3, 1.0, 2.2] {
            let v = characteristic_visibility(std::slice::from_ref(&mode), dtau);
            assert!((v - (w * dtau / 2.0).cos().abs()).abs() < 1e-15);
        }
        assert!(ModeDistribution::new(1.0, vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn redshift_factor_limits() {
        let k = default_constants();
        assert_eq!(redshift_factor(0.0, &k).unwrap(), 1.0);
        let phi = 1e-16 * k.c2();
        let off = redshift_offset(phi, &k).unwrap();
        // second-order term is 5e-33; allow one ulp (1.2e-32) on top
        assert!((off - phi / k.c2()).abs() <= 2e-32);
        assert!((off - 1e-16).abs() <= 1e-30);
        let h = effective_hamiltonian(9.81 * 3.0, &k).unwrap();
        assert_eq!(h.internal_energy_factor, 1.0 + 9.81 * 3.0 / k.c2());
        assert!(redshift_factor(f64::NAN, &k).is_err());
    }

    #[test]
    fn redshift_factor_second_order_bound() {
        let k = natural();
        for i in -50..=50 {
            let u = i as f64 * 2e-5;
            let off = redshift_offset(u, &k).unwrap();
            assert!((off - u).abs() <= 3.0 * u * u + 1e-300);
        }
    }

    #[test]
    fn potential_table_round_trip() {
        let p = PotentialSpec::read_table("x,phi\n0,0\n2,4\n".as_bytes(), "mem").unwrap();
        assert_eq!(p.phi(1.0, &default_constants()).unwrap(), 2.0);
        assert!(PotentialSpec::read_table("x,y\n0,0\n".as_bytes(), "mem").is_err());
    }
}
