//! Competing decoherence by emission of thermal radiation.
//!
//! `tau_em = (int dk k^2 c g(k) sigma_eff(k) dx^2)^-1` with a user-supplied mode
//! density `g(k)` and effective cross section `sigma_eff(k)`. Because `tau_em` scales as
//! `dx^-2` while the time-dilation timescale scales as `dx^-1`, emission always wins at
//! large enough separations.

use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{domain, Error, Result};
use crate::visibility::{decoherence_time, Timescale};

/// Panels used by the default quadrature (`2^12`).
pub const DEFAULT_PANELS: usize = 4096;
/// Relative gap below which two timescales are reported as a boundary.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// A non-negative function of wavenumber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectralFunction {
    Constant { value: f64 },
    /// `amplitude * (k / k0)^exponent`.
    PowerLaw { amplitude: f64, k0: f64, exponent: f64 },
    /// Linear interpolation; evaluating outside the table is an error.
    Tabulated { k: Vec<f64>, values: Vec<f64> },
    /// Stand-in mode density `k^2 / pi^2 * (exp(hbar c k / k_B T) - 1)^-1`.
    Blackbody { temperature: f64 },
}

impl SpectralFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpectralFunction::Constant { value } if !(value.is_finite() && *value >= 0.0) => {
                Err(domain(format!("constant spectral value must be >= 0, got {value}")))
            }
            SpectralFunction::PowerLaw { amplitude, k0, exponent } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0 && k0.is_finite() && *k0 > 0.0 && exponent.is_finite()) {
                    return Err(domain("power law needs amplitude >= 0, k0 > 0 and a finite exponent"));
                }
                Ok(())
            }
            SpectralFunction::Tabulated { k, values } => {
                if k.len() != values.len() || k.len() < 2 {
                    return Err(domain("tabulated spectrum needs at least two samples"));
                }
                if k.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(domain("tabulated wavenumbers must be strictly increasing"));
                }
                if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                    return Err(domain(format!("tabulated spectral values must be >= 0, got {v}")));
                }
                Ok(())
            }
            SpectralFunction::Blackbody { temperature } if !(temperature.is_finite() && *temperature >= 0.0) => {
                Err(domain(format!("blackbody temperature must be >= 0, got {temperature}")))
            }
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, k: f64, consts: &PhysicalConstants) -> Result<f64> {
        let v = match self {
            SpectralFunction::Constant { value } => *value,
            SpectralFunction::PowerLaw { amplitude, k0, exponent } => amplitude * (k / k0).powf(*exponent),
            SpectralFunction::Tabulated { k: ks, values } => {
                let (lo, hi) = (ks[0], ks[ks.len() - 1]);
                if k < lo || k > hi {
                    return Err(domain(format!("k = {k} outside tabulated range [{lo}, {hi}]")));
                }
                let j = ks.partition_point(|&x| x <= k).clamp(1, ks.len() - 1);
                let f = (k - ks[j - 1]) / (ks[j] - ks[j - 1]);
                values[j - 1] + f * (values[j] - values[j - 1])
            }
            SpectralFunction::Blackbody { temperature } => {
                if *temperature == 0.0 || k == 0.0 {
                    0.0
                } else {
                    let x = consts.hbar * consts.c * k / (consts.k_b * temperature);
                    k * k / (std::f64::consts::PI * std::f64::consts::PI) / x.exp_m1()
                }
            }
        };
        if !(v.is_finite() && v >= 0.0) {
            return Err(domain(format!("spectral function is {v} at k = {k}")));
        }
        Ok(v)
    }

    fn at_temperature(&self, temperature: f64) -> Self {
        match self {
            SpectralFunction::Blackbody { .. } => SpectralFunction::Blackbody { temperature },
            other => other.clone(),
        }
    }
}

/// Mode density and cross section over `[k_min, k_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionModel {
    pub mode_density: SpectralFunction,
    pub cross_section: SpectralFunction,
    pub k_min: f64,
    pub k_max: f64,
    pub panels: usize,
    /// Where the model came from; carried into every derived output.
    pub provenance: String,
}

impl EmissionModel {
    pub fn new(
        mode_density: SpectralFunction,
        cross_section: SpectralFunction,
        k_min: f64,
        k_max: f64,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let model = EmissionModel {
            mode_density,
            cross_section,
            k_min,
            k_max,
            panels: DEFAULT_PANELS,
            provenance: provenance.into(),
        };
        model.validate()?;
        Ok(model)
    }

    /// Blackbody stand-in mode density with a power-law cross section. Not a material model.
    pub fn blackbody_stand_in(
        temperature: f64,
        cross_section: SpectralFunction,
        k_min: f64,
        k_max: f64,
    ) -> Result<Self> {
        Self::new(
            SpectralFunction::Blackbody { temperature },
            cross_section,
            k_min,
            k_max,
            "stand-in: blackbody mode density k^2/pi^2 n(k), user cross section",
        )
    }

    /// Reads columns `k, g, sigma` (header row required).
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
        if headers != ["k", "g", "sigma"] {
            return Err(Error::Parse {
                source_name: source_name.to_string(),
                line: 1,
                message: format!("expected header [k, g, sigma], found {headers:?}"),
            });
        }
        let (mut ks, mut gs, mut ss) = (Vec::new(), Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut vals = [0.0; 3];
            for (c, v) in vals.iter_mut().enumerate() {
                let field = rec.get(c).unwrap_or("");
                *v = field.parse().map_err(|e| Error::Parse {
                    source_name: source_name.to_string(),
                    line: i + 2,
                    message: format!("{e}: {field:?}"),
                })?;
            }
            if vals[1] < 0.0 || vals[2] < 0.0 {
                return Err(Error::Parse {
                    source_name: source_name.to_string(),
                    line: i + 2,
                    message: "mode density and cross section must be non-negative".into(),
                });
            }
            ks.push(vals[0]);
            gs.push(vals[1]);
            ss.push(vals[2]);
        }
        let (k_min, k_max) = match (ks.first(), ks.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(domain("emission table is empty")),
        };
        Self::new(
            SpectralFunction::Tabulated { k: ks.clone(), values: gs },
            SpectralFunction::Tabulated { k: ks, values: ss },
            k_min,
            k_max,
            format!("table: {source_name}"),
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.mode_density.validate()?;
        self.cross_section.validate()?;
        if !(self.k_min.is_finite() && self.k_max.is_finite() && self.k_min >= 0.0 && self.k_min < self.k_max) {
            return Err(domain(format!(
                "need 0 <= k_min < k_max, got [{}, {}]",
                self.k_min, self.k_max
            )));
        }
        if self.panels == 0 {
            return Err(domain("quadrature needs at least one panel"));
        }
        Ok(())
    }

    /// Copy with temperature-dependent parts evaluated at `temperature`.
    pub fn with_temperature(&self, temperature: f64) -> Self {
        EmissionModel {
            mode_density: self.mode_density.at_temperature(temperature),
            cross_section: self.cross_section.at_temperature(temperature),
            ..self.clone()
        }
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = panels;
        self
    }

    /// `int k^2 c g(k) sigma(k) dk` on `panels` uniform trapezoid panels.
    pub fn rate_per_area(&self, consts: &PhysicalConstants) -> Result<f64> {
        self.validate()?;
        let n = self.panels;
        let h = (self.k_max - self.k_min) / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            let k = if i == n { self.k_max } else { self.k_min + h * i as f64 };
            let f = k * k * consts.c * self.mode_density.evaluate(k, consts)? * self.cross_section.evaluate(k, consts)?;
            sum += if i == 0 || i == n { 0.5 * f } else { f };
        }
        Ok(sum * h)
    }
}

/// Emission decoherence time for separation `delta_x`.
pub fn tau_emission(delta_x: f64, model: &EmissionModel, consts: &PhysicalConstants) -> Result<Timescale> {
    if !delta_x.is_finite() {
        return Err(domain("separation must be finite"));
    }
    let rate = model.rate_per_area(consts)? * delta_x * delta_x;
    if rate == 0.0 {
        return Ok(Timescale::Infinite);
    }
    Ok(Timescale::from_seconds(1.0 / rate))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    TimeDilation,
    Emission,
    /// Equal within [`TIE_TOLERANCE`], or both switched off.
    Boundary,
}

impl Mechanism {
    /// Faster mechanism, i.e. the one with the shorter timescale.
    pub fn classify(tau_dec: Timescale, tau_em: Timescale) -> Mechanism {
        match (tau_dec, tau_em) {
            (Timescale::Infinite, Timescale::Infinite) => Mechanism::Boundary,
            (Timescale::Infinite, _) => Mechanism::Emission,
            (_, Timescale::Infinite) => Mechanism::TimeDilation,
            (Timescale::Finite(d), Timescale::Finite(e)) => {
                if (d - e).abs() <= TIE_TOLERANCE * d.max(e) {
                    Mechanism::Boundary
                } else if d < e {
                    Mechanism::TimeDilation
                } else {
                    Mechanism::Emission
                }
            }
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mechanism::TimeDilation => "time_dilation",
            Mechanism::Emission => "emission",
            Mechanism::Boundary => "boundary",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dominance {
    pub mechanism: Mechanism,
    pub tau_dec: Timescale,
    pub tau_em: Timescale,
}

/// Compares both timescales; the model is evaluated at `temperature`.
pub fn dominant_mechanism(
    n_modes: f64,
    temperature: f64,
    delta_x: f64,
    g: f64,
    model: &EmissionModel,
    consts: &PhysicalConstants,
) -> Result<Dominance> {
    let tau_dec = decoherence_time(n_modes, temperature, delta_x, g, consts)?;
    let tau_em = tau_emission(delta_x, &model.with_temperature(temperature), consts)?;
    Ok(Dominance {
        mechanism: Mechanism::classify(tau_dec, tau_em),
        tau_dec,
        tau_em,
    })
}

/// Separation at which `tau_dec = tau_em`. `None` if either mechanism is off.
///
/// With `tau_dec = A / dx` and `tau_em = B / dx^2` the crossing is `dx* = B / A`;
/// time dilation dominates below it.
pub fn crossover_separation(
    n_modes: f64,
    temperature: f64,
    g: f64,
    model: &EmissionModel,
    consts: &PhysicalConstants,
) -> Result<Option<f64>> {
    let a = decoherence_time(n_modes, temperature, 1.0, g, consts)?;
    let b = tau_emission(1.0, &model.with_temperature(temperature), consts)?;
    Ok(match (a, b) {
        (Timescale::Finite(a), Timescale::Finite(b)) => Some(b / a),
        _ => None,
    })
}

/// `N = (4/3) pi r^3 n` for a sphere of radius `r` with `n` oscillating modes per m³.
pub fn modes_in_sphere(radius: f64, number_density: f64) -> f64 {
    4.0 / 3.0 * std::f64::consts::PI * radius.powi(3) * number_density
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum ScanAxis {
    /// Sphere radii at fixed separation.
    Radius(Vec<f64>),
    /// Separations at fixed radius.
    Separation(Vec<f64>),
}

/// How the emission cross section grows with particle size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusScaling {
    Fixed,
    /// Cross section multiplied by `(r / reference_radius)^exponent`.
    Power { reference_radius: f64, exponent: f64 },
}

impl RadiusScaling {
    fn factor(&self, radius: f64) -> f64 {
        match self {
            RadiusScaling::Fixed => 1.0,
            RadiusScaling::Power { reference_radius, exponent } => (radius / reference_radius).powf(*exponent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeScan {
    pub axis: ScanAxis,
    pub temperatures: Vec<f64>,
    /// Oscillating modes per m³ (no material database is built in).
    pub number_density: f64,
    /// Used when scanning separations.
    pub radius: f64,
    /// Used when scanning radii.
    pub separation: f64,
    pub g: f64,
    pub scaling: RadiusScaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeCell {
    pub axis1: f64,
    pub temperature: f64,
    pub tau_dec: Timescale,
    pub tau_em: Timescale,
    pub mechanism: Mechanism,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeMap {
    /// `radius` or `separation`.
    pub axis1_name: String,
    /// Axis-1 major, temperature minor.
    pub cells: Vec<RegimeCell>,
    pub provenance: String,
}

impl RegimeMap {
    pub fn cell(&self, i_axis: usize, i_temp: usize, n_temps: usize) -> &RegimeCell {
        &self.cells[i_axis * n_temps + i_temp]
    }

    /// CSV with columns `axis1, axis2, tau_dec, tau_em, flag`; infinite timescales are `inf`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["axis1", "axis2", "tau_dec", "tau_em", "flag"])?;
        for c in &self.cells {
            w.write_record([
                c.axis1.to_string(),
                c.temperature.to_string(),
                timescale_field(c.tau_dec),
                timescale_field(c.tau_em),
                c.mechanism.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn timescale_field(t: Timescale) -> String {
    match t {
        Timescale::Finite(v) => v.to_string(),
        Timescale::Infinite => "inf".into(),
    }
}

/// Evaluates every (axis, temperature) cell in parallel; output order is fixed.
pub fn regime_scan(scan: &RegimeScan, model: &EmissionModel, consts: &PhysicalConstants) -> Result<RegimeMap> {
    model.validate()?;
    if !(scan.number_density.is_finite() && scan.number_density >= 0.0) {
        return Err(domain("number density must be >= 0"));
    }
    let (name, values) = match &scan.axis {
        ScanAxis::Radius(v) => ("radius", v),
        ScanAxis::Separation(v) => ("separation", v),
    };
    let n_t = scan.temperatures.len();
    let cells = (0..values.len() * n_t)
        .into_par_iter()
        .map(|idx| {
            let a = values[idx / n_t];
            let temperature = scan.temperatures[idx % n_t];
            let (radius, dx) = match scan.axis {
                ScanAxis::Radius(_) => (a, scan.separation),
                ScanAxis::Separation(_) => (scan.radius, a),
            };
            let n_modes = modes_in_sphere(radius, scan.number_density);
            let tau_dec = decoherence_time(n_modes, temperature, dx, scan.g, consts)?;
            let tau_em = match tau_emission(dx, &model.with_temperature(temperature), consts)? {
                Timescale::Finite(t) => Timescale::from_seconds(t / scan.scaling.factor(radius)),
                Timescale::Infinite => Timescale::Infinite,
            };
            Ok(RegimeCell {
                axis1: a,
                temperature,
                tau_dec,
                tau_em,
                mechanism: Mechanism::classify(tau_dec, tau_em),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegimeMap {
        axis1_name: name.to_string(),
        cells,
        provenance: model.provenance.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::default_constants;

    fn natural() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    fn flat_model(g: f64, sigma: f64, k1: f64, k2: f64) -> EmissionModel {
        EmissionModel::new(
            SpectralFunction::Constant { value: g },
            SpectralFunction::Constant { value: sigma },
            k1,
            k2,
            "test",
        )
        .unwrap()
    }

    #[test]
    fn zero_cross_section_never_decoheres() {
        let m = flat_model(1.0, 0.0, 0.0, 10.0);
        assert!(tau_emission(1.0, &m, &natural()).unwrap().is_infinite());
    }

    #[test]
    fn quadratic_in_separation() {
        let k = natural();
        let m = flat_model(2.0, 0.5, 1.0, 3.0);
        let a = tau_emission(1.0, &m, &k).unwrap().seconds();
        let b = tau_emission(0.5, &m, &k).unwrap().seconds();
        assert!((b / a - 4.0).abs() < 1e-12);
    }

    #[test]
    fn constant_spectrum_closed_form() {
        let k = default_constants();
        let (g, s, k1, k2, dx) = (3.0e-4, 2.0e-20, 1.0e3, 5.0e4, 1e-6);
        let m = flat_model(g, s, k1, k2);
        let tau = tau_emission(dx, &m, &k).unwrap().seconds();
        let exact = 1.0 / (k.c * g * s * (k2.powi(3) - k1.powi(3)) / 3.0 * dx * dx);
        assert!((tau - exact).abs() / exact < 1e-6, "{tau} vs {exact}");
    }

    #[test]
    fn refinement_converges() {
        let k = default_constants();
        let m = EmissionModel::blackbody_stand_in(
            4.0,
            SpectralFunction::PowerLaw { amplitude: 1e-18, k0: 100.0, exponent: 2.0 },
            1.0,
            5e3,
        )
        .unwrap();
        let coarse = m.clone().with_panels(2048).rate_per_area(&k).unwrap();
        let fine = m.with_panels(4096).rate_per_area(&k).unwrap();
        assert!((coarse - fine).abs() / fine <= 1e-4);
    }

    #[test]
    fn negative_table_rejected() {
        let text = "k,g,sigma\n1,1,1\n2,-1,1\n";
        assert!(EmissionModel::read_table(text.as_bytes(), "mem").is_err());
        let text = "k,g,sigma\n1,1,1\n2,1,1\n";
        let m = EmissionModel::read_table(text.as_bytes(), "mem").unwrap();
        assert_eq!((m.k_min, m.k_max), (1.0, 2.0));
        assert!(m.provenance.contains("mem"));
    }

    #[test]
    fn dominance_limits() {
        let k = default_constants();
        let none = flat_model(1.0, 0.0, 0.0, 1.0);
        let d = dominant_mechanism(1e10, 1.0, 1e-6, 9.81, &none, &k).unwrap();
        assert_eq!(d.mechanism, Mechanism::TimeDilation);
        let some = flat_model(1.0, 1.0, 0.0, 1.0);
        let d = dominant_mechanism(0.0, 1.0, 1e-6, 9.81, &some, &k).unwrap();
        assert_eq!(d.mechanism, Mechanism::Emission);
        let d = dominant_mechanism(0.0, 1.0, 1e-6, 9.81, &none, &k).unwrap();
        assert_eq!(d.mechanism, Mechanism::Boundary);
    }

    #[test]
    fn tie_is_boundary() {
        let a = Timescale::Finite(1.0);
        assert_eq!(Mechanism::classify(a, Timescale::Finite(1.0 + 1e-12)), Mechanism::Boundary);
        assert_eq!(Mechanism::classify(a, Timescale::Finite(1.1)), Mechanism::TimeDilation);
        assert_eq!(Mechanism::classify(a, Timescale::Finite(0.9)), Mechanism::Emission);
    }

    #[test]
    fn crossover_matches_bisection() {
        let k = natural();
        let m = flat_model(1.0, 1.0, 0.0, 1.0);
        let (n, t, g) = (100.0, 2.0, 1.0);
        let star = crossover_separation(n, t, g, &m, &k).unwrap().unwrap();
        let gap = |dx: f64| {
            let d = dominant_mechanism(n, t, dx, g, &m, &k).unwrap();
            (d.tau_em.seconds() / d.tau_dec.seconds()).ln()
        };
        let (mut lo, mut hi) = (1e-6, 1e6);
        assert!(gap(lo) > 0.0 && gap(hi) < 0.0);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - star).abs() / star < 1e-9);
        assert_eq!(
            dominant_mechanism(n, t, star * 0.5, g, &m, &k).unwrap().mechanism,
            Mechanism::TimeDilation
        );
        assert_eq!(
            dominant_mechanism(n, t, star * 2.0, g, &m, &k).unwrap().mechanism,
            Mechanism::Emission
        );
    }

    fn radius_scan(model_sigma: f64) -> (RegimeScan, EmissionModel) {
        let scan = RegimeScan {
            axis: ScanAxis::Radius((0..12).map(|i| 1e-7 * 1.6f64.powi(i)).collect()),
            temperatures: (0..30).map(|i| 0.05 * 1.25f64.powi(i)).collect(),
            number_density: 1e28,
            radius: 0.0,
            separation: 1e-6,
            g: 9.81,
            scaling: RadiusScaling::Power { reference_radius: 1e-6, exponent: 3.0 },
        };
        let model = EmissionModel::blackbody_stand_in(
            1.0,
            SpectralFunction::PowerLaw { amplitude: model_sigma, k0: 1e3, exponent: 1.0 },
            1.0,
            5e4,
        )
        .unwrap();
        (scan, model)
    }

    #[test]
    fn zero_cross_section_scan_is_all_time_dilation() {
        let k = default_constants();
        let (scan, model) = radius_scan(0.0);
        let map = regime_scan(&scan, &model, &k).unwrap();
        assert!(map.cells.iter().all(|c| c.mechanism == Mechanism::TimeDilation));
    }

    #[test]
    fn scan_cells_are_consistent_and_single_cell_matches() {
        let k = default_constants();
        let (scan, model) = radius_scan(1e-16);
        let map = regime_scan(&scan, &model, &k).unwrap();
        for c in &map.cells {
            assert_eq!(c.mechanism, Mechanism::classify(c.tau_dec, c.tau_em));
        }
        let one = RegimeScan {
            axis: ScanAxis::Separation(vec![2e-6]),
            temperatures: vec![0.7],
            radius: 1e-6,
            scaling: RadiusScaling::Fixed,
            ..scan
        };
        let cell = regime_scan(&one, &model, &k).unwrap().cells[0];
        let d = dominant_mechanism(modes_in_sphere(1e-6, 1e28), 0.7, 2e-6, 9.81, &model, &k).unwrap();
        assert_eq!((cell.tau_dec, cell.tau_em, cell.mechanism), (d.tau_dec, d.tau_em, d.mechanism));
    }

    #[test]
    fn temperature_boundary_monotone_in_radius() {
        let k = default_constants();
        let (scan, model) = radius_scan(1e-16);
        let map = regime_scan(&scan, &model, &k).unwrap();
        let n_t = scan.temperatures.len();
        let n_r = match &scan.axis {
            ScanAxis::Radius(v) => v.len(),
            _ => unreachable!(),
        };
        let mut boundaries = Vec::new();
        for i in 0..n_r {
            // time dilation at low T, emission above
            let flags: Vec<Mechanism> = (0..n_t).map(|j| map.cell(i, j, n_t).mechanism).collect();
            let first_em = flags.iter().position(|m| *m == Mechanism::Emission).unwrap_or(n_t);
            assert!(flags[first_em..].iter().all(|m| *m != Mechanism::TimeDilation), "{flags:?}");
            boundaries.push(first_em);
        }
        assert!(boundaries.windows(2).all(|w| w[1] <= w[0]), "{boundaries:?}");
        assert!(boundaries[0] != boundaries[n_r - 1], "{boundaries:?}");
    }

    #[test]
    fn regime_csv_format() {
        let map = RegimeMap {
            axis1_name: "radius".into(),
            cells: vec![RegimeCell {
                axis1: 1e-6,
                temperature: 2.0,
                tau_dec: Timescale::Finite(0.5),
                tau_em: Timescale::Infinite,
                mechanism: Mechanism::TimeDilation,
            }],
            provenance: "test".into(),
        };
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "axis1,axis2,tau_dec,tau_em,flag\n0.000001,2,0.5,inf,time_dilation\n"
        );
    }
}
