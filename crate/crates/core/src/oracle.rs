//! Brute-force validators for the closed-form visibility laws.
//!
//! Nothing here calls into [`crate::visibility`] or [`crate::internal`]: occupations are
//! recomputed from `hbar`, `k_B`, the mode frequencies and the temperature.
//!
//! Monte Carlo draws use ChaCha8. The sample budget is cut into blocks of
//! [`MC_BLOCK`] samples; block `b` uses a generator seeded with `seed` on stream `b`,
//! so estimates are bit-identical for any thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{domain, Error, Result};
use crate::internal::InternalStateSpec;

/// Samples per deterministic RNG block.
pub const MC_BLOCK: u64 = 1 << 14;
/// Largest `n (1 - cos(omega dtau))` accepted by the Monte Carlo estimator.
pub const MC_PHASE_BOUND: f64 = 0.5;
/// Largest number of modes in the joint unitary oracle.
pub const MAX_JOINT_MODES: usize = 4;
/// Per-mode Fock cutoff ceiling in the joint unitary oracle.
pub const MAX_JOINT_CUTOFF: usize = 128;
/// Largest number of joint internal basis states.
pub const MAX_JOINT_DIMENSION: usize = 1 << 27;
pub const RNG_NAME: &str = "ChaCha8 (rand_chacha), stream = block index";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub fock_cutoff: usize,
    /// Largest neglected thermal tail probability per mode.
    pub tail_tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            n_samples: 1_000_000,
            seed: 20_240_917,
            fock_cutoff: 128,
            tail_tolerance: 1e-9,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(domain("n_samples must be >= 1"));
        }
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance < 1.0) {
            return Err(domain(format!("tail tolerance must lie in (0, 1), got {}", self.tail_tolerance)));
        }
        Ok(())
    }
}

/// One internal mode as seen by the oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
struct OracleMode {
    omega: f64,
    /// Boltzmann ratio `exp(-hbar omega / k_B T)`; the thermal state is `p_n = (1 - q) q^n`.
    q: f64,
}

impl OracleMode {
    fn mean_occupation(&self) -> f64 {
        self.q / (1.0 - self.q)
    }

    /// `P(n > cutoff) = q^(cutoff + 1)`.
    fn tail(&self, cutoff: usize) -> f64 {
        self.q.powf(cutoff as f64 + 1.0)
    }

    fn required_cutoff(&self, tolerance: f64) -> usize {
        if self.q == 0.0 {
            return 0;
        }
        let k = (tolerance.ln() / self.q.ln()).ceil() - 1.0;
        let mut k = k.max(0.0) as usize;
        while self.tail(k) > tolerance {
            k += 1;
        }
        k
    }
}

fn oracle_modes(spec: &InternalStateSpec, consts: &PhysicalConstants) -> Result<Vec<OracleMode>> {
    consts.validate()?;
    let (temperature, freqs) = match spec {
        InternalStateSpec::Explicit { temperature, frequencies } => (*temperature, frequencies),
        InternalStateSpec::HighTemperature { .. } => {
            return Err(domain("oracles need explicit mode frequencies"));
        }
    };
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(domain(format!("temperature must be finite and >= 0, got {temperature}")));
    }
    freqs
        .iter()
        .map(|&omega| {
            if !(omega.is_finite() && omega > 0.0) {
                return Err(domain(format!("mode frequency must be positive, got {omega}")));
            }
            let q = if temperature == 0.0 {
                0.0
            } else {
                (-consts.hbar * omega / (consts.k_b * temperature)).exp()
            };
            Ok(OracleMode { omega, q })
        })
        .collect()
}

/// Estimate with one standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub visibility: f64,
    pub standard_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

/// Running complex mean and sum of squared deviations for one mode.
#[derive(Debug, Clone, Copy)]
struct Moments {
    n: f64,
    mean: Complex64,
    m2: f64,
}

impl Moments {
    const EMPTY: Moments = Moments {
        n: 0.0,
        mean: Complex64 { re: 0.0, im: 0.0 },
        m2: 0.0,
    };

    fn push(&mut self, x: Complex64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += (d.conj() * (x - self.mean)).re;
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * (other.n / n),
            m2: self.m2 + other.m2 + d.norm_sqr() * self.n * other.n / n,
        }
    }
}

/// Thermal coherent-state Monte Carlo estimate of the visibility.
///
/// Each mode's amplitude is a complex Gaussian with per-component variance `n/2`; the
/// branch overlap is `exp(|alpha|^2 (exp(i omega dtau) - 1))`. The result is the modulus
/// of the product of per-mode sample means; the error combines per-mode relative errors
/// in quadrature.
pub fn mc_visibility(
    spec: &InternalStateSpec,
    delta_tau: f64,
    cfg: &OracleConfig,
    consts: &PhysicalConstants,
) -> Result<McEstimate> {
    cfg.validate()?;
    if !delta_tau.is_finite() {
        return Err(domain("proper-time difference must be finite"));
    }
    let modes = oracle_modes(spec, consts)?;
    let mut setup = Vec::with_capacity(modes.len());
    for (i, m) in modes.iter().enumerate() {
        let nbar = m.mean_occupation();
        let delta = m.omega * delta_tau;
        let load = nbar * (1.0 - delta.cos());
        if load > MC_PHASE_BOUND {
            return Err(Error::OraclePrecondition(format!(
                "mode {i}: n(1 - cos(omega dtau)) = {load:.4} exceeds {MC_PHASE_BOUND}; \
                 the estimator variance grows too fast to certify the result"
            )));
        }
        setup.push(((0.5 * nbar).sqrt(), Complex64::from_polar(1.0, delta) - 1.0));
    }

    let n_blocks = cfg.n_samples.div_ceil(MC_BLOCK);
    let blocks: Vec<Vec<Moments>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b);
            let count = MC_BLOCK.min(cfg.n_samples - b * MC_BLOCK);
            let mut acc = vec![Moments::EMPTY; setup.len()];
            for _ in 0..count {
                for (m, &(sigma, kernel)) in acc.iter_mut().zip(&setup) {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    let a2 = sigma * sigma * (re * re + im * im);
                    m.push((kernel * a2).exp());
                }
            }
            acc
        })
        .collect();
    let mut totals = vec![Moments::EMPTY; setup.len()];
    for block in blocks {
        for (t, m) in totals.iter_mut().zip(block) {
            *t = t.merge(m);
        }
    }

    let n = cfg.n_samples as f64;
    let mut product = Complex64::new(1.0, 0.0);
    let mut rel2 = 0.0;
    for t in &totals {
        product *= t.mean;
        let var = if n > 1.0 { t.m2 / (n - 1.0) } else { 0.0 };
        let se = (var / n).sqrt();
        let r = se / t.mean.norm();
        rel2 += if r.is_finite() { r * r } else { f64::INFINITY };
    }
    let visibility = product.norm();
    Ok(McEstimate {
        visibility,
        standard_error: visibility * rel2.sqrt(),
        n_samples: cfg.n_samples,
        seed: cfg.seed,
    })
}

/// Truncated Fock-sum value together with a bound on its error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockEstimate {
    pub visibility: f64,
    /// Sum of neglected tail probabilities plus a rounding allowance.
    pub truncation_bound: f64,
    pub cutoffs: Vec<usize>,
}

fn rounding_allowance(terms: usize) -> f64 {
    4.0 * f64::EPSILON * (terms as f64 + 1.0)
}

fn truncated_characteristic(probabilities: impl Iterator<Item = f64>, omega_dtau: f64) -> Complex64 {
    let step = Complex64::from_polar(1.0, -omega_dtau);
    let mut phase = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for p in probabilities {
        acc += phase * p;
        phase *= step;
    }
    acc
}

/// Product over modes of `|sum_{n <= cutoff} p_n exp(-i n omega dtau)|` for thermal `p_n`.
pub fn fock_visibility(
    spec: &InternalStateSpec,
    delta_tau: f64,
    cfg: &OracleConfig,
    consts: &PhysicalConstants,
) -> Result<FockEstimate> {
    cfg.validate()?;
    if !delta_tau.is_finite() {
        return Err(domain("proper-time difference must be finite"));
    }
    let modes = oracle_modes(spec, consts)?;
    let mut v = 1.0;
    let mut bound = 0.0;
    let mut terms = 0;
    for m in &modes {
        let tail = m.tail(cfg.fock_cutoff);
        if tail > cfg.tail_tolerance {
            return Err(Error::CutoffTooSmall {
                cutoff: cfg.fock_cutoff,
                required: m.required_cutoff(cfg.tail_tolerance),
                tail,
                tolerance: cfg.tail_tolerance,
            });
        }
        let q = m.q;
        let probs = (0..=cfg.fock_cutoff).scan(1.0 - q, |p, _| {
            let cur = *p;
            *p *= q;
            Some(cur)
        });
        v *= truncated_characteristic(probs, m.omega * delta_tau).norm();
        bound += tail;
        terms += cfg.fock_cutoff + 1;
    }
    Ok(FockEstimate {
        visibility: v,
        truncation_bound: bound + rounding_allowance(terms),
        cutoffs: vec![cfg.fock_cutoff; modes.len()],
    })
}

/// [`fock_visibility`] for user-given occupation distributions `(omega, p_n)`.
///
/// Missing probability `1 - sum p_n` counts as tail and must not exceed the tolerance.
pub fn fock_visibility_distribution(
    modes: &[(f64, Vec<f64>)],
    delta_tau: f64,
    cfg: &OracleConfig,
) -> Result<FockEstimate> {
    cfg.validate()?;
    let mut v = 1.0;
    let mut bound = 0.0;
    let mut terms = 0;
    let mut cutoffs = Vec::with_capacity(modes.len());
    for (omega, probs) in modes {
        if probs.is_empty() || probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(domain("occupation probabilities must be non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(domain(format!("occupation probabilities sum to {total} > 1")));
        }
        let tail = (1.0 - total).max(0.0);
        if tail > cfg.tail_tolerance {
            return Err(Error::CutoffTooSmall {
                cutoff: probs.len() - 1,
                required: probs.len(),
                tail,
                tolerance: cfg.tail_tolerance,
            });
        }
        v *= truncated_characteristic(probs.iter().copied(), omega * delta_tau).norm();
        bound += tail;
        terms += probs.len();
        cutoffs.push(probs.len() - 1);
    }
    Ok(FockEstimate {
        visibility: v,
        truncation_bound: bound + rounding_allowance(terms),
        cutoffs,
    })
}

/// Setup of the two-point joint evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoPointSetup {
    pub mass: f64,
    pub x1: f64,
    pub x2: f64,
    pub t: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointResult {
    /// `2 |<x1| Tr_int rho(t) |x2>|`.
    pub visibility: f64,
    /// `arg <x1| Tr_int rho(t) |x2>` in `[0, 2 pi)`.
    pub total_phase: f64,
    /// Phase of the internal ground-state sector in `[0, 2 pi)`.
    pub rest_mass_phase: f64,
    pub cutoffs: Vec<usize>,
    /// Number of joint internal basis states enumerated.
    pub dimension: usize,
    pub truncation_bound: f64,
}

/// Exact diagonal evolution of `{x1, x2} (x) truncated Fock modes`.
///
/// `H = sum_i hbar omega_i n_i (1 + g x / c^2) + m g x`, starting from the equal
/// superposition of `x1` and `x2` times the thermal internal state. Per-mode cutoffs are
/// the smallest with tail below `tail_tolerance / N`, capped at
/// `min(cfg.fock_cutoff, MAX_JOINT_CUTOFF)`. The whole joint basis is enumerated.
pub fn two_point_unitary_oracle(
    spec: &InternalStateSpec,
    setup: &TwoPointSetup,
    cfg: &OracleConfig,
    consts: &PhysicalConstants,
) -> Result<TwoPointResult> {
    cfg.validate()?;
    let modes = oracle_modes(spec, consts)?;
    if modes.len() > MAX_JOINT_MODES {
        return Err(domain(format!(
            "joint oracle handles at most {MAX_JOINT_MODES} modes, got {}",
            modes.len()
        )));
    }
    for (name, v) in [("mass", setup.mass), ("x1", setup.x1), ("x2", setup.x2), ("t", setup.t), ("g", setup.g)] {
        if !v.is_finite() {
            return Err(domain(format!("{name} must be finite")));
        }
    }
    if setup.mass < 0.0 || setup.t < 0.0 {
        return Err(domain("mass and time must be >= 0"));
    }

    let cap = cfg.fock_cutoff.min(MAX_JOINT_CUTOFF);
    let per_mode = cfg.tail_tolerance / modes.len().max(1) as f64;
    let mut cutoffs = Vec::with_capacity(modes.len());
    let mut tail_sum = 0.0;
    for m in &modes {
        let k = m.required_cutoff(per_mode);
        if k > cap {
            return Err(Error::CutoffTooSmall {
                cutoff: cap,
                required: k,
                tail: m.tail(cap),
                tolerance: per_mode,
            });
        }
        tail_sum += m.tail(k);
        cutoffs.push(k);
    }
    let dimension = cutoffs
        .iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k + 1))
        .filter(|&d| d <= MAX_JOINT_DIMENSION)
        .ok_or_else(|| domain(format!("joint dimension exceeds {MAX_JOINT_DIMENSION}; cutoffs {cutoffs:?}")))?;

    let hbar = consts.hbar;
    let c2 = consts.c * consts.c;
    // phase accumulated by branch x: -E(x, n) t / hbar
    let branch_phase = |x: f64, levels: &[usize]| -> f64 {
        let internal: f64 = modes
            .iter()
            .zip(levels)
            .map(|(m, &n)| m.omega * n as f64)
            .sum();
        -(internal * (1.0 + setup.g * x / c2) + setup.mass * setup.g * x / hbar) * setup.t
    };
    let probability = |levels: &[usize]| -> f64 {
        modes
            .iter()
            .zip(levels)
            .map(|(m, &n)| (1.0 - m.q) * m.q.powi(n as i32))
            .product()
    };
    let element = |levels: &[usize]| -> Complex64 {
        let p = probability(levels);
        let u1 = Complex64::from_polar(1.0, branch_phase(setup.x1, levels));
        let u2 = Complex64::from_polar(1.0, branch_phase(setup.x2, levels));
        0.5 * p * u1 * u2.conj()
    };

    let strides: Vec<usize> = cutoffs.iter().map(|k| k + 1).collect();
    let rho12: Complex64 = (0..dimension)
        .into_par_iter()
        .with_min_len(1 << 12)
        .map(|mut idx| {
            let mut levels = [0usize; MAX_JOINT_MODES];
            for (l, s) in levels.iter_mut().zip(&strides) {
                *l = idx % s;
                idx /= s;
            }
            element(&levels[..strides.len()])
        })
        .reduce(|| Complex64::new(0.0, 0.0), |a, b| a + b);

    let ground = element(&[0; MAX_JOINT_MODES][..modes.len()]);
    let tau = std::f64::consts::TAU;
    Ok(TwoPointResult {
        visibility: 2.0 * rho12.norm(),
        total_phase: rho12.arg().rem_euclid(tau),
        rest_mass_phase: ground.arg().rem_euclid(tau),
        cutoffs,
        dimension,
        truncation_bound: tail_sum + rounding_allowance(dimension),
    })
}

/// Auditable record of one Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub version: String,
    pub oracle: String,
    pub rng: String,
    pub seed: u64,
    pub n_samples: u64,
    pub spec: InternalStateSpec,
    pub delta_tau: f64,
    pub constants: PhysicalConstants,
    pub estimate: f64,
    pub standard_error: f64,
}

impl OracleReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs [`mc_visibility`] and packages the inputs with the result.
pub fn mc_report(
    spec: &InternalStateSpec,
    delta_tau: f64,
    cfg: &OracleConfig,
    consts: &PhysicalConstants,
) -> Result<OracleReport> {
    let est = mc_visibility(spec, delta_tau, cfg, consts)?;
    Ok(OracleReport {
        version: crate::VERSION.to_string(),
        oracle: "coherent-state monte carlo".into(),
        rng: RNG_NAME.into(),
        seed: cfg.seed,
        n_samples: cfg.n_samples,
        spec: spec.clone(),
        delta_tau,
        constants: *consts,
        estimate: est.visibility,
        standard_error: est.standard_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    /// Explicit spec at `T = 1` (natural units) with the given occupations.
    fn with_occupations(nbar: &[f64]) -> InternalStateSpec {
        let freqs = nbar.iter().map(|n| (1.0 + 1.0 / n).ln()).collect();
        InternalStateSpec::Explicit { temperature: 1.0, frequencies: freqs }
    }

    fn closed_single(nbar: f64, delta: f64) -> f64 {
        let z = Complex64::new(1.0, 0.0) + nbar * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -delta));
        1.0 / z.norm()
    }

    #[test]
    fn zero_delay_is_exact() {
        let spec = with_occupations(&[0.5, 2.0]);
        let est = mc_visibility(&spec, 0.0, &OracleConfig { n_samples: 5000, ..Default::default() }, &nat()).unwrap();
        assert_eq!(est.visibility, 1.0);
        assert_eq!(est.standard_error, 0.0);
        let f = fock_visibility(&spec, 0.0, &OracleConfig::default(), &nat()).unwrap();
        assert!((f.visibility - 1.0).abs() <= f.truncation_bound);
    }

    #[test]
    fn single_mode_matches_closed_form() {
        let spec = with_occupations(&[1.0]);
        let omega = 2f64.ln();
        let dtau = 0.2 / omega;
        let est = mc_visibility(&spec, dtau, &OracleConfig::default(), &nat()).unwrap();
        let exact = closed_single(1.0, 0.2);
        assert!((est.visibility - exact).abs() <= 3.0 * est.standard_error, "{est:?} vs {exact}");
        assert!(est.standard_error > 0.0 && est.standard_error < 1e-3);
    }

    #[test]
    fn three_mode_mixed_case() {
        // one shared temperature and delay fix n_i once omega_i dtau = 0.1, 0.2, 0.3
        let target = [0.1, 0.2, 0.3];
        let spec = InternalStateSpec::Explicit { temperature: 1.0, frequencies: target.to_vec() };
        let est = mc_visibility(&spec, 1.0, &OracleConfig::default(), &nat()).unwrap();
        let exact: f64 = target.iter().map(|&w| closed_single(1.0 / w.exp_m1(), w)).product();
        assert!((est.visibility - exact).abs() / exact < 0.01);
        assert!((est.visibility - exact).abs() <= 3.0 * est.standard_error);
    }

    #[test]
    fn reproducible_and_thread_independent() {
        let spec = with_occupations(&[1.5, 0.3]);
        let cfg = OracleConfig { n_samples: 100_003, seed: 7, ..Default::default() };
        let a = mc_visibility(&spec, 0.3, &cfg, &nat()).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| mc_visibility(&spec, 0.3, &cfg, &nat()).unwrap());
        assert_eq!(a.visibility.to_bits(), b.visibility.to_bits());
        assert_eq!(a.standard_error.to_bits(), b.standard_error.to_bits());
        let c = mc_visibility(&spec, 0.3, &OracleConfig { seed: 8, ..cfg }, &nat()).unwrap();
        assert_ne!(a.visibility, c.visibility);
    }

    #[test]
    fn refuses_large_phase_load() {
        let spec = with_occupations(&[5.0]);
        let omega = 1.2f64.ln();
        let err = mc_visibility(&spec, 1.0 / omega, &OracleConfig::default(), &nat()).unwrap_err();
        assert!(matches!(err, Error::OraclePrecondition(_)));
    }

    #[test]
    fn fock_thermal_single_mode() {
        let eps = 1e-9;
        for nbar in [0.1, 1.0, 5.0] {
            let spec = with_occupations(&[nbar]);
            let omega = (1.0 + 1.0 / nbar).ln();
            let cfg = OracleConfig { tail_tolerance: eps, fock_cutoff: 200, ..Default::default() };
            let f = fock_visibility(&spec, 0.4 / omega, &cfg, &nat()).unwrap();
            let exact = closed_single(nbar, 0.4);
            assert!((f.visibility - exact).abs() / exact <= 10.0 * eps);
        }
    }

    #[test]
    fn fock_cold_limit() {
        let spec = InternalStateSpec::Explicit { temperature: 0.0, frequencies: vec![1.0, 2.0] };
        let f = fock_visibility(&spec, 3.0, &OracleConfig::default(), &nat()).unwrap();
        assert_eq!(f.visibility, 1.0);
    }

    #[test]
    fn fock_error_geometric_in_cutoff() {
        let nbar = 2.0;
        let q: f64 = nbar / (1.0 + nbar);
        let spec = with_occupations(&[nbar]);
        let omega = (1.0 + 1.0 / nbar).ln();
        let exact = closed_single(nbar, 0.5);
        let err = |k: usize| {
            let cfg = OracleConfig { fock_cutoff: k, tail_tolerance: 0.99, ..Default::default() };
            (fock_visibility(&spec, 0.5 / omega, &cfg, &nat()).unwrap().visibility - exact).abs()
        };
        // the modulus error rotates with phase 0.5 per level; compare envelopes over one period
        let period = 13;
        let envelope = |j: usize| (5 + j * period..5 + (j + 1) * period).map(err).fold(0.0, f64::max);
        for j in 0..3 {
            let ratio = envelope(j + 1) / envelope(j);
            let expected = q.powi(period as i32);
            assert!((ratio.ln() - expected.ln()).abs() < 0.3 * expected.ln().abs(), "j={j} ratio={ratio}");
        }
    }

    #[test]
    fn cutoff_too_small_names_required() {
        let spec = with_occupations(&[5.0]);
        let cfg = OracleConfig { fock_cutoff: 20, tail_tolerance: 1e-6, ..Default::default() };
        match fock_visibility(&spec, 0.1, &cfg, &nat()).unwrap_err() {
            Error::CutoffTooSmall { required, .. } => {
                let q: f64 = 5.0 / 6.0;
                assert!(q.powi(required as i32 + 1) <= 1e-6);
                assert!(q.powi(required as i32) > 1e-6);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn two_level_superposition() {
        let omega = 1.3;
        let dtau = 0.7;
        let f = fock_visibility_distribution(&[(omega, vec![0.5, 0.5])], dtau, &OracleConfig::default()).unwrap();
        assert!((f.visibility - (omega * dtau / 2.0).cos().abs()).abs() < 1e-15);
        let short = fock_visibility_distribution(&[(omega, vec![0.5, 0.4])], dtau, &OracleConfig::default());
        assert!(matches!(short, Err(Error::CutoffTooSmall { .. })));
    }

    fn setup(dtau: f64) -> TwoPointSetup {
        TwoPointSetup { mass: 3.0, x1: 0.0, x2: dtau, t: 1.0, g: 1.0 }
    }

    #[test]
    fn two_point_initial_state() {
        let spec = with_occupations(&[1.0, 2.0]);
        let r = two_point_unitary_oracle(&spec, &TwoPointSetup { t: 0.0, ..setup(0.3) }, &OracleConfig::default(), &nat()).unwrap();
        assert!((r.visibility - 1.0).abs() <= r.truncation_bound);
        assert_eq!(r.rest_mass_phase, 0.0);
        assert!(r.total_phase.min(std::f64::consts::TAU - r.total_phase) < 1e-12);
    }

    #[test]
    fn two_point_matches_product_of_closed_forms() {
        let nbar = [0.7, 3.0];
        let spec = with_occupations(&nbar);
        let dtau = 0.35;
        let cfg = OracleConfig { tail_tolerance: 1e-8, ..Default::default() };
        let r = two_point_unitary_oracle(&spec, &setup(dtau), &cfg, &nat()).unwrap();
        let exact: f64 = nbar
            .iter()
            .map(|&n| closed_single(n, (1.0 + 1.0 / n).ln() * dtau))
            .product();
        assert!((r.visibility - exact).abs() <= 10.0 * cfg.tail_tolerance);
        assert_eq!(r.dimension, r.cutoffs.iter().map(|k| k + 1).product::<usize>());
    }

    #[test]
    fn two_point_rest_mass_phase() {
        let spec = with_occupations(&[1.0]);
        let s = TwoPointSetup { mass: 2.5, x1: 0.1, x2: 0.4, t: 2.0, g: 1.5 };
        let r = two_point_unitary_oracle(&spec, &s, &OracleConfig::default(), &nat()).unwrap();
        let expected = (s.mass * s.g * (s.x2 - s.x1) * s.t).rem_euclid(std::f64::consts::TAU);
        assert!((r.rest_mass_phase - expected).abs() < 1e-9);
    }

    #[test]
    fn two_point_rejects_large_problems() {
        let spec = with_occupations(&[1.0; 5]);
        assert!(two_point_unitary_oracle(&spec, &setup(0.1), &OracleConfig::default(), &nat()).is_err());
        let hot = with_occupations(&[500.0]);
        let err = two_point_unitary_oracle(&hot, &setup(0.1), &OracleConfig::default(), &nat()).unwrap_err();
        assert!(matches!(err, Error::CutoffTooSmall { .. }));
    }

    #[test]
    fn report_round_trips() {
        let spec = with_occupations(&[1.0]);
        let cfg = OracleConfig { n_samples: 1000, seed: 3, ..Default::default() };
        let rep = mc_report(&spec, 0.1, &cfg, &nat()).unwrap();
        let json = rep.to_json().unwrap();
        assert!(json.contains("\"seed\": 3"));
        let back: OracleReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
    }
}
