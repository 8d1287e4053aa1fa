//! Randomized comparison of the closed-form visibility against all three oracles.
//!
//! Cases are drawn in natural units (`hbar = c = k_B = 1`, `T = 1`, `g = t = 1`) with
//! up to four modes, occupations up to 5 and `|omega dtau| <= 0.5`. Draws violating the
//! Monte Carlo phase-load bound are redrawn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{domain, Result};
use crate::internal::InternalStateSpec;
use crate::oracle::{
    fock_visibility, mc_visibility, two_point_unitary_oracle, OracleConfig, TwoPointSetup, MC_PHASE_BOUND,
};
use crate::visibility::exact_visibility;

/// Largest mean occupation drawn.
pub const MAX_OCCUPATION: f64 = 5.0;
/// Largest `|omega dtau|` drawn.
pub const MAX_PHASE: f64 = 0.5;
/// Allowed gap between the closed form and the joint unitary oracle.
pub const JOINT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// 50 cases at 10^6 samples.
    Standard,
    /// 12 cases at 10^5 samples.
    Quick,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosscheckConfig {
    pub n_cases: usize,
    pub n_samples: u64,
    pub seed: u64,
    pub fock_cutoff: usize,
    pub fock_tail_tolerance: f64,
    /// Total tail budget of the joint oracle, shared between its modes.
    pub joint_tail_tolerance: f64,
}

impl CrosscheckConfig {
    pub fn preset(p: Preset) -> Self {
        let (n_cases, n_samples) = match p {
            Preset::Standard => (50, 1_000_000),
            Preset::Quick => (12, 100_000),
        };
        CrosscheckConfig {
            n_cases,
            n_samples,
            seed: 1729,
            fock_cutoff: 200,
            fock_tail_tolerance: 1e-12,
            joint_tail_tolerance: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub index: usize,
    pub occupations: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub delta_tau: f64,
    pub exact: f64,
    pub mc: f64,
    pub mc_standard_error: f64,
    pub mc_pass: bool,
    pub fock: f64,
    pub fock_bound: f64,
    pub fock_pass: bool,
    pub joint: f64,
    pub joint_pass: bool,
}

impl CaseResult {
    pub fn passed(&self) -> bool {
        self.mc_pass && self.fock_pass && self.joint_pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub config: CrosscheckConfig,
    pub cases: Vec<CaseResult>,
}

impl CrosscheckReport {
    pub fn n_passed(&self) -> usize {
        self.cases.iter().filter(|c| c.passed()).count()
    }

    pub fn all_passed(&self) -> bool {
        self.n_passed() == self.cases.len()
    }
}

/// One random case: frequencies at `T = 1` and a shared delay.
fn draw_case(rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    loop {
        let n_modes = rng.random_range(1..=4usize);
        let occ: Vec<f64> = (0..n_modes).map(|_| rng.random_range(0.02..=MAX_OCCUPATION)).collect();
        let freqs: Vec<f64> = occ.iter().map(|n| (1.0 / n).ln_1p()).collect();
        let w_max = freqs.iter().copied().fold(0.0, f64::max);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let dtau = sign * rng.random_range(0.0..=1.0) * MAX_PHASE / w_max;
        let fits = occ
            .iter()
            .zip(&freqs)
            .all(|(n, w)| n * (1.0 - (w * dtau).cos()) <= MC_PHASE_BOUND);
        if fits {
            return (freqs, dtau);
        }
    }
}

pub fn run_crosscheck(cfg: &CrosscheckConfig) -> Result<CrosscheckReport> {
    if cfg.n_cases == 0 {
        return Err(domain("crosscheck needs at least one case"));
    }
    let consts = PhysicalConstants::natural();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cases = Vec::with_capacity(cfg.n_cases);
    for index in 0..cfg.n_cases {
        let (freqs, delta_tau) = draw_case(&mut rng);
        let spec = InternalStateSpec::explicit(1.0, freqs.clone())?;
        let exact = exact_visibility(&spec, delta_tau, &consts)?;

        let mc_cfg = OracleConfig {
            n_samples: cfg.n_samples,
            seed: cfg.seed.wrapping_add(index as u64),
            fock_cutoff: cfg.fock_cutoff,
            tail_tolerance: cfg.fock_tail_tolerance,
        };
        let mc = mc_visibility(&spec, delta_tau, &mc_cfg, &consts)?;
        let fock = fock_visibility(&spec, delta_tau, &mc_cfg, &consts)?;
        let joint_cfg = OracleConfig { tail_tolerance: cfg.joint_tail_tolerance, ..mc_cfg };
        let setup = TwoPointSetup { mass: 1.0, x1: 0.0, x2: delta_tau, t: 1.0, g: 1.0 };
        let joint = two_point_unitary_oracle(&spec, &setup, &joint_cfg, &consts)?;

        cases.push(CaseResult {
            index,
            occupations: freqs.iter().map(|w| 1.0 / w.exp_m1()).collect(),
            frequencies: freqs,
            delta_tau,
            exact,
            mc: mc.visibility,
            mc_standard_error: mc.standard_error,
            mc_pass: (exact - mc.visibility).abs() <= 3.0 * mc.standard_error,
            fock: fock.visibility,
            fock_bound: fock.truncation_bound,
            fock_pass: (exact - fock.visibility).abs() <= 10.0 * fock.truncation_bound,
            joint: joint.visibility,
            joint_pass: (exact - joint.visibility).abs() <= JOINT_TOLERANCE,
        });
    }
    Ok(CrosscheckReport { config: *cfg, cases })
}
