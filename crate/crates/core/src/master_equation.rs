//! Centre-of-mass density-matrix evolution under time-dilation decoherence.
//!
//! Two forms are integrated on a uniform position grid:
//!
//! * local in time: `d rho/dt = -(i/hbar)[H, rho] - rate * t * [x, [x, rho]]`
//! * memory kernel: `d rho/dt = -(i/hbar)[H, rho]
//!     - rate * int_0^t ds U(s) [x, [x, rho(t - s)]] U(s)^dag`, `U(s) = exp(-i H_cm s / hbar)`
//!
//! with `H = H_cm + W x`, `W = (m + E_0 / c^2) g` the weight including internal heat.
//! In the position basis the double commutator is the elementwise factor `(x - x')^2`,
//! and the linear potential is the elementwise phase `exp(-i W (x - x') t / hbar)`.
//! The kinetic part of `H_cm` is applied spectrally.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{domain, Error, Result};
use crate::internal::{internal_energy_variance, mean_internal_energy, InternalStateSpec};
use crate::propertime::PotentialSpec;
use crate::visibility::{LawTag, VisibilityCurve};

/// Tolerance on `|rho_ij - conj(rho_ji)|`.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Tolerance on `|tr rho - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative (and most imaginary) diagonal entry accepted.
pub const DIAGONAL_TOL: f64 = 1e-12;
/// Default budget for recorded snapshots: 2 GiB.
pub const DEFAULT_HISTORY_BUDGET: u64 = 2 << 30;

const SNAPSHOT_MAGIC: &[u8; 8] = b"GDRHO001";
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Density matrix `rho(x_i, x_j)` on a uniform grid, row-major, `sum_i rho_ii = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixGrid {
    positions: Vec<f64>,
    rho: Vec<Complex64>,
}

impl DensityMatrixGrid {
    pub fn new(positions: Vec<f64>, rho: Vec<Complex64>) -> Result<Self> {
        check_uniform(&positions)?;
        let m = positions.len();
        if rho.len() != m * m {
            return Err(domain(format!("matrix has {} entries, grid needs {}", rho.len(), m * m)));
        }
        let grid = DensityMatrixGrid { positions, rho };
        grid.check_invariants()?;
        Ok(grid)
    }

    /// `(|x1> + |x2>)/sqrt(2)` as a 2×2 problem on the grid `{x1, x2}`.
    pub fn two_point(x1: f64, x2: f64) -> Result<Self> {
        if !(x1.is_finite() && x2.is_finite()) || x1 == x2 {
            return Err(domain("two-point state needs distinct finite positions"));
        }
        let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
        let half = Complex64::new(0.5, 0.0);
        Self::new(vec![lo, hi], vec![half; 4])
    }

    /// `|psi><psi|` normalised so that `sum_i |psi_i|^2 = 1`.
    pub fn pure_state(positions: Vec<f64>, psi: &[Complex64]) -> Result<Self> {
        if psi.len() != positions.len() {
            return Err(domain("wavefunction and grid lengths differ"));
        }
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(domain("wavefunction has zero norm"));
        }
        let psi: Vec<Complex64> = psi.iter().map(|a| a / norm).collect();
        let m = psi.len();
        let mut rho = vec![ZERO; m * m];
        for i in 0..m {
            for j in 0..m {
                rho[i * m + j] = psi[i] * psi[j].conj();
            }
        }
        Self::new(positions, rho)
    }

    /// Equal superposition of two Gaussian wave packets of width `sigma` centred at `x1`, `x2`.
    pub fn wave_packet_pair(positions: Vec<f64>, x1: f64, x2: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(domain("wave-packet width must be positive"));
        }
        let psi: Vec<Complex64> = positions
            .iter()
            .map(|&x| {
                let a = (-(x - x1).powi(2) / (4.0 * sigma * sigma)).exp();
                let b = (-(x - x2).powi(2) / (4.0 * sigma * sigma)).exp();
                Complex64::new(a + b, 0.0)
            })
            .collect();
        Self::pure_state(positions, &psi)
    }

    pub fn dim(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.rho
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rho[i * self.dim() + j]
    }

    pub fn spacing(&self) -> f64 {
        grid_spacing(&self.positions)
    }

    pub fn trace(&self) -> Complex64 {
        let m = self.dim();
        (0..m).map(|i| self.rho[i * m + i]).sum()
    }

    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum_ij |rho_ij|^2 for Hermitian rho
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let m = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in i..m {
                worst = worst.max((self.rho[i * m + j] - self.rho[j * m + i].conj()).norm());
            }
        }
        worst
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let m = self.dim();
        (0..m).map(|i| self.rho[i * m + i].re).collect()
    }

    /// Grid index of `x`, within a millionth of the spacing.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let tol = if self.dim() > 1 { 1e-6 * self.spacing() } else { 0.0 };
        self.positions.iter().position(|&p| (p - x).abs() <= tol)
    }

    pub fn check_invariants(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if !(herm <= HERMITICITY_TOL) {
            return Err(Error::NumericalInstability(format!(
                "Hermiticity violated by {herm:e}"
            )));
        }
        let tr = self.trace();
        if !((tr.re - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::NumericalInstability(format!("trace drifted to {}", tr.re)));
        }
        let m = self.dim();
        for i in 0..m {
            let d = self.rho[i * m + i];
            if !(d.re >= -DIAGONAL_TOL && d.im.abs() <= DIAGONAL_TOL) {
                return Err(Error::NumericalInstability(format!(
                    "diagonal entry {i} is {d}"
                )));
            }
        }
        Ok(())
    }

    /// Binary snapshot: magic `GDRHO001`, then little-endian `u64 M`, `f64 x_min`,
    /// `f64 x_max`, `f64 t`, then `M*M` row-major `(re, im)` `f64` pairs.
    pub fn write_snapshot<W: Write>(&self, mut w: W, t: f64) -> Result<()> {
        w.write_all(SNAPSHOT_MAGIC)?;
        w.write_all(&(self.dim() as u64).to_le_bytes())?;
        w.write_all(&self.positions[0].to_le_bytes())?;
        w.write_all(&self.positions[self.dim() - 1].to_le_bytes())?;
        w.write_all(&t.to_le_bytes())?;
        for z in &self.rho {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    /// Inverse of [`write_snapshot`](Self::write_snapshot); returns the state and its time.
    pub fn read_snapshot<R: Read>(mut r: R) -> Result<(Self, f64)> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(domain("not a density-matrix snapshot"));
        }
        let mut b8 = [0u8; 8];
        let mut next_f64 = |r: &mut R| -> Result<f64> {
            r.read_exact(&mut b8)?;
            Ok(f64::from_le_bytes(b8))
        };
        let mut mb = [0u8; 8];
        r.read_exact(&mut mb)?;
        let m = u64::from_le_bytes(mb) as usize;
        let x_min = next_f64(&mut r)?;
        let x_max = next_f64(&mut r)?;
        let t = next_f64(&mut r)?;
        let mut rho = Vec::with_capacity(m * m);
        for _ in 0..m * m {
            let re = next_f64(&mut r)?;
            let im = next_f64(&mut r)?;
            rho.push(Complex64::new(re, im));
        }
        let positions = if m == 1 {
            vec![x_min]
        } else {
            (0..m)
                .map(|i| x_min + (x_max - x_min) * i as f64 / (m - 1) as f64)
                .collect()
        };
        Ok((Self::new(positions, rho)?, t))
    }
}

fn grid_spacing(positions: &[f64]) -> f64 {
    if positions.len() < 2 {
        return 0.0;
    }
    (positions[positions.len() - 1] - positions[0]) / (positions.len() - 1) as f64
}

fn check_uniform(positions: &[f64]) -> Result<()> {
    if positions.is_empty() {
        return Err(domain("position grid is empty"));
    }
    if positions.iter().any(|x| !x.is_finite()) {
        return Err(domain("grid positions must be finite"));
    }
    let h = grid_spacing(positions);
    if positions.len() > 1 && !(h > 0.0) {
        return Err(domain("grid must be strictly increasing"));
    }
    for (i, w) in positions.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(f64::MIN_POSITIVE) + 1e-12 * w[1].abs() {
            return Err(domain(format!("grid is not uniform at index {i}")));
        }
    }
    Ok(())
}

/// Uniform grid of `m` points on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![lo];
    }
    (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect()
}

/// Centre-of-mass Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CmHamiltonian {
    None,
    /// `p^2 / 2m`.
    Free { mass: f64 },
    /// `W x` only, for the reduced two-point problem.
    Linear { weight: f64 },
    /// `p^2 / 2m + W x`.
    FreePlusLinear { mass: f64, weight: f64 },
}

impl CmHamiltonian {
    pub fn validate(&self) -> Result<()> {
        match self {
            CmHamiltonian::Free { mass } | CmHamiltonian::FreePlusLinear { mass, .. }
                if !(mass.is_finite() && *mass > 0.0) =>
            {
                Err(domain(format!("centre-of-mass mass must be positive, got {mass}")))
            }
            CmHamiltonian::Linear { weight } | CmHamiltonian::FreePlusLinear { weight, .. }
                if !weight.is_finite() =>
            {
                Err(domain("weight must be finite"))
            }
            _ => Ok(()),
        }
    }

    fn kinetic_mass(&self) -> Option<f64> {
        match self {
            CmHamiltonian::Free { mass } | CmHamiltonian::FreePlusLinear { mass, .. } => Some(*mass),
            _ => None,
        }
    }

    fn weight(&self) -> f64 {
        match self {
            CmHamiltonian::Linear { weight } | CmHamiltonian::FreePlusLinear { weight, .. } => *weight,
            _ => 0.0,
        }
    }
}

/// `(m + E_0 / c^2) g`: the weight of rest mass plus internal energy.
pub fn effective_weight(mass: f64, mean_internal_energy: f64, g: f64, consts: &PhysicalConstants) -> f64 {
    (mass + mean_internal_energy / consts.c2()) * g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionForm {
    Markovian,
    FullMemory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub form: EvolutionForm,
    /// Coefficient of the double commutator, `Delta E_0^2 g^2 / (hbar c^2)^2`, in 1/(m²·s²).
    pub rate: f64,
    /// Keep every `record_every`-th state (the initial state is always kept).
    pub record_every: usize,
    pub history_budget_bytes: u64,
}

impl EvolutionConfig {
    pub fn new(dt: f64, t_final: f64, form: EvolutionForm, rate: f64) -> Result<Self> {
        let cfg = EvolutionConfig {
            dt,
            t_final,
            form,
            rate,
            record_every: 1,
            history_budget_bytes: DEFAULT_HISTORY_BUDGET,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(domain(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.dt * (1.0 - 1e-12)) {
            return Err(domain(format!("t_final {} must be at least dt {}", self.t_final, self.dt)));
        }
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return Err(domain(format!("decoherence rate must be >= 0, got {}", self.rate)));
        }
        if self.record_every == 0 {
            return Err(domain("record_every must be at least 1"));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize
    }
}

/// `N (k_B T g / (hbar c^2))^2` for N high-temperature modes.
pub fn high_temperature_rate(n_modes: f64, temperature: f64, g: f64, consts: &PhysicalConstants) -> f64 {
    let a = consts.k_b * temperature * g / (consts.hbar * consts.c2());
    n_modes * a * a
}

/// Recorded states of an evolution.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrixGrid>,
}

impl TimeSeries {
    /// CSV with columns `t, re_rho12, im_rho12, V`.
    pub fn write_csv<W: Write>(&self, out: W, x1: f64, x2: f64) -> Result<()> {
        let (i, j) = self.indices(x1, x2)?;
        let curve = extract_visibility(self, x1, x2)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "re_rho12", "im_rho12", "V"])?;
        for ((t, s), v) in self.times.iter().zip(&self.states).zip(&curve.values) {
            let z = s.get(i, j);
            w.write_record([t.to_string(), z.re.to_string(), z.im.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    fn indices(&self, x1: f64, x2: f64) -> Result<(usize, usize)> {
        let first = self.states.first().ok_or_else(|| domain("empty time series"))?;
        let i = first
            .index_of(x1)
            .ok_or_else(|| domain(format!("x1 = {x1} is not a grid point")))?;
        let j = first
            .index_of(x2)
            .ok_or_else(|| domain(format!("x2 = {x2} is not a grid point")))?;
        Ok((i, j))
    }
}

/// `V(t) = 2 |rho(x1, x2, t)|`, divided by `V(0)` to absorb discretisation of the initial state.
pub fn extract_visibility(series: &TimeSeries, x1: f64, x2: f64) -> Result<VisibilityCurve> {
    let (i, j) = series.indices(x1, x2)?;
    let raw: Vec<f64> = series.states.iter().map(|s| 2.0 * s.get(i, j).norm()).collect();
    let v0 = raw[0];
    if !(v0 > 0.0) {
        return Err(domain("initial state has no coherence between x1 and x2"));
    }
    let values = raw.iter().map(|v| v / v0).collect();
    VisibilityCurve::new(series.times.clone(), values, LawTag::MasterEquation)
}

/// Parameters of the general memory-kernel master equation for a given composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryKernelCoefficients {
    pub mean_energy: f64,
    pub energy_variance: f64,
    /// `E_0 / c^2`, multiplying `Gamma` in the unitary part.
    pub drift_coefficient: f64,
    /// `(Delta E_0 / (hbar c^2))^2`, multiplying the double commutator in `Gamma`.
    pub decoherence_coefficient: f64,
    pub coupling: PotentialSpec,
}

impl MemoryKernelCoefficients {
    /// Position-basis rate for `Gamma = g x`; `None` for non-linear couplings.
    pub fn position_rate(&self) -> Option<f64> {
        match self.coupling {
            PotentialSpec::Homogeneous { g } => Some(self.decoherence_coefficient * g * g),
            _ => None,
        }
    }
}

pub fn general_memory_kernel_coefficients(
    spec: &InternalStateSpec,
    pot: &PotentialSpec,
    consts: &PhysicalConstants,
) -> Result<MemoryKernelCoefficients> {
    pot.validate()?;
    let mean_energy = mean_internal_energy(spec, consts)?;
    let energy_variance = internal_energy_variance(spec, consts)?;
    let hc2 = consts.hbar * consts.c2();
    Ok(MemoryKernelCoefficients {
        mean_energy,
        energy_variance,
        drift_coefficient: mean_energy / consts.c2(),
        decoherence_coefficient: energy_variance / (hc2 * hc2),
        coupling: pot.clone(),
    })
}

/// Spectral propagator `exp(-i p^2 h / (2 m hbar))` on a periodic grid.
struct KineticPropagator {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    phase: Vec<Complex64>,
}

impl KineticPropagator {
    fn new(positions: &[f64], mass: f64, h: f64, hbar: f64) -> Self {
        let m = positions.len();
        let mut planner = FftPlanner::new();
        let length = grid_spacing(positions) * m as f64;
        let scale = 1.0 / m as f64;
        let phase = (0..m)
            .map(|j| {
                let n = if j < m.div_ceil(2) { j as f64 } else { j as f64 - m as f64 };
                let k = 2.0 * std::f64::consts::PI * n / length;
                Complex64::from_polar(scale, -hbar * k * k * h / (2.0 * mass))
            })
            .collect();
        KineticPropagator {
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
            phase,
        }
    }

    fn apply_vec(&self, v: &mut [Complex64]) {
        self.fwd.process(v);
        for (a, p) in v.iter_mut().zip(&self.phase) {
            *a *= p;
        }
        self.inv.process(v);
    }

    /// `rho <- U rho U^dag`.
    fn conjugate(&self, rho: &mut [Complex64], m: usize) {
        // rows: r <- conj(U conj(r)) realises rho U^dag
        let apply_rows = |buf: &mut [Complex64]| {
            buf.par_chunks_mut(m).for_each(|row| {
                row.iter_mut().for_each(|z| *z = z.conj());
                self.apply_vec(row);
                row.iter_mut().for_each(|z| *z = z.conj());
            });
        };
        apply_rows(rho);
        transpose(rho, m);
        rho.par_chunks_mut(m).for_each(|col| self.apply_vec(col));
        transpose(rho, m);
    }
}

fn transpose(a: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in i + 1..m {
            a.swap(i * m + j, j * m + i);
        }
    }
}

/// Elementwise helpers tied to one grid and Hamiltonian.
struct GridOps {
    /// `(x_i - x_j)` row-major.
    diff: Vec<f64>,
    weight: f64,
    rate: f64,
    hbar: f64,
}

impl GridOps {
    fn new(positions: &[f64], h: &CmHamiltonian, rate: f64, hbar: f64) -> Self {
        let m = positions.len();
        let mut diff = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                diff[i * m + j] = positions[i] - positions[j];
            }
        }
        GridOps { diff, weight: h.weight(), rate, hbar }
    }

    /// Potential phase over `h` and dephasing over `[t0, t0 + h]` (rate linear in t, so the
    /// midpoint value integrates exactly).
    fn diagonal_step(&self, rho: &mut [Complex64], h: f64, t0: Option<f64>) {
        let w = self.weight * h / self.hbar;
        let deph = t0.map(|t0| self.rate * h * (t0 + 0.5 * h)).unwrap_or(0.0);
        rho.par_iter_mut().zip(self.diff.par_iter()).for_each(|(z, &d)| {
            let mut f = Complex64::from_polar(1.0, -w * d);
            if deph != 0.0 {
                f *= (-deph * d * d).exp();
            }
            *z *= f;
        });
    }

    /// `[x, [x, rho]]` in the position basis.
    fn double_commutator(&self, rho: &[Complex64]) -> Vec<Complex64> {
        rho.iter().zip(&self.diff).map(|(z, d)| z * (d * d)).collect()
    }
}

fn ensure_budget(rho0: &DensityMatrixGrid, cfg: &EvolutionConfig, extra_mats: usize) -> Result<()> {
    let per_state = (rho0.dim() * rho0.dim() * std::mem::size_of::<Complex64>()) as u128;
    let n_records = (cfg.n_steps() / cfg.record_every) as u128 + 2;
    let required = per_state * (n_records + extra_mats as u128);
    let budget = cfg.history_budget_bytes as u128;
    if required > budget {
        let affordable = (budget / per_state).saturating_sub(2 + extra_mats as u128);
        return Err(Error::HistoryExhausted {
            required_bytes: required,
            budget_bytes: budget,
            max_t_final: affordable as f64 * cfg.record_every as f64 * cfg.dt,
        });
    }
    Ok(())
}

fn prepare(rho0: &DensityMatrixGrid, h: &CmHamiltonian, cfg: &EvolutionConfig) -> Result<()> {
    rho0.check_invariants()?;
    h.validate()?;
    cfg.validate()
}

fn record(series: &mut TimeSeries, template: &DensityMatrixGrid, rho: &[Complex64], t: f64) -> Result<()> {
    let state = DensityMatrixGrid {
        positions: template.positions.clone(),
        rho: rho.to_vec(),
    };
    state.check_invariants().map_err(|e| match e {
        Error::NumericalInstability(msg) => Error::NumericalInstability(format!("at t = {t:e} s: {msg}")),
        other => other,
    })?;
    series.times.push(t);
    series.states.push(state);
    Ok(())
}

/// Local-in-time master equation, Strang splitting
/// `diag(dt/2) · kinetic(dt) · diag(dt/2)` per step.
pub fn evolve_markovian(
    rho0: &DensityMatrixGrid,
    h: &CmHamiltonian,
    cfg: &EvolutionConfig,
    consts: &PhysicalConstants,
) -> Result<TimeSeries> {
    prepare(rho0, h, cfg)?;
    ensure_budget(rho0, cfg, 1)?;
    let m = rho0.dim();
    let ops = GridOps::new(&rho0.positions, h, cfg.rate, consts.hbar);
    let kinetic = h
        .kinetic_mass()
        .map(|mass| KineticPropagator::new(&rho0.positions, mass, cfg.dt, consts.hbar));
    let mut rho = rho0.rho.clone();
    let mut series = TimeSeries { times: vec![0.0], states: vec![rho0.clone()] };
    let n = cfg.n_steps();
    let half = 0.5 * cfg.dt;
    for step in 0..n {
        let t0 = step as f64 * cfg.dt;
        ops.diagonal_step(&mut rho, half, Some(t0));
        if let Some(k) = &kinetic {
            k.conjugate(&mut rho, m);
        }
        ops.diagonal_step(&mut rho, half, Some(t0 + half));
        let t1 = (step + 1) as f64 * cfg.dt;
        if (step + 1) % cfg.record_every == 0 || step + 1 == n {
            record(&mut series, rho0, &rho, t1)?;
        }
    }
    Ok(series)
}

/// Memory-kernel master equation with the history integral on the trapezoid rule.
///
/// The history sum `S_n = sum_{j=0..n} G^j D_{n-j} G^-j` (with `G` the kinetic
/// propagator over one step and `D_k = [x, [x, rho_k]]`) obeys `S_n = D_n + G S_{n-1} G^dag`,
/// so each step costs a fixed number of propagations. The memory contribution over a
/// step is integrated by the trapezoid rule between unitary half steps; the `j = 0`
/// node of the new history sum is treated implicitly.
pub fn evolve_full_memory(
    rho0: &DensityMatrixGrid,
    h: &CmHamiltonian,
    cfg: &EvolutionConfig,
    consts: &PhysicalConstants,
) -> Result<TimeSeries> {
    prepare(rho0, h, cfg)?;
    ensure_budget(rho0, cfg, 5)?;
    let m = rho0.dim();
    let dt = cfg.dt;
    let lambda = cfg.rate;
    let ops = GridOps::new(&rho0.positions, h, lambda, consts.hbar);
    let mass = h.kinetic_mass();
    let g_step = mass.map(|mass| KineticPropagator::new(&rho0.positions, mass, dt, consts.hbar));
    let k_half = mass.map(|mass| KineticPropagator::new(&rho0.positions, mass, 0.5 * dt, consts.hbar));

    let unitary_half = |rho: &mut Vec<Complex64>| {
        ops.diagonal_step(rho, 0.25 * dt, None);
        if let Some(k) = &k_half {
            k.conjugate(rho, m);
        }
        ops.diagonal_step(rho, 0.25 * dt, None);
    };

    let mut rho = rho0.rho.clone();
    let d0 = ops.double_commutator(&rho);
    let mut hist = d0.clone(); // S_n
    let mut first = d0; // E_n = G^n D_0 G^-n
    let mut memory = vec![ZERO; m * m]; // M_n, zero at t = 0
    let implicit: Vec<f64> = ops
        .diff
        .iter()
        .map(|d| 1.0 / (1.0 + lambda * dt * dt * 0.25 * d * d))
        .collect();

    let mut series = TimeSeries { times: vec![0.0], states: vec![rho0.clone()] };
    let n = cfg.n_steps();
    for step in 0..n {
        unitary_half(&mut rho);
        if lambda > 0.0 {
            if let Some(g) = &g_step {
                g.conjugate(&mut hist, m);
                g.conjugate(&mut first, m);
            }
            // hist now holds G S_n G^dag, first holds E_{n+1}
            let mut explicit_next = vec![ZERO; m * m];
            for idx in 0..m * m {
                explicit_next[idx] = dt * (hist[idx] - 0.5 * first[idx]);
            }
            for idx in 0..m * m {
                let rhs = rho[idx] - lambda * 0.5 * dt * (memory[idx] + explicit_next[idx]);
                rho[idx] = rhs * implicit[idx];
            }
            unitary_half(&mut rho);
            let d_next = ops.double_commutator(&rho);
            for idx in 0..m * m {
                hist[idx] += d_next[idx];
                memory[idx] = explicit_next[idx] + 0.5 * dt * d_next[idx];
            }
        } else {
            unitary_half(&mut rho);
        }
        let t1 = (step + 1) as f64 * dt;
        if (step + 1) % cfg.record_every == 0 || step + 1 == n {
            record(&mut series, rho0, &rho, t1)?;
        }
    }
    Ok(series)
}

/// Dispatches on [`EvolutionConfig::form`].
pub fn evolve(
    rho0: &DensityMatrixGrid,
    h: &CmHamiltonian,
    cfg: &EvolutionConfig,
    consts: &PhysicalConstants,
) -> Result<TimeSeries> {
    match cfg.form {
        EvolutionForm::Markovian => evolve_markovian(rho0, h, cfg, consts),
        EvolutionForm::FullMemory => evolve_full_memory(rho0, h, cfg, consts),
    }
}
