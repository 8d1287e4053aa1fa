//! Flags, config file schema and merging. Flags override values from `--config`.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use gravdec::PhysicalConstants;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Declares a parameter block usable both as clap flags and as a TOML table.
/// Every field is optional so file and flag values can be layered.
macro_rules! params {
    ($(#[$sm:meta])* pub struct $name:ident { $( $(#[$fm:meta])* $field:ident : $ty:ty, )* }) => {
        $(#[$sm])*
        #[derive(Debug, Clone, Default, PartialEq, clap::Args, Serialize, Deserialize)]
        #[command(allow_negative_numbers = true)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                $(#[$fm])*
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            pub fn overlay(self, file: Self) -> Self {
                Self { $( $field: self.$field.or(file.$field), )* }
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    Exact,
    HighT,
    Gaussian,
    Semiclassical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    Markovian,
    FullMemory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    TwoPoint,
    WavePackets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hamiltonian {
    None,
    Free,
    Linear,
    FreePlusLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Radius,
    Separation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Potential {
    Homogeneous,
    SchwarzschildWeak,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    Standard,
    Quick,
}

params! {
    /// Decoherence timescales.
    pub struct TauArgs {
        /// Number of internal modes (real-valued).
        #[arg(long = "N", visible_alias = "n-modes")]
        n_modes: f64,
        /// Temperature in K.
        #[arg(long = "T", visible_alias = "temperature")]
        temperature: f64,
        /// Superposition size in m.
        #[arg(long)]
        dx: f64,
        /// Gravitational acceleration in m/s² (default: constants g_earth).
        #[arg(long)]
        g: f64,
        /// Central mass in kg; adds the Schwarzschild form.
        #[arg(long)]
        central_mass: f64,
        /// Distance from the central mass in m (default: its Schwarzschild radius).
        #[arg(long)]
        radius: f64,
    }
}

params! {
    /// Visibility curves.
    pub struct VisibilityArgs {
        #[arg(long, value_enum)]
        law: Law,
        #[arg(long = "N", visible_alias = "n-modes")]
        n_modes: f64,
        #[arg(long = "T", visible_alias = "temperature")]
        temperature: f64,
        /// Mode angular frequencies in rad/s.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        frequencies: Vec<f64>,
        /// File with one angular frequency per line.
        #[arg(long)]
        frequencies_file: PathBuf,
        #[arg(long)]
        dx: f64,
        #[arg(long)]
        g: f64,
        #[arg(long)]
        t_start: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long)]
        n_points: usize,
        /// Evaluate at these proper-time differences (s) instead of a time axis.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        dtau: Vec<f64>,
    }
}

params! {
    /// Density-matrix evolution.
    pub struct EvolveArgs {
        #[arg(long, value_enum)]
        form: Form,
        #[arg(long, value_enum)]
        state: InitialState,
        /// Initial state from a binary snapshot (overrides --state).
        #[arg(long)]
        initial: PathBuf,
        #[arg(long)]
        x1: f64,
        #[arg(long)]
        x2: f64,
        /// Grid points for wave packets.
        #[arg(long = "M", visible_alias = "grid-points")]
        grid_points: usize,
        #[arg(long)]
        x_min: f64,
        #[arg(long)]
        x_max: f64,
        /// Wave-packet width in m.
        #[arg(long)]
        sigma: f64,
        #[arg(long, value_enum)]
        hamiltonian: Hamiltonian,
        /// Centre-of-mass mass in kg.
        #[arg(long)]
        mass: f64,
        /// Weight W of the linear term in N (default: (m + N k_B T / c²) g).
        #[arg(long)]
        weight: f64,
        /// Double-commutator coefficient in 1/(m² s²) (default: from N, T, g).
        #[arg(long)]
        rate: f64,
        #[arg(long = "N", visible_alias = "n-modes")]
        n_modes: f64,
        #[arg(long = "T", visible_alias = "temperature")]
        temperature: f64,
        #[arg(long)]
        g: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        t_final: f64,
        #[arg(long)]
        record_every: usize,
        #[arg(long)]
        history_budget_bytes: u64,
        /// Write the final state as a binary snapshot.
        #[arg(long)]
        snapshot: PathBuf,
    }
}

params! {
    /// Time dilation versus emission regime map.
    pub struct RegimeArgs {
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long)]
        axis_min: f64,
        #[arg(long)]
        axis_max: f64,
        /// Log-spaced points along the axis.
        #[arg(long)]
        axis_count: usize,
        /// Temperatures in K.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        temperatures: Vec<f64>,
        /// Oscillating modes per m³.
        #[arg(long)]
        number_density: f64,
        /// Fixed radius in m when scanning separations.
        #[arg(long)]
        radius: f64,
        /// Fixed separation in m when scanning radii.
        #[arg(long)]
        separation: f64,
        #[arg(long)]
        g: f64,
        /// Cross section grows as (r / reference_radius)^exponent.
        #[arg(long)]
        scaling_exponent: f64,
        #[arg(long)]
        reference_radius: f64,
        /// Table with columns k, g, sigma (replaces the blackbody stand-in).
        #[arg(long)]
        emission_table: PathBuf,
        #[arg(long)]
        sigma_amplitude: f64,
        #[arg(long)]
        sigma_k0: f64,
        #[arg(long)]
        sigma_exponent: f64,
        #[arg(long)]
        k_min: f64,
        #[arg(long)]
        k_max: f64,
        #[arg(long)]
        panels: usize,
    }
}

params! {
    /// Proper-time difference along a trajectory pair.
    pub struct PropertimeArgs {
        /// CSV with columns t, x_a, v_a, x_b, v_b.
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long, value_enum)]
        potential: Potential,
        #[arg(long)]
        g: f64,
        #[arg(long)]
        central_mass: f64,
        /// CSV with columns x, phi.
        #[arg(long)]
        potential_file: PathBuf,
        /// Temperature for the optional visibility.
        #[arg(long = "T", visible_alias = "temperature")]
        temperature: f64,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        frequencies: Vec<f64>,
        #[arg(long)]
        frequencies_file: PathBuf,
    }
}

params! {
    /// Randomized comparison of closed forms against the oracles.
    pub struct OracleCheckArgs {
        #[arg(long, value_enum)]
        preset: PresetName,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n_cases: usize,
        #[arg(long)]
        n_samples: u64,
    }
}

#[derive(Debug, Parser)]
#[command(name = "gravdec", version, about = "Decoherence of composite particles from gravitational time dilation")]
pub struct Cli {
    /// TOML config file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    Tau(TauArgs),
    Visibility(VisibilityArgs),
    Evolve(EvolveArgs),
    Regime(RegimeArgs),
    Propertime(PropertimeArgs),
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Overrides of individual physical constants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    pub hbar: Option<f64>,
    pub c: Option<f64>,
    pub k_b: Option<f64>,
    #[serde(rename = "G")]
    pub big_g: Option<f64>,
    pub g_earth: Option<f64>,
}

impl ConstantsSection {
    pub fn apply(&self, base: PhysicalConstants) -> PhysicalConstants {
        PhysicalConstants {
            hbar: self.hbar.unwrap_or(base.hbar),
            c: self.c.unwrap_or(base.c),
            k_b: self.k_b.unwrap_or(base.k_b),
            big_g: self.big_g.unwrap_or(base.big_g),
            g_earth: self.g_earth.unwrap_or(base.g_earth),
        }
    }
}

/// Schema of the `--config` file. One table per subcommand; only the invoked
/// subcommand's table is read.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub constants: ConstantsSection,
    #[serde(default)]
    pub tau: TauArgs,
    #[serde(default)]
    pub visibility: VisibilityArgs,
    #[serde(default)]
    pub evolve: EvolveArgs,
    #[serde(default)]
    pub regime: RegimeArgs,
    #[serde(default)]
    pub propertime: PropertimeArgs,
    #[serde(default)]
    pub oracle_check: OracleCheckArgs,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("{source}: {e}")))
    }
}

/// Fetches a required resolved value or names the flag and key that would supply it.
pub fn required<T: Clone>(v: &Option<T>, flag: &str, key: &str) -> Result<T, CliError> {
    v.clone()
        .ok_or_else(|| CliError::Config(format!("missing {flag} (or `{key}` in the config file)")))
}
