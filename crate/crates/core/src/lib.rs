//! Decoherence of composite quantum particles caused by gravitational time dilation.
//!
//! A particle with internal thermal structure, held in a vertical superposition, ticks
//! at different rates in the two branches. The internal states of the branches drift
//! apart and the centre-of-mass coherence decays. This crate provides:
//!
//! * [`visibility`]: closed-form visibility laws and decoherence timescales,
//! * [`propertime`]: proper-time differences along arbitrary trajectory pairs,
//! * [`master_equation`]: density-matrix evolution in the local and memory-kernel forms,
//! * [`emission`]: comparison with decoherence by thermal photon emission,
//! * [`oracle`]: brute-force validators independent of the closed forms,
//! * [`crosscheck`]: the randomized suite comparing the two.
//!
//! Every function takes a [`PhysicalConstants`] explicitly.

pub mod constants;
pub mod crosscheck;
pub mod emission;
pub mod error;
pub mod internal;
pub mod master_equation;
pub mod oracle;
pub mod propertime;
pub mod visibility;

pub use constants::{default_constants, PhysicalConstants, SOLAR_MASS};
pub use error::{Error, Result};
pub use internal::InternalStateSpec;
pub use visibility::{LawTag, Timescale, VisibilityCurve};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
