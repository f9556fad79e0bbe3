//! Degrees-of-freedom workbench for the MISO broadcast channel with static
//! users (long coherence time, free CSIR) and dynamic users (short coherence
//! time, no free CSIR) under no, delayed, perfect and hybrid CSIT.
//!
//! The crate is organised around a handful of modules:
//!
//! - [`model`]: scenario description, block-fading draws and CSI visibility.
//! - [`geometry`]: exact rational polytopes in DoF space.
//! - [`regions`]: inner and outer DoF regions for each CSIT family.
//! - [`schemes`]: noiseless symbol-level executors with exact DoF accounting.
//! - [`sim`]: SNR sweeps, log-det rate surrogates and DoF slope estimates.
//! - [`dmc`]: finite-alphabet multilevel broadcast channel evaluation.
//!
//! Work that is naturally data-parallel (seed sweeps, Monte Carlo trials,
//! grid searches) goes through [`exec`], which uses rayon when the
//! `parallel` feature is enabled and a plain loop otherwise.

pub mod dmc;
pub mod exec;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod plot;
pub mod rational;
pub mod regions;
pub mod schemes;
pub mod sim;

pub use exec::Execution;
pub use geometry::{DofRegion, Halfspace};
pub use model::{ChannelBlockSet, Csit, ScenarioConfig};
pub use rational::Rational;
pub use regions::{FamilyTag, ScenarioFamily};
pub use schemes::{SchemeId, SchemeTranscript};
