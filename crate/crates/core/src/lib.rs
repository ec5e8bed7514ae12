//! Analytic and Monte Carlo tools for quadratically constrained channels with a
//! myopic jammer.
//!
//! The crate is organised bottom-up: [`geometry`] holds sphere/cap measures and
//! tail bounds, [`capacity`] the closed-form rates and the regime classifier,
//! [`codec`] random spherical codes, [`jammers`] the attack strategies and
//! [`experiments`] the seeded harnesses that tie them together.

pub mod capacity;
pub mod codec;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod jammers;
mod optimize;
pub mod rng;
pub mod special;

pub use capacity::{CapacityVerdict, ChannelParams, KeyRegime, OptResult, VerdictKind};
pub use codec::{DecodeOutcome, SphericalCodebook};
pub use error::{Error, Result};
pub use geometry::{CapSpec, LogMeasure, StripSpec};
pub use jammers::{JamContext, JamResult, JammerStrategy};
