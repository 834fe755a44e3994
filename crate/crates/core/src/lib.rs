//! Optimal stopping with distributional advice.
//!
//! Values arrive over `[0, 1]` (Poisson or a fixed count in random order) and
//! a policy may accept one of them. `policies::ThreePhase` combines a warm-up
//! sample of an advice law with a secretary-style phase, and `harness`
//! measures `E[ALG] / E[MAX]` under exact or adversarially perturbed advice.
//! `kertz` holds the prophet constant, the hard instance, and the upper
//! bounds on consistency and robustness.

pub mod arrivals;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod kertz;
pub mod numerics;
pub mod policies;
pub mod rng;
pub mod textspec;

pub use error::{Error, Result};
