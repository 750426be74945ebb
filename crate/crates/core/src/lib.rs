//! Euler-Maruyama approximation of SDEs driven by rotationally invariant
//! α-stable noise, `dX_t = b(X_t) dt + dZ_t` with `1 < α < 2`.
//!
//! Two chains are provided: the plain scheme with exact stable increments
//! and the cheaper scheme whose increments are scaled Pareto vectors with
//! the same tail index. Around them sit the pieces needed to study how well
//! their invariant measures approximate the one of the SDE:
//!
//! * [`noise`]: normalisation constants and exact samplers,
//! * [`drift`]: dissipative drift models and a numerical falsifier for the
//!   dissipativity / derivative bounds,
//! * [`scheme`]: ensembles, fine-step references, synchronous coupling and
//!   moment tracking,
//! * [`metrics`]: empirical measures, Wasserstein-1 and empirical
//!   characteristic functions,
//! * [`oubench`]: the deterministic Ornstein-Uhlenbeck benchmark built on
//!   characteristic functions,
//! * [`ratestudy`]: step-size sweeps and log-log slope fits,
//! * [`csvio`]: round-trip float formatting and small CSV helpers,
//! * [`cli`]: the `stable-em` command line front end.

pub mod cli;
pub mod csvio;
pub mod drift;
pub mod error;
pub mod metrics;
pub mod noise;
pub mod oubench;
pub mod quad;
pub mod ratestudy;
pub mod rng;
pub mod scheme;
pub mod stats;

pub use error::{Error, Result};
pub use noise::{NoiseSpec, StabilityIndex};
pub use rng::RngStream;
