//! Nested lattice codes for recovering a non-integer linear combination of
//! two users' codewords over the Gaussian multiple-access channel, and for
//! exchanging messages through a two-way relay built on the same scheme.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: quantizers, modulo reduction, second moments, dithers.
//! * [`chain`]: the three-lattice chain `Λ₁ ⊆ α₁Λ₂ ⊆ Λ_c` and its codebooks.
//! * [`mac`]: Monte Carlo simulation of encoding, channel and decoding.
//! * [`region`]: closed-form achievable rate regions and convex hulls.
//! * [`relay`]: two-way relay recovery on top of the MAC pipeline.

pub mod chain;
pub mod error;
pub mod format;
pub mod lattice;
pub mod mac;
pub mod parallel;
pub mod region;
pub mod relay;
pub mod stats;

pub use error::{Error, Result};
pub use lattice::{Family, Lattice, MomentEstimate};
