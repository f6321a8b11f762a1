//! Elementary-function series for the modified Bessel function of the second
//! kind, and the closed-form statistics it unlocks for two-hop
//! amplify-and-forward (AF) relaying with maximum-ratio combining (MRC).
//!
//! The truncated series
//!
//! ```text
//! K_ν(z) ≈ e^{-z} z^{-ν} Σ_{q=0}^{k} a_{ν,k,q} z^q
//! ```
//!
//! replaces `K_1` in the S-R-D link distribution, which turns the MRC output
//! power distribution into sums of `x^c e^{-λx}` terms. Outage, bit error
//! probability and ergodic capacity then follow in closed form.
//!
//! Module map:
//!
//! * [`series`]: Lah numbers, series coefficients and truncated evaluation.
//! * [`oracle`]: quadrature reference for `K_ν` and the fractional-integral
//!   identities behind the series. Test scaffolding, slow on purpose.
//! * [`relay`]: system model, exact and series-based distributions.
//! * [`performance`]: outage, BEP and capacity with quadrature cross-checks.
//! * [`montecarlo`]: seeded, worker-count independent simulator.
//! * [`validation`]: the end-to-end acceptance checks, shared by the CLI.

pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod performance;
pub mod quadrature;
pub mod relay;
pub mod series;
pub mod special;
pub mod validation;

pub use error::{Error, Result};
