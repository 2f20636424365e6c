//! Continuous-time barter on weighted trade networks.
//!
//! Agents hold bundles of goods and continuously exchange them along the
//! *fair trading* rule: every bilateral trade moves both partners' utilities
//! up at the same instantaneous rate, which pins the trade direction to the
//! vector rejection of one agent's utility gradient from the sum of the
//! pair's gradients. Who trades with whom, and how often, is a weighted
//! network derived from a matching-probability vector on the simplex.
//! Integrating the resulting vector field from an initial allocation walks
//! the economy up a potential (the sum of utilities) to a Pareto-optimal
//! fixed point; sweeping the probability simplex materializes the map from
//! networks to equilibria, point by point.
//!
//! The crate is organized around that pipeline:
//!
//! * [`economy`] — allocations, Cobb-Douglas utilities, gradients, and the
//!   contract-curve residual;
//! * [`dynamics`] — pairwise and network trade fields, the trade axioms,
//!   and the multilateral existence solver;
//! * [`networks`] — probability-induced weights, simplex grids, colors;
//! * [`integrate`] — the adaptive integrator and its run records;
//! * [`oracles`] — closed-form and brute-force references the dynamics is
//!   validated against;
//! * [`compare`] — fair path vs. price-taking benchmark;
//! * [`scenario`] — TOML scenario files and the bundled library;
//! * [`sweep`] — parallel simplex sweeps;
//! * [`export`] — deterministic CSV/JSON artifacts.
//!
//! The guide under `book/` walks through the same material chapter by
//! chapter; its code snippets compile and run as doc-tests of this crate.

pub mod compare;
pub mod dynamics;
pub mod economy;
pub mod error;
pub mod export;
pub mod integrate;
pub mod networks;
pub mod oracles;
pub mod scenario;
pub mod sweep;

pub use error::{Error, Result};

// The book's code fences are kept honest: every `rust` snippet in the guide
// is compiled and executed by `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/economy.md")]
    mod economy {}
    #[doc = include_str!("../../../book/src/fair-trading.md")]
    mod fair_trading {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/integration.md")]
    mod integration {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/welfare-map.md")]
    mod welfare_map {}
}
