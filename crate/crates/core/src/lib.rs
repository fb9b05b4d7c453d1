//! Finite-volume lab for entropy solutions of scalar conservation laws on
//! (0, 1) with Dirichlet data, and for the Degasperis–Procesi system.
//!
//! The guide lives in `book/`; its snippets run as doctests.

pub mod diagnostics;
pub mod domain;
pub mod dp;
pub mod elliptic;
pub mod error;
pub mod hyperbolic;
pub mod runner;
pub mod tridiag;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/domain.md")]
    mod domain {}
    #[doc = include_str!("../../../book/src/hyperbolic.md")]
    mod hyperbolic {}
    #[doc = include_str!("../../../book/src/elliptic.md")]
    mod elliptic {}
    #[doc = include_str!("../../../book/src/dp.md")]
    mod dp {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/runner.md")]
    mod runner {}
}
