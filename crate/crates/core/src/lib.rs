//! harmdens: a symbolic-numeric toolkit for volume densities of central
//! harmonic model spaces.
//!
//! The crate computes the asymptotic coefficients of the volume density
//! function of the rank-1 model geometries, solves the radial conformal
//! deformation problem that prescribes a target density (exactly as a
//! series germ, and numerically on a grid), and classifies the resulting
//! spaces by the spectra of their Weyl-Jacobi operators.
//!
//! Modules:
//! - [`series`]: truncated power series over the rationals (the carrier
//!   for every exact computation here);
//! - [`models`]: the catalog of model geometries with densities, Jacobi
//!   spectra and trace tables;
//! - [`asymptotics`]: the density-coefficient formulas in Jacobi traces
//!   and their evaluation;
//! - [`deformation`]: the radial conformal deformation solvers;
//! - [`weyl`]: Weyl-Jacobi spectra and pairwise distinguishability;
//! - [`verify`]: the self-contained verification battery.
//!
//! ```
//! use harmdens::asymptotics::{eval_h, extract_h};
//! use harmdens::models::{make_space, theta_tilde_series, trace_table, Family};
//!
//! // The r^4 density coefficient of the complex projective plane, by
//! // trace formula and by series expansion.
//! let cp2 = make_space(Family::Cp, Some(2))?;
//! let series = theta_tilde_series(&cp2, 8);
//! assert_eq!(eval_h(&trace_table(&cp2), 4)?, extract_h(&series)?.get(4));
//! # Ok::<(), harmdens::Error>(())
//! ```

pub mod asymptotics;
pub mod deformation;
pub mod models;
pub mod numeric;
pub mod rational;
pub mod series;
pub mod verify;
pub mod weyl;

pub use rational::Rat;
pub use series::{Parity, TruncatedSeries};

/// Errors raised by the library. Each variant names the violated
/// precondition or the failing stage.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("composition domain: inner series must have constant term 0, got {0}")]
    CompositionDomain(String),

    #[error("reversion domain: series must have s(0) = 0 and unit linear coefficient")]
    ReversionDomain,

    #[error("power domain: series must have constant term 1, got {0}")]
    PowerDomain(String),

    #[error("parity: {0}")]
    Parity(String),

    #[error("undefined space: {0}")]
    UndefinedSpace(String),

    #[error("unsupported order {0}: coefficient formulas cover orders 2 through 8")]
    UnsupportedOrder(u32),

    #[error("incomplete trace table: no entry for {0}")]
    IncompleteTable(String),

    #[error("normalization: density series must have constant term 1, got {0}")]
    Normalization(String),

    #[error("invalid target sequence: {0}")]
    InvalidTarget(String),

    #[error("domain: {0}")]
    Domain(String),

    #[error("positivity: {0}")]
    Positivity(String),

    #[error("continuation stalled at r = {last_good}: {reason}")]
    Continuation { last_good: f64, reason: String },

    #[error("Weyl spectrum undefined: dimension {0} is below 4")]
    WeylUndefined(u32),

    #[error("cannot parse '{0}' as a rational p/q")]
    ParseRational(String),
}

pub type Result<T> = std::result::Result<T, Error>;
