//! Fractional poroelastic consolidation.
//!
//! Library for one-dimensional consolidation of fluid-saturated porous media
//! whose seepage law carries a fractional time derivative (power-law memory).
//! Provides the special functions the closed-form solutions are built from,
//! discrete fractional-derivative operators, analytic solution families,
//! an implicit finite-difference solver with full memory convolution,
//! creep-curve fitting, and the one-way ANOVA used for parameter tables.

pub mod analytic;
pub mod biphasic;
pub mod error;
pub mod fitting;
pub mod fracops;
pub mod io;
pub mod material;
pub mod model;
pub mod solver;
pub mod specialfn;
pub mod stats;
pub mod terzaghi;
pub mod validate;

pub use error::{Error, Result};
