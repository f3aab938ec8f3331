//! Myerson's optimal auction for single-parameter environments with finite
//! value distributions and arbitrary feasible-allocation systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`dist`]: finite value distributions, quantiles, dominance and closeness.
//! - [`curves`]: revenue curves, ironing, ironed virtual values.
//! - [`feasible`]: feasible allocation systems (set systems, matroids, vertex sets).
//! - [`auction`]: the optimal auction, its payments and expected revenue.
//! - [`learn`]: sampling, (dominated) empirical distributions, Bernstein radii,
//!   sample-count formulas and Hellinger distances.
//! - [`lab`]: experiment drivers producing machine-readable [`lab::Report`]s.

pub mod auction;
pub mod curves;
pub mod dist;
mod error;
pub mod feasible;
pub mod lab;
pub mod learn;
pub mod rng;

pub use auction::{myerson, opt_revenue, Auction};
pub use curves::{RevenueCurve, Virtual};
pub use dist::{ProductDist, ValueDist};
pub use error::{Error, Result};
pub use feasible::FeasibleSet;

/// Tolerance for probability-mass sums.
pub const MASS_TOL: f64 = 1e-12;

/// Tolerance for derived quantities (revenues, welfare comparisons).
pub const TOL: f64 = 1e-9;
