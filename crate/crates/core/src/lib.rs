//! Numerical laboratory for Hilbert geometries on properly convex domains.
//!
//! The crate is organized bottom-up:
//!
//! - [`projective`]: homogeneous coordinates, projective maps, cross-ratios,
//!   eigenvalue summaries.
//! - [`domain`]: properly convex domains (ellipsoids, p-norm balls, halfspace
//!   polytopes) with containment / ray-casting / supporting-hyperplane oracles.
//! - [`geometry`]: the Hilbert metric, unit-speed geodesic chords, Busemann
//!   functions, Gromov products, shadows and horoballs.
//! - [`group`]: discrete subgroups of domain automorphisms — orbit balls,
//!   translation lengths, element classification, conjugacy-class enumeration,
//!   and a library of scenario presets.
//! - [`pslab`]: Poincare series, critical exponents, Patterson-Sullivan
//!   densities and the counting / equidistribution experiments built on them.
//! - [`config`] / [`report`]: experiment configuration and CSV/JSON output.

pub mod config;
pub mod domain;
pub mod error;
pub mod geometry;
pub mod group;
pub mod projective;
pub mod pslab;
pub mod report;

pub use error::{Error, Result};
