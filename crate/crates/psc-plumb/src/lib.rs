//! Positive scalar curvature on plumbed disk bundles.
//!
//! The crate builds warping profiles for the boundary metric of a disk
//! bundle glued into a manifold with a nice coordinate chart, checks their
//! Ricci and mean curvature, and computes the topological data (intersection
//! forms, Arf invariants, eta ledgers) of plumbing trees.

// `!(x > 0.0)` is used on purpose so that NaN fails a check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cap;
pub mod curvature;
pub mod mean_curvature;
pub mod ode;
pub mod par;
pub mod pipeline;
pub mod plumbing;
pub mod profile;

/// Absolute tolerance used by every `>=` style gluing and positivity check.
pub const CHECK_TOL: f64 = 1e-9;
