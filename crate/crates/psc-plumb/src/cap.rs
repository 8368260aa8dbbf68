//! Geodesic caps in round spheres and the gluing checks built on their
//! boundary second fundamental forms.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::CHECK_TOL;

#[derive(Debug, Error, PartialEq)]
pub enum CapError {
    #[error("geodesic radius {big_r} outside (0, pi*r) for r = {r}")]
    GeodesicRadius { r: f64, big_r: f64 },
    #[error("angular radius {0} outside (0, pi)")]
    AngularRadius(f64),
    #[error("boundary radius must be positive, got {0}")]
    BoundaryRadius(f64),
    #[error("fiber dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("block structure mismatch: {0:?} vs {1:?}")]
    StructureMismatch(Vec<usize>, Vec<usize>),
}

/// Closed geodesic ball of radius `big_r` in the round sphere `S^p(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicCap {
    pub r: f64,
    pub big_r: f64,
    /// Radius of the boundary sphere, `r sin(R/r)`.
    pub rho: f64,
    /// Angular radius `R/r`.
    pub eps: f64,
    pub dim: usize,
}

pub fn cap_from_geodesic(r: f64, big_r: f64, p: usize) -> Result<GeodesicCap, CapError> {
    if p < 2 {
        return Err(CapError::Dimension(p));
    }
    if !(r > 0.0 && big_r > 0.0 && big_r < PI * r) {
        return Err(CapError::GeodesicRadius { r, big_r });
    }
    let eps = big_r / r;
    Ok(GeodesicCap { r, big_r, rho: r * eps.sin(), eps, dim: p })
}

pub fn cap_from_angular(eps: f64, rho: f64, p: usize) -> Result<GeodesicCap, CapError> {
    if p < 2 {
        return Err(CapError::Dimension(p));
    }
    if !(eps > 0.0 && eps < PI) {
        return Err(CapError::AngularRadius(eps));
    }
    if !(rho > 0.0) {
        return Err(CapError::BoundaryRadius(rho));
    }
    let r = rho / eps.sin();
    Ok(GeodesicCap { r, big_r: eps * r, rho, eps, dim: p })
}

/// One diagonal block `coef * I_mult` of a second fundamental form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub coef: f64,
    pub mult: usize,
}

/// Second fundamental form that is diagonal with respect to an orthonormal
/// splitting. Blocks are kept in declaration order (the `S^{q-1}` block, when
/// present, comes first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDiagonalForm {
    pub blocks: Vec<Block>,
}

impl BlockDiagonalForm {
    pub fn new(blocks: Vec<(f64, usize)>) -> Self {
        Self { blocks: blocks.into_iter().map(|(coef, mult)| Block { coef, mult }).collect() }
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.mult).sum()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.mult).collect()
    }

    /// Form of the same hypersurface after the ambient metric is scaled by `lambda^2`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| Block { coef: b.coef / lambda, mult: b.mult }).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.coef * b.mult as f64).sum()
    }
}

pub fn cap_boundary_form(cap: &GeodesicCap) -> BlockDiagonalForm {
    let x = cap.big_r / cap.r;
    BlockDiagonalForm::new(vec![(x.cos() / x.sin() / cap.r, cap.dim - 1)])
}

/// Gluing admissibility: the sum of the two boundary forms is positive
/// semi-definite, up to [`CHECK_TOL`].
pub fn perelman_form_check(a: &BlockDiagonalForm, b: &BlockDiagonalForm) -> Result<bool, CapError> {
    Ok(perelman_form_sums(a, b)?.iter().all(|s| *s >= -CHECK_TOL))
}

/// Blockwise coefficient sums of two aligned forms.
pub fn perelman_form_sums(a: &BlockDiagonalForm, b: &BlockDiagonalForm) -> Result<Vec<f64>, CapError> {
    if a.multiplicities() != b.multiplicities() {
        return Err(CapError::StructureMismatch(a.multiplicities(), b.multiplicities()));
    }
    Ok(a.blocks.iter().zip(&b.blocks).map(|(x, y)| x.coef + y.coef).collect())
}

/// Two warped collars `dt^2 + k_±(t)^2 g` glue when `k_-'(0) >= k_+'(0)`.
pub fn warped_collar_glue_check(kappa_minus_prime: f64, kappa_plus_prime: f64) -> bool {
    kappa_minus_prime >= kappa_plus_prime - CHECK_TOL
}
