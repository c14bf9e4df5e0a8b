//! Primitive copulas and the two perturbations of the independence copula.
//!
//! `P(u,v) = (u - v) min(u,v) min(1-u,1-v)` is antisymmetric under the
//! argument swap and `Q(u,v) = (u + v - 1) min(1-u,v) min(u,1-v)` is
//! antisymmetric under the radial reflection `(u,v) -> (1-u,1-v)`. For
//! `theta` in `[-1,1]` both `uv + theta P` and `uv + theta Q` are copulas.

use serde::{Deserialize, Serialize};

use crate::copula::{CopulaExpr, Point, Primitive};
use crate::error::{Error, Result};

pub fn independence() -> CopulaExpr {
    CopulaExpr::primitive(Primitive::Independence)
}

pub fn upper_frechet() -> CopulaExpr {
    CopulaExpr::primitive(Primitive::UpperFrechet)
}

pub fn lower_frechet() -> CopulaExpr {
    CopulaExpr::primitive(Primitive::LowerFrechet)
}

/// `min(u^(1-alpha) v, u v^(1-beta))` with `alpha, beta` in `(0,1)`.
pub fn marshall_olkin(alpha: f64, beta: f64) -> Result<CopulaExpr> {
    let open_unit = |x: f64| x > 0.0 && x < 1.0;
    if !open_unit(alpha) {
        return Err(Error::InvalidParameter {
            constructor: "mo",
            reason: format!("alpha must be in (0,1), got {alpha}"),
        });
    }
    if !open_unit(beta) {
        return Err(Error::InvalidParameter {
            constructor: "mo",
            reason: format!("beta must be in (0,1), got {beta}"),
        });
    }
    Ok(CopulaExpr::primitive(Primitive::MarshallOlkin { alpha, beta }))
}

fn check_theta(constructor: &'static str, theta: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            constructor,
            reason: format!("theta must be in [-1,1], got {theta}"),
        })
    }
}

/// `uv + theta P(u,v)`, asymmetric for `theta != 0`.
pub fn perturbed_p(theta: f64) -> Result<CopulaExpr> {
    check_theta("pp", theta)?;
    Ok(CopulaExpr::primitive(Primitive::PerturbedP { theta }))
}

/// `uv + theta Q(u,v)`, radially asymmetric for `theta != 0`.
pub fn perturbed_q(theta: f64) -> Result<CopulaExpr> {
    check_theta("pq", theta)?;
    Ok(CopulaExpr::primitive(Primitive::PerturbedQ { theta }))
}

/// Builds `uv + theta P` for any finite `theta`, including values for which
/// the result is not a copula. Exists so the axiom checker can be shown a
/// known non-copula; the parser never calls it.
pub fn force_perturbed_p(theta: f64) -> CopulaExpr {
    CopulaExpr::primitive(Primitive::PerturbedP { theta })
}

/// Unguarded counterpart of [`perturbed_q`]; see [`force_perturbed_p`].
pub fn force_perturbed_q(theta: f64) -> CopulaExpr {
    CopulaExpr::primitive(Primitive::PerturbedQ { theta })
}

#[inline]
pub(crate) fn p_uv(u: f64, v: f64) -> f64 {
    (u - v) * u.min(v) * (1.0 - u).min(1.0 - v)
}

#[inline]
pub(crate) fn q_uv(u: f64, v: f64) -> f64 {
    (u + v - 1.0) * (1.0 - u).min(v) * u.min(1.0 - v)
}

pub fn perturbation_p(p: Point) -> f64 {
    p_uv(p.u(), p.v())
}

pub fn perturbation_q(p: Point) -> f64 {
    q_uv(p.u(), p.v())
}

/// Position relative to the main diagonal `v = u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaRegion {
    /// `v < u`
    LowerTriangle,
    Diagonal,
    /// `v > u`
    UpperTriangle,
}

/// Position relative to the anti-diagonal `u + v = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OmegaRegion {
    /// `u + v < 1`
    BelowAntidiagonal,
    Antidiagonal,
    /// `u + v > 1`
    AboveAntidiagonal,
}

impl DeltaRegion {
    /// Closed region containing the point; the diagonal belongs to the
    /// lower triangle.
    pub fn closed(self) -> DeltaRegion {
        match self {
            DeltaRegion::Diagonal => DeltaRegion::LowerTriangle,
            r => r,
        }
    }
}

impl OmegaRegion {
    /// Closed region containing the point; the anti-diagonal belongs to the
    /// lower region.
    pub fn closed(self) -> OmegaRegion {
        match self {
            OmegaRegion::Antidiagonal => OmegaRegion::BelowAntidiagonal,
            r => r,
        }
    }
}

pub fn classify_delta(p: Point) -> DeltaRegion {
    let (u, v) = (p.u(), p.v());
    if v < u {
        DeltaRegion::LowerTriangle
    } else if v == u {
        DeltaRegion::Diagonal
    } else {
        DeltaRegion::UpperTriangle
    }
}

pub fn classify_omega(p: Point) -> OmegaRegion {
    let s = p.u() + p.v();
    if s < 1.0 {
        OmegaRegion::BelowAntidiagonal
    } else if s == 1.0 {
        OmegaRegion::Antidiagonal
    } else {
        OmegaRegion::AboveAntidiagonal
    }
}
