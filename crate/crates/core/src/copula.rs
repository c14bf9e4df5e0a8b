//! Expression-tree data model for bivariate copulas.
//!
//! A [`CopulaExpr`] is an immutable tree over a handful of primitive copulas
//! combined with transpose, survival and convex mixing. Evaluation is pure and
//! returns the raw value of the expression; nothing is clamped, so an invalid
//! expression built through the unchecked constructors shows its defects to
//! the checker in [`crate::verify`].

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::error::{Error, Result};

/// A location in the closed unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    u: f64,
    v: f64,
}

impl Point {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v) {
            Ok(Self { u, v })
        } else {
            Err(Error::PointOutOfRange { u, v })
        }
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// The point with its coordinates swapped.
    pub fn swapped(&self) -> Self {
        Self { u: self.v, v: self.u }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// Axis-aligned box `[u1,u2] x [v1,v2]` inside the unit square, with strictly
/// positive side lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    u1: f64,
    u2: f64,
    v1: f64,
    v2: f64,
}

impl Rectangle {
    pub fn new(u1: f64, u2: f64, v1: f64, v2: f64) -> Result<Self> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if unit(u1) && unit(u2) && unit(v1) && unit(v2) && u1 < u2 && v1 < v2 {
            Ok(Self { u1, u2, v1, v2 })
        } else {
            Err(Error::InvalidRectangle { u1, u2, v1, v2 })
        }
    }

    pub fn u1(&self) -> f64 {
        self.u1
    }

    pub fn u2(&self) -> f64 {
        self.u2
    }

    pub fn v1(&self) -> f64 {
        self.v1
    }

    pub fn v2(&self) -> f64 {
        self.v2
    }

    /// Volume under the independence copula, i.e. the Lebesgue area.
    pub fn area(&self) -> f64 {
        (self.u2 - self.u1) * (self.v2 - self.v1)
    }
}

impl fmt::Display for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]x[{},{}]", self.u1, self.u2, self.v1, self.v2)
    }
}

/// Primitive copulas. Parameters are validated by the constructors in
/// [`crate::catalog`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Primitive {
    /// `uv`
    Independence,
    /// `min(u, v)`
    UpperFrechet,
    /// `max(u + v - 1, 0)`
    LowerFrechet,
    /// `min(u^(1-alpha) v, u v^(1-beta))`
    MarshallOlkin { alpha: f64, beta: f64 },
    /// `uv + theta * P(u, v)`
    PerturbedP { theta: f64 },
    /// `uv + theta * Q(u, v)`
    PerturbedQ { theta: f64 },
}

impl Primitive {
    #[inline]
    pub fn eval_uv(&self, u: f64, v: f64) -> f64 {
        match *self {
            Primitive::Independence => u * v,
            Primitive::UpperFrechet => u.min(v),
            Primitive::LowerFrechet => (u + v - 1.0).max(0.0),
            Primitive::MarshallOlkin { alpha, beta } => {
                (u.powf(1.0 - alpha) * v).min(u * v.powf(1.0 - beta))
            }
            Primitive::PerturbedP { theta } => u * v + theta * catalog::p_uv(u, v),
            Primitive::PerturbedQ { theta } => u * v + theta * catalog::q_uv(u, v),
        }
    }
}

/// One node of a copula expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Primitive(Primitive),
    /// `C^T(u,v) = C(v,u)`
    Transpose(CopulaExpr),
    /// `C^(u,v) = u + v - 1 + C(1-u, 1-v)`
    Survival(CopulaExpr),
    /// Convex combination; weights are nonnegative and sum to one.
    Mix(Vec<(f64, CopulaExpr)>),
}

/// Immutable, cheaply clonable copula expression.
///
/// Built only through [`crate::catalog`], [`crate::transforms`] and the
/// parser, which enforce the parameter and weight invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaExpr(Arc<Node>);

impl CopulaExpr {
    pub(crate) fn from_node(node: Node) -> Self {
        Self(Arc::new(node))
    }

    pub(crate) fn primitive(p: Primitive) -> Self {
        Self::from_node(Node::Primitive(p))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    /// True if both handles share the same tree.
    pub fn ptr_eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.eval_uv(p.u, p.v)
    }

    /// Evaluate without validating the arguments. Hot loops over lattices
    /// use this; callers guarantee `u, v` lie in the unit square.
    pub fn eval_uv(&self, u: f64, v: f64) -> f64 {
        match self.node() {
            Node::Primitive(p) => p.eval_uv(u, v),
            Node::Transpose(c) => c.eval_uv(v, u),
            Node::Survival(c) => u + v - 1.0 + c.eval_uv(1.0 - u, 1.0 - v),
            Node::Mix(parts) => parts.iter().map(|(w, c)| w * c.eval_uv(u, v)).sum(),
        }
    }

    /// The C-volume `C(u2,v2) - C(u2,v1) - C(u1,v2) + C(u1,v1)`.
    pub fn c_volume(&self, r: &Rectangle) -> f64 {
        volume_uv(self, r.u1, r.u2, r.v1, r.v2)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Primitive(_) => 1,
            Node::Transpose(c) | Node::Survival(c) => 1 + c.size(),
            Node::Mix(parts) => 1 + parts.iter().map(|(_, c)| c.size()).sum::<usize>(),
        }
    }
}

pub(crate) fn volume_uv(c: &CopulaExpr, u1: f64, u2: f64, v1: f64, v2: f64) -> f64 {
    c.eval_uv(u2, v2) - c.eval_uv(u2, v1) - c.eval_uv(u1, v2) + c.eval_uv(u1, v1)
}

/// `eval` as a free function.
pub fn eval(expr: &CopulaExpr, p: Point) -> f64 {
    expr.eval(p)
}

/// `c_volume` as a free function.
pub fn c_volume(expr: &CopulaExpr, r: &Rectangle) -> f64 {
    expr.c_volume(r)
}

/// Values of a copula on the uniform `(n+1) x (n+1)` lattice,
/// `value(i, j) = C(i/n, j/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCopula {
    n: usize,
    values: Vec<f64>,
}

impl GridCopula {
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidResolution { n, reason: "grid needs n >= 1" });
        }
        if values.len() != (n + 1) * (n + 1) {
            return Err(Error::MalformedGrid(format!(
                "expected {} values for n = {n}, got {}",
                (n + 1) * (n + 1),
                values.len()
            )));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.n + 1) + j]
    }

    /// Row-major flat storage; row `i` holds `C(i/n, ·)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n + 1;
        &self.values[i * w..(i + 1) * w]
    }

    /// Coordinate of lattice index `i`.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        lattice_coord(i, self.n)
    }

    /// Largest deviation from the border and margin conditions.
    pub fn boundary_defect(&self) -> f64 {
        let n = self.n;
        (0..=n)
            .map(|k| {
                let t = self.coord(k);
                self.get(0, k)
                    .abs()
                    .max(self.get(k, 0).abs())
                    .max((self.get(n, k) - t).abs())
                    .max((self.get(k, n) - t).abs())
            })
            .fold(0.0, f64::max)
    }
}

#[inline]
pub(crate) fn lattice_coord(i: usize, n: usize) -> f64 {
    i as f64 / n as f64
}

/// Sample `expr` on the `(n+1) x (n+1)` lattice.
pub fn sample_grid(expr: &CopulaExpr, n: usize) -> Result<GridCopula> {
    if n == 0 {
        return Err(Error::InvalidResolution { n, reason: "grid needs n >= 1" });
    }
    let values: Vec<f64> = (0..=n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let u = lattice_coord(i, n);
            (0..=n).map(move |j| expr.eval_uv(u, lattice_coord(j, n)))
        })
        .collect();
    Ok(GridCopula { n, values })
}
