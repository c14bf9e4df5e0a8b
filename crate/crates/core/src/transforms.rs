//! Transpose, survival, symmetrization and mixing, plus an explicit
//! normalization pass used for structural comparison.

use std::cmp::Ordering;

use crate::copula::{lattice_coord, CopulaExpr, Node, Primitive};
use crate::error::{Error, Result};

/// Absolute tolerance on mixture weights summing to one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Lattice resolution used by [`semantically_equal`].
pub const SEMANTIC_RESOLUTION: usize = 256;

/// Pointwise tolerance used by [`semantically_equal`].
pub const SEMANTIC_TOL: f64 = 1e-10;

/// Tolerance on numeric parameters in [`structurally_equal`].
const PARAM_TOL: f64 = 1e-12;

pub fn transpose(c: &CopulaExpr) -> CopulaExpr {
    CopulaExpr::from_node(Node::Transpose(c.clone()))
}

pub fn survival(c: &CopulaExpr) -> CopulaExpr {
    CopulaExpr::from_node(Node::Survival(c.clone()))
}

/// `C_S = (C + C^T) / 2`, the nearest symmetric copula in sup norm.
pub fn symmetrize(c: &CopulaExpr) -> CopulaExpr {
    half_and_half(c.clone(), transpose(c))
}

/// `C_R = (C + C^) / 2`, the nearest radially symmetric copula in sup norm.
pub fn radial_symmetrize(c: &CopulaExpr) -> CopulaExpr {
    half_and_half(c.clone(), survival(c))
}

fn half_and_half(a: CopulaExpr, b: CopulaExpr) -> CopulaExpr {
    CopulaExpr::from_node(Node::Mix(vec![(0.5, a), (0.5, b)]))
}

/// Convex combination `sum_i w_i C_i`.
pub fn mix(weights: &[f64], cs: &[CopulaExpr]) -> Result<CopulaExpr> {
    if weights.is_empty() || cs.is_empty() {
        return Err(Error::InvalidMix("empty mixture".into()));
    }
    if weights.len() != cs.len() {
        return Err(Error::InvalidMix(format!(
            "{} weights for {} copulas",
            weights.len(),
            cs.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidMix(format!("weight {w} is not a nonnegative number")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidMix(format!("weights sum to {total}, not 1")));
    }
    Ok(CopulaExpr::from_node(Node::Mix(
        weights.iter().copied().zip(cs.iter().cloned()).collect(),
    )))
}

/// Rewrite an expression into a canonical form using proved identities only:
///
/// * transposes are pushed to the leaves and absorbed (`Pi, M, W` and `pq`
///   are symmetric, `mo:a,b` transposes to `mo:b,a`, `pp:t` to `pp:-t`);
/// * survivals are pushed through mixtures and absorbed (`Pi, M, W` are
///   radially symmetric, `pp:t` and `pq:t` reflect to `theta = -t`); only
///   the survival of a Marshall–Olkin copula remains;
/// * mixtures are flattened, equal children merged, perturbations of the
///   same kind combined linearly in `theta`, zero weights dropped, and the
///   children sorted.
///
/// The result evaluates to the same function; `eval` never depends on it.
pub fn normalize(c: &CopulaExpr) -> CopulaExpr {
    rewrite(c, false, false)
}

/// Normal form of `c` after applying a pending transpose and/or survival.
/// Transpose and survival commute, so the order of the flags is irrelevant.
fn rewrite(c: &CopulaExpr, transposed: bool, survived: bool) -> CopulaExpr {
    match c.node() {
        Node::Primitive(p) => leaf(*p, transposed, survived),
        Node::Transpose(inner) => rewrite(inner, !transposed, survived),
        Node::Survival(inner) => rewrite(inner, transposed, !survived),
        Node::Mix(parts) => {
            let parts = parts
                .iter()
                .map(|(w, child)| (*w, rewrite(child, transposed, survived)))
                .collect();
            canonical_mix(parts)
        }
    }
}

fn leaf(p: Primitive, transposed: bool, survived: bool) -> CopulaExpr {
    let p = if transposed {
        match p {
            Primitive::MarshallOlkin { alpha, beta } => Primitive::MarshallOlkin { alpha: beta, beta: alpha },
            Primitive::PerturbedP { theta } => Primitive::PerturbedP { theta: -theta },
            other => other,
        }
    } else {
        p
    };
    let p = match p {
        Primitive::PerturbedP { theta } if survived => Primitive::PerturbedP { theta: -theta },
        Primitive::PerturbedQ { theta } if survived => Primitive::PerturbedQ { theta: -theta },
        other => other,
    };
    let p = match p {
        Primitive::PerturbedP { theta } | Primitive::PerturbedQ { theta } if theta == 0.0 => {
            Primitive::Independence
        }
        other => other,
    };
    let leaf = CopulaExpr::primitive(p);
    match p {
        Primitive::MarshallOlkin { .. } if survived => survival(&leaf),
        _ => leaf,
    }
}

fn canonical_mix(parts: Vec<(f64, CopulaExpr)>) -> CopulaExpr {
    // flatten
    let mut flat: Vec<(f64, CopulaExpr)> = Vec::with_capacity(parts.len());
    for (w, child) in parts {
        match child.node() {
            Node::Mix(inner) => flat.extend(inner.iter().map(|(wi, ci)| (w * wi, ci.clone()))),
            _ => flat.push((w, child)),
        }
    }

    // combine perturbations linearly in theta
    let mut merged: Vec<(f64, CopulaExpr)> = Vec::with_capacity(flat.len());
    let (mut wp, mut tp, mut wq, mut tq) = (0.0, 0.0, 0.0, 0.0);
    for (w, child) in flat {
        if w == 0.0 {
            continue;
        }
        match child.node() {
            Node::Primitive(Primitive::PerturbedP { theta }) => {
                wp += w;
                tp += w * theta;
            }
            Node::Primitive(Primitive::PerturbedQ { theta }) => {
                wq += w;
                tq += w * theta;
            }
            _ => merged.push((w, child)),
        }
    }
    if wp > 0.0 {
        merged.push((wp, leaf(Primitive::PerturbedP { theta: tp / wp }, false, false)));
    }
    if wq > 0.0 {
        merged.push((wq, leaf(Primitive::PerturbedQ { theta: tq / wq }, false, false)));
    }

    // merge structurally equal children
    merged.sort_by(|a, b| order(&a.1, &b.1));
    let mut out: Vec<(f64, CopulaExpr)> = Vec::with_capacity(merged.len());
    for (w, child) in merged {
        match out.last_mut() {
            Some((wl, last)) if same_structure(last, &child) => *wl += w,
            _ => out.push((w, child)),
        }
    }

    if out.len() == 1 {
        out.pop().expect("one child").1
    } else {
        CopulaExpr::from_node(Node::Mix(out))
    }
}

fn order(a: &CopulaExpr, b: &CopulaExpr) -> Ordering {
    a.to_string().cmp(&b.to_string())
}

/// Comparison of two trees already in normal form.
fn same_structure(a: &CopulaExpr, b: &CopulaExpr) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= PARAM_TOL;
    match (a.node(), b.node()) {
        (Node::Primitive(p), Node::Primitive(q)) => match (p, q) {
            (
                Primitive::MarshallOlkin { alpha: a1, beta: b1 },
                Primitive::MarshallOlkin { alpha: a2, beta: b2 },
            ) => close(*a1, *a2) && close(*b1, *b2),
            (Primitive::PerturbedP { theta: t1 }, Primitive::PerturbedP { theta: t2 })
            | (Primitive::PerturbedQ { theta: t1 }, Primitive::PerturbedQ { theta: t2 }) => {
                close(*t1, *t2)
            }
            _ => p == q,
        },
        (Node::Transpose(x), Node::Transpose(y)) | (Node::Survival(x), Node::Survival(y)) => {
            same_structure(x, y)
        }
        (Node::Mix(xs), Node::Mix(ys)) => {
            xs.len() == ys.len()
                && xs
                    .iter()
                    .zip(ys)
                    .all(|((wx, cx), (wy, cy))| close(*wx, *wy) && same_structure(cx, cy))
        }
        _ => false,
    }
}

/// Equality of normal forms, with numeric parameters compared to 1e-12.
pub fn structurally_equal(a: &CopulaExpr, b: &CopulaExpr) -> bool {
    same_structure(&normalize(a), &normalize(b))
}

/// Largest pointwise difference on the `SEMANTIC_RESOLUTION` lattice.
pub fn lattice_distance(a: &CopulaExpr, b: &CopulaExpr, n: usize) -> f64 {
    use rayon::prelude::*;
    (0..=n)
        .into_par_iter()
        .map(|i| {
            let u = lattice_coord(i, n);
            (0..=n)
                .map(|j| {
                    let v = lattice_coord(j, n);
                    (a.eval_uv(u, v) - b.eval_uv(u, v)).abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Lattice equality at resolution 256 within 1e-10.
pub fn semantically_equal(a: &CopulaExpr, b: &CopulaExpr) -> bool {
    lattice_distance(a, b, SEMANTIC_RESOLUTION) <= SEMANTIC_TOL
}
