//! Concordance, the four classical concordance measures, tail dependence,
//! certified sup-norm distances and the asymmetry measures.
//!
//! Integrals against `dC2` use the cell-volume rule on the uniform `n x n`
//! partition: the integrand is the mean of `C1` at the four cell corners and
//! the measure of each cell is its exact C2-volume. Singular copulas need no
//! special handling because cell volumes carry their mass exactly. The error
//! estimate is the difference between resolutions `n` and `n/2`.
//!
//! Sums are formed row by row with pairwise summation and the row sums are
//! combined pairwise in row order, so results are bit-identical across runs
//! and thread counts.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{independence, lower_frechet, upper_frechet};
use crate::copula::{lattice_coord, sample_grid, CopulaExpr, GridCopula};
use crate::error::{Error, Result};
use crate::transforms::{structurally_equal, survival, transpose};

pub const DEFAULT_RESOLUTION: usize = 1024;
pub const DEFAULT_SUP_TOL: f64 = 1e-4;
pub const DEFAULT_CELL_BUDGET: usize = 1 << 26;

/// Difference-quotient stopping threshold for tail limits.
pub const TAIL_CAUCHY_TOL: f64 = 1e-6;
const TAIL_FIRST_K: i32 = 4;
const TAIL_LAST_K: i32 = 40;

/// A numerical value with a nonnegative error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

/// Certified enclosure `lower <= x <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    fn scale(self, k: f64) -> Bounds {
        Bounds { lower: k * self.lower, upper: k * self.upper }
    }
}

fn check_resolution(n: usize) -> Result<()> {
    if n < 16 {
        return Err(Error::InvalidResolution { n, reason: "quadrature needs n >= 16" });
    }
    if !n.is_power_of_two() {
        return Err(Error::InvalidResolution { n, reason: "quadrature needs a power of two" });
    }
    Ok(())
}

/// Pairwise (cascade) summation with a fixed split, for reproducible sums.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    const BASE: usize = 16;
    if xs.len() <= BASE {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `int C1 dC2` with the cell-volume rule on every `stride`-th lattice line.
fn stieltjes_sum(g1: &GridCopula, g2: &GridCopula, stride: usize) -> f64 {
    let n = g1.n();
    let cells = n / stride;
    let rows: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|a| {
            let (i0, i1) = (a * stride, (a + 1) * stride);
            let terms: Vec<f64> = (0..cells)
                .map(|b| {
                    let (j0, j1) = (b * stride, (b + 1) * stride);
                    let mean =
                        0.25 * (g1.get(i0, j0) + g1.get(i1, j0) + g1.get(i0, j1) + g1.get(i1, j1));
                    let vol = g2.get(i1, j1) - g2.get(i1, j0) - g2.get(i0, j1) + g2.get(i0, j0);
                    mean * vol
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&rows)
}

/// Concordance `Q = 4 int C1 dC2 - 1` from two grids of equal resolution.
pub fn concordance_on_grids(g1: &GridCopula, g2: &GridCopula) -> Result<Estimate> {
    let n = g1.n();
    check_resolution(n)?;
    if g2.n() != n {
        return Err(Error::InvalidResolution { n: g2.n(), reason: "grids differ in resolution" });
    }
    let fine = 4.0 * stieltjes_sum(g1, g2, 1) - 1.0;
    let coarse = 4.0 * stieltjes_sum(g1, g2, 2) - 1.0;
    Ok(Estimate { value: fine, err: (fine - coarse).abs() })
}

/// `int C1 dC2` at resolution `n`, with the `n` vs `n/2` error estimate.
pub fn stieltjes_integral(c1: &CopulaExpr, c2: &CopulaExpr, n: usize) -> Result<Estimate> {
    let q = concordance(c1, c2, n)?;
    Ok(Estimate { value: (q.value + 1.0) / 4.0, err: q.err / 4.0 })
}

pub fn concordance(c1: &CopulaExpr, c2: &CopulaExpr, n: usize) -> Result<Estimate> {
    check_resolution(n)?;
    let g1 = sample_grid(c1, n)?;
    let g2 = if c1.ptr_eq(c2) { g1.clone() } else { sample_grid(c2, n)? };
    concordance_on_grids(&g1, &g2)
}

/// Kendall's tau, `Q(C, C)`.
pub fn kendall_tau(c: &CopulaExpr, n: usize) -> Result<Estimate> {
    check_resolution(n)?;
    let g = sample_grid(c, n)?;
    concordance_on_grids(&g, &g)
}

/// Spearman's rho, `3 Q(C, Pi)`.
pub fn spearman_rho(c: &CopulaExpr, n: usize) -> Result<Estimate> {
    check_resolution(n)?;
    let g = sample_grid(c, n)?;
    spearman_on_grid(&g)
}

fn spearman_on_grid(g: &GridCopula) -> Result<Estimate> {
    let pi = sample_grid(&independence(), g.n())?;
    let q = concordance_on_grids(g, &pi)?;
    Ok(Estimate { value: 3.0 * q.value, err: 3.0 * q.err })
}

/// Gini's gamma, `Q(C, M) + Q(C, W)`.
pub fn gini_gamma(c: &CopulaExpr, n: usize) -> Result<Estimate> {
    check_resolution(n)?;
    let g = sample_grid(c, n)?;
    gini_on_grid(&g)
}

fn gini_on_grid(g: &GridCopula) -> Result<Estimate> {
    let m = sample_grid(&upper_frechet(), g.n())?;
    let w = sample_grid(&lower_frechet(), g.n())?;
    let qm = concordance_on_grids(g, &m)?;
    let qw = concordance_on_grids(g, &w)?;
    Ok(Estimate { value: qm.value + qw.value, err: qm.err + qw.err })
}

/// Blomqvist's beta, `4 C(1/2, 1/2) - 1`, evaluated exactly.
pub fn blomqvist_beta(c: &CopulaExpr) -> f64 {
    4.0 * c.eval_uv(0.5, 0.5) - 1.0
}

fn tail_limit(quotient: impl Fn(i32) -> f64) -> Option<f64> {
    let mut previous = quotient(TAIL_FIRST_K);
    for k in TAIL_FIRST_K + 1..=TAIL_LAST_K {
        let current = quotient(k);
        if !current.is_finite() {
            return None;
        }
        if (current - previous).abs() < TAIL_CAUCHY_TOL {
            return Some(current);
        }
        previous = current;
    }
    None
}

/// `lambda_U = 2 - lim_{t->1} (1 - C(t,t)) / (1 - t)` along `t = 1 - 2^-k`,
/// or `None` when the quotients do not settle.
pub fn tail_upper(c: &CopulaExpr) -> Option<f64> {
    tail_limit(|k| {
        let gap = (-k as f64).exp2();
        let t = 1.0 - gap;
        2.0 - (1.0 - c.eval_uv(t, t)) / gap
    })
}

/// `lambda_L = lim_{t->0} C(t,t) / t` along `t = 2^-k`.
pub fn tail_lower(c: &CopulaExpr) -> Option<f64> {
    tail_limit(|k| {
        let t = (-k as f64).exp2();
        c.eval_uv(t, t) / t
    })
}

/// Branch-and-bound search for `sup |a - b|` over the unit square.
///
/// Both arguments are copulas, so each is nondecreasing and 1-Lipschitz in
/// each argument; their difference is therefore 1-Lipschitz per argument
/// and on a cell of side `h` it exceeds its largest corner value by at most
/// `h`. Cells whose bound cannot beat the best lattice value by more than
/// `tol` are discarded, the rest are split in four.
#[derive(Debug, Clone, Copy)]
pub struct SupNormSearch {
    pub tol: f64,
    /// Maximum number of point evaluations of `|a - b|`.
    pub cell_budget: usize,
}

const SEARCH_START: usize = 64;
const DIFF_LIPSCHITZ: f64 = 1.0;

#[derive(Clone, Copy)]
struct Cell {
    // lower-left corner in units of the current step
    i: u64,
    j: u64,
    // |D| at (i,j), (i+1,j), (i,j+1), (i+1,j+1)
    corners: [f64; 4],
}

impl Cell {
    fn peak(&self) -> f64 {
        self.corners.iter().copied().fold(0.0, f64::max)
    }
}

impl SupNormSearch {
    pub fn new(tol: f64) -> Self {
        Self { tol, cell_budget: DEFAULT_CELL_BUDGET }
    }

    pub fn with_budget(mut self, cell_budget: usize) -> Self {
        self.cell_budget = cell_budget;
        self
    }

    pub fn run(&self, a: &CopulaExpr, b: &CopulaExpr) -> Result<Bounds> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidTolerance(self.tol));
        }
        if structurally_equal(a, b) {
            return Ok(Bounds { lower: 0.0, upper: 0.0 });
        }
        let diff = |u: f64, v: f64| (a.eval_uv(u, v) - b.eval_uv(u, v)).abs();

        let n = SEARCH_START;
        let lattice: Vec<f64> = (0..=n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let u = lattice_coord(i, n);
                (0..=n).map(move |j| diff(u, lattice_coord(j, n)))
            })
            .collect();
        let mut used = lattice.len();
        let at = |i: usize, j: usize| lattice[i * (n + 1) + j];
        let mut lower = lattice.iter().copied().fold(0.0, f64::max);
        let mut active: Vec<Cell> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| Cell {
                i: i as u64,
                j: j as u64,
                corners: [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)],
            })
            .collect();

        let mut steps: u64 = n as u64;
        let mut upper = lower;
        while !active.is_empty() {
            let h = 1.0 / steps as f64;
            let slack = DIFF_LIPSCHITZ * h;
            let (keep, done): (Vec<Cell>, Vec<Cell>) =
                active.into_iter().partition(|c| c.peak() + slack > lower + self.tol);
            upper = done.iter().map(|c| c.peak() + slack).fold(upper, f64::max);
            if keep.is_empty() {
                break;
            }

            used += 5 * keep.len();
            if used > self.cell_budget {
                return Err(Error::BudgetExceeded { used, budget: self.cell_budget });
            }
            steps *= 2;
            let fine = steps as f64;
            active = keep
                .par_iter()
                .flat_map_iter(|c| {
                    let (i, j) = (2 * c.i, 2 * c.j);
                    let p = |di: u64, dj: u64| diff((i + di) as f64 / fine, (j + dj) as f64 / fine);
                    let [c00, c20, c02, c22] = c.corners;
                    let (c10, c01, c11, c21, c12) = (p(1, 0), p(0, 1), p(1, 1), p(2, 1), p(1, 2));
                    [
                        Cell { i, j, corners: [c00, c10, c01, c11] },
                        Cell { i: i + 1, j, corners: [c10, c20, c11, c21] },
                        Cell { i, j: j + 1, corners: [c01, c11, c02, c12] },
                        Cell { i: i + 1, j: j + 1, corners: [c11, c21, c12, c22] },
                    ]
                })
                .collect();
            lower = active.iter().map(Cell::peak).fold(lower, f64::max);
        }
        Ok(Bounds { lower, upper: upper.max(lower) })
    }
}

/// Certified bounds on `||a - b||_inf` with `upper - lower <= tol`.
pub fn sup_distance(a: &CopulaExpr, b: &CopulaExpr, tol: f64) -> Result<Bounds> {
    SupNormSearch::new(tol).run(a, b)
}

/// `mu(C) = ||C - C^T|| / 2`.
pub fn asymmetry_mu(c: &CopulaExpr, tol: f64) -> Result<Bounds> {
    Ok(sup_distance(c, &transpose(c), tol)?.scale(0.5))
}

/// `nu(C) = ||C - C^|| / 2`.
pub fn radial_asymmetry_nu(c: &CopulaExpr, tol: f64) -> Result<Bounds> {
    Ok(sup_distance(c, &survival(c), tol)?.scale(0.5))
}

/// All dependence and asymmetry measures of one copula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub tau: f64,
    pub rho: f64,
    pub gamma: f64,
    pub beta: f64,
    pub lambda_upper: Option<f64>,
    pub lambda_lower: Option<f64>,
    pub mu: f64,
    pub nu: f64,
    pub resolution: usize,
    pub error_estimates: BTreeMap<String, f64>,
}

/// Every measure of `c`: quadratures at resolution `n`, sup norms to `tol`.
/// `mu` and `nu` are reported as the midpoints of their certified bounds
/// with the half-width as error estimate.
pub fn full_report(c: &CopulaExpr, n: usize, tol: f64) -> Result<MeasureReport> {
    check_resolution(n)?;
    let grid = sample_grid(c, n)?;
    let tau = concordance_on_grids(&grid, &grid)?;
    let rho = spearman_on_grid(&grid)?;
    let gamma = gini_on_grid(&grid)?;
    drop(grid);
    let mu = asymmetry_mu(c, tol)?;
    let nu = radial_asymmetry_nu(c, tol)?;

    let error_estimates = BTreeMap::from([
        ("tau".to_string(), tau.err),
        ("rho".to_string(), rho.err),
        ("gamma".to_string(), gamma.err),
        ("beta".to_string(), 0.0),
        ("mu".to_string(), 0.5 * mu.width()),
        ("nu".to_string(), 0.5 * nu.width()),
    ]);
    Ok(MeasureReport {
        tau: tau.value,
        rho: rho.value,
        gamma: gamma.value,
        beta: blomqvist_beta(c),
        lambda_upper: tail_upper(c),
        lambda_lower: tail_lower(c),
        mu: mu.midpoint(),
        nu: nu.midpoint(),
        resolution: n,
        error_estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::*;
    use crate::transforms::{mix, radial_symmetrize, symmetrize};

    #[test]
    fn resolution_guard() {
        let pi = independence();
        assert!(concordance(&pi, &pi, 8).is_err());
        assert!(concordance(&pi, &pi, 48).is_err());
        assert!(concordance(&pi, &pi, 16).is_ok());
    }

    #[test]
    fn analytic_concordances() {
        let (pi, m, w) = (independence(), upper_frechet(), lower_frechet());
        for n in [16, 64, 256] {
            let q = concordance(&m, &m, n).unwrap();
            assert!((q.value - 1.0).abs() <= q.err + 1e-12, "{q:?}");
            let q = concordance(&pi, &pi, n).unwrap();
            assert!(q.value.abs() <= q.err + 1e-12, "{q:?}");
            // int Pi dM = int t^2 dt = 1/3, int Pi dW = int t(1-t) dt = 1/6
            let qm = concordance(&pi, &m, n).unwrap();
            let qw = concordance(&pi, &w, n).unwrap();
            assert!((qm.value - 1.0 / 3.0).abs() <= qm.err, "{qm:?}");
            assert!((qw.value + 1.0 / 3.0).abs() <= qw.err, "{qw:?}");
            // int M dW = int min(t, 1-t) dt = 1/4
            let q = concordance(&m, &w, n).unwrap();
            assert!(q.value.abs() < 1e-12);
        }
        let g = gini_gamma(&pi, 64).unwrap();
        assert!(g.value.abs() <= g.err + 1e-12);
    }

    #[test]
    fn blomqvist_examples() {
        assert_eq!(blomqvist_beta(&independence()), 0.0);
        assert_eq!(blomqvist_beta(&upper_frechet()), 1.0);
        assert_eq!(blomqvist_beta(&lower_frechet()), -1.0);
    }

    #[test]
    fn spearman_vanishes_for_perturbed_p() {
        for theta in [-1.0, 0.5, 1.0] {
            let r = spearman_rho(&perturbed_p(theta).unwrap(), 256).unwrap();
            assert!(r.value.abs() < 1e-6, "{theta}: {r:?}");
        }
    }

    #[test]
    fn tails_of_reference_copulas() {
        let pi = independence();
        let l = tail_lower(&pi).unwrap();
        let u = tail_upper(&pi).unwrap();
        assert!(l.abs() < TAIL_CAUCHY_TOL && u.abs() < TAIL_CAUCHY_TOL);
        assert_eq!(tail_lower(&upper_frechet()), Some(1.0));
        assert_eq!(tail_upper(&upper_frechet()), Some(1.0));
        assert_eq!(tail_lower(&lower_frechet()), Some(0.0));

        // C(t,t) = t^1.75 for MO(0.5, 0.25)
        let mo = marshall_olkin(0.5, 0.25).unwrap();
        assert!((tail_upper(&mo).unwrap() - 0.25).abs() < 1e-4);
        assert!(tail_lower(&mo).unwrap().abs() < 1e-4);
        let s = symmetrize(&mo);
        assert!((tail_upper(&s).unwrap() - tail_upper(&mo).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn tail_absent_when_quotients_do_not_settle() {
        assert_eq!(tail_limit(|k| if k % 2 == 0 { 0.0 } else { 1.0 }), None);
        assert_eq!(tail_limit(|k| 1.0 / k as f64), None);
    }

    #[test]
    fn sup_distance_examples() {
        let (pi, m, w) = (independence(), upper_frechet(), lower_frechet());
        let b = sup_distance(&pi, &pi, 1e-6).unwrap();
        assert_eq!(b, Bounds { lower: 0.0, upper: 0.0 });

        let b = sup_distance(&m, &w, 1e-3).unwrap();
        assert!(b.lower <= 0.5 && 0.5 <= b.upper && b.width() <= 1e-3, "{b:?}");

        let b = sup_distance(&perturbed_p(1.0).unwrap(), &pi, 1e-4).unwrap();
        let exact = 1.0 / 27.0;
        assert!(b.lower <= exact && exact <= b.upper && b.width() <= 1e-4, "{b:?}");
    }

    #[test]
    fn sup_distance_errors() {
        let (pi, m) = (independence(), upper_frechet());
        assert!(matches!(sup_distance(&pi, &m, 0.0), Err(Error::InvalidTolerance(_))));
        assert!(matches!(sup_distance(&pi, &m, -1.0), Err(Error::InvalidTolerance(_))));
        let tiny = SupNormSearch::new(1e-9).with_budget(10_000);
        assert!(matches!(tiny.run(&pi, &m), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn asymmetry_examples() {
        let tol = 1e-4;
        assert_eq!(asymmetry_mu(&independence(), tol).unwrap().upper, 0.0);
        assert_eq!(asymmetry_mu(&upper_frechet(), tol).unwrap().upper, 0.0);
        let exact = 1.0 / 27.0;
        let mu = asymmetry_mu(&perturbed_p(1.0).unwrap(), tol).unwrap();
        assert!(mu.lower <= exact && exact <= mu.upper, "{mu:?}");
        let nu = radial_asymmetry_nu(&perturbed_q(1.0).unwrap(), tol).unwrap();
        assert!(nu.lower <= exact && exact <= nu.upper, "{nu:?}");
        // pq is symmetric, pp is radially antisymmetric too
        assert_eq!(asymmetry_mu(&perturbed_q(1.0).unwrap(), tol).unwrap().upper, 0.0);
        let nu = radial_asymmetry_nu(&perturbed_p(1.0).unwrap(), tol).unwrap();
        assert!(nu.lower <= exact && exact <= nu.upper, "{nu:?}");
    }

    #[test]
    fn reports_for_reference_copulas() {
        let r = full_report(&independence(), 64, 1e-4).unwrap();
        for x in [r.tau, r.rho, r.gamma, r.beta, r.mu, r.nu] {
            assert!(x.abs() < 1e-12, "{r:?}");
        }
        assert!(r.lambda_upper.unwrap().abs() < 1e-6);
        assert!(r.lambda_lower.unwrap().abs() < 1e-6);

        let r = full_report(&upper_frechet(), 64, 1e-4).unwrap();
        for (name, x) in [("tau", r.tau), ("rho", r.rho), ("gamma", r.gamma)] {
            assert!((x - 1.0).abs() <= r.error_estimates[name] + 1e-12, "{name}: {r:?}");
        }
        assert_eq!(r.beta, 1.0);
        assert_eq!((r.mu, r.nu), (0.0, 0.0));
        assert_eq!((r.lambda_upper, r.lambda_lower), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn report_for_marshall_olkin() {
        let r = full_report(&marshall_olkin(0.5, 0.25).unwrap(), 1024, 1e-4).unwrap();
        assert!((r.tau - 0.2).abs() < 2e-3);
        assert!(r.mu > 1e-3);
        assert!(r.nu > 1e-3);
        assert_eq!(r.resolution, 1024);
    }

    #[test]
    fn survival_preserves_spearman() {
        for c in [marshall_olkin(0.5, 0.25).unwrap(), perturbed_p(1.0).unwrap(), mix(&[0.4, 0.6], &[upper_frechet(), perturbed_q(-1.0).unwrap()]).unwrap()] {
            let a = concordance(&survival(&c), &independence(), 256).unwrap();
            let b = concordance(&c, &independence(), 256).unwrap();
            assert!((a.value - b.value).abs() <= a.err + b.err + 1e-12);
            let a = concordance(&transpose(&c), &upper_frechet(), 256).unwrap();
            let b = concordance(&c, &upper_frechet(), 256).unwrap();
            assert!((a.value - b.value).abs() <= a.err + b.err + 1e-12);
            let r = radial_symmetrize(&c);
            assert!((blomqvist_beta(&r) - blomqvist_beta(&c)).abs() < 1e-15);
        }
    }

    #[test]
    fn reduction_is_deterministic() {
        let c = symmetrize(&marshall_olkin(0.3, 0.6).unwrap());
        let a = kendall_tau(&c, 256).unwrap();
        let b = kendall_tau(&c, 256).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| kendall_tau(&c, 256).unwrap());
        assert_eq!(a.value.to_bits(), single.value.to_bits());
    }

    #[test]
    fn pairwise_sum_matches_naive_for_small_inputs() {
        let xs: Vec<f64> = (0..100).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 4950.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
