//! Seeded property checks: copula axioms, symmetry and radial symmetry,
//! and the suites exercising the symmetrization identities.
//!
//! Every random draw comes from a ChaCha8 stream seeded by the caller (42 by
//! default), so a report can be reproduced from its seed and expression.
//! Uniqueness statements are checked by falsification search over a fixed
//! corpus; a passing search means "no counterexample found", not a proof.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::*;
use crate::copula::{volume_uv, CopulaExpr, Point, Rectangle};
use crate::error::{Error, Result};
use crate::measures::sup_distance;
use crate::transforms::*;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_VOLUME_TOL: f64 = 1e-12;
pub const DEFAULT_RECTANGLES: usize = 10_000;
/// Tolerance for pointwise identities between expressions.
pub const IDENTITY_TOL: f64 = 1e-12;

const EDGE_STEPS: usize = 256;
const EDGE_RANDOM_POINTS: usize = 1_000;
const SWEEP_CELLS: usize = 64;
const MIN_LOG10_SIDE: f64 = -4.0;
const SYMMETRY_LATTICE: usize = 256;
const SYMMETRY_RANDOM_POINTS: usize = 10_000;
const IDENTITY_POINTS: usize = 10_000;
/// Witnesses kept per violation list.
pub const MAX_WITNESSES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointWitness {
    pub point: Point,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginWitness {
    pub point: Point,
    pub value: f64,
    pub expected: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeWitness {
    pub rectangle: Rectangle,
    pub volume: f64,
}

/// Outcome of [`check_axioms`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub passed: bool,
    pub border_violations: Vec<PointWitness>,
    pub margin_violations: Vec<MarginWitness>,
    pub negative_volumes: Vec<VolumeWitness>,
    pub range_violations: Vec<PointWitness>,
    pub seed: u64,
    pub rectangles_tested: usize,
    pub tol: f64,
}

struct AxiomCollector<'a> {
    c: &'a CopulaExpr,
    tol: f64,
    border: Vec<PointWitness>,
    margin: Vec<MarginWitness>,
    volume: Vec<VolumeWitness>,
    range: Vec<PointWitness>,
}

fn keep<T>(list: &mut Vec<T>, w: T) {
    if list.len() < MAX_WITNESSES {
        list.push(w);
    }
}

impl AxiomCollector<'_> {
    fn range_at(&mut self, u: f64, v: f64) -> f64 {
        let value = self.c.eval_uv(u, v);
        if !(value >= -self.tol && value <= 1.0 + self.tol) {
            let point = Point::new(u, v).expect("lattice point");
            keep(&mut self.range, PointWitness { point, value });
        }
        value
    }

    fn edges_at(&mut self, t: f64) {
        for (u, v) in [(0.0, t), (t, 0.0)] {
            let value = self.range_at(u, v);
            if !(value.abs() <= self.tol) {
                let point = Point::new(u, v).expect("edge point");
                keep(&mut self.border, PointWitness { point, value });
            }
        }
        for (u, v) in [(1.0, t), (t, 1.0)] {
            let value = self.range_at(u, v);
            if !((value - t).abs() <= self.tol) {
                let point = Point::new(u, v).expect("edge point");
                keep(&mut self.margin, MarginWitness { point, value, expected: t });
            }
        }
    }

    fn rectangle(&mut self, r: Rectangle) {
        let volume = self.c.c_volume(&r);
        if !(volume >= -self.tol) {
            keep(&mut self.volume, VolumeWitness { rectangle: r, volume });
        }
    }
}

/// Log-uniform side length in `[1e-4, 1]`, uniform position.
fn random_rectangle(rng: &mut ChaCha8Rng) -> Rectangle {
    let mut side = || 10f64.powf(MIN_LOG10_SIDE * rng.gen::<f64>());
    let (su, sv) = (side(), side());
    let u1 = rng.gen::<f64>() * (1.0 - su);
    let v1 = rng.gen::<f64>() * (1.0 - sv);
    Rectangle::new(u1, (u1 + su).min(1.0), v1, (v1 + sv).min(1.0)).expect("positive sides")
}

/// Check the border, margin, range and 2-increasing conditions.
///
/// Borders and margins are tested on a 257-point edge lattice and on 1000
/// random edge points; 2-increasingness on `rectangles` random rectangles
/// with log-uniform sides and on every cell of a 64 x 64 sweep. Values
/// outside `[-tol, 1 + tol]` are flagged wherever the expression is
/// evaluated on the sweep lattice or the edges.
pub fn check_axioms(c: &CopulaExpr, rectangles: usize, seed: u64, tol: f64) -> Result<AxiomReport> {
    if rectangles == 0 {
        return Err(Error::InvalidParameter {
            constructor: "check_axioms",
            reason: "need at least one random rectangle".into(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut col = AxiomCollector {
        c,
        tol,
        border: Vec::new(),
        margin: Vec::new(),
        volume: Vec::new(),
        range: Vec::new(),
    };

    for k in 0..=EDGE_STEPS {
        col.edges_at(k as f64 / EDGE_STEPS as f64);
    }
    for _ in 0..EDGE_RANDOM_POINTS {
        col.edges_at(rng.gen());
    }

    let n = SWEEP_CELLS;
    let at = |i: usize| i as f64 / n as f64;
    for i in 1..n {
        for j in 1..n {
            col.range_at(at(i), at(j));
        }
    }
    for i in 0..n {
        for j in 0..n {
            let r = Rectangle::new(at(i), at(i + 1), at(j), at(j + 1)).expect("sweep cell");
            col.rectangle(r);
        }
    }
    for _ in 0..rectangles {
        let r = random_rectangle(&mut rng);
        col.rectangle(r);
    }

    let passed =
        col.border.is_empty() && col.margin.is_empty() && col.volume.is_empty() && col.range.is_empty();
    Ok(AxiomReport {
        passed,
        border_violations: col.border,
        margin_violations: col.margin,
        negative_volumes: col.volume,
        range_violations: col.range,
        seed,
        rectangles_tested: rectangles,
        tol,
    })
}

impl AxiomReport {
    /// Re-evaluate every witness against `c`; true when each reproduces its
    /// recorded value bit for bit and is still a violation.
    pub fn replay(&self, c: &CopulaExpr) -> bool {
        let tol = self.tol;
        let same = |a: f64, b: f64| a.to_bits() == b.to_bits();
        self.border_violations.iter().all(|w| {
            let x = c.eval(w.point);
            same(x, w.value) && !(x.abs() <= tol)
        }) && self.margin_violations.iter().all(|w| {
            let x = c.eval(w.point);
            same(x, w.value) && !((x - w.expected).abs() <= tol)
        }) && self.negative_volumes.iter().all(|w| {
            let x = c.c_volume(&w.rectangle);
            same(x, w.volume) && !(x >= -tol)
        }) && self.range_violations.iter().all(|w| {
            let x = c.eval(w.point);
            same(x, w.value) && !(x >= -tol && x <= 1.0 + tol)
        })
    }

    /// Key/value text form with one line per witness.
    pub fn to_kv_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "passed = {}", self.passed);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "rectangles_tested = {}", self.rectangles_tested);
        let _ = writeln!(s, "tol = {:e}", self.tol);
        let _ = writeln!(s, "border_violations = {}", self.border_violations.len());
        for (k, w) in self.border_violations.iter().enumerate() {
            let _ = writeln!(s, "border_violations[{k}] = {} value={}", w.point, w.value);
        }
        let _ = writeln!(s, "margin_violations = {}", self.margin_violations.len());
        for (k, w) in self.margin_violations.iter().enumerate() {
            let _ = writeln!(
                s,
                "margin_violations[{k}] = {} value={} expected={}",
                w.point, w.value, w.expected
            );
        }
        let _ = writeln!(s, "negative_volumes = {}", self.negative_volumes.len());
        for (k, w) in self.negative_volumes.iter().enumerate() {
            let _ = writeln!(s, "negative_volumes[{k}] = {} volume={}", w.rectangle, w.volume);
        }
        let _ = writeln!(s, "range_violations = {}", self.range_violations.len());
        for (k, w) in self.range_violations.iter().enumerate() {
            let _ = writeln!(s, "range_violations[{k}] = {} value={}", w.point, w.value);
        }
        s
    }
}

/// Result of a symmetry scan: the largest deviation seen and, when it
/// exceeds the tolerance, where.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub holds: bool,
    pub witness: Option<Point>,
    pub max_deviation: f64,
}

fn symmetry_scan(c: &CopulaExpr, other: &CopulaExpr, tol: f64) -> Result<SymmetryCheck> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let mut worst = (0.0f64, 0.0, 0.0);
    let mut visit = |u: f64, v: f64| {
        let d = (c.eval_uv(u, v) - other.eval_uv(u, v)).abs();
        if d > worst.0 || d.is_nan() && !worst.0.is_nan() {
            worst = (d, u, v);
        }
    };
    let n = SYMMETRY_LATTICE;
    for i in 0..=n {
        for j in 0..=n {
            visit(i as f64 / n as f64, j as f64 / n as f64);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    for _ in 0..SYMMETRY_RANDOM_POINTS {
        visit(rng.gen(), rng.gen());
    }
    let (max_deviation, u, v) = worst;
    let holds = max_deviation <= tol;
    Ok(SymmetryCheck {
        holds,
        witness: if holds { None } else { Some(Point::new(u, v).expect("scanned point")) },
        max_deviation,
    })
}

/// `C(u,v) = C(v,u)` on the 257 x 257 lattice and 10^4 random points.
pub fn check_symmetry(c: &CopulaExpr, tol: f64) -> Result<SymmetryCheck> {
    symmetry_scan(c, &transpose(c), tol)
}

/// `C = C^` on the 257 x 257 lattice and 10^4 random points.
pub fn check_radial_symmetry(c: &CopulaExpr, tol: f64) -> Result<SymmetryCheck> {
    symmetry_scan(c, &survival(c), tol)
}

/// One named check inside a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        Self { name: name.to_string(), checks: Vec::new() }
    }

    fn record(&mut self, label: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(CheckOutcome { label: label.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_kv_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "suite = {}", self.name);
        let _ = writeln!(s, "passed = {}", self.passed());
        let _ = writeln!(s, "checks = {}", self.checks.len());
        for (k, c) in self.checks.iter().enumerate() {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            let _ = writeln!(s, "checks[{k}] = {verdict} {} ({})", c.label, c.detail);
        }
        s
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_kv_text())
    }
}

fn symmetric_pool() -> Vec<CopulaExpr> {
    vec![
        independence(),
        upper_frechet(),
        lower_frechet(),
        symmetrize(&marshall_olkin(0.5, 0.25).expect("valid")),
        symmetrize(&perturbed_p(1.0).expect("valid")),
        marshall_olkin(0.3, 0.3).expect("valid"),
        perturbed_q(0.5).expect("valid"),
    ]
}

fn radial_pool() -> Vec<CopulaExpr> {
    vec![
        independence(),
        upper_frechet(),
        lower_frechet(),
        radial_symmetrize(&marshall_olkin(0.5, 0.25).expect("valid")),
        radial_symmetrize(&perturbed_q(1.0).expect("valid")),
        radial_symmetrize(&symmetrize(&marshall_olkin(0.2, 0.7).expect("valid"))),
    ]
}

/// Convex combinations of symmetric copulas stay symmetric, and likewise
/// for radial symmetry.
pub fn convexity_suite(seed: u64) -> SuiteReport {
    const TRIALS: usize = 12;
    let mut report = SuiteReport::new("convexity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mo = marshall_olkin(0.5, 0.25).expect("valid");

    let mut run = |label: String, expr: CopulaExpr, radial: bool| {
        let check = if radial {
            check_radial_symmetry(&expr, IDENTITY_TOL)
        } else {
            check_symmetry(&expr, IDENTITY_TOL)
        }
        .expect("positive tolerance");
        report.record(label, check.holds, format!("max deviation {:e}", check.max_deviation));
    };

    let fixed = [
        (0.3, upper_frechet(), independence(), false),
        (0.5, independence(), lower_frechet(), true),
        (0.7, symmetrize(&mo), upper_frechet(), false),
    ];
    for (lambda, a, b, radial) in fixed {
        let kind = if radial { "radially symmetric" } else { "symmetric" };
        let expr = mix(&[lambda, 1.0 - lambda], &[a.clone(), b.clone()]).expect("valid weights");
        run(format!("mix {lambda} of ({a}, {b}) is {kind}"), expr, radial);
    }

    for (pool, radial) in [(symmetric_pool(), false), (radial_pool(), true)] {
        let kind = if radial { "radially symmetric" } else { "symmetric" };
        for _ in 0..TRIALS {
            let lambda: f64 = rng.gen();
            let a = &pool[rng.gen_range(0..pool.len())];
            let b = &pool[rng.gen_range(0..pool.len())];
            let expr = mix(&[lambda, 1.0 - lambda], &[a.clone(), b.clone()]).expect("valid weights");
            run(format!("mix {lambda:.6} of ({a}, {b}) is {kind}"), expr, radial);
        }
    }
    report
}

/// Non-uniqueness of the symmetrization preimage of `Pi`, and a falsification
/// search for uniqueness of the preimages of `M` and `W`.
pub fn inverse_problem_suite(tol: f64) -> Result<SuiteReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let mut report = SuiteReport::new("inverse problem");
    let pi = independence();
    let n = SEMANTIC_RESOLUTION;

    for theta in [1.0, -1.0, 0.5, -0.5] {
        let pp = perturbed_p(theta)?;
        let pq = perturbed_q(theta)?;
        let d = lattice_distance(&symmetrize(&pp), &pi, n);
        report.record(format!("sym(pp:{theta}) = pi"), d <= IDENTITY_TOL, format!("lattice distance {d:e}"));
        let d = lattice_distance(&radial_symmetrize(&pq), &pi, n);
        report.record(format!("rad(pq:{theta}) = pi"), d <= IDENTITY_TOL, format!("lattice distance {d:e}"));

        let floor = theta.abs() / 27.0 - tol;
        for (name, c) in [("pp", &pp), ("pq", &pq)] {
            let b = sup_distance(c, &pi, tol)?;
            report.record(
                format!("{name}:{theta} differs from pi"),
                b.lower >= floor,
                format!("sup distance in [{}, {}], need >= {floor}", b.lower, b.upper),
            );
        }
    }

    let mo = marshall_olkin(0.5, 0.25)?;
    let corpus = vec![
        independence(),
        lower_frechet(),
        upper_frechet(),
        mo.clone(),
        transpose(&mo),
        survival(&mo),
        marshall_olkin(0.9, 0.8)?,
        perturbed_p(1.0)?,
        perturbed_q(-1.0)?,
        mix(&[0.9, 0.1], &[upper_frechet(), independence()])?,
        mix(&[0.9, 0.1], &[lower_frechet(), independence()])?,
        mix(&[0.5, 0.5], &[upper_frechet(), lower_frechet()])?,
        radial_symmetrize(&mo),
    ];
    for (target_name, target) in [("m", upper_frechet()), ("w", lower_frechet())] {
        for c in &corpus {
            if semantically_equal(c, &target) {
                continue;
            }
            let b = sup_distance(&symmetrize(c), &target, tol)?;
            report.record(
                format!("sym({c}) != {target_name}: no counterexample found"),
                b.lower > tol,
                format!("sup distance lower bound {}", b.lower),
            );
            let b = sup_distance(&radial_symmetrize(c), &target, tol)?;
            report.record(
                format!("rad({c}) != {target_name}: no counterexample found"),
                b.lower > tol,
                format!("sup distance lower bound {}", b.lower),
            );
        }
    }
    Ok(report)
}

/// Which projection [`projection_optimality_suite`] tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Projection {
    Symmetric,
    Radial,
}

/// `||C - proj(C)|| <= ||C - S|| + 2 tol` for every candidate `S` in the
/// target class, using certified bounds on both sides.
pub fn projection_optimality_suite(
    c: &CopulaExpr,
    candidates: &[CopulaExpr],
    tol: f64,
    kind: Projection,
) -> Result<SuiteReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    for (index, s) in candidates.iter().enumerate() {
        let (check, expected) = match kind {
            Projection::Symmetric => (check_symmetry(s, SEMANTIC_TOL)?, "symmetric"),
            Projection::Radial => (check_radial_symmetry(s, SEMANTIC_TOL)?, "radially symmetric"),
        };
        if !check.holds {
            return Err(Error::InvalidCandidate { index, expected });
        }
    }
    let projected = match kind {
        Projection::Symmetric => symmetrize(c),
        Projection::Radial => radial_symmetrize(c),
    };
    let own = sup_distance(c, &projected, tol)?;
    let mut report = SuiteReport::new(match kind {
        Projection::Symmetric => "projection optimality (symmetric)",
        Projection::Radial => "projection optimality (radial)",
    });
    for s in candidates {
        let other = sup_distance(c, s, tol)?;
        report.record(
            format!("||{c} - proj|| <= ||{c} - {s}||"),
            own.upper <= other.lower + 2.0 * tol,
            format!("{} <= {} + {}", own.upper, other.lower, 2.0 * tol),
        );
    }
    Ok(report)
}

/// Uniform point in the unit square.
fn random_point(rng: &mut ChaCha8Rng) -> Point {
    Point::new(rng.gen(), rng.gen()).expect("unit square")
}

fn sorted4(rng: &mut ChaCha8Rng) -> [f64; 4] {
    let mut xs: [f64; 4] = [rng.gen(), rng.gen(), rng.gen(), rng.gen()];
    xs.sort_by(f64::total_cmp);
    xs
}

/// Random rectangle with distinct sorted coordinates, mapped by `place`.
fn region_rectangle(rng: &mut ChaCha8Rng, place: fn([f64; 4]) -> (f64, f64, f64, f64)) -> Rectangle {
    loop {
        let xs = sorted4(rng);
        let (u1, u2, v1, v2) = place(xs);
        if let Ok(r) = Rectangle::new(u1, u2, v1, v2) {
            return r;
        }
    }
}

/// Rectangle inside the closed region below the diagonal (`v2 <= u1`).
pub fn rectangle_below_diagonal(rng: &mut ChaCha8Rng) -> Rectangle {
    region_rectangle(rng, |[a, b, c, d]| (c, d, a, b))
}

/// Rectangle inside `u + v <= 1`.
pub fn rectangle_below_antidiagonal(rng: &mut ChaCha8Rng) -> Rectangle {
    region_rectangle(rng, |[a, b, c, d]| (a, b, 1.0 - d, 1.0 - c))
}

/// Rectangle inside `u + v >= 1`.
pub fn rectangle_above_antidiagonal(rng: &mut ChaCha8Rng) -> Rectangle {
    region_rectangle(rng, |[a, b, c, d]| (c, d, 1.0 - b, 1.0 - a))
}

fn identity_corpus() -> Vec<CopulaExpr> {
    let mo = marshall_olkin(0.5, 0.25).expect("valid");
    vec![
        independence(),
        upper_frechet(),
        lower_frechet(),
        mo.clone(),
        marshall_olkin(0.2, 0.9).expect("valid"),
        perturbed_p(1.0).expect("valid"),
        perturbed_p(-0.5).expect("valid"),
        perturbed_q(1.0).expect("valid"),
        perturbed_q(-0.5).expect("valid"),
        mix(&[0.3, 0.7], &[mo.clone(), perturbed_q(0.5).expect("valid")]).expect("valid"),
        survival(&transpose(&mo)),
    ]
}

/// Pointwise identities between transforms at 10^4 random points each, and
/// the region-wise volume factorizations of the two perturbed copulas on
/// 10^4 random rectangles each; all within 1e-12.
pub fn identity_suite(seed: u64) -> SuiteReport {
    type Identity = (&'static str, fn(&CopulaExpr) -> (CopulaExpr, CopulaExpr));
    let identities: [Identity; 9] = [
        ("(C^T)_S = C_S", |c| (symmetrize(&transpose(c)), symmetrize(c))),
        ("(C^)_R = C_R", |c| (radial_symmetrize(&survival(c)), radial_symmetrize(c))),
        ("(C_R)^T = (C^T)_R", |c| (transpose(&radial_symmetrize(c)), radial_symmetrize(&transpose(c)))),
        ("(C_S)^ = (C^)_S", |c| (survival(&symmetrize(c)), symmetrize(&survival(c)))),
        ("(C^T)^T = C", |c| (transpose(&transpose(c)), c.clone())),
        ("(C^)^ = C", |c| (survival(&survival(c)), c.clone())),
        ("(C_S)_S = C_S", |c| (symmetrize(&symmetrize(c)), symmetrize(c))),
        ("(C_R)_R = C_R", |c| (radial_symmetrize(&radial_symmetrize(c)), radial_symmetrize(c))),
        ("(C_S)^T = C_S", |c| (transpose(&symmetrize(c)), symmetrize(c))),
    ];

    let mut report = SuiteReport::new("identities");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corpus = identity_corpus();
    for (label, build) in identities {
        let mut worst = 0.0f64;
        for k in 0..IDENTITY_POINTS {
            let c = &corpus[k % corpus.len()];
            let (lhs, rhs) = build(c);
            let p = random_point(&mut rng);
            worst = worst.max((lhs.eval(p) - rhs.eval(p)).abs());
        }
        report.record(label, worst <= IDENTITY_TOL, format!("max deviation {worst:e} over {IDENTITY_POINTS} points"));
    }

    type Factorization = (&'static str, CopulaExpr, fn(&mut ChaCha8Rng) -> Rectangle, fn(&Rectangle) -> f64);
    let factorizations: [Factorization; 3] = [
        ("V_(pi+P)(R) = V_pi(R)(2-u1-u2+v1+v2) for R below the diagonal", perturbed_p(1.0).expect("valid"), rectangle_below_diagonal, |r| {
            2.0 - r.u1() - r.u2() + r.v1() + r.v2()
        }),
        ("V_(pi+Q)(R) = V_pi(R)(u1+u2+v1+v2) for R below the anti-diagonal", perturbed_q(1.0).expect("valid"), rectangle_below_antidiagonal, |r| {
            r.u1() + r.u2() + r.v1() + r.v2()
        }),
        ("V_(pi+Q)(R) = V_pi(R)(u1+u2+v1+v2-2) for R above the anti-diagonal", perturbed_q(1.0).expect("valid"), rectangle_above_antidiagonal, |r| {
            r.u1() + r.u2() + r.v1() + r.v2() - 2.0
        }),
    ];
    for (label, c, draw, factor) in factorizations {
        let mut worst = 0.0f64;
        for _ in 0..IDENTITY_POINTS {
            let r = draw(&mut rng);
            let direct = volume_uv(&c, r.u1(), r.u2(), r.v1(), r.v2());
            worst = worst.max((direct - r.area() * factor(&r)).abs());
        }
        report.record(label, worst <= IDENTITY_TOL, format!("max deviation {worst:e} over {IDENTITY_POINTS} rectangles"));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbed_copulas_pass() {
        for c in [perturbed_p(1.0).unwrap(), perturbed_q(1.0).unwrap()] {
            let r = check_axioms(&c, 10_000, 42, 1e-12).unwrap();
            assert!(r.passed, "{}", r.to_kv_text());
            assert_eq!(r.rectangles_tested, 10_000);
        }
    }

    #[test]
    fn forced_theta_two_fails_with_replayable_witness() {
        let c = force_perturbed_p(2.0);
        let r = check_axioms(&c, 10_000, 42, 1e-12).unwrap();
        assert!(!r.passed);
        assert!(!r.negative_volumes.is_empty());
        assert!(r.replay(&c));
        assert_eq!(check_axioms(&c, 10_000, 42, 1e-12).unwrap(), r);

        let rect = Rectangle::new(0.8, 0.9, 0.0, 0.1).unwrap();
        assert!((c.c_volume(&rect) + 0.002).abs() < 1e-12);
    }

    #[test]
    fn replay_rejects_foreign_witnesses() {
        let bad = force_perturbed_p(2.0);
        let r = check_axioms(&bad, 100, 1, 1e-12).unwrap();
        assert!(!r.replay(&independence()));
    }

    #[test]
    fn axiom_argument_errors() {
        assert!(check_axioms(&independence(), 0, 42, 1e-12).is_err());
        assert!(check_axioms(&independence(), 10, 42, 0.0).is_err());
    }

    #[test]
    fn detects_broken_margins() {
        // a valid copula scaled down: uniform margins fail, range holds
        let half = CopulaExpr::from_node(crate::copula::Node::Mix(vec![(0.5, independence())]));
        let r = check_axioms(&half, 10, 42, 1e-12).unwrap();
        assert!(!r.passed);
        assert!(!r.margin_violations.is_empty());
        assert!(r.border_violations.is_empty());
        assert!(r.replay(&half));
        assert!(r.margin_violations.len() <= MAX_WITNESSES);
    }

    #[test]
    fn symmetry_examples() {
        let mo = marshall_olkin(0.5, 0.25).unwrap();
        let s = check_symmetry(&mo, 1e-12).unwrap();
        assert!(!s.holds);
        let w = s.witness.unwrap();
        assert!((mo.eval(w) - mo.eval(w.swapped())).abs() >= 0.0093);
        let d = (mo.eval_uv(0.1, 0.6) - mo.eval_uv(0.6, 0.1)).abs();
        assert!((d - 0.0093).abs() < 1e-4);

        assert!(check_symmetry(&symmetrize(&mo), 1e-12).unwrap().holds);
        let pp = perturbed_p(1.0).unwrap();
        assert!(!check_radial_symmetry(&pp, 1e-12).unwrap().holds);
        assert!(check_radial_symmetry(&radial_symmetrize(&pp), 1e-12).unwrap().holds);
        assert!(check_symmetry(&independence(), 1e-12).unwrap().witness.is_none());
    }

    #[test]
    fn convexity_holds() {
        let r = convexity_suite(42);
        assert!(r.passed(), "{r}");
        assert_eq!(r.checks.len(), 3 + 24);
    }

    #[test]
    fn projection_rejects_asymmetric_candidates() {
        let mo = marshall_olkin(0.5, 0.25).unwrap();
        let err = projection_optimality_suite(&mo, &[independence(), mo.clone()], 1e-3, Projection::Symmetric)
            .unwrap_err();
        assert_eq!(err, Error::InvalidCandidate { index: 1, expected: "symmetric" });
        let err = projection_optimality_suite(&mo, &[perturbed_q(1.0).unwrap()], 1e-3, Projection::Radial)
            .unwrap_err();
        assert_eq!(err, Error::InvalidCandidate { index: 0, expected: "radially symmetric" });
    }

    #[test]
    fn region_rectangles_stay_in_region() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let r = rectangle_below_diagonal(&mut rng);
            assert!(r.v2() <= r.u1());
            let r = rectangle_below_antidiagonal(&mut rng);
            assert!(r.u2() + r.v2() <= 1.0 + 1e-15);
            let r = rectangle_above_antidiagonal(&mut rng);
            assert!(r.u1() + r.v1() >= 1.0 - 1e-15);
        }
    }

    #[test]
    fn kv_text_lists_witnesses() {
        let r = check_axioms(&force_perturbed_p(2.0), 10, 42, 1e-12).unwrap();
        let text = r.to_kv_text();
        assert!(text.starts_with("passed = false\nseed = 42\n"));
        assert!(text.contains("negative_volumes[0] = ["));
    }
}
