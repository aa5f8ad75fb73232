//! Perturbation harness on the torus: invariant circles by graph transform,
//! the finite-orbit / circle / Cantor trichotomy, persistent global fixed
//! points and persistence of the trivial rotation set.
//!
//! Coordinates are `[u, θ]` with `u` the chart coordinate (`u = 0` is `∞`,
//! `u = 1/2` is `0`) and `θ` the fibre angle; circles are graphs `θ ↦ u`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bsgroup::{closure_residual, finite_bs_orbit, BSAction, OrbitResult, DEFAULT_MAX_ORBIT, DEFAULT_MERGE_TOL};
use crate::circle::{rotation_number, CircleLift, RotationNumberEstimate, DEFAULT_CERT_TOL, DEFAULT_Q_MAX};
use crate::error::{Error, Result};
use crate::estimators::{fixed_cells, orbit_closure_estimate, CellSet, GapSample, MinimalLabel};
use crate::gl2z::IntMatrix2;
use crate::space::{Lift, Space};
use crate::torus::{bs_rotation_constraint, rotation_set, ConstraintReport, Point, RhoInput, RotationSetEstimate, RotationSetParams, TorusLift};

pub const GRAPH_SAMPLES: usize = 512;
/// Stencil width of the periodic Lagrange interpolation.
const STENCIL: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Attracting,
    Repelling,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantCircleEstimate {
    /// `u(θ_j)` at `θ_j = j / len`.
    pub graph: Vec<f64>,
    pub residual: f64,
    pub side: Side,
    pub iterations: usize,
}

impl InvariantCircleEstimate {
    pub fn eval(&self, theta: f64) -> f64 {
        uniform_lagrange(&self.graph, theta)
    }

    pub fn point(&self, theta: f64) -> Point {
        [self.eval(theta), theta]
    }

    /// Graph samples as CSV rows `(θ, u)`.
    pub fn rows(&self) -> Vec<[f64; 2]> {
        let n = self.graph.len() as f64;
        self.graph.iter().enumerate().map(|(j, u)| [j as f64 / n, *u]).collect()
    }

    /// Sup-distance to the horizontal circle `u ≡ level` (mod 1).
    pub fn distance_to(&self, level: f64) -> f64 {
        self.graph.iter().map(|u| wrap(u - level).abs()).fold(0.0, f64::max)
    }

    /// Cells met by the circle at the given resolution.
    pub fn cells(&self, resolution: usize) -> CellSet {
        let m = 4 * resolution;
        let pts: Vec<Point> = (0..m).map(|k| self.point(k as f64 / m as f64)).collect();
        CellSet::from_points(Space::Torus, resolution, &pts)
    }
}

fn wrap(d: f64) -> f64 {
    d - d.round()
}

/// Lagrange weights for nodes `xs` at `x`.
fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..xs.len() {
        let mut w = 1.0;
        for j in 0..xs.len() {
            if i != j {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        s += w * ys[i];
    }
    s
}

/// Periodic interpolation of samples on the uniform grid `j / len`.
fn uniform_lagrange(u: &[f64], theta: f64) -> f64 {
    let n = u.len();
    let t = theta.rem_euclid(1.0) * n as f64;
    let i = (t.floor() as usize).min(n - 1);
    let lo = i as i64 - (STENCIL as i64 / 2 - 1);
    let mut xs = [0.0; STENCIL];
    let mut ys = [0.0; STENCIL];
    for k in 0..STENCIL {
        let idx = lo + k as i64;
        xs[k] = idx as f64;
        ys[k] = u[idx.rem_euclid(n as i64) as usize];
    }
    lagrange(&xs, &ys, t)
}

/// Periodic interpolation on sorted nodes `xs ⊂ [xs[0], xs[0] + 1)`.
fn scattered_lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let x = xs[0] + (x - xs[0]).rem_euclid(1.0);
    let i = xs.partition_point(|&v| v <= x).saturating_sub(1);
    let lo = i as i64 - (STENCIL as i64 / 2 - 1);
    let mut nx = [0.0; STENCIL];
    let mut ny = [0.0; STENCIL];
    for k in 0..STENCIL {
        let idx = lo + k as i64;
        let (q, r) = (idx.div_euclid(n as i64), idx.rem_euclid(n as i64) as usize);
        nx[k] = xs[r] + q as f64;
        ny[k] = ys[r];
    }
    lagrange(&nx, &ny, x)
}

/// Images of the graph points, with `u` kept next to the old graph and `θ`
/// checked to stay strictly increasing of degree one.
fn push_graph(map: &TorusLift, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = u.len();
    let img: Vec<Point> = (0..n).map(|j| map.eval([u[j], j as f64 / n as f64])).collect();
    let mut us = Vec::with_capacity(n);
    let mut ts = Vec::with_capacity(n);
    let base = img[0][1].floor();
    for (j, p) in img.iter().enumerate() {
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(Error::GraphFold(j));
        }
        let t = p[1] - base;
        if j > 0 && t <= ts[j - 1] {
            return Err(Error::GraphFold(j));
        }
        ts.push(t);
        us.push(p[0] - (p[0] - u[j]).round());
    }
    if ts[n - 1] >= ts[0] + 1.0 {
        return Err(Error::GraphFold(n - 1));
    }
    Ok((us, ts))
}

/// Graph transform: push the sampled graph by `h` (Forward) or `h⁻¹`
/// (Backward) and re-interpolate over the fibre grid until the image lies on
/// the graph to within `tol`.
pub fn find_invariant_circle(h: &TorusLift, seed: &[f64], direction: Direction, max_iter: usize, tol: f64) -> Result<InvariantCircleEstimate> {
    if h.linear_part() != IntMatrix2::IDENTITY {
        return Err(Error::NonIdentityLinearPart(h.linear_part().to_string()));
    }
    if seed.len() < STENCIL {
        return Err(Error::InvalidParameter(format!("seed graph needs at least {STENCIL} samples")));
    }
    let map = match direction {
        Direction::Forward => h.clone(),
        Direction::Backward => h.inverse()?,
    };
    let side = match direction {
        Direction::Forward => Side::Attracting,
        Direction::Backward => Side::Repelling,
    };
    let n = seed.len();
    let mut graph = seed.to_vec();
    let mut residual = f64::INFINITY;
    for it in 0..=max_iter {
        let (us, ts) = push_graph(&map, &graph)?;
        residual = us
            .iter()
            .zip(&ts)
            .map(|(u, t)| wrap(u - uniform_lagrange(&graph, *t)).abs())
            .fold(0.0, f64::max);
        if residual < tol {
            return Ok(InvariantCircleEstimate {
                graph,
                residual,
                side,
                iterations: it,
            });
        }
        graph = (0..n).map(|k| scattered_lagrange(&ts, &us, k as f64 / n as f64)).collect();
    }
    Err(Error::NonConvergent {
        iterations: max_iter,
        residual,
    })
}

/// Constant seed graph `u ≡ level`.
pub fn flat_graph(level: f64) -> Vec<f64> {
    vec![level; GRAPH_SAMPLES]
}

/// `θ ↦ θ`-component of `h` on the circle.
pub fn restricted_lift(h: &TorusLift, circle: &InvariantCircleEstimate) -> CircleLift {
    let (h, c) = (h.clone(), circle.clone());
    CircleLift::new(format!("{}|C", h.label()), move |t| h.eval(c.point(t))[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    FiniteOrbits,
    MinimalCircle,
    MinimalCantor,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrichotomyParams {
    pub iterates: usize,
    pub q_max: u32,
    pub tol: f64,
    /// Resolutions for the cell-level checks, coarsest first.
    pub resolutions: Vec<usize>,
    pub circle_tol: f64,
}

impl Default for TrichotomyParams {
    fn default() -> Self {
        Self {
            iterates: 100_000,
            q_max: DEFAULT_Q_MAX,
            tol: DEFAULT_CERT_TOL,
            resolutions: vec![256, 512, 1024],
            circle_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Refinement {
    pub resolution: usize,
    pub orbit_cells: usize,
    pub circle_cells: usize,
    /// Orbit cells lie in the (dilated) circle cells and are fewer.
    pub strict_subset: bool,
    /// Largest gap at the last sample size exceeds ten cells.
    pub gap_above_cells: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrichotomyEvidence {
    pub circle_residual: f64,
    pub fixed_cells_meet_circle: bool,
    /// `None` when the repelling circle was not computed.
    pub fixed_cells_avoid_repelling: Option<bool>,
    pub orbit: Option<Vec<Point>>,
    pub orbit_closure_residual: Option<f64>,
    pub gaps: Vec<GapSample>,
    pub refinements: Vec<Refinement>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrichotomyReport {
    pub rotation_number: RotationNumberEstimate,
    pub outcome: Outcome,
    pub evidence: TrichotomyEvidence,
}

/// Decides between finite orbits, a minimal circle and a minimal Cantor set
/// for an action with an attracting `h`-invariant circle `C′₁`.
pub fn classify_perturbed(action: &BSAction, circle: &InvariantCircleEstimate, params: &TrichotomyParams) -> Result<TrichotomyReport> {
    let h = action
        .h
        .as_torus()
        .ok_or_else(|| Error::SpaceMismatch("the trichotomy is posed on the torus".into()))?;
    let res0 = *params.resolutions.first().unwrap_or(&256);
    let fix = fixed_cells(&action.f, res0, None);
    let meets = circle.cells(res0).iter().any(|c| fix.contains(c));
    let rho = rotation_number(&restricted_lift(h, circle), params.iterates, params.q_max, params.tol);
    let mut ev = TrichotomyEvidence {
        circle_residual: circle.residual,
        fixed_cells_meet_circle: meets,
        fixed_cells_avoid_repelling: None,
        orbit: None,
        orbit_closure_residual: None,
        gaps: Vec::new(),
        refinements: Vec::new(),
        note: None,
    };
    let done = |outcome, ev| TrichotomyReport {
        rotation_number: rho.clone(),
        outcome,
        evidence: ev,
    };
    if !(circle.residual < params.circle_tol) {
        ev.note = Some(format!("circle residual {} above {}", circle.residual, params.circle_tol));
        return Ok(done(Outcome::Unknown, ev));
    }
    if !meets {
        ev.note = Some("f has no fixed cells on the invariant circle".into());
        return Ok(done(Outcome::Unknown, ev));
    }

    if let Some(w) = &rho.rational_witness {
        let x = circle.point(w.point);
        return Ok(match finite_bs_orbit(action, x, DEFAULT_MERGE_TOL, DEFAULT_MAX_ORBIT) {
            OrbitResult::Finite { points, .. } => {
                ev.orbit_closure_residual = Some(closure_residual(action, &points));
                ev.orbit = Some(points);
                done(Outcome::FiniteOrbits, ev)
            }
            _ => {
                ev.note = Some(format!("h-periodic point of period {} has no finite BS-orbit", w.q));
                done(Outcome::Unknown, ev)
            }
        });
    }

    // seed on the circle where f moves points least
    let m = 4 * res0;
    let seed = (0..m)
        .map(|k| circle.point(k as f64 / m as f64))
        .min_by(|a, b| action.f.displacement(*a).total_cmp(&action.f.displacement(*b)))
        .unwrap();
    let finest = *params.resolutions.last().unwrap_or(&res0);
    let (label, pts, _, gaps) = orbit_closure_estimate(action, seed, finest);
    let last_gap = gaps.last().map_or(1.0, |g| g.largest_gap);
    ev.refinements = params
        .resolutions
        .par_iter()
        .map(|&r| {
            let orbit = CellSet::from_points(Space::Torus, r, &pts);
            let circ = circle.cells(r);
            Refinement {
                resolution: r,
                orbit_cells: orbit.len(),
                circle_cells: circ.len(),
                strict_subset: orbit.is_subset(&circ.dilate()) && orbit.len() < circ.len(),
                gap_above_cells: last_gap > 10.0 / r as f64,
            }
        })
        .collect();
    ev.gaps = gaps;
    let outcome = match label {
        MinimalLabel::MinimalCircle => Outcome::MinimalCircle,
        MinimalLabel::MinimalCantor if ev.refinements.iter().all(|r| r.strict_subset && r.gap_above_cells) => Outcome::MinimalCantor,
        MinimalLabel::MinimalCantor => {
            ev.note = Some("gap settled but the orbit fills the circle at some refinement".into());
            Outcome::Unknown
        }
        MinimalLabel::FiniteOrbit => {
            ev.orbit_closure_residual = Some(closure_residual(action, &pts));
            ev.orbit = Some(pts);
            ev.note = Some("periodic orbit found without a rational witness".into());
            Outcome::FiniteOrbits
        }
        MinimalLabel::Unknown => {
            ev.note = Some("gap statistics inconclusive".into());
            Outcome::Unknown
        }
    };
    Ok(done(outcome, ev))
}

/// Finds `C′₁` (attracting, from `u ≡ 0`) and `C′₂` (repelling, from
/// `u ≡ 1/2`) and classifies.
pub fn trichotomy(action: &BSAction, params: &TrichotomyParams) -> Result<TrichotomyReport> {
    let h = action
        .h
        .as_torus()
        .ok_or_else(|| Error::SpaceMismatch("the trichotomy is posed on the torus".into()))?;
    let c1 = find_invariant_circle(h, &flat_graph(0.0), Direction::Forward, 200, params.circle_tol / 10.0)?;
    let mut report = classify_perturbed(action, &c1, params)?;
    if let Ok(c2) = find_invariant_circle(h, &flat_graph(0.5), Direction::Backward, 200, params.circle_tol / 10.0) {
        let res0 = *params.resolutions.first().unwrap_or(&256);
        let fix = fixed_cells(&action.f, res0, None);
        report.evidence.fixed_cells_avoid_repelling = Some(!c2.cells(res0).iter().any(|c| fix.contains(c)));
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPointReport {
    pub point: Point,
    pub f_residual: f64,
    pub h_residual: f64,
    pub newton_iterations: usize,
    pub candidates_tried: usize,
}

const MAX_CANDIDATES: usize = 64;
const F_FIXED_TOL: f64 = 1e-8;

fn solve_linear(j: [[f64; 2]; 2], r: Point, dim: usize) -> Option<Point> {
    if dim == 1 {
        return (j[0][0] != 0.0).then(|| [r[0] / j[0][0], 0.0]);
    }
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([(j[1][1] * r[0] - j[0][1] * r[1]) / det, (j[0][0] * r[1] - j[1][0] * r[0]) / det])
}

/// Newton's method for `h(x) = x` on the torus (or circle).
pub fn newton_fixed(h: &Lift, x0: Point) -> (Point, usize) {
    let dim = h.space().dim();
    let d0 = h.apply(x0);
    let k = [(d0[0] - x0[0]).round(), if dim == 2 { (d0[1] - x0[1]).round() } else { 0.0 }];
    let g = |x: Point| {
        let y = h.apply(x);
        [y[0] - x[0] - k[0], if dim == 2 { y[1] - x[1] - k[1] } else { 0.0 }]
    };
    let s = 1e-7;
    let mut x = x0;
    for it in 0..50 {
        let r = g(x);
        if r[0].abs().max(r[1].abs()) < 1e-16 {
            return (x, it);
        }
        let mut j = [[0.0; 2]; 2];
        for c in 0..dim {
            let mut e = [0.0; 2];
            e[c] = s;
            let (a, b) = (g([x[0] + e[0], x[1] + e[1]]), g([x[0] - e[0], x[1] - e[1]]));
            j[0][c] = (a[0] - b[0]) / (2.0 * s);
            j[1][c] = (a[1] - b[1]) / (2.0 * s);
        }
        let Some(step) = solve_linear(j, r, dim) else {
            return (x, it);
        };
        x = [x[0] - step[0], x[1] - step[1]];
        if step[0].abs().max(step[1].abs()) < 1e-17 {
            return (x, it + 1);
        }
    }
    (x, 50)
}

/// A common fixed point of `f` and `h`: `h`-fixed cells, Newton refinement,
/// then an `f`-residual filter.
pub fn persistent_fixed_point(action: &BSAction, search_resolution: usize) -> Option<FixedPointReport> {
    let space = action.space();
    let cells = fixed_cells(&action.h, search_resolution, None);
    let mut cands: Vec<(f64, Point)> = cells
        .iter()
        .map(|c| {
            let p = cells.center(c);
            (action.h.displacement(p), p)
        })
        .collect();
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1[0].total_cmp(&b.1[0])).then(a.1[1].total_cmp(&b.1[1])));
    let sep = 2.0 * cells.cell_diameter();
    let mut roots: Vec<Point> = Vec::new();
    let mut tried = 0;
    for (_, p) in cands {
        if tried >= MAX_CANDIDATES {
            break;
        }
        if roots.iter().any(|r| space.dist(*r, p) < sep) {
            continue;
        }
        tried += 1;
        let (x, its) = newton_fixed(&action.h, p);
        let x = space.reduce(x);
        let (hr, fr) = (action.h.displacement(x), action.f.displacement(x));
        roots.push(x);
        if hr < F_FIXED_TOL && fr < F_FIXED_TOL {
            return Some(FixedPointReport {
                point: x,
                f_residual: fr,
                h_residual: hr,
                newton_iterations: its,
                candidates_tried: tried,
            });
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct PersistenceReport {
    pub estimate: RotationSetEstimate,
    pub constraint: ConstraintReport,
    /// `1/(2(n − 1))`: estimates closer than this to `(0,0)` must snap to it.
    pub window: f64,
    pub pass: bool,
}

/// Rotation set of `f` matched against the lattice `(1/(n−1))ℤ²` allowed by
/// the relation with a linear part `I` for `h`; passes when it snaps to `(0,0)`.
pub fn rotation_set_persistence(f: &TorusLift, n: u32, params: &RotationSetParams) -> Result<PersistenceReport> {
    let estimate = rotation_set(f, params)?;
    let value = estimate.point.unwrap_or_else(|| crate::hull::centroid(&estimate.hull));
    let constraint = bs_rotation_constraint(
        RhoInput::Estimate {
            value,
            error_bound: estimate.error_bound,
        },
        &IntMatrix2::IDENTITY,
        n,
    )?;
    let zero = constraint
        .snapped
        .as_ref()
        .is_some_and(|s| s.iter().all(|q| *q.0.numer() == 0));
    Ok(PersistenceReport {
        pass: estimate.is_point && constraint.consistent && zero,
        window: 1.0 / (2.0 * (n as f64 - 1.0)),
        estimate,
        constraint,
    })
}
