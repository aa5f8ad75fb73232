//! Cell-level fixed sets, the decreasing family `K_l = ⋂_{|j| ≤ l} h^{−j}(P)`
//! with `P = fix(f)`, minimal-set estimates, Birkhoff displacement and
//! finite-difference differentials.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::bsgroup::{finite_bs_orbit, BSAction, OrbitResult, DEFAULT_MAX_ORBIT, DEFAULT_MERGE_TOL};
use crate::error::{Error, Result};
use crate::space::{Lift, Space};
use crate::torus::{Point, TorusLift};

/// Cells `[i, j]` of a uniform grid on `[0,1)^dim`; `j = 0` on the circle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSet {
    pub resolution: usize,
    pub space: Space,
    cells: BTreeSet<[usize; 2]>,
}

impl Serialize for CellSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CellSet", 2)?;
        st.serialize_field("resolution", &self.resolution)?;
        match self.space {
            Space::Circle => st.serialize_field("cells", &self.cells.iter().map(|c| c[0]).collect::<Vec<_>>())?,
            Space::Torus => st.serialize_field("cells", &self.cells)?,
        }
        st.end()
    }
}

impl CellSet {
    pub fn new(space: Space, resolution: usize) -> Self {
        Self {
            resolution: resolution.max(1),
            space,
            cells: BTreeSet::new(),
        }
    }

    pub fn all(space: Space, resolution: usize) -> Self {
        let mut s = Self::new(space, resolution);
        s.cells = all_indices(space, s.resolution).into_iter().collect();
        s
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: [usize; 2]) -> bool {
        self.cells.contains(&c)
    }

    pub fn iter(&self) -> impl Iterator<Item = [usize; 2]> + '_ {
        self.cells.iter().copied()
    }

    pub fn insert(&mut self, c: [usize; 2]) {
        self.cells.insert(c);
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.resolution == other.resolution && self.cells.is_subset(&other.cells)
    }

    pub fn cell_size(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    /// Diameter of one cell.
    pub fn cell_diameter(&self) -> f64 {
        cell_diameter(self.space, self.resolution)
    }

    pub fn center(&self, c: [usize; 2]) -> Point {
        center(self.space, self.resolution, c)
    }

    pub fn cell_of(&self, p: Point) -> [usize; 2] {
        cell_of(self.space, self.resolution, p)
    }

    /// Cells within one step (including diagonals) of the set.
    pub fn dilate(&self) -> CellSet {
        let r = self.resolution;
        let mut out = self.clone();
        for c in &self.cells {
            for n in neighbours(self.space, r, *c) {
                out.cells.insert(n);
            }
        }
        out
    }

    /// Fraction of the cells of `self` that lie in `other`.
    pub fn coverage_in(&self, other: &CellSet) -> f64 {
        if self.is_empty() {
            return 1.0;
        }
        self.cells.iter().filter(|c| other.contains(**c)).count() as f64 / self.len() as f64
    }

    /// Cells containing the given points.
    pub fn from_points(space: Space, resolution: usize, pts: &[Point]) -> CellSet {
        let mut s = CellSet::new(space, resolution);
        for p in pts {
            s.cells.insert(s.cell_of(*p));
        }
        s
    }
}

fn cell_diameter(space: Space, res: usize) -> f64 {
    let h = 1.0 / res as f64;
    match space {
        Space::Circle => h,
        Space::Torus => h * std::f64::consts::SQRT_2,
    }
}

fn center(space: Space, res: usize, c: [usize; 2]) -> Point {
    let h = 1.0 / res as f64;
    match space {
        Space::Circle => [(c[0] as f64 + 0.5) * h, 0.0],
        Space::Torus => [(c[0] as f64 + 0.5) * h, (c[1] as f64 + 0.5) * h],
    }
}

fn cell_of(space: Space, res: usize, p: Point) -> [usize; 2] {
    let q = space.reduce(p);
    let k = |x: f64| ((x * res as f64) as usize).min(res - 1);
    match space {
        Space::Circle => [k(q[0]), 0],
        Space::Torus => [k(q[0]), k(q[1])],
    }
}

fn all_indices(space: Space, res: usize) -> Vec<[usize; 2]> {
    match space {
        Space::Circle => (0..res).map(|i| [i, 0]).collect(),
        Space::Torus => (0..res * res).map(|k| [k / res, k % res]).collect(),
    }
}

fn neighbours(space: Space, res: usize, c: [usize; 2]) -> Vec<[usize; 2]> {
    let w = |i: usize, d: isize| (i as isize + d).rem_euclid(res as isize) as usize;
    match space {
        Space::Circle => vec![[w(c[0], -1), 0], [w(c[0], 1), 0]],
        Space::Torus => {
            let mut v = Vec::with_capacity(8);
            for di in -1..=1 {
                for dj in -1..=1 {
                    if di != 0 || dj != 0 {
                        v.push([w(c[0], di), w(c[1], dj)]);
                    }
                }
            }
            v
        }
    }
}

/// Cells whose centre is moved by less than `delta` (default: twice the cell
/// diameter). Neighbours of flagged cells are subdivided once and added when
/// one of their sub-cells passes the same test, so near-misses at the centre
/// do not lose fixed points.
pub fn fixed_cells(f: &Lift, resolution: usize, delta: Option<f64>) -> CellSet {
    let space = f.space();
    let res = resolution.max(1);
    let delta = delta.unwrap_or(2.0 * cell_diameter(space, res));
    let idx = all_indices(space, res);
    let flags: Vec<bool> = idx
        .par_iter()
        .map(|&c| f.displacement(center(space, res, c)) < delta)
        .collect();
    let mut out = CellSet::new(space, res);
    for (c, &on) in idx.iter().zip(&flags) {
        if on {
            out.cells.insert(*c);
        }
    }
    let candidates: Vec<[usize; 2]> = out
        .cells
        .iter()
        .flat_map(|c| neighbours(space, res, *c))
        .filter(|c| !out.contains(*c))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let h = 1.0 / res as f64;
    let extra: Vec<[usize; 2]> = candidates
        .par_iter()
        .filter(|&&c| {
            let base = [c[0] as f64 * h, c[1] as f64 * h];
            let subs: &[[f64; 2]] = match space {
                Space::Circle => &[[0.25, 0.0], [0.75, 0.0]],
                Space::Torus => &[[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]],
            };
            subs.iter()
                .any(|s| f.displacement([base[0] + s[0] * h, base[1] + s[1] * h]) < delta)
        })
        .copied()
        .collect();
    out.cells.extend(extra);
    out
}

/// Summed-area table for constant-time "does this box meet the set" queries.
struct BoxIndex {
    res: usize,
    space: Space,
    sat: Vec<u32>,
}

impl BoxIndex {
    fn new(set: &CellSet) -> Self {
        let res = set.resolution;
        let rows = if set.space == Space::Torus { res } else { 1 };
        let w = res + 1;
        let mut sat = vec![0u32; w * (rows + 1)];
        for c in set.iter() {
            let (i, j) = (c[0], if set.space == Space::Torus { c[1] } else { 0 });
            sat[(j + 1) * w + i + 1] = 1;
        }
        for j in 1..=rows {
            for i in 1..=res {
                sat[j * w + i] += sat[(j - 1) * w + i] + sat[j * w + i - 1] - sat[(j - 1) * w + i - 1];
            }
        }
        Self { res, space: set.space, sat }
    }

    fn count(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> u32 {
        // half-open [i0, i1) × [j0, j1)
        let w = self.res + 1;
        self.sat[j1 * w + i1] + self.sat[j0 * w + i0] - self.sat[j0 * w + i1] - self.sat[j1 * w + i0]
    }

    /// Cells `lo..=hi` of a lifted index range, split at the wrap.
    fn ranges(&self, lo: i64, hi: i64) -> Vec<(usize, usize)> {
        let r = self.res as i64;
        if hi - lo + 1 >= r {
            return vec![(0, self.res)];
        }
        let (a, b) = (lo.rem_euclid(r), hi.rem_euclid(r));
        if a <= b {
            vec![(a as usize, b as usize + 1)]
        } else {
            vec![(a as usize, self.res), (0, b as usize + 1)]
        }
    }

    fn meets(&self, lo: Point, hi: Point) -> bool {
        let r = self.res as f64;
        let idx = |x: f64| (x * r).floor() as i64;
        let is = self.ranges(idx(lo[0]), idx(hi[0]));
        let js = match self.space {
            Space::Circle => vec![(0, 1)],
            Space::Torus => self.ranges(idx(lo[1]), idx(hi[1])),
        };
        is.iter().any(|&(i0, i1)| js.iter().any(|&(j0, j1)| self.count(i0, i1, j0, j1) > 0))
    }
}

/// Bounding box of the image of a cell under `g`, from its corners, edge
/// midpoints and centre, widened by one cell.
fn image_box(g: &dyn Fn(Point) -> Point, space: Space, res: usize, c: [usize; 2]) -> (Point, Point) {
    let h = 1.0 / res as f64;
    let (x0, y0) = (c[0] as f64 * h, c[1] as f64 * h);
    let offs: &[f64] = &[0.0, 0.5, 1.0];
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for &a in offs {
        let ys: &[f64] = if space == Space::Torus { offs } else { &[0.0] };
        for &b in ys {
            let p = g([x0 + a * h, y0 + b * h]);
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
    }
    if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
        return ([0.0, 0.0], [1.0, 1.0]);
    }
    ([lo[0] - h, lo[1] - h], [hi[0] + h, hi[1] + h])
}

/// `K_0 = P, K_1, …, K_depth` with `K_l = {c ∈ P : h^j(c) meets P for all 0 < |j| ≤ l}`.
/// Images of cells are over-approximated by dilated bounding boxes, so the
/// family can only err on the large side.
pub fn invariant_core(h: &Lift, h_inv: &Lift, p: &CellSet, depth: usize) -> Vec<CellSet> {
    let space = p.space;
    let res = p.resolution;
    let index = BoxIndex::new(p);
    let cells: Vec<[usize; 2]> = p.iter().collect();
    // survival[c] = largest l ≤ depth with h^j(c) meeting P for all |j| ≤ l
    let survival: Vec<usize> = cells
        .par_iter()
        .map(|&c| {
            for l in 1..=depth {
                for g in [h, h_inv] {
                    let map = |x: Point| g.iterate(x, l);
                    let (lo, hi) = image_box(&map, space, res, c);
                    if !index.meets(lo, hi) {
                        return l - 1;
                    }
                }
            }
            depth
        })
        .collect();
    (0..=depth)
        .map(|l| {
            let mut k = CellSet::new(space, res);
            for (c, &s) in cells.iter().zip(&survival) {
                if s >= l {
                    k.insert(*c);
                }
            }
            k
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MinimalLabel {
    FiniteOrbit,
    MinimalCircle,
    MinimalCantor,
    Unknown,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GapSample {
    pub n: usize,
    pub largest_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalDiagnostics {
    pub resolution: usize,
    pub fixed_cells: usize,
    /// `|K_l|` for `l = 0..=depth`.
    pub level_counts: Vec<usize>,
    pub seed: Option<Point>,
    pub period: Option<usize>,
    pub gaps: Vec<GapSample>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalSetEstimate {
    pub label: MinimalLabel,
    #[serde(skip)]
    pub points: Vec<Point>,
    pub points_count: usize,
    /// Cells met by the point cloud.
    pub cells: CellSet,
    pub diagnostics: MinimalDiagnostics,
}

pub const GAP_SAMPLES: [usize; 3] = [1_000, 10_000, 100_000];
const TRANSIENT: usize = 1_000;
const PERIOD_TOL: f64 = 1e-9;
const MAX_PERIOD: usize = 64;

/// Largest circular gap of `xs ⊂ ℝ/ℤ`.
pub fn largest_gap(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 1.0;
    }
    let mut v: Vec<f64> = xs.iter().map(|x| x.rem_euclid(1.0)).collect();
    v.sort_by(f64::total_cmp);
    let mut g = v[0] + 1.0 - v[v.len() - 1];
    for w in v.windows(2) {
        g = g.max(w[1] - w[0]);
    }
    g
}

/// Largest gaps of the first `N` values for each `N` in [`GAP_SAMPLES`].
pub fn gap_sequence(xs: &[f64]) -> Vec<GapSample> {
    GAP_SAMPLES
        .iter()
        .filter(|&&n| n <= xs.len())
        .map(|&n| GapSample {
            n,
            largest_gap: largest_gap(&xs[..n]),
        })
        .collect()
}

/// Circle if `g_N < 5/√N` throughout and non-increasing; Cantor if the gap
/// settles (relative change under 10% between consecutive `N`) above ten
/// cells; otherwise unknown.
pub fn classify_gaps(gaps: &[GapSample], cell_size: f64) -> MinimalLabel {
    if gaps.len() < 2 {
        return MinimalLabel::Unknown;
    }
    let decreasing = gaps.windows(2).all(|w| w[1].largest_gap <= w[0].largest_gap);
    if decreasing && gaps.iter().all(|g| g.largest_gap < 5.0 / (g.n as f64).sqrt()) {
        return MinimalLabel::MinimalCircle;
    }
    let last = gaps[gaps.len() - 1].largest_gap;
    let prev = gaps[gaps.len() - 2].largest_gap;
    if last > 10.0 * cell_size && (prev - last).abs() < 0.1 * last {
        return MinimalLabel::MinimalCantor;
    }
    MinimalLabel::Unknown
}

/// Smallest `q ≤ 64` with `h^q(x) ≈ x`.
pub fn detect_period(h: &Lift, x: Point, tol: f64) -> Option<usize> {
    let space = h.space();
    let mut p = x;
    for q in 1..=MAX_PERIOD {
        p = h.apply(p);
        if space.dist(p, x) < tol {
            return Some(q);
        }
    }
    None
}

/// Forward `h`-orbit of `seed` after a transient, labelled by periodicity or
/// by the gap statistics of its last coordinate (the fibre on the torus).
pub fn orbit_closure_estimate(action: &BSAction, seed: Point, resolution: usize) -> (MinimalLabel, Vec<Point>, Option<usize>, Vec<GapSample>) {
    let space = action.space();
    let x = action.h.iterate(seed, TRANSIENT);
    if let Some(q) = detect_period(&action.h, x, PERIOD_TOL) {
        if let OrbitResult::Finite { points, .. } = finite_bs_orbit(action, x, DEFAULT_MERGE_TOL, DEFAULT_MAX_ORBIT) {
            return (MinimalLabel::FiniteOrbit, points, Some(q), Vec::new());
        }
    }
    let n = *GAP_SAMPLES.last().unwrap();
    let mut pts = Vec::with_capacity(n);
    let mut p = x;
    for _ in 0..n {
        pts.push(space.reduce(p));
        p = action.h.apply(p);
    }
    let coord = if space == Space::Torus { 1 } else { 0 };
    let xs: Vec<f64> = pts.iter().map(|p| p[coord]).collect();
    let gaps = gap_sequence(&xs);
    (classify_gaps(&gaps, 1.0 / resolution as f64), pts, None, gaps)
}

/// Constructive BS-minimal set: `P = fix(f)` at cell level, `K = K_depth`,
/// then the `h`-orbit closure of the least-displaced point of `K`.
pub fn bs_minimal_set(action: &BSAction, resolution: usize, depth_l: usize) -> MinimalSetEstimate {
    let space = action.space();
    let p = fixed_cells(&action.f, resolution, None);
    let mut diag = MinimalDiagnostics {
        resolution,
        fixed_cells: p.len(),
        level_counts: Vec::new(),
        seed: None,
        period: None,
        gaps: Vec::new(),
        note: None,
    };
    let unknown = |diag: MinimalDiagnostics| MinimalSetEstimate {
        label: MinimalLabel::Unknown,
        points: Vec::new(),
        points_count: 0,
        cells: CellSet::new(space, resolution),
        diagnostics: diag,
    };
    if p.is_empty() {
        diag.note = Some("f has no fixed cells at this resolution".into());
        return unknown(diag);
    }
    let levels = invariant_core(&action.h, &action.h_inv, &p, depth_l);
    diag.level_counts = levels.iter().map(CellSet::len).collect();
    let k = levels.last().unwrap();
    if k.is_empty() {
        diag.note = Some("K is empty at this resolution".into());
        return unknown(diag);
    }
    let seed = k
        .iter()
        .map(|c| k.center(c))
        .min_by(|a, b| action.f.displacement(*a).total_cmp(&action.f.displacement(*b)))
        .unwrap();
    diag.seed = Some(seed);
    let (label, points, period, gaps) = orbit_closure_estimate(action, seed, resolution);
    diag.period = period;
    diag.gaps = gaps;
    MinimalSetEstimate {
        label,
        points_count: points.len(),
        cells: CellSet::from_points(space, resolution, &points),
        points,
        diagnostics: diag,
    }
}

/// Last `samples` points of the `h⁻¹`-orbit of `x` after `transient` steps.
pub fn alpha_limit(h: &Lift, x: Point, transient: usize, samples: usize) -> Result<Vec<Point>> {
    let hi = h.inverse()?;
    let space = h.space();
    let mut p = hi.iterate(x, transient);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(Error::InverseFailed {
                label: h.label().to_string(),
                at: x,
            });
        }
        out.push(space.reduce(p));
        p = hi.apply(p);
    }
    Ok(out)
}

/// `(1/N) Σ_{k<N} (F(x_k) − x_k)`.
pub fn birkhoff_displacement(f: &TorusLift, x: Point, iterates: usize) -> Result<Point> {
    if !f.linear_part().is_identity() {
        return Err(Error::NonIdentityLinearPart(f.linear_part().to_string()));
    }
    let n = iterates.max(1);
    let mut p = x;
    let mut s = [0.0, 0.0];
    for _ in 0..n {
        let q = f.eval(p);
        s[0] += q[0] - p[0];
        s[1] += q[1] - p[1];
        p = q;
    }
    Ok([s[0] / n as f64, s[1] / n as f64])
}

#[derive(Clone, Debug, Serialize)]
pub struct Differential {
    pub dim: usize,
    /// Richardson-extrapolated central-difference Jacobian.
    pub jacobian: [[f64; 2]; 2],
    /// Eigenvalue moduli, ascending.
    pub moduli: Vec<f64>,
    /// `‖J(s) − J(s/2)‖ / ‖J(s/2) − J(s/4)‖`; `None` when the differences
    /// vanish (affine maps), which counts as exact.
    pub richardson: Option<f64>,
    pub near_seam: bool,
}

impl Differential {
    /// Ratio within `[3.5, 4.5]`, or an exactly affine map.
    pub fn richardson_ok(&self) -> bool {
        self.richardson.is_none_or(|r| (3.5..=4.5).contains(&r))
    }
}

fn jacobian(f: &Lift, x: Point, s: f64) -> [[f64; 2]; 2] {
    let col = |e: Point| {
        let a = f.apply([x[0] + s * e[0], x[1] + s * e[1]]);
        let b = f.apply([x[0] - s * e[0], x[1] - s * e[1]]);
        [(a[0] - b[0]) / (2.0 * s), (a[1] - b[1]) / (2.0 * s)]
    };
    match f.space() {
        Space::Circle => {
            let c = col([1.0, 0.0]);
            [[c[0], 0.0], [0.0, 1.0]]
        }
        Space::Torus => {
            let (c0, c1) = (col([1.0, 0.0]), col([0.0, 1.0]));
            [[c0[0], c1[0]], [c0[1], c1[1]]]
        }
    }
}

fn frob_diff(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += (a[i][j] - b[i][j]).powi(2);
        }
    }
    s.sqrt()
}

pub fn eigen_moduli(m: &[[f64; 2]; 2]) -> [f64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    let mut v = if disc >= 0.0 {
        let r = disc.sqrt();
        [((tr - r) / 2.0).abs(), ((tr + r) / 2.0).abs()]
    } else {
        let m = det.abs().sqrt();
        [m, m]
    };
    v.sort_by(f64::total_cmp);
    v
}

/// Differential of the lift at `x` by central differences with steps `s`,
/// `s/2`, `s/4`.
pub fn differential_at(f: &Lift, x: Point, step: f64) -> Differential {
    let (j1, j2, j4) = (jacobian(f, x, step), jacobian(f, x, step / 2.0), jacobian(f, x, step / 4.0));
    let mut j = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            j[a][b] = richardson2(j1[a][b], j2[a][b], j4[a][b]);
        }
    }
    let (num, den) = (frob_diff(&j1, &j2), frob_diff(&j2, &j4));
    let scale = j2.iter().flatten().map(|v| v.abs()).fold(1.0, f64::max);
    let richardson = if den <= 1e-12 * scale && num <= 1e-12 * scale { None } else { Some(num / den) };
    let dim = f.space().dim();
    let moduli = match dim {
        1 => vec![j[0][0].abs()],
        _ => eigen_moduli(&j).to_vec(),
    };
    Differential {
        dim,
        jacobian: j,
        moduli,
        richardson,
        near_seam: f.near_kink(x, 2.0 * step),
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RichardsonCheck {
    pub step: f64,
    pub ratio: Option<f64>,
    pub pass: bool,
}

/// Richardson ratio at `step`, refined by factors of 4 (at most three times)
/// until it lands in `[3.5, 4.5]`. For a smooth map the ratio tends to 4 as
/// the step shrinks; near zeros of the third derivative the coarse steps are
/// not yet asymptotic. Maps with kinks do not settle.
pub fn richardson_check(f: &Lift, x: Point, step: f64) -> RichardsonCheck {
    let mut s = step;
    let mut d = differential_at(f, x, s);
    for _ in 0..3 {
        if d.richardson_ok() {
            break;
        }
        s /= 4.0;
        d = differential_at(f, x, s);
    }
    RichardsonCheck {
        step: s,
        ratio: d.richardson,
        pass: d.richardson_ok(),
    }
}

/// Two rounds of Richardson extrapolation for an `O(s²)` central difference.
fn richardson2(a1: f64, a2: f64, a4: f64) -> f64 {
    let b2 = (4.0 * a2 - a1) / 3.0;
    let b4 = (4.0 * a4 - a2) / 3.0;
    (16.0 * b4 - b2) / 15.0
}
