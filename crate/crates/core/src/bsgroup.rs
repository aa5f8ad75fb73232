//! Words in `BS(1,n) = ⟨a, b | a b a⁻¹ = bⁿ⟩`, their normal forms, and actions
//! `a ↦ h`, `b ↦ f` on the circle or torus.
//!
//! Words compose like maps: the rightmost letter acts first, so `a⁻¹ b a`
//! sends `x` to `h⁻¹(f(h(x)))`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{Lift, Space};
use crate::torus::Point;

pub const RELATION_THRESHOLD: f64 = 1e-8;
pub const ITERATED_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_MERGE_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ORBIT: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Gen {
    A,
    B,
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gen::A => "a",
            Gen::B => "b",
        })
    }
}

/// Run-length encoded word. Exponents are nonzero and adjacent runs use
/// different letters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Word {
    runs: Vec<(Gen, i64)>,
}

impl Word {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_runs(runs: impl IntoIterator<Item = (Gen, i64)>) -> Self {
        let mut w = Self::empty();
        for (g, e) in runs {
            w.push(g, e);
        }
        w
    }

    /// Appends `g^e`, merging and freely cancelling.
    pub fn push(&mut self, g: Gen, e: i64) {
        if e == 0 {
            return;
        }
        match self.runs.last_mut() {
            Some((last, exp)) if *last == g => {
                *exp += e;
                if *exp == 0 {
                    self.runs.pop();
                }
            }
            _ => self.runs.push((g, e)),
        }
    }

    pub fn runs(&self) -> &[(Gen, i64)] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Number of letters.
    pub fn len(&self) -> u64 {
        self.runs.iter().map(|r| r.1.unsigned_abs()).sum()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &(g, e) in &other.runs {
            w.push(g, e);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word::from_runs(self.runs.iter().rev().map(|&(g, e)| (g, -e)))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.runs.is_empty() {
            return f.write_str("e");
        }
        for (i, (g, e)) in self.runs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if *e == 1 {
                write!(f, "{g}")?;
            } else {
                write!(f, "{g}^{e}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses runs like `a^-2 b^3 a a⁻¹`; `e` or the empty string is the identity.
    fn from_str(s: &str) -> Result<Self> {
        let mut w = Word::empty();
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            let g = match c {
                c if c.is_whitespace() || c == '·' || c == '*' => continue,
                'e' | '1' => continue,
                'a' => Gen::A,
                'b' => Gen::B,
                other => return Err(Error::WordParse(format!("unexpected character `{other}` in `{s}`"))),
            };
            let mut e = 1i64;
            match chars.peek() {
                Some('^') => {
                    chars.next();
                    let mut digits = String::new();
                    if let Some(&c) = chars.peek() {
                        if c == '-' || c == '+' {
                            digits.push(c);
                            chars.next();
                        }
                    }
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_digit() {
                            digits.push(c);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    e = digits
                        .parse()
                        .map_err(|_| Error::WordParse(format!("bad exponent after `{g}` in `{s}`")))?;
                }
                Some('⁻') => {
                    chars.next();
                    if chars.next() != Some('¹') {
                        return Err(Error::WordParse(format!("expected `⁻¹` in `{s}`")));
                    }
                    e = -1;
                }
                _ => {}
            }
            w.push(g, e);
        }
        Ok(w)
    }
}

/// `a^{−p} b^m a^q` with `p, q ≥ 0`, and `n ∤ m` whenever `p, q > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NormalForm {
    pub p: u64,
    pub m: i128,
    pub q: u64,
}

impl NormalForm {
    pub fn to_word(&self) -> Word {
        Word::from_runs([(Gen::A, -(self.p as i64)), (Gen::B, self.m as i64), (Gen::A, self.q as i64)])
    }
}

fn pow_n(n: i128, k: u64) -> Result<i128> {
    let mut acc: i128 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(n).ok_or(Error::Overflow("normalizing a word"))?;
    }
    Ok(acc)
}

/// Rewrites `w` into normal form by pushing `a` to the right and `a⁻¹` to the
/// left with `a b^m = b^{nm} a` and `b^m a⁻¹ = a⁻¹ b^{nm}`, then cancelling
/// `a^{−1} b^{nk} a → b^k` as long as possible.
pub fn normal_form(w: &Word, n: u32) -> Result<NormalForm> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be at least 2".into()));
    }
    let n = n as i128;
    let (mut p, mut m, mut q) = (0u64, 0i128, 0u64);
    for &(g, e) in w.runs() {
        match g {
            Gen::B => {
                // a^q b^e = b^{n^q e} a^q
                let shifted = pow_n(n, q)?
                    .checked_mul(e as i128)
                    .ok_or(Error::Overflow("normalizing a word"))?;
                m = m.checked_add(shifted).ok_or(Error::Overflow("normalizing a word"))?;
            }
            Gen::A if e > 0 => q += e as u64,
            Gen::A => {
                let k = e.unsigned_abs();
                if k <= q {
                    q -= k;
                } else {
                    // b^m a^{-r} = a^{-r} b^{n^r m}
                    let r = k - q;
                    q = 0;
                    p += r;
                    if m != 0 {
                        m = m.checked_mul(pow_n(n, r)?).ok_or(Error::Overflow("normalizing a word"))?;
                    }
                }
            }
        }
    }
    while p > 0 && q > 0 && m % n == 0 {
        p -= 1;
        q -= 1;
        m /= n;
    }
    if m == 0 {
        // a^{-p} a^q
        let k = q as i128 - p as i128;
        return Ok(if k >= 0 {
            NormalForm { p: 0, m: 0, q: k as u64 }
        } else {
            NormalForm {
                p: (-k) as u64,
                m: 0,
                q: 0,
            }
        });
    }
    Ok(NormalForm { p, m, q })
}

pub fn normalize(w: &Word, n: u32) -> Result<Word> {
    let nf = normal_form(w, n)?;
    if i64::try_from(nf.m).is_err() || i64::try_from(nf.p).is_err() || i64::try_from(nf.q).is_err() {
        return Err(Error::Overflow("writing a normal form as a word"));
    }
    Ok(nf.to_word())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RelationReport {
    pub grid_points: usize,
    /// `sup dist(h f h⁻¹(x), fⁿ(x))`
    pub residual: f64,
    /// `sup dist(h² f h⁻²(x), f^{n²}(x))`
    pub iterated_residual: f64,
}

impl RelationReport {
    pub fn passes(&self) -> bool {
        self.residual < RELATION_THRESHOLD && self.iterated_residual < ITERATED_THRESHOLD
    }
}

/// Sup-distance between `h∘f∘h⁻¹` and `fⁿ` over a grid with `grid` points per
/// dimension, together with the `p = 2` identity `h² f h⁻² = f^{n²}`.
pub fn relation_residual(f: &Lift, h: &Lift, n: u32, grid: usize) -> Result<RelationReport> {
    if f.space() != h.space() {
        return Err(Error::SpaceMismatch(format!("{} and {}", f.label(), h.label())));
    }
    let space = f.space();
    let hi = h.inverse()?;
    let n = n as usize;
    let pts = space.grid(grid);
    let res: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|&x| {
            let lhs = h.apply(f.apply(hi.apply(x)));
            let rhs = f.iterate(x, n);
            let lhs2 = h.iterate(f.apply(hi.iterate(x, 2)), 2);
            let rhs2 = f.iterate(x, n * n);
            (space.dist(lhs, rhs), space.dist(lhs2, rhs2))
        })
        .collect();
    let nan_max = |a: f64, b: f64| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) };
    Ok(RelationReport {
        grid_points: pts.len(),
        residual: res.iter().map(|r| r.0).fold(0.0, nan_max),
        iterated_residual: res.iter().map(|r| r.1).fold(0.0, nan_max),
    })
}

/// A pair `(f, h)` with `h f h⁻¹ = fⁿ`, checked numerically at construction.
#[derive(Clone, Debug)]
pub struct BSAction {
    pub label: String,
    pub n: u32,
    pub f: Lift,
    pub h: Lift,
    pub f_inv: Lift,
    pub h_inv: Lift,
    pub relation: RelationReport,
}

impl BSAction {
    pub fn new(label: impl Into<String>, n: u32, f: impl Into<Lift>, h: impl Into<Lift>) -> Result<Self> {
        let (f, h) = (f.into(), h.into());
        if n < 2 {
            return Err(Error::InvalidParameter("n must be at least 2".into()));
        }
        let grid = match f.space() {
            Space::Circle => 10_000,
            Space::Torus => 100,
        };
        let relation = relation_residual(&f, &h, n, grid)?;
        if !relation.passes() {
            let (residual, threshold) = if relation.residual < RELATION_THRESHOLD {
                (relation.iterated_residual, ITERATED_THRESHOLD)
            } else {
                (relation.residual, RELATION_THRESHOLD)
            };
            return Err(Error::RelationViolated { residual, threshold });
        }
        Ok(Self {
            label: label.into(),
            n,
            f_inv: f.inverse()?,
            h_inv: h.inverse()?,
            f,
            h,
            relation,
        })
    }

    pub fn space(&self) -> Space {
        self.f.space()
    }

    fn generator(&self, g: Gen, inverse: bool) -> &Lift {
        match (g, inverse) {
            (Gen::A, false) => &self.h,
            (Gen::A, true) => &self.h_inv,
            (Gen::B, false) => &self.f,
            (Gen::B, true) => &self.f_inv,
        }
    }

    /// `f, f⁻¹, h, h⁻¹`.
    pub fn generators(&self) -> [&Lift; 4] {
        [&self.f, &self.f_inv, &self.h, &self.h_inv]
    }

    /// Image of `x` under the group element `w`.
    pub fn evaluate(&self, w: &Word, x: Point) -> Point {
        let mut p = x;
        for &(g, e) in w.runs().iter().rev() {
            p = self.generator(g, e < 0).iterate(p, e.unsigned_abs() as usize);
        }
        p
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "result")]
pub enum OrbitResult {
    /// Closed under all four generators to within `merge_tol / 10`.
    Finite { points: Vec<Point>, closure_residual: f64 },
    /// Stabilized at `merge_tol` but not at the tighter re-check.
    Unconfirmed { points: Vec<Point>, closure_residual: f64 },
    ExceedsBound { explored: usize },
}

impl OrbitResult {
    pub fn points(&self) -> Option<&[Point]> {
        match self {
            OrbitResult::Finite { points, .. } => Some(points),
            _ => None,
        }
    }
}

/// Points on `(ℝ/ℤ)^dim` bucketed by a grid of mesh `tol`.
struct PointIndex {
    space: Space,
    tol: f64,
    buckets: usize,
    map: HashMap<(usize, usize), Vec<usize>>,
    points: Vec<Point>,
}

impl PointIndex {
    fn new(space: Space, tol: f64) -> Self {
        Self {
            space,
            tol,
            buckets: ((1.0 / tol).ceil() as usize).max(1),
            map: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn key(&self, p: Point) -> (usize, usize) {
        let k = |x: f64| ((x / self.tol) as usize).min(self.buckets - 1);
        match self.space {
            Space::Circle => (k(p[0]), 0),
            Space::Torus => (k(p[0]), k(p[1])),
        }
    }

    /// Distance from `p` to the nearest stored point, if within `tol`.
    fn nearest(&self, p: Point) -> Option<f64> {
        let (i, j) = self.key(p);
        let b = self.buckets;
        let dj: &[usize] = match self.space {
            Space::Circle => &[0],
            Space::Torus => &[b - 1, 0, 1],
        };
        let mut best: Option<f64> = None;
        for di in [b - 1, 0, 1] {
            for &dj in dj {
                let key = ((i + di) % b, (j + dj) % b.max(1));
                let key = if self.space == Space::Circle { (key.0, 0) } else { key };
                for &idx in self.map.get(&key).into_iter().flatten() {
                    let d = self.space.dist(self.points[idx], p);
                    if d <= self.tol && best.is_none_or(|b| d < b) {
                        best = Some(d);
                    }
                }
            }
        }
        best
    }

    fn insert(&mut self, p: Point) {
        let key = self.key(p);
        self.map.entry(key).or_default().push(self.points.len());
        self.points.push(p);
    }
}

/// Closure of `{seed}` under `f^{±1}, h^{±1}`, merging points closer than
/// `merge_tol`.
pub fn finite_bs_orbit(action: &BSAction, seed: Point, merge_tol: f64, max_size: usize) -> OrbitResult {
    let space = action.space();
    let mut index = PointIndex::new(space, merge_tol);
    let mut queue = VecDeque::new();
    let s = space.reduce(seed);
    index.insert(s);
    queue.push_back(s);
    while let Some(p) = queue.pop_front() {
        for g in action.generators() {
            let q = space.reduce(g.apply(p));
            if !q[0].is_finite() || !q[1].is_finite() {
                return OrbitResult::ExceedsBound {
                    explored: index.points.len(),
                };
            }
            if index.nearest(q).is_none() {
                if index.points.len() >= max_size {
                    return OrbitResult::ExceedsBound {
                        explored: index.points.len(),
                    };
                }
                index.insert(q);
                queue.push_back(q);
            }
        }
    }
    let points = index.points;
    let closure_residual = closure_residual(action, &points);
    if closure_residual <= merge_tol / 10.0 {
        OrbitResult::Finite {
            points,
            closure_residual,
        }
    } else {
        OrbitResult::Unconfirmed {
            points,
            closure_residual,
        }
    }
}

/// `max_{x ∈ S, g} dist(g(x), S)` over the four generators.
pub fn closure_residual(action: &BSAction, points: &[Point]) -> f64 {
    let space = action.space();
    let mut worst: f64 = 0.0;
    for &p in points {
        for g in action.generators() {
            let q = g.apply(p);
            let d = points.iter().map(|&s| space.dist(s, q)).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    worst
}
