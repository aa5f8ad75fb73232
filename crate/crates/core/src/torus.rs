//! Lifts `ℝ² → ℝ²` of torus homeomorphisms, rotation vectors and rotation
//! sets, and the rotation-vector constraint imposed by `h f h⁻¹ = fⁿ`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::circle::CircleLift;
use crate::error::{Error, Result};
use crate::gl2z::{affine_fixed_point, solve2, AffineMapQ2, IntMatrix2, Rational, Q};
use crate::hull;

pub type Point = [f64; 2];
pub type Map2 = Arc<dyn Fn(Point) -> Point + Send + Sync>;
type KinkTest = Arc<dyn Fn(Point, f64) -> bool + Send + Sync>;

pub const DEFAULT_POINT_TOL: f64 = 1e-3;

#[derive(Clone)]
pub struct TorusLift {
    label: String,
    eval: Map2,
    linear: IntMatrix2,
    exact_inverse: Option<Map2>,
    kinks: Option<KinkTest>,
}

impl fmt::Debug for TorusLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusLift")
            .field("label", &self.label)
            .field("linear", &self.linear)
            .finish()
    }
}

fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

impl TorusLift {
    pub fn new(
        label: impl Into<String>,
        linear: IntMatrix2,
        eval: impl Fn(Point) -> Point + Send + Sync + 'static,
    ) -> Result<Self> {
        linear.require_unimodular()?;
        Ok(Self {
            label: label.into(),
            eval: Arc::new(eval),
            linear,
            exact_inverse: None,
            kinks: None,
        })
    }

    pub fn with_inverse(mut self, inv: impl Fn(Point) -> Point + Send + Sync + 'static) -> Self {
        self.exact_inverse = Some(Arc::new(inv));
        self
    }

    pub fn identity() -> Self {
        Self::translation([0.0, 0.0]).relabel("id")
    }

    pub fn translation(v: Point) -> Self {
        Self {
            label: format!("translate({},{})", v[0], v[1]),
            eval: Arc::new(move |p| add(p, v)),
            linear: IntMatrix2::IDENTITY,
            exact_inverse: Some(Arc::new(move |p| sub(p, v))),
            kinks: None,
        }
    }

    pub fn linear(a: IntMatrix2) -> Result<Self> {
        let ai = a.inverse()?;
        Ok(Self {
            label: format!("linear{a}"),
            eval: Arc::new(move |p| a.apply_f64(p)),
            linear: a,
            exact_inverse: Some(Arc::new(move |p| ai.apply_f64(p))),
            kinks: None,
        })
    }

    /// `(x, y) ↦ (f(x), g(y))`.
    pub fn product(f: &CircleLift, g: &CircleLift) -> Result<Self> {
        let (fi, gi) = (f.inverse()?, g.inverse()?);
        let (f1, g1) = (f.clone(), g.clone());
        let kinks: Option<KinkTest> = if f.is_smooth() && g.is_smooth() {
            None
        } else {
            let (f2, g2) = (f.clone(), g.clone());
            Some(Arc::new(move |p: Point, r| f2.near_kink(p[0], r) || g2.near_kink(p[1], r)))
        };
        Ok(Self {
            label: format!("{}×{}", f.label(), g.label()),
            eval: Arc::new(move |p| [f1.eval(p[0]), g1.eval(p[1])]),
            linear: IntMatrix2::IDENTITY,
            exact_inverse: Some(Arc::new(move |p| [fi.eval(p[0]), gi.eval(p[1])])),
            kinks,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn linear_part(&self) -> IntMatrix2 {
        self.linear
    }

    #[inline]
    pub fn eval(&self, p: Point) -> Point {
        (self.eval)(p)
    }

    pub fn has_exact_inverse(&self) -> bool {
        self.exact_inverse.is_some()
    }

    pub fn is_smooth(&self) -> bool {
        self.kinks.is_none()
    }

    pub fn near_kink(&self, p: Point, radius: f64) -> bool {
        self.kinks.as_ref().is_some_and(|k| k(p, radius))
    }

    pub fn iterate(&self, mut p: Point, k: usize) -> Point {
        for _ in 0..k {
            p = self.eval(p);
        }
        p
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &TorusLift) -> Result<TorusLift> {
        let linear = self
            .linear
            .checked_mul(&other.linear)
            .ok_or(Error::Overflow("composing linear parts"))?;
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let exact_inverse: Option<Map2> = match (&self.exact_inverse, &other.exact_inverse) {
            (Some(fi), Some(gi)) => {
                let (fi, gi) = (fi.clone(), gi.clone());
                Some(Arc::new(move |p| gi(fi(p))))
            }
            _ => None,
        };
        let kinks: Option<KinkTest> = match (&self.kinks, &other.kinks) {
            (None, None) => None,
            (a, b) => {
                let (a, b) = (a.clone(), b.clone());
                Some(Arc::new(move |p, r| {
                    a.as_ref().is_some_and(|k| k(p, r)) || b.as_ref().is_some_and(|k| k(p, r))
                }))
            }
        };
        Ok(TorusLift {
            label: format!("{}∘{}", self.label, other.label),
            eval: Arc::new(move |p| f(g(p))),
            linear,
            exact_inverse,
            kinks,
        })
    }

    /// `F + (p, q)`: the same torus map with a different lift.
    pub fn shifted(&self, by: [i64; 2]) -> TorusLift {
        let f = self.eval.clone();
        let v = [by[0] as f64, by[1] as f64];
        let mut out = self.clone();
        out.label = format!("{}+({},{})", self.label, by[0], by[1]);
        out.eval = Arc::new(move |p| add(f(p), v));
        out.exact_inverse = self.exact_inverse.clone().map(|fi| -> Map2 { Arc::new(move |p| fi(sub(p, v))) });
        out
    }

    pub fn inverse(&self) -> Result<TorusLift> {
        let linear = self.linear.inverse()?;
        let label = format!("{}^-1", self.label);
        if let Some(inv) = &self.exact_inverse {
            return Ok(TorusLift {
                label,
                eval: inv.clone(),
                linear,
                exact_inverse: Some(self.eval.clone()),
                kinks: self.kinks.clone(),
            });
        }
        let f = self.eval.clone();
        let a = self.linear;
        Ok(TorusLift {
            label,
            eval: Arc::new(move |y| newton_inverse(&*f, a, linear, y).unwrap_or([f64::NAN; 2])),
            linear,
            exact_inverse: Some(self.eval.clone()),
            kinks: self.kinks.clone(),
        })
    }

    /// Grid check of `F(x + P) = F(x) + A P` for the unit vectors `P`.
    pub fn validate(&self, grid: usize) -> Result<()> {
        let g = grid.max(1);
        let cols = [self.linear.apply_f64([1.0, 0.0]), self.linear.apply_f64([0.0, 1.0])];
        for i in 0..g {
            for j in 0..g {
                let p = [i as f64 / g as f64, j as f64 / g as f64];
                let fp = self.eval(p);
                for (e, col) in [[1.0, 0.0], [0.0, 1.0]].iter().zip(&cols) {
                    let d = sub(self.eval(add(p, *e)), add(fp, *col));
                    let defect = d[0].abs().max(d[1].abs());
                    if !(defect <= 1e-10) {
                        return Err(Error::PeriodDefect {
                            label: self.label.clone(),
                            at: p,
                            defect,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Solves `F(x) = y` by Newton's method on the periodic displacement.
pub fn newton_inverse(f: &dyn Fn(Point) -> Point, a: IntMatrix2, a_inv: IntMatrix2, y: Point) -> Option<Point> {
    let disp = |x: Point| sub(f(x), a.apply_f64(x));
    let mut x = a_inv.apply_f64(sub(y, disp(a_inv.apply_f64(y))));
    let h = 1e-7;
    for _ in 0..60 {
        let r = sub(f(x), y);
        if r[0].abs().max(r[1].abs()) < 1e-14 * (1.0 + y[0].abs().max(y[1].abs())) {
            return Some(x);
        }
        let col = |e: Point| {
            let fp = f(add(x, [e[0] * h, e[1] * h]));
            let fm = f(sub(x, [e[0] * h, e[1] * h]));
            [(fp[0] - fm[0]) / (2.0 * h), (fp[1] - fm[1]) / (2.0 * h)]
        };
        let (c0, c1) = (col([1.0, 0.0]), col([0.0, 1.0]));
        let det = c0[0] * c1[1] - c1[0] * c0[1];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let mut dx = [(c1[1] * r[0] - c1[0] * r[1]) / det, (c0[0] * r[1] - c0[1] * r[0]) / det];
        let len = dx[0].hypot(dx[1]);
        if len > 0.25 {
            dx = [dx[0] * 0.25 / len, dx[1] * 0.25 / len];
        }
        x = sub(x, dx);
    }
    let r = sub(f(x), y);
    (r[0].abs().max(r[1].abs()) < 1e-11).then_some(x)
}

fn require_identity(f: &TorusLift) -> Result<()> {
    if f.linear_part().is_identity() {
        Ok(())
    } else {
        Err(Error::NonIdentityLinearPart(f.linear_part().to_string()))
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RotationVector {
    pub value: Point,
    pub iterates: usize,
    pub error_bound: f64,
}

/// `(F^N(x) − x)/N`, with error bound `diam(displacements along the orbit)/N`.
pub fn rotation_vector(f: &TorusLift, x: Point, iterates: usize) -> Result<RotationVector> {
    require_identity(f)?;
    let n = iterates.max(1);
    let mut p = x;
    let mut bbox = DispBox::default();
    for _ in 0..n {
        let q = f.eval(p);
        bbox.add(sub(q, p));
        p = q;
    }
    let d = sub(p, x);
    Ok(RotationVector {
        value: [d[0] / n as f64, d[1] / n as f64],
        iterates: n,
        error_bound: bbox.diameter() / n as f64,
    })
}

#[derive(Clone, Copy, Debug)]
struct DispBox {
    lo: Point,
    hi: Point,
}

impl Default for DispBox {
    fn default() -> Self {
        Self {
            lo: [f64::INFINITY; 2],
            hi: [f64::NEG_INFINITY; 2],
        }
    }
}

impl DispBox {
    fn add(&mut self, d: Point) {
        for k in 0..2 {
            self.lo[k] = self.lo[k].min(d[k]);
            self.hi[k] = self.hi[k].max(d[k]);
        }
    }

    fn merge(self, o: Self) -> Self {
        let mut out = self;
        out.add(o.lo);
        out.add(o.hi);
        out
    }

    fn diameter(&self) -> f64 {
        if !self.lo[0].is_finite() {
            return 0.0;
        }
        (self.hi[0] - self.lo[0]).hypot(self.hi[1] - self.lo[1])
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RotationSetParams {
    pub grid: usize,
    pub iterates: usize,
    pub tail: usize,
    pub point_tol: f64,
}

impl Default for RotationSetParams {
    fn default() -> Self {
        Self {
            grid: 32,
            iterates: 10_000,
            tail: 100,
            point_tol: DEFAULT_POINT_TOL,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RotationSetEstimate {
    #[serde(skip)]
    pub samples: Vec<Point>,
    pub samples_count: usize,
    pub hull: Vec<Point>,
    pub diameter: f64,
    pub is_point: bool,
    pub point: Option<Point>,
    /// Sample diameter plus the spread of one-step displacements over the
    /// smallest tail index.
    pub error_bound: f64,
}

/// Inner approximation of the rotation set: hull of the tail Birkhoff
/// quotients `(F^n(x) − x)/n` over a `grid × grid` set of starts.
pub fn rotation_set(f: &TorusLift, params: &RotationSetParams) -> Result<RotationSetEstimate> {
    require_identity(f)?;
    let g = params.grid.max(1);
    let iterates = params.iterates.max(1);
    let tail = params.tail.clamp(1, iterates);
    let first = iterates - tail + 1;
    let starts: Vec<Point> = (0..g * g)
        .map(|i| [(i / g) as f64 / g as f64, (i % g) as f64 / g as f64])
        .collect();
    let runs: Vec<(Vec<Point>, DispBox)> = starts
        .par_iter()
        .map(|&x| {
            let mut p = x;
            let mut bbox = DispBox::default();
            let mut out = Vec::with_capacity(tail);
            for k in 1..=iterates {
                let q = f.eval(p);
                bbox.add(sub(q, p));
                p = q;
                if k >= first {
                    let d = sub(p, x);
                    out.push([d[0] / k as f64, d[1] / k as f64]);
                }
            }
            (out, bbox)
        })
        .collect();
    let mut samples = Vec::with_capacity(runs.len() * tail);
    let mut bbox = DispBox::default();
    for (s, b) in runs {
        samples.extend(s);
        bbox = bbox.merge(b);
    }
    Ok(estimate_from_samples(samples, params.point_tol, bbox.diameter() / first as f64))
}

fn estimate_from_samples(samples: Vec<Point>, point_tol: f64, spread: f64) -> RotationSetEstimate {
    let hull = hull::convex_hull(&samples);
    let diameter = hull::diameter(&hull);
    let is_point = diameter < point_tol;
    RotationSetEstimate {
        samples_count: samples.len(),
        point: is_point.then(|| hull::centroid(&samples)),
        samples,
        hull,
        diameter,
        is_point,
        error_bound: diameter + spread,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugationReport {
    pub rho_f: RotationSetEstimate,
    pub rho_conjugate: RotationSetEstimate,
    /// `A_H` applied to the hull of `ρ(F)`.
    pub image_hull: Vec<Point>,
    pub distance: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares `ρ(H F H⁻¹)` with `A_H ρ(F)`.
pub fn conjugate_rotation_set_check(f: &TorusLift, h: &TorusLift, params: &RotationSetParams) -> Result<ConjugationReport> {
    require_identity(f)?;
    let conj = h.compose(f)?.compose(&h.inverse()?)?;
    let rho_f = rotation_set(f, params)?;
    let rho_conjugate = rotation_set(&conj, params)?;
    let a = h.linear_part();
    let image_hull = hull::convex_hull(&rho_f.hull.iter().map(|p| a.apply_f64(*p)).collect::<Vec<_>>());
    let distance = hull::hausdorff(&image_hull, &rho_conjugate.hull);
    let norm = ((a.a * a.a + a.b * a.b + a.c * a.c + a.d * a.d) as f64).sqrt();
    let tolerance = rho_conjugate.error_bound + norm * rho_f.error_bound + 1e-9;
    Ok(ConjugationReport {
        pass: distance <= tolerance,
        rho_f,
        rho_conjugate,
        image_hull,
        distance,
        tolerance,
    })
}

/// Input to [`bs_rotation_constraint`].
#[derive(Clone, Copy, Debug)]
pub enum RhoInput {
    Exact([Q; 2]),
    Estimate { value: Point, error_bound: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintReport {
    pub consistent: bool,
    /// Integer vector `Q` with `n ρ = A_h ρ + Q`.
    pub q: Option<[i128; 2]>,
    /// Lattice point the input was matched to (equal to the input when exact).
    pub snapped: Option<[Rational; 2]>,
    pub residual: f64,
    /// The fixed point of `B = (1/n)(τ_Q ∘ A_h)`.
    pub fixed_point: Option<[Rational; 2]>,
}

fn to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Checks whether `ρ` can be the rotation vector of `f` when `h f h⁻¹ = fⁿ`
/// and `h` has linear part `A_h`: some integer `Q` must satisfy
/// `ρ = (A_h ρ + Q)/n`. Estimates are matched to the nearest admissible point
/// by rounding `nρ − A_h ρ` and are consistent when the distance is within
/// their error bound.
pub fn bs_rotation_constraint(rho: RhoInput, ah: &IntMatrix2, n: u32) -> Result<ConstraintReport> {
    ah.require_unimodular()?;
    if n < 2 {
        return Err(Error::InvalidParameter("n must be at least 2".into()));
    }
    let nq = Q::from_integer(n as i128);
    let a = ah.to_rational();
    let m = [[nq - a[0][0], -a[0][1]], [-a[1][0], nq - a[1][1]]];
    let fixed = |qv: [i128; 2]| {
        let b = AffineMapQ2::bs_transfer(ah, [qv[0] as i64, qv[1] as i64], n);
        affine_fixed_point(&b).map(|v| [Rational(v[0]), Rational(v[1])])
    };
    match rho {
        RhoInput::Exact(r) => {
            let qv = [m[0][0] * r[0] + m[0][1] * r[1], m[1][0] * r[0] + m[1][1] * r[1]];
            let integral = qv.iter().all(|v| v.is_integer());
            let q = integral.then(|| [qv[0].to_integer(), qv[1].to_integer()]);
            Ok(ConstraintReport {
                consistent: integral,
                q,
                snapped: integral.then_some([Rational(r[0]), Rational(r[1])]),
                residual: 0.0,
                fixed_point: q.and_then(fixed),
            })
        }
        RhoInput::Estimate { value, error_bound } => {
            let mf = m.map(|row| row.map(|e| to_f64(&e)));
            let qf = [
                mf[0][0] * value[0] + mf[0][1] * value[1],
                mf[1][0] * value[0] + mf[1][1] * value[1],
            ];
            let qv = [qf[0].round() as i128, qf[1].round() as i128];
            let snapped = solve2(m, [Q::from_integer(qv[0]), Q::from_integer(qv[1])])
                .ok_or_else(|| Error::InvalidParameter("n I − A_h is singular".into()))?;
            let residual = (value[0] - to_f64(&snapped[0])).abs().max((value[1] - to_f64(&snapped[1])).abs());
            Ok(ConstraintReport {
                consistent: residual <= error_bound,
                q: Some(qv),
                snapped: Some([Rational(snapped[0]), Rational(snapped[1])]),
                residual,
                fixed_point: fixed(qv),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn params(grid: usize, iterates: usize) -> RotationSetParams {
        RotationSetParams {
            grid,
            iterates,
            tail: 20,
            point_tol: 1e-3,
        }
    }

    #[test]
    fn translation_vectors() {
        let t = TorusLift::translation([0.25, 0.0]);
        let v = rotation_vector(&t, [0.3, 0.7], 1000).unwrap();
        assert!((v.value[0] - 0.25).abs() < 1e-15 && v.value[1] == 0.0);
        assert!(v.error_bound < 1e-15);

        let est = rotation_set(&TorusLift::translation([0.25, 1.0 / 3.0]), &params(4, 500)).unwrap();
        assert!(est.is_point);
        let p = est.point.unwrap();
        assert!((p[0] - 0.25).abs() < 1e-6 && (p[1] - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_non_identity() {
        let a = TorusLift::linear(IntMatrix2::new(2, 1, 1, 1)).unwrap();
        assert!(matches!(rotation_vector(&a, [0.0, 0.0], 10), Err(Error::NonIdentityLinearPart(_))));
        assert!(rotation_set(&a, &params(2, 10)).is_err());
        assert!(TorusLift::linear(IntMatrix2::new(2, 0, 0, 1)).is_err());
    }

    #[test]
    fn linear_parts_compose() {
        let a = TorusLift::linear(IntMatrix2::new(2, 1, 1, 1)).unwrap();
        let b = TorusLift::linear(IntMatrix2::new(0, 1, -1, 0)).unwrap();
        let ab = a.compose(&b).unwrap();
        assert_eq!(ab.linear_part(), IntMatrix2::new(2, 1, 1, 1) * IntMatrix2::new(0, 1, -1, 0));
        assert_eq!(ab.inverse().unwrap().linear_part(), ab.linear_part().inverse().unwrap());
        ab.validate(8).unwrap();
        ab.inverse().unwrap().validate(8).unwrap();
    }

    #[test]
    fn newton_inverse_of_perturbed_map() {
        use std::f64::consts::TAU;
        let f = TorusLift::new("wobble", IntMatrix2::new(2, 1, 1, 1), |p| {
            [
                2.0 * p[0] + p[1] + 0.05 * (TAU * p[1]).sin(),
                p[0] + p[1] + 0.03 * (TAU * (p[0] + p[1])).cos(),
            ]
        })
        .unwrap();
        f.validate(10).unwrap();
        let fi = f.inverse().unwrap();
        for i in 0..40 {
            let y = [i as f64 * 0.137 - 2.0, (i as f64 * 0.071).sin()];
            let x = fi.eval(y);
            let back = f.eval(x);
            assert!((back[0] - y[0]).abs() < 1e-12 && (back[1] - y[1]).abs() < 1e-12);
        }
        fi.validate(6).unwrap();
    }

    #[test]
    fn integer_shift_translates_estimate() {
        let t = TorusLift::translation([0.1, 0.2]);
        let a = rotation_set(&t, &params(3, 200)).unwrap();
        let b = rotation_set(&t.shifted([2, -1]), &params(3, 200)).unwrap();
        let (pa, pb) = (a.point.unwrap(), b.point.unwrap());
        assert!((pb[0] - pa[0] - 2.0).abs() < 1e-12 && (pb[1] - pa[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn swap_conjugation() {
        let f = TorusLift::translation([0.25, 0.5]);
        let h = TorusLift::linear(IntMatrix2::new(0, 1, 1, 0)).unwrap();
        let rep = conjugate_rotation_set_check(&f, &h, &params(3, 200)).unwrap();
        assert!(rep.pass);
        let p = rep.rho_conjugate.point.unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn constraint_exact() {
        let z = Q::zero();
        let rep = bs_rotation_constraint(RhoInput::Exact([z, z]), &IntMatrix2::IDENTITY, 2).unwrap();
        assert!(rep.consistent);
        assert_eq!(rep.q, Some([0, 0]));
        let half = Q::new(1, 2);
        // (n − 1) ρ ∈ ℤ²
        assert!(!bs_rotation_constraint(RhoInput::Exact([half, z]), &IntMatrix2::IDENTITY, 2).unwrap().consistent);
        let rep = bs_rotation_constraint(RhoInput::Exact([half, z]), &IntMatrix2::IDENTITY, 3).unwrap();
        assert!(rep.consistent);
        assert_eq!(rep.q, Some([1, 0]));
        assert_eq!(rep.fixed_point, Some([Rational(half), Rational(z)]));
    }

    #[test]
    fn constraint_snaps_estimates() {
        let rep = bs_rotation_constraint(
            RhoInput::Estimate {
                value: [0.001, -0.0004],
                error_bound: 2e-3,
            },
            &IntMatrix2::IDENTITY,
            3,
        )
        .unwrap();
        assert!(rep.consistent);
        assert_eq!(rep.snapped, Some([Rational(Q::zero()), Rational(Q::zero())]));
        assert!((rep.residual - 0.001).abs() < 1e-15);

        let rep = bs_rotation_constraint(
            RhoInput::Estimate {
                value: [0.2, 0.0],
                error_bound: 1e-3,
            },
            &IntMatrix2::IDENTITY,
            3,
        )
        .unwrap();
        assert!(!rep.consistent);
    }

    #[test]
    fn constraint_oracle_identity_lattice() {
        // oracle: with A_h = I the admissible set is (1/(n−1)) ℤ²
        for n in 2..7u32 {
            for p in -4i128..=4 {
                for q in -4i128..=4 {
                    let r = [Q::new(p, (n - 1) as i128), Q::new(q, 2 * (n - 1) as i128)];
                    let rep = bs_rotation_constraint(RhoInput::Exact(r), &IntMatrix2::IDENTITY, n).unwrap();
                    assert_eq!(rep.consistent, q % 2 == 0, "n={n} p={p} q={q}");
                }
            }
        }
    }
}
