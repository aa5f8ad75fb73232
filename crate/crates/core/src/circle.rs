//! Lifts of orientation-preserving circle homeomorphisms and their rotation
//! numbers. The circle is `ℝ/ℤ`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::Mobius;
use crate::error::{Error, Result};

pub type Map1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub const DEFAULT_CERT_TOL: f64 = 1e-8;
pub const DEFAULT_Q_MAX: u32 = 64;
const CERT_GRID: usize = 256;
const BISECTION_STEPS: usize = 60;

/// A degree-one, strictly increasing map `F: ℝ → ℝ` with `F(x + 1) = F(x) + 1`.
#[derive(Clone)]
pub struct CircleLift {
    label: String,
    eval: Map1,
    exact_inverse: Option<Map1>,
    /// Points of `[0, 1)` where the map is only piecewise smooth; `None` for smooth maps.
    kinks: Option<Arc<[f64]>>,
}

impl fmt::Debug for CircleLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleLift")
            .field("label", &self.label)
            .field("exact_inverse", &self.exact_inverse.is_some())
            .finish()
    }
}

impl CircleLift {
    pub fn new(label: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            eval: Arc::new(eval),
            exact_inverse: None,
            kinks: None,
        }
    }

    pub fn with_inverse(mut self, inv: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.exact_inverse = Some(Arc::new(inv));
        self
    }

    pub fn with_kinks(mut self, kinks: Vec<f64>) -> Self {
        self.kinks = Some(kinks.into());
        self
    }

    pub fn identity() -> Self {
        Self::new("id", |x| x).with_inverse(|x| x)
    }

    pub fn rotation(alpha: f64) -> Self {
        Self::new(format!("rot({alpha})"), move |x| x + alpha).with_inverse(move |x| x - alpha)
    }

    /// `x ↦ a x + b` on `ℝ ∪ {∞}` in the projective chart.
    pub fn mobius(m: Mobius) -> Self {
        let inv = m.inverse();
        Self::new(format!("affine({},{})", m.a, m.b), move |u| m.lift(u)).with_inverse(move |u| inv.lift(u))
    }

    /// Periodic piecewise-affine map through the given breakpoints.
    pub fn piecewise(breakpoints: &[(f64, f64)]) -> Result<Self> {
        let pl = PiecewiseLinear::new(breakpoints)?;
        let inv = pl.inverse();
        let kinks = pl.xs.iter().map(|x| x.rem_euclid(1.0)).collect();
        let label = format!("piecewise({} breakpoints)", pl.xs.len());
        Ok(Self::new(label, move |x| pl.eval(x))
            .with_inverse(move |y| inv.eval(y))
            .with_kinks(kinks))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn has_exact_inverse(&self) -> bool {
        self.exact_inverse.is_some()
    }

    pub fn is_smooth(&self) -> bool {
        self.kinks.is_none()
    }

    pub fn kinks(&self) -> Option<&[f64]> {
        self.kinks.as_deref()
    }

    /// `true` if `x` lies within `radius` (circularly) of a kink.
    pub fn near_kink(&self, x: f64, radius: f64) -> bool {
        self.kinks
            .as_ref()
            .is_some_and(|k| k.iter().any(|&s| crate::chart::circle_dist(s, x) < radius))
    }

    pub fn iterate(&self, mut x: f64, k: usize) -> f64 {
        for _ in 0..k {
            x = self.eval(x);
        }
        x
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &CircleLift) -> CircleLift {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let mut out = CircleLift::new(format!("{}∘{}", self.label, other.label), move |x| f(g(x)));
        if let (Some(fi), Some(gi)) = (&self.exact_inverse, &other.exact_inverse) {
            let (fi, gi) = (fi.clone(), gi.clone());
            out.exact_inverse = Some(Arc::new(move |y| gi(fi(y))));
        }
        out.kinks = merge_kinks(&self.kinks, &other.kinks);
        out
    }

    /// Inverse lift; bisection unless an exact inverse was supplied.
    pub fn inverse(&self) -> Result<CircleLift> {
        let label = format!("{}^-1", self.label);
        if let Some(inv) = &self.exact_inverse {
            return Ok(CircleLift {
                label,
                eval: inv.clone(),
                exact_inverse: Some(self.eval.clone()),
                kinks: self.kinks.clone(),
            });
        }
        self.validate(1000)?;
        let f = self.eval.clone();
        let c0 = f(0.0);
        let inv = move |y: f64| {
            // F(x) − x − F(0) ∈ (−1, 1), so the preimage lies in this bracket.
            let (mut lo, mut hi) = (y - c0 - 1.0, y - c0 + 1.0);
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid) < y {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        Ok(CircleLift {
            label,
            eval: Arc::new(inv),
            exact_inverse: Some(self.eval.clone()),
            kinks: self.kinks.clone(),
        })
    }

    /// `F^k` for any integer `k`.
    pub fn pow(&self, k: i32) -> Result<CircleLift> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let m = k.unsigned_abs() as usize;
        let f = base.eval.clone();
        let mut out = CircleLift::new(format!("{}^{k}", self.label), move |x| {
            let mut y = x;
            for _ in 0..m {
                y = f(y);
            }
            y
        });
        if let Some(inv) = base.exact_inverse.clone() {
            out.exact_inverse = Some(Arc::new(move |x| {
                let mut y = x;
                for _ in 0..m {
                    y = inv(y);
                }
                y
            }));
        }
        out.kinks = base.kinks;
        Ok(out)
    }

    /// Grid check of strict monotonicity and of `F(x + 1) = F(x) + 1`.
    pub fn validate(&self, grid: usize) -> Result<()> {
        let grid = grid.max(2);
        let mut prev = self.eval(-1.0 / grid as f64);
        for i in 0..=grid {
            let x = i as f64 / grid as f64;
            let y = self.eval(x);
            if !(y > prev) || !y.is_finite() {
                return Err(Error::NotMonotone {
                    label: self.label.clone(),
                    at: x,
                });
            }
            let defect = (self.eval(x + 1.0) - y - 1.0).abs();
            if defect > 1e-10 {
                return Err(Error::PeriodDefect {
                    label: self.label.clone(),
                    at: [x, 0.0],
                    defect,
                });
            }
            prev = y;
        }
        Ok(())
    }
}

fn merge_kinks(a: &Option<Arc<[f64]>>, b: &Option<Arc<[f64]>>) -> Option<Arc<[f64]>> {
    match (a, b) {
        (None, None) => None,
        (Some(k), None) | (None, Some(k)) => Some(k.clone()),
        (Some(x), Some(y)) => Some(x.iter().chain(y.iter()).copied().collect()),
    }
}

/// Periodic piecewise-affine lift through `(x_i, y_i)`.
#[derive(Clone, Debug)]
struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("piecewise map needs at least one breakpoint".into()));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]) && v[v.len() - 1] < v[0] + 1.0;
        if !increasing(&xs) || !increasing(&ys) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "breakpoints must be strictly increasing within one period".into(),
            ));
        }
        Ok(Self { xs, ys })
    }

    fn inverse(&self) -> Self {
        Self {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let x0 = self.xs[0];
        let k = (x - x0).floor();
        let r = x - k;
        let i = self.xs.partition_point(|&v| v <= r) - 1;
        let (xa, ya) = (self.xs[i], self.ys[i]);
        let (xb, yb) = if i + 1 < self.xs.len() {
            (self.xs[i + 1], self.ys[i + 1])
        } else {
            (x0 + 1.0, self.ys[0] + 1.0)
        };
        ya + (r - xa) * (yb - ya) / (xb - xa) + k
    }
}

/// `(p, q)` with `F^q(x) = x + p` certified at `point` to within `residual`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalWitness {
    pub p: i64,
    pub q: u32,
    pub point: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RotationNumberEstimate {
    pub value: f64,
    pub iterates_used: usize,
    pub rational_witness: Option<RationalWitness>,
    pub error_bound: f64,
}

impl RotationNumberEstimate {
    pub fn is_rational(&self) -> bool {
        self.rational_witness.is_some()
    }
}

/// Rotation number `lim F^N(x)/N mod 1`, with a search for a periodic-point
/// certificate `F^q(x) = x + p`, `q ≤ q_max`.
pub fn rotation_number(f: &CircleLift, iterates: usize, q_max: u32, tol: f64) -> RotationNumberEstimate {
    let n = iterates.max(1);
    let x_n = f.iterate(0.0, n);
    let mut value = (x_n / n as f64).rem_euclid(1.0);
    let witness = certify(f, q_max, tol);
    if let Some(w) = &witness {
        value = w.p as f64 / w.q as f64;
    }
    RotationNumberEstimate {
        value,
        iterates_used: n,
        rational_witness: witness,
        error_bound: 1.0 / n as f64 + tol,
    }
}

fn certify(f: &CircleLift, q_max: u32, tol: f64) -> Option<RationalWitness> {
    let grid: Vec<f64> = (0..CERT_GRID).map(|i| i as f64 / CERT_GRID as f64).collect();
    for q in 1..=q_max {
        let disp = |x: f64| f.iterate(x, q as usize) - x;
        let d: Vec<f64> = grid.par_iter().map(|&x| disp(x)).collect();
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() || !hi.is_finite() {
            return None;
        }
        let (p_lo, p_hi) = ((lo - tol).ceil() as i64, (hi + tol).floor() as i64);
        for p in p_lo..=p_hi {
            let pf = p as f64;
            if let Some(i) = (0..CERT_GRID).find(|&i| (d[i] - pf).abs() < tol) {
                return Some(witness(p, q, grid[i], (d[i] - pf).abs()));
            }
            for i in 0..CERT_GRID {
                let (xa, da) = (grid[i], d[i] - pf);
                let (xb, db) = if i + 1 < CERT_GRID {
                    (grid[i + 1], d[i + 1] - pf)
                } else {
                    (1.0, d[0] - pf)
                };
                if da * db >= 0.0 {
                    continue;
                }
                let (mut a, mut b) = (xa, xb);
                let sa = da.signum();
                for _ in 0..BISECTION_STEPS {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    if (disp(m) - pf).signum() == sa {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                let x = 0.5 * (a + b);
                let r = (disp(x) - pf).abs();
                if r < tol {
                    return Some(witness(p, q, x, r));
                }
            }
        }
    }
    None
}

fn witness(p: i64, q: u32, point: f64, residual: f64) -> RationalWitness {
    let g = num_integer::gcd(p, q as i64).max(1);
    let (p, q) = (p / g, q as i64 / g);
    RationalWitness {
        p: p.rem_euclid(q),
        q: q as u32,
        point,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{from_u, to_u};

    fn grid_max(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        (0..n).map(|i| f(i as f64 / n as f64)).fold(0.0, f64::max)
    }

    fn bumpy() -> CircleLift {
        use std::f64::consts::TAU;
        CircleLift::new("bumpy", |x| x + 0.3 + 0.1 * (TAU * x).sin())
    }

    #[test]
    fn composition_of_rotations() {
        let g = bumpy();
        let id = CircleLift::identity().compose(&g);
        assert_eq!(grid_max(|x| (id.eval(x) - g.eval(x)).abs(), 100), 0.0);
        let r = CircleLift::rotation(0.25).compose(&CircleLift::rotation(1.0 / 3.0));
        assert!(grid_max(|x| (r.eval(x) - x - 7.0 / 12.0).abs(), 100) < 1e-15);
    }

    #[test]
    fn numeric_inverse_round_trip() {
        let f = bumpy();
        let fi = f.inverse().unwrap();
        let back = f.compose(&fi);
        assert!(grid_max(|x| (back.eval(x) - x).abs(), 1000) < 1e-10);
        let fii = fi.inverse().unwrap();
        assert!(grid_max(|x| (fii.eval(x) - f.eval(x)).abs(), 1000) < 1e-9);
        let fi_only = CircleLift::new("bare", move |y| fi.eval(y));
        let fii = fi_only.inverse().unwrap();
        assert!(grid_max(|x| (fii.eval(x) - f.eval(x)).abs(), 1000) < 1e-9);
    }

    #[test]
    fn inverse_of_rotation_and_mobius() {
        let r = CircleLift::rotation(0.3).inverse().unwrap();
        assert!((r.eval(0.5) - 0.2).abs() < 1e-15);
        let h = CircleLift::mobius(Mobius::new(2.0, 0.0)).inverse().unwrap();
        assert!((h.eval(to_u(2.0)) - to_u(1.0)).abs() < 1e-14);
        assert!((from_u(h.eval(to_u(2.0))) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_maps() {
        let flat = CircleLift::new("flat", |x| x.floor());
        assert!(matches!(flat.validate(100), Err(Error::NotMonotone { .. })));
        assert!(flat.inverse().is_err());
        let drift = CircleLift::new("drift", |x| 1.5 * x);
        assert!(matches!(drift.validate(100), Err(Error::PeriodDefect { .. })));
        bumpy().validate(1000).unwrap();
    }

    #[test]
    fn rational_rotations_get_witnesses() {
        let est = rotation_number(&CircleLift::rotation(1.0 / 3.0), 10_000, 64, 1e-8);
        let w = est.rational_witness.unwrap();
        assert_eq!((w.p, w.q), (1, 3));
        assert!((est.value - 1.0 / 3.0).abs() < 1e-15);

        let est = rotation_number(&CircleLift::rotation(-0.25), 1000, 64, 1e-8);
        assert_eq!(est.rational_witness.map(|w| (w.p, w.q)), Some((3, 4)));
    }

    #[test]
    fn irrational_rotation() {
        let ln2 = std::f64::consts::LN_2;
        let est = rotation_number(&CircleLift::rotation(ln2), 100_000, 50, 1e-8);
        assert!(est.rational_witness.is_none());
        assert!((est.value - ln2).abs() < 1e-4);
        assert!((est.error_bound - 1e-5 - 1e-8).abs() < 1e-18);
    }

    #[test]
    fn witness_by_sign_change() {
        // Phase-locked map: rotation number 1/2 with isolated periodic points.
        use std::f64::consts::TAU;
        let f = CircleLift::new("locked", |x| x + 0.5 + 0.05 * (TAU * 2.0 * x + 0.3).sin());
        let est = rotation_number(&f, 10_000, 64, 1e-8);
        let w = est.rational_witness.unwrap();
        assert_eq!((w.p, w.q), (1, 2));
        assert!(w.residual < 1e-8);
        assert!((f.iterate(w.point, 2) - w.point - 1.0).abs() < 1e-8);
    }

    #[test]
    fn piecewise_lift_and_inverse() {
        let f = CircleLift::piecewise(&[(0.0, 0.1), (0.5, 0.3), (0.75, 0.9)]).unwrap();
        f.validate(1000).unwrap();
        assert!((f.eval(0.25) - 0.2).abs() < 1e-15);
        assert!((f.eval(1.25) - 1.2).abs() < 1e-15);
        assert!((f.eval(-0.1) - (0.9 + 0.2 * 0.15 / 0.25 - 1.0)).abs() < 1e-15);
        let g = f.inverse().unwrap();
        assert!(grid_max(|x| (g.eval(f.eval(x)) - x).abs(), 1000) < 1e-14);
        assert!(f.near_kink(0.501, 0.01));
        assert!(!f.near_kink(0.6, 0.01));
        assert!(CircleLift::piecewise(&[(0.0, 0.5), (0.5, 0.2)]).is_err());
    }

    #[test]
    fn powers() {
        let f = bumpy();
        let f3 = f.pow(3).unwrap();
        let fm2 = f.pow(-2).unwrap();
        for i in 0..50 {
            let x = i as f64 * 0.02;
            assert!((f3.eval(x) - f.iterate(x, 3)).abs() < 1e-14);
            assert!((f.iterate(fm2.eval(x), 2) - x).abs() < 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn lift(a: f64, b: f64, c: f64) -> CircleLift {
            use std::f64::consts::TAU;
            // 2π|b| + 4π|c| < 1 keeps the derivative positive
            CircleLift::new("trig", move |x| x + a + b * (TAU * x).sin() + c * (2.0 * TAU * x).cos())
        }

        proptest! {
            #[test]
            fn monotone_degree_one(a in -1.0f64..1.0, b in -0.05f64..0.05, c in -0.05f64..0.05, x in -3.0f64..3.0, t in 0.001f64..0.999) {
                let f = lift(a, b, c);
                let y = x + t;
                prop_assert!(f.eval(x) < f.eval(y));
                prop_assert!(f.eval(y) < f.eval(x) + 1.0);
                prop_assert!((f.eval(x + 1.0) - f.eval(x) - 1.0).abs() < 1e-10);
                let fi = f.inverse().unwrap();
                prop_assert!((fi.eval(x + 1.0) - fi.eval(x) - 1.0).abs() < 1e-10);
                prop_assert!((f.eval(fi.eval(x)) - x).abs() < 1e-12);
            }

            #[test]
            fn conjugation_invariance(a in 0.0f64..1.0, b in -0.05f64..0.05, hb in -0.05f64..0.05) {
                let f = lift(a, b, 0.0);
                let h = lift(0.1, hb, 0.03);
                let hfh = h.compose(&f).compose(&h.inverse().unwrap());
                let r1 = rotation_number(&f, 2000, 8, 1e-8);
                let r2 = rotation_number(&hfh, 2000, 8, 1e-8);
                let d = crate::chart::circle_dist(r1.value, r2.value);
                prop_assert!(d <= r1.error_bound + r2.error_bound, "{d} {r1:?} {r2:?}");
            }
        }
    }
}
