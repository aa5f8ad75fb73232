//! Projective chart of the circle.
//!
//! The circle is `ℝ/ℤ` with coordinate `u`. The projective line `ℝ ∪ {∞}` is
//! charted by `x = tan(π(u − 1/2))`, so `u = 0` is `∞` and `u = 1/2` is `0`.
//! Near `∞` every evaluation goes through the reciprocal coordinate
//! `w = −1/x = tan(π t)`, `t = u` or `u − 1`, which keeps affine maps
//! well conditioned at their fixed point at infinity.

use std::f64::consts::PI;

/// Chart coordinate of `x ∈ ℝ ∪ {∞}` in `[0, 1)`. Infinite `x` maps to `0`.
pub fn to_u(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    unit_from_x(x)
}

/// Projective coordinate of the chart point `u`; `u ∈ ℤ` gives `+∞`.
pub fn from_u(u: f64) -> f64 {
    let fu = u - u.floor();
    if fu == 0.0 {
        f64::INFINITY
    } else if (0.25..=0.75).contains(&fu) {
        (PI * (fu - 0.5)).tan()
    } else {
        -1.0 / (PI * offset_from_infinity(fu)).tan()
    }
}

/// Signed offset from `∞` in `[−1/2, 1/2)`.
pub fn offset_from_infinity(u: f64) -> f64 {
    let fu = u - u.floor();
    if fu < 0.5 {
        fu
    } else {
        fu - 1.0
    }
}

/// Circular distance on `ℝ/ℤ`.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn unit_from_x(y: f64) -> f64 {
    if y.abs() <= 1.0 {
        0.5 + y.atan() / PI
    } else {
        unit_from_w(-1.0 / y)
    }
}

fn unit_from_w(w: f64) -> f64 {
    let t = w.atan() / PI;
    if t > 0.0 || (t == 0.0 && w.is_sign_positive()) {
        t
    } else {
        1.0 + t
    }
}

/// The affine map `x ↦ a·x + b` (`a > 0`) acting on `ℝ ∪ {∞}`, seen through the
/// projective chart. It fixes `∞`, so its lift fixes the integers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
}

impl Mobius {
    pub fn new(a: f64, b: f64) -> Self {
        assert!(a > 0.0, "orientation preserving affine maps need a > 0");
        Self { a, b }
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: 1.0 / self.a,
            b: -self.b / self.a,
        }
    }

    /// Action on the projective line itself.
    pub fn apply_projective(&self, x: f64) -> f64 {
        if x.is_infinite() {
            x
        } else {
            self.a * x + self.b
        }
    }

    /// Degree-one lift `ℝ → ℝ` of the chart map.
    pub fn lift(&self, u: f64) -> f64 {
        let m = u.floor();
        m + self.unit(u - m)
    }

    fn unit(&self, fu: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        if (0.25..=0.75).contains(&fu) {
            let x = (PI * (fu - 0.5)).tan();
            return unit_from_x(a * x + b);
        }
        let t = if fu < 0.5 { fu } else { fu - 1.0 };
        let w = (PI * t).tan();
        // In the reciprocal coordinate the map reads w ↦ w / (a − b w).
        let denom = a - b * w;
        if denom.abs() > w.abs() {
            let wp = w / denom;
            if wp == 0.0 {
                // only w = 0, the fixed point itself
                0.0
            } else if wp > 0.0 {
                wp.atan() / PI
            } else {
                1.0 + wp.atan() / PI
            }
        } else {
            unit_from_x(-denom / w)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_round_trip() {
        for &x in &[-1e9, -3.0, -1.0, -0.2, 0.0, 0.7, 1.0, 5.0, 2e8] {
            let u = to_u(x);
            assert!((0.0..1.0).contains(&u));
            let back = from_u(u);
            // u just below 1 only has ~1e-16 absolute resolution
            let rel = if x.abs() > 1e6 { 1e-6 } else { 1e-12 };
            assert!((back - x).abs() <= rel * x.abs().max(1.0), "{x} -> {u} -> {back}");
        }
        assert_eq!(to_u(f64::INFINITY), 0.0);
        assert_eq!(to_u(f64::NEG_INFINITY), 0.0);
        assert_eq!(to_u(0.0), 0.5);
    }

    #[test]
    fn mobius_matches_projective_action() {
        let m = Mobius::new(3.0, -0.5);
        for i in 1..200 {
            let u = i as f64 / 200.0;
            let x = from_u(u);
            let expected = to_u(m.apply_projective(x));
            let got = m.lift(u) - u.floor();
            assert!(circle_dist(got, expected) < 1e-13, "u={u}");
        }
    }

    #[test]
    fn lift_fixes_integers_and_is_monotone() {
        let m = Mobius::new(2.0, 1.0);
        assert_eq!(m.lift(0.0), 0.0);
        assert_eq!(m.lift(3.0), 3.0);
        let mut prev = m.lift(-1.0);
        for i in 1..=4000 {
            let u = -1.0 + i as f64 / 2000.0;
            let v = m.lift(u);
            assert!(v >= prev, "not monotone at {u}");
            assert!((m.lift(u + 1.0) - v - 1.0).abs() < 1e-12);
            prev = v;
        }
    }

    #[test]
    fn inverse_undoes_map() {
        let m = Mobius::new(5.0, 2.0);
        let inv = m.inverse();
        for i in 0..100 {
            let u = -0.3 + i as f64 * 0.0137;
            assert!((inv.lift(m.lift(u)) - u).abs() < 1e-13);
        }
    }
}
