//! A lift on either the circle or the torus, so group actions and estimators
//! can be written once for both.
//!
//! Points are always `[f64; 2]`; on the circle the second coordinate is
//! ignored and kept at zero.

use serde::{Deserialize, Serialize};

use crate::chart::circle_dist;
use crate::circle::CircleLift;
use crate::error::{Error, Result};
use crate::torus::{Point, TorusLift};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    Circle,
    Torus,
}

impl Space {
    pub fn dim(self) -> usize {
        match self {
            Space::Circle => 1,
            Space::Torus => 2,
        }
    }

    /// Distance on `ℝ/ℤ` or `(ℝ/ℤ)²`.
    pub fn dist(self, a: Point, b: Point) -> f64 {
        match self {
            Space::Circle => circle_dist(a[0], b[0]),
            Space::Torus => circle_dist(a[0], b[0]).hypot(circle_dist(a[1], b[1])),
        }
    }

    /// Representative in `[0, 1)^dim`.
    pub fn reduce(self, p: Point) -> Point {
        let r = |x: f64| {
            let y = x.rem_euclid(1.0);
            if y >= 1.0 {
                0.0
            } else {
                y
            }
        };
        match self {
            Space::Circle => [r(p[0]), 0.0],
            Space::Torus => [r(p[0]), r(p[1])],
        }
    }

    /// `side^dim` evenly spaced points.
    pub fn grid(self, side: usize) -> Vec<Point> {
        let s = side.max(1);
        match self {
            Space::Circle => (0..s).map(|i| [i as f64 / s as f64, 0.0]).collect(),
            Space::Torus => (0..s * s)
                .map(|i| [(i / s) as f64 / s as f64, (i % s) as f64 / s as f64])
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Lift {
    Circle(CircleLift),
    Torus(TorusLift),
}

impl From<CircleLift> for Lift {
    fn from(f: CircleLift) -> Self {
        Lift::Circle(f)
    }
}

impl From<TorusLift> for Lift {
    fn from(f: TorusLift) -> Self {
        Lift::Torus(f)
    }
}

impl Lift {
    pub fn space(&self) -> Space {
        match self {
            Lift::Circle(_) => Space::Circle,
            Lift::Torus(_) => Space::Torus,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Lift::Circle(f) => f.label(),
            Lift::Torus(f) => f.label(),
        }
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        match self {
            Lift::Circle(f) => [f.eval(p[0]), 0.0],
            Lift::Torus(f) => f.eval(p),
        }
    }

    pub fn iterate(&self, mut p: Point, k: usize) -> Point {
        for _ in 0..k {
            p = self.apply(p);
        }
        p
    }

    pub fn inverse(&self) -> Result<Lift> {
        Ok(match self {
            Lift::Circle(f) => Lift::Circle(f.inverse()?),
            Lift::Torus(f) => Lift::Torus(f.inverse()?),
        })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Lift) -> Result<Lift> {
        match (self, other) {
            (Lift::Circle(f), Lift::Circle(g)) => Ok(Lift::Circle(f.compose(g))),
            (Lift::Torus(f), Lift::Torus(g)) => Ok(Lift::Torus(f.compose(g)?)),
            _ => Err(Error::SpaceMismatch(format!("cannot compose {} with {}", self.label(), other.label()))),
        }
    }

    pub fn is_smooth(&self) -> bool {
        match self {
            Lift::Circle(f) => f.is_smooth(),
            Lift::Torus(f) => f.is_smooth(),
        }
    }

    pub fn near_kink(&self, p: Point, radius: f64) -> bool {
        match self {
            Lift::Circle(f) => f.near_kink(p[0], radius),
            Lift::Torus(f) => f.near_kink(p, radius),
        }
    }

    pub fn as_torus(&self) -> Option<&TorusLift> {
        match self {
            Lift::Torus(f) => Some(f),
            Lift::Circle(_) => None,
        }
    }

    pub fn as_circle(&self) -> Option<&CircleLift> {
        match self {
            Lift::Circle(f) => Some(f),
            Lift::Torus(_) => None,
        }
    }

    /// Distance between `self(p)` and `p` on the quotient.
    pub fn displacement(&self, p: Point) -> f64 {
        self.space().dist(self.apply(p), p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances_wrap() {
        assert!((Space::Circle.dist([0.95, 3.0], [0.05, -1.0]) - 0.1).abs() < 1e-15);
        assert!((Space::Torus.dist([0.0, 0.9], [0.0, 0.1]) - 0.2).abs() < 1e-15);
        assert_eq!(Space::Torus.reduce([-0.25, 2.5]), [0.75, 0.5]);
        assert_eq!(Space::Circle.reduce([-1e-18, 7.0]), [0.0, 0.0]);
        assert_eq!(Space::Torus.grid(3).len(), 9);
    }

    #[test]
    fn mismatched_compose() {
        let c: Lift = CircleLift::identity().into();
        let t: Lift = TorusLift::identity().into();
        assert!(matches!(c.compose(&t), Err(Error::SpaceMismatch(_))));
        assert_eq!(c.compose(&c).unwrap().space(), Space::Circle);
    }
}
