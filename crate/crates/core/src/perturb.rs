//! Small smooth perturbations of the identity on the torus, `φ = Id + εV`,
//! and the relation-preserving ways of applying them.

use std::f64::consts::{E, TAU};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bsgroup::BSAction;
use crate::error::{Error, Result};
use crate::gl2z::IntMatrix2;
use crate::space::Lift;
use crate::torus::{Point, TorusLift};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Support {
    Global,
    /// `C^∞` bump in the first coordinate, centred at `center` with the given
    /// radius (mod 1).
    Band { center: f64, radius: f64 },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Mode {
    pub k: [i32; 2],
    pub amp: [f64; 2],
    pub phase: [f64; 2],
}

/// `V(x, y) = β(x) Σ amp ⊙ sin(2π(k·p) + phase)`, with `Σ|amp_c| = 1` per
/// component and `0 ≤ β ≤ 1`, so `|εV|_∞ ≤ ε`.
#[derive(Clone, Debug, Serialize)]
pub struct BumpField {
    pub eps: f64,
    pub support: Support,
    pub modes: Vec<Mode>,
    pub seed: Option<u64>,
}

const MODES: usize = 4;
const MAX_WAVENUMBER: i32 = 2;

fn bump(x: f64, center: f64, radius: f64) -> f64 {
    let d = (x - center).rem_euclid(1.0);
    let s = d.min(1.0 - d) / radius;
    if s >= 1.0 {
        0.0
    } else {
        (E * (-1.0 / (1.0 - s * s)).exp()).min(1.0)
    }
}

impl BumpField {
    pub fn new(eps: f64, support: Support, modes: Vec<Mode>) -> Result<Self> {
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::InvalidParameter(format!("perturbation size must be ≥ 0, got {eps}")));
        }
        if let Support::Band { radius, .. } = support {
            if !(radius > 0.0 && radius <= 0.5) {
                return Err(Error::InvalidParameter(format!("bump radius must lie in (0, 1/2], got {radius}")));
            }
        }
        let mut modes = modes;
        for c in 0..2 {
            let s: f64 = modes.iter().map(|m| m.amp[c].abs()).sum();
            if s > 0.0 {
                for m in &mut modes {
                    m.amp[c] /= s;
                }
            }
        }
        Ok(Self {
            eps,
            support,
            modes,
            seed: None,
        })
    }

    /// Four random Fourier modes with wavenumbers in `[−2, 2]²`.
    pub fn random(seed: u64, eps: f64, support: Support) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = (0..MODES)
            .map(|_| Mode {
                k: [
                    rng.gen_range(-MAX_WAVENUMBER..=MAX_WAVENUMBER),
                    rng.gen_range(-MAX_WAVENUMBER..=MAX_WAVENUMBER),
                ],
                amp: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                phase: [rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)],
            })
            .collect();
        let mut f = Self::new(eps, support, modes)?;
        f.seed = Some(seed);
        Ok(f)
    }

    pub fn displacement(&self, p: Point) -> Point {
        let b = match self.support {
            Support::Global => 1.0,
            Support::Band { center, radius } => bump(p[0], center, radius),
        };
        if b == 0.0 {
            return [0.0, 0.0];
        }
        let mut v = [0.0, 0.0];
        for m in &self.modes {
            let arg = TAU * (m.k[0] as f64 * p[0] + m.k[1] as f64 * p[1]);
            for c in 0..2 {
                v[c] += m.amp[c] * (arg + m.phase[c]).sin();
            }
        }
        [self.eps * b * v[0], self.eps * b * v[1]]
    }

    pub fn apply(&self, p: Point) -> Point {
        let v = self.displacement(p);
        [p[0] + v[0], p[1] + v[1]]
    }

    /// Solves `y + εV(y) = p` by fixed-point iteration (a contraction for
    /// the sizes used here).
    pub fn apply_inverse(&self, p: Point) -> Point {
        let mut y = p;
        for _ in 0..200 {
            let v = self.displacement(y);
            let next = [p[0] - v[0], p[1] - v[1]];
            let step = (next[0] - y[0]).abs().max((next[1] - y[1]).abs());
            y = next;
            if step <= 1e-17 {
                break;
            }
        }
        y
    }

    /// Sup-norm of `εV` on a grid.
    pub fn c0_size(&self, grid: usize) -> f64 {
        let g = grid.max(1);
        (0..g * g)
            .map(|k| {
                let v = self.displacement([(k / g) as f64 / g as f64, (k % g) as f64 / g as f64]);
                v[0].abs().max(v[1].abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn to_lift(&self) -> TorusLift {
        let (a, b) = (Arc::new(self.clone()), Arc::new(self.clone()));
        TorusLift::new(format!("φ(eps={})", self.eps), IntMatrix2::IDENTITY, move |p| a.apply(p))
            .expect("identity is unimodular")
            .with_inverse(move |p| b.apply_inverse(p))
    }
}

/// `φ ∘ g ∘ φ⁻¹`.
pub fn conjugate_lift(g: &TorusLift, phi: &BumpField) -> Result<TorusLift> {
    let p = phi.to_lift();
    p.compose(g)?.compose(&p.inverse()?)
}

/// Conjugates both generators by `φ`; the relation is re-verified.
pub fn conjugate_action(action: &BSAction, phi: &BumpField) -> Result<BSAction> {
    let (Some(f), Some(h)) = (action.f.as_torus(), action.h.as_torus()) else {
        return Err(Error::SpaceMismatch("bump conjugation is implemented on the torus".into()));
    };
    let f2 = conjugate_lift(f, phi)?;
    let h2 = conjugate_lift(h, phi)?;
    BSAction::new(
        format!("{}^φ(eps={},seed={:?})", action.label, phi.eps, phi.seed),
        action.n,
        Lift::from(f2),
        Lift::from(h2),
    )
}

/// `φ ∘ h`, which in general breaks the relation; useful for the
/// invariant-circle solver alone.
pub fn perturb_after(h: &TorusLift, phi: &BumpField) -> Result<TorusLift> {
    phi.to_lift().compose(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{morse_smale_example, standard_torus};
    use proptest::prelude::*;

    #[test]
    fn same_seed_same_field() {
        let a = BumpField::random(7, 1e-2, Support::Global).unwrap();
        let b = BumpField::random(7, 1e-2, Support::Global).unwrap();
        let c = BumpField::random(8, 1e-2, Support::Global).unwrap();
        let p = [0.3, 0.9];
        assert_eq!(a.apply(p), b.apply(p));
        assert_ne!(a.apply(p), c.apply(p));
    }

    #[test]
    fn band_support_is_respected() {
        let f = BumpField::random(1, 1e-2, Support::Band { center: 0.0, radius: 0.25 }).unwrap();
        assert_eq!(f.displacement([0.5, 0.3]), [0.0, 0.0]);
        assert_eq!(f.displacement([0.3, 0.7]), [0.0, 0.0]);
        assert!(f.c0_size(64) <= 1e-2);
        assert!(f.c0_size(64) > 0.0);
    }

    #[test]
    fn conjugated_actions_keep_the_relation() {
        for seed in 0..3 {
            let phi = BumpField::random(seed, 1e-3, Support::Global).unwrap();
            conjugate_action(&morse_smale_example(2).unwrap(), &phi).unwrap();
            let phi = BumpField::random(seed, 1e-2, Support::Band { center: 0.0, radius: 0.25 }).unwrap();
            conjugate_action(&standard_torus(2).unwrap(), &phi).unwrap();
        }
    }

    proptest! {
        #[test]
        fn inverse_round_trips(seed in 0u64..1000, x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let f = BumpField::random(seed, 1e-2, Support::Global).unwrap();
            let p = f.apply_inverse([x, y]);
            let q = f.apply(p);
            prop_assert!((q[0] - x).abs() < 1e-14 && (q[1] - y).abs() < 1e-14);
        }

        #[test]
        fn periodic(seed in 0u64..1000, x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let f = BumpField::random(seed, 1e-2, Support::Band { center: 0.0, radius: 0.3 }).unwrap();
            let a = f.displacement([x, y]);
            let b = f.displacement([x + 1.0, y - 1.0]);
            prop_assert!((a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
        }
    }
}
