//! Denjoy counterexamples: blow up the orbit of a rotation by inserting an
//! interval of length `c·r^|k|` at the `k`-th orbit point.
//!
//! The construction is bi-infinite. Orbit points are carried until the
//! inserted length drops below `1e-17`, i.e. below the resolution of an `f64`
//! on the unit interval, so the truncation is invisible to evaluation and the
//! map stays invertible. A genuinely finite insertion would not do: a
//! homeomorphism with finitely many inserted intervals must map the last one
//! onto a point.

use std::sync::Arc;

use serde::Serialize;

use crate::circle::CircleLift;
use crate::error::{Error, Result};

const LENGTH_CUTOFF: f64 = 1e-17;
const MAX_ORBIT: usize = 400;

/// Total length of all inserted intervals.
pub const INSERTED_MASS: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InsertedInterval {
    pub k: i64,
    pub start: f64,
    pub len: f64,
}

#[derive(Debug)]
struct Tables {
    alpha: f64,
    thetas: Vec<f64>,
    ks: Vec<i64>,
    lens: Vec<f64>,
    starts: Vec<f64>,
    /// `prefix[j]` is the total length of entries `0..=j`.
    prefix: Vec<f64>,
    /// sorted index of orbit point `k`, offset by `kmax`
    index: Vec<usize>,
    kmax: i64,
    scale: f64,
}

#[derive(Clone, Debug)]
pub struct Denjoy {
    alpha: f64,
    depth: usize,
    gap_ratio: f64,
    tables: Arc<Tables>,
}

impl Denjoy {
    pub fn new(alpha: f64, depth: usize, gap_ratio: f64) -> Result<Self> {
        if !(gap_ratio > 0.0 && gap_ratio < 1.0) {
            return Err(Error::InvalidParameter(format!("gap_ratio must lie in (0,1), got {gap_ratio}")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha must be finite".into()));
        }
        let alpha = alpha.rem_euclid(1.0);
        let r = gap_ratio;
        // Σ_k c r^|k| = c (1 + r)/(1 − r)
        let c = INSERTED_MASS * (1.0 - r) / (1.0 + r);
        let mut kmax = 0usize;
        while c * r.powi(kmax as i32) >= LENGTH_CUTOFF && kmax < MAX_ORBIT {
            kmax += 1;
        }
        let kmax = kmax.max(depth) as i64;

        let mut entries: Vec<(f64, i64, f64)> = (-kmax..=kmax)
            .map(|k| ((k as f64 * alpha).rem_euclid(1.0), k, c * r.powi(k.unsigned_abs() as i32)))
            .collect();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let total: f64 = entries.iter().map(|e| e.2).sum();
        let scale = 1.0 - total;

        let mut starts = Vec::with_capacity(entries.len());
        let mut prefix = Vec::with_capacity(entries.len());
        let mut acc = 0.0;
        for &(theta, _, len) in &entries {
            starts.push(scale * theta + acc);
            acc += len;
            prefix.push(acc);
        }
        let mut index = vec![0; entries.len()];
        for (j, e) in entries.iter().enumerate() {
            index[(e.1 + kmax) as usize] = j;
        }
        let tables = Tables {
            alpha,
            thetas: entries.iter().map(|e| e.0).collect(),
            ks: entries.iter().map(|e| e.1).collect(),
            lens: entries.iter().map(|e| e.2).collect(),
            starts,
            prefix,
            index,
            kmax,
            scale,
        };
        Ok(Self {
            alpha,
            depth,
            gap_ratio,
            tables: Arc::new(tables),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn gap_ratio(&self) -> f64 {
        self.gap_ratio
    }

    /// Number of orbit points carried on each side.
    pub fn orbit_cutoff(&self) -> i64 {
        self.tables.kmax
    }

    /// The inserted intervals with `|k| ≤ depth`, ordered by position.
    pub fn intervals(&self) -> Vec<InsertedInterval> {
        let t = &self.tables;
        (0..t.ks.len())
            .filter(|&j| t.ks[j].unsigned_abs() as usize <= self.depth)
            .map(|j| InsertedInterval {
                k: t.ks[j],
                start: t.starts[j],
                len: t.lens[j],
            })
            .collect()
    }

    pub fn inserted_mass(&self) -> f64 {
        self.intervals().iter().map(|i| i.len).sum()
    }

    /// `true` if `x` (mod 1) lies in the interior of a reported interval.
    pub fn in_gap_interior(&self, x: f64) -> bool {
        let r = x.rem_euclid(1.0);
        self.intervals().iter().any(|i| r > i.start && r < i.start + i.len)
    }

    /// The lift. With `depth = 0` this is the plain rotation.
    pub fn lift(&self) -> CircleLift {
        if self.depth == 0 {
            return CircleLift::rotation(self.alpha);
        }
        let (fw, bw) = (self.tables.clone(), self.tables.clone());
        let t = &self.tables;
        let kinks = t.starts.iter().zip(&t.lens).flat_map(|(s, l)| [*s, s + l]).collect();
        CircleLift::new(
            format!("denjoy(alpha={},depth={},ratio={})", self.alpha, self.depth, self.gap_ratio),
            move |x| fw.apply(x, 1),
        )
        .with_inverse(move |x| bw.apply(x, -1))
        .with_kinks(kinks)
    }
}

impl Tables {
    fn phi(&self, t: f64) -> f64 {
        let i = self.thetas.partition_point(|&th| th < t);
        self.scale * t + if i == 0 { 0.0 } else { self.prefix[i - 1] }
    }

    fn apply(&self, x: f64, dir: i64) -> f64 {
        let m = x.floor();
        let r = x - m;
        let j = self.starts.partition_point(|&s| s <= r).saturating_sub(1);
        let shift = dir as f64 * self.alpha;
        if r < self.starts[j] + self.lens[j] && r >= self.starts[j] {
            let k2 = self.ks[j] + dir;
            let theta = self.thetas[j];
            let t = theta + shift;
            let carry = t.floor();
            if k2.abs() <= self.kmax {
                let j2 = self.index[(k2 + self.kmax) as usize];
                // carry from the stored orbit points, so the affine piece and the
                // complement agree on where the integer part changes
                let carry = match dir {
                    1 if self.thetas[j2] < theta => 1.0,
                    -1 if self.thetas[j2] > theta => -1.0,
                    _ => 0.0,
                };
                return m + carry + self.starts[j2] + (r - self.starts[j]) * self.lens[j2] / self.lens[j];
            }
            return m + carry + self.phi(t - carry);
        }
        // Measure the offset from the gap's right end, so points just right of
        // I_k land just right of I_{k±1} without re-locating a rounded angle.
        let delta = (r - self.starts[j] - self.lens[j]) / self.scale;
        let k2 = self.ks[j] + dir;
        if k2.abs() <= self.kmax {
            let j2 = self.index[(k2 + self.kmax) as usize];
            let next = if j2 + 1 < self.thetas.len() {
                self.thetas[j2 + 1]
            } else {
                self.thetas[0] + 1.0
            };
            if self.thetas[j2] + delta < next {
                let carry = match dir {
                    1 if self.thetas[j2] < self.thetas[j] => 1.0,
                    -1 if self.thetas[j2] > self.thetas[j] => -1.0,
                    _ => 0.0,
                };
                return m + carry + self.starts[j2] + self.lens[j2] + self.scale * delta;
            }
        }
        let theta = (r - self.prefix[j]) / self.scale;
        let t = theta + shift;
        let carry = t.floor();
        m + carry + self.phi(t - carry)
    }
}

/// Denjoy lift with rotation number `alpha`.
pub fn denjoy_lift(alpha: f64, depth: usize, gap_ratio: f64) -> Result<CircleLift> {
    Ok(Denjoy::new(alpha, depth, gap_ratio)?.lift())
}

/// Fractional part of the golden mean.
pub fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::rotation_number;

    #[test]
    fn depth_zero_is_rotation() {
        let f = denjoy_lift(0.3, 0, 0.5).unwrap();
        for i in 0..10 {
            let x = i as f64 / 7.0;
            assert!((f.eval(x) - x - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_ratio() {
        assert!(Denjoy::new(0.3, 4, 1.0).is_err());
        assert!(Denjoy::new(0.3, 4, 0.0).is_err());
        assert!(Denjoy::new(0.3, 4, 1.5).is_err());
    }

    #[test]
    fn is_a_homeomorphism_lift() {
        let f = denjoy_lift(golden(), 12, 0.5).unwrap();
        f.validate(20_000).unwrap();
        let g = f.inverse().unwrap();
        for i in 0..5000 {
            let x = -1.0 + i as f64 / 2500.0;
            assert!((g.eval(f.eval(x)) - x).abs() < 1e-12, "x = {x}");
            assert!((f.eval(g.eval(x)) - x).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn intervals_map_onto_successors() {
        let d = Denjoy::new(golden(), 12, 0.5).unwrap();
        let f = d.lift();
        let ivs = d.intervals();
        assert_eq!(ivs.len(), 25);
        // c (1 + 2 Σ_{k=1}^{12} 2^-k) with c = 1/6
        assert!((d.inserted_mass() - (0.5 - 0.5f64.powi(11) / 6.0)).abs() < 1e-12);
        for iv in ivs.iter().filter(|i| i.k < 12) {
            let next = ivs.iter().find(|j| j.k == iv.k + 1).unwrap();
            let a = f.eval(iv.start).rem_euclid(1.0);
            let b = f.eval(iv.start + iv.len) - f.eval(iv.start);
            assert!((a - next.start).abs() < 1e-12);
            assert!((b - next.len).abs() < 1e-12);
        }
        let i0 = ivs.iter().find(|i| i.k == 0).unwrap();
        assert_eq!(i0.start, 0.0);
        assert!((i0.len - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_number_matches_alpha() {
        let f = denjoy_lift(golden(), 12, 0.5).unwrap();
        let est = rotation_number(&f, 100_000, 64, 1e-8);
        assert!(est.rational_witness.is_none());
        assert!((est.value - golden()).abs() < 1e-3);
    }

    #[test]
    fn orbits_avoid_gap_interiors() {
        let d = Denjoy::new(golden(), 12, 0.5).unwrap();
        let f = d.lift();
        // start inside a gap; after many steps the orbit accumulates on the Cantor set
        let mut x = 0.05;
        for _ in 0..10_000 {
            x = f.eval(x);
        }
        for _ in 0..2000 {
            x = f.eval(x);
            assert!(!d.in_gap_interior(x), "{x}");
        }
    }
}
