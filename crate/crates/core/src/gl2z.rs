//! Exact 2×2 integer and rational matrix algebra: orders of elements of
//! `GL(2,ℤ)`, bounded conjugacy search, the compatibility condition
//! `A_h A_f A_h⁻¹ = A_fⁿ`, and fixed points of rational affine maps.
//!
//! Nothing in here uses floating point.

use std::fmt;
use std::ops::Mul;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational used by the affine machinery.
pub type Q = Ratio<i128>;

/// Per-coefficient bound used by [`conjugate_in_gl2z`] when none is given.
/// For the usual two-dimensional solution lattice this is about 10⁴
/// coefficient combinations.
pub const DEFAULT_CONJUGACY_BOUND: i64 = 50;

/// Row-major integer matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntMatrix2 {
    pub const IDENTITY: Self = Self::new(1, 0, 0, 1);

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { a, b, c, d }
    }

    pub fn from_rows(rows: [[i64; 2]; 2]) -> Self {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn rows(&self) -> [[i64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs() == 1
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    /// Fails unless `|det| = 1`.
    pub fn require_unimodular(&self) -> Result<()> {
        if self.is_unimodular() {
            Ok(())
        } else {
            Err(Error::NotUnimodular(self.to_string(), self.det()))
        }
    }

    /// Exact inverse of a unimodular matrix.
    pub fn inverse(&self) -> Result<Self> {
        self.require_unimodular()?;
        let det = self.det();
        Ok(Self::new(self.d * det, -self.b * det, -self.c * det, self.a * det))
    }

    pub fn checked_mul(&self, o: &Self) -> Option<Self> {
        let m = |x: i64, y: i64, z: i64, w: i64| x.checked_mul(y)?.checked_add(z.checked_mul(w)?);
        Some(Self::new(
            m(self.a, o.a, self.b, o.c)?,
            m(self.a, o.b, self.b, o.d)?,
            m(self.c, o.a, self.d, o.c)?,
            m(self.c, o.b, self.d, o.d)?,
        ))
    }

    pub fn checked_pow(&self, k: u32) -> Option<Self> {
        let mut acc = Self::IDENTITY;
        let mut base = *self;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Some(acc)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        self.checked_pow(k).ok_or(Error::Overflow("raising an integer matrix to a power"))
    }

    pub fn apply(&self, v: [i64; 2]) -> [i64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn apply_f64(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a as f64 * v[0] + self.b as f64 * v[1],
            self.c as f64 * v[0] + self.d as f64 * v[1],
        ]
    }

    pub fn to_rational(&self) -> [[Q; 2]; 2] {
        let q = |x: i64| Q::from_integer(x as i128);
        [[q(self.a), q(self.b)], [q(self.c), q(self.d)]]
    }
}

impl Mul for IntMatrix2 {
    type Output = IntMatrix2;

    fn mul(self, o: Self) -> Self {
        self.checked_mul(&o).expect("integer matrix product overflowed")
    }
}

impl fmt::Display for IntMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

impl Serialize for IntMatrix2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = <[[i64; 2]; 2]>::deserialize(d)?;
        Ok(Self::from_rows(rows))
    }
}

/// JSON form of a rational: `{"num": p, "den": q}` with `q > 0`, `gcd(p, q) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rational(pub Q);

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            num: i128,
            den: i128,
        }
        // Ratio keeps itself reduced with a positive denominator.
        Repr {
            num: *self.0.numer(),
            den: *self.0.denom(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            num: i128,
            den: i128,
        }
        let r = Repr::deserialize(d)?;
        if r.den <= 0 {
            return Err(D::Error::custom("rational denominator must be positive"));
        }
        let q = Q::new(r.num, r.den);
        if *q.denom() != r.den {
            return Err(D::Error::custom("rational is not in lowest terms"));
        }
        Ok(Rational(q))
    }
}

/// Least `N ≤ 6` with `Aᴺ = I`, or `None` when `A` has infinite order.
///
/// Orders of finite-order elements of `GL(2,ℤ)` lie in `{1, 2, 3, 4, 6}`, so
/// checking powers up to six decides the question.
pub fn finite_order(a: &IntMatrix2) -> Result<Option<u32>> {
    a.require_unimodular()?;
    let mut p = *a;
    for k in 1..=6u32 {
        if p.is_identity() {
            return Ok(Some(k));
        }
        p = p.checked_mul(a).ok_or(Error::Overflow("powering a matrix"))?;
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", content = "conjugator")]
pub enum Conjugacy {
    Found(IntMatrix2),
    NoneWithinBound,
}

/// Searches for `X ∈ GL(2,ℤ)` with `X B X⁻¹ = A`.
///
/// `XB = AX` is a homogeneous 4×4 integer system; its solution lattice is
/// computed exactly and integer combinations of the basis with coefficients
/// in `[−bound, bound]` are enumerated shell by shell. Among the unimodular
/// solutions of the first non-empty shell the one with the smallest entries
/// (then the lexicographically largest) is returned.
pub fn conjugate_in_gl2z(a: &IntMatrix2, b: &IntMatrix2, bound: i64) -> Result<Conjugacy> {
    a.require_unimodular()?;
    b.require_unimodular()?;
    if bound < 0 {
        return Err(Error::InvalidParameter("bound must be non-negative".into()));
    }
    // unknown x = (x11, x12, x21, x22); (XB − AX) x = 0
    let (a11, a12, a21, a22) = (a.a as i128, a.b as i128, a.c as i128, a.d as i128);
    let (b11, b12, b21, b22) = (b.a as i128, b.b as i128, b.c as i128, b.d as i128);
    let system: [[i128; 4]; 4] = [
        [b11 - a11, b21, -a12, 0],
        [b12, b22 - a11, 0, -a12],
        [-a21, 0, b11 - a22, b21],
        [0, -a21, b12, b22 - a22],
    ];
    let basis = integer_kernel(system);
    if basis.is_empty() {
        return Ok(Conjugacy::NoneWithinBound);
    }

    let dim = basis.len();
    for shell in 0..=bound {
        let mut best: Option<IntMatrix2> = None;
        for_each_in_shell(dim, shell, &mut |coeffs| {
            let mut x = [0i128; 4];
            for (c, v) in coeffs.iter().zip(&basis) {
                for k in 0..4 {
                    x[k] += *c as i128 * v[k];
                }
            }
            let det = x[0] * x[3] - x[1] * x[2];
            if det.abs() != 1 || x.iter().any(|e| e.abs() > i64::MAX as i128) {
                return;
            }
            let cand = IntMatrix2::new(x[0] as i64, x[1] as i64, x[2] as i64, x[3] as i64);
            if verify_conjugator(&cand, a, b) && better(&cand, best.as_ref()) {
                best = Some(cand);
            }
        });
        if let Some(x) = best {
            return Ok(Conjugacy::Found(x));
        }
    }
    Ok(Conjugacy::NoneWithinBound)
}

/// Exact check of `X B X⁻¹ = A`.
pub fn verify_conjugator(x: &IntMatrix2, a: &IntMatrix2, b: &IntMatrix2) -> bool {
    let Ok(xi) = x.inverse() else { return false };
    x.checked_mul(b)
        .and_then(|xb| xb.checked_mul(&xi))
        .is_some_and(|m| m == *a)
}

fn better(cand: &IntMatrix2, best: Option<&IntMatrix2>) -> bool {
    let key = |m: &IntMatrix2| {
        let l1 = m.a.abs() + m.b.abs() + m.c.abs() + m.d.abs();
        (std::cmp::Reverse(l1), (m.a, m.b, m.c, m.d))
    };
    match best {
        None => true,
        Some(b) => key(cand) > key(b),
    }
}

fn for_each_in_shell(dim: usize, shell: i64, visit: &mut dyn FnMut(&[i64])) {
    let mut coeffs = vec![-shell; dim];
    loop {
        if coeffs.iter().any(|c| c.abs() == shell) {
            visit(&coeffs);
        }
        let mut i = 0;
        loop {
            if i == dim {
                return;
            }
            if coeffs[i] < shell {
                coeffs[i] += 1;
                break;
            }
            coeffs[i] = -shell;
            i += 1;
        }
    }
}

/// Basis of `{x ∈ ℤ⁴ : M x = 0}` by unimodular column reduction.
fn integer_kernel(mut m: [[i128; 4]; 4]) -> Vec<[i128; 4]> {
    let mut u = [[0i128; 4]; 4];
    for (i, row) in u.iter_mut().enumerate() {
        row[i] = 1;
    }
    let col_op = |m: &mut [[i128; 4]; 4], dst: usize, src: usize, q: i128| {
        for row in m.iter_mut() {
            row[dst] -= q * row[src];
        }
    };
    let swap = |m: &mut [[i128; 4]; 4], i: usize, j: usize| {
        for row in m.iter_mut() {
            row.swap(i, j);
        }
    };
    let mut pivot = 0;
    for r in 0..4 {
        if pivot == 4 {
            break;
        }
        for j in pivot + 1..4 {
            while m[r][j] != 0 {
                let q = m[r][pivot].div_euclid(m[r][j]);
                col_op(&mut m, pivot, j, q);
                col_op(&mut u, pivot, j, q);
                swap(&mut m, pivot, j);
                swap(&mut u, pivot, j);
            }
        }
        if m[r][pivot] != 0 {
            pivot += 1;
        }
    }
    (pivot..4)
        .map(|j| [u[0][j], u[1][j], u[2][j], u[3][j]])
        .collect()
}

/// `true` iff `A_h A_f A_h⁻¹ = A_fⁿ` exactly.
pub fn bs_linear_compatible(af: &IntMatrix2, ah: &IntMatrix2, n: u32) -> Result<bool> {
    af.require_unimodular()?;
    ah.require_unimodular()?;
    let lhs = ah
        .checked_mul(af)
        .and_then(|m| m.checked_mul(&ah.inverse().ok()?))
        .ok_or(Error::Overflow("conjugating a matrix"))?;
    Ok(lhs == af.pow(n)?)
}

/// Affine map `v ↦ L v + t` of `ℚ²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMapQ2 {
    pub linear: [[Q; 2]; 2],
    pub translation: [Q; 2],
}

impl AffineMapQ2 {
    pub fn new(linear: [[Q; 2]; 2], translation: [Q; 2]) -> Self {
        Self { linear, translation }
    }

    /// The map `v ↦ (A_h v + Q) / n` that a rotation vector of `f` must be
    /// fixed by when `h f h⁻¹ = fⁿ`.
    pub fn bs_transfer(ah: &IntMatrix2, q: [i64; 2], n: u32) -> Self {
        let inv_n = Q::new(1, n as i128);
        let l = ah.to_rational();
        Self {
            linear: [[l[0][0] * inv_n, l[0][1] * inv_n], [l[1][0] * inv_n, l[1][1] * inv_n]],
            translation: [
                Q::from_integer(q[0] as i128) * inv_n,
                Q::from_integer(q[1] as i128) * inv_n,
            ],
        }
    }

    pub fn apply(&self, v: [Q; 2]) -> [Q; 2] {
        let l = &self.linear;
        [
            l[0][0] * v[0] + l[0][1] * v[1] + self.translation[0],
            l[1][0] * v[0] + l[1][1] * v[1] + self.translation[1],
        ]
    }

    pub fn linear_det(&self) -> Q {
        let l = &self.linear;
        l[0][0] * l[1][1] - l[0][1] * l[1][0]
    }
}

/// Exact solution of `x = M⁻¹ r` for a 2×2 rational system, if `M` is invertible.
pub fn solve2(m: [[Q; 2]; 2], r: [Q; 2]) -> Option<[Q; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.is_zero() {
        return None;
    }
    Some([
        (m[1][1] * r[0] - m[0][1] * r[1]) / det,
        (m[0][0] * r[1] - m[1][0] * r[0]) / det,
    ])
}

/// The unique fixed point of `B`, when `I − linear(B)` is invertible.
pub fn affine_fixed_point(b: &AffineMapQ2) -> Option<[Q; 2]> {
    let l = &b.linear;
    let one = Q::one();
    let m = [[one - l[0][0], -l[0][1]], [-l[1][0], one - l[1][1]]];
    solve2(m, b.translation)
}

/// Nearest integer to a rational, ties away from zero.
pub fn round_q(q: &Q) -> i128 {
    let r = q.round();
    debug_assert!(r.is_integer());
    *r.numer() * if r.is_negative() && *r.numer() > 0 { -1 } else { 1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: i64, b: i64, c: i64, d: i64) -> IntMatrix2 {
        IntMatrix2::new(a, b, c, d)
    }

    /// Brute force over all entry 4-tuples in `[-r, r]`.
    fn brute_conjugators(a: &IntMatrix2, b: &IntMatrix2, r: i64) -> Vec<IntMatrix2> {
        let mut out = Vec::new();
        for x11 in -r..=r {
            for x12 in -r..=r {
                for x21 in -r..=r {
                    for x22 in -r..=r {
                        let x = m(x11, x12, x21, x22);
                        if x.is_unimodular() && x * *b * x.inverse().unwrap() == *a {
                            out.push(x);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn orders_of_exemplars() {
        assert_eq!(finite_order(&IntMatrix2::IDENTITY).unwrap(), Some(1));
        assert_eq!(finite_order(&m(0, 1, -1, 0)).unwrap(), Some(4));
        assert_eq!(finite_order(&m(1, 1, 0, 1)).unwrap(), None);
        assert_eq!(finite_order(&m(-1, 0, 0, -1)).unwrap(), Some(2));
    }

    #[test]
    fn order_six_from_direct_powers() {
        // oracle: multiply out the powers by hand-rolled loop
        let a = m(0, -1, 1, 1);
        let mut p = a;
        let mut first = None;
        for k in 1..=6 {
            if p == IntMatrix2::IDENTITY && first.is_none() {
                first = Some(k);
            }
            p = p * a;
        }
        assert_eq!(first, Some(6));
        assert_eq!(finite_order(&a).unwrap(), Some(6));
        assert_eq!(finite_order(&m(0, -1, 1, -1)).unwrap(), Some(3));
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(finite_order(&m(2, 0, 0, 1)).is_err());
        assert!(conjugate_in_gl2z(&m(2, 0, 0, 1), &IntMatrix2::IDENTITY, 3).is_err());
        assert!(bs_linear_compatible(&m(1, 0, 0, 1), &m(1, 1, 1, 1), 2).is_err());
    }

    #[test]
    fn self_conjugacy_gives_identity() {
        for a in [m(1, 1, 0, 1), m(0, 1, -1, 0), m(2, 1, 1, 1), IntMatrix2::IDENTITY] {
            assert_eq!(
                conjugate_in_gl2z(&a, &a, 10).unwrap(),
                Conjugacy::Found(IntMatrix2::IDENTITY),
                "{a}"
            );
        }
    }

    #[test]
    fn parabolic_not_conjugate_to_its_square() {
        let a = m(1, 1, 0, 1);
        let a2 = a * a;
        assert_eq!(a2, m(1, 2, 0, 1));
        assert_eq!(conjugate_in_gl2z(&a, &a2, 50).unwrap(), Conjugacy::NoneWithinBound);
        assert!(brute_conjugators(&a, &a2, 3).is_empty());
    }

    #[test]
    fn quarter_turn_conjugate_to_its_inverse() {
        let a = m(0, 1, -1, 0);
        let b = m(0, -1, 1, 0);
        let brute = brute_conjugators(&a, &b, 3);
        assert!(brute.contains(&m(1, 0, 0, -1)));
        match conjugate_in_gl2z(&a, &b, 10).unwrap() {
            Conjugacy::Found(x) => {
                assert_eq!(x, m(1, 0, 0, -1));
                assert!(brute.contains(&x));
            }
            other => panic!("expected a conjugator, got {other:?}"),
        }
    }

    #[test]
    fn linear_compatibility_examples() {
        assert!(bs_linear_compatible(&IntMatrix2::IDENTITY, &m(2, 1, 1, 1), 2).unwrap());
        assert!(!bs_linear_compatible(&m(1, 1, 0, 1), &m(2, 1, 1, 1), 2).unwrap());
        assert!(bs_linear_compatible(&m(-1, 0, 0, -1), &IntMatrix2::IDENTITY, 3).unwrap());
    }

    #[test]
    fn affine_fixed_points() {
        let half = Q::new(1, 2);
        let z = Q::zero();
        let b = AffineMapQ2::new([[half, z], [z, half]], [z, z]);
        assert_eq!(affine_fixed_point(&b), Some([z, z]));

        let b = AffineMapQ2::bs_transfer(&IntMatrix2::IDENTITY, [1, 0], 2);
        let v = affine_fixed_point(&b).unwrap();
        assert_eq!(v, [Q::one(), z]);
        assert_eq!(b.apply(v), v);

        let one = Q::one();
        let shift = AffineMapQ2::new([[one, z], [z, one]], [one, z]);
        assert_eq!(affine_fixed_point(&shift), None);
    }

    #[test]
    fn transfer_map_determinant() {
        for ah in [IntMatrix2::IDENTITY, m(2, 1, 1, 1), m(0, 1, 1, 0), m(1, 5, 0, -1)] {
            for n in 2..6u32 {
                let b = AffineMapQ2::bs_transfer(&ah, [3, -1], n);
                assert_eq!(b.linear_det().abs(), Q::new(1, (n * n) as i128));
            }
        }
    }

    #[test]
    fn json_shapes() {
        let a = m(0, 1, -1, 0);
        assert_eq!(serde_json::to_string(&a).unwrap(), "[[0,1],[-1,0]]");
        let back: IntMatrix2 = serde_json::from_str("[[2,1],[1,1]]").unwrap();
        assert_eq!(back, m(2, 1, 1, 1));
        let r = Rational(Q::new(6, -4));
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"num":-3,"den":2}"#);
        assert!(serde_json::from_str::<Rational>(r#"{"num":2,"den":4}"#).is_err());
        assert!(serde_json::from_str::<Rational>(r#"{"num":1,"den":0}"#).is_err());
    }

    #[test]
    fn rounding_rationals() {
        assert_eq!(round_q(&Q::new(7, 2)), 4);
        assert_eq!(round_q(&Q::new(-7, 2)), -4);
        assert_eq!(round_q(&Q::new(-1, 3)), 0);
        assert_eq!(round_q(&Q::new(-5, 3)), -2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn unimodular() -> impl Strategy<Value = IntMatrix2> {
            (-4i64..=4, -4i64..=4, -4i64..=4, -4i64..=4)
                .prop_map(|(a, b, c, d)| IntMatrix2::new(a, b, c, d))
                .prop_filter("unimodular", |x| x.is_unimodular())
        }

        proptest! {
            #[test]
            fn order_is_crystallographic(a in unimodular()) {
                if let Some(k) = finite_order(&a).unwrap() {
                    prop_assert!([1, 2, 3, 4, 6].contains(&k));
                    prop_assert!(a.pow(k).unwrap().is_identity());
                    for j in 1..k {
                        prop_assert!(!a.pow(j).unwrap().is_identity());
                    }
                }
            }

            #[test]
            fn found_conjugators_are_exact(a in unimodular(), x in unimodular()) {
                let b = x.inverse().unwrap() * a * x;
                match conjugate_in_gl2z(&a, &b, 6).unwrap() {
                    Conjugacy::Found(y) => prop_assert_eq!(y * b * y.inverse().unwrap(), a),
                    Conjugacy::NoneWithinBound => {}
                }
            }

            #[test]
            fn affine_fixed_point_is_fixed(
                ah in unimodular(), q0 in -5i64..5, q1 in -5i64..5, n in 2u32..6,
            ) {
                let b = AffineMapQ2::bs_transfer(&ah, [q0, q1], n);
                let v = affine_fixed_point(&b).expect("|det L| = 1/n² keeps I − L invertible");
                prop_assert_eq!(b.apply(v), v);
            }
        }
    }
}
