//! Cross-checks of the library against values computed independently in the
//! test: closed-form affine maps, exact matrix arithmetic, brute force.

use bsdl::bsgroup::{finite_bs_orbit, normalize, OrbitResult, Word};
use bsdl::catalog::{self, CatalogParams};
use bsdl::chart::{circle_dist, from_u, to_u};
use bsdl::circle::{rotation_number, CircleLift};
use bsdl::denjoy::{golden, Denjoy};
use bsdl::estimators::{birkhoff_displacement, differential_at};
use bsdl::gl2z::{bs_linear_compatible, conjugate_in_gl2z, finite_order, Conjugacy, IntMatrix2};
use bsdl::space::Lift;
use bsdl::torus::{bs_rotation_constraint, rotation_vector, RhoInput};
use num_rational::Ratio;

fn m(rows: [[i64; 2]; 2]) -> IntMatrix2 {
    IntMatrix2::from_rows(rows)
}

fn mul(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mut c = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

#[test]
fn order_six_by_repeated_products() {
    let a = [[0, -1], [1, 1]];
    let mut p = a;
    let mut order = 1;
    while p != [[1, 0], [0, 1]] {
        p = mul(p, a);
        order += 1;
    }
    assert_eq!(order, 6);
    assert_eq!(finite_order(&m(a)).unwrap(), Some(6));
    assert_eq!(finite_order(&m([[1, 1], [0, 1]])).unwrap(), None);
}

#[test]
fn rotation_conjugator_agrees_with_brute_force() {
    let (a, b) = ([[0, 1], [-1, 0]], [[0, -1], [1, 0]]);
    let mut found = vec![];
    for x in quads(-3..=3) {
        let x = [[x[0], x[1]], [x[2], x[3]]];
        let det = x[0][0] * x[1][1] - x[0][1] * x[1][0];
        if det.abs() == 1 && mul(x, b) == mul(a, x) {
            found.push(x);
        }
    }
    assert!(found.contains(&[[1, 0], [0, -1]]));
    match conjugate_in_gl2z(&m(a), &m(b), 10).unwrap() {
        Conjugacy::Found(x) => assert!(found.contains(&x.rows()), "{x:?} not among {found:?}"),
        other => panic!("{other:?}"),
    }
}

fn quads(r: std::ops::RangeInclusive<i64>) -> Vec<[i64; 4]> {
    let v: Vec<i64> = r.collect();
    let mut out = vec![];
    for &a in &v {
        for &b in &v {
            for &c in &v {
                for &d in &v {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

#[test]
fn linear_compatibility_by_multiplication() {
    // A_h A_f A_h⁻¹ = A_fⁿ
    let check = |af: [[i64; 2]; 2], ah: [[i64; 2]; 2], ah_inv: [[i64; 2]; 2], n: u32| {
        let lhs = mul(mul(ah, af), ah_inv);
        let mut rhs = [[1, 0], [0, 1]];
        for _ in 0..n {
            rhs = mul(rhs, af);
        }
        lhs == rhs
    };
    let (af, ah, ah_inv) = ([[1, 1], [0, 1]], [[2, 1], [1, 1]], [[1, -1], [-1, 2]]);
    assert!(!check(af, ah, ah_inv, 2));
    assert!(!bs_linear_compatible(&m(af), &m(ah), 2).unwrap());
    let id = [[1, 0], [0, 1]];
    assert!(check([[-1, 0], [0, -1]], id, id, 3));
    assert!(bs_linear_compatible(&m([[-1, 0], [0, -1]]), &m(id), 3).unwrap());
}

#[test]
fn constraint_lattice_for_identity_linear_part() {
    // (n−1)ρ = Q: for n = 2 integer vectors are consistent and
    // half-integers are not.
    let exact = |x: (i64, i64), y: (i64, i64)| RhoInput::Exact([Ratio::new(x.0 as i128, x.1 as i128), Ratio::new(y.0 as i128, y.1 as i128)]);
    let id = m([[1, 0], [0, 1]]);
    assert!(bs_rotation_constraint(exact((3, 1), (-2, 1)), &id, 2).unwrap().consistent);
    assert!(!bs_rotation_constraint(exact((1, 2), (0, 1)), &id, 2).unwrap().consistent);
    let r = bs_rotation_constraint(
        RhoInput::Estimate { value: [0.001, -0.0004], error_bound: 2e-3 },
        &id,
        3,
    )
    .unwrap();
    assert!(r.consistent);
    let s = r.snapped.unwrap();
    assert_eq!((s[0].0, s[1].0), (Ratio::from_integer(0), Ratio::from_integer(0)));
    // residual to the nearest point of ½ℤ²
    let want = 0.001f64.hypot(0.0004);
    assert!(r.residual <= want + 1e-12, "{} vs {want}", r.residual);
}

#[test]
fn circle_inverse_round_trips() {
    let f = catalog::periodic_circle_pair(3).unwrap().0;
    let g = f.inverse().unwrap();
    let gg = g.inverse().unwrap();
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..1000 {
        let x = i as f64 / 1000.0;
        worst.0 = worst.0.max((f.eval(g.eval(x)) - x).abs());
        worst.1 = worst.1.max((gg.eval(x) - f.eval(x)).abs());
    }
    assert!(worst.0 < 1e-10 && worst.1 < 1e-9, "{worst:?}");
}

#[test]
fn inverse_dilation_halves() {
    let h = catalog::dilation_line(2);
    let hi = h.inverse().unwrap();
    let got = hi.eval(to_u(2.0));
    assert!(circle_dist(got, to_u(1.0)) < 1e-12);
    // h⁻¹(x) = x/2 along the whole projective line
    for x in [-7.5, -1.0, 0.0, 0.3, 4.0, 1e6] {
        assert!(circle_dist(hi.eval(to_u(x)), to_u(x / 2.0)) < 1e-12, "{x}");
    }
}

#[test]
#[allow(clippy::approx_constant)]
fn ln2_rotation_is_irrational_to_q50() {
    let r = rotation_number(&CircleLift::rotation(std::f64::consts::LN_2), 100_000, 50, 1e-8);
    assert!((r.value - 0.693147).abs() < 1e-4);
    assert!(r.rational_witness.is_none());
    // independently: ln 2 stays away from every p/q with q ≤ 50
    let closest = (1..=50)
        .map(|q| {
            let x = std::f64::consts::LN_2 * q as f64;
            (x - x.round()).abs()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(closest > 1e-4);
}

#[test]
fn glued_map_has_period_two_for_n3() {
    let (f, _) = catalog::periodic_circle_pair(3).unwrap();
    let r = rotation_number(&f, 100_000, 64, 1e-8);
    let w = r.rational_witness.expect("witness");
    assert_eq!((w.p, w.q), (1, 2));
    // f² − 1 changes sign (or vanishes) somewhere: scan for fixed points of f² mod 1
    let disp = |x: f64| f.iterate(x, 2) - x - 1.0;
    let xs: Vec<f64> = (0..=4000).map(|i| i as f64 / 4000.0).collect();
    let roots = xs.windows(2).filter(|w| disp(w[0]) * disp(w[1]) <= 0.0).count();
    assert!(roots >= 2, "{roots}");
    // and f has no fixed point: f(x) − x never hits an integer
    assert!(xs.iter().all(|&x| {
        let d = f.eval(x) - x;
        (d - d.round()).abs() > 1e-6
    }));
}

#[test]
fn denjoy_orbit_avoids_inserted_intervals() {
    let d = Denjoy::new(golden(), 12, 0.5).unwrap();
    let f = d.lift();
    let r = rotation_number(&f, 100_000, 64, 1e-8);
    assert!((r.value - golden()).abs() < 1e-3);
    let ivs = d.intervals();
    let mass: f64 = ivs.iter().map(|i| i.len).sum();
    assert!(mass > 0.4 && mass <= 0.5 + 1e-12);
    let mut x = 0.123;
    for _ in 0..10_000 {
        x = f.eval(x);
    }
    for _ in 0..2000 {
        x = f.eval(x);
        let u = x.rem_euclid(1.0);
        for iv in &ivs {
            let off = (u - iv.start).rem_euclid(1.0);
            // allow a hair of slack at the endpoints
            assert!(!(off > 1e-9 && off < iv.len - 1e-9), "{u} inside interval {iv:?}");
        }
    }
}

#[test]
fn standard_line_words_match_affine_formula() {
    for n in 2..=4u32 {
        let act = catalog::standard_line(n).unwrap();
        let x = |v: f64| [to_u(v), 0.0];
        let w: Word = "a^-1 b a".parse().unwrap();
        let got = act.evaluate(&w, x(0.0));
        assert!(circle_dist(got[0], to_u(1.0 / n as f64)) < 1e-12, "n={n}");
        assert_eq!(normalize(&w, n).unwrap(), w);
        let w: Word = "b^3 a^2".parse().unwrap();
        let got = act.evaluate(&w, x(1.0));
        let want = (n * n) as f64 + 3.0;
        assert!(circle_dist(got[0], to_u(want)) < 1e-12, "n={n}");
    }
}

#[test]
fn normal_forms_agree_on_the_affine_action() {
    // b ↦ x+1, a ↦ nx: every word is an affine map nᵏx + w, a faithful picture
    // of BS(1,n), so a word and its normal form must agree exactly.
    let n = 2u32;
    let affine = |w: &Word| {
        let (mut s, mut t) = (Ratio::from_integer(1i128), Ratio::from_integer(0i128));
        for &(g, e) in w.runs().iter().rev() {
            for _ in 0..e.unsigned_abs() {
                (s, t) = match (g, e > 0) {
                    (bsdl::bsgroup::Gen::A, true) => (s * n as i128, t * n as i128),
                    (bsdl::bsgroup::Gen::A, false) => (s / n as i128, t / n as i128),
                    (bsdl::bsgroup::Gen::B, true) => (s, t + 1),
                    (bsdl::bsgroup::Gen::B, false) => (s, t - 1),
                };
            }
        }
        (s, t)
    };
    for s in ["a b a^-1", "a^-2 b^4 a^2", "b a^-1 b^3 a b^-2", "a^-1 b^2 a b^-1 a^-1 b a", "a b^-1 a^-1 b a b a^-1"] {
        let w: Word = s.parse().unwrap();
        let nf = normalize(&w, n).unwrap();
        assert_eq!(affine(&w), affine(&nf), "{s} -> {nf}");
    }
}

#[test]
fn standard_torus_relation_and_orbits() {
    let act = catalog::standard_torus(2).unwrap();
    assert!(act.relation.residual < 1e-9, "{}", act.relation.residual);
    // θ-translation by ln 2 has infinite orbits on ∞ × S¹ (no merge)
    match finite_bs_orbit(&act, [0.0, 0.1], 1e-6, 500) {
        OrbitResult::ExceedsBound { .. } => {}
        other => panic!("{other:?}"),
    }
    // rotation vector of f₀ is (0,0): orbits run off to ∞ where f₀ is parabolic
    let f = act.f.as_torus().unwrap();
    for p in [[0.3, 0.2], [0.61, 0.9], [0.5, 0.5]] {
        let v = rotation_vector(f, p, 10_000).unwrap().value;
        assert!(v[0].abs() < 1e-3 && v[1].abs() < 1e-3, "{v:?}");
        // telescoping: the Birkhoff average of displacements is the same quantity
        let b = birkhoff_displacement(f, p, 10_000).unwrap();
        assert!((b[0] - v[0]).abs() < 1e-12 && (b[1] - v[1]).abs() < 1e-12);
    }
}

#[test]
fn morse_smale_fixes_corner_points() {
    let act = catalog::morse_smale_example(2).unwrap();
    let h = act.h.as_torus().unwrap();
    let f = act.f.as_torus().unwrap();
    // (∞,∞) is u = 0 in both factors; (0,0) is u = 1/2
    for p in [[0.0, 0.0], [0.5, 0.5]] {
        let q = h.eval(p);
        assert!(circle_dist(q[0], p[0]) < 1e-12 && circle_dist(q[1], p[1]) < 1e-12);
    }
    let q = f.eval([0.0, 0.0]);
    assert!(circle_dist(q[0], 0.0) < 1e-12 && circle_dist(q[1], 0.0) < 1e-12);
    match finite_bs_orbit(&act, [0.0, 0.0], 1e-6, 100) {
        OrbitResult::Finite { points, .. } => assert_eq!(points.len(), 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn orbits_on_the_line_are_dense() {
    // words of length ≤ 6 from chart(0) under x+1, 2x already reach within
    // 1/8 of every point of the circle
    let act = catalog::standard_line(2).unwrap();
    let gens = act.generators();
    let mut frontier = vec![[to_u(0.0), 0.0]];
    let mut seen = frontier.clone();
    for _ in 0..6 {
        let mut next = vec![];
        for p in &frontier {
            for g in gens {
                next.push(g.apply(*p));
            }
        }
        seen.extend(next.iter().copied());
        frontier = next;
    }
    for i in 0..64 {
        let u = i as f64 / 64.0;
        let d = seen.iter().map(|p| circle_dist(p[0], u)).fold(f64::INFINITY, f64::min);
        assert!(d < 0.125, "{u}: {d}");
    }
    // the dyadic rationals are in the orbit of 0, ∞ is fixed
    assert!(circle_dist(gens[0].apply([0.0, 0.0])[0], 0.0) < 1e-15);
}

#[test]
fn perturbed_rotation_hits_rationals() {
    let eps = 0.5 - std::f64::consts::LN_2;
    let act = catalog::build("perturbed-torus", &CatalogParams { n: 2, eps, k: None }).unwrap();
    // on C₁ (u = 0) h is a pure θ-rotation by ln 2 + ε = 1/2
    let h = act.h.as_torus().unwrap();
    let p = h.iterate([0.0, 0.3], 2);
    assert!(circle_dist(p[1], 0.3) < 1e-12 && circle_dist(p[0], 0.0) < 1e-12);
    let c = CircleLift::new("θ on C₁", move |t| t + std::f64::consts::LN_2 + eps);
    let r = rotation_number(&c, 100_000, 64, 1e-8);
    assert_eq!(r.rational_witness.map(|w| (w.p, w.q)), Some((1, 2)));
}

#[test]
fn chart_derivatives_at_infinity() {
    let act = catalog::standard_torus(3).unwrap();
    let d = differential_at(&act.f, [0.0, 0.4], 1e-3);
    assert!((d.moduli[0] - 1.0).abs() < 1e-4 && (d.moduli[1] - 1.0).abs() < 1e-4, "{:?}", d.moduli);
    let d = differential_at(&act.h, [0.0, 0.4], 1e-3);
    assert!((d.moduli[0] - 1.0 / 3.0).abs() < 1e-3 && (d.moduli[1] - 1.0).abs() < 1e-3, "{:?}", d.moduli);
    // oracle: u ↦ to_u(3·from_u(u)) near u = 0 has slope 1/3 by hand
    let s = 1e-6;
    let slope = (to_u(3.0 * from_u(s)) - (to_u(3.0 * from_u(-s)) - 1.0)) / (2.0 * s);
    assert!((slope - 1.0 / 3.0).abs() < 1e-6, "{slope}");
}

#[test]
fn lift_enum_dispatches_to_both_spaces() {
    let c: Lift = CircleLift::rotation(0.25).into();
    assert!((c.apply([0.1, 0.0])[0] - 0.35).abs() < 1e-15);
}
