//! The acceptance suite: twelve numbered checks, each returning pass/fail
//! with the numbers behind it.

use std::f64::consts::LN_2;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog::{self, product_action};
use crate::circle::{rotation_number, CircleLift, DEFAULT_CERT_TOL, DEFAULT_Q_MAX};
use crate::error::Result;
use crate::estimators::{bs_minimal_set, differential_at, fixed_cells, invariant_core, richardson_check, MinimalLabel};
use crate::experiments::{newton_fixed, persistent_fixed_point, trichotomy, Outcome, TrichotomyParams};
use crate::gl2z::{conjugate_in_gl2z, finite_order, verify_conjugator, Conjugacy, IntMatrix2};
use crate::hull;
use crate::perturb::{conjugate_action, BumpField, Support};
use crate::report::body_hash;
use crate::space::{Lift, Space};
use crate::torus::{bs_rotation_constraint, conjugate_rotation_set_check, rotation_set, RhoInput, RotationSetParams, TorusLift};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Copy, Debug)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    run: fn(u64) -> Result<Check>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub pass: bool,
    pub detail: String,
    pub data: Value,
}

impl Check {
    fn new(pass: bool, detail: impl Into<String>, data: Value) -> Self {
        Self {
            pass,
            detail: detail.into(),
            data,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub id: String,
    pub name: String,
    pub status: Status,
    pub detail: String,
    pub data: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub rows: Vec<Row>,
}

impl Summary {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.status == Status::Pass)
    }

    pub fn hash(&self) -> Result<String> {
        body_hash("reproduce-all", &json!({ "seed": self.seed }), &serde_json::to_value(&self.rows)?)
    }
}

pub fn criteria() -> Vec<Criterion> {
    let c = |id, name, run| Criterion { id, name, run };
    vec![
        c(1, "relation suite", c1_relations),
        c(2, "matrix classification", c2_matrices),
        c(3, "rotation numbers", c3_rotation_numbers),
        c(4, "rotation sets", c4_rotation_sets),
        c(5, "conjugation of rotation sets", c5_conjugation),
        c(6, "trichotomy by k", c6_trichotomy),
        c(7, "constructive minimal set", c7_minimal_set),
        c(8, "periodic examples", c8_periodic),
        c(9, "persistent global fixed point", c9_persistence),
        c(10, "rational and irrational perturbation", c10_perturbed),
        c(11, "differentials on the invariant circle", c11_differentials),
        c(12, "determinism", c12_determinism),
    ]
}

pub fn criterion(id: u32) -> Option<Criterion> {
    criteria().into_iter().find(|c| c.id == id)
}

impl Criterion {
    pub fn run(&self, seed: u64) -> Result<Check> {
        (self.run)(seed)
    }
}

/// Runs the selected criteria (`None`: all twelve) in order. Unknown ids give
/// an error row; timings go to the returned side table, not the summary.
pub fn reproduce(ids: Option<&[String]>, seed: u64) -> (Summary, Vec<(String, f64)>) {
    let ids: Vec<String> = match ids {
        Some(ids) => ids.to_vec(),
        None => criteria().iter().map(|c| c.id.to_string()).collect(),
    };
    let mut rows = Vec::with_capacity(ids.len());
    let mut timings = Vec::with_capacity(ids.len());
    for id in ids {
        let start = Instant::now();
        let found = id.trim().parse::<u32>().ok().and_then(criterion);
        let row = match found {
            None => Row {
                id: id.clone(),
                name: String::new(),
                status: Status::Error,
                detail: format!("unknown criterion `{id}`"),
                data: Value::Null,
            },
            Some(c) => match c.run(seed) {
                Ok(check) => Row {
                    id: id.clone(),
                    name: c.name.into(),
                    status: if check.pass { Status::Pass } else { Status::Fail },
                    detail: check.detail,
                    data: check.data,
                },
                Err(e) => Row {
                    id: id.clone(),
                    name: c.name.into(),
                    status: Status::Error,
                    detail: e.to_string(),
                    data: Value::Null,
                },
            },
        };
        timings.push((id, start.elapsed().as_secs_f64() * 1e3));
        rows.push(row);
    }
    (Summary { seed, rows }, timings)
}

/// Plain-text table.
pub fn format_table(summary: &Summary, timings: &[(String, f64)]) -> String {
    let mut s = String::new();
    for (r, t) in summary.rows.iter().zip(timings) {
        let status = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        };
        s.push_str(&format!("{:>3}  {:<5}  {:>9.1} ms  {:<38} {}\n", r.id, status, t.1, r.name, r.detail));
    }
    s
}

fn c1_relations(_: u64) -> Result<Check> {
    let mut rows = Vec::new();
    let mut pass = true;
    let mut worst = (0.0f64, 0.0f64);
    for (id, params) in catalog::representatives() {
        let a = catalog::build(&id, &params)?;
        let r = a.relation;
        let ok = r.residual < 1e-8 && r.iterated_residual < 1e-6 && r.grid_points >= 10_000;
        pass &= ok;
        worst = (worst.0.max(r.residual), worst.1.max(r.iterated_residual));
        rows.push(json!({ "action": a.label, "report": r, "pass": ok }));
    }
    Ok(Check::new(
        pass,
        format!("{} actions; max residual {:.1e}, max iterated {:.1e}", rows.len(), worst.0, worst.1),
        json!(rows),
    ))
}

/// All `X` with entries in `[−3, 3]`, `det X = ±1` and `X B = A X`.
pub fn brute_force_conjugators(a: &IntMatrix2, b: &IntMatrix2) -> Vec<IntMatrix2> {
    let mut out = Vec::new();
    for x11 in -3..=3 {
        for x12 in -3..=3 {
            for x21 in -3..=3 {
                for x22 in -3..=3 {
                    let x = IntMatrix2::new(x11, x12, x21, x22);
                    if x.det().abs() == 1 && x * *b == *a * x {
                        out.push(x);
                    }
                }
            }
        }
    }
    out
}

fn c2_matrices(_: u64) -> Result<Check> {
    let exemplars = [
        IntMatrix2::IDENTITY,
        IntMatrix2::new(-1, 0, 0, -1),
        IntMatrix2::new(0, 1, -1, 0),
        IntMatrix2::new(0, -1, 1, 1),
    ];
    let orders: Vec<Option<u32>> = exemplars.iter().map(finite_order).collect::<Result<_>>()?;
    let orders_ok = orders == [Some(1), Some(2), Some(4), Some(6)];
    let parabolic = IntMatrix2::new(1, 1, 0, 1);
    let infinite = finite_order(&parabolic)?.is_none();
    let square = parabolic * parabolic;
    let none = conjugate_in_gl2z(&parabolic, &square, 50)? == Conjugacy::NoneWithinBound;
    let (a, b) = (IntMatrix2::new(0, 1, -1, 0), IntMatrix2::new(0, -1, 1, 0));
    let brute = brute_force_conjugators(&a, &b);
    let expected = IntMatrix2::new(1, 0, 0, -1);
    let found = conjugate_in_gl2z(&a, &b, 10)?;
    let order4 = brute.contains(&expected)
        && matches!(found, Conjugacy::Found(x) if verify_conjugator(&x, &a, &b) && brute.contains(&x));
    Ok(Check::new(
        orders_ok && infinite && none && order4,
        format!("orders {orders:?}; parabolic infinite: {infinite}; (A, A²) none within 50: {none}; order-4 conjugator {found:?} among {} brute-force solutions", brute.len()),
        json!({ "orders": orders, "parabolic_infinite": infinite, "a_a2_none": none, "brute_force": brute, "found": found }),
    ))
}

/// `θ ↦ h([0, θ])[1]`: `h` restricted to the circle at `∞`.
fn on_c1(h: &TorusLift) -> CircleLift {
    let h = h.clone();
    CircleLift::new("h|C1", move |t| h.eval([0.0, t])[1])
}

fn c3_rotation_numbers(_: u64) -> Result<Check> {
    let mut data = Vec::new();
    let mut pass = true;
    for n in [2u32, 3, 5] {
        let a = catalog::standard_torus(n)?;
        let est = rotation_number(&on_c1(a.h.as_torus().unwrap()), 100_000, DEFAULT_Q_MAX, DEFAULT_CERT_TOL);
        let target = (n as f64).ln().rem_euclid(1.0);
        let err = (est.value - target).abs();
        pass &= err < 1e-4 && est.rational_witness.is_none();
        data.push(json!({ "n": n, "estimate": est, "error": err }));
    }
    let third = rotation_number(&CircleLift::rotation(1.0 / 3.0), 100_000, DEFAULT_Q_MAX, DEFAULT_CERT_TOL);
    let w3 = third.rational_witness.map(|w| (w.p, w.q));
    let periodic = catalog::periodic_circle_example(3)?;
    let pf = rotation_number(periodic.f.as_circle().unwrap(), 100_000, DEFAULT_Q_MAX, DEFAULT_CERT_TOL);
    let wp = pf.rational_witness.map(|w| (w.p, w.q));
    pass &= w3 == Some((1, 3)) && wp == Some((1, 2));
    Ok(Check::new(
        pass,
        format!("ln n within 1e-4 for n = 2, 3, 5; witnesses {w3:?} and {wp:?}"),
        json!({ "standard": data, "rotation_third": third, "periodic_circle_f": pf }),
    ))
}

fn test_map(seed: u64) -> Result<TorusLift> {
    let phi = BumpField::random(seed, 1e-2, Support::Global)?;
    phi.to_lift().compose(&TorusLift::translation([0.1, 0.2]))
}

fn c4_rotation_sets(seed: u64) -> Result<Check> {
    let a = catalog::standard_torus(2)?;
    let f0 = a.f.as_torus().unwrap();
    let params = RotationSetParams {
        grid: 16,
        iterates: 10_000,
        tail: 100,
        ..Default::default()
    };
    let est = rotation_set(f0, &params)?;
    let point = est.point.unwrap_or([f64::NAN; 2]);
    let near_zero = est.is_point && point[0].abs().max(point[1].abs()) < 1e-3;
    let mut snaps = Vec::new();
    let mut snap_ok = true;
    for n in [2u32, 3] {
        let c = bs_rotation_constraint(
            RhoInput::Estimate {
                value: point,
                error_bound: est.error_bound,
            },
            &IntMatrix2::IDENTITY,
            n,
        )?;
        let zero = c.snapped.as_ref().is_some_and(|s| s.iter().all(|q| *q.0.numer() == 0));
        snap_ok &= c.consistent && zero;
        snaps.push(json!({ "n": n, "constraint": c }));
    }
    let f = test_map(seed)?;
    let f3 = f.compose(&f)?.compose(&f)?;
    let small = RotationSetParams {
        grid: 8,
        iterates: 3000,
        tail: 50,
        ..Default::default()
    };
    let (r1, r3) = (rotation_set(&f, &small)?, rotation_set(&f3, &small)?);
    let scaled: Vec<[f64; 2]> = r1.hull.iter().map(|p| [3.0 * p[0], 3.0 * p[1]]).collect();
    let dist = hull::hausdorff(&scaled, &r3.hull);
    let tol = r3.error_bound + 3.0 * r1.error_bound;
    let scaling = dist <= tol;
    Ok(Check::new(
        near_zero && snap_ok && scaling,
        format!(
            "ρ(f₀) = {point:?} (diam {:.1e}); snaps to (0,0) for n = 2, 3: {snap_ok}; |ρ(F³) − 3ρ(F)| = {dist:.2e} ≤ {tol:.2e}",
            est.diameter
        ),
        json!({ "f0": est, "constraints": snaps, "scaling": { "distance": dist, "tolerance": tol, "rho_f": r1, "rho_f3": r3 } }),
    ))
}

fn c5_conjugation(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = RotationSetParams {
        grid: 8,
        iterates: 3000,
        tail: 50,
        ..Default::default()
    };
    let linears = [
        IntMatrix2::IDENTITY,
        IntMatrix2::IDENTITY,
        IntMatrix2::IDENTITY,
        IntMatrix2::new(1, 1, 0, 1),
        IntMatrix2::new(2, 1, 1, 1),
    ];
    let mut data = Vec::new();
    let mut pass = true;
    for (i, l) in linears.iter().enumerate() {
        let v = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
        let phi = BumpField::random(rng.gen(), 1e-2, Support::Global)?;
        let psi = BumpField::random(rng.gen(), 1e-2, Support::Global)?;
        let f = phi.to_lift().compose(&TorusLift::translation(v))?;
        let h = psi.to_lift().compose(&TorusLift::linear(*l)?)?;
        let r = conjugate_rotation_set_check(&f, &h, &params)?;
        pass &= r.pass;
        data.push(json!({ "pair": i, "linear": l, "translation": v, "distance": r.distance, "tolerance": r.tolerance, "pass": r.pass }));
    }
    Ok(Check::new(pass, format!("{} seeded pairs, two with non-identity linear part", data.len()), json!(data)))
}

fn c6_trichotomy(_: u64) -> Result<Check> {
    let params = TrichotomyParams::default();
    let third = trichotomy(&product_action(2, &"rot:1/3".parse()?)?, &params)?;
    let orbit_len = third.evidence.orbit.as_ref().map_or(0, Vec::len);
    let closure = third.evidence.orbit_closure_residual.unwrap_or(f64::INFINITY);
    let finite_ok = third.outcome == Outcome::FiniteOrbits && orbit_len == 3 && closure < 1e-6;

    let ln2 = trichotomy(&product_action(2, &"rot:ln2".parse()?)?, &params)?;
    let g = ln2.evidence.gaps.iter().find(|g| g.n == 100_000).map_or(1.0, |g| g.largest_gap);
    let circle_ok = ln2.outcome == Outcome::MinimalCircle && g < 0.02;

    let denjoy = trichotomy(&product_action(2, &"denjoy:golden,12,0.5".parse()?)?, &params)?;
    let refinements_ok = denjoy.evidence.refinements.len() == 3
        && denjoy.evidence.refinements.iter().all(|r| r.gap_above_cells && r.strict_subset);
    let cantor_ok = denjoy.outcome == Outcome::MinimalCantor && refinements_ok;
    let gd = denjoy.evidence.gaps.last().map_or(f64::NAN, |g| g.largest_gap);
    Ok(Check::new(
        finite_ok && circle_ok && cantor_ok,
        format!(
            "1/3: {:?} ({orbit_len} points, closure {closure:.1e}); ln 2: {:?} (gap {g:.1e}); Denjoy: {:?} (gap {gd:.3})",
            third.outcome, ln2.outcome, denjoy.outcome
        ),
        json!({ "rot_1_3": third, "rot_ln2": ln2, "denjoy": denjoy }),
    ))
}

fn c7_minimal_set(_: u64) -> Result<Check> {
    let a = catalog::standard_torus(2)?;
    let res = 256;
    let depth = 8;
    let p = fixed_cells(&a.f, res, None);
    let est = bs_minimal_set(&a, res, depth);
    let levels = invariant_core(&a.h, &a.h_inv, &p, depth);
    let decreasing = levels.windows(2).all(|w| w[1].is_subset(&w[0]));
    let nonempty = levels.last().is_some_and(|k| !k.is_empty());
    let inside = est.cells.is_subset(&p);
    let counts: Vec<usize> = levels.iter().map(|k| k.len()).collect();
    Ok(Check::new(
        inside && decreasing && nonempty && est.label == MinimalLabel::MinimalCircle,
        format!("label {:?}; {} cells ⊆ fix(f₀) ({} cells): {inside}; |K_l| = {counts:?}", est.label, est.cells.len(), p.len()),
        json!({ "estimate": est, "fixed_cells": p.len(), "level_counts": counts, "decreasing": decreasing }),
    ))
}

fn min_displacement(f: &Lift, grid: usize) -> f64 {
    f.space().grid(grid).iter().map(|p| f.displacement(*p)).fold(f64::INFINITY, f64::min)
}

/// Newton from the grid point of least displacement.
fn fixed_point_residual(f: &Lift, grid: usize) -> (crate::torus::Point, f64) {
    let start = f
        .space()
        .grid(grid)
        .into_iter()
        .min_by(|a, b| f.displacement(*a).total_cmp(&f.displacement(*b)))
        .unwrap();
    let (x, _) = newton_fixed(f, start);
    (x, f.displacement(x))
}

fn c8_periodic(_: u64) -> Result<Check> {
    let mut data = Vec::new();
    let mut pass = true;
    for (name, a, grid) in [
        ("periodic-circle", catalog::periodic_circle_example(3)?, 10_000),
        ("periodic-torus", catalog::periodic_torus_example(3)?, 100),
    ] {
        let m1 = min_displacement(&a.f, grid);
        let f2 = a.f.compose(&a.f)?;
        let (x, r2) = fixed_point_residual(&f2, grid);
        let ok = m1 > 1e-3 && r2 < 1e-8;
        pass &= ok;
        data.push(json!({ "action": name, "min_displacement_f": m1, "f2_fixed_point": x, "f2_residual": r2, "pass": ok }));
    }
    Ok(Check::new(pass, "no fixed point for f, one for f² (circle and torus, n = 3)", json!(data)))
}

fn c9_persistence(seed: u64) -> Result<Check> {
    let a = catalog::morse_smale_example(2)?;
    let base = persistent_fixed_point(&a, 64);
    let exact = base
        .as_ref()
        .is_some_and(|r| Space::Torus.dist(r.point, [0.0, 0.0]) < 1e-12 && r.f_residual < 1e-12 && r.h_residual < 1e-12);
    let mut rows = Vec::new();
    let mut ok = 0;
    for s in 0..10u64 {
        let phi = BumpField::random(seed.wrapping_add(s), 1e-3, Support::Global)?;
        let size = phi.c0_size(64);
        let b = conjugate_action(&a, &phi)?;
        let fp = persistent_fixed_point(&b, 64);
        let good = fp.as_ref().is_some_and(|r| {
            r.f_residual < 1e-8 && r.h_residual < 1e-8 && Space::Torus.dist(r.point, [0.0, 0.0]) < 0.1
        });
        ok += good as usize;
        rows.push(json!({ "seed": seed.wrapping_add(s), "c0_size": size, "fixed_point": fp, "pass": good }));
    }
    Ok(Check::new(
        exact && ok == 10,
        format!("(∞,∞) exact: {exact}; perturbed {ok}/10"),
        json!({ "unperturbed": base, "perturbed": rows }),
    ))
}

fn c10_perturbed(_: u64) -> Result<Check> {
    let params = TrichotomyParams::default();
    let rational = trichotomy(&catalog::perturbed_torus(2, 0.7 - LN_2)?, &params)?;
    let small = trichotomy(&catalog::perturbed_torus(2, 1e-3)?, &params)?;
    let w = rational.rotation_number.rational_witness.map(|w| (w.p, w.q));
    let pass = rational.outcome == Outcome::FiniteOrbits
        && small.rotation_number.rational_witness.is_none()
        && small.outcome == Outcome::MinimalCircle;
    Ok(Check::new(
        pass,
        format!("ln 2 + ε = 7/10: {:?} (witness {w:?}); ε = 1e-3: {:?}", rational.outcome, small.outcome),
        json!({ "rational": rational, "irrational": small }),
    ))
}

fn c11_differentials(seed: u64) -> Result<Check> {
    let step = 1e-3;
    let mut pass = true;
    let mut worst = [0.0f64; 2];
    for n in [2u32, 3] {
        let a = catalog::standard_torus(n)?;
        for i in 0..20 {
            let x = [0.0, (i as f64 + 0.5) / 20.0];
            let df = differential_at(&a.f, x, step);
            let dh = differential_at(&a.h, x, step);
            let ef = df.moduli.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
            let eh = (dh.moduli[0] - 1.0 / n as f64).abs().max((dh.moduli[1] - 1.0).abs());
            worst = [worst[0].max(ef), worst[1].max(eh)];
            pass &= ef < 1e-4 && eh < 1e-3;
        }
    }
    // Richardson ratio for every smooth generator of every representative
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::new();
    let mut ratio_ok = true;
    let mut checked = 0;
    for (id, params) in catalog::representatives() {
        let a = catalog::build(&id, &params)?;
        for (name, g) in [("f", &a.f), ("h", &a.h)] {
            if !g.is_smooth() {
                continue;
            }
            for _ in 0..5 {
                let x = [rng.gen_range(0.0..1.0), if a.space() == Space::Torus { rng.gen_range(0.0..1.0) } else { 0.0 }];
                let r = richardson_check(g, x, step);
                ratio_ok &= r.pass;
                checked += 1;
                if !r.pass || r.step < step {
                    ratios.push(json!({ "action": a.label, "map": name, "at": x, "check": r }));
                }
            }
        }
    }
    Ok(Check::new(
        pass && ratio_ok,
        format!(
            "max |moduli − (1,1)| = {:.1e}, max |moduli − (1/n,1)| = {:.1e}; Richardson ratio in range at {checked} points ({} needed a finer step)",
            worst[0],
            worst[1],
            ratios.len()
        ),
        json!({ "worst_f": worst[0], "worst_h": worst[1], "richardson_points": checked, "refined_or_failed": ratios }),
    ))
}

fn c12_determinism(seed: u64) -> Result<Check> {
    let ids: Vec<String> = (1..=11).map(|i| i.to_string()).collect();
    let (a, _) = reproduce(Some(&ids), seed);
    let (b, _) = reproduce(Some(&ids), seed);
    let (ha, hb) = (a.hash()?, b.hash()?);
    Ok(Check::new(ha == hb, format!("{ha} vs {hb}"), json!({ "first": ha, "second": hb })))
}
