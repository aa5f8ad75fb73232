//! Explicit `BS(1,n)` actions on the circle and torus.
//!
//! The projective line `ℝ ∪ {∞}` is always read through the chart of
//! [`crate::chart`], so `∞ ↔ 0` and `0 ↔ 1/2`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bsgroup::BSAction;
use crate::chart::Mobius;
use crate::circle::CircleLift;
use crate::denjoy::{golden, Denjoy};
use crate::error::{Error, Result};
use crate::space::Space;
use crate::torus::TorusLift;

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub space: Space,
    pub params: &'static str,
    pub description: &'static str,
}

pub fn entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            id: "standard-line",
            space: Space::Circle,
            params: "n",
            description: "affine maps x ↦ x + 1 and x ↦ n x acting on the projective line",
        },
        CatalogEntry {
            id: "standard-torus",
            space: Space::Torus,
            params: "n",
            description: "f₀(x,θ) = (x + 1, θ), h₀(x,θ) = (n x, θ + ln n) on (ℝ ∪ ∞) × S¹",
        },
        CatalogEntry {
            id: "product",
            space: Space::Torus,
            params: "n, k",
            description: "f₀(x,θ) = (x + 1, θ), h_k(x,θ) = (n x, k(θ)) for a circle homeomorphism k",
        },
        CatalogEntry {
            id: "periodic-circle",
            space: Space::Circle,
            params: "n ≥ 3",
            description: "n − 1 glued copies of the standard line action composed with the rotation by 1/(n − 1); \
                         periodic points but no fixed points (glued on n − 1 blocks so the rotation commutes with the blocks)",
        },
        CatalogEntry {
            id: "periodic-torus",
            space: Space::Torus,
            params: "n ≥ 3",
            description: "F(x,y) = (x + 1, f(y)), H(x,y) = (n x, h(y)) with (f, h) the periodic circle action",
        },
        CatalogEntry {
            id: "perturbed-torus",
            space: Space::Torus,
            params: "n, eps",
            description: "f₀ with h_ε(x,θ) = (n x, θ + ln n + ε)",
        },
        CatalogEntry {
            id: "morse-smale",
            space: Space::Torus,
            params: "n",
            description: "f̄₀(x,θ) = (x + 1, θ + 1), h̄₀(x,θ) = (n x, n θ) on (ℝ ∪ ∞)²; (∞,∞) is a global fixed point",
        },
        CatalogEntry {
            id: "nonfaithful-circle",
            space: Space::Circle,
            params: "n, k",
            description: "f = id, h = k: a non-faithful action with the dynamics of k",
        },
    ]
}

/// Parameters shared by all constructors; unused fields are ignored.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogParams {
    pub n: u32,
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub k: Option<String>,
}

impl Default for CatalogParams {
    fn default() -> Self {
        Self { n: 2, eps: 0.0, k: None }
    }
}

/// JSON description of a catalog action, as written by `catalog build`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ActionDescriptor {
    pub catalog: String,
    #[serde(flatten)]
    pub params: CatalogParams,
}

impl ActionDescriptor {
    pub fn build(&self) -> Result<BSAction> {
        build(&self.catalog, &self.params)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub fn build(id: &str, params: &CatalogParams) -> Result<BSAction> {
    let n = params.n;
    let k = || -> Result<KSpec> {
        params
            .k
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter(format!("`{id}` needs a k-spec")))?
            .parse()
    };
    match id {
        "standard-line" => standard_line(n),
        "standard-torus" => standard_torus(n),
        "product" => product_action(n, &k()?),
        "periodic-circle" => periodic_circle_example(n),
        "periodic-torus" => periodic_torus_example(n),
        "perturbed-torus" => perturbed_torus(n, params.eps),
        "morse-smale" => morse_smale_example(n),
        "nonfaithful-circle" => nonfaithful_circle(n, &k()?),
        other => Err(Error::UnknownCatalog(other.to_string())),
    }
}

/// User-supplied circle lift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LiftSpec {
    Rotation { alpha: f64 },
    Mobius { a: f64, b: f64 },
    Denjoy { alpha: f64, depth: usize, gap_ratio: f64 },
    Piecewise { breakpoints: Vec<[f64; 2]> },
}

impl LiftSpec {
    pub fn build(&self) -> Result<CircleLift> {
        match self {
            LiftSpec::Rotation { alpha } => Ok(CircleLift::rotation(*alpha)),
            LiftSpec::Mobius { a, b } => {
                if !(*a > 0.0) {
                    return Err(Error::InvalidParameter("mobius needs a > 0".into()));
                }
                Ok(CircleLift::mobius(Mobius::new(*a, *b)))
            }
            LiftSpec::Denjoy { alpha, depth, gap_ratio } => Ok(Denjoy::new(*alpha, *depth, *gap_ratio)?.lift()),
            LiftSpec::Piecewise { breakpoints } => {
                let pts: Vec<(f64, f64)> = breakpoints.iter().map(|p| (p[0], p[1])).collect();
                CircleLift::piecewise(&pts)
            }
        }
    }
}

/// The fiber map `k` of a product action.
///
/// String forms: `rot:<α>`, `denjoy:<α>,<depth>,<ratio>`, a JSON [`LiftSpec`]
/// object, or `@file.json`. `α` may be a decimal, a fraction `p/q`, `ln<m>`
/// (for `ln m mod 1`) or `golden`.
#[derive(Clone, Debug, PartialEq)]
pub enum KSpec {
    Rotation { alpha: f64, text: String },
    Denjoy { alpha: f64, depth: usize, gap_ratio: f64 },
    Lift(LiftSpec),
}

pub fn parse_alpha(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("cannot read `{s}` as a rotation angle"));
    if s == "golden" {
        return Ok(golden());
    }
    if let Some(m) = s.strip_prefix("ln") {
        let m: f64 = m.trim().parse().map_err(|_| bad())?;
        if !(m > 0.0) {
            return Err(bad());
        }
        return Ok(m.ln().rem_euclid(1.0));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p.trim().parse().map_err(|_| bad())?;
        let q: f64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0.0 {
            return Err(bad());
        }
        return Ok(p / q);
    }
    let v: f64 = s.parse().map_err(|_| bad())?;
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

impl FromStr for KSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix('@') {
            let text = std::fs::read_to_string(path)?;
            return Ok(KSpec::Lift(serde_json::from_str(&text)?));
        }
        if s.starts_with('{') {
            return Ok(KSpec::Lift(serde_json::from_str(s)?));
        }
        if let Some(a) = s.strip_prefix("rot:") {
            return Ok(KSpec::Rotation {
                alpha: parse_alpha(a)?,
                text: a.trim().to_string(),
            });
        }
        if let Some(rest) = s.strip_prefix("denjoy:") {
            let parts: Vec<&str> = rest.split(',').collect();
            let alpha = parse_alpha(parts.first().copied().unwrap_or("golden"))?;
            let depth = match parts.get(1) {
                Some(d) => d
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad Denjoy depth `{d}`")))?,
                None => 12,
            };
            let gap_ratio = match parts.get(2) {
                Some(r) => parse_alpha(r)?,
                None => 0.5,
            };
            return Ok(KSpec::Denjoy { alpha, depth, gap_ratio });
        }
        Err(Error::InvalidParameter(format!(
            "unrecognised k-spec `{s}` (expected rot:…, denjoy:…, JSON or @file)"
        )))
    }
}

impl fmt::Display for KSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KSpec::Rotation { text, .. } => write!(f, "rot:{text}"),
            KSpec::Denjoy { alpha, depth, gap_ratio } => write!(f, "denjoy:{alpha},{depth},{gap_ratio}"),
            KSpec::Lift(spec) => write!(f, "{}", serde_json::to_string(spec).map_err(|_| fmt::Error)?),
        }
    }
}

impl KSpec {
    pub fn rotation(alpha: f64) -> Self {
        KSpec::Rotation {
            alpha,
            text: alpha.to_string(),
        }
    }

    pub fn lift(&self) -> Result<CircleLift> {
        match self {
            KSpec::Rotation { alpha, .. } => Ok(CircleLift::rotation(*alpha)),
            KSpec::Denjoy { alpha, depth, gap_ratio } => Ok(Denjoy::new(*alpha, *depth, *gap_ratio)?.lift()),
            KSpec::Lift(spec) => spec.build(),
        }
    }

    /// The underlying Denjoy construction, if any.
    pub fn denjoy(&self) -> Option<Denjoy> {
        match self {
            KSpec::Denjoy { alpha, depth, gap_ratio } => Denjoy::new(*alpha, *depth, *gap_ratio).ok(),
            KSpec::Lift(LiftSpec::Denjoy { alpha, depth, gap_ratio }) => Denjoy::new(*alpha, *depth, *gap_ratio).ok(),
            _ => None,
        }
    }
}

fn require_n(n: u32, min: u32, id: &str) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParameter(format!("`{id}` needs n ≥ {min}, got n = {n}")));
    }
    Ok(())
}

/// `x ↦ x + 1`.
pub fn translation_line() -> CircleLift {
    CircleLift::mobius(Mobius::new(1.0, 1.0)).relabel("x+1")
}

/// `x ↦ n x`.
pub fn dilation_line(n: u32) -> CircleLift {
    CircleLift::mobius(Mobius::new(n as f64, 0.0)).relabel(format!("{n}x"))
}

pub fn standard_line(n: u32) -> Result<BSAction> {
    require_n(n, 2, "standard-line")?;
    BSAction::new(format!("standard-line(n={n})"), n, translation_line(), dilation_line(n))
}

pub fn standard_torus(n: u32) -> Result<BSAction> {
    require_n(n, 2, "standard-torus")?;
    let theta = (n as f64).ln().rem_euclid(1.0);
    let f = TorusLift::product(&translation_line(), &CircleLift::identity())?;
    let h = TorusLift::product(&dilation_line(n), &CircleLift::rotation(theta))?;
    BSAction::new(format!("standard-torus(n={n})"), n, f, h)
}

pub fn product_action(n: u32, k: &KSpec) -> Result<BSAction> {
    require_n(n, 2, "product")?;
    let kl = k.lift()?;
    kl.validate(1000)?;
    let f = TorusLift::product(&translation_line(), &CircleLift::identity())?;
    let h = TorusLift::product(&dilation_line(n), &kl)?;
    BSAction::new(format!("product(n={n},k={k})"), n, f, h)
}

/// `(f, h)` on the circle: `n − 1` rescaled copies of the standard line
/// action, with `f` followed by the rotation by `1/(n − 1)`.
pub fn periodic_circle_pair(n: u32) -> Result<(CircleLift, CircleLift)> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "the periodic example needs n ≥ 3 (n = {n} leaves a single block and no rotation)"
        )));
    }
    let m = (n - 1) as f64;
    let (tf, th) = (Mobius::new(1.0, 1.0), Mobius::new(n as f64, 0.0));
    let (tfi, thi) = (tf.inverse(), th.inverse());
    let f = CircleLift::new(format!("R_1/{m}∘f̂"), move |y| tf.lift(m * y) / m + 1.0 / m)
        .with_inverse(move |y| tfi.lift(m * y - 1.0) / m);
    let h = CircleLift::new(format!("ĥ({n})"), move |y| th.lift(m * y) / m).with_inverse(move |y| thi.lift(m * y) / m);
    Ok((f, h))
}

pub fn periodic_circle_example(n: u32) -> Result<BSAction> {
    let (f, h) = periodic_circle_pair(n)?;
    BSAction::new(format!("periodic-circle(n={n})"), n, f, h)
}

pub fn periodic_torus_example(n: u32) -> Result<BSAction> {
    let (f, h) = periodic_circle_pair(n)?;
    let ff = TorusLift::product(&translation_line(), &f)?;
    let hh = TorusLift::product(&dilation_line(n), &h)?;
    BSAction::new(format!("periodic-torus(n={n})"), n, ff, hh)
}

pub fn perturbed_torus(n: u32, eps: f64) -> Result<BSAction> {
    require_n(n, 2, "perturbed-torus")?;
    if !eps.is_finite() {
        return Err(Error::InvalidParameter("eps must be finite".into()));
    }
    let theta = (n as f64).ln() + eps;
    let f = TorusLift::product(&translation_line(), &CircleLift::identity())?;
    let h = TorusLift::product(&dilation_line(n), &CircleLift::rotation(theta))?;
    BSAction::new(format!("perturbed-torus(n={n},eps={eps})"), n, f, h)
}

pub fn morse_smale_example(n: u32) -> Result<BSAction> {
    require_n(n, 2, "morse-smale")?;
    let f = TorusLift::product(&translation_line(), &translation_line())?;
    let h = TorusLift::product(&dilation_line(n), &dilation_line(n))?;
    BSAction::new(format!("morse-smale(n={n})"), n, f, h)
}

pub fn nonfaithful_circle(n: u32, k: &KSpec) -> Result<BSAction> {
    require_n(n, 2, "nonfaithful-circle")?;
    let kl = k.lift()?;
    kl.validate(1000)?;
    BSAction::new(format!("nonfaithful-circle(k={k})"), n, CircleLift::identity(), kl)
}

/// One representative of every catalog entry, used by the relation suite.
pub fn representatives() -> Vec<(String, CatalogParams)> {
    let p = |n: u32, eps: f64, k: Option<&str>| CatalogParams {
        n,
        eps,
        k: k.map(str::to_string),
    };
    let ln2 = std::f64::consts::LN_2;
    vec![
        ("standard-line".into(), p(2, 0.0, None)),
        ("standard-line".into(), p(5, 0.0, None)),
        ("standard-torus".into(), p(2, 0.0, None)),
        ("standard-torus".into(), p(3, 0.0, None)),
        ("product".into(), p(2, 0.0, Some("rot:1/3"))),
        ("product".into(), p(2, 0.0, Some("rot:ln2"))),
        ("product".into(), p(2, 0.0, Some("denjoy:golden,12,0.5"))),
        ("periodic-circle".into(), p(3, 0.0, None)),
        ("periodic-circle".into(), p(4, 0.0, None)),
        ("periodic-torus".into(), p(3, 0.0, None)),
        ("perturbed-torus".into(), p(2, 0.7 - ln2, None)),
        ("perturbed-torus".into(), p(2, 1e-3, None)),
        ("morse-smale".into(), p(2, 0.0, None)),
        ("nonfaithful-circle".into(), p(2, 0.0, Some("rot:ln3"))),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{from_u, to_u};
    use crate::circle::rotation_number;

    #[test]
    fn line_action_basics() {
        let a = standard_line(3).unwrap();
        assert_eq!(a.f.apply([0.0, 0.0])[0], 0.0);
        assert_eq!(a.h.apply([0.5, 0.0])[0], 0.5);
        assert!((from_u(a.h.apply([to_u(1.0), 0.0])[0]) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn k_specs() {
        assert_eq!("rot:1/3".parse::<KSpec>().unwrap().lift().unwrap().eval(0.0), 1.0 / 3.0);
        let ln2: KSpec = "rot:ln2".parse().unwrap();
        assert!((ln2.lift().unwrap().eval(0.0) - std::f64::consts::LN_2).abs() < 1e-16);
        let d: KSpec = "denjoy:golden,12,0.5".parse().unwrap();
        assert_eq!(d.denjoy().unwrap().depth(), 12);
        let j: KSpec = r#"{"type":"mobius","a":2.0,"b":0.0}"#.parse().unwrap();
        assert!(matches!(j, KSpec::Lift(LiftSpec::Mobius { .. })));
        let pw: KSpec = r#"{"type":"piecewise","breakpoints":[[0,0.1],[0.5,0.2]]}"#.parse().unwrap();
        pw.lift().unwrap().validate(100).unwrap();
        assert!("spin:3".parse::<KSpec>().is_err());
        assert!("rot:abc".parse::<KSpec>().is_err());
    }

    #[test]
    fn unknown_and_invalid() {
        assert!(matches!(build("nope", &CatalogParams::default()), Err(Error::UnknownCatalog(_))));
        assert!(periodic_circle_example(2).is_err());
        assert!(build("product", &CatalogParams::default()).is_err());
        assert!(standard_torus(1).is_err());
    }

    #[test]
    fn periodic_circle_has_period_two_points() {
        let a = periodic_circle_example(3).unwrap();
        let f = a.f.as_circle().unwrap();
        let min_disp = (0..10_000)
            .map(|i| a.f.displacement([i as f64 / 10_000.0, 0.0]))
            .fold(f64::INFINITY, f64::min);
        assert!(min_disp > 1e-3, "{min_disp}");
        assert!((f.iterate(0.0, 2) - 1.0).abs() < 1e-15);
        assert!((f.iterate(0.5, 2) - 1.5).abs() < 1e-15);
        let est = rotation_number(f, 10_000, 64, 1e-8);
        let w = est.rational_witness.unwrap();
        assert_eq!((w.p, w.q), (1, 2));
    }

    #[test]
    fn every_representative_satisfies_the_relation() {
        for (id, params) in representatives() {
            let a = build(&id, &params).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert!(a.relation.residual < 1e-8, "{id}: {:?}", a.relation);
            assert!(a.relation.iterated_residual < 1e-6, "{id}: {:?}", a.relation);
        }
    }

    #[test]
    fn descriptor_round_trip() {
        let d = ActionDescriptor {
            catalog: "product".into(),
            params: CatalogParams {
                n: 2,
                eps: 0.0,
                k: Some("rot:1/3".into()),
            },
        };
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"catalog":"product","n":2,"eps":0.0,"k":"rot:1/3"}"#);
        let back: ActionDescriptor = serde_json::from_str(&s).unwrap();
        assert_eq!(back.build().unwrap().n, 2);
    }
}
