//! Command-line front end: one JSON report per run (stdout or `--out`), CSV
//! side files for point clouds, exit code 0 / 2 (inconclusive) / 1 (error).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bsgroup::{finite_bs_orbit, BSAction, OrbitResult, DEFAULT_MAX_ORBIT, DEFAULT_MERGE_TOL};
use crate::catalog::{self, ActionDescriptor, CatalogParams, KSpec};
use crate::circle::{rotation_number, DEFAULT_Q_MAX};
use crate::error::{Error, Result};
use crate::estimators::{bs_minimal_set, fixed_cells, MinimalLabel};
use crate::experiments::{persistent_fixed_point, restricted_lift, rotation_set_persistence, trichotomy, Outcome, TrichotomyParams};
use crate::gl2z::{conjugate_in_gl2z, finite_order, IntMatrix2, DEFAULT_CONJUGACY_BOUND};
use crate::perturb::{conjugate_action, BumpField, Support};
use crate::report::{sibling_csv, write_csv, write_report, Report};
use crate::reproduce::{format_table, reproduce, DEFAULT_SEED};
use crate::space::{Lift, Space};
use crate::torus::{bs_rotation_constraint, rotation_set, RhoInput, RotationSetParams};

#[derive(Debug, Parser, Serialize)]
#[command(name = "bsdl", version, about = "BS(1,n) actions on the circle and the torus")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Options {
    /// Catalog entry id (see `bsdl catalog`).
    #[arg(long, global = true)]
    pub catalog: Option<String>,
    /// JSON action descriptor `{"catalog": <id>, "n": .., "eps": .., "k": ..}`.
    #[arg(long, global = true)]
    pub action: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 2)]
    pub n: u32,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub eps: f64,
    /// Circle homeomorphism: `rot:<alpha>`, `denjoy:<alpha>,<depth>,<ratio>`, JSON or `@file`.
    #[arg(long, global = true)]
    pub k: Option<String>,
    #[arg(long, global = true, default_value_t = 256)]
    pub resolution: usize,
    #[arg(long, global = true, default_value_t = 100_000)]
    pub iterates: usize,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Report path; CSV side files are written next to it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
pub enum Generator {
    F,
    H,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
pub enum Command {
    /// List the catalog, or describe one entry when `--catalog` is given.
    Catalog,
    /// Relation residuals `h f h⁻¹ = fⁿ` and `h² f h⁻² = f^{n²}`.
    VerifyRelation,
    /// Rotation number of a circle generator, or of `h` on its attracting invariant circle.
    RotationNumber {
        #[arg(long, value_enum, default_value = "h")]
        map: Generator,
        #[arg(long, default_value_t = DEFAULT_Q_MAX)]
        q_max: u32,
    },
    /// Rotation set of a torus generator and its lattice constraint.
    RotationSet {
        #[arg(long, value_enum, default_value = "f")]
        map: Generator,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long, default_value_t = 100)]
        tail: usize,
    },
    /// Cells moved by less than two cell diameters.
    FixedSet {
        #[arg(long, value_enum, default_value = "f")]
        map: Generator,
    },
    /// Constructive BS-minimal set inside fix(f).
    MinimalSet {
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Orbit of a point under the group, if finite.
    FiniteOrbit {
        /// Chart coordinates `u` or `u,θ`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_MERGE_TOL)]
        merge_tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ORBIT)]
        max_size: usize,
    },
    /// Order of a GL(2,ℤ) matrix and optional conjugacy to another.
    ClassifyMatrix {
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        conjugate_to: Option<String>,
        #[arg(long, default_value_t = DEFAULT_CONJUGACY_BOUND)]
        bound: i64,
    },
    /// Finite orbits / minimal circle / minimal Cantor set.
    Trichotomy,
    /// Common fixed point of both generators, optionally after a random conjugation.
    PersistentFp {
        /// C⁰ size of a random bump conjugation (seeded by `--seed`).
        #[arg(long, default_value_t = 0.0)]
        bump: f64,
    },
    /// Runs the acceptance suite.
    ReproduceAll {
        /// Criterion ids; all when omitted. Pass `--criteria ''` for none.
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<String>>,
    },
}

/// What a run produced before it is written out.
pub struct RunOutput {
    pub report: Report,
    pub csv: Vec<(String, [&'static str; 2], Vec<[f64; 2]>)>,
    pub inconclusive: bool,
    /// Some acceptance criterion did not pass.
    pub failed: bool,
    /// Human-readable text for stderr.
    pub summary: String,
}

impl Options {
    fn descriptor(&self) -> Result<ActionDescriptor> {
        if let Some(p) = &self.action {
            return ActionDescriptor::load(p);
        }
        let catalog = self
            .catalog
            .clone()
            .ok_or_else(|| Error::InvalidParameter("give --catalog <id> or --action <file>".into()))?;
        Ok(ActionDescriptor {
            catalog,
            params: CatalogParams {
                n: self.n,
                eps: self.eps,
                k: self.k.clone(),
            },
        })
    }

    fn build(&self) -> Result<(ActionDescriptor, BSAction)> {
        let d = self.descriptor()?;
        let a = d.build()?;
        Ok((d, a))
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("--tol must be positive".into()));
        }
        if self.resolution == 0 || self.iterates == 0 {
            return Err(Error::InvalidParameter("--resolution and --iterates must be positive".into()));
        }
        Ok(())
    }
}

fn pick(a: &BSAction, g: Generator) -> &Lift {
    match g {
        Generator::F => &a.f,
        Generator::H => &a.h,
    }
}

fn parse_matrix(s: &str) -> Result<IntMatrix2> {
    serde_json::from_str(s).map_err(|e| Error::InvalidParameter(format!("bad matrix `{s}`: {e}")))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Catalog => "catalog",
        Command::VerifyRelation => "verify-relation",
        Command::RotationNumber { .. } => "rotation-number",
        Command::RotationSet { .. } => "rotation-set",
        Command::FixedSet { .. } => "fixed-set",
        Command::MinimalSet { .. } => "minimal-set",
        Command::FiniteOrbit { .. } => "finite-orbit",
        Command::ClassifyMatrix { .. } => "classify-matrix",
        Command::Trichotomy => "trichotomy",
        Command::PersistentFp { .. } => "persistent-fp",
        Command::ReproduceAll { .. } => "reproduce-all",
    }
}

/// Executes a configuration without touching the file system.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let o = &cfg.opts;
    o.validate()?;
    let start = Instant::now();
    let mut csv = Vec::new();
    let mut inconclusive = false;
    let mut summary = String::new();
    let mut timings = Vec::new();
    let result: Value = match &cfg.command {
        Command::Catalog => match &o.catalog {
            None if o.action.is_none() => json!({ "entries": catalog::entries() }),
            _ => {
                let (d, a) = o.build()?;
                json!({ "descriptor": d, "label": a.label, "space": a.space(), "relation": a.relation })
            }
        },
        Command::VerifyRelation => {
            let (d, a) = o.build()?;
            summary = format!("residual {:.2e}, iterated {:.2e}", a.relation.residual, a.relation.iterated_residual);
            json!({ "descriptor": d, "label": a.label, "relation": a.relation, "pass": a.relation.passes() })
        }
        Command::RotationNumber { map, q_max } => {
            let (d, a) = o.build()?;
            let (lift, on) = match pick(&a, *map) {
                Lift::Circle(c) => (c.clone(), "circle"),
                Lift::Torus(_) => {
                    let h = a.h.as_torus().unwrap();
                    if *map != Generator::H {
                        return Err(Error::SpaceMismatch("on the torus only h restricted to its invariant circle has a rotation number".into()));
                    }
                    let c = crate::experiments::find_invariant_circle(
                        h,
                        &crate::experiments::flat_graph(0.0),
                        crate::experiments::Direction::Forward,
                        200,
                        o.tol / 10.0,
                    )?;
                    (restricted_lift(h, &c), "attracting invariant circle")
                }
            };
            let est = rotation_number(&lift, o.iterates, *q_max, o.tol);
            summary = match est.rational_witness {
                Some(w) => format!("rational {}/{}", w.p, w.q),
                None => format!("{} ± {:.1e}", est.value, est.error_bound),
            };
            json!({ "descriptor": d, "map": map, "on": on, "estimate": est })
        }
        Command::RotationSet { map, grid, tail } => {
            let (d, a) = o.build()?;
            let f = pick(&a, *map)
                .as_torus()
                .ok_or_else(|| Error::SpaceMismatch("rotation sets are computed on the torus".into()))?;
            let params = RotationSetParams {
                grid: *grid,
                iterates: o.iterates,
                tail: *tail,
                ..Default::default()
            };
            let (est, constraint) = if *map == Generator::F {
                let ah = a.h.as_torus().unwrap().linear_part();
                if ah == IntMatrix2::IDENTITY {
                    let r = rotation_set_persistence(f, a.n, &params)?;
                    (r.estimate.clone(), Some(json!({ "constraint": r.constraint, "snaps_to_zero": r.pass, "window": r.window })))
                } else {
                    let est = rotation_set(f, &params)?;
                    let value = est.point.unwrap_or_else(|| crate::hull::centroid(&est.hull));
                    let c = bs_rotation_constraint(RhoInput::Estimate { value, error_bound: est.error_bound }, &ah, a.n)?;
                    (est, Some(json!({ "constraint": c })))
                }
            } else {
                (rotation_set(f, &params)?, None)
            };
            csv.push(("hull".into(), ["x", "y"], est.hull.clone()));
            summary = format!("diameter {:.2e}, point: {:?}", est.diameter, est.point);
            json!({ "descriptor": d, "map": map, "estimate": est, "lattice": constraint })
        }
        Command::FixedSet { map } => {
            let (d, a) = o.build()?;
            let cells = fixed_cells(pick(&a, *map), o.resolution, None);
            summary = format!("{} cells at resolution {}", cells.len(), o.resolution);
            csv.push(("cells".into(), ["u", "theta"], cells.iter().map(|c| cells.center(c)).collect()));
            json!({ "descriptor": d, "map": map, "cells": cells })
        }
        Command::MinimalSet { depth } => {
            let (d, a) = o.build()?;
            let est = bs_minimal_set(&a, o.resolution, *depth);
            inconclusive = est.label == MinimalLabel::Unknown;
            summary = format!("{:?} ({} points)", est.label, est.points_count);
            csv.push(("points".into(), ["u", "theta"], est.points.clone()));
            json!({ "descriptor": d, "estimate": est })
        }
        Command::FiniteOrbit { point, merge_tol, max_size } => {
            let (d, a) = o.build()?;
            let x = match (a.space(), point.as_slice()) {
                (Space::Circle, [u]) => [*u, 0.0],
                (Space::Torus, [u, t]) => [*u, *t],
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "--point needs {} coordinate(s)",
                        a.space().dim()
                    )))
                }
            };
            let r = finite_bs_orbit(&a, x, *merge_tol, *max_size);
            if let Some(p) = r.points() {
                csv.push(("orbit".into(), ["u", "theta"], p.to_vec()));
            }
            inconclusive = !matches!(r, OrbitResult::Finite { .. });
            summary = match &r {
                OrbitResult::Finite { points, .. } => format!("finite orbit of {} points", points.len()),
                _ => "no finite orbit confirmed".into(),
            };
            json!({ "descriptor": d, "point": x, "orbit": r })
        }
        Command::ClassifyMatrix { matrix, conjugate_to, bound } => {
            let m = parse_matrix(matrix)?;
            let order = finite_order(&m)?;
            let conj = match conjugate_to {
                Some(b) => Some(conjugate_in_gl2z(&m, &parse_matrix(b)?, *bound)?),
                None => None,
            };
            summary = match order {
                Some(k) => format!("order {k}"),
                None => "infinite order".into(),
            };
            json!({ "matrix": m, "det": m.det(), "trace": m.trace(), "order": order, "conjugacy": conj })
        }
        Command::Trichotomy => {
            let (d, a) = o.build()?;
            let params = TrichotomyParams {
                iterates: o.iterates,
                tol: o.tol,
                ..Default::default()
            };
            let r = trichotomy(&a, &params)?;
            inconclusive = r.outcome == Outcome::Unknown;
            summary = format!("{:?}", r.outcome);
            if let Some(orbit) = &r.evidence.orbit {
                csv.push(("orbit".into(), ["u", "theta"], orbit.clone()));
            }
            json!({ "descriptor": d, "outcome": r.outcome, "report": r })
        }
        Command::PersistentFp { bump } => {
            let (d, a) = o.build()?;
            let a = if *bump > 0.0 {
                conjugate_action(&a, &BumpField::random(o.seed, *bump, Support::Global)?)?
            } else {
                a
            };
            let fp = persistent_fixed_point(&a, o.resolution.min(256));
            inconclusive = fp.is_none();
            summary = match &fp {
                Some(r) => format!("global fixed point at {:?}", r.point),
                None => "no global fixed point found".into(),
            };
            json!({ "descriptor": d, "bump": bump, "fixed_point": fp })
        }
        Command::ReproduceAll { criteria } => {
            let ids: Option<Vec<String>> = criteria
                .as_ref()
                .map(|v| v.iter().filter(|s| !s.trim().is_empty()).cloned().collect());
            let (s, t) = reproduce(ids.as_deref(), o.seed);
            summary = format_table(&s, &t);
            timings = t;
            if !s.all_pass() {
                return Ok(finish(cfg, s, csv, false, summary, start, timings, true));
            }
            serde_json::to_value(&s)?
        }
    };
    Ok(finish(cfg, result, csv, inconclusive, summary, start, timings, false))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    cfg: &RunConfig,
    result: impl Serialize,
    csv: Vec<(String, [&'static str; 2], Vec<[f64; 2]>)>,
    inconclusive: bool,
    summary: String,
    start: Instant,
    timings: Vec<(String, f64)>,
    failed: bool,
) -> RunOutput {
    let config = json!({ "command": &cfg.command, "options": &cfg.opts });
    let mut report = Report::new(command_name(&cfg.command), config, &result).expect("reports are plain JSON");
    report.metadata.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    report.metadata.timings_ms = timings;
    if failed {
        report.metadata.notes.push("one or more criteria did not pass".into());
    }
    report.metadata.notes.extend(caveats(cfg));
    RunOutput {
        report,
        csv,
        inconclusive,
        failed,
        summary,
    }
}

/// Standing limitations of an estimate, attached to the report metadata.
fn caveats(cfg: &RunConfig) -> Vec<String> {
    let o = &cfg.opts;
    let mut notes = Vec::new();
    if let Some(KSpec::Denjoy { depth, .. }) = o.k.as_deref().and_then(|k| k.parse().ok()) {
        notes.push(format!("Denjoy map truncated at depth {depth}; Cantor-set behaviour is approximate at finite depth"));
    }
    match &cfg.command {
        Command::FixedSet { .. } | Command::MinimalSet { .. } => notes.push(
            "support of f-invariant measures in fix(f) is not checked; only Birkhoff-displacement evidence is available".into(),
        ),
        Command::Trichotomy => notes.push(format!("perturbation size eps = {}; no neighbourhood size is asserted", o.eps)),
        Command::PersistentFp { bump } => notes.push(format!("perturbation size {bump}; no neighbourhood size is asserted")),
        _ => {}
    }
    notes
}

/// Runs and writes artifacts; returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    match run_inner(cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run_inner(cfg: &RunConfig) -> Result<i32> {
    let out = execute(cfg)?;
    match &cfg.opts.out {
        Some(path) => {
            write_report(path, &out.report)?;
            for (suffix, header, rows) in &out.csv {
                write_csv(&sibling_csv(path, suffix), *header, rows)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            let text = out.report.to_json()? + "\n";
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    if !out.summary.is_empty() {
        eprintln!("{}", out.summary.trim_end());
    }
    Ok(if out.failed {
        1
    } else if out.inconclusive {
        2
    } else {
        0
    })
}

/// Entry point used by the binary: parses arguments, sizes the thread pool
/// from `BSDL_THREADS`, runs.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = std::env::var("BSDL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    run(&cfg)
}
