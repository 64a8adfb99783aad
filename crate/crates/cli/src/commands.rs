//! Subcommand bodies. Each returns the files it wants written plus a JSON report; main.rs
//! does the I/O and maps the status to an exit code.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use tamelab_core::automorphism::AutomorphismRep;
use tamelab_core::checks::{discreteness_check, Verdict};
use tamelab_core::cn_tame::{push_prefix_cn, rr_series_test, ShearAut, TailPolicy};
use tamelab_core::disc_plane::dp_classify;
use tamelab_core::error::{Error, Result};
use tamelab_core::exhaustion::{ExhaustionFunction, HeightAssignment};
use tamelab_core::families;
use tamelab_core::generic_projection::{
    csv_row, g_estimate, measure_estimate_with, omega_check, select_tame_subset, threshold_estimate, Action,
    ThresholdConfig, CSV_HEADER,
};
use tamelab_core::linalg::{c, det_scale, CMatrix, SLMatrix};
use tamelab_core::pi_tame::{bundle_push, pi_tame_check, BundleSpec};
use tamelab_core::poly::Polynomial;
use tamelab_core::punctured::punctured_tame_check;
use tamelab_core::rng::SeedStream;
use tamelab_core::sl2::{gaussian_sl2_generate, overshear_apply, sl2_column_pipeline, LambdaForm, NumberField, OvershearSpec};
use tamelab_core::sln_tame::{
    align_first_columns, center_separate, equivalence_automorphism, lambda_rescale, one_param_check, phase_partner,
    torus_embed, union_decompose, well_placed_check, wellplaced2, OneParamSubgroup, RescaleTable, ShearFamily,
};
use tamelab_core::space::{AmbientSpace, DiscreteSequence};

use crate::config::RunConfig;
use crate::suite;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Violated,
}

impl Status {
    pub fn of(v: &Verdict) -> Self {
        if v.is_violated() {
            Status::Violated
        } else {
            Status::Ok
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Violated => 2,
        }
    }
}

#[derive(Debug)]
pub struct Output {
    pub status: Status,
    pub report: Value,
    pub files: Vec<(PathBuf, String)>,
    /// One-line summary for non-JSON mode.
    pub summary: String,
    /// What to print when there is no --out: the sequence, CSV or JSON that would have been written.
    pub stdout: Option<String>,
}

pub fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

pub fn read_sequence(path: &Path) -> Result<DiscreteSequence> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    DiscreteSequence::from_json(&text)
}

/// `base.json` → `base.<suffix>.json`.
/// File name only, so reports do not depend on the working directory.
fn file_label(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned())
}

pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}.{suffix}.json"))
}

#[derive(Clone, Debug, Default)]
pub struct GenParams {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub field: Option<String>,
    pub height: Option<u32>,
    pub variant: Option<String>,
}

pub fn gen(family: &str, p: &GenParams, out: Option<&Path>) -> Result<Output> {
    let k = p.k.unwrap_or(30);
    let mut extra = Vec::new();
    let seq = match family {
        "wellplaced2" => wellplaced2(k)?,
        "diagtorus" => families::diagtorus(p.n.unwrap_or(2), k)?,
        "cn-powers" => families::cn_powers(p.n.unwrap_or(2), p.alpha.unwrap_or(1.0), k)?,
        "punctured-accumulate" => families::punctured_accumulate(p.n.unwrap_or(2), k)?,
        "discplane-base" => families::discplane_base(p.variant.as_deref().unwrap_or("boundary"), k)?,
        "sl2-gauss" => {
            let field = NumberField::parse(p.field.as_deref().unwrap_or("qi"))?;
            let g = gaussian_sl2_generate(field, p.height.unwrap_or(1))?;
            if let Some(o) = out {
                extra.push((sibling(o, "exact"), pretty(&json!({"field": field.tag(), "height": g.height, "matrices": g.exact}))));
            }
            g.sequence
        }
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    let mut files = vec![];
    if let Some(o) = out {
        files.push((o.to_path_buf(), seq.to_json() + "\n"));
    }
    files.extend(extra);
    let report = json!({"family": family, "ambient": seq.ambient().tag(), "n": seq.ambient().n(), "points": seq.len()});
    let summary = format!("{family}: {} points in {}", seq.len(), seq.ambient().tag());
    Ok(Output { status: Status::Ok, report, files, summary, stdout: Some(seq.to_json() + "\n") })
}

pub const CRITERIA: [&str; 7] = ["rr-series", "dp-classify", "punctured", "wellplaced", "pi-tame", "one-param", "discreteness"];

pub fn check(seq_path: &Path, criterion: &str, subgroup: Option<&str>, cfg: &RunConfig) -> Result<Output> {
    let d = read_sequence(seq_path)?;
    let mut details = Value::Null;
    let verdict = match criterion {
        "rr-series" => {
            let rep = rr_series_test(&d, TailPolicy::MonotoneTailBound)?;
            details = rep.to_json();
            rep.verdict
        }
        "dp-classify" => dp_classify(&d, cfg.min_gap.max(1e-3), cfg.max_fiber)?,
        "punctured" => {
            if !matches!(d.ambient(), AmbientSpace::PuncturedCn(_)) {
                return Err(Error::AmbientMismatch(format!("punctured check on {}", d.ambient().tag())));
            }
            punctured_tame_check(&d, cfg.min_gap)?
        }
        "wellplaced" => {
            let (v, rep) = well_placed_check(&d)?;
            details = serde_json::to_value(rep).expect("report serializes");
            v
        }
        "pi-tame" => match d.ambient() {
            AmbientSpace::SLn(n) => pi_tame_check(&d, &BundleSpec::first_column(n), cfg.min_gap, cfg.max_fiber)?,
            other => return Err(Error::AmbientMismatch(format!("pi-tame check on {}", other.tag()))),
        },
        "one-param" => {
            let n = match d.ambient() {
                AmbientSpace::SLn(n) => n,
                other => return Err(Error::AmbientMismatch(format!("one-parameter check on {}", other.tag()))),
            };
            let sub = match subgroup.unwrap_or("diagonal") {
                "diagonal" => OneParamSubgroup::Diagonal { n },
                "unipotent" => {
                    let mut g = CMatrix::zeros(n, n);
                    g.set(0, n - 1, c(1.0, 0.0));
                    OneParamSubgroup::Unipotent { generator: g }
                }
                other => return Err(Error::BadParams(format!("unknown subgroup {other}"))),
            };
            one_param_check(&d, &sub, cfg.min_gap)?
        }
        "discreteness" => discreteness_check(&d, cfg.min_gap)?,
        other => return Err(Error::BadParams(format!("unknown criterion {other}; expected one of {CRITERIA:?}"))),
    };
    let summary = format!("{criterion}: {} ({})", verdict.label(), verdict.detail);
    let report = json!({"command": "check", "criterion": criterion, "input": file_label(seq_path), "points": d.len(),
        "config": cfg, "verdict": verdict, "details": details});
    Ok(Output { status: Status::of(&verdict), report, files: Vec::new(), summary, stdout: None })
}

#[derive(Clone, Debug, Default)]
pub struct TransformParams {
    pub lambda: Option<String>,
    pub partner: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub tries: Option<usize>,
    pub family: Option<String>,
    pub zeta: Option<f64>,
    pub axis: Option<usize>,
    pub driven_by: Option<usize>,
    pub coeffs: Option<Vec<f64>>,
}

pub const TRANSFORMS: [&str; 11] = [
    "shear",
    "overshear",
    "rescale",
    "union-decompose",
    "torus-embed",
    "align",
    "equivalence",
    "sl2-pipeline",
    "center-separate",
    "bundle-push",
    "push-cn",
];

fn parse_lambda(s: &str) -> Result<OvershearSpec> {
    match s.trim() {
        "1+a" => Ok(OvershearSpec::one_plus_a()),
        "1" | "identity" => Ok(OvershearSpec::identity()),
        json_text => serde_json::from_str::<LambdaForm>(json_text)
            .map(|lambda| OvershearSpec { lambda })
            .map_err(|e| Error::Parse(format!("lambda must be \"1+a\", \"identity\" or a JSON form: {e}"))),
    }
}

fn image(d: &DiscreteSequence, phi: &AutomorphismRep) -> Result<DiscreteSequence> {
    let pts = d.points().iter().map(|p| phi.apply(p)).collect::<Result<Vec<_>>>()?;
    DiscreteSequence::new(d.ambient(), pts, None)
}

fn seed_of(cfg: &RunConfig) -> Result<SeedStream> {
    Ok(SeedStream::new(cfg.require_seed()?))
}

pub fn transform(seq_path: &Path, name: &str, p: &TransformParams, cfg: &RunConfig, out: Option<&Path>) -> Result<Output> {
    let d = read_sequence(seq_path)?;
    let mut phi = AutomorphismRep::Identity;
    let mut extra: Vec<(String, DiscreteSequence)> = Vec::new();
    let mut details = Value::Null;
    let (result, verdict) = match name {
        "shear" => {
            let f = Polynomial::from_real_coeffs(p.coeffs.as_deref().unwrap_or(&[0.0, 0.0, 1.0]));
            phi = AutomorphismRep::Shear(ShearAut::new(p.axis.unwrap_or(1), p.driven_by.unwrap_or(0), f)?);
            let img = image(&d, &phi)?;
            let v = discreteness_check(&img, cfg.min_gap)?;
            (img, v)
        }
        "overshear" => {
            let spec = parse_lambda(p.lambda.as_deref().unwrap_or("1+a"))?;
            phi = AutomorphismRep::Overshear(spec.clone());
            let mats = d.matrices()?;
            let imgs = mats.iter().map(|m| overshear_apply(&spec, m)).collect::<Result<Vec<_>>>()?;
            let drift = imgs.iter().map(|m| m.det_drift()).fold(0.0, f64::max);
            // Large entries make |ad - bc| cancel, so the verdict uses drift per unit of |a||d| + |b||c|.
            let (worst, rel) = imgs
                .iter()
                .enumerate()
                .map(|(i, m)| (i, m.det_drift() / det_scale(m.matrix()).max(1.0)))
                .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            details = json!({"max_det_drift": drift, "max_relative_det_drift": rel});
            let v = if rel <= cfg.det_tol {
                Verdict::consistent(format!("max determinant drift {drift:e}, relative {rel:e}"))
            } else {
                Verdict::violated(vec![worst], format!("relative determinant drift {rel:e} above {:e}", cfg.det_tol))
            };
            (DiscreteSequence::from_matrices(imgs, None)?, v)
        }
        "rescale" => {
            let table = RescaleTable::conforming(d.ambient().n(), d.len(), &seed_of(cfg)?);
            let img = lambda_rescale(&d, &table, true)?;
            details = serde_json::to_value(&table).expect("table serializes");
            let (v, _) = well_placed_check(&img)?;
            (img, v)
        }
        "union-decompose" => {
            let parts = union_decompose(&d)?;
            let n = d.ambient().n();
            let mats = d.matrices()?;
            let mut ok = true;
            for (k, idx) in parts.indices.iter().enumerate() {
                ok &= idx.iter().all(|&i| mats[i].matrix().column_norm(k) >= mats[i].max_column_norm() / n as f64);
            }
            for (k, part) in parts.parts.iter().enumerate() {
                extra.push((format!("part{}", k + 1), part.clone()));
            }
            details = json!({"indices": parts.indices, "norm_bound_verified": ok});
            let v = if ok {
                Verdict::certified("column-dominance", format!("{n} parts, every member has its column norm at least 1/{n} of the maximum"))
            } else {
                Verdict::violated(vec![0], "column-dominance bound failed")
            };
            (d.clone(), v)
        }
        "torus-embed" => {
            let mats: Vec<SLMatrix> = d.matrices()?.into_iter().cloned().collect();
            let (imgs, v) = torus_embed(&mats, cfg.min_gap)?;
            let prod = imgs.iter().map(|x| (x.entries().iter().product::<tamelab_core::linalg::C64>() - 1.0).norm()).fold(0.0, f64::max);
            details = json!({"max_product_error": prod});
            (DiscreteSequence::from_vectors(AmbientSpace::Cn(d.ambient().n()), imgs, None)?, v)
        }
        "align" => {
            let b = match &p.partner {
                Some(path) => read_sequence(path)?,
                None => phase_partner(&d)?,
            };
            let al = align_first_columns(&d, &b)?;
            details = json!({"constraints": al.constraints, "tables": al.tables});
            extra.push(("e".into(), al.e.clone()));
            let v = if al.all_constraints_hold() {
                Verdict::consistent("first columns agree and all constraint groups hold")
            } else {
                let bad: Vec<&str> = al.constraints.iter().filter(|g| !g.ok).map(|g| g.name.as_str()).collect();
                Verdict::violated(vec![0], format!("constraint groups failing: {bad:?}"))
            };
            (al.c, v)
        }
        "equivalence" => {
            let target = read_sequence(p.target.as_deref().ok_or_else(|| Error::BadParams("equivalence needs --target".into()))?)?;
            let (f, rep) = equivalence_automorphism(&target, &d, &seed_of(cfg)?)?;
            phi = f;
            details = serde_json::to_value(&rep).expect("report serializes");
            let img = image(&d, &phi)?;
            let worst = img
                .matrices()?
                .iter()
                .zip(target.matrices()?)
                .map(|(x, y)| x.matrix().max_dist(y.matrix()))
                .fold(0.0, f64::max);
            let v = Verdict::consistent(format!("image matches the target within {worst:e}"));
            (img, v)
        }
        "sl2-pipeline" => {
            let (f, v, rep) = sl2_column_pipeline(&d, &seed_of(cfg)?, cfg.min_gap, cfg.max_fiber.max(64))?;
            phi = f;
            details = serde_json::to_value(&rep).expect("report serializes");
            (image(&d, &phi)?, v)
        }
        "center-separate" => {
            let family = match p.family.as_deref().unwrap_or("general") {
                "general" => ShearFamily::General,
                "even" => ShearFamily::EvenOnly,
                other => return Err(Error::BadParams(format!("unknown shear family {other}"))),
            };
            let (f, v) = center_separate(&d, p.tries.unwrap_or(64), &seed_of(cfg)?, family)?;
            phi = f;
            (image(&d, &phi)?, v)
        }
        "bundle-push" | "push-cn" => {
            let zeta = HeightAssignment::constant(d.len(), p.zeta.unwrap_or(10.0))?;
            let (f, rep) = if name == "bundle-push" {
                let (f, rep) = bundle_push(&d, &zeta, &seed_of(cfg)?, cfg.distinct_tol)?;
                (f, serde_json::to_value(rep).expect("report serializes"))
            } else {
                let (f, rep) = push_prefix_cn(&d, &zeta, seed_of(cfg)?, cfg.distinct_tol)?;
                (f, serde_json::to_value(rep).expect("report serializes"))
            };
            phi = f;
            details = rep;
            let img = image(&d, &phi)?;
            let v = Verdict::consistent(format!("every image point reaches height {}", p.zeta.unwrap_or(10.0)));
            (img, v)
        }
        other => return Err(Error::BadParams(format!("unknown transform {other}; expected one of {TRANSFORMS:?}"))),
    };
    let mut files = Vec::new();
    if let Some(o) = out {
        files.push((o.to_path_buf(), result.to_json() + "\n"));
        files.push((sibling(o, "aut"), phi.to_json() + "\n"));
        for (suffix, s) in &extra {
            files.push((sibling(o, suffix), s.to_json() + "\n"));
        }
    }
    let summary = format!("{name}: {} ({})", verdict.label(), verdict.detail);
    let report = json!({"command": "transform", "transform": name, "input": file_label(seq_path), "config": cfg,
        "verdict": verdict, "automorphism": phi, "details": details});
    if let Some(o) = out {
        files.push((sibling(o, "report"), pretty(&report)));
    }
    Ok(Output { status: Status::of(&verdict), report, files, summary, stdout: None })
}

#[derive(Clone, Debug, Default)]
pub struct McParams {
    pub radii: Vec<f64>,
    pub r: Vec<f64>,
    pub levels: Option<usize>,
    pub seq: Option<PathBuf>,
    pub action: Option<String>,
}

pub const MC_ACTIONS: [&str; 5] = ["measure", "g", "threshold", "omega", "select"];

fn diag(r: f64) -> Result<SLMatrix> {
    SLMatrix::new(CMatrix::diag(&[c(r, 0.0), c(1.0 / r, 0.0)]))
}

pub fn mc(action: &str, p: &McParams, cfg: &RunConfig, out: Option<&Path>) -> Result<Output> {
    let seed = cfg.require_seed()?;
    let radii = if p.radii.is_empty() { vec![10.0, 100.0, 1000.0] } else { p.radii.clone() };
    let rs = if p.r.is_empty() { vec![1.0] } else { p.r.clone() };
    let (text, report, summary, status) = match action {
        "measure" | "g" => {
            let act = Action::parse(p.action.as_deref().unwrap_or("conjugation"))?;
            let mut csv = String::from(CSV_HEADER);
            csv.push('\n');
            let mut rows = Vec::new();
            for &big in &radii {
                for &r in &rs {
                    let e = if action == "measure" {
                        measure_estimate_with(act, &diag(big)?, r, cfg.samples, seed)?
                    } else {
                        if act != Action::Conjugation {
                            return Err(Error::BadParams("g uses the conjugation action".into()));
                        }
                        let g = g_estimate(big, r, cfg.probes, cfg.samples, seed)?;
                        g.per_probe.into_iter().max_by(|a, b| a.estimate.total_cmp(&b.estimate)).ok_or(Error::Empty)?
                    };
                    csv.push_str(&csv_row(act.tag(), big, r, &e));
                    csv.push('\n');
                    rows.push(e);
                }
            }
            let summary = format!("{action}: {} rows, estimates {:?}", rows.len(), rows.iter().map(|e| e.estimate).collect::<Vec<_>>());
            (csv, json!({"command": "mc", "action": action, "config": cfg, "rows": rows}), summary, Status::Ok)
        }
        "threshold" => {
            let tc = ThresholdConfig { samples: cfg.samples, probes: cfg.probes, seed, cap: 1e12 };
            let t = threshold_estimate(p.levels.unwrap_or(5), &tc)?;
            let summary = format!("threshold: R = {:?}", t.r_hat);
            (pretty(&t), serde_json::to_value(&t).expect("estimate serializes"), summary, Status::Ok)
        }
        "omega" => {
            let d = read_sequence(p.seq.as_deref().ok_or_else(|| Error::BadParams("omega needs --seq".into()))?)?;
            let rep = omega_check(&d, cfg.samples, seed, cfg.min_gap)?;
            let summary = format!("omega: pass fraction {} over {} samples", rep.pass_fraction, rep.samples);
            let value = json!({"command": "mc", "action": "omega", "config": cfg, "report": rep});
            (pretty(&value), value, summary, Status::Ok)
        }
        "select" => {
            let d = read_sequence(p.seq.as_deref().ok_or_else(|| Error::BadParams("select needs --seq".into()))?)?;
            let tc = ThresholdConfig { samples: cfg.samples, probes: cfg.probes, seed, cap: 1e12 };
            let t = threshold_estimate(p.levels.unwrap_or(5), &tc)?;
            let (sub, idx) = select_tame_subset(&d, ExhaustionFunction::MatrixMaxColumnNorm, &t)?;
            let summary = format!("select: kept indices {idx:?}");
            (sub.to_json() + "\n", json!({"command": "mc", "action": "select", "config": cfg, "threshold": t, "indices": idx}), summary, Status::Ok)
        }
        other => return Err(Error::BadParams(format!("unknown mc action {other}; expected one of {MC_ACTIONS:?}"))),
    };
    let files = out.map(|o| vec![(o.to_path_buf(), text.clone())]).unwrap_or_default();
    Ok(Output { status, report, files, summary, stdout: Some(text) })
}

/// Runs the library criteria and writes one JSON file per criterion plus a summary.
pub fn report(ids: &[u8], cfg: &RunConfig, out: Option<&Path>) -> Result<Output> {
    let seed = cfg.require_seed()?;
    let mut files = Vec::new();
    let mut rows = Vec::new();
    let mut all = true;
    for &id in ids {
        let o = suite::run(id, seed)?;
        all &= o.pass;
        rows.push(json!({"criterion": id, "title": o.title, "pass": o.pass, "summary": o.summary}));
        if let Some(dir) = out {
            files.push((dir.join(format!("criterion_{id:02}.json")), pretty(&o.report)));
        }
    }
    let report = json!({"command": "report", "seed": seed, "criteria": rows});
    if let Some(dir) = out {
        files.push((dir.join("summary.json"), pretty(&report)));
    }
    let lines: Vec<String> = rows
        .iter()
        .map(|r| format!("{} criterion {}: {}", if r["pass"] == true { "PASS" } else { "FAIL" }, r["criterion"], r["summary"].as_str().unwrap_or("")))
        .collect();
    Ok(Output { status: if all { Status::Ok } else { Status::Violated }, report, files, summary: lines.join("\n"), stdout: None })
}
