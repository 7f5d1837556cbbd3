use std::sync::Arc;

use clap::Args;
use restart_grade::bounds::{fit_envelope, grade_bounds};
use restart_grade::cache::{load_or_build, Cache};
use restart_grade::continuum::{bm_grade, bm_grade_quadrature, bm_h, BmProblem};
use restart_grade::disk::disk_report;
use restart_grade::grade::{extract_strategy, solve_grade, threshold_gap, RestartProblem};
use restart_grade::harmonic::{build_profile, HarmonicProfile};
use restart_grade::lattice::LatticePoint;
use restart_grade::montecarlo::{compare_strategies, simulate_strategy, StrategySpec, WalkParams};
use restart_grade::verify::{Suite, Verifier};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{one_or_many, Common};
use crate::error::CliError;
use crate::report::{num, opt_num, Report};

type Result<T> = std::result::Result<T, CliError>;

pub trait CommandArgs {
    fn common(&self) -> &Common;
}

macro_rules! command_args {
    ($($t:ty),*) => {
        $(impl CommandArgs for $t {
            fn common(&self) -> &Common {
                &self.common
            }
        })*
    };
}

command_args!(GradeArgs, BoundsArgs, McArgs, DiskArgs, BmArgs, KernelArgs, VerifyArgs);

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct GradeArgs {
    /// Dimension (inferred from --x when absent; a scalar --x is placed on the first axis)
    #[arg(long)]
    pub d: Option<usize>,

    /// Start point such as 3 or 10,0; repeat for several points
    #[arg(long, visible_alias = "x0", allow_hyphen_values = true)]
    #[serde(deserialize_with = "one_or_many")]
    pub x: Vec<String>,

    /// Truncation box radius [default: max(2, ceil(2|x|))]
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub radius: Option<i64>,

    /// Sup-norm tolerance of the value iteration
    #[arg(long)]
    pub vi_tol: Option<f64>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundsArgs {
    #[arg(long)]
    pub d: Option<usize>,

    /// Point such as 3 or 10,0; repeat for several points
    #[arg(long, visible_alias = "x0", allow_hyphen_values = true)]
    #[serde(deserialize_with = "one_or_many")]
    pub x: Vec<String>,

    /// Radius of the potential table [default: max(16, 2|x|_inf + 4), or max(8, |x|_inf + 6) for d >= 3]
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub radius: Option<i64>,

    /// Box radius over which the envelope constants are fitted [default: L - 1]
    #[arg(long)]
    pub fit_radius: Option<i64>,

    /// Also solve for the grade at each point
    #[arg(long)]
    pub with_grade: bool,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct McArgs {
    #[arg(long)]
    pub d: Option<usize>,

    /// Start point; the target is the origin
    #[arg(long, visible_alias = "x0", allow_hyphen_values = true)]
    #[serde(deserialize_with = "one_or_many")]
    pub x: Vec<String>,

    /// Master seed (required)
    #[arg(long)]
    pub seed: Option<u64>,

    /// Number of replicates [default: 10000]
    #[arg(long)]
    pub replicates: Option<usize>,

    /// never, euclidean, euclidean:RADIUS, h-threshold or optimal; repeat to compare [default: optimal and euclidean]
    #[arg(long)]
    #[serde(deserialize_with = "one_or_many")]
    pub strategy: Vec<String>,

    /// Moves after which a replicate is censored [default: 10^8 d]
    #[arg(long)]
    pub step_cap: Option<u64>,

    /// Box radius for the optimal and h-threshold strategies [default: max(2, ceil(2|x|))]
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub radius: Option<i64>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DiskArgs {
    /// Disk radius
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub disk_radius: Option<f64>,

    /// Start point such as 10,0; repeat for several points
    #[arg(long, visible_alias = "x", allow_hyphen_values = true)]
    #[serde(deserialize_with = "one_or_many")]
    pub x0: Vec<String>,

    /// Radius of the potential table; the envelope is fitted on L - 1 [default: ceil(R) + 4]
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub radius: Option<i64>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BmArgs {
    #[arg(long)]
    pub d: Option<usize>,

    /// Radius of the target ball
    #[arg(long)]
    pub r0: Option<f64>,

    /// Distance |x| from the origin; repeat for several
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "one_or_many")]
    pub x: Vec<String>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelArgs {
    #[arg(long)]
    pub d: Option<usize>,

    /// Table radius [default: 8, or large enough for the requested points]
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub radius: Option<i64>,

    /// Points to report; the whole table when absent
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "one_or_many")]
    pub x: Vec<String>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyArgs {
    /// Suites to run (z1-exact, z2-asymptotic, z3-asymptotic, sandwich,
    /// threshold, montecarlo, disk, continuum, potential) or all
    #[serde(deserialize_with = "one_or_many")]
    pub suite: Vec<String>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn cache_of(common: &Common) -> Option<Cache> {
    if common.no_cache {
        None
    } else {
        Some(
            common
                .cache_dir
                .clone()
                .map_or_else(Cache::from_env, Cache::new),
        )
    }
}

/// Parses points, lifting scalars onto the first axis of dimension `d`.
fn parse_points(raw: &[String], d: Option<usize>, flag: &str) -> Result<Vec<LatticePoint>> {
    if raw.is_empty() {
        return Err(config_err(format!("{flag} is required")));
    }
    let mut pts = Vec::with_capacity(raw.len());
    for s in raw {
        let p: LatticePoint = s
            .parse()
            .map_err(|e: restart_grade::Error| config_err(e.to_string()))?;
        let p = match d {
            Some(d) if p.dim() == 1 && d > 1 => LatticePoint::on_axis(d, p.coords()[0]),
            Some(d) if p.dim() != d => {
                return Err(config_err(format!(
                    "{flag} {s} has {} coordinates but d = {d}",
                    p.dim()
                )))
            }
            _ => p,
        };
        pts.push(p);
    }
    if pts.iter().any(|p| p.dim() != pts[0].dim()) {
        return Err(config_err(format!(
            "all {flag} points must have the same dimension"
        )));
    }
    Ok(pts)
}

fn positive_radius(radius: Option<i64>, min: i64, flag: &str) -> Result<()> {
    match radius {
        Some(l) if l < min => Err(config_err(format!(
            "{flag} must be at least {min}, got {l}"
        ))),
        _ => Ok(()),
    }
}

fn profile(cache: Option<&Cache>, d: usize, radius: i64) -> Result<HarmonicProfile> {
    let table = load_or_build(cache, d, radius)?;
    Ok(build_profile(table, &LatticePoint::origin(d))?)
}

pub fn grade(a: &GradeArgs, _cache: Option<Cache>) -> Result<Report> {
    let pts = parse_points(&a.x, a.d, "--x")?;
    positive_radius(a.radius, 1, "--L")?;
    if a.vi_tol.is_some_and(|t| !(t > 0.0)) {
        return Err(config_err("--vi-tol must be positive"));
    }
    let problems = pts
        .into_iter()
        .map(|p| {
            let mut pr = match a.radius {
                Some(l) => RestartProblem::with_radius(p, l)?,
                None => RestartProblem::new(p)?,
            };
            if let Some(t) = a.vi_tol {
                pr.vi_tol = t;
            }
            Ok(pr)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = Report::new(
        &[
            "d",
            "x",
            "L",
            "grade",
            "bracket_low",
            "bracket_high",
            "bisection_steps",
            "sweeps",
            "residual",
            "c_out",
            "c_in",
            "restart_points",
        ],
        json!({}),
    );
    let mut outputs = Vec::new();
    for pr in &problems {
        let sol = solve_grade(pr)?;
        let gap = threshold_gap(&sol);
        let set = extract_strategy(&sol);
        report.push(vec![
            pr.dim().to_string(),
            sol.start.joined(" "),
            sol.radius.to_string(),
            num(sol.grade),
            num(sol.bracket.0),
            num(sol.bracket.1),
            sol.bisection_steps.to_string(),
            sol.sweeps.to_string(),
            num(sol.residual),
            num(gap.c_out),
            num(gap.c_in),
            set.len().to_string(),
        ]);
        outputs.push(json!({
            "x": sol.start.coords(),
            "L": sol.radius,
            "grade": sol.grade,
            "c_out": gap.c_out,
            "c_in": gap.c_in,
        }));
    }
    report.outputs = json!({ "grades": outputs });
    Ok(report)
}

pub fn bounds(a: &BoundsArgs, cache: Option<Cache>) -> Result<Report> {
    let pts = parse_points(&a.x, a.d, "--x")?;
    let d = pts[0].dim();
    if d > 5 {
        return Err(config_err(format!(
            "bounds are available for d <= 5, got d = {d}"
        )));
    }
    let m = pts.iter().map(LatticePoint::max_abs).max().unwrap_or(0);
    let radius = a.radius.unwrap_or(if d <= 2 {
        (2 * m + 4).max(16)
    } else {
        (m + 6).max(8)
    });
    positive_radius(Some(radius), if d >= 3 { 4 } else { 2 }, "--L")?;
    let fit = a.fit_radius.unwrap_or(radius - 1);
    if !(1..radius).contains(&fit) {
        return Err(config_err(format!(
            "--fit-radius must lie in 1..{radius}, got {fit}"
        )));
    }
    if m >= radius {
        return Err(config_err(format!(
            "points must lie strictly inside the table of radius {radius}"
        )));
    }

    let prof = profile(cache.as_ref(), d, radius)?;
    let env = fit_envelope(&prof, fit)?;
    let mut report = Report::new(
        &[
            "d",
            "x",
            "L",
            "fit_radius",
            "h",
            "h_star",
            "lower",
            "upper",
            "c_lower",
            "c_upper",
            "grade",
        ],
        json!({}),
    );
    let mut outputs = Vec::new();
    for p in &pts {
        let b = grade_bounds(&prof, &env, p)?;
        let g = if a.with_grade && !p.is_origin() {
            Some(solve_grade(&RestartProblem::new(p.clone())?)?.grade)
        } else {
            None
        };
        report.push(vec![
            d.to_string(),
            p.joined(" "),
            radius.to_string(),
            fit.to_string(),
            num(b.h),
            num(b.h_star),
            num(b.lower),
            num(b.upper),
            num(env.c_lower),
            num(env.c_upper),
            opt_num(g),
        ]);
        outputs.push(json!({ "x": p.coords(), "lower": b.lower, "upper": b.upper, "grade": g }));
    }
    report.outputs = json!({ "envelope": env, "bounds": outputs });
    Ok(report)
}

enum StrategyChoice {
    Never,
    Euclidean(Option<f64>),
    HThreshold,
    Optimal,
}

fn parse_strategy(s: &str) -> Result<StrategyChoice> {
    Ok(match s {
        "never" => StrategyChoice::Never,
        "euclidean" => StrategyChoice::Euclidean(None),
        "h-threshold" => StrategyChoice::HThreshold,
        "optimal" => StrategyChoice::Optimal,
        _ => match s.strip_prefix("euclidean:").map(str::parse::<f64>) {
            Some(Ok(r)) if r >= 0.0 => StrategyChoice::Euclidean(Some(r)),
            _ => {
                return Err(config_err(format!(
                    "unknown strategy {s:?}; expected never, euclidean, euclidean:RADIUS, h-threshold or optimal"
                )))
            }
        },
    })
}

pub fn mc(a: &McArgs, cache: Option<Cache>) -> Result<Report> {
    let pts = parse_points(&a.x, a.d, "--x")?;
    if pts.len() != 1 {
        return Err(config_err("mc takes exactly one --x"));
    }
    let start = pts.into_iter().next().expect("one point");
    let seed = a
        .seed
        .ok_or_else(|| config_err("--seed is required for mc"))?;
    let replicates = a.replicates.unwrap_or(10_000);
    if replicates == 0 {
        return Err(config_err("--replicates must be at least 1"));
    }
    if a.step_cap == Some(0) {
        return Err(config_err("--step-cap must be at least 1"));
    }
    positive_radius(a.radius, 1, "--L")?;
    let names: Vec<String> = if a.strategy.is_empty() {
        vec!["optimal".into(), "euclidean".into()]
    } else {
        a.strategy.clone()
    };
    let choices = names
        .iter()
        .map(|s| parse_strategy(s))
        .collect::<Result<Vec<_>>>()?;
    if start.is_origin() {
        return Err(config_err("the start must differ from the target"));
    }

    let problem = match a.radius {
        Some(l) => RestartProblem::with_radius(start.clone(), l)?,
        None => RestartProblem::new(start.clone())?,
    };
    let mut grade = None;
    let mut specs = Vec::new();
    for (name, choice) in names.iter().zip(choices) {
        let mut spec = match choice {
            StrategyChoice::Never => StrategySpec::never(),
            StrategyChoice::Euclidean(r) => {
                StrategySpec::euclidean(r.unwrap_or_else(|| start.norm()))
            }
            StrategyChoice::HThreshold => {
                let radius = problem.radius.max(if start.dim() >= 3 { 4 } else { 2 });
                let prof = profile(cache.as_ref(), start.dim(), radius)?;
                StrategySpec::h_threshold(Arc::new(prof), &start)?
            }
            StrategyChoice::Optimal => {
                let sol = solve_grade(&problem)?;
                grade = Some(sol.grade);
                StrategySpec::restart_set(extract_strategy(&sol))
            }
        };
        spec.name = name.clone();
        specs.push(spec);
    }
    let mut params = WalkParams::new(start.clone(), replicates, seed);
    if let Some(cap) = a.step_cap {
        params.step_cap = cap;
    }
    let rows = if specs.len() == 1 {
        vec![(specs[0].clone(), simulate_strategy(&specs[0], &params)?)]
    } else {
        compare_strategies(&specs, &params)?
    };

    let mut report = Report::new(
        &[
            "strategy",
            "mean",
            "std_error",
            "ci95_low",
            "ci95_high",
            "replicates",
            "censored",
            "seed",
        ],
        json!({}),
    );
    let mut outputs = Vec::new();
    for (spec, e) in &rows {
        let half = 1.96 * e.std_error;
        report.push(vec![
            spec.name.clone(),
            num(e.mean),
            num(e.std_error),
            num(e.mean - half),
            num(e.mean + half),
            e.replicates.to_string(),
            e.censored.to_string(),
            e.seed.to_string(),
        ]);
        outputs.push(json!({ "strategy": spec.name, "estimate": e }));
    }
    report.outputs = json!({ "x": start.coords(), "grade": grade, "estimates": outputs });
    Ok(report)
}

pub fn disk(a: &DiskArgs, cache: Option<Cache>) -> Result<Report> {
    let r = a.disk_radius.ok_or_else(|| config_err("--R is required"))?;
    if !(r >= 1.0 && r.is_finite()) {
        return Err(config_err(format!("--R must be at least 1, got {r}")));
    }
    let pts = parse_points(&a.x0, Some(2), "--x0")?;
    if let Some(p) = pts.iter().find(|p| p.norm() > r) {
        return Err(config_err(format!(
            "{p} lies outside the disk of radius {r}"
        )));
    }
    let min_radius = r.ceil() as i64 + 2;
    let radius = a.radius.unwrap_or(min_radius + 2);
    positive_radius(Some(radius), min_radius, "--L")?;

    let prof = profile(cache.as_ref(), 2, radius)?;
    let env = fit_envelope(&prof, radius - 1)?;
    let mut report = Report::new(
        &[
            "R",
            "x0",
            "exact",
            "lower",
            "upper",
            "delta_bound",
            "asymptotic",
            "h1",
            "mu_near",
            "mu_domain",
            "resistance",
            "solver_residual",
        ],
        json!({}),
    );
    let mut outputs = Vec::new();
    for p in &pts {
        let rep = disk_report(r, p, &prof, &env)?;
        report.push(vec![
            num(r),
            p.joined(" "),
            num(rep.exact),
            num(rep.bounds.lower),
            num(rep.bounds.upper),
            num(rep.bounds.delta_bound),
            num(rep.asymptotic),
            num(rep.bounds.h1),
            rep.bounds.mu_near.to_string(),
            rep.mu_domain.to_string(),
            num(rep.bounds.resistance),
            num(rep.solver_residual),
        ]);
        outputs.push(json!({
            "x0": p.coords(),
            "exact": rep.exact,
            "bounds": rep.bounds,
            "asymptotic": rep.asymptotic,
        }));
    }
    report.outputs = json!({ "R": r, "L": radius, "envelope": env, "instances": outputs });
    Ok(report)
}

pub fn bm(a: &BmArgs, _cache: Option<Cache>) -> Result<Report> {
    let d = a.d.ok_or_else(|| config_err("--d is required"))?;
    let r0 = a.r0.ok_or_else(|| config_err("--r0 is required"))?;
    let problem = BmProblem::new(d, r0).map_err(|e| config_err(e.to_string()))?;
    if a.x.is_empty() {
        return Err(config_err("--x is required"));
    }
    let radii =
        a.x.iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| config_err(format!("bad distance {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
    if let Some(r) = radii.iter().find(|&&r| !(r >= r0)) {
        return Err(config_err(format!(
            "|x| = {r} lies inside the target radius {r0}"
        )));
    }
    let mut report = Report::new(
        &["d", "r0", "r", "h", "grade", "grade_quadrature"],
        json!({}),
    );
    let mut outputs = Vec::new();
    for &r in &radii {
        let g = bm_grade(r, &problem)?;
        let q = bm_grade_quadrature(r, &problem)?;
        report.push(vec![
            d.to_string(),
            num(r0),
            num(r),
            num(bm_h(r, &problem)?),
            num(g),
            num(q),
        ]);
        outputs.push(json!({ "r": r, "grade": g, "grade_quadrature": q }));
    }
    report.outputs = json!({ "grades": outputs });
    Ok(report)
}

pub fn kernel(a: &KernelArgs, cache: Option<Cache>) -> Result<Report> {
    let d = a.d.ok_or_else(|| config_err("--d is required"))?;
    if !(1..=5).contains(&d) {
        return Err(config_err(format!(
            "tables are available for 1 <= d <= 5, got d = {d}"
        )));
    }
    let pts = if a.x.is_empty() {
        Vec::new()
    } else {
        parse_points(&a.x, Some(d), "--x")?
    };
    let m = pts.iter().map(LatticePoint::max_abs).max().unwrap_or(0);
    let radius = a.radius.unwrap_or(m.max(8));
    positive_radius(Some(radius), if d >= 3 { 4 } else { 2 }, "--L")?;
    if m > radius {
        return Err(config_err(format!(
            "points must lie in the table of radius {radius}"
        )));
    }
    let table = load_or_build(cache.as_ref(), d, radius)?;
    let mut report = Report::new(&["d", "x", "value"], json!({}));
    let pts = if pts.is_empty() {
        (0..table.grid().len())
            .map(|i| table.grid().point(i))
            .collect()
    } else {
        pts
    };
    for p in &pts {
        let v = table
            .get(p)
            .expect("point checked against the table radius");
        report.push(vec![d.to_string(), p.joined(" "), num(v)]);
    }
    report.outputs = json!({
        "kind": table.kind,
        "L": table.radius,
        "method": table.method,
        "accuracy": table.accuracy,
        "points": pts.len(),
    });
    Ok(report)
}

pub fn verify(a: &VerifyArgs, cache: Option<Cache>) -> Result<Report> {
    let suites: Vec<Suite> = if a.suite.is_empty() || a.suite.iter().any(|s| s == "all") {
        Suite::ALL.to_vec()
    } else {
        a.suite
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|e: restart_grade::Error| config_err(e.to_string()))
            })
            .collect::<Result<_>>()?
    };
    let verifier = Verifier::new(cache);
    let mut report = Report::new(
        &["suite", "name", "measured", "relation", "threshold", "pass"],
        json!({}),
    );
    let mut summary = Vec::new();
    let (mut failed, mut total) = (0, 0);
    for s in suites {
        let checks = verifier.run(s)?;
        let bad = checks.iter().filter(|c| !c.pass).count();
        for c in &checks {
            report.push(vec![
                c.suite.to_string(),
                c.name.clone(),
                num(c.measured),
                c.relation.as_str().into(),
                num(c.threshold),
                c.pass.to_string(),
            ]);
        }
        summary.push(json!({ "suite": s, "checks": checks.len(), "failed": bad }));
        failed += bad;
        total += checks.len();
    }
    report.outputs = json!({ "suites": summary, "checks": total, "failed": failed });
    if failed > 0 {
        report.failed_checks = Some((failed, total));
    }
    Ok(report)
}
