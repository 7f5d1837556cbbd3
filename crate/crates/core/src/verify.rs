//! Named verification suites: each evaluates a set of checks of a measured
//! value against a threshold. Expensive shared inputs (grade ladders,
//! potential tables, fitted envelopes) are computed once per `Verifier`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::bounds::{asymptotic_grade, fit_envelope, grade_bounds, EnvelopePair};
use crate::cache::{load_or_build, Cache};
use crate::continuum::{bm_grade, bm_grade_quadrature, BmProblem};
use crate::disk::{disk_report, effective_resistance, solve_hitting_times, total_degree};
use crate::error::{Error, Result};
use crate::grade::{extract_strategy, solve_grade, threshold_gap, GradeSolution, RestartProblem};
use crate::harmonic::{
    build_profile, potential_kernel_quadrature, unit_ball_volume, HarmonicProfile,
};
use crate::lattice::{disk_points, LatticePoint};
use crate::montecarlo::{simulate_strategy, StrategySpec, WalkParams};

pub const Z1_MAX: i64 = 50;
pub const Z1_TOL: f64 = 1e-8;
pub const Z2_LADDER: [i64; 4] = [8, 12, 16, 24];
pub const Z3_LADDER: [i64; 3] = [6, 8, 10];
pub const Z3_REL_TOL: f64 = 0.10;
pub const THRESHOLD_STARTS: [[i64; 2]; 3] = [[6, 0], [10, 0], [10, 10]];
pub const THRESHOLD_MAX_GAP: f64 = 3.0;
pub const MC_REPLICATES: usize = 100_000;
pub const MC_SEED: u64 = 20_240_601;
pub const DISK_RADII: [i64; 3] = [20, 40, 80];
pub const COMMUTE_RADII: [i64; 4] = [1, 5, 10, 20];
pub const COMMUTE_REL_TOL: f64 = 1e-6;
/// Bound on the log-log slope of `mu(B)` against `R`.
pub const NEAR_SET_MAX_SLOPE: f64 = 1.1;
pub const CONTINUUM_REL_TOL: f64 = 1e-10;
pub const KERNEL_TOL: f64 = 1e-10;
pub const GREEN_DOUBLING_TOL: f64 = 1e-4;

/// Table radii: the planar table must cover the largest disk and its
/// two-step neighbourhood.
const LINE_TABLE: i64 = 60;
const PLANAR_TABLE: i64 = 96;
const SPATIAL_TABLE: i64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Z1Exact,
    Z2Asymptotic,
    Z3Asymptotic,
    Sandwich,
    Threshold,
    Montecarlo,
    Disk,
    Continuum,
    Potential,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Z1Exact,
        Suite::Z2Asymptotic,
        Suite::Z3Asymptotic,
        Suite::Sandwich,
        Suite::Threshold,
        Suite::Montecarlo,
        Suite::Disk,
        Suite::Continuum,
        Suite::Potential,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Z1Exact => "z1-exact",
            Suite::Z2Asymptotic => "z2-asymptotic",
            Suite::Z3Asymptotic => "z3-asymptotic",
            Suite::Sandwich => "sandwich",
            Suite::Threshold => "threshold",
            Suite::Montecarlo => "montecarlo",
            Suite::Disk => "disk",
            Suite::Continuum => "continuum",
            Suite::Potential => "potential",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|x| x.as_str()).collect();
                Error::InvalidInput(format!(
                    "unknown suite {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::Below => "<",
            Relation::AtLeast => ">=",
        }
    }

    fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => measured <= threshold,
            Relation::Below => measured < threshold,
            Relation::AtLeast => measured >= threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(
        suite: Suite,
        name: impl Into<String>,
        measured: f64,
        relation: Relation,
        threshold: f64,
    ) -> Self {
        Check {
            suite,
            name: name.into(),
            measured,
            relation,
            threshold,
            pass: relation.holds(measured, threshold),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} {}: {:.6e} {} {:.6e}",
            if self.pass { "pass" } else { "FAIL" },
            self.suite,
            self.name,
            self.measured,
            self.relation.as_str(),
            self.threshold
        )
    }
}

/// Grade computed at one rung of a ladder.
#[derive(Clone, Debug)]
pub struct Rung {
    pub start: LatticePoint,
    pub radius: i64,
    pub grade: f64,
}

struct Fitted {
    profile: Arc<HarmonicProfile>,
    env: EnvelopePair,
}

/// Runs suites, sharing expensive inputs between them.
pub struct Verifier {
    cache: Option<Cache>,
    z1: OnceLock<Vec<Rung>>,
    z2: OnceLock<Vec<Rung>>,
    z3: OnceLock<Vec<Rung>>,
    thresholds: OnceLock<Vec<GradeSolution>>,
    line: OnceLock<Fitted>,
    planar: OnceLock<Fitted>,
    spatial: OnceLock<Fitted>,
    green_half: OnceLock<f64>,
}

fn memo<T>(cell: &OnceLock<T>, f: impl FnOnce() -> Result<T>) -> Result<&T> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = f()?;
    Ok(cell.get_or_init(|| v))
}

fn ladder(d: usize, ns: &[i64], radius: impl Fn(i64) -> i64) -> Result<Vec<Rung>> {
    ns.iter()
        .map(|&n| {
            let start = LatticePoint::on_axis(d, n);
            let problem = RestartProblem::with_radius(start.clone(), radius(n))?;
            let sol = solve_grade(&problem)?;
            Ok(Rung {
                start,
                radius: problem.radius,
                grade: sol.grade,
            })
        })
        .collect()
}

fn planar_residual(rung: &Rung) -> Result<f64> {
    let r = rung.start.norm();
    Ok((rung.grade - asymptotic_grade(r, 2, None)?).abs() / (r * r.ln()))
}

fn pt2(a: i64, b: i64) -> LatticePoint {
    LatticePoint::new(vec![a, b]).expect("two coordinates")
}

impl Default for Verifier {
    fn default() -> Self {
        Self::new(None)
    }
}

impl Verifier {
    pub fn new(cache: Option<Cache>) -> Self {
        Verifier {
            cache,
            z1: OnceLock::new(),
            z2: OnceLock::new(),
            z3: OnceLock::new(),
            thresholds: OnceLock::new(),
            line: OnceLock::new(),
            planar: OnceLock::new(),
            spatial: OnceLock::new(),
            green_half: OnceLock::new(),
        }
    }

    pub fn z1_ladder(&self) -> Result<&[Rung]> {
        let ns: Vec<i64> = (1..=Z1_MAX).collect();
        memo(&self.z1, || ladder(1, &ns, |n| (2 * n).max(2))).map(Vec::as_slice)
    }

    pub fn z2_ladder(&self) -> Result<&[Rung]> {
        memo(&self.z2, || ladder(2, &Z2_LADDER, |n| 4 * n)).map(Vec::as_slice)
    }

    pub fn z3_ladder(&self) -> Result<&[Rung]> {
        memo(&self.z3, || ladder(3, &Z3_LADDER, |n| 2 * n)).map(Vec::as_slice)
    }

    fn fitted<'a>(&self, cell: &'a OnceLock<Fitted>, d: usize, radius: i64) -> Result<&'a Fitted> {
        memo(cell, || {
            let table = load_or_build(self.cache.as_ref(), d, radius)?;
            let profile = build_profile(table, &LatticePoint::origin(d))?;
            let env = fit_envelope(&profile, radius - 1)?;
            Ok(Fitted {
                profile: Arc::new(profile),
                env,
            })
        })
    }

    fn line(&self) -> Result<&Fitted> {
        self.fitted(&self.line, 1, LINE_TABLE)
    }

    fn planar(&self) -> Result<&Fitted> {
        self.fitted(&self.planar, 2, PLANAR_TABLE)
    }

    fn spatial(&self) -> Result<&Fitted> {
        self.fitted(&self.spatial, 3, SPATIAL_TABLE)
    }

    /// `1/G(0)` in `d = 3` from the standard table.
    pub fn escape_probability(&self) -> Result<f64> {
        self.spatial()?
            .profile
            .constants
            .escape_probability
            .ok_or_else(|| {
                Error::Mismatch("three-dimensional profile without escape probability".into())
            })
    }

    /// `G(0)` in `d = 3` on the table of half the standard radius.
    fn green_half(&self) -> Result<f64> {
        memo(&self.green_half, || {
            let t = load_or_build(self.cache.as_ref(), 3, SPATIAL_TABLE / 2)?;
            Ok(t.get(&LatticePoint::origin(3)).expect("origin in table"))
        })
        .copied()
    }

    fn threshold_solutions(&self) -> Result<&[GradeSolution]> {
        memo(&self.thresholds, || {
            THRESHOLD_STARTS
                .iter()
                .map(|c| solve_grade(&RestartProblem::new(pt2(c[0], c[1]))?))
                .collect()
        })
        .map(Vec::as_slice)
    }

    pub fn run(&self, suite: Suite) -> Result<Vec<Check>> {
        match suite {
            Suite::Z1Exact => self.z1_exact(),
            Suite::Z2Asymptotic => self.z2_asymptotic(),
            Suite::Z3Asymptotic => self.z3_asymptotic(),
            Suite::Sandwich => self.sandwich(),
            Suite::Threshold => self.threshold(),
            Suite::Montecarlo => self.montecarlo(),
            Suite::Disk => self.disk(),
            Suite::Continuum => self.continuum(),
            Suite::Potential => self.potential(),
        }
    }

    fn z1_exact(&self) -> Result<Vec<Check>> {
        Ok(self
            .z1_ladder()?
            .iter()
            .map(|r| {
                let x = r.start.coords()[0] as f64;
                Check::new(
                    Suite::Z1Exact,
                    format!("|g* - x(x+1)| at x={x}"),
                    (r.grade - x * (x + 1.0)).abs(),
                    Relation::AtMost,
                    Z1_TOL,
                )
            })
            .collect())
    }

    /// The scaled residual must not increase from one rung to the next, so
    /// the first rung's value bounds the whole ladder.
    fn z2_asymptotic(&self) -> Result<Vec<Check>> {
        let rungs = self.z2_ladder()?;
        let res = rungs
            .iter()
            .map(planar_residual)
            .collect::<Result<Vec<_>>>()?;
        let mut checks = vec![Check::new(
            Suite::Z2Asymptotic,
            format!("scaled residual finite at |x|={}", Z2_LADDER[0]),
            res[0],
            Relation::Below,
            f64::INFINITY,
        )];
        for i in 1..res.len() {
            checks.push(Check::new(
                Suite::Z2Asymptotic,
                format!(
                    "scaled residual at |x|={} vs |x|={}",
                    Z2_LADDER[i],
                    Z2_LADDER[i - 1]
                ),
                res[i],
                Relation::AtMost,
                res[i - 1],
            ));
        }
        Ok(checks)
    }

    fn z3_asymptotic(&self) -> Result<Vec<Check>> {
        let target = unit_ball_volume(3) / self.escape_probability()?;
        let gaps: Vec<f64> = self
            .z3_ladder()?
            .iter()
            .map(|r| (r.grade / r.start.norm().powi(3) - target).abs() / target)
            .collect();
        let mut checks: Vec<Check> = gaps
            .iter()
            .zip(Z3_LADDER)
            .map(|(&g, n)| {
                Check::new(
                    Suite::Z3Asymptotic,
                    format!("relative gap of g*/|x|^3 at |x|={n}"),
                    g,
                    Relation::AtMost,
                    Z3_REL_TOL,
                )
            })
            .collect();
        for i in 1..gaps.len() {
            checks.push(Check::new(
                Suite::Z3Asymptotic,
                format!(
                    "gap shrinks from |x|={} to |x|={}",
                    Z3_LADDER[i - 1],
                    Z3_LADDER[i]
                ),
                gaps[i],
                Relation::AtMost,
                gaps[i - 1],
            ));
        }
        Ok(checks)
    }

    fn sandwich(&self) -> Result<Vec<Check>> {
        let mut checks = Vec::new();
        let ladders = [
            ("d=1", self.line()?, self.z1_ladder()?),
            ("d=2", self.planar()?, self.z2_ladder()?),
            ("d=3", self.spatial()?, self.z3_ladder()?),
        ];
        for (label, fitted, rungs) in ladders {
            let mut widths = Vec::new();
            for r in rungs {
                let b = grade_bounds(&fitted.profile, &fitted.env, &r.start)?;
                checks.push(Check::new(
                    Suite::Sandwich,
                    format!("{label} g* - lower at {}", r.start),
                    r.grade - b.lower,
                    Relation::AtLeast,
                    0.0,
                ));
                checks.push(Check::new(
                    Suite::Sandwich,
                    format!("{label} upper - g* at {}", r.start),
                    b.upper - r.grade,
                    Relation::AtLeast,
                    0.0,
                ));
                widths.push((r.start.norm(), (b.upper - b.lower) / r.grade));
            }
            for w in widths.windows(2) {
                checks.push(Check::new(
                    Suite::Sandwich,
                    format!("{label} relative width at |x|={} vs |x|={}", w[1].0, w[0].0),
                    w[1].1,
                    Relation::AtMost,
                    w[0].1,
                ));
            }
        }
        Ok(checks)
    }

    fn threshold(&self) -> Result<Vec<Check>> {
        let mut checks = Vec::new();
        for sol in self.threshold_solutions()? {
            let gap = threshold_gap(sol);
            let set = extract_strategy(sol);
            let r0 = sol.start.norm();
            let mut outer_kept = 0;
            let mut inner_restarted = 0;
            for i in 0..sol.grid.len() {
                let y = sol.grid.point(i);
                let r = y.norm();
                outer_kept += usize::from(r > r0 + gap.c_out && !set.restarts(&y));
                inner_restarted += usize::from(r < r0 - gap.c_in && set.restarts(&y));
            }
            let x0 = &sol.start;
            checks.extend([
                Check::new(
                    Suite::Threshold,
                    format!("C_out at {x0}"),
                    gap.c_out,
                    Relation::AtMost,
                    THRESHOLD_MAX_GAP,
                ),
                Check::new(
                    Suite::Threshold,
                    format!("C_in at {x0}"),
                    gap.c_in,
                    Relation::AtMost,
                    THRESHOLD_MAX_GAP,
                ),
                Check::new(
                    Suite::Threshold,
                    format!("points beyond |x0|+C_out not restarted at {x0}"),
                    outer_kept as f64,
                    Relation::AtMost,
                    0.0,
                ),
                Check::new(
                    Suite::Threshold,
                    format!("points within |x0|-C_in restarted at {x0}"),
                    inner_restarted as f64,
                    Relation::AtMost,
                    0.0,
                ),
            ]);
        }
        Ok(checks)
    }

    fn montecarlo(&self) -> Result<Vec<Check>> {
        let sol = self
            .threshold_solutions()?
            .iter()
            .find(|s| s.start == pt2(10, 0))
            .expect("(10,0) is a threshold start");
        let params = WalkParams::new(sol.start.clone(), MC_REPLICATES, MC_SEED);
        let optimal =
            simulate_strategy(&StrategySpec::restart_set(extract_strategy(sol)), &params)?;
        let euclid = simulate_strategy(&StrategySpec::euclidean(sol.start.norm()), &params)?;
        Ok(vec![
            Check::new(
                Suite::Montecarlo,
                "|optimal mean - g*| in standard errors at (10,0)",
                (optimal.mean - sol.grade).abs() / optimal.std_error,
                Relation::AtMost,
                3.0,
            ),
            Check::new(
                Suite::Montecarlo,
                "censored replicates of the optimal strategy",
                optimal.censored as f64,
                Relation::AtMost,
                0.0,
            ),
            Check::new(
                Suite::Montecarlo,
                "Euclidean-threshold mean / g* - 1 at (10,0)",
                euclid.mean / sol.grade - 1.0,
                Relation::Below,
                0.02,
            ),
        ])
    }

    fn disk(&self) -> Result<Vec<Check>> {
        let fitted = self.planar()?;
        let mut checks = Vec::new();
        let mut k = f64::NAN;
        let mut near = Vec::new();
        for &radius in &DISK_RADII {
            let rf = radius as f64;
            let starts = [(rf.sqrt().round() as i64), radius / 2];
            let mut ratios = Vec::new();
            let mut mu_near = 0;
            for n in starts {
                let x0 = pt2(n, 0);
                let rep = disk_report(rf, &x0, &fitted.profile, &fitted.env)?;
                ratios.push((n, (rep.exact - rep.asymptotic).abs() / (rf * rf.ln())));
                checks.push(Check::new(
                    Suite::Disk,
                    format!("R={radius} x0={x0}: exact - lower"),
                    rep.exact - rep.bounds.lower,
                    Relation::AtLeast,
                    0.0,
                ));
                checks.push(Check::new(
                    Suite::Disk,
                    format!("R={radius} x0={x0}: upper - exact"),
                    rep.bounds.upper - rep.exact,
                    Relation::AtLeast,
                    0.0,
                ));
                mu_near = rep.sets.mu_near;
            }
            near.push((rf, mu_near as f64));
            if radius == DISK_RADII[0] {
                k = ratios.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
            }
            for (n, ratio) in ratios {
                checks.push(Check::new(
                    Suite::Disk,
                    format!(
                        "R={radius} |x0|={n}: |exact - asymptotic| / (R log R) vs K from R={}",
                        DISK_RADII[0]
                    ),
                    ratio,
                    Relation::AtMost,
                    k,
                ));
            }
        }
        let slope = log_log_slope(&near);
        checks.push(Check::new(
            Suite::Disk,
            "log-log slope of mu(B) against R",
            slope,
            Relation::AtMost,
            NEAR_SET_MAX_SLOPE,
        ));
        for &radius in &COMMUTE_RADII {
            let domain = disk_points(radius as f64, 2)?;
            let z = LatticePoint::origin(2);
            let x0 = pt2((radius / 2).max(1), 0);
            let there =
                solve_hitting_times(&domain, &z)?.values[domain.index_of(&x0).expect("x0 in disk")];
            let back = solve_hitting_times(&domain, &x0)?.values
                [domain.index_of(&z).expect("origin in disk")];
            let commute = total_degree(&domain) as f64 * effective_resistance(&domain, &x0, &z)?;
            checks.push(Check::new(
                Suite::Disk,
                format!("R={radius} x0={x0}: commute-time identity relative error"),
                ((there + back) - commute).abs() / commute,
                Relation::AtMost,
                COMMUTE_REL_TOL,
            ));
        }
        Ok(checks)
    }

    fn continuum(&self) -> Result<Vec<Check>> {
        let mut checks = Vec::new();
        for d in 1..=5 {
            for r0 in [0.5, 1.0, 2.0] {
                let p = BmProblem::new(d, r0)?;
                for t in [1.5, 4.0] {
                    let exact = bm_grade(r0 * t, &p)?;
                    let quad = bm_grade_quadrature(r0 * t, &p)?;
                    checks.push(Check::new(
                        Suite::Continuum,
                        format!("closed form vs quadrature d={d} r0={r0} |x|={}", r0 * t),
                        (exact - quad).abs() / exact.abs(),
                        Relation::AtMost,
                        CONTINUUM_REL_TOL,
                    ));
                }
            }
        }
        let mut zeros = vec![(1, 0.0)];
        for d in 1..=5 {
            zeros.extend([0.5, 1.0, 2.0].map(|r0| (d, r0)));
        }
        for (d, r0) in zeros {
            let p = BmProblem::new(d, r0)?;
            let worst = bm_grade(r0, &p)?
                .abs()
                .max(bm_grade_quadrature(r0, &p)?.abs());
            checks.push(Check::new(
                Suite::Continuum,
                format!("grade at the boundary d={d} r0={r0}"),
                worst,
                Relation::AtMost,
                0.0,
            ));
        }
        // The lattice grades carry the solver tolerance, which enters
        // gamma/n^2 divided by n^2.
        for r in self.z1_ladder()? {
            let n = r.start.coords()[0] as f64;
            checks.push(Check::new(
                Suite::Continuum,
                format!("|gamma(n)/n^2 - 1| at n={n}"),
                (r.grade / (n * n) - 1.0).abs(),
                Relation::AtMost,
                1.0 / n + Z1_TOL / (n * n),
            ));
        }
        Ok(checks)
    }

    fn potential(&self) -> Result<Vec<Check>> {
        let table = load_or_build(self.cache.as_ref(), 2, 4)?;
        let mut checks = Vec::new();
        for (x, exact, label) in [(pt2(1, 0), 1.0, "1"), (pt2(1, 1), 4.0 / PI, "4/pi")] {
            let rec = table.get(&x).expect("in table");
            let quad = potential_kernel_quadrature(&x)?;
            checks.extend([
                Check::new(
                    Suite::Potential,
                    format!("|a{x} - {label}| by recursion"),
                    (rec - exact).abs(),
                    Relation::AtMost,
                    KERNEL_TOL,
                ),
                Check::new(
                    Suite::Potential,
                    format!("|a{x} - {label}| by quadrature"),
                    (quad - exact).abs(),
                    Relation::AtMost,
                    KERNEL_TOL,
                ),
                Check::new(
                    Suite::Potential,
                    format!("recursion vs quadrature at {x}"),
                    (rec - quad).abs(),
                    Relation::AtMost,
                    KERNEL_TOL,
                ),
            ]);
        }
        let full = 1.0 / self.escape_probability()?;
        let half = self.green_half()?;
        checks.push(Check::new(
            Suite::Potential,
            format!(
                "d=3 |G(0) at L={SPATIAL_TABLE} - G(0) at L={}|",
                SPATIAL_TABLE / 2
            ),
            (full - half).abs(),
            Relation::AtMost,
            GREEN_DOUBLING_TOL,
        ));
        checks.push(Check::new(
            Suite::Potential,
            "d=3 escape probability change under box doubling",
            (1.0 / full - 1.0 / half).abs(),
            Relation::Below,
            5e-5,
        ));
        Ok(checks)
    }
}

/// Least-squares slope of `log y` against `log x`.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn relations() {
        assert!(Check::new(Suite::Disk, "a", 1.0, Relation::AtMost, 1.0).pass);
        assert!(!Check::new(Suite::Disk, "a", 1.0, Relation::Below, 1.0).pass);
        assert!(!Check::new(Suite::Disk, "a", f64::NAN, Relation::AtLeast, 0.0).pass);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<_> = [2.0, 4.0, 8.0f64]
            .iter()
            .map(|&x| (x, 3.0 * x.powf(1.5)))
            .collect();
        assert!((log_log_slope(&pts) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn continuum_suite_passes() {
        let v = Verifier::default();
        let checks = v.run(Suite::Continuum).unwrap();
        assert_eq!(checks.len(), 30 + 16 + 50);
        for c in &checks {
            assert!(c.pass, "{c}");
        }
    }
}
