//! Exact grades on a truncated lattice.
//!
//! For a candidate restart value `g`, the value function of the restart game
//! solves
//!
//! ```text
//! W(y) = 1 + (1/2d) * sum_{w ~ y} min(W(w), g),   W(z) = 0,
//! ```
//!
//! where states outside the box always restart (contribute `g`). The grade
//! is the unique `g*` with `W_{g*}(x0) = g*`; `g -> W_g(x0) - g` is strictly
//! decreasing, so it is found by bisection.
//!
//! The sweeps work on the capped value `V = min(W, g)`, which turns the
//! fixed point into an obstacle problem `V = min(g, 1 + P V)` solved by
//! projected over-relaxed Gauss-Seidel in index order.

use crate::error::{Error, Result};
use crate::lattice::{BoxGrid, LatticePoint};

pub const DEFAULT_VI_TOL: f64 = 1e-10;
pub const DEFAULT_BISECTION_REL_TOL: f64 = 1e-9;
pub const TIE_REL_TOL: f64 = 1e-7;
const SECANT_STEPS: usize = 6;

#[derive(Clone, Debug)]
pub struct RestartProblem {
    pub start: LatticePoint,
    /// Truncation box `[-L, L]^d`.
    pub radius: i64,
    pub vi_tol: f64,
    pub bisection_rel_tol: f64,
    pub max_sweeps: usize,
    /// Upper end of the initial bisection bracket, when a bound is known.
    pub upper_hint: Option<f64>,
}

impl RestartProblem {
    /// Problem with the default box radius `max(2, ceil(2|x0|))`.
    pub fn new(start: LatticePoint) -> Result<Self> {
        let radius = ((2.0 * start.norm()).ceil() as i64).max(2);
        Self::with_radius(start, radius)
    }

    pub fn with_radius(start: LatticePoint, radius: i64) -> Result<Self> {
        if start.is_origin() {
            return Err(Error::InvalidInput(
                "start coincides with the target".into(),
            ));
        }
        if start.max_abs() > radius {
            return Err(Error::InvalidInput(format!(
                "start {start} lies outside the box of radius {radius}"
            )));
        }
        if (radius as f64) < 2.0 * start.norm() {
            log::warn!(
                "box radius {radius} is below 2|x0| = {:.3}; truncation may bias the grade",
                2.0 * start.norm()
            );
        }
        Ok(RestartProblem {
            start,
            radius,
            vi_tol: DEFAULT_VI_TOL,
            bisection_rel_tol: DEFAULT_BISECTION_REL_TOL,
            max_sweeps: 500_000,
            upper_hint: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.start.dim()
    }
}

/// First Dirichlet eigenvalue of the unit ball, `j_{d/2-1,1}^2`.
fn ball_eigenvalue(d: usize) -> f64 {
    const BESSEL_ZEROS: [f64; 8] = [
        std::f64::consts::FRAC_PI_2,
        2.404_826,
        std::f64::consts::PI,
        3.831_706,
        4.493_409,
        5.135_622,
        5.763_459,
        6.380_162,
    ];
    BESSEL_ZEROS[d - 1].powi(2)
}

/// Over-relaxation factor for a continuation region of radius `r`.
fn relaxation(d: usize, r: f64) -> f64 {
    let rho = (1.0 - ball_eigenvalue(d) / (2.0 * d as f64 * r * r)).max(0.0);
    2.0 / (1.0 + (1.0 - rho * rho).sqrt())
}

struct Sweeper {
    grid: BoxGrid,
    target: usize,
    interior: Vec<bool>,
    capped: Vec<f64>,
    omega: f64,
    sweeps: usize,
}

impl Sweeper {
    fn new(problem: &RestartProblem) -> Result<Self> {
        let grid = BoxGrid::new(problem.dim(), problem.radius)?;
        let interior = (0..grid.len()).map(|i| grid.is_interior(i)).collect();
        let target = grid.origin_index();
        let r = (problem.start.norm() + 2.0).min(problem.radius as f64 + 1.0);
        Ok(Sweeper {
            capped: vec![0.0; grid.len()],
            omega: relaxation(problem.dim(), r),
            grid,
            target,
            interior,
            sweeps: 0,
        })
    }

    /// Neighbour sum of `v`, counting out-of-box neighbours as `g`.
    #[inline]
    fn neighbor_sum(&self, v: &[f64], i: usize, g: f64) -> f64 {
        if self.interior[i] {
            let mut s = 0.0;
            for &st in self.grid.strides() {
                s += v[i + st] + v[i - st];
            }
            s
        } else {
            self.grid
                .neighbor_indices(i)
                .map(|n| n.map_or(g, |j| v[j]))
                .sum()
        }
    }

    /// Projected SOR to the fixed point for restart value `g`, warm-started
    /// from the current state.
    fn converge(&mut self, g: f64, tol: f64, max_sweeps: usize) -> Result<f64> {
        let inv = 1.0 / (2 * self.grid.dim()) as f64;
        for v in self.capped.iter_mut() {
            *v = v.min(g);
        }
        self.capped[self.target] = 0.0;
        let mut v = std::mem::take(&mut self.capped);
        let mut result = Err(Error::NonConvergence {
            module: "grade",
            iterations: max_sweeps,
            residual: f64::INFINITY,
        });
        for _ in 0..max_sweeps {
            self.sweeps += 1;
            let mut worst: f64 = 0.0;
            for i in 0..v.len() {
                if i == self.target {
                    continue;
                }
                let t = (1.0 + inv * self.neighbor_sum(&v, i, g)).min(g);
                let delta = t - v[i];
                worst = worst.max(delta.abs());
                v[i] = (v[i] + self.omega * delta).min(g);
            }
            if !worst.is_finite() {
                break;
            }
            if worst < tol {
                result = Ok(worst);
                break;
            }
            if let Err(Error::NonConvergence { residual, .. }) = &mut result {
                *residual = worst;
            }
        }
        self.capped = v;
        result
    }

    /// `W = 1 + P V` off the target.
    fn value_function(&self, g: f64) -> Vec<f64> {
        let inv = 1.0 / (2 * self.grid.dim()) as f64;
        (0..self.capped.len())
            .map(|i| {
                if i == self.target {
                    0.0
                } else {
                    1.0 + inv * self.neighbor_sum(&self.capped, i, g)
                }
            })
            .collect()
    }
}

/// Bellman residual `max |W(y) - 1 - avg min(W(w), g)|` over `y != z`.
fn bellman_residual(grid: &BoxGrid, w: &[f64], g: f64) -> f64 {
    let target = grid.origin_index();
    let inv = 1.0 / (2 * grid.dim()) as f64;
    (0..w.len())
        .filter(|&i| i != target)
        .map(|i| {
            let s: f64 = grid
                .neighbor_indices(i)
                .map(|n| n.map_or(g, |j| w[j].min(g)))
                .sum();
            (w[i] - 1.0 - inv * s).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct ValueFunction {
    pub g: f64,
    pub grid: BoxGrid,
    pub values: Vec<f64>,
    pub sweeps: usize,
    pub residual: f64,
}

impl ValueFunction {
    pub fn get(&self, y: &LatticePoint) -> Option<f64> {
        self.grid.index(y).map(|i| self.values[i])
    }
}

/// The fixed point `W_g` for a given restart value `g >= 0`.
pub fn restart_value_iteration(problem: &RestartProblem, g: f64) -> Result<ValueFunction> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::InvalidInput(format!(
            "restart value must be >= 0, got {g}"
        )));
    }
    let mut sw = Sweeper::new(problem)?;
    sw.capped.fill(g);
    sw.converge(g, problem.vi_tol, problem.max_sweeps)?;
    let values = sw.value_function(g);
    let residual = bellman_residual(&sw.grid, &values, g);
    Ok(ValueFunction {
        g,
        residual,
        sweeps: sw.sweeps,
        grid: sw.grid,
        values,
    })
}

#[derive(Clone, Debug)]
pub struct GradeSolution {
    pub start: LatticePoint,
    pub radius: i64,
    /// The grade `g* = gamma(x0, 0)` on the truncated lattice.
    pub grade: f64,
    /// Final bisection bracket.
    pub bracket: (f64, f64),
    pub grid: BoxGrid,
    /// Value function `W_{g*}`.
    pub values: Vec<f64>,
    pub bisection_steps: usize,
    pub sweeps: usize,
    pub residual: f64,
}

impl GradeSolution {
    pub fn value(&self, y: &LatticePoint) -> Option<f64> {
        self.grid.index(y).map(|i| self.values[i])
    }
}

/// Grade of `problem.start` with respect to the origin.
pub fn solve_grade(problem: &RestartProblem) -> Result<GradeSolution> {
    let mut sw = Sweeper::new(problem)?;
    let start = sw
        .grid
        .index(&problem.start)
        .ok_or_else(|| Error::InvalidInput(format!("start {} outside the box", problem.start)))?;
    let tol = problem.vi_tol;
    let inv = 1.0 / (2 * problem.dim()) as f64;

    // phi(g) = W_g(x0) - g; phi(0) = 1 > 0.
    let phi = |sw: &mut Sweeper, g: f64| -> Result<f64> {
        sw.converge(g, tol, problem.max_sweeps)?;
        Ok(1.0 + inv * sw.neighbor_sum(&sw.capped, start, g) - g)
    };

    let (mut lo, mut phi_lo) = (0.0, 1.0);
    let mut hi = match problem.upper_hint {
        Some(h) if h > 0.0 && h.is_finite() => h,
        _ => 1.0,
    };
    let mut steps = 0usize;
    let mut phi_hi;
    loop {
        steps += 1;
        phi_hi = phi(&mut sw, hi)?;
        if phi_hi <= 0.0 {
            break;
        }
        (lo, phi_lo) = (hi, phi_hi);
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::Bracket(format!(
                "no sign change of W_g(x0) - g up to g = {hi:e}"
            )));
        }
    }
    while hi - lo > problem.bisection_rel_tol * hi.max(1.0) {
        steps += 1;
        let mid = 0.5 * (lo + hi);
        let v = phi(&mut sw, mid)?;
        if v > 0.0 {
            (lo, phi_lo) = (mid, v);
        } else {
            (hi, phi_hi) = (mid, v);
        }
    }
    // For a fixed restart set W_g(x0) is affine in g, so once the bracket is
    // this narrow a secant step usually lands on the root to rounding.
    let mut grade = 0.5 * (lo + hi);
    for _ in 0..SECANT_STEPS {
        if phi_lo == phi_hi {
            break;
        }
        let g = lo - phi_lo * (hi - lo) / (phi_hi - phi_lo);
        if !(g >= lo && g <= hi) {
            break;
        }
        steps += 1;
        grade = g;
        let v = phi(&mut sw, g)?;
        if v.abs() <= 1e-13 * g.max(1.0) {
            break;
        }
        if v > 0.0 {
            (lo, phi_lo) = (g, v);
        } else {
            (hi, phi_hi) = (g, v);
        }
    }
    sw.converge(grade, tol, problem.max_sweeps)?;
    let values = sw.value_function(grade);
    let residual = bellman_residual(&sw.grid, &values, grade);
    Ok(GradeSolution {
        start: problem.start.clone(),
        radius: problem.radius,
        grade,
        bracket: (lo, hi),
        values,
        bisection_steps: steps,
        sweeps: sw.sweeps,
        residual,
        grid: sw.grid,
    })
}

/// Points of the box from which the optimal strategy restarts.
#[derive(Clone, Debug)]
pub struct RestartSet {
    pub grid: BoxGrid,
    flags: Vec<bool>,
}

impl RestartSet {
    /// Membership for an in-box point; points outside the box always
    /// restart in the truncated game.
    pub fn restarts(&self, y: &LatticePoint) -> bool {
        self.grid.index(y).is_none_or(|i| self.flags[i])
    }

    pub fn restarts_coords(&self, c: &[i64]) -> bool {
        self.grid.index_of(c).is_none_or(|i| self.flags[i])
    }

    pub fn len(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<LatticePoint> {
        (0..self.flags.len())
            .filter(|&i| self.flags[i])
            .map(|i| self.grid.point(i))
            .collect()
    }
}

/// Restart exactly where `W(y) > g*` beyond the tie tolerance; ties continue.
pub fn extract_strategy(sol: &GradeSolution) -> RestartSet {
    let tie = TIE_REL_TOL * sol.grade.max(1.0);
    let flags = sol.values.iter().map(|&w| w > sol.grade + tie).collect();
    RestartSet {
        grid: sol.grid.clone(),
        flags,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdGap {
    /// Largest `|y| - |x0|` over non-restarted `y` with `|y| > |x0|`.
    pub c_out: f64,
    /// Largest `|x0| - |y|` over restarted `y` with `|y| < |x0|`.
    pub c_in: f64,
}

pub fn threshold_gap(sol: &GradeSolution) -> ThresholdGap {
    let set = extract_strategy(sol);
    let r0_sq = sol.start.norm_sq();
    let r0 = sol.start.norm();
    let mut gap = ThresholdGap {
        c_out: 0.0,
        c_in: 0.0,
    };
    for i in 0..sol.values.len() {
        let n2 = sol.grid.norm_sq_of(i);
        let r = (n2 as f64).sqrt();
        if n2 > r0_sq && !set.flags[i] {
            gap.c_out = gap.c_out.max(r - r0);
        } else if n2 < r0_sq && set.flags[i] {
            gap.c_in = gap.c_in.max(r0 - r);
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(x: i64) -> LatticePoint {
        LatticePoint::on_axis(1, x)
    }

    #[test]
    fn one_dimensional_value_iteration() {
        let prob = RestartProblem::with_radius(p1(1), 8).unwrap();
        let w = restart_value_iteration(&prob, 2.0).unwrap();
        assert!((w.get(&p1(1)).unwrap() - 2.0).abs() < 1e-9);
        assert!((w.get(&p1(2)).unwrap() - 3.0).abs() < 1e-9);
        assert_eq!(w.get(&p1(0)), Some(0.0));
        assert!(w.residual < 1e-9);

        let w0 = restart_value_iteration(&prob, 0.0).unwrap();
        assert!((w0.get(&p1(1)).unwrap() - 1.0).abs() < 1e-12);
        assert!(restart_value_iteration(&prob, -1.0).is_err());
    }

    #[test]
    fn one_dimensional_grades() {
        for (x, want) in [(1, 2.0), (3, 12.0)] {
            let sol = solve_grade(&RestartProblem::new(p1(x)).unwrap()).unwrap();
            assert!((sol.grade - want).abs() < 1e-8, "{x}: {}", sol.grade);
            assert!((sol.value(&p1(x)).unwrap() - sol.grade).abs() < 1e-8);
        }
    }

    #[test]
    fn one_dimensional_strategy() {
        let sol = solve_grade(&RestartProblem::with_radius(p1(3), 10).unwrap()).unwrap();
        let set = extract_strategy(&sol);
        assert!(set.restarts(&p1(4)));
        assert!(set.restarts(&p1(-4)));
        assert!(!set.restarts(&p1(2)));
        assert!(!set.restarts(&p1(3)));
        assert!(!set.restarts(&p1(-3)));
        assert!(!set.restarts(&p1(0)));
        let gap = threshold_gap(&sol);
        assert_eq!(
            gap,
            ThresholdGap {
                c_out: 0.0,
                c_in: 0.0
            }
        );
    }

    #[test]
    fn value_function_invariants() {
        let prob = RestartProblem::with_radius(LatticePoint::new(vec![2, 1]).unwrap(), 6).unwrap();
        let sol = solve_grade(&prob).unwrap();
        assert!(sol.values.iter().all(|&w| w >= 0.0));
        assert_eq!(sol.value(&LatticePoint::origin(2)), Some(0.0));
        assert!(sol.residual < 1e-9);
        let set = extract_strategy(&sol);
        assert!(!set.restarts(&LatticePoint::origin(2)));
        assert!(set.restarts(&LatticePoint::new(vec![7, 0]).unwrap()));
    }

    #[test]
    fn value_is_monotone_in_restart_value() {
        let prob = RestartProblem::with_radius(LatticePoint::new(vec![3, 0]).unwrap(), 6).unwrap();
        let gs = [5.0, 10.0, 20.0, 40.0, 80.0];
        let ws: Vec<_> = gs
            .iter()
            .map(|&g| restart_value_iteration(&prob, g).unwrap())
            .collect();
        let start = ws[0].grid.index(&prob.start).unwrap();
        for pair in ws.windows(2) {
            for (a, b) in pair[0].values.iter().zip(&pair[1].values) {
                assert!(*b >= *a - 1e-9);
            }
        }
        let phis: Vec<f64> = ws.iter().map(|w| w.values[start] - w.g).collect();
        assert!(phis.windows(2).all(|p| p[1] <= p[0] + 1e-9), "{phis:?}");
        assert!(phis[4] < 0.0 && phis[0] > 0.0);
    }

    #[test]
    fn one_dimensional_ladder() {
        for x in 1..=50 {
            let sol = solve_grade(&RestartProblem::new(p1(x)).unwrap()).unwrap();
            let want = (x * (x + 1)) as f64;
            assert!((sol.grade - want).abs() < 1e-8, "{x}: {}", sol.grade);
        }
    }

    #[test]
    fn planar_unit_start_is_box_independent() {
        // From a neighbour of the target, restarting after every miss is
        // optimal: the number of moves is geometric with success 1/4.
        for l in [8, 16, 32, 64] {
            let sol =
                solve_grade(&RestartProblem::with_radius(LatticePoint::on_axis(2, 1), l).unwrap())
                    .unwrap();
            assert!((sol.grade - 4.0).abs() < 1e-10, "L={l}: {}", sol.grade);
            let gap = threshold_gap(&sol);
            assert_eq!(gap.c_in, 0.0);
        }
    }

    #[test]
    fn planar_threshold_gap_is_small() {
        let sol = solve_grade(&RestartProblem::new(LatticePoint::on_axis(2, 10)).unwrap()).unwrap();
        let gap = threshold_gap(&sol);
        assert!(gap.c_out <= 3.0 && gap.c_in <= 3.0, "{gap:?}");
        // Regression values at L = 20.
        assert!((sol.grade - 747.920_211_058).abs() < 1e-6, "{}", sol.grade);
        assert_eq!(
            gap,
            ThresholdGap {
                c_out: 0.0,
                c_in: 0.0
            }
        );
    }

    #[test]
    fn truncation_is_monotone() {
        let x = LatticePoint::new(vec![4, 3]).unwrap();
        let grades: Vec<f64> = [5, 7, 10, 20]
            .iter()
            .map(|&l| {
                solve_grade(&RestartProblem::with_radius(x.clone(), l).unwrap())
                    .unwrap()
                    .grade
            })
            .collect();
        assert!(grades.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{grades:?}");
        assert!((grades[2] - grades[3]).abs() < 1e-6 * grades[3]);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn solution_invariants(a in -5i64..=5, b in -5i64..=5, extra in 0i64..4) {
            proptest::prop_assume!(a != 0 || b != 0);
            let x = LatticePoint::new(vec![a, b]).unwrap();
            let l = x.max_abs().max(2) + extra;
            let sol = solve_grade(&RestartProblem::with_radius(x.clone(), l).unwrap()).unwrap();
            proptest::prop_assert!(sol.values.iter().all(|&w| w >= 0.0));
            proptest::prop_assert!(sol.residual < 1e-8);
            proptest::prop_assert!((sol.value(&x).unwrap() - sol.grade).abs() < 1e-8 * sol.grade);
            // The grade is at least the distance to the target in moves.
            proptest::prop_assert!(sol.grade >= (a.abs() + b.abs()) as f64 - 1e-9);
            let set = extract_strategy(&sol);
            proptest::prop_assert!(!set.restarts(&LatticePoint::origin(2)));
            proptest::prop_assert!(!set.restarts(&x));
        }
    }

    #[test]
    fn rejects_bad_problems() {
        assert!(RestartProblem::new(LatticePoint::origin(2)).is_err());
        assert!(RestartProblem::with_radius(LatticePoint::on_axis(2, 5), 4).is_err());
    }
}
