//! Expected hitting times of simple random walk confined to a finite
//! connected domain `D` (moves to a uniformly chosen neighbour inside `D`),
//! together with the integral bounds built from a harmonic profile, the
//! near-boundary correction `mu(B) R(x0 <-> z)` and the effective resistance.

use serde::Serialize;

use crate::bounds::{envelope_integral, EnvelopePair};
use crate::error::{Error, Result};
use crate::harmonic::HarmonicProfile;
use crate::lattice::{disk_points, Domain, LatticePoint};
use crate::linsolve::{conjugate_gradient, CgOptions, CgReport, GraphLaplacian};

/// Sup-norm target for the mean-value residual of the linear solves.
pub const SOLVER_TOL: f64 = 1e-9;

fn cg_options(domain: &Domain) -> CgOptions {
    CgOptions {
        tol: SOLVER_TOL,
        max_iter: 50 * domain.len() + 1000,
    }
}

fn require(domain: &Domain, p: &LatticePoint) -> Result<usize> {
    domain
        .index_of(p)
        .ok_or_else(|| Error::InvalidInput(format!("{p} is not in the domain")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundarySets {
    /// Points of `D` with a lattice neighbour outside `D`.
    pub boundary: Vec<LatticePoint>,
    /// `boundary` together with its neighbours in `D`.
    pub boundary2: Vec<LatticePoint>,
    /// Minimum of `h` over `boundary2`.
    pub h1: f64,
    /// Points of `D` with a lattice neighbour `y` such that `h(y) >= h1`.
    pub near: Vec<LatticePoint>,
    /// `mu(B)`: sum of in-domain degrees over `near`.
    pub mu_near: usize,
}

pub fn boundary_sets(domain: &Domain, profile: &HarmonicProfile) -> Result<BoundarySets> {
    let h_of = |p: &LatticePoint| {
        profile.h(p).ok_or_else(|| {
            Error::OutOfTable(format!(
                "profile does not cover {p}, a neighbour of the domain"
            ))
        })
    };
    let pts = domain.points();
    let on_boundary: Vec<bool> = pts
        .iter()
        .map(|p| p.neighbors().iter().any(|q| !domain.contains(q)))
        .collect();
    let in_b2: Vec<bool> = (0..pts.len())
        .map(|i| on_boundary[i] || domain.inner_neighbors(i).iter().any(|&j| on_boundary[j]))
        .collect();
    let mut h1 = f64::INFINITY;
    for (p, _) in pts.iter().zip(&in_b2).filter(|(_, &b)| b) {
        h1 = h1.min(h_of(p)?);
    }
    let mut near = Vec::new();
    let mut mu_near = 0;
    for (i, p) in pts.iter().enumerate() {
        let mut hit = false;
        for q in p.neighbors() {
            hit |= h_of(&q)? >= h1;
        }
        if hit {
            near.push(p.clone());
            mu_near += domain.degree(i);
        }
    }
    let pick = |flags: &[bool]| -> Vec<LatticePoint> {
        pts.iter()
            .zip(flags)
            .filter(|(_, &f)| f)
            .map(|(p, _)| p.clone())
            .collect()
    };
    Ok(BoundarySets {
        boundary: pick(&on_boundary),
        boundary2: pick(&in_b2),
        h1,
        near,
        mu_near,
    })
}

/// `mu(D)`: the sum of in-domain degrees.
pub fn total_degree(domain: &Domain) -> usize {
    (0..domain.len()).map(|i| domain.degree(i)).sum()
}

#[derive(Clone, Debug)]
pub struct HittingTimes {
    /// `E_x tau` in the order of `domain.points()`.
    pub values: Vec<f64>,
    pub report: CgReport,
}

/// Largest `|E(x) - 1 - avg_{y ~ x, y in D} E(y)|` over `x != z`.
pub fn mean_value_residual(domain: &Domain, target: usize, values: &[f64]) -> f64 {
    (0..domain.len())
        .filter(|&i| i != target)
        .map(|i| {
            let nb = domain.inner_neighbors(i);
            let avg = nb.iter().map(|&j| values[j]).sum::<f64>() / nb.len() as f64;
            (values[i] - 1.0 - avg).abs()
        })
        .fold(0.0, f64::max)
}

/// Solves `E(z) = 0`, `E(x) = 1 + (1/deg_D x) sum_{y ~ x, y in D} E(y)`.
pub fn solve_hitting_times(domain: &Domain, target: &LatticePoint) -> Result<HittingTimes> {
    let z = require(domain, target)?;
    let (offsets, targets) = domain.adjacency();
    let free: Vec<bool> = (0..domain.len()).map(|i| i != z).collect();
    let b: Vec<f64> = (0..domain.len())
        .map(|i| {
            if free[i] {
                (offsets[i + 1] - offsets[i]) as f64
            } else {
                0.0
            }
        })
        .collect();
    let op = GraphLaplacian {
        offsets: &offsets,
        targets: &targets,
        free,
    };
    let mut values = vec![0.0; domain.len()];
    let report = conjugate_gradient(&op, &b, &mut values, cg_options(domain), "disk")?;
    Ok(HittingTimes { values, report })
}

/// Effective resistance between `a` and `b` with unit conductances on the
/// edges of `D`.
pub fn effective_resistance(domain: &Domain, a: &LatticePoint, b: &LatticePoint) -> Result<f64> {
    let (ia, ib) = (require(domain, a)?, require(domain, b)?);
    if ia == ib {
        return Err(Error::InvalidInput(format!(
            "resistance endpoints coincide at {a}"
        )));
    }
    let (offsets, targets) = domain.adjacency();
    let free: Vec<bool> = (0..domain.len()).map(|i| i != ia && i != ib).collect();
    // Voltage 1 at a and 0 at b; fixed neighbours enter the right-hand side.
    let rhs: Vec<f64> = (0..domain.len())
        .map(|i| {
            if free[i] {
                targets[offsets[i]..offsets[i + 1]]
                    .iter()
                    .filter(|&&j| j == ia)
                    .count() as f64
            } else {
                0.0
            }
        })
        .collect();
    let op = GraphLaplacian {
        offsets: &offsets,
        targets: &targets,
        free,
    };
    let mut v = vec![0.0; domain.len()];
    let mut opts = cg_options(domain);
    opts.tol = 1e-13;
    conjugate_gradient(&op, &rhs, &mut v, opts, "disk")?;
    v[ia] = 1.0;
    let current: f64 = targets[offsets[ia]..offsets[ia + 1]]
        .iter()
        .map(|&j| 1.0 - v[j])
        .sum();
    if !(current > 0.0) {
        return Err(Error::NumericFailure {
            module: "disk",
            message: format!("non-positive current {current} out of {a}"),
            residual: f64::NAN,
        });
    }
    Ok(1.0 / current)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TnoBounds {
    pub lower: f64,
    pub upper: f64,
    /// `mu(B) R(x0 <-> z)`, included in `upper`.
    pub delta_bound: f64,
    pub h1: f64,
    pub mu_near: usize,
    pub resistance: f64,
}

fn integrals(env: &EnvelopePair, h1: f64, hx: f64) -> Result<(f64, f64)> {
    let w = |u: f64| 2.0 * u.min(hx);
    let lower = envelope_integral(env, h1, Some(hx), |u| env.g_plus(u), w)?;
    let upper = envelope_integral(env, h1, Some(hx), |u| env.g_minus(u), w)?;
    Ok((lower, upper))
}

/// Bounds on `E_{x0} tau_z` for the walk in `D`, with `z` the origin of the
/// profile.
pub fn tno_bounds(
    domain: &Domain,
    profile: &HarmonicProfile,
    env: &EnvelopePair,
    x0: &LatticePoint,
) -> Result<TnoBounds> {
    let sets = boundary_sets(domain, profile)?;
    let z = LatticePoint::origin(domain.dim());
    tno_from_sets(domain, profile, env, x0, &z, &sets)
}

fn tno_from_sets(
    domain: &Domain,
    profile: &HarmonicProfile,
    env: &EnvelopePair,
    x0: &LatticePoint,
    z: &LatticePoint,
    sets: &BoundarySets,
) -> Result<TnoBounds> {
    require(domain, x0)?;
    let hx = profile.h_checked(x0)?;
    let (lower, integral_upper) = integrals(env, sets.h1, hx)?;
    let resistance = if x0 == z {
        0.0
    } else {
        effective_resistance(domain, x0, z)?
    };
    let delta_bound = sets.mu_near as f64 * resistance;
    Ok(TnoBounds {
        lower,
        upper: integral_upper + delta_bound,
        delta_bound,
        h1: sets.h1,
        mu_near: sets.mu_near,
        resistance,
    })
}

/// `2 R^2 h(x0) - |x0|^2`.
pub fn asymptotic_disk(x0: &LatticePoint, radius: f64, profile: &HarmonicProfile) -> Result<f64> {
    if x0.norm() > radius {
        return Err(Error::InvalidInput(format!(
            "{x0} lies outside the disk of radius {radius}"
        )));
    }
    let h = profile.h_checked(x0)?;
    Ok(2.0 * radius * radius * h - x0.norm_sq() as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct DiskReport {
    pub radius: f64,
    pub x0: LatticePoint,
    /// `E_{x0} tau`.
    pub exact: f64,
    pub solver_residual: f64,
    pub sets: BoundarySets,
    pub mu_domain: usize,
    pub bounds: TnoBounds,
    pub asymptotic: f64,
}

/// Hitting time of the origin from `x0` in the planar disk of radius `R`,
/// with bounds and the asymptotic prediction.
pub fn disk_report(
    radius: f64,
    x0: &LatticePoint,
    profile: &HarmonicProfile,
    env: &EnvelopePair,
) -> Result<DiskReport> {
    let domain = disk_points(radius, profile.dim())?;
    let z = LatticePoint::origin(domain.dim());
    let times = solve_hitting_times(&domain, &z)?;
    let i0 = require(&domain, x0)?;
    let sets = boundary_sets(&domain, profile)?;
    let bounds = tno_from_sets(&domain, profile, env, x0, &z, &sets)?;
    Ok(DiskReport {
        radius,
        x0: x0.clone(),
        exact: times.values[i0],
        solver_residual: mean_value_residual(
            &domain,
            domain.index_of(&z).expect("origin"),
            &times.values,
        ),
        mu_domain: total_degree(&domain),
        sets,
        bounds,
        asymptotic: asymptotic_disk(x0, radius, profile)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::fit_envelope_2d;
    use crate::harmonic::{build_profile, potential_kernel};
    use nalgebra::{DMatrix, DVector};

    fn pt(a: i64, b: i64) -> LatticePoint {
        LatticePoint::new(vec![a, b]).unwrap()
    }

    fn profile(l: i64) -> HarmonicProfile {
        build_profile(potential_kernel(l).unwrap(), &LatticePoint::origin(2)).unwrap()
    }

    fn dense_hitting_times(domain: &Domain, z: usize) -> Vec<f64> {
        let n = domain.len();
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut b = DVector::<f64>::zeros(n);
        for i in 0..n {
            if i == z {
                a[(i, i)] = 1.0;
                continue;
            }
            let nb = domain.inner_neighbors(i);
            a[(i, i)] = nb.len() as f64;
            for j in nb {
                a[(i, j)] -= 1.0;
            }
            b[i] = a[(i, i)];
        }
        a.lu().solve(&b).unwrap().iter().copied().collect()
    }

    #[test]
    fn unit_disk_by_hand() {
        let d = disk_points(1.0, 2).unwrap();
        let p = profile(4);
        let sets = boundary_sets(&d, &p).unwrap();
        assert_eq!(
            sets.boundary,
            vec![pt(-1, 0), pt(0, -1), pt(0, 1), pt(1, 0)]
        );
        assert_eq!(sets.boundary2.len(), 5);
        assert_eq!(sets.h1, 0.0);
        assert_eq!(sets.near.len(), 5);
        assert_eq!(sets.mu_near, 8);
        assert_eq!(total_degree(&d), 8);

        let e = solve_hitting_times(&d, &LatticePoint::origin(2)).unwrap();
        assert!((e.values[d.index_of(&pt(1, 0)).unwrap()] - 1.0).abs() < 1e-12);
        let swapped = solve_hitting_times(&d, &pt(1, 0)).unwrap();
        assert!((swapped.values[d.index_of(&pt(0, 0)).unwrap()] - 7.0).abs() < 1e-9);

        let r = effective_resistance(&d, &pt(1, 0), &LatticePoint::origin(2)).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!((1.0 + 7.0 - total_degree(&d) as f64 * r).abs() < 1e-9);

        let env = fit_envelope_2d(&p, 3).unwrap();
        let tb = tno_bounds(&d, &p, &env, &pt(1, 0)).unwrap();
        assert_eq!(tb.lower, 0.0);
        assert!((tb.upper - 8.0).abs() < 1e-12 && tb.delta_bound == tb.upper);
        let at_z = tno_bounds(&d, &p, &env, &LatticePoint::origin(2)).unwrap();
        assert_eq!(at_z.lower, 0.0);
    }

    #[test]
    fn matches_dense_solve() {
        for r in [2.0, 3.5, 6.0, 10.0] {
            let d = disk_points(r, 2).unwrap();
            let zi = d.index_of(&LatticePoint::origin(2)).unwrap();
            let it = solve_hitting_times(&d, &LatticePoint::origin(2)).unwrap();
            let dense = dense_hitting_times(&d, zi);
            for (a, b) in it.values.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-8 * b.max(1.0), "R={r}: {a} vs {b}");
            }
            assert!(mean_value_residual(&d, zi, &it.values) < SOLVER_TOL);
        }
    }

    #[test]
    fn commute_time_identity() {
        for r in [1.0, 5.0, 10.0, 20.0] {
            let d = disk_points(r, 2).unwrap();
            let z = LatticePoint::origin(2);
            let x0 = pt((r / 2.0).ceil() as i64, 0);
            let there = solve_hitting_times(&d, &z).unwrap().values[d.index_of(&x0).unwrap()];
            let back = solve_hitting_times(&d, &x0).unwrap().values[d.index_of(&z).unwrap()];
            let res = effective_resistance(&d, &x0, &z).unwrap();
            let mu = total_degree(&d) as f64;
            assert!(((there + back) - mu * res).abs() < 1e-6 * mu * res, "R={r}");
        }
    }

    #[test]
    fn near_boundary_set_hugs_the_rim() {
        let d = disk_points(20.0, 2).unwrap();
        let sets = boundary_sets(&d, &profile(24)).unwrap();
        assert!(sets.near.iter().all(|x| x.norm() >= 20.0 - 3.0));
        assert!(sets.boundary.iter().all(|x| sets.boundary2.contains(x)));
        assert!(!sets.boundary.contains(&LatticePoint::origin(2)));
    }

    #[test]
    fn report_for_radius_twenty() {
        let p = profile(24);
        let env = fit_envelope_2d(&p, 23).unwrap();
        let rep = disk_report(20.0, &pt(10, 0), &p, &env).unwrap();
        assert!(
            rep.bounds.lower <= rep.exact && rep.exact <= rep.bounds.upper,
            "{rep:?}"
        );
        assert!((rep.asymptotic - (800.0 * p.h(&pt(10, 0)).unwrap() - 100.0)).abs() < 1e-9);
        assert!((rep.asymptotic - 3035.6).abs() < 1.0);
        assert!(rep.solver_residual < SOLVER_TOL);
    }

    #[test]
    fn profile_must_cover_the_domain() {
        let d = disk_points(10.0, 2).unwrap();
        assert!(matches!(
            boundary_sets(&d, &profile(10)),
            Err(Error::OutOfTable(_))
        ));
    }
}
