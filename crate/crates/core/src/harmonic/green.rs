//! Green function of simple random walk on Z^d, d >= 3, by a discrete
//! Poisson solve with asymptotic Dirichlet data on a larger box.

use rayon::prelude::*;

use super::{green_leading_constant, PotentialTable, TableKind};
use crate::error::{Error, Result};
use crate::lattice::BoxGrid;
use crate::linsolve::{conjugate_gradient, CgOptions, LaplacianOperator};

pub const METHOD_POISSON: &str = "dirichlet-poisson";

#[derive(Clone, Copy, Debug)]
pub struct GreenOptions {
    /// The solve runs on a box `box_factor` times the reported radius.
    pub box_factor: i64,
    /// Mean-value residual target for the linear solve.
    pub tol: f64,
    /// Repeat the solve on half the box to estimate the boundary error.
    pub estimate_accuracy: bool,
}

impl Default for GreenOptions {
    fn default() -> Self {
        GreenOptions {
            box_factor: 3,
            tol: 1e-13,
            estimate_accuracy: true,
        }
    }
}

struct BoxLaplacian<'a> {
    grid: &'a BoxGrid,
    free: Vec<bool>,
}

impl LaplacianOperator for BoxLaplacian<'_> {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn is_free(&self, i: usize) -> bool {
        self.free[i]
    }

    fn diagonal(&self, _i: usize) -> f64 {
        (2 * self.grid.dim()) as f64
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let strides = self.grid.strides();
        let diag = (2 * self.grid.dim()) as f64;
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            if !self.free[i] {
                *yi = 0.0;
                return;
            }
            let mut s = 0.0;
            for &st in strides {
                let up = i + st;
                let down = i - st;
                if self.free[up] {
                    s += x[up];
                }
                if self.free[down] {
                    s += x[down];
                }
            }
            *yi = diag * x[i] - s;
        });
    }
}

/// Solves on the box of radius `solve_radius`; returns the grid and values.
fn solve_on_box(d: usize, solve_radius: i64, tol: f64) -> Result<(BoxGrid, Vec<f64>)> {
    let grid = BoxGrid::new(d, solve_radius)?;
    let a_d = green_leading_constant(d);
    let n = grid.len();
    let free: Vec<bool> = (0..n).map(|i| grid.is_interior(i)).collect();
    let asymptotic = |i: usize| a_d * (grid.norm_sq_of(i) as f64).powf(1.0 - d as f64 / 2.0);

    let boundary: Vec<f64> = (0..n)
        .map(|i| if free[i] { 0.0 } else { asymptotic(i) })
        .collect();
    let origin = grid.origin_index();
    let two_d = (2 * d) as f64;
    let rhs: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            if !free[i] {
                return 0.0;
            }
            let mut s = if i == origin { two_d } else { 0.0 };
            for nb in grid.neighbor_indices(i) {
                let j = nb.expect("interior");
                if !free[j] {
                    s += boundary[j];
                }
            }
            s
        })
        .collect();
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            if !free[i] {
                0.0
            } else if i == origin {
                1.0 + a_d
            } else {
                asymptotic(i)
            }
        })
        .collect();

    let op = BoxLaplacian { grid: &grid, free };
    conjugate_gradient(
        &op,
        &rhs,
        &mut x,
        CgOptions {
            tol,
            max_iter: 40 * solve_radius as usize + 2000,
        },
        "harmonic",
    )?;
    for (v, bnd) in x.iter_mut().zip(&boundary) {
        *v += bnd;
    }
    Ok((grid, x))
}

fn restrict(grid: &BoxGrid, values: &[f64], radius: i64) -> Result<(BoxGrid, Vec<f64>)> {
    let inner = BoxGrid::new(grid.dim(), radius)?;
    let mut c = vec![0i64; grid.dim()];
    let out = (0..inner.len())
        .map(|i| {
            inner.coords_into(i, &mut c);
            values[grid.index_of(&c).expect("inner box inside solve box")]
        })
        .collect();
    Ok((inner, out))
}

/// Green function `G(x)` (expected visits to the origin from `x`) on the box
/// `[-L, L]^d`, with the default options.
pub fn green_table(radius: i64, d: usize) -> Result<PotentialTable> {
    green_table_with(radius, d, GreenOptions::default())
}

pub fn green_table_with(radius: i64, d: usize, opts: GreenOptions) -> Result<PotentialTable> {
    if !(3..=5).contains(&d) {
        return Err(Error::InvalidInput(format!(
            "Green tables are available for 3 <= d <= 5, got d={d}"
        )));
    }
    if radius < 4 {
        return Err(Error::InvalidInput(format!(
            "Green table needs radius >= 4, got {radius}"
        )));
    }
    if opts.box_factor < 2 {
        return Err(Error::InvalidInput("box factor must be at least 2".into()));
    }
    let solve_radius = opts.box_factor * radius;
    let (grid, values) = solve_on_box(d, solve_radius, opts.tol)?;
    let (_, inner) = restrict(&grid, &values, radius)?;

    let accuracy = if opts.estimate_accuracy {
        let half = (solve_radius + 1) / 2;
        let (hgrid, hvalues) = solve_on_box(d, half, opts.tol)?;
        let probe = (radius / 2).max(1);
        let (_, a) = restrict(&grid, &values, probe)?;
        let (_, b) = restrict(&hgrid, &hvalues, probe)?;
        a.iter()
            .zip(&b)
            .map(|(p, q)| (p - q).abs())
            .fold(opts.tol, f64::max)
    } else {
        f64::NAN
    };
    PotentialTable::new(d, TableKind::Green, radius, inner, METHOD_POISSON, accuracy)
}
