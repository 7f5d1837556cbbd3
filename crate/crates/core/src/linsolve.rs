//! Jacobi-preconditioned conjugate gradients for graph Laplacians.
//!
//! Vectors span every node; fixed (Dirichlet) nodes are kept at zero in all
//! Krylov vectors, so the operator only has to act on free nodes. Parallel
//! reductions use fixed-size chunks summed in chunk order, which keeps the
//! result independent of the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};

const CHUNK: usize = 4096;

/// A symmetric positive definite operator on the free nodes.
#[allow(clippy::len_without_is_empty)]
pub trait LaplacianOperator: Sync {
    fn len(&self) -> usize;

    fn is_free(&self, i: usize) -> bool;

    /// Diagonal entry at node `i` (the degree for graph Laplacians).
    fn diagonal(&self, i: usize) -> f64;

    /// `y = A x` on free nodes, `y = 0` on fixed nodes.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Clone, Copy, Debug)]
pub struct CgOptions {
    /// Stop when `max_i |r_i| / A_ii` falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub residual: f64,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partials: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partials.iter().sum()
}

fn scaled_sup<A: LaplacianOperator>(op: &A, r: &[f64]) -> f64 {
    r.par_iter()
        .enumerate()
        .filter(|(i, _)| op.is_free(*i))
        .map(|(i, v)| v.abs() / op.diagonal(i))
        .reduce(|| 0.0, f64::max)
}

fn true_residual<A: LaplacianOperator>(op: &A, b: &[f64], x: &[f64], r: &mut [f64]) {
    op.apply(x, r);
    r.par_iter_mut()
        .zip(b.par_iter())
        .for_each(|(ri, bi)| *ri = bi - *ri);
}

/// Solves `A x = b` in place, starting from the given `x`.
///
/// `b` and `x` must vanish on fixed nodes.
pub fn conjugate_gradient<A: LaplacianOperator>(
    op: &A,
    b: &[f64],
    x: &mut [f64],
    opts: CgOptions,
    module: &'static str,
) -> Result<CgReport> {
    let n = op.len();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let inv_diag: Vec<f64> = (0..n)
        .map(|i| {
            if op.is_free(i) {
                1.0 / op.diagonal(i)
            } else {
                0.0
            }
        })
        .collect();

    let mut r = vec![0.0; n];
    true_residual(op, b, x, &mut r);
    let mut residual = scaled_sup(op, &r);
    if residual < opts.tol {
        return Ok(CgReport {
            iterations: 0,
            residual,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);

    for it in 1..=opts.max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NumericFailure {
                module,
                message: format!("conjugate gradient breakdown (p.Ap = {pap:e})"),
                residual,
            });
        }
        let alpha = rz / pap;
        x.par_iter_mut()
            .zip(p.par_iter())
            .for_each(|(xi, pi)| *xi += alpha * pi);
        if it % 50 == 0 {
            true_residual(op, b, x, &mut r);
        } else {
            r.par_iter_mut()
                .zip(ap.par_iter())
                .for_each(|(ri, api)| *ri -= alpha * api);
        }
        residual = scaled_sup(op, &r);
        if residual < opts.tol {
            true_residual(op, b, x, &mut r);
            residual = scaled_sup(op, &r);
            if residual < opts.tol {
                return Ok(CgReport {
                    iterations: it,
                    residual,
                });
            }
        }
        z.par_iter_mut()
            .zip(r.par_iter().zip(inv_diag.par_iter()))
            .for_each(|(zi, (ri, di))| *zi = ri * di);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut()
            .zip(z.par_iter())
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Err(Error::NonConvergence {
        module,
        iterations: opts.max_iter,
        residual,
    })
}

/// Graph Laplacian `deg(i) x_i - sum_{j ~ i} x_j` on a compressed adjacency.
pub struct GraphLaplacian<'a> {
    pub offsets: &'a [usize],
    pub targets: &'a [usize],
    pub free: Vec<bool>,
}

impl LaplacianOperator for GraphLaplacian<'_> {
    fn len(&self) -> usize {
        self.free.len()
    }

    fn is_free(&self, i: usize) -> bool {
        self.free[i]
    }

    fn diagonal(&self, i: usize) -> f64 {
        (self.offsets[i + 1] - self.offsets[i]) as f64
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            if !self.free[i] {
                *yi = 0.0;
                return;
            }
            let nbrs = &self.targets[self.offsets[i]..self.offsets[i + 1]];
            let s: f64 = nbrs.iter().filter(|&&j| self.free[j]).map(|&j| x[j]).sum();
            *yi = nbrs.len() as f64 * x[i] - s;
        });
    }
}
