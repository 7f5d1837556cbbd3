//! Discrete harmonic potentials: the planar potential kernel, the Green
//! function of transient dimensions, and the normalised profile `h` used by
//! the grade bounds.

mod green;
mod kernel;

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BoxGrid, LatticePoint};

pub use green::{green_table, green_table_with, GreenOptions, METHOD_POISSON};
pub use kernel::{
    potential_kernel, potential_kernel_1d, potential_kernel_quadrature, METHOD_CLOSED_FORM,
    METHOD_RECURSION,
};

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `b = gamma_e + (3/2) log 2`, the constant in `h(x) = log|x| + b + O(|x|^-2)`.
pub fn planar_offset() -> f64 {
    EULER_GAMMA + 1.5 * LN_2
}

/// `Gamma(k/2)` for a positive integer `k`, by the half-integer recursion.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k > 0, "Gamma(0) is undefined");
    let (mut value, mut arg) = if k.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    let target = k as f64 / 2.0;
    while arg < target {
        value *= arg;
        arg += 1.0;
    }
    value
}

/// Volume of the unit ball in R^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma_half(d as u32 + 2)
}

/// `a_d = 2 / ((d-2) omega_d)`, the leading constant of the Green function.
pub fn green_leading_constant(d: usize) -> f64 {
    assert!(d >= 3);
    2.0 / ((d as f64 - 2.0) * unit_ball_volume(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    PotentialKernel,
    Green,
}

impl TableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TableKind::PotentialKernel => "potential-kernel",
            TableKind::Green => "green",
        }
    }
}

/// Values of a harmonic potential on the cube `[-L, L]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialTable {
    pub d: usize,
    pub kind: TableKind,
    pub radius: i64,
    pub method: String,
    /// Bound on the error of the stored values; mean-value defects away
    /// from the origin stay below it.
    pub accuracy: f64,
    grid: BoxGrid,
    values: Vec<f64>,
}

impl PotentialTable {
    pub fn new(
        d: usize,
        kind: TableKind,
        radius: i64,
        values: Vec<f64>,
        method: &str,
        accuracy: f64,
    ) -> Result<Self> {
        let grid = BoxGrid::new(d, radius)?;
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!(
                "table of radius {radius} in d={d} needs {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(PotentialTable {
            d,
            kind,
            radius,
            method: method.to_string(),
            accuracy,
            grid,
            values,
        })
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: &LatticePoint) -> Option<f64> {
        self.grid.index(x).map(|i| self.values[i])
    }

    /// `avg_{y ~ x} f(y) - f(x)` at an interior index.
    pub fn mean_value_defect(&self, idx: usize) -> Option<f64> {
        let mut s = 0.0;
        for n in self.grid.neighbor_indices(idx) {
            s += self.values[n?];
        }
        Some(s / (2 * self.d) as f64 - self.values[idx])
    }

    /// Largest mean-value defect over interior points other than the origin,
    /// together with the origin defect corrected for the point source.
    pub fn max_mean_value_defect(&self) -> f64 {
        let origin = self.grid.origin_index();
        let source = match self.kind {
            TableKind::PotentialKernel => 1.0,
            TableKind::Green => -1.0,
        };
        (0..self.grid.len())
            .filter(|&i| self.grid.is_interior(i))
            .map(|i| {
                let defect = self.mean_value_defect(i).expect("interior");
                if i == origin {
                    (defect - source).abs()
                } else {
                    defect.abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Kind and method of the table `standard_table` builds in dimension `d`.
pub fn standard_method(d: usize) -> Result<(TableKind, &'static str)> {
    match d {
        1 => Ok((TableKind::PotentialKernel, METHOD_CLOSED_FORM)),
        2 => Ok((TableKind::PotentialKernel, METHOD_RECURSION)),
        3..=5 => Ok((TableKind::Green, METHOD_POISSON)),
        _ => Err(Error::InvalidInput(format!(
            "potential tables are available for 1 <= d <= 5, got d={d}"
        ))),
    }
}

/// Potential kernel for `d <= 2`, Green function for `3 <= d <= 5`.
pub fn standard_table(d: usize, radius: i64) -> Result<PotentialTable> {
    match d {
        1 => potential_kernel_1d(radius),
        2 => potential_kernel(radius),
        3..=5 => green_table(radius, d),
        _ => standard_method(d).map(|_| unreachable!()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileConstants {
    pub b: f64,
    pub a_d: Option<f64>,
    pub omega_d: f64,
    pub escape_probability: Option<f64>,
}

/// The normalised harmonic function `h` with `h(0) = 0` used by the bounds.
///
/// * `d = 1`: `h(x) = |x|`.
/// * `d = 2`: `h(x) = (pi/2) a(x)`.
/// * `d >= 3`: `h(x) = (G(0) - G(x)) / a_d`, increasing to `h(inf) = G(0)/a_d`.
#[derive(Clone, Debug)]
pub struct HarmonicProfile {
    pub table: PotentialTable,
    pub h_inf: Option<f64>,
    pub constants: ProfileConstants,
    h: Vec<f64>,
}

pub fn build_profile(table: PotentialTable, z: &LatticePoint) -> Result<HarmonicProfile> {
    if z.dim() != table.d {
        return Err(Error::Mismatch(format!(
            "target {z} does not match table dimension {}",
            table.d
        )));
    }
    if !z.is_origin() {
        return Err(Error::InvalidInput(format!(
            "profiles are built about the origin; translate the target {z}"
        )));
    }
    let d = table.d;
    let omega_d = unit_ball_volume(d);
    let b = planar_offset();
    let (h, h_inf, a_d, escape) = match (d, table.kind) {
        (1, TableKind::PotentialKernel) => (table.values.clone(), None, None, None),
        (2, TableKind::PotentialKernel) => (
            table.values.iter().map(|a| 0.5 * PI * a).collect(),
            None,
            None,
            None,
        ),
        (d, TableKind::Green) if d >= 3 => {
            let a_d = green_leading_constant(d);
            let g0 = table.values[table.grid.origin_index()];
            let h = table.values.iter().map(|g| (g0 - g) / a_d).collect();
            (h, Some(g0 / a_d), Some(a_d), Some(1.0 / g0))
        }
        (d, kind) => {
            return Err(Error::Mismatch(format!(
                "no profile for a {} table in d={d}",
                kind.as_str()
            )))
        }
    };
    Ok(HarmonicProfile {
        table,
        h_inf,
        constants: ProfileConstants {
            b,
            a_d,
            omega_d,
            escape_probability: escape,
        },
        h,
    })
}

impl HarmonicProfile {
    pub fn dim(&self) -> usize {
        self.table.d
    }

    pub fn grid(&self) -> &BoxGrid {
        self.table.grid()
    }

    pub fn h_values(&self) -> &[f64] {
        &self.h
    }

    pub fn h(&self, x: &LatticePoint) -> Option<f64> {
        self.grid().index(x).map(|i| self.h[i])
    }

    pub fn h_checked(&self, x: &LatticePoint) -> Result<f64> {
        self.h(x).ok_or_else(|| Error::OutOfTable(x.to_string()))
    }

    /// `sup h` over the whole lattice (`None` when unbounded).
    pub fn sup_h(&self) -> Option<f64> {
        self.h_inf
    }

    /// `V_h` at a grid index whose neighbours are all in the table.
    pub fn local_variance_at(&self, idx: usize) -> Option<f64> {
        let here = self.h[idx];
        let mut s = 0.0;
        for n in self.grid().neighbor_indices(idx) {
            let dh = self.h[n?] - here;
            s += dh * dh;
        }
        Some(s / (2 * self.dim()) as f64)
    }
}

/// `V_h(x) = E_x |h(X_1) - h(x)|^2`.
pub fn local_variance(profile: &HarmonicProfile, x: &LatticePoint) -> Result<f64> {
    let idx = profile
        .grid()
        .index(x)
        .ok_or_else(|| Error::OutOfTable(x.to_string()))?;
    profile
        .local_variance_at(idx)
        .ok_or_else(|| Error::OutOfTable(format!("a neighbour of {x}")))
}
