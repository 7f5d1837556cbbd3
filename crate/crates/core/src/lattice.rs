//! Points, neighbours and finite domains of the integer lattice Z^d.
//!
//! Simple random walk moves to each of the `2d` axis neighbours with
//! probability `1/(2d)`. Neighbour order is fixed (axis 0 `+`, axis 0 `-`,
//! axis 1 `+`, ...) so that sweeps and simulations replay bit-for-bit.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "lattice dimension must be in 1..={MAX_DIM}, got {}",
                coords.len()
            )));
        }
        Ok(LatticePoint(coords))
    }

    pub fn origin(d: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&d), "dimension {d} out of range");
        LatticePoint(vec![0; d])
    }

    /// The point `(n, 0, ..., 0)`.
    pub fn on_axis(d: usize, n: i64) -> Self {
        let mut p = Self::origin(d);
        p.0[0] = n;
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// Largest absolute coordinate (the sup norm).
    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// The `2d` nearest neighbours in canonical order.
    pub fn neighbors(&self) -> Vec<LatticePoint> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for axis in 0..self.dim() {
            for step in [1, -1] {
                let mut c = self.0.clone();
                c[axis] += step;
                out.push(LatticePoint(c));
            }
        }
        out
    }

    /// Coordinates joined by `sep`, e.g. `10;0`.
    pub fn joined(&self, sep: &str) -> String {
        self.0
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(sep)
    }
}

impl TryFrom<Vec<i64>> for LatticePoint {
    type Error = Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        LatticePoint::new(v)
    }
}

impl From<LatticePoint> for Vec<i64> {
    fn from(p: LatticePoint) -> Self {
        p.0
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.joined(","))
    }
}

impl FromStr for LatticePoint {
    type Err = Error;

    /// Accepts `3`, `1,0`, `(1,0)` or `1;0`.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let coords = trimmed
            .split([',', ';'])
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::InvalidInput(format!("bad coordinate {t:?} in {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        LatticePoint::new(coords)
    }
}

/// Dense indexing of the cube `[-radius, radius]^d`.
///
/// Index order is row-major with the last axis fastest, which is also the
/// deterministic sweep order used by the iterative solvers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxGrid {
    d: usize,
    radius: i64,
    side: usize,
    strides: Vec<usize>,
    len: usize,
}

impl BoxGrid {
    pub fn new(d: usize, radius: i64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::InvalidInput(format!("dimension {d} out of range")));
        }
        if radius < 0 {
            return Err(Error::InvalidInput(format!("negative box radius {radius}")));
        }
        let side = (2 * radius + 1) as usize;
        let mut strides = vec![1usize; d];
        for k in (0..d.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * side;
        }
        let len = strides[0] * side;
        Ok(BoxGrid {
            d,
            radius,
            side,
            strides,
            len,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.d {
            return None;
        }
        let mut idx = 0usize;
        for (k, &c) in coords.iter().enumerate() {
            if c.abs() > self.radius {
                return None;
            }
            idx += (c + self.radius) as usize * self.strides[k];
        }
        Some(idx)
    }

    pub fn index(&self, p: &LatticePoint) -> Option<usize> {
        self.index_of(p.coords())
    }

    pub fn origin_index(&self) -> usize {
        self.index_of(&vec![0; self.d])
            .expect("origin is in every box")
    }

    pub fn coords_into(&self, mut idx: usize, out: &mut [i64]) {
        for (o, &stride) in out.iter_mut().zip(&self.strides) {
            let q = idx / stride;
            idx -= q * stride;
            *o = q as i64 - self.radius;
        }
    }

    pub fn point(&self, idx: usize) -> LatticePoint {
        let mut c = vec![0; self.d];
        self.coords_into(idx, &mut c);
        LatticePoint(c)
    }

    /// Neighbour indices of `idx` in canonical order; `None` where the
    /// neighbour leaves the box.
    pub fn neighbor_indices(&self, idx: usize) -> impl Iterator<Item = Option<usize>> + '_ {
        (0..self.d).flat_map(move |k| {
            let c = (idx / self.strides[k]) % self.side;
            let up = (c + 1 < self.side).then(|| idx + self.strides[k]);
            let down = (c > 0).then(|| idx - self.strides[k]);
            [up, down]
        })
    }

    /// True when every neighbour of `idx` is inside the box.
    pub fn is_interior(&self, idx: usize) -> bool {
        (0..self.d).all(|k| {
            let c = (idx / self.strides[k]) % self.side;
            c > 0 && c + 1 < self.side
        })
    }

    pub fn norm_sq_of(&self, idx: usize) -> i64 {
        let mut s = 0;
        let mut rest = idx;
        for k in 0..self.d {
            let q = rest / self.strides[k];
            rest -= q * self.strides[k];
            let c = q as i64 - self.radius;
            s += c * c;
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DomainKind {
    Box { radius: i64 },
    Disk { radius: f64 },
}

/// A finite connected set of lattice points with a precomputed adjacency.
#[derive(Clone, Debug)]
pub struct Domain {
    d: usize,
    kind: DomainKind,
    points: Vec<LatticePoint>,
    index: HashMap<LatticePoint, usize>,
}

impl Domain {
    fn from_points(d: usize, kind: DomainKind, mut points: Vec<LatticePoint>) -> Self {
        points.sort();
        let index = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Domain {
            d,
            kind,
            points,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.index.contains_key(p)
    }

    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Indices of the lattice neighbours of point `i` that lie in the domain.
    pub fn inner_neighbors(&self, i: usize) -> Vec<usize> {
        self.points[i]
            .neighbors()
            .iter()
            .filter_map(|q| self.index_of(q))
            .collect()
    }

    /// `deg_D(x)`: number of lattice neighbours inside the domain.
    pub fn degree(&self, i: usize) -> usize {
        self.inner_neighbors(i).len()
    }

    /// Compressed adjacency (offsets, targets) restricted to the domain.
    pub fn adjacency(&self) -> (Vec<usize>, Vec<usize>) {
        let mut offsets = Vec::with_capacity(self.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for i in 0..self.len() {
            targets.extend(self.inner_neighbors(i));
            offsets.push(targets.len());
        }
        (offsets, targets)
    }
}

/// The lattice ball `{x in Z^d : |x| <= radius}`.
pub fn disk_points(radius: f64, d: usize) -> Result<Domain> {
    if !(radius >= 1.0) || !radius.is_finite() {
        return Err(Error::DomainTooSmall(format!(
            "disk radius must be at least 1, got {radius}"
        )));
    }
    let r = radius.floor() as i64;
    let grid = BoxGrid::new(d, r)?;
    let r2 = radius * radius;
    let points = (0..grid.len())
        .filter(|&i| grid.norm_sq_of(i) as f64 <= r2)
        .map(|i| grid.point(i))
        .collect();
    Ok(Domain::from_points(d, DomainKind::Disk { radius }, points))
}

/// The cube `[-radius, radius]^d`.
pub fn box_points(radius: i64, d: usize) -> Result<Domain> {
    if radius < 1 {
        return Err(Error::DomainTooSmall(format!(
            "box radius must be at least 1, got {radius}"
        )));
    }
    let grid = BoxGrid::new(d, radius)?;
    let points = (0..grid.len()).map(|i| grid.point(i)).collect();
    Ok(Domain::from_points(d, DomainKind::Box { radius }, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn neighbors_in_canonical_order() {
        assert_eq!(pt(&[3]).neighbors(), vec![pt(&[4]), pt(&[2])]);
        assert_eq!(
            pt(&[0, 0]).neighbors(),
            vec![pt(&[1, 0]), pt(&[-1, 0]), pt(&[0, 1]), pt(&[0, -1])]
        );
        let x = pt(&[1, 1, 1]);
        let ns = x.neighbors();
        assert_eq!(ns.len(), 6);
        for n in ns {
            let diff: Vec<i64> = n
                .coords()
                .iter()
                .zip(x.coords())
                .map(|(a, b)| a - b)
                .collect();
            assert_eq!(pt(&diff).norm(), 1.0);
        }
    }

    #[test]
    fn norms() {
        assert_eq!(pt(&[3, 4]).norm(), 5.0);
        assert_eq!(pt(&[0, 0, 0]).norm(), 0.0);
        assert!((pt(&[1, 1]).norm() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn dimension_limits() {
        assert!(LatticePoint::new(vec![]).is_err());
        assert!(LatticePoint::new(vec![0; 9]).is_err());
        assert!(LatticePoint::new(vec![0; 8]).is_ok());
    }

    #[test]
    fn parse_points() {
        assert_eq!("3".parse::<LatticePoint>().unwrap(), pt(&[3]));
        assert_eq!("1,0".parse::<LatticePoint>().unwrap(), pt(&[1, 0]));
        assert_eq!("(10;-2)".parse::<LatticePoint>().unwrap(), pt(&[10, -2]));
        assert!("1,a".parse::<LatticePoint>().is_err());
    }

    #[test]
    fn small_disks() {
        let d1 = disk_points(1.0, 2).unwrap();
        assert_eq!(d1.len(), 5);
        for p in [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]] {
            assert!(d1.contains(&pt(&p)));
        }
        // Brute force over the enclosing square.
        let brute = (-2..=2i64)
            .flat_map(|a| (-2..=2i64).map(move |b| a * a + b * b))
            .filter(|&n| n <= 4)
            .count();
        assert_eq!(brute, 13);
        assert_eq!(disk_points(2.0, 2).unwrap().len(), 13);
        assert_eq!(disk_points(1.4, 2).unwrap().len(), 5);
        assert!(matches!(disk_points(0.9, 2), Err(Error::DomainTooSmall(_))));
    }

    #[test]
    fn disk_degrees() {
        let d1 = disk_points(1.0, 2).unwrap();
        let o = d1.index_of(&pt(&[0, 0])).unwrap();
        assert_eq!(d1.degree(o), 4);
        let e = d1.index_of(&pt(&[1, 0])).unwrap();
        assert_eq!(d1.inner_neighbors(e), vec![o]);
    }

    #[test]
    fn grid_round_trip_and_neighbors() {
        let g = BoxGrid::new(3, 2).unwrap();
        assert_eq!(g.len(), 125);
        for i in 0..g.len() {
            let p = g.point(i);
            assert_eq!(g.index(&p), Some(i));
            let expected: Vec<Option<usize>> = p.neighbors().iter().map(|q| g.index(q)).collect();
            let got: Vec<Option<usize>> = g.neighbor_indices(i).collect();
            assert_eq!(got, expected);
            assert_eq!(g.is_interior(i), expected.iter().all(|n| n.is_some()));
            assert_eq!(g.norm_sq_of(i), p.norm_sq());
        }
    }

    proptest! {
        #[test]
        fn neighbor_relation_is_symmetric(c in proptest::collection::vec(-50i64..50, 1..=4)) {
            let x = LatticePoint::new(c).unwrap();
            let ns = x.neighbors();
            prop_assert_eq!(ns.len(), 2 * x.dim());
            for y in &ns {
                prop_assert!(y.neighbors().contains(&x));
            }
        }

        #[test]
        fn disks_are_nested(r in 1.0f64..6.0, extra in 0.0f64..3.0) {
            let small = disk_points(r, 2).unwrap();
            let big = disk_points(r + extra, 2).unwrap();
            prop_assert!(small.points().iter().all(|p| big.contains(p)));
            prop_assert!(small.contains(&LatticePoint::origin(2)));
        }
    }
}
