//! The planar potential kernel `a(x)`.
//!
//! Values on the diagonal are `a(n,n) = (4/pi) * sum_{k=1}^n 1/(2k-1)` and
//! the rest of the octant `0 <= y <= x` follows from the mean-value relation
//! solved for one unknown neighbour at a time. That recursion amplifies
//! rounding by roughly `2 + sqrt 3` per diagonal, so it is carried out
//! exactly: every value is `P + Q / (M pi)` with integers `P`, `Q` and the
//! common denominator `M = lcm(1, 3, ..., 2L - 1)`, and only the final
//! conversion uses a fixed-point `pi` with enough guard bits.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{PotentialTable, TableKind};
use crate::error::{Error, Result};
use crate::lattice::{BoxGrid, LatticePoint};
use crate::quadrature::gauss_kronrod;

pub const METHOD_RECURSION: &str = "diagonal-recursion";
pub const METHOD_CLOSED_FORM: &str = "closed-form";

#[derive(Clone, Debug, Default)]
struct Exact {
    rational: BigInt,
    over_pi: BigInt,
}

impl Exact {
    fn combine(terms: &[(i64, &Exact)]) -> Exact {
        let mut out = Exact::default();
        for (c, e) in terms {
            out.rational += &e.rational * *c;
            out.over_pi += &e.over_pi * *c;
        }
        out
    }
}

struct Octant {
    n: usize,
    cells: Vec<Exact>,
}

impl Octant {
    fn slot(i: usize, j: usize) -> usize {
        debug_assert!(j <= i);
        i * (i + 1) / 2 + j
    }

    /// Lookup through the symmetries of Z^2.
    fn get(&self, x: i64, y: i64) -> &Exact {
        let (a, b) = (x.unsigned_abs() as usize, y.unsigned_abs() as usize);
        let (i, j) = if a >= b { (a, b) } else { (b, a) };
        &self.cells[Self::slot(i, j)]
    }

    fn set(&mut self, i: usize, j: usize, v: Exact) {
        self.cells[Self::slot(i, j)] = v;
    }
}

/// `floor(pi * 2^bits)` by Machin's formula.
fn pi_fixed(bits: u64) -> BigInt {
    let guard = 32;
    let one = BigInt::one() << (bits + guard);
    let atan_inv = |x: u64| -> BigInt {
        let x2 = BigInt::from(x * x);
        let mut power = &one / x;
        let mut sum = power.clone();
        let mut k = 1u64;
        loop {
            power /= &x2;
            if power.is_zero() {
                break;
            }
            let term = &power / (2 * k + 1);
            if k % 2 == 1 {
                sum -= term;
            } else {
                sum += term;
            }
            k += 1;
        }
        sum
    };
    let pi = atan_inv(5) * 16 - atan_inv(239) * 4;
    pi >> guard
}

/// Nearest-ish `f64` to `num / den` for `den > 0` (within one ulp).
fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 66;
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let mag = q.magnitude();
    let qf = mag.to_f64().expect("finite");
    let v = qf * 2f64.powi(-(shift as i32));
    if q.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

/// Potential kernel of simple random walk on Z^2 over the box `[-L, L]^2`.
pub fn potential_kernel(radius: i64) -> Result<PotentialTable> {
    if radius < 2 {
        return Err(Error::InvalidInput(format!(
            "potential kernel needs box radius >= 2, got {radius}"
        )));
    }
    let n = radius as usize;
    let mut denom = BigInt::one();
    for k in 1..=n {
        denom = denom.lcm(&BigInt::from(2 * k - 1));
    }

    let mut oct = Octant {
        n,
        cells: vec![Exact::default(); (n + 1) * (n + 2) / 2],
    };

    // Diagonal: a(k,k) = (4/pi) sum 1/(2j-1).
    let mut harmonic_odd = BigInt::zero();
    for k in 1..=n {
        harmonic_odd += &denom / BigInt::from(2 * k - 1);
        oct.set(
            k,
            k,
            Exact {
                rational: BigInt::zero(),
                over_pi: &harmonic_odd * 4,
            },
        );
    }

    // First off-diagonal from the relation at (k,k) and the origin defect:
    // a(1,0) = 1, a(k+1,k) = 2 a(k,k) - a(k,k-1).
    oct.set(
        1,
        0,
        Exact {
            rational: BigInt::one(),
            over_pi: BigInt::zero(),
        },
    );
    for k in 1..n {
        let v = Exact::combine(&[
            (2, oct.get(k as i64, k as i64)),
            (-1, oct.get(k as i64, k as i64 - 1)),
        ]);
        oct.set(k + 1, k, v);
    }

    // Higher diagonals: the relation at (i,j) on diagonal k = i - j gives
    // a(i+1,j) = 4 a(i,j) - a(i-1,j) - a(i,j+1) - a(i,j-1).
    for k in 1..n {
        for j in 0..n - k {
            let i = (j + k) as i64;
            let jj = j as i64;
            let v = Exact::combine(&[
                (4, oct.get(i, jj)),
                (-1, oct.get(i - 1, jj)),
                (-1, oct.get(i, jj + 1)),
                (-1, oct.get(i, jj - 1)),
            ]);
            oct.set(j + k + 1, j, v);
        }
    }

    let octant_values = to_floats(&oct, &denom);

    let grid = BoxGrid::new(2, radius)?;
    let mut c = [0i64; 2];
    let values = (0..grid.len())
        .map(|idx| {
            grid.coords_into(idx, &mut c);
            let (a, b) = (c[0].unsigned_abs() as usize, c[1].unsigned_abs() as usize);
            let (i, j) = if a >= b { (a, b) } else { (b, a) };
            octant_values[Octant::slot(i, j)]
        })
        .collect();
    let mut table = PotentialTable::new(
        2,
        TableKind::PotentialKernel,
        radius,
        values,
        METHOD_RECURSION,
        0.0,
    )?;
    let defect = table.max_mean_value_defect();
    table.accuracy = (2.0 * defect).max(1e-14);
    Ok(table)
}

fn to_floats(oct: &Octant, denom: &BigInt) -> Vec<f64> {
    let max_bits = oct
        .cells
        .iter()
        .map(|e| e.over_pi.bits().max(e.rational.bits()))
        .max()
        .unwrap_or(0);
    let bits = (max_bits.saturating_sub(denom.bits()) + 128).max(192);
    let pi = pi_fixed(bits);
    let scale = BigInt::one() << bits;
    let den = denom * &pi;
    debug_assert_eq!(oct.cells.len(), (oct.n + 1) * (oct.n + 2) / 2);
    oct.cells
        .iter()
        .map(|e| {
            let num = &e.rational * &den + &e.over_pi * &scale;
            ratio_to_f64(&num, &den)
        })
        .collect()
}

/// The one-dimensional potential kernel `a(x) = |x|` on `[-L, L]`.
pub fn potential_kernel_1d(radius: i64) -> Result<PotentialTable> {
    if radius < 2 {
        return Err(Error::InvalidInput(format!(
            "potential kernel needs box radius >= 2, got {radius}"
        )));
    }
    let values = (-radius..=radius).map(|x| x.abs() as f64).collect();
    PotentialTable::new(
        1,
        TableKind::PotentialKernel,
        radius,
        values,
        METHOD_CLOSED_FORM,
        1e-15,
    )
}

/// Independent route to `a(x)` through the Fourier representation, reduced
/// to one dimension:
///
/// `a(x) = (2/pi) * int_0^pi (1 - e^{-n t} cos(m u)) / sinh t du`,
/// `cosh t = 2 - cos u`, `n = max(|x1|,|x2|)`, `m = min(|x1|,|x2|)`.
pub fn potential_kernel_quadrature(x: &LatticePoint) -> Result<f64> {
    if x.dim() != 2 {
        return Err(Error::Mismatch(format!(
            "quadrature oracle is planar, got {x}"
        )));
    }
    let (a, b) = (x.coords()[0].abs() as f64, x.coords()[1].abs() as f64);
    let (n, m) = if a >= b { (a, b) } else { (b, a) };
    if n == 0.0 {
        return Ok(0.0);
    }
    let f = |u: f64| {
        if u == 0.0 {
            return n;
        }
        let w = 2.0 * (0.5 * u).sin().powi(2);
        let sh = (w * (2.0 + w)).sqrt();
        let t = (w + sh).ln_1p();
        let s = (0.5 * m * u).sin();
        let numer = -(-n * t).exp_m1() + (-n * t).exp() * 2.0 * s * s;
        numer / sh
    };
    let v = gauss_kronrod(&f, 0.0, std::f64::consts::PI, 1e-15, 1e-15)?;
    Ok(2.0 / std::f64::consts::PI * v)
}
