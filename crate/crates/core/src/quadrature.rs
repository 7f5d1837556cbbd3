//! One-dimensional adaptive quadrature.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 60;

/// Adaptive Simpson on `[a, b]` with Richardson correction.
///
/// The target is a relative error of `rel_tol` with respect to the size of
/// the integral, estimated first on a coarse composite rule.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite interval [{a}, {b}]")));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    // Coarse scale estimate sets the absolute tolerance.
    const PANELS: usize = 64;
    let h = (hi - lo) / PANELS as f64;
    let mut scale = 0.0;
    let mut panels = Vec::with_capacity(PANELS);
    for k in 0..PANELS {
        let x0 = lo + k as f64 * h;
        let x2 = if k + 1 == PANELS { hi } else { x0 + h };
        let x1 = 0.5 * (x0 + x2);
        let (f0, f1, f2) = (f(x0), f(x1), f(x2));
        let s = (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2);
        scale += s.abs();
        panels.push((x0, x2, f0, f1, f2, s));
    }
    let eps = (rel_tol * scale).max(f64::MIN_POSITIVE);
    let per_panel = eps / PANELS as f64;
    let mut total = 0.0;
    for (x0, x2, f0, f1, f2, s) in panels {
        total += simpson_rec(f, x0, x2, f0, f1, f2, s, per_panel, MAX_DEPTH)?;
    }
    if !total.is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite integral on [{lo}, {hi}]"
        )));
    }
    Ok(sign * total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::Quadrature(format!(
            "integrand not finite near [{a}, {b}]"
        )));
    }
    if delta.abs() <= 15.0 * eps || m <= a || m >= b {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "recursion limit reached on [{a}, {b}] (local error {:e})",
            delta.abs() / 15.0
        )));
    }
    Ok(
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)?
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)?,
    )
}

/// Adaptive Simpson on `[a, b]` split at the given interior breakpoints,
/// where the integrand may have kinks.
pub fn simpson_with_breaks<F>(f: &F, a: f64, b: f64, breaks: &[f64], rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut knots = Vec::with_capacity(cuts.len() + 2);
    knots.push(lo);
    knots.extend(cuts);
    knots.push(hi);
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += adaptive_simpson(f, w[0], w[1], rel_tol)?;
    }
    Ok(sign * total)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for j in 0..7 {
        let dx = h * GK_NODES[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += GK_WEIGHTS[j] * s;
        if j % 2 == 1 {
            gauss += G_WEIGHTS[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature.
pub fn gauss_kronrod<F>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let mut intervals = vec![{
        let (v, e) = gk15(f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..2000 {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite integral on [{a}, {b}]"
            )));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    Err(Error::Quadrature(format!(
        "Gauss-Kronrod subdivision limit reached on [{a}, {b}]"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomials_and_exponentials() {
        let v = adaptive_simpson(&|x: f64| 2.0 * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        let v = adaptive_simpson(&|x: f64| x.exp(), 0.0, 5.0, 1e-12).unwrap();
        assert!((v - (5f64.exp() - 1.0)).abs() / v < 1e-11);
        let v = adaptive_simpson(&|x: f64| x.exp(), 5.0, 0.0, 1e-12).unwrap();
        assert!(v < 0.0);
    }

    #[test]
    fn simpson_kink_needs_break() {
        let f = |x: f64| x.min(1.0);
        let v = simpson_with_breaks(&f, 0.0, 3.0, &[1.0, 7.0], 1e-12).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
    }

    #[test]
    fn simpson_rejects_singularity() {
        let r = adaptive_simpson(&|x: f64| 1.0 / x, 0.0, 1.0, 1e-10);
        assert!(r.is_err());
    }

    #[test]
    fn gauss_kronrod_smooth() {
        let v = gauss_kronrod(
            &|x: f64| x.cos(),
            0.0,
            std::f64::consts::PI / 2.0,
            1e-15,
            1e-15,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }
}
