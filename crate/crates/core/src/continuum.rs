//! Grades of Brownian motion with restarts, targeting the ball `B_{r0}`.
//!
//! With `h` the radial harmonic function vanishing on the target sphere and
//! `g(s) = |grad h|^2` expressed as a function of `s = h`, the grade is
//! `F(h(x)) = int_0^{h(x)} 2s / g(s) ds`. Both the closed form and the
//! quadrature of `F` are available.

use crate::error::{Error, Result};
use crate::quadrature::gauss_kronrod;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BmProblem {
    pub d: usize,
    pub r0: f64,
}

impl BmProblem {
    /// `r0 = 0` is allowed only on the line, where points are hit.
    pub fn new(d: usize, r0: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        let ok = if d == 1 { r0 >= 0.0 } else { r0 > 0.0 };
        if !ok || !r0.is_finite() {
            return Err(Error::InvalidInput(format!(
                "target radius {r0} is not allowed in d={d}"
            )));
        }
        Ok(BmProblem { d, r0 })
    }

    fn check(&self, r: f64) -> Result<()> {
        if r >= self.r0 && r.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "|x| = {r} lies inside the target radius {}",
                self.r0
            )))
        }
    }

    fn k(&self) -> f64 {
        self.d as f64 - 2.0
    }
}

/// `|x| - r0`, `log(|x|/r0)` or `r0^{2-d} - |x|^{2-d}`.
pub fn bm_h(r: f64, p: &BmProblem) -> Result<f64> {
    p.check(r)?;
    Ok(match p.d {
        1 => r - p.r0,
        2 => (r / p.r0).ln(),
        _ => p.r0.powf(-p.k()) - r.powf(-p.k()),
    })
}

/// `|grad h|^2` at radius `r`.
pub fn bm_gradient_sq(r: f64, p: &BmProblem) -> Result<f64> {
    p.check(r)?;
    Ok(match p.d {
        1 => 1.0,
        2 => r.powi(-2),
        _ => p.k() * p.k() * r.powf(-2.0 * (p.d as f64 - 1.0)),
    })
}

/// `|grad h|^2` as a function of the level `s` of `h`.
pub fn bm_envelope(s: f64, p: &BmProblem) -> f64 {
    match p.d {
        1 => 1.0,
        2 => (-2.0 * s).exp() / (p.r0 * p.r0),
        _ => {
            let k = p.k();
            k * k * (p.r0.powf(-k) - s).powf((2.0 * p.d as f64 - 2.0) / k)
        }
    }
}

/// Closed-form grade at radius `r`.
pub fn bm_grade(r: f64, p: &BmProblem) -> Result<f64> {
    p.check(r)?;
    let r0 = p.r0;
    Ok(match p.d {
        1 => (r - r0).powi(2),
        // Written so that every term cancels exactly at r = r0.
        2 => r * r * (r / r0).ln() - 0.5 * (r * r - r0 * r0),
        d => {
            let (df, k) = (d as f64, p.k());
            let t = r / r0;
            r0 * r0 * ((2.0 * t.powf(df) - df * t * t) + k) / (df * k)
        }
    })
}

/// The grade as `int_0^{h} 2s / g(s) ds`, by adaptive Gauss-Kronrod.
pub fn bm_grade_quadrature(r: f64, p: &BmProblem) -> Result<f64> {
    let h = bm_h(r, p)?;
    if h == 0.0 {
        return Ok(0.0);
    }
    gauss_kronrod(&|s: f64| 2.0 * s / bm_envelope(s, p), 0.0, h, 0.0, 1e-13)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bm(d: usize, r0: f64) -> BmProblem {
        BmProblem::new(d, r0).unwrap()
    }

    #[test]
    fn h_examples() {
        assert_eq!(bm_h(1.0, &bm(2, 1.0)).unwrap(), 0.0);
        assert_eq!(bm_h(3.0, &bm(1, 1.0)).unwrap(), 2.0);
        assert_eq!(bm_h(2.0, &bm(3, 1.0)).unwrap(), 0.5);
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(bm_gradient_sq(7.0, &bm(1, 0.0)).unwrap(), 1.0);
        assert!((bm_gradient_sq(10.0, &bm(2, 1.0)).unwrap() - 0.01).abs() < 1e-17);
        assert_eq!(bm_gradient_sq(2.0, &bm(3, 1.0)).unwrap(), 0.0625);
    }

    #[test]
    fn grade_examples() {
        assert_eq!(bm_grade(3.0, &bm(1, 1.0)).unwrap(), 4.0);
        assert_eq!(bm_grade(1.0, &bm(2, 1.0)).unwrap(), 0.0);
        assert!((bm_grade(2.0, &bm(3, 1.0)).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!((bm_grade_quadrature(2.0, &bm(3, 1.0)).unwrap() - 5.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn envelope_matches_gradient() {
        for p in [bm(1, 0.5), bm(2, 0.7), bm(3, 1.3), bm(5, 2.0)] {
            for r in [p.r0.max(0.1) * 1.1, p.r0.max(0.1) * 3.0] {
                let s = bm_h(r, &p).unwrap();
                let a = bm_envelope(s, &p);
                let b = bm_gradient_sq(r, &p).unwrap();
                assert!((a - b).abs() <= 1e-12 * b, "{p:?} r={r}");
            }
        }
    }

    #[test]
    fn preconditions() {
        assert!(BmProblem::new(2, 0.0).is_err());
        assert!(BmProblem::new(1, 0.0).is_ok());
        assert!(BmProblem::new(3, -1.0).is_err());
        assert!(bm_grade(0.5, &bm(2, 1.0)).is_err());
    }

    proptest::proptest! {
        #[test]
        fn closed_form_matches_quadrature(d in 1usize..=6, r0 in 0.2f64..3.0, t in 1.0f64..6.0) {
            let p = bm(d, r0);
            let r = r0 * t;
            let exact = bm_grade(r, &p).unwrap();
            let quad = bm_grade_quadrature(r, &p).unwrap();
            proptest::prop_assert!((exact - quad).abs() <= 1e-10 * exact.abs().max(1e-300) + 1e-14,
                "{exact} vs {quad}");
        }

        #[test]
        fn boundary_zero(d in 1usize..=6, r0 in 0.1f64..5.0) {
            proptest::prop_assert_eq!(bm_grade(r0, &bm(d, r0)).unwrap(), 0.0);
            proptest::prop_assert_eq!(bm_grade_quadrature(r0, &bm(d, r0)).unwrap(), 0.0);
        }
    }
}
