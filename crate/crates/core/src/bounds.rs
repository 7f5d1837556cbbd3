//! Sandwich bounds on the grade from a harmonic profile `h` and a pair of
//! envelopes `g_-(xi) <= V_h(x) <= g_+(xi)` (for `xi` between the `h`-values
//! of the endpoints of every edge at `x`):
//!
//! ```text
//! int_0^{h(x)} 2s / g_+(s) ds  <=  gamma(x, 0)  <=  int_0^{h*(x)} 2s / g_-(s) ds
//! ```
//!
//! Every envelope family has the shape `k u^p (1 +- C u^q)` in a scale
//! variable `u(s)` that decreases in `s`:
//!
//! * `d = 1`: `V_h = 1` exactly, so `g_- = g_+ = 1`.
//! * `d = 2`: `u = e^{-s}`, `k = e^{2b}/2`, `p = 2`, `q = 1`.
//! * `d >= 3`: `u = h(inf) - s`, `k = (d-2)^2/d`, `p = (2d-2)/(d-2)`, `q = 1/(d-2)`.
//!
//! The raw lower envelope turns negative for small `s`. It is replaced by
//! its non-increasing hull: constant at its peak value below the peak.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{unit_ball_volume, HarmonicProfile, EULER_GAMMA};
use crate::lattice::LatticePoint;
use crate::quadrature::simpson_with_breaks;

/// Envelope constants are searched up to this value.
pub const ENVELOPE_CAP: f64 = 1e8;
pub const QUADRATURE_REL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum EnvelopeFamily {
    Constant,
    Planar { b: f64 },
    Transient { d: usize, h_inf: f64 },
}

impl EnvelopeFamily {
    fn scale(&self, s: f64) -> f64 {
        match *self {
            EnvelopeFamily::Constant => 1.0,
            EnvelopeFamily::Planar { .. } => (-s).exp(),
            EnvelopeFamily::Transient { h_inf, .. } => (h_inf - s).max(0.0),
        }
    }

    fn s_of(&self, u: f64) -> f64 {
        match *self {
            EnvelopeFamily::Constant => 0.0,
            EnvelopeFamily::Planar { .. } => -u.ln(),
            EnvelopeFamily::Transient { h_inf, .. } => h_inf - u,
        }
    }

    fn prefactor(&self) -> f64 {
        match *self {
            EnvelopeFamily::Constant => 1.0,
            EnvelopeFamily::Planar { b } => 0.5 * (2.0 * b).exp(),
            EnvelopeFamily::Transient { d, .. } => {
                let k = d as f64 - 2.0;
                k * k / d as f64
            }
        }
    }

    /// `(p, q)`.
    pub fn exponents(&self) -> (f64, f64) {
        match *self {
            EnvelopeFamily::Constant => (0.0, 0.0),
            EnvelopeFamily::Planar { .. } => (2.0, 1.0),
            EnvelopeFamily::Transient { d, .. } => {
                let k = d as f64 - 2.0;
                ((2.0 * d as f64 - 2.0) / k, 1.0 / k)
            }
        }
    }

    /// Right end of the range of `h` (`sup h`).
    pub fn sup(&self) -> f64 {
        match *self {
            EnvelopeFamily::Transient { h_inf, .. } => h_inf,
            _ => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopePair {
    pub family: EnvelopeFamily,
    pub c_lower: f64,
    pub c_upper: f64,
    /// `g_-` is held at `floor_value` for `s < floor_below`.
    pub floor_below: f64,
    pub floor_value: f64,
    /// Box radius over which the constants were fitted.
    pub fitted_radius: i64,
    /// Number of points `x` whose edges were checked.
    pub points_checked: usize,
    /// Points whose lower check fell in the floor region.
    pub floor_covered: usize,
}

impl EnvelopePair {
    pub fn new(family: EnvelopeFamily, c_lower: f64, c_upper: f64) -> Result<Self> {
        if !(c_lower >= 0.0 && c_upper >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "envelope constants must be >= 0, got {c_lower}, {c_upper}"
            )));
        }
        let mut pair = EnvelopePair {
            family,
            c_lower,
            c_upper,
            floor_below: 0.0,
            floor_value: 0.0,
            fitted_radius: 0,
            points_checked: 0,
            floor_covered: 0,
        };
        let (p, q) = family.exponents();
        if family != EnvelopeFamily::Constant && c_lower > 0.0 {
            let u_peak = (p / (c_lower * (p + q))).powf(1.0 / q);
            let s_peak = family.s_of(u_peak);
            if s_peak > 0.0 {
                pair.floor_below = s_peak;
            }
        }
        pair.floor_value = pair.raw(pair.family.scale(pair.floor_below), -c_lower);
        Ok(pair)
    }

    /// Exact envelopes `g_- = g_+ = 1` for the one-dimensional walk.
    pub fn constant() -> Self {
        EnvelopePair::new(EnvelopeFamily::Constant, 0.0, 0.0).expect("valid constants")
    }

    fn raw(&self, u: f64, signed_c: f64) -> f64 {
        let (p, q) = self.family.exponents();
        if self.family == EnvelopeFamily::Constant {
            return 1.0;
        }
        self.family.prefactor() * u.powf(p) * (1.0 + signed_c * u.powf(q))
    }

    pub fn g_minus(&self, s: f64) -> f64 {
        if s < self.floor_below {
            self.floor_value
        } else {
            self.raw(self.family.scale(s), -self.c_lower)
        }
    }

    pub fn g_plus(&self, s: f64) -> f64 {
        self.raw(self.family.scale(s), self.c_upper)
    }
}

/// `V_h(x)` together with the range of `h` over `x` and its neighbours.
struct Span {
    idx: usize,
    v: f64,
    lo: f64,
    hi: f64,
}

fn collect_spans(profile: &HarmonicProfile, radius: i64) -> Result<Vec<Span>> {
    let grid = profile.grid();
    if radius < 1 || radius >= grid.radius() {
        return Err(Error::OutOfTable(format!(
            "fit radius {radius} needs a table of radius > {radius}, have {}",
            grid.radius()
        )));
    }
    let h = profile.h_values();
    let origin = grid.origin_index();
    let mut c = vec![0i64; grid.dim()];
    let mut spans = Vec::new();
    for idx in 0..grid.len() {
        grid.coords_into(idx, &mut c);
        if idx == origin || c.iter().any(|v| v.abs() > radius) {
            continue;
        }
        let (mut lo, mut hi) = (h[idx], h[idx]);
        for n in grid.neighbor_indices(idx) {
            let j = n.expect("fit radius is inside the table");
            lo = lo.min(h[j]);
            hi = hi.max(h[j]);
        }
        let v = profile.local_variance_at(idx).expect("neighbours in table");
        spans.push(Span { idx, v, lo, hi });
    }
    Ok(spans)
}

/// Smallest constant, to two significant digits, for which `valid` holds.
/// `valid` must be monotone (once true, true for every larger constant).
fn smallest_constant(valid: impl Fn(f64) -> bool) -> Option<f64> {
    if valid(0.0) {
        return Some(0.0);
    }
    let mut hi = 1.0;
    while !valid(hi) {
        hi *= 2.0;
        if hi > ENVELOPE_CAP {
            return None;
        }
    }
    let mut lo = if hi == 1.0 { 0.0 } else { hi / 2.0 };
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if valid(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let step = 10f64.powf(hi.log10().floor() - 1.0);
    let mut c = (hi / step).ceil() * step;
    while !valid(c) {
        c += step;
    }
    Some(c)
}

fn fit(profile: &HarmonicProfile, family: EnvelopeFamily, radius: i64) -> Result<EnvelopePair> {
    let spans = collect_spans(profile, radius)?;
    let upper_ok = |c: f64| {
        let pair = EnvelopePair::new(family, 0.0, c).expect("c >= 0");
        spans.iter().all(|sp| sp.v <= pair.g_plus(sp.hi))
    };
    let lower_ok = |c: f64| {
        let pair = EnvelopePair::new(family, c, 0.0).expect("c >= 0");
        spans.iter().all(|sp| pair.g_minus(sp.lo) <= sp.v)
    };
    let failure = |pair: &EnvelopePair| {
        let worst = spans
            .iter()
            .max_by(|a, b| {
                let ra = (pair.g_minus(a.lo) / a.v).max(a.v / pair.g_plus(a.hi));
                let rb = (pair.g_minus(b.lo) / b.v).max(b.v / pair.g_plus(b.hi));
                ra.total_cmp(&rb)
            })
            .map(|sp| profile.grid().point(sp.idx).to_string())
            .unwrap_or_default();
        Error::EnvelopeFailure {
            cap: ENVELOPE_CAP,
            worst_edge: worst,
        }
    };
    let cap_pair = EnvelopePair::new(family, ENVELOPE_CAP, ENVELOPE_CAP)?;
    let c_upper = smallest_constant(upper_ok).ok_or_else(|| failure(&cap_pair))?;
    let c_lower = smallest_constant(lower_ok).ok_or_else(|| failure(&cap_pair))?;
    let mut pair = EnvelopePair::new(family, c_lower, c_upper)?;
    pair.fitted_radius = radius;
    pair.points_checked = spans.len();
    pair.floor_covered = spans.iter().filter(|sp| sp.lo < pair.floor_below).count();
    Ok(pair)
}

/// Fits the planar envelopes `g_+-(s) = (1/2) e^{-2(s-b)} (1 +- C e^{-s})`
/// over every point of the box of the given radius (target excluded).
pub fn fit_envelope_2d(profile: &HarmonicProfile, radius: i64) -> Result<EnvelopePair> {
    if profile.dim() != 2 {
        return Err(Error::Mismatch(format!(
            "planar envelopes need d=2, got d={}",
            profile.dim()
        )));
    }
    fit(
        profile,
        EnvelopeFamily::Planar {
            b: profile.constants.b,
        },
        radius,
    )
}

/// Fits `g_+-(s) = ((d-2)^2/d) u^{(2d-2)/(d-2)} (1 +- C u^{1/(d-2)})`,
/// `u = h(inf) - s`, for a transient profile.
pub fn fit_envelope_d(profile: &HarmonicProfile, radius: i64) -> Result<EnvelopePair> {
    let d = profile.dim();
    let h_inf = profile
        .h_inf
        .filter(|_| d >= 3)
        .ok_or_else(|| Error::Mismatch(format!("transient envelopes need d >= 3, got d={d}")))?;
    fit(profile, EnvelopeFamily::Transient { d, h_inf }, radius)
}

/// Envelopes for any supported profile; `d = 1` needs no fitting.
pub fn fit_envelope(profile: &HarmonicProfile, radius: i64) -> Result<EnvelopePair> {
    match profile.dim() {
        1 => {
            let spans = collect_spans(profile, radius)?;
            if let Some(sp) = spans.iter().find(|sp| sp.v != 1.0) {
                return Err(Error::EnvelopeFailure {
                    cap: 0.0,
                    worst_edge: profile.grid().point(sp.idx).to_string(),
                });
            }
            let mut pair = EnvelopePair::constant();
            pair.fitted_radius = radius;
            pair.points_checked = spans.len();
            Ok(pair)
        }
        2 => fit_envelope_2d(profile, radius),
        _ => fit_envelope_d(profile, radius),
    }
}

/// `h*(x) = sup { h(y) : y ~ w, h(w) <= h(x) }`.
pub fn h_star(profile: &HarmonicProfile, x: &LatticePoint) -> Result<f64> {
    let hx = profile.h_checked(x)?;
    let grid = profile.grid();
    let h = profile.h_values();
    let mut best = f64::NEG_INFINITY;
    for (i, &hw) in h.iter().enumerate() {
        if hw > hx {
            continue;
        }
        for n in grid.neighbor_indices(i) {
            let j = n.ok_or_else(|| {
                Error::OutOfTable(format!(
                    "sublevel set of h at {x} reaches the table edge at {}",
                    grid.point(i)
                ))
            })?;
            best = best.max(h[j]);
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradeBounds {
    pub h: f64,
    pub h_star: f64,
    pub lower: f64,
    pub upper: f64,
    /// Part of `upper` contributed by the floor region of `g_-`.
    pub upper_floor_part: f64,
}

/// Break points for the quadrature on `[0, end]`.
pub(crate) fn quadrature_breaks(env: &EnvelopePair, end: f64) -> Vec<f64> {
    let mut breaks = vec![env.floor_below];
    if let EnvelopeFamily::Transient { h_inf, .. } = env.family {
        let mut u = 10f64.powf((h_inf).log10().floor());
        while h_inf - u < end {
            breaks.push(h_inf - u);
            u /= 10.0;
        }
    }
    breaks.retain(|&b| b > 0.0 && b < end);
    breaks.sort_by(f64::total_cmp);
    breaks
}

/// `int_0^end w(s) / g(s) ds` for a weight `w`.
pub(crate) fn envelope_integral(
    env: &EnvelopePair,
    end: f64,
    extra_break: Option<f64>,
    g: impl Fn(f64) -> f64,
    weight: impl Fn(f64) -> f64,
) -> Result<f64> {
    if end <= 0.0 {
        return Ok(0.0);
    }
    if end >= env.family.sup() {
        return Err(Error::Quadrature(format!(
            "upper limit {end} reaches the end of the envelope range {}",
            env.family.sup()
        )));
    }
    let mut breaks = quadrature_breaks(env, end);
    if let Some(b) = extra_break.filter(|&b| b > 0.0 && b < end) {
        breaks.push(b);
        breaks.sort_by(f64::total_cmp);
    }
    simpson_with_breaks(&|s| weight(s) / g(s), 0.0, end, &breaks, QUADRATURE_REL_TOL)
}

pub fn grade_bounds(
    profile: &HarmonicProfile,
    env: &EnvelopePair,
    x: &LatticePoint,
) -> Result<GradeBounds> {
    let h = profile.h_checked(x)?;
    if x.is_origin() {
        return Ok(GradeBounds {
            h,
            h_star: h_star(profile, x)?,
            lower: 0.0,
            upper: 0.0,
            upper_floor_part: 0.0,
        });
    }
    let hs = h_star(profile, x)?;
    let lower = envelope_integral(env, h, None, |s| env.g_plus(s), |s| 2.0 * s)?;
    let upper = envelope_integral(env, hs, None, |s| env.g_minus(s), |s| 2.0 * s)?;
    let t = env.floor_below.min(hs);
    Ok(GradeBounds {
        h,
        h_star: hs,
        lower,
        upper,
        upper_floor_part: t * t / env.floor_value,
    })
}

/// `2 gamma_e + 3 log 2 - 1`, the second-order coefficient of the planar grade.
pub fn planar_grade_constant() -> f64 {
    2.0 * EULER_GAMMA + 3.0 * LN_2 - 1.0
}

/// Leading-order grade at distance `r` from the target:
/// `2 r^2 log r + (2 gamma_e + 3 log 2 - 1) r^2` in the plane and
/// `(omega_d / p_d) r^d` for `d >= 3` (escape probability `p_d` required).
pub fn asymptotic_grade(r: f64, d: usize, escape: Option<f64>) -> Result<f64> {
    if !(r >= 2.0) {
        return Err(Error::InvalidInput(format!(
            "asymptotic grade needs |x| >= 2, got {r}"
        )));
    }
    match d {
        2 => Ok(2.0 * r * r * r.ln() + planar_grade_constant() * r * r),
        d if d >= 3 => {
            let p = escape.ok_or_else(|| {
                Error::InvalidInput("the escape probability is required for d >= 3".into())
            })?;
            Ok(unit_ball_volume(d) / p * r.powi(d as i32))
        }
        _ => Err(Error::InvalidInput(format!(
            "no asymptotic grade formula for d={d}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{
        build_profile, green_table, planar_offset, potential_kernel, potential_kernel_1d,
    };

    fn planar_profile(l: i64) -> HarmonicProfile {
        build_profile(potential_kernel(l).unwrap(), &LatticePoint::origin(2)).unwrap()
    }

    #[test]
    fn one_dimensional_bounds() {
        let p = build_profile(potential_kernel_1d(20).unwrap(), &LatticePoint::origin(1)).unwrap();
        let env = fit_envelope(&p, 19).unwrap();
        assert_eq!((env.c_lower, env.c_upper), (0.0, 0.0));
        let x = LatticePoint::on_axis(1, 3);
        assert_eq!(h_star(&p, &x).unwrap(), 4.0);
        let b = grade_bounds(&p, &env, &x).unwrap();
        assert!(
            (b.lower - 9.0).abs() < 1e-9 && (b.upper - 16.0).abs() < 1e-9,
            "{b:?}"
        );
        assert!(b.lower <= 12.0 && 12.0 <= b.upper);
        let z = grade_bounds(&p, &env, &LatticePoint::origin(1)).unwrap();
        assert_eq!(z.lower, 0.0);
    }

    #[test]
    fn planar_envelope_formula() {
        let b = planar_offset();
        let env = EnvelopePair::new(EnvelopeFamily::Planar { b }, 3.0, 5.0).unwrap();
        for n in [4.0f64, 10.0, 40.0] {
            let s = n.ln() + b;
            let want = (1.0 + 5.0 / (n * b.exp())) / (2.0 * n * n);
            assert!((env.g_plus(s) - want).abs() < 1e-14 * want);
        }
        // Hull: constant below the peak e^s = 1.5 C, positive everywhere.
        assert!((env.floor_below - 4.5f64.ln()).abs() < 1e-12);
        assert_eq!(env.g_minus(0.0), env.g_minus(1.0));
        assert!(env.floor_value > 0.0);
    }

    #[test]
    fn transient_exponents_and_limit() {
        let fam = EnvelopeFamily::Transient { d: 3, h_inf: 3.0 };
        assert_eq!(fam.exponents(), (4.0, 1.0));
        let env = EnvelopePair::new(fam, 1.0, 1.0).unwrap();
        assert!(env.g_plus(3.0 - 1e-6) < 1e-20);
        assert!(env.g_plus(2.0) > env.g_plus(2.9));
    }

    #[test]
    fn envelopes_are_ordered() {
        let fams = [
            EnvelopeFamily::Planar { b: planar_offset() },
            EnvelopeFamily::Transient { d: 3, h_inf: 3.2 },
            EnvelopeFamily::Transient { d: 4, h_inf: 2.0 },
        ];
        for fam in fams {
            let env = EnvelopePair::new(fam, 7.0, 2.0).unwrap();
            let top = fam.sup().min(20.0);
            for k in 0..200 {
                let s = top * k as f64 / 200.0;
                let (lo, hi) = (env.g_minus(s), env.g_plus(s));
                assert!(lo > 0.0 && lo <= hi, "{fam:?} s={s}: {lo} {hi}");
            }
        }
    }

    #[test]
    fn planar_fit_and_sandwich() {
        let p = planar_profile(64);
        let env = fit_envelope_2d(&p, 63).unwrap();
        assert!(env.c_lower.is_finite() && env.c_upper.is_finite());
        // Envelope property on the annulus 3 <= |x| <= L/2, checked edge by
        // edge at both ends of the h-interval.
        let g = p.grid();
        for i in 0..g.len() {
            let r2 = g.norm_sq_of(i);
            if !(9..=32 * 32).contains(&r2) {
                continue;
            }
            let v = p.local_variance_at(i).unwrap();
            let hx = p.h_values()[i];
            for n in g.neighbor_indices(i) {
                let hy = p.h_values()[n.unwrap()];
                for xi in [hx.min(hy), hx.max(hy), 0.5 * (hx + hy)] {
                    assert!(env.g_minus(xi) <= v && v <= env.g_plus(xi));
                }
            }
        }
        let x = LatticePoint::on_axis(2, 10);
        let b = grade_bounds(&p, &env, &x).unwrap();
        let g_star = 747.920_211_058;
        assert!(b.lower <= g_star && g_star <= b.upper, "{b:?}");
        assert!(b.upper_floor_part < b.upper);
    }

    #[test]
    fn planar_h_star() {
        let p = planar_profile(48);
        let x = LatticePoint::on_axis(2, 20);
        let hs = h_star(&p, &x).unwrap();
        let hx = p.h(&x).unwrap();
        assert!(hs >= hx);
        assert!(
            (hs - 20f64.ln() - planar_offset()).abs() < 2.0 / 20.0,
            "{hs}"
        );
        let far = LatticePoint::on_axis(2, 48);
        assert!(matches!(h_star(&p, &far), Err(Error::OutOfTable(_))));
    }

    #[test]
    fn transient_fit() {
        let t = green_table(8, 3).unwrap();
        let p = build_profile(t, &LatticePoint::origin(3)).unwrap();
        let env = fit_envelope_d(&p, 7).unwrap();
        assert!(env.c_lower.is_finite() && env.c_upper.is_finite());
        let x = LatticePoint::on_axis(3, 3);
        let b = grade_bounds(&p, &env, &x).unwrap();
        assert!(b.lower > 0.0 && b.lower < b.upper);
        assert!(fit_envelope_2d(&p, 7).is_err());
    }

    #[test]
    fn asymptotic_constants() {
        assert!((planar_grade_constant() - 2.233_872_8).abs() < 1e-7);
        let e = std::f64::consts::E;
        let v = asymptotic_grade(e, 2, None).unwrap();
        assert!((v - (2.0 + planar_grade_constant()) * e * e).abs() < 1e-12);
        let v3 = asymptotic_grade(2.0, 3, Some(0.659_462_6)).unwrap();
        assert!((v3 / 8.0 - 6.3518).abs() < 1e-3);
        assert!(asymptotic_grade(5.0, 3, None).is_err());
        assert!(asymptotic_grade(1.0, 2, None).is_err());
    }
}
