//! Monte Carlo estimates of expected hitting times under restart strategies.
//!
//! Replicate `i` draws from ChaCha8 stream `i` of the master seed, so the
//! estimate does not depend on how replicates are scheduled, and different
//! strategies run with the same seed see the same random numbers.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grade::RestartSet;
use crate::harmonic::HarmonicProfile;
use crate::lattice::LatticePoint;

pub type Predicate = Arc<dyn Fn(&[i64]) -> bool + Send + Sync>;

/// When to restart, as a function of the position relative to the target.
#[derive(Clone)]
pub enum StrategyKind {
    Never,
    /// Restart when `|y| > radius`.
    EuclideanThreshold {
        radius: f64,
    },
    /// Restart when `h(y) > level`; points outside the profile table restart.
    HThreshold {
        level: f64,
        profile: Arc<HarmonicProfile>,
    },
    /// Restart on the given set; points outside its box restart.
    RestartSet(Arc<RestartSet>),
    Custom(Predicate),
}

impl fmt::Debug for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::Never => write!(f, "Never"),
            StrategyKind::EuclideanThreshold { radius } => {
                write!(f, "EuclideanThreshold({radius})")
            }
            StrategyKind::HThreshold { level, .. } => write!(f, "HThreshold({level})"),
            StrategyKind::RestartSet(s) => write!(f, "RestartSet({} points)", s.len()),
            StrategyKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StrategySpec {
    pub name: String,
    pub kind: StrategyKind,
}

impl StrategySpec {
    pub fn new(name: impl Into<String>, kind: StrategyKind) -> Self {
        StrategySpec {
            name: name.into(),
            kind,
        }
    }

    pub fn never() -> Self {
        Self::new("never", StrategyKind::Never)
    }

    pub fn euclidean(radius: f64) -> Self {
        Self::new(
            "euclidean-threshold",
            StrategyKind::EuclideanThreshold { radius },
        )
    }

    /// Restart whenever `h(y) > h(start)`.
    pub fn h_threshold(profile: Arc<HarmonicProfile>, start: &LatticePoint) -> Result<Self> {
        let level = profile.h_checked(start)?;
        Ok(Self::new(
            "h-threshold",
            StrategyKind::HThreshold { level, profile },
        ))
    }

    pub fn restart_set(set: RestartSet) -> Self {
        Self::new("optimal-set", StrategyKind::RestartSet(Arc::new(set)))
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(&[i64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, StrategyKind::Custom(Arc::new(f)))
    }

    fn restarts(&self, y: &[i64]) -> bool {
        match &self.kind {
            StrategyKind::Never => false,
            StrategyKind::EuclideanThreshold { radius } => {
                let n2: i64 = y.iter().map(|c| c * c).sum();
                n2 as f64 > radius * radius
            }
            StrategyKind::HThreshold { level, profile } => profile
                .grid()
                .index_of(y)
                .is_none_or(|i| profile.h_values()[i] > *level),
            StrategyKind::RestartSet(set) => set.restarts_coords(y),
            StrategyKind::Custom(f) => f(y),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WalkParams {
    pub target: LatticePoint,
    pub start: LatticePoint,
    pub replicates: usize,
    pub step_cap: u64,
    pub seed: u64,
}

impl WalkParams {
    /// Target at the origin and the default cap of `10^8 d` moves.
    pub fn new(start: LatticePoint, replicates: usize, seed: u64) -> Self {
        let d = start.dim();
        WalkParams {
            target: LatticePoint::origin(d),
            start,
            replicates,
            step_cap: 100_000_000 * d as u64,
            seed,
        }
    }

    fn validate(&self) -> Result<Vec<i64>> {
        if self.replicates == 0 {
            return Err(Error::InvalidInput(
                "at least one replicate is required".into(),
            ));
        }
        if self.step_cap == 0 {
            return Err(Error::InvalidInput("step cap must be at least 1".into()));
        }
        if self.target.dim() != self.start.dim() {
            return Err(Error::InvalidInput(format!(
                "start {} and target {} differ in dimension",
                self.start, self.target
            )));
        }
        Ok(self
            .start
            .coords()
            .iter()
            .zip(self.target.coords())
            .map(|(a, b)| a - b)
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    /// Mean number of moves over uncensored replicates.
    pub mean: f64,
    pub std_error: f64,
    pub replicates: usize,
    pub censored: usize,
    pub seed: u64,
}

/// Moves until the target is hit, or `None` when the cap is reached.
fn run_replicate(
    strategy: &StrategySpec,
    start: &[i64],
    cap: u64,
    seed: u64,
    i: usize,
) -> Option<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let d = start.len();
    let mut pos = start.to_vec();
    if pos.iter().all(|&c| c == 0) {
        return Some(0);
    }
    let dirs = 2 * d as u32;
    let mut moves = 0u64;
    while moves < cap {
        let k = rng.random_range(0..dirs) as usize;
        pos[k / 2] += if k.is_multiple_of(2) { 1 } else { -1 };
        moves += 1;
        if pos.iter().all(|&c| c == 0) {
            return Some(moves);
        }
        if strategy.restarts(&pos) {
            pos.copy_from_slice(start);
        }
    }
    None
}

pub fn simulate_strategy(strategy: &StrategySpec, params: &WalkParams) -> Result<McEstimate> {
    let start = params.validate()?;
    let outcomes: Vec<Option<u64>> = (0..params.replicates)
        .into_par_iter()
        .map(|i| run_replicate(strategy, &start, params.step_cap, params.seed, i))
        .collect();
    summarize(&outcomes, params.seed)
}

fn summarize(outcomes: &[Option<u64>], seed: u64) -> Result<McEstimate> {
    let (mut n, mut sum, mut sum_sq) = (0u128, 0u128, 0u128);
    for t in outcomes.iter().flatten() {
        let t = *t as u128;
        n += 1;
        sum += t;
        sum_sq += t * t;
    }
    let censored = outcomes.len() - n as usize;
    if n == 0 {
        return Err(Error::EstimateUnusable(censored));
    }
    let mean = sum as f64 / n as f64;
    let std_error = if n > 1 {
        // n * sum_sq - sum^2 is exact in integers.
        let spread = (n * sum_sq - sum * sum) as f64;
        (spread / (n as f64 * (n - 1) as f64) / n as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(McEstimate {
        mean,
        std_error,
        replicates: outcomes.len(),
        censored,
        seed,
    })
}

/// Runs every strategy on the same random streams; rows sorted by mean.
pub fn compare_strategies(
    strategies: &[StrategySpec],
    params: &WalkParams,
) -> Result<Vec<(StrategySpec, McEstimate)>> {
    if strategies.len() < 2 {
        return Err(Error::InvalidInput(
            "comparison needs at least two strategies".into(),
        ));
    }
    let mut rows = strategies
        .iter()
        .map(|s| simulate_strategy(s, params).map(|e| (s.clone(), e)))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.1.mean.total_cmp(&b.1.mean));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restart_after_every_miss_is_geometric() {
        let s = StrategySpec::custom("always", |_: &[i64]| true);
        let p = WalkParams::new(LatticePoint::on_axis(2, 1), 20_000, 7);
        let e = simulate_strategy(&s, &p).unwrap();
        // Geometric with success 1/4: mean 4, variance 12.
        assert!((e.mean - 4.0).abs() < 3.0 * e.std_error, "{e:?}");
        assert!((e.std_error - (12.0f64 / 20_000.0).sqrt()).abs() < 2e-3);
        assert_eq!(e.censored, 0);
    }

    #[test]
    fn one_dimensional_threshold_is_optimal() {
        let e = simulate_strategy(
            &StrategySpec::euclidean(3.0),
            &WalkParams::new(LatticePoint::on_axis(1, 3), 20_000, 11),
        )
        .unwrap();
        assert!((e.mean - 12.0).abs() < 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn transient_walks_are_censored() {
        let mut p = WalkParams::new(LatticePoint::on_axis(3, 5), 200, 3);
        p.step_cap = 10_000;
        let e = simulate_strategy(&StrategySpec::never(), &p).unwrap();
        assert!(e.censored > 50, "{e:?}");
        assert_eq!(e.replicates, 200);

        p.step_cap = 1;
        assert!(matches!(
            simulate_strategy(&StrategySpec::never(), &p),
            Err(Error::EstimateUnusable(200))
        ));
    }

    #[test]
    fn duplicated_strategy_gives_identical_estimates() {
        let p = WalkParams::new(LatticePoint::new(vec![3, 1]).unwrap(), 2_000, 5);
        let rows = compare_strategies(
            &[StrategySpec::euclidean(4.0), StrategySpec::euclidean(4.0)],
            &p,
        )
        .unwrap();
        assert_eq!(rows[0].1, rows[1].1);
        assert!(compare_strategies(&[StrategySpec::euclidean(4.0)], &p).is_err());
    }

    #[test]
    fn independent_of_thread_count() {
        let p = WalkParams::new(LatticePoint::new(vec![4, 2]).unwrap(), 3_000, 99);
        let s = StrategySpec::euclidean(5.0);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_strategy(&s, &p).unwrap())
        };
        assert_eq!(run(1), run(4));
        let mut other = p.clone();
        other.seed = 100;
        assert_ne!(simulate_strategy(&s, &other).unwrap(), run(2));
    }

    #[test]
    fn invalid_parameters() {
        let mut p = WalkParams::new(LatticePoint::on_axis(2, 2), 0, 1);
        assert!(simulate_strategy(&StrategySpec::never(), &p).is_err());
        p.replicates = 1;
        p.step_cap = 0;
        assert!(simulate_strategy(&StrategySpec::never(), &p).is_err());
    }

    #[test]
    fn start_at_target_takes_no_moves() {
        let p = WalkParams::new(LatticePoint::origin(2), 10, 1);
        let e = simulate_strategy(&StrategySpec::never(), &p).unwrap();
        assert_eq!(e.mean, 0.0);
    }
}
