//! Monte Carlo estimators of harmonic measure and the quantities built on
//! it, each paired with an exact solve for validation.

use std::collections::BTreeMap;

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::{Aggregate, Dim, LatticePoint};
use crate::par::try_map_replicas;
use crate::rng::Streams;
use crate::walk::{Domain, ExitDistribution, ExitProblem, Walker};

/// Walks are split into this many deterministic chunks for parallel runs.
const CHUNKS: u64 = 64;

/// Exit counts of walks from `start`, per exit point.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicMeasureEstimate {
    pub start: LatticePoint,
    pub counts: BTreeMap<LatticePoint, u64>,
    pub n_samples: u64,
}

impl HarmonicMeasureEstimate {
    pub fn estimate(&self, y: &LatticePoint) -> f64 {
        self.counts.get(y).copied().unwrap_or(0) as f64 / self.n_samples as f64
    }

    /// Binomial standard error of [`estimate`](Self::estimate).
    pub fn std_error(&self, y: &LatticePoint) -> f64 {
        let p = self.estimate(y);
        (p * (1.0 - p) / self.n_samples as f64).sqrt()
    }
}

/// Counts exits of `n` walks over `domain`, walk `i` drawing its start from
/// `start_of` and its path from particle stream `offset + i`.
fn count_exits<D, S>(domain: &D, n: u64, offset: u64, streams: &Streams, walker: &Walker, start_of: S) -> Result<FxHashMap<LatticePoint, u64>>
where
    D: Domain + Sync,
    S: Fn(&mut crate::rng::RngStream) -> LatticePoint + Sync,
{
    let chunk = n.div_ceil(CHUNKS).max(1);
    let parts = try_map_replicas(CHUNKS as u32, |c| -> Result<FxHashMap<LatticePoint, u64>> {
        let mut counts = FxHashMap::default();
        let lo = c as u64 * chunk;
        let hi = (lo + chunk).min(n);
        for i in lo..hi {
            let mut rng = streams.particle(offset + i);
            let x = start_of(&mut rng);
            let exit = walker.walk_until_exit(x, domain, &mut rng)?.exit;
            *counts.entry(exit).or_insert(0) += 1;
        }
        Ok(counts)
    })?;
    let mut total = FxHashMap::default();
    for part in parts {
        for (k, v) in part {
            *total.entry(k).or_insert(0) += v;
        }
    }
    Ok(total)
}

pub fn estimate_harmonic_measure(a: &Aggregate, x: LatticePoint, n_samples: u64, streams: &Streams, walker: &Walker) -> Result<HarmonicMeasureEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be positive".into()));
    }
    let counts = count_exits(a, n_samples, 0, streams, walker, |_| x)?;
    Ok(HarmonicMeasureEstimate {
        start: x,
        counts: counts.into_iter().collect(),
        n_samples,
    })
}

/// Exact `h_y(x)` for every exit `y` of `a`, with positive probability.
pub fn exact_harmonic_measure(a: &Aggregate, x: LatticePoint) -> Result<Vec<(LatticePoint, f64)>> {
    let prob = ExitProblem::new(a.dim(), a.sites())?;
    Ok(match prob.exit_distribution(&x)? {
        ExitDistribution::Immediate(p) => vec![(p, 1.0)],
        ExitDistribution::Spread(h) => prob.exits().iter().copied().zip(h).filter(|(_, v)| *v > 0.0).collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarnackScan {
    /// `min ĥ_y(x) / ĥ_y(0)` over scanned starts and retained exits.
    pub ratio: f64,
    pub argmin: (LatticePoint, LatticePoint),
    /// Exit points dropped for having fewer than the minimum count from 0.
    pub excluded: Vec<LatticePoint>,
    pub n_starts: usize,
}

/// Empirical Harnack ratio for `A = B[n]` over all starts in `B[n/2]`.
/// Exits seen fewer than `min_count` times from the origin are excluded.
pub fn harnack_ratio_scan(dim: Dim, n: f64, n_samples: u64, min_count: u64, streams: &Streams, walker: &Walker) -> Result<HarnackScan> {
    if !(0.0..=15.0).contains(&n) {
        return Err(Error::InvalidArgument(format!("harnack scan radius must be in [0, 15], got {n}")));
    }
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be positive".into()));
    }
    let ball = Aggregate::ball(dim, n)?;
    let starts = crate::lattice::Ball::centered(n / 2.0).points(dim);
    let h0 = count_exits(&ball, n_samples, 0, streams, walker, |_| LatticePoint::ORIGIN)?;
    let mut exits: Vec<LatticePoint> = ExitProblem::new(dim, ball.sites())?.exits().to_vec();
    let excluded: Vec<LatticePoint> = exits.iter().copied().filter(|y| h0.get(y).copied().unwrap_or(0) < min_count).collect();
    exits.retain(|y| !excluded.contains(y));
    if exits.is_empty() {
        return Err(Error::InvalidArgument(format!("no exit point reached {min_count} counts; raise n_samples")));
    }
    let mut best = (f64::INFINITY, (LatticePoint::ORIGIN, LatticePoint::ORIGIN));
    for (j, x) in starts.iter().enumerate() {
        let hx = if *x == LatticePoint::ORIGIN {
            h0.clone()
        } else {
            count_exits(&ball, n_samples, (j as u64 + 1) * n_samples, streams, walker, |_| *x)?
        };
        for y in &exits {
            let r = hx.get(y).copied().unwrap_or(0) as f64 / h0[y] as f64;
            if r < best.0 {
                best = (r, (*x, *y));
            }
        }
    }
    Ok(HarnackScan {
        ratio: best.0,
        argmin: best.1,
        excluded,
        n_starts: starts.len(),
    })
}

/// Exact `min h_y(x) / h_y(0)` over `x` in `B[n/2]` and exits `y` of `B[n]`.
pub fn harnack_ratio_exact(dim: Dim, n: f64) -> Result<f64> {
    let ball = Aggregate::ball(dim, n)?;
    let prob = ExitProblem::new(dim, ball.sites())?;
    let spread = |x: &LatticePoint| -> Result<Vec<f64>> {
        match prob.exit_distribution(x)? {
            ExitDistribution::Spread(h) => Ok(h),
            ExitDistribution::Immediate(_) => unreachable!("start lies in the ball"),
        }
    };
    let h0 = spread(&LatticePoint::ORIGIN)?;
    let mut best = f64::INFINITY;
    for x in crate::lattice::Ball::centered(n / 2.0).points(dim) {
        let hx = spread(&x)?;
        for (a, b) in hx.iter().zip(&h0) {
            if *b > 0.0 {
                best = best.min(a / b);
            }
        }
    }
    Ok(best)
}

/// Monte Carlo estimate of `sum_y |h_y(0) - avg_{x in B[n]} h_y(x)|` for
/// `A = B[n]`, from `n_samples` walks started at 0 and as many started
/// uniformly in the ball. The estimate is biased upward by sampling noise,
/// roughly `sqrt(#exits / n_samples)`.
pub fn averaging_defect(dim: Dim, n: f64, n_samples: u64, streams: &Streams, walker: &Walker) -> Result<f64> {
    if n > 12.0 {
        return Err(Error::InvalidArgument(format!("averaging defect radius must be <= 12, got {n}")));
    }
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be positive".into()));
    }
    let ball = Aggregate::ball(dim, n)?;
    let from0 = count_exits(&ball, n_samples, 0, streams, walker, |_| LatticePoint::ORIGIN)?;
    let uniform = count_exits(&ball, n_samples, n_samples, streams, walker, |rng| ball.site(rng.random_range(0..ball.len())))?;
    let mut keys: Vec<&LatticePoint> = from0.keys().chain(uniform.keys()).collect();
    keys.sort();
    keys.dedup();
    let total = keys
        .into_iter()
        .map(|y| (from0.get(y).copied().unwrap_or(0) as f64 - uniform.get(y).copied().unwrap_or(0) as f64).abs())
        .sum::<f64>();
    Ok(total / n_samples as f64)
}

/// The same defect computed exactly by two linear solves.
pub fn averaging_defect_exact(dim: Dim, n: f64) -> Result<f64> {
    let ball = Aggregate::ball(dim, n)?;
    let prob = ExitProblem::new(dim, ball.sites())?;
    let h0 = match prob.exit_distribution(&LatticePoint::ORIGIN)? {
        ExitDistribution::Spread(h) => h,
        ExitDistribution::Immediate(_) => unreachable!("origin lies in the ball"),
    };
    let w = vec![1.0 / prob.interior().len() as f64; prob.interior().len()];
    let avg = prob.mixed_exit_distribution(&w)?;
    Ok(h0.iter().zip(&avg).map(|(a, b)| (a - b).abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    #[test]
    fn single_site_quarters() {
        let a = Aggregate::ball(d(2), 0.0).unwrap();
        let est = estimate_harmonic_measure(&a, LatticePoint::ORIGIN, 40_000, &Streams::new(1, 0), &Walker::plain(d(2))).unwrap();
        assert_eq!(est.counts.len(), 4);
        assert_eq!(est.counts.values().sum::<u64>(), 40_000);
        for y in est.counts.keys() {
            assert!((est.estimate(y) - 0.25).abs() < 4.0 * est.std_error(y).max(1e-3));
        }
        assert!(estimate_harmonic_measure(&a, LatticePoint::ORIGIN, 0, &Streams::new(1, 0), &Walker::plain(d(2))).is_err());
    }

    #[test]
    fn one_dimensional_triple() {
        let a = Aggregate::ball(d(1), 1.0).unwrap();
        let est = estimate_harmonic_measure(&a, LatticePoint::ORIGIN, 20_000, &Streams::new(2, 0), &Walker::plain(d(1))).unwrap();
        let exact = exact_harmonic_measure(&a, LatticePoint::ORIGIN).unwrap();
        assert_eq!(exact.len(), 2);
        for (y, p) in exact {
            assert!((p - 0.5).abs() < 1e-12);
            assert!((est.estimate(&y) - p).abs() < 4.0 * (p * (1.0 - p) / 20_000.0).sqrt());
        }
    }

    #[test]
    fn ball_three_matches_solve() {
        let dim = d(2);
        let a = Aggregate::ball(dim, 3.0).unwrap();
        let n = 100_000;
        let est = estimate_harmonic_measure(&a, LatticePoint::ORIGIN, n, &Streams::new(3, 0), &Walker::new(dim, true).unwrap()).unwrap();
        let exact = exact_harmonic_measure(&a, LatticePoint::ORIGIN).unwrap();
        assert!((exact.iter().map(|e| e.1).sum::<f64>() - 1.0).abs() < 1e-12);
        for (y, p) in exact {
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((est.estimate(&y) - p).abs() < 4.0 * sd, "{y}: {} vs {p}", est.estimate(&y));
        }
    }

    #[test]
    fn outside_start_is_immediate() {
        let a = Aggregate::ball(d(2), 1.0).unwrap();
        let far = LatticePoint::new(&[4, 0]);
        assert_eq!(exact_harmonic_measure(&a, far).unwrap(), vec![(far, 1.0)]);
    }

    #[test]
    fn harnack_one_dimension_closed_form() {
        // h_3(x) = (x + 3) / 6 on B[2]; worst start x = -1 gives 2/3
        let exact = harnack_ratio_exact(d(1), 2.0).unwrap();
        assert!((exact - 2.0 / 3.0).abs() < 1e-12);
        let scan = harnack_ratio_scan(d(1), 2.0, 40_000, 100, &Streams::new(4, 0), &Walker::plain(d(1))).unwrap();
        assert_eq!(scan.n_starts, 3);
        assert!(scan.excluded.is_empty());
        assert!((scan.ratio - 2.0 / 3.0).abs() < 0.03, "{}", scan.ratio);
    }

    #[test]
    fn harnack_scan_is_stable_across_seeds() {
        let dim = d(2);
        let w = Walker::new(dim, true).unwrap();
        let a = harnack_ratio_scan(dim, 10.0, 20_000, 100, &Streams::new(5, 0), &w).unwrap();
        let b = harnack_ratio_scan(dim, 10.0, 20_000, 100, &Streams::new(6, 0), &w).unwrap();
        assert!(a.ratio > 0.0 && a.ratio <= 1.0);
        assert!((a.ratio / b.ratio - 1.0).abs() < 0.2, "{} vs {}", a.ratio, b.ratio);
        assert!(harnack_ratio_scan(dim, 16.0, 10, 1, &Streams::new(0, 0), &w).is_err());
    }

    #[test]
    fn defect_one_dimension_vanishes() {
        // h_y is linear in x on an interval, so the ball average equals h_y(0)
        let exact = averaging_defect_exact(d(1), 2.0).unwrap();
        assert!(exact.abs() < 1e-12);
        let n = 50_000;
        let est = averaging_defect(d(1), 2.0, n, &Streams::new(7, 0), &Walker::plain(d(1))).unwrap();
        // |p̂0 - p̂u| on each of the two exits, each with sd <= sqrt(2 * 0.25 / n)
        assert!(est >= 0.0 && est < 2.0 * 4.0 * (0.5 / n as f64).sqrt(), "{est}");
    }

    #[test]
    fn defect_decays_in_two_dimensions() {
        let dim = d(2);
        let w = Walker::new(dim, true).unwrap();
        let e5 = averaging_defect_exact(dim, 5.0).unwrap();
        let e10 = averaging_defect_exact(dim, 10.0).unwrap();
        assert!(e10 < e5);
        let mut wins = 0;
        for seed in 0..3 {
            let a = averaging_defect(dim, 5.0, 100_000, &Streams::new(seed, 0), &w).unwrap();
            let b = averaging_defect(dim, 10.0, 100_000, &Streams::new(seed, 1), &w).unwrap();
            wins += (b < a) as u32;
        }
        assert!(wins >= 2);
        assert!(averaging_defect(dim, 13.0, 10, &Streams::new(0, 0), &w).is_err());
    }
}
