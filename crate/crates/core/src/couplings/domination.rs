//! Killed-walk coupling between `DA_X(B[n])` and `DA_κ(B[n])`.
//!
//! For a start `x` in `B[n/2]`, the exit law of `B[n]` from `x` splits as
//! `h(x) = η h(0) + (1 - η) q` with `q ≥ 0` whenever the Harnack bound
//! holds at `η`. A particle survives with probability `η`: then both walks
//! leave `B[n]` together from the origin and continue along one path, the
//! `F` copy stopping when it leaves `F` and the `E` copy when it leaves
//! `E ⊇ F`. A killed particle grows only `E`, with its `B[n]` exit drawn
//! from `q`. Each `E` particle is therefore an exact walk from its start and
//! `F ⊆ E` holds by construction.

use std::collections::hash_map::Entry;

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::{radius_norm2_bound, Aggregate, Dim, LatticePoint};
use crate::processes::MultisetOfStarts;
use crate::rng::{Purpose, Streams};
use crate::walk::{ExitDistribution, ExitProblem, Walker};

#[derive(Clone, Debug, PartialEq)]
pub struct DominationOutcome {
    pub e: Aggregate,
    pub f: Aggregate,
    /// Number of surviving (coupled) particles.
    pub kappa: u64,
}

pub fn coupled_domination_run(dim: Dim, n: f64, starts: &MultisetOfStarts, eta: f64, streams: &Streams, walker: &Walker) -> Result<DominationOutcome> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!("eta must lie in [0, 1], got {eta}")));
    }
    let half = radius_norm2_bound(n / 2.0);
    if let Some(x) = starts.0.iter().find(|x| x.norm2() > half) {
        return Err(Error::InvalidArgument(format!("start {x} lies outside B[n/2]")));
    }
    let ball = Aggregate::ball(dim, n)?;
    let prob = ExitProblem::new(dim, ball.sites())?;
    let spread = |x: &LatticePoint| -> Result<Vec<f64>> {
        match prob.exit_distribution(x)? {
            ExitDistribution::Spread(h) => Ok(h),
            ExitDistribution::Immediate(_) => unreachable!("start lies in the ball"),
        }
    };
    let mut h0: Option<Vec<f64>> = None;
    let mut residual: FxHashMap<LatticePoint, WeightedAliasIndex<f64>> = FxHashMap::default();

    let mut e = ball.clone();
    let mut f = ball;
    let mut kappa = 0;
    for (j, &x) in starts.0.iter().enumerate() {
        let survive = streams.aux(Purpose::Killing, j as u64).random::<f64>() < eta;
        let mut rng = streams.particle(j as u64);
        if survive {
            let z = walker.walk_until_exit(LatticePoint::ORIGIN, &f, &mut rng)?.exit;
            let y = if e.contains(&z) { walker.walk_until_exit(z, &e, &mut rng)?.exit } else { z };
            e.insert(y)?;
            f.insert(z)?;
            if !e.contains(&z) {
                return Err(Error::CouplingViolation(format!("F site {z} missing from E")));
            }
            kappa += 1;
        } else {
            if let Entry::Vacant(slot) = residual.entry(x) {
                if h0.is_none() {
                    h0 = Some(spread(&LatticePoint::ORIGIN)?);
                }
                let h0 = h0.as_ref().unwrap();
                let hx = spread(&x)?;
                let mut q = Vec::with_capacity(hx.len());
                let (mut ratio, mut lowest) = (f64::INFINITY, 0.0f64);
                for (a, b) in hx.iter().zip(h0) {
                    let v = (a - eta * b) / (1.0 - eta);
                    if *b > 0.0 {
                        ratio = ratio.min(a / b);
                    }
                    lowest = lowest.min(v);
                    q.push(v.max(0.0));
                }
                if lowest < -1e-9 {
                    return Err(Error::EtaTooLarge { eta, ratio, start: x });
                }
                let alias = WeightedAliasIndex::new(q).map_err(|err| Error::InvalidArgument(format!("residual exit law: {err}")))?;
                slot.insert(alias);
            }
            let w = prob.exits()[residual[&x].sample(&mut rng)];
            let y = walker.walk_until_exit(w, &e, &mut rng)?.exit;
            e.insert(y)?;
        }
    }
    Ok(DominationOutcome { e, f, kappa })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::harnack_ratio_exact;

    fn d2() -> Dim {
        Dim::new(2).unwrap()
    }

    #[test]
    fn eta_one_keeps_copies_equal() {
        let w = Walker::new(d2(), true).unwrap();
        let out = coupled_domination_run(d2(), 6.0, &MultisetOfStarts::origin(50), 1.0, &Streams::new(1, 0), &w).unwrap();
        assert_eq!(out.kappa, 50);
        assert_eq!(out.e, out.f);
    }

    #[test]
    fn eta_zero_leaves_f_alone() {
        let w = Walker::new(d2(), true).unwrap();
        let starts = MultisetOfStarts(vec![LatticePoint::new(&[1, 2]); 30]);
        let out = coupled_domination_run(d2(), 6.0, &starts, 0.0, &Streams::new(2, 0), &w).unwrap();
        assert_eq!(out.kappa, 0);
        assert_eq!(out.f, Aggregate::ball(d2(), 6.0).unwrap());
        assert_eq!(out.e.len(), out.f.len() + 30);
    }

    #[test]
    fn kappa_is_binomial_and_f_inside_e() {
        let dim = d2();
        let w = Walker::new(dim, true).unwrap();
        let eta = 0.3;
        // safely below the exact Harnack ratio for B[6]
        assert!(harnack_ratio_exact(dim, 6.0).unwrap() > eta);
        let starts = MultisetOfStarts((0..100).map(|i| LatticePoint::new(&[i % 4 - 1, (i / 4) % 3 - 1])).collect());
        let reps = 1000;
        let mut ks = Vec::with_capacity(reps);
        for r in 0..reps {
            let out = coupled_domination_run(dim, 6.0, &starts, eta, &Streams::new(3, r as u32), &w).unwrap();
            assert!(out.f.is_subset_of(&out.e));
            assert_eq!(out.e.len(), out.f.len() - out.kappa as usize + 100);
            ks.push(out.kappa as f64);
        }
        let mean = ks.iter().sum::<f64>() / reps as f64;
        let sd = (100.0 * eta * (1.0 - eta) / reps as f64).sqrt();
        assert!((mean - 100.0 * eta).abs() < 4.0 * sd, "{mean}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let w = Walker::plain(d2());
        let s = Streams::new(0, 0);
        assert!(coupled_domination_run(d2(), 6.0, &MultisetOfStarts::origin(1), 1.5, &s, &w).is_err());
        let far = MultisetOfStarts(vec![LatticePoint::new(&[4, 0])]);
        assert!(coupled_domination_run(d2(), 6.0, &far, 0.5, &s, &w).is_err());
        // near the ball's edge the Harnack ratio is far below 0.9
        let edge = MultisetOfStarts(vec![LatticePoint::new(&[3, 0]); 60]);
        let err = coupled_domination_run(d2(), 6.0, &edge, 0.9, &s, &w).unwrap_err();
        assert!(matches!(err, Error::EtaTooLarge { .. }), "{err}");
    }
}
