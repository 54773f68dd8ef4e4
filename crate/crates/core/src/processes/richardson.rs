use rand::Rng;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::{Aggregate, LatticePoint};
use crate::rng::{Purpose, RngStream, Streams};

/// Vacant boundary sites of `agg` with their occupied-neighbour counts,
/// sorted by (norm², coordinates).
pub fn boundary_weights(agg: &Aggregate) -> Vec<(LatticePoint, u32)> {
    let mut w: FxHashMap<LatticePoint, u32> = FxHashMap::default();
    let deg = agg.dim().degree();
    for s in agg.sites() {
        for dir in 0..deg {
            let q = s.neighbor(dir);
            if !agg.contains(&q) {
                *w.entry(q).or_default() += 1;
            }
        }
    }
    let mut out: Vec<_> = w.into_iter().collect();
    out.sort_by_key(|(p, _)| (p.norm2(), p.0));
    out
}

/// Embedded jump chain of the Richardson model. Each (occupied, vacant)
/// neighbour pair is one entry of `edges`, so a uniform live entry picks a
/// vacant site with probability proportional to its occupied-neighbour
/// count. Entries whose vacant end has since filled are dropped lazily.
#[derive(Clone, Debug)]
pub struct RichardsonRun {
    agg: Aggregate,
    edges: Vec<LatticePoint>,
    rng: RngStream,
}

impl RichardsonRun {
    pub fn new(s0: Aggregate, streams: &Streams) -> Result<Self> {
        if s0.is_empty() {
            return Err(Error::EmptyAggregate);
        }
        let deg = s0.dim().degree();
        let mut edges = Vec::with_capacity(s0.len() * deg);
        for s in s0.sites() {
            for dir in 0..deg {
                let q = s.neighbor(dir);
                if !s0.contains(&q) {
                    edges.push(q);
                }
            }
        }
        Ok(RichardsonRun {
            agg: s0,
            edges,
            rng: streams.aux(Purpose::Richardson, 0),
        })
    }

    pub fn step(&mut self) -> Result<LatticePoint> {
        loop {
            let i = self.rng.random_range(0..self.edges.len());
            let q = self.edges[i];
            if self.agg.contains(&q) {
                self.edges.swap_remove(i);
                continue;
            }
            self.agg.insert(q)?;
            for dir in 0..self.agg.dim().degree() {
                let r = q.neighbor(dir);
                if !self.agg.contains(&r) {
                    self.edges.push(r);
                }
            }
            return Ok(q);
        }
    }

    pub fn aggregate(&self) -> &Aggregate {
        &self.agg
    }

    pub fn into_aggregate(self) -> Aggregate {
        self.agg
    }
}

pub fn richardson(s0: Aggregate, k: u64, streams: &Streams) -> Result<Aggregate> {
    let mut run = RichardsonRun::new(s0, streams)?;
    for _ in 0..k {
        run.step()?;
    }
    Ok(run.into_aggregate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Dim;
    use std::collections::{HashMap, VecDeque};

    fn d2() -> Dim {
        Dim::new(2).unwrap()
    }

    fn p(x: i32, y: i32) -> LatticePoint {
        LatticePoint::new(&[x, y])
    }

    #[test]
    fn weights_for_domino() {
        let agg = Aggregate::from_points(d2(), [p(0, 0), p(1, 0)]).unwrap();
        let w: HashMap<_, _> = boundary_weights(&agg).into_iter().collect();
        assert_eq!(w.len(), 6);
        for q in [p(0, 1), p(0, -1), p(1, 1), p(1, -1), p(-1, 0), p(2, 0)] {
            assert_eq!(w[&q], 1, "{q}");
        }

        let l = Aggregate::from_points(d2(), [p(0, 0), p(1, 0), p(0, 1)]).unwrap();
        let w: HashMap<_, _> = boundary_weights(&l).into_iter().collect();
        assert_eq!(w[&p(1, 1)], 2);
        assert_eq!(w.values().sum::<u32>(), 8);
    }

    #[test]
    fn first_step_follows_weights() {
        let s0 = Aggregate::from_points(d2(), [p(0, 0), p(1, 0), p(0, 1)]).unwrap();
        let weights: HashMap<_, _> = boundary_weights(&s0).into_iter().collect();
        let total: u32 = weights.values().sum();
        let n = 50_000;
        let mut counts: HashMap<LatticePoint, u32> = HashMap::new();
        for r in 0..n {
            let mut run = RichardsonRun::new(s0.clone(), &Streams::new(1, r)).unwrap();
            *counts.entry(run.step().unwrap()).or_default() += 1;
        }
        for (q, w) in weights {
            let pr = w as f64 / total as f64;
            let f = counts.get(&q).copied().unwrap_or(0) as f64;
            assert!((f - n as f64 * pr).abs() < 4.0 * (n as f64 * pr * (1.0 - pr)).sqrt(), "{q}");
        }
    }

    #[test]
    fn large_run_connected_and_monotone() {
        let s0 = Aggregate::from_points(d2(), [LatticePoint::ORIGIN]).unwrap();
        let mut run = RichardsonRun::new(s0, &Streams::new(2, 0)).unwrap();
        for _ in 0..10_000 {
            let before = run.aggregate().len();
            let q = run.step().unwrap();
            assert_eq!(run.aggregate().len(), before + 1);
            assert!(q.neighbors(d2()).any(|r| run.aggregate().contains(&r)));
        }
        let agg = run.into_aggregate();
        assert_eq!(agg.len(), 10_001);
        let mut seen = std::collections::HashSet::new();
        let mut queue = VecDeque::from([LatticePoint::ORIGIN]);
        seen.insert(LatticePoint::ORIGIN);
        while let Some(x) = queue.pop_front() {
            for y in x.neighbors(d2()) {
                if agg.contains(&y) && seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        assert_eq!(seen.len(), agg.len());
    }
}
