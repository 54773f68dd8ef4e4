use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{radius_norm2_bound, Aggregate, Dim, LatticePoint};
use crate::par::try_map_replicas;
use crate::rng::Streams;
use crate::stats::fmt_sig9;
use crate::walk::Walker;

/// Consecutive annuli `R_k = B[m + (k+1) w] \ B[m + k w]`, `k = 0..count`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnulusSpec {
    pub m: f64,
    pub width: f64,
    pub count: usize,
}

impl AnnulusSpec {
    pub fn new(m: f64, width: f64, count: usize) -> Result<Self> {
        if !(m >= 0.0) || !(width > 0.0) || !m.is_finite() || !width.is_finite() || count == 0 {
            return Err(Error::InvalidArgument(format!("bad annulus spec m={m} width={width} count={count}")));
        }
        Ok(AnnulusSpec { m, width, count })
    }

    /// Width `beta * n^(1 - 1/(4d))` starting at radius `n`.
    pub fn scaled(dim: Dim, n: f64, beta: f64, count: usize) -> Result<Self> {
        let w = beta * n.powf(1.0 - 1.0 / (4.0 * dim.get() as f64));
        Self::new(n, w, count)
    }

    fn bound(&self, k: usize) -> i64 {
        radius_norm2_bound(self.m + k as f64 * self.width)
    }

    /// Annulus containing `p`: `None` inside `B[m]`, `Some(count)` beyond
    /// the last annulus.
    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        let q = p.norm2();
        if q <= self.bound(0) {
            return None;
        }
        // small counts: a linear scan is cheapest
        (1..=self.count).find(|&k| q <= self.bound(k)).map(|k| k - 1).or(Some(self.count))
    }

    /// Lattice points of `R_k`.
    pub fn points(&self, dim: Dim, k: usize) -> Vec<LatticePoint> {
        let (lo, hi) = (self.bound(k), self.bound(k + 1));
        crate::lattice::ball_points_norm2(dim, hi).into_iter().filter(|p| p.norm2() > lo).collect()
    }
}

/// Each site of every annulus independently with probability `density`.
pub fn random_annulus_fill<R: Rng + ?Sized>(dim: Dim, spec: &AnnulusSpec, density: f64, rng: &mut R) -> Result<Aggregate> {
    let mut agg = Aggregate::new(dim);
    for k in 0..spec.count {
        for p in spec.points(dim, k) {
            if rng.random::<f64>() < density {
                agg.insert(p)?;
            }
        }
    }
    Ok(agg)
}

/// Distribution of the deepest annulus a walk reaches before leaving
/// `S ∪ B[m]`. `max_index_counts[j]` counts walks whose deepest annulus was
/// `R_j`, i.e. that crossed exactly `j` annuli (`j = count` means beyond).
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingReport {
    pub spec: AnnulusSpec,
    pub n_walks: u64,
    pub max_index_counts: Vec<u64>,
}

impl CrossingReport {
    /// `P(N >= j)`.
    pub fn tail(&self, j: usize) -> f64 {
        self.max_index_counts.iter().skip(j).sum::<u64>() as f64 / self.n_walks as f64
    }

    /// Frequency with which annulus `k` was crossed, `P(N >= k + 1)`.
    pub fn crossing_frequency(&self, k: usize) -> f64 {
        self.tail(k + 1)
    }

    pub fn mean(&self) -> f64 {
        self.max_index_counts.iter().enumerate().map(|(j, c)| j as f64 * *c as f64).sum::<f64>() / self.n_walks as f64
    }

    /// Success probability of the geometric law on `{0, 1, ...}` with the
    /// same mean.
    pub fn geometric_fit(&self) -> f64 {
        1.0 / (1.0 + self.mean())
    }

    /// `annulus,crossing_frequency,tail,geometric_half_tail`.
    pub fn csv(&self) -> String {
        let mut s = String::from("annulus,crossing_frequency,tail,geometric_half_tail\n");
        for k in 0..self.spec.count {
            s.push_str(&format!(
                "{},{},{},{}\n",
                k,
                fmt_sig9(self.crossing_frequency(k)),
                fmt_sig9(self.tail(k + 1)),
                fmt_sig9(0.5f64.powi(k as i32 + 1))
            ));
        }
        s
    }
}

/// Walk `i` starts at `starts[i % len]` and runs until it leaves `S ∪ B[m]`.
pub fn annulus_crossing_probe(
    s: &Aggregate,
    spec: &AnnulusSpec,
    starts: &[LatticePoint],
    n_walks: u64,
    streams: &Streams,
    walker: &Walker,
) -> Result<CrossingReport> {
    if starts.is_empty() || n_walks == 0 {
        return Err(Error::InvalidArgument("probe needs starts and a positive walk count".into()));
    }
    let dim = s.dim();
    let mut domain = Aggregate::ball(dim, spec.m)?;
    if let Some(x) = starts.iter().find(|x| !domain.contains(x)) {
        return Err(Error::InvalidArgument(format!("start {x} lies outside B[m]")));
    }
    for p in s.sites() {
        domain.insert(*p)?;
    }
    const CHUNKS: u64 = 64;
    let chunk = n_walks.div_ceil(CHUNKS);
    let parts = try_map_replicas(CHUNKS as u32, |c| -> Result<Vec<u64>> {
        let mut counts = vec![0u64; spec.count + 1];
        let lo = c as u64 * chunk;
        for i in lo..(lo + chunk).min(n_walks) {
            let mut rng = streams.particle(i);
            let x = starts[(i % starts.len() as u64) as usize];
            let mut deepest: Option<usize> = None;
            walker.walk_until_exit_observed(x, &domain, &mut rng, |p| {
                let k = spec.index_of(p);
                if k > deepest {
                    deepest = k;
                }
            })?;
            counts[deepest.expect("the exit lies outside B[m]")] += 1;
        }
        Ok(counts)
    })?;
    let mut max_index_counts = vec![0u64; spec.count + 1];
    for part in parts {
        for (a, b) in max_index_counts.iter_mut().zip(part) {
            *a += b;
        }
    }
    Ok(CrossingReport {
        spec: *spec,
        n_walks,
        max_index_counts,
    })
}
