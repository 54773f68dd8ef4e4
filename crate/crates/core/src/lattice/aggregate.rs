use rand::Rng;
use rustc_hash::FxHashMap;

use super::{ball_points_norm2, radius_norm2_bound, Dim, LatticePoint};
use crate::error::{Error, Result};

/// Finite occupied subset of `Z^d`.
///
/// Sites live in an append-only array (insertion order, O(1) uniform
/// sampling) indexed by an open-addressing hash map keyed by packed
/// coordinates. The largest `|p|` and the inscribed origin-centred ball are
/// maintained incrementally.
#[derive(Clone, Debug)]
pub struct Aggregate {
    dim: Dim,
    index: FxHashMap<u64, u32>,
    sites: Vec<LatticePoint>,
    max_norm2: i64,
    inner: InnerBall,
}

/// Tracks the smallest-norm vacant point by walking a norm-sorted list of
/// lattice points. The cursor only moves forward because sites are never
/// removed.
#[derive(Clone, Debug)]
struct InnerBall {
    order: Vec<LatticePoint>,
    generated_norm2: i64,
    cursor: usize,
    /// Squared radius of the largest complete shell, `-1` if the origin is vacant.
    norm2: i64,
}

impl InnerBall {
    fn new(dim: Dim) -> Self {
        let generated_norm2 = 16;
        InnerBall {
            order: ball_points_norm2(dim, generated_norm2),
            generated_norm2,
            cursor: 0,
            norm2: -1,
        }
    }

    fn advance(&mut self, dim: Dim, index: &FxHashMap<u64, u32>) {
        loop {
            if self.cursor == self.order.len() {
                self.generated_norm2 *= 4;
                self.order = ball_points_norm2(dim, self.generated_norm2);
            }
            let p = self.order[self.cursor];
            if !index.contains_key(&p.pack(dim)) {
                break;
            }
            self.cursor += 1;
        }
        if self.cursor == 0 {
            self.norm2 = -1;
            return;
        }
        let vacant = self.order[self.cursor].norm2();
        // last complete shell is the one just below the first vacant point
        let mut i = self.cursor;
        while i > 0 && self.order[i - 1].norm2() == vacant {
            i -= 1;
        }
        self.norm2 = if i == 0 { -1 } else { self.order[i - 1].norm2() };
    }
}

impl Aggregate {
    pub fn new(dim: Dim) -> Self {
        Aggregate {
            dim,
            index: FxHashMap::default(),
            sites: Vec::new(),
            max_norm2: -1,
            inner: InnerBall::new(dim),
        }
    }

    /// Aggregate holding the given points; duplicates are dropped, first
    /// occurrence keeps its insertion slot.
    pub fn from_points<I: IntoIterator<Item = LatticePoint>>(dim: Dim, points: I) -> Result<Self> {
        let mut agg = Aggregate::new(dim);
        for p in points {
            agg.insert(p)?;
        }
        Ok(agg)
    }

    /// `B[n] = {p : |p| <= n}`, inserted in order of increasing norm.
    pub fn ball(dim: Dim, n: f64) -> Result<Self> {
        if !(n >= 0.0) || !n.is_finite() {
            return Err(Error::Config(format!("ball radius must be a finite nonnegative number, got {n}")));
        }
        Self::from_points(dim, ball_points_norm2(dim, radius_norm2_bound(n)))
    }

    #[inline]
    pub fn dim(&self) -> Dim {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    #[inline]
    pub fn contains(&self, p: &LatticePoint) -> bool {
        p.in_box(self.dim) && self.index.contains_key(&p.pack(self.dim))
    }

    /// Insertion index of `p`, if occupied.
    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        if !p.in_box(self.dim) {
            return None;
        }
        self.index.get(&p.pack(self.dim)).map(|&i| i as usize)
    }

    /// Sites in insertion order.
    #[inline]
    pub fn sites(&self) -> &[LatticePoint] {
        &self.sites
    }

    #[inline]
    pub fn site(&self, i: usize) -> LatticePoint {
        self.sites[i]
    }

    /// Adds `p`; returns `false` if it was already present.
    pub fn insert(&mut self, p: LatticePoint) -> Result<bool> {
        if !p.in_box(self.dim) {
            return Err(Error::OutOfBox {
                point: p,
                limit: self.dim.coord_limit(),
            });
        }
        if p.0[self.dim.get()..].iter().any(|&c| c != 0) {
            return Err(Error::InvalidArgument(format!("point {p} has coordinates beyond d={}", self.dim)));
        }
        let key = p.pack(self.dim);
        if self.index.contains_key(&key) {
            return Ok(false);
        }
        let idx = u32::try_from(self.sites.len()).map_err(|_| Error::Config("aggregate exceeds 2^32 sites".into()))?;
        self.index.insert(key, idx);
        self.sites.push(p);
        self.max_norm2 = self.max_norm2.max(p.norm2());
        if self.inner.order[self.inner.cursor] == p {
            self.inner.advance(self.dim, &self.index);
        }
        Ok(true)
    }

    /// Uniformly chosen insertion index.
    #[inline]
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.sites.len())
    }

    /// Squared radius of the inscribed origin-centred ball, `-1` when the
    /// origin is vacant. Every `p` with `|p|^2 <=` this value is occupied.
    #[inline]
    pub fn inner_norm2(&self) -> i64 {
        self.inner.norm2
    }

    /// Largest `r` with `B[r]` contained in the aggregate (`-1` if none).
    pub fn inradius(&self) -> f64 {
        if self.inner.norm2 < 0 {
            -1.0
        } else {
            (self.inner.norm2 as f64).sqrt()
        }
    }

    #[inline]
    pub fn max_norm2(&self) -> i64 {
        self.max_norm2
    }

    /// Largest `|p|` over occupied sites (0 for the empty aggregate).
    pub fn outradius(&self) -> f64 {
        if self.max_norm2 < 0 {
            0.0
        } else {
            (self.max_norm2 as f64).sqrt()
        }
    }

    /// Sites sorted by coordinates; a canonical form for law comparisons.
    pub fn sorted_sites(&self) -> Vec<LatticePoint> {
        let mut v = self.sites.clone();
        v.sort();
        v
    }

    /// True if every site of `self` is in `other`.
    pub fn is_subset_of(&self, other: &Aggregate) -> bool {
        self.sites.iter().all(|p| other.contains(p))
    }
}

impl PartialEq for Aggregate {
    /// Set equality, ignoring insertion order.
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.len() == other.len() && self.is_subset_of(other)
    }
}
