use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Exp;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum YuleStop {
    /// Run until this time.
    Time(f64),
    /// Run until the tree has this many vertices.
    Size(usize),
}

/// Continuous-time random recursive tree: each vertex gains a child at rate 1.
#[derive(Clone, Debug, PartialEq)]
pub struct YuleTree {
    birth_times: Vec<f64>,
    parent: Vec<Option<u32>>,
    depth: Vec<u32>,
    end_time: f64,
}

impl YuleTree {
    pub fn len(&self) -> usize {
        self.birth_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.birth_times.is_empty()
    }

    pub fn birth_times(&self) -> &[f64] {
        &self.birth_times
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v].map(|p| p as usize)
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn end_time(&self) -> f64 {
        self.end_time
    }

    /// `X_t(k)` for `k = 0..`: vertices born by time `t` at depth `k`.
    pub fn level_counts(&self, t: f64) -> Vec<u64> {
        let mut counts = vec![0u64; 1];
        for (b, &d) in self.birth_times.iter().zip(&self.depth) {
            if *b > t {
                // birth times are increasing
                break;
            }
            let d = d as usize;
            if counts.len() <= d {
                counts.resize(d + 1, 0);
            }
            counts[d] += 1;
        }
        counts
    }

    pub fn size_at(&self, t: f64) -> usize {
        self.birth_times.partition_point(|&b| b <= t)
    }
}

/// Grows a Yule tree from one root by exact event-driven simulation: with
/// `n` vertices the next birth comes after an `Exp(n)` wait, at a uniformly
/// chosen parent.
pub fn grow_yule<R: Rng + ?Sized>(stop: YuleStop, rng: &mut R) -> Result<YuleTree> {
    match stop {
        YuleStop::Time(t) if !(t >= 0.0) || !t.is_finite() => return Err(Error::InvalidArgument(format!("stopping time must be finite and >= 0, got {t}"))),
        YuleStop::Size(0) => return Err(Error::InvalidArgument("target size must be >= 1".into())),
        _ => {}
    }
    let mut tree = YuleTree {
        birth_times: vec![0.0],
        parent: vec![None],
        depth: vec![0],
        end_time: 0.0,
    };
    let mut now = 0.0;
    loop {
        if let YuleStop::Size(n) = stop {
            if tree.len() >= n {
                tree.end_time = now;
                return Ok(tree);
            }
        }
        let n = tree.len();
        let wait = Exp::new(n as f64).expect("positive rate").sample(rng);
        if let YuleStop::Time(t) = stop {
            if now + wait > t {
                tree.end_time = t;
                return Ok(tree);
            }
        }
        now += wait;
        let p = rng.random_range(0..n);
        tree.birth_times.push(now);
        tree.parent.push(Some(p as u32));
        tree.depth.push(tree.depth[p] + 1);
    }
}
