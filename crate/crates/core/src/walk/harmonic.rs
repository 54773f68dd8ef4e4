//! Exact first-exit distributions of simple random walk from a finite set.
//!
//! For a finite domain `A`, `h_y(x) = P_x(walk first leaves A at y)`. With
//! `G = (I - P_A)^{-1}` the Green's function of the walk killed on leaving
//! `A`, `h_y(x) = sum_{u in A, u ~ y} G(x, u) / 2d`. `I - P_A` is symmetric
//! positive definite, so a row of `G` is one conjugate-gradient solve.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::{Dim, LatticePoint};

const NONE: u32 = u32::MAX;

/// Finite domain with its outer boundary, ready for exit computations.
#[derive(Clone, Debug)]
pub struct ExitProblem {
    dim: Dim,
    interior: Vec<LatticePoint>,
    exits: Vec<LatticePoint>,
    /// `2d` entries per interior point: neighbour's interior index or `NONE`.
    nbr: Vec<u32>,
    /// `(interior index, exit index)` for every boundary edge.
    links: Vec<(u32, u32)>,
    lookup: FxHashMap<LatticePoint, u32>,
    exit_lookup: FxHashMap<LatticePoint, u32>,
}

impl ExitProblem {
    /// Builds the problem for `points` (duplicates ignored). Exit points are
    /// sorted by `(norm2, coords)`.
    pub fn new(dim: Dim, points: &[LatticePoint]) -> Result<Self> {
        let mut interior: Vec<LatticePoint> = points.to_vec();
        interior.sort_by_key(|p| (p.norm2(), *p));
        interior.dedup();
        if interior.is_empty() {
            return Err(Error::InvalidArgument("exit problem needs a nonempty domain".into()));
        }
        let lookup: FxHashMap<LatticePoint, u32> = interior.iter().enumerate().map(|(i, p)| (*p, i as u32)).collect();
        let deg = dim.degree();
        let mut exits: Vec<LatticePoint> = Vec::new();
        for p in &interior {
            for q in p.neighbors(dim) {
                if !lookup.contains_key(&q) {
                    exits.push(q);
                }
            }
        }
        exits.sort_by_key(|p| (p.norm2(), *p));
        exits.dedup();
        let exit_lookup: FxHashMap<LatticePoint, u32> = exits.iter().enumerate().map(|(i, p)| (*p, i as u32)).collect();
        let mut nbr = vec![NONE; interior.len() * deg];
        let mut links = Vec::new();
        for (i, p) in interior.iter().enumerate() {
            for dir in 0..deg {
                let q = p.neighbor(dir);
                match lookup.get(&q) {
                    Some(&j) => nbr[i * deg + dir] = j,
                    None => links.push((i as u32, exit_lookup[&q])),
                }
            }
        }
        Ok(ExitProblem {
            dim,
            interior,
            exits,
            nbr,
            links,
            lookup,
            exit_lookup,
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn interior(&self) -> &[LatticePoint] {
        &self.interior
    }

    pub fn exits(&self) -> &[LatticePoint] {
        &self.exits
    }

    pub fn interior_index(&self, p: &LatticePoint) -> Option<usize> {
        self.lookup.get(p).map(|&i| i as usize)
    }

    pub fn exit_index(&self, p: &LatticePoint) -> Option<usize> {
        self.exit_lookup.get(p).map(|&i| i as usize)
    }

    /// `(I - P_A) v`.
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let deg = self.dim.degree();
        let w = 1.0 / deg as f64;
        for i in 0..self.interior.len() {
            let mut s = 0.0;
            for &j in &self.nbr[i * deg..(i + 1) * deg] {
                if j != NONE {
                    s += v[j as usize];
                }
            }
            out[i] = v[i] - w * s;
        }
    }

    /// Solves `(I - P_A) g = rhs` by conjugate gradients to a max-norm
    /// residual below `tol`.
    pub fn solve(&self, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
        let n = self.interior.len();
        assert_eq!(rhs.len(), n);
        let mut x = vec![0.0; n];
        let mut r = rhs.to_vec();
        let mut p = r.clone();
        let mut ap = vec![0.0; n];
        let mut rr: f64 = r.iter().map(|v| v * v).sum();
        let max_iter = 20 * n as u64 + 1000;
        let mut it = 0;
        loop {
            let res = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if res < tol {
                break;
            }
            if it >= max_iter {
                return Err(Error::NoConvergence {
                    what: "conjugate gradient",
                    iterations: it,
                    residual: res,
                });
            }
            self.apply(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            let alpha = rr / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            it += 1;
            // recompute the true residual periodically to stop drift
            if it % 50 == 0 {
                self.apply(&x, &mut ap);
                for i in 0..n {
                    r[i] = rhs[i] - ap[i];
                }
            }
            let rr_new: f64 = r.iter().map(|v| v * v).sum();
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
        }
        Ok(x)
    }

    /// Pushes a Green's-function row through the boundary edges.
    fn green_to_exits(&self, g: &[f64]) -> Vec<f64> {
        let w = 1.0 / self.dim.degree() as f64;
        let mut h = vec![0.0; self.exits.len()];
        for &(i, e) in &self.links {
            h[e as usize] += w * g[i as usize];
        }
        h
    }

    /// `h_y(x)` for all exits `y`, indexed like [`exits`](Self::exits).
    /// A start outside the domain exits at once.
    pub fn exit_distribution(&self, x: &LatticePoint) -> Result<ExitDistribution> {
        match self.interior_index(x) {
            None => Ok(ExitDistribution::Immediate(*x)),
            Some(i) => {
                let mut rhs = vec![0.0; self.interior.len()];
                rhs[i] = 1.0;
                let g = self.solve(&rhs, 1e-13)?;
                Ok(ExitDistribution::Spread(self.green_to_exits(&g)))
            }
        }
    }

    /// `sum_x weights[x] h_y(x)` over interior points, e.g. the average of
    /// `h_y` over the domain when the weights are uniform.
    pub fn mixed_exit_distribution(&self, weights: &[f64]) -> Result<Vec<f64>> {
        let g = self.solve(weights, 1e-13)?;
        Ok(self.green_to_exits(&g))
    }

    /// Full table `h_y(x)` for every interior `x` (rows) and exit `y`
    /// (columns), by dense LU factorisation.
    pub fn dense_exit_table(&self) -> Result<nalgebra::DMatrix<f64>> {
        use nalgebra::DMatrix;
        let n = self.interior.len();
        let m = self.exits.len();
        let deg = self.dim.degree();
        let w = 1.0 / deg as f64;
        let mut a = DMatrix::<f64>::identity(n, n);
        for i in 0..n {
            for &j in &self.nbr[i * deg..(i + 1) * deg] {
                if j != NONE {
                    a[(i, j as usize)] -= w;
                }
            }
        }
        let mut b = DMatrix::<f64>::zeros(n, m);
        for &(i, e) in &self.links {
            b[(i as usize, e as usize)] += w;
        }
        let lu = a.clone().lu();
        let mut h = lu.solve(&b).ok_or(Error::NoConvergence {
            what: "dense exit solve (singular system)",
            iterations: 0,
            residual: f64::INFINITY,
        })?;
        // iterative refinement
        for _ in 0..3 {
            let resid = &b - &a * &h;
            let worst = resid.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if worst < 1e-13 {
                break;
            }
            if let Some(corr) = lu.solve(&resid) {
                h += corr;
            }
        }
        let resid = &b - &a * &h;
        let worst = resid.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if worst >= 1e-12 {
            return Err(Error::NoConvergence {
                what: "dense exit solve",
                iterations: 3,
                residual: worst,
            });
        }
        Ok(h)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExitDistribution {
    /// Start was outside the domain.
    Immediate(LatticePoint),
    /// Probabilities indexed like `ExitProblem::exits`.
    Spread(Vec<f64>),
}

impl ExitDistribution {
    pub fn probability(&self, problem: &ExitProblem, y: &LatticePoint) -> f64 {
        match self {
            ExitDistribution::Immediate(p) => (p == y) as u8 as f64,
            ExitDistribution::Spread(h) => problem.exit_index(y).map(|i| h[i]).unwrap_or(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Aggregate;

    fn pts(dim: Dim, r: f64) -> Vec<LatticePoint> {
        Aggregate::ball(dim, r).unwrap().sites().to_vec()
    }

    #[test]
    fn one_dimensional_gamblers_ruin() {
        // B[2] = {-2..2}; exit at +3 from x has probability (x + 3) / 6
        let dim = Dim::new(1).unwrap();
        let prob = ExitProblem::new(dim, &pts(dim, 2.0)).unwrap();
        assert_eq!(prob.exits(), &[LatticePoint::new(&[-3]), LatticePoint::new(&[3])]);
        for x in -2..=2 {
            let h = prob.exit_distribution(&LatticePoint::new(&[x])).unwrap();
            let p = h.probability(&prob, &LatticePoint::new(&[3]));
            assert!((p - (x + 3) as f64 / 6.0).abs() < 1e-13);
        }
    }

    #[test]
    fn cg_and_lu_agree() {
        for d in 1..=3 {
            let dim = Dim::new(d).unwrap();
            let prob = ExitProblem::new(dim, &pts(dim, 2.5)).unwrap();
            let table = prob.dense_exit_table().unwrap();
            for (i, x) in prob.interior().iter().enumerate() {
                let ExitDistribution::Spread(h) = prob.exit_distribution(x).unwrap() else {
                    panic!()
                };
                for (j, v) in h.iter().enumerate() {
                    assert!((v - table[(i, j)]).abs() < 1e-11);
                }
                assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn outside_start_is_immediate() {
        let dim = Dim::new(2).unwrap();
        let prob = ExitProblem::new(dim, &[LatticePoint::ORIGIN]).unwrap();
        let y = LatticePoint::new(&[4, 4]);
        assert_eq!(prob.exit_distribution(&y).unwrap(), ExitDistribution::Immediate(y));
        let ExitDistribution::Spread(h) = prob.exit_distribution(&LatticePoint::ORIGIN).unwrap() else {
            panic!()
        };
        assert_eq!(h.len(), 4);
        assert!(h.iter().all(|v| (v - 0.25).abs() < 1e-14));
    }
}
