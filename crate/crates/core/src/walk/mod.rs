//! Simple random walk engine.
//!
//! [`Walker::walk_until_exit`] returns the first position outside a domain.
//! With acceleration on, a walk sitting well inside the domain's inscribed
//! ball jumps straight to the exit point of the largest kernel ball that
//! fits, which has the same law as stepping through it.

mod harmonic;
mod kernel;

pub use harmonic::{ExitDistribution, ExitProblem};
pub use kernel::{auto_kernel_radius, default_kernel_radius, ExitKernel, KernelSet, MAX_KERNEL_RADIUS};

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{Aggregate, Dim, LatticePoint};

/// Default cap on elementary steps per walk.
pub const DEFAULT_STEP_LIMIT: u64 = 10_000_000_000;

/// A region a walk is confined to until it first leaves.
pub trait Domain {
    fn contains(&self, p: &LatticePoint) -> bool;

    /// Squared radius of an origin-centred ball known to lie inside the
    /// domain, or a negative value if none is known.
    fn inner_norm2(&self) -> i64 {
        -1
    }
}

impl Domain for Aggregate {
    #[inline]
    fn contains(&self, p: &LatticePoint) -> bool {
        Aggregate::contains(self, p)
    }

    #[inline]
    fn inner_norm2(&self) -> i64 {
        Aggregate::inner_norm2(self)
    }
}

impl<D: Domain + ?Sized> Domain for &D {
    fn contains(&self, p: &LatticePoint) -> bool {
        (**self).contains(p)
    }

    fn inner_norm2(&self) -> i64 {
        (**self).inner_norm2()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkState {
    pub position: LatticePoint,
    pub step_count: u64,
    /// Set once a kernel jump has been counted as a single macro-step.
    pub approximate: bool,
}

impl WalkState {
    pub fn at(position: LatticePoint) -> Self {
        WalkState {
            position,
            step_count: 0,
            approximate: false,
        }
    }
}

/// One nearest-neighbour step, each of the `2d` directions with probability `1/2d`.
#[inline]
pub fn srw_step<R: Rng + ?Sized>(state: &mut WalkState, dim: Dim, rng: &mut R) {
    let dir = rng.random_range(0..dim.degree());
    state.position = state.position.neighbor(dir);
    state.step_count += 1;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkOutcome {
    pub exit: LatticePoint,
    pub steps: u64,
    pub approximate: bool,
}

/// Walk configuration shared by every particle of a run.
#[derive(Clone, Debug)]
pub struct Walker {
    dim: Dim,
    kernels: Option<Arc<KernelSet>>,
    step_accounting: bool,
    step_limit: u64,
}

impl Walker {
    /// Step-by-step walker.
    pub fn plain(dim: Dim) -> Self {
        Walker {
            dim,
            kernels: None,
            step_accounting: false,
            step_limit: DEFAULT_STEP_LIMIT,
        }
    }

    /// Walker with kernels of radius `1..=max_radius`.
    pub fn accelerated(dim: Dim, max_radius: u32) -> Result<Self> {
        Ok(Self::with_kernels(dim, Arc::new(KernelSet::build(dim, max_radius)?)))
    }

    pub fn with_kernels(dim: Dim, kernels: Arc<KernelSet>) -> Self {
        Walker {
            dim,
            kernels: Some(kernels),
            step_accounting: false,
            step_limit: DEFAULT_STEP_LIMIT,
        }
    }

    /// `accel = false` gives [`plain`](Self::plain); otherwise the default kernel radius.
    pub fn new(dim: Dim, accel: bool) -> Result<Self> {
        if accel {
            Self::accelerated(dim, default_kernel_radius(dim))
        } else {
            Ok(Self::plain(dim))
        }
    }

    /// In step-accounting mode every step is elementary, so `steps` is exact;
    /// kernel jumps are disabled.
    pub fn step_accounting(mut self, on: bool) -> Self {
        self.step_accounting = on;
        self
    }

    pub fn step_limit(mut self, limit: u64) -> Self {
        self.step_limit = limit;
        self
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn is_accelerated(&self) -> bool {
        self.kernels.is_some() && !self.step_accounting
    }

    /// Runs a walk from `start` until its first position outside `domain`.
    /// A start outside the domain is returned immediately.
    #[inline]
    pub fn walk_until_exit<D, R>(&self, start: LatticePoint, domain: &D, rng: &mut R) -> Result<WalkOutcome>
    where
        D: Domain + ?Sized,
        R: Rng + ?Sized,
    {
        self.walk_until_exit_observed(start, domain, rng, |_| {})
    }

    /// [`walk_until_exit`](Self::walk_until_exit) reporting every position
    /// after each step or jump, the exit included. Positions skipped inside a
    /// kernel jump all lie in the domain's inscribed ball.
    pub fn walk_until_exit_observed<D, R, F>(&self, start: LatticePoint, domain: &D, rng: &mut R, mut observe: F) -> Result<WalkOutcome>
    where
        D: Domain + ?Sized,
        R: Rng + ?Sized,
        F: FnMut(&LatticePoint),
    {
        let dim = self.dim;
        let inner = domain.inner_norm2();
        let kernels = if self.step_accounting { None } else { self.kernels.as_deref() };
        // thresholds[r - 1]: largest |pos|^2 at which B_pos[r] fits inside the inscribed ball
        let mut thresholds = [i64::MIN; MAX_KERNEL_RADIUS as usize];
        let mut max_r = 0usize;
        if let Some(ks) = kernels {
            if inner >= 1 {
                let s = (inner as f64).sqrt();
                for r in 1..=ks.max_radius() as usize {
                    let t = s - r as f64;
                    if t < 0.0 {
                        break;
                    }
                    thresholds[r - 1] = (t * t - 1e-6).floor() as i64;
                    max_r = r;
                }
            }
        }
        let lim = dim.coord_limit();
        let mut state = WalkState::at(start);
        loop {
            observe(&state.position);
            let q = state.position.norm2();
            if q > inner && !domain.contains(&state.position) {
                return Ok(WalkOutcome {
                    exit: state.position,
                    steps: state.step_count,
                    approximate: state.approximate,
                });
            }
            if state.step_count >= self.step_limit {
                return Err(Error::StepLimit { start, limit: self.step_limit });
            }
            let mut jumped = false;
            if max_r > 0 && q <= thresholds[0] {
                let ks = kernels.unwrap();
                let mut r = max_r;
                while q > thresholds[r - 1] {
                    r -= 1;
                }
                let off = ks.get(r as u32).sample_center(rng);
                state.position = state.position.add(&off);
                state.step_count += 1;
                state.approximate = true;
                jumped = true;
            }
            if !jumped {
                srw_step(&mut state, dim, rng);
                let c = state.position.coords(dim);
                if c.iter().any(|&v| v <= -lim || v >= lim) {
                    return Err(Error::OutOfBox {
                        point: state.position,
                        limit: lim,
                    });
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn d(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    #[test]
    fn srw_step_directions_uniform() {
        let dim = d(2);
        let mut rng = RngStream::new(3, 0);
        let n = 1_000_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n {
            let mut s = WalkState::at(LatticePoint::ORIGIN);
            srw_step(&mut s, dim, &mut rng);
            assert_eq!(s.step_count, 1);
            assert_eq!(s.position.norm2(), 1);
            *counts.entry(s.position).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 4);
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for (p, c) in counts {
            assert!((c as f64 - 0.25 * n as f64).abs() < 4.0 * sigma, "{p}: {c}");
        }
    }

    #[test]
    fn srw_step_one_dimension() {
        let mut rng = RngStream::new(3, 1);
        let mut plus = 0;
        for _ in 0..10_000 {
            let mut s = WalkState::at(LatticePoint::ORIGIN);
            srw_step(&mut s, d(1), &mut rng);
            assert_eq!(s.position.norm2(), 1);
            plus += (s.position.0[0] == 1) as u32;
        }
        assert!((plus as f64 - 5000.0).abs() < 4.0 * 50.0);
    }

    #[test]
    fn empty_domain_exits_at_start() {
        let agg = Aggregate::new(d(2));
        let w = Walker::plain(d(2));
        let out = w.walk_until_exit(LatticePoint::ORIGIN, &agg, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(out.exit, LatticePoint::ORIGIN);
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn one_dimensional_exits() {
        let dim = d(1);
        let single = Aggregate::ball(dim, 0.0).unwrap();
        let triple = Aggregate::ball(dim, 1.0).unwrap();
        for accel in [false, true] {
            let w = Walker::new(dim, accel).unwrap();
            let mut rng = RngStream::new(11, accel as u64);
            let (mut a, mut b) = (0, 0);
            for _ in 0..10_000 {
                let e = w.walk_until_exit(LatticePoint::ORIGIN, &single, &mut rng).unwrap().exit;
                assert_eq!(e.norm2(), 1);
                a += (e.0[0] > 0) as u32;
                let e = w.walk_until_exit(LatticePoint::ORIGIN, &triple, &mut rng).unwrap().exit;
                assert_eq!(e.norm2(), 4);
                b += (e.0[0] > 0) as u32;
            }
            assert!((a as f64 - 5000.0).abs() < 200.0);
            assert!((b as f64 - 5000.0).abs() < 200.0);
        }
    }

    #[test]
    fn step_limit_aborts() {
        let dim = d(2);
        let agg = Aggregate::ball(dim, 30.0).unwrap();
        let w = Walker::plain(dim).step_limit(10);
        let err = w.walk_until_exit(LatticePoint::ORIGIN, &agg, &mut RngStream::new(0, 0)).unwrap_err();
        assert!(matches!(err, Error::StepLimit { limit: 10, .. }));
    }

    #[test]
    fn accounting_mode_counts_exact_steps() {
        let dim = d(2);
        let agg = Aggregate::ball(dim, 10.0).unwrap();
        let accel = Walker::new(dim, true).unwrap();
        let exact = accel.clone().step_accounting(true);
        assert!(!exact.is_accelerated());
        let mut rng = RngStream::new(5, 0);
        let mut total = 0u64;
        let n = 4000;
        for _ in 0..n {
            let o = exact.walk_until_exit(LatticePoint::ORIGIN, &agg, &mut rng).unwrap();
            assert!(!o.approximate);
            total += o.steps;
        }
        // E[tau] = E|exit|^2 - 0, roughly 10.4^2 for B[10]
        let mean = total as f64 / n as f64;
        assert!(mean > 90.0 && mean < 130.0, "{mean}");
        let o = accel.walk_until_exit(LatticePoint::ORIGIN, &agg, &mut rng).unwrap();
        assert!(o.approximate);
        assert!(o.steps < 100);
    }
}
