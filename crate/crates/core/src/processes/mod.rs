//! Growth processes built on the one-particle `Add` update: standard IDLA
//! from arbitrary start multisets, uIDLA, subset uIDLA, the Richardson
//! model, and the midpoint view of one-dimensional uIDLA.

mod richardson;

pub use richardson::{boundary_weights, richardson, RichardsonRun};

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::genealogy::GenealogyForest;
use crate::lattice::{Aggregate, Dim, LatticePoint};
use crate::rng::{Purpose, Streams};
use crate::walk::Walker;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProcessKind {
    Idla,
    Uidla,
    Subset,
    Richardson,
}

impl ProcessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProcessKind::Idla => "idla",
            ProcessKind::Uidla => "uidla",
            ProcessKind::Subset => "subset",
            ProcessKind::Richardson => "richardson",
        }
    }
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProcessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "idla" => Ok(ProcessKind::Idla),
            "uidla" => Ok(ProcessKind::Uidla),
            "subset" => Ok(ProcessKind::Subset),
            "richardson" => Ok(ProcessKind::Richardson),
            other => Err(Error::Config(format!("unknown process {other:?} (idla|uidla|subset|richardson)"))),
        }
    }
}

/// Starting points of an IDLA run; repetitions allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultisetOfStarts(pub Vec<LatticePoint>);

impl MultisetOfStarts {
    /// `k` copies of the origin.
    pub fn origin(k: usize) -> Self {
        MultisetOfStarts(vec![LatticePoint::ORIGIN; k])
    }

    pub fn reversed(&self) -> Self {
        MultisetOfStarts(self.0.iter().rev().copied().collect())
    }
}

/// `S ∪ {ξ(t_S)}` for a walk from `start`; a start outside `S` is added as is.
/// Returns the new site.
pub fn add_particle<R: Rng + ?Sized>(s: &mut Aggregate, start: LatticePoint, walker: &Walker, rng: &mut R) -> Result<LatticePoint> {
    let exit = walker.walk_until_exit(start, s, rng)?.exit;
    if !s.insert(exit)? {
        return Err(Error::CouplingViolation(format!("walk exit {exit} was already occupied")));
    }
    Ok(exit)
}

/// `DA_X(S0)`: particles launched from `starts` in the given order.
/// Particle `k` uses walk stream `k`.
pub fn idla(s0: Aggregate, starts: &MultisetOfStarts, streams: &Streams, walker: &Walker) -> Result<Aggregate> {
    let mut agg = s0;
    for (k, &x) in starts.0.iter().enumerate() {
        add_particle(&mut agg, x, walker, &mut streams.particle(k as u64))?;
    }
    Ok(agg)
}

/// Incremental uIDLA run with its genealogical forest.
#[derive(Clone, Debug)]
pub struct UidlaRun {
    agg: Aggregate,
    forest: GenealogyForest,
    added: u64,
}

impl UidlaRun {
    pub fn new(s0: Aggregate) -> Result<Self> {
        if s0.is_empty() {
            return Err(Error::EmptyAggregate);
        }
        let forest = GenealogyForest::with_roots(s0.len());
        Ok(UidlaRun { agg: s0, forest, added: 0 })
    }

    /// `A_1 = {0}`.
    pub fn from_origin(dim: Dim) -> Result<Self> {
        Self::new(Aggregate::from_points(dim, [LatticePoint::ORIGIN])?)
    }

    /// Adds one particle started uniformly on the current aggregate.
    pub fn step(&mut self, streams: &Streams, walker: &Walker) -> Result<LatticePoint> {
        let mut rng = streams.particle(self.added);
        let start_idx = self.agg.sample_index(&mut rng);
        let start = self.agg.site(start_idx);
        let site = add_particle(&mut self.agg, start, walker, &mut rng)?;
        let child = self.forest.push_child(start_idx);
        debug_assert_eq!(child + 1, self.agg.len());
        self.added += 1;
        Ok(site)
    }

    pub fn aggregate(&self) -> &Aggregate {
        &self.agg
    }

    pub fn forest(&self) -> &GenealogyForest {
        &self.forest
    }

    pub fn added(&self) -> u64 {
        self.added
    }

    pub fn into_parts(self) -> (Aggregate, GenealogyForest) {
        (self.agg, self.forest)
    }
}

/// `A_k(S0)` and its genealogical forest.
pub fn uidla(s0: Aggregate, k: u64, streams: &Streams, walker: &Walker) -> Result<(Aggregate, GenealogyForest)> {
    let mut run = UidlaRun::new(s0)?;
    for _ in 0..k {
        run.step(streams, walker)?;
    }
    Ok(run.into_parts())
}

/// Subset uIDLA `A_n(E; m)`: at tick `n` a particle started uniformly on
/// `E_n` is added with probability `|E_n| / (m + n)`, otherwise nothing
/// happens. Acceptance coins come from their own streams.
#[derive(Clone, Debug)]
pub struct SubsetProcess {
    e: Aggregate,
    host_size: u64,
    tick: u64,
}

impl SubsetProcess {
    pub fn new(e: Aggregate, host_size: u64) -> Result<Self> {
        if e.is_empty() {
            return Err(Error::EmptyAggregate);
        }
        if host_size < e.len() as u64 {
            return Err(Error::InvalidArgument(format!("host size {host_size} is smaller than |E| = {}", e.len())));
        }
        Ok(SubsetProcess { e, host_size, tick: 0 })
    }

    /// Acceptance probability at the current tick as `(|E_n|, m + n)`.
    pub fn acceptance_ratio(&self) -> (u64, u64) {
        (self.e.len() as u64, self.host_size + self.tick)
    }

    pub fn acceptance_probability(&self) -> f64 {
        let (num, den) = self.acceptance_ratio();
        num as f64 / den as f64
    }

    /// One tick; returns the new site if a particle was added.
    pub fn tick(&mut self, streams: &Streams, walker: &Walker) -> Result<Option<LatticePoint>> {
        let (num, den) = self.acceptance_ratio();
        let mut coin = streams.aux(Purpose::Acceptance, self.tick);
        let accept = coin.random_range(0..den) < num;
        let out = if accept {
            let mut rng = streams.particle(self.tick);
            let start = self.e.site(self.e.sample_index(&mut rng));
            Some(add_particle(&mut self.e, start, walker, &mut rng)?)
        } else {
            None
        };
        self.tick += 1;
        Ok(out)
    }

    pub fn ticks(&self) -> u64 {
        self.tick
    }

    pub fn aggregate(&self) -> &Aggregate {
        &self.e
    }

    pub fn into_aggregate(self) -> Aggregate {
        self.e
    }
}

pub fn subset_uidla(e: Aggregate, m: u64, k_ticks: u64, streams: &Streams, walker: &Walker) -> Result<Aggregate> {
    let mut proc = SubsetProcess::new(e, m)?;
    for _ in 0..k_ticks {
        proc.tick(streams, walker)?;
    }
    Ok(proc.into_aggregate())
}

/// Midpoints `M_0, ..., M_k` of one-dimensional uIDLA started from `{0}`,
/// stored doubled so that half-integers stay exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiddlePointTrace {
    doubled: Vec<i64>,
}

impl MiddlePointTrace {
    /// `2 M_j` for each recorded step.
    pub fn doubled(&self) -> &[i64] {
        &self.doubled
    }

    pub fn midpoint(&self, j: usize) -> f64 {
        self.doubled[j] as f64 / 2.0
    }

    pub fn len(&self) -> usize {
        self.doubled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doubled.is_empty()
    }

    /// Increments `M_{j+1} - M_j`, each `±1/2`.
    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.doubled.windows(2).map(|w| (w[1] - w[0]) as f64 / 2.0)
    }
}

pub fn uidla_1d_middle(k: u64, streams: &Streams, walker: &Walker) -> Result<MiddlePointTrace> {
    if walker.dim().get() != 1 {
        return Err(Error::InvalidArgument("midpoint trace needs d = 1".into()));
    }
    let mut run = UidlaRun::from_origin(walker.dim())?;
    let (mut lo, mut hi) = (0i64, 0i64);
    let mut doubled = Vec::with_capacity(k as usize + 1);
    doubled.push(0);
    for _ in 0..k {
        let x = run.step(streams, walker)?.0[0] as i64;
        if x < lo {
            lo = x;
        } else if x > hi {
            hi = x;
        } else {
            return Err(Error::CouplingViolation(format!("1-d aggregate grew inside its interval at {x}")));
        }
        doubled.push(lo + hi);
    }
    Ok(MiddlePointTrace { doubled })
}

/// What to grow and for how long.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrowthSpec {
    pub kind: ProcessKind,
    /// Final site count for `idla`, `uidla` and `richardson`; tick count
    /// for `subset`.
    pub particles: u64,
    /// Host size `m` for `subset` (with `E = {0}`).
    pub host_size: u64,
}

/// Grows one replica from the origin, calling `on_step(step, aggregate)`
/// after every particle (or tick). The forest is returned for uIDLA only.
pub fn grow<F>(spec: &GrowthSpec, dim: Dim, streams: &Streams, walker: &Walker, mut on_step: F) -> Result<(Aggregate, Option<GenealogyForest>)>
where
    F: FnMut(u64, &Aggregate) -> Result<()>,
{
    let origin = || Aggregate::from_points(dim, [LatticePoint::ORIGIN]);
    match spec.kind {
        ProcessKind::Idla => {
            let mut agg = Aggregate::new(dim);
            for k in 0..spec.particles {
                add_particle(&mut agg, LatticePoint::ORIGIN, walker, &mut streams.particle(k))?;
                on_step(k + 1, &agg)?;
            }
            Ok((agg, None))
        }
        ProcessKind::Uidla => {
            let mut run = UidlaRun::from_origin(dim)?;
            on_step(1, run.aggregate())?;
            while (run.aggregate().len() as u64) < spec.particles {
                run.step(streams, walker)?;
                on_step(run.aggregate().len() as u64, run.aggregate())?;
            }
            let (agg, forest) = run.into_parts();
            Ok((agg, Some(forest)))
        }
        ProcessKind::Richardson => {
            let mut run = RichardsonRun::new(origin()?, streams)?;
            on_step(1, run.aggregate())?;
            while (run.aggregate().len() as u64) < spec.particles {
                run.step()?;
                on_step(run.aggregate().len() as u64, run.aggregate())?;
            }
            Ok((run.into_aggregate(), None))
        }
        ProcessKind::Subset => {
            let mut proc = SubsetProcess::new(origin()?, spec.host_size.max(1))?;
            for k in 0..spec.particles {
                proc.tick(streams, walker)?;
                on_step(k + 1, proc.aggregate())?;
            }
            Ok((proc.into_aggregate(), None))
        }
    }
}
