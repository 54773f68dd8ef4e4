//! Three-colour coupling of `A_k(F)` with the subset process on `E ⊆ F`.
//!
//! Blue particles walk until they leave the blue set, red ones until they
//! leave red ∪ blue, black ones until they leave the whole aggregate. A
//! particle landing on an occupied site takes it over and wakes the
//! occupant, which continues under its own colour's rule.

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{Aggregate, LatticePoint};
use crate::rng::Streams;
use crate::walk::{Domain, Walker};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Blue,
    Red,
    Black,
}

impl Color {
    /// Colours a walker of this colour must stay inside.
    fn region(self) -> &'static [Color] {
        match self {
            Color::Blue => &[Color::Blue],
            Color::Red => &[Color::Blue, Color::Red],
            Color::Black => &[Color::Blue, Color::Red, Color::Black],
        }
    }
}

/// The coloured aggregate; `color[i]` belongs to `agg.site(i)`.
#[derive(Clone, Debug)]
pub struct TricolorState {
    agg: Aggregate,
    color: Vec<Color>,
}

struct Region<'a> {
    state: &'a TricolorState,
    colors: &'static [Color],
}

impl Domain for Region<'_> {
    fn contains(&self, p: &LatticePoint) -> bool {
        self.state.color_of(p).is_some_and(|c| self.colors.contains(&c))
    }
}

impl TricolorState {
    /// `E` blue, `F \ E` red.
    pub fn new(e: &Aggregate, f: &Aggregate) -> Result<Self> {
        if e.dim() != f.dim() {
            return Err(Error::InvalidArgument("E and F differ in dimension".into()));
        }
        if !e.is_subset_of(f) {
            return Err(Error::InvalidArgument("tricolor coupling needs E ⊆ F".into()));
        }
        let color = f.sites().iter().map(|p| if e.contains(p) { Color::Blue } else { Color::Red }).collect();
        Ok(TricolorState { agg: f.clone(), color })
    }

    pub fn aggregate(&self) -> &Aggregate {
        &self.agg
    }

    pub fn color_of(&self, p: &LatticePoint) -> Option<Color> {
        self.agg.index_of(p).map(|i| self.color[i])
    }

    pub fn count(&self, c: Color) -> usize {
        self.color.iter().filter(|&&x| x == c).count()
    }

    /// Sites whose colour is one of `colors`.
    pub fn colored(&self, colors: &[Color]) -> Result<Aggregate> {
        let pts = self.agg.sites().iter().zip(&self.color).filter(|(_, c)| colors.contains(c)).map(|(p, _)| *p);
        Aggregate::from_points(self.agg.dim(), pts)
    }

    /// Adds one particle started uniformly on the aggregate, running any
    /// wake-up chain to completion. Returns the new site.
    pub fn add_particle<R: Rng + ?Sized>(&mut self, walker: &Walker, rng: &mut R) -> Result<LatticePoint> {
        let i = self.agg.sample_index(rng);
        let mut pos = self.agg.site(i);
        let mut walking = match self.color[i] {
            Color::Blue => Color::Blue,
            _ => Color::Black,
        };
        // each hop moves to a strictly larger region, so at most 3 hops
        for _ in 0..3 {
            let region = Region {
                state: self,
                colors: walking.region(),
            };
            let site = if walking == Color::Black {
                walker.walk_until_exit(pos, &self.agg, rng)?.exit
            } else {
                walker.walk_until_exit(pos, &region, rng)?.exit
            };
            match self.agg.index_of(&site) {
                None => {
                    self.agg.insert(site)?;
                    self.color.push(walking);
                    return Ok(site);
                }
                Some(j) => {
                    std::mem::swap(&mut self.color[j], &mut walking);
                    pos = site;
                }
            }
        }
        Err(Error::CouplingViolation("wake-up chain did not terminate".into()))
    }
}

#[derive(Clone, Debug)]
pub struct TricolorOutcome {
    pub state: TricolorState,
    pub blue: Aggregate,
    pub red_blue: Aggregate,
}

pub fn tricolor_run(e: &Aggregate, f: &Aggregate, k: u64, streams: &Streams, walker: &Walker) -> Result<TricolorOutcome> {
    let mut state = TricolorState::new(e, f)?;
    for j in 0..k {
        state.add_particle(walker, &mut streams.particle(j))?;
    }
    let blue = state.colored(&[Color::Blue])?;
    let red_blue = state.colored(&[Color::Blue, Color::Red])?;
    Ok(TricolorOutcome { state, blue, red_blue })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Dim;
    use std::collections::HashMap;

    fn d1() -> Dim {
        Dim::new(1).unwrap()
    }

    fn set(xs: &[i32]) -> Aggregate {
        Aggregate::from_points(d1(), xs.iter().map(|&x| LatticePoint::new(&[x]))).unwrap()
    }

    #[test]
    fn zero_steps_is_initial_coloring() {
        let out = tricolor_run(&set(&[0]), &set(&[-1, 0]), 0, &Streams::new(0, 0), &Walker::plain(d1())).unwrap();
        assert_eq!(out.blue, set(&[0]));
        assert_eq!(out.red_blue, set(&[-1, 0]));
        assert_eq!(out.state.count(Color::Black), 0);
    }

    #[test]
    fn equal_sets_stay_blue() {
        let dim = Dim::new(2).unwrap();
        let e = Aggregate::ball(dim, 2.0).unwrap();
        let out = tricolor_run(&e, &e, 200, &Streams::new(1, 0), &Walker::new(dim, true).unwrap()).unwrap();
        assert_eq!(out.state.count(Color::Blue), e.len() + 200);
        assert_eq!(out.blue, *out.state.aggregate());
    }

    #[test]
    fn colors_partition_the_aggregate() {
        let dim = Dim::new(2).unwrap();
        let e = Aggregate::ball(dim, 2.0).unwrap();
        let f = Aggregate::ball(dim, 4.0).unwrap();
        let out = tricolor_run(&e, &f, 300, &Streams::new(2, 0), &Walker::new(dim, true).unwrap()).unwrap();
        let st = &out.state;
        assert_eq!(st.count(Color::Blue) + st.count(Color::Red) + st.count(Color::Black), st.aggregate().len());
        assert_eq!(st.aggregate().len(), f.len() + 300);
        assert!(out.blue.is_subset_of(&out.red_blue));
        assert!(e.is_subset_of(&out.blue));
    }

    #[test]
    fn rejects_non_subset() {
        assert!(TricolorState::new(&set(&[5]), &set(&[0])).is_err());
    }

    #[test]
    fn one_dimensional_exact_law() {
        // blue: {0} 1/2, {0,1} 1/4, {-1,0} 1/4
        // red ∪ blue: {-1,0} 1/2, {-1,0,1} 1/3, {-2,-1,0} 1/6
        let n = 100_000u32;
        let w = Walker::plain(d1());
        let mut blue: HashMap<Vec<LatticePoint>, u64> = HashMap::new();
        let mut rb: HashMap<Vec<LatticePoint>, u64> = HashMap::new();
        for r in 0..n {
            let out = tricolor_run(&set(&[0]), &set(&[-1, 0]), 1, &Streams::new(3, r), &w).unwrap();
            *blue.entry(out.blue.sorted_sites()).or_default() += 1;
            *rb.entry(out.red_blue.sorted_sites()).or_default() += 1;
        }
        let check = |counts: &HashMap<Vec<LatticePoint>, u64>, s: &[i32], p: f64| {
            let f = counts.get(&set(s).sorted_sites()).copied().unwrap_or(0) as f64;
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((f - n as f64 * p).abs() < 4.0 * sd, "{s:?}: {f}");
        };
        check(&blue, &[0], 0.5);
        check(&blue, &[0, 1], 0.25);
        check(&blue, &[-1, 0], 0.25);
        check(&rb, &[-1, 0], 0.5);
        check(&rb, &[-1, 0, 1], 1.0 / 3.0);
        check(&rb, &[-2, -1, 0], 1.0 / 6.0);
    }
}
