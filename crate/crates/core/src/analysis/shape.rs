use std::io::Write;

use crate::error::{Error, Result};
use crate::lattice::{ball_points_norm2, ball_volume_norm2, volume_equivalent_norm2, Aggregate};
use crate::stats::fmt_sig9;

/// Occupancy of the unit shell `j <= |x| < j + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShellOccupancy {
    pub shell: u32,
    pub occupied: u64,
    pub lattice_points: u64,
}

/// Comparison of an aggregate against the ball of equal lattice volume.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeReport {
    pub n_sites: u64,
    /// Squared radius `k` of the smallest centred ball with at least
    /// `n_sites` lattice points.
    pub ball_norm2: i64,
    pub ball_radius_equiv: f64,
    pub ball_sites: u64,
    pub inradius: f64,
    pub outradius: f64,
    pub intersection: u64,
    pub symdiff_count: u64,
    pub shells: Vec<ShellOccupancy>,
}

pub fn shape_report(a: &Aggregate) -> Result<ShapeReport> {
    if a.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let dim = a.dim();
    let n_sites = a.len() as u64;
    let k = volume_equivalent_norm2(dim, n_sites)?;
    let ball_sites = ball_volume_norm2(dim, k)?;
    let intersection = a.sites().iter().filter(|p| p.norm2() <= k).count() as u64;
    let symdiff_count = n_sites + ball_sites - 2 * intersection;

    // direct count as a cross-check of the identity above
    let ball = ball_points_norm2(dim, k);
    let missing = ball.iter().filter(|p| !a.contains(p)).count() as u64;
    let extra = a.sites().iter().filter(|p| p.norm2() > k).count() as u64;
    if missing + extra != symdiff_count {
        return Err(Error::InvalidArgument(format!(
            "symmetric difference mismatch: {} + {} != {}",
            missing, extra, symdiff_count
        )));
    }

    let max_shell = a.outradius().floor() as u32;
    let mut shells: Vec<ShellOccupancy> = (0..=max_shell)
        .map(|j| ShellOccupancy {
            shell: j,
            occupied: 0,
            lattice_points: 0,
        })
        .collect();
    for p in a.sites() {
        shells[p.norm().floor() as usize].occupied += 1;
    }
    let mut below = 0;
    for (j, s) in shells.iter_mut().enumerate() {
        let upto = ball_volume_norm2(dim, ((j as i64) + 1).pow(2) - 1)?;
        s.lattice_points = upto - below;
        below = upto;
    }
    Ok(ShapeReport {
        n_sites,
        ball_norm2: k,
        ball_radius_equiv: (k as f64).sqrt(),
        ball_sites,
        inradius: a.inradius(),
        outradius: a.outradius(),
        intersection,
        symdiff_count,
        shells,
    })
}

impl ShapeReport {
    pub const CSV_HEADER: &'static str = "n_sites,ball_radius_equiv,ball_sites,inradius,outradius,symdiff_count";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.n_sites,
            fmt_sig9(self.ball_radius_equiv),
            self.ball_sites,
            fmt_sig9(self.inradius),
            fmt_sig9(self.outradius),
            self.symdiff_count
        )
    }

    /// Shell table: `shell,occupied,lattice_points,fraction`.
    pub fn write_shells<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "shell,occupied,lattice_points,fraction")?;
        for s in &self.shells {
            let frac = s.occupied as f64 / s.lattice_points.max(1) as f64;
            writeln!(out, "{},{},{},{}", s.shell, s.occupied, s.lattice_points, fmt_sig9(frac))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Dim, LatticePoint};

    fn d2() -> Dim {
        Dim::new(2).unwrap()
    }

    #[test]
    fn ball_has_no_symdiff() {
        let a = Aggregate::ball(d2(), 5.0).unwrap();
        let r = shape_report(&a).unwrap();
        assert_eq!(r.n_sites, 81);
        assert_eq!(r.symdiff_count, 0);
        assert_eq!(r.inradius, 5.0);
        assert_eq!(r.outradius, 5.0);
        assert_eq!(r.ball_radius_equiv, 5.0);
        assert_eq!(r.shells.iter().map(|s| s.occupied).sum::<u64>(), 81);
        // shells 0..=4 lie inside B[5]; shell 5 only meets it on |x| = 5
        assert!(r.shells[..5].iter().all(|s| s.occupied == s.lattice_points));
        assert_eq!(r.shells[5].occupied, 12);
    }

    #[test]
    fn one_extra_site() {
        let mut a = Aggregate::ball(d2(), 5.0).unwrap();
        a.insert(LatticePoint::new(&[6, 0])).unwrap();
        let r = shape_report(&a).unwrap();
        // 82 sites: the equal-volume ball is B[sqrt(26)] with 89 points
        assert_eq!(r.ball_norm2, 26);
        assert_eq!(r.ball_sites, 89);
        assert_eq!(r.intersection, 81);
        assert_eq!(r.symdiff_count, 1 + 8);
        assert_eq!(r.outradius, 6.0);
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(shape_report(&Aggregate::new(d2())), Err(Error::EmptyAggregate)));
    }
}
