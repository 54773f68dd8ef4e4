//! Divisible sandpile started from a point mass at the origin.

use crate::error::{Error, Result};
use crate::lattice::{Aggregate, Dim, LatticePoint};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
const MAX_SWEEPS: u64 = 10_000_000;

/// Mass and odometer on a dense cube `[-half, half]^d`.
#[derive(Clone, Debug)]
pub struct SandpileState {
    dim: Dim,
    half: i32,
    mass: Vec<f64>,
    odometer: Vec<f64>,
    initial_mass: f64,
    sweeps: u64,
}

impl SandpileState {
    fn side(&self) -> usize {
        2 * self.half as usize + 1
    }

    fn index(&self, p: &LatticePoint) -> Option<usize> {
        let side = self.side();
        let mut idx = 0;
        for &c in p.coords(self.dim).iter().rev() {
            if c.abs() > self.half {
                return None;
            }
            idx = idx * side + (c + self.half) as usize;
        }
        Some(idx)
    }

    fn point(&self, mut idx: usize) -> LatticePoint {
        let side = self.side();
        let mut c = [0i32; 4];
        for v in c.iter_mut().take(self.dim.get()) {
            *v = (idx % side) as i32 - self.half;
            idx /= side;
        }
        LatticePoint(c)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn mass_at(&self, p: &LatticePoint) -> f64 {
        self.index(p).map(|i| self.mass[i]).unwrap_or(0.0)
    }

    pub fn odometer_at(&self, p: &LatticePoint) -> f64 {
        self.index(p).map(|i| self.odometer[i]).unwrap_or(0.0)
    }

    /// Sites with positive mass, with their mass.
    pub fn iter(&self) -> impl Iterator<Item = (LatticePoint, f64)> + '_ {
        self.mass.iter().enumerate().filter(|(_, m)| **m > 0.0).map(|(i, m)| (self.point(i), *m))
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn initial_mass(&self) -> f64 {
        self.initial_mass
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    /// `sum_x m(x) h(x)`.
    pub fn quadrature<H: Fn(&LatticePoint) -> f64>(&self, h: H) -> f64 {
        self.iter().map(|(p, m)| m * h(&p)).sum()
    }

    /// Sites with `m ≥ 1 - tol`.
    pub fn full_set(&self, tol: f64) -> Result<Aggregate> {
        Aggregate::from_points(self.dim, self.iter().filter(|(_, m)| *m >= 1.0 - tol).map(|(p, _)| p))
    }

    pub fn support(&self) -> Result<Aggregate> {
        Aggregate::from_points(self.dim, self.iter().map(|(p, _)| p))
    }

    /// `(inradius of the full set, outradius of the support)`.
    pub fn support_radii(&self, tol: f64) -> Result<(f64, f64)> {
        Ok((self.full_set(tol)?.inradius(), self.support()?.outradius()))
    }
}

/// Topples mass `m_total` from the origin until every site carries at most
/// `1 + tol`. Sites are swept in place: a site with excess `e` keeps 1 and
/// passes `e / 2d` to each neighbour.
pub fn sandpile_relax(dim: Dim, m_total: f64, tol: f64) -> Result<SandpileState> {
    if !(m_total > 0.0) || !m_total.is_finite() {
        return Err(Error::InvalidArgument(format!("sandpile mass must be positive, got {m_total}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    // radius of the continuum ball of volume m_total, plus slack
    let d = dim.get() as i32;
    let unit = std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half_int(d + 2);
    let r = (m_total / unit).powf(1.0 / d as f64);
    let half = r.ceil() as i32 + 4;
    let side = 2 * half as usize + 1;
    let cells = side.pow(d as u32);
    if cells > 50_000_000 {
        return Err(Error::InvalidArgument(format!("sandpile grid of {cells} cells is too large")));
    }
    let mut st = SandpileState {
        dim,
        half,
        mass: vec![0.0; cells],
        odometer: vec![0.0; cells],
        initial_mass: m_total,
        sweeps: 0,
    };
    let origin = st.index(&LatticePoint::ORIGIN).unwrap();
    st.mass[origin] = m_total;

    let deg = dim.degree();
    let share = 1.0 / deg as f64;
    let strides: Vec<usize> = (0..d as u32).map(|k| side.pow(k)).collect();
    // active window of coordinates, grown as mass spreads
    let mut reach = 0i32;
    loop {
        let mut worst = 0.0f64;
        let lo = (half - reach).max(0) as usize;
        let hi = (half + reach).min(2 * half) as usize;
        let mut grew = false;
        let mut coord = vec![lo; d as usize];
        'sweep: loop {
            let idx: usize = coord.iter().zip(&strides).map(|(c, s)| c * s).sum();
            let excess = st.mass[idx] - 1.0;
            if excess > tol {
                if coord.iter().any(|&c| c == 0 || c == side - 1) {
                    return Err(Error::NoConvergence {
                        what: "sandpile (mass reached grid edge)",
                        iterations: st.sweeps,
                        residual: excess,
                    });
                }
                st.mass[idx] = 1.0;
                st.odometer[idx] += excess;
                for s in &strides {
                    st.mass[idx + s] += excess * share;
                    st.mass[idx - s] += excess * share;
                }
                if coord.iter().any(|&c| c == lo || c == hi) {
                    grew = true;
                }
                worst = worst.max(excess);
            }
            // odometer-style increment of the coordinate vector
            for c in coord.iter_mut() {
                if *c < hi {
                    *c += 1;
                    continue 'sweep;
                }
                *c = lo;
            }
            break;
        }
        st.sweeps += 1;
        if grew {
            reach = (reach + 1).min(half);
        }
        if worst <= tol && !grew {
            break;
        }
        if st.sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence {
                what: "sandpile",
                iterations: st.sweeps,
                residual: worst,
            });
        }
    }
    Ok(st)
}

/// `Γ(k / 2)` for positive integer `k`.
fn gamma_half_int(k: i32) -> f64 {
    if k == 1 {
        std::f64::consts::PI.sqrt()
    } else if k == 2 {
        1.0
    } else {
        (k as f64 / 2.0 - 1.0) * gamma_half_int(k - 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    #[test]
    fn unit_mass_stays_put() {
        let s = sandpile_relax(d(2), 1.0, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(s.mass_at(&LatticePoint::ORIGIN), 1.0);
        assert_eq!(s.iter().count(), 1);
        assert_eq!(s.odometer_at(&LatticePoint::ORIGIN), 0.0);
    }

    #[test]
    fn three_in_one_dimension() {
        let tol = DEFAULT_TOLERANCE;
        let s = sandpile_relax(d(1), 3.0, tol).unwrap();
        for x in -1..=1 {
            assert!((s.mass_at(&LatticePoint::new(&[x])) - 1.0).abs() < 4.0 * tol, "{x}");
        }
        assert!(s.mass_at(&LatticePoint::new(&[2])) < 4.0 * tol);
        assert!((s.total_mass() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_and_conservation() {
        for m in [10.0, 100.0, 1000.0] {
            let s = sandpile_relax(d(2), m, DEFAULT_TOLERANCE).unwrap();
            assert!((s.total_mass() - m).abs() <= 1e-9 * m);
            assert!(s.iter().all(|(_, v)| v <= 1.0 + DEFAULT_TOLERANCE));
            let hs: [fn(&LatticePoint) -> f64; 3] = [|p| p.0[0] as f64, |p| (p.0[0] * p.0[0] - p.0[1] * p.0[1]) as f64, |p| (p.0[0] * p.0[1]) as f64];
            for h in hs {
                assert!(s.quadrature(h).abs() <= 1e-6 * m);
            }
            let (rin, rout) = s.support_radii(DEFAULT_TOLERANCE).unwrap();
            assert!(rout - rin <= 4.0, "M = {m}: {rin} {rout}");
        }
    }

    #[test]
    fn odometer_is_consistent() {
        // final mass = initial mass + discrete Laplacian of the odometer
        let s = sandpile_relax(d(2), 50.0, DEFAULT_TOLERANCE).unwrap();
        for x in -6..=6 {
            for y in -6..=6 {
                let p = LatticePoint::new(&[x, y]);
                let lap: f64 = p.neighbors(d(2)).map(|q| s.odometer_at(&q)).sum::<f64>() / 4.0 - s.odometer_at(&p);
                let init = if p == LatticePoint::ORIGIN { 50.0 } else { 0.0 };
                assert!((s.mass_at(&p) - init - lap).abs() < 1e-9, "{p}");
            }
        }
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(sandpile_relax(d(2), 0.0, 1e-8).is_err());
        assert!(sandpile_relax(d(2), f64::NAN, 1e-8).is_err());
    }
}
