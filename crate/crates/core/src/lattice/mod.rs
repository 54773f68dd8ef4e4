//! Geometry of `Z^d` for `1 <= d <= 4`: points, Euclidean balls and the
//! occupied-set container every growth process writes into.

mod aggregate;
mod snapshot;

pub use aggregate::Aggregate;
pub use snapshot::{read_snapshot, write_snapshot};

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 4;

/// Lattice dimension, validated to `1..=4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dim(u8);

impl Dim {
    pub fn new(d: usize) -> Result<Self> {
        if (1..=MAX_DIM).contains(&d) {
            Ok(Dim(d as u8))
        } else {
            Err(Error::Config(format!("dimension must be in 1..={MAX_DIM}, got {d}")))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Number of nearest neighbours, `2d`.
    #[inline]
    pub fn degree(self) -> usize {
        2 * self.get()
    }

    /// Coordinates must satisfy `|c| < coord_limit()`. Packing uses 21 bits
    /// per axis up to d = 3 and 16 bits in d = 4, so keys fit in a `u64`.
    #[inline]
    pub fn coord_limit(self) -> i32 {
        1 << (self.axis_bits() - 1)
    }

    #[inline]
    fn axis_bits(self) -> u32 {
        if self.0 <= 3 {
            21
        } else {
            16
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point of `Z^d`. Axes beyond the context dimension are always zero, so
/// norms and equality need no dimension argument.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(pub [i32; MAX_DIM]);

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint([0; MAX_DIM]);

    /// Builds a point from up to four coordinates.
    pub fn new(coords: &[i32]) -> Self {
        assert!(coords.len() <= MAX_DIM, "at most {MAX_DIM} coordinates");
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        LatticePoint(c)
    }

    #[inline]
    pub fn coords(&self, dim: Dim) -> &[i32] {
        &self.0[..dim.get()]
    }

    #[inline]
    pub fn norm2(&self) -> i64 {
        self.0.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        (self.norm2() as f64).sqrt()
    }

    /// Neighbour in direction `dir` in `0..2d`: axis `dir / 2`, sign by parity.
    #[inline]
    pub fn neighbor(&self, dir: usize) -> LatticePoint {
        let mut c = self.0;
        let axis = dir >> 1;
        c[axis] += if dir & 1 == 0 { 1 } else { -1 };
        LatticePoint(c)
    }

    pub fn neighbors(&self, dim: Dim) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..dim.degree()).map(move |dir| self.neighbor(dir))
    }

    #[inline]
    pub fn add(&self, other: &LatticePoint) -> LatticePoint {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(other.0.iter()) {
            *a += *b;
        }
        LatticePoint(c)
    }

    #[inline]
    pub fn sub(&self, other: &LatticePoint) -> LatticePoint {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(other.0.iter()) {
            *a -= *b;
        }
        LatticePoint(c)
    }

    #[inline]
    pub fn in_box(&self, dim: Dim) -> bool {
        let lim = dim.coord_limit();
        self.coords(dim).iter().all(|&c| c > -lim && c < lim)
    }

    /// Packs the point into a `u64` key. Caller guarantees `in_box`.
    #[inline]
    pub fn pack(&self, dim: Dim) -> u64 {
        let bits = dim.axis_bits();
        let off = 1i64 << (bits - 1);
        let mut key = 0u64;
        for (i, &c) in self.coords(dim).iter().enumerate() {
            key |= ((c as i64 + off) as u64) << (bits * i as u32);
        }
        key
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&c| c != 0).unwrap_or(0);
        write!(f, "(")?;
        for (i, c) in self.0[..=last].iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Squared-radius bound for a real radius: `|p| <= r` iff `|p|^2 <= bound`.
///
/// The small relative slack makes `radius_norm2_bound(sqrt(k)) == k` for
/// every integer `k` despite rounding in `sqrt`.
pub fn radius_norm2_bound(r: f64) -> i64 {
    if r < 0.0 {
        return -1;
    }
    (r * r * (1.0 + 1e-12) + 1e-9).floor() as i64
}

/// Euclidean ball `{p : |p - center| <= radius}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: LatticePoint,
    pub radius: f64,
}

impl Ball {
    pub fn centered(radius: f64) -> Self {
        Ball {
            center: LatticePoint::ORIGIN,
            radius,
        }
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        p.sub(&self.center).norm2() <= radius_norm2_bound(self.radius)
    }

    /// Lattice points of the ball, sorted by `(|p - center|^2, coords)`.
    pub fn points(&self, dim: Dim) -> Vec<LatticePoint> {
        let mut pts = ball_points_norm2(dim, radius_norm2_bound(self.radius));
        for p in pts.iter_mut() {
            *p = p.add(&self.center);
        }
        pts
    }
}

/// All points with `|p|^2 <= max_norm2`, sorted by `(norm2, coords)`.
pub fn ball_points_norm2(dim: Dim, max_norm2: i64) -> Vec<LatticePoint> {
    let mut out = Vec::new();
    if max_norm2 < 0 {
        return out;
    }
    let r = isqrt(max_norm2) as i32;
    let d = dim.get();
    let mut cur = [0i32; MAX_DIM];
    fn rec(axis: usize, d: usize, r: i32, rem: i64, cur: &mut [i32; MAX_DIM], out: &mut Vec<LatticePoint>) {
        if axis == d {
            out.push(LatticePoint(*cur));
            return;
        }
        let span = isqrt(rem) as i32;
        for x in -span.min(r)..=span.min(r) {
            cur[axis] = x;
            rec(axis + 1, d, r, rem - (x as i64) * (x as i64), cur, out);
        }
        cur[axis] = 0;
    }
    rec(0, d, r, max_norm2, &mut cur, &mut out);
    out.sort_by_key(|p| (p.norm2(), *p));
    out
}

/// Exact number of lattice points with `|p| <= n`.
pub fn ball_volume(dim: Dim, n: f64) -> Result<u64> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::Config(format!("ball radius must be a finite nonnegative number, got {n}")));
    }
    ball_volume_norm2(dim, radius_norm2_bound(n))
}

/// Exact number of lattice points with `|p|^2 <= max_norm2`.
pub fn ball_volume_norm2(dim: Dim, max_norm2: i64) -> Result<u64> {
    fn count(d: usize, rem: i64) -> Option<u64> {
        if rem < 0 {
            return Some(0);
        }
        let s = isqrt(rem);
        if d == 1 {
            return Some(2 * s as u64 + 1);
        }
        let mut total: u64 = count(d - 1, rem)?;
        for x in 1..=s {
            total = total.checked_add(count(d - 1, rem - x * x)?.checked_mul(2)?)?;
        }
        Some(total)
    }
    count(dim.get(), max_norm2).ok_or_else(|| Error::Config(format!("ball volume overflows u64 (d={dim}, |p|^2 <= {max_norm2})")))
}

/// Smallest shell radius `sqrt(k)` whose ball holds at least `sites` points.
///
/// Returns the squared radius `k`. Monotone bisection on `ball_volume`.
pub fn volume_equivalent_norm2(dim: Dim, sites: u64) -> Result<i64> {
    if sites <= 1 {
        return Ok(0);
    }
    let mut hi: i64 = 1;
    while ball_volume_norm2(dim, hi)? < sites {
        hi *= 2;
    }
    let mut lo: i64 = 0;
    // invariant: volume(lo) < sites <= volume(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ball_volume_norm2(dim, mid)? >= sites {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Integer square root, `floor(sqrt(v))` for `v >= 0`.
pub fn isqrt(v: i64) -> i64 {
    if v <= 0 {
        return 0;
    }
    let mut s = (v as f64).sqrt() as i64;
    while s * s > v {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= v {
        s += 1;
    }
    s
}

/// Radii `(inradius, outradius)` of a nonempty aggregate.
///
/// The inradius is the largest `r` with `B[r]` inside the aggregate, reported
/// as the norm of the outermost complete shell, or `-1` when the origin is
/// vacant.
pub fn shape_radii(agg: &Aggregate) -> Result<(f64, f64)> {
    if agg.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    Ok((agg.inradius(), agg.outradius()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_volume(d: usize, r2: i64) -> u64 {
        let r = isqrt(r2) as i32;
        let mut n = 0;
        let range = || -r..=r;
        match d {
            1 => range().filter(|x| (*x as i64).pow(2) <= r2).count() as u64,
            2 => {
                for x in range() {
                    for y in range() {
                        n += ((x * x + y * y) as i64 <= r2) as u64;
                    }
                }
                n
            }
            3 => {
                for x in range() {
                    for y in range() {
                        for z in range() {
                            n += ((x * x + y * y + z * z) as i64 <= r2) as u64;
                        }
                    }
                }
                n
            }
            _ => {
                for x in range() {
                    for y in range() {
                        for z in range() {
                            for w in range() {
                                n += ((x * x + y * y + z * z + w * w) as i64 <= r2) as u64;
                            }
                        }
                    }
                }
                n
            }
        }
    }

    #[test]
    fn ball_volume_examples() {
        assert_eq!(ball_volume(Dim::new(1).unwrap(), 3.0).unwrap(), 7);
        assert_eq!(ball_volume(Dim::new(2).unwrap(), 1.0).unwrap(), 5);
        assert_eq!(ball_volume(Dim::new(2).unwrap(), 2.0).unwrap(), 13);
        assert_eq!(ball_volume(Dim::new(3).unwrap(), 1.0).unwrap(), 7);
        assert_eq!(ball_volume(Dim::new(2).unwrap(), 5.0).unwrap(), 81);
    }

    #[test]
    fn ball_volume_matches_brute_force() {
        for d in 1..=4 {
            let dim = Dim::new(d).unwrap();
            let max_n = if d == 4 { 12 } else { 20 };
            let mut prev = 0;
            for n in 0..=max_n {
                let v = ball_volume(dim, n as f64).unwrap();
                assert_eq!(v, brute_volume(d, (n * n) as i64), "d={d} n={n}");
                assert!(v >= prev);
                prev = v;
            }
            // irrational radii land on the right shell
            for k in 0..50i64 {
                let v = ball_volume(dim, (k as f64).sqrt()).unwrap();
                assert_eq!(v, brute_volume(d, k), "d={d} k={k}");
            }
        }
    }

    #[test]
    fn ball_points_agree_with_volume() {
        for d in 1..=3 {
            let dim = Dim::new(d).unwrap();
            for k in [0, 1, 2, 7, 25, 50] {
                let pts = ball_points_norm2(dim, k);
                assert_eq!(pts.len() as u64, ball_volume_norm2(dim, k).unwrap());
                assert!(pts.windows(2).all(|w| w[0].norm2() <= w[1].norm2()));
            }
        }
    }

    #[test]
    fn negative_or_nan_radius_rejected() {
        let dim = Dim::new(2).unwrap();
        assert!(ball_volume(dim, -1.0).is_err());
        assert!(ball_volume(dim, f64::NAN).is_err());
        assert!(Dim::new(0).is_err());
        assert!(Dim::new(5).is_err());
    }

    #[test]
    fn volume_equivalent_radius_inverts_volume() {
        let dim = Dim::new(2).unwrap();
        assert_eq!(volume_equivalent_norm2(dim, 81).unwrap(), 25);
        assert_eq!(volume_equivalent_norm2(dim, 82).unwrap(), 26);
        assert_eq!(volume_equivalent_norm2(dim, 1).unwrap(), 0);
        assert_eq!(volume_equivalent_norm2(dim, 5).unwrap(), 1);
        assert_eq!(volume_equivalent_norm2(dim, 6).unwrap(), 2);
    }

    #[test]
    fn pack_is_injective_near_limits() {
        for d in 1..=4 {
            let dim = Dim::new(d).unwrap();
            let lim = dim.coord_limit() - 1;
            let mut seen = std::collections::HashSet::new();
            for a in [-lim, -1, 0, 1, lim] {
                for b in [-lim, 0, lim] {
                    let mut c = [0; MAX_DIM];
                    c[0] = a;
                    c[d - 1] = b;
                    let p = LatticePoint(c);
                    seen.insert((p, p.pack(dim)));
                }
            }
            let keys: std::collections::HashSet<u64> = seen.iter().map(|x| x.1).collect();
            let pts: std::collections::HashSet<LatticePoint> = seen.iter().map(|x| x.0).collect();
            assert_eq!(keys.len(), pts.len());
        }
    }
}
