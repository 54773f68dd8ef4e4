//! Precomputed exit kernels of lattice balls, used to jump a walk across a
//! region known to lie inside the aggregate.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use sha2::{Digest, Sha256};

use super::harmonic::ExitProblem;
use crate::error::{Error, Result};
use crate::lattice::{ball_points_norm2, Dim, LatticePoint};

/// Largest supported kernel radius.
pub const MAX_KERNEL_RADIUS: u32 = 16;
/// Dense solves above this many interior points are refused.
const MAX_INTERIOR: usize = 4096;

const MAGIC: &[u8; 8] = b"UIDLAKRN";
const FORMAT_VERSION: u32 = 1;

/// Default radius: 4 in d <= 2, 3 in d >= 3.
pub fn default_kernel_radius(dim: Dim) -> u32 {
    if dim.get() <= 2 {
        4
    } else {
        3
    }
}

/// Radius worth its build cost for aggregates of about `sites` points.
pub fn auto_kernel_radius(dim: Dim, sites: u64) -> u32 {
    match dim.get() {
        2 if sites >= 100_000 => 16,
        2 if sites >= 10_000 => 12,
        3 if sites >= 100_000 => 6,
        _ => default_kernel_radius(dim),
    }
}

/// Exact exit distribution of simple random walk from `B[r]`, for every
/// interior start.
#[derive(Clone, Debug)]
pub struct ExitKernel {
    dim: Dim,
    radius: u32,
    starts: Vec<LatticePoint>,
    exits: Vec<LatticePoint>,
    /// Row-major `starts.len() x exits.len()`.
    probs: Vec<f64>,
    center: CenterSampler,
}

#[derive(Clone, Debug)]
struct CenterSampler {
    offsets: Vec<LatticePoint>,
    alias: WeightedAliasIndex<f64>,
}

impl ExitKernel {
    pub fn build(dim: Dim, radius: u32) -> Result<Self> {
        let too_large = |reason: String| Error::KernelTooLarge {
            dim: dim.get(),
            radius,
            reason,
        };
        if radius > MAX_KERNEL_RADIUS {
            return Err(too_large(format!("radius must be <= {MAX_KERNEL_RADIUS}")));
        }
        let r2 = (radius as i64) * (radius as i64);
        let interior = ball_points_norm2(dim, r2);
        if interior.len() > MAX_INTERIOR {
            return Err(too_large(format!(
                "{} interior points exceed the table guard of {MAX_INTERIOR}",
                interior.len()
            )));
        }
        let problem = ExitProblem::new(dim, &interior)?;
        let table = problem.dense_exit_table()?;
        let starts = problem.interior().to_vec();
        let exits = problem.exits().to_vec();
        let mut probs = Vec::with_capacity(starts.len() * exits.len());
        for i in 0..starts.len() {
            for j in 0..exits.len() {
                // clamp roundoff below zero
                probs.push(table[(i, j)].max(0.0));
            }
        }
        Self::from_parts(dim, radius, starts, exits, probs)
    }

    fn from_parts(dim: Dim, radius: u32, starts: Vec<LatticePoint>, exits: Vec<LatticePoint>, probs: Vec<f64>) -> Result<Self> {
        let m = exits.len();
        let row0 = starts
            .iter()
            .position(|p| *p == LatticePoint::ORIGIN)
            .ok_or_else(|| Error::InvalidArgument("kernel has no centre row".into()))?;
        let row = &probs[row0 * m..(row0 + 1) * m];
        let (offsets, weights): (Vec<LatticePoint>, Vec<f64>) = exits.iter().zip(row).filter(|(_, &w)| w > 0.0).map(|(p, &w)| (*p, w)).unzip();
        let alias = WeightedAliasIndex::new(weights).map_err(|e| Error::InvalidArgument(format!("kernel centre row: {e}")))?;
        Ok(ExitKernel {
            dim,
            radius,
            starts,
            exits,
            probs,
            center: CenterSampler { offsets, alias },
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn starts(&self) -> &[LatticePoint] {
        &self.starts
    }

    pub fn exits(&self) -> &[LatticePoint] {
        &self.exits
    }

    /// Exit distribution from interior offset `start`, indexed like `exits`.
    pub fn row(&self, start: &LatticePoint) -> Option<&[f64]> {
        let i = self.starts.iter().position(|p| p == start)?;
        let m = self.exits.len();
        Some(&self.probs[i * m..(i + 1) * m])
    }

    pub fn probability(&self, start: &LatticePoint, exit: &LatticePoint) -> f64 {
        let Some(row) = self.row(start) else { return 0.0 };
        self.exits.iter().position(|p| p == exit).map(|j| row[j]).unwrap_or(0.0)
    }

    /// Exit offset of a walk started at the centre of the ball.
    #[inline]
    pub fn sample_center<R: Rng + ?Sized>(&self, rng: &mut R) -> LatticePoint {
        self.center.offsets[self.center.alias.sample(rng)]
    }

    fn encode(&self) -> Vec<u8> {
        let d = self.dim.get();
        let mut buf = Vec::with_capacity(32 + 8 * self.probs.len());
        buf.extend_from_slice(MAGIC);
        for v in [FORMAT_VERSION, d as u32, self.radius, self.starts.len() as u32, self.exits.len() as u32] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for p in self.starts.iter().chain(&self.exits) {
            for c in p.coords(self.dim) {
                buf.extend_from_slice(&c.to_le_bytes());
            }
        }
        for v in &self.probs {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let digest = Sha256::digest(&buf);
        buf.extend_from_slice(&digest);
        buf
    }

    fn decode(bytes: &[u8]) -> Option<Self> {
        if bytes.len() < 8 + 20 + 32 || &bytes[..8] != MAGIC {
            return None;
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return None;
        }
        let mut at = 8;
        let mut u32_at = |buf: &[u8]| {
            let v = u32::from_le_bytes(buf[at..at + 4].try_into().unwrap());
            at += 4;
            v
        };
        let version = u32_at(body);
        let d = u32_at(body) as usize;
        let radius = u32_at(body);
        let n = u32_at(body) as usize;
        let m = u32_at(body) as usize;
        if version != FORMAT_VERSION {
            return None;
        }
        let dim = Dim::new(d).ok()?;
        let expect = at + (n + m) * d * 4 + n * m * 8;
        if body.len() != expect {
            return None;
        }
        let mut points = Vec::with_capacity(n + m);
        for _ in 0..n + m {
            let mut c = [0i32; 4];
            for slot in c.iter_mut().take(d) {
                *slot = i32::from_le_bytes(body[at..at + 4].try_into().unwrap());
                at += 4;
            }
            points.push(LatticePoint(c));
        }
        let exits = points.split_off(n);
        let probs = body[at..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Self::from_parts(dim, radius, points, exits, probs).ok()
    }

    /// Loads a cached kernel, rebuilding (and rewriting the cache) when the
    /// file is missing, corrupt, or for another `(d, r)`.
    pub fn load_or_build(path: &Path, dim: Dim, radius: u32) -> Result<Self> {
        if let Ok(bytes) = fs::read(path) {
            if let Some(k) = Self::decode(&bytes) {
                if k.dim == dim && k.radius == radius {
                    return Ok(k);
                }
            }
        }
        let k = Self::build(dim, radius)?;
        k.save(path)?;
        Ok(k)
    }

    /// Writes the versioned binary cache file atomically.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&self.encode())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// Kernels for every radius `1..=max_radius`.
#[derive(Clone, Debug)]
pub struct KernelSet {
    kernels: Vec<ExitKernel>,
}

impl KernelSet {
    pub fn build(dim: Dim, max_radius: u32) -> Result<Self> {
        if max_radius == 0 {
            return Err(Error::Config("kernel radius must be at least 1".into()));
        }
        let kernels = (1..=max_radius).map(|r| ExitKernel::build(dim, r)).collect::<Result<_>>()?;
        Ok(KernelSet { kernels })
    }

    pub fn max_radius(&self) -> u32 {
        self.kernels.len() as u32
    }

    #[inline]
    pub fn get(&self, radius: u32) -> &ExitKernel {
        &self.kernels[radius as usize - 1]
    }
}
