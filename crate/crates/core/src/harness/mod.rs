//! Config-driven experiment runner and output files.
//!
//! A run writes, inside `output_dir`:
//!
//! | file | columns |
//! |------|---------|
//! | `config.txt` | canonical configuration |
//! | `summary.csv` | `replica,n_sites,ball_radius_equiv,ball_sites,inradius,outradius,symdiff_count,max_reaching_time` |
//! | `stats_r{r}.csv` | `step,n_sites,inradius,outradius` |
//! | `snapshot_r{r}.txt` | `d=<d> n_sites=<k>` header, then one site per line |
//! | `forest_r{r}.csv` | `index,parent_index,site_coords,edge_weight,depth,reaching_time` |
//! | `crossing_r{r}.csv` | `annulus,crossing_frequency,tail,geometric_half_tail` |

mod config;
mod render;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

pub use config::{AnnulusConfig, Budget, ExperimentConfig};
pub use render::{read_p6, render_symdiff, render_symdiff_bytes, Pixmap, RenderSpec, RenderStats, BLACK, BLUE, RED, WHITE};

use crate::analysis::{annulus_crossing_probe, shape_report, AnnulusSpec, ShapeReport};
use crate::error::{Error, Result};
use crate::lattice::{write_snapshot, Dim, LatticePoint};
use crate::par::try_map_replicas;
use crate::processes::{grow, GrowthSpec};
use crate::rng::{Purpose, Streams};
use crate::stats::fmt_sig9;
use crate::walk::{auto_kernel_radius, Walker};

pub const STATS_HEADER: &str = "step,n_sites,inradius,outradius";
pub const SUMMARY_HEADER: &str = "replica,n_sites,ball_radius_equiv,ball_sites,inradius,outradius,symdiff_count,max_reaching_time";

/// Fork tag for the crossing-probe walks, kept apart from growth walks.
const PROBE_FORK: u64 = 0x70726f6265;

/// Writes `bytes` to a sibling temp file and renames it into place, so a
/// crash never leaves a half-written output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Walker for a run of `sites` sites: plain, a fixed kernel radius, or one
/// picked from the run size.
pub fn make_walker(dim: Dim, accel: bool, kernel_radius: Option<u32>, sites: u64) -> Result<Walker> {
    if !accel {
        return Ok(Walker::plain(dim));
    }
    Walker::accelerated(dim, kernel_radius.unwrap_or_else(|| auto_kernel_radius(dim, sites)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaSummary {
    pub replica: u32,
    pub shape: ShapeReport,
    pub max_reaching_time: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentSummary {
    pub output_dir: PathBuf,
    pub replicas: Vec<ReplicaSummary>,
    pub files: Vec<PathBuf>,
}

impl ExperimentSummary {
    pub fn csv(&self) -> String {
        let mut s = format!("{SUMMARY_HEADER}\n");
        for r in &self.replicas {
            let t = r.max_reaching_time.map(|t| t.to_string()).unwrap_or_default();
            writeln!(s, "{},{},{}", r.replica, r.shape.csv_row(), t).unwrap();
        }
        s
    }
}

struct ReplicaOutput {
    summary: ReplicaSummary,
    files: Vec<(PathBuf, Vec<u8>)>,
}

fn run_replica(cfg: &ExperimentConfig, particles: u64, r: u32, walker: &Walker) -> Result<ReplicaOutput> {
    let dir = &cfg.output_dir;
    let streams = Streams::new(cfg.seed, r);
    let spec = GrowthSpec {
        kind: cfg.process,
        particles,
        host_size: cfg.host_size,
    };
    let every = if cfg.stats_every == 0 {
        particles.div_ceil(1000).max(1)
    } else {
        cfg.stats_every
    };
    let mut stats = format!("{STATS_HEADER}\n");
    let mut last_row = 0;
    let (agg, forest) = grow(&spec, cfg.dim, &streams, walker, |step, a| {
        if step % every == 0 || step == particles {
            if !a.is_empty() {
                writeln!(stats, "{},{},{},{}", step, a.len(), fmt_sig9(a.inradius()), fmt_sig9(a.outradius())).unwrap();
            }
            last_row = step;
        }
        Ok(())
    })?;
    // uIDLA from {0} with a one-site budget never calls back past step 1
    if last_row == 0 && !agg.is_empty() {
        writeln!(stats, "{},{},{},{}", 0, agg.len(), fmt_sig9(agg.inradius()), fmt_sig9(agg.outradius())).unwrap();
    }
    let mut files = vec![(dir.join(format!("stats_r{r}.csv")), stats.into_bytes())];

    if cfg.snapshot {
        let mut buf = Vec::new();
        write_snapshot(&agg, &mut buf)?;
        files.push((dir.join(format!("snapshot_r{r}.txt")), buf));
    }

    let mut max_reaching_time = None;
    if let Some(mut forest) = forest {
        forest.assign_edge_weights(cfg.geom_convention, &mut streams.aux(Purpose::EdgeWeights, 0))?;
        max_reaching_time = Some(forest.max_reaching_time()?);
        if cfg.forest {
            let mut buf = Vec::new();
            forest.write_csv(&agg, &mut buf)?;
            files.push((dir.join(format!("forest_r{r}.csv")), buf));
        }
    }

    if let Some(a) = cfg.annulus {
        let spec = AnnulusSpec::new(a.m, a.width, a.count)?;
        let report = annulus_crossing_probe(&agg, &spec, &[LatticePoint::ORIGIN], a.walks, &streams.fork(PROBE_FORK), walker)?;
        files.push((dir.join(format!("crossing_r{r}.csv")), report.csv().into_bytes()));
    }

    Ok(ReplicaOutput {
        summary: ReplicaSummary {
            replica: r,
            shape: shape_report(&agg)?,
            max_reaching_time,
        },
        files,
    })
}

/// Runs every replica of `cfg` and writes the files listed in the module
/// docs. Outputs depend only on the configuration, not on thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let particles = cfg.particles()?;
    if particles == 0 {
        return Err(Error::Config("budget gives zero particles".into()));
    }
    let walker = make_walker(cfg.dim, cfg.accel, cfg.kernel_radius, particles)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let outputs = try_map_replicas(cfg.replicas, |r| run_replica(cfg, particles, r, &walker))?;

    let mut files = Vec::new();
    let mut replicas = Vec::new();
    for out in outputs {
        for (path, bytes) in out.files {
            write_atomic(&path, &bytes)?;
            files.push(path);
        }
        replicas.push(out.summary);
    }
    let summary = ExperimentSummary {
        output_dir: cfg.output_dir.clone(),
        replicas,
        files,
    };
    let summary_path = cfg.output_dir.join("summary.csv");
    write_atomic(&summary_path, summary.csv().as_bytes())?;
    let config_path = cfg.output_dir.join("config.txt");
    write_atomic(&config_path, cfg.serialize().as_bytes())?;
    let mut summary = summary;
    summary.files.push(summary_path);
    summary.files.push(config_path);
    Ok(summary)
}

/// Lower-case hex SHA-256 of a file.
pub fn sha256_file(path: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(std::fs::read(path)?);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
