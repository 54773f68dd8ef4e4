//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! seed = 42
//! dim = 2
//! process = uidla
//! radius = 50
//! replicas = 4
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::genealogy::GeomConvention;
use crate::lattice::{ball_volume, Dim};
use crate::processes::ProcessKind;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Budget {
    Particles(u64),
    /// Grow to `b_n` sites.
    Radius(f64),
}

/// Crossing probe run on every replica's final aggregate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnulusConfig {
    pub m: f64,
    pub width: f64,
    pub count: usize,
    pub walks: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub dim: Dim,
    pub process: ProcessKind,
    pub budget: Budget,
    pub replicas: u32,
    pub accel: bool,
    /// `None` picks a radius from the budget.
    pub kernel_radius: Option<u32>,
    pub host_size: u64,
    /// Stats row every this many steps; 0 means about 1000 rows per run.
    pub stats_every: u64,
    pub output_dir: PathBuf,
    pub snapshot: bool,
    pub forest: bool,
    pub geom_convention: GeomConvention,
    pub annulus: Option<AnnulusConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            dim: Dim::new(2).unwrap(),
            process: ProcessKind::Uidla,
            budget: Budget::Particles(1000),
            replicas: 1,
            accel: true,
            kernel_radius: None,
            host_size: 1,
            stats_every: 0,
            output_dir: PathBuf::from("out"),
            snapshot: false,
            forest: false,
            geom_convention: GeomConvention::ParameterHalf,
            annulus: None,
        }
    }
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(format!("expected true/false or on/off, got {v:?}")),
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("{v:?}: {e}"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<String> = Vec::new();
        let mut particles: Option<u64> = None;
        let mut radius: Option<f64> = None;
        let mut ann: [Option<f64>; 4] = [None; 4];
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: line_no, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(err(format!("duplicate key {key:?}")));
            }
            seen.push(key.to_string());
            match key {
                "seed" => cfg.seed = parse_num(value).map_err(err)?,
                "dim" => cfg.dim = Dim::new(parse_num(value).map_err(err)?).map_err(|e| err(e.to_string()))?,
                "process" => cfg.process = value.parse().map_err(|e: Error| err(e.to_string()))?,
                "particles" => particles = Some(parse_num(value).map_err(err)?),
                "radius" => radius = Some(parse_num(value).map_err(err)?),
                "replicas" => cfg.replicas = parse_num(value).map_err(err)?,
                "accel" => cfg.accel = parse_bool(value).map_err(err)?,
                "kernel_radius" => cfg.kernel_radius = if value == "auto" { None } else { Some(parse_num(value).map_err(err)?) },
                "host_size" => cfg.host_size = parse_num(value).map_err(err)?,
                "stats_every" => cfg.stats_every = parse_num(value).map_err(err)?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "snapshot" => cfg.snapshot = parse_bool(value).map_err(err)?,
                "forest" => cfg.forest = parse_bool(value).map_err(err)?,
                "geom_convention" => cfg.geom_convention = value.parse().map_err(|e: Error| err(e.to_string()))?,
                "annulus.m" => ann[0] = Some(parse_num(value).map_err(err)?),
                "annulus.width" => ann[1] = Some(parse_num(value).map_err(err)?),
                "annulus.count" => ann[2] = Some(parse_num(value).map_err(err)?),
                "annulus.walks" => ann[3] = Some(parse_num(value).map_err(err)?),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        cfg.budget = match (particles, radius) {
            (Some(_), Some(_)) => return Err(Error::Config("set either particles or radius, not both".into())),
            (Some(p), None) => Budget::Particles(p),
            (None, Some(r)) => Budget::Radius(r),
            (None, None) => cfg.budget,
        };
        cfg.annulus = match ann {
            [None, None, None, None] => None,
            [Some(m), Some(width), Some(count), Some(walks)] => Some(AnnulusConfig {
                m,
                width,
                count: count as usize,
                walks: walks as u64,
            }),
            _ => return Err(Error::Config("annulus.m, annulus.width, annulus.count and annulus.walks go together".into())),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match self.budget {
            Budget::Particles(0) => return bad("particles must be >= 1".into()),
            Budget::Radius(r) if !(r >= 0.0) || !r.is_finite() => return bad(format!("radius must be finite and >= 0, got {r}")),
            _ => {}
        }
        if self.replicas == 0 {
            return bad("replicas must be >= 1".into());
        }
        if self.host_size == 0 {
            return bad("host_size must be >= 1".into());
        }
        if self.forest && self.process != ProcessKind::Uidla {
            return bad("forest output needs process = uidla".into());
        }
        if let Some(r) = self.kernel_radius {
            if r == 0 || r > crate::walk::MAX_KERNEL_RADIUS {
                return bad(format!("kernel_radius must be in 1..={}", crate::walk::MAX_KERNEL_RADIUS));
            }
        }
        if let Some(a) = self.annulus {
            crate::analysis::AnnulusSpec::new(a.m, a.width, a.count).map_err(|e| Error::Config(e.to_string()))?;
            if a.walks == 0 {
                return bad("annulus.walks must be >= 1".into());
            }
        }
        Ok(())
    }

    /// Particle (or tick) count implied by the budget.
    pub fn particles(&self) -> Result<u64> {
        match self.budget {
            Budget::Particles(p) => Ok(p),
            Budget::Radius(r) => ball_volume(self.dim, r),
        }
    }

    /// Canonical text form; `parse(serialize())` gives back `self`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let b = |v: bool| if v { "true" } else { "false" };
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "dim = {}", self.dim.get()).unwrap();
        writeln!(s, "process = {}", self.process).unwrap();
        match self.budget {
            Budget::Particles(p) => writeln!(s, "particles = {p}").unwrap(),
            Budget::Radius(r) => writeln!(s, "radius = {r:?}").unwrap(),
        }
        writeln!(s, "replicas = {}", self.replicas).unwrap();
        writeln!(s, "accel = {}", if self.accel { "on" } else { "off" }).unwrap();
        match self.kernel_radius {
            Some(r) => writeln!(s, "kernel_radius = {r}").unwrap(),
            None => writeln!(s, "kernel_radius = auto").unwrap(),
        }
        writeln!(s, "host_size = {}", self.host_size).unwrap();
        writeln!(s, "stats_every = {}", self.stats_every).unwrap();
        writeln!(s, "output_dir = {}", self.output_dir.display()).unwrap();
        writeln!(s, "snapshot = {}", b(self.snapshot)).unwrap();
        writeln!(s, "forest = {}", b(self.forest)).unwrap();
        writeln!(s, "geom_convention = {}", self.geom_convention.as_str()).unwrap();
        if let Some(a) = self.annulus {
            writeln!(s, "annulus.m = {:?}", a.m).unwrap();
            writeln!(s, "annulus.width = {:?}", a.width).unwrap();
            writeln!(s, "annulus.count = {}", a.count).unwrap();
            writeln!(s, "annulus.walks = {}", a.walks).unwrap();
        }
        s
    }
}
