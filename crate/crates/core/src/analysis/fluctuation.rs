use std::io::Write;

use crate::error::{Error, Result};
use crate::lattice::{ball_volume, Dim};
use crate::par::try_map_replicas;
use crate::processes::{grow, GrowthSpec, ProcessKind};
use crate::rng::Streams;
use crate::stats::{fmt_sig9, mean_sd};
use crate::walk::Walker;

/// Outer and inner deviations at one radius; the standard deviations are
/// `None` with a single replica.
#[derive(Clone, Debug, PartialEq)]
pub struct FluctuationRow {
    pub n: f64,
    pub particles: u64,
    pub replicas: u32,
    pub mean_out: f64,
    pub sd_out: Option<f64>,
    pub mean_in: f64,
    pub sd_in: Option<f64>,
}

/// For each radius `n`, grows `replicas` aggregates of `b_n` sites and
/// summarises `outradius - n` and `n - inradius`. Replica `r` at the `i`-th
/// radius uses replica stream `i * replicas + r`.
pub fn fluctuation_scaling(kind: ProcessKind, dim: Dim, radii: &[f64], replicas: u32, seed: u64, walker: &Walker) -> Result<Vec<FluctuationRow>> {
    if kind == ProcessKind::Subset {
        return Err(Error::InvalidArgument("fluctuation scaling needs idla, uidla or richardson".into()));
    }
    if replicas == 0 {
        return Err(Error::InvalidArgument("replicas must be positive".into()));
    }
    if radii.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("radii must be sorted ascending".into()));
    }
    let mut rows = Vec::with_capacity(radii.len());
    for (i, &n) in radii.iter().enumerate() {
        let particles = ball_volume(dim, n)?;
        let spec = GrowthSpec { kind, particles, host_size: 1 };
        let base = i as u32 * replicas;
        let radii = try_map_replicas(replicas, |r| -> Result<(f64, f64)> {
            let (agg, _) = grow(&spec, dim, &Streams::new(seed, base + r), walker, |_, _| Ok(()))?;
            Ok((agg.outradius() - n, n - agg.inradius()))
        })?;
        let outs: Vec<f64> = radii.iter().map(|v| v.0).collect();
        let ins: Vec<f64> = radii.iter().map(|v| v.1).collect();
        let (mean_out, sd_out) = mean_sd(&outs);
        let (mean_in, sd_in) = mean_sd(&ins);
        rows.push(FluctuationRow {
            n,
            particles,
            replicas,
            mean_out,
            sd_out,
            mean_in,
            sd_in,
        });
    }
    Ok(rows)
}

pub fn write_fluctuation_csv<W: Write>(rows: &[FluctuationRow], mut out: W) -> Result<()> {
    writeln!(out, "n,particles,replicas,mean_out_minus_n,sd_out_minus_n,mean_n_minus_in,sd_n_minus_in")?;
    let sd = |v: Option<f64>| v.map(fmt_sig9).unwrap_or_else(|| "undefined".into());
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_sig9(r.n),
            r.particles,
            r.replicas,
            fmt_sig9(r.mean_out),
            sd(r.sd_out),
            fmt_sig9(r.mean_in),
            sd(r.sd_in)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_replica_marks_sd_undefined() {
        let dim = Dim::new(2).unwrap();
        let w = Walker::new(dim, true).unwrap();
        let rows = fluctuation_scaling(ProcessKind::Uidla, dim, &[5.0, 8.0], 1, 1, &w).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].particles, 81);
        assert!(rows.iter().all(|r| r.sd_out.is_none() && r.sd_in.is_none()));
        let mut buf = Vec::new();
        write_fluctuation_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().ends_with("undefined"));
    }

    #[test]
    fn relative_error_decays_for_idla() {
        let dim = Dim::new(2).unwrap();
        let w = Walker::new(dim, true).unwrap();
        let rows = fluctuation_scaling(ProcessKind::Idla, dim, &[20.0, 40.0, 80.0], 4, 7, &w).unwrap();
        let rel: Vec<f64> = rows.iter().map(|r| r.mean_out / r.n).collect();
        assert!(rel[2] < rel[0], "{rel:?}");
        assert!(rows.iter().all(|r| r.sd_out.is_some()));
    }

    #[test]
    fn bad_inputs() {
        let dim = Dim::new(2).unwrap();
        let w = Walker::plain(dim);
        assert!(fluctuation_scaling(ProcessKind::Idla, dim, &[5.0, 3.0], 2, 0, &w).is_err());
        assert!(fluctuation_scaling(ProcessKind::Idla, dim, &[5.0], 0, 0, &w).is_err());
        assert!(fluctuation_scaling(ProcessKind::Subset, dim, &[5.0], 1, 0, &w).is_err());
    }
}
