//! Desk-scale acceptance suite: eleven checks, each writing its CSV
//! evidence to an output directory.
//!
//! Every criterion draws from streams derived from one seed, so two runs
//! with the same seed must produce byte-identical CSV files; criterion 11
//! checks exactly that.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::analysis::{annulus_crossing_probe, random_annulus_fill, AnnulusSpec};
use crate::couplings::{averaging_defect, averaging_defect_exact, sandpile_relax, tricolor_run, SANDPILE_TOLERANCE};
use crate::error::{Error, Result};
use crate::genealogy::{grow_yule, GeomConvention, YuleStop};
use crate::harness::{make_walker, read_p6, render_symdiff, sha256_file, write_atomic, RenderSpec, BLUE, RED, WHITE};
use crate::lattice::{ball_volume, volume_equivalent_norm2, Aggregate, Dim, LatticePoint};
use crate::par::try_map_replicas;
use crate::processes::{subset_uidla, uidla, uidla_1d_middle};
use crate::rng::{Purpose, Streams};
use crate::stats::{chi_square_gof, chi_square_two_sample, fmt_sig9, median};
use crate::walk::{ExitDistribution, ExitKernel, ExitProblem, Walker};

pub const ALPHA: f64 = 1e-3;
/// Bound on `median(max reaching time) / ln² n` for criterion 4.
pub const REACHING_TIME_C: f64 = 2.0;

/// `(id, short name)` for every criterion.
pub const CRITERIA: [(u8, &str); 11] = [
    (1, "exact 1-d midpoint law"),
    (2, "shape trend in d=2"),
    (3, "Yule level means"),
    (4, "genealogy depth"),
    (5, "tricolor blue marginal"),
    (6, "sandpile quadrature"),
    (7, "averaging defect decay"),
    (8, "exit kernel exactness"),
    (9, "annulus crossing domination"),
    (10, "10^6-particle render"),
    (11, "determinism"),
];

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {}: {} ({:.1} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

struct Check {
    passed: bool,
    detail: String,
}

fn name_of(id: u8) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown")
}

/// Seed for criterion `id`, independent across criteria.
fn criterion_seed(seed: u64, id: u8) -> u64 {
    Streams::new(seed, 0).fork(id as u64).seed
}

fn d(n: usize) -> Dim {
    Dim::new(n).expect("dimension 1..=4")
}

fn save(dir: &Path, name: &str, text: &str) -> Result<()> {
    write_atomic(&dir.join(name), text.as_bytes())
}

/// Runs criterion `id` (1..=10), writing its files under `dir`. Errors
/// inside a criterion are reported as failures, not propagated.
pub fn run_criterion(id: u8, seed: u64, dir: &Path) -> Result<Outcome> {
    std::fs::create_dir_all(dir)?;
    let s = criterion_seed(seed, id);
    let t0 = Instant::now();
    let res = match id {
        1 => midpoint_law(s, dir),
        2 => shape_trend(s, dir),
        3 => yule_means(s, dir),
        4 => genealogy_depth(s, dir),
        5 => tricolor_marginal(s, dir),
        6 => sandpile_quadrature(dir),
        7 => defect_decay(s, dir),
        8 => kernel_exactness(s, dir),
        9 => annulus_domination(s, dir),
        10 => large_render(s, dir),
        _ => return Err(Error::InvalidArgument(format!("no criterion {id} (use 1..=10; 11 is run_suite)"))),
    };
    let check = res.unwrap_or_else(|e| Check {
        passed: false,
        detail: format!("aborted: {e}"),
    });
    Ok(Outcome {
        id,
        name: name_of(id),
        passed: check.passed,
        detail: check.detail,
        seconds: t0.elapsed().as_secs_f64(),
    })
}

/// Runs the selected criteria; when 11 is among them, the selection (all of
/// 1..=10 if 11 stands alone) is run a second time into `dir/rerun` and
/// every CSV is compared by SHA-256.
/// `report` sees each outcome as soon as it is known.
pub fn run_suite<F: FnMut(&Outcome)>(ids: &[u8], seed: u64, dir: &Path, mut report: F) -> Result<Vec<Outcome>> {
    let first: Vec<u8> = ids.iter().copied().filter(|&i| i != 11).collect();
    let mut out = Vec::new();
    for &id in &first {
        let o = run_criterion(id, seed, dir)?;
        report(&o);
        out.push(o);
    }
    if ids.contains(&11) {
        let t0 = Instant::now();
        // 11 on its own compares two full runs
        let again: Vec<u8> = if first.is_empty() { (1..=10).collect() } else { first.clone() };
        if first.is_empty() {
            for &id in &again {
                run_criterion(id, seed, dir)?;
            }
        }
        let rerun = dir.join("rerun");
        for &id in &again {
            run_criterion(id, seed, &rerun)?;
        }
        let check = compare_csvs(dir, &rerun)?;
        let o = Outcome {
            id: 11,
            name: name_of(11),
            passed: check.passed,
            detail: check.detail,
            seconds: t0.elapsed().as_secs_f64(),
        };
        report(&o);
        out.push(o);
    }
    Ok(out)
}

pub fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    v.sort();
    Ok(v)
}

fn compare_csvs(a: &Path, b: &Path) -> Result<Check> {
    let fa = csv_files(a)?;
    let fb = csv_files(b)?;
    let names = |v: &[PathBuf]| v.iter().map(|p| p.file_name().unwrap().to_owned()).collect::<Vec<_>>();
    if names(&fa) != names(&fb) {
        return Ok(Check {
            passed: false,
            detail: "the two runs wrote different file sets".into(),
        });
    }
    let mut differing = Vec::new();
    let mut manifest = String::from("file,sha256\n");
    for (x, y) in fa.iter().zip(&fb) {
        let (hx, hy) = (sha256_file(x)?, sha256_file(y)?);
        let name = x.file_name().unwrap().to_string_lossy().into_owned();
        writeln!(manifest, "{name},{hx}").unwrap();
        if hx != hy {
            differing.push(name);
        }
    }
    // written after hashing so it is not part of the comparison
    write_atomic(&a.join("hashes.txt"), manifest.as_bytes())?;
    Ok(Check {
        passed: differing.is_empty() && !fa.is_empty(),
        detail: if differing.is_empty() {
            format!("{} CSV files hash-identical across two runs", fa.len())
        } else {
            format!("differing files: {}", differing.join(" "))
        },
    })
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

// 1: 2 M_4 against the 16 paths of a 4-step ±1 walk.
fn midpoint_law(seed: u64, dir: &Path) -> Result<Check> {
    const RUNS: u32 = 100_000;
    const K: u64 = 4;
    let walker = Walker::plain(d(1));
    let ends = try_map_replicas(RUNS, |r| -> Result<i64> {
        Ok(*uidla_1d_middle(K, &Streams::new(seed, r), &walker)?.doubled().last().unwrap())
    })?;
    let mut observed = vec![0u64; K as usize + 1];
    for e in ends {
        if e.unsigned_abs() > K || (e + K as i64) % 2 != 0 {
            return Err(Error::CouplingViolation(format!("2 M_4 = {e} is not a 4-step walk position")));
        }
        observed[((e + K as i64) / 2) as usize] += 1;
    }
    let expected: Vec<f64> = (0..=K).map(|j| binom(K, j) / 16.0).collect();
    let test = chi_square_gof(&observed, &expected);
    let mut csv = String::from("value,observed,expected_probability\n");
    for j in 0..=K as usize {
        writeln!(csv, "{},{},{}", 2 * j as i64 - K as i64, observed[j], fmt_sig9(expected[j])).unwrap();
    }
    save(dir, "c01_midpoint_law.csv", &csv)?;
    Ok(Check {
        passed: test.passes(ALPHA),
        detail: format!("chi2 = {:.3} on {} dof, p = {:.4} vs alpha {ALPHA}", test.statistic, test.dof, test.p_value),
    })
}

// 2: uIDLA at b_n, n = 25, 50, 100, ten seeds each.
fn shape_trend(seed: u64, dir: &Path) -> Result<Check> {
    const SEEDS: u32 = 10;
    let dim = d(2);
    let radii = [25.0, 50.0, 100.0];
    let walker = make_walker(dim, true, None, ball_volume(dim, 100.0)?)?;
    let mut raw = String::from("n,seed,particles,inradius,outradius\n");
    let mut summary = String::from("n,median_width_over_n,max_abs_out_over_n_minus_1,max_abs_1_minus_in_over_n\n");
    let mut medians = Vec::new();
    let mut last = (0.0, 0.0);
    for (i, &n) in radii.iter().enumerate() {
        let particles = ball_volume(dim, n)?;
        let runs = try_map_replicas(SEEDS, |r| -> Result<(f64, f64)> {
            let streams = Streams::new(seed, i as u32 * SEEDS + r);
            let (a, _) = uidla(Aggregate::from_points(dim, [LatticePoint::ORIGIN])?, particles - 1, &streams, &walker)?;
            Ok((a.inradius(), a.outradius()))
        })?;
        for (r, (rin, rout)) in runs.iter().enumerate() {
            writeln!(raw, "{n},{r},{particles},{},{}", fmt_sig9(*rin), fmt_sig9(*rout)).unwrap();
        }
        let widths: Vec<f64> = runs.iter().map(|(a, b)| (b - a) / n).collect();
        let out_err = runs.iter().map(|(_, b)| (b / n - 1.0).abs()).fold(0.0, f64::max);
        let in_err = runs.iter().map(|(a, _)| (1.0 - a / n).abs()).fold(0.0, f64::max);
        let m = median(&widths);
        writeln!(summary, "{n},{},{},{}", fmt_sig9(m), fmt_sig9(out_err), fmt_sig9(in_err)).unwrap();
        medians.push(m);
        last = (out_err, in_err);
    }
    save(dir, "c02_shape_runs.csv", &raw)?;
    save(dir, "c02_shape_summary.csv", &summary)?;
    let monotone = medians.windows(2).all(|w| w[1] <= w[0]);
    let close = last.0 < 0.15 && last.1 < 0.15;
    Ok(Check {
        passed: monotone && close,
        detail: format!(
            "median width/n = {:.4}, {:.4}, {:.4}; at n=100 worst |out/n-1| = {:.4}, |1-in/n| = {:.4}",
            medians[0], medians[1], medians[2], last.0, last.1
        ),
    })
}

// 3: E[X_t(k)] = t^k / k!.
fn yule_means(seed: u64, dir: &Path) -> Result<Check> {
    const REPS: u32 = 10_000;
    const KMAX: usize = 5;
    let times = [0.5, 1.0, 2.0];
    let streams = Streams::new(seed, 0);
    let counts = try_map_replicas(REPS, |r| -> Result<Vec<Vec<u64>>> {
        let tree = grow_yule(YuleStop::Time(2.0), &mut streams.aux(Purpose::Yule, r as u64))?;
        Ok(times
            .iter()
            .map(|&t| {
                let mut c = tree.level_counts(t);
                c.resize(KMAX + 1, 0);
                c.truncate(KMAX + 1);
                c
            })
            .collect())
    })?;
    let mut csv = String::from("t,k,mean,sigma,expected,z\n");
    let mut worst: f64 = 0.0;
    let nf = REPS as f64;
    for (ti, &t) in times.iter().enumerate() {
        for k in 0..=KMAX {
            let xs: Vec<f64> = counts.iter().map(|c| c[ti][k] as f64).collect();
            let mean = xs.iter().sum::<f64>() / nf;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
            // floor at the Poisson variance so an exactly constant level
            // (k = 0) does not give sigma = 0
            let sigma = (var.max(mean) / nf).sqrt();
            let expected = t.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
            let z = if sigma > 0.0 { (mean - expected).abs() / sigma } else { 0.0 };
            worst = worst.max(z);
            writeln!(
                csv,
                "{},{k},{},{},{},{}",
                fmt_sig9(t),
                fmt_sig9(mean),
                fmt_sig9(sigma),
                fmt_sig9(expected),
                fmt_sig9(z)
            )
            .unwrap();
        }
    }
    save(dir, "c03_yule_means.csv", &csv)?;
    Ok(Check {
        passed: worst <= 4.0,
        detail: format!("worst |mean - t^k/k!| = {worst:.2} sigma over 18 cells"),
    })
}

// 4: max reaching time against ln² n.
fn genealogy_depth(seed: u64, dir: &Path) -> Result<Check> {
    const SEEDS: u32 = 20;
    let dim = d(2);
    let sizes = [100u64, 1_000, 10_000];
    let walker = make_walker(dim, true, None, 10_000)?;
    let mut raw = String::from("n,seed,max_depth,max_reaching_time,ratio_to_ln2_n\n");
    let mut summary = String::from("n,median_ratio,max_ratio\n");
    let mut medians = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        let l2 = (n as f64).ln().powi(2);
        let runs = try_map_replicas(SEEDS, |r| -> Result<(u32, u64)> {
            let streams = Streams::new(seed, i as u32 * SEEDS + r);
            let (_, mut forest) = uidla(Aggregate::from_points(dim, [LatticePoint::ORIGIN])?, n - 1, &streams, &walker)?;
            forest.assign_edge_weights(GeomConvention::ParameterHalf, &mut streams.aux(Purpose::EdgeWeights, 0))?;
            Ok((forest.max_depth(), forest.max_reaching_time()?))
        })?;
        let ratios: Vec<f64> = runs.iter().map(|r| r.1 as f64 / l2).collect();
        for (r, ((depth, t), q)) in runs.iter().zip(&ratios).enumerate() {
            writeln!(raw, "{n},{r},{depth},{t},{}", fmt_sig9(*q)).unwrap();
        }
        let m = median(&ratios);
        writeln!(summary, "{n},{},{}", fmt_sig9(m), fmt_sig9(ratios.iter().cloned().fold(0.0, f64::max))).unwrap();
        medians.push(m);
    }
    save(dir, "c04_reaching_runs.csv", &raw)?;
    save(dir, "c04_reaching_summary.csv", &summary)?;
    Ok(Check {
        passed: medians.iter().all(|&m| m <= REACHING_TIME_C),
        detail: format!(
            "median max/ln^2 n = {:.3}, {:.3}, {:.3} for n = 1e2, 1e3, 1e4 (bound {REACHING_TIME_C})",
            medians[0], medians[1], medians[2]
        ),
    })
}

fn set_key(a: &Aggregate) -> Vec<i32> {
    let mut v: Vec<i32> = a.sites().iter().map(|p| p.0[0]).collect();
    v.sort_unstable();
    v
}

// 5: blue part of the tricolor coupling on E = {0} ⊂ F = {-1, 0}.
fn tricolor_marginal(seed: u64, dir: &Path) -> Result<Check> {
    const RUNS: u32 = 100_000;
    let dim = d(1);
    let walker = Walker::plain(dim);
    let set = |xs: &[i32]| Aggregate::from_points(dim, xs.iter().map(|&x| LatticePoint::new(&[x])));
    let (e, f) = (set(&[0])?, set(&[-1, 0])?);
    let laws: [(&[i32], f64); 3] = [(&[0], 0.5), (&[0, 1], 0.25), (&[-1, 0], 0.25)];
    let bin = |k: Vec<i32>| laws.iter().position(|(s, _)| *s == k.as_slice()).unwrap_or(laws.len());
    let blue = try_map_replicas(RUNS, |r| -> Result<usize> {
        Ok(bin(set_key(&tricolor_run(&e, &f, 1, &Streams::new(seed, r), &walker)?.blue)))
    })?;
    let sub_streams = Streams::new(seed, 0).fork(1);
    let subset = try_map_replicas(RUNS, |r| -> Result<usize> {
        Ok(bin(set_key(&subset_uidla(e.clone(), 2, 1, &Streams::new(sub_streams.seed, r), &walker)?)))
    })?;
    let tally = |v: &[usize]| {
        let mut c = vec![0u64; laws.len() + 1];
        v.iter().for_each(|&i| c[i] += 1);
        c
    };
    let (cb, cs) = (tally(&blue), tally(&subset));
    let mut csv = String::from("blue_set,tricolor_count,subset_count,exact_probability,z\n");
    let mut worst: f64 = 0.0;
    for (i, (s, p)) in laws.iter().enumerate() {
        let sigma = (p * (1.0 - p) / RUNS as f64).sqrt();
        let z = (cb[i] as f64 / RUNS as f64 - p).abs() / sigma;
        worst = worst.max(z);
        let name: Vec<String> = s.iter().map(|x| x.to_string()).collect();
        writeln!(csv, "{{{}}},{},{},{},{}", name.join(" "), cb[i], cs[i], fmt_sig9(*p), fmt_sig9(z)).unwrap();
    }
    writeln!(csv, "other,{},{},0,", cb[3], cs[3]).unwrap();
    save(dir, "c05_tricolor_law.csv", &csv)?;
    let two = chi_square_two_sample(&cb, &cs);
    Ok(Check {
        passed: worst <= 4.0 && cb[3] == 0 && two.passes(ALPHA),
        detail: format!("worst deviation {worst:.2} sigma; against the subset process p = {:.4}", two.p_value),
    })
}

// 6: divisible sandpile mean-value identity.
fn sandpile_quadrature(dir: &Path) -> Result<Check> {
    type Harmonic = fn(&LatticePoint) -> f64;
    let hs: [(&str, Harmonic); 3] = [
        ("x", |p| p.0[0] as f64),
        ("x2_minus_y2", |p| (p.0[0] as f64).powi(2) - (p.0[1] as f64).powi(2)),
        ("xy", |p| p.0[0] as f64 * p.0[1] as f64),
    ];
    let mut csv = String::from("mass,h,residual,bound,inradius,outradius,width\n");
    let mut ok = true;
    let mut worst_res: f64 = 0.0;
    let mut worst_width: f64 = 0.0;
    for m in [10.0, 100.0, 1000.0] {
        let s = sandpile_relax(d(2), m, SANDPILE_TOLERANCE)?;
        let (rin, rout) = s.support_radii(SANDPILE_TOLERANCE)?;
        let width = rout - rin;
        worst_width = worst_width.max(width);
        ok &= width <= 4.0;
        for (name, h) in hs {
            // each h vanishes at the origin, so M h(0) = 0
            let res = (s.quadrature(h) - m * h(&LatticePoint::ORIGIN)).abs();
            worst_res = worst_res.max(res / m);
            ok &= res <= 1e-6 * m;
            writeln!(
                csv,
                "{},{name},{},{},{},{},{}",
                fmt_sig9(m),
                fmt_sig9(res),
                fmt_sig9(1e-6 * m),
                fmt_sig9(rin),
                fmt_sig9(rout),
                fmt_sig9(width)
            )
            .unwrap();
        }
    }
    save(dir, "c06_sandpile.csv", &csv)?;
    Ok(Check {
        passed: ok,
        detail: format!("worst residual/M = {worst_res:.2e}, widest support annulus {worst_width:.3}"),
    })
}

/// Walks per start point for the Monte Carlo averaging defect.
pub const DEFECT_SAMPLES: u64 = 2_000_000;

// 7: n times the averaging defect over n = 4..12.
fn defect_decay(seed: u64, dir: &Path) -> Result<Check> {
    let dim = d(2);
    let walker = Walker::new(dim, true)?;
    let radii = [4.0, 6.0, 8.0, 10.0, 12.0];
    let mut csv = String::from("n,samples,defect_mc,n_defect_mc,defect_exact,n_defect_exact\n");
    let (mut mc, mut ex) = (Vec::new(), Vec::new());
    for (i, &n) in radii.iter().enumerate() {
        let est = averaging_defect(dim, n, DEFECT_SAMPLES, &Streams::new(seed, i as u32), &walker)?;
        let exact = averaging_defect_exact(dim, n)?;
        writeln!(
            csv,
            "{n},{DEFECT_SAMPLES},{},{},{},{}",
            fmt_sig9(est),
            fmt_sig9(n * est),
            fmt_sig9(exact),
            fmt_sig9(n * exact)
        )
        .unwrap();
        mc.push(n * est);
        ex.push(n * exact);
    }
    save(dir, "c07_averaging_defect.csv", &csv)?;
    let spread = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
    let (rm, re) = (spread(&mc), spread(&ex));
    Ok(Check {
        passed: rm < 3.0,
        detail: format!("max/min of n*defect = {rm:.3} (Monte Carlo), {re:.3} (exact)"),
    })
}

// 8: kernel walks against plain walks, and kernel tables against CG.
fn kernel_exactness(seed: u64, dir: &Path) -> Result<Check> {
    const WALKS: u32 = 100_000;
    let dim = d(2);
    let ball = Aggregate::ball(dim, 5.0)?;
    let plain = Walker::plain(dim);
    let accel = Walker::new(dim, true)?;
    let exits = |w: &Walker, s: u64| -> Result<BTreeMap<LatticePoint, u64>> {
        let all = try_map_replicas(WALKS, |r| -> Result<LatticePoint> {
            Ok(w.walk_until_exit(LatticePoint::ORIGIN, &ball, &mut Streams::new(s, r).particle(0))?.exit)
        })?;
        let mut m = BTreeMap::new();
        for p in all {
            *m.entry(p).or_insert(0) += 1;
        }
        Ok(m)
    };
    let a = exits(&plain, seed)?;
    let b = exits(&accel, Streams::new(seed, 0).fork(8).seed)?;
    let mut keys: Vec<LatticePoint> = a.keys().chain(b.keys()).copied().collect();
    keys.sort();
    keys.dedup();
    let ca: Vec<u64> = keys.iter().map(|k| a.get(k).copied().unwrap_or(0)).collect();
    let cb: Vec<u64> = keys.iter().map(|k| b.get(k).copied().unwrap_or(0)).collect();
    let test = chi_square_two_sample(&ca, &cb);
    let mut csv = String::from("x,y,plain_count,accelerated_count\n");
    for (k, (x, y)) in keys.iter().zip(ca.iter().zip(&cb)) {
        writeln!(csv, "{},{},{x},{y}", k.0[0], k.0[1]).unwrap();
    }
    save(dir, "c08_exit_counts.csv", &csv)?;

    let mut table = String::from("dim,radius,starts,exits,max_abs_diff\n");
    let mut worst: f64 = 0.0;
    for dn in 1..=3 {
        for r in 1..=3u32 {
            let dim = d(dn);
            let kernel = ExitKernel::build(dim, r)?;
            let problem = ExitProblem::new(dim, kernel.starts())?;
            let mut diff: f64 = 0.0;
            for x in kernel.starts() {
                let h = match problem.exit_distribution(x)? {
                    ExitDistribution::Spread(h) => h,
                    ExitDistribution::Immediate(_) => unreachable!("kernel starts are interior"),
                };
                for (y, hy) in problem.exits().iter().zip(&h) {
                    diff = diff.max((kernel.probability(x, y) - hy).abs());
                }
            }
            worst = worst.max(diff);
            writeln!(table, "{dn},{r},{},{},{:.3e}", kernel.starts().len(), kernel.exits().len(), diff).unwrap();
        }
    }
    save(dir, "c08_kernel_vs_cg.csv", &table)?;
    Ok(Check {
        passed: test.passes(ALPHA) && worst <= 1e-10,
        detail: format!(
            "two-sample chi2 p = {:.4} over {} exits; kernel vs CG max diff {worst:.2e}",
            test.p_value,
            keys.len()
        ),
    })
}

// 9: deepest crossed annulus against Geometric(1/2).
fn annulus_domination(seed: u64, dir: &Path) -> Result<Check> {
    const WALKS: u64 = 100_000;
    let dim = d(2);
    let spec = AnnulusSpec::new(30.0, 10.0, 6)?;
    let streams = Streams::new(seed, 0);
    let s = random_annulus_fill(dim, &spec, 0.05, &mut streams.aux(Purpose::Sampling, 0))?;
    let starts = Aggregate::ball(dim, spec.m)?.sites().to_vec();
    let report = annulus_crossing_probe(&s, &spec, &starts, WALKS, &streams, &Walker::new(dim, true)?)?;
    let mut csv = String::from("j,tail,geometric_tail,sigma\n");
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    for j in 1..=5 {
        let g = 0.5f64.powi(j);
        let sigma = (g * (1.0 - g) / WALKS as f64).sqrt();
        let t = report.tail(j as usize);
        ok &= t <= g + 4.0 * sigma;
        worst = worst.max((t - g) / sigma);
        writeln!(csv, "{j},{},{},{}", fmt_sig9(t), fmt_sig9(g), fmt_sig9(sigma)).unwrap();
    }
    save(dir, "c09_annulus_tail.csv", &csv)?;
    Ok(Check {
        passed: ok,
        detail: format!("P(N >= 1) = {:.4}; largest excess over 2^-j is {worst:.1} sigma", report.tail(1)),
    })
}

/// Particle count for criterion 10.
pub const RENDER_PARTICLES: u64 = 1_000_000;

// 10: render the 10^6-particle aggregate and inspect the picture.
fn large_render(seed: u64, dir: &Path) -> Result<Check> {
    let dim = d(2);
    let walker = make_walker(dim, true, None, RENDER_PARTICLES)?;
    let (a, _) = uidla(
        Aggregate::from_points(dim, [LatticePoint::ORIGIN])?,
        RENDER_PARTICLES - 1,
        &Streams::new(seed, 0),
        &walker,
    )?;
    let path = dir.join("c10_render.ppm");
    let spec = RenderSpec::fit(&a)?;
    let stats = render_symdiff(&a, &path, spec)?;
    let img = read_p6(&std::fs::read(&path)?)?;
    let r_eq = (volume_equivalent_norm2(dim, a.len() as u64)? as f64).sqrt();
    let (cx, cy) = (img.width / 2, img.height / 2);

    let (mut fmin, mut fmax) = (f64::INFINITY, 0.0f64);
    for row in 0..img.height {
        for col in 0..img.width {
            let c = img.get(col, row);
            if c == BLUE || c == RED {
                let r = ((col as f64 - cx as f64).powi(2) + (row as f64 - cy as f64).powi(2)).sqrt();
                fmin = fmin.min(r);
                fmax = fmax.max(r);
            }
        }
    }
    // flood-fill the white pixels from the centre
    let mut seen = vec![false; img.pixels.len()];
    let mut queue = VecDeque::from([(cx, cy)]);
    let mut reached = 0u64;
    if img.get(cx, cy) == WHITE {
        seen[(cy * img.width + cx) as usize] = true;
    } else {
        queue.clear();
    }
    while let Some((c, r)) = queue.pop_front() {
        reached += 1;
        let nbrs = [(c.wrapping_sub(1), r), (c + 1, r), (c, r.wrapping_sub(1)), (c, r + 1)];
        for (nc, nr) in nbrs {
            if nc < img.width && nr < img.height {
                let i = (nr * img.width + nc) as usize;
                if !seen[i] && img.pixels[i] == WHITE {
                    seen[i] = true;
                    queue.push_back((nc, nr));
                }
            }
        }
    }
    let connected = reached == stats.white && reached > 0;
    let in_window = fmin >= 0.9 * r_eq && fmax <= 1.1 * r_eq;
    let csv = format!(
        "n_sites,radius_equiv,inradius,outradius,width,height,blue,red,white,white_reached,fringe_min_radius,fringe_max_radius\n{},{},{},{},{},{},{},{},{},{},{},{}\n",
        a.len(),
        fmt_sig9(r_eq),
        fmt_sig9(a.inradius()),
        fmt_sig9(a.outradius()),
        img.width,
        img.height,
        stats.blue,
        stats.red,
        stats.white,
        reached,
        fmt_sig9(fmin),
        fmt_sig9(fmax)
    );
    save(dir, "c10_render.csv", &csv)?;
    Ok(Check {
        passed: connected && in_window && img.width == spec.width,
        detail: format!(
            "{}x{} P6, white disk {} ({} px), fringe radii {:.1}..{:.1} vs window {:.1}..{:.1}",
            img.width,
            img.height,
            if connected { "connected" } else { "NOT connected" },
            stats.white,
            fmin,
            fmax,
            0.9 * r_eq,
            1.1 * r_eq
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_comparison_spots_a_changed_file() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for dir in [a.path(), b.path()] {
            save(dir, "x.csv", "a,b\n1,2\n").unwrap();
            save(dir, "y.csv", "c\n3\n").unwrap();
        }
        save(a.path(), "ignored.ppm", "P6").unwrap();
        assert!(compare_csvs(a.path(), b.path()).unwrap().passed);
        let manifest = std::fs::read_to_string(a.path().join("hashes.txt")).unwrap();
        assert_eq!(manifest.lines().count(), 3);

        save(b.path(), "y.csv", "c\n4\n").unwrap();
        let c = compare_csvs(a.path(), b.path()).unwrap();
        assert!(!c.passed);
        assert!(c.detail.contains("y.csv"));

        save(b.path(), "z.csv", "").unwrap();
        assert!(!compare_csvs(a.path(), b.path()).unwrap().passed);
    }

    #[test]
    fn criterion_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (1..=10).map(|i| criterion_seed(42, i)).collect();
        assert_eq!(seeds.len(), 10);
        assert_eq!(criterion_seed(42, 3), criterion_seed(42, 3));
    }

    #[test]
    fn quick_criteria_pass_and_unknown_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        for id in [1, 6] {
            let o = run_criterion(id, 42, dir.path()).unwrap();
            assert!(o.passed, "{}", o.line());
        }
        assert!(run_criterion(11, 42, dir.path()).is_err());
        assert!(run_criterion(0, 42, dir.path()).is_err());
    }
}
