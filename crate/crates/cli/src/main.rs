use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use uidla_core::acceptance::{self, CRITERIA};
use uidla_core::analysis::{annulus_crossing_probe, fluctuation_scaling, shape_report, write_fluctuation_csv, AnnulusSpec};
use uidla_core::couplings::{
    averaging_defect, averaging_defect_exact, coupled_domination_run, estimate_harmonic_measure, exact_harmonic_measure, harnack_ratio_exact,
    harnack_ratio_scan, sandpile_relax, tricolor_run, Color, SANDPILE_TOLERANCE,
};
use uidla_core::genealogy::{grow_yule, GeomConvention, YuleStop};
use uidla_core::harness::{make_walker, render_symdiff, run_experiment, write_atomic, AnnulusConfig, Budget, ExperimentConfig, RenderSpec};
use uidla_core::lattice::{read_snapshot, Aggregate, Dim, LatticePoint};
use uidla_core::par::try_map_replicas;
use uidla_core::processes::{uidla, MultisetOfStarts, ProcessKind};
use uidla_core::rng::{Purpose, Streams};
use uidla_core::stats::fmt_sig9;
use uidla_core::walk::Walker;
use uidla_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

const ABOUT: &str = "Internal DLA with uniform starting points: simulation, couplings, estimators and analysis.

Exit codes: 0 success, 2 configuration error, 3 runtime abort (including failed selftest criteria).
Floats in every CSV carry 9 significant digits.";

#[derive(Parser)]
#[command(name = "uidla", version, about = ABOUT)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Grow aggregates from the origin.
    #[command(after_help = "\
Files in --out-dir:
  config.txt          canonical key = value configuration
  summary.csv         replica,n_sites,ball_radius_equiv,ball_sites,inradius,outradius,symdiff_count,max_reaching_time
  stats_r<R>.csv      step,n_sites,inradius,outradius
  snapshot_r<R>.txt   'd=<d> n_sites=<k>' header, then one site per line
  forest_r<R>.csv     index,parent_index,site_coords,edge_weight,depth,reaching_time
  crossing_r<R>.csv   annulus,crossing_frequency,tail,geometric_half_tail
--stats-out and --snapshot-out receive copies of replica 0's files.")]
    Simulate(SimulateArgs),
    /// Run a coupling and report one CSV row per replica.
    #[command(after_help = "\
CSV for --scheme killed:   replica,e_sites,f_sites,kappa,f_subset_of_e
CSV for --scheme tricolor: replica,blue_sites,red_blue_sites,total_sites,black_sites,blue_set")]
    Couple(CoupleArgs),
    /// Harmonic measure, Harnack ratio, averaging defect or sandpile estimates.
    #[command(after_help = "\
CSV for --what harmonic: exit,count,estimate,std_error,exact
CSV for --what harnack:  replica,n,ratio,argmin_start,argmin_exit,excluded_exits,exact_ratio
CSV for --what defect:   replica,n,samples,defect_mc,defect_exact
CSV for --what sandpile: mass,sweeps,total_mass,full_inradius,support_outradius,residual_x1,residual_x1sq_minus_x2sq,residual_x1x2
Points are printed as space-separated coordinates.")]
    Estimate(EstimateArgs),
    /// Genealogical forest of a uIDLA run, or Yule tree level counts.
    #[command(after_help = "\
CSV for --what forest: index,parent_index,site_coords,edge_weight,depth,reaching_time
CSV for --what yule:   t,k,mean,expected")]
    Genealogy(GenealogyArgs),
    /// Shape, fluctuation or annulus-crossing analysis.
    #[command(after_help = "\
CSV for --what shape:       n_sites,ball_radius_equiv,ball_sites,inradius,outradius,symdiff_count
  with --shells-out:        shell,occupied,lattice_points,fraction
CSV for --what fluctuation: n,particles,replicas,mean_out_minus_n,sd_out_minus_n,mean_n_minus_in,sd_n_minus_in
                            (sd is 'undefined' with one replica)
CSV for --what crossing:    annulus,crossing_frequency,tail,geometric_half_tail")]
    Analyze(AnalyzeArgs),
    /// Draw A Δ B as a binary PPM (blue: A only, red: ball only, white: both).
    Render(RenderArgs),
    /// Run the acceptance suite.
    #[command(after_help = "\
Each criterion writes cNN_*.csv files into --out. With criterion 11 selected, the suite runs a
second time into <out>/rerun and <out>/hashes.txt lists the SHA-256 of each CSV (file,sha256).
One line per criterion is printed: 'criterion N [PASS|FAIL] name: detail (seconds)'.")]
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// key = value configuration file; flags given here override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    process: Option<ProcessKind>,
    #[arg(long)]
    dim: Option<usize>,
    /// final site count (tick count for subset)
    #[arg(long, conflicts_with = "radius")]
    particles: Option<u64>,
    /// grow to b_n sites, the lattice volume of B[n]
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<u32>,
    #[arg(long)]
    accel: Option<OnOff>,
    /// largest kernel radius; default picks one from the run size
    #[arg(long)]
    kernel_radius: Option<u32>,
    /// host size m for the subset process
    #[arg(long)]
    host_size: Option<u64>,
    #[arg(long)]
    stats_every: Option<u64>,
    #[arg(long)]
    geom_convention: Option<GeomConvention>,
    /// also write forest_r<R>.csv (uidla only)
    #[arg(long)]
    forest: bool,
    /// crossing probe on each final aggregate: m,width,count,walks
    #[arg(long)]
    annulus: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    snapshot_out: Option<PathBuf>,
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scheme {
    Killed,
    Tricolor,
}

#[derive(Args)]
struct CoupleArgs {
    #[arg(long)]
    scheme: Scheme,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// killed: radius n of B[n]; tricolor: radius of F
    #[arg(long, default_value_t = 6.0)]
    radius: f64,
    /// tricolor: radius of E (E ⊆ F)
    #[arg(long, default_value_t = 3.0)]
    inner_radius: f64,
    /// killed: starting point, comma separated
    #[arg(long, default_value = "0")]
    start: String,
    /// number of particles
    #[arg(long, default_value_t = 100)]
    particles: u64,
    #[arg(long, default_value_t = 0.3)]
    eta: f64,
    #[arg(long, default_value_t = 1)]
    replicas: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Estimate {
    Harmonic,
    Harnack,
    Defect,
    Sandpile,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    what: Estimate,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// domain B[n]
    #[arg(long, default_value_t = 6.0)]
    radius: f64,
    /// harmonic: start point, comma separated
    #[arg(long, default_value = "0")]
    start: String,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// harnack: exits seen fewer times than this from 0 are dropped
    #[arg(long, default_value_t = 100)]
    min_count: u64,
    /// sandpile: comma-separated masses
    #[arg(long, default_value = "10,100,1000")]
    mass: String,
    #[arg(long, default_value_t = 1)]
    replicas: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenealogyWhat {
    Forest,
    Yule,
}

#[derive(Args)]
struct GenealogyArgs {
    #[arg(long, default_value = "forest")]
    what: GenealogyWhat,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1000)]
    particles: u64,
    #[arg(long, default_value = "parameter-half")]
    geom_convention: GeomConvention,
    /// yule: comma-separated times
    #[arg(long, default_value = "0.5,1,2")]
    time: String,
    /// yule: deepest level reported
    #[arg(long, default_value_t = 5)]
    max_level: usize,
    #[arg(long, default_value_t = 1000)]
    replicas: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AnalyzeWhat {
    Shape,
    Fluctuation,
    Crossing,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    what: AnalyzeWhat,
    /// shape, crossing: aggregate snapshot
    #[arg(long)]
    snapshot: Option<PathBuf>,
    #[arg(long)]
    shells_out: Option<PathBuf>,
    /// fluctuation
    #[arg(long, default_value = "uidla")]
    process: ProcessKind,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// fluctuation: comma-separated radii
    #[arg(long, default_value = "10,20,40")]
    radii: String,
    #[arg(long, default_value_t = 4)]
    replicas: u32,
    /// crossing: inner radius m
    #[arg(long, default_value_t = 30.0)]
    m: f64,
    #[arg(long, default_value_t = 10.0)]
    width: f64,
    #[arg(long, default_value_t = 6)]
    count: usize,
    #[arg(long, default_value_t = 10_000)]
    walks: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// d = 2 aggregate snapshot
    #[arg(long)]
    snapshot: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// image size; default fits the aggregate and the ball
    #[arg(long, requires = "height")]
    width: Option<u32>,
    #[arg(long, requires = "width")]
    height: Option<u32>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "selftest-out")]
    out: PathBuf,
    /// comma-separated criterion numbers; default runs all eleven
    #[arg(long)]
    only: Option<String>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn dim(d: usize) -> CliResult<Dim> {
    Ok(Dim::new(d)?)
}

fn parse_list<T: std::str::FromStr>(what: &str, s: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| config_err(format!("--{what}: cannot parse {x:?}"))))
        .collect()
}

fn parse_point(d: Dim, s: &str) -> CliResult<LatticePoint> {
    let mut c: Vec<i32> = parse_list("start", s)?;
    if c.len() == 1 && c[0] == 0 {
        c = vec![0; d.get()];
    }
    if c.len() != d.get() {
        return Err(config_err(format!("--start needs {} coordinates, got {}", d.get(), c.len())));
    }
    Ok(LatticePoint::new(&c))
}

fn coords(p: &LatticePoint, d: Dim) -> String {
    p.coords(d).iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult {
    match out {
        Some(p) => Ok(write_atomic(p, text.as_bytes())?),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_snapshot(path: &Path) -> CliResult<Aggregate> {
    let f = std::fs::File::open(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    Ok(read_snapshot(std::io::BufReader::new(f))?)
}

fn simulate(a: SimulateArgs) -> CliResult {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = a.process {
        cfg.process = v;
    }
    if let Some(v) = a.dim {
        cfg.dim = dim(v)?;
    }
    if let Some(v) = a.particles {
        cfg.budget = Budget::Particles(v);
    }
    if let Some(v) = a.radius {
        cfg.budget = Budget::Radius(v);
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.replicas {
        cfg.replicas = v;
    }
    if let Some(v) = a.accel {
        cfg.accel = v == OnOff::On;
    }
    if a.kernel_radius.is_some() {
        cfg.kernel_radius = a.kernel_radius;
    }
    if let Some(v) = a.host_size {
        cfg.host_size = v;
    }
    if let Some(v) = a.stats_every {
        cfg.stats_every = v;
    }
    if let Some(v) = a.geom_convention {
        cfg.geom_convention = v;
    }
    if let Some(v) = a.out_dir {
        cfg.output_dir = v;
    }
    if let Some(v) = &a.annulus {
        let f: Vec<f64> = parse_list("annulus", v)?;
        let [m, width, count, walks] = f[..] else {
            return Err(config_err("--annulus needs m,width,count,walks"));
        };
        cfg.annulus = Some(AnnulusConfig {
            m,
            width,
            count: count as usize,
            walks: walks as u64,
        });
    }
    cfg.forest |= a.forest;
    cfg.snapshot |= a.snapshot_out.is_some();
    cfg.validate()?;
    let summary = run_experiment(&cfg)?;
    if let Some(p) = &a.stats_out {
        std::fs::copy(cfg.output_dir.join("stats_r0.csv"), p)?;
    }
    if let Some(p) = &a.snapshot_out {
        std::fs::copy(cfg.output_dir.join("snapshot_r0.txt"), p)?;
    }
    print!("{}", summary.csv());
    Ok(())
}

fn couple(a: CoupleArgs) -> CliResult {
    let d = dim(a.dim)?;
    let walker = Walker::new(d, true)?;
    let text = match a.scheme {
        Scheme::Killed => {
            let x = parse_point(d, &a.start)?;
            let starts = MultisetOfStarts(vec![x; a.particles as usize]);
            let rows = try_map_replicas(a.replicas, |r| {
                coupled_domination_run(d, a.radius, &starts, a.eta, &Streams::new(a.seed, r), &walker)
            })?;
            let mut s = String::from("replica,e_sites,f_sites,kappa,f_subset_of_e\n");
            for (r, o) in rows.iter().enumerate() {
                s += &format!("{r},{},{},{},{}\n", o.e.len(), o.f.len(), o.kappa, o.f.is_subset_of(&o.e));
            }
            s
        }
        Scheme::Tricolor => {
            if a.inner_radius > a.radius {
                return Err(config_err("--inner-radius must not exceed --radius"));
            }
            let e = Aggregate::ball(d, a.inner_radius)?;
            let f = Aggregate::ball(d, a.radius)?;
            let rows = try_map_replicas(a.replicas, |r| tricolor_run(&e, &f, a.particles, &Streams::new(a.seed, r), &walker))?;
            let mut s = String::from("replica,blue_sites,red_blue_sites,total_sites,black_sites,blue_set\n");
            for (r, o) in rows.iter().enumerate() {
                let blue = if o.blue.len() <= 16 {
                    let mut v: Vec<String> = o.blue.sites().iter().map(|p| coords(p, d)).collect();
                    v.sort();
                    v.join(";")
                } else {
                    String::new()
                };
                s += &format!(
                    "{r},{},{},{},{},{blue}\n",
                    o.blue.len(),
                    o.red_blue.len(),
                    o.state.aggregate().len(),
                    o.state.count(Color::Black)
                );
            }
            s
        }
    };
    emit(&a.out, &text)
}

fn estimate(a: EstimateArgs) -> CliResult {
    let d = dim(a.dim)?;
    let walker = Walker::new(d, true)?;
    let text = match a.what {
        Estimate::Harmonic => {
            let ball = Aggregate::ball(d, a.radius)?;
            let x = parse_point(d, &a.start)?;
            let est = estimate_harmonic_measure(&ball, x, a.samples, &Streams::new(a.seed, 0), &walker)?;
            // exact values are cheap for small balls only
            let exact = if ball.len() <= 20_000 {
                Some(exact_harmonic_measure(&ball, x)?)
            } else {
                None
            };
            let mut s = String::from("exit,count,estimate,std_error,exact\n");
            let mut exits: Vec<LatticePoint> = est.counts.keys().copied().collect();
            if let Some(ex) = &exact {
                exits.extend(ex.iter().map(|e| e.0));
                exits.sort();
                exits.dedup();
            }
            for y in exits {
                let e = exact
                    .as_ref()
                    .and_then(|ex| ex.iter().find(|v| v.0 == y))
                    .map(|v| fmt_sig9(v.1))
                    .unwrap_or_default();
                s += &format!(
                    "{},{},{},{},{e}\n",
                    coords(&y, d),
                    est.counts.get(&y).copied().unwrap_or(0),
                    fmt_sig9(est.estimate(&y)),
                    fmt_sig9(est.std_error(&y))
                );
            }
            s
        }
        Estimate::Harnack => {
            let exact = harnack_ratio_exact(d, a.radius)?;
            let rows = try_map_replicas(a.replicas, |r| {
                harnack_ratio_scan(d, a.radius, a.samples, a.min_count, &Streams::new(a.seed, r), &walker)
            })?;
            let mut s = String::from("replica,n,ratio,argmin_start,argmin_exit,excluded_exits,exact_ratio\n");
            for (r, h) in rows.iter().enumerate() {
                s += &format!(
                    "{r},{},{},{},{},{},{}\n",
                    fmt_sig9(a.radius),
                    fmt_sig9(h.ratio),
                    coords(&h.argmin.0, d),
                    coords(&h.argmin.1, d),
                    h.excluded.len(),
                    fmt_sig9(exact)
                );
            }
            s
        }
        Estimate::Defect => {
            let exact = averaging_defect_exact(d, a.radius)?;
            let rows = try_map_replicas(a.replicas, |r| averaging_defect(d, a.radius, a.samples, &Streams::new(a.seed, r), &walker))?;
            let mut s = String::from("replica,n,samples,defect_mc,defect_exact\n");
            for (r, v) in rows.iter().enumerate() {
                s += &format!("{r},{},{},{},{}\n", fmt_sig9(a.radius), a.samples, fmt_sig9(*v), fmt_sig9(exact));
            }
            s
        }
        Estimate::Sandpile => {
            let masses: Vec<f64> = parse_list("mass", &a.mass)?;
            let mut s = String::from("mass,sweeps,total_mass,full_inradius,support_outradius,residual_x1,residual_x1sq_minus_x2sq,residual_x1x2\n");
            for m in masses {
                let st = sandpile_relax(d, m, SANDPILE_TOLERANCE)?;
                let (rin, rout) = st.support_radii(SANDPILE_TOLERANCE)?;
                let r1 = st.quadrature(|p| p.0[0] as f64);
                let (r2, r3) = if d.get() >= 2 {
                    (
                        fmt_sig9(st.quadrature(|p| (p.0[0] as f64).powi(2) - (p.0[1] as f64).powi(2))),
                        fmt_sig9(st.quadrature(|p| p.0[0] as f64 * p.0[1] as f64)),
                    )
                } else {
                    (String::new(), String::new())
                };
                s += &format!(
                    "{},{},{},{},{},{},{r2},{r3}\n",
                    fmt_sig9(m),
                    st.sweeps(),
                    fmt_sig9(st.total_mass()),
                    fmt_sig9(rin),
                    fmt_sig9(rout),
                    fmt_sig9(r1)
                );
            }
            s
        }
    };
    emit(&a.out, &text)
}

fn genealogy(a: GenealogyArgs) -> CliResult {
    match a.what {
        GenealogyWhat::Forest => {
            let d = dim(a.dim)?;
            if a.particles == 0 {
                return Err(config_err("--particles must be >= 1"));
            }
            let walker = make_walker(d, true, None, a.particles)?;
            let streams = Streams::new(a.seed, 0);
            let (agg, mut forest) = uidla(Aggregate::from_points(d, [LatticePoint::ORIGIN])?, a.particles - 1, &streams, &walker)?;
            forest.assign_edge_weights(a.geom_convention, &mut streams.aux(Purpose::EdgeWeights, 0))?;
            let mut buf = Vec::new();
            forest.write_csv(&agg, &mut buf)?;
            emit(&a.out, &String::from_utf8_lossy(&buf))
        }
        GenealogyWhat::Yule => {
            let times: Vec<f64> = parse_list("time", &a.time)?;
            if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
                return Err(config_err("--time values must be finite and >= 0"));
            }
            if a.replicas == 0 {
                return Err(config_err("--replicas must be >= 1"));
            }
            let horizon = times.iter().cloned().fold(0.0, f64::max);
            let streams = Streams::new(a.seed, 0);
            let trees = try_map_replicas(a.replicas, |r| grow_yule(YuleStop::Time(horizon), &mut streams.aux(Purpose::Yule, r as u64)))?;
            let mut s = String::from("t,k,mean,expected\n");
            for &t in &times {
                let mut sums = vec![0u64; a.max_level + 1];
                for tree in &trees {
                    for (k, c) in tree.level_counts(t).iter().enumerate().take(a.max_level + 1) {
                        sums[k] += c;
                    }
                }
                let mut fact = 1.0;
                for (k, total) in sums.iter().enumerate() {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    s += &format!(
                        "{},{k},{},{}\n",
                        fmt_sig9(t),
                        fmt_sig9(*total as f64 / a.replicas as f64),
                        fmt_sig9(t.powi(k as i32) / fact)
                    );
                }
            }
            emit(&a.out, &s)
        }
    }
}

fn analyze(a: AnalyzeArgs) -> CliResult {
    let need_snapshot = || {
        a.snapshot
            .as_deref()
            .ok_or_else(|| config_err("--snapshot is required"))
            .and_then(load_snapshot)
    };
    match a.what {
        AnalyzeWhat::Shape => {
            let agg = need_snapshot()?;
            let rep = shape_report(&agg)?;
            if let Some(p) = &a.shells_out {
                let mut buf = Vec::new();
                rep.write_shells(&mut buf)?;
                write_atomic(p, &buf)?;
            }
            emit(&a.out, &format!("{}\n{}\n", uidla_core::analysis::ShapeReport::CSV_HEADER, rep.csv_row()))
        }
        AnalyzeWhat::Fluctuation => {
            let d = dim(a.dim)?;
            let radii: Vec<f64> = parse_list("radii", &a.radii)?;
            let largest = radii.iter().cloned().fold(0.0, f64::max);
            let walker = make_walker(d, true, None, uidla_core::lattice::ball_volume(d, largest)?)?;
            let rows = fluctuation_scaling(a.process, d, &radii, a.replicas, a.seed, &walker)?;
            let mut buf = Vec::new();
            write_fluctuation_csv(&rows, &mut buf)?;
            emit(&a.out, &String::from_utf8_lossy(&buf))
        }
        AnalyzeWhat::Crossing => {
            let agg = need_snapshot()?;
            let spec = AnnulusSpec::new(a.m, a.width, a.count)?;
            let walker = Walker::new(agg.dim(), true)?;
            let rep = annulus_crossing_probe(&agg, &spec, &[LatticePoint::ORIGIN], a.walks, &Streams::new(a.seed, 0), &walker)?;
            emit(&a.out, &rep.csv())
        }
    }
}

fn render(a: RenderArgs) -> CliResult {
    let agg = load_snapshot(&a.snapshot)?;
    let spec = match (a.width, a.height) {
        (Some(width), Some(height)) if width > 0 && height > 0 => RenderSpec { width, height },
        (Some(_), Some(_)) => return Err(config_err("--width and --height must be positive")),
        _ => RenderSpec::fit(&agg)?,
    };
    let st = render_symdiff(&agg, &a.out, spec)?;
    eprintln!("{}x{}: {} blue, {} red, {} white", spec.width, spec.height, st.blue, st.red, st.white);
    Ok(())
}

fn selftest(a: SelftestArgs) -> CliResult {
    let ids: Vec<u8> = match &a.only {
        Some(s) => parse_list("only", s)?,
        None => CRITERIA.iter().map(|c| c.0).collect(),
    };
    if let Some(bad) = ids.iter().find(|i| !(1..=11).contains(*i)) {
        return Err(config_err(format!("--only: no criterion {bad}")));
    }
    let outcomes = acceptance::run_suite(&ids, a.seed, &a.out, |o| println!("{}", o.line()))?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        return Err(Failure::Runtime(format!("{failed} criteria failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let res = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Couple(a) => couple(a),
        Command::Estimate(a) => estimate(a),
        Command::Genealogy(a) => genealogy(a),
        Command::Analyze(a) => analyze(a),
        Command::Render(a) => render(a),
        Command::Selftest(a) => selftest(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("aborted: {m}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
