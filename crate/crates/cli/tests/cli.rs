use std::path::Path;
use std::process::{Command, Output};

fn uidla(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uidla")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn help_documents_csv_schemas() {
    let o = uidla(&["simulate", "--help"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("step,n_sites,inradius,outradius"));
    assert!(text.contains("index,parent_index,site_coords,edge_weight,depth,reaching_time"));
    for sub in ["couple", "estimate", "genealogy", "analyze", "selftest"] {
        let o = uidla(&[sub, "--help"]);
        assert_eq!(code(&o), 0, "{sub}");
        assert!(stdout(&o).contains("CSV") || stdout(&o).contains(".csv"), "{sub}");
    }
}

#[test]
fn simulate_writes_outputs_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = uidla(&[
            "simulate",
            "--process",
            "uidla",
            "--dim",
            "2",
            "--radius",
            "8",
            "--seed",
            "3",
            "--replicas",
            "2",
            "--accel",
            "on",
            "--out-dir",
            p(&out),
            "--stats-out",
            p(&dir.path().join(format!("{name}_stats.csv"))),
            "--snapshot-out",
            p(&dir.path().join(format!("{name}_snap.txt"))),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let stats = std::fs::read_to_string(dir.path().join("a_stats.csv")).unwrap();
    assert!(stats.starts_with("step,n_sites,inradius,outradius\n"));
    let summary = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    assert!(summary.lines().next().unwrap().contains("inradius,outradius"));
    assert_eq!(summary.lines().count(), 3);
    for f in ["summary.csv", "stats_r0.csv", "stats_r1.csv", "snapshot_r1.txt"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(
        std::fs::read(dir.path().join("a_snap.txt")).unwrap(),
        std::fs::read(a.join("snapshot_r0.txt")).unwrap()
    );
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!("seed = 1\nprocess = idla\nparticles = 40\noutput_dir = {}\n", p(&dir.path().join("out"))),
    )
    .unwrap();
    let o = uidla(&["simulate", "--config", p(&cfg), "--particles", "30"]);
    assert_eq!(code(&o), 0);
    let summary = std::fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("0,30,"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "seed = 1\nthis line is broken\n").unwrap();
    assert_eq!(code(&uidla(&["simulate", "--config", p(&cfg)])), 2);
    assert_eq!(code(&uidla(&["simulate", "--config", p(&dir.path().join("missing.cfg"))])), 2);
    assert_eq!(code(&uidla(&["simulate", "--dim", "7"])), 2);
    assert_eq!(code(&uidla(&["simulate", "--process", "eden"])), 2);
    assert_eq!(code(&uidla(&["frobnicate"])), 2);
    assert_eq!(code(&uidla(&["selftest", "--only", "12"])), 2);

    let snap = dir.path().join("d3.txt");
    std::fs::write(&snap, "d=3 n_sites=1\n0 0 0\n").unwrap();
    assert_eq!(code(&uidla(&["render", "--snapshot", p(&snap), "--out", p(&dir.path().join("x.ppm"))])), 2);
}

#[test]
fn runtime_abort_exits_3() {
    // 60 particles from (3, 0) in B[6] cannot be killed at rate 0.9
    let o = uidla(&[
        "couple",
        "--scheme",
        "killed",
        "--radius",
        "6",
        "--start",
        "3,0",
        "--particles",
        "60",
        "--eta",
        "0.9",
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn couple_and_estimate() {
    let o = uidla(&["couple", "--scheme", "killed", "--particles", "50", "--replicas", "3", "--seed", "1"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));

    let o = uidla(&[
        "couple",
        "--scheme",
        "tricolor",
        "--dim",
        "1",
        "--radius",
        "1",
        "--inner-radius",
        "0",
        "--particles",
        "1",
    ]);
    assert_eq!(code(&o), 0);

    let o = uidla(&["estimate", "--what", "sandpile", "--mass", "10,100"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 3);

    let o = uidla(&["estimate", "--what", "harmonic", "--radius", "2", "--samples", "20000"]);
    assert_eq!(code(&o), 0);
    // every exit of B[2] has an exact value next to its estimate
    assert!(stdout(&o).lines().skip(1).all(|l| !l.ends_with(',')));

    let o = uidla(&["estimate", "--what", "defect", "--radius", "4", "--samples", "20000", "--replicas", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn genealogy_analyze_render() {
    let dir = tempfile::tempdir().unwrap();
    let o = uidla(&["genealogy", "--what", "forest", "--particles", "200", "--geom-convention", "mean-half"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 201);

    let o = uidla(&["genealogy", "--what", "yule", "--time", "1", "--max-level", "3", "--replicas", "200"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("1,0,1,1"));

    let out = dir.path().join("run");
    let snap = dir.path().join("snap.txt");
    assert_eq!(
        code(&uidla(&["simulate", "--radius", "10", "--out-dir", p(&out), "--snapshot-out", p(&snap)])),
        0
    );
    let shells = dir.path().join("shells.csv");
    let o = uidla(&["analyze", "--what", "shape", "--snapshot", p(&snap), "--shells-out", p(&shells)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("n_sites,"));
    assert!(std::fs::read_to_string(&shells).unwrap().starts_with("shell,occupied"));

    let o = uidla(&[
        "analyze",
        "--what",
        "crossing",
        "--snapshot",
        p(&snap),
        "--m",
        "5",
        "--width",
        "2",
        "--count",
        "3",
        "--walks",
        "500",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 4);

    let o = uidla(&["analyze", "--what", "fluctuation", "--radii", "4,6", "--replicas", "2"]);
    assert_eq!(code(&o), 0);

    let img = dir.path().join("a.ppm");
    assert_eq!(code(&uidla(&["render", "--snapshot", p(&snap), "--out", p(&img)])), 0);
    assert!(std::fs::read(&img).unwrap().starts_with(b"P6\n"));
}

#[test]
fn selftest_subset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = uidla(&["selftest", "--seed", "42", "--only", "1,6,11", "--out", p(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains("[PASS]")).count(), 3);
    assert!(dir.path().join("hashes.txt").exists());
}
