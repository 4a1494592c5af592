use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scaffold_core::field::ScalarField3D;
use scaffold_core::geometry::{read_npy, write_npy};
use tempfile::TempDir;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn scaffold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scaffold"))
        .args(args)
        .env_remove("SCAFFOLD_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A quick cube-corner config in `dir`, with `extra` lines appended.
fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let input = fixtures().join("cube_corners.txt");
    let text = format!(
        "input = {}\nresolution = 24\nnum_agents = 2000\nnum_steps = 30\nseed = 5\noutput_dir = out\n{extra}",
        input.display()
    );
    let path = dir.join("small.conf");
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn sphere_npy(dir: &Path, n: usize, r: f64) -> PathBuf {
    let c = (n as f64 - 1.0) / 2.0;
    let field = ScalarField3D::from_fn([n; 3], |i, j, k| {
        let d = ((i as f64 - c).powi(2) + (j as f64 - c).powi(2) + (k as f64 - c).powi(2)).sqrt();
        (2.0 * r - d).max(0.0) as f32
    });
    let path = dir.join("sphere.npy");
    write_npy(&field, &path).unwrap();
    path
}

#[test]
fn resolution_below_eight_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "");
    let text = fs::read_to_string(&cfg)
        .unwrap()
        .replace("resolution = 24", "resolution = 4");
    fs::write(&cfg, text).unwrap();
    let o = scaffold(&["run", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("resolution"), "{}", stderr(&o));
}

#[test]
fn missing_config_is_an_io_error() {
    let o = scaffold(&["run", "--config", "/nonexistent/x.conf"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_input_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let pts = dir.path().join("empty.txt");
    fs::write(&pts, "# nothing here\n").unwrap();
    let cfg = dir.path().join("c.conf");
    fs::write(&cfg, "input = empty.txt\nresolution = 16\n").unwrap();
    let o = scaffold(&["all", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty.txt"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(scaffold(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        scaffold(&["mesh", "f.npy", "--iso", "1", "--iso-percentile", "5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(scaffold(&["--version"]).status.code(), Some(0));
}

#[test]
fn zero_steps_write_an_all_zero_trace() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "");
    let text = fs::read_to_string(&cfg)
        .unwrap()
        .replace("num_steps = 30", "num_steps = 0");
    fs::write(&cfg, text).unwrap();
    let o = scaffold(&["run", "--config", s(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = read_npy(dir.path().join("out/trace.npy")).unwrap();
    assert_eq!(trace.dims(), [24, 24, 24]);
    assert!(trace.data().iter().all(|&v| v == 0.0));
}

#[test]
fn run_reports_progress_and_writes_snapshots() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "snapshot_interval = 10\n");
    let o = scaffold(&["run", "--config", s(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("stage=ingest step=1/1"));
    assert!(err.contains("stage=simulate step=30/30"));
    for k in [10, 20, 30] {
        assert!(dir.path().join(format!("out/trace_{k:06}.npy")).is_file());
        assert!(dir.path().join(format!("out/trace_{k:06}.pgm")).is_file());
    }
    let last = read_npy(dir.path().join("out/trace_000030.npy")).unwrap();
    assert_eq!(last, read_npy(dir.path().join("out/trace.npy")).unwrap());
}

#[test]
fn log_replays_to_identical_artifacts() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "");
    let first = dir.path().join("first");
    assert!(
        scaffold(&["run", "--config", s(&cfg), "--seed", "77", "--out", s(&first)])
            .status
            .success()
    );
    let second = dir.path().join("second");
    let o = scaffold(&["run", "--config", s(&first.join("run.log")), "--out", s(&second)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["trace.npy", "deposit.npy", "transform.txt", "food.txt"] {
        assert_eq!(
            fs::read(first.join(f)).unwrap(),
            fs::read(second.join(f)).unwrap(),
            "{f}"
        );
    }
    assert!(fs::read_to_string(first.join("run.log")).unwrap().contains("seed = 77"));
}

#[test]
fn seed_changes_the_trace() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(scaffold(&["run", "--config", s(&cfg), "--seed", "1", "--out", s(&a)])
        .status
        .success());
    assert!(scaffold(&["run", "--config", s(&cfg), "--seed", "2", "--out", s(&b)])
        .status
        .success());
    assert_ne!(
        fs::read(a.join("trace.npy")).unwrap(),
        fs::read(b.join("trace.npy")).unwrap()
    );
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "");
    let one = dir.path().join("one");
    let four = dir.path().join("four");
    assert!(
        scaffold(&["all", "--config", s(&cfg), "--threads", "1", "--out", s(&one)])
            .status
            .success()
    );
    let o = Command::new(env!("CARGO_BIN_EXE_scaffold"))
        .args(["all", "--config", s(&cfg), "--out", s(&four)])
        .env("SCAFFOLD_THREADS", "4")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["trace.npy", "scaffold.stl", "eval.csv"] {
        assert_eq!(fs::read(one.join(f)).unwrap(), fs::read(four.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn zero_threads_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_scaffold"))
        .args(["stats", "whatever.npy"])
        .env("SCAFFOLD_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn rerun_gives_byte_identical_stl() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(scaffold(&["all", "--config", s(&cfg), "--out", s(&a)]).status.success());
    assert!(scaffold(&["all", "--config", s(&cfg), "--out", s(&b)]).status.success());
    let stl = fs::read(a.join("scaffold.stl")).unwrap();
    assert_eq!(stl, fs::read(b.join("scaffold.stl")).unwrap());
    let tris = u32::from_le_bytes(stl[80..84].try_into().unwrap()) as usize;
    assert_eq!(stl.len(), 84 + 50 * tris);
}

#[test]
fn sphere_mesh_reloads_with_euler_two() {
    let dir = TempDir::new().unwrap();
    let npy = sphere_npy(dir.path(), 32, 10.0);
    let stl = dir.path().join("sphere.stl");
    let o = scaffold(&["mesh", s(&npy), "--iso", "10", "--out", s(&stl)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("euler=2"));
    let o = scaffold(&["stats", s(&stl)]);
    let line = stdout(&o);
    assert!(
        line.contains("euler=2") && line.contains("boundary_edges=0") && line.contains("components=1"),
        "{line}"
    );
}

#[test]
fn iso_above_max_warns_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let npy = sphere_npy(dir.path(), 16, 4.0);
    let o = scaffold(&["mesh", s(&npy), "--iso", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
    assert!(!dir.path().join("sphere.stl").exists());
}

#[test]
fn percentile_matches_equivalent_absolute_iso() {
    let dir = TempDir::new().unwrap();
    let npy = sphere_npy(dir.path(), 20, 6.0);
    let iso = scaffold_core::field::percentile_nonzero(&read_npy(&npy).unwrap(), 50.0).unwrap();
    let (a, b) = (dir.path().join("a.stl"), dir.path().join("b.stl"));
    assert!(scaffold(&["mesh", s(&npy), "--iso-percentile", "50", "--out", s(&a)])
        .status
        .success());
    assert!(
        scaffold(&["mesh", s(&npy), "--iso", &f64::from(iso).to_string(), "--out", s(&b)])
            .status
            .success()
    );
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn stats_of_zero_field() {
    let dir = TempDir::new().unwrap();
    let npy = dir.path().join("zero.npy");
    write_npy(&ScalarField3D::zeros([4, 4, 4]), &npy).unwrap();
    let o = scaffold(&["stats", s(&npy)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("total=0 nonzero=0"), "{}", stdout(&o));
}

#[test]
fn slice_of_64_cube_is_64_by_64() {
    let dir = TempDir::new().unwrap();
    let npy = sphere_npy(dir.path(), 64, 20.0);
    let o = scaffold(&["slice", s(&npy), "--axis", "z", "--index", "32"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let pgm = fs::read(dir.path().join("sphere_z32.pgm")).unwrap();
    let header = b"P5\n64 64\n255\n";
    assert_eq!(&pgm[..header.len()], header);
    assert_eq!(pgm.len(), header.len() + 64 * 64);
    assert_eq!(
        scaffold(&["slice", s(&npy), "--axis", "z", "--index", "64"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        scaffold(&["slice", s(&npy), "--axis", "w", "--index", "1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn eval_on_cube_corners_reports_scaled_mst() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "");
    assert!(scaffold(&["run", "--config", s(&cfg)]).status.success());
    let trace = dir.path().join("out/trace.npy");
    let o = scaffold(&["eval", s(&trace)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/eval.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("mst_length,volume,voxels,connectivity,efficiency_ratio")
    );
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    // seven 100 mm cube edges
    assert!((row[0] - 700.0).abs() < 1e-9, "{csv}");
    assert!(stdout(&o).contains("mst_length=700"));
}
