use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn kuiper(dir: &Path, args: &[&str]) -> Output {
    kuiper_env(dir, args, &[])
}

fn kuiper_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kuiper"));
    cmd.current_dir(dir).args(args).env_remove("RUST_LOG");
    for (key, _) in std::env::vars().filter(|(k, _)| k.starts_with("KUIPER_")) {
        cmd.env_remove(key);
    }
    cmd.envs(env.iter().copied()).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn cone_writes_mesh_and_report() {
    let dir = TempDir::new().unwrap();
    let out = kuiper(
        dir.path(),
        &["cone", "--N", "12", "--eta", "0.2", "--grid", "480x100", "--out", "cone.obj", "--report", "r.json"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = report(&dir.path().join("r.json"));
    assert_eq!(r["N"], 12);
    assert_eq!(r["eta"], 0.2);
    assert_eq!(r["grid"], serde_json::json!([480, 100]));
    for key in ["max_e11", "max_e12", "max_e22", "c0_distance", "min_immersion_margin"] {
        assert!(r[key].as_f64().unwrap() >= 0.0, "{key}");
    }
    let obj = fs::read_to_string(dir.path().join("cone.obj")).unwrap();
    assert!(!obj.contains('\r'));
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 480 * 101);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 2 * 480 * 100);
}

#[test]
fn report_goes_to_stdout_without_a_path() {
    let dir = TempDir::new().unwrap();
    let out = kuiper(dir.path(), &["cone", "--N", "6", "--grid", "48x4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["N"], 6);
    assert!(dir.path().join("cone.obj").exists());
}

#[test]
fn ply_output() {
    let dir = TempDir::new().unwrap();
    let out = kuiper(dir.path(), &["cone", "--N", "6", "--grid", "48x4", "--format", "ply", "--report", "r.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let ply = fs::read_to_string(dir.path().join("cone.ply")).unwrap();
    assert!(ply.starts_with("ply\nformat ascii 1.0\n"));
    assert!(ply.contains("element vertex 240\n"));
    assert!(ply.contains("element face 384\n"));
}

#[test]
fn zero_n_is_rejected_naming_the_flag() {
    let dir = TempDir::new().unwrap();
    let out = kuiper(dir.path(), &["cone", "--N", "0"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--N"), "{}", stderr(&out));
}

#[test]
fn invalid_flags_exit_2() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["cone", "--eta", "0.7"][..],
        &["cone", "--eta", "0.3", "--eps", "0.2"],
        &["cone", "--N", "12", "--grid", "50x10"],
        &["cone", "--grid", "480"],
        &["cone", "--format", "stl"],
        &["cone", "--threads", "0"],
        &["frobnicate"],
    ] {
        let out = kuiper(dir.path(), args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn leaving_the_subsolution_exits_3() {
    let dir = TempDir::new().unwrap();
    let out = kuiper(dir.path(), &["cone", "--y-max", "0.3"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn unwritable_output_exits_4() {
    let dir = TempDir::new().unwrap();
    let out = kuiper(dir.path(), &["cone", "--N", "6", "--grid", "48x4", "--out", "missing/dir/cone.obj"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    let out = kuiper(dir.path(), &["cone", "--config", "missing.toml"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    for t in ["1", "4"] {
        let out = kuiper(
            dir.path(),
            &[
                "cone",
                "--N",
                "6",
                "--grid",
                "96x20",
                "--threads",
                t,
                "--out",
                &format!("c{t}.obj"),
                "--report",
                &format!("r{t}.json"),
            ],
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let read = |name: &str| fs::read(dir.path().join(name)).unwrap();
    assert_eq!(read("c1.obj"), read("c4.obj"));
    assert_eq!(read("r1.json"), read("r4.json"));
}

#[test]
fn flags_override_environment_override_config() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("k.toml"), "N = 8\neta = 0.1\neps = 0.3\ngrid = \"64x4\"\n").unwrap();
    let run = |args: &[&str], env: &[(&str, &str)]| {
        let mut all = vec!["cone", "--config", "k.toml", "--report", "r.json"];
        all.extend_from_slice(args);
        let out = kuiper_env(dir.path(), &all, env);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        report(&dir.path().join("r.json"))
    };
    let r = run(&[], &[]);
    assert_eq!((r["N"].as_u64(), r["eta"].as_f64(), r["eps"].as_f64()), (Some(8), Some(0.1), Some(0.3)));
    let r = run(&[], &[("KUIPER_ETA", "0.05")]);
    assert_eq!((r["N"].as_u64(), r["eta"].as_f64()), (Some(8), Some(0.05)));
    let r = run(&["--eta", "0.2", "--N", "4", "--grid", "32x4"], &[("KUIPER_ETA", "0.05")]);
    assert_eq!((r["N"].as_u64(), r["eta"].as_f64()), (Some(4), Some(0.2)));
}

#[test]
fn bad_config_exits_2() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.toml"), "colour = \"red\"\n").unwrap();
    let out = kuiper(dir.path(), &["cone", "--config", "bad.toml"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    fs::write(dir.path().join("bad.toml"), "N = \"twelve\"\n").unwrap();
    let out = kuiper(dir.path(), &["cone", "--config", "bad.toml"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn sweep_writes_meshes_and_csv() {
    let dir = TempDir::new().unwrap();
    let out = kuiper(dir.path(), &["sweep", "--N", "6,12", "--grid", "480x10", "--out", "s"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let s = dir.path().join("s");
    assert!(s.join("cone_N6.obj").exists() && s.join("cone_N12.obj").exists());
    assert!(s.join("report_N6.json").exists() && s.join("report_N12.json").exists());
    let csv = fs::read_to_string(s.join("sweep.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("N,c0_distance"));
}

#[test]
fn sweep_with_one_n_and_with_none() {
    let dir = TempDir::new().unwrap();
    let out = kuiper(dir.path(), &["sweep", "--N", "6", "--grid", "48x4", "--out", "one"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("one/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);

    let out = kuiper(dir.path(), &["sweep", "--N", "--out", "none"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(!dir.path().join("none").exists());

    fs::write(dir.path().join("k.toml"), "N = []\n").unwrap();
    let out = kuiper(dir.path(), &["sweep", "--config", "k.toml"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn verify_is_deterministic_and_catches_the_fault() {
    let dir = TempDir::new().unwrap();
    let args = ["verify", "--seed", "42", "--instances", "200"];
    let a = kuiper(dir.path(), &args);
    let b = kuiper(dir.path(), &args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let summary: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(summary["seed"], 42);
    assert_eq!(summary["passed"], true);
    let names: Vec<_> =
        summary["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_owned()).collect();
    for name in ["loop_average", "containment", "rate_c0", "oracle_equivalence"] {
        assert!(names.iter().any(|n| n == name), "{name} missing from {names:?}");
    }

    let out = kuiper(dir.path(), &["verify", "--instances", "200", "--inject-fault", "rmin-sign"]);
    assert_eq!(code(&out), 1);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let containment = summary["checks"].as_array().unwrap().iter().find(|c| c["name"] == "containment").unwrap();
    assert_eq!(containment["passed"], false);
}
