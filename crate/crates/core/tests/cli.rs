use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sectkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sectkit"))
        .args(args)
        .env("SECTKIT_THREADS", "2")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn family(dir: &Path, eps: f64, seed: u64, count: usize, gamma: &str) {
    let out = sectkit(&[
        "compute",
        "--shape",
        &format!("family:eps={eps},seed={seed}"),
        "--count",
        &count.to_string(),
        "--directions",
        gamma,
        "--half-circle",
        "--levels",
        "20",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

fn report(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn builtin_terminal_values() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let k1 = sectkit(&["compute", "--shape", "builtin:K1", "--directions", "8", "--levels", "30", "--out", dir]);
    let k2 = sectkit(&["compute", "--shape", "builtin:K2", "--directions", "8", "--levels", "30", "--out", dir]);
    assert_eq!(code(&k1), 0);
    assert!(String::from_utf8_lossy(&k1.stdout).contains("terminal_chi=0"));
    assert!(String::from_utf8_lossy(&k2.stdout).contains("terminal_chi=-1"));
    for stem in ["K1.sect", "K1.ect", "K2.sect", "K2.ect"] {
        assert!(tmp.path().join(format!("{stem}.csv")).exists());
        assert!(tmp.path().join(format!("{stem}.json")).exists());
    }

    let (a, b) = (tmp.path().join("K1.ect.json"), tmp.path().join("K2.ect.json"));
    let d = |x: &Path, y: &Path| {
        let out = sectkit(&["distance", "--a", x.to_str().unwrap(), "--b", y.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        String::from_utf8_lossy(&out.stdout).trim().parse::<f64>().unwrap()
    };
    let ab = d(&a, &b);
    assert!(ab > 0.0);
    assert_eq!(ab, d(&b, &a));
    assert_eq!(d(&a, &a), 0.0);
}

#[test]
fn off_mesh_round_trip() {
    let tmp = TempDir::new().unwrap();
    let off = tmp.path().join("tet.off");
    // Boundary of a tetrahedron: a sphere, χ = 2.
    fs::write(
        &off,
        "OFF\n4 4 0\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 1 3\n3 0 2 3\n3 1 2 3\n",
    )
    .unwrap();
    let dirs = tmp.path().join("dirs.csv");
    fs::write(&dirs, "1,0,0\n-1,0,0\n0,1,0\n0,-1,0\n0,0,1\n0.6,0,0.8\n").unwrap();
    let out_dir = tmp.path().join("out");
    let out = sectkit(&[
        "compute",
        "--shape",
        off.to_str().unwrap(),
        "--directions",
        dirs.to_str().unwrap(),
        "--levels",
        "10",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("terminal_chi=2"));
    let csv = fs::read_to_string(out_dir.join("tet.ect.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.lines().all(|l| l.ends_with(",2")));
}

#[test]
fn tests_and_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let (g1, g2, g3) = (tmp.path().join("g1"), tmp.path().join("g2"), tmp.path().join("g3"));
    family(&g1, 0.0, 100, 20, "4");
    family(&g2, 0.1, 200, 20, "4");
    family(&g3, 0.0, 300, 20, "6");
    let (s1, s2, s3) = (g1.to_str().unwrap(), g2.to_str().unwrap(), g3.to_str().unwrap());

    let same = sectkit(&["test", "--group1", s1, "--group2", s1]);
    assert_eq!(code(&same), 0, "{}", stderr(&same));
    let r = report(&same);
    assert_eq!(r["statistic"], 0.0);
    assert_eq!(r["decision"], "Accept");

    let args = ["test", "--group1", s1, "--group2", s2, "--method", "perm", "--permutations", "99", "--seed", "5"];
    let perm = sectkit(&args);
    assert_eq!(code(&perm), 3, "{}", stderr(&perm));
    let r = report(&perm);
    assert_eq!(r["decision"], "Reject");
    assert_eq!(r["k_star"], 94);
    assert_eq!(report(&sectkit(&args)), r);

    let file = tmp.path().join("report.json");
    let nhst = sectkit(&[
        "test", "--group1", s1, "--group2", s2, "--method", "nhst", "--permutations", "99",
        "--out", file.to_str().unwrap(),
    ]);
    assert!([0, 3].contains(&code(&nhst)), "{}", stderr(&nhst));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(r["method"], "nhst");

    let mismatch = sectkit(&["test", "--group1", s1, "--group2", s3]);
    assert_eq!(code(&mismatch), 2);
    let msg = stderr(&mismatch);
    assert!(msg.contains("g1") && msg.contains("g3"), "{msg}");

    assert_eq!(code(&sectkit(&["test", "--group1", s1, "--group2", s1, "--method", "anova"])), 1);
    assert_eq!(code(&sectkit(&["test", "--group1", s1, "--group2", s1, "--alpha", "2"])), 1);
    assert_eq!(code(&sectkit(&["test", "--group1", s1, "--group2", "/nonexistent/dir"])), 2);
}

#[test]
fn usage_and_data_errors() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().to_str().unwrap();
    assert_eq!(code(&sectkit(&["compute", "--shape", "builtin:K1", "--directions", "4", "--out", dir])), 1);
    assert_eq!(code(&sectkit(&["compute", "--shape", "builtin:K9", "--directions", "4", "--levels", "5", "--out", dir])), 1);
    assert_eq!(
        code(&sectkit(&["compute", "--shape", "missing.off", "--directions", "4", "--levels", "5", "--out", dir])),
        2
    );
    let bad = tmp.path().join("bad.off");
    fs::write(&bad, "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n").unwrap();
    let out = sectkit(&["compute", "--shape", bad.to_str().unwrap(), "--directions", "4", "--levels", "5", "--out", dir]);
    assert_eq!(code(&out), 2);
    assert!(!stderr(&out).is_empty());
    assert_eq!(code(&sectkit(&["frobnicate"])), 1);
}

#[test]
fn simulate_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"epsilon_list": [0.0, 0.1], "n": 8, "replicates": 2, "gamma": 2, "delta": 12,
            "permutations": 39, "curve_points": 30}"#,
    )
    .unwrap();
    let run = |name: &str, threads: &str| {
        let out_dir = tmp.path().join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_sectkit"))
            .args(["simulate", "--study", "rejection", "--config", cfg.to_str().unwrap()])
            .args(["--out", out_dir.to_str().unwrap(), "--threads", threads])
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        // Drop the timing column; everything else must repeat exactly.
        fs::read_to_string(out_dir.join("replicates.csv"))
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
    };
    let a = run("a", "1");
    assert_eq!(a.len(), 1 + 2 * 2 * 3);
    assert_eq!(a, run("b", "2"));
    for f in ["rejection.csv", "rejection_vs_epsilon.csv", "summary.json"] {
        assert!(tmp.path().join("a").join(f).exists(), "{f}");
    }

    fs::write(&cfg, r#"{"replicates": 2, "unknown": 1}"#).unwrap();
    let out = sectkit(&["simulate", "--study", "rejection", "--config", cfg.to_str().unwrap(), "--out", "x"]);
    assert_ne!(code(&out), 0);
}
