use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wassersolve"))
        .args(args)
        .current_dir(dir)
        .env_remove("WASSERSOLVE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn mesh_gen_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(dir.path(), &["mesh", "gen", "--kind", "acute", "--n", "4", "--subdivide", "--out", "m.txt"]);
    assert_eq!(code(&o), 0, "{o:?}");
    for f in ["m.coarse.txt", "m.fine.txt", "m.map.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    for f in ["m.coarse.txt", "m.fine.txt"] {
        let o = bin(dir.path(), &["mesh", "check", f]);
        assert_eq!(code(&o), 0);
        let line = stdout(&o).lines().find(|l| l.starts_with("center of mass defect")).unwrap().to_string();
        let defect: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
        assert!(defect <= 1e-12, "{line}");
    }

    let o = bin(dir.path(), &["mesh", "gen", "--kind", "cartesian", "--n", "2", "--ny", "3", "--out", "c.txt"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&bin(dir.path(), &["mesh", "check", "c.txt"])).contains("cells                    6"));
    assert_eq!(code(&bin(dir.path(), &["mesh", "gen", "--kind", "cartesian", "--n", "2", "--subdivide", "--out", "x.txt"])), 2);
}

#[test]
fn mesh_check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.txt"), "tpfa-mesh 1\nvertices 2\n0 0\n").unwrap();
    assert_eq!(code(&bin(dir.path(), &["mesh", "check", "bad.txt"])), 2);
    assert_eq!(code(&bin(dir.path(), &["mesh", "check", "missing.txt"])), 2);
    // second center moved off the line through the first one, normal to the shared face
    let skewed = "tpfa-mesh 1\nvertices 6\n0 0\n0.5 0\n1 0\n0 1\n0.5 1\n1 1\ncells 2\n0 1 4 3\n1 2 5 4\ncenters 2\n0.25 0.5\n0.75 0.7\n";
    fs::write(dir.path().join("skew.txt"), skewed).unwrap();
    let o = bin(dir.path(), &["mesh", "check", "skew.txt"]);
    assert_eq!(code(&o), 1, "{o:?}");
}

#[test]
fn solve_writes_bundle_and_honors_overrides() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "# desk run\ncase = sinusoidal\nscheme = non-enriched\nkind = linear\neps0 = 1e-4\nhbar = 0.25\nsteps = 3\n").unwrap();
    let o = bin(dir.path(), &["solve", "--config", "run.cfg", "--eps0", "1e-8", "--out", "out"]);
    assert_eq!(code(&o), 0, "{o:?}");
    let out = dir.path().join("out");
    for k in 0..=4 {
        assert!(out.join(format!("rho_{k}.csv")).exists());
        assert!(out.join(format!("frames/rho_{k}.vtk")).exists());
    }
    for k in 1..=4 {
        assert!(out.join(format!("phi_{k}.csv")).exists());
    }
    assert!(!out.join("phi_0.csv").exists());
    let series = fs::read_to_string(out.join("frames.vtk-series")).unwrap();
    assert_eq!(series.matches("\"name\"").count(), 5);

    // the flag wins over the config file, and the trace shows it
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("eps0 = 0.00000001\n"), "{manifest}");
    assert!(manifest.contains("scheme = non-enriched\n"));
    assert!(manifest.contains("coarse_mesh_sha256 = "));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let last = trace.lines().last().unwrap();
    let gap: f64 = last.split(',').nth(6).unwrap().parse().unwrap();
    assert!(gap <= 1e-8 && gap > 1e-10, "{last}");

    let w2 = fs::read_to_string(out.join("w2.txt")).unwrap();
    assert!(w2.starts_with("w2 = ") && w2.contains("converged = true"));
    let rho: Vec<f64> = fs::read_to_string(out.join("rho_2.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(rho.iter().all(|v| *v > 0.0));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "eps0 = 1e-8\nbogus = 3\n").unwrap();
    let cases: &[&[&str]] = &[
        &["solve", "--config", "bad.cfg", "--out", "o"],
        &["solve", "--config", "nope.cfg", "--out", "o"],
        &["solve", "--case", "nonsense", "--out", "o"],
        &["solve", "--theta", "2", "--out", "o"],
        &["solve", "--hbar", "0.25"],
        &["study", "--levels", ""],
        &["study", "--levels", "3..1"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = bin(dir.path(), args);
        assert_eq!(code(&o), 2, "{args:?}: {o:?}");
    }
    assert_eq!(code(&bin(dir.path(), &["--help"])), 0);
}

#[test]
fn solver_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // one outer iteration cannot reach the tolerance
    let o = bin(dir.path(), &["solve", "--hbar", "0.25", "--steps", "1", "--max-outer", "1", "--out", "o"]);
    assert_eq!(code(&o), 1, "{o:?}");
}

#[test]
fn study_tables_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["study", "--case", "compression", "--c", "0.3", "--levels", "1,2", "--scheme", "enriched", "--kind", "linear"];
    let run = |out: &str| {
        let mut a = args.to_vec();
        a.extend(["--out", out]);
        let o = bin(dir.path(), &a);
        assert_eq!(code(&o), 0, "{o:?}");
        fs::read(dir.path().join(out).join("compression_enriched_linear.csv")).unwrap()
    };
    let first = run("a");
    let csv = String::from_utf8(first.clone()).unwrap();
    assert!(csv.starts_with("hbar,N,eps_w2,rate_w2"));
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(first, run("b"));
}
