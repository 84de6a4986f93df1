use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMOOTH: &str = "[initial]\npreset = single_mode\n[run]\nt_end = 0.2\ncadence = 5\ncheckpoint_interval = 20\n";

fn radhydro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radhydro"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_resume_and_verify() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.ini", SMOOTH);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = radhydro(&["--quiet", "run", "--config", &cfg, "--out", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let ckpt = a.join("checkpoint_00000040.ckpt");
    assert!(ckpt.exists());
    let o = radhydro(&[
        "--quiet",
        "run",
        "--config",
        &cfg,
        "--out",
        b.to_str().unwrap(),
        "--resume",
        ckpt.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["diagnostics.csv", "summary.json", "final.ckpt"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs after resume"
        );
    }
    let o = radhydro(&["verify", "--out", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["csv_identical"], true);
    assert_eq!(report["summary_identical"], true);
}

#[test]
fn configuration_errors_name_the_line_and_a_fix() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.ini",
        "[initial]\npreset = single_mode\n[params]\nviscocity = 1\n[run]\nt_end = 1\n",
    );
    let o = radhydro(&["run", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let e = stderr(&o);
    assert!(e.contains("bad.ini:4") && e.contains("did you mean `mu`"), "{e}");
}

#[test]
fn collapsing_run_reports_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "fail.ini",
        "[initial]\npreset = single_mode\nalpha_v = 0.9\nalpha_u = 3.0\n[run]\nt_end = 0.5\nn_cells = 512\n[control]\ndt_min = 1e-3\ndt_init = 1e-3\n",
    );
    let out = tmp.path().join("f");
    let o = radhydro(&["--quiet", "run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let failure: serde_json::Value = serde_json::from_slice(&fs::read(out.join("failure.json")).unwrap()).unwrap();
    assert_eq!(failure["status"], "failed");
    assert!(failure["failure"]["reason"].as_str().unwrap().contains("dt_min"));
    assert!(!out.join("summary.json").exists());
}

#[test]
fn damaged_or_foreign_checkpoints_are_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.ini", SMOOTH);
    let a = tmp.path().join("a");
    assert_eq!(
        radhydro(&["--quiet", "run", "--config", &cfg, "--out", a.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let bytes = fs::read(a.join("checkpoint_00000020.ckpt")).unwrap();

    let truncated = tmp.path().join("trunc.ckpt");
    fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
    let mut flipped = bytes.clone();
    let mid = flipped.len() / 2;
    flipped[mid] ^= 1;
    let corrupt = tmp.path().join("corrupt.ckpt");
    fs::write(&corrupt, &flipped).unwrap();
    for (path, needle) in [(&truncated, "truncated"), (&corrupt, "corrupt")] {
        let out = tmp.path().join("r");
        let o = radhydro(&[
            "--quiet",
            "run",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--resume",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(3));
        assert!(stderr(&o).to_lowercase().contains(needle), "{}", stderr(&o));
    }

    let other = write(tmp.path(), "other.ini", &SMOOTH.replace("t_end = 0.2", "t_end = 0.3"));
    let o = radhydro(&[
        "--quiet",
        "run",
        "--config",
        &other,
        "--out",
        tmp.path().join("m").to_str().unwrap(),
        "--resume",
        a.join("checkpoint_00000020.ckpt").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("different configuration"), "{}", stderr(&o));
}

#[test]
fn kernel_and_exponent_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let k = tmp.path().join("k");
    let o = radhydro(&[
        "--quiet",
        "kernel",
        "--out",
        k.to_str().unwrap(),
        "--points",
        "200",
        "--terms",
        "20000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let kernel: serde_json::Value = serde_json::from_slice(&fs::read(k.join("kernel.json")).unwrap()).unwrap();
    assert_eq!(kernel["certificate"]["pass"], true);
    assert_eq!(
        fs::read_to_string(k.join("kernel_table.csv")).unwrap().lines().count(),
        201
    );

    let e = tmp.path().join("e");
    let o = radhydro(&[
        "--quiet",
        "exponents",
        "--out",
        e.to_str().unwrap(),
        "--betas",
        "20",
        "--probes",
        "500",
    ]);
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(e.join("exponents.json")).unwrap()).unwrap();
    assert_eq!(summary["existence_admissible"], 20);
    assert_eq!(summary["witness"]["admissible"], true);
    let disagreements = fs::read_to_string(e.join("iff_disagreements.csv"))
        .unwrap()
        .lines()
        .count()
        - 1;
    assert_eq!(
        disagreements as u64,
        summary["sweep"]["disagreements"].as_u64().unwrap()
    );
    let code = if summary["all_pass"] == true { 0 } else { 1 };
    assert_eq!(o.status.code(), Some(code), "{}", stderr(&o));
}
