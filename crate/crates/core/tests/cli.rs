use std::process::Command;

fn czpr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_czpr"))
}

#[test]
fn run_writes_csv_to_stdout() {
    let out = czpr()
        .args(["run", "--system", "example1", "--steps", "3", "--seed", "2"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "k,hull_volume_root,n_g,n_c,contains_truth,step_millis"
    );
    assert_eq!(lines.len(), 5);
    for (k, l) in lines[1..].iter().enumerate() {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f[0], k.to_string());
        assert_eq!(f[4], "true");
        assert_eq!(f[5], "0");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        format!(
            "# example\nsystem = example1\nsteps = 50\nseed = 4\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let status = czpr()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--steps", "2"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["run", "--system", "nope"],
        vec!["run", "--system", "example1", "--steps", "0"],
        vec!["run", "--system", "example1", "--gen-limit", "1"],
        vec!["run", "--system", "example1", "--noise-mode", "loud"],
        vec!["run", "--system", "example1", "--ts", "0.1"],
        vec!["run", "--config", "/nonexistent/czpr.cfg"],
    ] {
        let out = czpr().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let run = || {
        czpr()
            .args([
                "run",
                "--system",
                "example2",
                "--steps",
                "5",
                "--seed",
                "8",
                "--noise-mode",
                "extreme",
            ])
            .output()
            .unwrap()
            .stdout
    };
    let a = run();
    assert!(!a.is_empty());
    assert_eq!(a, run());
}

#[test]
fn systems_lists_benchmarks() {
    let out = czpr().arg("systems").output().unwrap();
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "example1\nexample2\nexample3\n"
    );
}
