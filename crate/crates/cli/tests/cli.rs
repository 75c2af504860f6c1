use std::process::{Command, Output};

fn teichlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teichlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn body(stdout: &[u8]) -> String {
    let s = String::from_utf8(stdout.to_vec()).unwrap();
    s.lines()
        .filter(|l| !l.starts_with("# wall_time_s"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn count_prints_a_report() {
    let out = teichlab(&["count", "--set", "r_grid=3,4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[rows]") && text.contains("[checks]"));
    assert!(text.contains("rng = ChaCha8Rng"));
    assert!(text.contains("# wall_time_s = "));
}

#[test]
fn malformed_grid_exits_2_naming_the_field() {
    let out = teichlab(&["count", "--set", "r_grid=5,4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("r_grid"));
}

#[test]
fn unknown_keys_and_subcommands_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "r_grid = 3\nwobble = 2\n").unwrap();
    let out = teichlab(&["count", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("wobble"));
    assert_eq!(teichlab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        teichlab(&["count", "--config", "/nonexistent/x.conf"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        teichlab(&["count", "--set", "novalue"]).status.code(),
        Some(2)
    );
}

#[test]
fn failing_checks_exit_3_only_with_check() {
    let args = ["thin", "--set", "r_grid=3,4", "--set", "deltas=0.1,0.2"];
    assert_eq!(teichlab(&args).status.code(), Some(0));
    let mut with = args.to_vec();
    with.push("--check");
    let out = teichlab(&with);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("n1_exponent"));
}

#[test]
fn passing_checks_exit_0_with_check() {
    assert_eq!(
        teichlab(&["veech", "--set", "r_max=4", "--check"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mix.conf");
    std::fs::write(
        &cfg,
        "# small run\nr_grid = 0, 2\nsamples = 20000\nseed = 4\n",
    )
    .unwrap();
    let out_file = dir.path().join("report.txt");
    let out = teichlab(&[
        "mix",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_file).unwrap();
    assert!(text.contains("seed = 9"));
    assert!(text.contains("samples = 20000"));
}

#[test]
fn same_seed_gives_the_same_body() {
    let args = [
        "mix",
        "--set",
        "r_grid=0,2",
        "--set",
        "samples=20000",
        "--seed",
        "3",
    ];
    let a = teichlab(&args);
    let mut two = args.to_vec();
    two.extend(["--workers", "2"]);
    let b = teichlab(&two);
    assert_eq!(body(&a.stdout), body(&b.stdout));
    let mut other = args.to_vec();
    other[6] = "4";
    assert_ne!(body(&a.stdout), body(&teichlab(&other).stdout));
}

#[test]
fn help_documents_the_columns() {
    let out = teichlab(&["close", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("word;trace;length;count_of_events;est_component_measure"));
    let out = teichlab(&["veech", "--help"]);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("word;trace;length;min_systole"));
}
