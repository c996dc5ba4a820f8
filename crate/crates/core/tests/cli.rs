use std::process::{Command, Output};

use mcvd::harness::{parse_table, EXIT_CONFIG, EXIT_OK, EXIT_THRESHOLD};

fn mcvd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcvd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn analytic_time_sweep_parses_back() {
    let out = mcvd(&[
        "analytic", "--lambda", "1e-5", "--mu", "1", "--sweep", "t", "--sweep-start", "0.01",
        "--sweep-stop", "10", "--sweep-points", "5", "--sweep-scale", "log",
    ]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let table = parse_table(&stdout(&out)).unwrap();
    assert_eq!(table.columns, ["t_s", "p_hit", "p_hit_limit"]);
    let t = table.reals("t_s").unwrap();
    assert_eq!(t.first(), Some(&0.01));
    assert_eq!(t.last(), Some(&10.0));
    let p = table.reals("p_hit").unwrap();
    let limit = table.reals("p_hit_limit").unwrap();
    assert!(p.windows(2).all(|w| w[1] > w[0]));
    assert!(p.iter().zip(&limit).all(|(p, l)| p < l));
    assert!(table.comments[0].contains("analytic"));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let csv = dir.path().join("out.csv");
    std::fs::write(&cfg, "a_um = 10.0\nD_um2_per_s = 100.0\nlambda_per_um3 = 1e-6\nt_s = 2.0\n").unwrap();

    let from_file = mcvd(&["analytic", "--config", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(EXIT_OK));
    assert!(stdout(&from_file).is_empty());
    let written = parse_table(&std::fs::read_to_string(&csv).unwrap()).unwrap();

    let overridden = mcvd(&["analytic", "--config", cfg.to_str().unwrap(), "--a", "5"]);
    let flagged = parse_table(&stdout(&overridden)).unwrap();
    let (p10, p5) = (written.reals("p_hit").unwrap()[0], flagged.reals("p_hit").unwrap()[0]);
    assert!(p10 > p5, "larger receivers are hit more often: {p10} vs {p5}");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "lambda_per_um3 = 1e-5\nlamda = 2\n").unwrap();
    let out = mcvd(&["analytic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lamda"));

    for args in [
        &["analytic", "--a", "-1"][..],
        &["analytic", "--lambda", "1e-5", "--t", "1", "--N", "5", "--threshold", "6"],
        &["simulate", "--dt", "0"],
    ] {
        let out = mcvd(args);
        assert_eq!(out.status.code(), Some(EXIT_CONFIG), "{args:?}");
    }
}

#[test]
fn missed_threshold_exits_with_three() {
    let out = mcvd(&[
        "compare", "--lambda", "1e-4", "--t", "0.1", "--particles", "300", "--seed", "3",
        "--accept-max-abs-error", "1e-12",
    ]);
    assert_eq!(out.status.code(), Some(EXIT_THRESHOLD));
    let text = stdout(&out);
    assert!(text.lines().last().unwrap().starts_with("# summary points=1"));
}

#[test]
fn simulation_is_reproducible_from_seed() {
    let args = [
        "simulate", "--lambda", "1e-5", "--mu", "1", "--particles", "500", "--absorption-mode",
        "bridge", "--sweep", "t", "--sweep-values", "0.05,0.2",
    ];
    let run = |seed: &str, workers: &str| {
        let mut a = args.to_vec();
        a.extend(["--seed", seed, "--workers", workers]);
        stdout(&mcvd(&a))
    };
    let first = run("11", "1");
    assert_eq!(first, run("11", "3"));
    assert_ne!(first, run("12", "1"));
    let table = parse_table(&first).unwrap();
    assert_eq!(table.columns, ["t_s", "p_hit_mc", "ci_low", "ci_high", "ci_halfwidth"]);
}

#[test]
fn figure_five_table() {
    let out = mcvd(&["figure", "fig5"]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let table = parse_table(&stdout(&out)).unwrap();
    assert_eq!(table.rows.len(), 3 * 51);
    assert!(table.reals("t_c_s").unwrap().iter().all(|&t| t > 0.0));
}
