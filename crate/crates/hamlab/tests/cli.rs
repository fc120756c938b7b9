//! Process-level contract tests for the `hamlab` binary: exit codes,
//! output formats, config-file handling, and byte-identical reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hamlab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn write_graph(path: &Path, body: &str) {
    fs::write(path, body).unwrap();
}

const PETERSEN: &str = "10\n0 1\n1 2\n2 3\n3 4\n0 4\n0 5\n1 6\n2 7\n3 8\n4 9\n5 7\n7 9\n6 9\n6 8\n5 8\n";
const C5: &str = "5\n0 1\n1 2\n2 3\n3 4\n0 4\n";
const STAR4: &str = "4\n0 1\n0 2\n0 3\n";

#[test]
fn solve_finds_the_five_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("c5.el");
    write_graph(&g, C5);
    let out = run(&["solve", "--graph", g.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("HAMILTONIAN"));
    let cycle: Vec<usize> = lines
        .next()
        .unwrap()
        .split(' ')
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(cycle.len(), 5);
}

#[test]
fn solve_star_exhausts_heuristically_and_refutes_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("star.el");
    write_graph(&g, STAR4);
    let out = run(&["solve", "--graph", g.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "EXHAUSTED");

    let out = run(&["solve", "--graph", g.to_str().unwrap(), "--exact"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout(&out).trim(), "NON-HAMILTONIAN");
}

#[test]
fn solve_petersen_exact_is_negative() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("petersen.el");
    write_graph(&g, PETERSEN);
    let out = run(&["solve", "--graph", g.to_str().unwrap(), "--exact"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout(&out).trim(), "NON-HAMILTONIAN");
}

#[test]
fn sample_round_trips_through_solve() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.el");
    let out = run(&[
        "sample", "--n", "12", "--p", "0.5", "--seed", "9", "--out",
        g.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&g).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "12");
    for line in lines {
        let mut parts = line.split(' ');
        let u: usize = parts.next().unwrap().parse().unwrap();
        let v: usize = parts.next().unwrap().parse().unwrap();
        assert!(u < v && v < 12);
        assert!(parts.next().is_none());
    }
    let out = run(&["solve", "--graph", g.to_str().unwrap(), "--exact"]);
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.el");
    let b = dir.path().join("b.el");
    for path in [&a, &b] {
        let out = run(&[
            "sample", "--n", "40", "--p", "0.2", "--seed", "11", "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let first = run(&["solve", "--graph", a.to_str().unwrap()]);
    let second = run(&["solve", "--graph", a.to_str().unwrap()]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn sweep_outputs_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut results = Vec::new();
    for jobs in ["1", "8"] {
        let csv = dir.path().join(format!("s{jobs}.csv"));
        let tsv = dir.path().join(format!("s{jobs}.tsv"));
        let log = dir.path().join(format!("s{jobs}.jsonl"));
        let out = run(&[
            "sweep", "--n", "40", "--alpha", "0.1", "--c-grid", "0.4,2.5",
            "--trials", "12", "--seed", "21", "--jobs", jobs, "--out",
            csv.to_str().unwrap(), "--plotdata", tsv.to_str().unwrap(),
            "--log", log.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
        // Keep only path-free stdout lines: the "wrote ..." lines name the
        // per-run output files and legitimately differ.
        let summary: Vec<String> = stdout(&out)
            .lines()
            .filter(|l| !l.starts_with("wrote "))
            .map(str::to_string)
            .collect();
        assert!(summary.iter().any(|l| l.starts_with("c_half=")));
        results.push((
            fs::read(&csv).unwrap(),
            fs::read(&tsv).unwrap(),
            fs::read(&log).unwrap(),
            summary,
        ));
    }
    assert_eq!(results[0], results[1]);

    let csv_text = String::from_utf8(results[0].0.clone()).unwrap();
    assert!(csv_text.starts_with("c,p,trials,ham_freq,ham_lo,ham_hi,obs_freq,obs_lo,obs_hi\n"));
    assert!(csv_text.contains("# p_half="));
    let log_text = String::from_utf8(results[0].2.clone()).unwrap();
    for line in log_text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("cfg_hash").is_some());
        assert!(v.get("trial_index").is_some());
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sample.conf");
    fs::write(&cfg, "# defaults\nn = 30\np = 0.3\nseed = 4\n").unwrap();
    let from_cfg = dir.path().join("cfg.el");
    let overridden = dir.path().join("ovr.el");
    let direct = dir.path().join("direct.el");

    let out = run(&[
        "sample", "--config", cfg.to_str().unwrap(), "--out",
        from_cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let out = run(&[
        "sample", "--config", cfg.to_str().unwrap(), "--seed", "5", "--out",
        overridden.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&[
        "sample", "--n", "30", "--p", "0.3", "--seed", "5", "--out",
        direct.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    assert_eq!(fs::read(&overridden).unwrap(), fs::read(&direct).unwrap());
    assert_ne!(fs::read(&overridden).unwrap(), fs::read(&from_cfg).unwrap());
}

#[test]
fn usage_errors_exit_two_and_name_the_flag() {
    let out = run(&["sample", "--n", "5", "--p", "1.5", "--out", "/tmp/never.el"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("--p"), "stderr: {err}");
    assert!(err.contains("1.5"));

    let out = run(&["sweep", "--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["obstruct", "--n", "50", "--alpha", "0.1", "--trials", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--eta"));
}

#[test]
fn runtime_errors_exit_one() {
    let out = run(&["solve", "--graph", "/definitely/missing.el"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing.el"));
}

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for sub in ["sample", "solve", "sweep", "certify", "obstruct"] {
        assert!(text.contains(sub), "help is missing {sub}");
    }
    for sub in ["sample", "solve", "sweep", "certify", "obstruct"] {
        let out = run(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).contains("--config"));
    }
}

#[test]
fn certify_exit_codes_track_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("p5.el");
    write_graph(&g, "5\n0 1\n1 2\n2 3\n3 4\n");
    let out = run(&[
        "certify", "--mode", "expander", "--graph", g.to_str().unwrap(), "--k", "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("falsified"));

    write_graph(&g, C5);
    let out = run(&[
        "certify", "--mode", "expander", "--graph", g.to_str().unwrap(),
        "--k", "1", "--exact",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("certified"));
}

#[test]
fn obstruct_at_p_zero_isolates_the_whole_large_side() {
    let out = run(&[
        "obstruct", "--n", "30", "--alpha", "0.1", "--p", "0", "--trials", "4",
        "--seed", "2", "--jobs", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("trial\tisolated\tsmall_side\tcertified\n"));
    for line in text.lines().skip(1).take(4) {
        assert_eq!(line.split('\t').nth(1), Some("27"));
    }
    assert!(text.contains("certificate_rate=1"));
}
