use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sapo::gen::load_dataset;
use sapo::lp::solve_minimax_gap;
use sapo::nn::Checkpoint;

fn sapo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sapo"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .env_remove("SAPO_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sapo(dir, args);
    assert!(
        out.status.success(),
        "sapo {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

/// Rows of a CSV file as string fields, header excluded.
fn rows(file: PathBuf) -> Vec<Vec<String>> {
    fs::read_to_string(file)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn small_data(dir: &Path, m: &str) {
    ok(dir, &["gen", "--n", "12", "--m", m, "--smoothness", "4", "--train", "4", "--test", "5", "--seed", "3"]);
}

#[test]
fn gen_writes_both_files_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        ok(d, &["gen", "--n", "40", "--m", "12", "--train", "20", "--test", "10", "--seed", "7"]);
    }
    let train = load_dataset(&a.path().join("dataset.train")).unwrap();
    let test = load_dataset(&a.path().join("dataset.test")).unwrap();
    assert_eq!(train.instances.len() + test.instances.len(), 30);
    for f in ["dataset.train", "dataset.test"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn invalid_generator_flags_fail() {
    let d = tempfile::tempdir().unwrap();
    let out = sapo(d.path(), &["gen", "--m", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("m must be at least 1"));
    assert!(fs::read_dir(d.path()).unwrap().next().is_none());
}

#[test]
fn greedy_report_checks() {
    let d = tempfile::tempdir().unwrap();
    small_data(d.path(), "6");
    let test = path(d.path(), "dataset.test");
    ok(d.path(), &["greedy", "--data", &test, "--budget", "3"]);
    let first = fs::read(d.path().join("greedy.csv")).unwrap();
    let table = rows(d.path().join("greedy.csv"));
    assert_eq!(table.len(), 6);
    for row in &table[..5] {
        let mg: f64 = row[2].parse().unwrap();
        let exhaustive: f64 = row[4].parse().unwrap();
        assert!(exhaustive <= mg + 1e-9);
        assert!(row[5].is_empty());
    }
    assert_eq!(table[5][0], "#agg");
    ok(d.path(), &["greedy", "--data", &test, "--budget", "3"]);
    assert_eq!(first, fs::read(d.path().join("greedy.csv")).unwrap());

    ok(d.path(), &["greedy", "--data", &test, "--budget", "6"]);
    let ds = load_dataset(Path::new(&test)).unwrap();
    let all: Vec<usize> = (0..6).collect();
    for (row, inst) in rows(d.path().join("greedy.csv")).iter().zip(&ds.instances) {
        let optimum = solve_minimax_gap(inst, &all).unwrap().d;
        assert!((row[2].parse::<f64>().unwrap() - optimum).abs() <= 1e-9 * (1.0 + optimum));
    }
}

#[test]
fn training_outputs_and_tags() {
    let d = tempfile::tempdir().unwrap();
    small_data(d.path(), "6");
    let train = path(d.path(), "dataset.train");
    ok(d.path(), &["train", "--mode", "d3qn", "--data", &train, "--steps", "0"]);
    let log = fs::read_to_string(d.path().join("d3qn.train_log.csv")).unwrap();
    assert_eq!(log, "episode,steps,terminal_mg,terminal_rmsg,mean_loss,epsilon\n");
    ok(d.path(), &["train", "--mode", "rees", "--data", &train, "--episodes", "30", "--warmup", "20", "--batch-size", "8"]);
    let q = Checkpoint::load(&d.path().join("d3qn.checkpoint.json")).unwrap();
    let r = Checkpoint::load(&d.path().join("rees.checkpoint.json")).unwrap();
    assert_ne!(q.network.architecture(), r.network.architecture());
    assert_eq!(rows(d.path().join("rees.train_log.csv")).len(), 30);
}

#[test]
fn divergence_exits_nonzero_and_keeps_partial_checkpoint() {
    let d = tempfile::tempdir().unwrap();
    small_data(d.path(), "6");
    let train = path(d.path(), "dataset.train");
    let out = sapo(
        d.path(),
        &["train", "--mode", "d3qn", "--data", &train, "--steps", "200", "--warmup", "16", "--batch-size", "8", "--lr", "1e300"],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverged"));
    assert!(d.path().join("d3qn.checkpoint.json.partial").exists());
    assert!(!d.path().join("d3qn.checkpoint.json").exists());
}

#[test]
fn evaluation_modes_agree_where_they_must() {
    let d = tempfile::tempdir().unwrap();
    small_data(d.path(), "6");
    let (train, test) = (path(d.path(), "dataset.train"), path(d.path(), "dataset.test"));
    ok(d.path(), &["train", "--mode", "d3qn", "--data", &train, "--steps", "30", "--warmup", "16", "--batch-size", "8"]);
    ok(d.path(), &["train", "--mode", "rees", "--data", &train, "--steps", "30", "--warmup", "16", "--batch-size", "8"]);

    ok(d.path(), &["greedy", "--data", &test, "--budget", "3"]);
    ok(d.path(), &["eval", "--mode", "greedy-oracle", "--data", &test, "--budget", "3"]);
    let greedy = rows(d.path().join("greedy.csv"));
    let oracle = rows(d.path().join("eval_greedy-oracle.csv"));
    for (g, e) in greedy.iter().zip(&oracle).take(5) {
        assert_eq!(g[1], e[1]);
        assert_eq!(g[2], e[4]);
    }

    let mut columns = Vec::new();
    for mode in ["d3qn", "rees", "greedy-oracle", "random"] {
        ok(d.path(), &["eval", "--mode", mode, "--data", &test, "--budget", "6"]);
        let t = rows(d.path().join(format!("eval_{mode}.csv")));
        columns.push(t.iter().map(|r| r[4].parse::<f64>().unwrap()).collect::<Vec<_>>());
    }
    for c in &columns[1..] {
        for (a, b) in c.iter().zip(&columns[0]) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + b));
        }
    }
}

#[test]
fn checkpoint_dimension_mismatch_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    small_data(d.path(), "6");
    ok(d.path(), &["train", "--mode", "d3qn", "--data", &path(d.path(), "dataset.train"), "--steps", "0"]);
    let other = tempfile::tempdir().unwrap();
    small_data(other.path(), "5");
    let ckpt = path(d.path(), "d3qn.checkpoint.json");
    let out = sapo(
        other.path(),
        &["eval", "--mode", "d3qn", "--checkpoint", &ckpt, "--data", &path(other.path(), "dataset.test")],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("validation error"));
    let out = sapo(
        d.path(),
        &["eval", "--mode", "rees", "--checkpoint", &ckpt, "--data", &path(d.path(), "dataset.test")],
    );
    assert!(!out.status.success());
}

fn quartile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[test]
fn limit_sweeps_are_monotone_with_correct_quartiles() {
    let d = tempfile::tempdir().unwrap();
    small_data(d.path(), "6");
    let test = path(d.path(), "dataset.test");
    let limits = "0.02,0.05,0.1,0.2,0.4,0.8";
    ok(d.path(), &["eval", "--mode", "greedy-oracle", "--data", &test, "--limits", limits]);
    ok(d.path(), &["min-actuators", "--mode", "greedy-oracle", "--data", &test, "--limits", limits]);
    assert_eq!(
        fs::read(d.path().join("eval_greedy-oracle_limits.csv")).unwrap(),
        fs::read(d.path().join("min_actuators_greedy-oracle.csv")).unwrap()
    );
    let per_instance = rows(d.path().join("min_actuators_greedy-oracle.csv"));
    let summary = rows(d.path().join("min_actuators_greedy-oracle_summary.csv"));
    assert_eq!(summary.len(), 6);
    let mut previous: Option<Vec<usize>> = None;
    for s in &summary {
        let counts: Vec<usize> = per_instance
            .iter()
            .filter(|r| r[0] == s[0])
            .map(|r| r[2].parse().unwrap())
            .collect();
        assert_eq!(counts.len(), 5);
        let mut sorted: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        sorted.sort_by(f64::total_cmp);
        let expected = [
            sorted[0],
            quartile(&sorted, 0.25),
            quartile(&sorted, 0.5),
            quartile(&sorted, 0.75),
            sorted[4],
        ];
        for (field, e) in s[1..6].iter().zip(expected) {
            assert_eq!(field.parse::<f64>().unwrap(), e);
        }
        if let Some(prev) = &previous {
            assert!(prev.iter().zip(&counts).all(|(a, b)| b <= a));
        }
        previous = Some(counts);
    }
}

#[test]
fn limit_boundaries() {
    let d = tempfile::tempdir().unwrap();
    small_data(d.path(), "4");
    let test = path(d.path(), "dataset.test");
    let counts = |limit: &str| -> Vec<usize> {
        ok(d.path(), &["min-actuators", "--mode", "greedy-oracle", "--data", &test, "--limit", limit]);
        rows(d.path().join("min_actuators_greedy-oracle.csv"))
            .iter()
            .map(|r| r[2].parse().unwrap())
            .collect()
    };
    // A limit equal to the smallest initial gap is not yet met at reset by any instance.
    let ds = load_dataset(Path::new(&test)).unwrap();
    let smallest = ds.instances.iter().map(|i| i.psi().amax()).fold(f64::INFINITY, f64::min);
    assert!(counts(&format!("{smallest:?}")).iter().all(|&c| c >= 1));
    assert!(counts("1.5").iter().all(|&c| c == 0));
    assert!(counts("1e-12").iter().all(|&c| c == 4));
}

#[test]
fn config_file_and_environment_defaults() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    fs::write(&cfg, "seed = 5\n[gen]\nn = 30\nm = 7\ntrain = 2\ntest = 1\nname = \"cfg\"\n").unwrap();
    let out_dir = d.path().join("from_env");
    let out = Command::new(env!("CARGO_BIN_EXE_sapo"))
        .args(["--config", cfg.to_str().unwrap(), "gen", "--n", "20"])
        .env("SAPO_OUT_DIR", &out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ds = load_dataset(&out_dir.join("cfg.train")).unwrap();
    assert_eq!(ds.instances.len(), 2);
    assert_eq!((ds.instances[0].n(), ds.instances[0].m()), (20, 7));

    fs::write(&cfg, "[gen]\nbogus = 1\n").unwrap();
    let out = sapo(d.path(), &["--config", cfg.to_str().unwrap(), "gen"]);
    assert!(!out.status.success());
}
