//! End-to-end runs of the `mutval` binary on the offline fixture corpus.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mutval::datastore::{GenerateRecord, RankRecord, RunStore, Stage};
use mutval::export::import_pairs;
use mutval_core::PairType;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e")
}

fn mutval(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mutval"))
        .current_dir(dir)
        .env_remove("GEN_ENDPOINT")
        .env_remove("GEN_API_KEY")
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_full(dir: &Path, run_id: &str, extra: &[&str]) -> Output {
    let fx = fixture();
    let mut args = vec![
        "run",
        "--fixture",
        fx.to_str().unwrap(),
        "--runs-dir",
        "runs",
        "--out",
        "out",
        "--run-id",
        run_id,
    ];
    args.extend_from_slice(extra);
    mutval(dir, &args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn full_run_writes_bounded_pairs_and_names_every_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_full(dir.path(), "r", &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    for s in Stage::ALL {
        assert!(text.contains(s.as_str()), "summary lacks {s}: {text}");
    }
    let pairs = import_pairs(&dir.path().join("out/pairs.jsonl")).unwrap();
    let n = |ty| pairs.iter().filter(|p| p.pair_type == ty).count();
    assert!(n(PairType::Correctness) <= 3);
    assert!(n(PairType::Efficiency) <= 3);
    assert_eq!(n(PairType::Correctness), 2);
    assert_eq!(n(PairType::Efficiency), 2);

    let store = RunStore::open(
        &dir.path().join("runs"),
        "r",
        &mutval::config::PipelineConfig::default().fingerprint(),
    )
    .unwrap();
    let problems = store
        .read_stage::<GenerateRecord>(Stage::Generate)
        .unwrap()
        .records;
    for p in &pairs {
        let prob = problems
            .iter()
            .find(|g| g.problem.problem_id == p.problem_id)
            .expect("pair resolves to a problem");
        assert!(prob.problem.codes.contains(&p.chosen));
        assert!(prob.problem.codes.contains(&p.rejected));
        assert_ne!(p.chosen, p.rejected);
        match p.pair_type {
            PairType::Correctness => {
                let gap = (p.meta.chosen_score - p.meta.rejected_score) / p.meta.chosen_score;
                assert!(gap >= p.meta.config.delta);
            }
            PairType::Efficiency => {
                let (fast, slow) = (
                    p.meta.chosen_time_ms.unwrap(),
                    p.meta.rejected_time_ms.unwrap(),
                );
                assert!(slow >= (1.0 + p.meta.config.gamma) * fast);
            }
        }
    }
    for r in store.read_stage::<RankRecord>(Stage::Rank).unwrap().records {
        let g = problems
            .iter()
            .find(|g| g.problem.problem_id == r.problem_id)
            .unwrap();
        assert_eq!(r.state.code_scores.len(), g.problem.codes.len());
        assert_eq!(r.state.test_scores.len(), g.problem.tests.len());
    }
}

#[test]
fn two_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_full(a.path(), "x", &[]).status.success());
    assert!(run_full(b.path(), "y", &["--parallelism", "1"])
        .status
        .success());
    let fa = fs::read(a.path().join("out/pairs.jsonl")).unwrap();
    let fb = fs::read(b.path().join("out/pairs.jsonl")).unwrap();
    assert_eq!(fa, fb);
}

#[test]
fn interrupted_run_resumes_to_same_file() {
    let clean = tempfile::tempdir().unwrap();
    assert!(run_full(clean.path(), "r", &[]).status.success());
    let want = fs::read(clean.path().join("out/pairs.jsonl")).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let first = run_full(dir.path(), "r", &["--limit", "1"]);
    assert!(first.status.success());
    let fp = mutval::config::PipelineConfig::default().fingerprint();
    {
        let store = RunStore::open(&dir.path().join("runs"), "r", &fp).unwrap();
        assert_eq!(store.completed(Stage::Seed).len(), 1);
        assert_eq!(store.completed(Stage::Pairs).len(), 1);
    }
    // a torn write from a crash mid-batch
    let gen_file = dir.path().join("runs/r/generate");
    let mut text = fs::read_to_string(&gen_file).unwrap();
    text.push_str("{\"problem\": {\"problem_id\": \"p-trunc");
    fs::write(&gen_file, text).unwrap();

    let second = run_full(dir.path(), "r", &[]);
    assert!(
        second.status.success(),
        "{}",
        String::from_utf8_lossy(&second.stderr)
    );
    let summary = stdout(&second);
    assert!(summary.contains("seed      processed     2"), "{summary}");
    assert!(summary.contains("pairs     processed     2"), "{summary}");
    assert_eq!(fs::read(dir.path().join("out/pairs.jsonl")).unwrap(), want);

    let third = run_full(dir.path(), "r", &[]);
    assert!(stdout(&third).contains("pairs     processed     0"));
    assert_eq!(fs::read(dir.path().join("out/pairs.jsonl")).unwrap(), want);
}

#[test]
fn rank_alone_needs_no_services() {
    let dir = tempfile::tempdir().unwrap();
    let up_to_validate = run_full(dir.path(), "r", &["--stages", "seed,generate,validate"]);
    assert!(up_to_validate.status.success());
    assert!(!dir.path().join("runs/r/rank").exists());

    // no fixture, no endpoint, no harness: rank must still run
    let out = mutval(dir.path(), &["rank", "--runs-dir", "runs", "--run-id", "r"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("runs/r/rank").exists());
    assert!(!dir.path().join("runs/r/time").exists());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(mutval(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        mutval(dir.path(), &["run", "--stages", "bogus"])
            .status
            .code(),
        Some(2)
    );

    fs::write(dir.path().join("bad.toml"), "[scoring]\ndamping = 2.0\n").unwrap();
    assert_eq!(
        mutval(dir.path(), &["rank", "--config", "bad.toml"])
            .status
            .code(),
        Some(2)
    );
    fs::write(dir.path().join("typo.toml"), "dampign = 0.5\n").unwrap();
    assert_eq!(
        mutval(dir.path(), &["rank", "--config", "typo.toml"])
            .status
            .code(),
        Some(2)
    );

    let out = mutval(
        dir.path(),
        &["run", "--runs-dir", "runs", "--stages", "seed,generate"],
    );
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn changed_config_on_existing_run_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_full(dir.path(), "r", &["--stages", "seed"])
        .status
        .success());
    fs::write(dir.path().join("c.toml"), "[scoring]\ndamping = 0.5\n").unwrap();
    let out = run_full(dir.path(), "r", &["--config", "c.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration"));
}

#[test]
fn synthetic_eval_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = mutval(dir.path(), &["eval", "--synthetic", "20", "--seed", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in [
        "self_validation",
        "pass_count",
        "filter_all",
        "consensus_product",
        "random",
    ] {
        assert!(text.contains(name), "{text}");
    }
}
