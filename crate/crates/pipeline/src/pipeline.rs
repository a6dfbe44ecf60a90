//! Stage orchestration: seed, generate, validate, rank, time, pairs, eval.
//!
//! Each stage reads earlier stages from the run store, works through its
//! pending problems in batches, and writes only its own stage file. A
//! problem that fails is logged as skipped for that stage and the run
//! carries on.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use mutval_core::pairs::{select_correctness_pair, select_credible_tests, select_efficiency_pair};
use mutval_core::planted::{planted_graph, PlantedGraphSpec};
use mutval_core::strategies::{compare_strategies, evaluate_scores, StrategySummary};
use mutval_core::timing::max_penalty_ms;
use mutval_core::{
    rank_candidates, run_scoring, ConfigSnapshot, PairType, Problem, Strategy, TimingSummary,
};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::PipelineConfig;
use crate::datastore::{
    EvalRecord, GenerateRecord, PairsRecord, Pending, RankRecord, RunStore, SeedRecord, Stage,
    StageRecord, StoreError, TimeRecord, ValidateRecord,
};
use crate::executor::{run_indexed, Executor, ScriptedBackend};
use crate::export::{export_pairs, ExportError};
use crate::genclient::decontam::NgramIndex;
use crate::genclient::{load_seed_corpus, FixtureTransport, GenClient, SeedSnippet};

pub const PAIRS_FILE: &str = "pairs.jsonl";
pub const EVAL_FILE: &str = "eval.jsonl";
pub const ORACLE_EXT: &str = "oracle";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("reading seed corpus {path}: {source}")]
    Corpus {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("stage {stage} needs {what}, which is not configured")]
    MissingService { stage: Stage, what: &'static str },
    #[error("{0}")]
    Fixture(String),
    #[error(transparent)]
    Core(#[from] mutval_core::Error),
}

/// Collaborators a run may need. Stages that do not use a service never
/// touch it, so e.g. `rank` runs with neither a client nor an executor.
#[derive(Default)]
pub struct Services {
    pub gen: Option<GenClient>,
    pub executor: Option<Executor>,
    pub decontam: Option<NgramIndex>,
}

/// Offline inputs: a seed corpus, canned completions and scripted outcomes.
///
/// ```text
/// <dir>/corpus/      seed files, each optionally with a .oracle sibling
/// <dir>/responses.json
/// <dir>/outcomes.json  (optional)
/// ```
pub struct Fixture {
    pub corpus_dir: PathBuf,
    pub transport: FixtureTransport,
    pub outcomes: Option<ScriptedBackend>,
}

impl Fixture {
    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let transport = FixtureTransport::from_file(&dir.join("responses.json"))
            .map_err(|e| PipelineError::Fixture(e.message))?;
        let outcomes_path = dir.join("outcomes.json");
        let outcomes = if outcomes_path.exists() {
            Some(
                ScriptedBackend::from_file(&outcomes_path)
                    .map_err(|e| PipelineError::Fixture(e.0))?,
            )
        } else {
            None
        };
        Ok(Self {
            corpus_dir: dir.join("corpus"),
            transport,
            outcomes,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub stages: Vec<Stage>,
    /// Process at most this many problems per stage in this invocation.
    pub limit: Option<usize>,
    pub seed: u64,
    pub corpus_dir: PathBuf,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: Stage,
    pub processed: usize,
    pub skipped: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub run_id: String,
    pub problems: usize,
    pub stages: Vec<StageReport>,
    pub correctness_pairs: usize,
    pub efficiency_pairs: usize,
    pub skips: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub eval: Vec<StrategySummary>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.4}"))
}

/// Plain-text table of per-strategy means.
pub fn format_strategy_table(rows: &[StrategySummary]) -> String {
    let mut s = format!(
        "{:<18} {:>9} {:>9} {:>9} {:>8}\n",
        "strategy", "spearman", "kendall", "ndcg", "defined"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<18} {:>9} {:>9} {:>9} {:>4}/{:<3}\n",
            r.strategy.name(),
            fmt_opt(r.mean_spearman),
            fmt_opt(r.mean_kendall),
            fmt_opt(r.mean_ndcg),
            r.n_defined,
            r.n_defined + r.n_undefined
        ));
    }
    s
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "run {}: {} problem(s)", self.run_id, self.problems)?;
        for s in &self.stages {
            writeln!(
                f,
                "  {:<9} processed {:>5}  skipped {:>4}  {:>9.1} ms",
                s.stage.as_str(),
                s.processed,
                s.skipped,
                s.wall_ms
            )?;
        }
        writeln!(
            f,
            "  pairs: {} correctness, {} efficiency; {} skip(s) logged",
            self.correctness_pairs, self.efficiency_pairs, self.skips
        )?;
        if let Some(p) = &self.pairs_file {
            writeln!(f, "  pairs file: {}", p.display())?;
        }
        if !self.eval.is_empty() {
            write!(f, "{}", format_strategy_table(&self.eval))?;
        }
        Ok(())
    }
}

/// Seed for the random baseline on one problem, independent of the order
/// problems are processed in.
pub fn problem_seed(seed: u64, problem_id: &str) -> u64 {
    let d = Sha256::digest(problem_id.as_bytes());
    seed ^ u64::from_le_bytes(d[..8].try_into().expect("digest has 8 bytes"))
}

pub fn config_snapshot(cfg: &PipelineConfig) -> ConfigSnapshot {
    ConfigSnapshot {
        damping: cfg.scoring.damping,
        iterations: cfg.scoring.iterations,
        sweep: cfg.scoring.sweep,
        delta: cfg.pairs.delta,
        gamma: cfg.pairs.gamma,
        repetitions: cfg.repetitions,
        time_limit_ms: cfg.limits.time_limit_ms,
        fingerprint: cfg.fingerprint(),
    }
}

/// Reads a stage into a map by id, logging unreadable lines.
fn load<T: StageRecord>(
    store: &RunStore,
    stage: Stage,
) -> Result<BTreeMap<String, T>, PipelineError> {
    let read = match store.read_stage::<T>(stage) {
        Ok(r) => r,
        Err(StoreError::NotFound(_)) => return Ok(BTreeMap::new()),
        Err(e) => return Err(e.into()),
    };
    for e in &read.errors {
        log::warn!("{stage} line {}: {}", e.line, e.message);
    }
    Ok(read
        .records
        .into_iter()
        .map(|r| (r.problem_id().to_owned(), r))
        .collect())
}

fn pending_ids(store: &RunStore, stage: Stage, limit: Option<usize>) -> Vec<String> {
    let ids = match store.pending(stage) {
        Pending::Ids(ids) => ids,
        Pending::All => Vec::new(),
    };
    match limit {
        Some(n) => ids.into_iter().take(n).collect(),
        None => ids,
    }
}

type Outcome<T> = Result<T, String>;

/// Writes one batch of per-problem outcomes: successes to the stage file,
/// failures to the skip log.
fn commit<T: StageRecord>(
    store: &mut RunStore,
    stage: Stage,
    ids: &[String],
    outcomes: Vec<Outcome<T>>,
    report: &mut StageReport,
) -> Result<(), PipelineError> {
    let mut ok = Vec::new();
    for (id, o) in ids.iter().zip(outcomes) {
        match o {
            Ok(r) => ok.push(r),
            Err(reason) => {
                log::info!("{stage}: skipping {id}: {reason}");
                store.mark_skipped(stage, id, &reason)?;
                report.skipped += 1;
            }
        }
    }
    report.processed += store.write_stage(stage, &ok)?;
    Ok(())
}

pub struct Pipeline<'a> {
    pub config: &'a PipelineConfig,
    pub services: &'a Services,
    pub store: &'a mut RunStore,
}

impl<'a> Pipeline<'a> {
    pub fn run(&mut self, opts: &RunOptions) -> Result<Summary, PipelineError> {
        let mut stages = opts.stages.clone();
        stages.sort();
        stages.dedup();
        let mut reports = Vec::new();
        let mut pairs_file = None;
        let mut eval = Vec::new();
        for stage in stages {
            let start = Instant::now();
            let mut report = StageReport {
                stage,
                processed: 0,
                skipped: 0,
                wall_ms: 0.0,
            };
            match stage {
                Stage::Seed => self.seed(opts, &mut report)?,
                Stage::Generate => self.generate(opts, &mut report)?,
                Stage::Validate => self.validate(opts, &mut report)?,
                Stage::Rank => self.rank(opts, &mut report)?,
                Stage::Time => self.time(opts, &mut report)?,
                Stage::Pairs => {
                    self.pairs(opts, &mut report)?;
                    pairs_file = Some(self.export(&opts.out_dir)?);
                }
                Stage::Eval => {
                    self.eval(opts, &mut report)?;
                    eval = self.write_eval_report(&opts.out_dir)?;
                }
            }
            report.wall_ms = start.elapsed().as_secs_f64() * 1000.0;
            log::info!(
                "{stage}: {} processed, {} skipped",
                report.processed,
                report.skipped
            );
            reports.push(report);
        }
        let pair_records: BTreeMap<String, PairsRecord> = load(self.store, Stage::Pairs)?;
        let count = |ty| {
            pair_records
                .values()
                .flat_map(|r| &r.pairs)
                .filter(|p| p.pair_type == ty)
                .count()
        };
        Ok(Summary {
            run_id: self.store.manifest().run_id.clone(),
            problems: self.store.completed(Stage::Seed).len(),
            stages: reports,
            correctness_pairs: count(PairType::Correctness),
            efficiency_pairs: count(PairType::Efficiency),
            skips: Stage::ALL
                .iter()
                .map(|&s| self.store.skipped(s).len())
                .sum(),
            pairs_file,
            eval,
        })
    }

    fn seed(&mut self, opts: &RunOptions, report: &mut StageReport) -> Result<(), PipelineError> {
        let ext = &self.config.paths.seed_ext;
        let snippets =
            load_seed_corpus(&opts.corpus_dir, ext).map_err(|source| PipelineError::Corpus {
                path: opts.corpus_dir.clone(),
                source,
            })?;
        let done = self.store.completed(Stage::Seed);
        let mut records: Vec<SeedRecord> = Vec::new();
        for seed in snippets {
            let problem_id = seed.problem_id();
            if done.contains(&problem_id) || records.iter().any(|r| r.problem_id == problem_id) {
                continue;
            }
            let oracle_tests = read_oracle(&opts.corpus_dir, &seed, ext);
            records.push(SeedRecord {
                problem_id,
                seed,
                oracle_tests,
            });
        }
        records.sort_by(|a, b| a.problem_id.cmp(&b.problem_id));
        if let Some(n) = opts.limit {
            records.truncate(n);
        }
        report.processed += self.store.write_stage(Stage::Seed, &records)?;
        Ok(())
    }

    fn generate(
        &mut self,
        opts: &RunOptions,
        report: &mut StageReport,
    ) -> Result<(), PipelineError> {
        let ids = pending_ids(self.store, Stage::Generate, opts.limit);
        if ids.is_empty() {
            return Ok(());
        }
        let gen = self
            .services
            .gen
            .as_ref()
            .ok_or(PipelineError::MissingService {
                stage: Stage::Generate,
                what: "a generation endpoint or fixture",
            })?;
        let seeds: BTreeMap<String, SeedRecord> = load(self.store, Stage::Seed)?;
        let width = gen.config().max_concurrent;
        for batch in ids.chunks(self.config.batch_size) {
            let outcomes = run_indexed(batch.len(), width, |k| {
                Ok::<_, ()>(match seeds.get(&batch[k]) {
                    None => Err("seed record unreadable".to_owned()),
                    Some(s) => generate_one(gen, self.services.decontam.as_ref(), s),
                })
            })
            .expect("generation jobs are infallible");
            commit(self.store, Stage::Generate, batch, outcomes, report)?;
        }
        Ok(())
    }

    fn validate(
        &mut self,
        opts: &RunOptions,
        report: &mut StageReport,
    ) -> Result<(), PipelineError> {
        let ids = pending_ids(self.store, Stage::Validate, opts.limit);
        if ids.is_empty() {
            return Ok(());
        }
        let exec = self.executor(Stage::Validate)?;
        let problems: BTreeMap<String, GenerateRecord> = load(self.store, Stage::Generate)?;
        for batch in ids.chunks(self.config.batch_size) {
            let outcomes = batch
                .iter()
                .map(|id| {
                    let p = &problems
                        .get(id)
                        .ok_or("generate record unreadable")?
                        .problem;
                    let (links, executions) = exec
                        .execute_problem_matrix(&p.codes, &p.tests)
                        .map_err(|e| e.to_string())?;
                    Ok(ValidateRecord {
                        problem_id: id.clone(),
                        links,
                        executions,
                    })
                })
                .collect();
            commit(self.store, Stage::Validate, batch, outcomes, report)?;
        }
        Ok(())
    }

    fn rank(&mut self, opts: &RunOptions, report: &mut StageReport) -> Result<(), PipelineError> {
        let ids = pending_ids(self.store, Stage::Rank, opts.limit);
        if ids.is_empty() {
            return Ok(());
        }
        let validated: BTreeMap<String, ValidateRecord> = load(self.store, Stage::Validate)?;
        for batch in ids.chunks(self.config.batch_size) {
            let outcomes = batch
                .iter()
                .map(|id| {
                    let v = validated.get(id).ok_or("validate record unreadable")?;
                    let state =
                        run_scoring(&v.links, &self.config.scoring).map_err(|e| e.to_string())?;
                    let order = rank_candidates(&state).order;
                    Ok(RankRecord {
                        problem_id: id.clone(),
                        state,
                        order,
                    })
                })
                .collect();
            commit(self.store, Stage::Rank, batch, outcomes, report)?;
        }
        Ok(())
    }

    fn time(&mut self, opts: &RunOptions, report: &mut StageReport) -> Result<(), PipelineError> {
        let ids = pending_ids(self.store, Stage::Time, opts.limit);
        if ids.is_empty() {
            return Ok(());
        }
        let exec = self.executor(Stage::Time)?;
        let problems: BTreeMap<String, GenerateRecord> = load(self.store, Stage::Generate)?;
        let validated: BTreeMap<String, ValidateRecord> = load(self.store, Stage::Validate)?;
        let ranked: BTreeMap<String, RankRecord> = load(self.store, Stage::Rank)?;
        for batch in ids.chunks(self.config.batch_size) {
            let outcomes = batch
                .iter()
                .map(|id| {
                    let (Some(g), Some(v), Some(r)) =
                        (problems.get(id), validated.get(id), ranked.get(id))
                    else {
                        return Err("upstream record unreadable".to_owned());
                    };
                    self.time_one(exec, &g.problem, v, r)
                })
                .collect();
            commit(self.store, Stage::Time, batch, outcomes, report)?;
        }
        Ok(())
    }

    fn time_one(
        &self,
        exec: &Executor,
        problem: &Problem,
        v: &ValidateRecord,
        r: &RankRecord,
    ) -> Outcome<TimeRecord> {
        let ranking = rank_candidates(&r.state);
        let credible = select_credible_tests(&v.links, &ranking).map_err(|e| e.to_string())?;
        let mut timings = Vec::new();
        if !credible.is_empty() {
            let suite: Vec<(usize, &str)> = credible
                .iter()
                .map(|&j| (j, problem.tests[j].as_str()))
                .collect();
            for (i, code) in problem.codes.iter().enumerate() {
                let passes_all = credible.iter().all(|&j| v.links.passes(i, j));
                let summary = if passes_all {
                    exec.measure_credible_time(i, code, &suite, self.config.repetitions)
                        .map_err(|e| e.to_string())?
                } else {
                    // already known to fail a credible test; no need to run it
                    TimingSummary {
                        code_idx: i,
                        total_time_ms: max_penalty_ms(
                            self.config.limits.time_limit_ms,
                            credible.len(),
                        ),
                        per_test: Vec::new(),
                        repetitions: self.config.repetitions,
                        disqualified: true,
                    }
                };
                timings.push(summary);
            }
        }
        Ok(TimeRecord {
            problem_id: problem.problem_id.clone(),
            credible_tests: credible,
            timings,
        })
    }

    fn pairs(&mut self, opts: &RunOptions, report: &mut StageReport) -> Result<(), PipelineError> {
        let ids = pending_ids(self.store, Stage::Pairs, opts.limit);
        if ids.is_empty() {
            return Ok(());
        }
        let problems: BTreeMap<String, GenerateRecord> = load(self.store, Stage::Generate)?;
        let ranked: BTreeMap<String, RankRecord> = load(self.store, Stage::Rank)?;
        let timed: BTreeMap<String, TimeRecord> = load(self.store, Stage::Time)?;
        let snapshot = config_snapshot(self.config);
        for batch in ids.chunks(self.config.batch_size) {
            let outcomes = batch
                .iter()
                .map(|id| {
                    let (Some(g), Some(r), Some(t)) =
                        (problems.get(id), ranked.get(id), timed.get(id))
                    else {
                        return Err("upstream record unreadable".to_owned());
                    };
                    let p = &g.problem;
                    let mut pairs = Vec::new();
                    let err = |e: mutval_core::Error| e.to_string();
                    pairs.extend(
                        select_correctness_pair(p, &r.state, self.config.pairs.delta, &snapshot)
                            .map_err(err)?,
                    );
                    if !t.timings.is_empty() {
                        pairs.extend(
                            select_efficiency_pair(
                                p,
                                &t.timings,
                                &r.state.code_scores,
                                self.config.pairs.gamma,
                                &snapshot,
                            )
                            .map_err(err)?,
                        );
                    }
                    Ok(PairsRecord {
                        problem_id: id.clone(),
                        pairs,
                    })
                })
                .collect();
            commit(self.store, Stage::Pairs, batch, outcomes, report)?;
        }
        Ok(())
    }

    /// Writes every stored pair to `<out>/pairs.jsonl`.
    pub fn export(&self, out_dir: &Path) -> Result<PathBuf, PipelineError> {
        let records: BTreeMap<String, PairsRecord> = load(self.store, Stage::Pairs)?;
        let pairs: Vec<_> = records.into_values().flat_map(|r| r.pairs).collect();
        let path = out_dir.join(PAIRS_FILE);
        export_pairs(&pairs, &path)?;
        Ok(path)
    }

    fn eval(&mut self, opts: &RunOptions, report: &mut StageReport) -> Result<(), PipelineError> {
        let ids = pending_ids(self.store, Stage::Eval, opts.limit);
        if ids.is_empty() {
            return Ok(());
        }
        let problems: BTreeMap<String, GenerateRecord> = load(self.store, Stage::Generate)?;
        let validated: BTreeMap<String, ValidateRecord> = load(self.store, Stage::Validate)?;
        let needs_exec = ids.iter().any(|id| {
            problems
                .get(id)
                .is_some_and(|g| !g.problem.oracle_tests.is_empty())
        });
        let exec = if needs_exec {
            Some(self.executor(Stage::Eval)?)
        } else {
            None
        };
        for batch in ids.chunks(self.config.batch_size) {
            let outcomes = batch
                .iter()
                .map(|id| {
                    let (Some(g), Some(v)) = (problems.get(id), validated.get(id)) else {
                        return Err("upstream record unreadable".to_owned());
                    };
                    let p = &g.problem;
                    if p.oracle_tests.is_empty() {
                        return Err("no oracle tests".to_owned());
                    }
                    let exec = exec.expect("executor resolved when oracle tests exist");
                    let truth = exec
                        .actual_accuracy(&p.codes, &p.oracle_tests)
                        .map_err(|e| e.to_string())?;
                    let seed = problem_seed(opts.seed, id);
                    let metrics = Strategy::ALL
                        .iter()
                        .map(|&s| {
                            let scores = s.code_scores(&v.links, &self.config.scoring, seed)?;
                            Ok((s, evaluate_scores(&scores, &truth)?))
                        })
                        .collect::<Result<Vec<_>, mutval_core::Error>>()
                        .map_err(|e| e.to_string())?;
                    Ok(EvalRecord {
                        problem_id: id.clone(),
                        accuracy: truth.0,
                        metrics,
                    })
                })
                .collect();
            commit(self.store, Stage::Eval, batch, outcomes, report)?;
        }
        Ok(())
    }

    /// Aggregates stored eval records, writes `<out>/eval.jsonl` and
    /// returns the per-strategy means.
    pub fn write_eval_report(&self, out_dir: &Path) -> Result<Vec<StrategySummary>, PipelineError> {
        let records: BTreeMap<String, EvalRecord> = load(self.store, Stage::Eval)?;
        let rows = summarize_eval(records.values());
        let mut text = String::new();
        for r in &rows {
            text.push_str(&serde_json::to_string(r).expect("summary serializes"));
            text.push('\n');
        }
        let path = out_dir.join(EVAL_FILE);
        std::fs::create_dir_all(out_dir)
            .and_then(|_| crate::datastore::write_atomic(&path, text.as_bytes()))
            .map_err(|source| ExportError::Io { path, source })?;
        Ok(rows)
    }

    fn executor(&self, stage: Stage) -> Result<&'a Executor, PipelineError> {
        let services: &'a Services = self.services;
        services
            .executor
            .as_ref()
            .ok_or(PipelineError::MissingService {
                stage,
                what: "an execution backend",
            })
    }
}

fn read_oracle(corpus: &Path, seed: &SeedSnippet, ext: &str) -> Vec<String> {
    let rel = seed
        .source_path
        .strip_suffix(ext)
        .unwrap_or(&seed.source_path);
    let path = corpus.join(format!("{rel}{ORACLE_EXT}"));
    std::fs::read_to_string(path)
        .map(|t| {
            t.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_owned)
                .collect()
        })
        .unwrap_or_default()
}

fn generate_one(
    gen: &GenClient,
    decontam: Option<&NgramIndex>,
    s: &SeedRecord,
) -> Outcome<GenerateRecord> {
    let e = |e: crate::genclient::GenError| e.to_string();
    let concepts = gen.extract_concepts(&s.seed).map_err(e)?;
    let prompt = gen
        .generate_task(&concepts, &s.seed.language_tag)
        .map_err(e)?;
    if decontam.is_some_and(|idx| idx.overlaps(&prompt)) {
        return Err("instruction overlaps benchmark text".into());
    }
    let candidates = gen.generate_candidates(&prompt).map_err(e)?;
    let tests = gen.generate_tests(&prompt).map_err(e)?;
    Ok(GenerateRecord {
        problem: Problem {
            problem_id: s.problem_id.clone(),
            prompt,
            codes: candidates.codes,
            tests: tests.tests,
            provenance: Some(s.seed.source_path.clone()),
            oracle_tests: s.oracle_tests.clone(),
        },
        concepts,
        n_blank_candidates: candidates.n_blank,
        n_discarded_lines: tests.n_discarded,
    })
}

/// Spearman, Kendall and NDCG samples plus the undefined count.
type MetricSamples = (Vec<f64>, Vec<f64>, Vec<f64>, usize);

/// Per-strategy means over eval records; undefined correlations are
/// excluded and counted.
pub fn summarize_eval<'a>(
    records: impl IntoIterator<Item = &'a EvalRecord>,
) -> Vec<StrategySummary> {
    let mut acc: BTreeMap<Strategy, MetricSamples> = BTreeMap::new();
    for r in records {
        for (s, m) in &r.metrics {
            let e = acc.entry(*s).or_default();
            e.2.push(m.ndcg);
            match (m.spearman, m.kendall) {
                (Some(a), Some(b)) => {
                    e.0.push(a);
                    e.1.push(b);
                }
                _ => e.3 += 1,
            }
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    Strategy::ALL
        .iter()
        .filter_map(|s| acc.get(s).map(|e| (s, e)))
        .map(|(&strategy, (sp, kt, nd, undefined))| StrategySummary {
            strategy,
            mean_spearman: mean(sp),
            mean_kendall: mean(kt),
            mean_ndcg: mean(nd),
            n_defined: sp.len(),
            n_undefined: *undefined,
        })
        .collect()
}

/// Planted-graph settings for the synthetic strategy comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n_graphs: usize,
    pub n_codes: usize,
    pub n_tests: usize,
    pub p_correct_code: f64,
    pub p_valid_test: f64,
    pub noise: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_graphs: 200,
            n_codes: 15,
            n_tests: 15,
            p_correct_code: 0.5,
            p_valid_test: 0.7,
            noise: 0.15,
        }
    }
}

/// Compares every strategy on `spec.n_graphs` planted graphs; graph `k`
/// is generated from `seed + k`.
pub fn synthetic_comparison(
    spec: &SyntheticSpec,
    scoring: &mutval_core::ScoringConfig,
    seed: u64,
) -> Result<Vec<StrategySummary>, PipelineError> {
    let instances = (0..spec.n_graphs)
        .map(|k| {
            planted_graph(&PlantedGraphSpec {
                n_codes: spec.n_codes,
                n_tests: spec.n_tests,
                p_correct_code: spec.p_correct_code,
                p_valid_test: spec.p_valid_test,
                noise: spec.noise,
                rng_seed: seed.wrapping_add(k as u64),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(compare_strategies(
        &instances,
        &Strategy::ALL,
        scoring,
        seed,
    )?)
}

/// Builds the services a fixture run needs from a loaded fixture.
pub fn fixture_services(
    cfg: &PipelineConfig,
    fixture: &Fixture,
) -> Result<Services, PipelineError> {
    let gen = GenClient::new(Arc::new(fixture.transport.clone()), cfg.generation.clone())
        .map_err(|e| PipelineError::Fixture(e.to_string()))?;
    let executor = fixture
        .outcomes
        .clone()
        .map(|b| Executor::new(Arc::new(b), cfg.limits, cfg.parallelism));
    Ok(Services {
        gen: Some(gen),
        executor,
        decontam: None,
    })
}
