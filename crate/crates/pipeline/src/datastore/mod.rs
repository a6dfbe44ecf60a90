//! Staged, resumable storage for pipeline artifacts.
//!
//! ```text
//! runs/<run_id>/
//!   manifest        JSON: fingerprint, completed and skipped ids per stage
//!   seed            one JSON record per line after a schema header line
//!   generate ...    same shape for every stage
//!   skips           append-only log of skipped problems
//! ```
//!
//! Records are appended first and the manifest is replaced afterwards by
//! write-then-rename, so a crash between the two leaves orphan lines that
//! reads ignore and a later write supersedes.

mod records;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use records::{
    EvalRecord, GenerateRecord, PairsRecord, RankRecord, SeedRecord, StageRecord, TimeRecord,
    ValidateRecord,
};

pub const MANIFEST_SCHEMA: &str = "mutval.manifest/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Seed,
    Generate,
    Validate,
    Rank,
    Time,
    Pairs,
    Eval,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Seed,
        Stage::Generate,
        Stage::Validate,
        Stage::Rank,
        Stage::Time,
        Stage::Pairs,
        Stage::Eval,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Seed => "seed",
            Stage::Generate => "generate",
            Stage::Validate => "validate",
            Stage::Rank => "rank",
            Stage::Time => "time",
            Stage::Pairs => "pairs",
            Stage::Eval => "eval",
        }
    }

    pub fn previous(self) -> Option<Stage> {
        let i = Stage::ALL.iter().position(|&s| s == self)?;
        i.checked_sub(1).map(|j| Stage::ALL[j])
    }

    pub fn schema(self) -> String {
        format!("mutval.{}/v1", self.as_str())
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("stage {0} has not been written")]
    NotFound(Stage),
    #[error(
        "run {run_id} was created with configuration {stored}, current configuration is {current}"
    )]
    FingerprintMismatch {
        run_id: String,
        stored: String,
        current: String,
    },
    #[error("{path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("invalid run id {0:?}")]
    InvalidRunId(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Writes `bytes` to a sibling temp file, syncs it, then renames it over
/// `path`. The temp file is removed on failure.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let result = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn ends_with_newline(path: &Path) -> io::Result<bool> {
    use std::io::{Read, Seek, SeekFrom};
    let mut f = File::open(path)?;
    if f.seek(SeekFrom::End(0))? == 0 {
        return Ok(true);
    }
    f.seek(SeekFrom::End(-1))?;
    let mut last = [0u8];
    f.read_exact(&mut last)?;
    Ok(last[0] == b'\n')
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageProgress {
    pub completed: BTreeSet<String>,
    /// Problem id to reason.
    #[serde(default)]
    pub skipped: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageManifest {
    pub schema: String,
    pub run_id: String,
    pub fingerprint: String,
    pub stages: BTreeMap<Stage, StageProgress>,
}

/// A record that failed to parse, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRead<T> {
    pub records: Vec<T>,
    pub errors: Vec<LineError>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pending {
    /// Nothing has been seeded yet.
    All,
    Ids(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SkipLogEntry<'a> {
    stage: Stage,
    problem_id: &'a str,
    reason: &'a str,
}

/// One run directory, opened by its single writer.
#[derive(Debug)]
pub struct RunStore {
    dir: PathBuf,
    manifest: StageManifest,
}

impl RunStore {
    /// Opens or creates `root/run_id`. An existing run must have been
    /// created with the same configuration fingerprint.
    pub fn open(root: &Path, run_id: &str, fingerprint: &str) -> Result<Self, StoreError> {
        if run_id.is_empty()
            || !run_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            || run_id.starts_with('.')
        {
            return Err(StoreError::InvalidRunId(run_id.to_owned()));
        }
        let dir = root.join(run_id);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let path = dir.join("manifest");
        let manifest = match Self::load_manifest(&path)? {
            Some(m) => {
                if m.fingerprint != fingerprint {
                    return Err(StoreError::FingerprintMismatch {
                        run_id: run_id.to_owned(),
                        stored: m.fingerprint,
                        current: fingerprint.to_owned(),
                    });
                }
                m
            }
            None => {
                let m = StageManifest {
                    schema: MANIFEST_SCHEMA.into(),
                    run_id: run_id.to_owned(),
                    fingerprint: fingerprint.to_owned(),
                    stages: BTreeMap::new(),
                };
                let store = Self { dir, manifest: m };
                store.save_manifest()?;
                return Ok(store);
            }
        };
        Ok(Self { dir, manifest })
    }

    pub fn load_manifest(path: &Path) -> Result<Option<StageManifest>, StoreError> {
        match fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| StoreError::Corrupt {
                    path: path.to_owned(),
                    message: e.to_string(),
                }),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_err(path)(e)),
        }
    }

    fn save_manifest(&self) -> Result<(), StoreError> {
        let path = self.dir.join("manifest");
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        write_atomic(&path, text.as_bytes()).map_err(io_err(&path))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &StageManifest {
        &self.manifest
    }

    pub fn stage_path(&self, stage: Stage) -> PathBuf {
        self.dir.join(stage.as_str())
    }

    pub fn completed(&self, stage: Stage) -> BTreeSet<String> {
        self.manifest
            .stages
            .get(&stage)
            .map(|p| p.completed.clone())
            .unwrap_or_default()
    }

    pub fn skipped(&self, stage: Stage) -> BTreeMap<String, String> {
        self.manifest
            .stages
            .get(&stage)
            .map(|p| p.skipped.clone())
            .unwrap_or_default()
    }

    /// Appends records whose ids the stage has not completed yet and then
    /// updates the manifest. Returns how many were written.
    pub fn write_stage<T: StageRecord>(
        &mut self,
        stage: Stage,
        records: &[T],
    ) -> Result<usize, StoreError> {
        let done = self.completed(stage);
        let mut seen = BTreeSet::new();
        let fresh: Vec<&T> = records
            .iter()
            .filter(|r| !done.contains(r.problem_id()) && seen.insert(r.problem_id().to_owned()))
            .collect();

        let path = self.stage_path(stage);
        let needs_header = fs::metadata(&path).map(|m| m.len() == 0).unwrap_or(true);
        let mut buf = String::new();
        if !needs_header && !ends_with_newline(&path).map_err(io_err(&path))? {
            // a torn line from an interrupted append; start a fresh one
            buf.push('\n');
        }
        if needs_header {
            buf.push_str(&serde_json::json!({ "schema": stage.schema() }).to_string());
            buf.push('\n');
        }
        for r in &fresh {
            buf.push_str(&serde_json::to_string(r).map_err(|e| StoreError::Corrupt {
                path: path.clone(),
                message: format!("serializing record: {e}"),
            })?);
            buf.push('\n');
        }
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        f.write_all(buf.as_bytes()).map_err(io_err(&path))?;
        f.sync_all().map_err(io_err(&path))?;

        if fresh.is_empty() {
            return Ok(0);
        }
        let progress = self.manifest.stages.entry(stage).or_default();
        for r in &fresh {
            progress.skipped.remove(r.problem_id());
            progress.completed.insert(r.problem_id().to_owned());
        }
        self.save_manifest()?;
        Ok(fresh.len())
    }

    /// Reads a stage back, ordered by problem id.
    ///
    /// Only ids the manifest lists as completed are returned; the first
    /// record per id wins. Lines that fail to parse are reported with their
    /// line number and do not stop the read.
    pub fn read_stage<T: StageRecord>(&self, stage: Stage) -> Result<StageRead<T>, StoreError> {
        let path = self.stage_path(stage);
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(stage))
            }
            Err(e) => return Err(io_err(&path)(e)),
        };
        let done = self.completed(stage);
        let mut by_id: BTreeMap<String, T> = BTreeMap::new();
        let mut errors = Vec::new();
        for (k, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(&path))?;
            let n = k + 1;
            if line.trim().is_empty() {
                continue;
            }
            if n == 1 {
                let expected = stage.schema();
                let header: serde_json::Value =
                    serde_json::from_str(&line).unwrap_or(serde_json::Value::Null);
                if header.get("schema").and_then(|s| s.as_str()) != Some(expected.as_str()) {
                    return Err(StoreError::Corrupt {
                        path,
                        message: format!("expected schema header {expected:?}"),
                    });
                }
                continue;
            }
            match serde_json::from_str::<T>(&line) {
                Ok(r) if done.contains(r.problem_id()) => {
                    by_id.entry(r.problem_id().to_owned()).or_insert(r);
                }
                Ok(_) => {}
                Err(e) => errors.push(LineError {
                    line: n,
                    message: e.to_string(),
                }),
            }
        }
        Ok(StageRead {
            records: by_id.into_values().collect(),
            errors,
        })
    }

    /// Records that `problem_id` was skipped at `stage` and logs why.
    pub fn mark_skipped(
        &mut self,
        stage: Stage,
        problem_id: &str,
        reason: &str,
    ) -> Result<(), StoreError> {
        let log = self.dir.join("skips");
        let entry = serde_json::to_string(&SkipLogEntry {
            stage,
            problem_id,
            reason,
        })
        .expect("skip entry serializes");
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log)
            .map_err(io_err(&log))?;
        writeln!(f, "{entry}").map_err(io_err(&log))?;
        self.manifest
            .stages
            .entry(stage)
            .or_default()
            .skipped
            .insert(problem_id.to_owned(), reason.to_owned());
        self.save_manifest()
    }

    /// Ids the previous stage completed that `stage` has neither completed
    /// nor skipped. For `seed` this is [`Pending::All`] until anything is
    /// seeded.
    pub fn pending(&self, stage: Stage) -> Pending {
        let Some(prev) = stage.previous() else {
            return if self.completed(Stage::Seed).is_empty() {
                Pending::All
            } else {
                Pending::Ids(Vec::new())
            };
        };
        let done = self.completed(stage);
        let skipped = self.skipped(stage);
        Pending::Ids(
            self.completed(prev)
                .into_iter()
                .filter(|id| !done.contains(id) && !skipped.contains_key(id))
                .collect(),
        )
    }

    /// Earliest stage with incomplete coverage, and what it still owes.
    pub fn resume_point(&self) -> (Stage, Pending) {
        for stage in Stage::ALL {
            match self.pending(stage) {
                Pending::Ids(ids) if ids.is_empty() => continue,
                p => return (stage, p),
            }
        }
        (Stage::Eval, Pending::Ids(Vec::new()))
    }
}
