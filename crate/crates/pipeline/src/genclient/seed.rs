use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSnippet {
    pub source_path: String,
    pub snippet: String,
    pub language_tag: String,
}

impl SeedSnippet {
    /// Stable problem id derived from the snippet's relative path and text.
    pub fn problem_id(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.source_path.as_bytes());
        h.update([0]);
        h.update(self.snippet.as_bytes());
        format!("p-{}", &hex::encode(h.finalize())[..12])
    }
}

fn language_for(ext: &str) -> &str {
    match ext {
        "py" => "python",
        "rs" => "rust",
        "js" => "javascript",
        "ts" => "typescript",
        "go" => "go",
        "java" => "java",
        other => other,
    }
}

/// Reads every file with extension `ext` under `root`, in path order.
/// Empty files are skipped.
pub fn load_seed_corpus(root: &Path, ext: &str) -> std::io::Result<Vec<SeedSnippet>> {
    let mut out = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(std::io::Error::other)?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|e| e != ext) {
            continue;
        }
        let snippet = std::fs::read_to_string(path)?;
        if snippet.trim().is_empty() {
            continue;
        }
        let rel = path.strip_prefix(root).unwrap_or(path);
        out.push(SeedSnippet {
            source_path: rel.to_string_lossy().replace('\\', "/"),
            snippet,
            language_tag: language_for(ext).to_owned(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_matching_files_in_order() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("b")).unwrap();
        std::fs::write(dir.path().join("b/z.py"), "x = 1\n").unwrap();
        std::fs::write(dir.path().join("a.py"), "y = 2\n").unwrap();
        std::fs::write(dir.path().join("empty.py"), "  \n").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let seeds = load_seed_corpus(dir.path(), "py").unwrap();
        let paths: Vec<_> = seeds.iter().map(|s| s.source_path.as_str()).collect();
        assert_eq!(paths, ["a.py", "b/z.py"]);
        assert_eq!(seeds[0].language_tag, "python");
    }

    #[test]
    fn problem_id_is_stable_and_content_sensitive() {
        let a = SeedSnippet {
            source_path: "a.py".into(),
            snippet: "x".into(),
            language_tag: "python".into(),
        };
        let mut b = a.clone();
        assert_eq!(a.problem_id(), b.problem_id());
        b.snippet.push('y');
        assert_ne!(a.problem_id(), b.problem_id());
        assert_eq!(a.problem_id().len(), 14);
    }
}
