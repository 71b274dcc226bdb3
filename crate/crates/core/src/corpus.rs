//! Seed corpus: mined from a directory by filename keyword, or listed in a
//! JSON manifest of the form `{"seeds": [{"id": "...", "path": "..."}]}`.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::tdsl::{parse_script, ScriptError, TestScript};

pub const SEED_EXTENSION: &str = "t";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedTest {
    pub id: String,
    pub source_path: PathBuf,
    pub issue_tag: Option<String>,
    pub script_text: String,
    #[serde(skip)]
    pub script: TestScript,
}

impl SeedTest {
    pub fn from_text(
        id: impl Into<String>,
        source_path: impl Into<PathBuf>,
        text: String,
    ) -> Result<Self, ScriptError> {
        let source_path = source_path.into();
        let script = parse_script(&text)?;
        let stem = source_path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("");
        Ok(SeedTest {
            id: id.into(),
            issue_tag: issue_tag(stem),
            source_path,
            script_text: text,
            script,
        })
    }

    pub fn hash(&self) -> String {
        crate::sha256_hex(&self.script_text)
    }
}

/// `Issue1965` → `issue1965`; the first run of `issue` followed by digits.
pub fn issue_tag(stem: &str) -> Option<String> {
    let lower = stem.to_ascii_lowercase();
    let at = lower.find("issue")?;
    let digits: String = lower[at + 5..]
        .chars()
        .take_while(|c| c.is_ascii_digit())
        .collect();
    (!digits.is_empty()).then(|| format!("issue{digits}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Corpus {
    /// Sorted by id.
    pub seeds: Vec<SeedTest>,
    pub manifest_hash: String,
}

impl Corpus {
    pub fn new(mut seeds: Vec<SeedTest>) -> Result<Self, CorpusError> {
        seeds.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = seeds.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(CorpusError::DuplicateId(w[0].id.clone()));
        }
        let mut h = String::new();
        for s in &seeds {
            h.push_str(&format!(
                "{}\n{}\n{}\n",
                s.id,
                s.script_text.len(),
                s.script_text
            ));
        }
        Ok(Corpus {
            manifest_hash: crate::sha256_hex(h),
            seeds,
        })
    }

    pub fn get(&self, id: &str) -> Option<&SeedTest> {
        self.seeds.iter().find(|s| s.id == id)
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadError {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("no seed files under {root} match `{keyword}`")]
    EmptyCorpus { root: PathBuf, keyword: String },
    #[error("keyword must not be empty")]
    EmptyKeyword,
    #[error("malformed manifest {path} at line {line}, column {column}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("seed file {0} does not exist")]
    MissingFile(PathBuf),
    #[error("seed {path} is not a valid script: {source}")]
    InvalidSeed { path: PathBuf, source: ScriptError },
    #[error("duplicate seed id `{0}`")]
    DuplicateId(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinedCorpus {
    pub corpus: Corpus,
    pub load_errors: Vec<LoadError>,
}

/// Collects every `.t` file under `root` whose base name contains `keyword`
/// (ASCII case-insensitive). Files that fail to parse are reported, not fatal.
/// Ids are file stems; colliding stems fall back to the root-relative path.
pub fn mine_seeds(root: &Path, keyword: &str) -> Result<MinedCorpus, CorpusError> {
    if keyword.is_empty() {
        return Err(CorpusError::EmptyKeyword);
    }
    let needle = keyword.to_ascii_lowercase();
    let mut files = Vec::new();
    for entry in WalkDir::new(root).follow_links(true) {
        let entry = entry.map_err(|e| CorpusError::Io {
            path: e.path().unwrap_or(root).to_path_buf(),
            source: e.into(),
        })?;
        if entry.file_type().is_file() {
            files.push(entry.into_path());
        }
    }
    files.retain(|p| {
        p.extension().is_some_and(|e| e == SEED_EXTENSION)
            && p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.to_ascii_lowercase().contains(&needle))
    });
    files.sort();
    if files.is_empty() {
        return Err(CorpusError::EmptyCorpus {
            root: root.to_path_buf(),
            keyword: keyword.to_string(),
        });
    }

    let stem = |p: &Path| {
        p.file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("")
            .to_string()
    };
    let mut stem_count: HashMap<String, usize> = HashMap::new();
    for f in &files {
        *stem_count.entry(stem(f)).or_default() += 1;
    }

    let mut seeds = Vec::new();
    let mut load_errors = Vec::new();
    for f in files {
        let s = stem(&f);
        let id = if stem_count[&s] > 1 {
            let rel = f.strip_prefix(root).unwrap_or(&f).with_extension("");
            rel.components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/")
        } else {
            s
        };
        let text = match fs::read_to_string(&f) {
            Ok(t) => t,
            Err(e) => {
                load_errors.push(LoadError {
                    path: f,
                    message: e.to_string(),
                });
                continue;
            }
        };
        match SeedTest::from_text(id, &f, text) {
            Ok(seed) => seeds.push(seed),
            Err(e) => load_errors.push(LoadError {
                path: f,
                message: e.to_string(),
            }),
        }
    }
    Ok(MinedCorpus {
        corpus: Corpus::new(seeds)?,
        load_errors,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub path: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub seeds: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn from_corpus(corpus: &Corpus, manifest_dir: &Path) -> Manifest {
        let seeds = corpus
            .seeds
            .iter()
            .map(|s| {
                let p = s
                    .source_path
                    .strip_prefix(manifest_dir)
                    .unwrap_or(&s.source_path);
                ManifestEntry {
                    id: s.id.clone(),
                    path: p.to_string_lossy().replace('\\', "/"),
                }
            })
            .collect();
        Manifest { seeds }
    }
}

/// Loads a manifest. Seed paths are relative to the manifest's directory.
/// Unlike mining, an unparseable seed is an error.
pub fn load_corpus(manifest: &Path) -> Result<Corpus, CorpusError> {
    let bytes = fs::read_to_string(manifest).map_err(|source| CorpusError::Io {
        path: manifest.to_path_buf(),
        source,
    })?;
    let m: Manifest = serde_json::from_str(&bytes).map_err(|e| CorpusError::Format {
        path: manifest.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut seeds = Vec::with_capacity(m.seeds.len());
    for entry in m.seeds {
        let path = base.join(&entry.path);
        if !path.is_file() {
            return Err(CorpusError::MissingFile(path));
        }
        let text = fs::read_to_string(&path).map_err(|source| CorpusError::Io {
            path: path.clone(),
            source,
        })?;
        let seed = SeedTest::from_text(entry.id, &path, text).map_err(|source| {
            CorpusError::InvalidSeed {
                path: path.clone(),
                source,
            }
        })?;
        seeds.push(seed);
    }
    Corpus::new(seeds)
}
