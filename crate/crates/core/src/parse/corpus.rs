use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Media {
    Html,
    Markdown,
}

impl Media {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "html" | "htm" => Some(Media::Html),
            "md" | "markdown" => Some(Media::Markdown),
            _ => None,
        }
    }
}

/// A stored document as loaded from disk. `raw` is never modified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub doc_id: String,
    pub origin_path: PathBuf,
    pub media: Media,
    pub raw: String,
    pub org: String,
    pub byte_len: usize,
}

impl SourceDocument {
    pub fn from_bytes(
        doc_id: impl Into<String>,
        org: impl Into<String>,
        origin_path: impl Into<PathBuf>,
        media: Media,
        bytes: &[u8],
    ) -> Result<Self, ParseError> {
        let raw = std::str::from_utf8(bytes)
            .map_err(|e| ParseError::Encoding {
                offset: e.valid_up_to(),
            })?
            .to_string();
        Ok(Self {
            doc_id: doc_id.into(),
            origin_path: origin_path.into(),
            media,
            byte_len: bytes.len(),
            raw,
            org: org.into(),
        })
    }
}

/// Documents found under a corpus root, sorted by `doc_id`.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub documents: Vec<SourceDocument>,
    /// Files that matched by extension but could not be loaded.
    pub failures: Vec<(PathBuf, String)>,
}

/// Loads every `.html`/`.md` file under `<root>/docs` (or `root` itself when
/// there is no `docs/` directory).
///
/// `doc_id` is the path relative to the docs directory with `/` separators;
/// `org` is its first directory component, or `default` for top-level files.
/// Unreadable files are collected in [`Corpus::failures`] and skipped.
pub fn load_corpus(root: &Path) -> Result<Corpus, ParseError> {
    let docs_dir = if root.join("docs").is_dir() {
        root.join("docs")
    } else {
        root.to_path_buf()
    };
    if !docs_dir.is_dir() {
        return Err(ParseError::NoDocuments(root.display().to_string()));
    }
    let mut corpus = Corpus::default();
    for entry in WalkDir::new(&docs_dir).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                let path = e.path().map(Path::to_path_buf).unwrap_or_default();
                corpus.failures.push((path, e.to_string()));
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        let Some(media) = Media::from_path(path) else {
            continue;
        };
        let rel = path.strip_prefix(&docs_dir).unwrap_or(path);
        let parts: Vec<String> = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect();
        let doc_id = parts.join("/");
        let org = if parts.len() > 1 {
            parts[0].clone()
        } else {
            "default".to_string()
        };
        let loaded = std::fs::read(path)
            .map_err(|e| e.to_string())
            .and_then(|bytes| {
                SourceDocument::from_bytes(doc_id, org, path, media, &bytes)
                    .map_err(|e| e.to_string())
            });
        match loaded {
            Ok(doc) => corpus.documents.push(doc),
            Err(e) => corpus.failures.push((path.to_path_buf(), e)),
        }
    }
    corpus.documents.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    if corpus.documents.is_empty() && corpus.failures.is_empty() {
        return Err(ParseError::NoDocuments(root.display().to_string()));
    }
    Ok(corpus)
}
