use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QueryCategory {
    Descriptive,
    Analytical,
    Comparative,
    Boolean,
    Temporal,
    Procedural,
    #[serde(rename = "Open-Ended")]
    OpenEnded,
}

impl QueryCategory {
    pub const ALL: [QueryCategory; 7] = [
        QueryCategory::Descriptive,
        QueryCategory::Analytical,
        QueryCategory::Comparative,
        QueryCategory::Boolean,
        QueryCategory::Temporal,
        QueryCategory::Procedural,
        QueryCategory::OpenEnded,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryCategory::Descriptive => "Descriptive",
            QueryCategory::Analytical => "Analytical",
            QueryCategory::Comparative => "Comparative",
            QueryCategory::Boolean => "Boolean",
            QueryCategory::Temporal => "Temporal",
            QueryCategory::Procedural => "Procedural",
            QueryCategory::OpenEnded => "Open-Ended",
        }
    }
}

impl fmt::Display for QueryCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QueryCategory::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown query category {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldItem {
    pub doc_id: String,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query_id: String,
    pub text: String,
    pub category: QueryCategory,
    pub org: String,
    pub gold: Vec<GoldItem>,
}

/// Reads one JSON query record per non-blank line.
pub fn load_queries(path: &Path) -> Result<Vec<QueryRecord>, EvalError> {
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_queries(&text, path)
}

pub fn parse_queries(text: &str, origin: &Path) -> Result<Vec<QueryRecord>, EvalError> {
    let mut records = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: QueryRecord = serde_json::from_str(line).map_err(|e| EvalError::Query {
            path: PathBuf::from(origin),
            line: n + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}
