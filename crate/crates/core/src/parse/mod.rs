//! Deterministic parsing of stored web documents into ID-addressable units.
//!
//! HTML is first lowered to Markdown; Markdown is parsed into a flat,
//! document-ordered list of [`DocumentUnit`]s. Each unit carries a stable
//! identifier of the form `<kind>_<ordinal>`, where the ordinal comes from a
//! single counter shared by every kind (`heading_1`, `heading_2`, `text_3`,
//! ...). Unit text is always a verbatim slice of the Markdown source.

mod boilerplate;
mod corpus;
mod html;
mod markdown;
mod tokens;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use boilerplate::{filter_boilerplate, BoilerplateFilter, DEFAULT_BOILERPLATE_STEMS};
pub use corpus::{load_corpus, Corpus, Media, SourceDocument};
pub use html::html_to_markdown;
pub use markdown::{parse_markdown, parse_source};
pub use tokens::{count_tokens, CharApproxTokenizer, Tokenizer};

/// Errors raised while loading or parsing documents.
#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("input is not valid UTF-8 (first invalid byte at offset {offset})")]
    Encoding { offset: usize },
    #[error("document {doc_id:?} has no units")]
    NoUnits { doc_id: String },
    #[error("no documents found under {0}")]
    NoDocuments(String),
    #[error("unsupported media for {0}")]
    UnsupportedMedia(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Kind of a parsed semantic unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Heading,
    Text,
    Table,
    ListItem,
    Code,
}

impl UnitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitKind::Heading => "heading",
            UnitKind::Text => "text",
            UnitKind::Table => "table",
            UnitKind::ListItem => "list_item",
            UnitKind::Code => "code",
        }
    }

    /// Everything except headings counts as content for coverage purposes.
    pub fn is_content(self) -> bool {
        self != UnitKind::Heading
    }
}

impl fmt::Display for UnitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UnitKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "heading" => UnitKind::Heading,
            "text" => UnitKind::Text,
            "table" => UnitKind::Table,
            "list_item" => UnitKind::ListItem,
            "code" => UnitKind::Code,
            _ => return Err(()),
        })
    }
}

/// Splits a unit identifier such as `list_item_12` into its kind and ordinal.
pub fn split_unit_id(id: &str) -> Option<(UnitKind, usize)> {
    let (kind, ordinal) = id.rsplit_once('_')?;
    if ordinal.is_empty() || !ordinal.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((kind.parse().ok()?, ordinal.parse().ok()?))
}

/// One parsed semantic unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentUnit {
    pub id: String,
    pub kind: UnitKind,
    pub text: String,
    /// 1-based line of the unit's first line in the Markdown source.
    pub line: usize,
    pub parent_heading: Option<String>,
    pub heading_level: Option<u8>,
    pub token_count: usize,
}

impl DocumentUnit {
    pub fn is_heading(&self) -> bool {
        self.kind == UnitKind::Heading
    }

    pub fn ordinal(&self) -> usize {
        split_unit_id(&self.id).map_or(0, |(_, n)| n)
    }
}

/// A document after parsing: ordered units plus a little metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedDocument {
    pub doc_id: String,
    pub units: Vec<DocumentUnit>,
    pub title: Option<String>,
    pub total_chars: usize,
}

impl ParsedDocument {
    pub fn unit(&self, id: &str) -> Option<&DocumentUnit> {
        self.position(id).map(|i| &self.units[i])
    }

    /// Index of a unit in `units`. Units are sorted by ordinal, so this is a
    /// binary search on the ID's numeric suffix.
    pub fn position(&self, id: &str) -> Option<usize> {
        let (_, ordinal) = split_unit_id(id)?;
        let idx = self
            .units
            .binary_search_by_key(&ordinal, DocumentUnit::ordinal)
            .ok()?;
        (self.units[idx].id == id).then_some(idx)
    }

    pub fn has_headings(&self) -> bool {
        self.units.iter().any(DocumentUnit::is_heading)
    }

    /// IDs of all non-heading units, in document order.
    pub fn content_ids(&self) -> impl Iterator<Item = &str> {
        self.units
            .iter()
            .filter(|u| u.kind.is_content())
            .map(|u| u.id.as_str())
    }
}

/// Recomputes `parent_heading` for every unit from heading levels.
///
/// A heading's parent is the nearest preceding heading with a strictly smaller
/// level; any other unit's parent is the most recent open heading.
pub(crate) fn assign_parents(units: &mut [DocumentUnit]) {
    let mut stack: Vec<(u8, String)> = Vec::new();
    for unit in units.iter_mut() {
        match unit.heading_level {
            Some(level) if unit.is_heading() => {
                while stack.last().is_some_and(|(l, _)| *l >= level) {
                    stack.pop();
                }
                unit.parent_heading = stack.last().map(|(_, t)| t.clone());
                stack.push((level, unit.text.clone()));
            }
            _ => unit.parent_heading = stack.last().map(|(_, t)| t.clone()),
        }
    }
}
