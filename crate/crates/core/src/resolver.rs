//! Turning chunk plans back into text.
//!
//! Plans coming from a model may reference IDs that do not exist, repeat
//! content units, or leave some out. [`validate_plan`] reports those defects,
//! [`repair_plan`] fixes them, and [`resolve_plan`] assembles chunk bodies by
//! concatenating unit texts. No text is ever generated: every character in a
//! body comes from a source unit or the `# ` marker placed before headings.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::parse::{count_tokens, ParsedDocument};
use crate::planner::{ChunkPlan, Outline};

#[derive(Debug, thiserror::Error)]
pub enum ResolveError {
    #[error("plan is for {plan:?} but document is {doc:?}")]
    DocMismatch { plan: String, doc: String },
    #[error("plan for {doc_id} is invalid: {report:?}")]
    InvalidPlan {
        doc_id: String,
        report: ValidationReport,
    },
}

/// Which chunker produced a chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChunkMethod {
    Fixed,
    Structural,
    Agentic,
    Wrac,
}

impl ChunkMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ChunkMethod::Fixed => "fixed",
            ChunkMethod::Structural => "structural",
            ChunkMethod::Agentic => "agentic",
            ChunkMethod::Wrac => "wrac",
        }
    }
}

/// A retrievable chunk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    /// `<doc_id>#<group ordinal>`, 1-based.
    pub chunk_id: String,
    pub doc_id: String,
    /// Up to three heading texts, outermost first.
    pub heading_trail: Vec<String>,
    pub unit_ids: Vec<String>,
    pub body: String,
    pub token_count: usize,
    pub method: ChunkMethod,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub unknown_ids: Vec<String>,
    /// Content IDs occurring more than once across the plan.
    pub duplicate_text_ids: Vec<String>,
    /// Content IDs of the document that no group references.
    pub uncovered_ids: Vec<String>,
    pub empty_groups: usize,
    pub ok: bool,
}

/// Checks a plan against its document.
///
/// Heading IDs may appear in many groups; content IDs (text, table, list
/// item, code) must appear exactly once overall.
pub fn validate_plan(plan: &ChunkPlan, doc: &ParsedDocument) -> Result<ValidationReport, ResolveError> {
    if plan.doc_id != doc.doc_id {
        return Err(ResolveError::DocMismatch {
            plan: plan.doc_id.clone(),
            doc: doc.doc_id.clone(),
        });
    }
    let mut report = ValidationReport::default();
    let mut seen_unknown = HashSet::new();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for group in &plan.groups {
        if group.is_empty() {
            report.empty_groups += 1;
        }
        for id in group {
            match doc.unit(id) {
                None => {
                    if seen_unknown.insert(id.as_str()) {
                        report.unknown_ids.push(id.clone());
                    }
                }
                Some(unit) if unit.kind.is_content() => {
                    let count = counts.entry(id).or_insert(0);
                    if *count == 0 {
                        order.push(id);
                    }
                    *count += 1;
                }
                Some(_) => {}
            }
        }
    }
    report.duplicate_text_ids = order
        .iter()
        .filter(|id| counts[*id] > 1)
        .map(|id| id.to_string())
        .collect();
    report.uncovered_ids = doc
        .content_ids()
        .filter(|id| !counts.contains_key(id))
        .map(str::to_string)
        .collect();
    report.ok = report.unknown_ids.is_empty()
        && report.duplicate_text_ids.is_empty()
        && report.uncovered_ids.is_empty()
        && report.empty_groups == 0;
    Ok(report)
}

/// Repairs the defects listed in `report`.
///
/// Unknown IDs are dropped, later repeats of a content ID are dropped, and
/// each uncovered content unit joins the group holding its nearest preceding
/// sibling that the plan already covered (same enclosing heading). Units
/// without such a sibling get a new group with their heading trail, appended
/// after the existing groups. Empty groups are removed last.
pub fn repair_plan(plan: &ChunkPlan, doc: &ParsedDocument, report: &ValidationReport) -> ChunkPlan {
    if report.ok {
        return plan.clone();
    }
    let mut seen_content = HashSet::new();
    let mut groups: Vec<Vec<usize>> = plan
        .groups
        .iter()
        .map(|group| {
            let mut kept: Vec<usize> = Vec::new();
            for id in group {
                let Some(pos) = doc.position(id) else { continue };
                if doc.units[pos].kind.is_content() && !seen_content.insert(pos) {
                    continue;
                }
                kept.push(pos);
            }
            kept.sort_unstable();
            kept.dedup();
            kept
        })
        .collect();

    let outline = Outline::new(doc);
    let covered: HashMap<usize, usize> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, members)| members.iter().map(move |&u| (u, g)))
        .filter(|(u, _)| doc.units[*u].kind.is_content())
        .collect();
    let mut extra: Vec<Vec<usize>> = Vec::new();
    for (u, unit) in doc.units.iter().enumerate() {
        if !unit.kind.is_content() || covered.contains_key(&u) {
            continue;
        }
        let owner = outline.parent(u);
        let sibling = (0..u).rev().find(|&j| {
            outline.parent(j) == owner && doc.units[j].kind.is_content() && covered.contains_key(&j)
        });
        match sibling {
            Some(s) => {
                let group = &mut groups[covered[&s]];
                let at = group.partition_point(|&x| x < u);
                group.insert(at, u);
            }
            None => {
                let mut group = owner.map(|h| outline.trail(h)).unwrap_or_default();
                group.push(u);
                extra.push(group);
            }
        }
    }
    groups.extend(extra);
    groups.retain(|g| !g.is_empty());

    ChunkPlan {
        doc_id: plan.doc_id.clone(),
        groups: groups
            .into_iter()
            .map(|g| g.into_iter().map(|i| doc.units[i].id.clone()).collect())
            .collect(),
        planner_kind: plan.planner_kind,
        raw_response: plan.raw_response.clone(),
    }
}

/// Validates and, if needed, repairs a plan.
pub fn validate_and_repair(plan: &ChunkPlan, doc: &ParsedDocument) -> Result<(ChunkPlan, ValidationReport), ResolveError> {
    let report = validate_plan(plan, doc)?;
    Ok((repair_plan(plan, doc, &report), report))
}

/// Assembles chunks from a valid plan; invalid plans are refused.
pub fn resolve_plan(plan: &ChunkPlan, doc: &ParsedDocument) -> Result<Vec<Chunk>, ResolveError> {
    let report = validate_plan(plan, doc)?;
    if !report.ok {
        return Err(ResolveError::InvalidPlan {
            doc_id: doc.doc_id.clone(),
            report,
        });
    }
    let outline = Outline::new(doc);
    Ok(plan
        .groups
        .iter()
        .enumerate()
        .map(|(n, group)| {
            let members: Vec<usize> = group.iter().filter_map(|id| doc.position(id)).collect();
            assemble(&outline, &members, ChunkMethod::Wrac, n + 1)
        })
        .collect())
}

/// Builds one chunk from unit indices, rendering headings as `# <text>`.
pub(crate) fn assemble(outline: &Outline<'_>, members: &[usize], method: ChunkMethod, ordinal: usize) -> Chunk {
    let doc = outline.doc();
    let body = members
        .iter()
        .map(|&i| {
            let unit = &doc.units[i];
            if unit.is_heading() {
                format!("# {}", unit.text)
            } else {
                unit.text.clone()
            }
        })
        .collect::<Vec<_>>()
        .join("\n\n");
    Chunk {
        chunk_id: format!("{}#{ordinal}", doc.doc_id),
        doc_id: doc.doc_id.clone(),
        heading_trail: heading_trail(outline, members),
        unit_ids: members.iter().map(|&i| doc.units[i].id.clone()).collect(),
        token_count: count_tokens(&body),
        body,
        method,
    }
}

/// Headings in the group that enclose every content unit of the group,
/// outermost first, capped at three (first plus the last two). Heading-only
/// groups use their leading headings.
fn heading_trail(outline: &Outline<'_>, members: &[usize]) -> Vec<String> {
    let doc = outline.doc();
    let in_group: HashSet<usize> = members.iter().copied().collect();
    let content: Vec<usize> = members
        .iter()
        .copied()
        .filter(|&i| doc.units[i].kind.is_content())
        .collect();
    let mut trail: Vec<usize> = match content.split_first() {
        None => members.to_vec(),
        Some((&first, rest)) => {
            let mut common = outline.ancestors(first);
            for &c in rest {
                let anc: HashSet<usize> = outline.ancestors(c).into_iter().collect();
                common.retain(|h| anc.contains(h));
            }
            common.retain(|h| in_group.contains(h));
            common
        }
    };
    if trail.len() > 3 {
        let tail = trail.split_off(trail.len() - 2);
        trail.truncate(1);
        trail.extend(tail);
    }
    trail.into_iter().map(|i| doc.units[i].text.clone()).collect()
}
