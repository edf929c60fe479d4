use crate::parse::ParsedDocument;

use super::outline::dedup_sorted;
use super::{ChunkPlan, Outline, PlannerConfig, PlannerKind};

enum Section {
    /// Consecutive content units sharing one owner heading (or none).
    Plain { owner: Option<usize>, units: Vec<usize> },
    /// The whole subtree of a procedure heading, headings included.
    Procedure { root: usize, units: Vec<usize> },
}

/// Deterministic planner.
///
/// Rules, in priority order:
/// 1. A heading with at least two numbered-step child headings starts a
///    procedure; its whole section becomes one group and is never split.
/// 2. Otherwise each heading's direct content forms a group.
/// 3. Every group is prefixed with its L1/L2/L3 heading trail, so a parent
///    heading appears in each of its children's groups.
/// 4. Groups whose content exceeds `max_chunk_tokens` are split at unit
///    boundaries; each part repeats the trail.
/// 5. Content before the first heading is packed into heading-free groups up
///    to the token budget.
pub fn structural_plan(doc: &ParsedDocument, cfg: &PlannerConfig) -> ChunkPlan {
    let outline = Outline::new(doc);
    let units = &doc.units;
    let in_procedure = outline.procedure_roots();

    let mut sections: Vec<Section> = Vec::new();
    for (i, unit) in units.iter().enumerate() {
        if let Some(root) = in_procedure[i] {
            match sections.last_mut() {
                Some(Section::Procedure { root: r, units }) if *r == root => units.push(i),
                _ => sections.push(Section::Procedure {
                    root,
                    units: vec![i],
                }),
            }
            continue;
        }
        if unit.is_heading() {
            continue;
        }
        let owner = outline.parent(i);
        match sections.last_mut() {
            Some(Section::Plain { owner: o, units }) if *o == owner => units.push(i),
            _ => sections.push(Section::Plain {
                owner,
                units: vec![i],
            }),
        }
    }

    let ids = |indices: Vec<usize>| -> Vec<String> {
        dedup_sorted(indices)
            .into_iter()
            .map(|i| units[i].id.clone())
            .collect()
    };
    let mut groups = Vec::new();
    for section in sections {
        match section {
            Section::Procedure { root, units } => {
                let mut group = outline.procedure_trail(root);
                group.extend(units);
                groups.push(ids(group));
            }
            Section::Plain { owner, units: members } => {
                let trail = owner.map(|h| outline.trail(h)).unwrap_or_default();
                for part in pack(&members, doc, cfg.max_chunk_tokens) {
                    let mut group = trail.clone();
                    group.extend(part);
                    groups.push(ids(group));
                }
            }
        }
    }

    ChunkPlan {
        doc_id: doc.doc_id.clone(),
        groups,
        planner_kind: PlannerKind::Structural,
        raw_response: None,
    }
}

/// Greedy packing of units into parts whose token sum stays within `budget`.
/// A unit larger than the budget gets a part of its own.
pub(crate) fn pack(members: &[usize], doc: &ParsedDocument, budget: usize) -> Vec<Vec<usize>> {
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut used = 0usize;
    for &i in members {
        let tokens = doc.units[i].token_count;
        if !current.is_empty() && used + tokens > budget {
            parts.push(std::mem::take(&mut current));
            used = 0;
        }
        current.push(i);
        used += tokens;
    }
    if !current.is_empty() {
        parts.push(current);
    }
    parts
}
