use crate::parse::ParsedDocument;
use crate::planner::{pack, Outline};
use crate::resolver::{assemble, Chunk, ChunkMethod};

/// One chunk per heading: the heading plus the content units directly under
/// it. Sections over `budget` tokens are split at unit boundaries and each
/// part repeats the heading. Content before the first heading is packed on
/// its own. Parent headings are not repeated and numbered steps get no
/// special treatment.
pub fn structural_chunk(doc: &ParsedDocument, budget: usize) -> Vec<Chunk> {
    let outline = Outline::new(doc);
    let mut sections: Vec<(Option<usize>, Vec<usize>)> = Vec::new();
    for (i, unit) in doc.units.iter().enumerate() {
        if unit.is_heading() {
            continue;
        }
        let owner = outline.parent(i);
        match sections.last_mut() {
            Some((o, members)) if *o == owner => members.push(i),
            _ => sections.push((owner, vec![i])),
        }
    }

    let mut chunks = Vec::new();
    for (owner, members) in sections {
        for part in pack(&members, doc, budget) {
            let group: Vec<usize> = owner.into_iter().chain(part).collect();
            chunks.push(assemble(&outline, &group, ChunkMethod::Structural, chunks.len() + 1));
        }
    }
    chunks
}
