use std::sync::LazyLock;

use regex::Regex;

use crate::parse::ParsedDocument;

static STEP_HEADING: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\d+[.)]\s").expect("valid regex"));

/// Whether a heading reads like a numbered step (`1. Park`, `2) Jack up`).
pub fn is_step_heading(text: &str) -> bool {
    STEP_HEADING.is_match(text)
}

/// Heading tree of a parsed document, addressed by unit index.
pub(crate) struct Outline<'a> {
    doc: &'a ParsedDocument,
    /// Enclosing heading: a heading's parent, or a content unit's owner.
    parent: Vec<Option<usize>>,
    first_heading: Option<usize>,
}

impl<'a> Outline<'a> {
    pub fn new(doc: &'a ParsedDocument) -> Self {
        let mut parent = Vec::with_capacity(doc.units.len());
        let mut stack: Vec<usize> = Vec::new();
        for (i, unit) in doc.units.iter().enumerate() {
            if unit.is_heading() {
                let level = unit.heading_level.unwrap_or(1);
                while stack
                    .last()
                    .is_some_and(|&h| doc.units[h].heading_level.unwrap_or(1) >= level)
                {
                    stack.pop();
                }
                parent.push(stack.last().copied());
                stack.push(i);
            } else {
                parent.push(stack.last().copied());
            }
        }
        let first_heading = doc.units.iter().position(|u| u.is_heading());
        Self {
            doc,
            parent,
            first_heading,
        }
    }

    pub fn doc(&self) -> &'a ParsedDocument {
        self.doc
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn is_heading(&self, i: usize) -> bool {
        self.doc.units[i].is_heading()
    }

    fn level(&self, i: usize) -> u8 {
        self.doc.units[i].heading_level.unwrap_or(1)
    }

    /// Root-first chain of headings ending at heading `h`.
    pub fn chain(&self, h: usize) -> Vec<usize> {
        let mut chain = vec![h];
        let mut cur = h;
        while let Some(p) = self.parent[cur] {
            chain.push(p);
            cur = p;
        }
        chain.reverse();
        chain
    }

    /// Root-first enclosing headings of any unit (excluding the unit itself).
    pub fn ancestors(&self, i: usize) -> Vec<usize> {
        self.parent[i].map_or_else(Vec::new, |p| self.chain(p))
    }

    /// Level-1 trail entry: the enclosing level-1 heading, else the
    /// document's first heading.
    fn top(&self, chain: &[usize]) -> usize {
        match chain.first() {
            Some(&root) if self.level(root) == 1 => root,
            _ => self.first_heading.unwrap_or(chain[0]),
        }
    }

    /// Three-level heading trail (L1, L2, L3) for content owned by heading
    /// `h`, deduplicated and in document order.
    pub fn trail(&self, h: usize) -> Vec<usize> {
        let chain = self.chain(h);
        let l1 = self.top(&chain);
        let rest: Vec<usize> = chain.into_iter().filter(|&c| c != l1).collect();
        let l2 = if rest.len() >= 2 { rest[0] } else { l1 };
        dedup_sorted(vec![l1, l2, h])
    }

    /// Trail for a procedure rooted at `h`: L1 and the procedure heading.
    pub fn procedure_trail(&self, h: usize) -> Vec<usize> {
        let l1 = self.top(&self.chain(h));
        dedup_sorted(vec![l1, h])
    }

    /// Index one past the last unit in heading `h`'s section.
    pub fn section_end(&self, h: usize) -> usize {
        let level = self.level(h);
        (h + 1..self.doc.units.len())
            .find(|&j| self.is_heading(j) && self.level(j) <= level)
            .unwrap_or(self.doc.units.len())
    }

    pub fn child_headings(&self, h: usize) -> impl Iterator<Item = usize> + '_ {
        (h + 1..self.section_end(h)).filter(move |&j| self.is_heading(j) && self.parent[j] == Some(h))
    }

    /// A heading with at least two numbered-step child headings.
    pub fn is_procedure(&self, h: usize) -> bool {
        self.child_headings(h)
            .filter(|&c| is_step_heading(&self.doc.units[c].text))
            .count()
            >= 2
    }

    /// Outermost procedure root for each unit, if it sits inside one.
    /// The root heading itself is not marked.
    pub fn procedure_roots(&self) -> Vec<Option<usize>> {
        let n = self.doc.units.len();
        let mut roots = vec![None; n];
        let mut i = 0;
        while i < n {
            if self.is_heading(i) && self.is_procedure(i) {
                let end = self.section_end(i);
                for slot in &mut roots[i + 1..end] {
                    *slot = Some(i);
                }
                i = end;
            } else {
                i += 1;
            }
        }
        roots
    }
}

pub(crate) fn dedup_sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}
