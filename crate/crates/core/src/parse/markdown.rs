use std::ops::Range;

use pulldown_cmark::{Event, Options, Parser, Tag, TagEnd};

use super::{
    assign_parents, count_tokens, html_to_markdown, DocumentUnit, Media, ParseError,
    ParsedDocument, SourceDocument, UnitKind,
};

/// Parses a loaded source document, lowering HTML to Markdown first.
///
/// Line numbers always refer to the Markdown text.
pub fn parse_source(doc: &SourceDocument) -> Result<ParsedDocument, ParseError> {
    match doc.media {
        Media::Markdown => parse_markdown(&doc.doc_id, &doc.raw),
        Media::Html => parse_markdown(&doc.doc_id, &html_to_markdown(doc.raw.as_bytes())?),
    }
}

/// Parses Markdown into document-ordered units.
///
/// One unit per heading, paragraph, table, code block and top-level list
/// item. An ordered list is kept whole as a single `list_item` unit, since
/// numbered lists are treated as procedures.
pub fn parse_markdown(doc_id: &str, markdown: &str) -> Result<ParsedDocument, ParseError> {
    let line_starts: Vec<usize> = std::iter::once(0)
        .chain(markdown.match_indices('\n').map(|(i, _)| i + 1))
        .collect();
    let line_of = |offset: usize| line_starts.partition_point(|&s| s <= offset);

    let mut blocks: Vec<(UnitKind, Range<usize>, Option<u8>)> = Vec::new();
    let mut depth = 0usize;
    // Some(ordered) while inside a top-level list
    let mut list: Option<bool> = None;

    for (event, range) in Parser::new_ext(markdown, Options::ENABLE_TABLES).into_offset_iter() {
        match event {
            Event::Start(tag) => {
                if depth == 0 {
                    match &tag {
                        Tag::Heading { level, .. } => {
                            blocks.push((UnitKind::Heading, range.clone(), Some(*level as u8)));
                        }
                        Tag::Paragraph | Tag::BlockQuote(_) | Tag::HtmlBlock => {
                            blocks.push((UnitKind::Text, range.clone(), None));
                        }
                        Tag::Table(_) => blocks.push((UnitKind::Table, range.clone(), None)),
                        Tag::CodeBlock(_) => blocks.push((UnitKind::Code, range.clone(), None)),
                        Tag::List(start) => {
                            list = Some(start.is_some());
                            if start.is_some() {
                                blocks.push((UnitKind::ListItem, range.clone(), None));
                            }
                        }
                        _ => {}
                    }
                } else if depth == 1 && list == Some(false) && matches!(tag, Tag::Item) {
                    blocks.push((UnitKind::ListItem, range.clone(), None));
                }
                depth += 1;
            }
            Event::End(end) => {
                depth -= 1;
                if depth == 0 && matches!(end, TagEnd::List(_)) {
                    list = None;
                }
            }
            Event::Html(_) | Event::Text(_) if depth == 0 => {
                blocks.push((UnitKind::Text, range.clone(), None));
            }
            _ => {}
        }
    }

    let mut units = Vec::with_capacity(blocks.len());
    for (kind, range, level) in blocks {
        let slice = &markdown[range.clone()];
        let text = match kind {
            UnitKind::Heading => heading_text(slice),
            _ => slice.trim_end().to_string(),
        };
        if text.trim().is_empty() {
            continue;
        }
        let ordinal = units.len() + 1;
        units.push(DocumentUnit {
            id: format!("{kind}_{ordinal}"),
            kind,
            token_count: count_tokens(&text),
            text,
            line: line_of(range.start),
            parent_heading: None,
            heading_level: level,
        });
    }
    if units.is_empty() {
        return Err(ParseError::NoUnits {
            doc_id: doc_id.to_string(),
        });
    }
    assign_parents(&mut units);

    let title = units
        .iter()
        .find(|u| u.heading_level == Some(1))
        .map(|u| u.text.clone());
    Ok(ParsedDocument {
        doc_id: doc_id.to_string(),
        units,
        title,
        total_chars: markdown.chars().count(),
    })
}

/// Strips ATX markers or a setext underline from a heading's source slice.
fn heading_text(slice: &str) -> String {
    let trimmed = slice.trim();
    if let Some(rest) = trimmed.strip_prefix('#') {
        let rest = rest.trim_start_matches('#');
        let rest = rest.trim();
        // optional closing sequence, which must be preceded by a space
        let without_close = rest.trim_end_matches('#');
        if without_close.len() != rest.len()
            && (without_close.is_empty() || without_close.ends_with([' ', '\t']))
        {
            return without_close.trim().to_string();
        }
        rest.to_string()
    } else {
        // setext: drop the underline
        let mut lines: Vec<&str> = trimmed.lines().collect();
        lines.pop();
        lines
            .iter()
            .map(|l| l.trim())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(doc: &ParsedDocument) -> Vec<&str> {
        doc.units.iter().map(|u| u.id.as_str()).collect()
    }

    #[test]
    fn section_title_example() {
        let md = "# Main Title\n\nIntro paragraph.\n\n\n## Section Title\n";
        let doc = parse_markdown("d", md).unwrap();
        let second = &doc.units[2];
        assert_eq!(second.id, "heading_3");
        assert_eq!(second.text, "Section Title");
        assert_eq!(second.line, 6);
        assert_eq!(second.parent_heading.as_deref(), Some("Main Title"));

        let md = "# Main Title\n\n\n\n## Section Title\n";
        let doc = parse_markdown("d", md).unwrap();
        assert_eq!(doc.units[1].id, "heading_2");
        assert_eq!(doc.units[1].line, 5);
        assert_eq!(doc.title.as_deref(), Some("Main Title"));
    }

    #[test]
    fn single_paragraph() {
        let doc = parse_markdown("d", "Hello.").unwrap();
        assert_eq!(ids(&doc), ["text_1"]);
        assert_eq!(doc.units[0].parent_heading, None);
        assert_eq!(doc.title, None);
    }

    #[test]
    fn empty_document_has_no_units() {
        assert!(matches!(
            parse_markdown("d", "  \n\n"),
            Err(ParseError::NoUnits { .. })
        ));
        assert!(matches!(parse_markdown("d", "***\n"), Err(ParseError::NoUnits { .. })));
    }

    #[test]
    fn unordered_items_split_ordered_list_kept_whole() {
        let md = "# T\n\n- a\n- b\n\n1. one\n2. two\n";
        let doc = parse_markdown("d", md).unwrap();
        assert_eq!(ids(&doc), ["heading_1", "list_item_2", "list_item_3", "list_item_4"]);
        assert_eq!(doc.units[1].text, "- a");
        assert_eq!(doc.units[3].text, "1. one\n2. two");
        assert_eq!(doc.units[3].line, 6);
    }

    #[test]
    fn tables_and_code() {
        let md = "| a | b |\n| --- | --- |\n| 1 | 2 |\n\n```rust\nfn x() {}\n```\n";
        let doc = parse_markdown("d", md).unwrap();
        assert_eq!(ids(&doc), ["table_1", "code_2"]);
        assert_eq!(doc.units[0].text, "| a | b |\n| --- | --- |\n| 1 | 2 |");
        assert_eq!(doc.units[1].text, "```rust\nfn x() {}\n```");
        assert_eq!(doc.units[1].line, 5);
    }

    #[test]
    fn heading_markers_stripped() {
        assert_eq!(heading_text("## Title ##"), "Title");
        assert_eq!(heading_text("# C#"), "C#");
        assert_eq!(heading_text("Setext\n======"), "Setext");
    }

    #[test]
    fn parents_follow_levels() {
        let md = "# A\n\n## B\n\ntext b\n\n### C\n\ntext c\n\n## D\n\ntext d\n";
        let doc = parse_markdown("d", md).unwrap();
        let parents: Vec<_> = doc
            .units
            .iter()
            .map(|u| u.parent_heading.as_deref())
            .collect();
        assert_eq!(
            parents,
            [None, Some("A"), Some("B"), Some("B"), Some("C"), Some("A"), Some("D")]
        );
    }
}
