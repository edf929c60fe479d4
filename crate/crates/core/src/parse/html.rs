//! HTML lowering to Markdown.
//!
//! Only block structure is translated: headings, paragraphs, lists, tables and
//! preformatted blocks. Inline markup is flattened to its text, so text content
//! survives verbatim apart from HTML whitespace collapsing.

use ego_tree::NodeRef;
use scraper::{Html, Node};

use super::ParseError;

const SKIPPED: &[&str] = &[
    "script", "style", "noscript", "head", "template", "iframe", "svg", "canvas", "object",
    "button", "select", "option", "input", "textarea",
];

/// Converts an HTML document to Markdown.
///
/// Malformed markup is tolerated; the only failure is non-UTF-8 input.
pub fn html_to_markdown(input: &[u8]) -> Result<String, ParseError> {
    let html = std::str::from_utf8(input).map_err(|e| ParseError::Encoding {
        offset: e.valid_up_to(),
    })?;
    let document = Html::parse_document(html);
    let mut writer = Writer::default();
    writer.walk(document.tree.root());
    Ok(writer.finish())
}

#[derive(Default)]
struct Writer {
    blocks: Vec<String>,
    inline: String,
}

impl Writer {
    fn finish(mut self) -> String {
        self.flush();
        self.blocks.join("\n\n")
    }

    fn flush(&mut self) {
        let block = std::mem::take(&mut self.inline);
        let block = trim_lines(&block);
        if !block.is_empty() {
            self.blocks.push(block);
        }
    }

    fn walk(&mut self, node: NodeRef<'_, Node>) {
        match node.value() {
            Node::Text(text) => push_collapsed(&mut self.inline, text),
            Node::Element(el) => {
                let name = el.name();
                if SKIPPED.contains(&name) {
                    return;
                }
                match name {
                    "h1" | "h2" | "h3" | "h4" | "h5" | "h6" => {
                        self.flush();
                        let level = usize::from(name.as_bytes()[1] - b'0');
                        let text = inline_text(node);
                        let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
                        if !text.is_empty() {
                            self.blocks.push(format!("{} {text}", "#".repeat(level)));
                        }
                    }
                    "br" => self.inline.push('\n'),
                    "hr" | "img" => self.flush(),
                    "ul" | "ol" => {
                        self.flush();
                        let mut lines = Vec::new();
                        render_list(node, 0, &mut lines);
                        if !lines.is_empty() {
                            self.blocks.push(lines.join("\n"));
                        }
                    }
                    "table" => {
                        self.flush();
                        if let Some(table) = render_table(node) {
                            self.blocks.push(table);
                        }
                    }
                    "pre" => {
                        self.flush();
                        let text = raw_text(node);
                        let text = text.trim_matches('\n');
                        if !text.trim().is_empty() {
                            self.blocks.push(format!("```\n{text}\n```"));
                        }
                    }
                    _ if is_inline(name) => {
                        for child in node.children() {
                            self.walk(child);
                        }
                    }
                    _ => {
                        self.flush();
                        for child in node.children() {
                            self.walk(child);
                        }
                        self.flush();
                    }
                }
            }
            Node::Document | Node::Fragment => {
                for child in node.children() {
                    self.walk(child);
                }
            }
            _ => {}
        }
    }
}

fn is_inline(name: &str) -> bool {
    matches!(
        name,
        "a" | "abbr"
            | "b"
            | "bdi"
            | "bdo"
            | "cite"
            | "code"
            | "data"
            | "del"
            | "dfn"
            | "em"
            | "font"
            | "i"
            | "ins"
            | "kbd"
            | "label"
            | "mark"
            | "q"
            | "s"
            | "samp"
            | "small"
            | "span"
            | "strong"
            | "sub"
            | "sup"
            | "time"
            | "tt"
            | "u"
            | "var"
            | "wbr"
    )
}

/// Appends text with HTML whitespace collapsing.
fn push_collapsed(out: &mut String, text: &str) {
    for ch in text.chars() {
        if ch.is_whitespace() {
            if !out.is_empty() && !out.ends_with([' ', '\n']) {
                out.push(' ');
            }
        } else {
            out.push(ch);
        }
    }
}

fn trim_lines(block: &str) -> String {
    block
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Flattened text of an element, skipping nested lists and dropped elements.
fn inline_text(node: NodeRef<'_, Node>) -> String {
    fn go(node: NodeRef<'_, Node>, out: &mut String) {
        for child in node.children() {
            match child.value() {
                Node::Text(t) => push_collapsed(out, t),
                Node::Element(el) => {
                    let name = el.name();
                    if SKIPPED.contains(&name) || name == "ul" || name == "ol" {
                        continue;
                    }
                    if name == "br" {
                        out.push(' ');
                    } else {
                        if !is_inline(name) && !out.is_empty() && !out.ends_with(' ') {
                            out.push(' ');
                        }
                        go(child, out);
                    }
                }
                _ => {}
            }
        }
    }
    let mut out = String::new();
    go(node, &mut out);
    out.trim().to_string()
}

fn raw_text(node: NodeRef<'_, Node>) -> String {
    let mut out = String::new();
    for d in node.descendants() {
        if let Node::Text(t) = d.value() {
            out.push_str(t);
        }
    }
    out
}

fn element_children<'a>(
    node: NodeRef<'a, Node>,
    names: &'a [&'a str],
) -> impl Iterator<Item = NodeRef<'a, Node>> + 'a {
    node.children().filter(move |c| {
        c.value()
            .as_element()
            .is_some_and(|el| names.contains(&el.name()))
    })
}

fn render_list(node: NodeRef<'_, Node>, depth: usize, lines: &mut Vec<String>) {
    let el = node.value().as_element().expect("list element");
    let ordered = el.name() == "ol";
    let mut number: i64 = el.attr("start").and_then(|s| s.parse().ok()).unwrap_or(1);
    let indent = "   ".repeat(depth);
    for item in element_children(node, &["li"]) {
        let text = inline_text(item);
        let marker = if ordered {
            let m = format!("{number}.");
            number += 1;
            m
        } else {
            "-".to_string()
        };
        if !text.is_empty() {
            lines.push(format!("{indent}{marker} {text}"));
        }
        for nested in item
            .descendants()
            .skip(1)
            .filter(|d| d.value().as_element().is_some_and(|e| matches!(e.name(), "ul" | "ol")))
        {
            // only the nearest nested lists; deeper ones are reached recursively
            let nearest = nested
                .ancestors()
                .find(|a| {
                    a.value()
                        .as_element()
                        .is_some_and(|e| matches!(e.name(), "ul" | "ol" | "li"))
                })
                .is_some_and(|a| a.id() == item.id());
            if nearest {
                render_list(nested, depth + 1, lines);
            }
        }
    }
}

fn render_table(node: NodeRef<'_, Node>) -> Option<String> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    for row in node.descendants().filter(|d| {
        d.value().as_element().is_some_and(|e| e.name() == "tr")
    }) {
        let cells: Vec<String> = element_children(row, &["td", "th"])
            .map(|c| inline_text(c).replace('|', "\\|"))
            .collect();
        if !cells.is_empty() {
            rows.push(cells);
        }
    }
    if rows.is_empty() {
        return None;
    }
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let render = |cells: &[String]| {
        let mut line = String::from("|");
        for i in 0..width {
            line.push(' ');
            line.push_str(cells.get(i).map_or("", String::as_str));
            line.push_str(" |");
        }
        line
    };
    let mut out = vec![render(&rows[0])];
    out.push(format!("|{}", " --- |".repeat(width)));
    out.extend(rows[1..].iter().map(|r| render(r)));
    Some(out.join("\n"))
}
