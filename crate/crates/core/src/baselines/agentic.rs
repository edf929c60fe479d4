use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::llm::{ChatModel, ChatRequest, Usage};
use crate::parse::count_tokens;
use crate::resolver::{Chunk, ChunkMethod};

use super::BaselineError;

pub const AGENTIC_SYSTEM_PROMPT: &str = r#"You are to segment the provided Markdown into fully contextual chunks while strictly preserving original content. This is a formatting only task—no text, links, hyperlinks, or images must be removed, skipped, paraphrased, or summarized.

YOUR INSTRUCTIONS

1. Reading and Understanding
Read all markdown content carefully.

2. Heading Structure
Always generate a 2 or 3-level heading structure for every chunk. Keep similar chunks into same headings:
- First-level heading: Document or product title
- Second-level heading: Major section inside the document (e.g., "Features", "Amenities", "Itinerary")
- Third-level heading: Specific subtopic within that section

3. Content Preservation
DO NOT alter, paraphrase, shorten, or skip any markdown content. All text, hyperlinks, links, formatting, images, image links, and elements must remain exactly as in the original markdown and present in the output chunks.

4. Chunking Strategy
Do not over chunk. Keep similar chunks together in same headings or use just two levels of headings.

5. Grouping Related Content
Keep all related content together:
- Always keep full numbered lists, bullet points, and related paragraphs in the same chunk
- Never split tables, figures, code blocks, or other complete elements

6. Table Formatting
When working with tables: Format using proper markdown table syntax (pipes | and hyphens -).

OUTPUT REQUIREMENTS

Output a list of chunks where each chunk starts with a full 2 or 3-level heading and remove all empty or no-finding chunks. Use this exact format:

[HEAD]main_heading > section_heading > chunk_heading[/HEAD]
chunk content 1

[HEAD]main_heading > section_heading[/HEAD]
chunk content 2

Ensure every chunk is clear, fully contextual, and no data is missing."#;

const OPEN: &str = "[HEAD]";
const CLOSE: &str = "[/HEAD]";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgenticPayload {
    pub system: &'static str,
    pub user: String,
}

impl AgenticPayload {
    pub fn render(&self) -> String {
        if self.user.is_empty() {
            self.system.to_string()
        } else {
            format!("{}\n\n{}", self.system, self.user)
        }
    }
}

pub fn build_agentic_prompt(markdown: &str) -> AgenticPayload {
    AgenticPayload {
        system: AGENTIC_SYSTEM_PROMPT,
        user: markdown.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgenticEntry {
    pub heading_trail: Vec<String>,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgenticResponse {
    pub raw: String,
    pub parsed: Vec<AgenticEntry>,
}

pub fn parse_agentic_response(text: &str) -> Result<AgenticResponse, BaselineError> {
    let mut parsed = Vec::new();
    let mut markers = 0;
    let mut rest = text;
    while let Some(open) = rest.find(OPEN) {
        let after = &rest[open + OPEN.len()..];
        let Some(close) = after.find(CLOSE) else { break };
        markers += 1;
        let trail: Vec<String> = after[..close]
            .split('>')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        let tail = &after[close + CLOSE.len()..];
        let end = tail.find(OPEN).unwrap_or(tail.len());
        let body = tail[..end].trim();
        if !body.is_empty() {
            parsed.push(AgenticEntry {
                heading_trail: trail,
                body: body.to_string(),
            });
        }
        rest = &tail[end..];
    }
    if markers == 0 {
        return Err(BaselineError::AgenticParse { raw: text.to_string() });
    }
    Ok(AgenticResponse {
        raw: text.to_string(),
        parsed,
    })
}

pub fn agentic_chunks(doc_id: &str, response: &AgenticResponse) -> Vec<Chunk> {
    response
        .parsed
        .iter()
        .enumerate()
        .map(|(n, entry)| Chunk {
            chunk_id: format!("{doc_id}#{}", n + 1),
            doc_id: doc_id.to_string(),
            heading_trail: entry.heading_trail.clone(),
            unit_ids: Vec::new(),
            body: entry.body.clone(),
            token_count: count_tokens(&entry.body),
            method: ChunkMethod::Agentic,
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct AgenticOutcome {
    pub chunks: Vec<Chunk>,
    pub response: AgenticResponse,
    pub usage: Usage,
    pub latency_ms: u64,
    /// [`text_fidelity`] of the joined bodies against the source.
    pub fidelity: f64,
}

/// Sends the whole document to the model and parses the rewritten chunks.
pub fn agentic_chunk(
    doc_id: &str,
    markdown: &str,
    model: &str,
    client: &dyn ChatModel,
) -> Result<AgenticOutcome, BaselineError> {
    let payload = build_agentic_prompt(markdown);
    let request = ChatRequest::planning(model, payload.system, payload.user);
    let started = Instant::now();
    let exchange = client.complete(&request)?;
    log::debug!("agentic call for {doc_id} took {:?}", started.elapsed());
    let response = parse_agentic_response(&exchange.response_text)?;
    let chunks = agentic_chunks(doc_id, &response);
    let joined: Vec<&str> = chunks.iter().map(|c| c.body.as_str()).collect();
    let fidelity = text_fidelity(markdown, &joined.join("\n\n"));
    Ok(AgenticOutcome {
        chunks,
        response,
        usage: exchange.usage,
        latency_ms: exchange.latency_ms,
        fidelity,
    })
}

/// `1 - d / max(len)` where `d` is the word-level edit distance. 1.0 means
/// the produced text has exactly the source's words in order.
pub fn text_fidelity(source: &str, produced: &str) -> f64 {
    let a: Vec<&str> = source.split_whitespace().collect();
    let b: Vec<&str> = produced.split_whitespace().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, wa) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, wb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(wa != wb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    1.0 - prev[b.len()] as f64 / longest as f64
}
