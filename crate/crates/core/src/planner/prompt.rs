use serde::Serialize;

use crate::parse::ParsedDocument;

use super::PlannerConfig;

/// System prompt for the ID-grouping planner.
pub const PLANNER_SYSTEM_PROMPT: &str = r#"You are tasked with processing an array of document chunks representing text sections, headings, and titles. Your goal is to extract and group only the main policy, explanatory, or instructional content (e.g., rules, eligibility, charges) into logical, context-rich units.

CORE REQUIREMENTS

1. Three-Level Heading Hierarchy

Build a complete heading hierarchy tree by tracing parent_heading relationships upward. Every chunk group must include exactly 3 levels:
- Level 1: Top-level/root heading - document title or highest-level heading that encompasses the content's topic
- Level 2: Mid-level parent heading - intermediate heading or reuse Level 1
- Level 3: Immediate parent heading - most immediate parent or nearby matching heading

Missing levels: Use an existing heading chunk ID that best matches context (title, document structure, surrounding content). You may reuse the same heading ID for multiple levels. Only use existing chunk IDs—cannot create new ones.

2. Parent Headings with Multiple Children

When a parent heading has multiple child sections, include the parent heading ID in EACH child group array. Never output parent headings as standalone arrays when they have multiple children.

Example: ["heading_66", "heading_67", "text_68"] and ["heading_66", "heading_80", "text_81"] (heading_66 appears in both).

3. Procedural Content

NEVER split procedural steps, instructions, or sequential numbered/bulleted lists across multiple chunks. When content represents a procedure, process, or step-by-step instructions (e.g. "Steps to...", numbered steps 1, 2, 3...), group ALL steps together in a SINGLE chunk array, even if they have individual headings or are numbered separately.

Examples of procedural content that must stay together:
- Step-by-step instructions
- Numbered procedures
- Sequential how-to guides
- Multi-step processes
- Ordered lists of actions

4. Context & Merging

- Use heading hierarchy, parent_heading, and title fields to map structure
- If parent_heading is None but structure shows hierarchy, infer parent-child relationships from sequential patterns
- For small chunks (<=2 lines) missing context, merge with title/heading/adjacent chunks
- Include relevant titles/headings with dependent content
- Do not always rely on the markdown given, use the context of the document to infer the heading hierarchy and group the chunks accordingly

5. Filtering

Remove: cookies, page navigation, logins.

6. Output Rules

- Output only chunk IDs (no text modifications)
- Each array must contain at least one heading/title or sufficient context
- Merge small contextless fragments—never output standalone arrays for them

PROCESSING STEPS

1. Map heading hierarchy using parent_heading relationships. Use title if context is ambiguous.
2. Identify procedural content: Detect step-by-step instructions, numbered procedures, or sequential processes. These MUST be grouped together in a single chunk.
3. For each chunk, trace 3 heading levels (L3->L2->L1). Fill missing levels with best-matching existing heading ID.
4. Identify parent headings with multiple children—include in ALL child arrays.
5. Process chunks: merge small/contextless chunks using title/headings; ensure 3-level hierarchy; include parent in child groups; keep all procedural steps together.
6. Group into logical/topical arrays with 3-level hierarchy.
7. Output JSON without backticks and code blocks: {"chunks": [["id1", "id2", "id3"], ...]}

EXAMPLES

Example 1: Missing Level

Input:
[
  {"id": "heading_1", "type": "heading", "text": "EXCESS BAGGAGE CHARGES", "parent_heading": null},
  {"id": "heading_2", "type": "heading", "text": "Packing heavy?", "parent_heading": "EXCESS BAGGAGE CHARGES"},
  {"id": "text_3", "type": "text", "text": "Fly without baggage worries...", "parent_heading": "Packing heavy?"},
  {"id": "text_4", "type": "text", "text": "Fees apply per kg.", "parent_heading": "Packing heavy?"}
]

Output:
{"chunks": [["heading_1", "heading_2", "text_3", "text_4"]]}

Note: heading_1 = L1, heading_2 = L3. Missing L2 filled with best-matching existing heading. Cookies filtered out.

Example 2: Procedural Steps (MUST Stay Together)

Input:
[
  {"id": "heading_1", "type": "heading", "text": "How to Change a Tyre", "parent_heading": null},
  {"id": "heading_2", "type": "heading", "text": "Steps to Change a Tyre", "parent_heading": "How to Change a Tyre"},
  {"id": "heading_3", "type": "heading", "text": "1. Park Safely", "parent_heading": "Steps to Change a Tyre"},
  {"id": "text_4", "type": "text", "text": "Pull over to a safe location...", "parent_heading": "1. Park Safely"},
  {"id": "heading_5", "type": "heading", "text": "2. Gather Tools", "parent_heading": "Steps to Change a Tyre"},
  {"id": "text_6", "type": "text", "text": "You will need: spare tyre, jack...", "parent_heading": "2. Gather Tools"},
  {"id": "heading_7", "type": "heading", "text": "3. Remove the Wheel Cover", "parent_heading": "Steps to Change a Tyre"},
  {"id": "text_8", "type": "text", "text": "Use the flat end of the wrench...", "parent_heading": "3. Remove the Wheel Cover"},
  {"id": "heading_9", "type": "heading", "text": "4. Loosen the Lug Nuts", "parent_heading": "Steps to Change a Tyre"},
  {"id": "text_10", "type": "text", "text": "Use the lug wrench to turn...", "parent_heading": "4. Loosen the Lug Nuts"}
]

Output:
{"chunks": [["heading_1", "heading_2", "heading_3", "text_4", "heading_5", "text_6", "heading_7", "text_8", "heading_9", "text_10"]]}

Note: All procedural steps (1-4) are grouped together in a SINGLE chunk array. Never split sequential steps into separate chunks."#;

/// Appended to the user message when the first response could not be parsed.
pub const CORRECTIVE_INSTRUCTION: &str = "Your previous answer could not be parsed. Respond with a single JSON object of the form {\"chunks\": [[\"id1\", \"id2\"], ...]} using only the IDs above, with no backticks, code fences, or commentary.";

/// The planner request: fixed system prompt plus the serialized unit array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannerPayload {
    pub system: &'static str,
    pub units_json: String,
}

impl PlannerPayload {
    /// Prompt followed by the unit array, as one text.
    pub fn render(&self) -> String {
        format!("{}\n\n{}", self.system, self.units_json)
    }
}

#[derive(Serialize)]
struct FullUnit<'a> {
    id: &'a str,
    #[serde(rename = "type")]
    kind: &'a str,
    text: &'a str,
    parent_heading: Option<&'a str>,
}

#[derive(Serialize)]
struct MetadataUnit<'a> {
    id: &'a str,
    #[serde(rename = "type")]
    kind: &'a str,
    token_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    heading_level: Option<u8>,
    parent_heading: Option<&'a str>,
}

/// Serializes the document for the planner.
///
/// Each unit becomes `{"id", "type", "text", "parent_heading"}`, one per line.
/// With `include_unit_text_in_payload = false`, `text` is replaced by
/// `token_count` and (for headings) `heading_level`.
pub fn build_planner_payload(doc: &ParsedDocument, cfg: &PlannerConfig) -> PlannerPayload {
    let lines: Vec<String> = doc
        .units
        .iter()
        .map(|u| {
            let kind = u.kind.as_str();
            let parent_heading = u.parent_heading.as_deref();
            let json = if cfg.include_unit_text_in_payload {
                serde_json::to_string(&FullUnit {
                    id: &u.id,
                    kind,
                    text: &u.text,
                    parent_heading,
                })
            } else {
                serde_json::to_string(&MetadataUnit {
                    id: &u.id,
                    kind,
                    token_count: u.token_count,
                    heading_level: u.heading_level,
                    parent_heading,
                })
            };
            json.expect("unit serialization cannot fail")
        })
        .collect();
    let units_json = if lines.is_empty() {
        "[]".to_string()
    } else {
        format!("[\n  {}\n]", lines.join(",\n  "))
    };
    PlannerPayload {
        system: PLANNER_SYSTEM_PROMPT,
        units_json,
    }
}
