//! Chunk planning over unit IDs.
//!
//! A [`ChunkPlan`] is an ordered list of groups of unit IDs. Plans never
//! carry text; the resolver turns them back into chunks. Two planners are
//! provided: [`structural_plan`], a deterministic rule-based planner, and
//! [`llm_plan`], which asks a chat model for the grouping and falls back to
//! the structural planner when the model's answer cannot be parsed.

mod model;
mod outline;
mod prompt;
mod response;
mod structural;

use serde::{Deserialize, Serialize};

use crate::llm::{LlmError, Usage};
use crate::parse::{BoilerplateFilter, ParsedDocument};

pub use model::{llm_plan, LlmPlanOutcome};
pub(crate) use outline::Outline;
pub use outline::is_step_heading;
pub use prompt::{build_planner_payload, PlannerPayload, CORRECTIVE_INSTRUCTION, PLANNER_SYSTEM_PROMPT};
pub use response::parse_plan_response;
pub use structural::structural_plan;
pub(crate) use structural::pack;

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("planner response is not valid JSON: {message}")]
    Parse { message: String, raw: String },
    #[error("planner response has the wrong shape: {message}")]
    Shape { message: String, raw: String },
    #[error(transparent)]
    Unavailable(#[from] LlmError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Budget for the summed token counts of a group's non-heading units.
    pub max_chunk_tokens: usize,
    /// Send unit text to the model, or only IDs and metadata.
    pub include_unit_text_in_payload: bool,
    pub boilerplate_filter: bool,
    /// Model name used for planning requests.
    pub model: String,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            max_chunk_tokens: 512,
            include_unit_text_in_payload: true,
            boilerplate_filter: true,
            model: crate::llm::DEFAULT_MODEL.to_string(),
        }
    }
}

impl PlannerConfig {
    /// Every group carries a heading trail of exactly this many levels
    /// (reusing an ID when the document is shallower).
    pub const HIERARCHY_LEVELS: usize = 3;

    /// Applies the boilerplate filter when enabled.
    pub fn prepare(&self, doc: &ParsedDocument) -> ParsedDocument {
        if self.boilerplate_filter {
            BoilerplateFilter::default().apply(doc)
        } else {
            doc.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    Structural,
    Llm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkPlan {
    pub doc_id: String,
    pub groups: Vec<Vec<String>>,
    pub planner_kind: PlannerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_response: Option<String>,
}

impl ChunkPlan {
    /// The wire form: `{"chunks": [["id", ...], ...]}`.
    pub fn to_chunks_json(&self) -> String {
        let groups = serde_json::to_string(&self.groups).expect("string lists serialize");
        format!("{{\"chunks\": {groups}}}")
    }
}

/// Sidecar record written next to every plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanRunLog {
    pub doc_id: String,
    pub planner_kind: PlannerKind,
    pub usage: Usage,
    pub wall_ms: u64,
    pub fallback: bool,
}
