//! Comparison chunkers: fixed-size windows, rule-based sections, and
//! model-rewritten ("agentic") chunks.

mod agentic;
mod fixed;
mod sections;

pub use agentic::{
    agentic_chunk, agentic_chunks, build_agentic_prompt, parse_agentic_response, text_fidelity,
    AgenticEntry, AgenticOutcome, AgenticPayload, AgenticResponse, AGENTIC_SYSTEM_PROMPT,
};
pub use fixed::{fixed_size_chunk, DEFAULT_FIXED_OVERLAP, DEFAULT_FIXED_SIZE};
pub use sections::structural_chunk;

use crate::llm::LlmError;

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("window size ({size}) must exceed overlap ({overlap})")]
    Config { size: usize, overlap: usize },
    #[error("agentic response has no [HEAD] markers")]
    AgenticParse { raw: String },
    #[error(transparent)]
    Model(#[from] LlmError),
}
