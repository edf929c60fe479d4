use crate::llm::{ChatModel, ChatRequest, Usage};
use crate::parse::ParsedDocument;

use super::{
    build_planner_payload, parse_plan_response, structural_plan, ChunkPlan, PlanError,
    PlanRunLog, PlannerConfig, CORRECTIVE_INSTRUCTION,
};

/// Result of one model-backed planning run.
#[derive(Debug, Clone)]
pub struct LlmPlanOutcome {
    pub plan: ChunkPlan,
    /// Summed over every call made, including a failed first attempt.
    pub usage: Usage,
    /// Summed model latency.
    pub latency_ms: u64,
    pub calls: usize,
    /// The structural planner produced `plan` because the model's answers
    /// could not be parsed.
    pub fallback: bool,
    /// Parse errors seen along the way, in order.
    pub errors: Vec<String>,
}

impl LlmPlanOutcome {
    pub fn run_log(&self) -> PlanRunLog {
        PlanRunLog {
            doc_id: self.plan.doc_id.clone(),
            planner_kind: self.plan.planner_kind,
            usage: self.usage,
            wall_ms: self.latency_ms,
            fallback: self.fallback,
        }
    }
}

/// Plans `doc` with a chat model.
///
/// One request is sent. If the answer does not parse, the request is
/// repeated once with a corrective instruction appended; if that also fails,
/// the structural planner's plan is returned with `fallback` set. Transport
/// failures and replay-cache misses surface as [`PlanError::Unavailable`].
pub fn llm_plan(
    doc: &ParsedDocument,
    cfg: &PlannerConfig,
    client: &dyn ChatModel,
) -> Result<LlmPlanOutcome, PlanError> {
    let payload = build_planner_payload(doc, cfg);
    let request = ChatRequest::planning(&cfg.model, payload.system, &payload.units_json);
    let retry = ChatRequest::planning(
        &cfg.model,
        payload.system,
        format!("{}\n\n{CORRECTIVE_INSTRUCTION}", payload.units_json),
    );

    let mut usage = Usage::default();
    let mut latency_ms = 0;
    let mut errors = Vec::new();
    for (calls, req) in [request, retry].iter().enumerate() {
        let exchange = client.complete(req)?;
        usage = usage + exchange.usage;
        latency_ms += exchange.latency_ms;
        match parse_plan_response(&doc.doc_id, &exchange.response_text) {
            Ok(plan) => {
                return Ok(LlmPlanOutcome {
                    plan,
                    usage,
                    latency_ms,
                    calls: calls + 1,
                    fallback: false,
                    errors,
                })
            }
            Err(e) => {
                log::warn!("planner response for {} rejected: {e}", doc.doc_id);
                errors.push(e.to_string());
            }
        }
    }
    Ok(LlmPlanOutcome {
        plan: structural_plan(doc, cfg),
        usage,
        latency_ms,
        calls: 2,
        fallback: true,
        errors,
    })
}
