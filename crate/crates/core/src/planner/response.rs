use super::{ChunkPlan, PlanError, PlannerKind};

/// Parses a planner response into a [`ChunkPlan`].
///
/// Code fences are stripped even though the prompt forbids them. The body
/// must be a JSON object whose `chunks` key holds a list of lists of strings.
pub fn parse_plan_response(doc_id: &str, text: &str) -> Result<ChunkPlan, PlanError> {
    let body = strip_fences(text);
    let value: serde_json::Value = serde_json::from_str(body).map_err(|e| PlanError::Parse {
        message: e.to_string(),
        raw: text.to_string(),
    })?;
    let shape = |message: &str| PlanError::Shape {
        message: message.to_string(),
        raw: text.to_string(),
    };
    let chunks = value
        .as_object()
        .ok_or_else(|| shape("top level is not an object"))?
        .get("chunks")
        .ok_or_else(|| shape("missing `chunks` key"))?
        .as_array()
        .ok_or_else(|| shape("`chunks` is not a list"))?;
    let groups = chunks
        .iter()
        .map(|group| {
            group
                .as_array()
                .ok_or_else(|| shape("`chunks` entry is not a list"))?
                .iter()
                .map(|id| {
                    id.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| shape("chunk ID is not a string"))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ChunkPlan {
        doc_id: doc_id.to_string(),
        groups,
        planner_kind: PlannerKind::Llm,
        raw_response: Some(text.to_string()),
    })
}

fn strip_fences(text: &str) -> &str {
    let trimmed = text.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    // drop the info string (e.g. `json`) on the opening fence line
    let rest = rest.split_once('\n').map_or("", |(_, body)| body);
    rest.trim_end()
        .strip_suffix("```")
        .unwrap_or(rest)
        .trim()
}
