//! Retrieval metrics, usage accounting and report tables.

mod metrics;
mod queries;
mod report;
mod usage;

use std::path::PathBuf;

pub use metrics::{
    aggregate, evaluate_query, CutoffMetrics, judge_ranking, judge_relevance, metrics_for, mrr, ndcg_at_k,
    normalize_for_match, precision_at_k, recall_at_k, Grouping, MetricsRow, Passage,
    QueryMetrics, RankedJudgement,
};
pub use queries::{load_queries, parse_queries, GoldItem, QueryCategory, QueryRecord};
pub use report::{
    cost_table, decimal, efficiency_summary_table, improvements_table, metrics_table, thousands,
    usage_by_org_table, TextTable,
};
pub use usage::{
    compute_cost, format_change, percentile, relative_change, round_cents, CostModel, CostReport,
    MethodCost, UsageLedger, UsageRow, UsageTotals,
};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Query {
        path: PathBuf,
        line: usize,
        message: String,
    },
}
