//! End-to-end runs: ingest, plan, chunk, index, retrieve, evaluate, compare.
//!
//! Every command derives its outputs from the corpus and (for model-backed
//! methods) the chat client alone. Files are written in sorted order without
//! timestamps, and time columns come from recorded model latency, so a
//! replayed run reproduces its outputs byte for byte.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{agentic_chunk, fixed_size_chunk, structural_chunk, DEFAULT_FIXED_OVERLAP, DEFAULT_FIXED_SIZE};
use crate::eval::{
    aggregate, compute_cost, cost_table, efficiency_summary_table, evaluate_query, format_change,
    improvements_table, load_queries, metrics_table, relative_change, usage_by_org_table, CostModel,
    EvalError, Grouping, MetricsRow, QueryMetrics, TextTable, UsageLedger, UsageRow,
};
use crate::index::{Index, IndexError, RetrievalResult, Retriever};
use crate::llm::{ChatModel, LlmError, LlmMode};
use crate::parse::{html_to_markdown, load_corpus, parse_markdown, Media, ParseError, ParsedDocument, SourceDocument};
use crate::planner::{llm_plan, structural_plan, ChunkPlan, PlanError, PlanRunLog, PlannerConfig, PlannerKind};
use crate::resolver::{resolve_plan, validate_and_repair, Chunk, ResolveError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("method {0} produced no chunks")]
    NoChunks(Method),
}

impl PipelineError {
    /// True for mistakes in how the run was requested, as opposed to problems
    /// with the data.
    pub fn is_usage(&self) -> bool {
        matches!(self, PipelineError::Config(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "wrac")]
    Wrac,
    #[serde(rename = "wrac-structural")]
    WracStructural,
    #[serde(rename = "fixed")]
    Fixed,
    #[serde(rename = "structural")]
    Structural,
    #[serde(rename = "agentic")]
    Agentic,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Wrac,
        Method::WracStructural,
        Method::Fixed,
        Method::Structural,
        Method::Agentic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Wrac => "wrac",
            Method::WracStructural => "wrac-structural",
            Method::Fixed => "fixed",
            Method::Structural => "structural",
            Method::Agentic => "agentic",
        }
    }

    pub fn needs_model(self) -> bool {
        matches!(self, Method::Wrac | Method::Agentic)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.as_str()).collect();
                format!("unknown method {s:?} (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub corpus_root: PathBuf,
    pub method: Method,
    pub mode: LlmMode,
    pub jobs: usize,
    pub max_chunk_tokens: usize,
    pub fixed_size: usize,
    pub fixed_overlap: usize,
    pub ks: Vec<usize>,
    pub cost: CostModel,
    pub model: String,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus_root: PathBuf::from("."),
            method: Method::WracStructural,
            mode: LlmMode::Replay,
            jobs: 1,
            max_chunk_tokens: 512,
            fixed_size: DEFAULT_FIXED_SIZE,
            fixed_overlap: DEFAULT_FIXED_OVERLAP,
            ks: vec![3, 6],
            cost: CostModel::default(),
            model: crate::llm::DEFAULT_MODEL.to_string(),
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(PipelineError::Config(format!("k values must be at least 1: {:?}", self.ks)));
        }
        if self.jobs == 0 {
            return Err(PipelineError::Config("--jobs must be at least 1".into()));
        }
        if self.max_chunk_tokens == 0 {
            return Err(PipelineError::Config("--max-chunk-tokens must be at least 1".into()));
        }
        if self.fixed_size <= self.fixed_overlap {
            return Err(PipelineError::Config(format!(
                "fixed window size ({}) must exceed overlap ({})",
                self.fixed_size, self.fixed_overlap
            )));
        }
        self.cost.validate().map_err(PipelineError::Config)
    }

    pub fn planner(&self) -> PlannerConfig {
        PlannerConfig {
            max_chunk_tokens: self.max_chunk_tokens,
            model: self.model.clone(),
            ..PlannerConfig::default()
        }
    }

    fn sorted_ks(&self) -> Vec<usize> {
        let mut ks = self.ks.clone();
        ks.sort_unstable();
        ks.dedup();
        ks
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn json_lines<T: Serialize>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| serde_json::to_string(i).expect("records serialize") + "\n")
        .collect()
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("records serialize") + "\n"
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| PipelineError::Config(e.to_string()))
}

/// A source document with its Markdown form and parsed units.
#[derive(Debug, Clone)]
pub struct IngestedDoc {
    pub source: SourceDocument,
    pub markdown: String,
    pub parsed: ParsedDocument,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrgSummary {
    pub files: usize,
    pub total_chars: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseSummary {
    pub files: usize,
    pub total_chars: usize,
    pub units: usize,
    pub html_files: usize,
    pub markdown_files: usize,
    pub orgs: BTreeMap<String, OrgSummary>,
    /// (path or doc_id, message) for every file that could not be ingested.
    pub failures: Vec<(String, String)>,
}

impl ParseSummary {
    pub fn table(&self) -> TextTable {
        let mut t = TextTable::new(["Organization", "Total Length", "Total Files"], 1);
        for (org, s) in &self.orgs {
            t.row(vec![org.clone(), crate::eval::thousands(s.total_chars as u64), s.files.to_string()]);
        }
        t.row(vec![
            "Total".into(),
            crate::eval::thousands(self.total_chars as u64),
            self.files.to_string(),
        ]);
        t
    }
}

/// Loads and parses the corpus. Files that fail to load or parse are listed
/// in the summary and skipped.
pub fn ingest(cfg: &RunConfig) -> Result<(Vec<IngestedDoc>, ParseSummary), PipelineError> {
    let corpus = load_corpus(&cfg.corpus_root)?;
    let mut summary = ParseSummary {
        failures: corpus
            .failures
            .iter()
            .map(|(p, m)| (p.display().to_string(), m.clone()))
            .collect(),
        ..ParseSummary::default()
    };
    let pool = thread_pool(cfg.jobs)?;
    let results: Vec<Result<IngestedDoc, (String, String)>> = pool.install(|| {
        corpus
            .documents
            .into_par_iter()
            .map(|source| {
                let fail = |e: ParseError| (source.doc_id.clone(), e.to_string());
                let markdown = match source.media {
                    Media::Html => html_to_markdown(source.raw.as_bytes()).map_err(fail)?,
                    Media::Markdown => source.raw.clone(),
                };
                let parsed = parse_markdown(&source.doc_id, &markdown).map_err(fail)?;
                Ok(IngestedDoc {
                    source,
                    markdown,
                    parsed,
                })
            })
            .collect()
    });
    let mut docs = Vec::new();
    for r in results {
        match r {
            Ok(doc) => {
                summary.files += 1;
                summary.total_chars += doc.parsed.total_chars;
                summary.units += doc.parsed.units.len();
                match doc.source.media {
                    Media::Html => summary.html_files += 1,
                    Media::Markdown => summary.markdown_files += 1,
                }
                let org = summary.orgs.entry(doc.source.org.clone()).or_default();
                org.files += 1;
                org.total_chars += doc.parsed.total_chars;
                docs.push(doc);
            }
            Err((id, message)) => {
                log::warn!("skipping {id}: {message}");
                summary.failures.push((id, message));
            }
        }
    }
    if docs.is_empty() {
        return Err(PipelineError::Parse(ParseError::NoDocuments(
            cfg.corpus_root.display().to_string(),
        )));
    }
    Ok((docs, summary))
}

/// Writes `units/<doc_id>.json` per document plus `parse_summary.json` and
/// `parse_summary.txt`.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<ParseSummary, PipelineError> {
    cfg.validate()?;
    let (docs, summary) = ingest(cfg)?;
    for doc in &docs {
        let path = cfg.out.join("units").join(format!("{}.json", doc.source.doc_id));
        write_file(&path, &pretty(&doc.parsed.units))?;
    }
    write_file(&cfg.out.join("parse_summary.json"), &pretty(&summary))?;
    write_file(&cfg.out.join("parse_summary.txt"), &summary.table().render())?;
    Ok(summary)
}

/// Chunks, plans and usage for one method over the corpus.
#[derive(Debug, Clone, Default)]
pub struct ChunkRun {
    pub chunks: Vec<Chunk>,
    /// Plans and their run logs, for planner-based methods.
    pub plans: Vec<(ChunkPlan, PlanRunLog)>,
    pub ledger: UsageLedger,
    pub failures: Vec<(String, String)>,
    /// Agentic text fidelity per document.
    pub fidelity: BTreeMap<String, f64>,
}

struct DocOutput {
    chunks: Vec<Chunk>,
    plan: Option<(ChunkPlan, PlanRunLog)>,
    usage: UsageRow,
    fidelity: Option<f64>,
}

fn chunk_one(doc: &IngestedDoc, cfg: &RunConfig, client: Option<&dyn ChatModel>) -> Result<DocOutput, String> {
    let planner = cfg.planner();
    let mut usage = UsageRow {
        org: doc.source.org.clone(),
        method: cfg.method.to_string(),
        file: doc.source.doc_id.clone(),
        chars: doc.parsed.total_chars as u64,
        input_tokens: 0,
        output_tokens: 0,
        cached_tokens: 0,
        wall_seconds: 0.0,
    };
    let mut plan = None;
    let mut fidelity = None;
    let chunks = match cfg.method {
        Method::Wrac | Method::WracStructural => {
            let prepared = planner.prepare(&doc.parsed);
            let (raw_plan, log) = if cfg.method == Method::Wrac {
                let client = client.ok_or("no chat model configured")?;
                let outcome = llm_plan(&prepared, &planner, client).map_err(|e: PlanError| e.to_string())?;
                usage.input_tokens = outcome.usage.input_tokens;
                usage.output_tokens = outcome.usage.output_tokens;
                usage.cached_tokens = outcome.usage.cached_tokens;
                usage.wall_seconds = outcome.latency_ms as f64 / 1000.0;
                let log = outcome.run_log();
                (outcome.plan, log)
            } else {
                let p = structural_plan(&prepared, &planner);
                let log = PlanRunLog {
                    doc_id: p.doc_id.clone(),
                    planner_kind: PlannerKind::Structural,
                    usage: Default::default(),
                    wall_ms: 0,
                    fallback: false,
                };
                (p, log)
            };
            let (repaired, report) = validate_and_repair(&raw_plan, &prepared).map_err(|e| e.to_string())?;
            if !report.ok {
                log::info!("repaired plan for {}: {report:?}", doc.source.doc_id);
            }
            let chunks = resolve_plan(&repaired, &prepared).map_err(|e: ResolveError| e.to_string())?;
            plan = Some((repaired, log));
            chunks
        }
        Method::Fixed => fixed_size_chunk(&doc.source.doc_id, &doc.markdown, cfg.fixed_size, cfg.fixed_overlap)
            .map_err(|e| e.to_string())?,
        Method::Structural => structural_chunk(&planner.prepare(&doc.parsed), cfg.max_chunk_tokens),
        Method::Agentic => {
            let client = client.ok_or("no chat model configured")?;
            let outcome =
                agentic_chunk(&doc.source.doc_id, &doc.markdown, &cfg.model, client).map_err(|e| e.to_string())?;
            usage.input_tokens = outcome.usage.input_tokens;
            usage.output_tokens = outcome.usage.output_tokens;
            usage.cached_tokens = outcome.usage.cached_tokens;
            usage.wall_seconds = outcome.latency_ms as f64 / 1000.0;
            fidelity = Some(outcome.fidelity);
            outcome.chunks
        }
    };
    Ok(DocOutput {
        chunks,
        plan,
        usage,
        fidelity,
    })
}

/// Chunks every document with `cfg.method`. Per-document failures are
/// recorded and the document contributes no chunks.
pub fn chunk_corpus(
    docs: &[IngestedDoc],
    cfg: &RunConfig,
    client: Option<&dyn ChatModel>,
) -> Result<ChunkRun, PipelineError> {
    if cfg.method.needs_model() && client.is_none() {
        return Err(PipelineError::Config(format!("method {} needs a chat model", cfg.method)));
    }
    let pool = thread_pool(cfg.jobs)?;
    let outputs: Vec<Result<DocOutput, String>> =
        pool.install(|| docs.par_iter().map(|d| chunk_one(d, cfg, client)).collect());
    let mut run = ChunkRun::default();
    for (doc, out) in docs.iter().zip(outputs) {
        match out {
            Ok(o) => {
                run.chunks.extend(o.chunks);
                run.plans.extend(o.plan);
                run.ledger.push(o.usage);
                if let Some(f) = o.fidelity {
                    run.fidelity.insert(doc.source.doc_id.clone(), f);
                }
            }
            Err(message) => {
                log::warn!("{} failed for {}: {message}", cfg.method, doc.source.doc_id);
                run.failures.push((doc.source.doc_id.clone(), message));
            }
        }
    }
    Ok(run)
}

/// Writes `plans/<doc_id>.json` (the wire form) and `plans/<doc_id>.log.json`.
pub fn cmd_plan(cfg: &RunConfig, client: Option<&dyn ChatModel>) -> Result<ChunkRun, PipelineError> {
    cfg.validate()?;
    if !matches!(cfg.method, Method::Wrac | Method::WracStructural) {
        return Err(PipelineError::Config(format!(
            "method {} does not produce plans; use wrac or wrac-structural",
            cfg.method
        )));
    }
    let (docs, _) = ingest(cfg)?;
    let run = chunk_corpus(&docs, cfg, client)?;
    for (plan, log) in &run.plans {
        let base = cfg.out.join("plans").join(&plan.doc_id);
        write_file(&base.with_extension("json"), &(plan.to_chunks_json() + "\n"))?;
        write_file(&base.with_extension("log.json"), &pretty(log))?;
    }
    Ok(run)
}

/// Writes `chunks.jsonl` and `usage.jsonl`.
pub fn cmd_chunk(cfg: &RunConfig, client: Option<&dyn ChatModel>) -> Result<ChunkRun, PipelineError> {
    cfg.validate()?;
    let (docs, _) = ingest(cfg)?;
    let run = chunk_corpus(&docs, cfg, client)?;
    write_file(&cfg.out.join("chunks.jsonl"), &json_lines(&run.chunks))?;
    write_file(&cfg.out.join("usage.jsonl"), &json_lines(&run.ledger.rows))?;
    Ok(run)
}

/// Chunks the corpus and writes `index.json` next to the chunk files.
pub fn cmd_index(cfg: &RunConfig, client: Option<&dyn ChatModel>) -> Result<Index, PipelineError> {
    let run = cmd_chunk(cfg, client)?;
    if run.chunks.is_empty() {
        return Err(PipelineError::NoChunks(cfg.method));
    }
    let index = Index::build(&run.chunks)?;
    index.save(&cfg.out.join("index.json"))?;
    Ok(index)
}

/// Queries a saved index.
pub fn cmd_retrieve(index_path: &Path, query: &str, k: usize) -> Result<RetrievalResult, PipelineError> {
    if k == 0 {
        return Err(PipelineError::Config("k must be at least 1".into()));
    }
    Ok(Index::load(index_path)?.retrieve(query, k))
}

/// Identity of an evaluation run, written as `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub method: Method,
    pub ks: Vec<usize>,
    pub documents: usize,
    pub chunks: usize,
    pub queries: usize,
    pub excluded_queries: usize,
    pub failures: Vec<(String, String)>,
    #[serde(default)]
    pub agentic_fidelity: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub by_org: Vec<MetricsRow>,
    pub by_category: Vec<MetricsRow>,
    pub overall: Vec<MetricsRow>,
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub info: RunInfo,
    pub per_query: Vec<QueryMetrics>,
    pub report: MetricsReport,
    pub ledger: UsageLedger,
    pub text: String,
}

fn method_label(method: Method) -> &'static str {
    match method {
        Method::Wrac => "W-RAC",
        Method::WracStructural => "W-RAC (structural)",
        Method::Fixed => "Fixed-size",
        Method::Structural => "Rule-based",
        Method::Agentic => "Agentic Chunking",
    }
}

fn metrics_text(report: &MetricsReport, ks: &[usize]) -> String {
    let mut text = String::new();
    for (title, rows, label) in [
        ("Retrieval Performance by Organization", &report.by_org, Some("Organization")),
        ("Retrieval Performance by Query Type", &report.by_category, Some("Query Type")),
        ("Overall Retrieval Performance", &report.overall, None),
    ] {
        text.push_str(&format!("{title}\n\n"));
        text.push_str(&metrics_table(rows, label, ks).render());
        text.push('\n');
    }
    text
}

/// Full run: ingest, chunk, index, and score every query in
/// `<corpus>/queries.jsonl`.
///
/// Writes `chunks.jsonl`, `usage.jsonl`, `index.json`, `per_query.jsonl`,
/// `metrics.json`, `run.json` and `report.txt` under `cfg.out`.
pub fn cmd_eval(cfg: &RunConfig, client: Option<&dyn ChatModel>) -> Result<EvalOutput, PipelineError> {
    cfg.validate()?;
    let ks = cfg.sorted_ks();
    let queries = load_queries(&cfg.corpus_root.join("queries.jsonl"))?;
    let (docs, summary) = ingest(cfg)?;
    let run = chunk_corpus(&docs, cfg, client)?;
    if run.chunks.is_empty() {
        return Err(PipelineError::NoChunks(cfg.method));
    }
    let index = Index::build(&run.chunks)?;

    let pool = thread_pool(cfg.jobs)?;
    let per_query: Vec<QueryMetrics> = pool.install(|| {
        queries
            .par_iter()
            .filter_map(|q| evaluate_query(&index, q, &ks))
            .collect()
    });
    let label = method_label(cfg.method);
    let report = MetricsReport {
        by_org: aggregate(&per_query, Grouping::Org, label),
        by_category: aggregate(&per_query, Grouping::Category, label),
        overall: aggregate(&per_query, Grouping::Overall, label),
    };
    let mut failures = summary.failures.clone();
    failures.extend(run.failures.iter().cloned());
    let info = RunInfo {
        method: cfg.method,
        ks: ks.clone(),
        documents: docs.len(),
        chunks: run.chunks.len(),
        queries: per_query.len(),
        excluded_queries: queries.len() - per_query.len(),
        failures,
        agentic_fidelity: run.fidelity.clone(),
    };

    let mut text = format!(
        "method: {}\ndocuments: {}\nchunks: {}\nqueries: {} ({} excluded)\n\n",
        cfg.method, info.documents, info.chunks, info.queries, info.excluded_queries
    );
    text.push_str("Token and Runtime by Organization\n\n");
    text.push_str(&usage_by_org_table(&run.ledger).render());
    text.push('\n');
    text.push_str(&metrics_text(&report, &ks));

    write_file(&cfg.out.join("chunks.jsonl"), &json_lines(&run.chunks))?;
    write_file(&cfg.out.join("usage.jsonl"), &json_lines(&run.ledger.rows))?;
    index.save(&cfg.out.join("index.json"))?;
    write_file(&cfg.out.join("per_query.jsonl"), &json_lines(&per_query))?;
    write_file(&cfg.out.join("metrics.json"), &pretty(&report))?;
    write_file(&cfg.out.join("run.json"), &pretty(&info))?;
    write_file(&cfg.out.join("report.txt"), &text)?;

    Ok(EvalOutput {
        info,
        per_query,
        report,
        ledger: run.ledger,
        text,
    })
}

/// The parts of an evaluation directory that `cmd_compare` reads.
#[derive(Debug, Clone, Default)]
pub struct RunArtifacts {
    pub label: String,
    pub ledger: Option<UsageLedger>,
    pub metrics: Option<MetricsReport>,
    pub ks: Vec<usize>,
}

fn read_optional(path: &Path) -> Result<Option<String>, PipelineError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(io_err(path)(e)),
    }
}

fn format_err(path: &Path, e: serde_json::Error) -> PipelineError {
    PipelineError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

impl RunArtifacts {
    /// Reads `run.json`, `usage.jsonl` and `metrics.json`; each may be absent.
    pub fn load(dir: &Path) -> Result<RunArtifacts, PipelineError> {
        if !dir.is_dir() {
            return Err(PipelineError::Config(format!("{} is not a run directory", dir.display())));
        }
        let mut art = RunArtifacts {
            label: dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned()),
            ks: vec![3, 6],
            ..RunArtifacts::default()
        };
        let run_path = dir.join("run.json");
        if let Some(text) = read_optional(&run_path)? {
            let info: RunInfo = serde_json::from_str(&text).map_err(|e| format_err(&run_path, e))?;
            art.label = method_label(info.method).to_string();
            art.ks = info.ks;
        }
        let usage_path = dir.join("usage.jsonl");
        if let Some(text) = read_optional(&usage_path)? {
            let mut ledger = UsageLedger::default();
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                ledger.push(serde_json::from_str(line).map_err(|e| format_err(&usage_path, e))?);
            }
            if !ledger.rows.is_empty() {
                art.ledger = Some(ledger);
            }
        }
        let metrics_path = dir.join("metrics.json");
        if let Some(text) = read_optional(&metrics_path)? {
            art.metrics = Some(serde_json::from_str(&text).map_err(|e| format_err(&metrics_path, e))?);
        }
        Ok(art)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub text: String,
    pub warnings: Vec<String>,
}

fn relabel(ledger: &UsageLedger, label: &str) -> UsageLedger {
    UsageLedger {
        rows: ledger
            .rows
            .iter()
            .map(|r| UsageRow {
                method: label.to_string(),
                ..r.clone()
            })
            .collect(),
    }
}

fn relabel_rows(rows: &[MetricsRow], label: &str) -> Vec<MetricsRow> {
    rows.iter()
        .map(|r| MetricsRow {
            method: label.to_string(),
            ..r.clone()
        })
        .collect()
}

/// Efficiency, cost and retrieval deltas from run `a` to run `b`.
pub fn compare_runs(a: &RunArtifacts, b: &RunArtifacts, cost: &CostModel) -> CompareReport {
    let (la, lb) = if a.label == b.label {
        (format!("{} (a)", a.label), format!("{} (b)", b.label))
    } else {
        (a.label.clone(), b.label.clone())
    };
    let mut warnings = Vec::new();
    let mut text = String::new();

    match (&a.ledger, &b.ledger) {
        (Some(ua), Some(ub)) => {
            let mut ledger = relabel(ua, &la);
            ledger.extend(relabel(ub, &lb));
            let report = compute_cost(&ledger, cost);
            text.push_str("Token and Runtime by Organization\n\n");
            text.push_str(&usage_by_org_table(&ledger).render());
            text.push_str("\nAggregate Efficiency Summary\n\n");
            text.push_str(&efficiency_summary_table(&ledger, &la, &lb).render());
            text.push_str("\nCost Analysis\n\n");
            text.push_str(&cost_table(&report, &la, &lb).render());
            text.push_str("\nEfficiency Improvements\n\n");
            text.push_str(&improvements_table(&ledger, &report, &la, &lb).render());
            text.push('\n');
        }
        _ => {
            for (art, label) in [(a, &la), (b, &lb)] {
                if art.ledger.is_none() {
                    warnings.push(format!("{label} has no usage rows; efficiency and cost tables omitted"));
                }
            }
        }
    }

    match (&a.metrics, &b.metrics) {
        (Some(ma), Some(mb)) => {
            let mut ks: Vec<usize> = a.ks.iter().chain(&b.ks).copied().collect();
            ks.sort_unstable();
            ks.dedup();
            let merged = MetricsReport {
                by_org: interleave(&relabel_rows(&ma.by_org, &la), &relabel_rows(&mb.by_org, &lb)),
                by_category: interleave(&relabel_rows(&ma.by_category, &la), &relabel_rows(&mb.by_category, &lb)),
                overall: [relabel_rows(&ma.overall, &la), relabel_rows(&mb.overall, &lb)].concat(),
            };
            text.push_str(&metrics_text(&merged, &ks));
            if let (Some(oa), Some(ob)) = (ma.overall.first(), mb.overall.first()) {
                text.push_str("Retrieval Deltas\n\n");
                text.push_str(&delta_table(oa, ob, &la, &lb, &ks).render());
            }
        }
        _ => {
            for (art, label) in [(a, &la), (b, &lb)] {
                if art.metrics.is_none() {
                    warnings.push(format!("{label} has no retrieval metrics; metric tables omitted"));
                }
            }
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    CompareReport { text, warnings }
}

/// Rows of `a` and `b` paired by group, in `a`'s order, then `b`-only groups.
fn interleave(a: &[MetricsRow], b: &[MetricsRow]) -> Vec<MetricsRow> {
    let mut out = Vec::new();
    for r in a {
        out.push(r.clone());
        out.extend(b.iter().filter(|x| x.group == r.group).cloned());
    }
    out.extend(b.iter().filter(|x| !a.iter().any(|r| r.group == x.group)).cloned());
    out
}

fn delta_table(a: &MetricsRow, b: &MetricsRow, la: &str, lb: &str, ks: &[usize]) -> TextTable {
    let mut t = TextTable::new(["Metric", la, lb, "Relative Change"], 1);
    let mut add = |name: String, x: Option<f64>, y: Option<f64>| {
        let cell = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        let change = match (x, y) {
            (Some(x), Some(y)) => format_change(relative_change(x, y)),
            _ => "n/a".into(),
        };
        t.row(vec![name, cell(x), cell(y), change]);
    };
    for &k in ks.iter().rev() {
        add(format!("Avg Recall@{k}"), a.recall.get(&k).copied(), b.recall.get(&k).copied());
    }
    for &k in ks.iter().rev() {
        add(format!("Avg Precision@{k}"), a.precision.get(&k).copied(), b.precision.get(&k).copied());
    }
    add("Avg MRR".into(), Some(a.mrr), Some(b.mrr));
    for &k in ks.iter().rev() {
        add(format!("Avg NDCG@{k}"), a.ndcg.get(&k).copied(), b.ndcg.get(&k).copied());
    }
    t
}

/// Compares two evaluation directories and writes `compare.txt` into `out`
/// when given.
pub fn cmd_compare(dir_a: &Path, dir_b: &Path, cost: &CostModel, out: Option<&Path>) -> Result<CompareReport, PipelineError> {
    cost.validate().map_err(PipelineError::Config)?;
    let a = RunArtifacts::load(dir_a)?;
    let b = RunArtifacts::load(dir_b)?;
    let report = compare_runs(&a, &b, cost);
    if let Some(out) = out {
        write_file(&out.join("compare.txt"), &report.text)?;
    }
    Ok(report)
}
