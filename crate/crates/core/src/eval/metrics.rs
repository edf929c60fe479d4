use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::index::{IndexedChunk, Retriever};
use crate::resolver::Chunk;

use super::queries::{GoldItem, QueryCategory, QueryRecord};

/// Anything with a source document and a body.
pub trait Passage {
    fn doc_id(&self) -> &str;
    fn body(&self) -> &str;
}

impl Passage for Chunk {
    fn doc_id(&self) -> &str {
        &self.doc_id
    }
    fn body(&self) -> &str {
        &self.body
    }
}

impl Passage for IndexedChunk {
    fn doc_id(&self) -> &str {
        &self.doc_id
    }
    fn body(&self) -> &str {
        &self.body
    }
}

/// Lowercased alphanumeric runs joined by single spaces, padded with a space
/// on each side so substring tests respect word boundaries.
pub fn normalize_for_match(text: &str) -> String {
    let mut out = String::from(" ");
    for word in text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
        out.push_str(&word.to_lowercase());
        out.push(' ');
    }
    out
}

/// Same document, and the folded evidence occurs in the folded body.
pub fn judge_relevance<P: Passage + ?Sized>(chunk: &P, gold: &GoldItem) -> bool {
    if chunk.doc_id() != gold.doc_id {
        return false;
    }
    let evidence = normalize_for_match(&gold.evidence);
    evidence.len() > 1 && normalize_for_match(chunk.body()).contains(&evidence)
}

/// Relevance facts for one ranked list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedJudgement {
    /// For each rank, the gold items that chunk satisfies.
    pub hits: Vec<Vec<usize>>,
    pub gold_count: usize,
    /// Chunks in the whole index satisfying at least one gold item.
    pub relevant_total: usize,
}

impl RankedJudgement {
    pub fn is_relevant(&self, rank: usize) -> bool {
        self.hits.get(rank).is_some_and(|h| !h.is_empty())
    }
}

pub fn judge_ranking<P: Passage>(ranked: &[&P], gold: &[GoldItem], all: &[P]) -> RankedJudgement {
    let satisfied = |c: &P| -> Vec<usize> {
        gold.iter()
            .enumerate()
            .filter(|(_, g)| judge_relevance(c, g))
            .map(|(i, _)| i)
            .collect()
    };
    RankedJudgement {
        hits: ranked.iter().map(|c| satisfied(c)).collect(),
        gold_count: gold.len(),
        relevant_total: all.iter().filter(|c| gold.iter().any(|g| judge_relevance(*c, g))).count(),
    }
}

/// Share of gold items satisfied by some chunk in the top `k`. `None` when
/// there is no gold.
pub fn recall_at_k(j: &RankedJudgement, k: usize) -> Option<f64> {
    if j.gold_count == 0 {
        return None;
    }
    let mut found = vec![false; j.gold_count];
    for hits in j.hits.iter().take(k) {
        for &g in hits {
            found[g] = true;
        }
    }
    Some(found.iter().filter(|&&f| f).count() as f64 / j.gold_count as f64)
}

/// Relevant chunks in the top `k`, divided by `k` even when fewer came back.
pub fn precision_at_k(j: &RankedJudgement, k: usize) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    (0..k).filter(|&r| j.is_relevant(r)).count() as f64 / k as f64
}

pub fn mrr(j: &RankedJudgement) -> f64 {
    (0..j.hits.len())
        .find(|&r| j.is_relevant(r))
        .map_or(0.0, |r| 1.0 / (r + 1) as f64)
}

/// Binary-gain NDCG. The ideal ranking places `min(relevant_total, k)`
/// relevant chunks first.
pub fn ndcg_at_k(j: &RankedJudgement, k: usize) -> f64 {
    let discount = |r: usize| 1.0 / ((r + 2) as f64).log2();
    let dcg: f64 = (0..k).filter(|&r| j.is_relevant(r)).map(discount).sum();
    let ideal: f64 = (0..j.relevant_total.min(k)).map(discount).sum();
    if ideal == 0.0 {
        0.0
    } else {
        dcg / ideal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryMetrics {
    pub query_id: String,
    pub org: String,
    pub category: QueryCategory,
    pub recall: BTreeMap<usize, f64>,
    pub precision: BTreeMap<usize, f64>,
    pub ndcg: BTreeMap<usize, f64>,
    pub mrr: f64,
    pub retrieved: Vec<String>,
}

/// Metrics of one ranking at every cut-off.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffMetrics {
    pub recall: BTreeMap<usize, f64>,
    pub precision: BTreeMap<usize, f64>,
    pub ndcg: BTreeMap<usize, f64>,
    pub mrr: f64,
}

pub fn metrics_for(j: &RankedJudgement, ks: &[usize]) -> Option<CutoffMetrics> {
    let mut recall = BTreeMap::new();
    let mut precision = BTreeMap::new();
    let mut ndcg = BTreeMap::new();
    for &k in ks {
        recall.insert(k, recall_at_k(j, k)?);
        precision.insert(k, precision_at_k(j, k));
        ndcg.insert(k, ndcg_at_k(j, k));
    }
    Some(CutoffMetrics {
        recall,
        precision,
        ndcg,
        mrr: mrr(j),
    })
}

/// Retrieves the top `max(ks)` chunks for `query` and scores them. Queries
/// without gold items yield `None`.
pub fn evaluate_query(retriever: &dyn Retriever, query: &QueryRecord, ks: &[usize]) -> Option<QueryMetrics> {
    if query.gold.is_empty() {
        log::warn!("query {} has no gold items; excluded", query.query_id);
        return None;
    }
    let depth = ks.iter().copied().max().unwrap_or(1);
    let result = retriever.retrieve(&query.text, depth);
    let ranked: Vec<&IndexedChunk> = result.ids().filter_map(|id| retriever.chunk(id)).collect();
    let judgement = judge_ranking(&ranked, &query.gold, retriever.chunks());
    let CutoffMetrics {
        recall,
        precision,
        ndcg,
        mrr,
    } = metrics_for(&judgement, ks)?;
    Some(QueryMetrics {
        query_id: query.query_id.clone(),
        org: query.org.clone(),
        category: query.category,
        recall,
        precision,
        ndcg,
        mrr,
        retrieved: result.ids().map(str::to_string).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    Org,
    Category,
    Overall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub group: String,
    pub method: String,
    pub recall: BTreeMap<usize, f64>,
    pub precision: BTreeMap<usize, f64>,
    pub mrr: f64,
    pub ndcg: BTreeMap<usize, f64>,
    pub count: usize,
}

fn mean_row(group: String, method: &str, rows: &[&QueryMetrics]) -> MetricsRow {
    let n = rows.len() as f64;
    let avg = |pick: &dyn Fn(&QueryMetrics) -> &BTreeMap<usize, f64>| -> BTreeMap<usize, f64> {
        let mut out: BTreeMap<usize, f64> = BTreeMap::new();
        for r in rows {
            for (&k, &v) in pick(r) {
                *out.entry(k).or_default() += v;
            }
        }
        out.values_mut().for_each(|v| *v /= n);
        out
    };
    MetricsRow {
        group,
        method: method.to_string(),
        recall: avg(&|q| &q.recall),
        precision: avg(&|q| &q.precision),
        mrr: rows.iter().map(|q| q.mrr).sum::<f64>() / n,
        ndcg: avg(&|q| &q.ndcg),
        count: rows.len(),
    }
}

/// Unweighted means per group. Organizations sort by name, categories follow
/// their canonical order, and groups without queries are omitted.
pub fn aggregate(metrics: &[QueryMetrics], grouping: Grouping, method: &str) -> Vec<MetricsRow> {
    match grouping {
        Grouping::Overall if metrics.is_empty() => Vec::new(),
        Grouping::Overall => vec![mean_row("Overall".into(), method, &metrics.iter().collect::<Vec<_>>())],
        Grouping::Org => {
            let mut by: BTreeMap<&str, Vec<&QueryMetrics>> = BTreeMap::new();
            for m in metrics {
                by.entry(&m.org).or_default().push(m);
            }
            by.into_iter().map(|(g, rows)| mean_row(g.to_string(), method, &rows)).collect()
        }
        Grouping::Category => {
            let mut by: BTreeMap<QueryCategory, Vec<&QueryMetrics>> = BTreeMap::new();
            for m in metrics {
                by.entry(m.category).or_default().push(m);
            }
            by.into_iter().map(|(g, rows)| mean_row(g.to_string(), method, &rows)).collect()
        }
    }
}
