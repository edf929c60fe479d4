use std::fmt::Write as _;

use super::metrics::MetricsRow;
use super::usage::{format_change, relative_change, round_cents, CostReport, UsageLedger};

/// Plain-text table. The first `label_cols` columns are left-aligned, the
/// rest right-aligned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub label_cols: usize,
}

impl TextTable {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>, label_cols: usize) -> Self {
        TextTable {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            label_cols,
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| {
                self.rows
                    .iter()
                    .filter_map(|r| r.get(c))
                    .chain(std::iter::once(&self.headers[c]))
                    .map(|s| s.chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| -> String {
            let mut out = String::new();
            for (c, w) in widths.iter().enumerate() {
                let cell = cells.get(c).map_or("", String::as_str);
                if c > 0 {
                    out.push_str("  ");
                }
                if c < self.label_cols {
                    let _ = write!(out, "{cell:<w$}");
                } else {
                    let _ = write!(out, "{cell:>w$}");
                }
            }
            out.trim_end().to_string()
        };
        let rule = "-".repeat(widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1));
        let mut out = String::new();
        out.push_str(&line(&self.headers));
        out.push('\n');
        out.push_str(&rule);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

/// `1234567` as `1,234,567`.
pub fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// Two decimals with thousands separators.
pub fn decimal(x: f64) -> String {
    let s = format!("{:.2}", x.abs());
    let (int, frac) = s.split_once('.').unwrap_or((&s, "00"));
    let sign = if x < 0.0 && s != "0.00" { "-" } else { "" };
    format!("{sign}{}.{frac}", thousands(int.parse().unwrap_or(0)))
}

pub fn usage_by_org_table(ledger: &UsageLedger) -> TextTable {
    let mut t = TextTable::new(
        [
            "Organization",
            "Method",
            "Total Length",
            "Input Tokens",
            "Output Tokens",
            "Time (s)",
            "Total Files",
            "Avg Input Tokens",
            "Avg Output Tokens",
            "Avg Time (s)",
            "P90 Time (s)",
            "P95 Time (s)",
        ],
        2,
    );
    for (org, method, u) in ledger.by_org() {
        t.row(vec![
            org,
            method,
            thousands(u.chars),
            thousands(u.input_tokens),
            thousands(u.output_tokens),
            decimal(u.wall_seconds),
            u.files.to_string(),
            decimal(u.avg_input()),
            decimal(u.avg_output()),
            decimal(u.avg_seconds()),
            decimal(u.p90_seconds),
            decimal(u.p95_seconds),
        ]);
    }
    t
}

pub fn efficiency_summary_table(ledger: &UsageLedger, before: &str, after: &str) -> TextTable {
    let a = ledger.totals(before);
    let b = ledger.totals(after);
    let mut t = TextTable::new(["Metric", before, after, "Relative Change"], 1);
    let mut add = |name: &str, x: f64, y: f64, whole: bool| {
        let fmt = |v: f64| if whole { thousands(v as u64) } else { decimal(v) };
        t.row(vec![name.to_string(), fmt(x), fmt(y), format_change(relative_change(x, y))]);
    };
    add("Total Input Tokens", a.input_tokens as f64, b.input_tokens as f64, true);
    add("Total Output Tokens", a.output_tokens as f64, b.output_tokens as f64, true);
    add("Average Input Tokens per File", a.avg_input(), b.avg_input(), false);
    add("Average Output Tokens per File", a.avg_output(), b.avg_output(), false);
    add("Total Processing Time (s)", a.wall_seconds, b.wall_seconds, false);
    add("Average Time per File (s)", a.avg_seconds(), b.avg_seconds(), false);
    add("P90 Time (s)", a.p90_seconds, b.p90_seconds, false);
    add("P95 Time (s)", a.p95_seconds, b.p95_seconds, false);
    t
}

pub fn cost_table(report: &CostReport, before: &str, after: &str) -> TextTable {
    let mut t = TextTable::new(
        [
            "Component".to_string(),
            "Pricing ($/token)".to_string(),
            format!("{before} Cost ($)"),
            format!("{after} Cost ($)"),
            "Relative Change".to_string(),
        ],
        1,
    );
    let a = report.get(before).unwrap_or_default().in_cents();
    let b = report.get(after).unwrap_or_default().in_cents();
    let changes = report.relative(before, after).unwrap_or([None; 4]);
    let m = report.model;
    let rows = [
        ("Input Tokens", m.price_input, a.input, b.input),
        ("Cache Tokens", m.price_cache, a.cache, b.cache),
        ("Output Tokens", m.price_output, a.output, b.output),
    ];
    for (i, (name, price, x, y)) in rows.into_iter().enumerate() {
        t.row(vec![
            name.to_string(),
            format!("{price}"),
            decimal(x),
            decimal(y),
            format_change(changes[i]),
        ]);
    }
    t.row(vec![
        "Total Cost".to_string(),
        "--".to_string(),
        decimal(round_cents(a.total())),
        decimal(round_cents(b.total())),
        format_change(changes[3]),
    ]);
    t
}

/// Reductions from `before` to `after` as positive percentages.
pub fn improvements_table(ledger: &UsageLedger, report: &CostReport, before: &str, after: &str) -> TextTable {
    let a = ledger.totals(before);
    let b = ledger.totals(after);
    let reduction = |c: Option<f64>| c.map(|v| format!("{:.2}%", -v)).unwrap_or_else(|| "n/a".into());
    let cost = report.relative(before, after).and_then(|c| c[3]);
    let mut t = TextTable::new(["Metric", "Reduction"], 1);
    t.row(vec![
        "Time Reduction".into(),
        reduction(relative_change(a.wall_seconds, b.wall_seconds)),
    ]);
    t.row(vec![
        "Output Tokens Reduction".into(),
        reduction(relative_change(a.output_tokens as f64, b.output_tokens as f64)),
    ]);
    t.row(vec!["Cost Reduction".into(), reduction(cost)]);
    t
}

/// Retrieval metrics laid out with larger cut-offs first. `group_label` is
/// `None` for the overall table, which has no grouping column.
pub fn metrics_table(rows: &[MetricsRow], group_label: Option<&str>, ks: &[usize]) -> TextTable {
    let mut ks: Vec<usize> = ks.to_vec();
    ks.sort_unstable_by(|a, b| b.cmp(a));
    ks.dedup();
    let mut headers: Vec<String> = group_label.into_iter().map(str::to_string).collect();
    headers.push("Method".into());
    headers.extend(ks.iter().map(|k| format!("Avg Recall@{k}")));
    headers.extend(ks.iter().map(|k| format!("Avg Precision@{k}")));
    headers.push("Avg MRR".into());
    headers.extend(ks.iter().map(|k| format!("Avg NDCG@{k}")));
    headers.push("Count".into());
    let label_cols = if group_label.is_some() { 2 } else { 1 };
    let mut t = TextTable::new(headers, label_cols);
    let num = |v: Option<&f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
    for r in rows {
        let mut cells: Vec<String> = Vec::new();
        if group_label.is_some() {
            cells.push(r.group.clone());
        }
        cells.push(r.method.clone());
        cells.extend(ks.iter().map(|k| num(r.recall.get(k))));
        cells.extend(ks.iter().map(|k| num(r.precision.get(k))));
        cells.push(num(Some(&r.mrr)));
        cells.extend(ks.iter().map(|k| num(r.ndcg.get(k))));
        cells.push(r.count.to_string());
        t.row(cells);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::usage::{compute_cost, CostModel, UsageRow};

    #[test]
    fn number_formats() {
        assert_eq!(thousands(0), "0");
        assert_eq!(thousands(573_954), "573,954");
        assert_eq!(thousands(1_062_085), "1,062,085");
        assert_eq!(decimal(2447.925), "2,447.93");
        assert_eq!(decimal(-0.001), "0.00");
    }

    fn ledger() -> UsageLedger {
        let row = |method: &str, i, o, s| UsageRow {
            org: "all".into(),
            method: String::from(method),
            file: "total".into(),
            chars: 1_062_085,
            input_tokens: i,
            output_tokens: o,
            cached_tokens: 0,
            wall_seconds: s,
        };
        UsageLedger {
            rows: vec![
                row("Agentic Chunking", 573_954, 343_891, 2167.52),
                row("W-RAC", 861_691, 52_816, 875.42),
            ],
        }
    }

    #[test]
    fn summary_layout() {
        let text = efficiency_summary_table(&ledger(), "Agentic Chunking", "W-RAC").render();
        assert!(text.contains("Total Input Tokens"));
        assert!(text.contains("+50.13%"));
        assert!(text.contains("-84.64%"));
        assert!(text.contains("-59.61%"));
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].chars().all(|c| c == '-'));
    }

    #[test]
    fn cost_layout() {
        let l = ledger();
        let report = compute_cost(&l, &CostModel::default());
        let text = cost_table(&report, "Agentic Chunking", "W-RAC").render();
        assert!(text.contains("2.75"));
        assert!(text.contains("0.42"));
        assert!(text.contains("-84.73%"));
        let imp = improvements_table(&l, &report, "Agentic Chunking", "W-RAC").render();
        assert!(imp.contains("59.61%"));
        assert!(imp.contains("84.64%"));
    }

    #[test]
    fn metric_headers() {
        let t = metrics_table(&[], Some("Organization"), &[3, 6]);
        assert_eq!(t.headers[2], "Avg Recall@6");
        assert_eq!(t.headers[3], "Avg Recall@3");
        assert_eq!(t.headers.last().unwrap(), "Count");
        assert_eq!(metrics_table(&[], None, &[3, 6]).headers[0], "Method");
    }
}
