use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Model usage for one file under one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageRow {
    pub org: String,
    pub method: String,
    pub file: String,
    /// Source length in characters.
    pub chars: u64,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub cached_tokens: u64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UsageLedger {
    pub rows: Vec<UsageRow>,
}

impl UsageLedger {
    pub fn push(&mut self, row: UsageRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: UsageLedger) {
        self.rows.extend(other.rows);
    }

    /// Methods in first-seen order.
    pub fn methods(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.method) {
                out.push(r.method.clone());
            }
        }
        out
    }

    pub fn totals(&self, method: &str) -> UsageTotals {
        UsageTotals::of(self.rows.iter().filter(|r| r.method == method))
    }

    /// Totals per (org, method), orgs sorted by name.
    pub fn by_org(&self) -> Vec<(String, String, UsageTotals)> {
        let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for r in &self.rows {
            let methods = groups.entry(&r.org).or_default();
            if !methods.contains(&r.method.as_str()) {
                methods.push(&r.method);
            }
        }
        groups
            .into_iter()
            .flat_map(|(org, methods)| {
                methods.into_iter().map(move |m| {
                    let totals = UsageTotals::of(self.rows.iter().filter(|r| r.org == org && r.method == m));
                    (org.to_string(), m.to_string(), totals)
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UsageTotals {
    pub files: usize,
    pub chars: u64,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub cached_tokens: u64,
    pub wall_seconds: f64,
    pub p90_seconds: f64,
    pub p95_seconds: f64,
}

impl UsageTotals {
    fn of<'a>(rows: impl Iterator<Item = &'a UsageRow>) -> UsageTotals {
        let mut t = UsageTotals::default();
        let mut times = Vec::new();
        for r in rows {
            t.files += 1;
            t.chars += r.chars;
            t.input_tokens += r.input_tokens;
            t.output_tokens += r.output_tokens;
            t.cached_tokens += r.cached_tokens;
            t.wall_seconds += r.wall_seconds;
            times.push(r.wall_seconds);
        }
        t.p90_seconds = percentile(&mut times, 90.0);
        t.p95_seconds = percentile(&mut times, 95.0);
        t
    }

    fn per_file(&self, total: f64) -> f64 {
        if self.files == 0 {
            0.0
        } else {
            total / self.files as f64
        }
    }

    pub fn avg_input(&self) -> f64 {
        self.per_file(self.input_tokens as f64)
    }

    pub fn avg_output(&self) -> f64 {
        self.per_file(self.output_tokens as f64)
    }

    pub fn avg_seconds(&self) -> f64 {
        self.per_file(self.wall_seconds)
    }
}

/// Linear interpolation between closest ranks; 0 for no samples.
pub fn percentile(values: &mut [f64], p: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let pos = (p / 100.0) * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    values[lo] + (values[hi] - values[lo]) * (pos - lo as f64)
}

/// Prices per token.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub price_input: f64,
    pub price_output: f64,
    pub price_cache: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            price_input: 0.000002,
            price_output: 0.000008,
            price_cache: 0.0000005,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<(), String> {
        let prices = [self.price_input, self.price_output, self.price_cache];
        if prices.iter().all(|p| p.is_finite() && *p >= 0.0) {
            Ok(())
        } else {
            Err(format!("prices must be non-negative: {self:?}"))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodCost {
    pub input: f64,
    pub cache: f64,
    pub output: f64,
}

impl MethodCost {
    pub fn total(&self) -> f64 {
        self.input + self.cache + self.output
    }

    /// Each component rounded to whole cents, as reports show them.
    pub fn in_cents(&self) -> MethodCost {
        MethodCost {
            input: round_cents(self.input),
            cache: round_cents(self.cache),
            output: round_cents(self.output),
        }
    }
}

pub fn round_cents(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub model: CostModel,
    /// Per method, in ledger order.
    pub methods: Vec<(String, MethodCost)>,
}

impl CostReport {
    pub fn get(&self, method: &str) -> Option<MethodCost> {
        self.methods.iter().find(|(m, _)| m == method).map(|(_, c)| *c)
    }

    /// Relative change of each component between two methods, computed on
    /// cent-rounded amounts: (input, cache, output, total).
    pub fn relative(&self, before: &str, after: &str) -> Option<[Option<f64>; 4]> {
        let a = self.get(before)?.in_cents();
        let b = self.get(after)?.in_cents();
        Some([
            relative_change(a.input, b.input),
            relative_change(a.cache, b.cache),
            relative_change(a.output, b.output),
            relative_change(round_cents(a.total()), round_cents(b.total())),
        ])
    }
}

pub fn compute_cost(ledger: &UsageLedger, model: &CostModel) -> CostReport {
    let methods = ledger
        .methods()
        .into_iter()
        .map(|m| {
            let t = ledger.totals(&m);
            let cost = MethodCost {
                input: t.input_tokens as f64 * model.price_input,
                cache: t.cached_tokens as f64 * model.price_cache,
                output: t.output_tokens as f64 * model.price_output,
            };
            (m, cost)
        })
        .collect();
    CostReport { model: *model, methods }
}

/// Percentage change from `before` to `after`; `None` when `before` is 0.
pub fn relative_change(before: f64, after: f64) -> Option<f64> {
    if before == 0.0 {
        if after == 0.0 {
            Some(0.0)
        } else {
            None
        }
    } else {
        Some((after - before) / before * 100.0)
    }
}

/// `+50.13%`, `-84.64%`, `0.00%`, or `n/a`.
pub fn format_change(change: Option<f64>) -> String {
    match change {
        None => "n/a".to_string(),
        Some(c) => {
            let s = format!("{c:.2}");
            if s == "0.00" || s == "-0.00" {
                "0.00%".to_string()
            } else if c > 0.0 {
                format!("+{s}%")
            } else {
                format!("{s}%")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, input: u64, output: u64, secs: f64) -> UsageRow {
        UsageRow {
            org: "o".into(),
            method: method.into(),
            file: "f".into(),
            chars: 10,
            input_tokens: input,
            output_tokens: output,
            cached_tokens: 0,
            wall_seconds: secs,
        }
    }

    #[test]
    fn output_costs() {
        let ledger = UsageLedger {
            rows: vec![row("agentic", 0, 343_891, 0.0), row("wrac", 0, 52_816, 0.0)],
        };
        let report = compute_cost(&ledger, &CostModel::default());
        assert!((report.get("agentic").unwrap().output - 2.75).abs() < 0.005);
        assert!((report.get("wrac").unwrap().output - 0.42).abs() < 0.005);
        let change = report.relative("agentic", "wrac").unwrap()[2].unwrap();
        assert!((change - -84.72).abs() < 0.05, "{change}");
    }

    #[test]
    fn empty_ledger_costs_nothing() {
        let report = compute_cost(&UsageLedger::default(), &CostModel::default());
        assert!(report.methods.is_empty());
        assert_eq!(UsageLedger::default().totals("x"), UsageTotals::default());
    }

    #[test]
    fn changes() {
        assert_eq!(format_change(relative_change(343_891.0, 52_816.0)), "-84.64%");
        assert_eq!(format_change(relative_change(573_954.0, 861_691.0)), "+50.13%");
        assert_eq!(format_change(relative_change(7.0, 7.0)), "0.00%");
        assert_eq!(format_change(relative_change(0.0, 1.0)), "n/a");
    }

    #[test]
    fn percentiles() {
        let mut v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert!((percentile(&mut v, 90.0) - 9.1).abs() < 1e-12);
        assert_eq!(percentile(&mut [4.0], 95.0), 4.0);
        assert_eq!(percentile(&mut [], 95.0), 0.0);
    }

    #[test]
    fn org_totals() {
        let mut ledger = UsageLedger::default();
        ledger.push(row("a", 1, 2, 1.0));
        ledger.push(row("a", 3, 4, 3.0));
        ledger.push(row("b", 5, 6, 2.0));
        let by = ledger.by_org();
        assert_eq!(by.len(), 2);
        assert_eq!(by[0].2.input_tokens, 4);
        assert_eq!(by[0].2.avg_seconds(), 2.0);
        assert_eq!(ledger.methods(), ["a", "b"]);
    }
}
