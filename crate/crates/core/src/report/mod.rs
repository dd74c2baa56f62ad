//! Cleaning statistics: per-kind before/after counts, ratios, contributions,
//! correlation, and table rendering.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::detectors::SmellKind;

/// Per-kind accounting row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KindRow {
    pub before: u64,
    pub after: u64,
    pub refactored: u64,
    pub skipped: u64,
    pub failed: u64,
    pub introduced: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tests_total: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tests_passed: Option<u64>,
}

/// Snapshot of the configuration a run used; echoed into every report header.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub cc_threshold: u32,
    pub max_params: u32,
    pub naming_regex_function: String,
    pub naming_regex_variable: String,
    pub commented_code_min_score: u32,
    pub backend: String,
    pub prompt_config: String,
    pub isolation_mode: String,
    #[serde(default)]
    pub extra: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CleaningStats {
    pub rows: BTreeMap<SmellKind, KindRow>,
    pub config: ConfigSnapshot,
    /// Records processed / skipped as malformed / unparseable code.
    pub records_total: u64,
    pub records_skipped: u64,
    pub records_unprocessable: u64,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StatsError {
    #[error("accounting broken for {kind}: before={before} != refactored={refactored} + skipped={skipped} + failed={failed}")]
    OutcomePartition {
        kind: SmellKind,
        before: u64,
        refactored: u64,
        skipped: u64,
        failed: u64,
    },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
}

impl CleaningStats {
    pub fn row_mut(&mut self, kind: SmellKind) -> &mut KindRow {
        self.rows.entry(kind).or_default()
    }

    pub fn row(&self, kind: SmellKind) -> KindRow {
        self.rows.get(&kind).cloned().unwrap_or_default()
    }

    pub fn totals(&self) -> KindRow {
        let mut total = KindRow::default();
        for row in self.rows.values() {
            total.before += row.before;
            total.after += row.after;
            total.refactored += row.refactored;
            total.skipped += row.skipped;
            total.failed += row.failed;
            total.introduced += row.introduced;
            if let Some(t) = row.tests_total {
                *total.tests_total.get_or_insert(0) += t;
            }
            if let Some(p) = row.tests_passed {
                *total.tests_passed.get_or_insert(0) += p;
            }
        }
        total
    }

    /// Every before-finding must have exactly one outcome.
    pub fn validate(&self) -> Result<(), StatsError> {
        for (kind, row) in &self.rows {
            if row.before != row.refactored + row.skipped + row.failed {
                return Err(StatsError::OutcomePartition {
                    kind: *kind,
                    before: row.before,
                    refactored: row.refactored,
                    skipped: row.skipped,
                    failed: row.failed,
                });
            }
        }
        Ok(())
    }
}

/// `100 * (before - after) / before`, one decimal; `None` when `before == 0`.
/// Negative values (net smells introduced) are legal and flagged at render.
pub fn cleaning_ratio(before: u64, after: u64) -> Option<f64> {
    if before == 0 {
        return None;
    }
    let raw = 100.0 * (before as f64 - after as f64) / before as f64;
    Some(round_to(raw, 1))
}

/// `100 * kind_count / total_count`, two decimals; `None` when `total == 0`.
pub fn contribution(kind_count: u64, total_count: u64) -> Option<f64> {
    if total_count == 0 {
        return None;
    }
    let raw = 100.0 * kind_count as f64 / total_count as f64;
    Some(round_to(raw, 2))
}

fn round_to(value: f64, decimals: u32) -> f64 {
    let factor = 10f64.powi(decimals as i32);
    (value * factor).round() / factor
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::Degenerate("length mismatch"));
    }
    if xs.len() < 2 {
        return Err(StatsError::Degenerate("need at least two points"));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(StatsError::Degenerate("zero variance"));
    }
    Ok(cov / (var_x.sqrt() * var_y.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format: {other}")),
        }
    }
}

const CONTRIBUTION_FOOTNOTE: &str = "Contribution percentages are computed from the raw counts \
in this table as 100*refactored_kind/refactored_total (e.g. 11579/15994 = 72.40). Figures \
published elsewhere for the same raw counts (74.37, or 74.39 in prose) rest on an unstated \
denominator; this report never substitutes them for the computed values.";

/// Renders the stats. Markdown follows the familiar table layout
/// (Type | #Before | #After | Cleaning(%) plus testing columns when present);
/// json and csv carry full precision and round-trip losslessly.
pub fn render(stats: &CleaningStats, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(stats).expect("stats serialize") + "\n"
        }
        ReportFormat::Csv => render_csv(stats),
        ReportFormat::Markdown => render_markdown(stats),
    }
}

/// Parses a json rendering back into stats (round-trip counterpart).
pub fn parse_json(text: &str) -> Result<CleaningStats, serde_json::Error> {
    serde_json::from_str(text)
}

fn ratio_cell(before: u64, after: u64) -> String {
    match cleaning_ratio(before, after) {
        None => "n/a".to_string(),
        Some(r) if r < 0.0 => format!("{r:.1} (introduced)"),
        Some(r) => format!("{r:.1}"),
    }
}

fn render_csv(stats: &CleaningStats) -> String {
    let mut out = String::new();
    out.push_str("kind,before,after,refactored,skipped,failed,introduced,tests_total,tests_passed\n");
    for kind in SmellKind::ALL {
        let row = stats.row(kind);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            kind.as_str(),
            row.before,
            row.after,
            row.refactored,
            row.skipped,
            row.failed,
            row.introduced,
            row.tests_total.map(|v| v.to_string()).unwrap_or_default(),
            row.tests_passed.map(|v| v.to_string()).unwrap_or_default(),
        ));
    }
    let total = stats.totals();
    out.push_str(&format!(
        "All,{},{},{},{},{},{},{},{}\n",
        total.before,
        total.after,
        total.refactored,
        total.skipped,
        total.failed,
        total.introduced,
        total.tests_total.map(|v| v.to_string()).unwrap_or_default(),
        total.tests_passed.map(|v| v.to_string()).unwrap_or_default(),
    ));
    out
}

/// Parses the csv rendering back (numeric fields only; round-trip check).
pub fn parse_csv(text: &str) -> Result<CleaningStats, String> {
    let mut stats = CleaningStats::default();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() || line.starts_with("All,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(format!("line {}: expected 9 fields", i + 1));
        }
        let kind: SmellKind = fields[0].parse()?;
        let parse_u64 = |s: &str| -> Result<u64, String> {
            s.parse().map_err(|e| format!("line {}: {e}", i + 1))
        };
        let row = KindRow {
            before: parse_u64(fields[1])?,
            after: parse_u64(fields[2])?,
            refactored: parse_u64(fields[3])?,
            skipped: parse_u64(fields[4])?,
            failed: parse_u64(fields[5])?,
            introduced: parse_u64(fields[6])?,
            tests_total: if fields[7].is_empty() {
                None
            } else {
                Some(parse_u64(fields[7])?)
            },
            tests_passed: if fields[8].is_empty() {
                None
            } else {
                Some(parse_u64(fields[8])?)
            },
        };
        stats.rows.insert(kind, row);
    }
    Ok(stats)
}

fn render_markdown(stats: &CleaningStats) -> String {
    let mut out = String::new();
    let cfg = &stats.config;
    out.push_str("## Cleaning report\n\n");
    out.push_str("Configuration:\n\n");
    out.push_str(&format!(
        "- cc_threshold: {}\n- max_params: {}\n- naming_regex_function: `{}`\n- naming_regex_variable: `{}`\n- commented_code_min_score: {}\n- backend: {}\n- prompt_config: {}\n- isolation_mode: {}\n",
        cfg.cc_threshold,
        cfg.max_params,
        cfg.naming_regex_function,
        cfg.naming_regex_variable,
        cfg.commented_code_min_score,
        cfg.backend,
        cfg.prompt_config,
        cfg.isolation_mode,
    ));
    for (key, value) in &cfg.extra {
        out.push_str(&format!("- {key}: {value}\n"));
    }
    if stats.records_total > 0 || stats.records_skipped > 0 {
        out.push_str(&format!(
            "- records: {} processed, {} malformed lines skipped, {} unparseable\n",
            stats.records_total, stats.records_skipped, stats.records_unprocessable
        ));
    }
    out.push('\n');

    let has_tests = stats.rows.values().any(|r| r.tests_total.is_some());
    if has_tests {
        out.push_str("| Type | #Before | #After | Cleaning(%) | Contribution(%) | #Tests | #Passed | Accuracy(%) |\n");
        out.push_str("| --- | ---: | ---: | ---: | ---: | ---: | ---: | ---: |\n");
    } else {
        out.push_str("| Type | #Before | #After | Cleaning(%) | Contribution(%) |\n");
        out.push_str("| --- | ---: | ---: | ---: | ---: |\n");
    }

    let total = stats.totals();
    let mut render_row = |label: &str, row: &KindRow| {
        let contrib = contribution(row.refactored, total.refactored)
            .map(|c| format!("{c:.2}"))
            .unwrap_or_else(|| "n/a".to_string());
        if has_tests {
            let accuracy = match (row.tests_total, row.tests_passed) {
                (Some(t), Some(p)) if t > 0 => format!("{:.1}", round_to(100.0 * p as f64 / t as f64, 1)),
                _ => "n/a".to_string(),
            };
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} | {} |\n",
                label,
                row.before,
                row.after,
                ratio_cell(row.before, row.after),
                contrib,
                row.tests_total.map(|v| v.to_string()).unwrap_or_default(),
                row.tests_passed.map(|v| v.to_string()).unwrap_or_default(),
                accuracy,
            ));
        } else {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                label,
                row.before,
                row.after,
                ratio_cell(row.before, row.after),
                contrib,
            ));
        }
    };

    for kind in SmellKind::ALL {
        let row = stats.row(kind);
        render_row(kind.label(), &row);
    }
    render_row("All", &total);

    out.push('\n');
    out.push_str(&format!("> {CONTRIBUTION_FOOTNOTE}\n"));
    if stats
        .rows
        .values()
        .any(|r| r.before > 0 && r.after > r.before)
    {
        out.push_str("> Warning: at least one kind ends with more findings than it started with (net smells introduced).\n");
    }
    out
}
