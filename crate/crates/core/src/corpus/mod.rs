//! Corpus ingestion and the detect → clean → re-detect pipeline.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::detectors::{Finding, FindingRecord, Scanner, SmellKind};
use crate::pysource::SourceUnit;
use crate::refactor::{clean_finding, BackendKind, Cleaner, RefactorStatus};
use crate::report::{CleaningStats, KindRow};
use crate::span::Span;

/// One ⟨comment, code⟩ corpus record. The raw JSON object is retained so the
/// cleaned output preserves every input field.
#[derive(Debug, Clone)]
pub struct CorpusRecord {
    pub repo: String,
    pub path: String,
    pub func_name: String,
    pub code: String,
    pub docstring: String,
    pub partition: Option<String>,
    pub raw: Value,
    pub line_no: usize,
}

impl CorpusRecord {
    pub fn id(&self) -> String {
        if self.repo.is_empty() && self.path.is_empty() && self.func_name.is_empty() {
            format!("line:{}", self.line_no)
        } else {
            format!("{}::{}::{}", self.repo, self.path, self.func_name)
        }
    }

    fn from_value(raw: Value, line_no: usize) -> Option<CorpusRecord> {
        let obj = raw.as_object()?;
        let get = |keys: &[&str]| -> String {
            keys.iter()
                .filter_map(|k| obj.get(*k))
                .filter_map(Value::as_str)
                .next()
                .unwrap_or_default()
                .to_string()
        };
        // `original_string` is the usual alias for the code field.
        let code = get(&["code", "original_string"]);
        if code.is_empty() {
            return None;
        }
        Some(CorpusRecord {
            repo: get(&["repo", "repository"]),
            path: get(&["path", "file_path"]),
            func_name: get(&["func_name", "function_name", "name"]),
            docstring: get(&["docstring", "comment"]),
            partition: obj
                .get("partition")
                .and_then(Value::as_str)
                .map(String::from),
            code,
            raw,
            line_no,
        })
    }

    /// The raw object with `code` (or its alias) replaced.
    fn with_code(&self, new_code: &str) -> Value {
        let mut raw = self.raw.clone();
        if let Some(obj) = raw.as_object_mut() {
            let key = if obj.contains_key("code") {
                "code"
            } else {
                "original_string"
            };
            obj.insert(key.to_string(), Value::String(new_code.to_string()));
        }
        raw
    }
}

/// Lazily yields records from a JSON-lines file; malformed lines are counted
/// and skipped, never aborting the stream.
pub struct CorpusReader {
    lines: std::io::Lines<BufReader<std::fs::File>>,
    line_no: usize,
    pub skipped: usize,
}

impl CorpusReader {
    pub fn open(path: &Path) -> std::io::Result<CorpusReader> {
        Ok(CorpusReader {
            lines: BufReader::new(std::fs::File::open(path)?).lines(),
            line_no: 0,
            skipped: 0,
        })
    }
}

impl Iterator for CorpusReader {
    type Item = CorpusRecord;

    fn next(&mut self) -> Option<CorpusRecord> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(_) => {
                    self.skipped += 1;
                    continue;
                }
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Value>(&line)
                .ok()
                .and_then(|v| CorpusRecord::from_value(v, self.line_no))
            {
                Some(record) => return Some(record),
                None => {
                    eprintln!("warning: skipping malformed corpus line {}", self.line_no);
                    self.skipped += 1;
                }
            }
        }
    }
}

pub fn load_corpus(path: &Path) -> std::io::Result<CorpusReader> {
    CorpusReader::open(path)
}

/// One outcome in a pipeline result, serialized alongside its finding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub kind: SmellKind,
    pub status: RefactorStatus,
    pub backend: BackendKind,
    pub start_line: usize,
    pub diagnostics: String,
}

/// Result of cleaning one record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineResult {
    pub id: String,
    pub findings_before: Vec<FindingRecord>,
    pub outcomes: Vec<OutcomeRecord>,
    pub findings_after: Vec<FindingRecord>,
    pub introduced: Vec<FindingRecord>,
    pub cleaned_code: String,
    pub unprocessable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Cleans one source text: findings are attempted one by one, later spans
/// first so earlier offsets stay valid; failed attempts leave their region
/// untouched; smell-free inputs pass through byte-identical.
pub fn process_text(
    id: &str,
    code: &str,
    scanner: &Scanner,
    cleaner: &Cleaner<'_>,
) -> PipelineResult {
    let unit = match SourceUnit::parse_str(code.to_string()) {
        Ok(u) => u,
        Err(e) => {
            return PipelineResult {
                id: id.to_string(),
                findings_before: Vec::new(),
                outcomes: Vec::new(),
                findings_after: Vec::new(),
                introduced: Vec::new(),
                cleaned_code: code.to_string(),
                unprocessable: true,
                error: Some(e.to_string()),
            }
        }
    };

    let before = scanner.scan(&unit);
    let before_records: Vec<FindingRecord> = before.iter().map(|f| f.to_record(&unit)).collect();

    // Later spans first; at equal starts the metric kinds go before a rename
    // of the same token so their spans stay meaningful.
    let mut order: Vec<usize> = (0..before.len()).collect();
    order.sort_by_key(|&i| {
        let f = &before[i];
        let priority = match f.kind {
            SmellKind::HighCognitiveComplexity => 0,
            SmellKind::LongParameterList => 1,
            SmellKind::NamingConvention => 3,
            _ => 2,
        };
        (
            std::cmp::Reverse(f.span.start),
            std::cmp::Reverse(f.span.end),
            priority,
        )
    });

    let mut current = unit.clone();
    let mut pending: Vec<Option<Span>> = before.iter().map(|f| Some(f.span)).collect();
    let mut outcomes_by_index: Vec<Option<OutcomeRecord>> = vec![None; before.len()];
    let mut residual_keys: Vec<ResidualKey> = Vec::new();

    for &idx in &order {
        let original = &before[idx];
        let located = match pending[idx] {
            Some(span) => Some(Finding {
                span,
                ..original.clone()
            }),
            None => relocate(&current, scanner, &unit, original),
        };

        let outcome_record;
        match located {
            None => {
                // An earlier edit already eliminated this finding.
                outcome_record = OutcomeRecord {
                    kind: original.kind,
                    status: RefactorStatus::Refactored,
                    backend: cleaner.kind(),
                    start_line: unit.lines().position(original.span.start).line,
                    diagnostics: "resolved by an earlier edit in the same region".to_string(),
                };
            }
            Some(finding) => {
                let outcome = clean_finding(&current, &finding, cleaner, scanner);
                let status = outcome.status;
                outcome_record = OutcomeRecord {
                    kind: original.kind,
                    status,
                    backend: outcome.backend,
                    start_line: unit.lines().position(original.span.start).line,
                    diagnostics: outcome.diagnostics.clone(),
                };
                if status == RefactorStatus::Refactored {
                    let region = outcome.region.expect("refactored outcome has region");
                    let new_len = outcome.new_text.as_ref().map(String::len).unwrap_or(0);
                    match outcome.apply_to(&current) {
                        Ok(next) => {
                            current = next;
                            for slot in pending.iter_mut() {
                                *slot = slot.and_then(|s| adjust_span(s, region, new_len));
                            }
                        }
                        Err(e) => {
                            outcomes_by_index[idx] = Some(OutcomeRecord {
                                status: RefactorStatus::Failed,
                                diagnostics: format!("apply failed: {e}"),
                                ..outcome_record.clone()
                            });
                            residual_keys.push(ResidualKey::of(&unit, original));
                            continue;
                        }
                    }
                } else {
                    residual_keys.push(ResidualKey::of(&unit, original));
                }
            }
        }
        outcomes_by_index[idx] = Some(outcome_record);
    }

    let after = scanner.scan(&current);
    let after_records: Vec<FindingRecord> = after.iter().map(|f| f.to_record(&current)).collect();

    // Introduced findings: those not matching a residual (failed or skipped)
    // before-finding by kind, token, and function.
    let mut unmatched = residual_keys;
    let mut introduced = Vec::new();
    for finding in &after {
        let key = ResidualKey::of(&current, finding);
        if let Some(pos) = unmatched.iter().position(|k| *k == key) {
            unmatched.remove(pos);
        } else {
            introduced.push(finding.to_record(&current));
        }
    }

    PipelineResult {
        id: id.to_string(),
        findings_before: before_records,
        outcomes: outcomes_by_index.into_iter().flatten().collect(),
        findings_after: after_records,
        introduced,
        cleaned_code: current.text().to_string(),
        unprocessable: false,
        error: None,
    }
}

pub fn process_record(
    record: &CorpusRecord,
    scanner: &Scanner,
    cleaner: &Cleaner<'_>,
) -> PipelineResult {
    process_text(&record.id(), &record.code, scanner, cleaner)
}

/// Identity of a finding for residual matching across the edit.
#[derive(Debug, Clone, PartialEq)]
struct ResidualKey {
    kind: SmellKind,
    function: Option<String>,
    token: String,
}

impl ResidualKey {
    fn of(unit: &SourceUnit, finding: &Finding) -> ResidualKey {
        let token = if finding.kind == SmellKind::NamingConvention {
            unit.slice(finding.span).to_string()
        } else {
            String::new()
        };
        ResidualKey {
            kind: finding.kind,
            function: finding.function.clone(),
            token,
        }
    }
}

/// Shifts a span across one region replacement; `None` when the span itself
/// was rewritten.
fn adjust_span(span: Span, region: Span, new_len: usize) -> Option<Span> {
    let delta = new_len as isize - region.len() as isize;
    if region.end <= span.start {
        Some(Span::new(
            (span.start as isize + delta) as usize,
            (span.end as isize + delta) as usize,
        ))
    } else if span.contains(region) {
        Some(Span::new(span.start, (span.end as isize + delta) as usize))
    } else if span.end <= region.start {
        Some(span)
    } else {
        None
    }
}

/// Finds the current incarnation of a stale finding: same kind, same token
/// for naming findings, same enclosing function otherwise.
fn relocate(
    current: &SourceUnit,
    scanner: &Scanner,
    original_unit: &SourceUnit,
    original: &Finding,
) -> Option<Finding> {
    let key = ResidualKey::of(original_unit, original);
    scanner
        .scan(current)
        .into_iter()
        .find(|f| ResidualKey::of(current, f) == key)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub results_path: Option<PathBuf>,
    pub journal_path: Option<PathBuf>,
    pub jobs: usize,
    pub max_records: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            results_path: None,
            journal_path: None,
            jobs: 1,
            max_records: None,
        }
    }
}

#[derive(Debug, Default, Clone, Serialize)]
pub struct RunSummary {
    pub stats: CleaningStats,
    pub records_in: u64,
    pub records_out: u64,
    pub journal_hits: u64,
}

/// Runs the pipeline over a JSON-lines corpus: writes the cleaned corpus
/// (all input fields preserved, `code` replaced), a sidecar of pipeline
/// results, and a progress journal that makes reruns skip finished records.
pub fn run_corpus(
    in_path: &Path,
    out_path: &Path,
    scanner: &Scanner,
    cleaner: &Cleaner<'_>,
    options: &RunOptions,
) -> std::io::Result<RunSummary>
where
{
    let results_path = options
        .results_path
        .clone()
        .unwrap_or_else(|| out_path.with_extension("results.jsonl"));
    let journal_path = options
        .journal_path
        .clone()
        .unwrap_or_else(|| out_path.with_extension("journal"));

    let done: HashSet<String> = if journal_path.exists() {
        std::fs::read_to_string(&journal_path)?
            .lines()
            .map(String::from)
            .collect()
    } else {
        HashSet::new()
    };

    let mut out_file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(out_path)?;
    let mut results_file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&results_path)?;
    let mut journal_file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&journal_path)?;

    let mut summary = RunSummary::default();
    let mut reader = load_corpus(in_path)?;
    let mut batch: Vec<CorpusRecord> = Vec::new();
    let mut processed = 0usize;

    loop {
        batch.clear();
        for record in reader.by_ref() {
            summary.records_in += 1;
            if options.max_records.is_some_and(|m| processed + batch.len() >= m) {
                summary.records_in -= 1;
                break;
            }
            if done.contains(&record.id()) {
                summary.journal_hits += 1;
                summary.records_out += 1;
                continue;
            }
            batch.push(record);
            if batch.len() >= 256 {
                break;
            }
        }
        if batch.is_empty() {
            break;
        }
        processed += batch.len();

        let results: Vec<PipelineResult> = if options.jobs > 1 {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(options.jobs)
                .build()
                .expect("worker pool");
            pool.install(|| {
                batch
                    .par_iter()
                    .map(|r| process_record(r, scanner, cleaner))
                    .collect()
            })
        } else {
            batch
                .iter()
                .map(|r| process_record(r, scanner, cleaner))
                .collect()
        };

        for (record, result) in batch.iter().zip(&results) {
            accumulate(&mut summary.stats, result);
            let cleaned = record.with_code(&result.cleaned_code);
            serde_json::to_writer(&mut out_file, &cleaned)?;
            out_file.write_all(b"\n")?;
            serde_json::to_writer(&mut results_file, result)?;
            results_file.write_all(b"\n")?;
            out_file.flush()?;
            results_file.flush()?;
            journal_file.write_all(record.id().as_bytes())?;
            journal_file.write_all(b"\n")?;
            journal_file.flush()?;
            summary.records_out += 1;
        }

        if options.max_records.is_some_and(|m| processed >= m) {
            break;
        }
    }

    summary.stats.records_total = summary.records_out;
    summary.stats.records_skipped = reader.skipped as u64;
    Ok(summary)
}

/// Folds one pipeline result into the per-kind accounting.
pub fn accumulate(stats: &mut CleaningStats, result: &PipelineResult) {
    if result.unprocessable {
        stats.records_unprocessable += 1;
        return;
    }
    let mut per_kind: BTreeMap<SmellKind, KindRow> = BTreeMap::new();
    for f in &result.findings_before {
        per_kind.entry(f.kind).or_default().before += 1;
    }
    for o in &result.outcomes {
        let row = per_kind.entry(o.kind).or_default();
        match o.status {
            RefactorStatus::Refactored => row.refactored += 1,
            RefactorStatus::SkippedFalsePositive => row.skipped += 1,
            RefactorStatus::Failed => row.failed += 1,
        }
    }
    for f in &result.findings_after {
        per_kind.entry(f.kind).or_default().after += 1;
    }
    for f in &result.introduced {
        per_kind.entry(f.kind).or_default().introduced += 1;
    }
    for (kind, row) in per_kind {
        let total = stats.row_mut(kind);
        total.before += row.before;
        total.after += row.after;
        total.refactored += row.refactored;
        total.skipped += row.skipped;
        total.failed += row.failed;
        total.introduced += row.introduced;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::DetectorConfig;
    use crate::refactor::RulesOptions;

    fn scanner() -> Scanner {
        Scanner::new(DetectorConfig::default()).unwrap()
    }

    fn rules() -> Cleaner<'static> {
        Cleaner::Rules(RulesOptions::default())
    }

    #[test]
    fn smell_free_code_passes_through_byte_identical() {
        let code = "def tidy(value):\n    return value + 1\n";
        let result = process_text("t", code, &scanner(), &rules());
        assert!(result.findings_before.is_empty());
        assert_eq!(result.cleaned_code, code);
    }

    #[test]
    fn single_collapsible_if_is_cleaned() {
        let code = "if c1:\n    if c2:\n        work()\n";
        let result = process_text("t", code, &scanner(), &rules());
        assert_eq!(result.findings_before.len(), 1);
        assert_eq!(result.cleaned_code, "if c1 and c2:\n    work()\n");
        assert!(result.findings_after.is_empty());
        assert_eq!(result.outcomes[0].status, RefactorStatus::Refactored);
    }

    #[test]
    fn multiple_smells_in_one_function_all_clean() {
        let code = "\
def mixed(rrr):
    x = x
    for idx in rrr:
        continue
        use(idx)
    return rrr
";
        let result = process_text("t", code, &scanner(), &rules());
        assert_eq!(result.findings_before.len(), 2);
        assert!(result.findings_after.is_empty());
        assert_eq!(
            result.cleaned_code,
            "def mixed(rrr):\n    for idx in rrr:\n        continue\n    return rrr\n"
        );
    }

    #[test]
    fn failed_outcomes_leave_the_region_untouched() {
        let code = "def gen(items):\n    for item in items:\n        yield item\n    return 0\n";
        let result = process_text("t", code, &scanner(), &rules());
        assert_eq!(result.cleaned_code, code);
        assert_eq!(result.outcomes[0].status, RefactorStatus::Failed);
        assert_eq!(result.findings_after.len(), 1);
        assert!(result.introduced.is_empty());
    }

    #[test]
    fn unparseable_code_is_recorded_not_thrown() {
        let result = process_text("t", "def broken(:\n", &scanner(), &rules());
        assert!(result.unprocessable);
        assert!(result.error.is_some());
        assert_eq!(result.cleaned_code, "def broken(:\n");
    }

    #[test]
    fn collapsible_chain_resolves_via_collateral_outcomes() {
        let code = "if a:\n    if b:\n        if c:\n            work()\n";
        let result = process_text("t", code, &scanner(), &rules());
        assert_eq!(result.findings_before.len(), 2);
        assert!(result.findings_after.is_empty());
        assert!(result
            .outcomes
            .iter()
            .all(|o| o.status == RefactorStatus::Refactored));
        let cleaned = SourceUnit::parse_str(result.cleaned_code.clone()).unwrap();
        assert!(scanner().scan(&cleaned).is_empty());
    }

    #[test]
    fn order_independence_of_disjoint_fixes() {
        // Equivalent smells in reversed textual order end at the same result.
        let one = "x = x\nif c1:\n    if c2:\n        work()\n";
        let two = "if c1:\n    if c2:\n        work()\nx = x\n";
        let r1 = process_text("a", one, &scanner(), &rules());
        let r2 = process_text("b", two, &scanner(), &rules());
        assert_eq!(r1.cleaned_code, "if c1 and c2:\n    work()\n");
        assert_eq!(r2.cleaned_code, "if c1 and c2:\n    work()\n");
    }

    fn write_corpus(dir: &Path, name: &str, lines: &[&str]) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();
        path
    }

    #[test]
    fn load_corpus_counts_malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_corpus(
            dir.path(),
            "c.jsonl",
            &[
                r#"{"repo":"r","path":"p","func_name":"f","code":"x = 1\n"}"#,
                "{not json",
                r#"{"missing": "code field"}"#,
                r#"{"repo":"r2","path":"p2","func_name":"f2","original_string":"y = 2\n"}"#,
            ],
        );
        let mut reader = load_corpus(&path).unwrap();
        let records: Vec<CorpusRecord> = reader.by_ref().collect();
        assert_eq!(records.len(), 2);
        assert_eq!(reader.skipped, 2);
        assert_eq!(records[1].code, "y = 2\n");
    }

    #[test]
    fn run_corpus_preserves_fields_and_accounts() {
        let dir = tempfile::tempdir().unwrap();
        let in_path = write_corpus(
            dir.path(),
            "in.jsonl",
            &[
                r#"{"repo":"r","path":"a.py","func_name":"f1","code":"def tidy(value):\n    return value\n","docstring":"keep me","partition":"train"}"#,
                r#"{"repo":"r","path":"b.py","func_name":"f2","code":"x = x\n","docstring":"d2"}"#,
            ],
        );
        let out_path = dir.path().join("out.jsonl");
        let summary = run_corpus(
            &in_path,
            &out_path,
            &scanner(),
            &rules(),
            &RunOptions::default(),
        )
        .unwrap();

        assert_eq!(summary.records_in, 2);
        assert_eq!(summary.records_out, 2);
        let out_lines: Vec<String> = std::fs::read_to_string(&out_path)
            .unwrap()
            .lines()
            .map(String::from)
            .collect();
        assert_eq!(out_lines.len(), 2);
        let first: Value = serde_json::from_str(&out_lines[0]).unwrap();
        assert_eq!(first["docstring"], "keep me");
        assert_eq!(first["partition"], "train");
        assert_eq!(first["code"], "def tidy(value):\n    return value\n");
        let second: Value = serde_json::from_str(&out_lines[1]).unwrap();
        assert_eq!(second["code"], "");

        let row = summary.stats.row(SmellKind::SelfAssignedVariables);
        assert_eq!((row.before, row.refactored, row.after), (1, 1, 0));
        summary.stats.validate().unwrap();
    }

    #[test]
    fn rerun_skips_journaled_records() {
        let dir = tempfile::tempdir().unwrap();
        let lines: Vec<String> = (0..8)
            .map(|i| {
                format!(
                    r#"{{"repo":"r","path":"{i}.py","func_name":"f{i}","code":"x = x\n"}}"#
                )
            })
            .collect();
        let line_refs: Vec<&str> = lines.iter().map(String::as_str).collect();
        let in_path = write_corpus(dir.path(), "in.jsonl", &line_refs);
        let out_path = dir.path().join("out.jsonl");

        let first = run_corpus(
            &in_path,
            &out_path,
            &scanner(),
            &rules(),
            &RunOptions {
                max_records: Some(5),
                ..RunOptions::default()
            },
        )
        .unwrap();
        assert_eq!(first.records_out, 5);
        assert_eq!(first.journal_hits, 0);

        let second = run_corpus(
            &in_path,
            &out_path,
            &scanner(),
            &rules(),
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(second.journal_hits, 5);
        assert_eq!(second.records_out, 8);

        let out_lines = std::fs::read_to_string(&out_path).unwrap();
        assert_eq!(out_lines.lines().count(), 8);
    }

    #[test]
    fn empty_corpus_produces_empty_output() {
        let dir = tempfile::tempdir().unwrap();
        let in_path = dir.path().join("in.jsonl");
        std::fs::write(&in_path, "").unwrap();
        let out_path = dir.path().join("out.jsonl");
        let summary = run_corpus(
            &in_path,
            &out_path,
            &scanner(),
            &rules(),
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(summary.records_out, 0);
        assert_eq!(summary.stats.totals(), KindRow::default());
        assert_eq!(std::fs::read_to_string(&out_path).unwrap(), "");
    }
}
