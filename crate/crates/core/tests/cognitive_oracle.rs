//! Checks the scorer against the hand-derived fixture table.

use std::collections::BTreeMap;
use std::path::Path;

use smellcc::detectors::{cognitive_complexity, scan, DetectorConfig, SmellKind};
use smellcc::pysource::SourceUnit;

fn fixture_path(rel: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

fn load_cases() -> (SourceUnit, BTreeMap<String, u32>) {
    let unit = SourceUnit::parse_file(&fixture_path("cognitive/cases.py")).unwrap();
    let expected: BTreeMap<String, u32> = serde_json::from_str(
        &std::fs::read_to_string(fixture_path("cognitive/expected.json")).unwrap(),
    )
    .unwrap();
    (unit, expected)
}

#[test]
fn scores_match_hand_derived_table() {
    let (unit, expected) = load_cases();
    assert!(expected.len() >= 20, "need at least 20 oracle functions");

    let mut checked = 0;
    let mut failures = Vec::new();
    for def in unit.functions() {
        let Some(&want) = expected.get(&def.name) else {
            failures.push(format!("{}: missing from expected.json", def.name));
            continue;
        };
        let got = cognitive_complexity(def);
        if got != want {
            failures.push(format!("{}: got {}, expected {}", def.name, got, want));
        }
        checked += 1;
    }
    assert_eq!(checked, expected.len(), "fixture/table mismatch");
    assert!(failures.is_empty(), "mismatches:\n{}", failures.join("\n"));
}

#[test]
fn threshold_flags_exactly_the_high_scores() {
    let (unit, expected) = load_cases();
    let findings = scan(&unit, &DetectorConfig::default()).unwrap();
    let flagged: Vec<String> = findings
        .iter()
        .filter(|f| f.kind == SmellKind::HighCognitiveComplexity)
        .filter_map(|f| f.function.clone())
        .collect();
    let should_flag: Vec<String> = expected
        .iter()
        .filter(|(_, &score)| score > 15)
        .map(|(name, _)| name.clone())
        .collect();
    let mut flagged_sorted = flagged.clone();
    flagged_sorted.sort();
    assert_eq!(flagged_sorted, should_flag);
    for finding in findings
        .iter()
        .filter(|f| f.kind == SmellKind::HighCognitiveComplexity)
    {
        let name = finding.function.as_ref().unwrap();
        assert_eq!(finding.metric, Some(expected[name] as i64));
    }
}
