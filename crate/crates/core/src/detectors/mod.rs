//! The ten smell rules and the scan entry point.

mod cognitive;
mod commented;
mod exprs;
mod rules;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub use cognitive::cognitive_complexity;
pub use exprs::exprs_equal;

use crate::pysource::ast::{FunctionDef, ParamKind};
use crate::pysource::SourceUnit;
use crate::span::Span;

/// The closed set of smell categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SmellKind {
    CommentedCode,
    NamingConvention,
    EmptyNestedCodeBlocks,
    CollapsibleIfStatements,
    LongParameterList,
    HighCognitiveComplexity,
    DeadCode,
    SelfAssignedVariables,
    IdenticalExpressions,
    ReturnAndYield,
}

impl SmellKind {
    pub const ALL: [SmellKind; 10] = [
        SmellKind::CommentedCode,
        SmellKind::NamingConvention,
        SmellKind::EmptyNestedCodeBlocks,
        SmellKind::CollapsibleIfStatements,
        SmellKind::LongParameterList,
        SmellKind::HighCognitiveComplexity,
        SmellKind::DeadCode,
        SmellKind::SelfAssignedVariables,
        SmellKind::IdenticalExpressions,
        SmellKind::ReturnAndYield,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SmellKind::CommentedCode => "CommentedCode",
            SmellKind::NamingConvention => "NamingConvention",
            SmellKind::EmptyNestedCodeBlocks => "EmptyNestedCodeBlocks",
            SmellKind::CollapsibleIfStatements => "CollapsibleIfStatements",
            SmellKind::LongParameterList => "LongParameterList",
            SmellKind::HighCognitiveComplexity => "HighCognitiveComplexity",
            SmellKind::DeadCode => "DeadCode",
            SmellKind::SelfAssignedVariables => "SelfAssignedVariables",
            SmellKind::IdenticalExpressions => "IdenticalExpressions",
            SmellKind::ReturnAndYield => "ReturnAndYield",
        }
    }

    /// Human-readable label used in report tables.
    pub fn label(&self) -> &'static str {
        match self {
            SmellKind::CommentedCode => "Commented Code",
            SmellKind::NamingConvention => "Naming Convention",
            SmellKind::EmptyNestedCodeBlocks => "Empty Nested Code Blocks",
            SmellKind::CollapsibleIfStatements => "Collapsible if Statements",
            SmellKind::LongParameterList => "Long Parameter List",
            SmellKind::HighCognitiveComplexity => "High Cognitive Complexity",
            SmellKind::DeadCode => "Dead Code",
            SmellKind::SelfAssignedVariables => "Self-assigned Variables",
            SmellKind::IdenticalExpressions => "Identical Expressions",
            SmellKind::ReturnAndYield => "Return and Yield",
        }
    }
}

impl fmt::Display for SmellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SmellKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let normalized: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        SmellKind::ALL
            .iter()
            .find(|k| k.as_str().to_lowercase() == normalized)
            .copied()
            .ok_or_else(|| format!("unknown smell kind: {s}"))
    }
}

/// One detected smell occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: SmellKind,
    pub span: Span,
    /// Enclosing function, or the named function itself for function-level kinds.
    pub function: Option<String>,
    pub message: String,
    /// Cognitive-complexity score or parameter count; present only for those kinds.
    pub metric: Option<i64>,
}

/// JSON-lines serialization of a finding with resolved line/column positions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FindingRecord {
    pub kind: SmellKind,
    pub path: String,
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
    pub function: Option<String>,
    pub message: String,
    pub metric: Option<i64>,
}

impl Finding {
    pub fn to_record(&self, unit: &SourceUnit) -> FindingRecord {
        let start = unit.lines().position(self.span.start);
        let end = unit.lines().position(self.span.end);
        FindingRecord {
            kind: self.kind,
            path: unit.path_label(),
            start_line: start.line,
            start_col: start.col,
            end_line: end.line,
            end_col: end.col,
            function: self.function.clone(),
            message: self.message.clone(),
            metric: self.metric,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cc_threshold must be >= 1")]
    CcThreshold,
    #[error("max_params must be >= 1")]
    MaxParams,
    #[error("invalid {which} regex: {source}")]
    Regex {
        which: &'static str,
        #[source]
        source: regex::Error,
    },
}

/// Detector thresholds and patterns.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub cc_threshold: u32,
    pub max_params: u32,
    pub naming_regex_function: String,
    pub naming_regex_variable: String,
    pub identical_expr_excluded_operators: BTreeSet<String>,
    pub commented_code_min_score: u32,
    pub enabled_kinds: BTreeSet<SmellKind>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            cc_threshold: 15,
            max_params: 13,
            naming_regex_function: "^[a-z_][a-z0-9_]{2,}$".to_string(),
            naming_regex_variable: "^[_a-z][a-z0-9_]*$".to_string(),
            identical_expr_excluded_operators: ["+", "*", "<<"]
                .into_iter()
                .map(String::from)
                .collect(),
            commented_code_min_score: 2,
            enabled_kinds: SmellKind::ALL.into_iter().collect(),
        }
    }
}

impl DetectorConfig {
    pub fn compile(&self) -> Result<Scanner, ConfigError> {
        Scanner::new(self.clone())
    }
}

/// Operators the identical-expressions rule considers, before exclusions.
const IDENTICAL_CANDIDATE_OPS: [&str; 11] =
    ["==", "!=", "<", "<=", ">", ">=", "-", "/", "%", "and", "or"];

/// A validated, reusable detector configuration.
#[derive(Debug, Clone)]
pub struct Scanner {
    config: DetectorConfig,
    pub(crate) function_regex: Regex,
    pub(crate) variable_regex: Regex,
    pub(crate) identical_ops: BTreeSet<&'static str>,
}

impl Scanner {
    pub fn new(config: DetectorConfig) -> Result<Scanner, ConfigError> {
        if config.cc_threshold < 1 {
            return Err(ConfigError::CcThreshold);
        }
        if config.max_params < 1 {
            return Err(ConfigError::MaxParams);
        }
        let function_regex = Regex::new(&config.naming_regex_function).map_err(|source| {
            ConfigError::Regex {
                which: "function naming",
                source,
            }
        })?;
        let variable_regex = Regex::new(&config.naming_regex_variable).map_err(|source| {
            ConfigError::Regex {
                which: "variable naming",
                source,
            }
        })?;
        let identical_ops = IDENTICAL_CANDIDATE_OPS
            .into_iter()
            .filter(|op| !config.identical_expr_excluded_operators.contains(*op))
            .collect();
        Ok(Scanner {
            config,
            function_regex,
            variable_regex,
            identical_ops,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    /// Scans one unit. Deterministic: the result is span-sorted, restricted to
    /// enabled kinds, and free of (kind, span) duplicates.
    pub fn scan(&self, unit: &SourceUnit) -> Vec<Finding> {
        let mut findings = rules::run(self, unit);
        findings.retain(|f| self.config.enabled_kinds.contains(&f.kind));
        findings.sort_by(|a, b| {
            (a.span.start, a.span.end, a.kind).cmp(&(b.span.start, b.span.end, b.kind))
        });
        findings.dedup_by(|a, b| a.kind == b.kind && a.span == b.span);
        findings
    }
}

/// One-shot scan with a fresh configuration.
pub fn scan(unit: &SourceUnit, config: &DetectorConfig) -> Result<Vec<Finding>, ConfigError> {
    Ok(Scanner::new(config.clone())?.scan(unit))
}

/// Declared parameters, excluding a leading `self`/`cls` on methods;
/// `*args` and `**kwargs` count one each.
pub fn parameter_count(def: &FunctionDef, is_method: bool) -> u32 {
    let mut count = def.params.len() as u32;
    if is_method {
        if let Some(first) = def.params.first() {
            let leading = matches!(first.kind, ParamKind::Positional | ParamKind::PositionalOnly);
            if leading && (first.name == "self" || first.name == "cls") {
                count -= 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pysource::ast::Stmt;

    fn scan_src(src: &str) -> Vec<Finding> {
        let unit = SourceUnit::parse_str(src).unwrap();
        scan(&unit, &DetectorConfig::default()).unwrap()
    }

    fn kinds(findings: &[Finding]) -> Vec<SmellKind> {
        findings.iter().map(|f| f.kind).collect()
    }

    #[test]
    fn bad_function_name_is_flagged() {
        let unit = SourceUnit::parse_str("def Eq(aaa, bbb):\n    return aaa == bbb\n").unwrap();
        let findings = scan(&unit, &DetectorConfig::default()).unwrap();
        assert_eq!(kinds(&findings), [SmellKind::NamingConvention]);
        assert_eq!(unit.slice(findings[0].span), "Eq");
        assert!(findings[0].message.contains("^[a-z_][a-z0-9_]{2,}$"));
    }

    #[test]
    fn nested_if_pair_is_collapsible() {
        let src = "if c1:\n    if c2:\n        work()\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let findings = scan(&unit, &DetectorConfig::default()).unwrap();
        assert_eq!(kinds(&findings), [SmellKind::CollapsibleIfStatements]);
        assert_eq!(findings[0].span, unit.tree().body[0].span());
    }

    #[test]
    fn if_with_else_is_not_collapsible() {
        let src = "if c1:\n    if c2:\n        work()\n    else:\n        rest()\n";
        assert!(scan_src(src).is_empty());
    }

    #[test]
    fn statements_after_return_are_dead() {
        let src = "def fnx(rrr):\n    return 1\n    for idx in rrr:\n        use(idx)\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let findings = scan(&unit, &DetectorConfig::default()).unwrap();
        assert_eq!(kinds(&findings), [SmellKind::DeadCode]);
        let Stmt::FunctionDef(def) = &unit.tree().body[0] else {
            panic!()
        };
        assert_eq!(findings[0].span, def.body[1].span());
    }

    #[test]
    fn self_assignment_is_flagged() {
        let findings = scan_src("x = x\n");
        assert_eq!(kinds(&findings), [SmellKind::SelfAssignedVariables]);
    }

    #[test]
    fn annotated_self_assignment_is_flagged() {
        let findings = scan_src("x: int = x\n");
        assert_eq!(kinds(&findings), [SmellKind::SelfAssignedVariables]);
    }

    #[test]
    fn augmented_assignment_is_not_self_assignment() {
        assert!(scan_src("x += x\n").is_empty());
    }

    #[test]
    fn attribute_chain_self_assignment() {
        let src = "class Holder:\n    def touch(self):\n        self.addr = self.addr\n";
        let findings = scan_src(src);
        assert_eq!(kinds(&findings), [SmellKind::SelfAssignedVariables]);
        assert_eq!(findings[0].function.as_deref(), Some("touch"));
    }

    #[test]
    fn clean_function_has_no_findings() {
        assert!(scan_src("def tidy(value):\n    return value\n").is_empty());
    }

    #[test]
    fn identical_operands_plus_empty_block() {
        let findings = scan_src("if a - a > 0:\n    pass\n");
        let mut got = kinds(&findings);
        got.sort();
        let mut want = vec![
            SmellKind::EmptyNestedCodeBlocks,
            SmellKind::IdenticalExpressions,
        ];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn excluded_operators_are_not_flagged() {
        assert!(scan_src("y = x + x\nz = x * x\nw = 1 << 1\n").is_empty());
    }

    #[test]
    fn division_of_identical_operands_is_flagged() {
        let findings = scan_src("y = x / x\n");
        assert_eq!(kinds(&findings), [SmellKind::IdenticalExpressions]);
    }

    #[test]
    fn boolean_identical_neighbors_are_flagged() {
        let findings = scan_src("y = aaa and aaa\n");
        assert_eq!(kinds(&findings), [SmellKind::IdenticalExpressions]);
    }

    #[test]
    fn method_self_is_excluded_from_parameter_count() {
        let src = "class Acct:\n    def __init__(self, aaa, bbb):\n        self.aaa = aaa\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let Stmt::ClassDef(class) = &unit.tree().body[0] else {
            panic!()
        };
        let Stmt::FunctionDef(init) = &class.body[0] else {
            panic!()
        };
        assert_eq!(parameter_count(init, true), 2);
        assert_eq!(parameter_count(init, false), 3);
    }

    #[test]
    fn eleven_params_trigger_under_lowered_threshold() {
        let src = "\
class Acct:
    def __init__(self, p01, p02, p03, p04, p05, p06, p07, p08, p09, p10, p11):
        self.p01 = p01
";
        let unit = SourceUnit::parse_str(src).unwrap();
        let config = DetectorConfig {
            max_params: 10,
            ..DetectorConfig::default()
        };
        let findings = scan(&unit, &config).unwrap();
        assert_eq!(kinds(&findings), [SmellKind::LongParameterList]);
        assert_eq!(findings[0].metric, Some(11));
        // The default threshold of 13 does not fire.
        assert!(scan(&unit, &DetectorConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn return_and_yield_in_one_function() {
        let src = "def gen(items):\n    for item in items:\n        yield item\n    return 0\n";
        let findings = scan_src(src);
        assert_eq!(kinds(&findings), [SmellKind::ReturnAndYield]);
        assert_eq!(
            findings[0].message,
            "Use only return or only yield, not both"
        );
    }

    #[test]
    fn bare_return_with_yield_is_fine() {
        let src = "def gen(items):\n    for item in items:\n        yield item\n    return\n";
        assert!(scan_src(src).is_empty());
    }

    #[test]
    fn nested_def_yield_does_not_taint_outer() {
        let src = "\
def outer(items):
    def inner():
        yield 1

    return inner
";
        assert!(scan_src(src).is_empty());
    }

    #[test]
    fn commented_code_block_is_flagged() {
        let src = "value = 1\n# old = compute(value)\n# use(old)\nresult = value\n";
        let findings = scan_src(src);
        assert_eq!(kinds(&findings), [SmellKind::CommentedCode]);
    }

    #[test]
    fn prose_comment_is_not_code() {
        assert!(scan_src("# adds one to the value\nvalue = 1\n").is_empty());
    }

    #[test]
    fn metric_present_only_for_metric_kinds() {
        let src = "\
def busy(aaa, bbb, ccc, ddd):
    if aaa:
        if bbb:
            if ccc:
                return 1
    if ddd:
        if aaa:
            if bbb:
                return 2
    if ccc and ddd or aaa:
        return 3
    if bbb:
        if ccc:
            return 4
    return 0
";
        let unit = SourceUnit::parse_str(src).unwrap();
        let config = DetectorConfig {
            cc_threshold: 10,
            ..DetectorConfig::default()
        };
        let findings = scan(&unit, &config).unwrap();
        for f in &findings {
            assert_eq!(
                f.metric.is_some(),
                matches!(
                    f.kind,
                    SmellKind::HighCognitiveComplexity | SmellKind::LongParameterList
                ),
                "metric presence wrong for {:?}",
                f.kind
            );
        }
        assert!(findings
            .iter()
            .any(|f| f.kind == SmellKind::HighCognitiveComplexity));
    }

    #[test]
    fn scan_is_deterministic_and_sorted() {
        let src = "\
# dead = compute(1)
# use(dead)
def Mixed(items):
    x = x
    if a:
        if b:
            work()
    return items
";
        let unit = SourceUnit::parse_str(src).unwrap();
        let config = DetectorConfig::default();
        let first = scan(&unit, &config).unwrap();
        let second = scan(&unit, &config).unwrap();
        assert_eq!(first, second);
        let starts: Vec<usize> = first.iter().map(|f| f.span.start).collect();
        let mut sorted = starts.clone();
        sorted.sort();
        assert_eq!(starts, sorted);
    }

    #[test]
    fn raising_thresholds_never_adds_findings() {
        let src = "\
def busy(aaa, bbb, ccc):
    if aaa:
        if bbb:
            if ccc:
                return 1
    if aaa or bbb:
        return 2
    return 0
";
        let unit = SourceUnit::parse_str(src).unwrap();
        let low = scan(
            &unit,
            &DetectorConfig {
                cc_threshold: 3,
                ..DetectorConfig::default()
            },
        )
        .unwrap();
        let high = scan(
            &unit,
            &DetectorConfig {
                cc_threshold: 8,
                ..DetectorConfig::default()
            },
        )
        .unwrap();
        let hcc = |fs: &[Finding]| {
            fs.iter()
                .filter(|f| f.kind == SmellKind::HighCognitiveComplexity)
                .count()
        };
        assert!(hcc(&high) <= hcc(&low));
    }

    #[test]
    fn enabled_kinds_filter_restricts_output() {
        let src = "x = x\nif c1:\n    if c2:\n        work()\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let config = DetectorConfig {
            enabled_kinds: [SmellKind::SelfAssignedVariables].into_iter().collect(),
            ..DetectorConfig::default()
        };
        let findings = scan(&unit, &config).unwrap();
        assert_eq!(kinds(&findings), [SmellKind::SelfAssignedVariables]);
    }

    #[test]
    fn module_constants_are_exempt_from_naming() {
        assert!(scan_src("MAX_SIZE = 10\n_PRIVATE_LIMIT = 2\n").is_empty());
        let findings = scan_src("BadName = 10\n");
        assert_eq!(kinds(&findings), [SmellKind::NamingConvention]);
    }

    #[test]
    fn else_pass_is_an_empty_nested_block() {
        let src = "if cond:\n    work()\nelse:\n    pass\n";
        let findings = scan_src(src);
        assert_eq!(kinds(&findings), [SmellKind::EmptyNestedCodeBlocks]);
    }

    #[test]
    fn function_body_pass_is_not_an_empty_nested_block() {
        assert!(scan_src("def stub():\n    pass\n").is_empty());
    }

    #[test]
    fn findings_serialize_with_positions() {
        let src = "def fnx(rrr):\n    return 1\n    use(rrr)\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let findings = scan(&unit, &DetectorConfig::default()).unwrap();
        let record = findings[0].to_record(&unit);
        assert_eq!(record.kind, SmellKind::DeadCode);
        assert_eq!(record.start_line, 3);
        assert_eq!(record.start_col, 4);
        let json = serde_json::to_string(&record).unwrap();
        assert!(json.contains("\"kind\":\"DeadCode\""));
        let parsed: FindingRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.start_line, 3);
    }
}
