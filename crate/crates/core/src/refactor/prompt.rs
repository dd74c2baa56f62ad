//! Prompt assembly: role designation, chain-of-thought steps, and few-shot
//! pairs, loaded from one structured-text template file per smell kind.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::detectors::{DetectorConfig, Finding, SmellKind};

#[derive(Debug, Clone, PartialEq)]
pub struct FewShotPair {
    pub smelly: String,
    pub refactored: String,
}

/// One kind's prompt material.
#[derive(Debug, Clone)]
pub struct PromptSpec {
    pub kind: SmellKind,
    pub role_text: String,
    pub output_restriction: String,
    pub task_text: String,
    pub cot_steps: Vec<String>,
    pub few_shot: Vec<FewShotPair>,
}

/// Which prompt sections are enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PromptConfig {
    RoleOnly,
    RoleFewShot,
    RoleCoT,
    Full,
}

impl PromptConfig {
    pub fn cot_enabled(&self) -> bool {
        matches!(self, PromptConfig::RoleCoT | PromptConfig::Full)
    }

    pub fn few_shot_enabled(&self) -> bool {
        matches!(self, PromptConfig::RoleFewShot | PromptConfig::Full)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PromptConfig::RoleOnly => "role",
            PromptConfig::RoleFewShot => "role-fewshot",
            PromptConfig::RoleCoT => "role-cot",
            PromptConfig::Full => "full",
        }
    }
}

impl fmt::Display for PromptConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().replace(['-', '_', '+'], "").as_str() {
            "role" | "roleonly" => Ok(PromptConfig::RoleOnly),
            "rolefewshot" | "fewshot" => Ok(PromptConfig::RoleFewShot),
            "rolecot" | "cot" => Ok(PromptConfig::RoleCoT),
            "full" | "rolecotfewshot" => Ok(PromptConfig::Full),
            other => Err(format!("unknown prompt config: {other}")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("missing prompt template(s) for: {}", .0.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", "))]
    Missing(Vec<SmellKind>),
    #[error("template for {kind}: {message}")]
    Parse { kind: SmellKind, message: String },
    #[error("template for {kind}: example snippet does not parse: {which}")]
    InvalidSnippet { kind: SmellKind, which: String },
    #[error("cannot read template dir {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("no prompt template for kind {0}")]
    MissingTemplate(SmellKind),
}

const TEMPLATE_FILE_NAMES: [(SmellKind, &str); 10] = [
    (SmellKind::CommentedCode, "commented_code"),
    (SmellKind::NamingConvention, "naming_convention"),
    (SmellKind::EmptyNestedCodeBlocks, "empty_nested_code_blocks"),
    (SmellKind::CollapsibleIfStatements, "collapsible_if_statements"),
    (SmellKind::LongParameterList, "long_parameter_list"),
    (SmellKind::HighCognitiveComplexity, "high_cognitive_complexity"),
    (SmellKind::DeadCode, "dead_code"),
    (SmellKind::SelfAssignedVariables, "self_assigned_variables"),
    (SmellKind::IdenticalExpressions, "identical_expressions"),
    (SmellKind::ReturnAndYield, "return_and_yield"),
];

const BUILTIN_TEMPLATES: [(SmellKind, &str); 10] = [
    (
        SmellKind::CommentedCode,
        include_str!("../../templates/commented_code.prompt"),
    ),
    (
        SmellKind::NamingConvention,
        include_str!("../../templates/naming_convention.prompt"),
    ),
    (
        SmellKind::EmptyNestedCodeBlocks,
        include_str!("../../templates/empty_nested_code_blocks.prompt"),
    ),
    (
        SmellKind::CollapsibleIfStatements,
        include_str!("../../templates/collapsible_if_statements.prompt"),
    ),
    (
        SmellKind::LongParameterList,
        include_str!("../../templates/long_parameter_list.prompt"),
    ),
    (
        SmellKind::HighCognitiveComplexity,
        include_str!("../../templates/high_cognitive_complexity.prompt"),
    ),
    (
        SmellKind::DeadCode,
        include_str!("../../templates/dead_code.prompt"),
    ),
    (
        SmellKind::SelfAssignedVariables,
        include_str!("../../templates/self_assigned_variables.prompt"),
    ),
    (
        SmellKind::IdenticalExpressions,
        include_str!("../../templates/identical_expressions.prompt"),
    ),
    (
        SmellKind::ReturnAndYield,
        include_str!("../../templates/return_and_yield.prompt"),
    ),
];

/// Ten parsed prompt specs.
#[derive(Debug, Clone)]
pub struct PromptLibrary {
    specs: BTreeMap<SmellKind, PromptSpec>,
}

impl PromptLibrary {
    /// The templates compiled into the binary.
    pub fn builtin() -> PromptLibrary {
        let mut specs = BTreeMap::new();
        for (kind, text) in BUILTIN_TEMPLATES {
            let spec = parse_template(kind, text)
                .unwrap_or_else(|e| panic!("builtin template invalid: {e}"));
            specs.insert(kind, spec);
        }
        PromptLibrary { specs }
    }

    /// Loads `<kind>.prompt` files from a directory; every kind must be
    /// present or startup fails listing the missing ones.
    pub fn from_dir(dir: &Path) -> Result<PromptLibrary, TemplateError> {
        let mut specs = BTreeMap::new();
        let mut missing = Vec::new();
        for (kind, stem) in TEMPLATE_FILE_NAMES {
            let path = dir.join(format!("{stem}.prompt"));
            if !path.exists() {
                missing.push(kind);
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(|source| TemplateError::Io {
                path: path.display().to_string(),
                source,
            })?;
            specs.insert(kind, parse_template(kind, &text)?);
        }
        if !missing.is_empty() {
            return Err(TemplateError::Missing(missing));
        }
        Ok(PromptLibrary { specs })
    }

    pub fn spec(&self, kind: SmellKind) -> Option<&PromptSpec> {
        self.specs.get(&kind)
    }
}

fn parse_template(kind: SmellKind, text: &str) -> Result<PromptSpec, TemplateError> {
    let mut sections: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('[') && trimmed.ends_with(']') && trimmed.len() > 2 {
            current = Some(trimmed[1..trimmed.len() - 1].to_string());
            sections.entry(current.clone().unwrap()).or_default();
            continue;
        }
        if let Some(section) = &current {
            sections.get_mut(section).unwrap().push(line.to_string());
        }
    }

    let joined = |name: &str| -> Result<String, TemplateError> {
        sections
            .get(name)
            .map(|lines| lines.join("\n").trim().to_string())
            .filter(|s| !s.is_empty())
            .ok_or_else(|| TemplateError::Parse {
                kind,
                message: format!("missing [{name}] section"),
            })
    };

    let role_text = joined("role")?;
    let output_restriction = joined("restriction")?;
    let task_text = joined("task")?;
    let cot_steps: Vec<String> = sections
        .get("steps")
        .map(|lines| {
            lines
                .iter()
                .map(|l| l.trim())
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect()
        })
        .unwrap_or_default();
    if cot_steps.is_empty() {
        return Err(TemplateError::Parse {
            kind,
            message: "missing or empty [steps] section".to_string(),
        });
    }

    let few_shot = parse_examples(kind, sections.get("examples").map(Vec::as_slice))?;
    for (i, pair) in few_shot.iter().enumerate() {
        for (which, snippet) in [("smelly", &pair.smelly), ("refactored", &pair.refactored)] {
            if crate::pysource::SourceUnit::parse_str(snippet.clone()).is_err() {
                return Err(TemplateError::InvalidSnippet {
                    kind,
                    which: format!("pair {} {which}", i + 1),
                });
            }
        }
    }

    Ok(PromptSpec {
        kind,
        role_text,
        output_restriction,
        task_text,
        cot_steps,
        few_shot,
    })
}

fn parse_examples(
    kind: SmellKind,
    lines: Option<&[String]>,
) -> Result<Vec<FewShotPair>, TemplateError> {
    let Some(lines) = lines else {
        return Err(TemplateError::Parse {
            kind,
            message: "missing [examples] section".to_string(),
        });
    };
    let mut pairs = Vec::new();
    let mut smelly: Option<Vec<String>> = None;
    let mut refactored: Option<Vec<String>> = None;

    let flush = |smelly: &mut Option<Vec<String>>, refactored: &mut Option<Vec<String>>, pairs: &mut Vec<FewShotPair>| {
        if let (Some(s), Some(r)) = (smelly.take(), refactored.take()) {
            pairs.push(FewShotPair {
                smelly: s.join("\n").trim_matches('\n').to_string(),
                refactored: r.join("\n").trim_matches('\n').to_string(),
            });
        }
    };

    for line in lines {
        match line.trim() {
            "--- smelly ---" => {
                flush(&mut smelly, &mut refactored, &mut pairs);
                smelly = Some(Vec::new());
            }
            "--- refactored ---" => {
                refactored = Some(Vec::new());
            }
            _ => {
                if let Some(r) = refactored.as_mut() {
                    r.push(line.clone());
                } else if let Some(s) = smelly.as_mut() {
                    s.push(line.clone());
                }
            }
        }
    }
    flush(&mut smelly, &mut refactored, &mut pairs);
    if pairs.is_empty() {
        return Err(TemplateError::Parse {
            kind,
            message: "no few-shot pairs in [examples]".to_string(),
        });
    }
    Ok(pairs)
}

/// Assembles prompts from a library plus the detector thresholds that template
/// placeholders reference.
#[derive(Debug, Clone)]
pub struct PromptBuilder {
    library: PromptLibrary,
    detector: DetectorConfig,
}

impl PromptBuilder {
    pub fn new(library: PromptLibrary, detector: DetectorConfig) -> PromptBuilder {
        PromptBuilder { library, detector }
    }

    /// Deterministic prompt text: role and restriction, then (per config) the
    /// task with numbered steps and the few-shot pairs, then the target code
    /// annotated with the finding location. `region_start` is the byte offset
    /// of `code` inside the unit the finding came from.
    pub fn build(
        &self,
        kind: SmellKind,
        code: &str,
        finding: &Finding,
        region_start_line: usize,
        finding_line: usize,
        config: PromptConfig,
    ) -> Result<String, PromptError> {
        let spec = self
            .library
            .spec(kind)
            .ok_or(PromptError::MissingTemplate(kind))?;

        let mut out = String::new();
        out.push_str("Role: ");
        out.push_str(&self.substitute(&spec.role_text));
        out.push('\n');
        out.push_str("Output Restriction: ");
        out.push_str(&self.substitute(&spec.output_restriction));
        out.push('\n');

        if config.cot_enabled() {
            out.push('\n');
            out.push_str("Task: ");
            out.push_str(&self.substitute(&spec.task_text));
            out.push('\n');
            for (i, step) in spec.cot_steps.iter().enumerate() {
                out.push_str(&format!("Step {}: {}\n", i + 1, self.substitute(step)));
            }
        }

        if config.few_shot_enabled() {
            for pair in &spec.few_shot {
                out.push('\n');
                out.push_str("Given smell code:\n");
                out.push_str(&pair.smelly);
                out.push('\n');
                out.push_str("Result Refactor Code:\n");
                out.push_str(&pair.refactored);
                out.push('\n');
            }
        }

        let rel_line = finding_line.saturating_sub(region_start_line) + 1;
        out.push('\n');
        out.push_str(&format!(
            "The code below contains a {} smell at line {}: {}\n",
            kind.label(),
            rel_line,
            finding.message
        ));
        out.push_str("Code:\n");
        out.push_str(code);
        if !code.ends_with('\n') {
            out.push('\n');
        }
        Ok(out)
    }

    fn substitute(&self, text: &str) -> String {
        text.replace("{function_regex}", &self.detector.naming_regex_function)
            .replace("{variable_regex}", &self.detector.naming_regex_variable)
            .replace("{cc_threshold}", &self.detector.cc_threshold.to_string())
            .replace("{max_params}", &self.detector.max_params.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::span::Span;

    fn sample_finding(kind: SmellKind) -> Finding {
        Finding {
            kind,
            span: Span::new(0, 5),
            function: None,
            message: "test diagnostic".to_string(),
            metric: None,
        }
    }

    #[test]
    fn builtin_library_has_all_kinds_with_parsing_snippets() {
        let lib = PromptLibrary::builtin();
        for kind in SmellKind::ALL {
            let spec = lib.spec(kind).unwrap();
            assert!(!spec.role_text.is_empty());
            assert!(!spec.cot_steps.is_empty());
            assert!(!spec.few_shot.is_empty());
        }
    }

    #[test]
    fn full_config_contains_all_sections_in_order() {
        let builder = PromptBuilder::new(PromptLibrary::builtin(), DetectorConfig::default());
        let finding = sample_finding(SmellKind::CollapsibleIfStatements);
        let prompt = builder
            .build(
                SmellKind::CollapsibleIfStatements,
                "if c1:\n    if c2:\n        work()\n",
                &finding,
                1,
                1,
                PromptConfig::Full,
            )
            .unwrap();
        let role_pos = prompt.find("expert software engineer").unwrap();
        let step_pos = prompt.find("Determine the conjunction").unwrap();
        let shot_pos = prompt.find("if condition1 and condition2").unwrap();
        let code_pos = prompt.find("Code:\nif c1:").unwrap();
        assert!(role_pos < step_pos && step_pos < shot_pos && shot_pos < code_pos);
        assert!(prompt.contains("Do not generate any explanation text"));
    }

    #[test]
    fn role_only_omits_steps_and_examples() {
        let builder = PromptBuilder::new(PromptLibrary::builtin(), DetectorConfig::default());
        let finding = sample_finding(SmellKind::CollapsibleIfStatements);
        let prompt = builder
            .build(
                SmellKind::CollapsibleIfStatements,
                "if c1:\n    if c2:\n        work()\n",
                &finding,
                1,
                1,
                PromptConfig::RoleOnly,
            )
            .unwrap();
        assert!(prompt.contains("expert software engineer"));
        assert!(!prompt.contains("Step 1"));
        assert!(!prompt.contains("Given smell code"));
        assert!(!prompt.contains("Determine the conjunction"));
    }

    #[test]
    fn naming_prompt_embeds_configured_regex() {
        let builder = PromptBuilder::new(PromptLibrary::builtin(), DetectorConfig::default());
        let finding = sample_finding(SmellKind::NamingConvention);
        let prompt = builder
            .build(
                SmellKind::NamingConvention,
                "def Eq(a, b):\n    return a == b\n",
                &finding,
                1,
                1,
                PromptConfig::Full,
            )
            .unwrap();
        assert!(prompt.contains("^[a-z_][a-z0-9_]{2,}$"));
        assert!(prompt.contains("^[_a-z][a-z0-9_]*$"));
    }

    #[test]
    fn prompts_are_deterministic() {
        let builder = PromptBuilder::new(PromptLibrary::builtin(), DetectorConfig::default());
        let finding = sample_finding(SmellKind::DeadCode);
        let one = builder
            .build(SmellKind::DeadCode, "x = 1\n", &finding, 1, 1, PromptConfig::Full)
            .unwrap();
        let two = builder
            .build(SmellKind::DeadCode, "x = 1\n", &finding, 1, 1, PromptConfig::Full)
            .unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn from_dir_lists_missing_kinds() {
        let dir = std::env::temp_dir().join("smellcc-templates-missing");
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(
            dir.join("dead_code.prompt"),
            include_str!("../../templates/dead_code.prompt"),
        )
        .unwrap();
        let err = PromptLibrary::from_dir(&dir).unwrap_err();
        match err {
            TemplateError::Missing(kinds) => {
                assert_eq!(kinds.len(), 9);
                assert!(!kinds.contains(&SmellKind::DeadCode));
            }
            other => panic!("expected Missing, got {other}"),
        }
    }

    #[test]
    fn from_dir_roundtrips_the_shipped_templates() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("templates");
        let lib = PromptLibrary::from_dir(&dir).unwrap();
        assert!(lib.spec(SmellKind::ReturnAndYield).is_some());
    }
}
