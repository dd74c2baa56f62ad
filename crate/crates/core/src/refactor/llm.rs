//! LLM-backed cleaning: prompt the model with the enclosing region, sanitize
//! the completion, splice it back, and validate by re-parsing and re-scanning.

use super::prompt::{PromptBuilder, PromptConfig};
use super::{BackendKind, RefactorOutcome, RefactorStatus};
use crate::detectors::{Finding, Scanner, SmellKind};
use crate::llmclient::{CompletionRequest, LlmClient};
use crate::pysource::{line_indent, whole_lines, Patch, PatchSet, SourceUnit};
use crate::span::Span;

#[derive(Debug, thiserror::Error)]
#[error("no parseable code region remains in the model response")]
pub struct UnusableResponse;

/// Strips code fences, leading/trailing prose lines, and trailing whitespace;
/// the survivor must parse (directly or after dedent).
pub fn sanitize_response(raw: &str) -> Result<String, UnusableResponse> {
    if let Some(fenced) = extract_fenced(raw) {
        if let Some(code) = parseable(&fenced) {
            return Ok(code);
        }
    }
    let lines: Vec<&str> = raw.lines().collect();
    let max_drop = 10usize;
    for drop_front in 0..=max_drop.min(lines.len()) {
        for drop_back in 0..=max_drop.min(lines.len() - drop_front) {
            let slice = &lines[drop_front..lines.len() - drop_back];
            if slice.is_empty() {
                continue;
            }
            let candidate = slice.join("\n");
            if candidate.trim().is_empty() {
                continue;
            }
            if let Some(code) = parseable(&candidate) {
                return Ok(code);
            }
        }
    }
    Err(UnusableResponse)
}

fn extract_fenced(raw: &str) -> Option<String> {
    let mut inside = false;
    let mut collected: Vec<&str> = Vec::new();
    for line in raw.lines() {
        if line.trim_start().starts_with("```") {
            if inside {
                return Some(collected.join("\n"));
            }
            inside = true;
            continue;
        }
        if inside {
            collected.push(line);
        }
    }
    None
}

/// Returns the trimmed candidate when it parses, trying a dedented variant
/// for indented snippets.
fn parseable(candidate: &str) -> Option<String> {
    let trimmed = candidate.trim_end().trim_start_matches('\n').to_string();
    if trimmed.is_empty() {
        return None;
    }
    if SourceUnit::parse_str(trimmed.clone()).is_ok() {
        return Some(trimmed);
    }
    let dedented = dedent(&trimmed);
    if dedented != trimmed && SourceUnit::parse_str(dedented.clone()).is_ok() {
        return Some(dedented);
    }
    None
}

pub(super) fn dedent(text: &str) -> String {
    let margin = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start().len())
        .min()
        .unwrap_or(0);
    if margin == 0 {
        return text.to_string();
    }
    text.lines()
        .map(|l| if l.len() >= margin { &l[margin..] } else { l.trim_start() })
        .collect::<Vec<_>>()
        .join("\n")
}

fn indent_by(text: &str, indent: &str) -> String {
    if indent.is_empty() {
        return text.to_string();
    }
    text.lines()
        .map(|l| {
            if l.trim().is_empty() {
                String::new()
            } else {
                format!("{indent}{l}")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub struct LlmCleaner {
    client: std::sync::Arc<LlmClient>,
    builder: PromptBuilder,
    prompt_config: PromptConfig,
}

impl LlmCleaner {
    pub fn new(
        client: std::sync::Arc<LlmClient>,
        builder: PromptBuilder,
        prompt_config: PromptConfig,
    ) -> LlmCleaner {
        LlmCleaner {
            client,
            builder,
            prompt_config,
        }
    }

    pub fn client(&self) -> &LlmClient {
        &self.client
    }

    pub fn prompt_config(&self) -> PromptConfig {
        self.prompt_config
    }

    /// The region handed to the model: the smallest enclosing function, else
    /// the enclosing top-level statement, else the finding's own lines.
    pub fn context_region(unit: &SourceUnit, finding: &Finding) -> Span {
        let span = if let Some(def) = unit.enclosing_function(finding.span) {
            def.span
        } else if let Some(stmt) = unit.enclosing_top_level(finding.span) {
            stmt.span()
        } else {
            finding.span
        };
        whole_lines(unit.text(), span)
    }

    pub fn clean(&self, unit: &SourceUnit, finding: &Finding, scanner: &Scanner) -> RefactorOutcome {
        let region = Self::context_region(unit, finding);
        let code = unit.slice(region);
        let region_line = unit.lines().position(region.start).line;
        let finding_line = unit.lines().position(finding.span.start).line;

        let fail = |diagnostics: String| RefactorOutcome {
            status: RefactorStatus::Failed,
            new_text: None,
            diagnostics,
            backend: BackendKind::Llm,
            region: Some(region),
        };

        let indent = line_indent(unit.text(), region.start).to_string();
        let dedented_code = dedent(code);
        let prompt = match self.builder.build(
            finding.kind,
            &dedented_code,
            finding,
            region_line,
            finding_line,
            self.prompt_config,
        ) {
            Ok(p) => p,
            Err(e) => return fail(e.to_string()),
        };

        let request =
            CompletionRequest::for_kind(finding.kind, self.client.config().model.clone(), prompt);
        let raw = match self.client.complete(&request) {
            Ok(r) => r,
            Err(e) => return fail(format!("completion failed: {e}")),
        };
        let sanitized = match sanitize_response(&raw) {
            Ok(s) => s,
            Err(e) => return fail(e.to_string()),
        };

        let mut new_text = indent_by(&sanitized, &indent);
        if code.ends_with('\n') && !new_text.ends_with('\n') {
            new_text.push('\n');
        }

        let mut patches = PatchSet::new();
        patches.push(Patch::replace(region, new_text.clone()));
        let new_unit = match unit.apply(&patches) {
            Ok(u) => u,
            Err(e) => return fail(format!("refactored region does not parse in context: {e}")),
        };

        let new_region = Span::new(region.start, region.start + new_text.len());
        if let Some(diag) = validate_elimination(&new_unit, finding, scanner, new_region, unit) {
            return fail(diag);
        }

        RefactorOutcome {
            status: RefactorStatus::Refactored,
            new_text: Some(new_text),
            diagnostics: String::new(),
            backend: BackendKind::Llm,
            region: Some(region),
        }
    }
}

/// Re-scan the edited region: the cleaned kind must be gone, and a
/// long-parameter-list rewrite must keep the original function defined as an
/// adapter.
fn validate_elimination(
    new_unit: &SourceUnit,
    finding: &Finding,
    scanner: &Scanner,
    new_region: Span,
    original_unit: &SourceUnit,
) -> Option<String> {
    if finding.kind == SmellKind::LongParameterList {
        let original_name = original_unit
            .enclosing_function(finding.span)
            .map(|d| d.name.clone())
            .or_else(|| finding.function.clone());
        if let Some(name) = original_name {
            let still_defined = new_unit.functions().iter().any(|d| d.name == name);
            if !still_defined {
                return Some(format!(
                    "refactoring dropped the original function \"{name}\" (adapter signature required)"
                ));
            }
        }
    }

    let residual = scanner
        .scan(new_unit)
        .into_iter()
        .find(|f| f.kind == finding.kind && f.span.overlaps(new_region));
    residual.map(|f| {
        format!(
            "smell {} still reported at {} after refactoring: {}",
            f.kind, f.span, f.message
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_block_is_extracted() {
        let raw = "```\ndef f():\n    pass\n```";
        assert_eq!(sanitize_response(raw).unwrap(), "def f():\n    pass");
    }

    #[test]
    fn fenced_block_with_language_tag() {
        let raw = "```python\ndef f():\n    pass\n```\n";
        assert_eq!(sanitize_response(raw).unwrap(), "def f():\n    pass");
    }

    #[test]
    fn leading_prose_is_stripped() {
        let raw = "Here is the code:\ndef f():\n    pass";
        assert_eq!(sanitize_response(raw).unwrap(), "def f():\n    pass");
    }

    #[test]
    fn trailing_prose_is_stripped() {
        let raw = "def f():\n    pass\nThis removes the smell as requested.";
        assert_eq!(sanitize_response(raw).unwrap(), "def f():\n    pass");
    }

    #[test]
    fn refusal_is_unusable() {
        assert!(sanitize_response("Sorry, I cannot.").is_err());
    }

    #[test]
    fn indented_snippet_is_dedented() {
        let raw = "    def f():\n        pass";
        assert_eq!(sanitize_response(raw).unwrap(), "def f():\n    pass");
    }
}
