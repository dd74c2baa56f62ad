//! Deterministic rewrites for the mechanical smell kinds.

use super::rename::{rename_symbol, to_snake_case, RenameError, RenameOptions};
use super::{BackendKind, RefactorOutcome, RefactorStatus};
use crate::detectors::{Finding, Scanner, SmellKind};
use crate::pysource::ast::*;
use crate::pysource::{line_indent, whole_lines, Patch, PatchSet, SourceUnit};
use crate::span::Span;

#[derive(Debug, Clone, Copy, Default)]
pub struct RulesOptions {
    pub rename_exports: bool,
}

/// Applies the deterministic fix for one finding, or fails for kinds and
/// shapes the rules backend does not cover (those route to the llm backend).
pub fn apply_rule_fix(
    unit: &SourceUnit,
    finding: &Finding,
    scanner: &Scanner,
    opts: RulesOptions,
) -> RefactorOutcome {
    let result = match finding.kind {
        SmellKind::CommentedCode => delete_lines(unit, finding.span),
        SmellKind::DeadCode => delete_lines(unit, finding.span),
        SmellKind::SelfAssignedVariables => fix_self_assignment(unit, finding),
        SmellKind::CollapsibleIfStatements => merge_collapsible(unit, finding),
        SmellKind::EmptyNestedCodeBlocks => remove_else_pass(unit, finding),
        SmellKind::NamingConvention => fix_naming(unit, finding, scanner, opts),
        SmellKind::LongParameterList
        | SmellKind::HighCognitiveComplexity
        | SmellKind::IdenticalExpressions
        | SmellKind::ReturnAndYield => Err(format!(
            "rules backend does not support {}",
            finding.kind.as_str()
        )),
    };

    match result {
        Ok(patches) => finalize(unit, finding, &patches),
        Err(diagnostics) => RefactorOutcome {
            status: RefactorStatus::Failed,
            new_text: None,
            diagnostics,
            backend: BackendKind::Rules,
            region: None,
        },
    }
}

/// Applies the patch set, re-parses, and condenses the change into a single
/// region replacement (prefix/suffix diff against the original text).
fn finalize(unit: &SourceUnit, finding: &Finding, patches: &PatchSet) -> RefactorOutcome {
    let new_unit = match unit.apply(patches) {
        Ok(u) => u,
        Err(e) => {
            return RefactorOutcome {
                status: RefactorStatus::Failed,
                new_text: None,
                diagnostics: format!("fix for {} produced invalid text: {e}", finding.kind),
                backend: BackendKind::Rules,
                region: None,
            }
        }
    };
    let (region, new_text) = diff_region(unit.text(), new_unit.text());
    RefactorOutcome {
        status: RefactorStatus::Refactored,
        new_text: Some(new_text),
        diagnostics: String::new(),
        backend: BackendKind::Rules,
        region: Some(region),
    }
}

/// The smallest original-text span whose replacement produces `new`.
pub(super) fn diff_region(old: &str, new: &str) -> (Span, String) {
    let old_b = old.as_bytes();
    let new_b = new.as_bytes();
    let mut prefix = 0;
    while prefix < old_b.len() && prefix < new_b.len() && old_b[prefix] == new_b[prefix] {
        prefix += 1;
    }
    let mut suffix = 0;
    while suffix < old_b.len() - prefix
        && suffix < new_b.len() - prefix
        && old_b[old_b.len() - 1 - suffix] == new_b[new_b.len() - 1 - suffix]
    {
        suffix += 1;
    }
    let region = Span::new(prefix, old.len() - suffix);
    let replacement = new[prefix..new.len() - suffix].to_string();
    (region, replacement)
}

fn delete_lines(unit: &SourceUnit, span: Span) -> Result<PatchSet, String> {
    let mut patches = PatchSet::new();
    patches.push(Patch::delete(whole_lines(unit.text(), span)));
    Ok(patches)
}

fn fix_self_assignment(unit: &SourceUnit, finding: &Finding) -> Result<PatchSet, String> {
    if let Some(branch) = sole_else_branch_of(unit, finding.span) {
        let mut patches = PatchSet::new();
        patches.push(Patch::delete(whole_lines(unit.text(), branch)));
        return Ok(patches);
    }
    unit.delete_statement(finding.span)
        .ok_or_else(|| "self-assignment statement not found".to_string())
}

fn remove_else_pass(unit: &SourceUnit, finding: &Finding) -> Result<PatchSet, String> {
    match sole_else_branch_of(unit, finding.span) {
        Some(branch) => {
            let mut patches = PatchSet::new();
            patches.push(Patch::delete(whole_lines(unit.text(), branch)));
            Ok(patches)
        }
        None => Err("rules backend only removes `else: pass` branches".to_string()),
    }
}

/// Span of the whole `else:` branch when the statement at `stmt_span` is its
/// sole statement.
fn sole_else_branch_of(unit: &SourceUnit, stmt_span: Span) -> Option<Span> {
    let mut found = None;
    crate::pysource::walk_stmts(&unit.tree().body, &mut |stmt| {
        let orelse = match stmt {
            Stmt::If(s) => s.orelse.as_ref(),
            Stmt::For(s) => s.orelse.as_ref(),
            Stmt::While(s) => s.orelse.as_ref(),
            Stmt::Try(s) => s.orelse.as_ref(),
            _ => None,
        };
        if let Some(branch) = orelse {
            if branch.body.len() == 1 && branch.body[0].span() == stmt_span {
                found = Some(branch.span);
            }
        }
    });
    found
}

fn merge_collapsible(unit: &SourceUnit, finding: &Finding) -> Result<PatchSet, String> {
    let outer = find_if(unit, finding.span).ok_or("outer if not found at finding span")?;
    let [Stmt::If(inner)] = outer.body.as_slice() else {
        return Err("if body is not exactly one nested if".to_string());
    };
    if !outer.elifs.is_empty()
        || outer.orelse.is_some()
        || !inner.elifs.is_empty()
        || inner.orelse.is_some()
    {
        return Err("branches present; not a collapsible pair".to_string());
    }

    let text = unit.text();
    let outer_indent = line_indent(text, outer.span.start);
    let inner_indent = line_indent(text, inner.span.start);
    if !inner_indent.starts_with(outer_indent) {
        return Err("inconsistent indentation between nested ifs".to_string());
    }
    let strip = inner_indent.len() - outer_indent.len();

    let cond1 = condition_text(unit, &outer.test);
    let cond2 = condition_text(unit, &inner.test);
    let header = format!("{outer_indent}if {cond1} and {cond2}:");

    let first_body = inner.body.first().expect("if body is never empty");
    let body_start_line = unit.lines().position(first_body.span().start).line;
    let inner_line = unit.lines().position(inner.span.start).line;

    let region = whole_lines(text, outer.span);
    let mut new_text = String::new();
    if body_start_line == inner_line {
        // Inline body: `if c2: work()`.
        let body_text = &text[first_body.span().start..inner.body.last().unwrap().span().end];
        new_text.push_str(&header);
        new_text.push(' ');
        new_text.push_str(body_text);
        new_text.push('\n');
    } else {
        new_text.push_str(&header);
        new_text.push('\n');
        let body_span = Span::new(
            first_body.span().start,
            inner.body.last().unwrap().span().end,
        );
        let body_lines_span = whole_lines(text, body_span);
        for line in text[body_lines_span.start..body_lines_span.end].split_inclusive('\n') {
            if line.trim().is_empty() {
                new_text.push_str(line);
            } else if line.len() >= strip && line[..strip].chars().all(char::is_whitespace) {
                new_text.push_str(&line[strip..]);
            } else {
                return Err("body line shallower than expected indentation".to_string());
            }
        }
        if !new_text.ends_with('\n') && region.end <= text.len() && text[..region.end].ends_with('\n') {
            new_text.push('\n');
        }
    }

    let mut patches = PatchSet::new();
    patches.push(Patch::replace(region, new_text));
    Ok(patches)
}

/// Source text of a condition, parenthesized when its top-level form binds
/// looser than `and`.
fn condition_text(unit: &SourceUnit, test: &Expr) -> String {
    let raw = unit.slice(test.span());
    let needs_parens = match test {
        Expr::BoolOp(b) => b.op == BoolOpKind::Or,
        Expr::IfExp(_) | Expr::Lambda(_) | Expr::NamedExpr(_) => true,
        _ => false,
    };
    if needs_parens {
        format!("({raw})")
    } else {
        raw.to_string()
    }
}

fn find_if<'a>(unit: &'a SourceUnit, span: Span) -> Option<&'a IfStmt> {
    let mut found = None;
    crate::pysource::walk_stmts(&unit.tree().body, &mut |stmt| {
        if let Stmt::If(s) = stmt {
            if s.span == span {
                found = Some(s);
            }
        }
    });
    found
}

fn fix_naming(
    unit: &SourceUnit,
    finding: &Finding,
    scanner: &Scanner,
    opts: RulesOptions,
) -> Result<PatchSet, String> {
    let old = unit.slice(finding.span).to_string();
    let candidate = to_snake_case(&old);
    let is_function_name = unit
        .functions()
        .iter()
        .any(|def| def.name_span == finding.span);
    let regex = if is_function_name {
        &scanner.function_regex
    } else {
        &scanner.variable_regex
    };
    if candidate == old || !regex.is_match(&candidate) {
        return Err(format!(
            "no deterministic compliant rename for \"{old}\" (candidate \"{candidate}\")"
        ));
    }
    let renamed = rename_symbol(
        unit,
        finding.span,
        &candidate,
        RenameOptions {
            rename_exports: opts.rename_exports,
        },
    )
    .map_err(|e| match e {
        RenameError::NameCollision(n) => format!("rename collision on \"{n}\""),
        RenameError::ScopeEscape(msg) => msg,
        other => other.to_string(),
    })?;
    // Re-express the rename as patches against the original text.
    let (region, replacement) = diff_region(unit.text(), renamed.text());
    let mut patches = PatchSet::new();
    patches.push(Patch::replace(region, replacement));
    Ok(patches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{scan, DetectorConfig};

    fn one_finding(unit: &SourceUnit, kind: SmellKind) -> Finding {
        scan(unit, &DetectorConfig::default())
            .unwrap()
            .into_iter()
            .find(|f| f.kind == kind)
            .expect("expected a finding of the requested kind")
    }

    fn scanner() -> Scanner {
        Scanner::new(DetectorConfig::default()).unwrap()
    }

    fn apply(unit: &SourceUnit, outcome: &RefactorOutcome) -> SourceUnit {
        let mut patches = PatchSet::new();
        patches.push(Patch::replace(
            outcome.region.unwrap(),
            outcome.new_text.clone().unwrap(),
        ));
        unit.apply(&patches).unwrap()
    }

    #[test]
    fn dead_code_fix_removes_unreachable_statements() {
        let src = "def fnx(rrr):\n    return 1\n    for idx in rrr:\n        use(idx)\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let finding = one_finding(&unit, SmellKind::DeadCode);
        let outcome = apply_rule_fix(&unit, &finding, &scanner(), RulesOptions::default());
        assert_eq!(outcome.status, RefactorStatus::Refactored);
        let fixed = apply(&unit, &outcome);
        assert_eq!(fixed.text(), "def fnx(rrr):\n    return 1\n");
    }

    #[test]
    fn collapsible_merge_matches_expected_form() {
        let src = "if c1:\n    if c2:\n        work()\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let finding = one_finding(&unit, SmellKind::CollapsibleIfStatements);
        let outcome = apply_rule_fix(&unit, &finding, &scanner(), RulesOptions::default());
        assert_eq!(outcome.status, RefactorStatus::Refactored);
        let fixed = apply(&unit, &outcome);
        assert_eq!(fixed.text(), "if c1 and c2:\n    work()\n");
    }

    #[test]
    fn collapsible_merge_parenthesizes_or_conditions() {
        let src = "if a or b:\n    if c2:\n        work()\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let finding = one_finding(&unit, SmellKind::CollapsibleIfStatements);
        let outcome = apply_rule_fix(&unit, &finding, &scanner(), RulesOptions::default());
        let fixed = apply(&unit, &outcome);
        assert_eq!(fixed.text(), "if (a or b) and c2:\n    work()\n");
    }

    #[test]
    fn collapsible_merge_keeps_multi_statement_bodies() {
        let src = "\
def guard(flag, value):
    if flag:
        if value:
            first()
            second()
    return value
";
        let unit = SourceUnit::parse_str(src).unwrap();
        let finding = one_finding(&unit, SmellKind::CollapsibleIfStatements);
        let outcome = apply_rule_fix(&unit, &finding, &scanner(), RulesOptions::default());
        let fixed = apply(&unit, &outcome);
        assert_eq!(
            fixed.text(),
            "\
def guard(flag, value):
    if flag and value:
        first()
        second()
    return value
"
        );
    }

    #[test]
    fn self_assignment_in_else_removes_the_branch() {
        let src = "if port:\n    addr = host\nelse:\n    addr = addr\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let finding = one_finding(&unit, SmellKind::SelfAssignedVariables);
        let outcome = apply_rule_fix(&unit, &finding, &scanner(), RulesOptions::default());
        let fixed = apply(&unit, &outcome);
        assert_eq!(fixed.text(), "if port:\n    addr = host\n");
    }

    #[test]
    fn plain_self_assignment_is_deleted() {
        let src = "x = 1\nx = x\ny = 2\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let finding = one_finding(&unit, SmellKind::SelfAssignedVariables);
        let outcome = apply_rule_fix(&unit, &finding, &scanner(), RulesOptions::default());
        let fixed = apply(&unit, &outcome);
        assert_eq!(fixed.text(), "x = 1\ny = 2\n");
    }

    #[test]
    fn commented_code_block_is_deleted() {
        let src = "keep = 1\n# old = compute(keep)\n# use(old)\nstill = keep\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let finding = one_finding(&unit, SmellKind::CommentedCode);
        let outcome = apply_rule_fix(&unit, &finding, &scanner(), RulesOptions::default());
        let fixed = apply(&unit, &outcome);
        assert_eq!(fixed.text(), "keep = 1\nstill = keep\n");
    }

    #[test]
    fn else_pass_branch_is_deleted() {
        let src = "if ready:\n    launch()\nelse:\n    pass\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let finding = one_finding(&unit, SmellKind::EmptyNestedCodeBlocks);
        let outcome = apply_rule_fix(&unit, &finding, &scanner(), RulesOptions::default());
        let fixed = apply(&unit, &outcome);
        assert_eq!(fixed.text(), "if ready:\n    launch()\n");
    }

    #[test]
    fn empty_if_body_routes_to_llm() {
        let src = "if ready:\n    pass\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let finding = one_finding(&unit, SmellKind::EmptyNestedCodeBlocks);
        let outcome = apply_rule_fix(&unit, &finding, &scanner(), RulesOptions::default());
        assert_eq!(outcome.status, RefactorStatus::Failed);
        assert!(outcome.new_text.is_none());
    }

    #[test]
    fn naming_fix_renames_local_camel_case() {
        let src = "def worker():\n    BadLocal = 1\n    return BadLocal\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let finding = one_finding(&unit, SmellKind::NamingConvention);
        let outcome = apply_rule_fix(&unit, &finding, &scanner(), RulesOptions::default());
        assert_eq!(outcome.status, RefactorStatus::Refactored, "{}", outcome.diagnostics);
        let fixed = apply(&unit, &outcome);
        assert_eq!(
            fixed.text(),
            "def worker():\n    bad_local = 1\n    return bad_local\n"
        );
    }

    #[test]
    fn naming_fix_refuses_exported_function_without_flag() {
        let src = "def BadTop():\n    return 1\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let finding = one_finding(&unit, SmellKind::NamingConvention);
        let outcome = apply_rule_fix(&unit, &finding, &scanner(), RulesOptions::default());
        assert_eq!(outcome.status, RefactorStatus::Failed);

        let outcome = apply_rule_fix(
            &unit,
            &finding,
            &scanner(),
            RulesOptions {
                rename_exports: true,
            },
        );
        assert_eq!(outcome.status, RefactorStatus::Refactored);
        let fixed = apply(&unit, &outcome);
        assert_eq!(fixed.text(), "def bad_top():\n    return 1\n");
    }

    #[test]
    fn unsupported_kinds_fail_with_diagnostic() {
        let src = "def gen(items):\n    for item in items:\n        yield item\n    return 0\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let finding = one_finding(&unit, SmellKind::ReturnAndYield);
        let outcome = apply_rule_fix(&unit, &finding, &scanner(), RulesOptions::default());
        assert_eq!(outcome.status, RefactorStatus::Failed);
        assert!(outcome.diagnostics.contains("does not support"));
    }
}
