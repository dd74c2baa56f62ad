//! Removing findings from source units: a deterministic rules backend and an
//! LLM-prompted backend behind one entry point.

mod llm;
pub mod prompt;
pub mod rename;
mod rules_backend;

use serde::{Deserialize, Serialize};

pub use llm::{sanitize_response, LlmCleaner, UnusableResponse};
pub use rules_backend::{apply_rule_fix, RulesOptions};

use crate::detectors::{Finding, Scanner, SmellKind};
use crate::pysource::ast::{Expr, Stmt};
use crate::pysource::{Patch, PatchSet, SourceUnit};
use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefactorStatus {
    Refactored,
    SkippedFalsePositive,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BackendKind {
    Rules,
    Llm,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "rules" => Ok(BackendKind::Rules),
            "llm" => Ok(BackendKind::Llm),
            other => Err(format!("unknown backend: {other}")),
        }
    }
}

/// Result of one cleaning attempt. `new_text` is the full replacement for
/// `region` and is present exactly when the attempt refactored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefactorOutcome {
    pub status: RefactorStatus,
    pub new_text: Option<String>,
    pub diagnostics: String,
    pub backend: BackendKind,
    pub region: Option<Span>,
}

impl RefactorOutcome {
    pub fn skipped(backend: BackendKind, diagnostics: impl Into<String>) -> RefactorOutcome {
        RefactorOutcome {
            status: RefactorStatus::SkippedFalsePositive,
            new_text: None,
            diagnostics: diagnostics.into(),
            backend,
            region: None,
        }
    }

    /// Applies this outcome to the unit it was computed against.
    pub fn apply_to(&self, unit: &SourceUnit) -> Result<SourceUnit, crate::pysource::RenderError> {
        match (&self.status, &self.new_text, &self.region) {
            (RefactorStatus::Refactored, Some(text), Some(region)) => {
                let mut patches = PatchSet::new();
                patches.push(Patch::replace(*region, text.clone()));
                unit.apply(&patches)
            }
            _ => Ok(unit.clone()),
        }
    }
}

/// Backend selection for [`clean_finding`].
pub enum Cleaner<'a> {
    Rules(RulesOptions),
    Llm(&'a LlmCleaner),
}

impl Cleaner<'_> {
    pub fn kind(&self) -> BackendKind {
        match self {
            Cleaner::Rules(_) => BackendKind::Rules,
            Cleaner::Llm(_) => BackendKind::Llm,
        }
    }
}

/// Removes one finding from the unit.
///
/// Return-and-yield findings on generators whose yields are all `yield from`
/// are the analyzer's known false positive: both backends skip them without
/// any model call. Rules fixes are validated by re-parse; llm fixes
/// additionally by re-scanning the edited region.
pub fn clean_finding(
    unit: &SourceUnit,
    finding: &Finding,
    cleaner: &Cleaner<'_>,
    scanner: &Scanner,
) -> RefactorOutcome {
    if finding.kind == SmellKind::ReturnAndYield && is_yield_from_only(unit, finding) {
        return RefactorOutcome::skipped(
            cleaner.kind(),
            "generator delegates with `yield from` (Python 3.3+); value-carrying return is \
             intentional, code is smell-clean",
        );
    }
    match cleaner {
        Cleaner::Rules(opts) => {
            let outcome = apply_rule_fix(unit, finding, scanner, *opts);
            verify_rules_outcome(unit, finding, scanner, outcome)
        }
        Cleaner::Llm(llm) => llm.clean(unit, finding, scanner),
    }
}

/// Enforces target-kind elimination on rules outcomes instead of assuming it.
fn verify_rules_outcome(
    unit: &SourceUnit,
    finding: &Finding,
    scanner: &Scanner,
    outcome: RefactorOutcome,
) -> RefactorOutcome {
    if outcome.status != RefactorStatus::Refactored {
        return outcome;
    }
    let Ok(new_unit) = outcome.apply_to(unit) else {
        return RefactorOutcome {
            status: RefactorStatus::Failed,
            new_text: None,
            diagnostics: "validated fix failed to re-apply".to_string(),
            backend: outcome.backend,
            region: outcome.region,
        };
    };
    let region = outcome.region.expect("refactored outcome carries a region");
    let new_len = outcome.new_text.as_ref().map(String::len).unwrap_or(0);
    let new_region = Span::new(region.start, region.start + new_len);
    let residual = scanner.scan(&new_unit).into_iter().find(|f| {
        f.kind == finding.kind
            && f.span.overlaps(new_region)
            && corresponds(unit, &new_unit, finding, f)
    });
    match residual {
        Some(f) => RefactorOutcome {
            status: RefactorStatus::Failed,
            new_text: None,
            diagnostics: format!("fix left a residual {} finding at {}", f.kind, f.span),
            backend: outcome.backend,
            region: outcome.region,
        },
        None => outcome,
    }
}

/// Whether a residual finding is the same smell instance rather than a
/// different one that happens to share the region (a second bad name, a
/// remaining nested pair that was its own finding).
fn corresponds(
    old_unit: &SourceUnit,
    new_unit: &SourceUnit,
    original: &Finding,
    residual: &Finding,
) -> bool {
    match original.kind {
        SmellKind::NamingConvention => {
            new_unit.slice(residual.span) == old_unit.slice(original.span)
        }
        SmellKind::CollapsibleIfStatements => {
            // Merging the reported pair can legally expose the chain's next
            // pair, which the scan reported as its own finding.
            false
        }
        _ => true,
    }
}

/// True when every yield in the finding's function is a `yield from`.
fn is_yield_from_only(unit: &SourceUnit, finding: &Finding) -> bool {
    let Some(def) = unit.enclosing_function(finding.span) else {
        return false;
    };
    let mut plain_yield = false;
    let mut yield_from = false;
    visit_own_frame(&def.body, &mut |expr: &Expr| match expr {
        Expr::Yield(_) => plain_yield = true,
        Expr::YieldFrom(_) => yield_from = true,
        _ => {}
    });
    yield_from && !plain_yield
}

fn visit_own_frame(stmts: &[Stmt], f: &mut impl FnMut(&Expr)) {
    for stmt in stmts {
        if matches!(stmt, Stmt::FunctionDef(_) | Stmt::ClassDef(_)) {
            continue;
        }
        for e in crate::pysource::stmt_exprs(stmt) {
            visit_no_lambda(e, f);
        }
        for block in crate::pysource::stmt_blocks(stmt) {
            visit_own_frame(block.stmts, f);
        }
    }
}

fn visit_no_lambda(expr: &Expr, f: &mut impl FnMut(&Expr)) {
    if matches!(expr, Expr::Lambda(_)) {
        return;
    }
    f(expr);
    crate::pysource::walk_expr(expr, &mut |e| {
        if !matches!(e, Expr::Lambda(_)) && !std::ptr::eq(e, expr) {
            f(e);
        }
    });
}
