//! Scope-aware symbol renaming.
//!
//! Renames one binding and every same-scope reference, leaving shadowing inner
//! bindings untouched. The result is re-analyzed and its binding structure
//! compared against the original, so a rename that would change any
//! resolution never survives.

use crate::pysource::ast::*;
use crate::pysource::{Patch, PatchSet, SourceUnit};
use crate::scope::{self, BindingKind, ScopeId, ScopeKind, ScopeTree};
use crate::span::Span;

#[derive(Debug, thiserror::Error)]
pub enum RenameError {
    #[error("new name {0:?} does not match the applicable naming pattern")]
    InvalidName(String),
    #[error("name {0:?} is already bound or would be captured in the affected scope")]
    NameCollision(String),
    #[error("{0}")]
    ScopeEscape(String),
    #[error("no binding found at the requested location")]
    UnknownTarget,
    #[error("rename produced invalid text: {0}")]
    Render(String),
    #[error("rename would alter binding structure: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RenameOptions {
    /// Allow renaming module-level public definitions whose callers in other
    /// files are invisible to this analysis.
    pub rename_exports: bool,
}

/// Renames the binding whose declaration or reference sits at `target`.
pub fn rename_symbol(
    unit: &SourceUnit,
    target: Span,
    new_name: &str,
    opts: RenameOptions,
) -> Result<SourceUnit, RenameError> {
    if !is_identifier(new_name) {
        return Err(RenameError::InvalidName(new_name.to_string()));
    }
    let tree = scope::analyze(unit);
    let (bscope, old_name) = tree.binding_at(target).ok_or(RenameError::UnknownTarget)?;
    if old_name == new_name {
        return Err(RenameError::InvalidName(new_name.to_string()));
    }
    let binding_kind = tree
        .binding(bscope, &old_name)
        .map(|b| b.kind)
        .unwrap_or(BindingKind::Local);

    check_scope_escape(&tree, bscope, &old_name, binding_kind, opts)?;
    check_collisions(&tree, bscope, &old_name, new_name)?;

    let mut patches = PatchSet::new();
    let mut touched: Vec<Span> = Vec::new();
    for reference in tree.references() {
        if reference.resolved == Some(bscope) && reference.name == old_name {
            touched.push(reference.span);
            patches.push(Patch::replace(reference.span, new_name));
        }
    }
    if let Some(binding) = tree.binding(bscope, &old_name) {
        for span in &binding.decl_spans {
            if !touched.contains(span) {
                patches.push(Patch::replace(*span, new_name));
            }
        }
    }
    if binding_kind == BindingKind::Param {
        for span in keyword_arg_spans(unit, &tree, bscope, &old_name) {
            patches.push(Patch::replace(span, new_name));
        }
    }

    let renamed = unit
        .apply(&patches)
        .map_err(|e| RenameError::Render(e.to_string()))?;

    let after = scope::analyze(&renamed);
    let expected = tree.fingerprint(Some((&bscope, &old_name, new_name)));
    let actual = after.fingerprint(None);
    if expected != actual {
        return Err(RenameError::Validation(format!(
            "resolution fingerprint changed ({} vs {} edges)",
            expected.len(),
            actual.len()
        )));
    }
    Ok(renamed)
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn check_scope_escape(
    tree: &ScopeTree,
    bscope: ScopeId,
    name: &str,
    kind: BindingKind,
    opts: RenameOptions,
) -> Result<(), RenameError> {
    let scope = tree.scope(bscope);

    if kind == BindingKind::Function && scope.kind == ScopeKind::Class {
        return Err(RenameError::ScopeEscape(format!(
            "method \"{name}\" is reachable through attribute access; rename it manually or via the llm backend"
        )));
    }

    let exported = scope.kind == ScopeKind::Module && !name.starts_with('_');
    if exported && !opts.rename_exports {
        return Err(RenameError::ScopeEscape(format!(
            "\"{name}\" is a module-level export; callers in other files are invisible (pass --rename-exports to force)"
        )));
    }

    if kind == BindingKind::Param {
        // Keyword callers outside this file cannot be updated.
        let parent = scope.parent.map(|p| tree.scope(p));
        let owner_public = scope
            .name
            .as_deref()
            .is_some_and(|owner| !owner.starts_with('_'));
        let owner_visible = matches!(
            parent.map(|p| p.kind),
            Some(ScopeKind::Module) | Some(ScopeKind::Class)
        );
        if owner_public && owner_visible && !opts.rename_exports {
            return Err(RenameError::ScopeEscape(format!(
                "parameter \"{name}\" of a publicly visible function may be passed by keyword from other files (pass --rename-exports to force)"
            )));
        }
    }
    Ok(())
}

fn check_collisions(
    tree: &ScopeTree,
    bscope: ScopeId,
    old_name: &str,
    new_name: &str,
) -> Result<(), RenameError> {
    if tree.binding(bscope, new_name).is_some() {
        return Err(RenameError::NameCollision(new_name.to_string()));
    }
    for reference in tree.references() {
        // An existing use of new_name must not start resolving to our scope.
        if reference.name == new_name {
            let with_rename = tree.resolve_from(reference.site, new_name, Some((bscope, new_name)));
            if with_rename != reference.resolved {
                return Err(RenameError::NameCollision(new_name.to_string()));
            }
        }
        // A renamed use must not get captured by an inner new_name binding.
        if reference.resolved == Some(bscope) && reference.name == old_name {
            let seen = tree.resolve_from(reference.site, new_name, Some((bscope, new_name)));
            if seen != Some(bscope) {
                return Err(RenameError::NameCollision(new_name.to_string()));
            }
        }
    }
    Ok(())
}

/// Spans of keyword-argument names at same-file call sites of the function
/// owning a renamed parameter.
fn keyword_arg_spans(
    unit: &SourceUnit,
    tree: &ScopeTree,
    param_scope: ScopeId,
    param_name: &str,
) -> Vec<Span> {
    let scope = tree.scope(param_scope);
    let (Some(parent), Some(fn_name)) = (scope.parent, scope.name.as_deref()) else {
        return Vec::new();
    };
    // Find call sites whose callee resolves to this function's binding.
    let mut callee_spans: Vec<Span> = Vec::new();
    for r in tree.references() {
        if r.name == fn_name && r.resolved == Some(parent) {
            callee_spans.push(r.span);
        }
    }
    let mut spans = Vec::new();
    let mut visit = |expr: &Expr| {
        if let Expr::Call(call) = expr {
            if let Expr::Name(callee) = call.func.as_ref() {
                if callee_spans.contains(&callee.span) {
                    for kw in &call.keywords {
                        if kw.arg.as_deref() == Some(param_name) {
                            if let Some(span) = kw.arg_span {
                                spans.push(span);
                            }
                        }
                    }
                }
            }
        }
    };
    crate::pysource::walk_stmts(&unit.tree().body, &mut |stmt| {
        for e in crate::pysource::stmt_exprs(stmt) {
            crate::pysource::walk_expr(e, &mut visit);
        }
    });
    spans
}

/// Lower-snake-case conversion used by the deterministic naming fix.
pub fn to_snake_case(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 4);
    let chars: Vec<char> = name.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_uppercase() {
            let prev = i.checked_sub(1).map(|p| chars[p]);
            let next = chars.get(i + 1);
            let boundary = match prev {
                None => false,
                Some(p) if p == '_' => false,
                Some(p) if p.is_lowercase() || p.is_ascii_digit() => true,
                Some(p) if p.is_uppercase() => next.is_some_and(|n| n.is_lowercase()),
                _ => false,
            };
            if boundary {
                out.push('_');
            }
            for low in c.to_lowercase() {
                out.push(low);
            }
        } else {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pysource::SourceUnit;

    fn name_span(unit: &SourceUnit, text: &str, nth: usize) -> Span {
        let mut found = Vec::new();
        let src = unit.text();
        let mut from = 0;
        while let Some(pos) = src[from..].find(text) {
            let abs = from + pos;
            let before_ok = abs == 0
                || !src[..abs]
                    .chars()
                    .next_back()
                    .is_some_and(|c| c.is_alphanumeric() || c == '_');
            let after = &src[abs + text.len()..];
            let after_ok = !after
                .chars()
                .next()
                .is_some_and(|c| c.is_alphanumeric() || c == '_');
            if before_ok && after_ok {
                found.push(Span::new(abs, abs + text.len()));
            }
            from = abs + text.len();
        }
        found[nth]
    }

    #[test]
    fn renames_definition_and_same_scope_references() {
        let src = "def _eq_fn(aaa, bbb):\n    return aaa == bbb\n\nresult = _eq_fn(1, 2) and _eq_fn(3, 4)\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let span = name_span(&unit, "_eq_fn", 0);
        let renamed = rename_symbol(&unit, span, "_equality", RenameOptions::default()).unwrap();
        assert_eq!(
            renamed.text(),
            "def _equality(aaa, bbb):\n    return aaa == bbb\n\nresult = _equality(1, 2) and _equality(3, 4)\n"
        );
    }

    #[test]
    fn exported_function_requires_opt_in() {
        let src = "def Eq(aaa, bbb):\n    return aaa == bbb\n\nres = Eq(1, 2)\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let span = name_span(&unit, "Eq", 0);
        let err = rename_symbol(&unit, span, "equality", RenameOptions::default()).unwrap_err();
        assert!(matches!(err, RenameError::ScopeEscape(_)));

        let opts = RenameOptions {
            rename_exports: true,
        };
        let renamed = rename_symbol(&unit, span, "equality", opts).unwrap();
        assert_eq!(
            renamed.text(),
            "def equality(aaa, bbb):\n    return aaa == bbb\n\nres = equality(1, 2)\n"
        );
    }

    #[test]
    fn inner_shadowing_binding_is_untouched() {
        let src = "def outer():\n    val = 1\n    fnc = lambda val: val + 1\n    return fnc(val)\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let span = name_span(&unit, "val", 0);
        let renamed = rename_symbol(&unit, span, "qty", RenameOptions::default()).unwrap();
        assert_eq!(
            renamed.text(),
            "def outer():\n    qty = 1\n    fnc = lambda val: val + 1\n    return fnc(qty)\n"
        );
    }

    #[test]
    fn collision_with_existing_binding() {
        let src = "def outer():\n    old = 1\n    fresh = 2\n    return old + fresh\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let span = name_span(&unit, "old", 0);
        let err = rename_symbol(&unit, span, "fresh", RenameOptions::default()).unwrap_err();
        assert!(matches!(err, RenameError::NameCollision(_)));
    }

    #[test]
    fn rename_that_would_capture_an_outer_reference_is_rejected() {
        let src = "\
fresh = 2


def outer():
    bad = 1

    def inner():
        return fresh

    return bad + inner()
";
        let unit = SourceUnit::parse_str(src).unwrap();
        let span = name_span(&unit, "bad", 0);
        let err = rename_symbol(&unit, span, "fresh", RenameOptions::default()).unwrap_err();
        assert!(matches!(err, RenameError::NameCollision(_)));
    }

    #[test]
    fn param_rename_updates_keyword_call_sites() {
        let src = "def _scale(Factor, value):\n    return Factor * value\n\nout = _scale(Factor=2, value=3)\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let span = name_span(&unit, "Factor", 0);
        let renamed = rename_symbol(&unit, span, "factor", RenameOptions::default()).unwrap();
        assert_eq!(
            renamed.text(),
            "def _scale(factor, value):\n    return factor * value\n\nout = _scale(factor=2, value=3)\n"
        );
    }

    #[test]
    fn global_declared_names_rename_together() {
        let src = "_tally = 0\n\n\ndef _bump():\n    global _tally\n    _tally += 1\n";
        let unit = SourceUnit::parse_str(src).unwrap();
        let span = name_span(&unit, "_tally", 0);
        let renamed = rename_symbol(&unit, span, "_count", RenameOptions::default()).unwrap();
        assert_eq!(
            renamed.text(),
            "_count = 0\n\n\ndef _bump():\n    global _count\n    _count += 1\n"
        );
    }

    #[test]
    fn snake_case_conversion() {
        assert_eq!(to_snake_case("BadName"), "bad_name");
        assert_eq!(to_snake_case("badName"), "bad_name");
        assert_eq!(to_snake_case("HTTPServer"), "http_server");
        assert_eq!(to_snake_case("already_good"), "already_good");
        assert_eq!(to_snake_case("_Private"), "_private");
        assert_eq!(to_snake_case("Eq"), "eq");
    }
}
