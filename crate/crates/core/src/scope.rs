//! Scope and binding analysis for Python sources.
//!
//! Two-phase: first collect every scope with its bindings (a store anywhere in
//! a function makes the name local to the whole function), then resolve each
//! name occurrence along the LEGB chain. Class scopes are invisible to nested
//! scopes; `global`/`nonlocal` redirect stores and loads.

use std::collections::{BTreeMap, BTreeSet};

use crate::pysource::ast::*;
use crate::pysource::SourceUnit;
use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScopeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeKind {
    Module,
    Function,
    Lambda,
    Class,
    Comprehension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingKind {
    Param,
    Local,
    Function,
    Class,
    Import,
}

#[derive(Debug, Clone)]
pub struct Binding {
    pub kind: BindingKind,
    /// Definition sites that are not `Name` nodes (def names, params, import
    /// aliases, except-as names); `Name`-node stores appear as references.
    pub decl_spans: Vec<Span>,
}

#[derive(Debug, Clone)]
pub struct Scope {
    pub id: ScopeId,
    pub kind: ScopeKind,
    pub parent: Option<ScopeId>,
    pub name: Option<String>,
    pub span: Span,
    pub bindings: BTreeMap<String, Binding>,
    pub globals: BTreeSet<String>,
    pub nonlocals: BTreeSet<String>,
}

/// One `Name` occurrence (or `global`/`nonlocal` declaration name).
#[derive(Debug, Clone)]
pub struct Reference {
    pub name: String,
    pub span: Span,
    pub site: ScopeId,
    pub is_store: bool,
    /// Scope whose binding this occurrence refers to; `None` for builtins and
    /// other unresolved names.
    pub resolved: Option<ScopeId>,
}

#[derive(Debug)]
pub struct ScopeTree {
    scopes: Vec<Scope>,
    references: Vec<Reference>,
}

impl ScopeTree {
    pub fn scopes(&self) -> &[Scope] {
        &self.scopes
    }

    pub fn scope(&self, id: ScopeId) -> &Scope {
        &self.scopes[id.0]
    }

    pub fn module_scope(&self) -> ScopeId {
        ScopeId(0)
    }

    /// References in document order.
    pub fn references(&self) -> &[Reference] {
        &self.references
    }

    /// The binding referenced or declared by the name token at `span`.
    pub fn binding_at(&self, span: Span) -> Option<(ScopeId, String)> {
        for r in &self.references {
            if r.span == span || r.span.contains(span) {
                return r.resolved.map(|s| (s, r.name.clone()));
            }
        }
        for scope in &self.scopes {
            for (name, binding) in &scope.bindings {
                if binding.decl_spans.iter().any(|s| *s == span || s.contains(span)) {
                    return Some((scope.id, name.clone()));
                }
            }
        }
        None
    }

    /// Name-independent scope path (kinds and sibling ordinals), stable under
    /// renames.
    pub fn scope_path(&self, id: ScopeId) -> String {
        let mut parts = Vec::new();
        let mut cur = Some(id);
        while let Some(c) = cur {
            let scope = self.scope(c);
            let ordinal = self
                .scopes
                .iter()
                .filter(|s| s.parent == scope.parent && s.id.0 < c.0)
                .count();
            let tag = match scope.kind {
                ScopeKind::Module => "m".to_string(),
                ScopeKind::Function => format!("f{ordinal}"),
                ScopeKind::Lambda => format!("l{ordinal}"),
                ScopeKind::Class => format!("c{ordinal}"),
                ScopeKind::Comprehension => format!("g{ordinal}"),
            };
            parts.push(tag);
            cur = scope.parent;
        }
        parts.reverse();
        parts.join("/")
    }

    pub fn binding(&self, scope: ScopeId, name: &str) -> Option<&Binding> {
        self.scopes[scope.0].bindings.get(name)
    }

    /// Resolves `name` as seen from `site`, optionally pretending one extra
    /// binding exists. Used to predict whether a rename would capture.
    pub fn resolve_from(
        &self,
        site: ScopeId,
        name: &str,
        extra: Option<(ScopeId, &str)>,
    ) -> Option<ScopeId> {
        let has = |scope: ScopeId, n: &str| {
            self.scopes[scope.0].bindings.contains_key(n)
                || extra.is_some_and(|(s, en)| s == scope && en == n)
        };
        let s = &self.scopes[site.0];
        if s.globals.contains(name) {
            return has(ScopeId(0), name).then_some(ScopeId(0));
        }
        if s.nonlocals.contains(name) {
            let mut cur = s.parent;
            while let Some(c) = cur {
                let cs = &self.scopes[c.0];
                if matches!(cs.kind, ScopeKind::Function | ScopeKind::Lambda) && has(c, name) {
                    return Some(c);
                }
                cur = cs.parent;
            }
            return None;
        }
        let mut cur = Some(site);
        while let Some(c) = cur {
            let cs = &self.scopes[c.0];
            let visible = c == site || cs.kind != ScopeKind::Class;
            if visible && has(c, name) {
                return Some(c);
            }
            cur = cs.parent;
        }
        None
    }

    /// Document-ordered resolution edges: (resolved scope path or "?", name).
    /// `rename` substitutes the new name for references to one binding, so a
    /// correct rename yields an identical fingerprint.
    pub fn fingerprint(&self, rename: Option<(&ScopeId, &str, &str)>) -> Vec<(String, String)> {
        self.references
            .iter()
            .map(|r| {
                let path = r
                    .resolved
                    .map(|s| self.scope_path(s))
                    .unwrap_or_else(|| "?".to_string());
                let name = match rename {
                    Some((scope, old, new))
                        if r.resolved.as_ref() == Some(scope) && r.name == old =>
                    {
                        new.to_string()
                    }
                    _ => r.name.clone(),
                };
                (path, name)
            })
            .collect()
    }
}

pub fn analyze(unit: &SourceUnit) -> ScopeTree {
    let mut builder = Builder {
        scopes: vec![Scope {
            id: ScopeId(0),
            kind: ScopeKind::Module,
            parent: None,
            name: None,
            span: unit.tree().span,
            bindings: BTreeMap::new(),
            globals: BTreeSet::new(),
            nonlocals: BTreeSet::new(),
        }],
        references: Vec::new(),
        store_events: Vec::new(),
    };
    builder.stmts(&unit.tree().body, ScopeId(0));
    builder.place_store_bindings();
    builder.resolve();
    let mut tree = ScopeTree {
        scopes: builder.scopes,
        references: builder.references,
    };
    tree.references.sort_by_key(|r| (r.span.start, r.span.end));
    tree
}

struct Builder {
    scopes: Vec<Scope>,
    references: Vec<Reference>,
    /// (scope, name) store occurrences awaiting redirect placement.
    store_events: Vec<(ScopeId, String)>,
}

impl Builder {
    fn new_scope(&mut self, kind: ScopeKind, parent: ScopeId, name: Option<String>, span: Span) -> ScopeId {
        let id = ScopeId(self.scopes.len());
        self.scopes.push(Scope {
            id,
            kind,
            parent: Some(parent),
            name,
            span,
            bindings: BTreeMap::new(),
            globals: BTreeSet::new(),
            nonlocals: BTreeSet::new(),
        });
        id
    }

    fn bind(&mut self, scope: ScopeId, name: &str, kind: BindingKind, decl_span: Option<Span>) {
        let binding = self.scopes[scope.0]
            .bindings
            .entry(name.to_string())
            .or_insert(Binding {
                kind,
                decl_spans: Vec::new(),
            });
        if let Some(span) = decl_span {
            binding.decl_spans.push(span);
        }
    }

    fn reference(&mut self, scope: ScopeId, name: &str, span: Span, is_store: bool) {
        self.references.push(Reference {
            name: name.to_string(),
            span,
            site: scope,
            is_store,
            resolved: None,
        });
        if is_store {
            self.store_events.push((scope, name.to_string()));
        }
    }

    fn stmts(&mut self, stmts: &[Stmt], scope: ScopeId) {
        for stmt in stmts {
            self.stmt(stmt, scope);
        }
    }

    fn stmt(&mut self, stmt: &Stmt, scope: ScopeId) {
        match stmt {
            Stmt::FunctionDef(def) => {
                for deco in &def.decorators {
                    self.expr(deco, scope);
                }
                for param in &def.params {
                    if let Some(d) = &param.default {
                        self.expr(d, scope);
                    }
                    if let Some(a) = &param.annotation {
                        self.expr(a, scope);
                    }
                }
                self.bind(scope, &def.name, BindingKind::Function, Some(def.name_span));
                let inner = self.new_scope(
                    ScopeKind::Function,
                    scope,
                    Some(def.name.clone()),
                    def.span,
                );
                for param in &def.params {
                    self.bind(inner, &param.name, BindingKind::Param, Some(param.name_span));
                }
                self.stmts(&def.body, inner);
            }
            Stmt::ClassDef(def) => {
                for deco in &def.decorators {
                    self.expr(deco, scope);
                }
                for base in def.bases.iter().chain(def.keywords.iter()) {
                    self.expr(base, scope);
                }
                self.bind(scope, &def.name, BindingKind::Class, Some(def.name_span));
                let inner =
                    self.new_scope(ScopeKind::Class, scope, Some(def.name.clone()), def.span);
                self.stmts(&def.body, inner);
            }
            Stmt::If(s) => {
                self.expr(&s.test, scope);
                self.stmts(&s.body, scope);
                for branch in &s.elifs {
                    self.expr(&branch.test, scope);
                    self.stmts(&branch.body, scope);
                }
                if let Some(orelse) = &s.orelse {
                    self.stmts(&orelse.body, scope);
                }
            }
            Stmt::For(s) => {
                self.expr(&s.iter, scope);
                self.expr(&s.target, scope);
                self.stmts(&s.body, scope);
                if let Some(orelse) = &s.orelse {
                    self.stmts(&orelse.body, scope);
                }
            }
            Stmt::While(s) => {
                self.expr(&s.test, scope);
                self.stmts(&s.body, scope);
                if let Some(orelse) = &s.orelse {
                    self.stmts(&orelse.body, scope);
                }
            }
            Stmt::With(s) => {
                for item in &s.items {
                    self.expr(&item.context, scope);
                    if let Some(target) = &item.as_target {
                        self.expr(target, scope);
                    }
                }
                self.stmts(&s.body, scope);
            }
            Stmt::Try(s) => {
                self.stmts(&s.body, scope);
                for handler in &s.handlers {
                    if let Some(t) = &handler.exc_type {
                        self.expr(t, scope);
                    }
                    if let (Some(name), Some(span)) = (&handler.name, handler.name_span) {
                        self.bind(scope, name, BindingKind::Local, Some(span));
                    }
                    self.stmts(&handler.body, scope);
                }
                if let Some(orelse) = &s.orelse {
                    self.stmts(&orelse.body, scope);
                }
                if let Some(finally) = &s.finally {
                    self.stmts(&finally.body, scope);
                }
            }
            Stmt::Other(other) => {
                match other.kind {
                    "global" => {
                        for (name, span) in &other.bound_names {
                            self.scopes[scope.0].globals.insert(name.clone());
                            self.reference(scope, name, *span, true);
                        }
                    }
                    "nonlocal" => {
                        for (name, span) in &other.bound_names {
                            self.scopes[scope.0].nonlocals.insert(name.clone());
                            self.reference(scope, name, *span, true);
                        }
                    }
                    "import" => {
                        for (name, span) in &other.bound_names {
                            self.bind(scope, name, BindingKind::Import, Some(*span));
                        }
                    }
                    _ => {}
                }
                for e in &other.exprs {
                    self.expr(e, scope);
                }
                for body in &other.bodies {
                    self.stmts(body, scope);
                }
            }
            _ => {
                for e in crate::pysource::stmt_exprs(stmt) {
                    self.expr(e, scope);
                }
            }
        }
    }

    fn expr(&mut self, expr: &Expr, scope: ScopeId) {
        match expr {
            Expr::Name(name) => {
                self.reference(scope, &name.id, name.span, name.ctx == NameCtx::Store);
            }
            Expr::Lambda(lambda) => {
                for param in &lambda.params {
                    if let Some(d) = &param.default {
                        self.expr(d, scope);
                    }
                }
                let inner = self.new_scope(ScopeKind::Lambda, scope, None, lambda.span);
                for param in &lambda.params {
                    self.bind(inner, &param.name, BindingKind::Param, Some(param.name_span));
                }
                self.expr(&lambda.body, inner);
            }
            Expr::Comprehension(comp) => {
                let inner = self.new_scope(ScopeKind::Comprehension, scope, None, comp.span);
                for (i, gen) in comp.generators.iter().enumerate() {
                    // The first iterable is evaluated in the enclosing scope.
                    self.expr(&gen.iter, if i == 0 { scope } else { inner });
                    self.expr(&gen.target, inner);
                    for cond in &gen.ifs {
                        self.expr(cond, inner);
                    }
                }
                for element in &comp.elements {
                    self.expr(element, inner);
                }
            }
            Expr::NamedExpr(named) => {
                self.expr(&named.value, scope);
                // Walrus targets skip comprehension scopes.
                let mut target_scope = scope;
                while self.scopes[target_scope.0].kind == ScopeKind::Comprehension {
                    let Some(parent) = self.scopes[target_scope.0].parent else {
                        break;
                    };
                    target_scope = parent;
                }
                if let Expr::Name(name) = named.target.as_ref() {
                    self.reference(target_scope, &name.id, name.span, true);
                } else {
                    self.expr(&named.target, scope);
                }
            }
            Expr::Attribute(e) => self.expr(&e.value, scope),
            Expr::Subscript(e) => {
                self.expr(&e.value, scope);
                self.expr(&e.index, scope);
            }
            Expr::Call(e) => {
                self.expr(&e.func, scope);
                for a in &e.args {
                    self.expr(a, scope);
                }
                for k in &e.keywords {
                    self.expr(&k.value, scope);
                }
            }
            Expr::BoolOp(e) => {
                for v in &e.values {
                    self.expr(v, scope);
                }
            }
            Expr::BinOp(e) => {
                self.expr(&e.left, scope);
                self.expr(&e.right, scope);
            }
            Expr::Compare(e) => {
                self.expr(&e.left, scope);
                for c in &e.comparators {
                    self.expr(c, scope);
                }
            }
            Expr::UnaryOp(e) => self.expr(&e.operand, scope),
            Expr::IfExp(e) => {
                self.expr(&e.test, scope);
                self.expr(&e.body, scope);
                self.expr(&e.orelse, scope);
            }
            Expr::Yield(e) => {
                if let Some(v) = &e.value {
                    self.expr(v, scope);
                }
            }
            Expr::YieldFrom(e) => self.expr(&e.value, scope),
            Expr::Constant(_) => {}
            Expr::Other(e) => {
                for c in &e.children {
                    self.expr(c, scope);
                }
            }
        }
    }

    /// Places store-created bindings in their effective scopes, honouring
    /// `global`/`nonlocal` redirects.
    fn place_store_bindings(&mut self) {
        let events = std::mem::take(&mut self.store_events);
        for (scope, name) in events {
            let target = self.redirect(scope, &name);
            self.bind(target, &name, BindingKind::Local, None);
        }
    }

    fn redirect(&self, scope: ScopeId, name: &str) -> ScopeId {
        let s = &self.scopes[scope.0];
        if s.globals.contains(name) {
            return ScopeId(0);
        }
        if s.nonlocals.contains(name) {
            let mut cur = s.parent;
            while let Some(c) = cur {
                let cs = &self.scopes[c.0];
                if matches!(cs.kind, ScopeKind::Function | ScopeKind::Lambda) {
                    return c;
                }
                cur = cs.parent;
            }
            return ScopeId(0);
        }
        scope
    }

    fn resolve(&mut self) {
        let resolutions: Vec<Option<ScopeId>> = self
            .references
            .iter()
            .map(|r| self.resolve_one(r.site, &r.name))
            .collect();
        for (r, res) in self.references.iter_mut().zip(resolutions) {
            r.resolved = res;
        }
    }

    fn resolve_one(&self, site: ScopeId, name: &str) -> Option<ScopeId> {
        let s = &self.scopes[site.0];
        if s.globals.contains(name) {
            return self.scopes[0].bindings.contains_key(name).then_some(ScopeId(0));
        }
        if s.nonlocals.contains(name) {
            let mut cur = s.parent;
            while let Some(c) = cur {
                let cs = &self.scopes[c.0];
                if matches!(cs.kind, ScopeKind::Function | ScopeKind::Lambda)
                    && cs.bindings.contains_key(name)
                {
                    return Some(c);
                }
                cur = cs.parent;
            }
            return None;
        }
        let mut cur = Some(site);
        while let Some(c) = cur {
            let cs = &self.scopes[c.0];
            let visible = c == site || cs.kind != ScopeKind::Class;
            if visible && cs.bindings.contains_key(name) {
                return Some(c);
            }
            cur = cs.parent;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree_of(src: &str) -> (SourceUnit, ScopeTree) {
        let unit = SourceUnit::parse_str(src).unwrap();
        let tree = analyze(&unit);
        (unit, tree)
    }

    fn resolved_scope_kind(tree: &ScopeTree, unit: &SourceUnit, name_text: &str, nth: usize) -> Option<ScopeKind> {
        let refs: Vec<&Reference> = tree
            .references()
            .iter()
            .filter(|r| unit.slice(r.span) == name_text)
            .collect();
        refs.get(nth)
            .and_then(|r| r.resolved)
            .map(|s| tree.scope(s).kind)
    }

    #[test]
    fn local_store_makes_name_function_scoped() {
        let (unit, tree) = tree_of("x = 1\ndef fnn():\n    x = 2\n    return x\n");
        // the `return x` load resolves to the function scope, not module
        assert_eq!(
            resolved_scope_kind(&tree, &unit, "x", 2),
            Some(ScopeKind::Function)
        );
    }

    #[test]
    fn load_without_local_store_reaches_module() {
        let (unit, tree) = tree_of("x = 1\ndef fnn():\n    return x\n");
        assert_eq!(
            resolved_scope_kind(&tree, &unit, "x", 1),
            Some(ScopeKind::Module)
        );
    }

    #[test]
    fn global_decl_redirects_store_to_module() {
        let (unit, tree) = tree_of("def fnn():\n    global count\n    count = 1\n");
        assert_eq!(
            resolved_scope_kind(&tree, &unit, "count", 1),
            Some(ScopeKind::Module)
        );
    }

    #[test]
    fn nonlocal_reaches_enclosing_function() {
        let src = "def outer():\n    tally = 0\n    def bump():\n        nonlocal tally\n        tally += 1\n    return bump\n";
        let (unit, tree) = tree_of(src);
        // the augmented store inside bump resolves to outer's scope
        let refs: Vec<&Reference> = tree
            .references()
            .iter()
            .filter(|r| unit.slice(r.span) == "tally")
            .collect();
        let store_in_bump = refs.last().unwrap();
        let scope = tree.scope(store_in_bump.resolved.unwrap());
        assert_eq!(scope.name.as_deref(), Some("outer"));
    }

    #[test]
    fn lambda_params_shadow_enclosing_locals() {
        // Parameter declarations are bindings, not references, so the name
        // occurrences here are the lambda-body load and the call-site load.
        let (unit, tree) = tree_of("def fnn(x):\n    fn = lambda x: x + 1\n    return fn(x)\n");
        assert_eq!(
            resolved_scope_kind(&tree, &unit, "x", 0),
            Some(ScopeKind::Lambda)
        );
        assert_eq!(
            resolved_scope_kind(&tree, &unit, "x", 1),
            Some(ScopeKind::Function)
        );
    }

    #[test]
    fn class_scope_is_invisible_to_methods() {
        let src = "class Box:\n    size = 1\n    def get(self):\n        return size\n";
        let (unit, tree) = tree_of(src);
        // `size` load inside the method does not see the class attribute
        let last = tree
            .references()
            .iter()
            .filter(|r| unit.slice(r.span) == "size")
            .next_back()
            .unwrap();
        assert_eq!(last.resolved, None);
    }

    #[test]
    fn comprehension_target_is_scoped_to_the_comprehension() {
        let (unit, tree) = tree_of("def fnn(items):\n    return [item for item in items]\n");
        assert_eq!(
            resolved_scope_kind(&tree, &unit, "item", 0),
            Some(ScopeKind::Comprehension)
        );
        // the iterable resolves to the function parameter
        assert_eq!(
            resolved_scope_kind(&tree, &unit, "items", 0),
            Some(ScopeKind::Function)
        );
    }

    #[test]
    fn builtins_resolve_to_none() {
        let (unit, tree) = tree_of("def fnn(values):\n    return len(values)\n");
        assert_eq!(resolved_scope_kind(&tree, &unit, "len", 0), None);
        let _ = unit;
    }

    #[test]
    fn fingerprint_is_stable_under_consistent_rename() {
        let src = "def fnn():\n    old = 1\n    return old\n";
        let (_, tree) = tree_of(src);
        let renamed_src = "def fnn():\n    fresh = 1\n    return fresh\n";
        let unit2 = SourceUnit::parse_str(renamed_src).unwrap();
        let tree2 = analyze(&unit2);
        let fn_scope = tree
            .scopes()
            .iter()
            .find(|s| s.kind == ScopeKind::Function)
            .unwrap()
            .id;
        let before = tree.fingerprint(Some((&fn_scope, "old", "fresh")));
        let after = tree2.fingerprint(None);
        assert_eq!(before, after);
    }
}
