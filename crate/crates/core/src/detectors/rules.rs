//! The scan walker applying every rule in one traversal.

use std::collections::HashSet;

use super::{cognitive_complexity, commented, exprs_equal, parameter_count, Finding, Scanner, SmellKind};
use crate::pysource::ast::*;
use crate::pysource::{stmt_blocks, stmt_exprs, BlockKind, SourceUnit};
use crate::span::Span;

pub(super) fn run(scanner: &Scanner, unit: &SourceUnit) -> Vec<Finding> {
    let mut walk = Walk {
        scanner,
        unit,
        findings: Vec::new(),
        fn_stack: Vec::new(),
        named_locals: HashSet::new(),
    };
    walk.commented_code();
    walk.block(&unit.tree().body, BlockKind::Module, false);
    walk.findings
}

struct Walk<'a> {
    scanner: &'a Scanner,
    unit: &'a SourceUnit,
    findings: Vec<Finding>,
    fn_stack: Vec<&'a FunctionDef>,
    /// Deduplicates local-variable naming findings per (scope, name).
    named_locals: HashSet<(Option<Span>, String)>,
}

impl<'a> Walk<'a> {
    fn push(&mut self, kind: SmellKind, span: Span, message: String, metric: Option<i64>) {
        let function = self.fn_stack.last().map(|f| f.name.clone());
        self.findings.push(Finding {
            kind,
            span,
            function,
            message,
            metric,
        });
    }

    fn current_scope(&self) -> Option<Span> {
        self.fn_stack.last().map(|f| f.span)
    }

    fn commented_code(&mut self) {
        let min_score = self.scanner.config().commented_code_min_score;
        for block in commented::blocks(self.unit.comments()) {
            if commented::parses_as_code(&block.candidate)
                && commented::code_token_score(&block.candidate) >= min_score
            {
                let function = self
                    .unit
                    .enclosing_function(block.span)
                    .map(|f| f.name.clone());
                self.findings.push(Finding {
                    kind: SmellKind::CommentedCode,
                    span: block.span,
                    function,
                    message: "Remove this commented out code.".to_string(),
                    metric: None,
                });
            }
        }
    }

    fn block(&mut self, stmts: &'a [Stmt], kind: BlockKind, parent_is_class: bool) {
        self.dead_code(stmts);
        if kind.is_nested_block() {
            if let [Stmt::Pass(span)] = stmts {
                self.push(
                    SmellKind::EmptyNestedCodeBlocks,
                    *span,
                    "Either remove or fill this block of code.".to_string(),
                    None,
                );
            }
        }
        for stmt in stmts {
            self.stmt(stmt, parent_is_class);
        }
    }

    fn dead_code(&mut self, stmts: &'a [Stmt]) {
        let Some(idx) = stmts.iter().position(|s| s.is_terminator()) else {
            return;
        };
        if idx + 1 >= stmts.len() {
            return;
        }
        let keyword = stmts[idx].terminator_keyword().unwrap_or("return");
        let span = Span::new(stmts[idx + 1].span().start, stmts.last().unwrap().span().end);
        self.push(
            SmellKind::DeadCode,
            span,
            format!("Delete this unreachable code after the \"{keyword}\" statement."),
            None,
        );
    }

    fn stmt(&mut self, stmt: &'a Stmt, parent_is_class: bool) {
        match stmt {
            Stmt::FunctionDef(def) => self.function_def(def, parent_is_class),
            Stmt::ClassDef(def) => {
                for e in stmt_exprs(stmt) {
                    self.expr(e);
                }
                self.block(&def.body, BlockKind::ClassBody, true);
            }
            Stmt::If(ifstmt) => {
                self.collapsible_if(ifstmt);
                for e in stmt_exprs(stmt) {
                    self.expr(e);
                }
                self.recurse_blocks(stmt);
            }
            Stmt::Assign(assign) => {
                self.self_assigned(assign);
                // Class attributes are exempt from the variable naming rule.
                if !parent_is_class {
                    for target in &assign.targets {
                        self.binding_naming(target);
                    }
                }
                for e in stmt_exprs(stmt) {
                    self.expr(e);
                }
            }
            Stmt::For(f) => {
                self.binding_naming(&f.target);
                for e in stmt_exprs(stmt) {
                    self.expr(e);
                }
                self.recurse_blocks(stmt);
            }
            Stmt::With(w) => {
                for item in &w.items {
                    if let Some(target) = &item.as_target {
                        self.binding_naming(target);
                    }
                }
                for e in stmt_exprs(stmt) {
                    self.expr(e);
                }
                self.recurse_blocks(stmt);
            }
            _ => {
                for e in stmt_exprs(stmt) {
                    self.expr(e);
                }
                self.recurse_blocks(stmt);
            }
        }
    }

    fn recurse_blocks(&mut self, stmt: &'a Stmt) {
        for block in stmt_blocks(stmt) {
            self.block(block.stmts, block.kind, false);
        }
    }

    fn function_def(&mut self, def: &'a FunctionDef, is_method: bool) {
        let cfg = self.scanner.config();

        if !self.scanner.function_regex.is_match(&def.name) {
            let function = Some(def.name.clone());
            self.findings.push(Finding {
                kind: SmellKind::NamingConvention,
                span: def.name_span,
                function,
                message: format!(
                    "Rename function \"{}\" to match the regular expression {}.",
                    def.name, cfg.naming_regex_function
                ),
                metric: None,
            });
        }

        let param_count = parameter_count(def, is_method);
        if param_count > cfg.max_params {
            self.findings.push(Finding {
                kind: SmellKind::LongParameterList,
                span: def.name_span,
                function: Some(def.name.clone()),
                message: format!(
                    "Function \"{}\" has {} parameters, which is greater than the {} authorized.",
                    def.name, param_count, cfg.max_params
                ),
                metric: Some(param_count as i64),
            });
        }

        let score = cognitive_complexity(def);
        if score > cfg.cc_threshold {
            self.findings.push(Finding {
                kind: SmellKind::HighCognitiveComplexity,
                span: def.name_span,
                function: Some(def.name.clone()),
                message: format!(
                    "Refactor this function to reduce its Cognitive Complexity from {} to the {} allowed.",
                    score, cfg.cc_threshold
                ),
                metric: Some(score as i64),
            });
        }

        for (i, param) in def.params.iter().enumerate() {
            if i == 0 && is_method && (param.name == "self" || param.name == "cls") {
                continue;
            }
            if !self.scanner.variable_regex.is_match(&param.name) {
                self.findings.push(Finding {
                    kind: SmellKind::NamingConvention,
                    span: param.name_span,
                    function: Some(def.name.clone()),
                    message: format!(
                        "Rename parameter \"{}\" to match the regular expression {}.",
                        param.name, cfg.naming_regex_variable
                    ),
                    metric: None,
                });
            }
            if let Some(default) = &param.default {
                self.expr(default);
            }
        }

        self.return_and_yield(def);

        for deco in &def.decorators {
            self.expr(deco);
        }
        self.fn_stack.push(def);
        self.block(&def.body, BlockKind::FunctionBody, false);
        self.fn_stack.pop();
    }

    /// Flags a function mixing value-carrying `return` with `yield`, looking
    /// only at the function's own frame (nested defs and lambdas excluded).
    fn return_and_yield(&mut self, def: &'a FunctionDef) {
        let mut value_return: Option<Span> = None;
        let mut has_yield = false;
        own_frame_stmts(&def.body, &mut |stmt| {
            if let Stmt::Return(r) = stmt {
                if r.value.is_some() && value_return.is_none() {
                    value_return = Some(r.span);
                }
            }
            for e in stmt_exprs(stmt) {
                own_frame_exprs(e, &mut |expr| {
                    if matches!(expr, Expr::Yield(_) | Expr::YieldFrom(_)) {
                        has_yield = true;
                    }
                });
            }
        });
        if let Some(span) = value_return {
            if has_yield {
                self.findings.push(Finding {
                    kind: SmellKind::ReturnAndYield,
                    span,
                    function: Some(def.name.clone()),
                    message: "Use only return or only yield, not both".to_string(),
                    metric: None,
                });
            }
        }
    }

    fn collapsible_if(&mut self, ifstmt: &'a IfStmt) {
        if !ifstmt.elifs.is_empty() || ifstmt.orelse.is_some() {
            return;
        }
        let [Stmt::If(inner)] = ifstmt.body.as_slice() else {
            return;
        };
        if inner.elifs.is_empty() && inner.orelse.is_none() {
            self.push(
                SmellKind::CollapsibleIfStatements,
                ifstmt.span,
                "Merge this if statement with the nested one.".to_string(),
                None,
            );
        }
    }

    fn self_assigned(&mut self, assign: &'a AssignStmt) {
        if assign.augmented || assign.targets.len() != 1 {
            return;
        }
        let Some(value) = &assign.value else { return };
        let target = &assign.targets[0];
        if !target.is_name_or_attribute_chain() || !value.is_name_or_attribute_chain() {
            return;
        }
        if target.chain_repr() == value.chain_repr() {
            self.push(
                SmellKind::SelfAssignedVariables,
                assign.span,
                "Remove or correct this useless self-assignment.".to_string(),
                None,
            );
        }
    }

    /// Naming checks for binding targets: locals inside functions, plain
    /// module-level variables outside. Module-level ALL_CAPS constants and
    /// class attributes are exempt.
    fn binding_naming(&mut self, target: &'a Expr) {
        match target {
            Expr::Name(name) if name.ctx == NameCtx::Store => {
                let in_function = !self.fn_stack.is_empty();
                if !in_function {
                    let all_caps = name
                        .id
                        .chars()
                        .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_');
                    if all_caps {
                        return;
                    }
                }
                if self.scanner.variable_regex.is_match(&name.id) {
                    return;
                }
                let key = (self.current_scope(), name.id.clone());
                if !self.named_locals.insert(key) {
                    return;
                }
                let message = format!(
                    "Rename local variable \"{}\" to match the regular expression {}.",
                    name.id,
                    self.scanner.config().naming_regex_variable
                );
                self.push(SmellKind::NamingConvention, name.span, message, None);
            }
            Expr::Other(other) if other.kind == "tuple" || other.kind == "list" => {
                for child in &other.children {
                    self.binding_naming(child);
                }
            }
            Expr::Other(other) if other.kind == "starred" => {
                for child in &other.children {
                    self.binding_naming(child);
                }
            }
            _ => {}
        }
    }

    fn expr(&mut self, expr: &'a Expr) {
        crate::pysource::walk_expr(expr, &mut |e| match e {
            Expr::BinOp(bin) => {
                let op = bin.op.as_str();
                if self.scanner.identical_ops.contains(op)
                    && exprs_equal(self.unit, &bin.left, &bin.right)
                {
                    self.push(
                        SmellKind::IdenticalExpressions,
                        bin.span,
                        format!(
                            "Correct one of the identical sub-expressions on both sides of operator \"{op}\"."
                        ),
                        None,
                    );
                }
            }
            Expr::Compare(cmp) => {
                let mut prev = cmp.left.as_ref();
                for (op, comparator) in cmp.ops.iter().zip(&cmp.comparators) {
                    let op = op.as_str();
                    if self.scanner.identical_ops.contains(op)
                        && exprs_equal(self.unit, prev, comparator)
                    {
                        let span = Span::new(prev.span().start, comparator.span().end);
                        self.push(
                            SmellKind::IdenticalExpressions,
                            span,
                            format!(
                                "Correct one of the identical sub-expressions on both sides of operator \"{op}\"."
                            ),
                            None,
                        );
                    }
                    prev = comparator;
                }
            }
            Expr::BoolOp(bool_op) => {
                let op = bool_op.op.as_str();
                if self.scanner.identical_ops.contains(op) {
                    for pair in bool_op.values.windows(2) {
                        if exprs_equal(self.unit, &pair[0], &pair[1]) {
                            let span = Span::new(pair[0].span().start, pair[1].span().end);
                            self.push(
                                SmellKind::IdenticalExpressions,
                                span,
                                format!(
                                    "Correct one of the identical sub-expressions on both sides of operator \"{op}\"."
                                ),
                                None,
                            );
                        }
                    }
                }
            }
            Expr::NamedExpr(named) => {
                self.binding_naming(&named.target);
            }
            Expr::Lambda(lambda) => {
                for param in &lambda.params {
                    if !self.scanner.variable_regex.is_match(&param.name) {
                        let message = format!(
                            "Rename parameter \"{}\" to match the regular expression {}.",
                            param.name,
                            self.scanner.config().naming_regex_variable
                        );
                        self.push(SmellKind::NamingConvention, param.name_span, message, None);
                    }
                }
            }
            _ => {}
        });
    }
}

/// Visits statements of a function frame without crossing into nested defs.
fn own_frame_stmts<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for stmt in stmts {
        if matches!(stmt, Stmt::FunctionDef(_) | Stmt::ClassDef(_)) {
            continue;
        }
        f(stmt);
        for block in stmt_blocks(stmt) {
            own_frame_stmts(block.stmts, f);
        }
    }
}

/// Visits subexpressions without crossing into lambdas.
fn own_frame_exprs<'a>(expr: &'a Expr, f: &mut impl FnMut(&'a Expr)) {
    if matches!(expr, Expr::Lambda(_)) {
        return;
    }
    f(expr);
    match expr {
        Expr::Attribute(e) => own_frame_exprs(&e.value, f),
        Expr::Subscript(e) => {
            own_frame_exprs(&e.value, f);
            own_frame_exprs(&e.index, f);
        }
        Expr::Call(e) => {
            own_frame_exprs(&e.func, f);
            for a in &e.args {
                own_frame_exprs(a, f);
            }
            for k in &e.keywords {
                own_frame_exprs(&k.value, f);
            }
        }
        Expr::BoolOp(e) => {
            for v in &e.values {
                own_frame_exprs(v, f);
            }
        }
        Expr::BinOp(e) => {
            own_frame_exprs(&e.left, f);
            own_frame_exprs(&e.right, f);
        }
        Expr::Compare(e) => {
            own_frame_exprs(&e.left, f);
            for c in &e.comparators {
                own_frame_exprs(c, f);
            }
        }
        Expr::UnaryOp(e) => own_frame_exprs(&e.operand, f),
        Expr::IfExp(e) => {
            own_frame_exprs(&e.test, f);
            own_frame_exprs(&e.body, f);
            own_frame_exprs(&e.orelse, f);
        }
        Expr::Yield(e) => {
            if let Some(v) = &e.value {
                own_frame_exprs(v, f);
            }
        }
        Expr::YieldFrom(e) => own_frame_exprs(&e.value, f),
        Expr::NamedExpr(e) => {
            own_frame_exprs(&e.target, f);
            own_frame_exprs(&e.value, f);
        }
        Expr::Comprehension(e) => {
            for el in &e.elements {
                own_frame_exprs(el, f);
            }
            for g in &e.generators {
                own_frame_exprs(&g.target, f);
                own_frame_exprs(&g.iter, f);
                for i in &g.ifs {
                    own_frame_exprs(i, f);
                }
            }
        }
        Expr::Other(e) => {
            for c in &e.children {
                own_frame_exprs(c, f);
            }
        }
        Expr::Name(_) | Expr::Constant(_) | Expr::Lambda(_) => {}
    }
}
