//! Cognitive-complexity scoring.
//!
//! Increment rules:
//! - `if`, conditional expressions, `for`, `while`, and `except` handlers add
//!   1 plus the current nesting level;
//! - each `elif` and each `else` branch adds a flat 1;
//! - each maximal sequence of boolean operators adds 1, plus 1 more per
//!   operator alternation (`a and b and c` counts once, `a and b or c` twice);
//! - each direct-recursion call adds 1;
//! - nesting rises by one inside the bodies of `if`/`for`/`while`/handlers,
//!   in conditional-expression arms, and inside nested functions and lambdas,
//!   which themselves add nothing.

use crate::pysource::ast::*;

pub fn cognitive_complexity(def: &FunctionDef) -> u32 {
    let mut visitor = CogVisitor {
        fn_name: &def.name,
        score: 0,
    };
    for deco in &def.decorators {
        visitor.expr(deco, 0);
    }
    for param in &def.params {
        if let Some(d) = &param.default {
            visitor.expr(d, 0);
        }
    }
    visitor.stmts(&def.body, 0);
    visitor.score
}

struct CogVisitor<'a> {
    fn_name: &'a str,
    score: u32,
}

impl CogVisitor<'_> {
    fn stmts(&mut self, stmts: &[Stmt], n: u32) {
        for stmt in stmts {
            self.stmt(stmt, n);
        }
    }

    fn stmt(&mut self, stmt: &Stmt, n: u32) {
        match stmt {
            Stmt::If(s) => {
                self.score += 1 + n;
                self.expr(&s.test, n);
                self.stmts(&s.body, n + 1);
                for branch in &s.elifs {
                    self.score += 1;
                    self.expr(&branch.test, n);
                    self.stmts(&branch.body, n + 1);
                }
                if let Some(orelse) = &s.orelse {
                    self.score += 1;
                    self.stmts(&orelse.body, n + 1);
                }
            }
            Stmt::For(s) => {
                self.score += 1 + n;
                self.expr(&s.target, n);
                self.expr(&s.iter, n);
                self.stmts(&s.body, n + 1);
                if let Some(orelse) = &s.orelse {
                    self.score += 1;
                    self.stmts(&orelse.body, n + 1);
                }
            }
            Stmt::While(s) => {
                self.score += 1 + n;
                self.expr(&s.test, n);
                self.stmts(&s.body, n + 1);
                if let Some(orelse) = &s.orelse {
                    self.score += 1;
                    self.stmts(&orelse.body, n + 1);
                }
            }
            Stmt::With(s) => {
                for item in &s.items {
                    self.expr(&item.context, n);
                    if let Some(t) = &item.as_target {
                        self.expr(t, n);
                    }
                }
                self.stmts(&s.body, n);
            }
            Stmt::Try(s) => {
                self.stmts(&s.body, n);
                for handler in &s.handlers {
                    self.score += 1 + n;
                    if let Some(t) = &handler.exc_type {
                        self.expr(t, n);
                    }
                    self.stmts(&handler.body, n + 1);
                }
                if let Some(orelse) = &s.orelse {
                    self.score += 1;
                    self.stmts(&orelse.body, n);
                }
                if let Some(finally) = &s.finally {
                    self.stmts(&finally.body, n);
                }
            }
            Stmt::FunctionDef(def) => {
                for deco in &def.decorators {
                    self.expr(deco, n);
                }
                for param in &def.params {
                    if let Some(d) = &param.default {
                        self.expr(d, n);
                    }
                }
                self.stmts(&def.body, n + 1);
            }
            Stmt::ClassDef(def) => {
                self.stmts(&def.body, n);
            }
            Stmt::Other(other) => {
                for e in &other.exprs {
                    self.expr(e, n);
                }
                for body in &other.bodies {
                    self.stmts(body, n);
                }
            }
            _ => {
                for e in crate::pysource::stmt_exprs(stmt) {
                    self.expr(e, n);
                }
            }
        }
    }

    fn expr(&mut self, expr: &Expr, n: u32) {
        match expr {
            Expr::BoolOp(_) => {
                let mut ops = Vec::new();
                let mut leaves = Vec::new();
                collect_bool_chain(expr, &mut ops, &mut leaves);
                self.score += sequence_runs(&ops);
                for leaf in leaves {
                    self.expr(leaf, n);
                }
            }
            Expr::IfExp(e) => {
                self.score += 1 + n;
                self.expr(&e.test, n);
                self.expr(&e.body, n + 1);
                self.expr(&e.orelse, n + 1);
            }
            Expr::Lambda(e) => {
                for p in &e.params {
                    if let Some(d) = &p.default {
                        self.expr(d, n);
                    }
                }
                self.expr(&e.body, n + 1);
            }
            Expr::Call(e) => {
                if let Expr::Name(name) = e.func.as_ref() {
                    if name.id == self.fn_name {
                        self.score += 1;
                    }
                }
                self.expr(&e.func, n);
                for a in &e.args {
                    self.expr(a, n);
                }
                for k in &e.keywords {
                    self.expr(&k.value, n);
                }
            }
            Expr::Name(_) | Expr::Constant(_) => {}
            Expr::Attribute(e) => self.expr(&e.value, n),
            Expr::Subscript(e) => {
                self.expr(&e.value, n);
                self.expr(&e.index, n);
            }
            Expr::BinOp(e) => {
                self.expr(&e.left, n);
                self.expr(&e.right, n);
            }
            Expr::Compare(e) => {
                self.expr(&e.left, n);
                for c in &e.comparators {
                    self.expr(c, n);
                }
            }
            Expr::UnaryOp(e) => self.expr(&e.operand, n),
            Expr::Yield(e) => {
                if let Some(v) = &e.value {
                    self.expr(v, n);
                }
            }
            Expr::YieldFrom(e) => self.expr(&e.value, n),
            Expr::NamedExpr(e) => {
                self.expr(&e.target, n);
                self.expr(&e.value, n);
            }
            Expr::Comprehension(e) => {
                for el in &e.elements {
                    self.expr(el, n);
                }
                for g in &e.generators {
                    self.expr(&g.target, n);
                    self.expr(&g.iter, n);
                    for i in &g.ifs {
                        self.expr(i, n);
                    }
                }
            }
            Expr::Other(e) => {
                for c in &e.children {
                    self.expr(c, n);
                }
            }
        }
    }
}

/// In-order boolean operator tokens of a connected `and`/`or` tree, plus the
/// non-boolean operand expressions where general walking resumes.
fn collect_bool_chain<'a>(expr: &'a Expr, ops: &mut Vec<BoolOpKind>, leaves: &mut Vec<&'a Expr>) {
    if let Expr::BoolOp(b) = expr {
        for (i, value) in b.values.iter().enumerate() {
            if i > 0 {
                ops.push(b.op);
            }
            collect_bool_chain(value, ops, leaves);
        }
    } else {
        leaves.push(expr);
    }
}

/// One per maximal run of like operators: `[and, and]` is 1, `[and, or]` is 2.
fn sequence_runs(ops: &[BoolOpKind]) -> u32 {
    if ops.is_empty() {
        return 0;
    }
    1 + ops.windows(2).filter(|w| w[0] != w[1]).count() as u32
}
