//! Lowering from the rustpython AST into the span-preserving tree.

use rustpython_parser::ast as rp;

use super::ast::*;
use crate::span::Span;

fn span_of(range: rp::text_size::TextRange) -> Span {
    Span::new(range.start().to_usize(), range.end().to_usize())
}

pub fn convert_module(suite: &[rp::Stmt], text: &str) -> Module {
    let body = convert_body(suite, text);
    let span = Span::new(0, text.len());
    Module { body, span }
}

fn convert_body(stmts: &[rp::Stmt], text: &str) -> Vec<Stmt> {
    stmts.iter().map(|s| convert_stmt(s, text)).collect()
}

fn convert_stmt(stmt: &rp::Stmt, text: &str) -> Stmt {
    match stmt {
        rp::Stmt::FunctionDef(def) => Stmt::FunctionDef(convert_function(
            span_of(def.range),
            def.name.as_str(),
            &def.args,
            &def.body,
            &def.decorator_list,
            false,
            text,
        )),
        rp::Stmt::AsyncFunctionDef(def) => Stmt::FunctionDef(convert_function(
            span_of(def.range),
            def.name.as_str(),
            &def.args,
            &def.body,
            &def.decorator_list,
            true,
            text,
        )),
        rp::Stmt::ClassDef(def) => {
            let def_span = span_of(def.range);
            let span = enclose_decorators(def_span, &def.decorator_list);
            let name_span = find_name_after_keyword(text, def_span.start, "class", def.name.as_str());
            Stmt::ClassDef(ClassDef {
                name: def.name.to_string(),
                name_span,
                bases: def.bases.iter().map(|e| convert_expr(e, text)).collect(),
                keywords: def
                    .keywords
                    .iter()
                    .map(|k| convert_expr(&k.value, text))
                    .collect(),
                body: convert_body(&def.body, text),
                decorators: def
                    .decorator_list
                    .iter()
                    .map(|e| convert_expr(e, text))
                    .collect(),
                span,
            })
        }
        rp::Stmt::If(ifstmt) => Stmt::If(convert_if(ifstmt, text)),
        rp::Stmt::For(f) => Stmt::For(ForStmt {
            target: convert_expr(&f.target, text),
            iter: convert_expr(&f.iter, text),
            orelse: convert_else(&f.orelse, last_end(&f.body, span_of(f.range)), text),
            body: convert_body(&f.body, text),
            is_async: false,
            span: span_of(f.range),
        }),
        rp::Stmt::AsyncFor(f) => Stmt::For(ForStmt {
            target: convert_expr(&f.target, text),
            iter: convert_expr(&f.iter, text),
            orelse: convert_else(&f.orelse, last_end(&f.body, span_of(f.range)), text),
            body: convert_body(&f.body, text),
            is_async: true,
            span: span_of(f.range),
        }),
        rp::Stmt::While(w) => Stmt::While(WhileStmt {
            test: convert_expr(&w.test, text),
            orelse: convert_else(&w.orelse, last_end(&w.body, span_of(w.range)), text),
            body: convert_body(&w.body, text),
            span: span_of(w.range),
        }),
        rp::Stmt::With(w) => Stmt::With(WithStmt {
            items: convert_with_items(&w.items, text),
            body: convert_body(&w.body, text),
            is_async: false,
            span: span_of(w.range),
        }),
        rp::Stmt::AsyncWith(w) => Stmt::With(WithStmt {
            items: convert_with_items(&w.items, text),
            body: convert_body(&w.body, text),
            is_async: true,
            span: span_of(w.range),
        }),
        rp::Stmt::Try(t) => Stmt::Try(convert_try(
            span_of(t.range),
            &t.body,
            &t.handlers,
            &t.orelse,
            &t.finalbody,
            text,
        )),
        rp::Stmt::TryStar(t) => Stmt::Try(convert_try(
            span_of(t.range),
            &t.body,
            &t.handlers,
            &t.orelse,
            &t.finalbody,
            text,
        )),
        rp::Stmt::Return(r) => Stmt::Return(ReturnStmt {
            value: r.value.as_ref().map(|e| convert_expr(e, text)),
            span: span_of(r.range),
        }),
        rp::Stmt::Raise(r) => Stmt::Raise(RaiseStmt {
            exc: r.exc.as_ref().map(|e| convert_expr(e, text)),
            cause: r.cause.as_ref().map(|e| convert_expr(e, text)),
            span: span_of(r.range),
        }),
        rp::Stmt::Break(b) => Stmt::Break(span_of(b.range)),
        rp::Stmt::Continue(c) => Stmt::Continue(span_of(c.range)),
        rp::Stmt::Pass(p) => Stmt::Pass(span_of(p.range)),
        rp::Stmt::Assign(a) => Stmt::Assign(AssignStmt {
            targets: a.targets.iter().map(|e| convert_expr(e, text)).collect(),
            value: Some(convert_expr(&a.value, text)),
            annotation: None,
            augmented: false,
            span: span_of(a.range),
        }),
        rp::Stmt::AugAssign(a) => Stmt::Assign(AssignStmt {
            targets: vec![convert_expr(&a.target, text)],
            value: Some(convert_expr(&a.value, text)),
            annotation: None,
            augmented: true,
            span: span_of(a.range),
        }),
        rp::Stmt::AnnAssign(a) => Stmt::Assign(AssignStmt {
            targets: vec![convert_expr(&a.target, text)],
            value: a.value.as_ref().map(|e| convert_expr(e, text)),
            annotation: Some(convert_expr(&a.annotation, text)),
            augmented: false,
            span: span_of(a.range),
        }),
        rp::Stmt::Expr(e) => Stmt::Expr(ExprStmt {
            value: convert_expr(&e.value, text),
            span: span_of(e.range),
        }),
        rp::Stmt::Delete(d) => Stmt::Other(OtherStmt {
            kind: "del",
            bodies: vec![],
            exprs: d.targets.iter().map(|e| convert_expr(e, text)).collect(),
            bound_names: vec![],
            span: span_of(d.range),
        }),
        rp::Stmt::Assert(a) => {
            let mut exprs = vec![convert_expr(&a.test, text)];
            if let Some(msg) = &a.msg {
                exprs.push(convert_expr(msg, text));
            }
            Stmt::Other(OtherStmt {
                kind: "assert",
                bodies: vec![],
                exprs,
                bound_names: vec![],
                span: span_of(a.range),
            })
        }
        rp::Stmt::Import(i) => Stmt::Other(OtherStmt {
            kind: "import",
            bodies: vec![],
            exprs: vec![],
            bound_names: i.names.iter().map(|a| alias_binding(a)).collect(),
            span: span_of(i.range),
        }),
        rp::Stmt::ImportFrom(i) => Stmt::Other(OtherStmt {
            kind: "import",
            bodies: vec![],
            exprs: vec![],
            bound_names: i.names.iter().map(|a| alias_binding(a)).collect(),
            span: span_of(i.range),
        }),
        rp::Stmt::Global(g) => Stmt::Other(OtherStmt {
            kind: "global",
            bodies: vec![],
            exprs: vec![],
            bound_names: names_in_decl(text, span_of(g.range), &g.names),
            span: span_of(g.range),
        }),
        rp::Stmt::Nonlocal(n) => Stmt::Other(OtherStmt {
            kind: "nonlocal",
            bodies: vec![],
            exprs: vec![],
            bound_names: names_in_decl(text, span_of(n.range), &n.names),
            span: span_of(n.range),
        }),
        rp::Stmt::Match(m) => {
            let mut exprs = vec![convert_expr(&m.subject, text)];
            let mut bodies = Vec::new();
            for case in &m.cases {
                if let Some(guard) = &case.guard {
                    exprs.push(convert_expr(guard, text));
                }
                bodies.push(convert_body(&case.body, text));
            }
            Stmt::Other(OtherStmt {
                kind: "match",
                bodies,
                exprs,
                bound_names: vec![],
                span: span_of(m.range),
            })
        }
        rp::Stmt::TypeAlias(t) => Stmt::Other(OtherStmt {
            kind: "type_alias",
            bodies: vec![],
            exprs: vec![convert_expr(&t.value, text)],
            bound_names: vec![],
            span: span_of(t.range),
        }),
    }
}

fn alias_binding(alias: &rp::Alias) -> (String, Span) {
    let bound = alias
        .asname
        .as_ref()
        .map(|n| n.to_string())
        .unwrap_or_else(|| {
            alias
                .name
                .as_str()
                .split('.')
                .next()
                .unwrap_or(alias.name.as_str())
                .to_string()
        });
    (bound, span_of(alias.range))
}

/// Locate identifier spans inside a `global`/`nonlocal` declaration.
fn names_in_decl(
    text: &str,
    span: Span,
    names: &[rp::Identifier],
) -> Vec<(String, Span)> {
    let body = &text[span.start..span.end.min(text.len())];
    names
        .iter()
        .map(|name| {
            let n = name.as_str();
            let found = find_word(body, n).map(|off| Span::new(span.start + off, span.start + off + n.len()));
            (n.to_string(), found.unwrap_or(span))
        })
        .collect()
}

fn convert_with_items(items: &[rp::WithItem], text: &str) -> Vec<WithItem> {
    items
        .iter()
        .map(|item| WithItem {
            context: convert_expr(&item.context_expr, text),
            as_target: item.optional_vars.as_ref().map(|e| convert_expr(e, text)),
        })
        .collect()
}

fn convert_function(
    def_span: Span,
    name: &str,
    args: &rp::Arguments,
    body: &[rp::Stmt],
    decorators: &[rp::Expr],
    is_async: bool,
    text: &str,
) -> FunctionDef {
    let span = enclose_decorators_exprs(def_span, decorators);
    let name_span = find_name_after_keyword(text, def_span.start, "def", name);
    FunctionDef {
        name: name.to_string(),
        name_span,
        params: convert_params(args, text),
        body: convert_body(body, text),
        decorators: decorators.iter().map(|e| convert_expr(e, text)).collect(),
        is_async,
        span,
        def_span,
    }
}

fn enclose_decorators(def_span: Span, decorators: &[rp::Expr]) -> Span {
    enclose_decorators_exprs(def_span, decorators)
}

fn enclose_decorators_exprs(def_span: Span, decorators: &[rp::Expr]) -> Span {
    let start = decorators
        .iter()
        .map(|d| {
            // Step back over the `@` sigil when present.
            let s = span_of(rp::Ranged::range(d)).start;
            s.saturating_sub(1)
        })
        .min()
        .map(|s| s.min(def_span.start))
        .unwrap_or(def_span.start);
    Span::new(start, def_span.end)
}

fn convert_params(args: &rp::Arguments, text: &str) -> Vec<Param> {
    let mut params = Vec::new();
    let one = |awd: &rp::ArgWithDefault, kind: ParamKind| {
        let name = awd.def.arg.to_string();
        let start = span_of(awd.def.range).start;
        Param {
            name_span: Span::new(start, start + awd.def.arg.as_str().len()),
            name,
            kind,
            default: awd.default.as_ref().map(|e| convert_expr(e, text)),
            annotation: awd.def.annotation.as_ref().map(|e| convert_expr(e, text)),
        }
    };
    for a in &args.posonlyargs {
        params.push(one(a, ParamKind::PositionalOnly));
    }
    for a in &args.args {
        params.push(one(a, ParamKind::Positional));
    }
    if let Some(va) = &args.vararg {
        let start = span_of(va.range).start;
        params.push(Param {
            name: va.arg.to_string(),
            name_span: Span::new(start, start + va.arg.as_str().len()),
            kind: ParamKind::VarArgs,
            default: None,
            annotation: va.annotation.as_ref().map(|e| convert_expr(e, text)),
        });
    }
    for a in &args.kwonlyargs {
        params.push(one(a, ParamKind::KeywordOnly));
    }
    if let Some(kw) = &args.kwarg {
        let start = span_of(kw.range).start;
        params.push(Param {
            name: kw.arg.to_string(),
            name_span: Span::new(start, start + kw.arg.as_str().len()),
            kind: ParamKind::KwArgs,
            default: None,
            annotation: kw.annotation.as_ref().map(|e| convert_expr(e, text)),
        });
    }
    params
}

/// Flattens rustpython's nested `orelse` encoding into an explicit elif chain.
///
/// An `elif` arrives as an `orelse` holding exactly one `If` whose source text
/// starts with the `elif` keyword; a literal `else: if ...` does not.
fn convert_if(ifstmt: &rp::StmtIf, text: &str) -> IfStmt {
    let span = span_of(ifstmt.range);
    let mut elifs = Vec::new();
    let mut orelse = None;

    let body = convert_body(&ifstmt.body, text);
    let mut prev_end = last_end(&ifstmt.body, span);
    let mut rest: &[rp::Stmt] = &ifstmt.orelse;

    loop {
        match rest {
            [] => break,
            [rp::Stmt::If(inner)] if starts_with_keyword(text, span_of(inner.range).start, "elif") => {
                let inner_span = span_of(inner.range);
                let branch_end = last_end(&inner.body, inner_span);
                elifs.push(ElifBranch {
                    test: convert_expr(&inner.test, text),
                    body: convert_body(&inner.body, text),
                    span: Span::new(inner_span.start, branch_end),
                });
                prev_end = branch_end;
                rest = &inner.orelse;
            }
            stmts => {
                orelse = build_else(stmts, prev_end, text);
                break;
            }
        }
    }

    IfStmt {
        test: convert_expr(&ifstmt.test, text),
        body,
        elifs,
        orelse,
        span,
    }
}

fn convert_else(orelse: &[rp::Stmt], prev_end: usize, text: &str) -> Option<ElseBranch> {
    build_else(orelse, prev_end, text)
}

fn build_else(stmts: &[rp::Stmt], prev_end: usize, text: &str) -> Option<ElseBranch> {
    if stmts.is_empty() {
        return None;
    }
    let first_start = span_of(rp::Ranged::range(&stmts[0])).start;
    let keyword_start = find_keyword_in(text, prev_end, first_start, "else").unwrap_or(first_start);
    let end = span_of(rp::Ranged::range(stmts.last().unwrap())).end;
    Some(ElseBranch {
        body: convert_body(stmts, text),
        span: Span::new(keyword_start, end),
        keyword_start,
    })
}

fn convert_try(
    span: Span,
    body: &[rp::Stmt],
    handlers: &[rp::ExceptHandler],
    orelse: &[rp::Stmt],
    finalbody: &[rp::Stmt],
    text: &str,
) -> TryStmt {
    let converted_handlers: Vec<ExceptHandler> = handlers
        .iter()
        .map(|h| {
            let rp::ExceptHandler::ExceptHandler(h) = h;
            let h_span = span_of(h.range);
            let name_span = h.name.as_ref().and_then(|n| {
                let from = h
                    .type_
                    .as_ref()
                    .map(|t| span_of(rp::Ranged::range(t.as_ref())).end)
                    .unwrap_or(h_span.start);
                let first_body = h
                    .body
                    .first()
                    .map(|s| span_of(rp::Ranged::range(s)).start)
                    .unwrap_or(h_span.end);
                find_word(&text[from..first_body], n.as_str())
                    .map(|off| Span::new(from + off, from + off + n.as_str().len()))
            });
            ExceptHandler {
                exc_type: h.type_.as_ref().map(|t| convert_expr(t, text)),
                name: h.name.as_ref().map(|n| n.to_string()),
                name_span,
                body: convert_body(&h.body, text),
                span: h_span,
            }
        })
        .collect();

    let handlers_end = converted_handlers
        .last()
        .map(|h| h.span.end)
        .unwrap_or_else(|| last_end(body, span));
    let orelse_branch = build_else(orelse, handlers_end, text);
    let orelse_end = orelse_branch
        .as_ref()
        .map(|b| b.span.end)
        .unwrap_or(handlers_end);
    let finally_branch = if finalbody.is_empty() {
        None
    } else {
        let first_start = span_of(rp::Ranged::range(&finalbody[0])).start;
        let kw = find_keyword_in(text, orelse_end, first_start, "finally").unwrap_or(first_start);
        let end = span_of(rp::Ranged::range(finalbody.last().unwrap())).end;
        Some(ElseBranch {
            body: convert_body(finalbody, text),
            span: Span::new(kw, end),
            keyword_start: kw,
        })
    };

    TryStmt {
        body: convert_body(body, text),
        handlers: converted_handlers,
        orelse: orelse_branch,
        finally: finally_branch,
        span,
    }
}

fn last_end(stmts: &[rp::Stmt], fallback: Span) -> usize {
    stmts
        .last()
        .map(|s| span_of(rp::Ranged::range(s)).end)
        .unwrap_or(fallback.end)
}

fn convert_expr(expr: &rp::Expr, text: &str) -> Expr {
    match expr {
        rp::Expr::Name(n) => Expr::Name(NameExpr {
            id: n.id.to_string(),
            ctx: convert_ctx(&n.ctx),
            span: span_of(n.range),
        }),
        rp::Expr::Attribute(a) => Expr::Attribute(AttributeExpr {
            value: Box::new(convert_expr(&a.value, text)),
            attr: a.attr.to_string(),
            ctx: convert_ctx(&a.ctx),
            span: span_of(a.range),
        }),
        rp::Expr::Subscript(s) => Expr::Subscript(SubscriptExpr {
            value: Box::new(convert_expr(&s.value, text)),
            index: Box::new(convert_expr(&s.slice, text)),
            ctx: convert_ctx(&s.ctx),
            span: span_of(s.range),
        }),
        rp::Expr::Call(c) => Expr::Call(CallExpr {
            func: Box::new(convert_expr(&c.func, text)),
            args: c.args.iter().map(|e| convert_expr(e, text)).collect(),
            keywords: c
                .keywords
                .iter()
                .map(|k| {
                    let k_span = span_of(k.range);
                    KeywordArg {
                        arg: k.arg.as_ref().map(|a| a.to_string()),
                        arg_span: k.arg.as_ref().map(|a| {
                            Span::new(k_span.start, k_span.start + a.as_str().len())
                        }),
                        value: convert_expr(&k.value, text),
                    }
                })
                .collect(),
            span: span_of(c.range),
        }),
        rp::Expr::BoolOp(b) => Expr::BoolOp(BoolOpExpr {
            op: match b.op {
                rp::BoolOp::And => BoolOpKind::And,
                rp::BoolOp::Or => BoolOpKind::Or,
            },
            values: b.values.iter().map(|e| convert_expr(e, text)).collect(),
            span: span_of(b.range),
        }),
        rp::Expr::BinOp(b) => Expr::BinOp(BinOpExpr {
            op: convert_binop(&b.op),
            left: Box::new(convert_expr(&b.left, text)),
            right: Box::new(convert_expr(&b.right, text)),
            span: span_of(b.range),
        }),
        rp::Expr::Compare(c) => Expr::Compare(CompareExpr {
            left: Box::new(convert_expr(&c.left, text)),
            ops: c.ops.iter().map(convert_cmpop).collect(),
            comparators: c.comparators.iter().map(|e| convert_expr(e, text)).collect(),
            span: span_of(c.range),
        }),
        rp::Expr::UnaryOp(u) => Expr::UnaryOp(UnaryOpExpr {
            op: match u.op {
                rp::UnaryOp::Not => UnaryOpKind::Not,
                rp::UnaryOp::USub => UnaryOpKind::USub,
                rp::UnaryOp::UAdd => UnaryOpKind::UAdd,
                rp::UnaryOp::Invert => UnaryOpKind::Invert,
            },
            operand: Box::new(convert_expr(&u.operand, text)),
            span: span_of(u.range),
        }),
        rp::Expr::Lambda(l) => Expr::Lambda(LambdaExpr {
            params: convert_params(&l.args, text),
            body: Box::new(convert_expr(&l.body, text)),
            span: span_of(l.range),
        }),
        rp::Expr::IfExp(i) => Expr::IfExp(IfExpExpr {
            test: Box::new(convert_expr(&i.test, text)),
            body: Box::new(convert_expr(&i.body, text)),
            orelse: Box::new(convert_expr(&i.orelse, text)),
            span: span_of(i.range),
        }),
        rp::Expr::Yield(y) => Expr::Yield(YieldExpr {
            value: y.value.as_ref().map(|e| Box::new(convert_expr(e, text))),
            span: span_of(y.range),
        }),
        rp::Expr::YieldFrom(y) => Expr::YieldFrom(YieldFromExpr {
            value: Box::new(convert_expr(&y.value, text)),
            span: span_of(y.range),
        }),
        rp::Expr::NamedExpr(n) => Expr::NamedExpr(NamedExprExpr {
            target: Box::new(convert_expr(&n.target, text)),
            value: Box::new(convert_expr(&n.value, text)),
            span: span_of(n.range),
        }),
        rp::Expr::ListComp(c) => convert_comp(
            CompKind::List,
            vec![convert_expr(&c.elt, text)],
            &c.generators,
            span_of(c.range),
            text,
        ),
        rp::Expr::SetComp(c) => convert_comp(
            CompKind::Set,
            vec![convert_expr(&c.elt, text)],
            &c.generators,
            span_of(c.range),
            text,
        ),
        rp::Expr::DictComp(c) => convert_comp(
            CompKind::Dict,
            vec![convert_expr(&c.key, text), convert_expr(&c.value, text)],
            &c.generators,
            span_of(c.range),
            text,
        ),
        rp::Expr::GeneratorExp(c) => convert_comp(
            CompKind::Generator,
            vec![convert_expr(&c.elt, text)],
            &c.generators,
            span_of(c.range),
            text,
        ),
        rp::Expr::Constant(c) => Expr::Constant(ConstantExpr {
            span: span_of(c.range),
        }),
        rp::Expr::Await(a) => Expr::Other(OtherExpr {
            kind: "await",
            children: vec![convert_expr(&a.value, text)],
            span: span_of(a.range),
        }),
        rp::Expr::Starred(s) => Expr::Other(OtherExpr {
            kind: "starred",
            children: vec![convert_expr(&s.value, text)],
            span: span_of(s.range),
        }),
        rp::Expr::Tuple(t) => Expr::Other(OtherExpr {
            kind: "tuple",
            children: t.elts.iter().map(|e| convert_expr(e, text)).collect(),
            span: span_of(t.range),
        }),
        rp::Expr::List(l) => Expr::Other(OtherExpr {
            kind: "list",
            children: l.elts.iter().map(|e| convert_expr(e, text)).collect(),
            span: span_of(l.range),
        }),
        rp::Expr::Set(s) => Expr::Other(OtherExpr {
            kind: "set",
            children: s.elts.iter().map(|e| convert_expr(e, text)).collect(),
            span: span_of(s.range),
        }),
        rp::Expr::Dict(d) => {
            let mut children = Vec::new();
            for k in d.keys.iter().flatten() {
                children.push(convert_expr(k, text));
            }
            for v in &d.values {
                children.push(convert_expr(v, text));
            }
            Expr::Other(OtherExpr {
                kind: "dict",
                children,
                span: span_of(d.range),
            })
        }
        rp::Expr::JoinedStr(j) => Expr::Other(OtherExpr {
            kind: "fstring",
            children: j.values.iter().map(|e| convert_expr(e, text)).collect(),
            span: span_of(j.range),
        }),
        rp::Expr::FormattedValue(f) => Expr::Other(OtherExpr {
            kind: "formatted_value",
            children: vec![convert_expr(&f.value, text)],
            span: span_of(f.range),
        }),
        rp::Expr::Slice(s) => {
            let mut children = Vec::new();
            for part in [&s.lower, &s.upper, &s.step].into_iter().flatten() {
                children.push(convert_expr(part, text));
            }
            Expr::Other(OtherExpr {
                kind: "slice",
                children,
                span: span_of(s.range),
            })
        }
    }
}

fn convert_comp(
    kind: CompKind,
    elements: Vec<Expr>,
    generators: &[rp::Comprehension],
    span: Span,
    text: &str,
) -> Expr {
    Expr::Comprehension(CompExpr {
        kind,
        elements,
        generators: generators
            .iter()
            .map(|g| CompClause {
                target: convert_expr(&g.target, text),
                iter: convert_expr(&g.iter, text),
                ifs: g.ifs.iter().map(|e| convert_expr(e, text)).collect(),
                is_async: g.is_async,
            })
            .collect(),
        span,
    })
}

fn convert_ctx(ctx: &rp::ExprContext) -> NameCtx {
    match ctx {
        rp::ExprContext::Load => NameCtx::Load,
        rp::ExprContext::Store => NameCtx::Store,
        rp::ExprContext::Del => NameCtx::Del,
    }
}

fn convert_binop(op: &rp::Operator) -> BinOpKind {
    match op {
        rp::Operator::Add => BinOpKind::Add,
        rp::Operator::Sub => BinOpKind::Sub,
        rp::Operator::Mult => BinOpKind::Mult,
        rp::Operator::Div => BinOpKind::Div,
        rp::Operator::FloorDiv => BinOpKind::FloorDiv,
        rp::Operator::Mod => BinOpKind::Mod,
        rp::Operator::Pow => BinOpKind::Pow,
        rp::Operator::LShift => BinOpKind::LShift,
        rp::Operator::RShift => BinOpKind::RShift,
        rp::Operator::BitOr => BinOpKind::BitOr,
        rp::Operator::BitXor => BinOpKind::BitXor,
        rp::Operator::BitAnd => BinOpKind::BitAnd,
        rp::Operator::MatMult => BinOpKind::MatMult,
    }
}

fn convert_cmpop(op: &rp::CmpOp) -> CmpOpKind {
    match op {
        rp::CmpOp::Eq => CmpOpKind::Eq,
        rp::CmpOp::NotEq => CmpOpKind::NotEq,
        rp::CmpOp::Lt => CmpOpKind::Lt,
        rp::CmpOp::LtE => CmpOpKind::LtE,
        rp::CmpOp::Gt => CmpOpKind::Gt,
        rp::CmpOp::GtE => CmpOpKind::GtE,
        rp::CmpOp::Is => CmpOpKind::Is,
        rp::CmpOp::IsNot => CmpOpKind::IsNot,
        rp::CmpOp::In => CmpOpKind::In,
        rp::CmpOp::NotIn => CmpOpKind::NotIn,
    }
}

/// True when the text at `offset` begins with `keyword` followed by a
/// non-identifier character.
fn starts_with_keyword(text: &str, offset: usize, keyword: &str) -> bool {
    let rest = &text[offset.min(text.len())..];
    rest.starts_with(keyword)
        && !rest[keyword.len()..]
            .chars()
            .next()
            .is_some_and(|c| c.is_alphanumeric() || c == '_')
}

/// Finds a keyword token between two offsets (last occurrence wins).
fn find_keyword_in(text: &str, from: usize, to: usize, keyword: &str) -> Option<usize> {
    let from = from.min(text.len());
    let to = to.min(text.len());
    if from >= to {
        return None;
    }
    let region = &text[from..to];
    let mut found = None;
    let mut search_from = 0;
    while let Some(pos) = region[search_from..].find(keyword) {
        let abs = search_from + pos;
        let before_ok = abs == 0
            || !region[..abs]
                .chars()
                .next_back()
                .is_some_and(|c| c.is_alphanumeric() || c == '_');
        let after = &region[abs + keyword.len()..];
        let after_ok = !after.chars().next().is_some_and(|c| c.is_alphanumeric() || c == '_');
        if before_ok && after_ok {
            found = Some(from + abs);
        }
        search_from = abs + keyword.len();
    }
    found
}

/// First word-boundary occurrence of `word` in `haystack`.
fn find_word(haystack: &str, word: &str) -> Option<usize> {
    let mut search_from = 0;
    while let Some(pos) = haystack[search_from..].find(word) {
        let abs = search_from + pos;
        let before_ok = abs == 0
            || !haystack[..abs]
                .chars()
                .next_back()
                .is_some_and(|c| c.is_alphanumeric() || c == '_');
        let after = &haystack[abs + word.len()..];
        let after_ok = !after.chars().next().is_some_and(|c| c.is_alphanumeric() || c == '_');
        if before_ok && after_ok {
            return Some(abs);
        }
        search_from = abs + word.len();
    }
    None
}

/// Span of the identifier that names a `def`/`class` header.
fn find_name_after_keyword(text: &str, header_start: usize, keyword: &str, name: &str) -> Span {
    let rest = &text[header_start.min(text.len())..];
    if let Some(kw_off) = {
        let mut found = None;
        let mut search_from = 0;
        while let Some(pos) = rest[search_from..].find(keyword) {
            let abs = search_from + pos;
            let after = &rest[abs + keyword.len()..];
            if !after.chars().next().is_some_and(|c| c.is_alphanumeric() || c == '_') {
                found = Some(abs);
                break;
            }
            search_from = abs + keyword.len();
        }
        found
    } {
        let after_kw = kw_off + keyword.len();
        if let Some(name_off) = find_word(&rest[after_kw..], name) {
            let start = header_start + after_kw + name_off;
            return Span::new(start, start + name.len());
        }
    }
    Span::new(header_start, header_start + name.len().min(text.len() - header_start.min(text.len())))
}
