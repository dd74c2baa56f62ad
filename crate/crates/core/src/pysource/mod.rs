//! Parsing Python sources into a span-preserving tree and rendering edits.
//!
//! A [`SourceUnit`] is immutable after parse: the original text is kept
//! verbatim, every node carries a byte span into it, and edits are expressed
//! as [`PatchSet`]s that produce new units. Rendering an unedited unit is the
//! original text byte-for-byte.

pub mod ast;
mod comments;
mod convert;
pub mod edit;

use std::path::{Path, PathBuf};

pub use comments::Comment;
pub use edit::{line_indent, whole_lines, Patch, PatchError, PatchSet, SpanMap};

use rustpython_parser::{ast as rp, Parse};

use crate::span::{LineIndex, Span};
use ast::*;

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("{path}:{line}:{col}: syntax error: {message}")]
    Syntax {
        path: String,
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{path}: encoding error: {message}")]
    Encoding { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("patch application failed: {0}")]
    Patch(#[from] PatchError),
    #[error("edit produced unparseable text: {0}")]
    Reparse(#[source] Box<ParseError>),
}

/// One parsed source file.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    path: Option<PathBuf>,
    text: String,
    lines: LineIndex,
    tree: Module,
    comments: Vec<Comment>,
}

impl SourceUnit {
    pub fn parse_file(path: &Path) -> Result<SourceUnit, ParseError> {
        let bytes = std::fs::read(path).map_err(|source| ParseError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let text = String::from_utf8(bytes).map_err(|e| ParseError::Encoding {
            path: path.display().to_string(),
            message: e.utf8_error().to_string(),
        })?;
        Self::parse_named(text, Some(path.to_path_buf()))
    }

    pub fn parse_str(text: impl Into<String>) -> Result<SourceUnit, ParseError> {
        Self::parse_named(text.into(), None)
    }

    fn parse_named(text: String, path: Option<PathBuf>) -> Result<SourceUnit, ParseError> {
        let label = path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "<memory>".to_string());
        let lines = LineIndex::new(&text);
        let suite = rp::Suite::parse(&text, &label).map_err(|err| {
            let offset = err.offset.to_usize();
            let pos = lines.position(offset);
            ParseError::Syntax {
                path: label.clone(),
                line: pos.line,
                col: pos.col,
                message: err.error.to_string(),
            }
        })?;
        let tree = convert::convert_module(&suite, &text);
        let comments = comments::extract_comments(&text, &lines);
        Ok(SourceUnit {
            path,
            text,
            lines,
            tree,
            comments,
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn path_label(&self) -> String {
        self.path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "<memory>".to_string())
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn lines(&self) -> &LineIndex {
        &self.lines
    }

    pub fn tree(&self) -> &Module {
        &self.tree
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn slice(&self, span: Span) -> &str {
        &self.text[span.start.min(self.text.len())..span.end.min(self.text.len())]
    }

    /// Emits the unit's source text. Unedited units render byte-identically
    /// to their input.
    pub fn render(&self) -> &str {
        &self.text
    }

    /// Applies edits and re-parses, yielding a new unit.
    pub fn apply(&self, patches: &PatchSet) -> Result<SourceUnit, RenderError> {
        let new_text = patches.apply(&self.text)?;
        SourceUnit::parse_named(new_text, self.path.clone())
            .map_err(|e| RenderError::Reparse(Box::new(e)))
    }

    /// Innermost function whose span contains `span`, or `None` at module level.
    pub fn enclosing_function(&self, span: Span) -> Option<&FunctionDef> {
        let mut found: Option<&FunctionDef> = None;
        fn visit<'a>(stmts: &'a [Stmt], span: Span, found: &mut Option<&'a FunctionDef>) {
            for stmt in stmts {
                if !stmt.span().contains(span) {
                    continue;
                }
                if let Stmt::FunctionDef(def) = stmt {
                    *found = Some(def);
                }
                for block in stmt_blocks(stmt) {
                    visit(block.stmts, span, found);
                }
            }
        }
        visit(&self.tree.body, span, &mut found);
        found
    }

    /// The top-level statement containing `span`, if any.
    pub fn enclosing_top_level(&self, span: Span) -> Option<&Stmt> {
        self.tree.body.iter().find(|s| s.span().contains(span))
    }

    /// Deletes one statement while keeping the text parseable: sole statements
    /// of a compound body are replaced by `pass`, full-line statements vanish
    /// with their lines, and inline bodies are rewritten in place.
    pub fn delete_statement(&self, stmt_span: Span) -> Option<PatchSet> {
        let block = self.find_block_of(stmt_span)?;
        let mut patches = PatchSet::new();
        let sole = block.stmts.len() == 1 && block.kind != BlockKind::Module;
        let line_start = self.text[..stmt_span.start].rfind('\n').map(|i| i + 1).unwrap_or(0);
        let inline = self.text[line_start..stmt_span.start]
            .chars()
            .any(|c| !c.is_whitespace());
        if sole || inline {
            patches.push(Patch::replace(stmt_span, "pass"));
        } else {
            patches.push(Patch::delete(whole_lines(&self.text, stmt_span)));
        }
        Some(patches)
    }

    /// The statement block directly holding the statement with span `target`.
    pub fn find_block_of(&self, target: Span) -> Option<BlockRef<'_>> {
        fn search<'a>(stmts: &'a [Stmt], kind: BlockKind, target: Span) -> Option<BlockRef<'a>> {
            if stmts.iter().any(|s| s.span() == target) {
                return Some(BlockRef { stmts, kind });
            }
            for stmt in stmts {
                if !stmt.span().contains(target) {
                    continue;
                }
                for block in stmt_blocks(stmt) {
                    if let Some(found) = search(block.stmts, block.kind, target) {
                        return Some(found);
                    }
                }
            }
            None
        }
        search(&self.tree.body, BlockKind::Module, target)
    }

    /// All function definitions in the unit, outermost first.
    pub fn functions(&self) -> Vec<&FunctionDef> {
        let mut out = Vec::new();
        fn visit<'a>(stmts: &'a [Stmt], out: &mut Vec<&'a FunctionDef>) {
            for stmt in stmts {
                if let Stmt::FunctionDef(def) = stmt {
                    out.push(def);
                }
                for block in stmt_blocks(stmt) {
                    visit(block.stmts, out);
                }
            }
        }
        visit(&self.tree.body, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Module,
    FunctionBody,
    ClassBody,
    IfBody,
    ElifBody,
    ElseBody,
    LoopBody,
    WithBody,
    TryBody,
    HandlerBody,
    FinallyBody,
    OtherBody,
}

impl BlockKind {
    /// Blocks that count as nested code blocks for the empty-block rule.
    pub fn is_nested_block(&self) -> bool {
        matches!(
            self,
            BlockKind::IfBody
                | BlockKind::ElifBody
                | BlockKind::ElseBody
                | BlockKind::LoopBody
                | BlockKind::WithBody
                | BlockKind::TryBody
                | BlockKind::HandlerBody
                | BlockKind::FinallyBody
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BlockRef<'a> {
    pub stmts: &'a [Stmt],
    pub kind: BlockKind,
}

/// The statement blocks nested directly under one statement.
pub fn stmt_blocks(stmt: &Stmt) -> Vec<BlockRef<'_>> {
    let mut out = Vec::new();
    match stmt {
        Stmt::FunctionDef(def) => out.push(BlockRef {
            stmts: &def.body,
            kind: BlockKind::FunctionBody,
        }),
        Stmt::ClassDef(def) => out.push(BlockRef {
            stmts: &def.body,
            kind: BlockKind::ClassBody,
        }),
        Stmt::If(s) => {
            out.push(BlockRef {
                stmts: &s.body,
                kind: BlockKind::IfBody,
            });
            for branch in &s.elifs {
                out.push(BlockRef {
                    stmts: &branch.body,
                    kind: BlockKind::ElifBody,
                });
            }
            if let Some(orelse) = &s.orelse {
                out.push(BlockRef {
                    stmts: &orelse.body,
                    kind: BlockKind::ElseBody,
                });
            }
        }
        Stmt::For(s) => {
            out.push(BlockRef {
                stmts: &s.body,
                kind: BlockKind::LoopBody,
            });
            if let Some(orelse) = &s.orelse {
                out.push(BlockRef {
                    stmts: &orelse.body,
                    kind: BlockKind::ElseBody,
                });
            }
        }
        Stmt::While(s) => {
            out.push(BlockRef {
                stmts: &s.body,
                kind: BlockKind::LoopBody,
            });
            if let Some(orelse) = &s.orelse {
                out.push(BlockRef {
                    stmts: &orelse.body,
                    kind: BlockKind::ElseBody,
                });
            }
        }
        Stmt::With(s) => out.push(BlockRef {
            stmts: &s.body,
            kind: BlockKind::WithBody,
        }),
        Stmt::Try(s) => {
            out.push(BlockRef {
                stmts: &s.body,
                kind: BlockKind::TryBody,
            });
            for handler in &s.handlers {
                out.push(BlockRef {
                    stmts: &handler.body,
                    kind: BlockKind::HandlerBody,
                });
            }
            if let Some(orelse) = &s.orelse {
                out.push(BlockRef {
                    stmts: &orelse.body,
                    kind: BlockKind::ElseBody,
                });
            }
            if let Some(finally) = &s.finally {
                out.push(BlockRef {
                    stmts: &finally.body,
                    kind: BlockKind::FinallyBody,
                });
            }
        }
        Stmt::Other(s) => {
            for body in &s.bodies {
                out.push(BlockRef {
                    stmts: body,
                    kind: BlockKind::OtherBody,
                });
            }
        }
        _ => {}
    }
    out
}

/// Expressions appearing directly in a statement's head (not in nested blocks).
pub fn stmt_exprs(stmt: &Stmt) -> Vec<&Expr> {
    let mut out = Vec::new();
    match stmt {
        Stmt::FunctionDef(def) => {
            out.extend(def.decorators.iter());
            for p in &def.params {
                out.extend(p.default.iter());
                out.extend(p.annotation.iter());
            }
        }
        Stmt::ClassDef(def) => {
            out.extend(def.decorators.iter());
            out.extend(def.bases.iter());
            out.extend(def.keywords.iter());
        }
        Stmt::If(s) => {
            out.push(&s.test);
            for branch in &s.elifs {
                out.push(&branch.test);
            }
        }
        Stmt::For(s) => {
            out.push(&s.target);
            out.push(&s.iter);
        }
        Stmt::While(s) => out.push(&s.test),
        Stmt::With(s) => {
            for item in &s.items {
                out.push(&item.context);
                out.extend(item.as_target.iter());
            }
        }
        Stmt::Try(s) => {
            for handler in &s.handlers {
                out.extend(handler.exc_type.iter());
            }
        }
        Stmt::Return(s) => out.extend(s.value.iter()),
        Stmt::Raise(s) => {
            out.extend(s.exc.iter());
            out.extend(s.cause.iter());
        }
        Stmt::Assign(s) => {
            out.extend(s.targets.iter());
            out.extend(s.value.iter());
            out.extend(s.annotation.iter());
        }
        Stmt::Expr(s) => out.push(&s.value),
        Stmt::Other(s) => out.extend(s.exprs.iter()),
        Stmt::Break(_) | Stmt::Continue(_) | Stmt::Pass(_) => {}
    }
    out
}

/// Pre-order walk over an expression and all subexpressions.
pub fn walk_expr<'a>(expr: &'a Expr, f: &mut impl FnMut(&'a Expr)) {
    f(expr);
    match expr {
        Expr::Name(_) | Expr::Constant(_) => {}
        Expr::Attribute(e) => walk_expr(&e.value, f),
        Expr::Subscript(e) => {
            walk_expr(&e.value, f);
            walk_expr(&e.index, f);
        }
        Expr::Call(e) => {
            walk_expr(&e.func, f);
            for a in &e.args {
                walk_expr(a, f);
            }
            for k in &e.keywords {
                walk_expr(&k.value, f);
            }
        }
        Expr::BoolOp(e) => {
            for v in &e.values {
                walk_expr(v, f);
            }
        }
        Expr::BinOp(e) => {
            walk_expr(&e.left, f);
            walk_expr(&e.right, f);
        }
        Expr::Compare(e) => {
            walk_expr(&e.left, f);
            for c in &e.comparators {
                walk_expr(c, f);
            }
        }
        Expr::UnaryOp(e) => walk_expr(&e.operand, f),
        Expr::Lambda(e) => {
            for p in &e.params {
                if let Some(d) = &p.default {
                    walk_expr(d, f);
                }
            }
            walk_expr(&e.body, f);
        }
        Expr::IfExp(e) => {
            walk_expr(&e.test, f);
            walk_expr(&e.body, f);
            walk_expr(&e.orelse, f);
        }
        Expr::Yield(e) => {
            if let Some(v) = &e.value {
                walk_expr(v, f);
            }
        }
        Expr::YieldFrom(e) => walk_expr(&e.value, f),
        Expr::NamedExpr(e) => {
            walk_expr(&e.target, f);
            walk_expr(&e.value, f);
        }
        Expr::Comprehension(e) => {
            for el in &e.elements {
                walk_expr(el, f);
            }
            for g in &e.generators {
                walk_expr(&g.target, f);
                walk_expr(&g.iter, f);
                for i in &g.ifs {
                    walk_expr(i, f);
                }
            }
        }
        Expr::Other(e) => {
            for c in &e.children {
                walk_expr(c, f);
            }
        }
    }
}

/// Pre-order walk over statements, descending into nested blocks.
pub fn walk_stmts<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for stmt in stmts {
        f(stmt);
        for block in stmt_blocks(stmt) {
            walk_stmts(block.stmts, f);
        }
    }
}
