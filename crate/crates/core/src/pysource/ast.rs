//! Span-carrying syntax tree for Python sources.
//!
//! The tree keeps the node kinds the smell rules need first-class (functions,
//! branches, loops, assignments, the expression forms that matter) and folds
//! everything else into opaque `Other` nodes that still carry spans and
//! children, so traversal and span queries work over arbitrary Python 3 code.

use crate::span::Span;

#[derive(Debug, Clone)]
pub struct Module {
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum Stmt {
    FunctionDef(FunctionDef),
    ClassDef(ClassDef),
    If(IfStmt),
    For(ForStmt),
    While(WhileStmt),
    With(WithStmt),
    Try(TryStmt),
    Return(ReturnStmt),
    Raise(RaiseStmt),
    Break(Span),
    Continue(Span),
    Pass(Span),
    Assign(AssignStmt),
    Expr(ExprStmt),
    /// Imports, del, assert, global/nonlocal, match, type aliases, ...
    Other(OtherStmt),
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::FunctionDef(s) => s.span,
            Stmt::ClassDef(s) => s.span,
            Stmt::If(s) => s.span,
            Stmt::For(s) => s.span,
            Stmt::While(s) => s.span,
            Stmt::With(s) => s.span,
            Stmt::Try(s) => s.span,
            Stmt::Return(s) => s.span,
            Stmt::Raise(s) => s.span,
            Stmt::Break(sp) | Stmt::Continue(sp) | Stmt::Pass(sp) => *sp,
            Stmt::Assign(s) => s.span,
            Stmt::Expr(s) => s.span,
            Stmt::Other(s) => s.span,
        }
    }

    /// Terminators make every following statement in the same block unreachable.
    pub fn is_terminator(&self) -> bool {
        matches!(
            self,
            Stmt::Return(_) | Stmt::Raise(_) | Stmt::Break(_) | Stmt::Continue(_)
        )
    }

    pub fn terminator_keyword(&self) -> Option<&'static str> {
        match self {
            Stmt::Return(_) => Some("return"),
            Stmt::Raise(_) => Some("raise"),
            Stmt::Break(_) => Some("break"),
            Stmt::Continue(_) => Some("continue"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    PositionalOnly,
    Positional,
    VarArgs,
    KeywordOnly,
    KwArgs,
}

#[derive(Debug, Clone)]
pub struct Param {
    pub name: String,
    pub name_span: Span,
    pub kind: ParamKind,
    pub default: Option<Expr>,
    pub annotation: Option<Expr>,
}

#[derive(Debug, Clone)]
pub struct FunctionDef {
    pub name: String,
    pub name_span: Span,
    /// Declaration order: positional-only, positional, *args, keyword-only, **kwargs.
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub decorators: Vec<Expr>,
    pub is_async: bool,
    /// Covers decorators through the last body statement.
    pub span: Span,
    /// Span of the `def` keyword through the body; excludes decorators.
    pub def_span: Span,
}

#[derive(Debug, Clone)]
pub struct ClassDef {
    pub name: String,
    pub name_span: Span,
    pub bases: Vec<Expr>,
    pub keywords: Vec<Expr>,
    pub body: Vec<Stmt>,
    pub decorators: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct ElifBranch {
    pub test: Expr,
    pub body: Vec<Stmt>,
    /// From the `elif` keyword through the last statement of its body.
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct ElseBranch {
    pub body: Vec<Stmt>,
    /// From the `else` keyword through the last statement of its body.
    pub span: Span,
    /// Offset of the `else` keyword.
    pub keyword_start: usize,
}

#[derive(Debug, Clone)]
pub struct IfStmt {
    pub test: Expr,
    pub body: Vec<Stmt>,
    pub elifs: Vec<ElifBranch>,
    pub orelse: Option<ElseBranch>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct ForStmt {
    pub target: Expr,
    pub iter: Expr,
    pub body: Vec<Stmt>,
    pub orelse: Option<ElseBranch>,
    pub is_async: bool,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct WhileStmt {
    pub test: Expr,
    pub body: Vec<Stmt>,
    pub orelse: Option<ElseBranch>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct WithItem {
    pub context: Expr,
    pub as_target: Option<Expr>,
}

#[derive(Debug, Clone)]
pub struct WithStmt {
    pub items: Vec<WithItem>,
    pub body: Vec<Stmt>,
    pub is_async: bool,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct ExceptHandler {
    pub exc_type: Option<Expr>,
    pub name: Option<String>,
    pub name_span: Option<Span>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct TryStmt {
    pub body: Vec<Stmt>,
    pub handlers: Vec<ExceptHandler>,
    pub orelse: Option<ElseBranch>,
    pub finally: Option<ElseBranch>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct ReturnStmt {
    pub value: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct RaiseStmt {
    pub exc: Option<Expr>,
    pub cause: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct AssignStmt {
    pub targets: Vec<Expr>,
    /// Absent only for a bare annotation like `x: int`.
    pub value: Option<Expr>,
    pub annotation: Option<Expr>,
    pub augmented: bool,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct ExprStmt {
    pub value: Expr,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct OtherStmt {
    pub kind: &'static str,
    /// Nested statement blocks (match-case bodies and the like), in order.
    pub bodies: Vec<Vec<Stmt>>,
    /// Expressions appearing directly in the statement head.
    pub exprs: Vec<Expr>,
    /// Names bound by the statement (import aliases, global/nonlocal targets).
    pub bound_names: Vec<(String, Span)>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolOpKind {
    And,
    Or,
}

impl BoolOpKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoolOpKind::And => "and",
            BoolOpKind::Or => "or",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOpKind {
    Add,
    Sub,
    Mult,
    Div,
    FloorDiv,
    Mod,
    Pow,
    LShift,
    RShift,
    BitOr,
    BitXor,
    BitAnd,
    MatMult,
}

impl BinOpKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BinOpKind::Add => "+",
            BinOpKind::Sub => "-",
            BinOpKind::Mult => "*",
            BinOpKind::Div => "/",
            BinOpKind::FloorDiv => "//",
            BinOpKind::Mod => "%",
            BinOpKind::Pow => "**",
            BinOpKind::LShift => "<<",
            BinOpKind::RShift => ">>",
            BinOpKind::BitOr => "|",
            BinOpKind::BitXor => "^",
            BinOpKind::BitAnd => "&",
            BinOpKind::MatMult => "@",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOpKind {
    Eq,
    NotEq,
    Lt,
    LtE,
    Gt,
    GtE,
    Is,
    IsNot,
    In,
    NotIn,
}

impl CmpOpKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CmpOpKind::Eq => "==",
            CmpOpKind::NotEq => "!=",
            CmpOpKind::Lt => "<",
            CmpOpKind::LtE => "<=",
            CmpOpKind::Gt => ">",
            CmpOpKind::GtE => ">=",
            CmpOpKind::Is => "is",
            CmpOpKind::IsNot => "is not",
            CmpOpKind::In => "in",
            CmpOpKind::NotIn => "not in",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameCtx {
    Load,
    Store,
    Del,
}

#[derive(Debug, Clone)]
pub enum Expr {
    Name(NameExpr),
    Attribute(AttributeExpr),
    Subscript(SubscriptExpr),
    Call(CallExpr),
    BoolOp(BoolOpExpr),
    BinOp(BinOpExpr),
    Compare(CompareExpr),
    UnaryOp(UnaryOpExpr),
    Lambda(LambdaExpr),
    IfExp(IfExpExpr),
    Yield(YieldExpr),
    YieldFrom(YieldFromExpr),
    NamedExpr(NamedExprExpr),
    Comprehension(CompExpr),
    Constant(ConstantExpr),
    /// Tuples, lists, dicts, f-strings, starred, await, slices, ...
    Other(OtherExpr),
}

#[derive(Debug, Clone)]
pub struct NameExpr {
    pub id: String,
    pub ctx: NameCtx,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct AttributeExpr {
    pub value: Box<Expr>,
    pub attr: String,
    pub ctx: NameCtx,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct SubscriptExpr {
    pub value: Box<Expr>,
    pub index: Box<Expr>,
    pub ctx: NameCtx,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct KeywordArg {
    /// `None` for `**kwargs` splats.
    pub arg: Option<String>,
    pub arg_span: Option<Span>,
    pub value: Expr,
}

#[derive(Debug, Clone)]
pub struct CallExpr {
    pub func: Box<Expr>,
    pub args: Vec<Expr>,
    pub keywords: Vec<KeywordArg>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct BoolOpExpr {
    pub op: BoolOpKind,
    pub values: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct BinOpExpr {
    pub op: BinOpKind,
    pub left: Box<Expr>,
    pub right: Box<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct CompareExpr {
    pub left: Box<Expr>,
    pub ops: Vec<CmpOpKind>,
    pub comparators: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOpKind {
    Not,
    USub,
    UAdd,
    Invert,
}

#[derive(Debug, Clone)]
pub struct UnaryOpExpr {
    pub op: UnaryOpKind,
    pub operand: Box<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct LambdaExpr {
    pub params: Vec<Param>,
    pub body: Box<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct IfExpExpr {
    pub test: Box<Expr>,
    pub body: Box<Expr>,
    pub orelse: Box<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct YieldExpr {
    pub value: Option<Box<Expr>>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct YieldFromExpr {
    pub value: Box<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct NamedExprExpr {
    pub target: Box<Expr>,
    pub value: Box<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompKind {
    List,
    Set,
    Dict,
    Generator,
}

#[derive(Debug, Clone)]
pub struct CompClause {
    pub target: Expr,
    pub iter: Expr,
    pub ifs: Vec<Expr>,
    pub is_async: bool,
}

#[derive(Debug, Clone)]
pub struct CompExpr {
    pub kind: CompKind,
    /// Element expression(s): one for list/set/generator, key+value for dict.
    pub elements: Vec<Expr>,
    pub generators: Vec<CompClause>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct ConstantExpr {
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct OtherExpr {
    pub kind: &'static str,
    pub children: Vec<Expr>,
    pub span: Span,
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Name(e) => e.span,
            Expr::Attribute(e) => e.span,
            Expr::Subscript(e) => e.span,
            Expr::Call(e) => e.span,
            Expr::BoolOp(e) => e.span,
            Expr::BinOp(e) => e.span,
            Expr::Compare(e) => e.span,
            Expr::UnaryOp(e) => e.span,
            Expr::Lambda(e) => e.span,
            Expr::IfExp(e) => e.span,
            Expr::Yield(e) => e.span,
            Expr::YieldFrom(e) => e.span,
            Expr::NamedExpr(e) => e.span,
            Expr::Comprehension(e) => e.span,
            Expr::Constant(e) => e.span,
            Expr::Other(e) => e.span,
        }
    }

    /// True for `name` / `a.b.c` chains built solely from names and attributes.
    pub fn is_name_or_attribute_chain(&self) -> bool {
        match self {
            Expr::Name(_) => true,
            Expr::Attribute(a) => a.value.is_name_or_attribute_chain(),
            _ => false,
        }
    }

    /// Dotted-path rendering of a name/attribute chain, e.g. `self.addr`.
    pub fn chain_repr(&self) -> Option<String> {
        match self {
            Expr::Name(n) => Some(n.id.clone()),
            Expr::Attribute(a) => Some(format!("{}.{}", a.value.chain_repr()?, a.attr)),
            _ => None,
        }
    }
}
