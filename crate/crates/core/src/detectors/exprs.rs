//! Structural expression comparison, span-insensitive.

use crate::pysource::ast::*;
use crate::pysource::SourceUnit;

/// Structural equality of two expressions, ignoring spans (and therefore any
/// parenthesization, which the tree never records).
pub fn exprs_equal(unit: &SourceUnit, a: &Expr, b: &Expr) -> bool {
    match (a, b) {
        (Expr::Name(x), Expr::Name(y)) => x.id == y.id,
        (Expr::Attribute(x), Expr::Attribute(y)) => {
            x.attr == y.attr && exprs_equal(unit, &x.value, &y.value)
        }
        (Expr::Subscript(x), Expr::Subscript(y)) => {
            exprs_equal(unit, &x.value, &y.value) && exprs_equal(unit, &x.index, &y.index)
        }
        (Expr::Call(x), Expr::Call(y)) => {
            exprs_equal(unit, &x.func, &y.func)
                && seq_equal(unit, &x.args, &y.args)
                && x.keywords.len() == y.keywords.len()
                && x.keywords.iter().zip(&y.keywords).all(|(ka, kb)| {
                    ka.arg == kb.arg && exprs_equal(unit, &ka.value, &kb.value)
                })
        }
        (Expr::BoolOp(x), Expr::BoolOp(y)) => x.op == y.op && seq_equal(unit, &x.values, &y.values),
        (Expr::BinOp(x), Expr::BinOp(y)) => {
            x.op == y.op
                && exprs_equal(unit, &x.left, &y.left)
                && exprs_equal(unit, &x.right, &y.right)
        }
        (Expr::Compare(x), Expr::Compare(y)) => {
            x.ops == y.ops
                && exprs_equal(unit, &x.left, &y.left)
                && seq_equal(unit, &x.comparators, &y.comparators)
        }
        (Expr::UnaryOp(x), Expr::UnaryOp(y)) => {
            x.op == y.op && exprs_equal(unit, &x.operand, &y.operand)
        }
        (Expr::IfExp(x), Expr::IfExp(y)) => {
            exprs_equal(unit, &x.test, &y.test)
                && exprs_equal(unit, &x.body, &y.body)
                && exprs_equal(unit, &x.orelse, &y.orelse)
        }
        (Expr::NamedExpr(x), Expr::NamedExpr(y)) => {
            exprs_equal(unit, &x.target, &y.target) && exprs_equal(unit, &x.value, &y.value)
        }
        // Constants compare by source text: `1` != `1.0`, `"a"` != 'b'.
        (Expr::Constant(x), Expr::Constant(y)) => unit.slice(x.span) == unit.slice(y.span),
        (Expr::Lambda(_), Expr::Lambda(_))
        | (Expr::Yield(_), Expr::Yield(_))
        | (Expr::YieldFrom(_), Expr::YieldFrom(_))
        | (Expr::Comprehension(_), Expr::Comprehension(_)) => {
            // Conservatively unequal: these carry scopes or effects.
            false
        }
        (Expr::Other(x), Expr::Other(y)) => {
            x.kind == y.kind
                && x.children.len() == y.children.len()
                && x.children
                    .iter()
                    .zip(&y.children)
                    .all(|(ca, cb)| exprs_equal(unit, ca, cb))
        }
        _ => false,
    }
}

fn seq_equal(unit: &SourceUnit, xs: &[Expr], ys: &[Expr]) -> bool {
    xs.len() == ys.len() && xs.iter().zip(ys).all(|(a, b)| exprs_equal(unit, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pysource::SourceUnit;

    fn first_two_exprs(src: &str) -> (SourceUnit, Span, Span) {
        let unit = SourceUnit::parse_str(src).unwrap();
        let spans: Vec<Span> = unit
            .tree()
            .body
            .iter()
            .map(|s| match s {
                Stmt::Expr(e) => e.value.span(),
                _ => panic!("fixture lines must be expressions"),
            })
            .collect();
        (unit, spans[0], spans[1])
    }

    use crate::pysource::ast::Stmt;
    use crate::span::Span;

    fn exprs_of(unit: &SourceUnit) -> Vec<&Expr> {
        unit.tree()
            .body
            .iter()
            .map(|s| match s {
                Stmt::Expr(e) => &e.value,
                _ => panic!(),
            })
            .collect()
    }

    #[test]
    fn parenthesization_is_invisible() {
        let unit = SourceUnit::parse_str("a - b\n(a) - (b)\n").unwrap();
        let es = exprs_of(&unit);
        assert!(exprs_equal(&unit, es[0], es[1]));
        let _ = first_two_exprs; // silence when unused on some toolchains
    }

    #[test]
    fn attribute_chains_compare_by_path() {
        let unit = SourceUnit::parse_str("self.addr\nself.addr\nself.other\n").unwrap();
        let es = exprs_of(&unit);
        assert!(exprs_equal(&unit, es[0], es[1]));
        assert!(!exprs_equal(&unit, es[0], es[2]));
    }

    #[test]
    fn constants_compare_by_text() {
        let unit = SourceUnit::parse_str("1\n1\n1.0\n").unwrap();
        let es = exprs_of(&unit);
        assert!(exprs_equal(&unit, es[0], es[1]));
        assert!(!exprs_equal(&unit, es[0], es[2]));
    }
}
