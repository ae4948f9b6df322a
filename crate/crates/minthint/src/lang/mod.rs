//! The mini imperative language: AST, parser, type checker, printer,
//! subexpression extraction, size measure, and statement normalization.

pub mod ast;
mod lexer;
pub mod normalize;
mod parser;
pub mod print;
pub mod typecheck;

use std::collections::HashSet;

pub use ast::*;
pub use normalize::{normalize, target_scope, NormalizedTarget, TargetComponent};
pub use parser::{parse_expr, parse_program as parse_only};
pub use print::{pretty_expr, pretty_program};
pub use typecheck::{expr_type, vars_at};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LangError {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: Line, message: String },
    #[error("type error at line {line}: {message}")]
    Type { line: Line, message: String },
    #[error("unsupported statement at line {line}: {message}")]
    Normalize { line: Line, message: String },
}

impl LangError {
    pub fn line(&self) -> Line {
        match self {
            LangError::Syntax { line, .. }
            | LangError::Type { line, .. }
            | LangError::Normalize { line, .. } => *line,
        }
    }
}

/// Parse and type-check a program.
pub fn parse_program(source: &str) -> Result<Program, LangError> {
    let program = parser::parse_program(source)?;
    typecheck::check_program(&program)?;
    Ok(program)
}

/// All subtrees of `e`, including `e` itself, deduplicated structurally.
/// Preorder of first occurrence, so the whole expression comes first.
pub fn subexps(e: &Expr) -> Vec<Expr> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    preorder(e, &mut seen, &mut out);
    out
}

fn preorder(e: &Expr, seen: &mut HashSet<Expr>, out: &mut Vec<Expr>) {
    if seen.insert(e.clone()) {
        out.push(e.clone());
    }
    for child in e.children() {
        preorder(child, seen, out);
    }
}

/// Expression size: AST node count, except an array read counts as one
/// node regardless of its index expression.
pub fn expr_size(e: &Expr) -> usize {
    match e {
        Expr::Const(_) | Expr::Var(_) | Expr::Index { .. } => 1,
        Expr::Unary { operand, .. } => 1 + expr_size(operand),
        Expr::Binary { lhs, rhs, .. } => 1 + expr_size(lhs) + expr_size(rhs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(src: &str) -> Expr {
        parse_expr(src).unwrap()
    }

    #[test]
    fn parse_minimal_program() {
        let p = parse_program("int f(int a) {\n    return a + 1;\n}\n").unwrap();
        assert_eq!(p.functions.len(), 1);
        assert_eq!(p.functions[0].name, "f");
        assert_eq!(p.statement_lines(), vec![2]);
    }

    #[test]
    fn undeclared_variable_is_a_type_error() {
        let err = parse_program("int f() {\n    return x;\n}\n").unwrap_err();
        assert!(matches!(err, LangError::Type { line: 2, .. }), "{err}");
    }

    #[test]
    fn one_statement_per_line_enforced() {
        let err = parse_program("int f(int a) {\n    a = 1; return a;\n}\n").unwrap_err();
        assert!(matches!(err, LangError::Syntax { line: 2, .. }), "{err}");
    }

    #[test]
    fn subexps_enumerates_subtrees() {
        let got = subexps(&e("i + j * k - 10"));
        let want: Vec<Expr> = ["i + j * k - 10", "i + j * k", "i", "j * k", "j", "k", "10"]
            .iter()
            .map(|s| e(s))
            .collect();
        assert_eq!(got.len(), want.len());
        for w in &want {
            assert!(got.contains(w), "missing {}", pretty_expr(w));
        }
        assert_eq!(got[0], e("i + j * k - 10"));
    }

    #[test]
    fn subexps_of_leaf_is_singleton() {
        assert_eq!(subexps(&e("i")), vec![e("i")]);
    }

    #[test]
    fn subexps_descends_into_array_index() {
        let got = subexps(&e("s[i] == c"));
        let want: Vec<Expr> = ["s[i] == c", "s[i]", "i", "c"].iter().map(|s| e(s)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn expr_size_counts_nodes() {
        assert_eq!(expr_size(&e("i")), 1);
        assert_eq!(expr_size(&e("i + j * k")), 5);
    }

    #[test]
    fn array_read_counts_as_size_one() {
        assert_eq!(expr_size(&e("s[i + 1]")), 1);
        assert_eq!(expr_size(&e("s[i + 1] == c")), 3);
    }

    #[test]
    fn subexps_count_bounded_by_node_count() {
        let x = e("(a + b) * (a + b) - a");
        assert!(subexps(&x).len() <= x.node_count());
        assert!(subexps(&x).contains(&x));
    }

    #[test]
    fn negative_literal_round_trips() {
        let x = e("-1");
        assert_eq!(x, Expr::int(-1));
        assert_eq!(pretty_expr(&x), "-1");
        // Unary negation over a literal keeps explicit parens so the
        // structure survives reparsing.
        let neg = Expr::unary(UnOp::Neg, Expr::int(1));
        assert_eq!(pretty_expr(&neg), "-(1)");
        assert_eq!(parse_expr(&pretty_expr(&neg)).unwrap(), neg);
    }

    #[test]
    fn pretty_expr_round_trips_structure() {
        for src in [
            "a - (b - c)",
            "a - b - c",
            "a && (b || c)",
            "s[i + 1] == '\\0'",
            "!(a == b) && c < 10",
            "x % 2 == 0 || y / 3 > 1",
        ] {
            let parsed = e(src);
            assert_eq!(parse_expr(&pretty_expr(&parsed)).unwrap(), parsed, "{src}");
        }
    }

    #[test]
    fn normalize_branch_predicate() {
        let p = parse_program(
            "char f(char[4] s, int i) {\n    if (s[i] == '\\0') {\n        return 'x';\n    }\n    return s[i];\n}\n",
        )
        .unwrap();
        let (func, stmt) = p.stmt_at(2).unwrap();
        let targets = normalize(func, stmt).unwrap();
        assert_eq!(targets.len(), 1);
        let t = &targets[0];
        assert_eq!(t.component, TargetComponent::BranchPredicate);
        assert_eq!(t.lhs, "branch_2");
        assert!(t.synthetic_lhs);
        assert_eq!(t.rhs, e("s[i] == '\\0'"));
    }

    #[test]
    fn normalize_for_yields_three_targets() {
        let p = parse_program(
            "int f(int n) {\n    int s;\n    int i;\n    for (i = 0; i < n; i = i + 1) {\n        s = s + i;\n    }\n    return s;\n}\n",
        )
        .unwrap();
        let (func, stmt) = p.stmt_at(4).unwrap();
        let targets = normalize(func, stmt).unwrap();
        let comps: Vec<_> = targets.iter().map(|t| t.component).collect();
        assert_eq!(
            comps,
            vec![
                TargetComponent::ForInit,
                TargetComponent::ForCond,
                TargetComponent::ForUpdate
            ]
        );
        assert_eq!(targets[1].lhs, "branch_4");
        assert_eq!(targets[0].lhs, "i");
        assert!(!targets[0].synthetic_lhs);
    }

    #[test]
    fn normalize_assignment_is_identity() {
        let p = parse_program("int f(int a, int b) {\n    a = a + b;\n    return a;\n}\n").unwrap();
        let (func, stmt) = p.stmt_at(2).unwrap();
        let targets = normalize(func, stmt).unwrap();
        assert_eq!(targets.len(), 1);
        assert_eq!(targets[0].component, TargetComponent::AssignRhs);
        assert_eq!(targets[0].lhs, "a");
        assert_eq!(targets[0].rhs, e("a + b"));
    }

    #[test]
    fn normalize_ternary_spawns_guard_and_arms() {
        let p = parse_program(
            "int f(int a) {\n    int x;\n    x = a < 0 ? -1 : 1;\n    return x;\n}\n",
        )
        .unwrap();
        let (func, stmt) = p.stmt_at(3).unwrap();
        let targets = normalize(func, stmt).unwrap();
        let comps: Vec<_> = targets.iter().map(|t| t.component).collect();
        assert_eq!(
            comps,
            vec![
                TargetComponent::TernaryGuard,
                TargetComponent::TernaryThen,
                TargetComponent::TernaryElse
            ]
        );
        assert_eq!(targets[0].lhs, "branch_3");
        assert_eq!(targets[1].lhs, "x");
    }

    #[test]
    fn normalize_rejects_bare_block() {
        let p = parse_program("int f(int a) {\n    {\n        a = 1;\n    }\n    return a;\n}\n")
            .unwrap();
        let (func, stmt) = p.stmt_at(2).unwrap();
        assert!(normalize(func, stmt).is_err());
    }

    #[test]
    fn normalize_fresh_names_do_not_collide_with_scope() {
        let p = parse_program(
            "int f(int a) {\n    int branch_2;\n    if (a > 0) {\n        return 1;\n    }\n    return 0;\n}\n",
        )
        .unwrap();
        // The branch is at line 3, so branch_3 is fresh even though branch_2
        // exists; a collision would be rejected.
        let (func, stmt) = p.stmt_at(3).unwrap();
        assert!(normalize(func, stmt).is_ok());
    }

    #[test]
    fn shadowing_resolves_to_inner_binding() {
        let p = parse_program(
            "int f(int a) {\n    int x;\n    x = 1;\n    {\n        char x;\n        print(x);\n    }\n    return x;\n}\n",
        )
        .unwrap();
        let func = &p.functions[0];
        let vars = vars_at(func, 6).unwrap();
        assert_eq!(vars.get("x"), Some(&VarType::Scalar(ScalarType::Char)));
        let vars_outer = vars_at(func, 8).unwrap();
        assert_eq!(vars_outer.get("x"), Some(&VarType::Scalar(ScalarType::Int)));
    }
}
