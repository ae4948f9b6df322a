//! Pretty-printer. The output is the canonical source form: parsing it
//! again yields a structurally identical AST, and hints quote expressions
//! in this style.

use std::fmt::Write;

use super::ast::*;

const UNARY_PREC: u8 = 7;

pub fn pretty_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

fn write_expr(out: &mut String, e: &Expr, parent_prec: u8) {
    match e {
        Expr::Const(v) => write_scalar(out, v),
        Expr::Var(name) => out.push_str(name),
        Expr::Index { array, index } => {
            out.push_str(array);
            out.push('[');
            write_expr(out, index, 0);
            out.push(']');
        }
        Expr::Unary { op, operand } => {
            out.push_str(op.symbol());
            // `-` followed by an int literal would re-lex as a negative
            // constant; parenthesize to preserve the unary node.
            let needs_parens = matches!(
                (op, operand.as_ref()),
                (UnOp::Neg, Expr::Const(Value::Int(_)))
            );
            if needs_parens {
                out.push('(');
                write_expr(out, operand, 0);
                out.push(')');
            } else {
                write_expr(out, operand, UNARY_PREC);
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            let prec = op.precedence();
            let wrap = prec < parent_prec;
            if wrap {
                out.push('(');
            }
            write_expr(out, lhs, prec);
            let _ = write!(out, " {} ", op.symbol());
            // Left-associative grammar: an equal-precedence right child
            // needs parentheses to survive a round trip.
            write_expr(out, rhs, prec + 1);
            if wrap {
                out.push(')');
            }
        }
    }
}

fn write_scalar(out: &mut String, v: &Value) {
    match v {
        Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Value::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Value::Char(c) => {
            let text = match c {
                0 => "'\\0'".to_string(),
                b'\n' => "'\\n'".to_string(),
                b'\t' => "'\\t'".to_string(),
                b'\r' => "'\\r'".to_string(),
                b'\\' => "'\\\\'".to_string(),
                b'\'' => "'\\''".to_string(),
                32..=126 => format!("'{}'", *c as char),
                _ => format!("'\\x{c:02x}'"),
            };
            out.push_str(&text);
        }
        _ => unreachable!("array constants cannot appear in expressions"),
    }
}

pub fn pretty_program(program: &Program) -> String {
    let mut out = String::new();
    for (i, func) in program.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_function(&mut out, func);
    }
    out
}

fn write_function(out: &mut String, func: &FunctionDef) {
    let params: Vec<String> = func
        .params
        .iter()
        .map(|(name, ty)| format!("{ty} {name}"))
        .collect();
    let _ = writeln!(out, "{} {}({}) {{", func.ret, func.name, params.join(", "));
    write_block_items(out, &func.body, 1);
    out.push_str("}\n");
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn write_block_items(out: &mut String, block: &Block, depth: usize) {
    for item in &block.items {
        match item {
            Item::Decl(decl) => {
                indent(out, depth);
                let _ = writeln!(out, "{} {};", decl.ty, decl.name);
            }
            Item::Stmt(stmt) => write_stmt(out, stmt, depth),
        }
    }
}

fn write_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    indent(out, depth);
    match &stmt.kind {
        StmtKind::Assign { name, rhs } => {
            let text = match rhs {
                AssignRhs::Expr(e) => pretty_expr(e),
                AssignRhs::Ternary { guard, then_val, else_val } => format!(
                    "{} ? {} : {}",
                    pretty_expr(guard),
                    pretty_expr(then_val),
                    pretty_expr(else_val)
                ),
            };
            let _ = writeln!(out, "{name} = {text};");
        }
        StmtKind::If { cond, then_body, else_body } => {
            let _ = writeln!(out, "if ({}) {{", pretty_expr(cond));
            write_block_items(out, then_body, depth + 1);
            indent(out, depth);
            match else_body {
                Some(e) => {
                    out.push_str("} else {\n");
                    write_block_items(out, e, depth + 1);
                    indent(out, depth);
                    out.push_str("}\n");
                }
                None => out.push_str("}\n"),
            }
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "while ({}) {{", pretty_expr(cond));
            write_block_items(out, body, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::For { init, cond, update, body } => {
            let _ = writeln!(
                out,
                "for ({} = {}; {}; {} = {}) {{",
                init.name,
                pretty_expr(&init.value),
                pretty_expr(cond),
                update.name,
                pretty_expr(&update.value)
            );
            write_block_items(out, body, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Return(e) => {
            let _ = writeln!(out, "return {};", pretty_expr(e));
        }
        StmtKind::Print(e) => {
            let _ = writeln!(out, "print({});", pretty_expr(e));
        }
        StmtKind::Block(b) => {
            out.push_str("{\n");
            write_block_items(out, b, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
    }
}
