//! Static checks: name resolution with block scoping, type rules, and the
//! per-statement variable environments reused by the repair-space builder.

use std::collections::BTreeMap;

use super::LangError;
use super::ast::*;

/// Typing rules for expressions, parameterized by a variable environment.
pub fn expr_type(
    e: &Expr,
    vars: &BTreeMap<String, VarType>,
    line: Line,
) -> Result<ScalarType, LangError> {
    let err = |message: String| LangError::Type { line, message };
    match e {
        Expr::Const(v) => v
            .scalar_type()
            .ok_or_else(|| err("array constant in expression".into())),
        Expr::Var(name) => match vars.get(name) {
            Some(VarType::Scalar(t)) => Ok(*t),
            Some(VarType::Array { .. }) => {
                Err(err(format!("array variable {name} used without index")))
            }
            None => Err(err(format!("undeclared variable {name}"))),
        },
        Expr::Index { array, index } => {
            let elem = match vars.get(array) {
                Some(VarType::Array { elem, .. }) => *elem,
                Some(VarType::Scalar(_)) => {
                    return Err(err(format!("{array} is not an array")))
                }
                None => return Err(err(format!("undeclared variable {array}"))),
            };
            let idx_ty = expr_type(index, vars, line)?;
            if idx_ty != ScalarType::Int {
                return Err(err(format!("array index must be int, got {idx_ty}")));
            }
            Ok(elem)
        }
        Expr::Unary { op, operand } => {
            let t = expr_type(operand, vars, line)?;
            match op {
                UnOp::Not if t == ScalarType::Bool => Ok(ScalarType::Bool),
                UnOp::Not => Err(err(format!("! requires bool, got {t}"))),
                UnOp::Neg if t == ScalarType::Int => Ok(ScalarType::Int),
                UnOp::Neg => Err(err(format!("unary - requires int, got {t}"))),
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            let lt = expr_type(lhs, vars, line)?;
            let rt = expr_type(rhs, vars, line)?;
            match op {
                BinOp::And | BinOp::Or => {
                    if lt == ScalarType::Bool && rt == ScalarType::Bool {
                        Ok(ScalarType::Bool)
                    } else {
                        Err(err(format!("{} requires bool operands", op.symbol())))
                    }
                }
                BinOp::Eq | BinOp::Ne => {
                    if lt == rt {
                        Ok(ScalarType::Bool)
                    } else {
                        Err(err(format!(
                            "{} requires matching operand types, got {lt} and {rt}",
                            op.symbol()
                        )))
                    }
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    if lt == rt && (lt == ScalarType::Int || lt == ScalarType::Char) {
                        Ok(ScalarType::Bool)
                    } else {
                        Err(err(format!(
                            "{} requires int or char operands of the same type",
                            op.symbol()
                        )))
                    }
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                    if lt == ScalarType::Int && rt == ScalarType::Int {
                        Ok(ScalarType::Int)
                    } else {
                        Err(err(format!("{} requires int operands", op.symbol())))
                    }
                }
            }
        }
    }
}

pub fn check_program(program: &Program) -> Result<(), LangError> {
    let mut seen = std::collections::HashSet::new();
    for func in &program.functions {
        if !seen.insert(func.name.clone()) {
            return Err(LangError::Type {
                line: func.line,
                message: format!("duplicate function {}", func.name),
            });
        }
        check_function(func)?;
    }
    Ok(())
}

struct Scopes {
    stack: Vec<BTreeMap<String, VarType>>,
}

impl Scopes {
    fn flatten(&self) -> BTreeMap<String, VarType> {
        let mut out = BTreeMap::new();
        for scope in &self.stack {
            for (k, v) in scope {
                out.insert(k.clone(), *v);
            }
        }
        out
    }
}

fn check_function(func: &FunctionDef) -> Result<(), LangError> {
    let mut params = BTreeMap::new();
    for (name, ty) in &func.params {
        if params.insert(name.clone(), *ty).is_some() {
            return Err(LangError::Type {
                line: func.line,
                message: format!("duplicate parameter {name}"),
            });
        }
    }
    let mut scopes = Scopes { stack: vec![params] };
    check_block(&func.body, &mut scopes, func)
}

fn check_block(block: &Block, scopes: &mut Scopes, func: &FunctionDef) -> Result<(), LangError> {
    scopes.stack.push(BTreeMap::new());
    for item in &block.items {
        match item {
            Item::Decl(decl) => {
                let scope = scopes.stack.last_mut().expect("scope stack never empty");
                if scope.insert(decl.name.clone(), decl.ty).is_some() {
                    return Err(LangError::Type {
                        line: decl.line,
                        message: format!("duplicate declaration of {}", decl.name),
                    });
                }
            }
            Item::Stmt(stmt) => check_stmt(stmt, scopes, func)?,
        }
    }
    scopes.stack.pop();
    Ok(())
}

fn check_assign_var(
    name: &str,
    vars: &BTreeMap<String, VarType>,
    line: Line,
) -> Result<ScalarType, LangError> {
    match vars.get(name) {
        Some(VarType::Scalar(t)) => Ok(*t),
        Some(VarType::Array { .. }) => Err(LangError::Type {
            line,
            message: format!("cannot assign to array variable {name}"),
        }),
        None => Err(LangError::Type {
            line,
            message: format!("undeclared variable {name}"),
        }),
    }
}

fn expect_type(
    e: &Expr,
    want: ScalarType,
    vars: &BTreeMap<String, VarType>,
    line: Line,
    what: &str,
) -> Result<(), LangError> {
    let got = expr_type(e, vars, line)?;
    if got != want {
        return Err(LangError::Type {
            line,
            message: format!("{what} must be {want}, got {got}"),
        });
    }
    Ok(())
}

fn check_stmt(stmt: &Stmt, scopes: &mut Scopes, func: &FunctionDef) -> Result<(), LangError> {
    let vars = scopes.flatten();
    let line = stmt.line;
    match &stmt.kind {
        StmtKind::Assign { name, rhs } => {
            let lhs_ty = check_assign_var(name, &vars, line)?;
            match rhs {
                AssignRhs::Expr(e) => expect_type(e, lhs_ty, &vars, line, "assigned value")?,
                AssignRhs::Ternary { guard, then_val, else_val } => {
                    expect_type(guard, ScalarType::Bool, &vars, line, "ternary guard")?;
                    expect_type(then_val, lhs_ty, &vars, line, "ternary arm")?;
                    expect_type(else_val, lhs_ty, &vars, line, "ternary arm")?;
                }
            }
        }
        StmtKind::If { cond, then_body, else_body } => {
            expect_type(cond, ScalarType::Bool, &vars, line, "if condition")?;
            check_block(then_body, scopes, func)?;
            if let Some(e) = else_body {
                check_block(e, scopes, func)?;
            }
        }
        StmtKind::While { cond, body } => {
            expect_type(cond, ScalarType::Bool, &vars, line, "while condition")?;
            check_block(body, scopes, func)?;
        }
        StmtKind::For { init, cond, update, body } => {
            let init_ty = check_assign_var(&init.name, &vars, line)?;
            expect_type(&init.value, init_ty, &vars, line, "for init value")?;
            expect_type(cond, ScalarType::Bool, &vars, line, "for condition")?;
            let upd_ty = check_assign_var(&update.name, &vars, line)?;
            expect_type(&update.value, upd_ty, &vars, line, "for update value")?;
            check_block(body, scopes, func)?;
        }
        StmtKind::Return(e) => expect_type(e, func.ret, &vars, line, "return value")?,
        StmtKind::Print(e) => {
            // Any scalar may be printed.
            expr_type(e, &vars, line)?;
        }
        StmtKind::Block(b) => check_block(b, scopes, func)?,
    }
    Ok(())
}

/// Variables visible at the statement starting on `line`: parameters plus
/// locals declared before it, innermost binding winning on shadowing.
pub fn vars_at(func: &FunctionDef, line: Line) -> Option<BTreeMap<String, VarType>> {
    let mut scopes: Vec<BTreeMap<String, VarType>> = vec![func.params.iter().cloned().collect()];
    vars_walk(&func.body, line, &mut scopes)
}

fn vars_walk(
    block: &Block,
    line: Line,
    scopes: &mut Vec<BTreeMap<String, VarType>>,
) -> Option<BTreeMap<String, VarType>> {
    scopes.push(BTreeMap::new());
    for item in &block.items {
        match item {
            Item::Decl(decl) => {
                scopes
                    .last_mut()
                    .expect("scope stack never empty")
                    .insert(decl.name.clone(), decl.ty);
            }
            Item::Stmt(stmt) => {
                if stmt.line == line {
                    let mut out = BTreeMap::new();
                    for scope in scopes.iter() {
                        for (k, v) in scope {
                            out.insert(k.clone(), *v);
                        }
                    }
                    scopes.pop();
                    return Some(out);
                }
                let blocks: Vec<&Block> = match &stmt.kind {
                    StmtKind::If { then_body, else_body, .. } => {
                        let mut v = vec![then_body];
                        if let Some(e) = else_body {
                            v.push(e);
                        }
                        v
                    }
                    StmtKind::While { body, .. }
                    | StmtKind::For { body, .. }
                    | StmtKind::Block(body) => vec![body],
                    _ => vec![],
                };
                for b in blocks {
                    if let Some(found) = vars_walk(b, line, scopes) {
                        scopes.pop();
                        return Some(found);
                    }
                }
            }
        }
    }
    scopes.pop();
    None
}
