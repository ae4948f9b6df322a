//! Normalization of statements into assignment form `x := e`.
//!
//! Every analyzable statement is recast as one or more targets with an LHS
//! variable and an RHS expression. Branch-like components get a fresh
//! synthetic boolean (`branch_<line>`); return and print components get
//! fresh `ret_<line>` / `print_<line>` variables of the printed type;
//! assignment-like components keep their real LHS.

use std::collections::BTreeMap;

use super::ast::*;
use super::typecheck::{expr_type, vars_at};
use super::LangError;

/// Which component of the statement a normalized target analyzes. A plain
/// assignment has one component; a `for` header has three; a ternary
/// assignment has a guard and two arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetComponent {
    AssignRhs,
    BranchPredicate,
    ForInit,
    ForCond,
    ForUpdate,
    ReturnExpr,
    PrintArg,
    TernaryGuard,
    TernaryThen,
    TernaryElse,
}

impl TargetComponent {
    pub fn label(&self) -> &'static str {
        match self {
            TargetComponent::AssignRhs => "assign-rhs",
            TargetComponent::BranchPredicate => "branch-predicate",
            TargetComponent::ForInit => "for-init",
            TargetComponent::ForCond => "for-cond",
            TargetComponent::ForUpdate => "for-update",
            TargetComponent::ReturnExpr => "return-expr",
            TargetComponent::PrintArg => "print-arg",
            TargetComponent::TernaryGuard => "ternary-guard",
            TargetComponent::TernaryThen => "ternary-then",
            TargetComponent::TernaryElse => "ternary-else",
        }
    }
}

/// A statement component in assignment form: `lhs := rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedTarget {
    pub line: Line,
    pub component: TargetComponent,
    pub lhs: String,
    pub lhs_type: ScalarType,
    /// True when `lhs` is a fresh variable not present in the program.
    pub synthetic_lhs: bool,
    pub rhs: Expr,
}

pub fn normalize(func: &FunctionDef, stmt: &Stmt) -> Result<Vec<NormalizedTarget>, LangError> {
    let line = stmt.line;
    let vars = vars_at(func, line).ok_or_else(|| LangError::Normalize {
        line,
        message: "statement not found in function".into(),
    })?;
    let fresh = |name: String| -> Result<String, LangError> {
        if vars.contains_key(&name) {
            return Err(LangError::Normalize {
                line,
                message: format!("cannot synthesize fresh variable {name}: name is in scope"),
            });
        }
        Ok(name)
    };
    let scalar_of = |name: &str| -> ScalarType {
        match vars.get(name) {
            Some(VarType::Scalar(t)) => *t,
            _ => unreachable!("typechecked assignment lhs is a scalar"),
        }
    };
    let targets = match &stmt.kind {
        StmtKind::Assign { name, rhs } => match rhs {
            AssignRhs::Expr(e) => vec![NormalizedTarget {
                line,
                component: TargetComponent::AssignRhs,
                lhs: name.clone(),
                lhs_type: scalar_of(name),
                synthetic_lhs: false,
                rhs: e.clone(),
            }],
            AssignRhs::Ternary { guard, then_val, else_val } => vec![
                NormalizedTarget {
                    line,
                    component: TargetComponent::TernaryGuard,
                    lhs: fresh(format!("branch_{line}"))?,
                    lhs_type: ScalarType::Bool,
                    synthetic_lhs: true,
                    rhs: guard.clone(),
                },
                NormalizedTarget {
                    line,
                    component: TargetComponent::TernaryThen,
                    lhs: name.clone(),
                    lhs_type: scalar_of(name),
                    synthetic_lhs: false,
                    rhs: then_val.clone(),
                },
                NormalizedTarget {
                    line,
                    component: TargetComponent::TernaryElse,
                    lhs: name.clone(),
                    lhs_type: scalar_of(name),
                    synthetic_lhs: false,
                    rhs: else_val.clone(),
                },
            ],
        },
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![NormalizedTarget {
            line,
            component: TargetComponent::BranchPredicate,
            lhs: fresh(format!("branch_{line}"))?,
            lhs_type: ScalarType::Bool,
            synthetic_lhs: true,
            rhs: cond.clone(),
        }],
        StmtKind::For { init, cond, update, .. } => vec![
            NormalizedTarget {
                line,
                component: TargetComponent::ForInit,
                lhs: init.name.clone(),
                lhs_type: scalar_of(&init.name),
                synthetic_lhs: false,
                rhs: init.value.clone(),
            },
            NormalizedTarget {
                line,
                component: TargetComponent::ForCond,
                lhs: fresh(format!("branch_{line}"))?,
                lhs_type: ScalarType::Bool,
                synthetic_lhs: true,
                rhs: cond.clone(),
            },
            NormalizedTarget {
                line,
                component: TargetComponent::ForUpdate,
                lhs: update.name.clone(),
                lhs_type: scalar_of(&update.name),
                synthetic_lhs: false,
                rhs: update.value.clone(),
            },
        ],
        StmtKind::Return(e) => vec![NormalizedTarget {
            line,
            component: TargetComponent::ReturnExpr,
            lhs: fresh(format!("ret_{line}"))?,
            lhs_type: expr_type(e, &vars, line)?,
            synthetic_lhs: true,
            rhs: e.clone(),
        }],
        StmtKind::Print(e) => vec![NormalizedTarget {
            line,
            component: TargetComponent::PrintArg,
            lhs: fresh(format!("print_{line}"))?,
            lhs_type: expr_type(e, &vars, line)?,
            synthetic_lhs: true,
            rhs: e.clone(),
        }],
        StmtKind::Block(_) => {
            return Err(LangError::Normalize {
                line,
                message: "bare blocks have no analyzable component".into(),
            })
        }
    };
    Ok(targets)
}

/// Variables in scope at the target, excluding a synthetic LHS (a real LHS
/// stays in scope: its pre-state value is usable repair material).
pub fn target_scope(func: &FunctionDef, target: &NormalizedTarget) -> BTreeMap<String, VarType> {
    vars_at(func, target.line).unwrap_or_default()
}
