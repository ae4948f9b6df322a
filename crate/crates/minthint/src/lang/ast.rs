//! AST for the mini imperative language.
//!
//! Programs are lists of functions over three scalar domains (`bool`,
//! 64-bit `int`, ASCII `char`) plus fixed-length arrays of `int`/`char`.
//! Every statement starts on its own source line; the line number is the
//! statement's stable identity and the line hints refer to.

use std::fmt;

/// Source line number (1-based). Statements are identified by their line.
pub type Line = u32;

/// Scalar value domains. `Char` is restricted to ASCII `[0, 127]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScalarType {
    Bool,
    Int,
    Char,
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarType::Bool => write!(f, "bool"),
            ScalarType::Int => write!(f, "int"),
            ScalarType::Char => write!(f, "char"),
        }
    }
}

/// Declared type of a variable: a scalar or a fixed-length array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarType {
    Scalar(ScalarType),
    Array { elem: ScalarType, len: usize },
}

impl fmt::Display for VarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarType::Scalar(t) => write!(f, "{t}"),
            VarType::Array { elem, len } => write!(f, "{elem}[{len}]"),
        }
    }
}

/// Runtime value. Arrays are stored by value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Char(u8),
    IntArray(Vec<i64>),
    CharArray(Vec<u8>),
}

impl Value {
    pub fn scalar_type(&self) -> Option<ScalarType> {
        match self {
            Value::Bool(_) => Some(ScalarType::Bool),
            Value::Int(_) => Some(ScalarType::Int),
            Value::Char(_) => Some(ScalarType::Char),
            _ => None,
        }
    }

    pub fn var_type(&self) -> VarType {
        match self {
            Value::Bool(_) => VarType::Scalar(ScalarType::Bool),
            Value::Int(_) => VarType::Scalar(ScalarType::Int),
            Value::Char(_) => VarType::Scalar(ScalarType::Char),
            Value::IntArray(v) => VarType::Array { elem: ScalarType::Int, len: v.len() },
            Value::CharArray(v) => VarType::Array { elem: ScalarType::Char, len: v.len() },
        }
    }
}

/// Unary operators: logical not, integer negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Not,
    Neg,
}

impl UnOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            UnOp::Not => "!",
            UnOp::Neg => "-",
        }
    }
}

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
        }
    }

    /// Precedence level; higher binds tighter. Mirrors C.
    pub fn precedence(&self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }
}

/// Expression tree. Structural equality (`==`/`Hash`) is the notion of
/// expression identity used throughout: no semantic canonicalization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Value),
    Var(String),
    /// Array read `a[index]`.
    Index { array: String, index: Box<Expr> },
    Unary { op: UnOp, operand: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn int(v: i64) -> Expr {
        Expr::Const(Value::Int(v))
    }

    pub fn ch(c: u8) -> Expr {
        Expr::Const(Value::Char(c))
    }

    pub fn boolean(b: bool) -> Expr {
        Expr::Const(Value::Bool(b))
    }

    pub fn index(array: &str, idx: Expr) -> Expr {
        Expr::Index { array: array.to_string(), index: Box::new(idx) }
    }

    pub fn unary(op: UnOp, e: Expr) -> Expr {
        Expr::Unary { op, operand: Box::new(e) }
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary { op, lhs: Box::new(l), rhs: Box::new(r) }
    }

    /// Immediate children, with array reads descending into the index.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Var(_) => vec![],
            Expr::Index { index, .. } => vec![index],
            Expr::Unary { operand, .. } => vec![operand],
            Expr::Binary { lhs, rhs, .. } => vec![lhs, rhs],
        }
    }

    /// Total node count, counting array reads and their index subtrees.
    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }
}

/// Right-hand side of an assignment; a ternary is only legal here.
#[derive(Debug, Clone, PartialEq)]
pub enum AssignRhs {
    Expr(Expr),
    Ternary { guard: Expr, then_val: Expr, else_val: Expr },
}

/// Loop-header assignment (`init` and `update` components of `for`).
#[derive(Debug, Clone, PartialEq)]
pub struct ForAssign {
    pub name: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub line: Line,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign { name: String, rhs: AssignRhs },
    If { cond: Expr, then_body: Block, else_body: Option<Block> },
    While { cond: Expr, body: Block },
    For { init: ForAssign, cond: Expr, update: ForAssign, body: Block },
    Return(Expr),
    Print(Expr),
    Block(Block),
}

/// A local declaration. Declarations are not statements: they carry no
/// executable behavior (locals are zero-initialized) and are never
/// localization or repair candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct Decl {
    pub line: Line,
    pub name: String,
    pub ty: VarType,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Decl(Decl),
    Stmt(Stmt),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Block {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub line: Line,
    pub name: String,
    pub ret: ScalarType,
    pub params: Vec<(String, VarType)>,
    pub body: Block,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub functions: Vec<FunctionDef>,
}

impl Program {
    /// Entry point: the function named `main` if present, else the first.
    pub fn entry(&self) -> &FunctionDef {
        self.functions
            .iter()
            .find(|f| f.name == "main")
            .unwrap_or(&self.functions[0])
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Locate the statement starting on `line`, with its enclosing function.
    pub fn stmt_at(&self, line: Line) -> Option<(&FunctionDef, &Stmt)> {
        for func in &self.functions {
            if let Some(stmt) = find_stmt(&func.body, line) {
                return Some((func, stmt));
            }
        }
        None
    }

    /// Lines of all statements, ascending. These are the units localization
    /// ranks and hints refer to.
    pub fn statement_lines(&self) -> Vec<Line> {
        let mut lines = Vec::new();
        for func in &self.functions {
            collect_lines(&func.body, &mut lines);
        }
        lines.sort_unstable();
        lines
    }
}

fn find_stmt(block: &Block, line: Line) -> Option<&Stmt> {
    for item in &block.items {
        if let Item::Stmt(stmt) = item {
            if stmt.line == line {
                return Some(stmt);
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
                if let Some(found) = find_stmt(b, line) {
                    return Some(found);
                }
            }
        }
    }
    None
}

fn collect_lines(block: &Block, out: &mut Vec<Line>) {
    for item in &block.items {
        if let Item::Stmt(stmt) = item {
            out.push(stmt.line);
            match &stmt.kind {
                StmtKind::If { then_body, else_body, .. } => {
                    collect_lines(then_body, out);
                    if let Some(e) = else_body {
                        collect_lines(e, out);
                    }
                }
                StmtKind::While { body, .. }
                | StmtKind::For { body, .. }
                | StmtKind::Block(body) => collect_lines(body, out),
                _ => {}
            }
        }
    }
}
