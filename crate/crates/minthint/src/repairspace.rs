//! Repair space construction and dataset evaluation.
//!
//! The repair space R = S ∪ E pairs the subexpressions of the faulty RHS
//! with expressions enumerated over the variables in scope, bounded by
//! size. Every expression is then evaluated over the transformer's input
//! states to produce one data column; the LHS column comes from the output
//! states. Expressions that fault on any input state are dropped: a repair
//! candidate must be total on the observed states.
//!
//! Enumeration order is deterministic and doubles as the tie-break order
//! downstream, so it is part of the module's contract: sizes ascending;
//! within a size, scalar variables, then array reads, then pool constants,
//! then unary forms, then binary forms with left size ascending, arithmetic
//! operators before comparisons, `< <= > >= == !=` in grammar order.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::exec::{eval_in_state, ProgramState};
use crate::lang::ast::*;
use crate::lang::normalize::NormalizedTarget;
use crate::lang::{subexps, vars_at};
use crate::stats::rank_ord;
use crate::transformer::StateTransformer;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpaceError {
    #[error("enumerated repair space exceeds cap of {cap} expressions")]
    SpaceTooLarge { cap: usize },
    #[error("statement at line {line} not found")]
    NoSuchStatement { line: Line },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DatasetError {
    #[error("state transformer has no pairs")]
    EmptyTransformer,
}

/// Index expressions may reach this size regardless of the overall bound.
pub const INDEX_SIZE_BOUND: usize = 4;

const ARITH_OPS: [BinOp; 5] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod];
const CMP_OPS: [BinOp; 6] = [BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne];
const BOOL_OPS: [BinOp; 4] = [BinOp::And, BinOp::Or, BinOp::Eq, BinOp::Ne];

/// Variables visible at the target statement, excluding a synthetic LHS.
pub fn vars_in_scope(func: &FunctionDef, target: &NormalizedTarget) -> BTreeMap<String, VarType> {
    let mut vars = vars_at(func, target.line).unwrap_or_default();
    if target.synthetic_lhs {
        vars.remove(&target.lhs);
    }
    vars
}

/// Constant pool for enumeration: 0, 1, -1 plus every constant that
/// appears syntactically in the enclosing function.
#[derive(Debug, Clone, Default)]
pub struct ConstPool {
    pub ints: Vec<i64>,
    pub chars: Vec<u8>,
    pub bools: Vec<bool>,
}

pub fn const_pool(func: &FunctionDef) -> ConstPool {
    let mut ints: HashSet<i64> = [0, 1, -1].into_iter().collect();
    let mut chars: HashSet<u8> = HashSet::new();
    let mut bools: HashSet<bool> = HashSet::new();
    let mut visit = |e: &Expr| {
        for sub in subexps(e) {
            if let Expr::Const(v) = sub {
                match v {
                    Value::Int(n) => {
                        ints.insert(n);
                    }
                    Value::Char(c) => {
                        chars.insert(c);
                    }
                    Value::Bool(b) => {
                        bools.insert(b);
                    }
                    _ => {}
                }
            }
        }
    };
    walk_function_exprs(&func.body, &mut visit);
    let mut ints: Vec<i64> = ints.into_iter().collect();
    ints.sort_unstable();
    let mut chars: Vec<u8> = chars.into_iter().collect();
    chars.sort_unstable();
    let mut bools: Vec<bool> = bools.into_iter().collect();
    bools.sort_unstable();
    ConstPool { ints, chars, bools }
}

pub(crate) fn walk_function_exprs(block: &Block, visit: &mut impl FnMut(&Expr)) {
    for item in &block.items {
        if let Item::Stmt(stmt) = item {
            match &stmt.kind {
                StmtKind::Assign { rhs, .. } => match rhs {
                    AssignRhs::Expr(e) => visit(e),
                    AssignRhs::Ternary { guard, then_val, else_val } => {
                        visit(guard);
                        visit(then_val);
                        visit(else_val);
                    }
                },
                StmtKind::If { cond, then_body, else_body } => {
                    visit(cond);
                    walk_function_exprs(then_body, visit);
                    if let Some(e) = else_body {
                        walk_function_exprs(e, visit);
                    }
                }
                StmtKind::While { cond, body } => {
                    visit(cond);
                    walk_function_exprs(body, visit);
                }
                StmtKind::For { init, cond, update, body } => {
                    visit(&init.value);
                    visit(cond);
                    visit(&update.value);
                    walk_function_exprs(body, visit);
                }
                StmtKind::Return(e) | StmtKind::Print(e) => visit(e),
                StmtKind::Block(b) => walk_function_exprs(b, visit),
            }
        }
    }
}

/// Typed expression pools built up size by size.
struct Pools {
    ints: Vec<Vec<Expr>>,
    chars: Vec<Vec<Expr>>,
    bools: Vec<Vec<Expr>>,
    seen: HashSet<Expr>,
    total: usize,
}

impl Pools {
    fn new(m: usize) -> Pools {
        Pools {
            ints: vec![Vec::new(); m + 1],
            chars: vec![Vec::new(); m + 1],
            bools: vec![Vec::new(); m + 1],
            seen: HashSet::new(),
            total: 0,
        }
    }

    fn push(&mut self, ty: ScalarType, size: usize, e: Expr) {
        if self.seen.insert(e.clone()) {
            self.total += 1;
            match ty {
                ScalarType::Int => self.ints[size].push(e),
                ScalarType::Char => self.chars[size].push(e),
                ScalarType::Bool => self.bools[size].push(e),
            }
        }
    }
}

/// All well-typed expressions of size up to `m` over the given variables,
/// operators, and constant pool, in deterministic order. Array reads count
/// as size 1; their index expressions are enumerated separately over the
/// scalar int variables and int constants, up to [`INDEX_SIZE_BOUND`].
pub fn enum_exps(
    vars: &BTreeMap<String, VarType>,
    m: usize,
    pool: &ConstPool,
    cap: usize,
) -> Result<Vec<Expr>, SpaceError> {
    let mut pools = Pools::new(m.max(1));
    // Atoms: scalar variables first (BTreeMap iteration is name-sorted).
    for (name, ty) in vars {
        if let VarType::Scalar(t) = ty {
            pools.push(*t, 1, Expr::var(name));
        }
    }
    // Array reads, one per (array, index expression).
    let index_exprs = enum_index_exprs(vars, pool);
    for (name, ty) in vars {
        if let VarType::Array { elem, .. } = ty {
            for idx in &index_exprs {
                pools.push(*elem, 1, Expr::index(name, idx.clone()));
                if pools.total > cap {
                    return Err(SpaceError::SpaceTooLarge { cap });
                }
            }
        }
    }
    // Pool constants.
    for n in &pool.ints {
        pools.push(ScalarType::Int, 1, Expr::int(*n));
    }
    for c in &pool.chars {
        pools.push(ScalarType::Char, 1, Expr::ch(*c));
    }
    for b in &pool.bools {
        pools.push(ScalarType::Bool, 1, Expr::boolean(*b));
    }

    for size in 2..=m {
        grow_size(&mut pools, size, cap)?;
    }

    let mut out = Vec::with_capacity(pools.total);
    for size in 1..=m.max(1) {
        for list in [&pools.ints[size], &pools.chars[size], &pools.bools[size]] {
            out.extend(list.iter().cloned());
        }
    }
    Ok(out)
}

fn grow_size(pools: &mut Pools, size: usize, cap: usize) -> Result<(), SpaceError> {
    let mut fresh: Vec<(ScalarType, Expr)> = Vec::new();
    // Unary forms over the previous size.
    for e in &pools.bools[size - 1] {
        fresh.push((ScalarType::Bool, Expr::unary(UnOp::Not, e.clone())));
    }
    for e in &pools.ints[size - 1] {
        // Negating a bare literal folds to a constant already in the pool.
        if !matches!(e, Expr::Const(_)) {
            fresh.push((ScalarType::Int, Expr::unary(UnOp::Neg, e.clone())));
        }
    }
    // Binary forms: operand sizes (sl, sr) with sl + sr = size - 1.
    for sl in 1..size - 1 {
        let sr = size - 1 - sl;
        for lhs in &pools.ints[sl] {
            for op in ARITH_OPS {
                for rhs in &pools.ints[sr] {
                    fresh.push((ScalarType::Int, Expr::binary(op, lhs.clone(), rhs.clone())));
                }
            }
            for op in CMP_OPS {
                for rhs in &pools.ints[sr] {
                    fresh.push((ScalarType::Bool, Expr::binary(op, lhs.clone(), rhs.clone())));
                }
            }
        }
        for lhs in &pools.chars[sl] {
            for op in CMP_OPS {
                for rhs in &pools.chars[sr] {
                    fresh.push((ScalarType::Bool, Expr::binary(op, lhs.clone(), rhs.clone())));
                }
            }
        }
        for lhs in &pools.bools[sl] {
            for op in BOOL_OPS {
                for rhs in &pools.bools[sr] {
                    fresh.push((ScalarType::Bool, Expr::binary(op, lhs.clone(), rhs.clone())));
                }
            }
        }
    }
    for (ty, e) in fresh {
        pools.push(ty, size, e);
        if pools.total > cap {
            return Err(SpaceError::SpaceTooLarge { cap });
        }
    }
    Ok(())
}

/// Operators admitted inside array indices. Indices are positions, so
/// only additive forms are enumerated; this keeps the read-atom count
/// linear in the variable/constant pool.
const INDEX_OPS: [BinOp; 2] = [BinOp::Add, BinOp::Sub];

/// Index expressions: additive ints over scalar int variables and int
/// pool constants (no nested array reads), sizes 1..=INDEX_SIZE_BOUND.
fn enum_index_exprs(vars: &BTreeMap<String, VarType>, pool: &ConstPool) -> Vec<Expr> {
    let mut sizes: Vec<Vec<Expr>> = vec![Vec::new(); INDEX_SIZE_BOUND + 1];
    let mut seen = HashSet::new();
    for (name, ty) in vars {
        if *ty == VarType::Scalar(ScalarType::Int) {
            let e = Expr::var(name);
            if seen.insert(e.clone()) {
                sizes[1].push(e);
            }
        }
    }
    for n in &pool.ints {
        let e = Expr::int(*n);
        if seen.insert(e.clone()) {
            sizes[1].push(e);
        }
    }
    for size in 2..=INDEX_SIZE_BOUND {
        let mut fresh = Vec::new();
        for e in &sizes[size - 1] {
            if !matches!(e, Expr::Const(_)) {
                fresh.push(Expr::unary(UnOp::Neg, e.clone()));
            }
        }
        for sl in 1..size - 1 {
            let sr = size - 1 - sl;
            for lhs in &sizes[sl] {
                for op in INDEX_OPS {
                    for rhs in &sizes[sr] {
                        fresh.push(Expr::binary(op, lhs.clone(), rhs.clone()));
                    }
                }
            }
        }
        for e in fresh {
            if seen.insert(e.clone()) {
                sizes[size].push(e);
            }
        }
    }
    let mut out = Vec::new();
    for size in 1..=INDEX_SIZE_BOUND {
        out.extend(sizes[size].iter().cloned());
    }
    out
}

/// One occurrence of a subexpression inside the RHS, identified by its
/// path of child indices from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub path: Vec<usize>,
    pub expr: Expr,
}

/// All subexpression occurrences of `rhs`, preorder.
pub fn rhs_occurrences(rhs: &Expr) -> Vec<Occurrence> {
    let mut out = Vec::new();
    occ_walk(rhs, &mut Vec::new(), &mut out);
    out
}

fn occ_walk(e: &Expr, path: &mut Vec<usize>, out: &mut Vec<Occurrence>) {
    out.push(Occurrence { path: path.clone(), expr: e.clone() });
    for (i, child) in e.children().into_iter().enumerate() {
        path.push(i);
        occ_walk(child, path, out);
        path.pop();
    }
}

/// Two occurrences overlap iff their subtrees share a node, i.e. one path
/// prefixes the other.
pub fn paths_overlap(a: &[usize], b: &[usize]) -> bool {
    let n = a.len().min(b.len());
    a[..n] == b[..n]
}

/// The repair space R = S ∪ E with provenance. `exprs[..s_len]` are the
/// subexpressions of the faulty RHS in preorder (the whole RHS first);
/// the rest are enumerated expressions in enumeration order.
#[derive(Debug, Clone)]
pub struct RepairSpace {
    pub rhs: Expr,
    pub exprs: Vec<Expr>,
    pub s_len: usize,
    pub occurrences: Vec<Occurrence>,
}

impl RepairSpace {
    pub fn in_s(&self, e: &Expr) -> bool {
        self.exprs[..self.s_len].contains(e)
    }

    pub fn s_exprs(&self) -> &[Expr] {
        &self.exprs[..self.s_len]
    }
}

pub fn build_repair_space(
    rhs: &Expr,
    vars: &BTreeMap<String, VarType>,
    m: usize,
    pool: &ConstPool,
    cap: usize,
) -> Result<RepairSpace, SpaceError> {
    let s = subexps(rhs);
    let s_len = s.len();
    let mut exprs = s;
    let mut seen: HashSet<Expr> = exprs.iter().cloned().collect();
    for e in enum_exps(vars, m, pool, cap)? {
        if seen.insert(e.clone()) {
            exprs.push(e);
        }
    }
    Ok(RepairSpace { rhs: rhs.clone(), exprs, s_len, occurrences: rhs_occurrences(rhs) })
}

/// A typed data column over the transformer's states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypedColumn {
    Bool(Vec<bool>),
    Int(Vec<i64>),
    Char(Vec<u8>),
}

impl TypedColumn {
    fn from_values(values: &[Value]) -> TypedColumn {
        match values.first().expect("column never empty") {
            Value::Bool(_) => TypedColumn::Bool(
                values
                    .iter()
                    .map(|v| match v {
                        Value::Bool(b) => *b,
                        _ => unreachable!("mixed-type column"),
                    })
                    .collect(),
            ),
            Value::Int(_) => TypedColumn::Int(
                values
                    .iter()
                    .map(|v| match v {
                        Value::Int(n) => *n,
                        _ => unreachable!("mixed-type column"),
                    })
                    .collect(),
            ),
            Value::Char(_) => TypedColumn::Char(
                values
                    .iter()
                    .map(|v| match v {
                        Value::Char(c) => *c,
                        _ => unreachable!("mixed-type column"),
                    })
                    .collect(),
            ),
            _ => unreachable!("array-valued expression column"),
        }
    }

    /// Fractional ranks under the domain order: false < true, numeric,
    /// ASCII code.
    pub fn ranks(&self) -> Vec<f64> {
        match self {
            TypedColumn::Bool(v) => rank_ord(v),
            TypedColumn::Int(v) => rank_ord(v),
            TypedColumn::Char(v) => rank_ord(v),
        }
    }

    pub fn render(&self, row: usize) -> String {
        match self {
            TypedColumn::Bool(v) => v[row].to_string(),
            TypedColumn::Int(v) => v[row].to_string(),
            TypedColumn::Char(v) => (v[row] as i64).to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DataColumn {
    pub expr: Expr,
    pub in_s: bool,
    pub values: TypedColumn,
    pub ranks: Vec<f64>,
}

/// The dataset D: one column per surviving repair-space expression over
/// input states, plus the LHS column over output states. Rank vectors are
/// precomputed once per column.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub n: usize,
    pub x_name: String,
    pub x_values: TypedColumn,
    pub x_ranks: Vec<f64>,
    pub columns: Vec<DataColumn>,
    index: HashMap<Expr, usize>,
}

impl Dataset {
    pub fn column(&self, e: &Expr) -> Option<&DataColumn> {
        self.index.get(e).map(|i| &self.columns[*i])
    }

    pub fn column_index(&self, e: &Expr) -> Option<usize> {
        self.index.get(e).copied()
    }
}

pub fn build_dataset(
    transformer: &StateTransformer,
    space: &RepairSpace,
    lhs: &str,
) -> Result<Dataset, DatasetError> {
    if transformer.pairs.is_empty() {
        return Err(DatasetError::EmptyTransformer);
    }
    let inputs: Vec<&ProgramState> = transformer.pairs.iter().map(|p| &p.input).collect();
    let n = inputs.len();
    let x_values: Vec<Value> = transformer
        .pairs
        .iter()
        .map(|p| p.output.get(lhs).expect("output state carries the LHS").clone())
        .collect();
    let x_values = TypedColumn::from_values(&x_values);
    let x_ranks = x_values.ranks();

    let mut columns = Vec::new();
    let mut index = HashMap::new();
    'exprs: for (i, expr) in space.exprs.iter().enumerate() {
        let mut values = Vec::with_capacity(n);
        for state in &inputs {
            match eval_in_state(expr, state) {
                Ok(v) => values.push(v),
                // Partial on the observed states: drop the expression.
                Err(_) => continue 'exprs,
            }
        }
        let values = TypedColumn::from_values(&values);
        let ranks = values.ranks();
        index.insert(expr.clone(), columns.len());
        columns.push(DataColumn { expr: expr.clone(), in_s: i < space.s_len, values, ranks });
    }
    Ok(Dataset { n, x_name: lhs.to_string(), x_values, x_ranks, columns, index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{expr_size, parse_expr, parse_program, pretty_expr};

    fn int_vars(names: &[&str]) -> BTreeMap<String, VarType> {
        names
            .iter()
            .map(|n| (n.to_string(), VarType::Scalar(ScalarType::Int)))
            .collect()
    }

    fn pool(ints: &[i64]) -> ConstPool {
        ConstPool { ints: ints.to_vec(), chars: vec![], bools: vec![] }
    }

    #[test]
    fn size_one_enumeration() {
        let got = enum_exps(&int_vars(&["i"]), 1, &pool(&[0, 1]), 1000).unwrap();
        let want: Vec<Expr> = ["i", "0", "1"].iter().map(|s| parse_expr(s).unwrap()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn size_bound_respected() {
        let vars = int_vars(&["i", "j", "k"]);
        let got = enum_exps(&vars, 3, &pool(&[10]), 100_000).unwrap();
        assert!(got.contains(&parse_expr("j * k").unwrap()));
        assert!(got.contains(&parse_expr("i + 10").unwrap()));
        assert!(!got.contains(&parse_expr("i + j * k - 10").unwrap()));
        for e in &got {
            assert!(expr_size(e) <= 3, "{} exceeds bound", pretty_expr(e));
        }
    }

    /// Independent recursive count of well-typed boolean expressions over
    /// two bools; the enumerator must agree.
    #[test]
    fn bool_count_matches_brute_force() {
        let mut vars = BTreeMap::new();
        vars.insert("a".to_string(), VarType::Scalar(ScalarType::Bool));
        vars.insert("b".to_string(), VarType::Scalar(ScalarType::Bool));
        let empty = ConstPool { ints: vec![], chars: vec![], bools: vec![] };
        let got = enum_exps(&vars, 4, &empty, 100_000).unwrap();

        // Grammar recurrence: B(1) = |vars|; B(s) = B(s-1) negations plus
        // binaries over {&&, ||, ==, !=} with operand sizes summing to
        // s-1. Every generated tree is structurally distinct.
        let mut b = [0usize; 5];
        b[1] = 2;
        for s in 2..=4 {
            b[s] = b[s - 1];
            for sl in 1..s - 1 {
                b[s] += 4 * b[sl] * b[s - 1 - sl];
            }
        }
        assert_eq!(got.len(), b[1] + b[2] + b[3] + b[4]);
        let distinct: HashSet<&Expr> = got.iter().collect();
        assert_eq!(distinct.len(), got.len(), "enumeration emitted a duplicate");
    }

    #[test]
    fn space_cap_is_enforced() {
        let vars = int_vars(&["a", "b", "c", "d"]);
        let err = enum_exps(&vars, 4, &pool(&[0, 1, -1, 5, 7]), 500).unwrap_err();
        assert_eq!(err, SpaceError::SpaceTooLarge { cap: 500 });
    }

    #[test]
    fn deterministic_order() {
        let vars = int_vars(&["x", "y"]);
        let a = enum_exps(&vars, 3, &pool(&[0, 1]), 100_000).unwrap();
        let b = enum_exps(&vars, 3, &pool(&[0, 1]), 100_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn vars_in_scope_excludes_synthetic_lhs() {
        let p = parse_program(
            "char esc(char[4] s, int i) {\n    if (s[i] == '\\0') {\n        return '@';\n    }\n    return s[i];\n}\n",
        )
        .unwrap();
        let (func, stmt) = p.stmt_at(2).unwrap();
        let target = &crate::lang::normalize(func, stmt).unwrap()[0];
        let vars = vars_in_scope(func, target);
        let names: Vec<&str> = vars.keys().map(|s| s.as_str()).collect();
        assert_eq!(names, vec!["i", "s"]);
    }

    #[test]
    fn overlap_is_path_prefix() {
        let rhs = parse_expr("s[i] == c").unwrap();
        let occs = rhs_occurrences(&rhs);
        // Root, s[i], i, c.
        assert_eq!(occs.len(), 4);
        assert!(paths_overlap(&occs[0].path, &occs[2].path));
        assert!(paths_overlap(&occs[1].path, &occs[2].path));
        assert!(!paths_overlap(&occs[1].path, &occs[3].path));
    }

    #[test]
    fn repair_space_keeps_s_first() {
        let rhs = parse_expr("i + 1").unwrap();
        let space =
            build_repair_space(&rhs, &int_vars(&["i"]), 3, &pool(&[0, 1]), 100_000).unwrap();
        assert_eq!(space.s_len, 3);
        assert_eq!(space.exprs[0], rhs);
        assert!(space.in_s(&parse_expr("1").unwrap()));
        assert!(!space.in_s(&parse_expr("0").unwrap()));
        // Dedup: `i + 1` appears once even though enumeration regenerates it.
        let count = space.exprs.iter().filter(|e| **e == rhs).count();
        assert_eq!(count, 1);
    }
}
