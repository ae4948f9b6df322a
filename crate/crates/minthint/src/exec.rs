//! Concrete interpreter: runs tests, collects per-statement hit spectra,
//! and records input/output program states at an instrumented statement
//! component. The same walker also supports overriding the component's
//! value on each dynamic execution, which is what the angelic search in
//! the transformer module drives.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::ast::*;
use crate::lang::normalize::{NormalizedTarget, TargetComponent};

/// A program state: every variable in scope mapped to its value. Keyed by
/// name with innermost bindings winning, so shadowed outer variables are
/// not part of the state.
pub type ProgramState = BTreeMap<String, Value>;

/// Runtime faults. All of them fail the test that triggered them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaultKind {
    DivByZero,
    IndexOutOfBounds,
    StepLimit,
}

impl FaultKind {
    pub fn token(&self) -> &'static str {
        match self {
            FaultKind::DivByZero => "<fault:div-by-zero>",
            FaultKind::IndexOutOfBounds => "<fault:index-out-of-bounds>",
            FaultKind::StepLimit => "<fault:step-limit>",
        }
    }
}

/// Observable output of a run: printed values followed by the return
/// value, plus the fault that cut the run short, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub values: Vec<Value>,
    pub fault: Option<FaultKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub output: Output,
}

#[derive(Debug, Clone)]
pub struct TestCase {
    pub id: String,
    pub args: Vec<serde_json::Value>,
    pub expect: Vec<serde_json::Value>,
}

#[derive(Debug, Error)]
pub enum TestError {
    #[error("test {id}: {message}")]
    BadTest { id: String, message: String },
    #[error("malformed test record on line {line}: {message}")]
    BadRecord { line: usize, message: String },
}

#[derive(Debug, Deserialize)]
struct RawTest {
    id: String,
    args: Vec<serde_json::Value>,
    expect: Vec<serde_json::Value>,
}

/// Load a test suite: one JSON object per line, `{"id", "args", "expect"}`.
pub fn load_tests(text: &str) -> Result<Vec<TestCase>, TestError> {
    let mut tests = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let raw: RawTest = serde_json::from_str(trimmed).map_err(|e| TestError::BadRecord {
            line: i + 1,
            message: e.to_string(),
        })?;
        tests.push(TestCase { id: raw.id, args: raw.args, expect: raw.expect });
    }
    Ok(tests)
}

/// Convert a JSON argument to a typed value per the parameter type.
/// Char arrays accept ASCII strings (padded with NUL to the declared
/// length) or arrays of character codes.
fn convert_arg(v: &serde_json::Value, ty: &VarType, id: &str) -> Result<Value, TestError> {
    let err = |message: String| TestError::BadTest { id: id.to_string(), message };
    match ty {
        VarType::Scalar(ScalarType::Bool) => v
            .as_bool()
            .map(Value::Bool)
            .ok_or_else(|| err(format!("expected bool, got {v}"))),
        VarType::Scalar(ScalarType::Int) => v
            .as_i64()
            .map(Value::Int)
            .ok_or_else(|| err(format!("expected int, got {v}"))),
        VarType::Scalar(ScalarType::Char) => json_char(v).ok_or_else(|| err(format!(
            "expected char (one-character ASCII string or code 0..=127), got {v}"
        ))),
        VarType::Array { elem: ScalarType::Char, len } => {
            let mut chars: Vec<u8> = if let Some(s) = v.as_str() {
                if !s.is_ascii() {
                    return Err(err(format!("non-ASCII string {s:?}")));
                }
                s.bytes().collect()
            } else if let Some(items) = v.as_array() {
                let mut out = Vec::new();
                for item in items {
                    match json_char(item) {
                        Some(Value::Char(c)) => out.push(c),
                        _ => return Err(err(format!("bad char element {item}"))),
                    }
                }
                out
            } else {
                return Err(err(format!("expected string or char array, got {v}")));
            };
            if chars.len() > *len {
                return Err(err(format!(
                    "char array literal of length {} exceeds declared length {len}",
                    chars.len()
                )));
            }
            chars.resize(*len, 0);
            Ok(Value::CharArray(chars))
        }
        VarType::Array { elem: ScalarType::Int, len } => {
            let items = v
                .as_array()
                .ok_or_else(|| err(format!("expected int array, got {v}")))?;
            let mut out = Vec::new();
            for item in items {
                out.push(
                    item.as_i64()
                        .ok_or_else(|| err(format!("bad int element {item}")))?,
                );
            }
            if out.len() > *len {
                return Err(err(format!(
                    "int array literal of length {} exceeds declared length {len}",
                    out.len()
                )));
            }
            out.resize(*len, 0);
            Ok(Value::IntArray(out))
        }
        VarType::Array { elem: ScalarType::Bool, .. } => {
            Err(err("bool arrays are not supported".into()))
        }
    }
}

fn json_char(v: &serde_json::Value) -> Option<Value> {
    if let Some(s) = v.as_str() {
        let bytes = s.as_bytes();
        if bytes.len() == 1 && bytes[0] <= 127 {
            return Some(Value::Char(bytes[0]));
        }
        return None;
    }
    v.as_i64().and_then(|n| {
        if (0..=127).contains(&n) {
            Some(Value::Char(n as u8))
        } else {
            None
        }
    })
}

/// Convert an expected output element: bools, ints, or one-character
/// strings (chars).
fn convert_expected(v: &serde_json::Value, id: &str) -> Result<Value, TestError> {
    if let Some(b) = v.as_bool() {
        return Ok(Value::Bool(b));
    }
    if let Some(n) = v.as_i64() {
        return Ok(Value::Int(n));
    }
    if let Some(Value::Char(c)) = json_char(v) {
        return Ok(Value::Char(c));
    }
    Err(TestError::BadTest {
        id: id.to_string(),
        message: format!("expected output element must be bool, int, or char string: {v}"),
    })
}

pub fn expected_values(test: &TestCase) -> Result<Vec<Value>, TestError> {
    test.expect.iter().map(|v| convert_expected(v, &test.id)).collect()
}

/// Interpreter limits.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    /// Statement-execution budget per run; exceeding it is a fault.
    pub step_budget: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { step_budget: 1_000_000 }
    }
}

/// What to do at each dynamic execution of the instrumented component.
#[derive(Debug, Clone, Copy)]
pub enum TargetMode<'a> {
    /// Evaluate normally, recording (input, output) state pairs.
    Observe,
    /// Substitute `values[j]` for the j-th execution. Runs that execute
    /// the component more often than values are provided abort with
    /// `overrides_exhausted` set.
    Override(&'a [Value]),
}

#[derive(Debug, Clone)]
pub struct ExecOutcome {
    pub output: Output,
    /// Statement lines executed at least once.
    pub hit_lines: BTreeSet<Line>,
    /// One (input, output) pair per dynamic execution of the target.
    pub pairs: Vec<(ProgramState, ProgramState)>,
    /// Dynamic executions of the target component.
    pub target_hits: usize,
    /// Override mode ran out of values; the run was abandoned.
    pub overrides_exhausted: bool,
    pub steps: u64,
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error(transparent)]
    Test(#[from] TestError),
    #[error("test {id}: argument count {got} does not match {want} parameters")]
    ArityMismatch { id: String, got: usize, want: usize },
}

/// Run `test` against the entry function of `program`.
pub fn run_test(program: &Program, test: &TestCase, cfg: &RunConfig) -> Result<Verdict, ExecError> {
    let outcome = run_instrumented(program, test, cfg, None, TargetMode::Observe)?;
    let expected = expected_values(test)?;
    let pass = outcome.output.fault.is_none() && outcome.output.values == expected;
    Ok(Verdict { pass, output: outcome.output })
}

/// Per-statement (ep, ef, np, nf) counts over a test suite.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SpectraRow {
    pub ep: u32,
    pub ef: u32,
    pub np: u32,
    pub nf: u32,
}

#[derive(Debug, Clone, Default)]
pub struct Spectra {
    pub rows: BTreeMap<Line, SpectraRow>,
    pub passing: u32,
    pub failing: u32,
}

pub fn collect_spectra(
    program: &Program,
    tests: &[TestCase],
    cfg: &RunConfig,
) -> Result<Spectra, ExecError> {
    let mut spectra = Spectra::default();
    for line in program.statement_lines() {
        spectra.rows.insert(line, SpectraRow::default());
    }
    for test in tests {
        let outcome = run_instrumented(program, test, cfg, None, TargetMode::Observe)?;
        let expected = expected_values(test)?;
        let pass = outcome.output.fault.is_none() && outcome.output.values == expected;
        if pass {
            spectra.passing += 1;
        } else {
            spectra.failing += 1;
        }
        for (line, row) in spectra.rows.iter_mut() {
            let hit = outcome.hit_lines.contains(line);
            match (pass, hit) {
                (true, true) => row.ep += 1,
                (true, false) => row.np += 1,
                (false, true) => row.ef += 1,
                (false, false) => row.nf += 1,
            }
        }
    }
    Ok(spectra)
}

#[derive(Debug, Error)]
pub enum ObserveError {
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("test {id} does not execute the statement at line {line}")]
    NotExecuted { id: String, line: Line },
}

/// Input/output states at `target` over one execution of `test`, one pair
/// per dynamic execution, in execution order.
pub fn observe_states(
    program: &Program,
    target: &NormalizedTarget,
    test: &TestCase,
    cfg: &RunConfig,
) -> Result<Vec<(ProgramState, ProgramState)>, ObserveError> {
    let outcome = run_instrumented(program, test, cfg, Some(target), TargetMode::Observe)?;
    if outcome.pairs.is_empty() {
        return Err(ObserveError::NotExecuted { id: test.id.clone(), line: target.line });
    }
    Ok(outcome.pairs)
}

/// Run with optional target instrumentation. This is the single execution
/// entry point: plain runs, observation, and angelic override all go
/// through here, so verdict, spectra, and state collection cannot drift
/// apart.
pub fn run_instrumented(
    program: &Program,
    test: &TestCase,
    cfg: &RunConfig,
    target: Option<&NormalizedTarget>,
    mode: TargetMode<'_>,
) -> Result<ExecOutcome, ExecError> {
    let entry = program.entry();
    if test.args.len() != entry.params.len() {
        return Err(ExecError::ArityMismatch {
            id: test.id.clone(),
            got: test.args.len(),
            want: entry.params.len(),
        });
    }
    let mut env = Env { scopes: Vec::new() };
    let mut frame = BTreeMap::new();
    for ((name, ty), arg) in entry.params.iter().zip(&test.args) {
        frame.insert(name.clone(), convert_arg(arg, ty, &test.id)?);
    }
    env.scopes.push(frame);

    let mut machine = Machine {
        cfg,
        target,
        mode,
        steps: 0,
        hit_lines: BTreeSet::new(),
        pairs: Vec::new(),
        target_hits: 0,
        printed: Vec::new(),
    };
    let result = machine.exec_block(&entry.body, &mut env);
    let mut values = machine.printed;
    let (fault, exhausted) = match result {
        Ok(Flow::Return(v)) => {
            values.push(v);
            (None, false)
        }
        // Falling off the end without a return: treat as a fault-free run
        // with no return value (the typechecker does not require total
        // return coverage).
        Ok(Flow::Normal) => (None, false),
        Err(Abort::Fault(f)) => (Some(f), false),
        Err(Abort::NeedMoreOverrides) => (None, true),
    };
    Ok(ExecOutcome {
        output: Output { values, fault },
        hit_lines: machine.hit_lines,
        pairs: machine.pairs,
        target_hits: machine.target_hits,
        overrides_exhausted: exhausted,
        steps: machine.steps,
    })
}

struct Env {
    scopes: Vec<BTreeMap<String, Value>>,
}

impl Env {
    fn get(&self, name: &str) -> &Value {
        for scope in self.scopes.iter().rev() {
            if let Some(v) = scope.get(name) {
                return v;
            }
        }
        unreachable!("typechecked variable {name} missing at runtime")
    }

    fn set(&mut self, name: &str, value: Value) {
        for scope in self.scopes.iter_mut().rev() {
            if let Some(slot) = scope.get_mut(name) {
                *slot = value;
                return;
            }
        }
        unreachable!("typechecked variable {name} missing at runtime")
    }

    /// Visible bindings, innermost winning.
    fn snapshot(&self) -> ProgramState {
        let mut out = BTreeMap::new();
        for scope in &self.scopes {
            for (k, v) in scope {
                out.insert(k.clone(), v.clone());
            }
        }
        out
    }
}

enum Flow {
    Normal,
    Return(Value),
}

enum Abort {
    Fault(FaultKind),
    NeedMoreOverrides,
}

impl From<FaultKind> for Abort {
    fn from(f: FaultKind) -> Self {
        Abort::Fault(f)
    }
}

fn zero_value(ty: &VarType) -> Value {
    match ty {
        VarType::Scalar(ScalarType::Bool) => Value::Bool(false),
        VarType::Scalar(ScalarType::Int) => Value::Int(0),
        VarType::Scalar(ScalarType::Char) => Value::Char(0),
        VarType::Array { elem: ScalarType::Int, len } => Value::IntArray(vec![0; *len]),
        VarType::Array { elem: ScalarType::Char, len } => Value::CharArray(vec![0; *len]),
        VarType::Array { elem: ScalarType::Bool, .. } => {
            unreachable!("bool arrays rejected by the parser")
        }
    }
}

struct Machine<'a> {
    cfg: &'a RunConfig,
    target: Option<&'a NormalizedTarget>,
    mode: TargetMode<'a>,
    steps: u64,
    hit_lines: BTreeSet<Line>,
    pairs: Vec<(ProgramState, ProgramState)>,
    target_hits: usize,
    printed: Vec<Value>,
}

impl<'a> Machine<'a> {
    fn step(&mut self) -> Result<(), Abort> {
        self.steps += 1;
        if self.steps > self.cfg.step_budget {
            return Err(Abort::Fault(FaultKind::StepLimit));
        }
        Ok(())
    }

    fn is_target(&self, line: Line, component: TargetComponent) -> bool {
        self.target
            .map(|t| t.line == line && t.component == component)
            .unwrap_or(false)
    }

    /// Produce the value of a target component at one dynamic execution:
    /// snapshot the input state, take the override or evaluate normally,
    /// and record the (input, input + lhs := value) pair. In override
    /// mode the original expression is never evaluated, so a faulting
    /// original cannot poison the run.
    fn target_value(
        &mut self,
        env: &Env,
        eval_normal: impl FnOnce(&mut Self, &Env) -> Result<Value, Abort>,
    ) -> Result<Value, Abort> {
        let target = self.target.expect("target_value called only when instrumented");
        let input = env.snapshot();
        let hit_index = self.target_hits;
        self.target_hits += 1;
        let value = match self.mode {
            TargetMode::Observe => eval_normal(self, env)?,
            TargetMode::Override(values) => match values.get(hit_index) {
                Some(v) => v.clone(),
                None => return Err(Abort::NeedMoreOverrides),
            },
        };
        let mut output = input.clone();
        output.insert(target.lhs.clone(), value.clone());
        self.pairs.push((input, output));
        Ok(value)
    }

    /// Evaluate a statement component, consulting the instrumentation when
    /// this (line, component) is the target.
    fn component_value(
        &mut self,
        line: Line,
        component: TargetComponent,
        expr: &Expr,
        env: &Env,
    ) -> Result<Value, Abort> {
        if self.is_target(line, component) {
            self.target_value(env, |m, e| m.eval(expr, e))
        } else {
            self.eval(expr, env)
        }
    }

    fn exec_block(&mut self, block: &Block, env: &mut Env) -> Result<Flow, Abort> {
        env.scopes.push(BTreeMap::new());
        let flow = self.exec_items(block, env);
        env.scopes.pop();
        flow
    }

    fn exec_items(&mut self, block: &Block, env: &mut Env) -> Result<Flow, Abort> {
        for item in &block.items {
            match item {
                Item::Decl(decl) => {
                    let scope = env.scopes.last_mut().expect("scope stack never empty");
                    scope.insert(decl.name.clone(), zero_value(&decl.ty));
                }
                Item::Stmt(stmt) => {
                    if let Flow::Return(v) = self.exec_stmt(stmt, env)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, stmt: &Stmt, env: &mut Env) -> Result<Flow, Abort> {
        self.step()?;
        self.hit_lines.insert(stmt.line);
        let line = stmt.line;
        match &stmt.kind {
            StmtKind::Assign { name, rhs } => {
                match rhs {
                    AssignRhs::Expr(e) => {
                        let v = self.component_value(line, TargetComponent::AssignRhs, e, env)?;
                        env.set(name, v);
                    }
                    AssignRhs::Ternary { guard, then_val, else_val } => {
                        let g = self.component_value(
                            line,
                            TargetComponent::TernaryGuard,
                            guard,
                            env,
                        )?;
                        let taken = matches!(g, Value::Bool(true));
                        let v = if taken {
                            self.component_value(line, TargetComponent::TernaryThen, then_val, env)?
                        } else {
                            self.component_value(line, TargetComponent::TernaryElse, else_val, env)?
                        };
                        env.set(name, v);
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::If { cond, then_body, else_body } => {
                let c = self.component_value(line, TargetComponent::BranchPredicate, cond, env)?;
                if matches!(c, Value::Bool(true)) {
                    self.exec_block(then_body, env)
                } else if let Some(e) = else_body {
                    self.exec_block(e, env)
                } else {
                    Ok(Flow::Normal)
                }
            }
            StmtKind::While { cond, body } => loop {
                self.step()?;
                let c = self.component_value(line, TargetComponent::BranchPredicate, cond, env)?;
                if !matches!(c, Value::Bool(true)) {
                    return Ok(Flow::Normal);
                }
                if let Flow::Return(v) = self.exec_block(body, env)? {
                    return Ok(Flow::Return(v));
                }
            },
            StmtKind::For { init, cond, update, body } => {
                let v = self.component_value(line, TargetComponent::ForInit, &init.value, env)?;
                env.set(&init.name, v);
                loop {
                    self.step()?;
                    let c = self.component_value(line, TargetComponent::ForCond, cond, env)?;
                    if !matches!(c, Value::Bool(true)) {
                        return Ok(Flow::Normal);
                    }
                    if let Flow::Return(v) = self.exec_block(body, env)? {
                        return Ok(Flow::Return(v));
                    }
                    let u =
                        self.component_value(line, TargetComponent::ForUpdate, &update.value, env)?;
                    env.set(&update.name, u);
                }
            }
            StmtKind::Return(e) => {
                let v = self.component_value(line, TargetComponent::ReturnExpr, e, env)?;
                Ok(Flow::Return(v))
            }
            StmtKind::Print(e) => {
                let v = self.component_value(line, TargetComponent::PrintArg, e, env)?;
                self.printed.push(v);
                Ok(Flow::Normal)
            }
            StmtKind::Block(b) => self.exec_block(b, env),
        }
    }

    fn eval(&mut self, expr: &Expr, env: &Env) -> Result<Value, Abort> {
        eval_expr(expr, &|name| env.get(name).clone()).map_err(Abort::Fault)
    }
}

/// Evaluate an expression against a variable lookup. Shared by the
/// interpreter and by dataset construction over recorded states.
pub fn eval_expr(expr: &Expr, lookup: &dyn Fn(&str) -> Value) -> Result<Value, FaultKind> {
    match expr {
        Expr::Const(v) => Ok(v.clone()),
        Expr::Var(name) => Ok(lookup(name)),
        Expr::Index { array, index } => {
            let idx = match eval_expr(index, lookup)? {
                Value::Int(i) => i,
                other => unreachable!("typechecked index evaluated to {other:?}"),
            };
            match lookup(array) {
                Value::IntArray(items) => items
                    .get(usize::try_from(idx).map_err(|_| FaultKind::IndexOutOfBounds)?)
                    .copied()
                    .map(Value::Int)
                    .ok_or(FaultKind::IndexOutOfBounds),
                Value::CharArray(items) => items
                    .get(usize::try_from(idx).map_err(|_| FaultKind::IndexOutOfBounds)?)
                    .copied()
                    .map(Value::Char)
                    .ok_or(FaultKind::IndexOutOfBounds),
                other => unreachable!("typechecked array read hit {other:?}"),
            }
        }
        Expr::Unary { op, operand } => {
            let v = eval_expr(operand, lookup)?;
            match (op, v) {
                (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                (UnOp::Neg, Value::Int(n)) => Ok(Value::Int(n.wrapping_neg())),
                (op, v) => unreachable!("typechecked unary {op:?} applied to {v:?}"),
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            // Short-circuit logical operators.
            match op {
                BinOp::And => {
                    return match eval_expr(lhs, lookup)? {
                        Value::Bool(false) => Ok(Value::Bool(false)),
                        Value::Bool(true) => eval_expr(rhs, lookup),
                        v => unreachable!("typechecked && hit {v:?}"),
                    }
                }
                BinOp::Or => {
                    return match eval_expr(lhs, lookup)? {
                        Value::Bool(true) => Ok(Value::Bool(true)),
                        Value::Bool(false) => eval_expr(rhs, lookup),
                        v => unreachable!("typechecked || hit {v:?}"),
                    }
                }
                _ => {}
            }
            let l = eval_expr(lhs, lookup)?;
            let r = eval_expr(rhs, lookup)?;
            Ok(match (op, l, r) {
                (BinOp::Eq, l, r) => Value::Bool(l == r),
                (BinOp::Ne, l, r) => Value::Bool(l != r),
                (BinOp::Lt, Value::Int(a), Value::Int(b)) => Value::Bool(a < b),
                (BinOp::Le, Value::Int(a), Value::Int(b)) => Value::Bool(a <= b),
                (BinOp::Gt, Value::Int(a), Value::Int(b)) => Value::Bool(a > b),
                (BinOp::Ge, Value::Int(a), Value::Int(b)) => Value::Bool(a >= b),
                (BinOp::Lt, Value::Char(a), Value::Char(b)) => Value::Bool(a < b),
                (BinOp::Le, Value::Char(a), Value::Char(b)) => Value::Bool(a <= b),
                (BinOp::Gt, Value::Char(a), Value::Char(b)) => Value::Bool(a > b),
                (BinOp::Ge, Value::Char(a), Value::Char(b)) => Value::Bool(a >= b),
                (BinOp::Add, Value::Int(a), Value::Int(b)) => Value::Int(a.wrapping_add(b)),
                (BinOp::Sub, Value::Int(a), Value::Int(b)) => Value::Int(a.wrapping_sub(b)),
                (BinOp::Mul, Value::Int(a), Value::Int(b)) => Value::Int(a.wrapping_mul(b)),
                (BinOp::Div, Value::Int(a), Value::Int(b)) => {
                    if b == 0 {
                        return Err(FaultKind::DivByZero);
                    }
                    Value::Int(a.wrapping_div(b))
                }
                (BinOp::Mod, Value::Int(a), Value::Int(b)) => {
                    if b == 0 {
                        return Err(FaultKind::DivByZero);
                    }
                    Value::Int(a.wrapping_rem(b))
                }
                (op, l, r) => unreachable!("typechecked binary {op:?} hit {l:?}, {r:?}"),
            })
        }
    }
}

/// Evaluate an expression over a recorded program state.
pub fn eval_in_state(expr: &Expr, state: &ProgramState) -> Result<Value, FaultKind> {
    eval_expr(expr, &|name| {
        state
            .get(name)
            .unwrap_or_else(|| unreachable!("state lacks variable {name}"))
            .clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{normalize, parse_program};

    fn test_case(id: &str, args: serde_json::Value, expect: serde_json::Value) -> TestCase {
        TestCase {
            id: id.into(),
            args: args.as_array().unwrap().clone(),
            expect: expect.as_array().unwrap().clone(),
        }
    }

    #[test]
    fn run_test_pass_and_fail() {
        let p = parse_program("int f(int a) {\n    return a + 1;\n}\n").unwrap();
        let cfg = RunConfig::default();
        let t1 = test_case("t1", serde_json::json!([1]), serde_json::json!([2]));
        assert!(run_test(&p, &t1, &cfg).unwrap().pass);
        let t2 = test_case("t2", serde_json::json!([1]), serde_json::json!([3]));
        assert!(!run_test(&p, &t2, &cfg).unwrap().pass);
    }

    #[test]
    fn division_by_zero_fails_with_fault_token() {
        let p = parse_program("int f(int a) {\n    return 10 / a;\n}\n").unwrap();
        let t = test_case("t", serde_json::json!([0]), serde_json::json!([0]));
        let v = run_test(&p, &t, &RunConfig::default()).unwrap();
        assert!(!v.pass);
        assert_eq!(v.output.fault, Some(FaultKind::DivByZero));
    }

    #[test]
    fn step_budget_exhaustion_fails() {
        let p = parse_program(
            "int f(int a) {\n    while (a == a) {\n        a = a + 1;\n    }\n    return a;\n}\n",
        )
        .unwrap();
        let t = test_case("t", serde_json::json!([0]), serde_json::json!([0]));
        let cfg = RunConfig { step_budget: 1000 };
        let v = run_test(&p, &t, &cfg).unwrap();
        assert!(!v.pass);
        assert_eq!(v.output.fault, Some(FaultKind::StepLimit));
    }

    #[test]
    fn spectra_counts_partition_tests() {
        let p = parse_program(
            "int f(int a) {\n    if (a > 0) {\n        return 1;\n    }\n    return 0;\n}\n",
        )
        .unwrap();
        let tests = vec![
            test_case("p1", serde_json::json!([1]), serde_json::json!([1])),
            test_case("f1", serde_json::json!([2]), serde_json::json!([0])),
        ];
        let spectra = collect_spectra(&p, &tests, &RunConfig::default()).unwrap();
        assert_eq!(spectra.passing, 1);
        assert_eq!(spectra.failing, 1);
        // Both tests execute lines 2 and 3; the fallthrough return on
        // line 5 is executed by neither.
        assert_eq!(spectra.rows[&2], SpectraRow { ep: 1, ef: 1, np: 0, nf: 0 });
        assert_eq!(spectra.rows[&3], SpectraRow { ep: 1, ef: 1, np: 0, nf: 0 });
        assert_eq!(spectra.rows[&5], SpectraRow { ep: 0, ef: 0, np: 1, nf: 1 });
    }

    #[test]
    fn observe_collects_one_pair_per_execution() {
        let p = parse_program(
            "int f(int n) {\n    int s;\n    int i;\n    for (i = 0; i < n; i = i + 1) {\n        s = s + i;\n    }\n    return s;\n}\n",
        )
        .unwrap();
        let (func, stmt) = p.stmt_at(5).unwrap();
        let target = &normalize(func, stmt).unwrap()[0];
        let t = test_case("t", serde_json::json!([3]), serde_json::json!([3]));
        let pairs = observe_states(&p, target, &t, &RunConfig::default()).unwrap();
        assert_eq!(pairs.len(), 3);
        // Output state differs from input only at the assigned variable.
        for (input, output) in &pairs {
            for (k, v) in input {
                if k != "s" {
                    assert_eq!(output.get(k), Some(v));
                }
            }
        }
        assert_eq!(pairs[2].0.get("i"), Some(&Value::Int(2)));
        assert_eq!(pairs[2].1.get("s"), Some(&Value::Int(3)));
    }

    #[test]
    fn observe_unexecuted_statement_is_not_executed() {
        let p = parse_program(
            "int f(int a) {\n    if (a > 0) {\n        return 1;\n    }\n    return 0;\n}\n",
        )
        .unwrap();
        let (func, stmt) = p.stmt_at(3).unwrap();
        let target = &normalize(func, stmt).unwrap()[0];
        let t = test_case("t", serde_json::json!([-5]), serde_json::json!([0]));
        let err = observe_states(&p, target, &t, &RunConfig::default()).unwrap_err();
        assert!(matches!(err, ObserveError::NotExecuted { line: 3, .. }));
    }

    #[test]
    fn override_substitutes_branch_values() {
        let p = parse_program(
            "char f(char[4] s, int i) {\n    if (s[i] == '\\0') {\n        return '@';\n    }\n    return s[i];\n}\n",
        )
        .unwrap();
        let (func, stmt) = p.stmt_at(2).unwrap();
        let target = &normalize(func, stmt).unwrap()[0];
        let t = test_case("t", serde_json::json!(["ab", 0]), serde_json::json!(["@"]));
        // Normally s[0]='a' != '\0', so the branch is false and f returns 'a'.
        let plain = run_test(&p, &t, &RunConfig::default()).unwrap();
        assert!(!plain.pass);
        // Forcing the branch true makes the test pass.
        let outcome = run_instrumented(
            &p,
            &t,
            &RunConfig::default(),
            Some(target),
            TargetMode::Override(&[Value::Bool(true)]),
        )
        .unwrap();
        assert_eq!(outcome.output.values, vec![Value::Char(b'@')]);
        assert_eq!(outcome.pairs.len(), 1);
        assert_eq!(outcome.pairs[0].1.get("branch_2"), Some(&Value::Bool(true)));
    }

    #[test]
    fn override_exhaustion_is_signaled() {
        let p = parse_program(
            "int f(int n) {\n    int i;\n    while (i < n) {\n        i = i + 1;\n    }\n    return i;\n}\n",
        )
        .unwrap();
        let (func, stmt) = p.stmt_at(3).unwrap();
        let target = &normalize(func, stmt).unwrap()[0];
        let t = test_case("t", serde_json::json!([2]), serde_json::json!([2]));
        let outcome = run_instrumented(
            &p,
            &t,
            &RunConfig::default(),
            Some(target),
            TargetMode::Override(&[Value::Bool(true)]),
        )
        .unwrap();
        assert!(outcome.overrides_exhausted);
        assert_eq!(outcome.target_hits, 2);
    }

    #[test]
    fn determinism_identical_runs() {
        let p = parse_program(
            "int f(int a, int b) {\n    int i;\n    int acc;\n    for (i = 0; i < a; i = i + 1) {\n        acc = acc + b % 7;\n    }\n    return acc;\n}\n",
        )
        .unwrap();
        let t = test_case("t", serde_json::json!([5, 13]), serde_json::json!([30]));
        let cfg = RunConfig::default();
        let a = run_instrumented(&p, &t, &cfg, None, TargetMode::Observe).unwrap();
        let b = run_instrumented(&p, &t, &cfg, None, TargetMode::Observe).unwrap();
        assert_eq!(a.output, b.output);
        assert_eq!(a.hit_lines, b.hit_lines);
        assert_eq!(a.steps, b.steps);
    }

    #[test]
    fn load_tests_parses_jsonl() {
        let text = "{\"id\":\"t1\",\"args\":[1,\"a\"],\"expect\":[true]}\n\n{\"id\":\"t2\",\"args\":[],\"expect\":[0]}\n";
        let tests = load_tests(text).unwrap();
        assert_eq!(tests.len(), 2);
        assert_eq!(tests[0].id, "t1");
    }
}
