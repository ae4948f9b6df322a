//! State transformer derivation.
//!
//! For each candidate statement the transformer f is the operational
//! specification: an array of (input state, output state) pairs that would
//! make every test pass. Pairs for passing tests come from concrete
//! observation. Pairs for failing tests come from an angelic value search:
//! enumerate value sequences for the statement's LHS, one value per dynamic
//! execution, until the test passes, then keep the states of that passing
//! run. Tests that do not execute the statement are ignored.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::exec::{
    expected_values, run_instrumented, ExecError, ExecOutcome, ProgramState, RunConfig, TargetMode,
    TestCase,
};
use crate::lang::ast::*;
use crate::lang::normalize::NormalizedTarget;
use crate::lang::subexps;

/// Where a transformer pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    FromPassing,
    FromFailingAngelic,
}

#[derive(Debug, Clone)]
pub struct TransformerPair {
    pub input: ProgramState,
    pub output: ProgramState,
    pub provenance: Provenance,
    pub test_id: String,
}

#[derive(Debug, Clone, Default)]
pub struct StateTransformer {
    pub pairs: Vec<TransformerPair>,
}

/// Result of deriving a transformer for one target.
#[derive(Debug, Clone)]
pub enum DerivationOutcome {
    Derived(StateTransformer),
    /// Every failing test that reaches the statement still fails under all
    /// attempted value assignments: the statement cannot be the (sole)
    /// fault, so suggest retaining it.
    RetainStatement,
    /// The search timed out on every failing test; no judgment possible.
    Discarded,
}

/// Angelic search limits and the integer search window.
#[derive(Debug, Clone)]
pub struct AngelicConfig {
    pub window_lo: i64,
    pub window_hi: i64,
    /// Cap on value-sequence length (dynamic executions per test).
    pub max_hits: usize,
    /// Interpreter-step budget per failing test.
    pub budget_steps: u64,
    /// Wall-clock budget per failing test.
    pub budget_ms: u64,
}

impl Default for AngelicConfig {
    fn default() -> Self {
        AngelicConfig {
            window_lo: -64,
            window_hi: 64,
            max_hits: 10,
            budget_steps: 10_000_000,
            budget_ms: 5_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    /// Value sequence (one value per dynamic execution) under which the
    /// test passes, plus the state pairs of that passing run.
    Witness(Vec<Value>, Vec<(ProgramState, ProgramState)>),
    NoWitness,
    Timeout,
}

/// Candidate values for the target's LHS, in deterministic search order.
/// Booleans try false then true; integers sweep the window plus constants
/// from the program and the test's expected output, ascending; chars sweep
/// ASCII.
pub fn angelic_domain(
    program: &Program,
    target: &NormalizedTarget,
    test: &TestCase,
    cfg: &AngelicConfig,
) -> Vec<Value> {
    match target.lhs_type {
        ScalarType::Bool => vec![Value::Bool(false), Value::Bool(true)],
        ScalarType::Char => (0u8..=127).map(Value::Char).collect(),
        ScalarType::Int => {
            let mut values: BTreeSet<i64> = (cfg.window_lo..=cfg.window_hi).collect();
            for func in &program.functions {
                collect_int_consts(&func.body, &mut values);
            }
            if let Ok(expected) = expected_values(test) {
                for v in expected {
                    if let Value::Int(n) = v {
                        values.insert(n);
                    }
                }
            }
            values.into_iter().map(Value::Int).collect()
        }
    }
}

fn collect_int_consts(block: &Block, out: &mut BTreeSet<i64>) {
    crate::repairspace::walk_function_exprs(block, &mut |e: &Expr| {
        for sub in subexps(e) {
            if let Expr::Const(Value::Int(n)) = sub {
                out.insert(n);
            }
        }
    });
}

/// Depth-first search over value sequences for the target's LHS on a
/// failing test. Sequences are extended lazily: the run signals when it
/// executes the target beyond the current prefix, and the prefix grows by
/// one position starting at the first domain value; exhausted positions
/// advance odometer-style. For a boolean target hit twice this visits
/// FF, FT, TF, TT in that order.
pub fn angelic_search(
    program: &Program,
    target: &NormalizedTarget,
    test: &TestCase,
    run_cfg: &RunConfig,
    cfg: &AngelicConfig,
) -> Result<SearchOutcome, ExecError> {
    let domain = angelic_domain(program, target, test, cfg);
    let expected = expected_values(test)?;
    let deadline = Instant::now() + Duration::from_millis(cfg.budget_ms);
    let mut stack: Vec<usize> = Vec::new();
    let mut total_steps: u64 = 0;
    loop {
        if Instant::now() > deadline || total_steps > cfg.budget_steps {
            return Ok(SearchOutcome::Timeout);
        }
        let values: Vec<Value> = stack.iter().map(|&i| domain[i].clone()).collect();
        let outcome: ExecOutcome =
            run_instrumented(program, test, run_cfg, Some(target), TargetMode::Override(&values))?;
        total_steps += outcome.steps;
        if outcome.overrides_exhausted {
            if stack.len() < cfg.max_hits {
                stack.push(0);
                continue;
            }
            // Depth cap reached: treat as a failed leaf.
        } else if outcome.output.fault.is_none() && outcome.output.values == expected {
            let used = outcome.target_hits.min(values.len());
            return Ok(SearchOutcome::Witness(values[..used].to_vec(), outcome.pairs));
        }
        // Positions beyond the hits actually consumed cannot change the
        // run; truncate before advancing.
        stack.truncate(outcome.target_hits.min(stack.len()));
        loop {
            match stack.pop() {
                None => return Ok(SearchOutcome::NoWitness),
                Some(i) if i + 1 < domain.len() => {
                    stack.push(i + 1);
                    break;
                }
                Some(_) => {}
            }
        }
    }
}

/// Derive the state transformer for `target` over the test suite.
///
/// `verdicts` must align with `tests` (one verdict per test, same order).
/// Pairs are assembled in test order regardless of how searches complete.
pub fn st_trans(
    program: &Program,
    target: &NormalizedTarget,
    tests: &[TestCase],
    verdicts: &[bool],
    run_cfg: &RunConfig,
    cfg: &AngelicConfig,
) -> Result<DerivationOutcome, ExecError> {
    debug_assert_eq!(tests.len(), verdicts.len());
    let mut pairs: Vec<TransformerPair> = Vec::new();
    let mut failing_traversing = 0usize;
    let mut timeouts = 0usize;
    let mut witnesses = 0usize;
    for (test, &pass) in tests.iter().zip(verdicts) {
        if pass {
            let outcome =
                run_instrumented(program, test, run_cfg, Some(target), TargetMode::Observe)?;
            // Tests that do not execute the statement are ignored.
            for (input, output) in outcome.pairs {
                pairs.push(TransformerPair {
                    input,
                    output,
                    provenance: Provenance::FromPassing,
                    test_id: test.id.clone(),
                });
            }
        } else {
            // Does the failing test reach the statement at all?
            let plain =
                run_instrumented(program, test, run_cfg, Some(target), TargetMode::Observe)?;
            if plain.target_hits == 0 {
                continue;
            }
            failing_traversing += 1;
            match angelic_search(program, target, test, run_cfg, cfg)? {
                SearchOutcome::Witness(_, found) => {
                    witnesses += 1;
                    for (input, output) in found {
                        pairs.push(TransformerPair {
                            input,
                            output,
                            provenance: Provenance::FromFailingAngelic,
                            test_id: test.id.clone(),
                        });
                    }
                }
                SearchOutcome::NoWitness => {}
                SearchOutcome::Timeout => timeouts += 1,
            }
        }
    }
    if failing_traversing > 0 && witnesses == 0 {
        if timeouts == failing_traversing {
            return Ok(DerivationOutcome::Discarded);
        }
        // At least one search exhausted its space without a witness and
        // none succeeded: the statement cannot repair the failures.
        return Ok(DerivationOutcome::RetainStatement);
    }
    Ok(DerivationOutcome::Derived(StateTransformer { pairs }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::run_test;
    use crate::lang::{normalize, parse_program};

    fn tc(id: &str, args: serde_json::Value, expect: serde_json::Value) -> TestCase {
        TestCase {
            id: id.into(),
            args: args.as_array().unwrap().clone(),
            expect: expect.as_array().unwrap().clone(),
        }
    }

    fn target_of(p: &Program, line: Line) -> NormalizedTarget {
        let (func, stmt) = p.stmt_at(line).unwrap();
        normalize(func, stmt).unwrap().remove(0)
    }

    #[test]
    fn bool_search_tries_false_then_true() {
        let p = parse_program(
            "char f(char[4] s, int i) {\n    if (s[i] == '\\0') {\n        return '@';\n    }\n    return s[i];\n}\n",
        )
        .unwrap();
        let target = target_of(&p, 2);
        let t = tc("t", serde_json::json!(["ab", 0]), serde_json::json!(["@"]));
        let run_cfg = RunConfig::default();
        let cfg = AngelicConfig::default();
        match angelic_search(&p, &target, &t, &run_cfg, &cfg).unwrap() {
            SearchOutcome::Witness(values, pairs) => {
                assert_eq!(values, vec![Value::Bool(true)]);
                assert_eq!(pairs.len(), 1);
            }
            other => panic!("expected witness, got {other:?}"),
        }
    }

    #[test]
    fn int_search_finds_forced_value() {
        let p = parse_program("int f(int a) {\n    a = a * 2;\n    return a;\n}\n").unwrap();
        let target = target_of(&p, 2);
        let t = tc("t", serde_json::json!([3]), serde_json::json!([7]));
        assert!(!run_test(&p, &t, &RunConfig::default()).unwrap().pass);
        match angelic_search(&p, &target, &t, &RunConfig::default(), &AngelicConfig::default())
            .unwrap()
        {
            SearchOutcome::Witness(values, _) => assert_eq!(values, vec![Value::Int(7)]),
            other => panic!("expected witness, got {other:?}"),
        }
    }

    /// Brute force over the window: exactly one value makes the test pass,
    /// so the witness is unique.
    #[test]
    fn forced_int_witness_is_unique() {
        let p = parse_program("int f(int a) {\n    a = a * 2;\n    return a;\n}\n").unwrap();
        let target = target_of(&p, 2);
        let t = tc("t", serde_json::json!([3]), serde_json::json!([7]));
        let cfg = AngelicConfig::default();
        let domain = angelic_domain(&p, &target, &t, &cfg);
        let expected = expected_values(&t).unwrap();
        let mut passing = Vec::new();
        for v in &domain {
            let out = run_instrumented(
                &p,
                &t,
                &RunConfig::default(),
                Some(&target),
                TargetMode::Override(std::slice::from_ref(v)),
            )
            .unwrap();
            if out.output.fault.is_none() && out.output.values == expected {
                passing.push(v.clone());
            }
        }
        assert_eq!(passing, vec![Value::Int(7)]);
    }

    #[test]
    fn unfixable_statement_yields_no_witness() {
        // The fault is in the returned constant, not in the branch: no
        // branch value can produce 99.
        let p = parse_program(
            "int f(int a) {\n    if (a > 0) {\n        return 1;\n    }\n    return 0;\n}\n",
        )
        .unwrap();
        let target = target_of(&p, 2);
        let t = tc("t", serde_json::json!([1]), serde_json::json!([99]));
        let got =
            angelic_search(&p, &target, &t, &RunConfig::default(), &AngelicConfig::default())
                .unwrap();
        assert_eq!(got, SearchOutcome::NoWitness);
    }

    #[test]
    fn st_trans_mixes_passing_and_angelic_pairs() {
        let p = parse_program(
            "char f(char[4] s, int i) {\n    if (s[i] == '\\0') {\n        return '@';\n    }\n    return s[i];\n}\n",
        )
        .unwrap();
        let target = target_of(&p, 2);
        let tests = vec![
            tc("p", serde_json::json!(["ab", 0]), serde_json::json!(["a"])),
            tc("f", serde_json::json!(["x", 0]), serde_json::json!(["@"])),
        ];
        let run_cfg = RunConfig::default();
        let verdicts: Vec<bool> =
            tests.iter().map(|t| run_test(&p, t, &run_cfg).unwrap().pass).collect();
        assert_eq!(verdicts, vec![true, false]);
        match st_trans(&p, &target, &tests, &verdicts, &run_cfg, &AngelicConfig::default())
            .unwrap()
        {
            DerivationOutcome::Derived(f) => {
                assert_eq!(f.pairs.len(), 2);
                assert_eq!(f.pairs[0].provenance, Provenance::FromPassing);
                assert_eq!(f.pairs[1].provenance, Provenance::FromFailingAngelic);
                assert_eq!(f.pairs[1].output.get("branch_2"), Some(&Value::Bool(true)));
            }
            other => panic!("expected derived transformer, got {other:?}"),
        }
    }

    #[test]
    fn all_no_witness_retains_statement() {
        let p = parse_program(
            "int f(int a) {\n    if (a > 0) {\n        return 1;\n    }\n    return 0;\n}\n",
        )
        .unwrap();
        let target = target_of(&p, 2);
        let tests = vec![tc("f", serde_json::json!([1]), serde_json::json!([99]))];
        let verdicts = vec![false];
        match st_trans(
            &p,
            &target,
            &tests,
            &verdicts,
            &RunConfig::default(),
            &AngelicConfig::default(),
        )
        .unwrap()
        {
            DerivationOutcome::RetainStatement => {}
            other => panic!("expected retain, got {other:?}"),
        }
    }

    #[test]
    fn all_timeouts_discard_statement() {
        let p = parse_program("int f(int a) {\n    a = a * 2;\n    return a;\n}\n").unwrap();
        let target = target_of(&p, 2);
        let tests = vec![tc("f", serde_json::json!([3]), serde_json::json!([7]))];
        let verdicts = vec![false];
        let cfg = AngelicConfig { budget_steps: 0, ..AngelicConfig::default() };
        match st_trans(&p, &target, &tests, &verdicts, &RunConfig::default(), &cfg).unwrap() {
            DerivationOutcome::Discarded => {}
            other => panic!("expected discard, got {other:?}"),
        }
    }

    #[test]
    fn witness_replay_passes_the_test() {
        let p = parse_program(
            "int f(int n) {\n    int i;\n    int acc;\n    while (i < n) {\n        acc = acc + 2;\n        i = i + 1;\n    }\n    return acc;\n}\n",
        )
        .unwrap();
        // Fault: the body adds 2 where the suite wants 3 per iteration.
        let target = target_of(&p, 5);
        let t = tc("t", serde_json::json!([2]), serde_json::json!([6]));
        match angelic_search(&p, &target, &t, &RunConfig::default(), &AngelicConfig::default())
            .unwrap()
        {
            SearchOutcome::Witness(values, _) => {
                let out = run_instrumented(
                    &p,
                    &t,
                    &RunConfig::default(),
                    Some(&target),
                    TargetMode::Override(&values),
                )
                .unwrap();
                assert_eq!(out.output.values, vec![Value::Int(6)]);
            }
            other => panic!("expected witness, got {other:?}"),
        }
    }
}
