//! End-to-end driver: localize, derive transformers, build repair spaces
//! and datasets, mint hints, and rank them. Also the noise estimator and
//! the seeded-fault corpus runner.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::exec::{
    collect_spectra, observe_states, run_test, ExecError, ObserveError, ProgramState, RunConfig,
    TestCase, TestError,
};
use crate::hints::{
    mint_compound_hints, mint_simple_hints, rank_hints, Hint, HintConfig, HintKind, HintPayload,
    LikelihoodTable,
};
use crate::lang::ast::{Line, Program};
use crate::lang::normalize::{NormalizedTarget, TargetComponent};
use crate::lang::{normalize, LangError};
use crate::localize::{localize_faults, LocalizeError, SuspiciousList};
use crate::repairspace::{
    build_dataset, build_repair_space, const_pool, vars_in_scope, Dataset, SpaceError,
};
use crate::transformer::{st_trans, AngelicConfig, DerivationOutcome, StateTransformer};

/// Pipeline configuration. Defaults are the operating point the hint
/// thresholds were calibrated at: k=5, m=4, delta=0.4, beta=0.1,
/// gamma=0.6, edit threshold 2.
#[derive(Debug, Clone)]
pub struct Config {
    pub k: usize,
    pub m: usize,
    pub delta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub edit_threshold: usize,
    pub seed: u64,
    pub expr_cap: usize,
    pub step_budget: u64,
    pub angelic: AngelicConfig,
    /// Fraction of passing tests used (the leading ones in suite order);
    /// failing tests are always all used.
    pub passing_fraction: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            k: 5,
            m: 4,
            delta: 0.4,
            beta: 0.1,
            gamma: 0.6,
            edit_threshold: 2,
            seed: 17,
            expr_cap: 200_000,
            step_budget: 1_000_000,
            angelic: AngelicConfig::default(),
            passing_fraction: 1.0,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.beta > 0.0 && self.beta <= self.delta && self.delta < 1.0) {
            return err("thresholds must satisfy 0 < beta <= delta < 1");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return err("compound threshold must satisfy 0 < gamma < 1");
        }
        if self.k < 1 || self.m < 1 {
            return err("k and m must be at least 1");
        }
        if !(self.passing_fraction > 0.0 && self.passing_fraction <= 1.0) {
            return err("passing fraction must be in (0, 1]");
        }
        if self.angelic.window_lo > self.angelic.window_hi {
            return err("angelic window is empty");
        }
        Ok(())
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig { step_budget: self.step_budget }
    }

    fn hint_config(&self, line: Line, component: TargetComponent) -> HintConfig {
        // Stable per-target seed so statement analyses are independent of
        // scheduling and of each other.
        let mixed = self
            .seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(u64::from(line) << 8)
            .wrapping_add(component as u64);
        HintConfig {
            delta: self.delta,
            beta: self.beta,
            gamma: self.gamma,
            edit_threshold: self.edit_threshold,
            seed: mixed,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Test(#[from] TestError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Localize(#[from] LocalizeError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("test suite is empty")]
    EmptySuite,
}

/// How a localized statement component fared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetOutcome {
    /// Hints were minted from a derived transformer with this many pairs.
    Analyzed { pairs: usize },
    /// Transformer derivation concluded the statement cannot be the fault.
    RetainOnly,
    /// Angelic search timed out on every failing test.
    Discarded,
    /// Transformer too small for rank statistics (needs 3 pairs).
    TooFewPairs { pairs: usize },
    /// Statement kind has no analyzable component.
    Unsupported,
    /// Enumerated repair space exceeded the cap.
    SpaceTooLarge,
}

impl TargetOutcome {
    pub fn label(&self) -> String {
        match self {
            TargetOutcome::Analyzed { pairs } => format!("analyzed ({pairs} pairs)"),
            TargetOutcome::RetainOnly => "retain-statement".to_string(),
            TargetOutcome::Discarded => "discarded (search timeout)".to_string(),
            TargetOutcome::TooFewPairs { pairs } => {
                format!("skipped ({pairs} pairs, need 3)")
            }
            TargetOutcome::Unsupported => "unsupported statement".to_string(),
            TargetOutcome::SpaceTooLarge => "repair space over cap".to_string(),
        }
    }
}

/// Per-target record kept alongside the hints, for reports and dumps.
#[derive(Debug, Clone)]
pub struct TargetAnalysis {
    pub line: Line,
    pub component: TargetComponent,
    pub suspiciousness: f64,
    pub outcome: TargetOutcome,
    pub transformer: Option<StateTransformer>,
    /// Ranked (expression, likelihood) list, filled when requested.
    pub likelihoods: Option<Vec<(String, f64)>>,
    /// Dataset matrix as CSV, filled when requested.
    pub dataset_csv: Option<String>,
}

/// What extra per-target material to retain for dumping.
#[derive(Debug, Clone, Copy, Default)]
pub struct DumpFlags {
    pub transformer: bool,
    pub dataset: bool,
    pub likelihoods: bool,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub hints: Vec<Hint>,
    pub localization: SuspiciousList,
    pub targets: Vec<TargetAnalysis>,
    pub passing_tests: usize,
    pub failing_tests: usize,
}

/// Run the whole pipeline on a parsed program and test suite.
pub fn run_pipeline(
    program: &Program,
    tests: &[TestCase],
    cfg: &Config,
    dumps: DumpFlags,
) -> Result<PipelineOutput, PipelineError> {
    cfg.validate()?;
    if tests.is_empty() {
        return Err(PipelineError::EmptySuite);
    }
    let run_cfg = cfg.run_config();
    let mut verdicts = Vec::with_capacity(tests.len());
    for test in tests {
        verdicts.push(run_test(program, test, &run_cfg)?.pass);
    }
    let failing = verdicts.iter().filter(|v| !**v).count();
    if failing == 0 {
        return Err(PipelineError::Localize(LocalizeError::NoFailingTests));
    }

    // Optionally thin out passing tests (the leading fraction in suite
    // order); failing tests always stay.
    let passing_total = tests.len() - failing;
    let keep_passing = ((passing_total as f64) * cfg.passing_fraction).ceil() as usize;
    let mut kept_tests: Vec<TestCase> = Vec::new();
    let mut kept_verdicts: Vec<bool> = Vec::new();
    let mut seen_passing = 0usize;
    for (test, &pass) in tests.iter().zip(&verdicts) {
        if pass {
            if seen_passing < keep_passing {
                kept_tests.push(test.clone());
                kept_verdicts.push(true);
            }
            seen_passing += 1;
        } else {
            kept_tests.push(test.clone());
            kept_verdicts.push(false);
        }
    }

    let spectra = collect_spectra(program, &kept_tests, &run_cfg)?;
    let localization = localize_faults(&spectra, cfg.k)?;

    // Collect every (statement, component) target up front, then analyze
    // them independently.
    let mut work: Vec<(Line, f64, Option<NormalizedTarget>)> = Vec::new();
    for entry in &localization.entries {
        let (func, stmt) = program
            .stmt_at(entry.line)
            .expect("localized line refers to a statement");
        match normalize(func, stmt) {
            Ok(targets) => {
                for t in targets {
                    work.push((entry.line, entry.score, Some(t)));
                }
            }
            Err(_) => work.push((entry.line, entry.score, None)),
        }
    }

    let analyses: Vec<(TargetAnalysis, Vec<Hint>)> = work
        .par_iter()
        .map(|(line, score, target)| match target {
            Some(t) => analyze_target(program, &kept_tests, &kept_verdicts, cfg, dumps, *score, t),
            None => (
                TargetAnalysis {
                    line: *line,
                    component: TargetComponent::AssignRhs,
                    suspiciousness: *score,
                    outcome: TargetOutcome::Unsupported,
                    transformer: None,
                    likelihoods: None,
                    dataset_csv: None,
                },
                Vec::new(),
            ),
        })
        .collect();

    let mut targets = Vec::new();
    let mut hints = Vec::new();
    for (analysis, mut target_hints) in analyses {
        targets.push(analysis);
        hints.append(&mut target_hints);
    }
    Ok(PipelineOutput {
        hints: rank_hints(hints),
        localization,
        targets,
        passing_tests: passing_total,
        failing_tests: failing,
    })
}

fn analyze_target(
    program: &Program,
    tests: &[TestCase],
    verdicts: &[bool],
    cfg: &Config,
    dumps: DumpFlags,
    suspiciousness: f64,
    target: &NormalizedTarget,
) -> (TargetAnalysis, Vec<Hint>) {
    let run_cfg = cfg.run_config();
    let mut analysis = TargetAnalysis {
        line: target.line,
        component: target.component,
        suspiciousness,
        outcome: TargetOutcome::Discarded,
        transformer: None,
        likelihoods: None,
        dataset_csv: None,
    };
    let outcome = match st_trans(program, target, tests, verdicts, &run_cfg, &cfg.angelic) {
        Ok(o) => o,
        Err(_) => {
            analysis.outcome = TargetOutcome::Unsupported;
            return (analysis, Vec::new());
        }
    };
    match outcome {
        DerivationOutcome::Discarded => {
            analysis.outcome = TargetOutcome::Discarded;
            (analysis, Vec::new())
        }
        DerivationOutcome::RetainStatement => {
            analysis.outcome = TargetOutcome::RetainOnly;
            let hint = Hint {
                line: target.line,
                payload: HintPayload::RetainStatement,
                score: 1.0,
                constituents: Vec::new(),
            };
            (analysis, vec![hint])
        }
        DerivationOutcome::Derived(transformer) => {
            let pairs = transformer.pairs.len();
            if pairs < 3 {
                analysis.outcome = TargetOutcome::TooFewPairs { pairs };
                if dumps.transformer {
                    analysis.transformer = Some(transformer);
                }
                return (analysis, Vec::new());
            }
            let func = program
                .stmt_at(target.line)
                .map(|(f, _)| f)
                .expect("target line refers to a statement");
            let vars = vars_in_scope(func, target);
            let pool = const_pool(func);
            let space = match build_repair_space(&target.rhs, &vars, cfg.m, &pool, cfg.expr_cap) {
                Ok(s) => s,
                Err(SpaceError::SpaceTooLarge { .. }) => {
                    analysis.outcome = TargetOutcome::SpaceTooLarge;
                    return (analysis, Vec::new());
                }
                Err(SpaceError::NoSuchStatement { .. }) => {
                    analysis.outcome = TargetOutcome::Unsupported;
                    return (analysis, Vec::new());
                }
            };
            let dataset = match build_dataset(&transformer, &space, &target.lhs) {
                Ok(d) => d,
                Err(_) => {
                    analysis.outcome = TargetOutcome::TooFewPairs { pairs: 0 };
                    return (analysis, Vec::new());
                }
            };
            let hint_cfg = cfg.hint_config(target.line, target.component);
            let mut hints = mint_simple_hints(target.line, &dataset, &space, &hint_cfg);
            hints.extend(mint_compound_hints(target.line, &dataset, &space, &hint_cfg));
            analysis.outcome = TargetOutcome::Analyzed { pairs };
            if dumps.likelihoods {
                analysis.likelihoods = Some(ranked_likelihoods(&dataset));
            }
            if dumps.dataset {
                analysis.dataset_csv = Some(dataset_csv(&dataset));
            }
            if dumps.transformer {
                analysis.transformer = Some(transformer);
            }
            (analysis, hints)
        }
    }
}

fn ranked_likelihoods(dataset: &Dataset) -> Vec<(String, f64)> {
    let table = LikelihoodTable::new(dataset);
    let mut rows: Vec<(String, f64)> = dataset
        .columns
        .iter()
        .zip(&table.values)
        .map(|(col, lik)| (crate::lang::pretty_expr(&col.expr), *lik))
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows
}

fn dataset_csv(dataset: &Dataset) -> String {
    let mut out = String::new();
    let mut header: Vec<String> = vec![dataset.x_name.clone()];
    header.extend(dataset.columns.iter().map(|c| {
        let text = crate::lang::pretty_expr(&c.expr);
        format!("\"{}\"", text.replace('"', "\"\""))
    }));
    out.push_str(&header.join(","));
    out.push('\n');
    for row in 0..dataset.n {
        let mut cells: Vec<String> = vec![dataset.x_values.render(row)];
        cells.extend(dataset.columns.iter().map(|c| c.values.render(row)));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("repaired program still fails test {id}")]
    RepairedStillFails { id: String },
    #[error("statement at line {line} not found or not analyzable")]
    NoSuchStatement { line: Line },
    #[error("statement at line {line} has no component index {component}")]
    NoSuchComponent { line: Line, component: usize },
    #[error("no transformer derivable at line {line}: {reason}")]
    NoTransformer { line: Line, reason: String },
}

/// Fraction (as a percentage) of the faulty program's transformer pairs
/// that do not occur in the noise-free transformer observed on the
/// repaired program over the same tests.
pub fn estimate_noise(
    faulty: &Program,
    repaired: &Program,
    line: Line,
    component: usize,
    tests: &[TestCase],
    cfg: &Config,
) -> Result<f64, NoiseError> {
    let run_cfg = cfg.run_config();
    for test in tests {
        if !run_test(repaired, test, &run_cfg)?.pass {
            return Err(NoiseError::RepairedStillFails { id: test.id.clone() });
        }
    }
    let target_of = |program: &Program| -> Result<NormalizedTarget, NoiseError> {
        let (func, stmt) = program.stmt_at(line).ok_or(NoiseError::NoSuchStatement { line })?;
        let mut targets =
            normalize(func, stmt).map_err(|_| NoiseError::NoSuchStatement { line })?;
        if component >= targets.len() {
            return Err(NoiseError::NoSuchComponent { line, component });
        }
        Ok(targets.swap_remove(component))
    };
    let faulty_target = target_of(faulty)?;
    let repaired_target = target_of(repaired)?;

    let mut verdicts = Vec::with_capacity(tests.len());
    for test in tests {
        verdicts.push(run_test(faulty, test, &run_cfg)?.pass);
    }
    let derived = st_trans(faulty, &faulty_target, tests, &verdicts, &run_cfg, &cfg.angelic)?;
    let transformer = match derived {
        DerivationOutcome::Derived(f) => f,
        DerivationOutcome::RetainStatement => {
            return Err(NoiseError::NoTransformer {
                line,
                reason: "statement judged retain-only".into(),
            })
        }
        DerivationOutcome::Discarded => {
            return Err(NoiseError::NoTransformer { line, reason: "search timed out".into() })
        }
    };
    if transformer.pairs.is_empty() {
        return Ok(0.0);
    }

    // Noise-free transformer: concrete observation on the repaired program.
    let mut noise_free: Vec<(ProgramState, ProgramState)> = Vec::new();
    for test in tests {
        match observe_states(repaired, &repaired_target, test, &run_cfg) {
            Ok(pairs) => noise_free.extend(pairs),
            Err(ObserveError::NotExecuted { .. }) => {}
            Err(ObserveError::Exec(e)) => return Err(e.into()),
        }
    }
    let noisy = transformer
        .pairs
        .iter()
        .filter(|p| {
            !noise_free
                .iter()
                .any(|(input, output)| *input == p.input && *output == p.output)
        })
        .count();
    Ok(100.0 * noisy as f64 / transformer.pairs.len() as f64)
}

/// One corpus task: a faulty program, its test suite, optionally the
/// repaired program and a golden describing the known repair.
#[derive(Debug, Clone, Deserialize)]
pub struct CorpusTask {
    pub id: String,
    pub faulty: PathBuf,
    #[serde(default)]
    pub repaired: Option<PathBuf>,
    pub tests: PathBuf,
    #[serde(default)]
    pub golden: Option<Golden>,
}

/// The known repair, for rank accounting: the first hint on `line` whose
/// kind matches and which mentions `text` (directly or as a constituent)
/// counts as the useful hint.
#[derive(Debug, Clone, Deserialize)]
pub struct Golden {
    pub line: Line,
    pub kind: String,
    pub text: String,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    tasks: Vec<CorpusTask>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed manifest {path}: {message}")]
    BadManifest { path: String, message: String },
}

/// Load a corpus manifest; task paths are resolved against the manifest's
/// directory.
pub fn load_manifest(path: &Path) -> Result<Vec<CorpusTask>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| CorpusError::BadManifest {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(manifest
        .tasks
        .into_iter()
        .map(|mut t| {
            t.faulty = base.join(&t.faulty);
            t.tests = base.join(&t.tests);
            t.repaired = t.repaired.map(|r| base.join(r));
            t
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct TaskResult {
    pub id: String,
    pub error: Option<String>,
    /// 1-based rank of the first hint matching the golden.
    pub matched_rank: Option<usize>,
    pub total_hints: usize,
    /// Statements whose only hint is "retain the statement".
    pub retain_only_statements: usize,
    /// Statement components discarded by search timeout.
    pub discarded: usize,
}

/// Run every corpus task and summarize. Task order is preserved; failures
/// are recorded per task and do not stop the run.
pub fn run_corpus(tasks: &[CorpusTask], cfg: &Config) -> Vec<TaskResult> {
    tasks.par_iter().map(|task| run_task(task, cfg)).collect()
}

fn run_task(task: &CorpusTask, cfg: &Config) -> TaskResult {
    let mut result = TaskResult {
        id: task.id.clone(),
        error: None,
        matched_rank: None,
        total_hints: 0,
        retain_only_statements: 0,
        discarded: 0,
    };
    let outcome = (|| -> Result<PipelineOutput, String> {
        let source =
            std::fs::read_to_string(&task.faulty).map_err(|e| format!("read faulty: {e}"))?;
        let program = crate::lang::parse_program(&source).map_err(|e| e.to_string())?;
        let tests_text =
            std::fs::read_to_string(&task.tests).map_err(|e| format!("read tests: {e}"))?;
        let tests = crate::exec::load_tests(&tests_text).map_err(|e| e.to_string())?;
        run_pipeline(&program, &tests, cfg, DumpFlags::default()).map_err(|e| e.to_string())
    })();
    let output = match outcome {
        Ok(o) => o,
        Err(message) => {
            result.error = Some(message);
            return result;
        }
    };
    result.total_hints = output.hints.len();
    result.retain_only_statements = count_retain_only(&output);
    result.discarded = output
        .targets
        .iter()
        .filter(|t| t.outcome == TargetOutcome::Discarded)
        .count();
    if let Some(golden) = &task.golden {
        result.matched_rank = golden_rank(&output.hints, golden);
    }
    result
}

/// Statements eliminated as false positives: every hint on the line is a
/// retain-the-statement hint.
pub fn count_retain_only(output: &PipelineOutput) -> usize {
    let mut by_line: BTreeMap<Line, (usize, usize)> = BTreeMap::new();
    for hint in &output.hints {
        let entry = by_line.entry(hint.line).or_insert((0, 0));
        entry.0 += 1;
        if hint.kind() == HintKind::RetainStatement {
            entry.1 += 1;
        }
    }
    by_line.values().filter(|(total, retains)| *total > 0 && total == retains).count()
}

pub fn golden_rank(hints: &[Hint], golden: &Golden) -> Option<usize> {
    let kind = match golden.kind.as_str() {
        "insert" => HintKind::Insert,
        "replace" => HintKind::Replace,
        "remove" => HintKind::Remove,
        "retain" => HintKind::Retain,
        "retain-statement" => HintKind::RetainStatement,
        _ => return None,
    };
    hints
        .iter()
        .position(|h| h.line == golden.line && h.mentions(kind, &golden.text))
        .map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn tc(id: &str, args: serde_json::Value, expect: serde_json::Value) -> TestCase {
        TestCase {
            id: id.into(),
            args: args.as_array().unwrap().clone(),
            expect: expect.as_array().unwrap().clone(),
        }
    }

    #[test]
    fn config_validation_rejects_bad_thresholds() {
        let cfg = Config { beta: 0.5, delta: 0.4, ..Config::default() };
        assert!(cfg.validate().is_err());
        let cfg = Config { gamma: 1.5, ..Config::default() };
        assert!(cfg.validate().is_err());
        assert!(Config::default().validate().is_ok());
    }

    #[test]
    fn all_passing_suite_is_rejected() {
        let p = parse_program("int f(int a) {\n    return a + 1;\n}\n").unwrap();
        let tests = vec![tc("t", serde_json::json!([1]), serde_json::json!([2]))];
        let err = run_pipeline(&p, &tests, &Config::default(), DumpFlags::default()).unwrap_err();
        assert!(matches!(err, PipelineError::Localize(LocalizeError::NoFailingTests)));
    }

    #[test]
    fn noise_of_identical_programs_is_zero() {
        let src = "int f(int a) {\n    a = a * 2;\n    return a;\n}\n";
        let p = parse_program(src).unwrap();
        let tests = vec![
            tc("t1", serde_json::json!([1]), serde_json::json!([2])),
            tc("t2", serde_json::json!([3]), serde_json::json!([6])),
            tc("t3", serde_json::json!([5]), serde_json::json!([10])),
        ];
        let noise = estimate_noise(&p, &p, 2, 0, &tests, &Config::default()).unwrap();
        assert_eq!(noise, 0.0);
    }

    #[test]
    fn ambiguous_witness_counts_as_noise() {
        // Repaired: b = a + a, output (a + a) squared. The angelic search
        // at the faulty assignment can satisfy the output with b = -2a as
        // well as b = 2a, and finds the negative value first; that pair
        // never occurs on the repaired program, so it is noise.
        let faulty =
            parse_program("int f(int a) {\n    int b;\n    b = a - a;\n    return b * b;\n}\n")
                .unwrap();
        let repaired =
            parse_program("int f(int a) {\n    int b;\n    b = a + a;\n    return b * b;\n}\n")
                .unwrap();
        let tests = vec![
            tc("p", serde_json::json!([0]), serde_json::json!([0])),
            tc("f", serde_json::json!([3]), serde_json::json!([36])),
        ];
        let noise = estimate_noise(&faulty, &repaired, 3, 0, &tests, &Config::default()).unwrap();
        assert_eq!(noise, 50.0);
    }

    #[test]
    fn repaired_must_pass_the_suite() {
        let p = parse_program("int f(int a) {\n    return a + 1;\n}\n").unwrap();
        let tests = vec![tc("t", serde_json::json!([1]), serde_json::json!([5]))];
        let err = estimate_noise(&p, &p, 2, 0, &tests, &Config::default()).unwrap_err();
        assert!(matches!(err, NoiseError::RepairedStillFails { .. }));
    }
}
