//! Report rendering: the human-readable hint table, JSON-lines output for
//! machine consumption, and the debug dumps (transformer JSON, dataset
//! CSV, likelihood tables).

use std::fmt::Write as _;

use serde_json::json;

use crate::exec::FaultKind;
use crate::hints::Hint;
use crate::lang::ast::Value;
use crate::pipeline::{PipelineOutput, TaskResult};
use crate::transformer::{Provenance, StateTransformer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
}

pub fn value_to_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Bool(b) => json!(b),
        Value::Int(n) => json!(n),
        Value::Char(c) => json!((*c as char).to_string()),
        Value::IntArray(items) => json!(items),
        Value::CharArray(items) => {
            json!(items.iter().map(|c| *c as char).collect::<String>())
        }
    }
}

pub fn fault_token(f: FaultKind) -> &'static str {
    f.token()
}

pub fn hint_to_json(hint: &Hint) -> serde_json::Value {
    json!({
        "line": hint.line,
        "kind": hint.kind().label(),
        "text": hint.text(),
        "score": hint.score,
        "constituents": hint.constituents.iter().map(hint_to_json).collect::<Vec<_>>(),
    })
}

/// One JSON object per hint, rank first.
pub fn hints_jsonl(hints: &[Hint]) -> String {
    let mut out = String::new();
    for (i, hint) in hints.iter().enumerate() {
        let mut obj = hint_to_json(hint);
        if let Some(map) = obj.as_object_mut() {
            map.insert("rank".to_string(), json!(i + 1));
        }
        out.push_str(&obj.to_string());
        out.push('\n');
    }
    out
}

pub fn analyze_table(output: &PipelineOutput) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} passing, {} failing; {} statements localized",
        output.passing_tests,
        output.failing_tests,
        output.localization.entries.len()
    );
    let _ = writeln!(out, "{:>4}  {:>4}  {:>6}  hint", "rank", "line", "score");
    for (i, hint) in output.hints.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>4}  {:>4}  {:>6.3}  {}",
            i + 1,
            hint.line,
            hint.score,
            hint.text()
        );
    }
    if output.hints.is_empty() {
        let _ = writeln!(out, "(no hints)");
    }
    let mut noted = false;
    for t in &output.targets {
        use crate::pipeline::TargetOutcome;
        if !matches!(t.outcome, TargetOutcome::Analyzed { .. } | TargetOutcome::RetainOnly) {
            if !noted {
                let _ = writeln!(out, "statement notes:");
                noted = true;
            }
            let _ = writeln!(
                out,
                "  line {} [{}]: {}",
                t.line,
                t.component.label(),
                t.outcome.label()
            );
        }
    }
    out
}

pub fn transformer_json(
    line: u32,
    component: &str,
    transformer: &StateTransformer,
) -> serde_json::Value {
    json!({
        "line": line,
        "component": component,
        "pairs": transformer.pairs.iter().map(|p| {
            json!({
                "test": p.test_id,
                "provenance": match p.provenance {
                    Provenance::FromPassing => "passing",
                    Provenance::FromFailingAngelic => "failing-angelic",
                },
                "input": p.input.iter()
                    .map(|(k, v)| (k.clone(), value_to_json(v)))
                    .collect::<serde_json::Map<String, serde_json::Value>>(),
                "output": p.output.iter()
                    .map(|(k, v)| (k.clone(), value_to_json(v)))
                    .collect::<serde_json::Map<String, serde_json::Value>>(),
            })
        }).collect::<Vec<_>>(),
    })
}

/// Debug dumps for the analyzed targets, as requested by flags.
pub fn dumps_text(output: &PipelineOutput) -> String {
    let mut out = String::new();
    for t in &output.targets {
        if let Some(transformer) = &t.transformer {
            let _ = writeln!(
                out,
                "# transformer line {} [{}]",
                t.line,
                t.component.label()
            );
            let _ = writeln!(
                out,
                "{}",
                transformer_json(t.line, t.component.label(), transformer)
            );
        }
        if let Some(rows) = &t.likelihoods {
            let _ = writeln!(out, "# likelihoods line {} [{}]", t.line, t.component.label());
            for (i, (expr, lik)) in rows.iter().enumerate() {
                let _ = writeln!(out, "{:>5}  {:>7.4}  {}", i + 1, lik, expr);
            }
        }
        if let Some(csv) = &t.dataset_csv {
            let _ = writeln!(out, "# dataset line {} [{}]", t.line, t.component.label());
            out.push_str(csv);
        }
    }
    out
}

/// Corpus report, one row per task. Matching is strict: the rank column
/// reports the first hint that names the known repair exactly, which is a
/// lower bound on how early a human would find a useful hint.
pub fn corpus_table(results: &[TaskResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# rank = first hint matching the known repair exactly (strict)"
    );
    let _ = writeln!(
        out,
        "{:<16} {:>10} {:>12} {:>12} {:>10}  status",
        "task", "rank", "total hints", "eliminated", "discarded"
    );
    for r in results {
        let rank = r.matched_rank.map(|n| n.to_string()).unwrap_or_else(|| "-".to_string());
        let status = r.error.clone().unwrap_or_else(|| "ok".to_string());
        let _ = writeln!(
            out,
            "{:<16} {:>10} {:>12} {:>12} {:>10}  {}",
            r.id, rank, r.total_hints, r.retain_only_statements, r.discarded, status
        );
    }
    out
}

pub fn corpus_jsonl(results: &[TaskResult]) -> String {
    let mut out = String::new();
    for r in results {
        let obj = json!({
            "task": r.id,
            "status": if r.error.is_some() { "error" } else { "ok" },
            "error": r.error,
            "matched_rank": r.matched_rank,
            "total_hints": r.total_hints,
            "retain_only_statements": r.retain_only_statements,
            "discarded": r.discarded,
        });
        out.push_str(&obj.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hints::HintPayload;
    use crate::lang::parse_expr;

    #[test]
    fn hint_json_shape() {
        let hint = Hint {
            line: 7,
            payload: HintPayload::Insert { expr: parse_expr("a + 1").unwrap() },
            score: 0.62,
            constituents: vec![],
        };
        let v = hint_to_json(&hint);
        assert_eq!(v["line"], 7);
        assert_eq!(v["kind"], "insert");
        assert_eq!(v["text"], "Insert a + 1");
        assert_eq!(v["score"], 0.62);
    }

    #[test]
    fn jsonl_is_one_object_per_line() {
        let hints = vec![
            Hint {
                line: 2,
                payload: HintPayload::RetainStatement,
                score: 1.0,
                constituents: vec![],
            };
            3
        ];
        let text = hints_jsonl(&hints);
        assert_eq!(text.lines().count(), 3);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["kind"], "retain-statement");
        }
    }

    #[test]
    fn value_json_round_trip_shapes() {
        assert_eq!(value_to_json(&Value::Int(-3)), json!(-3));
        assert_eq!(value_to_json(&Value::Bool(true)), json!(true));
        assert_eq!(value_to_json(&Value::Char(b'@')), json!("@"));
        assert_eq!(value_to_json(&Value::IntArray(vec![1, 2])), json!([1, 2]));
    }
}
