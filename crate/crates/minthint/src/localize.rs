//! Spectra-based fault localization: Ochiai suspiciousness over
//! per-statement execution counts, top-k ranked.

use serde::Serialize;
use thiserror::Error;

use crate::exec::{Spectra, SpectraRow};
use crate::lang::ast::Line;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LocalizeError {
    #[error("fault localization requires at least one failing test")]
    NoFailingTests,
}

/// Ranked list of suspicious statements, scores in [0, 1], non-increasing.
/// Only statements executed by at least one failing test appear.
#[derive(Debug, Clone, Serialize)]
pub struct SuspiciousList {
    pub entries: Vec<SuspiciousStmt>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuspiciousStmt {
    pub line: Line,
    pub score: f64,
}

/// Ochiai: ef / sqrt((ef + nf) * (ef + ep)).
pub fn ochiai(row: &SpectraRow) -> f64 {
    let ef = f64::from(row.ef);
    let denom = ((ef + f64::from(row.nf)) * (ef + f64::from(row.ep))).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        ef / denom
    }
}

/// Top-k statements by Ochiai score; ties broken by ascending line number.
pub fn localize_faults(spectra: &Spectra, k: usize) -> Result<SuspiciousList, LocalizeError> {
    if spectra.failing == 0 {
        return Err(LocalizeError::NoFailingTests);
    }
    let mut entries: Vec<SuspiciousStmt> = spectra
        .rows
        .iter()
        .filter(|(_, row)| row.ef > 0)
        .map(|(line, row)| SuspiciousStmt { line: *line, score: ochiai(row) })
        .collect();
    entries.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("Ochiai scores are finite")
            .then(a.line.cmp(&b.line))
    });
    entries.truncate(k);
    Ok(SuspiciousList { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn spectra(rows: Vec<(Line, SpectraRow)>, passing: u32, failing: u32) -> Spectra {
        Spectra { rows: rows.into_iter().collect::<BTreeMap<_, _>>(), passing, failing }
    }

    fn row(ep: u32, ef: u32, np: u32, nf: u32) -> SpectraRow {
        SpectraRow { ep, ef, np, nf }
    }

    #[test]
    fn executed_only_by_failing_tests_scores_one() {
        let s = spectra(vec![(1, row(0, 4, 10, 0))], 10, 4);
        let list = localize_faults(&s, 5).unwrap();
        assert_eq!(list.entries.len(), 1);
        assert!((list.entries[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn never_failing_statements_are_excluded() {
        let s = spectra(vec![(1, row(3, 0, 0, 2)), (2, row(1, 2, 2, 0))], 3, 2);
        let list = localize_faults(&s, 5).unwrap();
        assert_eq!(list.entries.len(), 1);
        assert_eq!(list.entries[0].line, 2);
    }

    #[test]
    fn hand_evaluated_ochiai_value() {
        // (ep, ef, nf) = (3, 1, 1): 1 / sqrt(2 * 4) ~ 0.354.
        let s = spectra(vec![(7, row(3, 1, 0, 1))], 3, 2);
        let list = localize_faults(&s, 1).unwrap();
        assert!((list.entries[0].score - 1.0 / 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn no_failing_tests_is_an_error() {
        let s = spectra(vec![(1, row(2, 0, 0, 0))], 2, 0);
        assert_eq!(localize_faults(&s, 5).unwrap_err(), LocalizeError::NoFailingTests);
    }

    #[test]
    fn ties_break_by_line_and_k_truncates() {
        let s = spectra(
            vec![(9, row(0, 2, 1, 0)), (3, row(0, 2, 1, 0)), (5, row(1, 1, 0, 1))],
            1,
            2,
        );
        let list = localize_faults(&s, 2).unwrap();
        let lines: Vec<Line> = list.entries.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![3, 9]);
    }

    #[test]
    fn score_monotone_in_ef() {
        // Increasing ef (holding ep, nf+ef totals move together) never
        // lowers the score.
        let mut last = 0.0;
        for ef in 0..6u32 {
            let score = ochiai(&row(2, ef, 0, 6 - ef));
            assert!(score >= last - 1e-12);
            last = score;
        }
    }
}
