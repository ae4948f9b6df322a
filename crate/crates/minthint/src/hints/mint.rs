//! Simple and compound hint minting.
//!
//! Simple hints: iteratively pick the expression with the highest
//! likelihood, stop once it drops to the threshold, admit it only if its
//! partial likelihood against the already admitted set stays above the
//! subsumption threshold, and pattern-match each admitted expression
//! against the faulty RHS to decide retain / replace / insert. Remove
//! hints complete the picture for RHS subexpressions nothing vouched for.
//!
//! Compound hints: same selection loop driven by partial likelihood with
//! the admission check dropped, so each set collects expressions likely to
//! occur in the repaired RHS together. When several expressions tie at the
//! top, up to three sets are seeded by edit-distance partition (zero /
//! within the replace threshold / beyond). Constituents of one compound
//! never touch overlapping RHS occurrences; uncovered occurrences receive
//! remove constituents; a single-constituent compound collapses to that
//! constituent.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lang::ast::{Expr, Line};
use crate::lang::pretty_expr;
use crate::repairspace::{paths_overlap, Dataset, Occurrence, RepairSpace};
use crate::stats::{likelihood_from_ranks, p_likelihood_from_ranks};

use super::{min_edit, EditResult};

#[derive(Debug, Clone)]
pub struct HintConfig {
    /// Simple-hint likelihood threshold (loop exit).
    pub delta: f64,
    /// Partial-likelihood subsumption threshold for simple hints.
    pub beta: f64,
    /// Compound-set growth threshold.
    pub gamma: f64,
    /// Edit distance at or below which a match becomes a replace hint.
    pub edit_threshold: usize,
    /// Seed for the argmax tie-break draw.
    pub seed: u64,
}

impl Default for HintConfig {
    fn default() -> Self {
        HintConfig { delta: 0.4, beta: 0.1, gamma: 0.6, edit_threshold: 2, seed: 17 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum HintKind {
    Replace,
    Compound,
    Retain,
    RetainStatement,
    Insert,
    Remove,
}

impl HintKind {
    pub fn label(&self) -> &'static str {
        match self {
            HintKind::Replace => "replace",
            HintKind::Compound => "compound",
            HintKind::Retain => "retain",
            HintKind::RetainStatement => "retain-statement",
            HintKind::Insert => "insert",
            HintKind::Remove => "remove",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HintPayload {
    Insert { expr: Expr },
    Replace { replaced: Expr, replacement: Expr, occurrence: Option<usize> },
    Remove { expr: Expr },
    Retain { expr: Expr },
    RetainStatement,
    Compound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hint {
    pub line: Line,
    pub payload: HintPayload,
    pub score: f64,
    pub constituents: Vec<Hint>,
}

impl Hint {
    fn new(line: Line, payload: HintPayload, score: f64) -> Hint {
        Hint { line, payload, score, constituents: Vec::new() }
    }

    pub fn kind(&self) -> HintKind {
        match self.payload {
            HintPayload::Insert { .. } => HintKind::Insert,
            HintPayload::Replace { .. } => HintKind::Replace,
            HintPayload::Remove { .. } => HintKind::Remove,
            HintPayload::Retain { .. } => HintKind::Retain,
            HintPayload::RetainStatement => HintKind::RetainStatement,
            HintPayload::Compound => HintKind::Compound,
        }
    }

    pub fn text(&self) -> String {
        match &self.payload {
            HintPayload::Insert { expr } => format!("Insert {}", pretty_expr(expr)),
            HintPayload::Replace { replaced, replacement, occurrence } => {
                let occ = match occurrence {
                    Some(k) => format!(" (occurrence {k})"),
                    None => String::new(),
                };
                format!("Replace {}{} with {}", pretty_expr(replaced), occ, pretty_expr(replacement))
            }
            HintPayload::Remove { expr } => format!("Remove {}", pretty_expr(expr)),
            HintPayload::Retain { expr } => format!("Retain {}", pretty_expr(expr)),
            HintPayload::RetainStatement => "Retain the statement".to_string(),
            HintPayload::Compound => {
                let parts: Vec<String> = self.constituents.iter().map(|h| h.text()).collect();
                parts.join(" and ")
            }
        }
    }

    fn kind_priority(&self) -> u8 {
        match self.kind() {
            HintKind::Replace => 0,
            HintKind::Compound => 1,
            HintKind::Retain => 2,
            HintKind::RetainStatement => 3,
            HintKind::Insert => 4,
            HintKind::Remove => 5,
        }
    }

    /// Does this hint (or any constituent) mention the expression with the
    /// given kind? Used by report matching.
    pub fn mentions(&self, kind: HintKind, text: &str) -> bool {
        if self.kind() == kind {
            let own = match (&self.payload, kind) {
                (HintPayload::Insert { expr }, HintKind::Insert) => pretty_expr(expr) == text,
                (HintPayload::Replace { replacement, .. }, HintKind::Replace) => {
                    pretty_expr(replacement) == text
                }
                (HintPayload::Remove { expr }, HintKind::Remove) => pretty_expr(expr) == text,
                (HintPayload::Retain { expr }, HintKind::Retain) => pretty_expr(expr) == text,
                (HintPayload::RetainStatement, HintKind::RetainStatement) => true,
                _ => false,
            };
            if own {
                return true;
            }
        }
        self.constituents.iter().any(|c| c.mentions(kind, text))
    }
}

/// Likelihoods per dataset column: the absolute Spearman coefficient of
/// each expression column against the LHS column. Expressions dropped
/// from the dataset read as 0 (they faulted on an expected state).
pub struct LikelihoodTable<'a> {
    pub dataset: &'a Dataset,
    pub values: Vec<f64>,
}

impl<'a> LikelihoodTable<'a> {
    pub fn new(dataset: &'a Dataset) -> LikelihoodTable<'a> {
        let values = dataset
            .columns
            .iter()
            .map(|col| likelihood_from_ranks(&col.ranks, &dataset.x_ranks))
            .collect();
        LikelihoodTable { dataset, values }
    }

    pub fn of(&self, e: &Expr) -> f64 {
        match self.dataset.column_index(e) {
            Some(idx) => self.values[idx],
            None => 0.0,
        }
    }
}

/// Partial likelihood of column `idx` given admitted columns, mapping a
/// rank-degenerate controlling set to 0.
fn p_lik(dataset: &Dataset, idx: usize, admitted: &[usize]) -> f64 {
    let controls: Vec<&[f64]> =
        admitted.iter().map(|&i| dataset.columns[i].ranks.as_slice()).collect();
    p_likelihood_from_ranks(&dataset.columns[idx].ranks, &dataset.x_ranks, &controls).unwrap_or(0.0)
}

/// Pattern-match an admitted expression against the matched RHS
/// subexpression and mint the corresponding hint.
fn gen_hint(
    line: Line,
    e_prime: &Expr,
    matched: Option<&EditResult>,
    whole_rhs: &Expr,
    lik: &LikelihoodTable<'_>,
    cfg: &HintConfig,
    occurrence: Option<usize>,
) -> Hint {
    match matched {
        Some(EditResult { dist: 0, .. }) => {
            if e_prime == whole_rhs {
                Hint::new(line, HintPayload::RetainStatement, lik.of(e_prime))
            } else {
                Hint::new(line, HintPayload::Retain { expr: e_prime.clone() }, lik.of(e_prime))
            }
        }
        Some(EditResult { matched, dist }) if *dist <= cfg.edit_threshold => {
            let score = lik.of(e_prime).max(1.0 - lik.of(matched));
            Hint::new(
                line,
                HintPayload::Replace {
                    replaced: matched.clone(),
                    replacement: e_prime.clone(),
                    occurrence,
                },
                score,
            )
        }
        _ => Hint::new(line, HintPayload::Insert { expr: e_prime.clone() }, lik.of(e_prime)),
    }
}

/// Occurrence index (1-based) of `occ` among occurrences of the same
/// expression, when the expression occurs more than once in the RHS.
fn occurrence_ordinal(space: &RepairSpace, occ: &Occurrence) -> Option<usize> {
    let same: Vec<&Occurrence> =
        space.occurrences.iter().filter(|o| o.expr == occ.expr).collect();
    if same.len() <= 1 {
        return None;
    }
    same.iter().position(|o| o.path == occ.path).map(|i| i + 1)
}

/// MintSimpleHints: likelihood-ordered admission with partial-likelihood
/// subsumption, then remove-hint completion over the RHS subexpressions.
pub fn mint_simple_hints(
    line: Line,
    dataset: &Dataset,
    space: &RepairSpace,
    cfg: &HintConfig,
) -> Vec<Hint> {
    let lik = LikelihoodTable::new(dataset);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut alive: Vec<usize> = (0..dataset.columns.len()).collect();
    let mut admitted: Vec<usize> = Vec::new();
    let mut hints: Vec<Hint> = Vec::new();
    let s_exprs = space.s_exprs();

    while !alive.is_empty() {
        // Most likely expression; equal coefficients draw by seeded RNG.
        let top = alive
            .iter()
            .map(|&i| lik.values[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<usize> =
            alive.iter().copied().filter(|&i| lik.values[i] == top).collect();
        let pick = tied[rng.random_range(0..tied.len())];
        alive.retain(|&i| i != pick);
        if lik.values[pick] <= cfg.delta {
            break;
        }
        // Subsumption check: enough correlation left once the admitted
        // set is controlled for.
        let partial = if admitted.is_empty() {
            lik.values[pick]
        } else {
            p_lik(dataset, pick, &admitted)
        };
        if partial >= cfg.beta {
            admitted.push(pick);
            let e_prime = &dataset.columns[pick].expr;
            let edit = min_edit(e_prime, s_exprs);
            let occurrence = match first_occurrence(space, &edit.matched) {
                Some(occ) if edit.dist > 0 => occurrence_ordinal(space, occ),
                _ => None,
            };
            hints.push(gen_hint(line, e_prime, Some(&edit), &space.rhs, &lik, cfg, occurrence));
        }
    }

    // Remove-hints for RHS subexpressions nothing vouched for. A
    // retain-statement hint asserts the whole RHS and suppresses them.
    let retain_statement = hints.iter().any(|h| h.kind() == HintKind::RetainStatement);
    if !retain_statement {
        let covered: Vec<Expr> = hints
            .iter()
            .filter_map(|h| match &h.payload {
                HintPayload::Replace { replaced, .. } => Some(replaced.clone()),
                HintPayload::Retain { expr } => Some(expr.clone()),
                _ => None,
            })
            .collect();
        for e in s_exprs {
            if covered.contains(e) {
                continue;
            }
            // Only expressions with data earn a judgment.
            if dataset.column(e).is_none() {
                continue;
            }
            let hint =
                Hint::new(line, HintPayload::Remove { expr: e.clone() }, 1.0 - lik.of(e));
            if !hints.contains(&hint) {
                hints.push(hint);
            }
        }
    }
    hints
}

fn first_occurrence<'a>(space: &'a RepairSpace, e: &Expr) -> Option<&'a Occurrence> {
    space.occurrences.iter().find(|o| o.expr == *e)
}

/// MintCompoundHints: seeds one expression set per edit-distance partition
/// of the tied most-likely expressions, grows each by maximal partial
/// likelihood, and renders each set as one conflict-free compound hint.
pub fn mint_compound_hints(
    line: Line,
    dataset: &Dataset,
    space: &RepairSpace,
    cfg: &HintConfig,
) -> Vec<Hint> {
    if dataset.columns.is_empty() {
        return Vec::new();
    }
    let lik = LikelihoodTable::new(dataset);
    let top = lik.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top <= cfg.gamma {
        return Vec::new();
    }
    let tied: Vec<usize> =
        (0..dataset.columns.len()).filter(|&i| lik.values[i] == top).collect();
    let s_exprs = space.s_exprs();

    // Partition the tie set by minimal edit distance to the RHS
    // subexpressions: exact member / replace range / beyond.
    let mut partitions: [Option<usize>; 3] = [None, None, None];
    for &idx in &tied {
        let edit = min_edit(&dataset.columns[idx].expr, s_exprs);
        let slot = if edit.dist == 0 {
            0
        } else if edit.dist <= cfg.edit_threshold {
            1
        } else {
            2
        };
        // First member in repair-space order seeds the partition.
        if partitions[slot].is_none() {
            partitions[slot] = Some(idx);
        }
    }

    let mut out = Vec::new();
    for seed in partitions.into_iter().flatten() {
        if let Some(hint) = grow_compound(line, dataset, space, cfg, &lik, seed) {
            out.push(hint);
        }
    }
    out
}

/// Grow one compound set from a seed expression and render it.
fn grow_compound(
    line: Line,
    dataset: &Dataset,
    space: &RepairSpace,
    cfg: &HintConfig,
    lik: &LikelihoodTable<'_>,
    seed: usize,
) -> Option<Hint> {
    let mut live_occs: Vec<Occurrence> = space.occurrences.clone();
    let mut alive: Vec<usize> = (0..dataset.columns.len()).filter(|&i| i != seed).collect();
    let mut admitted: Vec<usize> = Vec::new();
    let mut constituents: Vec<Hint> = Vec::new();
    let mut covered_paths: Vec<Vec<usize>> = Vec::new();

    let admit = |idx: usize,
                     live_occs: &mut Vec<Occurrence>,
                     covered_paths: &mut Vec<Vec<usize>>,
                     constituents: &mut Vec<Hint>| {
        let e_prime = dataset.columns[idx].expr.clone();
        // Match against the still-live occurrences only, so constituents
        // never claim the same or overlapping subtrees.
        let live_exprs: Vec<Expr> = live_occs.iter().map(|o| o.expr.clone()).collect();
        let (edit, matched_occ) = if live_exprs.is_empty() {
            (None, None)
        } else {
            let edit = min_edit(&e_prime, &live_exprs);
            // Recover which live occurrence the match came from: the first
            // live occurrence carrying the matched expression.
            let occ = live_occs.iter().position(|o| o.expr == edit.matched);
            (Some(edit), occ)
        };
        let occurrence = matched_occ
            .filter(|_| edit.as_ref().map(|e| e.dist > 0).unwrap_or(false))
            .and_then(|i| occurrence_ordinal(space, &live_occs[i]));
        let hint = gen_hint(line, &e_prime, edit.as_ref(), &space.rhs, lik, cfg, occurrence);
        let claims_occurrence = matches!(
            hint.kind(),
            HintKind::Retain | HintKind::RetainStatement | HintKind::Replace
        );
        if claims_occurrence {
            if let Some(i) = matched_occ {
                let path = live_occs[i].path.clone();
                covered_paths.push(path.clone());
                live_occs.retain(|o| !paths_overlap(&o.path, &path));
            }
        }
        constituents.push(hint);
    };

    admit(seed, &mut live_occs, &mut covered_paths, &mut constituents);
    admitted.push(seed);

    loop {
        if alive.is_empty() {
            break;
        }
        let (best, best_val) = alive
            .iter()
            .map(|&i| (i, p_lik(dataset, i, &admitted)))
            .fold((usize::MAX, f64::NEG_INFINITY), |acc, cur| {
                if cur.1 > acc.1 {
                    (cur.0, cur.1)
                } else {
                    acc
                }
            });
        if best == usize::MAX || best_val <= cfg.gamma {
            break;
        }
        alive.retain(|&i| i != best);
        admit(best, &mut live_occs, &mut covered_paths, &mut constituents);
        admitted.push(best);
    }

    // Remove constituents for uncovered RHS occurrences: walk top-down,
    // stopping at covered subtrees, removing maximal untouched ones.
    let has_retain_statement =
        constituents.iter().any(|h| h.kind() == HintKind::RetainStatement);
    if !has_retain_statement {
        let removes = remove_completion(&space.rhs, &covered_paths, lik, line);
        for hint in removes {
            if !constituents.contains(&hint) {
                constituents.push(hint);
            }
        }
    }

    if constituents.is_empty() {
        return None;
    }
    if constituents.len() == 1 {
        return Some(constituents.into_iter().next().expect("length checked"));
    }
    let score = constituents.iter().map(|h| h.score).fold(f64::NEG_INFINITY, f64::max);
    Some(Hint { line, payload: HintPayload::Compound, score, constituents })
}

/// Remove hints for maximal RHS subtrees containing no covered occurrence.
fn remove_completion(
    rhs: &Expr,
    covered_paths: &[Vec<usize>],
    lik: &LikelihoodTable<'_>,
    line: Line,
) -> Vec<Hint> {
    let mut out = Vec::new();
    walk_completion(rhs, &mut Vec::new(), covered_paths, lik, line, &mut out);
    out
}

fn walk_completion(
    e: &Expr,
    path: &mut Vec<usize>,
    covered: &[Vec<usize>],
    lik: &LikelihoodTable<'_>,
    line: Line,
    out: &mut Vec<Hint>,
) {
    let is_covered = covered.iter().any(|c| c == path);
    if is_covered {
        return;
    }
    let any_covered_below =
        covered.iter().any(|c| c.len() > path.len() && c[..path.len()] == path[..]);
    if !any_covered_below {
        out.push(Hint::new(
            line,
            HintPayload::Remove { expr: e.clone() },
            1.0 - lik.of(e),
        ));
        return;
    }
    for (i, child) in e.children().into_iter().enumerate() {
        path.push(i);
        walk_completion(child, path, covered, lik, line, out);
        path.pop();
    }
}

/// Global ranking: score descending; ties by kind priority (replace,
/// compound, retain, retain-statement, insert, remove), then line, then
/// text. Exact duplicates collapse.
pub fn rank_hints(mut hints: Vec<Hint>) -> Vec<Hint> {
    hints.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.kind_priority().cmp(&b.kind_priority()))
            .then_with(|| a.line.cmp(&b.line))
            .then_with(|| a.text().cmp(&b.text()))
    });
    hints.dedup_by(|a, b| a.line == b.line && a.score == b.score && a.text() == b.text());
    hints
}
