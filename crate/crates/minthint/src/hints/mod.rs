//! Hint synthesis: pattern matching of likely expressions against the
//! faulty RHS, simple and compound hint minting, scoring, and ranking.

mod mint;
mod ted;

pub use mint::{
    mint_compound_hints, mint_simple_hints, rank_hints, Hint, HintConfig, HintKind, HintPayload,
    LikelihoodTable,
};
pub use ted::tree_edit_distance;

use crate::lang::ast::Expr;
use crate::lang::expr_size;
use crate::lang::pretty_expr;

/// The repair-space member closest to an expression under tree edit
/// distance.
#[derive(Debug, Clone, PartialEq)]
pub struct EditResult {
    pub matched: Expr,
    pub dist: usize,
}

/// Minimize edit distance to `e` over the candidate set; ties break by
/// smaller expression size, then pretty-printed text.
pub fn min_edit(e: &Expr, candidates: &[Expr]) -> EditResult {
    assert!(!candidates.is_empty(), "min_edit requires a nonempty candidate set");
    let mut best: Option<(usize, usize, String, &Expr)> = None;
    for cand in candidates {
        let dist = tree_edit_distance(e, cand);
        let size = expr_size(cand);
        let text = pretty_expr(cand);
        let key = (dist, size, text);
        match &best {
            Some((bd, bs, bt, _)) if (*bd, *bs, bt.as_str()) <= (key.0, key.1, key.2.as_str()) => {}
            _ => best = Some((key.0, key.1, key.2, cand)),
        }
    }
    let (dist, _, _, matched) = best.expect("candidate set is nonempty");
    EditResult { matched: matched.clone(), dist }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_expr, subexps};

    fn e(src: &str) -> Expr {
        parse_expr(src).unwrap()
    }

    #[test]
    fn min_edit_picks_closest_subexpression() {
        let s = subexps(&e("s[i] == '\\0'"));
        let got = min_edit(&e("s[i + 1] == '\\0'"), &s);
        assert_eq!(got.matched, e("s[i] == '\\0'"));
        assert_eq!(got.dist, 2);
    }

    #[test]
    fn member_of_set_has_distance_zero() {
        let s = subexps(&e("s[i] == '\\0'"));
        let got = min_edit(&e("s[i]"), &s);
        assert_eq!(got.dist, 0);
        assert_eq!(got.matched, e("s[i]"));
    }

    #[test]
    fn singleton_set_relabel() {
        let got = min_edit(&e("z"), &[e("10")]);
        assert_eq!(got.dist, 1);
        assert_eq!(got.matched, e("10"));
    }

    #[test]
    fn ties_prefer_smaller_then_text() {
        // `!y` and `x` are both at distance 1 from `!x`; the smaller
        // candidate wins.
        let got = min_edit(&e("!x"), &[e("!y"), e("x")]);
        assert_eq!(got.matched, e("x"));
        // Equal distance and size: pretty-print order decides.
        let got = min_edit(&e("b"), &[e("c"), e("a")]);
        assert_eq!(got.matched, e("a"));
    }
}
