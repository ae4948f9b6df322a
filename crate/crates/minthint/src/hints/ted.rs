//! Ordered tree edit distance (Zhang–Shasha) over expression trees.
//!
//! Unit costs: one per node insertion, deletion, or relabel. Node labels
//! are the operator / variable name / constant value / indexed array name;
//! an array read is a node labeled by the array whose only child is the
//! index expression.

use crate::lang::ast::{Expr, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Label {
    Const(Value),
    Var(String),
    Index(String),
    Unary(crate::lang::ast::UnOp),
    Binary(crate::lang::ast::BinOp),
}

fn label_of(e: &Expr) -> Label {
    match e {
        Expr::Const(v) => Label::Const(v.clone()),
        Expr::Var(name) => Label::Var(name.clone()),
        Expr::Index { array, .. } => Label::Index(array.clone()),
        Expr::Unary { op, .. } => Label::Unary(*op),
        Expr::Binary { op, .. } => Label::Binary(*op),
    }
}

/// Postorder nodes with leftmost-leaf-descendant indices (1-based).
struct Flat {
    labels: Vec<Label>,
    lld: Vec<usize>,
    keyroots: Vec<usize>,
}

fn flatten(root: &Expr) -> Flat {
    let mut labels = Vec::new();
    let mut lld = vec![0usize];
    fn walk(e: &Expr, labels: &mut Vec<Label>, lld: &mut Vec<usize>) -> usize {
        let mut leftmost = 0;
        for (i, child) in e.children().into_iter().enumerate() {
            let child_lld = walk(child, labels, lld);
            if i == 0 {
                leftmost = child_lld;
            }
        }
        labels.push(label_of(e));
        let own = labels.len();
        let own_lld = if leftmost == 0 { own } else { leftmost };
        lld.push(own_lld);
        own_lld
    }
    walk(root, &mut labels, &mut lld);
    // Keyroots: for each distinct lld value, the highest node carrying it.
    let n = labels.len();
    let mut keyroots = Vec::new();
    for i in 1..=n {
        if !(i + 1..=n).any(|j| lld[j] == lld[i]) {
            keyroots.push(i);
        }
    }
    Flat { labels, lld, keyroots }
}

/// Minimal number of node insertions, deletions, and relabels turning
/// `a` into `b`.
pub fn tree_edit_distance(a: &Expr, b: &Expr) -> usize {
    let t1 = flatten(a);
    let t2 = flatten(b);
    let n1 = t1.labels.len();
    let n2 = t2.labels.len();
    let mut treedist = vec![vec![0usize; n2 + 1]; n1 + 1];
    let mut forest = vec![vec![0usize; n2 + 1]; n1 + 1];

    for &kr1 in &t1.keyroots {
        for &kr2 in &t2.keyroots {
            let l1 = t1.lld[kr1];
            let l2 = t2.lld[kr2];
            forest[l1 - 1][l2 - 1] = 0;
            for di in l1..=kr1 {
                forest[di][l2 - 1] = forest[di - 1][l2 - 1] + 1;
            }
            for dj in l2..=kr2 {
                forest[l1 - 1][dj] = forest[l1 - 1][dj - 1] + 1;
            }
            for di in l1..=kr1 {
                for dj in l2..=kr2 {
                    let del = forest[di - 1][dj] + 1;
                    let ins = forest[di][dj - 1] + 1;
                    if t1.lld[di] == l1 && t2.lld[dj] == l2 {
                        let relabel = if t1.labels[di - 1] == t2.labels[dj - 1] { 0 } else { 1 };
                        let sub = forest[di - 1][dj - 1] + relabel;
                        let best = del.min(ins).min(sub);
                        treedist[di][dj] = best;
                        forest[di][dj] = best;
                    } else {
                        let split = forest[t1.lld[di] - 1][t2.lld[dj] - 1] + treedist[di][dj];
                        forest[di][dj] = del.min(ins).min(split);
                    }
                }
            }
        }
    }
    treedist[n1][n2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_expr;

    fn d(a: &str, b: &str) -> usize {
        tree_edit_distance(&parse_expr(a).unwrap(), &parse_expr(b).unwrap())
    }

    #[test]
    fn identity_is_zero() {
        assert_eq!(d("s[i] == '\\0'", "s[i] == '\\0'"), 0);
        assert_eq!(d("a + b * c", "a + b * c"), 0);
    }

    #[test]
    fn single_relabel() {
        assert_eq!(d("z", "10"), 1);
        assert_eq!(d("a + b", "a - b"), 1);
        assert_eq!(d("s[1] == c", "s[i] == c"), 1);
    }

    #[test]
    fn index_growth_costs_two() {
        // i -> i + 1 inside the array read: insert `+` and `1`.
        assert_eq!(d("s[i] == '\\0'", "s[i + 1] == '\\0'"), 2);
    }

    #[test]
    fn operator_and_index_changes_add_up() {
        assert_eq!(d("s[i] == '\\0'", "s[i + 1] <= '\\0'"), 3);
    }

    #[test]
    fn leaf_against_tree() {
        // result -> s[i + 1]: relabel to the read node plus three index
        // nodes inserted... the read counts its own subtree.
        assert_eq!(d("result", "s[i + 1]"), 4);
    }

    #[test]
    fn distance_is_symmetric_here() {
        for (a, b) in [
            ("a + b", "b - a"),
            ("s[i] == c", "s[i + 1] != c"),
            ("x * y + 1", "x"),
        ] {
            assert_eq!(d(a, b), d(b, a), "{a} vs {b}");
        }
    }
}
