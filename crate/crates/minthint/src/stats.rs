//! Statistical engine: fractional ranking, Spearman coefficient, Spearman
//! partial correlation against a controlling set, and the derived
//! likelihood measures.
//!
//! All coefficients are computed on tie-averaged rank vectors. Degenerate
//! (constant) columns get coefficient 0 so ranking stays total. Partial
//! correlation goes through the precision matrix of the rank-correlation
//! matrix, with a small ridge on the diagonal; controlling sets that are
//! rank-degenerate relative to the pair surface as `SingularControl`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("controlling set is rank-degenerate for this pair")]
    SingularControl,
}

const RIDGE: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-9;

/// Fractional (average) ranks of a totally ordered sample, 1-based.
/// Equal values share the mean of the rank positions they occupy.
pub fn rank_ord<T: Ord>(xs: &[T]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].cmp(&xs[b]));
    ranks_from_order(&order, |a, b| xs[a] == xs[b])
}

/// Fractional ranks of an f64 sample (total order; inputs must be finite).
pub fn rank_f64(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    ranks_from_order(&order, |a, b| xs[a] == xs[b])
}

fn ranks_from_order(order: &[usize], eq: impl Fn(usize, usize) -> bool) -> Vec<f64> {
    let mut ranks = vec![0.0; order.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && eq(order[j + 1], order[i]) {
            j += 1;
        }
        // Positions i..=j (0-based) share the average 1-based rank.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; 0 when either side has no variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a <= 0.0 || var_b <= 0.0 {
        return 0.0;
    }
    cov / (var_a * var_b).sqrt()
}

fn check_pair(a_len: usize, b_len: usize) -> Result<(), StatsError> {
    if a_len != b_len {
        return Err(StatsError::LengthMismatch(a_len, b_len));
    }
    if a_len < 3 {
        return Err(StatsError::TooFewSamples(a_len));
    }
    Ok(())
}

/// Spearman coefficient: Pearson correlation of the tie-averaged rank
/// vectors. Returns 0 if either rank vector is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    check_pair(a.len(), b.len())?;
    Ok(pearson(&rank_f64(a), &rank_f64(b)))
}

/// Spearman over precomputed rank vectors.
pub fn spearman_from_ranks(ra: &[f64], rb: &[f64]) -> f64 {
    pearson(ra, rb)
}

/// Spearman partial correlation of `a` and `b` given the controlling
/// columns, all as raw values.
pub fn spearman_partial(a: &[f64], b: &[f64], controls: &[Vec<f64>]) -> Result<f64, StatsError> {
    check_pair(a.len(), b.len())?;
    for c in controls {
        if c.len() != a.len() {
            return Err(StatsError::LengthMismatch(a.len(), c.len()));
        }
    }
    let ra = rank_f64(a);
    let rb = rank_f64(b);
    let rc: Vec<Vec<f64>> = controls.iter().map(|c| rank_f64(c)).collect();
    let refs: Vec<&[f64]> = rc.iter().map(|c| c.as_slice()).collect();
    partial_from_ranks(&ra, &rb, &refs)
}

/// Partial correlation over precomputed rank vectors, via the precision
/// matrix of the (2 + m) x (2 + m) rank-correlation matrix.
pub fn partial_from_ranks(
    ra: &[f64],
    rb: &[f64],
    controls: &[&[f64]],
) -> Result<f64, StatsError> {
    if controls.is_empty() {
        return Ok(pearson(ra, rb));
    }
    let mut cols: Vec<&[f64]> = Vec::with_capacity(controls.len() + 2);
    cols.push(ra);
    cols.push(rb);
    cols.extend_from_slice(controls);
    let dim = cols.len();
    let mut corr = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        corr[i][i] = 1.0 + RIDGE;
        for j in i + 1..dim {
            let r = pearson(cols[i], cols[j]);
            corr[i][j] = r;
            corr[j][i] = r;
        }
    }
    let precision = invert_spd(&corr).ok_or(StatsError::SingularControl)?;
    let denom = (precision[0][0] * precision[1][1]).sqrt();
    if !denom.is_finite() || denom == 0.0 {
        return Err(StatsError::SingularControl);
    }
    let partial = -precision[0][1] / denom;
    // Numerical noise can push the value a hair outside [-1, 1].
    Ok(partial.clamp(-1.0, 1.0))
}

/// Invert a symmetric positive-definite matrix by Cholesky decomposition.
/// Returns None when a pivot collapses, i.e. the matrix is singular beyond
/// what the ridge can absorb.
fn invert_spd(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum < PIVOT_TOL {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    // Invert L by forward substitution, then P = L^-T L^-1.
    let mut linv = vec![vec![0.0; n]; n];
    for i in 0..n {
        linv[i][i] = 1.0 / l[i][i];
        for j in 0..i {
            let mut sum = 0.0;
            for k in j..i {
                sum -= l[i][k] * linv[k][j];
            }
            linv[i][j] = sum / l[i][i];
        }
    }
    let mut inv = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = 0.0;
            for k in i.max(j)..n {
                sum += linv[k][i] * linv[k][j];
            }
            inv[i][j] = sum;
            inv[j][i] = sum;
        }
    }
    Some(inv)
}

/// Likelihood of an expression column against the LHS column: the
/// absolute Spearman coefficient.
pub fn likelihood_from_ranks(re: &[f64], rx: &[f64]) -> f64 {
    spearman_from_ranks(re, rx).abs()
}

/// Partial likelihood: absolute Spearman partial correlation of the
/// expression and LHS columns given the controlling set.
pub fn p_likelihood_from_ranks(
    re: &[f64],
    rx: &[f64],
    controls: &[&[f64]],
) -> Result<f64, StatsError> {
    Ok(partial_from_ranks(re, rx, controls)?.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(rank_f64(&[10.0, 20.0, 20.0, 30.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(rank_ord(&[5, 5, 5]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn self_correlation_is_one() {
        let v = [1.0, 3.0, 2.0, 5.0, 4.0];
        assert!((spearman(&v, &v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negation_gives_minus_one() {
        let v = [1.0, 3.0, 2.0, 5.0, 4.0];
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((spearman(&v, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_column_is_zero() {
        let v = [1.0, 2.0, 3.0, 4.0];
        let c = [7.0, 7.0, 7.0, 7.0];
        assert_eq!(spearman(&v, &c).unwrap(), 0.0);
    }

    #[test]
    fn length_and_sample_errors() {
        assert_eq!(
            spearman(&[1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            StatsError::LengthMismatch(2, 3)
        );
        assert_eq!(
            spearman(&[1.0, 2.0], &[1.0, 2.0]).unwrap_err(),
            StatsError::TooFewSamples(2)
        );
    }

    #[test]
    fn empty_controlling_set_equals_spearman() {
        let a = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let b = [2.0, 7.0, 1.0, 8.0, 2.0, 8.0];
        let plain = spearman(&a, &b).unwrap();
        let partial = spearman_partial(&a, &b, &[]).unwrap();
        assert!((plain - partial).abs() < 1e-12);
    }

    #[test]
    fn controlling_for_the_variable_itself_is_singular() {
        let a = vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let b = vec![2.0, 7.0, 1.0, 8.0, 2.0, 8.0];
        let err = spearman_partial(&a, &b, &[a.clone()]).unwrap_err();
        assert_eq!(err, StatsError::SingularControl);
    }

    #[test]
    fn partial_with_one_control_matches_closed_form() {
        let a = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let b = [2.0, 7.0, 1.0, 8.0, 2.0, 8.0, 3.0, 4.0];
        let c = vec![1.0, 2.0, 2.0, 4.0, 5.0, 5.0, 7.0, 8.0];
        let got = spearman_partial(&a, &b, &[c.clone()]).unwrap();
        let r_ab = spearman(&a, &b).unwrap();
        let r_ac = spearman(&a, &c).unwrap();
        let r_bc = spearman(&b, &c).unwrap();
        let want = (r_ab - r_ac * r_bc) / ((1.0 - r_ac * r_ac) * (1.0 - r_bc * r_bc)).sqrt();
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    /// Cross-product dataset for y = i + j*k - 10 over i in [1,2],
    /// j in [1,5], k in [1,25]; the reference coefficients are frozen
    /// from an independent rank/Pearson oracle.
    #[test]
    fn cross_product_polynomial_coefficients() {
        let mut y = Vec::new();
        let mut jk = Vec::new();
        let mut iv = Vec::new();
        for i in 1..=2i64 {
            for j in 1..=5i64 {
                for k in 1..=25i64 {
                    y.push((i + j * k - 10) as f64);
                    jk.push((j * k) as f64);
                    iv.push(i as f64);
                }
            }
        }
        assert_eq!(y.len(), 250);
        let r_jk = spearman(&jk, &y).unwrap();
        let r_i = spearman(&iv, &y).unwrap();
        let partial = spearman_partial(&y, &iv, &[jk.clone()]).unwrap();
        assert!((r_jk - 0.9997).abs() < 5e-4, "spearman(j*k, y) = {r_jk}");
        assert!((r_i - 0.0230).abs() < 5e-4, "spearman(i, y) = {r_i}");
        assert!((partial - 0.9116).abs() < 5e-4, "partial(y, i | jk) = {partial}");
    }

    #[test]
    fn likelihood_of_constant_is_zero() {
        let rx = rank_f64(&[1.0, 2.0, 3.0, 4.0]);
        let rc = rank_f64(&[5.0, 5.0, 5.0, 5.0]);
        assert_eq!(likelihood_from_ranks(&rc, &rx), 0.0);
    }

    #[test]
    fn fully_controlled_likelihood_is_zero() {
        let e = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let x = vec![1.0, 3.0, 2.0, 5.0, 4.0];
        let re = rank_f64(&e);
        let rx = rank_f64(&x);
        // Controlling for the expression itself: singular, reported as such.
        let err = p_likelihood_from_ranks(&re, &rx, &[&re]).unwrap_err();
        assert_eq!(err, StatsError::SingularControl);
    }
}
