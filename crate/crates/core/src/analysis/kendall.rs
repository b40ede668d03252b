use crate::error::{Error, Result};

/// Concordance counts behind τ-b.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    /// Concordant minus discordant pairs.
    pub score: i64,
    /// Pairs not tied in x.
    pub untied_x: u64,
    /// Pairs not tied in y.
    pub untied_y: u64,
}

fn ties(sorted: &[f64]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` ascending and returns the number of inversions removed.
fn merge_count(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf.push(v[j]);
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// O(n log n) pair counting (Knight's algorithm).
pub fn pair_counts(x: &[f64], y: &[f64]) -> Result<PairCounts> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Domain("Kendall tau needs at least 2 observations".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Domain("Kendall tau input contains NaN".into()));
    }
    // `+ 0.0` folds -0.0 into 0.0 so both compare as ties.
    let mut pairs: Vec<(f64, f64)> = x.iter().zip(y).map(|(&a, &b)| (a + 0.0, b + 0.0)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = pairs.len() as u64;
    let n0 = n * (n - 1) / 2;

    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let tied_x = ties(&xs);
    let mut tied_xy = 0u64;
    let mut run = 1u64;
    for w in pairs.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            tied_xy += run * (run - 1) / 2;
            run = 1;
        }
    }
    tied_xy += run * (run - 1) / 2;

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = Vec::with_capacity(ys.len());
    let discordant = merge_count(&mut ys, &mut buf);
    let tied_y = ties(&ys);

    let score = (n0 + tied_xy) as i64 - (tied_x + tied_y) as i64 - 2 * discordant as i64;
    Ok(PairCounts { score, untied_x: n0 - tied_x, untied_y: n0 - tied_y })
}

/// Kendall's τ-b: `(C - D) / sqrt((C + D + T_x)(C + D + T_y))`, with `T_x`
/// and `T_y` the pairs tied only in x or only in y.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    let c = pair_counts(x, y)?;
    if c.untied_x == 0 || c.untied_y == 0 {
        return Err(Error::UndefinedCorrelation(format!(
            "{} constant over {} observations",
            if c.untied_x == 0 { "x is" } else { "y is" },
            x.len()
        )));
    }
    let tau = c.score as f64 / (c.untied_x as f64 * c.untied_y as f64).sqrt();
    Ok(tau.clamp(-1.0, 1.0))
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(kendall_tau_b(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(kendall_tau_b(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        // Pairs of [1,1,2,3] vs [1,2,2,3]: C = 4, D = 0, one tie only in x,
        // one only in y -> 4 / sqrt(5 * 5).
        let t = kendall_tau_b(&[1.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 3.0]).unwrap();
        assert_eq!(t, 4.0 / 25f64.sqrt());
    }

    #[test]
    fn errors() {
        assert!(matches!(kendall_tau_b(&[1.0, 2.0], &[1.0]), Err(Error::Domain(_))));
        assert!(matches!(kendall_tau_b(&[1.0, 1.0], &[2.0, 2.0]), Err(Error::UndefinedCorrelation(_))));
        assert!(matches!(kendall_tau_b(&[1.0, 2.0], &[2.0, 2.0]), Err(Error::UndefinedCorrelation(_))));
        assert!(kendall_tau_b(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn signed_zero_is_a_tie() {
        let t = kendall_tau_b(&[0.0, -0.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t, kendall_tau_b(&[0.0, 0.0, 1.0], &[1.0, 2.0, 3.0]).unwrap());
    }
}
