//! Exact linear solves over the rationals.

use num_traits::{One, Zero};

use super::rational::Q;

/// Solve `A x = b` exactly. Returns `None` when the system is inconsistent; free
/// variables (rank deficiency) are set to zero.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut row = r.clone();
            row.push(v.clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..=cols {
                    let t = &m[r][j] * &f;
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Some(x)
}

/// Rank of a rational matrix.
pub fn rank(a: &[Vec<Q>]) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m = a.to_vec();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in (r + 1)..rows {
            if !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                for j in c..cols {
                    let t = &m[r][j] * &f;
                    m[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};

    #[test]
    fn small_system() {
        let a = vec![vec![qi(1), qi(2)], vec![qi(3), qi(4)], vec![qi(1), qi(1)]];
        let b = vec![qi(5), qi(11), qi(3)];
        assert_eq!(solve(&a, &b), Some(vec![qi(1), qi(2)]));
        let bad = vec![qi(5), qi(11), qi(4)];
        assert_eq!(solve(&a, &bad), None);
        assert_eq!(rank(&a), 2);
        assert_eq!(rank(&[vec![q(1, 2), qi(1)], vec![qi(1), qi(2)]]), 1);
    }
}
