//! Multi-indices over an ambient dimension and the combinatorics built on them.

use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use smallvec::SmallVec;

use super::rational::factorial;

/// Exponent tuple `(α_1, …, α_n)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex(pub SmallVec<[u8; 8]>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, n))
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut m = Self::zero(n);
        m.0[i] = 1;
        m
    }

    pub fn from_slice(v: &[u8]) -> Self {
        MultiIndex(SmallVec::from_slice(v))
    }

    /// Multi-index counting occurrences of each coordinate in `idx` (0-based coordinates).
    pub fn from_indices(n: usize, idx: &[usize]) -> Self {
        let mut m = Self::zero(n);
        for &i in idx {
            m.0[i] += 1;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn factorial(&self) -> BigInt {
        self.0.iter().map(|&e| factorial(e as u32)).product()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    /// Componentwise difference, `None` if some component would go negative.
    pub fn checked_sub(&self, o: &MultiIndex) -> Option<MultiIndex> {
        let mut out = self.clone();
        for (a, b) in out.0.iter_mut().zip(o.0.iter()) {
            *a = a.checked_sub(*b)?;
        }
        Some(out)
    }

    pub fn all_even(&self) -> bool {
        self.0.iter().all(|e| e % 2 == 0)
    }

    /// Coordinates repeated according to multiplicity, ascending.
    pub fn to_indices(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.order() as usize);
        for (i, &e) in self.0.iter().enumerate() {
            for _ in 0..e {
                v.push(i);
            }
        }
        v
    }

    /// All `β ≤ self` componentwise (including `0` and `self`).
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex(SmallVec::new())];
        for &e in self.0.iter() {
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for prefix in &out {
                for k in 0..=e {
                    let mut p = prefix.clone();
                    p.0.push(k);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;
    fn add(self, o: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), o.dim(), "multi-index dimension mismatch");
        MultiIndex(self.0.iter().zip(o.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

/// Every multi-index of length `n` with `|α| = d`, in descending lexicographic order
/// (so `(d,0,…)` comes first).
pub fn enumerate_multiindices(n: usize, d: u32) -> Vec<MultiIndex> {
    assert!(n >= 1, "dimension must be positive");
    let mut out = Vec::new();
    let mut cur = vec![0u8; n];
    fill(&mut out, &mut cur, 0, d);
    out
}

fn fill(out: &mut Vec<MultiIndex>, cur: &mut [u8], pos: usize, left: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = left as u8;
        out.push(MultiIndex::from_slice(cur));
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k as u8;
        fill(out, cur, pos + 1, left - k);
    }
}

/// All multi-indices with `lo ≤ |α| ≤ hi`.
pub fn enumerate_up_to(n: usize, lo: u32, hi: u32) -> Vec<MultiIndex> {
    (lo..=hi).flat_map(|d| enumerate_multiindices(n, d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stars_and_bars() {
        let v = enumerate_multiindices(2, 2);
        let got: Vec<Vec<u8>> = v.iter().map(|m| m.0.to_vec()).collect();
        assert_eq!(got, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(enumerate_multiindices(4, 3).len(), 20);
        assert_eq!(enumerate_multiindices(5, 0), vec![MultiIndex::zero(5)]);
    }

    #[test]
    fn factorial_and_order() {
        let m = MultiIndex::from_slice(&[3, 0, 2]);
        assert_eq!(m.order(), 5);
        assert_eq!(m.factorial(), BigInt::from(12));
        assert_eq!(m.to_indices(), vec![0, 0, 0, 2, 2]);
        assert_eq!(m.sub_indices().len(), 12);
    }

    #[test]
    fn addition_commutes() {
        let a = MultiIndex::from_slice(&[1, 0, 2]);
        let b = MultiIndex::from_slice(&[0, 4, 1]);
        assert_eq!(&a + &b, &b + &a);
        assert_eq!((&a + &b).checked_sub(&b), Some(a.clone()));
        assert_eq!(a.checked_sub(&b), None);
    }
}
