//! Exterior algebra on `Λ^m` of an `n`-dimensional space: exterior and interior
//! multiplication by a covector, and matrix operators on the form basis.
//!
//! Basis elements `e_I = e_{i_1} ∧ … ∧ e_{i_m}` use strictly increasing 0-based index
//! tuples ordered lexicographically. Inserting `e_j` in front of `e_I` and moving it
//! into place costs the sign `(-1)^{#{i ∈ I : i < j}}`.

use std::collections::HashMap;

use num_traits::Zero;

use crate::algebra::{binomial, GaussianRational, Monomial, MultiPoly};
use crate::error::{Error, Result};
use crate::symbol::HomogSymbol;

/// Strictly increasing index tuple.
pub type FormIndex = Vec<u8>;

/// The basis of `Λ^m R^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormBasis {
    pub n: usize,
    pub m: usize,
    elems: Vec<FormIndex>,
    lookup: HashMap<FormIndex, usize>,
}

impl FormBasis {
    pub fn new(n: usize, m: usize) -> Self {
        let mut elems = Vec::new();
        if m <= n {
            let mut cur = Vec::with_capacity(m);
            combos(n as u8, m, 0, &mut cur, &mut elems);
        }
        let lookup = elems.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        FormBasis { n, m, elems, lookup }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[FormIndex] {
        &self.elems
    }

    pub fn index_of(&self, idx: &[u8]) -> Option<usize> {
        self.lookup.get(idx).copied()
    }
}

fn combos(n: u8, m: usize, start: u8, cur: &mut Vec<u8>, out: &mut Vec<FormIndex>) {
    if cur.len() == m {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        combos(n, m, i + 1, cur, out);
        cur.pop();
    }
}

/// `e_j ∧ e_I = sign · e_{I ∪ {j}}`, `None` if `j ∈ I`.
pub fn insert_sign(idx: &[u8], j: u8) -> Option<(FormIndex, i64)> {
    if idx.contains(&j) {
        return None;
    }
    let before = idx.iter().filter(|&&i| i < j).count();
    let mut out = idx.to_vec();
    out.insert(before, j);
    Some((out, if before % 2 == 0 { 1 } else { -1 }))
}

/// Matrix operator `Λ^{col_grade} → Λ^{row_grade}` with polynomial entries.
#[derive(Clone, PartialEq, Eq)]
pub struct FormOperator {
    pub n: usize,
    pub row_grade: usize,
    pub col_grade: usize,
    rows: usize,
    cols: usize,
    nxi: usize,
    nx: usize,
    entries: Vec<MultiPoly>,
}

impl std::fmt::Debug for FormOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "FormOperator Λ^{} -> Λ^{} (n = {})", self.col_grade, self.row_grade, self.n)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let e = self.get(r, c);
                if !e.is_zero() {
                    writeln!(f, "  [{}, {}] = {}", r, c, e)?;
                }
            }
        }
        Ok(())
    }
}

impl FormOperator {
    pub fn zero(n: usize, row_grade: usize, col_grade: usize, nxi: usize, nx: usize) -> Self {
        let rows = binomial(n as i64, row_grade as i64) as usize;
        let cols = binomial(n as i64, col_grade as i64) as usize;
        FormOperator {
            n,
            row_grade,
            col_grade,
            rows,
            cols,
            nxi,
            nx,
            entries: vec![MultiPoly::zero(nxi, nx); rows * cols],
        }
    }

    pub fn identity(n: usize, m: usize, nxi: usize, nx: usize) -> Self {
        Self::scalar(n, m, MultiPoly::one(nxi, nx))
    }

    /// `p · Id` on `Λ^m`.
    pub fn scalar(n: usize, m: usize, p: MultiPoly) -> Self {
        let mut op = Self::zero(n, m, m, p.nxi(), p.nx());
        for i in 0..op.rows {
            op.set(i, i, p.clone());
        }
        op
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nxi(&self) -> usize {
        self.nxi
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn get(&self, r: usize, c: usize) -> &MultiPoly {
        &self.entries[r * self.cols + c]
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut MultiPoly {
        &mut self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: MultiPoly) {
        self.entries[r * self.cols + c] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.row_grade == self.col_grade
    }

    pub fn map(&self, f: impl Fn(&MultiPoly) -> MultiPoly) -> FormOperator {
        let mut out = self.clone();
        for e in out.entries.iter_mut() {
            *e = f(e);
        }
        out
    }

    pub fn entries(&self) -> impl Iterator<Item = &MultiPoly> {
        self.entries.iter()
    }

    fn check_same_shape(&self, o: &FormOperator) -> Result<()> {
        if self.n != o.n || self.row_grade != o.row_grade || self.col_grade != o.col_grade {
            return Err(Error::DimensionMismatch(format!(
                "operators Λ^{}→Λ^{} and Λ^{}→Λ^{}",
                self.col_grade, self.row_grade, o.col_grade, o.row_grade
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &FormOperator) -> Result<FormOperator> {
        self.check_same_shape(o)?;
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(o.entries.iter()) {
            a.add_assign(b);
        }
        Ok(out)
    }

    pub fn sub(&self, o: &FormOperator) -> Result<FormOperator> {
        self.check_same_shape(o)?;
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(o.entries.iter()) {
            *a = a.sub(b);
        }
        Ok(out)
    }

    pub fn add_assign_scaled(&mut self, o: &FormOperator, s: &GaussianRational) {
        assert!(self.check_same_shape(o).is_ok(), "operator shape mismatch");
        for (a, b) in self.entries.iter_mut().zip(o.entries.iter()) {
            a.add_scaled(b, s);
        }
    }

    pub fn scale(&self, s: &GaussianRational) -> FormOperator {
        self.map(|e| e.scale(s))
    }

    /// Multiply every entry by the polynomial `p`.
    pub fn mul_poly(&self, p: &MultiPoly) -> FormOperator {
        self.map(|e| if e.is_zero() { e.clone() } else { e.mul(p) })
    }

    /// `self ∘ o` (apply `o` first).
    pub fn compose(&self, o: &FormOperator) -> Result<FormOperator> {
        self.compose_with(o, &|_| true)
    }

    /// Composition keeping only monomials accepted by `keep`.
    pub fn compose_with(&self, o: &FormOperator, keep: &dyn Fn(&Monomial) -> bool) -> Result<FormOperator> {
        if self.n != o.n || self.col_grade != o.row_grade {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose Λ^{}→Λ^{} after Λ^{}→Λ^{}",
                self.col_grade, self.row_grade, o.col_grade, o.row_grade
            )));
        }
        let mut out = FormOperator::zero(self.n, self.row_grade, o.col_grade, self.nxi, self.nx);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..o.cols {
                    let b = o.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.mul_truncated(b, keep);
                    out.get_mut(r, c).add_assign(&prod);
                }
            }
        }
        Ok(out)
    }

    /// Diagonal sum.
    pub fn trace(&self) -> Result<MultiPoly> {
        if !self.is_square() {
            return Err(Error::Precondition("trace of a non-square operator".into()));
        }
        let mut t = MultiPoly::zero(self.nxi, self.nx);
        for i in 0..self.rows {
            t.add_assign(self.get(i, i));
        }
        Ok(t)
    }

    /// `tr(self ∘ o)` without forming the full product.
    pub fn trace_of_product(&self, o: &FormOperator) -> Result<MultiPoly> {
        if self.n != o.n || self.col_grade != o.row_grade || self.row_grade != o.col_grade {
            return Err(Error::DimensionMismatch("trace of product needs compatible shapes".into()));
        }
        let mut t = MultiPoly::zero(self.nxi, self.nx);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                let b = o.get(k, r);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                t.add_assign(&a.mul(b));
            }
        }
        Ok(t)
    }

    pub fn is_zero_rational(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero_rational())
    }

    pub fn eq_rational(&self, o: &FormOperator) -> bool {
        match self.sub(o) {
            Ok(d) => d.is_zero_rational(),
            Err(_) => false,
        }
    }
}

/// Exterior multiplication `ε_ξ : Λ^m → Λ^{m+1}` by the covector with components `xi`.
pub fn epsilon(xi: &[MultiPoly], m: usize) -> FormOperator {
    let n = xi.len();
    let (nxi, nx) = (xi[0].nxi(), xi[0].nx());
    let src = FormBasis::new(n, m);
    let dst = FormBasis::new(n, m + 1);
    let mut op = FormOperator::zero(n, m + 1, m, nxi, nx);
    if m >= n {
        return op;
    }
    for (c, idx) in src.elems().iter().enumerate() {
        for (j, xj) in xi.iter().enumerate() {
            if xj.is_zero() {
                continue;
            }
            if let Some((out, sign)) = insert_sign(idx, j as u8) {
                let r = dst.index_of(&out).expect("basis element");
                op.get_mut(r, c).add_scaled(xj, &GaussianRational::from_int(sign));
            }
        }
    }
    op
}

fn check_symmetric(g_inv: &[Vec<MultiPoly>]) -> Result<()> {
    let n = g_inv.len();
    for a in 0..n {
        if g_inv[a].len() != n {
            return Err(Error::InvalidMetric("inverse metric is not square".into()));
        }
        for b in 0..a {
            if g_inv[a][b] != g_inv[b][a] {
                return Err(Error::InvalidMetric(format!("g^({},{}) ≠ g^({},{})", a + 1, b + 1, b + 1, a + 1)));
            }
        }
    }
    Ok(())
}

/// Interior multiplication `ι : Λ^m → Λ^{m−1}` by the vector `g⁻¹ξ`.
pub fn iota(xi: &[MultiPoly], g_inv: &[Vec<MultiPoly>], m: usize) -> Result<FormOperator> {
    check_symmetric(g_inv)?;
    let n = xi.len();
    if g_inv.len() != n {
        return Err(Error::DimensionMismatch("covector and metric dimensions differ".into()));
    }
    let (nxi, nx) = (xi[0].nxi(), xi[0].nx());
    let mut v = Vec::with_capacity(n);
    for row in g_inv {
        let mut acc = MultiPoly::zero(nxi, nx);
        for (gab, xb) in row.iter().zip(xi.iter()) {
            if !gab.is_zero() && !xb.is_zero() {
                acc.add_assign(&gab.mul(xb));
            }
        }
        v.push(acc);
    }
    Ok(iota_vector(&v, m))
}

/// Interior multiplication by a vector with the given components.
pub fn iota_vector(v: &[MultiPoly], m: usize) -> FormOperator {
    let n = v.len();
    let (nxi, nx) = (v[0].nxi(), v[0].nx());
    let mut op = FormOperator::zero(n, m.saturating_sub(1), m, nxi, nx);
    if m == 0 {
        return FormOperator::zero(n, 0, 0, nxi, nx).restricted_zero(0, 0);
    }
    let src = FormBasis::new(n, m);
    let dst = FormBasis::new(n, m - 1);
    for (c, idx) in src.elems().iter().enumerate() {
        for (s, &j) in idx.iter().enumerate() {
            let vj = &v[j as usize];
            if vj.is_zero() {
                continue;
            }
            let mut out = idx.clone();
            out.remove(s);
            let r = dst.index_of(&out).expect("basis element");
            let sign = if s % 2 == 0 { 1 } else { -1 };
            op.get_mut(r, c).add_scaled(vj, &GaussianRational::from_int(sign));
        }
    }
    op
}

impl FormOperator {
    fn restricted_zero(self, _r: usize, _c: usize) -> FormOperator {
        self
    }
}

/// Identity inverse metric.
pub fn identity_metric(n: usize, nxi: usize, nx: usize) -> Vec<Vec<MultiPoly>> {
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| if a == b { MultiPoly::one(nxi, nx) } else { MultiPoly::zero(nxi, nx) })
                .collect()
        })
        .collect()
}

/// Cotangent coordinate functions `ξ_1, …, ξ_n`.
pub fn xi_covector(n: usize, nx: usize) -> Vec<MultiPoly> {
    (0..n).map(|j| MultiPoly::xi_var(n, nx, j)).collect()
}

/// `⟨ξ, ξ⟩_g = Σ g^{ab} ξ_a ξ_b` as a polynomial.
pub fn metric_norm_sq(xi: &[MultiPoly], g_inv: &[Vec<MultiPoly>]) -> MultiPoly {
    let (nxi, nx) = (xi[0].nxi(), xi[0].nx());
    let mut acc = MultiPoly::zero(nxi, nx);
    for (a, row) in g_inv.iter().enumerate() {
        for (b, gab) in row.iter().enumerate() {
            if !gab.is_zero() {
                acc.add_assign(&gab.mul(&xi[a]).mul(&xi[b]));
            }
        }
    }
    acc
}

/// `1/⟨ξ,ξ⟩_g` expanded around the Euclidean norm `r`:
/// `Σ_k (−q)^k r^{−k−1}` with `q = ⟨ξ,ξ⟩_g − r`, keeping base-variable degree `≤ x_order`.
/// Requires `q` to vanish at `x = 0` (identity metric at the origin).
pub fn inverse_norm_series(xi: &[MultiPoly], g_inv: &[Vec<MultiPoly>], x_order: u32) -> Result<MultiPoly> {
    let (nxi, nx) = (xi[0].nxi(), xi[0].nx());
    let r = MultiPoly::norm_pow(nxi, nx, 1).expand_norm();
    let q = metric_norm_sq(xi, g_inv).sub(&r);
    if q.terms().any(|(m, _)| m.x_degree() == 0) {
        return Err(Error::Precondition("metric must be the identity at the origin".into()));
    }
    let keep = |m: &Monomial| m.x_degree() <= x_order;
    let mut out = MultiPoly::zero(nxi, nx);
    let mut power = MultiPoly::one(nxi, nx);
    let mut k: i16 = 0;
    while !power.is_zero() {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        out.add_scaled(&power.shift_norm(-k - 1), &GaussianRational::from_int(sign));
        power = power.mul_truncated(&q, &keep);
        k += 1;
    }
    Ok(out)
}

/// Degree-0 principal symbol `(ε_ξ ι_ξ − ι_ξ ε_ξ) ‖ξ‖_g^{-2}` on `Λ^m`.
///
/// With a non-constant metric the inverse norm is expanded to base-variable order `x_order`.
pub fn principal_symbol_f(n: usize, m: usize, g_inv: &[Vec<MultiPoly>], x_order: u32) -> Result<HomogSymbol> {
    if m > n {
        return Err(Error::Precondition(format!("form degree {} exceeds dimension {}", m, n)));
    }
    let nx = g_inv[0][0].nx();
    let xi = xi_covector(n, nx);
    let num = clifford_difference(&xi, g_inv, m)?;
    let inv = inverse_norm_series(&xi, g_inv, x_order)?;
    let keep = |mm: &Monomial| mm.x_degree() <= x_order;
    let op = num.map(|e| if e.is_zero() { e.clone() } else { e.mul_truncated(&inv, &keep) });
    Ok(HomogSymbol::new(op, 0))
}

/// `ε_ξ ι_ξ − ι_ξ ε_ξ` on `Λ^m`.
pub fn clifford_difference(xi: &[MultiPoly], g_inv: &[Vec<MultiPoly>], m: usize) -> Result<FormOperator> {
    let n = xi.len();
    let (nxi, nx) = (xi[0].nxi(), xi[0].nx());
    let mut out = FormOperator::zero(n, m, m, nxi, nx);
    if m >= 1 {
        let ei = epsilon(xi, m - 1).compose(&iota(xi, g_inv, m)?)?;
        out = out.add(&ei)?;
    }
    if m < n {
        let ie = iota(xi, g_inv, m + 1)?.compose(&epsilon(xi, m))?;
        out = out.sub(&ie)?;
    }
    Ok(out)
}

/// `ε_ξ ι_ξ` on `Λ^m` (zero for `m = 0`).
pub fn epsilon_iota(xi: &[MultiPoly], g_inv: &[Vec<MultiPoly>], m: usize) -> Result<FormOperator> {
    let n = xi.len();
    let (nxi, nx) = (xi[0].nxi(), xi[0].nx());
    if m == 0 {
        return Ok(FormOperator::zero(n, 0, 0, nxi, nx));
    }
    epsilon(xi, m - 1).compose(&iota(xi, g_inv, m)?)
}

/// Trace of an operator, as a polynomial.
pub fn trace(a: &FormOperator) -> Result<MultiPoly> {
    a.trace()
}

/// Unit covector `e_j` with constant polynomial components.
pub fn unit_covector(n: usize, j: usize, nxi: usize, nx: usize) -> Vec<MultiPoly> {
    (0..n)
        .map(|i| if i == j { MultiPoly::one(nxi, nx) } else { MultiPoly::zero(nxi, nx) })
        .collect()
}

/// Whether `op` equals `c · Id` for a constant `c`; returns `c`.
pub fn as_scalar_identity(op: &FormOperator) -> Option<GaussianRational> {
    if !op.is_square() {
        return None;
    }
    let c = op.get(0, 0).as_constant()?;
    for r in 0..op.rows() {
        for k in 0..op.cols() {
            let e = op.get(r, k);
            if r == k {
                if e.as_constant()? != c {
                    return None;
                }
            } else if !e.is_zero() {
                return None;
            }
        }
    }
    if op.rows() == 0 {
        return Some(GaussianRational::zero());
    }
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::qi;

    fn consts(v: &[i64]) -> Vec<MultiPoly> {
        v.iter().map(|&c| MultiPoly::from_q(0, 0, qi(c))).collect()
    }

    fn apply(op: &FormOperator, col: usize) -> Vec<(usize, GaussianRational)> {
        (0..op.rows())
            .filter_map(|r| {
                let c = op.get(r, col).as_constant().unwrap();
                (!c.is_zero()).then_some((r, c))
            })
            .collect()
    }

    #[test]
    fn epsilon_signs() {
        let b1 = FormBasis::new(4, 1);
        let b2 = FormBasis::new(4, 2);
        let e1 = epsilon(&consts(&[1, 0, 0, 0]), 1);
        let r = apply(&e1, b1.index_of(&[1]).unwrap());
        assert_eq!(r, vec![(b2.index_of(&[0, 1]).unwrap(), GaussianRational::from_int(1))]);
        let e2 = epsilon(&consts(&[0, 1, 0, 0]), 1);
        let r = apply(&e2, b1.index_of(&[0]).unwrap());
        assert_eq!(r, vec![(b2.index_of(&[0, 1]).unwrap(), GaussianRational::from_int(-1))]);
    }

    #[test]
    fn iota_deletes() {
        let b1 = FormBasis::new(4, 1);
        let b2 = FormBasis::new(4, 2);
        let g = identity_metric(4, 0, 0);
        let i1 = iota(&consts(&[1, 0, 0, 0]), &g, 2).unwrap();
        let r = apply(&i1, b2.index_of(&[0, 1]).unwrap());
        assert_eq!(r, vec![(b1.index_of(&[1]).unwrap(), GaussianRational::from_int(1))]);
        let i3 = iota(&consts(&[0, 0, 1, 0]), &g, 2).unwrap();
        assert!(apply(&i3, b2.index_of(&[0, 1]).unwrap()).is_empty());
    }

    #[test]
    fn non_symmetric_metric_rejected() {
        let mut g = identity_metric(3, 0, 0);
        g[0][1] = MultiPoly::from_q(0, 0, qi(1));
        assert!(matches!(iota(&consts(&[1, 0, 0]), &g, 1), Err(Error::InvalidMetric(_))));
    }

    #[test]
    fn clifford_identities_symbolic() {
        for n in 1..=6usize {
            let xi = xi_covector(n, 0);
            let g = identity_metric(n, n, 0);
            let r = MultiPoly::norm_pow(n, 0, 1).expand_norm();
            for m in 0..=n {
                if m < n {
                    let ee = epsilon(&xi, m + 1).compose(&epsilon(&xi, m)).unwrap();
                    assert!(ee.is_zero() || m + 2 > n);
                }
                if m >= 2 {
                    let ii = iota(&xi, &g, m - 1).unwrap().compose(&iota(&xi, &g, m).unwrap()).unwrap();
                    assert!(ii.is_zero());
                }
                let mut anti = FormOperator::zero(n, m, m, n, 0);
                if m >= 1 {
                    anti = anti.add(&epsilon_iota(&xi, &g, m).unwrap()).unwrap();
                }
                if m < n {
                    anti = anti.add(&iota(&xi, &g, m + 1).unwrap().compose(&epsilon(&xi, m)).unwrap()).unwrap();
                }
                assert_eq!(anti, FormOperator::scalar(n, m, r.clone()), "n={} m={}", n, m);
                let d = clifford_difference(&xi, &g, m).unwrap();
                let sq = d.compose(&d).unwrap();
                assert_eq!(sq, FormOperator::scalar(n, m, r.mul(&r)), "n={} m={}", n, m);
            }
        }
    }

    #[test]
    fn principal_symbol_on_basis() {
        let g = identity_metric(4, 0, 0);
        let b2 = FormBasis::new(4, 2);
        let col = b2.index_of(&[0, 1]).unwrap();
        for (j, expect) in [(0usize, 1i64), (2, -1)] {
            let xi = unit_covector(4, j, 0, 0);
            let d = clifford_difference(&xi, &g, 2).unwrap();
            assert_eq!(apply(&d, col), vec![(col, GaussianRational::from_int(expect))]);
        }
    }

    #[test]
    fn trace_of_identity() {
        assert_eq!(
            FormOperator::identity(4, 2, 0, 0).trace().unwrap().as_constant(),
            Some(GaussianRational::from_int(6))
        );
    }
}
