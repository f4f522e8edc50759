//! Sparse multivariate polynomials over Gaussian rationals.
//!
//! A monomial carries three groups of commuting variables:
//!
//! * cotangent variables `ξ_1..ξ_p` together with an integer power of the
//!   Euclidean norm `r = Σ ξ_j²` (negative powers allowed, so homogeneous
//!   rational symbols `N / r^s` live here without expanding `r`);
//! * base variables `x_1..x_q` (Taylor expansion around the chart origin);
//! * formal symbols: jets of scalar functions and curvature components.
//!
//! `∂_ξ` acts on `r` by the chain rule `∂_j r = 2 ξ_j`. `∂_x` raises the order
//! of function jets, and treats curvature symbols as constants.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use smallvec::SmallVec;

use super::multiindex::MultiIndex;
use super::rational::{qi, GaussianRational, Q};
use crate::error::{Error, Result};

/// A scalar function name (`f`, `h`, `k`, …).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Func(pub char);

/// A formal symbol appearing as a polynomial variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Sym {
    /// `∂^α func` at the current point (partials commute, so the multi-index is sorted).
    Jet { func: Func, partials: MultiIndex },
    /// Canonical Riemann component `R_{abcd}` at the chart origin (0-based indices).
    Curv([u8; 4]),
    /// Constant Taylor coefficient `∂^α tag_{ij}` of a model field (metric entries, conformal
    /// factor); unlike jets it is not differentiated by `∂_x`.
    Taylor { tag: char, i: u8, j: u8, partials: MultiIndex },
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::Jet { func, partials } => {
                if partials.is_zero() {
                    write!(f, "{}", func.0)
                } else {
                    let idx: String = partials.to_indices().iter().map(|i| (i + 1).to_string()).collect();
                    write!(f, "{}_{{{}}}", func.0, idx)
                }
            }
            Sym::Curv(k) => write!(f, "R_{{{}{}{}{}}}", k[0] + 1, k[1] + 1, k[2] + 1, k[3] + 1),
            Sym::Taylor { tag, i, j, partials } => {
                let idx: String = partials.to_indices().iter().map(|i| (i + 1).to_string()).collect();
                write!(f, "{}_{{{}{},{}}}", tag, i + 1, j + 1, idx)
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    pub xi: SmallVec<[u8; 8]>,
    pub norm: i16,
    pub x: SmallVec<[u8; 8]>,
    pub syms: SmallVec<[(Sym, u16); 2]>,
}

impl Monomial {
    pub fn one(nxi: usize, nx: usize) -> Self {
        Monomial {
            xi: SmallVec::from_elem(0, nxi),
            norm: 0,
            x: SmallVec::from_elem(0, nx),
            syms: SmallVec::new(),
        }
    }

    pub fn xi_degree(&self) -> i32 {
        self.xi.iter().map(|&e| e as i32).sum::<i32>() + 2 * self.norm as i32
    }

    pub fn x_degree(&self) -> u32 {
        self.x.iter().map(|&e| e as u32).sum()
    }

    pub fn curvature_degree(&self) -> u32 {
        self.syms
            .iter()
            .filter(|(s, _)| matches!(s, Sym::Curv(_)))
            .map(|(_, e)| *e as u32)
            .sum()
    }

    fn mul(&self, o: &Monomial) -> Monomial {
        let xi = self.xi.iter().zip(o.xi.iter()).map(|(a, b)| a + b).collect();
        let x = self.x.iter().zip(o.x.iter()).map(|(a, b)| a + b).collect();
        let syms = merge_syms(&self.syms, &o.syms);
        Monomial { xi, norm: self.norm + o.norm, x, syms }
    }
}

fn merge_syms(a: &[(Sym, u16)], b: &[(Sym, u16)]) -> SmallVec<[(Sym, u16); 2]> {
    let mut out: SmallVec<[(Sym, u16); 2]> = SmallVec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                out.push((a[i].0.clone(), a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    out.extend(b[j..].iter().cloned());
    out
}

// Graded lexicographic: total ξ-degree first, then exponents, then base variables, then symbols.
impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        self.xi_degree()
            .cmp(&o.xi_degree())
            .then_with(|| o.xi.cmp(&self.xi))
            .then_with(|| self.norm.cmp(&o.norm))
            .then_with(|| self.x_degree().cmp(&o.x_degree()))
            .then_with(|| o.x.cmp(&self.x))
            .then_with(|| self.syms.cmp(&o.syms))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Sparse polynomial; never stores zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nxi: usize,
    nx: usize,
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl MultiPoly {
    pub fn zero(nxi: usize, nx: usize) -> Self {
        MultiPoly { nxi, nx, terms: BTreeMap::new() }
    }

    pub fn constant(nxi: usize, nx: usize, c: GaussianRational) -> Self {
        let mut p = Self::zero(nxi, nx);
        p.add_term(Monomial::one(nxi, nx), c);
        p
    }

    pub fn from_q(nxi: usize, nx: usize, c: Q) -> Self {
        Self::constant(nxi, nx, GaussianRational::real(c))
    }

    pub fn one(nxi: usize, nx: usize) -> Self {
        Self::constant(nxi, nx, GaussianRational::one())
    }

    pub fn xi_var(nxi: usize, nx: usize, j: usize) -> Self {
        let mut m = Monomial::one(nxi, nx);
        m.xi[j] = 1;
        Self::monomial(nxi, nx, m, GaussianRational::one())
    }

    pub fn x_var(nxi: usize, nx: usize, j: usize) -> Self {
        let mut m = Monomial::one(nxi, nx);
        m.x[j] = 1;
        Self::monomial(nxi, nx, m, GaussianRational::one())
    }

    /// `r^k` where `r = Σ ξ_j²`.
    pub fn norm_pow(nxi: usize, nx: usize, k: i16) -> Self {
        let mut m = Monomial::one(nxi, nx);
        m.norm = k;
        Self::monomial(nxi, nx, m, GaussianRational::one())
    }

    pub fn sym(nxi: usize, nx: usize, s: Sym) -> Self {
        let mut m = Monomial::one(nxi, nx);
        m.syms.push((s, 1));
        Self::monomial(nxi, nx, m, GaussianRational::one())
    }

    pub fn jet(nxi: usize, nx: usize, func: Func, partials: MultiIndex) -> Self {
        Self::sym(nxi, nx, Sym::Jet { func, partials })
    }

    pub fn monomial(nxi: usize, nx: usize, m: Monomial, c: GaussianRational) -> Self {
        let mut p = Self::zero(nxi, nx);
        p.add_term(m, c);
        p
    }

    pub fn nxi(&self) -> usize {
        self.nxi
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, GaussianRational)> {
        self.terms.into_iter()
    }

    pub fn add_term(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(m.xi.len(), self.nxi);
        debug_assert_eq!(m.x.len(), self.nx);
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_dims(&self, o: &MultiPoly) -> Result<()> {
        if self.nxi != o.nxi || self.nx != o.nx {
            return Err(Error::DimensionMismatch(format!(
                "({}, {}) vs ({}, {}) variables",
                self.nxi, self.nx, o.nxi, o.nx
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &MultiPoly) -> Result<MultiPoly> {
        self.check_dims(o)?;
        let mut out = self.clone();
        out.add_assign(o);
        Ok(out)
    }

    pub fn add_assign(&mut self, o: &MultiPoly) {
        assert!(self.nxi == o.nxi && self.nx == o.nx, "polynomial dimension mismatch");
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, o: &MultiPoly, s: &GaussianRational) {
        assert!(self.nxi == o.nxi && self.nx == o.nx, "polynomial dimension mismatch");
        if s.is_zero() {
            return;
        }
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c * s);
        }
    }

    pub fn sub(&self, o: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out.add_scaled(o, &GaussianRational::from_int(-1));
        out
    }

    pub fn neg(&self) -> MultiPoly {
        self.scale(&GaussianRational::from_int(-1))
    }

    pub fn scale(&self, s: &GaussianRational) -> MultiPoly {
        let mut out = Self::zero(self.nxi, self.nx);
        if s.is_zero() {
            return out;
        }
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c * s);
        }
        out
    }

    pub fn scale_q(&self, s: &Q) -> MultiPoly {
        self.scale(&GaussianRational::real(s.clone()))
    }

    /// Exact product; errors when the variable universes differ.
    pub fn poly_mul(&self, o: &MultiPoly) -> Result<MultiPoly> {
        self.check_dims(o)?;
        Ok(self.mul(o))
    }

    pub fn mul(&self, o: &MultiPoly) -> MultiPoly {
        assert!(self.nxi == o.nxi && self.nx == o.nx, "polynomial dimension mismatch");
        let mut out = Self::zero(self.nxi, self.nx);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// Product keeping only monomials accepted by `keep` (truncated multiplication).
    pub fn mul_truncated(&self, o: &MultiPoly, keep: &dyn Fn(&Monomial) -> bool) -> MultiPoly {
        let mut out = Self::zero(self.nxi, self.nx);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let m = ma.mul(mb);
                if keep(&m) {
                    out.add_term(m, ca * cb);
                }
            }
        }
        out
    }

    /// Product keeping monomials of base-variable degree ≤ `max_x` that `keep` accepts;
    /// pairs exceeding the degree bound are skipped before multiplying.
    pub fn mul_x_truncated(&self, o: &MultiPoly, max_x: u32, keep: &dyn Fn(&Monomial) -> bool) -> MultiPoly {
        let mut out = Self::zero(self.nxi, self.nx);
        let ob: Vec<(u32, &Monomial, &GaussianRational)> = o.terms.iter().map(|(m, c)| (m.x_degree(), m, c)).collect();
        for (ma, ca) in &self.terms {
            let da = ma.x_degree();
            if da > max_x {
                continue;
            }
            for (db, mb, cb) in &ob {
                if da + db > max_x {
                    continue;
                }
                let m = ma.mul(mb);
                if keep(&m) {
                    out.add_term(m, ca * *cb);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut out = Self::one(self.nxi, self.nx);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> MultiPoly {
        MultiPoly {
            nxi: self.nxi,
            nx: self.nx,
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    pub fn map_monomials(&self, f: impl Fn(&Monomial) -> Monomial) -> MultiPoly {
        let mut out = Self::zero(self.nxi, self.nx);
        for (m, c) in &self.terms {
            out.add_term(f(m), c.clone());
        }
        out
    }

    /// `∂/∂ξ_j`, with the chain rule on `r`.
    pub fn d_xi(&self, j: usize) -> MultiPoly {
        let mut out = Self::zero(self.nxi, self.nx);
        for (m, c) in &self.terms {
            let e = m.xi[j];
            if e > 0 {
                let mut m2 = m.clone();
                m2.xi[j] -= 1;
                out.add_term(m2, c.scale(&qi(e as i64)));
            }
            if m.norm != 0 {
                let mut m2 = m.clone();
                m2.xi[j] += 1;
                m2.norm -= 1;
                out.add_term(m2, c.scale(&qi(2 * m.norm as i64)));
            }
        }
        out
    }

    /// `∂_ξ^α`.
    pub fn d_xi_multi(&self, alpha: &MultiIndex) -> MultiPoly {
        let mut p = self.clone();
        for (j, &e) in alpha.0.iter().enumerate() {
            for _ in 0..e {
                p = p.d_xi(j);
            }
        }
        p
    }

    /// Plain partial `∂/∂x_j`: acts on base variables and raises function jets.
    pub fn partial_x(&self, j: usize) -> MultiPoly {
        let mut out = Self::zero(self.nxi, self.nx);
        for (m, c) in &self.terms {
            let e = m.x.get(j).copied().unwrap_or(0);
            if e > 0 {
                let mut m2 = m.clone();
                m2.x[j] -= 1;
                out.add_term(m2, c.scale(&qi(e as i64)));
            }
            for (k, (s, pow)) in m.syms.iter().enumerate() {
                if let Sym::Jet { func, partials } = s {
                    if j >= partials.dim() {
                        continue;
                    }
                    let mut raised = partials.clone();
                    raised.0[j] += 1;
                    let mut rest: SmallVec<[(Sym, u16); 2]> = m.syms.clone();
                    if *pow == 1 {
                        rest.remove(k);
                    } else {
                        rest[k].1 -= 1;
                    }
                    let single: SmallVec<[(Sym, u16); 2]> =
                        SmallVec::from_vec(vec![(Sym::Jet { func: *func, partials: raised }, 1)]);
                    let mut m2 = m.clone();
                    m2.syms = merge_syms(&rest, &single);
                    out.add_term(m2, c.scale(&qi(*pow as i64)));
                }
            }
        }
        out
    }

    /// `D_x^α = (−i)^{|α|} ∂_x^α`.
    pub fn d_x(&self, alpha: &MultiIndex) -> MultiPoly {
        let mut p = self.clone();
        for (j, &e) in alpha.0.iter().enumerate() {
            for _ in 0..e {
                p = p.partial_x(j);
            }
        }
        p.scale(&GaussianRational::neg_i_pow(alpha.order()))
    }

    /// Replace every non-negative power of `r` by `(Σ ξ_j²)^k`; negative powers stay.
    pub fn expand_norm(&self) -> MultiPoly {
        if self.terms.keys().all(|m| m.norm <= 0) {
            return self.clone();
        }
        let r = {
            let mut r = Self::zero(self.nxi, self.nx);
            for j in 0..self.nxi {
                let mut m = Monomial::one(self.nxi, self.nx);
                m.xi[j] = 2;
                r.add_term(m, GaussianRational::one());
            }
            r
        };
        let mut out = Self::zero(self.nxi, self.nx);
        let mut cache: BTreeMap<i16, MultiPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.norm <= 0 {
                out.add_term(m.clone(), c.clone());
                continue;
            }
            let rk = cache.entry(m.norm).or_insert_with(|| r.pow(m.norm as u32)).clone();
            let mut base = m.clone();
            base.norm = 0;
            for (mr, cr) in rk.terms {
                out.add_term(base.mul(&mr), c * &cr);
            }
        }
        out
    }

    /// Most negative power of `r` present (0 if none).
    pub fn min_norm(&self) -> i16 {
        self.terms.keys().map(|m| m.norm).min().unwrap_or(0).min(0)
    }

    /// Multiply by `r^k`.
    pub fn shift_norm(&self, k: i16) -> MultiPoly {
        self.map_monomials(|m| {
            let mut m2 = m.clone();
            m2.norm += k;
            m2
        })
    }

    /// Zero as a rational function of ξ (clears `r` denominators, expands, compares).
    pub fn is_zero_rational(&self) -> bool {
        let s = self.min_norm();
        self.shift_norm(-s).expand_norm().is_zero()
    }

    /// Equality as rational functions of ξ.
    pub fn eq_rational(&self, o: &MultiPoly) -> bool {
        self.sub(o).is_zero_rational()
    }

    /// Canonical representative: a single power of `r` in the denominator, numerator expanded.
    pub fn reduce(&self) -> MultiPoly {
        let s = self.min_norm();
        self.shift_norm(-s).expand_norm().shift_norm(s)
    }

    /// Restriction to the unit cosphere `r = 1`.
    pub fn restrict_to_sphere(&self) -> MultiPoly {
        self.map_monomials(|m| {
            let mut m2 = m.clone();
            m2.norm = 0;
            m2
        })
    }

    /// Value at `x = 0` (drops every monomial with a base variable).
    pub fn at_origin(&self) -> MultiPoly {
        self.filter(|m| m.x_degree() == 0)
    }

    /// Common ξ-homogeneity degree, `None` for the zero polynomial; error if mixed.
    pub fn xi_homogeneity(&self) -> Result<Option<i32>> {
        let mut d = None;
        for m in self.terms.keys() {
            let e = m.xi_degree();
            match d {
                None => d = Some(e),
                Some(prev) if prev != e => {
                    return Err(Error::WrongHomogeneity { expected: prev, found: e });
                }
                _ => {}
            }
        }
        Ok(d)
    }

    pub fn max_x_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.x_degree()).max().unwrap_or(0)
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.is_real())
    }

    /// Constant term if the polynomial is a constant.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if *m == Monomial::one(self.nxi, self.nx) {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Substitute each formal symbol by a polynomial (symbols not in `map` stay).
    pub fn substitute_syms(&self, map: &dyn Fn(&Sym) -> Option<MultiPoly>) -> MultiPoly {
        let mut out = Self::zero(self.nxi, self.nx);
        for (m, c) in &self.terms {
            let mut base = m.clone();
            base.syms.clear();
            let mut acc = Self::monomial(self.nxi, self.nx, base, c.clone());
            let mut kept: SmallVec<[(Sym, u16); 2]> = SmallVec::new();
            for (s, e) in &m.syms {
                match map(s) {
                    Some(p) => acc = acc.mul(&p.pow(*e as u32)),
                    None => kept.push((s.clone(), *e)),
                }
            }
            if !kept.is_empty() {
                let mut km = Monomial::one(self.nxi, self.nx);
                km.syms = kept;
                acc = acc.mul(&Self::monomial(self.nxi, self.nx, km, GaussianRational::one()));
            }
            out.add_assign(&acc);
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c)?;
            for (j, &e) in m.xi.iter().enumerate() {
                if e > 0 {
                    write!(f, "*xi{}^{}", j + 1, e)?;
                }
            }
            if m.norm != 0 {
                write!(f, "*r^{}", m.norm)?;
            }
            for (j, &e) in m.x.iter().enumerate() {
                if e > 0 {
                    write!(f, "*x{}^{}", j + 1, e)?;
                }
            }
            for (s, e) in &m.syms {
                write!(f, "*{}", s)?;
                if *e > 1 {
                    write!(f, "^{}", e)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::q;

    fn xi(j: usize) -> MultiPoly {
        MultiPoly::xi_var(3, 2, j)
    }

    #[test]
    fn monomial_products() {
        assert_eq!(xi(0).mul(&xi(0)).len(), 1);
        let i = GaussianRational::i();
        let one = MultiPoly::one(3, 2);
        let a = one.try_add(&xi(1).scale(&i)).unwrap();
        let b = one.sub(&xi(1).scale(&i));
        let expect = one.try_add(&xi(1).mul(&xi(1))).unwrap();
        assert_eq!(a.mul(&b), expect);
    }

    #[test]
    fn power_rule() {
        let p = xi(0).mul(&xi(0)).mul(&xi(1));
        let d = p.d_xi(0);
        assert_eq!(d, xi(0).mul(&xi(1)).scale(&GaussianRational::from_int(2)));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = MultiPoly::one(3, 2);
        let b = MultiPoly::one(4, 2);
        assert!(matches!(a.poly_mul(&b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn norm_chain_rule_matches_expansion() {
        // ∂_1 (ξ_1 r^{-1}) = r^{-1} - 2 ξ_1² r^{-2}
        let p = xi(0).mul(&MultiPoly::norm_pow(3, 2, -1));
        let d = p.d_xi(0);
        let expect = MultiPoly::norm_pow(3, 2, -1).sub(&xi(0).mul(&xi(0)).mul(&MultiPoly::norm_pow(3, 2, -2)).scale_q(&q(2, 1)));
        assert!(d.eq_rational(&expect));
        // r · r^{-1} = 1
        let r = MultiPoly::norm_pow(3, 2, 1).expand_norm();
        assert!(r.mul(&MultiPoly::norm_pow(3, 2, -1)).eq_rational(&MultiPoly::one(3, 2)));
    }

    #[test]
    fn d_x_on_jets() {
        let f = MultiPoly::jet(2, 2, Func('f'), MultiIndex::zero(2));
        let d1 = f.d_x(&MultiIndex::from_slice(&[1, 0]));
        let expect = MultiPoly::jet(2, 2, Func('f'), MultiIndex::from_slice(&[1, 0]))
            .scale(&GaussianRational::neg_i_pow(1));
        assert_eq!(d1, expect);
        let d2 = f.d_x(&MultiIndex::from_slice(&[2, 0]));
        let expect2 = MultiPoly::jet(2, 2, Func('f'), MultiIndex::from_slice(&[2, 0])).neg();
        assert_eq!(d2, expect2);
        assert_eq!(f.d_x(&MultiIndex::zero(2)), f);
    }

    #[test]
    fn leibniz_on_jet_products() {
        let f = MultiPoly::jet(2, 2, Func('f'), MultiIndex::zero(2));
        let h = MultiPoly::jet(2, 2, Func('h'), MultiIndex::zero(2));
        let x0 = MultiPoly::x_var(2, 2, 0);
        let p = f.mul(&h).mul(&x0);
        let lhs = p.partial_x(0);
        let rhs = f.partial_x(0).mul(&h).mul(&x0)
            .try_add(&f.mul(&h.partial_x(0)).mul(&x0)).unwrap()
            .try_add(&f.mul(&h)).unwrap();
        assert_eq!(lhs, rhs);
    }
}
