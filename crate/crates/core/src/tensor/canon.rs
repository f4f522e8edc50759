//! Structural normal form for tensor-jet expressions.
//!
//! The normal form is engine-defined and deterministic:
//! * `Ric`, `Sc`, `W` and metric factors are rewritten in the `R`/`ρ`/`J` basis, self-traces of
//!   `R` and `ρ` become `Ric`/`J`, and a divergence taken by the first covariant derivative of
//!   `R` or `ρ` is replaced through the contracted second Bianchi identity;
//! * slot symmetries of `R` (pair antisymmetry and exchange) and of `ρ` are normalized;
//! * dummy labels are renamed to the lexicographically least structure, ties broken by the
//!   least exact term, so that relabelling is a fixpoint;
//! * covariant derivatives are sorted by label, each transposition inserting the Ricci-identity
//!   correction `T_{I;ab} = T_{I;ba} + Σ_t R_{b a c_t e} T_{I[c_t → e]}`.
//!
//! The first Bianchi identity is not applied structurally; [`reduce`] decides vanishing of the
//! normal form exactly with the evaluator.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::eval::vanishes_identically;
use super::expr::{fresh_label, Factor, Head, Label, TensorJetExpr, Term};
use crate::algebra::Q;
use crate::error::{Error, Result};

/// Dummy count up to which relabelling searches all permutations.
const MAX_PERMUTED_DUMMIES: usize = 7;
/// Safety bound on rewrite steps per input term.
const MAX_STEPS: usize = 2_000_000;

fn qn(v: i64) -> Q {
    Q::from_integer(v.into())
}

/// Normalized slots and sign (`0` when the factor vanishes by antisymmetry).
fn normalize_slots(head: Head, slots: &[Label]) -> (Vec<Label>, i32) {
    let mut s = slots.to_vec();
    match head {
        Head::Riem | Head::Weyl => {
            if s[0] == s[1] || s[2] == s[3] {
                return (s, 0);
            }
            let mut sign = 1;
            if s[0] > s[1] {
                s.swap(0, 1);
                sign = -sign;
            }
            if s[2] > s[3] {
                s.swap(2, 3);
                sign = -sign;
            }
            if (s[0], s[1]) > (s[2], s[3]) {
                s = vec![s[2], s[3], s[0], s[1]];
            }
            (s, sign)
        }
        Head::Rho | Head::Ric | Head::Metric => {
            s.sort_unstable();
            (s, 1)
        }
        _ => (s, 1),
    }
}

fn normalized_factor(f: &Factor, sort_derivs: bool) -> (Factor, i32) {
    let (slots, sign) = normalize_slots(f.head, f.slots());
    let mut derivs = f.derivs().to_vec();
    if sort_derivs {
        derivs.sort_unstable();
    } else if f.head.slots() == 0 && derivs.len() >= 2 && derivs[0] > derivs[1] {
        // the Hessian of a scalar is symmetric
        derivs.swap(0, 1);
    }
    (Factor::new(f.head, &slots, &derivs), sign)
}

fn replace_label(f: &Factor, from: Label, to: Label) -> Factor {
    Factor { head: f.head, idx: f.idx.iter().map(|&l| if l == from { to } else { l }).collect() }
}

fn term_with(t: &Term, coeff: Q, replace: usize, new: Vec<Factor>) -> Term {
    let mut factors: Vec<Factor> = t.factors.iter().enumerate().filter(|(k, _)| *k != replace).map(|(_, f)| f.clone()).collect();
    factors.extend(new);
    Term::new(coeff, factors)
}

fn used_labels(t: &Term, free: &[Label]) -> BTreeSet<Label> {
    let mut u: BTreeSet<Label> = t.factors.iter().flat_map(|f| f.idx.iter().copied()).collect();
    u.extend(free.iter().copied());
    u
}

/// One expansion step, or `None` when the term is already in the `R`/`ρ`/`J` basis.
fn expand_step(t: &Term, n: usize, free: &[Label]) -> Result<Option<Vec<Term>>> {
    let nq = n as i64;
    for (k, f) in t.factors.iter().enumerate() {
        match f.head {
            Head::Metric => {
                if f.order() > 0 {
                    return Ok(Some(vec![]));
                }
                let (a, b) = (f.idx[0], f.idx[1]);
                if a == b {
                    return Ok(Some(vec![term_with(t, &t.coeff * qn(nq), k, vec![])]));
                }
                // contract a dummy slot of g into the other factor carrying it
                for (x, y) in [(a, b), (b, a)] {
                    if free.contains(&x) {
                        continue;
                    }
                    let factors = t
                        .factors
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, g)| replace_label(g, x, y))
                        .collect();
                    return Ok(Some(vec![Term::new(t.coeff.clone(), factors)]));
                }
            }
            Head::Scal => {
                let j = Factor::new(Head::J, &[], f.derivs());
                return Ok(Some(vec![term_with(t, &t.coeff * qn(2 * (nq - 1)), k, vec![j])]));
            }
            Head::Ric => {
                if n < 3 {
                    return Err(Error::Domain("Schouten decomposition needs n ≥ 3".into()));
                }
                let (b, d) = (f.idx[0], f.idx[1]);
                let rho = Factor::new(Head::Rho, &[b, d], f.derivs());
                let j = Factor::new(Head::J, &[], f.derivs());
                let g = Factor::new(Head::Metric, &[b, d], &[]);
                return Ok(Some(vec![
                    term_with(t, &t.coeff * qn(nq - 2), k, vec![rho]),
                    term_with(t, t.coeff.clone(), k, vec![j, g]),
                ]));
            }
            Head::Weyl => {
                if n < 3 {
                    return Err(Error::Domain("Weyl tensor needs n ≥ 3".into()));
                }
                let (i, j, kk, l) = (f.idx[0], f.idx[1], f.idx[2], f.idx[3]);
                let d = f.derivs();
                let mut out = vec![term_with(t, t.coeff.clone(), k, vec![Factor::new(Head::Riem, &[i, j, kk, l], d)])];
                for (p, q, g1, g2, s) in
                    [(j, kk, i, l, 1), (j, l, i, kk, -1), (i, l, j, kk, 1), (i, kk, j, l, -1)]
                {
                    out.push(term_with(
                        t,
                        &t.coeff * qn(s),
                        k,
                        vec![Factor::new(Head::Rho, &[p, q], d), Factor::new(Head::Metric, &[g1, g2], &[])],
                    ));
                }
                return Ok(Some(out));
            }
            Head::Riem => {
                let s = f.slots();
                let d = f.derivs();
                // self-trace: R_{abad} = Rc_{bd} and its images under the slot symmetries
                for (p, q, sign, r1, r2) in [(0, 2, 1, 1, 3), (1, 3, 1, 0, 2), (0, 3, -1, 1, 2), (1, 2, -1, 0, 3)] {
                    if s[p] == s[q] {
                        let ric = Factor::new(Head::Ric, &[s[r1], s[r2]], d);
                        return Ok(Some(vec![term_with(t, &t.coeff * qn(sign), k, vec![ric])]));
                    }
                }
                if s[0] == s[1] || s[2] == s[3] {
                    return Ok(Some(vec![]));
                }
                // contracted Bianchi: R_{ebcd;e} = Rc_{bd;c} − Rc_{bc;d}
                if let Some(&e) = d.first() {
                    if let Some(pos) = s.iter().position(|&x| x == e) {
                        let (b, c, dd, sign) = match pos {
                            0 => (s[1], s[2], s[3], 1),
                            1 => (s[0], s[2], s[3], -1),
                            2 => (s[3], s[0], s[1], 1),
                            _ => (s[2], s[0], s[1], -1),
                        };
                        let rest = &d[1..];
                        let mk = |x: Label, y: Label, z: Label| {
                            let mut dv = vec![z];
                            dv.extend_from_slice(rest);
                            Factor::new(Head::Ric, &[x, y], &dv)
                        };
                        return Ok(Some(vec![
                            term_with(t, &t.coeff * qn(sign), k, vec![mk(b, dd, c)]),
                            term_with(t, &t.coeff * qn(-sign), k, vec![mk(b, c, dd)]),
                        ]));
                    }
                }
            }
            Head::Rho => {
                let s = f.slots();
                let d = f.derivs();
                if s[0] == s[1] {
                    return Ok(Some(vec![term_with(t, t.coeff.clone(), k, vec![Factor::new(Head::J, &[], d)])]));
                }
                // ρ_{ab;a} = J_{;b}
                if let Some(&e) = d.first() {
                    if let Some(pos) = s.iter().position(|&x| x == e) {
                        let mut dv = vec![s[1 - pos]];
                        dv.extend_from_slice(&d[1..]);
                        return Ok(Some(vec![term_with(t, t.coeff.clone(), k, vec![Factor::new(Head::J, &[], &dv)])]));
                    }
                }
            }
            _ => {}
        }
    }
    Ok(None)
}

/// Sorted structure of `t` under a dummy relabelling: slots normalized, derivatives sorted,
/// factors sorted; plus the exact relabelled term (derivative order kept) and its sign.
fn relabelled(t: &Term, map: &BTreeMap<Label, Label>) -> (Vec<Factor>, Vec<Factor>, i32) {
    let m = |l: Label| *map.get(&l).unwrap_or(&l);
    let mut pairs: Vec<(Factor, Factor)> = Vec::with_capacity(t.factors.len());
    let mut sign = 1;
    for f in &t.factors {
        let r = Factor { head: f.head, idx: f.idx.iter().map(|&l| m(l)).collect() };
        let (exact, s) = normalized_factor(&r, false);
        sign *= s;
        let (key, _) = normalized_factor(&r, true);
        pairs.push((key, exact));
    }
    pairs.sort();
    let (key, exact): (Vec<Factor>, Vec<Factor>) = pairs.into_iter().unzip();
    (key, exact, sign)
}

/// Canonical relabelling of dummies; `None` when the term vanishes by a signed automorphism.
fn relabel_term(t: &Term, free: &[Label]) -> Option<Term> {
    let dummies = t.dummies();
    let freeset: BTreeSet<Label> = free.iter().copied().collect();
    let targets: Vec<Label> = (0..=255u8).filter(|l| !freeset.contains(l)).take(dummies.len()).collect();
    if dummies.len() > MAX_PERMUTED_DUMMIES {
        // first-appearance order in the structurally sorted term
        let mut order: Vec<Label> = Vec::new();
        let mut fs = t.factors.clone();
        fs.sort_by(|a, b| (a.head, a.order()).cmp(&(b.head, b.order())));
        for f in &fs {
            for &l in &f.idx {
                if dummies.contains(&l) && !order.contains(&l) {
                    order.push(l);
                }
            }
        }
        let map: BTreeMap<Label, Label> = order.iter().copied().zip(targets.iter().copied()).collect();
        let (_, exact, sign) = relabelled(t, &map);
        if sign == 0 {
            return None;
        }
        return Some(Term::new(&t.coeff * qn(sign as i64), exact));
    }
    let mut best: Option<(Vec<Factor>, Vec<Factor>, i32)> = None;
    let mut conflict = false;
    for perm in targets.iter().copied().permutations(dummies.len()) {
        let map: BTreeMap<Label, Label> = dummies.iter().copied().zip(perm).collect();
        let (key, exact, sign) = relabelled(t, &map);
        if sign == 0 {
            return None;
        }
        match &best {
            None => best = Some((key, exact, sign)),
            Some((bk, be, bs)) => match (&key, &exact).cmp(&(bk, be)) {
                std::cmp::Ordering::Less => {
                    best = Some((key, exact, sign));
                    conflict = false;
                }
                std::cmp::Ordering::Equal => {
                    if sign != *bs {
                        conflict = true;
                    }
                }
                std::cmp::Ordering::Greater => {}
            },
        }
    }
    if dummies.is_empty() {
        let (_, exact, sign) = relabelled(t, &BTreeMap::new());
        if sign == 0 {
            return None;
        }
        return Some(Term::new(&t.coeff * qn(sign as i64), exact));
    }
    let (_, exact, sign) = best.expect("at least one permutation");
    if conflict {
        return None;
    }
    Some(Term::new(&t.coeff * qn(sign as i64), exact))
}

/// First derivative transposition needed, as the Ricci-identity expansion of the term.
fn sort_step(t: &Term, free: &[Label]) -> Option<Vec<Term>> {
    for (k, f) in t.factors.iter().enumerate() {
        let s = f.head.slots();
        let d = f.derivs();
        let Some(i) = (0..d.len().saturating_sub(1)).find(|&i| d[i] > d[i + 1]) else {
            continue;
        };
        let (a, b) = (d[i], d[i + 1]);
        let mut out = Vec::new();
        let mut swapped = f.clone();
        swapped.idx.swap(s + i, s + i + 1);
        out.push(term_with(t, t.coeff.clone(), k, vec![swapped]));
        let e = fresh_label(&used_labels(t, free));
        let base: Vec<Label> = f.idx[..s + i].to_vec();
        let rest: Vec<Label> = d[i + 2..].to_vec();
        for pos in 0..base.len() {
            let mut idx = base.clone();
            let c = idx[pos];
            idx[pos] = e;
            for mask in 0u32..(1 << rest.len()) {
                let mut tf = Factor { head: f.head, idx: idx.iter().copied().collect() };
                let mut rf = Factor::new(Head::Riem, &[b, a, c, e], &[]);
                for (j, &l) in rest.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        rf.idx.push(l);
                    } else {
                        tf.idx.push(l);
                    }
                }
                out.push(term_with(t, t.coeff.clone(), k, vec![tf, rf]));
            }
        }
        return Some(out);
    }
    None
}

/// Ambient geometry of a computation: on Euclidean space every curvature term vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Geometry {
    Flat,
    Curved,
}

impl Geometry {
    /// `Curved` iff some term carries a curvature factor.
    pub fn of(e: &TensorJetExpr) -> Geometry {
        if e.terms.iter().any(|t| t.deg_r() > 0) {
            Geometry::Curved
        } else {
            Geometry::Flat
        }
    }

    pub fn join(self, o: Geometry) -> Geometry {
        if self == Geometry::Curved || o == Geometry::Curved {
            Geometry::Curved
        } else {
            Geometry::Flat
        }
    }
}

fn canonicalize_term(
    t: &Term,
    n: usize,
    free: &[Label],
    geom: Geometry,
    acc: &mut BTreeMap<Vec<Factor>, Q>,
) -> Result<()> {
    let mut stack = vec![t.clone()];
    let mut steps = 0usize;
    while let Some(t) = stack.pop() {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::Consistency("canonicalization did not terminate".into()));
        }
        if t.coeff.is_zero() || (geom == Geometry::Flat && t.deg_r() > 0) {
            continue;
        }
        if let Some(next) = expand_step(&t, n, free)? {
            stack.extend(next);
            continue;
        }
        let Some(r) = relabel_term(&t, free) else {
            continue;
        };
        if let Some(next) = sort_step(&r, free) {
            stack.extend(next);
            continue;
        }
        *acc.entry(r.factors).or_insert_with(Q::zero) += &r.coeff;
    }
    Ok(())
}

/// Deterministic normal form; linear and idempotent.
pub fn canonicalize(e: &TensorJetExpr) -> Result<TensorJetExpr> {
    canonicalize_in(e, Geometry::Curved)
}

/// Normal form in the given geometry; in `Flat` every curvature term is dropped.
pub fn canonicalize_in(e: &TensorJetExpr, geom: Geometry) -> Result<TensorJetExpr> {
    e.validate()?;
    let partials: Vec<Result<BTreeMap<Vec<Factor>, Q>>> = e
        .terms
        .par_iter()
        .map(|t| {
            let mut acc = BTreeMap::new();
            canonicalize_term(t, e.n, &e.free, geom, &mut acc)?;
            Ok(acc)
        })
        .collect();
    let mut acc: BTreeMap<Vec<Factor>, Q> = BTreeMap::new();
    for p in partials {
        for (k, v) in p? {
            *acc.entry(k).or_insert_with(Q::zero) += v;
        }
    }
    let mut out = TensorJetExpr::zero(e.n, e.free.clone());
    for (factors, c) in acc {
        out.push(Term::new(c, factors));
    }
    Ok(out)
}

/// Normal form together with the exact verdict whether the expression vanishes identically.
pub fn reduce(e: &TensorJetExpr) -> Result<(TensorJetExpr, bool)> {
    reduce_in(e, Geometry::Curved)
}

/// [`reduce`] in the given geometry.
pub fn reduce_in(e: &TensorJetExpr, geom: Geometry) -> Result<(TensorJetExpr, bool)> {
    let c = canonicalize_in(e, geom)?;
    let curved = c.terms.iter().any(|t| t.deg_r() > 0);
    let zero = vanishes_identically(&c, curved)?;
    Ok((c, zero))
}

/// Largest absolute coefficient (diagnostics for residuals).
pub fn max_abs_coeff(e: &TensorJetExpr) -> Q {
    e.terms.iter().map(|t| t.coeff.abs()).max().unwrap_or_else(Q::zero)
}


#[cfg(test)]
mod tests {
    use super::*;

    fn ex(n: usize, s: &str) -> TensorJetExpr {
        TensorJetExpr::parse(n, s).unwrap()
    }

    #[test]
    fn scalar_hessian_commutes() {
        assert!(canonicalize(&ex(4, "f;ij h;ij - f;ji h;ij")).unwrap().is_empty());
    }

    #[test]
    fn ricci_identity_on_gradients() {
        // v = df: v_{i;jk} − v_{i;kj} is a single curvature term
        let c = canonicalize(&ex(4, "f;ijk h;i h;j h;k - f;ikj h;i h;j h;k")).unwrap();
        assert!(c.is_empty());
        let c = canonicalize(&ex(4, "f;ijk h;ijk - f;ikj h;ijk")).unwrap();
        assert!(!c.is_empty() && c.terms.iter().all(|t| t.deg_r() >= 1));
        let (_, zero) = reduce(&c.sub(&ex(4, "R[kjil] f;l h;ijk")).unwrap()).unwrap();
        assert!(zero);
    }

    #[test]
    fn divergence_of_schouten() {
        let c = canonicalize(&ex(4, "rho[ab];a f;b - J;b f;b")).unwrap();
        assert!(c.is_empty());
        let c = canonicalize(&ex(4, "R[abcd];a f;b h;c k;d")).unwrap();
        let (_, zero) = reduce(&c.sub(&ex(4, "Ric[bd];c f;b h;c k;d - Ric[bc];d f;b h;c k;d")).unwrap()).unwrap();
        assert!(zero);
    }

    #[test]
    fn weyl_display_identity() {
        let lhs = ex(4, "f;i h;jkl W[ijkl]");
        let rhs = ex(4, "f;i h;j rho[kl] W[ikjl] + 1/2 f;i h;j W[iklm] W[jklm]");
        let (_, zero) = reduce(&lhs.sub(&rhs).unwrap()).unwrap();
        assert!(zero);
    }

    #[test]
    fn idempotent_and_linear() {
        let a = ex(4, "f;ijj h;i + 2 R[abcd] f;ac h;bd - f;abc h;cba + W[abcd] f;a h;b rho[cd]");
        let b = ex(4, "Ric[ab] f;a h;b - 3 J f;aa h + f;ba h;ab");
        let ca = canonicalize(&a).unwrap();
        assert_eq!(canonicalize(&ca).unwrap(), ca);
        let cb = canonicalize(&b).unwrap();
        let sum = canonicalize(&a.add(&b).unwrap()).unwrap();
        assert_eq!(sum, canonicalize(&ca.add(&cb).unwrap()).unwrap());
        let (_, zero) = reduce(&a.sub(&ca).unwrap()).unwrap();
        assert!(zero);
    }
}
