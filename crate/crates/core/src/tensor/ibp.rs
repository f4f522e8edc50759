//! Integration by parts on bilinear invariants and the operator-level checks built on it.
//!
//! Conventions: `Δ = δd = −∇^a∇_a` on functions and `δω = −ω_{a;a}` on 1-forms.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::canon::{canonicalize_in, reduce_in, Geometry};
use super::eval::{Evaluator, MetricModel};
use super::expr::{fresh_label, Factor, Head, Label, TensorJetExpr, Term};
use crate::algebra::{fmt_q, linalg, Monomial, MultiPoly, Q};
use crate::error::{Error, Result};
use crate::flat::{basis_contraction, decompose_invariant, BilinearCoeffTable, Contraction};

/// A linear differential operator `h ↦ P(h)`, stored as an expression in the jets of `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorExpr {
    pub expr: TensorJetExpr,
    pub leading: Q,
    pub geometry: Geometry,
}

impl OperatorExpr {
    /// Canonicalize `expr` (linear in `h`, every label contracted) and read off `c_n`.
    pub fn new(expr: &TensorJetExpr) -> Result<Self> {
        Self::in_geometry(expr, Geometry::of(expr))
    }

    pub fn in_geometry(expr: &TensorJetExpr, geometry: Geometry) -> Result<Self> {
        if !expr.free.is_empty() {
            return Err(Error::Structural("operator expression must be a scalar".into()));
        }
        for t in &expr.terms {
            if t.count_func('h') != 1 || t.factors.iter().any(|f| matches!(f.head, Head::Jet(c) if c != 'h')) {
                return Err(Error::Structural("operator expression must be linear in h alone".into()));
            }
        }
        let expr = canonicalize_in(expr, geometry)?;
        let leading = leading_coefficient(&expr);
        Ok(OperatorExpr { expr, leading, geometry })
    }

    /// `P` applied to the function `func`.
    pub fn apply_to(&self, func: char) -> TensorJetExpr {
        self.expr.rename_funcs(&[('h', func)])
    }

    pub fn order(&self) -> usize {
        self.expr.terms.iter().filter_map(|t| t.jet_factor('h').map(|(_, f)| f.order())).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        json!({ "expr": self.expr.to_json(), "leading_coefficient": fmt_q(&self.leading) })
    }
}

/// `c` in `P = c Δ^{n/2} + lot`: `(−1)^{n/2}` times the total coefficient of the curvature-free
/// terms carrying all `n` derivatives on `h` (they agree with `(−Δ)^{n/2}` modulo curvature).
pub fn leading_coefficient(p: &TensorJetExpr) -> Q {
    let order = p
        .terms
        .iter()
        .filter_map(|t| t.jet_factor('h').map(|(_, f)| f.order()))
        .max()
        .unwrap_or(0);
    if order == 0 || order % 2 == 1 {
        return Q::zero();
    }
    let mut c = Q::zero();
    for t in &p.terms {
        if t.factors.len() == 1 && t.factors[0].head == Head::Jet('h') && t.factors[0].order() == order {
            c += &t.coeff;
        }
    }
    if (order / 2) % 2 == 1 {
        -c
    } else {
        c
    }
}

/// Flat invariant table as a contraction expression in `f`, `h`.
pub fn flat_table_expr(t: &BilinearCoeffTable, order: u32) -> Result<TensorJetExpr> {
    let parts = decompose_invariant(t, order)?;
    let terms: Vec<Contraction> = parts
        .into_iter()
        .map(|((p, q, k), c)| {
            let b = basis_contraction(p, q, k);
            Contraction::new(c, &b.f_idx, &b.h_idx)
        })
        .collect();
    contractions_expr(t.n, &terms)
}

/// `Σ c f_{;I} h_{;J}` with letter labels.
pub fn contractions_expr(n: usize, terms: &[Contraction]) -> Result<TensorJetExpr> {
    let mut out = TensorJetExpr::zero(n, vec![]);
    for c in terms {
        let lab = |s: &str| -> Result<Vec<Label>> {
            s.chars()
                .map(|ch| {
                    if ch.is_ascii_lowercase() {
                        Ok(ch as u8 - b'a')
                    } else {
                        Err(Error::Structural(format!("bad label {}", ch)))
                    }
                })
                .collect()
        };
        out.push(Term::new(
            c.coeff.clone(),
            vec![Factor::jet('f', &lab(&c.f_idx)?), Factor::jet('h', &lab(&c.h_idx)?)],
        ));
    }
    out.validate()?;
    Ok(out)
}

fn check_bilinear(b: &TensorJetExpr) -> Result<()> {
    if !b.free.is_empty() {
        return Err(Error::Structural("bilinear form must be a scalar".into()));
    }
    for t in &b.terms {
        let other = t.factors.iter().any(|f| matches!(f.head, Head::Jet(c) if c != 'f' && c != 'h'));
        if t.count_func('f') != 1 || t.count_func('h') != 1 || other {
            return Err(Error::Structural("expression is not bilinear in f and h".into()));
        }
    }
    Ok(())
}

/// Move every derivative off `f`: `B = f·P(h) + W_{a;a}`. Returns `P` and the vector `W`
/// (free index returned separately).
///
/// Each step peels the last covariant derivative of `f`:
/// `f_{;Ia} X = (f_{;I} X)_{;a} − f_{;I} X_{;a}`, so no commutation is ever needed.
pub fn ibp_to_operator(b: &TensorJetExpr) -> Result<(OperatorExpr, TensorJetExpr, Label)> {
    check_bilinear(b)?;
    let geom = Geometry::of(b);
    let (p, w, label) = peel_f(b, geom)?;
    Ok((OperatorExpr::in_geometry(&p, geom)?, w, label))
}

fn peel_f(b: &TensorJetExpr, geom: Geometry) -> Result<(TensorJetExpr, TensorJetExpr, Label)> {
    let used: std::collections::BTreeSet<Label> =
        b.terms.iter().flat_map(|t| t.factors.iter().flat_map(|f| f.idx.iter().copied())).collect();
    let w = fresh_label(&used);
    let mut p = TensorJetExpr::zero(b.n, vec![]);
    let mut witness = TensorJetExpr::zero(b.n, vec![w]);
    let mut stack: Vec<Term> = b.terms.clone();
    while let Some(t) = stack.pop() {
        let (k, f) = t.jet_factor('f').ok_or_else(|| Error::Structural("term without f".into()))?;
        if f.order() == 0 {
            let factors = t.factors.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, g)| g.clone()).collect();
            p.push(Term::new(t.coeff.clone(), factors));
            continue;
        }
        let a = *f.idx.last().unwrap();
        let mut fi = f.clone();
        fi.idx.pop();
        let mut base = t.factors.clone();
        base[k] = fi;
        witness.push(Term::new(t.coeff.clone(), base.clone()).relabel(&|l| if l == a { w } else { l }));
        for j in 0..base.len() {
            if j == k || base[j].head == Head::Metric {
                continue;
            }
            let mut factors = base.clone();
            factors[j] = factors[j].with_deriv(a);
            stack.push(Term::new(-t.coeff.clone(), factors));
        }
    }
    Ok((p, canonicalize_in(&witness, geom)?, w))
}

/// Exact check of `f·P(h) + W_{a;a} − B ≡ 0`.
pub fn verify_ibp(b: &TensorJetExpr, p: &OperatorExpr, w: &TensorJetExpr, label: Label) -> Result<bool> {
    let fp = p.expr.times_factor(Factor::jet('f', &[]));
    let div = w.derivative(label)?;
    let (_, zero) = reduce_in(&fp.add(&div)?.sub(b)?, p.geometry.join(Geometry::of(b)))?;
    Ok(zero)
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub pass: bool,
    /// Canonical residual (empty on success when the structural normal form already vanishes).
    pub residual: TensorJetExpr,
    /// Divergence witness, when the check produces one.
    pub witness: Option<TensorJetExpr>,
}

/// `P(fh) − f P(h) − h P(f) + 2 B(f,h) ≡ 0`.
pub fn check_identity_vi(p: &OperatorExpr, b: &TensorJetExpr) -> Result<CheckReport> {
    let pfh = p.expr.substitute_product('h', 'f', 'h');
    let fph = p.apply_to('h').times_factor(Factor::jet('f', &[]));
    let hpf = p.apply_to('f').times_factor(Factor::jet('h', &[]));
    let e = pfh.sub(&fph)?.sub(&hpf)?.add(&b.scale(&Q::from_integer(2.into())))?;
    let (residual, pass) = reduce_in(&e, p.geometry.join(Geometry::of(b)))?;
    Ok(CheckReport { pass, residual, witness: None })
}

/// `f P(h) − h P(f)` is a total divergence: integrating by parts leaves `f·Q(h)` with `Q ≡ 0`.
pub fn check_selfadjoint(p: &OperatorExpr) -> Result<CheckReport> {
    let fph = p.apply_to('h').times_factor(Factor::jet('f', &[]));
    let hpf = p.apply_to('f').times_factor(Factor::jet('h', &[]));
    let e = fph.sub(&hpf)?;
    let (q, w, _) = peel_f(&e, p.geometry)?;
    let (residual, pass) = reduce_in(&q, p.geometry)?;
    // f P(h) − h P(f) = f Q(h) + W_{a;a}
    Ok(CheckReport { pass, residual, witness: Some(w) })
}

/// Hochschild coboundary of `φ(f₀,f₁,f₂) = f₀ B(f₁,f₂)`:
/// `(bφ)(f₀,…,f₃) = f₀ G` with `G = f₁B(f₂,f₃) − B(f₁f₂,f₃) + B(f₁,f₂f₃) − B(f₁,f₂)f₃`.
/// Since `f₀` enters undifferentiated, `f₀G` is a total divergence exactly when `G ≡ 0`.
pub fn check_cocycle(b: &TensorJetExpr) -> Result<CheckReport> {
    check_bilinear(b)?;
    let bb = |x: char, y: char| b.rename_funcs(&[('f', x), ('h', y)]);
    let one = Factor::jet;
    let t1 = bb('l', 'm').times_factor(one('k', &[]));
    let t2 = bb('p', 'm').substitute_product('p', 'k', 'l');
    let t3 = bb('k', 'p').substitute_product('p', 'l', 'm');
    let t4 = bb('k', 'l').times_factor(one('m', &[]));
    let g = t1.sub(&t2)?.add(&t3)?.sub(&t4)?;
    let (residual, pass) = reduce_in(&g, Geometry::of(b))?;
    let witness = TensorJetExpr::zero(b.n, vec![fresh_label(&Default::default())]);
    Ok(CheckReport { pass, residual, witness: if pass { Some(witness) } else { None } })
}

/// `P = δ S d` on functions: `P(h) = −(S dh)_{a;a}` with `S = s (dδ)^{n/2−1} + lot`.
#[derive(Clone, Debug)]
pub struct SnForm {
    /// Coefficient of `(dδ)^{n/2−1}`.
    pub leading: Q,
    /// `S(dh)` as a 1-form in the jets of `h` and curvature (free index `label`).
    pub s_of_dh: TensorJetExpr,
    /// Lower-order part of `S(dh)`.
    pub lot: TensorJetExpr,
    pub label: Label,
}

fn vector_basis(n: usize, order: usize, curved: bool) -> Result<(Vec<TensorJetExpr>, Label)> {
    let a: Label = 0;
    let mut idx: Vec<Label> = Vec::new();
    for k in 0..(order - 1) / 2 {
        let l = 1 + k as Label;
        idx.push(l);
        idx.push(l);
    }
    idx.push(a);
    let lead = TensorJetExpr::from_terms(n, vec![a], vec![Term::new(Q::one(), vec![Factor::jet('h', &idx)])])?;
    let mut basis = vec![lead];
    if curved {
        if order != 3 {
            return Err(Error::Unsupported("curved δSd decomposition is implemented for n = 4".into()));
        }
        basis.push(TensorJetExpr::from_terms(
            n,
            vec![a],
            vec![Term::new(Q::one(), vec![Factor::new(Head::Rho, &[a, 1], &[]), Factor::jet('h', &[1])])],
        )?);
        basis.push(TensorJetExpr::from_terms(
            n,
            vec![a],
            vec![Term::new(Q::one(), vec![Factor::new(Head::J, &[], &[]), Factor::jet('h', &[a])])],
        )?);
    }
    Ok((basis, a))
}

/// Solve `Σ c_k E_k ≡ target` exactly in the given model.
pub fn fit_linear(model: MetricModel, basis: &[TensorJetExpr], target: &MultiPoly) -> Result<Option<Vec<Q>>> {
    let Some(first) = basis.first() else {
        return Ok(if target.is_zero() { Some(vec![]) } else { None });
    };
    let order = basis.iter().map(super::eval::required_order).max().unwrap_or(2);
    let ev = Evaluator::new(first.n, model, order)?;
    let values: Vec<MultiPoly> = basis.iter().map(|b| ev.evaluate(b)).collect::<Result<_>>()?;
    Ok(solve_poly_system(&values, target))
}

/// Coefficients `c` with `Σ c_k v_k = target`, monomial by monomial.
pub fn solve_poly_system(values: &[MultiPoly], target: &MultiPoly) -> Option<Vec<Q>> {
    let mut rows: BTreeMap<Monomial, usize> = BTreeMap::new();
    for p in values.iter().chain(std::iter::once(target)) {
        for (m, _) in p.terms() {
            let len = rows.len();
            rows.entry(m.clone()).or_insert(len);
        }
    }
    let mut a = vec![vec![Q::zero(); values.len()]; rows.len()];
    let mut rhs = vec![Q::zero(); rows.len()];
    for (k, p) in values.iter().enumerate() {
        for (m, c) in p.terms() {
            if !c.im.is_zero() {
                return None;
            }
            a[rows[m]][k] = c.re.clone();
        }
    }
    for (m, c) in target.terms() {
        if !c.im.is_zero() {
            return None;
        }
        rhs[rows[m]] = c.re.clone();
    }
    linalg::solve(&a, &rhs)
}

/// Exhibit `P = δ S d` by solving `P = −(S dh)_{a;a}` over a basis of 1-forms in the jets of `h`.
pub fn extract_sn_form(p: &OperatorExpr) -> Result<SnForm> {
    let n = p.expr.n;
    if p.expr.terms.iter().any(|t| t.jet_factor('h').map(|(_, f)| f.order()) == Some(0)) {
        return Err(Error::Decomposition("P has a zeroth-order term, so it is not of the form δSd".into()));
    }
    let order = p.order();
    if order < 2 || order % 2 == 1 {
        return Err(Error::Decomposition(format!("P has order {}, expected a positive even order", order)));
    }
    let curved = p.geometry == Geometry::Curved;
    let (basis, a) = vector_basis(n, order - 1, curved)?;
    let divs: Vec<TensorJetExpr> = basis.iter().map(|y| y.derivative(a)).collect::<Result<_>>()?;
    let model = if curved { MetricModel::FreeJets } else { MetricModel::Flat };
    let order_needed = divs.iter().chain(std::iter::once(&p.expr)).map(super::eval::required_order).max().unwrap();
    let ev = Evaluator::new(n, model, order_needed)?;
    let values: Vec<MultiPoly> = divs.iter().map(|d| ev.evaluate(d)).collect::<Result<_>>()?;
    let target = ev.evaluate(&p.expr)?;
    let c = solve_poly_system(&values, &target)
        .ok_or_else(|| Error::Decomposition("P is not a divergence of a 1-form in dh".into()))?;
    // S(dh) = −Y, Y = Σ c_k basis_k; (dδ)^k dh = (−1)^k h_{;(bb)^k a}
    let k = order / 2 - 1;
    let sign = if k % 2 == 0 { Q::one() } else { -Q::one() };
    let leading = -(&c[0]) * &sign;
    let mut s_of_dh = TensorJetExpr::zero(n, vec![a]);
    let mut lot = TensorJetExpr::zero(n, vec![a]);
    for (j, (ck, y)) in c.iter().zip(&basis).enumerate() {
        let part = y.scale(&-ck.clone());
        s_of_dh = s_of_dh.add(&part)?;
        if j > 0 {
            lot = lot.add(&part)?;
        }
    }
    Ok(SnForm { leading, s_of_dh: canonicalize_in(&s_of_dh, p.geometry)?, lot: canonicalize_in(&lot, p.geometry)?, label: a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::qi;

    fn ex(n: usize, s: &str) -> TensorJetExpr {
        TensorJetExpr::parse(n, s).unwrap()
    }

    #[test]
    fn one_step_parts() {
        let b = ex(4, "f;i h;i");
        let (p, w, l) = ibp_to_operator(&b).unwrap();
        assert_eq!(p.expr, canonicalize_in(&ex(4, "- h;aa"), Geometry::Flat).unwrap());
        assert_eq!(p.leading, qi(1));
        assert!(verify_ibp(&b, &p, &w, l).unwrap());
    }

    #[test]
    fn round_trip_with_curvature() {
        let b = ex(4, "-4 f;ijj h;i - 4 f;ij h;ij + 16 J f;i h;i + 3 rho[ij] f;i h;j");
        let (p, w, l) = ibp_to_operator(&b).unwrap();
        assert!(verify_ibp(&b, &p, &w, l).unwrap());
        assert!(ibp_to_operator(&ex(4, "f;i f;i")).is_err());
    }

    #[test]
    fn laplacian_is_selfadjoint_and_gradient_field_is_not() {
        let p = OperatorExpr::in_geometry(&ex(4, "- h;aa"), Geometry::Curved).unwrap();
        let r = check_selfadjoint(&p).unwrap();
        assert!(r.pass);
        assert!(!r.witness.unwrap().is_empty());
        let p = OperatorExpr::new(&ex(4, "J;i h;i")).unwrap();
        assert!(!check_selfadjoint(&p).unwrap().pass);
    }

    #[test]
    fn leading_coefficient_of_powers() {
        assert_eq!(leading_coefficient(&ex(4, "2 h;aabb")), qi(2));
        assert_eq!(leading_coefficient(&ex(6, "4 h;aabbcc")), qi(-4));
        assert_eq!(leading_coefficient(&TensorJetExpr::zero(4, vec![])), qi(0));
    }

    #[test]
    fn sn_form_of_bilaplacian() {
        let p = OperatorExpr::new(&ex(4, "2 h;aabb")).unwrap();
        let s = extract_sn_form(&p).unwrap();
        assert_eq!(s.leading, qi(2));
        assert!(s.lot.is_empty());
        let bad = OperatorExpr::new(&ex(4, "2 h;aabb + J J h")).unwrap();
        assert!(matches!(extract_sn_form(&bad), Err(Error::Decomposition(_))));
    }

    #[test]
    fn cocycle_and_perturbations() {
        let b = ex(4, "-4 f;ijj h;i - 4 f;i h;ijj - 4 f;ij h;ij - 2 f;ii h;jj");
        assert!(check_cocycle(&b).unwrap().pass);
        // a constant symbol is itself a cocycle; a Laplacian on one argument is not
        assert!(check_cocycle(&b.add(&ex(4, "f h")).unwrap()).unwrap().pass);
        assert!(!check_cocycle(&b.add(&ex(4, "f h;aa")).unwrap()).unwrap().pass);
    }
}
