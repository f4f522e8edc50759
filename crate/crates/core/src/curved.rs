//! Curved-metric symbol calculus at the origin of Riemannian normal coordinates.
//!
//! The metric is expanded to second order, `g_{ij} = δ_{ij} − ⅓ R_{ikjl} x^k x^l`, with the
//! Riemann tensor carried as formal symbols and every product truncated to first order in
//! curvature. Conventions: `R_{ijij} = +1` on the unit sphere, `Rc_{bd} = R_{abad}`.

use std::collections::BTreeMap;

use crate::algebra::{enumerate_multiindices, Func, GaussianRational, Monomial, MultiIndex, MultiPoly, Sym};
use crate::flat::{basis_contraction, invariant_basis, reference_b4_flat};
use crate::tensor::canon::canonicalize;
use crate::tensor::ibp::{contractions_expr, fit_linear, solve_poly_system};
use crate::tensor::{Evaluator, MetricModel, TensorJetExpr};
use crate::error::{Error, Result};
use crate::forms::{epsilon, inverse_norm_series, iota, iota_vector, unit_covector, xi_covector, FormOperator};
use crate::sphere::integrate_poly;
use crate::symbol::{residue_trace_by_jets, GradedSymbol, HomogSymbol, Truncation};

/// Base-variable order to which the metric is expanded.
pub const METRIC_ORDER: u32 = 2;

/// Truncation used by the curved engine: quadratic Taylor order, linear in curvature.
pub const CURVED_TRUNCATION: Truncation = Truncation { max_x: METRIC_ORDER, max_curvature: 1 };

/// `R_{abcd}` as a signed combination of canonical components.
///
/// Canonical components have `a < b`, `c < d`, `(a,b) ≤ (c,d)`; for four distinct indices
/// `p < q < r < s` the component `R_{psqr}` is eliminated by the first Bianchi identity
/// `R_{psqr} = R_{prqs} − R_{pqrs}`.
pub fn riemann_canonical(a: u8, b: u8, c: u8, d: u8) -> Vec<([u8; 4], i64)> {
    if a == b || c == d {
        return Vec::new();
    }
    let mut sign = 1;
    let (a, b) = if a < b { (a, b) } else { sign = -sign; (b, a) };
    let (c, d) = if c < d { (c, d) } else { sign = -sign; (d, c) };
    let (a, b, c, d) = if (a, b) <= (c, d) { (a, b, c, d) } else { (c, d, a, b) };
    let distinct = a != c && a != d && b != c && b != d;
    if distinct {
        let mut s = [a, b, c, d];
        s.sort_unstable();
        let [p, q, r, t] = s;
        if [a, b, c, d] == [p, t, q, r] {
            return vec![([p, r, q, t], sign), ([p, q, r, t], -sign)];
        }
    }
    vec![([a, b, c, d], sign)]
}

/// Canonical Riemann components in dimension `n`.
pub fn canonical_components(n: usize) -> Vec<[u8; 4]> {
    let mut out = std::collections::BTreeSet::new();
    let n = n as u8;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    for (k, _) in riemann_canonical(a, b, c, d) {
                        out.insert(k);
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// `R_{abcd}` as a polynomial in the canonical curvature symbols.
pub fn riemann(nxi: usize, nx: usize, a: u8, b: u8, c: u8, d: u8) -> MultiPoly {
    let mut p = MultiPoly::zero(nxi, nx);
    for (k, s) in riemann_canonical(a, b, c, d) {
        p.add_scaled(&MultiPoly::sym(nxi, nx, Sym::Curv(k)), &GaussianRational::from_int(s));
    }
    p
}

/// `Rc_{bd} = Σ_a R_{abad}`.
pub fn ricci(n: usize, nxi: usize, nx: usize, b: u8, d: u8) -> MultiPoly {
    let mut p = MultiPoly::zero(nxi, nx);
    for a in 0..n as u8 {
        p.add_assign(&riemann(nxi, nx, a, b, a, d));
    }
    p
}

pub fn scalar_curvature(n: usize, nxi: usize, nx: usize) -> MultiPoly {
    let mut p = MultiPoly::zero(nxi, nx);
    for b in 0..n as u8 {
        p.add_assign(&ricci(n, nxi, nx, b, b));
    }
    p
}

/// Metric, inverse metric and Christoffel symbols in normal coordinates, as polynomials in
/// `n` cotangent and `n` base variables.
#[derive(Clone, Debug)]
pub struct NormalChart {
    pub n: usize,
    pub g: Vec<Vec<MultiPoly>>,
    pub g_inv: Vec<Vec<MultiPoly>>,
    /// `gamma[k][i][j] = Γ^k_{ij}`
    pub gamma: Vec<Vec<Vec<MultiPoly>>>,
}

impl NormalChart {
    pub fn new(n: usize) -> Self {
        let quad = |i: usize, j: usize, s: i64| {
            let mut p = MultiPoly::zero(n, n);
            for k in 0..n {
                for l in 0..n {
                    let r = riemann(n, n, i as u8, k as u8, j as u8, l as u8);
                    if r.is_zero() {
                        continue;
                    }
                    let xx = MultiPoly::x_var(n, n, k).mul(&MultiPoly::x_var(n, n, l));
                    p.add_scaled(&r.mul(&xx), &GaussianRational::real(crate::algebra::q(s, 3)));
                }
            }
            p
        };
        let delta = |i: usize, j: usize| if i == j { MultiPoly::one(n, n) } else { MultiPoly::zero(n, n) };
        let g: Vec<Vec<MultiPoly>> =
            (0..n).map(|i| (0..n).map(|j| delta(i, j).sub(&quad(i, j, 1))).collect()).collect();
        let g_inv: Vec<Vec<MultiPoly>> =
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut p = delta(i, j);
                            p.add_assign(&quad(i, j, 1));
                            p
                        })
                        .collect()
                })
                .collect();
        let half = GaussianRational::real(crate::algebra::q(1, 2));
        let gamma = (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let mut p = g[j][k].partial_x(i);
                                p.add_assign(&g[i][k].partial_x(j));
                                p = p.sub(&g[i][j].partial_x(k));
                                p.scale(&half)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        NormalChart { n, g, g_inv, gamma }
    }
}

fn keep_for(order: u32) -> impl Fn(&Monomial) -> bool {
    move |m: &Monomial| m.x_degree() <= order && m.curvature_degree() <= 1
}

fn truncate_op(op: &FormOperator, order: u32) -> FormOperator {
    let keep = keep_for(order);
    op.map(|e| e.filter(&keep))
}

/// Symbol of `d : Λ^m → Λ^{m+1}`: `i ε_ξ`, exact.
pub fn symbol_d(chart: &NormalChart, m: usize) -> GradedSymbol {
    let xi = xi_covector(chart.n, chart.n);
    let op = epsilon(&xi, m).scale(&GaussianRational::i());
    GradedSymbol::from_homog(HomogSymbol::new(op, 1))
}

/// Symbol of `δ : Λ^{m+1} → Λ^m`, `δ = −g^{ab} ι_b (∂_a − Γ^c_{ad} ε_d ι_c)`.
pub fn symbol_delta(chart: &NormalChart, m: usize) -> Result<GradedSymbol> {
    let n = chart.n;
    let xi = xi_covector(n, n);
    let lead = iota(&xi, &chart.g_inv, m + 1)?.scale(&GaussianRational::i().scale(&crate::algebra::qi(-1)));
    let keep = keep_for(METRIC_ORDER);
    let mut zeroth = FormOperator::zero(n, m, m + 1, n, n);
    for a in 0..n {
        for b in 0..n {
            let gab = &chart.g_inv[a][b];
            if gab.is_zero() {
                continue;
            }
            let ib = iota_vector(&unit_covector(n, b, n, n), m + 1);
            for c in 0..n {
                let ic = iota_vector(&unit_covector(n, c, n, n), m + 1);
                for d in 0..n {
                    let coeff = gab.mul_truncated(&chart.gamma[c][a][d], &keep);
                    if coeff.is_zero() {
                        continue;
                    }
                    let ed = epsilon(&unit_covector(n, d, n, n), m);
                    let chain = ib.compose(&ed)?.compose(&ic)?;
                    zeroth = zeroth.add(&chain.mul_poly(&coeff))?;
                }
            }
        }
    }
    let mut s = GradedSymbol::new(n, m, m + 1, n, n, None);
    s.insert(HomogSymbol::new(truncate_op(&lead, METRIC_ORDER), 1), METRIC_ORDER);
    if !zeroth.is_zero() {
        s.insert(HomogSymbol::new(truncate_op(&zeroth, METRIC_ORDER - 1), 0), METRIC_ORDER - 1);
    }
    Ok(s.with_truncation(CURVED_TRUNCATION))
}

/// Exact product of two differential-operator symbols (both polynomial in ξ).
fn compose_differential(a: &GradedSymbol, b: &GradedSymbol) -> Result<GradedSymbol> {
    let mut out = GradedSymbol::new(a.n, a.row_grade, b.col_grade, a.nxi(), a.nx(), None);
    let keep = keep_for(METRIC_ORDER);
    let mut acc: BTreeMap<i32, (FormOperator, u32)> = BTreeMap::new();
    for (&da, ha) in a.components() {
        for (&db, hb) in b.components() {
            for k in 0..=da.max(0) as u32 {
                for alpha in enumerate_multiindices(a.n, k) {
                    let left = ha.d_xi(&alpha);
                    if left.is_zero() {
                        continue;
                    }
                    let right = hb.d_x(&alpha);
                    if right.is_zero() {
                        continue;
                    }
                    let prod = left.op().compose_with(right.op(), &keep)?;
                    let w = GaussianRational::real(crate::algebra::Q::new(1.into(), alpha.factorial()));
                    let d = da + db - k as i32;
                    let order = a.x_order(da).min(b.x_order(db).saturating_sub(k));
                    let e = acc
                        .entry(d)
                        .or_insert_with(|| (FormOperator::zero(a.n, a.row_grade, b.col_grade, a.nxi(), a.nx()), order));
                    e.0.add_assign_scaled(&prod, &w);
                    e.1 = e.1.min(order);
                }
            }
        }
    }
    for (d, (op, order)) in acc {
        if !op.is_zero() {
            out.insert(HomogSymbol::new(truncate_op(&op, order), d), order);
        }
    }
    Ok(out.with_truncation(CURVED_TRUNCATION))
}

/// Symbols of the Hodge Laplacian `Δ = dδ + δd` and of `dδ` on `Λ^m`.
pub fn laplacian_symbols(chart: &NormalChart, m: usize) -> Result<(GradedSymbol, GradedSymbol)> {
    if m == 0 || m >= chart.n {
        return Err(Error::Precondition(format!("form degree {} must lie strictly between 0 and {}", m, chart.n)));
    }
    let d_lo = symbol_d(chart, m - 1);
    let delta_lo = symbol_delta(chart, m - 1)?;
    let d_hi = symbol_d(chart, m);
    let delta_hi = symbol_delta(chart, m)?;
    let d_delta = compose_differential(&d_lo, &delta_lo)?;
    let delta_d = compose_differential(&delta_hi, &d_hi)?;
    Ok((d_delta.add(&delta_d)?, d_delta))
}

/// Symbol of the projection `𝒟 = Δ⁻¹ dδ` onto exact forms in `Λ^m`, degrees `0, −1, …, −depth`,
/// with component `−k` kept to base-variable order `METRIC_ORDER − k`.
///
/// Solves `σ(Δ) ∘ σ(𝒟) = σ(dδ)` degree by degree:
/// `σ_{−r}(𝒟) = ⟨ξ,ξ⟩_g⁻¹ (σ_{2−r}(dδ) − Σ' (1/α!) ∂_ξ^α σ_{2−j}(Δ) D_x^α σ_{−k}(𝒟))`,
/// the sum over `j + |α| + k = r`, `k < r`.
pub fn projection_symbol(chart: &NormalChart, m: usize, depth: u32) -> Result<GradedSymbol> {
    if depth > METRIC_ORDER {
        return Err(Error::TruncationUnsound(format!(
            "metric expanded to order {} determines at most {} lower components",
            METRIC_ORDER, METRIC_ORDER
        )));
    }
    let n = chart.n;
    let (lap, d_delta) = laplacian_symbols(chart, m)?;
    let xi = xi_covector(n, n);
    let mut comps: Vec<HomogSymbol> = Vec::new();
    for r in 0..=depth {
        let order = METRIC_ORDER - r;
        let keep = keep_for(order);
        let mut acc = d_delta.component(2 - r as i32)?.op().clone();
        for k in 0..r {
            for j in 0..=(r - k) {
                let a = r - k - j;
                let lj = lap.component(2 - j as i32)?;
                if lj.is_zero() {
                    continue;
                }
                for alpha in enumerate_multiindices(n, a) {
                    let left = lj.d_xi(&alpha);
                    if left.is_zero() {
                        continue;
                    }
                    let right = comps[k as usize].d_x(&alpha);
                    if right.is_zero() {
                        continue;
                    }
                    let prod = left.op().compose_with(right.op(), &keep)?;
                    let w = GaussianRational::real(crate::algebra::Q::new((-1).into(), alpha.factorial()));
                    acc.add_assign_scaled(&prod, &w);
                }
            }
        }
        let inv = inverse_norm_series(&xi, &chart.g_inv, order)?;
        let op = acc.map(|e| if e.is_zero() { e.clone() } else { e.mul_truncated(&inv, &keep) });
        comps.push(HomogSymbol::new(op, -(r as i32)));
    }
    let mut s = GradedSymbol::new(n, m, m, n, n, Some(-(depth as i32)));
    for (r, c) in comps.into_iter().enumerate() {
        s.insert(c, METRIC_ORDER - r as u32);
    }
    Ok(s.with_truncation(CURVED_TRUNCATION))
}

/// Symbol of `F = 2𝒟 − 1` on middle-degree forms, to the depth the dimension-`n` residue reads.
pub fn f_symbol(chart: &NormalChart) -> Result<GradedSymbol> {
    let n = chart.n;
    if n % 2 == 1 || n < 2 {
        return Err(Error::Precondition(format!("dimension must be even, got {}", n)));
    }
    let m = n / 2;
    let depth = (n as u32).saturating_sub(2);
    let p = projection_symbol(chart, m, depth)?;
    let two = GaussianRational::from_int(2);
    let mut s = GradedSymbol::new(n, m, m, n, n, p.floor());
    for (&d, h) in p.components() {
        let mut op = h.op().scale(&two);
        if d == 0 {
            op = op.sub(&FormOperator::identity(n, m, n, n))?;
        }
        s.insert(HomogSymbol::new(op, d), p.x_order(d));
    }
    Ok(s.with_truncation(CURVED_TRUNCATION))
}

/// Bilinear table of `∫ tr σ_{−n}([F,f][F,h])` at the origin of normal coordinates:
/// `(∂-jet of f, ∂-jet of h) ↦` polynomial in the canonical curvature symbols.
pub type CurvedTable = BTreeMap<(MultiIndex, MultiIndex), MultiPoly>;

pub fn bn_curved_table(n: usize) -> Result<CurvedTable> {
    if n != 4 {
        return Err(Error::Unsupported(format!(
            "curved computation is implemented for n = 4 (metric order {}), got n = {}",
            METRIC_ORDER, n
        )));
    }
    let chart = NormalChart::new(n);
    let f = f_symbol(&chart)?;
    let traces = residue_trace_by_jets(&f, n)?;
    let mut out = CurvedTable::new();
    for (k, p) in traces {
        let v = integrate_poly(&p, n);
        if v.terms().any(|(_, c)| !c.is_real()) {
            return Err(Error::Consistency(format!("imaginary coefficient at {:?}", k)));
        }
        if !v.is_zero() {
            out.insert(k, v);
        }
    }
    Ok(out)
}

/// Metric jets in normal coordinates; only the quadratic, curvature-linear order is modelled.
pub fn metric_normal_jets(n: usize, order: u32) -> Result<NormalChart> {
    if order > METRIC_ORDER {
        return Err(Error::Unsupported(format!(
            "metric jets of order {} need derivatives of curvature; supported order is ≤ {}",
            order, METRIC_ORDER
        )));
    }
    Ok(NormalChart::new(n))
}

/// The table as a polynomial `Σ v_{αβ} ∂^α f ∂^β h` at the origin of the normal chart.
pub fn table_poly(t: &CurvedTable, n: usize) -> Result<MultiPoly> {
    let mut out = MultiPoly::zero(0, n);
    for ((a, b), v) in t {
        let mut coeff = MultiPoly::zero(0, n);
        for (m, c) in v.terms() {
            if m.xi_degree() != 0 || m.x_degree() != 0 {
                return Err(Error::Consistency("table entry depends on ξ or x".into()));
            }
            let mut mm = Monomial::one(0, n);
            mm.syms = m.syms.clone();
            coeff.add_term(mm, c.clone());
        }
        let jets = MultiPoly::jet(0, n, Func('f'), a.clone()).mul(&MultiPoly::jet(0, n, Func('h'), b.clone()));
        out.add_assign(&coeff.mul(&jets));
    }
    Ok(out)
}

/// Invariant bilinear expressions of weight 4 in `f`, `h`: flat contractions, then `ρ(df,dh)`
/// and `J⟨df,dh⟩`.
pub fn weight_four_basis(n: usize) -> Result<Vec<TensorJetExpr>> {
    let mut out = Vec::new();
    for (p, q, k) in invariant_basis(4) {
        out.push(contractions_expr(n, &[basis_contraction(p, q, k)])?);
    }
    out.extend(curvature_basis(n, 4)?);
    Ok(out)
}

/// Curvature terms of weight `n` with at least one derivative on each of `f`, `h`.
fn curvature_basis(n: usize, weight: usize) -> Result<Vec<TensorJetExpr>> {
    match weight {
        2 => Ok(vec![]),
        4 => Ok(vec![TensorJetExpr::parse(n, "rho[ab] f;a h;b")?, TensorJetExpr::parse(n, "J f;a h;a")?]),
        _ => Err(Error::Unsupported(format!("curvature basis of weight {} is not implemented", weight))),
    }
}

/// Whether `e`, evaluated at the origin of the normal chart, reproduces the table exactly.
pub fn expr_matches_table(e: &TensorJetExpr, t: &CurvedTable) -> Result<bool> {
    let ev = Evaluator::new(e.n, MetricModel::NormalLinear, 2)?;
    Ok(ev.evaluate(e)?.sub(&table_poly(t, e.n)?).is_zero())
}

/// `B₄` as a covariant expression: the table fitted exactly to [`weight_four_basis`].
pub fn bn_curved(n: usize) -> Result<TensorJetExpr> {
    let table = bn_curved_table(n)?;
    bn_curved_from_table(&table, n)
}

pub fn bn_curved_from_table(table: &CurvedTable, n: usize) -> Result<TensorJetExpr> {
    let basis = weight_four_basis(n)?;
    let target = table_poly(table, n)?;
    let c = fit_linear(MetricModel::NormalLinear, &basis, &target)?
        .ok_or_else(|| Error::Decomposition("curved table is not an invariant of weight 4".into()))?;
    let mut out = TensorJetExpr::zero(n, vec![]);
    for (ck, b) in c.iter().zip(&basis) {
        out = out.add(&b.scale(ck))?;
    }
    let out = canonicalize(&out)?;
    if !out.homogeneity_audit(n) {
        return Err(Error::Consistency(format!("weights {:?} in B_{}", out.weights(), n)));
    }
    if !expr_matches_table(&out, table)? {
        return Err(Error::Consistency("fitted expression does not reproduce the table".into()));
    }
    Ok(out)
}

/// The reference four-dimensional curved form: flat display plus `8⟨df,dh⟩J`.
pub fn reference_b4_curved() -> Result<TensorJetExpr> {
    let flat = contractions_expr(4, &reference_b4_flat())?;
    canonicalize(&flat.add(&TensorJetExpr::parse(4, "8 J f;a h;a")?)?)
}

/// Extend a flat bilinear invariant to conformally flat metrics `ĝ = e^{2η}δ`.
///
/// Conformal invariance of the residue density gives `B̂(f,h) = e^{−nη} B_flat(f,h)` with
/// `B_flat` in coordinate partials. At a point where `η = 0` the covariant expression
/// `B_flat(∇f,∇h) + Σ c_k C_k` (with `C_k` the curvature terms of the same weight) must
/// equal `B_flat(∂f,∂h)` for every jet of `η`; the `c_k` are solved for exactly.
pub fn invariantize_conformally_flat(flat: &TensorJetExpr, n: usize) -> Result<TensorJetExpr> {
    if flat.n != n {
        return Err(Error::DimensionMismatch(format!("expression in dimension {}, asked for {}", flat.n, n)));
    }
    if flat.terms.iter().any(|t| t.deg_r() > 0) {
        return Err(Error::Precondition("input must be curvature-free".into()));
    }
    let basis = curvature_basis(n, n)?;
    let order = crate::tensor::eval::required_order(flat).max(2);
    let cf = Evaluator::new(n, MetricModel::ConformallyFlat, order)?;
    let euclid = Evaluator::new(n, MetricModel::Flat, 0)?;
    let target = euclid.evaluate(flat)?.sub(&cf.evaluate(flat)?);
    let values: Vec<MultiPoly> = basis.iter().map(|b| cf.evaluate(b)).collect::<Result<_>>()?;
    let c = solve_poly_system(&values, &target).ok_or_else(|| {
        Error::InvarianceFailure("no curvature completion makes the flat expression conformally invariant".into())
    })?;
    let mut out = flat.clone();
    for (ck, b) in c.iter().zip(&basis) {
        out = out.add(&b.scale(ck))?;
    }
    canonicalize(&out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat::bn_flat_direct;
    use crate::symbol::compose;
    use num_traits::Zero;

    #[test]
    fn riemann_symmetries() {
        let n = 4u8;
        let val = |a, b, c, d| {
            let mut v: BTreeMap<[u8; 4], i64> = BTreeMap::new();
            for (k, s) in riemann_canonical(a, b, c, d) {
                *v.entry(k).or_default() += s;
            }
            v.retain(|_, s| *s != 0);
            v
        };
        let neg = |m: BTreeMap<[u8; 4], i64>| m.into_iter().map(|(k, s)| (k, -s)).collect::<BTreeMap<_, _>>();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        assert_eq!(val(a, b, c, d), neg(val(b, a, c, d)));
                        assert_eq!(val(a, b, c, d), val(c, d, a, b));
                        let mut sum: BTreeMap<[u8; 4], i64> = BTreeMap::new();
                        for (x, y, z) in [(b, c, d), (c, d, b), (d, b, c)] {
                            for (k, s) in val(a, x, y, z) {
                                *sum.entry(k).or_default() += s;
                            }
                        }
                        assert!(sum.values().all(|s| *s == 0));
                    }
                }
            }
        }
        assert_eq!(canonical_components(4).len(), 20);
        assert_eq!(canonical_components(3).len(), 6);
    }

    #[test]
    fn laplacian_principal_part_is_metric_norm() {
        let chart = NormalChart::new(4);
        let (lap, _) = laplacian_symbols(&chart, 2).unwrap();
        let xi = xi_covector(4, 4);
        let norm = crate::forms::metric_norm_sq(&xi, &chart.g_inv);
        let want = FormOperator::scalar(4, 2, norm);
        assert!(lap.component(2).unwrap().op().eq_rational(&want));
    }

    #[test]
    fn projection_is_idempotent() {
        let chart = NormalChart::new(4);
        let p = projection_symbol(&chart, 2, 2).unwrap();
        let pp = compose(&p, &p, Some(-2)).unwrap();
        for d in [0, -1, -2] {
            let lhs = pp.component(d).unwrap();
            let keep = keep_for(METRIC_ORDER - (-d) as u32);
            let a = lhs.op().map(|e| e.filter(&keep));
            let b = p.component(d).unwrap().op().map(|e| e.filter(&keep));
            assert!(a.eq_rational(&b), "degree {}", d);
        }
    }

    #[test]
    fn lower_components_vanish_at_origin_to_first_order() {
        let chart = NormalChart::new(4);
        let p = projection_symbol(&chart, 2, 2).unwrap();
        assert!(p.component(-1).unwrap().at_origin().is_zero_rational());
    }

    #[test]
    fn flat_part_matches_flat_engine() {
        let t = bn_curved_table(4).unwrap();
        let flat = bn_flat_direct(4).unwrap();
        let mut seen = 0;
        for ((a, b), v) in &t {
            let c0: MultiPoly = v.filter(|m| m.syms.is_empty());
            let got = c0.as_constant().unwrap();
            assert_eq!(got.re, flat.get(a, b), "{:?} {:?}", a, b);
            if !got.re.is_zero() {
                seen += 1;
            }
        }
        assert_eq!(seen, flat.len());
    }

    #[test]
    fn curved_table_as_invariant_expression() {
        let table = bn_curved_table(4).unwrap();
        let b = bn_curved_from_table(&table, 4).unwrap();
        assert!(b.homogeneity_audit(4));
        let flat = canonicalize(&contractions_expr(4, &reference_b4_flat()).unwrap().scale(&crate::algebra::qi(2))).unwrap();
        let want = canonicalize(&flat.add(&TensorJetExpr::parse(4, "16 J f;a h;a").unwrap()).unwrap()).unwrap();
        assert_eq!(b, want);
        let reference = reference_b4_curved().unwrap();
        assert!(!expr_matches_table(&reference, &table).unwrap());
    }

    #[test]
    fn conformally_flat_completion() {
        let flat = contractions_expr(4, &reference_b4_flat()).unwrap();
        let got = invariantize_conformally_flat(&flat, 4).unwrap();
        assert_eq!(got, reference_b4_curved().unwrap());
        let two = contractions_expr(2, &[crate::flat::Contraction::new(crate::algebra::qi(3), "a", "a")]).unwrap();
        assert_eq!(invariantize_conformally_flat(&two, 2).unwrap(), canonicalize(&two).unwrap());
        assert!(metric_normal_jets(4, 3).is_err());
    }
}
