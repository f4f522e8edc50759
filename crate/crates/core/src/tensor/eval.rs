//! Exact evaluation of tensor-jet expressions at the origin of a model chart.
//!
//! Every covariant quantity is built from the metric's Taylor polynomial: Christoffel symbols,
//! the Riemann tensor `R_{abcd} = g(R(∂_a,∂_b)∂_d, ∂_c)` and iterated covariant derivatives
//! are computed as polynomial fields and read off at `x = 0`, where `g = δ`. Scalar
//! functions enter as jet symbols, so results are polynomials in the jets at the origin and
//! in the model's curvature parameters.
//!
//! With [`MetricModel::FreeJets`] the metric has `g(0) = δ`, `∂g(0) = 0` and free higher
//! Taylor coefficients; every metric is of this form in suitable coordinates, so an
//! expression is identically zero iff its value here is the zero polynomial.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::expr::{Factor, Head, Label, TensorJetExpr, Term};
use crate::algebra::{enumerate_up_to, q, GaussianRational, Func, Monomial, MultiIndex, MultiPoly, Sym, Q};
use crate::curved::riemann;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricModel {
    /// Euclidean metric.
    Flat,
    /// `g_{ij} = δ_{ij} − ⅓ R_{ikjl} x^k x^l` with canonical curvature symbols, linear in
    /// curvature; valid for jets of order ≤ 3 and underived curvature.
    NormalLinear,
    /// `g_{ij} = δ_{ij} + Σ_{2≤|α|≤K} G_{ij,α} x^α/α!` with free coefficients.
    FreeJets,
    /// `g = e^{2η} δ` with `η(0) = 0` and free Taylor coefficients of `η`.
    ConformallyFlat,
}

/// Dense tensor field: `comps[i_1 n^{r−1} + … + i_r]`, exact to base-variable order `valid`.
#[derive(Clone, Debug)]
struct Field {
    rank: usize,
    comps: Vec<MultiPoly>,
    valid: u32,
}

/// Truncation rule: x-order bound, plus curvature degree ≤ 1 in the linear normal chart.
#[derive(Clone, Copy)]
struct Keep {
    order: u32,
    lin: bool,
}

impl Keep {
    fn accepts(&self, m: &Monomial) -> bool {
        m.x_degree() <= self.order && (!self.lin || m.curvature_degree() <= 1)
    }

    fn mul(&self, a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
        let lin = self.lin;
        a.mul_x_truncated(b, self.order, &|m: &Monomial| !lin || m.curvature_degree() <= 1)
    }
}

pub struct Evaluator {
    n: usize,
    model: MetricModel,
    order: u32,
    g: Vec<Vec<MultiPoly>>,
    g_inv: Vec<Vec<MultiPoly>>,
    /// `Γ^k_{ij}` at `k n² + i n + j`
    gamma: Vec<MultiPoly>,
    cache: Mutex<HashMap<(Head, usize), Arc<Vec<MultiPoly>>>>,
    fields: Mutex<HashMap<Head, Arc<Field>>>,
}

/// Metric Taylor order needed to evaluate `e`: a jet with `d` derivatives reads Christoffel
/// symbols to order `d − 2`, curvature with `k` derivatives reads them to order `k + 1`.
pub fn required_order(e: &TensorJetExpr) -> u32 {
    let mut k = 2u32;
    for t in &e.terms {
        for f in &t.factors {
            let need = match f.head {
                Head::Jet(_) => (f.order() as u32).saturating_sub(1),
                Head::Metric => 0,
                _ => f.order() as u32 + 2,
            };
            k = k.max(need);
        }
    }
    k
}

fn poly_one(n: usize) -> MultiPoly {
    MultiPoly::one(0, n)
}

fn monomial_x(n: usize, alpha: &MultiIndex) -> MultiPoly {
    let mut m = Monomial::one(0, n);
    for (j, &e) in alpha.0.iter().enumerate() {
        m.x[j] = e;
    }
    MultiPoly::monomial(0, n, m, GaussianRational::from_int(1))
}

impl Evaluator {
    pub fn new(n: usize, model: MetricModel, order: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition("dimension must be at least 2".into()));
        }
        let order = if model == MetricModel::Flat { 0 } else { order.max(2) };
        let keep_curv = model == MetricModel::NormalLinear;
        let delta = |i: usize, j: usize| if i == j { poly_one(n) } else { MultiPoly::zero(0, n) };
        let mut g: Vec<Vec<MultiPoly>> = (0..n).map(|i| (0..n).map(|j| delta(i, j)).collect()).collect();
        match model {
            MetricModel::Flat => {}
            MetricModel::NormalLinear => {
                let third = GaussianRational::real(q(-1, 3));
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                let r = riemann(0, n, i as u8, k as u8, j as u8, l as u8);
                                if r.is_zero() {
                                    continue;
                                }
                                let xx = MultiPoly::x_var(0, n, k).mul(&MultiPoly::x_var(0, n, l));
                                g[i][j].add_scaled(&r.mul(&xx), &third);
                            }
                        }
                    }
                }
            }
            MetricModel::FreeJets => {
                for i in 0..n {
                    for j in i..n {
                        for alpha in enumerate_up_to(n, 2, order) {
                            let c = MultiPoly::sym(
                                0,
                                n,
                                Sym::Taylor { tag: 'g', i: i as u8, j: j as u8, partials: alpha.clone() },
                            );
                            let w = GaussianRational::real(Q::new(1.into(), alpha.factorial()));
                            let term = c.mul(&monomial_x(n, &alpha)).scale(&w);
                            g[i][j].add_assign(&term);
                            if i != j {
                                g[j][i].add_assign(&term);
                            }
                        }
                    }
                }
            }
            MetricModel::ConformallyFlat => {
                let mut eta = MultiPoly::zero(0, n);
                for alpha in enumerate_up_to(n, 1, order) {
                    let c = MultiPoly::sym(0, n, Sym::Taylor { tag: 'η', i: 0, j: 0, partials: alpha.clone() });
                    let w = GaussianRational::real(Q::new(1.into(), alpha.factorial()));
                    eta.add_assign(&c.mul(&monomial_x(n, &alpha)).scale(&w));
                }
                let keep = Keep { order, lin: false };
                let two_eta = eta.scale(&GaussianRational::from_int(2));
                let mut e = poly_one(n);
                let mut power = poly_one(n);
                let mut fact = Q::from_integer(1.into());
                for k in 1..=order {
                    power = keep.mul(&power, &two_eta);
                    fact = fact * Q::from_integer((k as i64).into());
                    e.add_assign(&power.scale(&GaussianRational::real(Q::from_integer(1.into()) / &fact)));
                }
                for i in 0..n {
                    g[i][i] = e.clone();
                }
            }
        }
        let keep = Keep { order, lin: keep_curv };
        // g⁻¹ = Σ_k (−E)^k with E = g − δ vanishing at the origin
        let e_mat: Vec<Vec<MultiPoly>> =
            (0..n).map(|i| (0..n).map(|j| g[i][j].sub(&delta(i, j))).collect()).collect();
        let mut g_inv: Vec<Vec<MultiPoly>> = (0..n).map(|i| (0..n).map(|j| delta(i, j)).collect()).collect();
        let mut power = g_inv.clone();
        for k in 1..=order.max(1) {
            let next: Vec<Vec<MultiPoly>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut acc = MultiPoly::zero(0, n);
                            for l in 0..n {
                                if !power[i][l].is_zero() && !e_mat[l][j].is_zero() {
                                    acc.add_assign(&keep.mul(&power[i][l], &e_mat[l][j]));
                                }
                            }
                            acc
                        })
                        .collect()
                })
                .collect();
            power = next;
            let s = GaussianRational::from_int(if k % 2 == 0 { 1 } else { -1 });
            for i in 0..n {
                for j in 0..n {
                    g_inv[i][j].add_scaled(&power[i][j], &s);
                }
            }
        }
        let half = GaussianRational::real(q(1, 2));
        let mut lowered = vec![MultiPoly::zero(0, n); n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut p = g[j][l].partial_x(i);
                    p.add_assign(&g[i][l].partial_x(j));
                    p = p.sub(&g[i][j].partial_x(l));
                    lowered[l * n * n + i * n + j] = p.scale(&half);
                }
            }
        }
        let mut gamma = vec![MultiPoly::zero(0, n); n * n * n];
        for k in 0..n {
            for l in 0..n {
                if g_inv[k][l].is_zero() {
                    continue;
                }
                for ij in 0..n * n {
                    let low = &lowered[l * n * n + ij];
                    if !low.is_zero() {
                        gamma[k * n * n + ij].add_assign(&Keep { order: order - 1, lin: keep_curv }.mul(&g_inv[k][l], low));
                    }
                }
            }
        }
        Ok(Evaluator { n, model, order, g, g_inv, gamma, cache: Mutex::new(HashMap::new()), fields: Mutex::new(HashMap::new()) })
    }

    /// Evaluator whose metric order suffices for `e`.
    pub fn for_expr(e: &TensorJetExpr, model: MetricModel) -> Result<Self> {
        Self::new(e.n, model, required_order(e))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> MetricModel {
        self.model
    }

    fn keep(&self, order: u32) -> Keep {
        Keep { order, lin: self.model == MetricModel::NormalLinear }
    }

    fn scalar_field(&self, p: MultiPoly) -> Field {
        Field { rank: 0, comps: vec![p], valid: self.order }
    }

    /// `(∇T)_{I a} = ∂_a T_I − Σ_s Γ^e_{a i_s} T_{I[i_s → e]}`.
    fn nabla(&self, t: &Field) -> Result<Field> {
        if t.valid == 0 && self.model != MetricModel::Flat {
            return Err(Error::TruncationUnsound("metric Taylor order exhausted".into()));
        }
        let n = self.n;
        let valid = t.valid.saturating_sub(1);
        let keep = self.keep(valid);
        let size = t.comps.len();
        let mut comps = vec![MultiPoly::zero(0, n); size * n];
        comps.par_iter_mut().enumerate().for_each(|(pos, out)| {
            let (ii, a) = (pos / n, pos % n);
            let mut acc = t.comps[ii].partial_x(a);
            if self.model != MetricModel::Flat {
                let mut stride = 1;
                for _s in 0..t.rank {
                    let is = (ii / stride) % n;
                    for e in 0..n {
                        let gm = &self.gamma[e * n * n + a * n + is];
                        if gm.is_zero() {
                            continue;
                        }
                        let jj = ii - is * stride + e * stride;
                        let v = &t.comps[jj];
                        if !v.is_zero() {
                            acc = acc.sub(&keep.mul(&gm, v));
                        }
                    }
                    stride *= n;
                }
            }
            *out = acc.filter(|m| keep.accepts(m));
        });
        Ok(Field { rank: t.rank + 1, comps, valid })
    }

    fn riemann_field(&self) -> Result<Field> {
        let n = self.n;
        if self.model == MetricModel::Flat {
            return Ok(Field { rank: 4, comps: vec![MultiPoly::zero(0, n); n.pow(4)], valid: 0 });
        }
        let valid = self.order.checked_sub(2).ok_or_else(|| Error::TruncationUnsound("metric order below 2".into()))?;
        let keep = self.keep(valid);
        let gm = |k: usize, i: usize, j: usize| &self.gamma[k * n * n + i * n + j];
        // R^e_{dab} := (R(∂_a,∂_b)∂_d)^e
        let mut up = vec![MultiPoly::zero(0, n); n.pow(4)];
        up.par_iter_mut().enumerate().for_each(|(pos, out)| {
            let (e, d, a, b) = (pos / (n * n * n), (pos / (n * n)) % n, (pos / n) % n, pos % n);
            let mut acc = gm(e, b, d).partial_x(a).sub(&gm(e, a, d).partial_x(b));
            for f in 0..n {
                let x = keep.mul(&gm(f, b, d), gm(e, a, f));
                let y = keep.mul(&gm(f, a, d), gm(e, b, f));
                acc.add_assign(&x.sub(&y));
            }
            *out = acc.filter(|m| keep.accepts(m));
        });
        let mut comps = vec![MultiPoly::zero(0, n); n.pow(4)];
        comps.par_iter_mut().enumerate().for_each(|(pos, out)| {
            let (a, b, c, d) = (pos / (n * n * n), (pos / (n * n)) % n, (pos / n) % n, pos % n);
            let mut acc = MultiPoly::zero(0, n);
            for e in 0..n {
                let r = &up[e * n * n * n + d * n * n + a * n + b];
                if !r.is_zero() && !self.g[c][e].is_zero() {
                    acc.add_assign(&keep.mul(&self.g[c][e], r));
                }
            }
            *out = acc;
        });
        Ok(Field { rank: 4, comps, valid })
    }

    fn contract(&self, t: &Field, s1: usize, s2: usize) -> Field {
        // contraction of slots s1 < s2 with g⁻¹; result keeps remaining slots in order
        let n = self.n;
        let keep = self.keep(t.valid);
        let rank = t.rank - 2;
        let mut comps = vec![MultiPoly::zero(0, n); n.pow(rank as u32)];
        for (pos, out) in comps.iter_mut().enumerate() {
            let mut rest: Vec<usize> = (0..rank).rev().map(|k| (pos / n.pow(k as u32)) % n).collect();
            let mut acc = MultiPoly::zero(0, n);
            for a in 0..n {
                for c in 0..n {
                    let gi = &self.g_inv[a][c];
                    if gi.is_zero() {
                        continue;
                    }
                    let mut full = Vec::with_capacity(t.rank);
                    let mut it = rest.iter();
                    for slot in 0..t.rank {
                        if slot == s1 {
                            full.push(a);
                        } else if slot == s2 {
                            full.push(c);
                        } else {
                            full.push(*it.next().unwrap());
                        }
                    }
                    let idx = full.iter().fold(0, |acc, &v| acc * n + v);
                    let v = &t.comps[idx];
                    if !v.is_zero() {
                        acc.add_assign(&keep.mul(&gi, v));
                    }
                }
            }
            rest.clear();
            *out = acc;
        }
        Field { rank, comps, valid: t.valid }
    }

    fn base_field(&self, head: Head) -> Result<Field> {
        if let Some(f) = self.fields.lock().unwrap().get(&head) {
            return Ok((**f).clone());
        }
        let f = self.compute_base_field(head)?;
        self.fields.lock().unwrap().insert(head, Arc::new(f.clone()));
        Ok(f)
    }

    fn compute_base_field(&self, head: Head) -> Result<Field> {
        let n = self.n;
        let nf = n as i64;
        match head {
            Head::Jet(c) => Ok(self.scalar_field(MultiPoly::jet(0, n, Func(c), MultiIndex::zero(n)))),
            Head::Metric => Ok(Field {
                rank: 2,
                comps: (0..n * n).map(|p| self.g[p / n][p % n].clone()).collect(),
                valid: self.order,
            }),
            Head::Riem => self.riemann_field(),

            Head::Ric => Ok(self.contract(&self.base_field(Head::Riem)?, 0, 2)),
            Head::Scal => Ok(self.contract(&self.base_field(Head::Ric)?, 0, 1)),
            Head::J => {
                let s = self.base_field(Head::Scal)?;
                let w = GaussianRational::real(q(1, 2 * (nf - 1)));
                Ok(Field { rank: 0, comps: vec![s.comps[0].scale(&w)], valid: s.valid })
            }
            Head::Rho => {
                if n < 3 {
                    return Err(Error::Domain("Schouten tensor needs n ≥ 3".into()));
                }
                let ric = self.base_field(Head::Ric)?;
                let j = self.base_field(Head::J)?;
                let keep = self.keep(ric.valid);
                let w = GaussianRational::real(q(1, nf - 2));
                let comps = (0..n * n)
                    .map(|p| ric.comps[p].sub(&keep.mul(&self.g[p / n][p % n], &j.comps[0])).scale(&w))
                    .collect();
                Ok(Field { rank: 2, comps, valid: ric.valid })
            }
            Head::Weyl => {
                let r = self.base_field(Head::Riem)?;
                let rho = self.base_field(Head::Rho)?;
                let keep = self.keep(r.valid);
                let mut comps = r.comps.clone();
                for (pos, out) in comps.iter_mut().enumerate() {
                    let (i, j, k, l) = (pos / (n * n * n), (pos / (n * n)) % n, (pos / n) % n, pos % n);
                    let p = |a: usize, b: usize| &rho.comps[a * n + b];
                    let gg = |a: usize, b: usize| &self.g[a][b];
                    out.add_assign(&keep.mul(&p(j, k), gg(i, l)));
                    out.add_assign(&keep.mul(&p(j, l), gg(i, k)).neg());
                    out.add_assign(&keep.mul(&p(i, l), gg(j, k)));
                    out.add_assign(&keep.mul(&p(i, k), gg(j, l)).neg());
                }
                Ok(Field { rank: 4, comps, valid: r.valid })
            }
        }
    }

    /// Components at the origin of `head` with `k` covariant derivatives.
    pub fn components(&self, head: Head, k: usize) -> Result<Arc<Vec<MultiPoly>>> {
        if let Some(v) = self.cache.lock().unwrap().get(&(head, k)) {
            return Ok(v.clone());
        }
        let comps = if head == Head::Metric && k > 0 {
            vec![MultiPoly::zero(0, self.n); self.n.pow((2 + k) as u32)]
        } else {
            if self.model == MetricModel::NormalLinear {
                let ok = match head {
                    Head::Jet(_) => k <= 3,
                    Head::Metric => true,
                    _ => k == 0,
                };
                if !ok {
                    return Err(Error::TruncationUnsound(format!(
                        "{:?} with {} derivatives needs metric jets beyond the linear normal-coordinate model",
                        head, k
                    )));
                }
            }
            let mut f = self.base_field(head)?;
            if let Head::Jet(_) = head {
                // the jet polynomial is exact; `k` derivatives read it to x-order `k`
                f.valid = k as u32;
            }
            for _ in 0..k {
                f = self.nabla(&f)?;
            }
            f.comps.iter().map(|p| p.at_origin()).collect()
        };
        let v = Arc::new(comps);
        self.cache.lock().unwrap().insert((head, k), v.clone());
        Ok(v)
    }

    fn term_value(&self, t: &Term, free: &[Label], assignment: &[usize], tables: &[Arc<Vec<MultiPoly>>]) -> MultiPoly {
        let n = self.n;
        let dummies = t.dummies();
        let mut value = vec![usize::MAX; 256];
        for (l, v) in free.iter().zip(assignment) {
            value[*l as usize] = *v;
        }
        let keep = self.keep(0);
        let mut acc = MultiPoly::zero(0, n);
        let total = n.pow(dummies.len() as u32);
        'outer: for mut code in 0..total {
            for &d in &dummies {
                value[d as usize] = code % n;
                code /= n;
            }
            let mut prod: Option<MultiPoly> = None;
            for (f, tab) in t.factors.iter().zip(tables) {
                let idx = f.idx.iter().fold(0, |a, &l| a * n + value[l as usize]);
                let c = &tab[idx];
                if c.is_zero() {
                    continue 'outer;
                }
                prod = Some(match prod {
                    None => c.clone(),
                    Some(p) => keep.mul(&p, c),
                });
            }
            match prod {
                Some(p) => acc.add_assign(&p),
                None => acc.add_assign(&poly_one(n)),
            }
        }
        acc.scale(&GaussianRational::real(t.coeff.clone()))
    }

    fn tables_for(&self, t: &Term) -> Result<Vec<Arc<Vec<MultiPoly>>>> {
        t.factors.iter().map(|f: &Factor| self.components(f.head, f.order())).collect()
    }

    /// Value of a scalar expression (no free indices).
    pub fn evaluate(&self, e: &TensorJetExpr) -> Result<MultiPoly> {
        if !e.free.is_empty() {
            return Err(Error::Precondition("expression has free indices; use evaluate_components".into()));
        }
        Ok(self.evaluate_components(e)?.pop().unwrap())
    }

    /// Values for every assignment of the free indices (first free index most significant).
    pub fn evaluate_components(&self, e: &TensorJetExpr) -> Result<Vec<MultiPoly>> {
        if e.n != self.n {
            return Err(Error::DimensionMismatch(format!("expression in dimension {}, chart in {}", e.n, self.n)));
        }
        e.validate()?;
        let tables: Vec<Vec<Arc<Vec<MultiPoly>>>> = e.terms.iter().map(|t| self.tables_for(t)).collect::<Result<_>>()?;
        let n = self.n;
        let count = n.pow(e.free.len() as u32);
        let out: Vec<MultiPoly> = (0..count)
            .into_par_iter()
            .map(|code| {
                let assignment: Vec<usize> =
                    (0..e.free.len()).rev().map(|k| (code / n.pow(k as u32)) % n).collect();
                let mut acc = MultiPoly::zero(0, n);
                for (t, tab) in e.terms.iter().zip(&tables) {
                    acc.add_assign(&self.term_value(t, &e.free, &assignment, tab));
                }
                acc
            })
            .collect();
        Ok(out)
    }

    /// Whether `e` vanishes identically in this model.
    pub fn is_zero(&self, e: &TensorJetExpr) -> Result<bool> {
        Ok(self.evaluate_components(e)?.iter().all(|p| p.is_zero()))
    }
}

/// Decide `e ≡ 0` exactly: flat expressions in the Euclidean chart, anything involving
/// curvature in the free-jet chart.
pub fn vanishes_identically(e: &TensorJetExpr, curved: bool) -> Result<bool> {
    if e.terms.is_empty() {
        return Ok(true);
    }
    let model = if curved { MetricModel::FreeJets } else { MetricModel::Flat };
    Evaluator::for_expr(e, model)?.is_zero(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::qi;

    fn ex(n: usize, s: &str) -> TensorJetExpr {
        TensorJetExpr::parse(n, s).unwrap()
    }

    #[test]
    fn normal_chart_reproduces_curvature_symbols() {
        let ev = Evaluator::new(4, MetricModel::NormalLinear, 2).unwrap();
        let r = ev.components(Head::Riem, 0).unwrap();
        for a in 0..4u8 {
            for b in 0..4u8 {
                for c in 0..4u8 {
                    for d in 0..4u8 {
                        let want = riemann(0, 4, a, b, c, d);
                        let got = &r[(((a as usize * 4) + b as usize) * 4 + c as usize) * 4 + d as usize];
                        assert_eq!(got, &want, "R_{}{}{}{}", a, b, c, d);
                    }
                }
            }
        }
    }

    #[test]
    fn round_sphere_has_positive_sectional_curvature() {
        // conformally flat chart of the unit sphere: e^{2η}, η = −log(1 + |x|²/4) ≈ −|x|²/4
        let ev = Evaluator::new(3, MetricModel::ConformallyFlat, 2).unwrap();
        let r = ev.components(Head::Riem, 0).unwrap();
        let v = &r[0 * 27 + 1 * 9 + 0 * 3 + 1];
        let sub = v.substitute_syms(&|s| match s {
            Sym::Taylor { partials, .. } if partials.order() == 2 && partials.all_even() => {
                Some(MultiPoly::from_q(0, 3, q(-1, 2)))
            }
            Sym::Taylor { .. } => Some(MultiPoly::zero(0, 3)),
            _ => None,
        });
        assert_eq!(sub.as_constant().unwrap().re, qi(1));
    }

    #[test]
    fn scalar_hessian_is_symmetric() {
        let e = ex(3, "f;ab - f;ba");
        let ev = Evaluator::for_expr(&e, MetricModel::FreeJets).unwrap();
        assert!(ev.is_zero(&e).unwrap());
    }

    #[test]
    fn ricci_identity_on_gradients() {
        // f_{;cab} − f_{;cba} = R_{bacd} f_{;d}
        let e = ex(3, "f;cab - f;cba - R[bacd] f;d");
        let ev = Evaluator::for_expr(&e, MetricModel::FreeJets).unwrap();
        assert!(ev.is_zero(&e).unwrap());
        let wrong = ex(3, "f;cab - f;cba + R[bacd] f;d");
        assert!(!ev.is_zero(&wrong).unwrap());
    }

    #[test]
    fn contracted_bianchi() {
        let e = ex(4, "rho[ab];a - J;b");
        assert!(vanishes_identically(&e, true).unwrap());
        let e = ex(4, "R[abcd];a - Ric[bd];c + Ric[bc];d");
        assert!(vanishes_identically(&e, true).unwrap());
    }

    #[test]
    fn weyl_is_trace_free() {
        let e = ex(4, "W[abad]");
        assert!(vanishes_identically(&e, true).unwrap());
        let e = ex(4, "W[abcd] + W[acdb] + W[adbc]");
        assert!(vanishes_identically(&e, true).unwrap());
    }

    #[test]
    fn trace_relations() {
        assert!(vanishes_identically(&ex(4, "rho[aa] - J"), true).unwrap());
        assert!(vanishes_identically(&ex(4, "Sc - 6 J"), true).unwrap());
        assert!(vanishes_identically(&ex(4, "g[aa] - 4"), false).unwrap());
    }
}
