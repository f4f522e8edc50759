//! Graded total symbols of pseudo-differential operators acting on forms.
//!
//! A [`HomogSymbol`] is a matrix of polynomials homogeneous in ξ; denominators are powers
//! of the Euclidean norm `r = ‖ξ‖²` stored as negative `r` exponents inside each entry.
//! A [`GradedSymbol`] collects homogeneous components by degree and records how deep
//! (in ξ-degree and in base-variable Taylor order) its data is exact.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::algebra::{enumerate_multiindices, GaussianRational, Monomial, MultiIndex, MultiPoly, Q};
use crate::error::{Error, Result};
use crate::forms::FormOperator;

/// Sentinel for "exact to every base-variable order".
pub const EXACT: u32 = u32::MAX;

/// Homogeneous matrix-valued symbol of a fixed ξ-degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogSymbol {
    op: FormOperator,
    degree: i32,
}

impl HomogSymbol {
    pub fn new(op: FormOperator, degree: i32) -> Self {
        HomogSymbol { op, degree }
    }

    /// Build and verify that every entry is homogeneous of `degree`.
    pub fn checked(op: FormOperator, degree: i32) -> Result<Self> {
        for e in op.entries() {
            if let Some(d) = e.xi_homogeneity()? {
                if d != degree {
                    return Err(Error::WrongHomogeneity { expected: degree, found: d });
                }
            }
        }
        Ok(HomogSymbol { op, degree })
    }

    pub fn op(&self) -> &FormOperator {
        &self.op
    }

    pub fn into_op(self) -> FormOperator {
        self.op
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.op.is_zero()
    }

    /// Power `s` of `‖ξ‖²` in the common denominator.
    pub fn denom_power(&self) -> u32 {
        self.op.entries().map(|e| (-e.min_norm()) as u32).max().unwrap_or(0)
    }

    /// Numerator over the common denominator `‖ξ‖^{2s}`, fully expanded in ξ.
    pub fn numerator(&self) -> FormOperator {
        let s = self.denom_power() as i16;
        self.op.map(|e| e.shift_norm(s).expand_norm())
    }

    /// Cancel common factors: single denominator power per entry, numerator expanded.
    pub fn reduce(&self) -> HomogSymbol {
        HomogSymbol { op: self.op.map(|e| e.reduce()), degree: self.degree }
    }

    pub fn d_xi(&self, alpha: &MultiIndex) -> HomogSymbol {
        HomogSymbol {
            op: self.op.map(|e| if e.is_zero() { e.clone() } else { e.d_xi_multi(alpha) }),
            degree: self.degree - alpha.order() as i32,
        }
    }

    pub fn d_x(&self, alpha: &MultiIndex) -> HomogSymbol {
        HomogSymbol {
            op: self.op.map(|e| if e.is_zero() { e.clone() } else { e.d_x(alpha) }),
            degree: self.degree,
        }
    }

    pub fn at_origin(&self) -> HomogSymbol {
        HomogSymbol { op: self.op.map(|e| e.at_origin()), degree: self.degree }
    }

    pub fn scale(&self, s: &GaussianRational) -> HomogSymbol {
        HomogSymbol { op: self.op.scale(s), degree: self.degree }
    }

    pub fn mul_poly(&self, p: &MultiPoly, extra_degree: i32) -> HomogSymbol {
        HomogSymbol { op: self.op.mul_poly(p), degree: self.degree + extra_degree }
    }

    pub fn compose(&self, o: &HomogSymbol) -> Result<HomogSymbol> {
        Ok(HomogSymbol { op: self.op.compose(&o.op)?, degree: self.degree + o.degree })
    }

    pub fn eq_rational(&self, o: &HomogSymbol) -> bool {
        (self.degree == o.degree || self.is_zero_rational() && o.is_zero_rational()) && self.op.eq_rational(&o.op)
    }

    pub fn is_zero_rational(&self) -> bool {
        self.op.is_zero_rational()
    }

    pub fn trace(&self) -> Result<MultiPoly> {
        self.op.trace()
    }
}

/// Truncation applied to every product: maximal base-variable degree and maximal number
/// of curvature factors kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub max_x: u32,
    pub max_curvature: u32,
}

impl Truncation {
    pub const NONE: Truncation = Truncation { max_x: EXACT, max_curvature: EXACT };

    pub fn keeps(&self, m: &Monomial) -> bool {
        (self.max_x == EXACT || m.x_degree() <= self.max_x)
            && (self.max_curvature == EXACT || m.curvature_degree() <= self.max_curvature)
    }

    pub fn meet(&self, o: &Truncation) -> Truncation {
        Truncation { max_x: self.max_x.min(o.max_x), max_curvature: self.max_curvature.min(o.max_curvature) }
    }
}

/// Graded symbol `σ_d + σ_{d−1} + …` kept down to `floor`.
///
/// `floor = None` means every component below the stored ones is genuinely zero
/// (differential operators, the flat `σ(F)`, multiplication operators).
/// `x_orders[d]` is the base-variable Taylor order to which component `d` is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedSymbol {
    pub n: usize,
    pub row_grade: usize,
    pub col_grade: usize,
    nxi: usize,
    nx: usize,
    components: BTreeMap<i32, HomogSymbol>,
    floor: Option<i32>,
    x_orders: BTreeMap<i32, u32>,
    pub truncation: Truncation,
}

impl GradedSymbol {
    pub fn new(n: usize, row_grade: usize, col_grade: usize, nxi: usize, nx: usize, floor: Option<i32>) -> Self {
        GradedSymbol {
            n,
            row_grade,
            col_grade,
            nxi,
            nx,
            components: BTreeMap::new(),
            floor,
            x_orders: BTreeMap::new(),
            truncation: Truncation::NONE,
        }
    }

    /// Single homogeneous component with no lower terms.
    pub fn from_homog(h: HomogSymbol) -> Self {
        let op = h.op();
        let mut g = GradedSymbol::new(op.n, op.row_grade, op.col_grade, op.nxi(), op.nx(), None);
        g.insert(h, EXACT);
        g
    }

    /// Symbol of multiplication by the scalar function `f` on `Λ^m`.
    pub fn multiplication(n: usize, m: usize, f: &MultiPoly) -> Self {
        Self::from_homog(HomogSymbol::new(FormOperator::scalar(n, m, f.clone()), 0))
    }

    pub fn with_truncation(mut self, t: Truncation) -> Self {
        self.truncation = t;
        self
    }

    pub fn insert(&mut self, h: HomogSymbol, x_order: u32) {
        let d = h.degree();
        self.x_orders.insert(d, x_order);
        self.components.insert(d, h);
    }

    pub fn floor(&self) -> Option<i32> {
        self.floor
    }

    pub fn set_floor(&mut self, floor: Option<i32>) {
        self.floor = floor;
    }

    pub fn nxi(&self) -> usize {
        self.nxi
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Highest degree carrying a stored component.
    pub fn leading_degree(&self) -> Option<i32> {
        self.components.keys().next_back().copied()
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        self.components.keys().rev().copied()
    }

    /// Component of degree `d`: stored value, zero if `d` is above the floor and absent,
    /// error if `d` lies below the floor.
    pub fn component(&self, d: i32) -> Result<HomogSymbol> {
        if let Some(h) = self.components.get(&d) {
            return Ok(h.clone());
        }
        if let Some(f) = self.floor {
            if d < f {
                return Err(Error::TruncationUnsound(format!("degree {} requested below floor {}", d, f)));
            }
        }
        Ok(HomogSymbol::new(
            FormOperator::zero(self.n, self.row_grade, self.col_grade, self.nxi, self.nx),
            d,
        ))
    }

    /// Base-variable order to which component `d` is exact.
    pub fn x_order(&self, d: i32) -> u32 {
        self.x_orders.get(&d).copied().unwrap_or(EXACT)
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(|h| h.is_zero())
    }

    /// Lowest degree that is known exactly (floor, or −∞ for exact symbols).
    pub fn exact_down_to(&self) -> Option<i32> {
        self.floor
    }

    /// Drop components that are identically zero as rational functions.
    pub fn pruned(mut self) -> Self {
        let zero: Vec<i32> = self.components.iter().filter(|(_, h)| h.is_zero_rational()).map(|(d, _)| *d).collect();
        for d in zero {
            self.components.remove(&d);
        }
        self
    }

    pub fn scale(&self, s: &GaussianRational) -> GradedSymbol {
        let mut out = self.clone();
        for h in out.components.values_mut() {
            *h = h.scale(s);
        }
        out
    }

    /// Componentwise sum; floors and orders combine pessimistically.
    pub fn add(&self, o: &GradedSymbol) -> Result<GradedSymbol> {
        if self.n != o.n || self.row_grade != o.row_grade || self.col_grade != o.col_grade {
            return Err(Error::DimensionMismatch("graded symbols act between different bundles".into()));
        }
        let floor = match (self.floor, o.floor) {
            (None, f) | (f, None) => f,
            (Some(a), Some(b)) => Some(a.max(b)),
        };
        let mut out = GradedSymbol::new(self.n, self.row_grade, self.col_grade, self.nxi, self.nx, floor);
        out.truncation = self.truncation.meet(&o.truncation);
        let degs: std::collections::BTreeSet<i32> = self.components.keys().chain(o.components.keys()).copied().collect();
        for d in degs {
            if floor.is_some_and(|f| d < f) {
                continue;
            }
            let a = self.component(d)?;
            let b = o.component(d)?;
            let sum = HomogSymbol::new(a.op().add(b.op())?, d);
            out.insert(sum, self.x_order(d).min(o.x_order(d)));
        }
        Ok(out)
    }

    pub fn sub(&self, o: &GradedSymbol) -> Result<GradedSymbol> {
        self.add(&o.scale(&GaussianRational::from_int(-1)))
    }

    /// Smallest output degree `compose(self, o)` can deliver exactly.
    pub fn sound_floor_for_product(&self, o: &GradedSymbol) -> Option<i32> {
        let (la, lb) = (self.leading_degree()?, o.leading_degree()?);
        match (self.floor, o.floor) {
            (None, None) => None,
            (Some(fa), None) => Some(fa + lb),
            (None, Some(fb)) => Some(la + fb),
            (Some(fa), Some(fb)) => Some((fa + lb).max(la + fb)),
        }
    }
}

fn inv_factorial(alpha: &MultiIndex) -> GaussianRational {
    GaussianRational::real(Q::new(BigInt::from(1), alpha.factorial()))
}

/// Graded composition `σ(AB) = Σ_α (1/α!) ∂_ξ^α σ(A) · D_x^α σ(B)`, kept down to `floor`.
///
/// Refuses floors below what the inputs determine exactly.
pub fn compose(a: &GradedSymbol, b: &GradedSymbol, floor: Option<i32>) -> Result<GradedSymbol> {
    if a.n != b.n || a.col_grade != b.row_grade {
        return Err(Error::DimensionMismatch("cannot compose symbols between incompatible bundles".into()));
    }
    let trunc = a.truncation.meet(&b.truncation);
    let mut out = GradedSymbol::new(a.n, a.row_grade, b.col_grade, a.nxi, a.nx, floor);
    out.truncation = trunc;
    let (Some(la), Some(lb)) = (a.leading_degree(), b.leading_degree()) else {
        return Ok(out);
    };
    let sound = a.sound_floor_for_product(b);
    let target_floor = match (floor, sound) {
        (Some(f), Some(s)) if f < s => {
            return Err(Error::TruncationUnsound(format!(
                "requested floor {} but inputs only determine degrees ≥ {}",
                f, s
            )))
        }
        (None, Some(s)) => {
            return Err(Error::TruncationUnsound(format!(
                "an exact product was requested but inputs only determine degrees ≥ {}",
                s
            )))
        }
        (Some(f), _) => f,
        (None, None) => {
            // Exact inputs: every output degree is finite only if one factor is polynomial in ξ.
            // Use the lowest degree where contributions can still appear.
            let la_min = a.components.keys().next().copied().unwrap_or(la);
            let lb_min = b.components.keys().next().copied().unwrap_or(lb);
            let max_alpha = max_xi_polynomial_degree(a).map(|d| d as i32).unwrap_or(i32::MAX / 4);
            if max_alpha == i32::MAX / 4 {
                return Err(Error::TruncationUnsound(
                    "exact composition with a non-polynomial left factor needs an explicit floor".into(),
                ));
            }
            la_min + lb_min - max_alpha
        }
    };
    out.floor = floor;
    let keep = |m: &Monomial| trunc.keeps(m);
    for d in (target_floor..=la + lb).rev() {
        let mut acc = FormOperator::zero(a.n, a.row_grade, b.col_grade, a.nxi, a.nx);
        let mut x_order = EXACT;
        for (&da, ha) in a.components.iter() {
            for (&db, hb) in b.components.iter() {
                let k = da + db - d;
                if k < 0 {
                    continue;
                }
                for alpha in enumerate_multiindices(a.n, k as u32) {
                    let left = ha.d_xi(&alpha);
                    if left.is_zero() {
                        continue;
                    }
                    let right = hb.d_x(&alpha);
                    if right.is_zero() {
                        continue;
                    }
                    let prod = left.op().compose_with(right.op(), &keep)?;
                    acc.add_assign_scaled(&prod, &inv_factorial(&alpha));
                    let xo = b.x_order(db);
                    let xo = if xo == EXACT { EXACT } else { xo.saturating_sub(k as u32) };
                    x_order = x_order.min(a.x_order(da)).min(xo);
                }
            }
        }
        if !acc.is_zero() {
            out.insert(HomogSymbol::new(acc, d), x_order);
        }
    }
    Ok(out)
}

fn max_xi_polynomial_degree(a: &GradedSymbol) -> Option<u32> {
    let mut best = 0;
    for h in a.components.values() {
        for e in h.op().entries() {
            for (m, _) in e.terms() {
                if m.norm < 0 {
                    return None;
                }
                best = best.max(m.xi_degree() as u32);
            }
        }
    }
    Some(best)
}

/// `σ([S, f])` for a scalar function `f`:
/// `σ_{k−j}([S,f]) = Σ_{1≤|β|≤j} (D_x^β f / β!) ∂_ξ^β σ^S_{k−(j−|β|)}`, down to `floor`.
pub fn commutator_with_function(s: &GradedSymbol, f: &MultiPoly, floor: i32) -> Result<GradedSymbol> {
    let mut out = GradedSymbol::new(s.n, s.row_grade, s.col_grade, s.nxi, s.nx, Some(floor));
    out.truncation = s.truncation;
    let Some(k) = s.leading_degree() else {
        return Ok(out);
    };
    let keep = |m: &Monomial| s.truncation.keeps(m);
    for j in 1..=(k - floor) {
        let d = k - j;
        let mut acc = FormOperator::zero(s.n, s.row_grade, s.col_grade, s.nxi, s.nx);
        for order in 1..=j {
            let src = k - (j - order);
            let comp = s.component(src)?;
            if comp.is_zero() {
                continue;
            }
            for beta in enumerate_multiindices(s.n, order as u32) {
                let df = f.d_x(&beta);
                if df.is_zero() {
                    continue;
                }
                let coeff = df.scale(&inv_factorial(&beta));
                let term = comp.d_xi(&beta).op().map(|e| e.mul_truncated(&coeff, &keep));
                acc = acc.add(&term)?;
            }
        }
        if !acc.is_zero() {
            out.insert(HomogSymbol::new(acc, d), s.x_order(k));
        }
    }
    Ok(out)
}

/// Enumerates the index tuples of the degree `−n` component of `σ([S,f][S,h])` for `S` of
/// order `k` (taken as the leading degree of `S`): `i, j ≥ 0`, `|β|, |δ| ≥ 1` and
/// `|α′| + |α″| + |β| + |δ| + i + j = n + 2k`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ResidueTuple {
    pub i: u32,
    pub j: u32,
    pub alpha1: MultiIndex,
    pub alpha2: MultiIndex,
    pub beta: MultiIndex,
    pub delta: MultiIndex,
}

impl ResidueTuple {
    /// `1/(α′! α″! β! δ!)`
    pub fn weight(&self) -> Q {
        let den = self.alpha1.factorial() * self.alpha2.factorial() * self.beta.factorial() * self.delta.factorial();
        Q::new(BigInt::from(1), den)
    }
}

pub fn residue_tuples(n: usize, total: u32) -> Vec<ResidueTuple> {
    let mut out = Vec::new();
    for i in 0..=total {
        for j in 0..=(total - i) {
            let rest = total - i - j;
            for a1 in 0..=rest {
                for a2 in 0..=(rest - a1) {
                    for b in 1..=(rest - a1 - a2) {
                        let dl = rest - a1 - a2 - b;
                        if dl < 1 {
                            continue;
                        }
                        for alpha1 in enumerate_multiindices(n, a1) {
                            for alpha2 in enumerate_multiindices(n, a2) {
                                for beta in enumerate_multiindices(n, b) {
                                    for delta in enumerate_multiindices(n, dl) {
                                        out.push(ResidueTuple {
                                            i,
                                            j,
                                            alpha1: alpha1.clone(),
                                            alpha2: alpha2.clone(),
                                            beta: beta.clone(),
                                            delta,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Verify `S` retains what the degree `−n` product formula reads.
pub fn check_residue_depth(s: &GradedSymbol, n: usize) -> Result<i32> {
    let k = s.leading_degree().ok_or_else(|| Error::Precondition("empty symbol".into()))?;
    let total = n as i32 + 2 * k;
    if total < 2 {
        return Err(Error::Precondition(format!("need 2k + n ≥ 2, got k = {}, n = {}", k, n)));
    }
    // deepest component read: i or j up to total − 2; base-variable order up to total − 2 − j
    if let Some(f) = s.floor() {
        if k - (total - 2) < f {
            return Err(Error::TruncationUnsound(format!(
                "product residue needs components down to degree {}, symbol floor is {}",
                k - (total - 2),
                f
            )));
        }
    }
    for j in 0..=(total - 2) {
        let need = (total - 2 - j) as u32;
        let have = s.x_order(k - j);
        if have != EXACT && have < need && !s.component(k - j)?.is_zero() {
            return Err(Error::TruncationUnsound(format!(
                "component of degree {} needs base-variable order {}, has {}",
                k - j,
                need,
                have
            )));
        }
    }
    Ok(total)
}

/// `σ_{−n}([S,f][S,h])` at the chart origin, as a homogeneous matrix symbol whose entries
/// carry the jets of `f` and `h`.
pub fn residue_component_of_product(s: &GradedSymbol, f: &MultiPoly, h: &MultiPoly, n: usize) -> Result<HomogSymbol> {
    let total = check_residue_depth(s, n)?;
    let k = s.leading_degree().unwrap();
    let keep = |m: &Monomial| s.truncation.keeps(m);
    let mut acc = FormOperator::zero(s.n, s.row_grade, s.col_grade, s.nxi, s.nx);
    for t in residue_tuples(s.n, total as u32) {
        let si = s.component(k - t.i as i32)?;
        let sj = s.component(k - t.j as i32)?;
        if si.is_zero() || sj.is_zero() {
            continue;
        }
        let df = f.d_x(&t.beta);
        let dh = h.d_x(&(&t.alpha2 + &t.delta));
        let coeff = df.mul(&dh).at_origin().scale_q(&t.weight());
        if coeff.is_zero() {
            continue;
        }
        let left = si.d_xi(&(&(&t.alpha1 + &t.alpha2) + &t.beta)).at_origin();
        let right = sj.d_x(&t.alpha1).d_xi(&t.delta).at_origin();
        let prod = left.op().compose_with(right.op(), &keep)?;
        acc = acc.add(&prod.mul_poly(&coeff))?;
    }
    Ok(HomogSymbol::new(acc, -(n as i32)))
}

/// Traced form of [`residue_component_of_product`] for generic `f`, `h`:
/// maps `(∂-jet of f, ∂-jet of h)` to the trace of the matching ξ-symbol at the origin,
/// with the `(−i)^{|·|}` factors of `D_x` folded into the coefficients.
pub fn residue_trace_by_jets(s: &GradedSymbol, n: usize) -> Result<BTreeMap<(MultiIndex, MultiIndex), MultiPoly>> {
    let total = check_residue_depth(s, n)?;
    let k = s.leading_degree().unwrap();
    let keep = |m: &Monomial| s.truncation.keeps(m);
    let mut left_cache: BTreeMap<(u32, MultiIndex), HomogSymbol> = BTreeMap::new();
    let mut right_cache: BTreeMap<(u32, MultiIndex, MultiIndex), HomogSymbol> = BTreeMap::new();
    let mut out: BTreeMap<(MultiIndex, MultiIndex), MultiPoly> = BTreeMap::new();
    for t in residue_tuples(s.n, total as u32) {
        let si = s.component(k - t.i as i32)?;
        let sj = s.component(k - t.j as i32)?;
        if si.is_zero() || sj.is_zero() {
            continue;
        }
        let gamma = &(&t.alpha1 + &t.alpha2) + &t.beta;
        let left = left_cache
            .entry((t.i, gamma.clone()))
            .or_insert_with(|| si.d_xi(&gamma).at_origin())
            .clone();
        let right = right_cache
            .entry((t.j, t.alpha1.clone(), t.delta.clone()))
            .or_insert_with(|| sj.d_x(&t.alpha1).d_xi(&t.delta).at_origin())
            .clone();
        if left.is_zero() || right.is_zero() {
            continue;
        }
        let tr = traced_product(left.op(), right.op(), &keep)?;
        if tr.is_zero() {
            continue;
        }
        let hjet = &t.alpha2 + &t.delta;
        let phase = GaussianRational::neg_i_pow(t.beta.order() + hjet.order());
        let c = phase.scale(&t.weight());
        out.entry((t.beta.clone(), hjet))
            .or_insert_with(|| MultiPoly::zero(s.nxi, s.nx))
            .add_scaled(&tr, &c);
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

fn traced_product(a: &FormOperator, b: &FormOperator, keep: &dyn Fn(&Monomial) -> bool) -> Result<MultiPoly> {
    let mut t = MultiPoly::zero(a.nxi(), a.nx());
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            let x = a.get(r, c);
            let y = b.get(c, r);
            if x.is_zero() || y.is_zero() {
                continue;
            }
            t.add_assign(&x.mul_truncated(y, keep));
        }
    }
    Ok(t)
}

impl GradedSymbol {
    /// Whether two symbols agree (as rational functions) on every degree both determine.
    pub fn agrees_with(&self, o: &GradedSymbol) -> bool {
        let lo = match (self.floor, o.floor) {
            (None, None) => i32::MIN,
            (Some(a), None) | (None, Some(a)) => a,
            (Some(a), Some(b)) => a.max(b),
        };
        let degs: std::collections::BTreeSet<i32> =
            self.components.keys().chain(o.components.keys()).copied().filter(|&d| d >= lo).collect();
        degs.into_iter().all(|d| match (self.component(d), o.component(d)) {
            (Ok(a), Ok(b)) => a.op().eq_rational(b.op()),
            _ => false,
        })
    }

    /// Drop all base-variable dependence beyond order `k` in every component.
    pub fn truncate_x(&self, k: u32) -> GradedSymbol {
        let mut out = self.clone();
        for h in out.components.values_mut() {
            *h = HomogSymbol::new(h.op().map(|e| e.filter(|m| m.x_degree() <= k)), h.degree());
        }
        for v in out.x_orders.values_mut() {
            *v = (*v).min(k);
        }
        out
    }

    pub fn components(&self) -> impl Iterator<Item = (&i32, &HomogSymbol)> {
        self.components.iter().rev()
    }
}

/// Zero symbol helper used in tests and engines.
pub fn zero_homog(n: usize, row: usize, col: usize, nxi: usize, nx: usize, degree: i32) -> HomogSymbol {
    HomogSymbol::new(FormOperator::zero(n, row, col, nxi, nx), degree)
}

pub fn is_zero_gr(g: &GaussianRational) -> bool {
    g.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Func, MultiIndex};
    use crate::forms::{identity_metric, principal_symbol_f};

    fn flat_f(n: usize, m: usize) -> GradedSymbol {
        let g = identity_metric(n, n, n);
        GradedSymbol::from_homog(principal_symbol_f(n, m, &g, EXACT).unwrap())
    }

    fn jet(n: usize, c: char) -> MultiPoly {
        MultiPoly::jet(n, n, Func(c), MultiIndex::zero(n))
    }

    #[test]
    fn multiplication_scales_components() {
        let n = 2;
        let s = flat_f(n, 1);
        let f = jet(n, 'f');
        let mf = GradedSymbol::multiplication(n, 1, &f);
        let prod = compose(&mf, &s, Some(-3)).unwrap();
        let expect = s.component(0).unwrap().op().mul_poly(&f);
        assert!(prod.component(0).unwrap().op().eq_rational(&expect));
        for d in -3..0 {
            assert!(prod.component(d).unwrap().is_zero_rational());
        }
    }

    #[test]
    fn constant_symbols_compose_by_matrix_product() {
        let s = flat_f(4, 2);
        let p = compose(&s, &s, Some(-4)).unwrap();
        let m = s.component(0).unwrap().op().compose(s.component(0).unwrap().op()).unwrap();
        assert!(p.component(0).unwrap().op().eq_rational(&m));
    }

    #[test]
    fn flat_f_squares_to_identity() {
        let s = flat_f(4, 2);
        let p = compose(&s, &s, Some(-4)).unwrap();
        let id = FormOperator::identity(4, 2, 4, 4);
        assert!(p.component(0).unwrap().op().eq_rational(&id));
        for d in -4..0 {
            assert!(p.component(d).unwrap().is_zero_rational());
        }
    }

    #[test]
    fn refuses_unsound_floor() {
        let mut s = flat_f(2, 1);
        s.set_floor(Some(-1));
        assert!(matches!(compose(&s, &s, Some(-3)), Err(Error::TruncationUnsound(_))));
        assert!(compose(&s, &s, Some(-1)).is_ok());
    }

    #[test]
    fn commutator_with_constant_vanishes() {
        let s = flat_f(2, 1);
        let c = MultiPoly::from_q(2, 2, crate::algebra::qi(3));
        let out = commutator_with_function(&s, &c, -3).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn commutator_matches_composition() {
        // σ([S,f]) = σ(S∘f) − f σ(S), and the order-k part cancels
        let n = 2;
        let s = flat_f(n, 1);
        let f = jet(n, 'f');
        let mf = GradedSymbol::multiplication(n, 1, &f);
        let direct = commutator_with_function(&s, &f, -3).unwrap();
        let via = compose(&s, &mf, Some(-3)).unwrap().sub(&compose(&mf, &s, Some(-3)).unwrap()).unwrap();
        assert!(direct.agrees_with(&via));
        assert!(via.component(0).unwrap().is_zero_rational());
        // flat: degree −1 part is Σ_{|β|=1} D^β f ∂^β σ_0
        let s0 = s.component(0).unwrap();
        let mut expect = FormOperator::zero(n, 1, 1, n, n);
        for j in 0..n {
            let b = MultiIndex::unit(n, j);
            expect = expect.add(&s0.d_xi(&b).op().mul_poly(&f.d_x(&b))).unwrap();
        }
        assert!(direct.component(-1).unwrap().op().eq_rational(&expect));
    }

    #[test]
    fn residue_with_constant_h_vanishes() {
        let n = 2;
        let s = flat_f(n, 1);
        let f = jet(n, 'f');
        let c = MultiPoly::from_q(n, n, crate::algebra::qi(2));
        let r = residue_component_of_product(&s, &f, &c, n).unwrap();
        assert!(r.is_zero_rational());
    }

    #[test]
    fn residue_refuses_shallow_symbols() {
        let mut s = flat_f(4, 2);
        s.set_floor(Some(-1));
        let f = jet(4, 'f');
        assert!(matches!(residue_component_of_product(&s, &f, &f, 4), Err(Error::TruncationUnsound(_))));
    }
}
