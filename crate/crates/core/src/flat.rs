//! Flat-space pipeline: the trace function ψ, its Taylor functional, and the coefficient
//! table of the bilinear residue functional, computed by two independent routes.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::algebra::{binomial, enumerate_multiindices, fmt_q, linalg, qi, GaussianRational, MultiIndex, MultiPoly, Q};
use crate::error::{Error, Result};
use crate::forms::{clifford_difference, identity_metric, principal_symbol_f, trace};
use crate::sphere::{integrate_monomial_exps, integrate_poly};
use crate::symbol::HomogSymbol;

/// `ψ(ξ,η) = a ⟨ξ,η⟩²/(‖ξ‖²‖η‖²) + b` on `Λ^m R^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiClosedForm {
    pub n: usize,
    pub m: usize,
    pub a: Q,
    pub b: Q,
}

pub fn psi_closed_form(n: usize, m: usize) -> PsiClosedForm {
    let (n_, m_) = (n as i64, m as i64);
    let b = binomial(n_ - 2, m_ - 2) + binomial(n_ - 2, m_) - 2 * binomial(n_ - 2, m_ - 1);
    let a = binomial(n_, m_) - b;
    PsiClosedForm { n, m, a: qi(a), b: qi(b) }
}

impl PsiClosedForm {
    /// `a ⟨ξ,η⟩² + b ‖ξ‖²‖η‖²` in the `2n` variables `(ξ, η)`.
    pub fn numerator(&self) -> MultiPoly {
        let n = self.n;
        let v = |j| MultiPoly::xi_var(2 * n, 0, j);
        let mut dot = MultiPoly::zero(2 * n, 0);
        let mut nx = MultiPoly::zero(2 * n, 0);
        let mut ny = MultiPoly::zero(2 * n, 0);
        for j in 0..n {
            dot.add_assign(&v(j).mul(&v(n + j)));
            nx.add_assign(&v(j).mul(&v(j)));
            ny.add_assign(&v(n + j).mul(&v(n + j)));
        }
        let mut out = dot.mul(&dot).scale_q(&self.a);
        out.add_assign(&nx.mul(&ny).scale_q(&self.b));
        out
    }

    pub fn eval(&self, xi: &[f64], eta: &[f64]) -> f64 {
        let dot: f64 = xi.iter().zip(eta).map(|(a, b)| a * b).sum();
        let nx: f64 = xi.iter().map(|a| a * a).sum();
        let ny: f64 = eta.iter().map(|a| a * a).sum();
        to_f64(&self.a) * dot * dot / (nx * ny) + to_f64(&self.b)
    }
}

pub fn to_f64(v: &Q) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(f64::NAN)
}

/// Numerator of `tr(σ₀ᶠ(ξ) σ₀ᶠ(η))` over `‖ξ‖²‖η‖²`, computed from the form matrices.
pub fn psi_symbolic(n: usize, m: usize) -> Result<MultiPoly> {
    if m == 0 || m >= n {
        return Err(Error::Precondition(format!("need 1 ≤ m ≤ n − 1, got m = {}, n = {}", m, n)));
    }
    let xi: Vec<MultiPoly> = (0..n).map(|j| MultiPoly::xi_var(2 * n, 0, j)).collect();
    let eta: Vec<MultiPoly> = (0..n).map(|j| MultiPoly::xi_var(2 * n, 0, n + j)).collect();
    let g = identity_metric(n, 2 * n, 0);
    let a = clifford_difference(&xi, &g, m)?;
    let b = clifford_difference(&eta, &g, m)?;
    a.trace_of_product(&b)
}

/// Exact equality of [`psi_symbolic`] with the closed form.
pub fn psi_matches_closed_form(n: usize, m: usize) -> Result<bool> {
    Ok(psi_symbolic(n, m)?.eq_rational(&psi_closed_form(n, m).numerator()))
}

/// Coefficients of a bilinear expression `Σ c_{a,b} ∂^a f ∂^b h` with plain partials.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BilinearCoeffTable {
    pub n: usize,
    pub entries: BTreeMap<(MultiIndex, MultiIndex), Q>,
}

impl BilinearCoeffTable {
    pub fn new(n: usize) -> Self {
        BilinearCoeffTable { n, entries: BTreeMap::new() }
    }

    pub fn add(&mut self, a: MultiIndex, b: MultiIndex, c: &Q) {
        if c.is_zero() {
            return;
        }
        match self.entries.entry((a, b)) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
        }
    }

    pub fn get(&self, a: &MultiIndex, b: &MultiIndex) -> Q {
        self.entries.get(&(a.clone(), b.clone())).cloned().unwrap_or_else(Q::zero)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, s: &Q) -> BilinearCoeffTable {
        let mut out = BilinearCoeffTable::new(self.n);
        for ((a, b), c) in &self.entries {
            out.add(a.clone(), b.clone(), &(c * s));
        }
        out
    }

    pub fn sub(&self, o: &BilinearCoeffTable) -> BilinearCoeffTable {
        let mut out = self.clone();
        for ((a, b), c) in &o.entries {
            out.add(a.clone(), b.clone(), &-c);
        }
        out
    }

    /// The table of `(f, h) ↦ B(h, f)`.
    pub fn swapped(&self) -> BilinearCoeffTable {
        let mut out = BilinearCoeffTable::new(self.n);
        for ((a, b), c) in &self.entries {
            out.add(b.clone(), a.clone(), c);
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.swapped() == *self
    }

    /// Every key has `|a| ≥ 1`, `|b| ≥ 1` and `|a| + |b| = order`.
    pub fn shape_ok(&self, order: u32) -> bool {
        self.entries
            .keys()
            .all(|(a, b)| a.order() >= 1 && b.order() >= 1 && a.order() + b.order() == order)
    }

    /// Ratio `self / o` if the two tables are proportional with a nonzero constant.
    pub fn ratio_to(&self, o: &BilinearCoeffTable) -> Option<Q> {
        let ((k, v), _) = (o.entries.iter().next()?, ());
        let r = self.get(&k.0, &k.1) / v;
        if r.is_zero() {
            return None;
        }
        (o.scale(&r) == *self).then_some(r)
    }
}

impl fmt::Debug for BilinearCoeffTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "table n={} ({} entries)", self.n, self.entries.len())?;
        for ((a, b), c) in &self.entries {
            writeln!(f, "  {:?} {:?} {}", a, b, fmt_q(c))?;
        }
        Ok(())
    }
}

/// A fully contracted bilinear term `coeff · f_{;I} h_{;J}` written with index labels:
/// every label occurs exactly twice across `f_idx` and `h_idx`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contraction {
    pub coeff: Q,
    pub f_idx: String,
    pub h_idx: String,
}

impl Contraction {
    pub fn new(coeff: Q, f_idx: &str, h_idx: &str) -> Self {
        Contraction { coeff, f_idx: f_idx.into(), h_idx: h_idx.into() }
    }

    fn labels(&self) -> Result<Vec<char>> {
        let mut count: BTreeMap<char, usize> = BTreeMap::new();
        for c in self.f_idx.chars().chain(self.h_idx.chars()) {
            *count.entry(c).or_default() += 1;
        }
        if let Some((c, k)) = count.iter().find(|(_, &k)| k != 2) {
            return Err(Error::Structural(format!("label {} occurs {} times", c, k)));
        }
        Ok(count.into_keys().collect())
    }
}

/// Expand contractions in flat coordinates into a partial-derivative table.
pub fn table_from_contractions(n: usize, terms: &[Contraction]) -> Result<BilinearCoeffTable> {
    let mut out = BilinearCoeffTable::new(n);
    for t in terms {
        let labels = t.labels()?;
        let k = labels.len();
        let mut assign = vec![0usize; k];
        loop {
            let val = |c: char| assign[labels.iter().position(|&l| l == c).unwrap()];
            let fi: Vec<usize> = t.f_idx.chars().map(val).collect();
            let hi: Vec<usize> = t.h_idx.chars().map(val).collect();
            out.add(MultiIndex::from_indices(n, &fi), MultiIndex::from_indices(n, &hi), &t.coeff);
            let mut p = 0;
            while p < k {
                assign[p] += 1;
                if assign[p] < n {
                    break;
                }
                assign[p] = 0;
                p += 1;
            }
            if p == k {
                break;
            }
        }
    }
    Ok(out)
}

/// The basis contraction with `k` indices shared between `f` (order `p`) and `h` (order `q`),
/// remaining indices traced in pairs within each factor.
pub fn basis_contraction(p: u32, q: u32, k: u32) -> Contraction {
    let mut next = b'a';
    let mut lab = || {
        let c = next as char;
        next += 1;
        c
    };
    let shared: String = (0..k).map(|_| lab()).collect();
    let mut f_idx = shared.clone();
    for _ in 0..(p - k) / 2 {
        let c = lab();
        f_idx.push(c);
        f_idx.push(c);
    }
    let mut h_idx = shared;
    for _ in 0..(q - k) / 2 {
        let c = lab();
        h_idx.push(c);
        h_idx.push(c);
    }
    Contraction::new(Q::one(), &f_idx, &h_idx)
}

/// Every basis contraction of total order `order` with both orders at least 1.
pub fn invariant_basis(order: u32) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for p in (1..order).rev() {
        let q = order - p;
        for k in (0..=p.min(q)).rev() {
            if (p - k) % 2 == 0 && (q - k) % 2 == 0 {
                out.push((p, q, k));
            }
        }
    }
    out
}

/// Write a table as a combination of [`basis_contraction`]s. Fails if the table is not an
/// `O(n)`-invariant contraction of the jets.
pub fn decompose_invariant(t: &BilinearCoeffTable, order: u32) -> Result<Vec<((u32, u32, u32), Q)>> {
    let basis = invariant_basis(order);
    let tables: Vec<BilinearCoeffTable> = basis
        .iter()
        .map(|&(p, q, k)| table_from_contractions(t.n, &[basis_contraction(p, q, k)]))
        .collect::<Result<_>>()?;
    let mut keys: Vec<(MultiIndex, MultiIndex)> = t.entries.keys().cloned().collect();
    for bt in &tables {
        keys.extend(bt.entries.keys().cloned());
    }
    keys.sort();
    keys.dedup();
    let rows: Vec<Vec<Q>> = keys.iter().map(|(a, b)| tables.iter().map(|bt| bt.get(a, b)).collect()).collect();
    let rhs: Vec<Q> = keys.iter().map(|(a, b)| t.get(a, b)).collect();
    let x = linalg::solve(&rows, &rhs)
        .ok_or_else(|| Error::Decomposition("table is not a combination of invariant contractions".into()))?;
    Ok(basis.into_iter().zip(x).filter(|(_, c)| !c.is_zero()).collect())
}

/// Pretty form `Σ c f_{;I} h_{;J}` with the `f ↔ h` mirror pairs grouped.
pub fn symmetrized_display(t: &BilinearCoeffTable, order: u32) -> Result<String> {
    let parts = decompose_invariant(t, order)?;
    let lookup: BTreeMap<(u32, u32, u32), Q> = parts.iter().cloned().collect();
    let mut done = std::collections::BTreeSet::new();
    let mut out = String::new();
    for ((p, q, k), c) in &parts {
        if done.contains(&(*p, *q, *k)) {
            continue;
        }
        let mirror = (*q, *p, *k);
        let term = basis_contraction(*p, *q, *k);
        let sign = if out.is_empty() { if c.is_negative() { "-" } else { "" } } else if c.is_negative() { " - " } else { " + " };
        let mag = fmt_q(&c.abs());
        let fh = format!("f_{{;{}}} h_{{;{}}}", term.f_idx, term.h_idx);
        if mirror != (*p, *q, *k) && lookup.get(&mirror) == Some(c) {
            let hf = format!("h_{{;{}}} f_{{;{}}}", term.f_idx, term.h_idx);
            out.push_str(&format!("{}{}({} + {})", sign, mag, fh, hf));
            done.insert(mirror);
        } else {
            out.push_str(&format!("{}{} {}", sign, mag, fh));
        }
        done.insert((*p, *q, *k));
    }
    Ok(out)
}

/// The reference four-dimensional flat table, as contractions.
pub fn reference_b4_flat() -> Vec<Contraction> {
    vec![
        Contraction::new(qi(-4), "ijj", "i"),
        Contraction::new(qi(-4), "i", "ijj"),
        Contraction::new(qi(-4), "ij", "ij"),
        Contraction::new(qi(-2), "ii", "jj"),
    ]
}

/// The reference six-dimensional flat table, as contractions.
pub fn reference_b6_flat() -> Vec<Contraction> {
    vec![
        Contraction::new(qi(12), "i", "ijjkk"),
        Contraction::new(qi(12), "ijjkk", "i"),
        Contraction::new(qi(24), "ij", "ijkk"),
        Contraction::new(qi(24), "ijkk", "ij"),
        Contraction::new(qi(6), "ii", "jjkk"),
        Contraction::new(qi(6), "jjkk", "ii"),
        Contraction::new(qi(24), "ijj", "ikk"),
        Contraction::new(qi(16), "ijk", "ijk"),
    ]
}

// ---------------------------------------------------------------------------
// Route 1: Taylor functional of the closed-form ψ.

/// Scalar invariants of `(ξ, u, v)` on `‖ξ‖ = 1`: exponents of
/// `p = ⟨ξ,u⟩`, `q = ⟨ξ,v⟩`, `s = ⟨u,v⟩`, `U = ‖u‖²`, `V = ‖v‖²`.
type InvKey = [u8; 5];

fn bideg(k: &InvKey) -> (u32, u32) {
    let [p, q, s, uu, vv] = k.map(|e| e as u32);
    (p + s + 2 * uu, q + s + 2 * vv)
}

fn inv_mul(a: &BTreeMap<InvKey, Q>, b: &BTreeMap<InvKey, Q>, max_u: u32, max_v: u32) -> BTreeMap<InvKey, Q> {
    let mut out: BTreeMap<InvKey, Q> = BTreeMap::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            let mut k = [0u8; 5];
            for i in 0..5 {
                k[i] = ka[i] + kb[i];
            }
            let (du, dv) = bideg(&k);
            if du > max_u || dv > max_v {
                continue;
            }
            *out.entry(k).or_insert_with(Q::zero) += ca * cb;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn inv_from(terms: &[(InvKey, i64)]) -> BTreeMap<InvKey, Q> {
    terms.iter().map(|(k, c)| (*k, qi(*c))).collect()
}

/// `(1 + w)^{-1}` truncated to the given bidegree.
fn inv_geometric(w: &BTreeMap<InvKey, Q>, max_u: u32, max_v: u32) -> BTreeMap<InvKey, Q> {
    let mut out = inv_from(&[([0; 5], 1)]);
    let mut power = out.clone();
    let neg_w: BTreeMap<InvKey, Q> = w.iter().map(|(k, c)| (*k, -c)).collect();
    loop {
        power = inv_mul(&power, &neg_w, max_u, max_v);
        if power.is_empty() {
            break;
        }
        for (k, c) in &power {
            *out.entry(*k).or_insert_with(Q::zero) += c;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// `T′_n ψ(ξ, ξ, u, v)` on the unit sphere, written in the invariants `p, q, s, U, V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TPrime {
    pub n: usize,
    pub terms: BTreeMap<[u8; 5], Q>,
}

/// Order-`n` part of the Taylor expansion of `ψ(ξ + u, ξ + v)` at `‖ξ‖ = 1`, keeping only
/// terms that carry both `u` and `v`.
pub fn taylor_t_prime(n: usize, m: usize) -> TPrime {
    let c = psi_closed_form(n, m);
    let top = n as u32;
    // ⟨ξ+u, ξ+v⟩ = 1 + p + q + s ; ‖ξ+u‖² = 1 + 2p + U ; ‖ξ+v‖² = 1 + 2q + V
    let dot = inv_from(&[([0; 5], 1), ([1, 0, 0, 0, 0], 1), ([0, 1, 0, 0, 0], 1), ([0, 0, 1, 0, 0], 1)]);
    let wu = inv_from(&[([1, 0, 0, 0, 0], 2), ([0, 0, 0, 1, 0], 1)]);
    let wv = inv_from(&[([0, 1, 0, 0, 0], 2), ([0, 0, 0, 0, 1], 1)]);
    let iu = inv_geometric(&wu, top, top);
    let iv = inv_geometric(&wv, top, top);
    let mut prod = inv_mul(&inv_mul(&dot, &dot, top, top), &iu, top, top);
    prod = inv_mul(&prod, &iv, top, top);
    let terms = prod
        .into_iter()
        .filter(|(k, _)| {
            let (du, dv) = bideg(k);
            du + dv == top && du >= 1 && dv >= 1
        })
        .map(|(k, v)| (k, v * &c.a))
        .collect();
    TPrime { n, terms }
}

impl TPrime {
    /// Expand into a polynomial in `ξ` (cotangent slots) and `u, v` (base slots `0..n`, `n..2n`).
    pub fn to_poly(&self) -> MultiPoly {
        let n = self.n;
        let (nxi, nx) = (n, 2 * n);
        let xi = |j| MultiPoly::xi_var(nxi, nx, j);
        let u = |j| MultiPoly::x_var(nxi, nx, j);
        let v = |j| MultiPoly::x_var(nxi, nx, n + j);
        let sum = |f: &dyn Fn(usize) -> MultiPoly| {
            let mut acc = MultiPoly::zero(nxi, nx);
            for j in 0..n {
                acc.add_assign(&f(j));
            }
            acc
        };
        let basic = [
            sum(&|j| xi(j).mul(&u(j))),
            sum(&|j| xi(j).mul(&v(j))),
            sum(&|j| u(j).mul(&v(j))),
            sum(&|j| u(j).mul(&u(j))),
            sum(&|j| v(j).mul(&v(j))),
        ];
        let mut out = MultiPoly::zero(nxi, nx);
        for (k, c) in &self.terms {
            let mut t = MultiPoly::from_q(nxi, nx, c.clone());
            for (b, &e) in basic.iter().zip(k.iter()) {
                t = t.mul(&b.pow(e as u32));
            }
            out.add_assign(&t);
        }
        out
    }

    /// `∫_{‖ξ‖=1} T′ dξ` as a polynomial in `u` (slots `0..n`) and `v` (slots `n..2n`).
    pub fn integrate(&self) -> MultiPoly {
        let n = self.n;
        let mut memo: HashMap<(u8, u8), MultiPoly> = HashMap::new();
        let mut out = MultiPoly::zero(0, 2 * n);
        let uv = |k: usize| MultiPoly::x_var(0, 2 * n, k);
        let dot = |o1: usize, o2: usize| {
            let mut acc = MultiPoly::zero(0, 2 * n);
            for j in 0..n {
                acc.add_assign(&uv(o1 + j).mul(&uv(o2 + j)));
            }
            acc
        };
        let (s, uu, vv) = (dot(0, n), dot(0, 0), dot(n, n));
        for (k, c) in &self.terms {
            let base = memo.entry((k[0], k[1])).or_insert_with(|| moment_pq(n, k[0] as u32, k[1] as u32)).clone();
            let t = base
                .mul(&s.pow(k[2] as u32))
                .mul(&uu.pow(k[3] as u32))
                .mul(&vv.pow(k[4] as u32))
                .scale_q(c);
            out.add_assign(&t);
        }
        out
    }
}

/// `∫ ⟨ξ,u⟩^a ⟨ξ,v⟩^b dξ` as a polynomial in `(u, v)`.
fn moment_pq(n: usize, a: u32, b: u32) -> MultiPoly {
    let mut out = MultiPoly::zero(0, 2 * n);
    let fa = crate::algebra::rational::factorial(a);
    let fb = crate::algebra::rational::factorial(b);
    for mu in enumerate_multiindices(n, a) {
        let wa = Q::new(fa.clone(), mu.factorial());
        for nu in enumerate_multiindices(n, b) {
            let e: Vec<u8> = mu.0.iter().zip(nu.0.iter()).map(|(x, y)| x + y).collect();
            let w = integrate_monomial_exps(&e, n);
            if w.is_zero() {
                continue;
            }
            let wb = Q::new(fb.clone(), nu.factorial());
            let mut mono = crate::algebra::Monomial::one(0, 2 * n);
            for j in 0..n {
                mono.x[j] = mu.0[j];
                mono.x[n + j] = nu.0[j];
            }
            out.add_term(mono, GaussianRational::real(&wa * &wb * w));
        }
    }
    out
}

fn phase_sign(n: usize) -> Q {
    // (−i)^n for even n
    if (n / 2) % 2 == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::Precondition(format!("dimension must be even and at least 2, got {}", n)));
    }
    Ok(())
}

/// Coefficient table of the flat bilinear functional from the Taylor functional of ψ:
/// `Σ A_{a,b} u^a v^b = ∫ (T′(ξ,ξ,u+v,v) − T′(ξ,ξ,v,v)) dξ`, stored against plain
/// partials with the `(−i)^n` of `D_x^a D_x^b` folded in.
pub fn bn_flat_coeffs(n: usize) -> Result<BilinearCoeffTable> {
    check_dim(n)?;
    let g = taylor_t_prime(n, n / 2).integrate();
    let mut out = BilinearCoeffTable::new(n);
    let sign = phase_sign(n);
    for (mono, c) in g.terms() {
        if !c.is_real() {
            return Err(Error::Consistency("imaginary Taylor coefficient".into()));
        }
        let beta = MultiIndex::from_slice(&mono.x[..n]);
        let delta = MultiIndex::from_slice(&mono.x[n..]);
        // (u+v)^β = Σ_{a+α=β} β!/(a! α!) u^a v^α ; drop a = 0
        for a in beta.sub_indices() {
            if a.is_zero() {
                continue;
            }
            let alpha = beta.checked_sub(&a).unwrap();
            let w = Q::new(beta.factorial(), a.factorial() * alpha.factorial());
            out.add(a, &alpha + &delta, &(&c.re * w * &sign));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Route 2: matrix symbols and the product residue formula.

fn canonical_pair(gamma: &MultiIndex, delta: &MultiIndex) -> Vec<(u8, u8)> {
    let mut cols: Vec<(u8, u8)> = gamma.0.iter().zip(delta.0.iter()).map(|(a, b)| (*a, *b)).collect();
    cols.sort_unstable();
    cols
}

fn canonical_multi(cols: &[(u8, u8)]) -> (MultiIndex, MultiIndex) {
    (
        MultiIndex(cols.iter().map(|c| c.0).collect()),
        MultiIndex(cols.iter().map(|c| c.1).collect()),
    )
}

struct DerivCache {
    base: HomogSymbol,
    cache: HashMap<MultiIndex, HomogSymbol>,
}

impl DerivCache {
    fn get(&mut self, g: &MultiIndex) -> HomogSymbol {
        if let Some(s) = self.cache.get(g) {
            return s.clone();
        }
        let s = match (0..g.dim()).find(|&k| g.get(k) > 0) {
            None => self.base.clone(),
            Some(k) => {
                let mut lower = g.clone();
                lower.0[k] -= 1;
                self.get(&lower).d_xi(&MultiIndex::unit(g.dim(), k))
            }
        };
        self.cache.insert(g.clone(), s.clone());
        s
    }
}

/// `∫_{‖ξ‖=1} tr(∂^γ σ₀ᶠ ∂^δ σ₀ᶠ) dξ` for the flat principal symbol.
fn pair_integral(a: &HomogSymbol, b: &HomogSymbol, n: usize) -> Result<Q> {
    let (oa, ob) = (a.op(), b.op());
    let mut acc: HashMap<Vec<u8>, GaussianRational> = HashMap::new();
    for r in 0..oa.rows() {
        for c in 0..oa.cols() {
            let x = oa.get(r, c);
            let y = ob.get(c, r);
            if x.is_zero() || y.is_zero() {
                continue;
            }
            for (m1, c1) in x.terms() {
                for (m2, c2) in y.terms() {
                    let e: Vec<u8> = m1.xi.iter().zip(m2.xi.iter()).map(|(p, q)| p + q).collect();
                    if e.iter().any(|v| v % 2 == 1) {
                        continue;
                    }
                    let prod = c1.clone() * c2.clone();
                    let slot = acc.entry(e).or_insert_with(GaussianRational::zero);
                    *slot += &prod;
                }
            }
        }
    }
    let mut total = GaussianRational::zero();
    for (e, c) in acc {
        total += &c.scale(&integrate_monomial_exps(&e, n));
    }
    if !total.is_real() {
        return Err(Error::Consistency("imaginary trace integral".into()));
    }
    Ok(total.re)
}

/// All `c_{γ,δ} = ∫ tr(∂^γσ₀ᶠ ∂^δσ₀ᶠ)` with `|γ| + |δ| = n`, `|γ|, |δ| ≥ 1`, keyed by the
/// coordinate-permutation orbit of the pair.
pub fn flat_pair_integrals(n: usize, m: usize) -> Result<HashMap<Vec<(u8, u8)>, Q>> {
    let g = identity_metric(n, n, 0);
    let base = principal_symbol_f(n, m, &g, 0)?;
    let mut orbits: Vec<Vec<(u8, u8)>> = Vec::new();
    for k in 1..n as u32 {
        for gamma in enumerate_multiindices(n, k) {
            for delta in enumerate_multiindices(n, n as u32 - k) {
                if (&gamma + &delta).all_even() {
                    orbits.push(canonical_pair(&gamma, &delta));
                }
            }
        }
    }
    orbits.sort();
    orbits.dedup();
    let mut cache = DerivCache { base: base.clone(), cache: HashMap::new() };
    let mut sphere_derivs: HashMap<MultiIndex, HomogSymbol> = HashMap::new();
    for o in &orbits {
        let (gamma, delta) = canonical_multi(o);
        for d in [gamma, delta] {
            if !sphere_derivs.contains_key(&d) {
                let s = cache.get(&d);
                let restricted = HomogSymbol::new(s.op().map(|e| e.restrict_to_sphere()), s.degree());
                sphere_derivs.insert(d, restricted);
            }
        }
    }
    orbits
        .par_iter()
        .map(|o| {
            let (gamma, delta) = canonical_multi(o);
            let v = pair_integral(&sphere_derivs[&gamma], &sphere_derivs[&delta], n)?;
            Ok((o.clone(), v))
        })
        .collect()
}

/// Coefficient table of the flat bilinear functional from the matrix symbols directly:
/// `Σ_{|α|+|β|+|δ|=n} D^β f D^{α+δ} h/(α!β!δ!) ∫ tr(∂^{α+β}σ₀ᶠ ∂^δσ₀ᶠ)`.
pub fn bn_flat_direct(n: usize) -> Result<BilinearCoeffTable> {
    check_dim(n)?;
    let c = flat_pair_integrals(n, n / 2)?;
    let sign = phase_sign(n);
    let mut out = BilinearCoeffTable::new(n);
    for bo in 1..n as u32 {
        for beta in enumerate_multiindices(n, bo) {
            for ao in 0..(n as u32 - bo) {
                for alpha in enumerate_multiindices(n, ao) {
                    let gamma = &alpha + &beta;
                    for delta in enumerate_multiindices(n, n as u32 - bo - ao) {
                        if !(&gamma + &delta).all_even() {
                            continue;
                        }
                        let v = &c[&canonical_pair(&gamma, &delta)];
                        if v.is_zero() {
                            continue;
                        }
                        let den: BigInt = alpha.factorial() * beta.factorial() * delta.factorial();
                        let w = v * Q::new(BigInt::one(), den) * &sign;
                        out.add(beta.clone(), &alpha + &delta, &w);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Table from the general product-residue machinery (any symbol, slower); used to
/// cross-check the specialised flat route.
pub fn bn_from_residue_traces(traces: &BTreeMap<(MultiIndex, MultiIndex), MultiPoly>, n: usize) -> Result<BilinearCoeffTable> {
    let mut out = BilinearCoeffTable::new(n);
    for ((a, b), p) in traces {
        let v = integrate_poly(p, n);
        let c = v.as_constant().ok_or_else(|| Error::Consistency("formal symbols in flat residue".into()))?;
        if !c.is_real() {
            return Err(Error::Consistency(format!("imaginary coefficient at {:?} {:?}", a, b)));
        }
        out.add(a.clone(), b.clone(), &c.re);
    }
    Ok(out)
}

/// Trace of the identity on `Λ^m R^n`.
pub fn trace_identity(n: usize, m: usize) -> Result<MultiPoly> {
    trace(&crate::forms::FormOperator::identity(n, m, n, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{residue_trace_by_jets, GradedSymbol};

    #[test]
    fn closed_form_constants() {
        assert_eq!(psi_closed_form(4, 2), PsiClosedForm { n: 4, m: 2, a: qi(8), b: qi(-2) });
        assert_eq!(psi_closed_form(6, 3), PsiClosedForm { n: 6, m: 3, a: qi(24), b: qi(-4) });
        for n in 2..9 {
            for m in 1..n {
                let c = psi_closed_form(n, m);
                assert_eq!(&c.a + &c.b, qi(binomial(n as i64, m as i64)));
            }
        }
    }

    #[test]
    fn symbolic_psi_small() {
        for (n, m) in [(2, 1), (4, 1), (4, 2), (4, 3), (6, 3)] {
            assert!(psi_matches_closed_form(n, m).unwrap(), "n={} m={}", n, m);
        }
    }

    #[test]
    fn t_prime_shape() {
        let t = taylor_t_prime(4, 2);
        for k in t.terms.keys() {
            let (du, dv) = bideg(k);
            assert!(du >= 1 && dv >= 1 && du + dv == 4);
        }
    }

    // Along ξ = e₂, u = s·e₁, v = t·e₁: ψ = a(1+st)²/((1+s²)(1+t²)) + b, whose mixed
    // order-4 part is a(2s²t² − 2s³t − 2st³).
    #[test]
    fn t_prime_matches_coordinate_taylor() {
        let n = 4;
        let t = taylor_t_prime(n, 2).to_poly();
        let a = psi_closed_form(n, 2).a;
        let mut got: BTreeMap<(u8, u8), GaussianRational> = BTreeMap::new();
        for (mono, coef) in t.terms() {
            let on_e2 = mono.xi.iter().enumerate().all(|(j, &e)| j == 1 || e == 0);
            let on_e1 = (0..2 * n).all(|j| j == 0 || j == n || mono.x[j] == 0);
            if on_e2 && on_e1 {
                *got.entry((mono.x[0], mono.x[n])).or_insert_with(GaussianRational::zero) += coef;
            }
        }
        got.retain(|_, v| !v.is_zero());
        let want: BTreeMap<(u8, u8), GaussianRational> = [((2, 2), 2), ((3, 1), -2), ((1, 3), -2)]
            .into_iter()
            .map(|(k, c)| (k, GaussianRational::real(&a * qi(c))))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn two_dimensional_shape() {
        let t = bn_flat_coeffs(2).unwrap();
        let d = decompose_invariant(&t, 2).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].0, (1, 1, 1));
        assert!(!d[0].1.is_zero());
    }

    #[test]
    fn routes_agree_low_dims() {
        for n in [2, 4] {
            let a = bn_flat_coeffs(n).unwrap();
            let b = bn_flat_direct(n).unwrap();
            assert_eq!(a, b, "n = {}", n);
            assert!(a.is_symmetric());
            assert!(a.shape_ok(n as u32));
        }
    }

    #[test]
    fn general_residue_machinery_matches_flat_route() {
        let n = 4;
        let g = identity_metric(n, n, 0);
        let s = GradedSymbol::from_homog(principal_symbol_f(n, 2, &g, 0).unwrap());
        let traces = residue_trace_by_jets(&s, n).unwrap();
        let t = bn_from_residue_traces(&traces, n).unwrap();
        assert_eq!(t, bn_flat_direct(n).unwrap());
    }

    #[test]
    fn contraction_expansion() {
        let t = table_from_contractions(2, &[Contraction::new(qi(1), "ij", "ij")]).unwrap();
        assert_eq!(t.get(&MultiIndex::from_slice(&[2, 0]), &MultiIndex::from_slice(&[2, 0])), qi(1));
        assert_eq!(t.get(&MultiIndex::from_slice(&[1, 1]), &MultiIndex::from_slice(&[1, 1])), qi(2));
        assert!(table_from_contractions(2, &[Contraction::new(qi(1), "ij", "i")]).is_err());
    }

    #[test]
    fn reference_tables_decompose() {
        let t = table_from_contractions(4, &reference_b4_flat()).unwrap();
        let d = decompose_invariant(&t, 4).unwrap();
        assert_eq!(d.len(), 4);
        let s = symmetrized_display(&t, 4).unwrap();
        assert_eq!(s, "-4(f_{;abb} h_{;a} + h_{;abb} f_{;a}) - 4 f_{;ab} h_{;ab} - 2 f_{;aa} h_{;bb}");
    }
}
