//! Floating-point cross-checks, independent of the exact engines.
//!
//! Nothing here feeds back into exact results: sphere averages are sampled by Monte Carlo,
//! `ψ` is traced from dense matrices, and tensor expressions are evaluated from a random
//! polynomial metric with dense `f64` Taylor arithmetic.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{Head, TensorJetExpr};

/// Fixed seed used by the test suites.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Clone, Copy, Debug)]
pub struct NumericConfig {
    pub sample_count: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig { sample_count: 1_000_000, seed: DEFAULT_SEED, tolerance: 1e-9 }
    }
}

impl NumericConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count < 2 || self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Precondition("sample_count ≥ 2 and a positive tolerance are required".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Monte-Carlo average of `ξ^α` over the unit sphere `S^{n−1}` (normalized Gaussian samples).
pub fn mc_sphere_integral(alpha: &[u8], n: usize, cfg: &NumericConfig) -> Result<Estimate> {
    Ok(mc_sphere_moments(&[alpha.to_vec()], n, cfg)?[0])
}

/// Averages of several monomials from one shared set of samples.
pub fn mc_sphere_moments(alphas: &[Vec<u8>], n: usize, cfg: &NumericConfig) -> Result<Vec<Estimate>> {
    cfg.validate()?;
    if let Some(a) = alphas.iter().find(|a| a.len() != n) {
        return Err(Error::DimensionMismatch(format!("multi-index of length {} in dimension {}", a.len(), n)));
    }
    let top = alphas.iter().flatten().copied().max().unwrap_or(0) as usize;
    const CHUNKS: usize = 64;
    let per = cfg.sample_count.div_ceil(CHUNKS);
    let k = alphas.len();
    // (Σ v, Σ v²) per monomial, with streaming sums per chunk
    let sums: Vec<(Vec<f64>, Vec<f64>, usize)> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c as u64);
            let count = per.min(cfg.sample_count.saturating_sub(c * per));
            let (mut s, mut s2) = (vec![0.0; k], vec![0.0; k]);
            let mut v = vec![0.0f64; n];
            let mut pw = vec![vec![1.0f64; top + 1]; n];
            for _ in 0..count {
                let mut norm = 0.0;
                for x in v.iter_mut() {
                    *x = rng.sample(StandardNormal);
                    norm += *x * *x;
                }
                let inv = norm.sqrt().recip();
                for (j, x) in v.iter().enumerate() {
                    for e in 1..=top {
                        pw[j][e] = pw[j][e - 1] * x * inv;
                    }
                }
                for (i, a) in alphas.iter().enumerate() {
                    let val: f64 = a.iter().enumerate().map(|(j, &e)| pw[j][e as usize]).product();
                    s[i] += val;
                    s2[i] += val * val;
                }
            }
            (s, s2, count)
        })
        .collect();
    let total: usize = sums.iter().map(|c| c.2).sum();
    let kf = total as f64;
    Ok((0..k)
        .map(|i| {
            let s: f64 = sums.iter().map(|c| c.0[i]).sum();
            let s2: f64 = sums.iter().map(|c| c.1[i]).sum();
            let mean = s / kf;
            let var = (s2 / kf - mean * mean).max(0.0) * kf / (kf - 1.0);
            Estimate { mean, std_error: (var / kf).sqrt() }
        })
        .collect())
}

fn form_basis(n: usize, m: usize) -> Vec<Vec<usize>> {
    (0..n).combinations(m).collect()
}

/// Matrix of `ε_v: Λ^m → Λ^{m+1}`.
fn wedge_matrix(v: &[f64], n: usize, m: usize) -> DMatrix<f64> {
    let src = form_basis(n, m);
    let dst = form_basis(n, m + 1);
    let index: HashMap<Vec<usize>, usize> = dst.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
    let mut out = DMatrix::zeros(dst.len(), src.len());
    for (j, b) in src.iter().enumerate() {
        for (k, &vk) in v.iter().enumerate() {
            if vk == 0.0 || b.contains(&k) {
                continue;
            }
            let pos = b.iter().filter(|&&x| x < k).count();
            let mut nb = b.clone();
            nb.insert(pos, k);
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            out[(index[&nb], j)] += sign * vk;
        }
    }
    out
}

/// `σ₀ᶠ(ξ) = (ε_ξ ι_ξ − ι_ξ ε_ξ)/‖ξ‖²` on `Λ^m`, with `ι = εᵀ` for the Euclidean metric.
fn f_symbol_matrix(xi: &[f64], n: usize, m: usize) -> DMatrix<f64> {
    let norm2: f64 = xi.iter().map(|x| x * x).sum();
    let up = wedge_matrix(xi, n, m);
    let mut ei = DMatrix::zeros(up.ncols(), up.ncols());
    if m > 0 {
        let down = wedge_matrix(xi, n, m - 1);
        ei = &down * down.transpose();
    }
    let ie = up.transpose() * &up;
    (ei - ie) / norm2
}

/// `tr(σ₀ᶠ(ξ) σ₀ᶠ(η))` from explicit matrices.
pub fn numeric_psi(xi: &[f64], eta: &[f64], n: usize, m: usize) -> Result<f64> {
    if xi.len() != n || eta.len() != n {
        return Err(Error::DimensionMismatch("covector length differs from n".into()));
    }
    if m > n {
        return Err(Error::Domain(format!("form degree {} exceeds dimension {}", m, n)));
    }
    if xi.iter().all(|&x| x == 0.0) || eta.iter().all(|&x| x == 0.0) {
        return Err(Error::Domain("ψ is undefined at the zero covector".into()));
    }
    let a = f_symbol_matrix(xi, n, m);
    let b = f_symbol_matrix(eta, n, m);
    Ok((a * b).trace())
}

/// Truncated Taylor polynomials in `n` variables. Monomials are ordered by degree, so a
/// polynomial of degree `≤ d` is a prefix of length `upto[d]` (shorter vectors pad with zeros).
struct TaylorSpace {
    n: usize,
    monos: Vec<Vec<u8>>,
    degree: Vec<u32>,
    upto: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
}

type Tp = Vec<f64>;

impl TaylorSpace {
    fn new(n: usize, deg: u32) -> Self {
        let mut monos: Vec<Vec<u8>> = vec![vec![0; n]];
        let mut upto = vec![1];
        let mut frontier = monos.clone();
        for _ in 0..deg {
            let mut next = Vec::new();
            for m in &frontier {
                let last = m.iter().rposition(|&e| e > 0).unwrap_or(0);
                for j in last..n {
                    let mut mm = m.clone();
                    mm[j] += 1;
                    next.push(mm);
                }
            }
            monos.extend(next.iter().cloned());
            upto.push(monos.len());
            frontier = next;
        }
        let degree = monos.iter().map(|m| m.iter().map(|&e| e as u32).sum()).collect();
        let index = monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        TaylorSpace { n, monos, degree, upto, index }
    }

    fn len(&self, d: u32) -> usize {
        self.upto[(d as usize).min(self.upto.len() - 1)]
    }

    fn zero(&self) -> Tp {
        Vec::new()
    }

    /// Zero polynomial with room for every monomial.
    fn full(&self) -> Tp {
        vec![0.0; self.monos.len()]
    }

    fn constant(&self, c: f64) -> Tp {
        vec![c]
    }

    fn truncate(&self, p: &mut Tp, d: u32) {
        p.truncate(self.len(d));
    }

    fn mul(&self, a: &Tp, b: &Tp, d: u32) -> Tp {
        let cap = self.len(d);
        let mut out = vec![0.0; cap];
        let nz: Vec<usize> = (0..b.len().min(cap)).filter(|&j| b[j] != 0.0).collect();
        if nz.is_empty() {
            return Vec::new();
        }
        let mut key = vec![0u8; self.n];
        for (i, &av) in a.iter().take(cap).enumerate() {
            if av == 0.0 {
                continue;
            }
            for &j in &nz {
                if self.degree[i] + self.degree[j] > d {
                    continue;
                }
                for k in 0..self.n {
                    key[k] = self.monos[i][k] + self.monos[j][k];
                }
                out[self.index[&key]] += av * b[j];
            }
        }
        out
    }

    fn partial(&self, p: &Tp, j: usize) -> Tp {
        let top = match p.len() {
            0 | 1 => return Vec::new(),
            l => self.degree[l - 1],
        };
        let mut out = vec![0.0; self.len(top - 1)];
        let mut key = vec![0u8; self.n];
        for (i, &v) in p.iter().enumerate() {
            let e = self.monos[i][j];
            if v == 0.0 || e == 0 {
                continue;
            }
            key.copy_from_slice(&self.monos[i]);
            key[j] -= 1;
            out[self.index[&key]] += v * e as f64;
        }
        out
    }

    fn add_scaled(&self, a: &mut Tp, b: &Tp, s: f64) {
        if a.len() < b.len() {
            a.resize(b.len(), 0.0);
        }
        for (x, y) in a.iter_mut().zip(b) {
            *x += s * y;
        }
    }
}

/// Random metric and scalar functions as Taylor polynomials at the origin.
pub struct NumericAssignment {
    pub n: usize,
    pub degree: u32,
    /// Symmetric metric Taylor coefficients beyond `δ` (degree ≥ 2, so `∂g(0) = 0`).
    metric: Vec<Vec<BTreeMap<Vec<u8>, f64>>>,
    funcs: BTreeMap<char, BTreeMap<Vec<u8>, f64>>,
}

/// Random value `k/8` with `|k| ≤ 8`: small rationals exactly representable in `f64`.
fn small_rational(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-8i32..=8) as f64 / 8.0
}

impl NumericAssignment {
    /// Random jets of `funcs` and (if `curved`) of the metric, up to Taylor degree `degree`.
    pub fn random(n: usize, funcs: &[char], degree: u32, curved: bool, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = TaylorSpace::new(n, degree);
        let mut metric = vec![vec![BTreeMap::new(); n]; n];
        if curved {
            for i in 0..n {
                for j in i..n {
                    for (k, m) in space.monos.iter().enumerate() {
                        if space.degree[k] >= 2 {
                            let v = small_rational(&mut rng);
                            metric[i][j].insert(m.clone(), v);
                            metric[j][i].insert(m.clone(), v);
                        }
                    }
                }
            }
        }
        let mut fm = BTreeMap::new();
        for &f in funcs {
            let mut p = BTreeMap::new();
            for m in &space.monos {
                p.insert(m.clone(), small_rational(&mut rng));
            }
            fm.insert(f, p);
        }
        NumericAssignment { n, degree, metric, funcs: fm }
    }
}

struct NumericChart<'a> {
    sp: TaylorSpace,
    a: &'a NumericAssignment,
    g: Vec<Vec<Tp>>,
    gi: Vec<Vec<Tp>>,
    gamma: Vec<Tp>,
}

struct NField {
    rank: usize,
    comps: Vec<Tp>,
    valid: u32,
}

impl<'a> NumericChart<'a> {
    fn new(a: &'a NumericAssignment) -> Self {
        let n = a.n;
        let sp = TaylorSpace::new(n, a.degree);
        let d = a.degree;
        let poly = |m: &BTreeMap<Vec<u8>, f64>| {
            let mut p = sp.full();
            for (k, v) in m {
                // coefficients are x^α/α! Taylor data
                let fact: f64 = k.iter().map(|&e| (1..=e as u64).product::<u64>() as f64).product();
                p[sp.index[k]] += v / fact;
            }
            p
        };
        let g: Vec<Vec<Tp>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut p = poly(&a.metric[i][j]);
                        if i == j {
                            p[0] += 1.0;
                        }
                        p
                    })
                    .collect()
            })
            .collect();
        // g⁻¹ = Σ (−E)^k
        let e: Vec<Vec<Tp>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut p = g[i][j].clone();
                        if i == j {
                            p[0] -= 1.0;
                        }
                        p
                    })
                    .collect()
            })
            .collect();
        let ident = |i: usize, j: usize| if i == j { sp.constant(1.0) } else { sp.zero() };
        let mut gi: Vec<Vec<Tp>> = (0..n).map(|i| (0..n).map(|j| ident(i, j)).collect()).collect();
        let mut pw = gi.clone();
        for k in 1..=d {
            let mut next = vec![vec![sp.zero(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let t = sp.mul(&pw[i][l], &e[l][j], d);
                        sp.add_scaled(&mut next[i][j], &t, 1.0);
                    }
                }
            }
            pw = next;
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..n {
                for j in 0..n {
                    let t = pw[i][j].clone();
                    sp.add_scaled(&mut gi[i][j], &t, s);
                }
            }
        }
        let mut gamma = vec![sp.zero(); n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = sp.zero();
                    for l in 0..n {
                        let mut low = sp.partial(&g[j][l], i);
                        sp.add_scaled(&mut low, &sp.partial(&g[i][l], j), 1.0);
                        sp.add_scaled(&mut low, &sp.partial(&g[i][j], l), -1.0);
                        let t = sp.mul(&gi[k][l], &low, d.saturating_sub(1));
                        sp.add_scaled(&mut acc, &t, 0.5);
                    }
                    gamma[k * n * n + i * n + j] = acc;
                }
            }
        }
        NumericChart { sp, a, g, gi, gamma }
    }

    fn nabla(&self, t: &NField) -> Result<NField> {
        if t.valid == 0 {
            return Err(Error::TruncationUnsound("numeric Taylor degree exhausted".into()));
        }
        let n = self.a.n;
        let valid = t.valid - 1;
        let mut comps = Vec::with_capacity(t.comps.len() * n);
        for (ii, c) in t.comps.iter().enumerate() {
            for a in 0..n {
                let mut acc = self.sp.partial(c, a);
                let mut stride = 1;
                for _ in 0..t.rank {
                    let is = (ii / stride) % n;
                    for e in 0..n {
                        let jj = ii - is * stride + e * stride;
                        let prod = self.sp.mul(&self.gamma[e * n * n + a * n + is], &t.comps[jj], valid);
                        self.sp.add_scaled(&mut acc, &prod, -1.0);
                    }
                    stride *= n;
                }
                self.sp.truncate(&mut acc, valid);
                comps.push(acc);
            }
        }
        Ok(NField { rank: t.rank + 1, comps, valid })
    }

    fn riemann(&self) -> Result<NField> {
        let n = self.a.n;
        let sp = &self.sp;
        let valid = self.a.degree.checked_sub(2).ok_or_else(|| Error::TruncationUnsound("degree below 2".into()))?;
        let gm = |k: usize, i: usize, j: usize| &self.gamma[k * n * n + i * n + j];
        let mut comps = vec![sp.zero(); n.pow(4)];
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    // (R(∂_a,∂_b)∂_d)^e
                    let mut up: Vec<Tp> = Vec::with_capacity(n);
                    for e in 0..n {
                        let mut r = sp.partial(gm(e, b, d), a);
                        sp.add_scaled(&mut r, &sp.partial(gm(e, a, d), b), -1.0);
                        for f in 0..n {
                            sp.add_scaled(&mut r, &sp.mul(gm(f, b, d), gm(e, a, f), valid), 1.0);
                            sp.add_scaled(&mut r, &sp.mul(gm(f, a, d), gm(e, b, f), valid), -1.0);
                        }
                        up.push(r);
                    }
                    for c in 0..n {
                        let mut acc = sp.zero();
                        for (e, r) in up.iter().enumerate() {
                            sp.add_scaled(&mut acc, &sp.mul(&self.g[c][e], r, valid), 1.0);
                        }
                        comps[((a * n + b) * n + c) * n + d] = acc;
                    }
                }
            }
        }
        Ok(NField { rank: 4, comps, valid })
    }

    fn trace(&self, t: &NField, s1: usize, s2: usize) -> NField {
        let n = self.a.n;
        let rank = t.rank - 2;
        let mut comps = Vec::new();
        for pos in 0..n.pow(rank as u32) {
            let rest: Vec<usize> = (0..rank).rev().map(|k| (pos / n.pow(k as u32)) % n).collect();
            let mut acc = self.sp.zero();
            for a in 0..n {
                for c in 0..n {
                    let mut full = Vec::with_capacity(t.rank);
                    let mut it = rest.iter();
                    for slot in 0..t.rank {
                        full.push(if slot == s1 {
                            a
                        } else if slot == s2 {
                            c
                        } else {
                            *it.next().unwrap()
                        });
                    }
                    let idx = full.iter().fold(0, |acc, &v| acc * n + v);
                    let p = self.sp.mul(&self.gi[a][c], &t.comps[idx], t.valid);
                    self.sp.add_scaled(&mut acc, &p, 1.0);
                }
            }
            comps.push(acc);
        }
        NField { rank, comps, valid: t.valid }
    }

    fn base(&self, head: Head, k: usize) -> Result<NField> {
        let n = self.a.n;
        let nf = n as f64;
        let sp = &self.sp;
        Ok(match head {
            Head::Jet(c) => {
                let m = self.a.funcs.get(&c).ok_or_else(|| Error::Unassigned(format!("no values for function {}", c)))?;
                let mut p = sp.full();
                for (key, v) in m {
                    let fact: f64 = key.iter().map(|&e| (1..=e as u64).product::<u64>() as f64).product();
                    p[sp.index[key]] += v / fact;
                }
                let valid = (k as u32).min(self.a.degree);
                sp.truncate(&mut p, valid);
                NField { rank: 0, comps: vec![p], valid }
            }
            Head::Metric => NField { rank: 2, comps: (0..n * n).map(|p| self.g[p / n][p % n].clone()).collect(), valid: self.a.degree },
            Head::Riem => self.riemann()?,
            Head::Ric => self.trace(&self.riemann()?, 0, 2),
            Head::Scal => {
                let r = self.base(Head::Ric, 0)?;
                self.trace(&r, 0, 1)
            }
            Head::J => {
                let mut s = self.base(Head::Scal, 0)?;
                s.comps[0].iter_mut().for_each(|v| *v /= 2.0 * (nf - 1.0));
                s
            }
            Head::Rho | Head::Weyl => {
                if n < 3 {
                    return Err(Error::Domain("Schouten tensor needs n ≥ 3".into()));
                }
                let ric = self.base(Head::Ric, 0)?;
                let j = self.base(Head::J, 0)?;
                let mut rho = ric;
                for p in 0..n * n {
                    let t = sp.mul(&self.g[p / n][p % n], &j.comps[0], rho.valid);
                    sp.add_scaled(&mut rho.comps[p], &t, -1.0);
                    rho.comps[p].iter_mut().for_each(|v| *v /= nf - 2.0);
                }
                if head == Head::Rho {
                    rho
                } else {
                    let mut w = self.riemann()?;
                    for pos in 0..n.pow(4) {
                        let (i, jj, kk, l) = (pos / (n * n * n), (pos / (n * n)) % n, (pos / n) % n, pos % n);
                        for (p, q, g1, g2, s) in [(jj, kk, i, l, 1.0), (jj, l, i, kk, -1.0), (i, l, jj, kk, 1.0), (i, kk, jj, l, -1.0)] {
                            let t = sp.mul(&rho.comps[p * n + q], &self.g[g1][g2], w.valid);
                            sp.add_scaled(&mut w.comps[pos], &t, s);
                        }
                    }
                    w
                }
            }
        })
    }

    fn components(&self, head: Head, k: usize) -> Result<Vec<f64>> {
        if head == Head::Metric && k > 0 {
            return Ok(vec![0.0; self.a.n.pow(2 + k as u32)]);
        }
        let mut f = self.base(head, k)?;
        for _ in 0..k {
            f = self.nabla(&f)?;
        }
        Ok(f.comps.iter().map(|p| p.first().copied().unwrap_or(0.0)).collect())
    }
}

/// Numeric value of a scalar expression under a random assignment.
pub fn random_jet_eval(e: &TensorJetExpr, a: &NumericAssignment) -> Result<f64> {
    Ok(term_values(e, a)?.iter().sum())
}

/// Value of every term of `e` separately.
pub fn term_values(e: &TensorJetExpr, a: &NumericAssignment) -> Result<Vec<f64>> {
    if e.n != a.n {
        return Err(Error::DimensionMismatch("assignment dimension differs".into()));
    }
    if !e.free.is_empty() {
        return Err(Error::Precondition("expression has free indices".into()));
    }
    e.validate()?;
    let chart = NumericChart::new(a);
    let n = a.n;
    let mut cache: HashMap<(Head, usize), Vec<f64>> = HashMap::new();
    let mut values = Vec::with_capacity(e.terms.len());
    for t in &e.terms {
        let mut tabs = Vec::new();
        for f in &t.factors {
            let key = (f.head, f.order());
            if !cache.contains_key(&key) {
                cache.insert(key, chart.components(f.head, f.order())?);
            }
            tabs.push(key);
        }
        let dummies = t.dummies();
        let mut value = [0usize; 256];
        let mut sum = 0.0;
        for mut code in 0..n.pow(dummies.len() as u32) {
            for &d in &dummies {
                value[d as usize] = code % n;
                code /= n;
            }
            let mut prod = 1.0;
            for (f, key) in t.factors.iter().zip(&tabs) {
                let idx = f.idx.iter().fold(0, |acc, &l| acc * n + value[l as usize]);
                prod *= cache[key][idx];
                if prod == 0.0 {
                    break;
                }
            }
            sum += prod;
        }
        values.push(crate::flat::to_f64(&t.coeff) * sum);
    }
    Ok(values)
}

/// Taylor degree sufficient for `e` (jets need their order; curvature with `k` derivatives
/// needs metric degree `k + 2`).
pub fn required_degree(e: &TensorJetExpr) -> u32 {
    let mut d = 2u32;
    for t in &e.terms {
        for f in &t.factors {
            let need = match f.head {
                Head::Jet(_) => f.order() as u32,
                Head::Metric => 0,
                _ => f.order() as u32 + 2,
            };
            d = d.max(need);
        }
    }
    d
}

/// Largest `|value|` of `e` over `count` random assignments, with the matching scale
/// (largest `|value|` of the individual terms) for relative comparisons.
pub fn max_abs_over_assignments(e: &TensorJetExpr, funcs: &[char], curved: bool, count: usize, seed: u64) -> Result<(f64, f64)> {
    let degree = required_degree(e);
    let results: Vec<Result<(f64, f64)>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let a = NumericAssignment::random(e.n, funcs, degree, curved, seed.wrapping_add(k as u64));
            let v = term_values(e, &a)?;
            let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            Ok((v.iter().sum::<f64>().abs(), scale))
        })
        .collect();
    let mut worst = (0.0f64, 0.0f64);
    for r in results {
        let (v, s) = r?;
        worst = (worst.0.max(v), worst.1.max(s));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(n: usize, s: &str) -> TensorJetExpr {
        TensorJetExpr::parse(n, s).unwrap()
    }

    #[test]
    fn psi_examples() {
        let e1 = [1.0, 0.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0, 0.0];
        assert!((numeric_psi(&e1, &e1, 4, 2).unwrap() - 6.0).abs() < 1e-12);
        assert!((numeric_psi(&e1, &e2, 4, 2).unwrap() + 2.0).abs() < 1e-12);
        let f1 = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let f2 = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        assert!((numeric_psi(&f1, &f2, 6, 3).unwrap() + 4.0).abs() < 1e-12);
        assert!(matches!(numeric_psi(&[0.0; 4], &e1, 4, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn sphere_moments() {
        let cfg = NumericConfig { sample_count: 200_000, ..Default::default() };
        let e = mc_sphere_integral(&[2, 0, 0, 0], 4, &cfg).unwrap();
        assert!((e.mean - 0.25).abs() < 4.0 * e.std_error);
        let e = mc_sphere_integral(&[1, 0, 0, 0], 4, &cfg).unwrap();
        assert!(e.mean.abs() < 4.0 * e.std_error);
    }

    #[test]
    fn numeric_evaluator_identities() {
        let a = NumericAssignment::random(3, &['f', 'h'], 4, true, 7);
        let ricci = ex(3, "f;cab h;cab - f;cba h;cab - R[bacd] f;d h;cab");
        assert!(random_jet_eval(&ricci, &a).unwrap().abs() < 1e-9);
        let wrong = ex(3, "f;cab h;cab - f;cba h;cab + R[bacd] f;d h;cab");
        assert!(random_jet_eval(&wrong, &a).unwrap().abs() > 1e-6);
        let same = ex(3, "f;ab h;ab - f;ab h;ab");
        assert_eq!(random_jet_eval(&same, &a).unwrap(), 0.0);
        let b = NumericAssignment::random(4, &['f'], 3, true, 11);
        assert!(random_jet_eval(&ex(4, "rho[ab];a f;b - J;b f;b"), &b).unwrap().abs() < 1e-9);
        assert!(matches!(random_jet_eval(&ex(4, "k;a k;a"), &b), Err(Error::Unassigned(_))));
    }
}
