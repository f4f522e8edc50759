//! Abstract-index expressions in covariant jets of scalar functions and curvature.
//!
//! All indices are lower (orthonormal-frame convention); a label occurring twice in a term
//! is contracted with the metric. Derivative indices are listed in the order applied:
//! `T_{;ab} = ∇_b ∇_a T`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use smallvec::SmallVec;

use crate::algebra::{fmt_q, parse_q, Q};
use crate::error::{Error, Result};

pub type Label = u8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Head {
    /// Scalar function (`f`, `h`, `k`, …).
    Jet(char),
    Riem,
    Rho,
    J,
    Ric,
    Scal,
    Weyl,
    Metric,
}

impl Head {
    pub fn slots(self) -> usize {
        match self {
            Head::Riem | Head::Weyl => 4,
            Head::Rho | Head::Ric | Head::Metric => 2,
            Head::Jet(_) | Head::J | Head::Scal => 0,
        }
    }

    pub fn is_curvature(self) -> bool {
        !matches!(self, Head::Jet(_) | Head::Metric)
    }

    pub fn plain(self) -> String {
        match self {
            Head::Jet(c) => c.to_string(),
            Head::Riem => "R".into(),
            Head::Rho => "rho".into(),
            Head::J => "J".into(),
            Head::Ric => "Ric".into(),
            Head::Scal => "Sc".into(),
            Head::Weyl => "W".into(),
            Head::Metric => "g".into(),
        }
    }

    fn latex(self) -> String {
        match self {
            Head::Rho => "\\rho".into(),
            Head::Ric => "\\mathrm{Rc}".into(),
            Head::Scal => "\\mathrm{Sc}".into(),
            h => h.plain(),
        }
    }

    fn parse(name: &str) -> Result<Head> {
        Ok(match name {
            "R" => Head::Riem,
            "rho" | "ρ" => Head::Rho,
            "J" => Head::J,
            "Ric" | "Rc" => Head::Ric,
            "Sc" => Head::Scal,
            "W" => Head::Weyl,
            "g" => Head::Metric,
            s if s.chars().count() == 1 && s.chars().all(|c| c.is_lowercase()) => Head::Jet(s.chars().next().unwrap()),
            s => return Err(Error::Structural(format!("unknown tensor name '{}'", s))),
        })
    }
}

pub fn label_char(l: Label) -> String {
    match l {
        0..=25 => ((b'a' + l) as char).to_string(),
        26..=51 => ((b'A' + l - 26) as char).to_string(),
        _ => format!("x{}", l),
    }
}

fn parse_label(c: char) -> Result<Label> {
    match c {
        'a'..='z' => Ok(c as u8 - b'a'),
        'A'..='Z' => Ok(c as u8 - b'A' + 26),
        _ => Err(Error::Structural(format!("invalid index label '{}'", c))),
    }
}

/// One tensor factor: slot indices followed by covariant-derivative indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub head: Head,
    pub idx: SmallVec<[Label; 8]>,
}

impl Factor {
    pub fn new(head: Head, slots: &[Label], derivs: &[Label]) -> Self {
        debug_assert_eq!(slots.len(), head.slots());
        let mut idx: SmallVec<[Label; 8]> = SmallVec::from_slice(slots);
        idx.extend_from_slice(derivs);
        Factor { head, idx }
    }

    pub fn jet(func: char, derivs: &[Label]) -> Self {
        Factor::new(Head::Jet(func), &[], derivs)
    }

    pub fn slots(&self) -> &[Label] {
        &self.idx[..self.head.slots()]
    }

    pub fn derivs(&self) -> &[Label] {
        &self.idx[self.head.slots()..]
    }

    pub fn order(&self) -> usize {
        self.derivs().len()
    }

    pub fn with_deriv(&self, l: Label) -> Factor {
        let mut f = self.clone();
        f.idx.push(l);
        f
    }

    fn render(&self, latex: bool) -> String {
        let name = if latex { self.head.latex() } else { self.head.plain() };
        let slots: String = self.slots().iter().map(|&l| label_char(l)).collect();
        let derivs: String = self.derivs().iter().map(|&l| label_char(l)).collect();
        if slots.is_empty() && derivs.is_empty() {
            return name;
        }
        if derivs.is_empty() {
            format!("{}_{{{}}}", name, slots)
        } else {
            format!("{}_{{{};{}}}", name, slots, derivs)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Q,
    pub factors: Vec<Factor>,
}

impl Term {
    pub fn new(coeff: Q, factors: Vec<Factor>) -> Self {
        Term { coeff, factors }
    }

    /// Occurrence count of every label.
    pub fn label_counts(&self) -> BTreeMap<Label, usize> {
        let mut m = BTreeMap::new();
        for f in &self.factors {
            for &l in &f.idx {
                *m.entry(l).or_insert(0) += 1;
            }
        }
        m
    }

    pub fn dummies(&self) -> Vec<Label> {
        self.label_counts().into_iter().filter(|(_, c)| *c == 2).map(|(l, _)| l).collect()
    }

    /// Number of curvature factors.
    pub fn deg_r(&self) -> usize {
        self.factors.iter().filter(|f| f.head.is_curvature()).count()
    }

    /// Number of covariant derivatives, on jets and curvature alike.
    pub fn deg_nabla(&self) -> usize {
        self.factors.iter().map(|f| f.order()).sum()
    }

    pub fn jet_factor(&self, func: char) -> Option<(usize, &Factor)> {
        self.factors.iter().enumerate().find(|(_, f)| f.head == Head::Jet(func))
    }

    pub fn count_func(&self, func: char) -> usize {
        self.factors.iter().filter(|f| f.head == Head::Jet(func)).count()
    }

    fn used_labels(&self) -> BTreeSet<Label> {
        self.factors.iter().flat_map(|f| f.idx.iter().copied()).collect()
    }

    pub fn relabel(&self, map: &dyn Fn(Label) -> Label) -> Term {
        Term {
            coeff: self.coeff.clone(),
            factors: self
                .factors
                .iter()
                .map(|f| Factor { head: f.head, idx: f.idx.iter().map(|&l| map(l)).collect() })
                .collect(),
        }
    }

    fn render(&self, latex: bool) -> String {
        self.factors.iter().map(|f| f.render(latex)).collect::<Vec<_>>().join(" ")
    }
}

/// Sum of terms with a common list of free indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorJetExpr {
    pub n: usize,
    pub free: Vec<Label>,
    pub terms: Vec<Term>,
}

/// First label not in `used`.
pub fn fresh_label(used: &BTreeSet<Label>) -> Label {
    (0..=255u8).find(|l| !used.contains(l)).expect("label space exhausted")
}

impl TensorJetExpr {
    pub fn zero(n: usize, free: Vec<Label>) -> Self {
        TensorJetExpr { n, free, terms: Vec::new() }
    }

    pub fn from_terms(n: usize, free: Vec<Label>, terms: Vec<Term>) -> Result<Self> {
        let e = TensorJetExpr { n, free, terms };
        e.validate()?;
        Ok(e)
    }

    /// Parse `"-4 f;ijj h;i + 2 R[abcd] f;ac h;bd - 1/3 J f;a h;a"`.
    ///
    /// Factors are `name[slots];derivs`, `name;derivs` or `name`. Single lowercase letters are
    /// scalar functions; `R`, `W`, `Ric`, `rho`, `Sc`, `J`, `g` are curvature and metric.
    /// Labels occurring once are free and must agree across terms.
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut coeff = Q::one();
        let mut sign = Q::one();
        let mut factors: Vec<Factor> = Vec::new();
        let mut started = false;
        let flush = |coeff: &Q, sign: &Q, factors: &mut Vec<Factor>, terms: &mut Vec<Term>, started: bool| {
            if started {
                terms.push(Term::new(coeff * sign, std::mem::take(factors)));
            }
        };
        for tok in s.split_whitespace() {
            match tok {
                "+" | "-" => {
                    flush(&coeff, &sign, &mut factors, &mut terms, started);
                    sign = if tok == "-" { -Q::one() } else { Q::one() };
                    coeff = Q::one();
                    started = false;
                }
                t if t.starts_with(|c: char| c.is_ascii_digit() || c == '-') && parse_q(t).is_some() => {
                    coeff = &coeff * parse_q(t).unwrap();
                    started = true;
                }
                t => {
                    factors.push(parse_factor(t)?);
                    started = true;
                }
            }
        }
        flush(&coeff, &sign, &mut factors, &mut terms, started);
        let free = match terms.first() {
            Some(t) => t.label_counts().into_iter().filter(|(_, c)| *c == 1).map(|(l, _)| l).collect(),
            None => Vec::new(),
        };
        Self::from_terms(n, free, terms)
    }

    /// Every label occurs twice, or once if free; free labels occur in every term.
    pub fn validate(&self) -> Result<()> {
        let free: BTreeSet<Label> = self.free.iter().copied().collect();
        for t in &self.terms {
            for f in &t.factors {
                if f.idx.len() < f.head.slots() {
                    return Err(Error::Structural(format!("{:?} needs {} slot indices", f.head, f.head.slots())));
                }
            }
            let counts = t.label_counts();
            for (l, c) in &counts {
                let ok = if free.contains(l) { *c == 1 } else { *c == 2 };
                if !ok {
                    return Err(Error::Structural(format!(
                        "index {} occurs {} times in '{}'",
                        label_char(*l),
                        c,
                        t.render(false)
                    )));
                }
            }
            for l in &free {
                if !counts.contains_key(l) {
                    return Err(Error::Structural(format!("free index {} missing in '{}'", label_char(*l), t.render(false))));
                }
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, t: Term) {
        if !t.coeff.is_zero() {
            self.terms.push(t);
        }
    }

    pub fn add(&self, o: &TensorJetExpr) -> Result<TensorJetExpr> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch("expressions in different dimensions".into()));
        }
        let a: BTreeSet<Label> = self.free.iter().copied().collect();
        let b: BTreeSet<Label> = o.free.iter().copied().collect();
        if a != b {
            return Err(Error::Structural("free indices differ".into()));
        }
        let mut out = self.clone();
        out.terms.extend(o.terms.iter().cloned());
        Ok(out)
    }

    pub fn scale(&self, s: &Q) -> TensorJetExpr {
        let mut out = self.clone();
        if s.is_zero() {
            out.terms.clear();
        }
        for t in &mut out.terms {
            t.coeff = &t.coeff * s;
        }
        out
    }

    pub fn sub(&self, o: &TensorJetExpr) -> Result<TensorJetExpr> {
        self.add(&o.scale(&-Q::one()))
    }

    /// Product; dummy labels of `o` are renamed away from every label of `self`.
    pub fn mul(&self, o: &TensorJetExpr) -> Result<TensorJetExpr> {
        let shared: BTreeSet<Label> = self.free.iter().filter(|l| o.free.contains(l)).copied().collect();
        if !shared.is_empty() {
            return Err(Error::Structural("factors share a free index".into()));
        }
        let mut free = self.free.clone();
        free.extend(o.free.iter().copied());
        let mut out = TensorJetExpr::zero(self.n, free.clone());
        for a in &self.terms {
            for b in &o.terms {
                let mut used: BTreeSet<Label> = a.used_labels();
                used.extend(free.iter().copied());
                let mut map = BTreeMap::new();
                for l in b.dummies() {
                    let nl = fresh_label(&used);
                    used.insert(nl);
                    map.insert(l, nl);
                }
                let b2 = b.relabel(&|l| *map.get(&l).unwrap_or(&l));
                let mut factors = a.factors.clone();
                factors.extend(b2.factors);
                out.push(Term::new(&a.coeff * &b.coeff, factors));
            }
        }
        Ok(out)
    }

    /// Multiply every term by a scalar factor without indices.
    pub fn times_factor(&self, f: Factor) -> TensorJetExpr {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.factors.push(f.clone());
        }
        out
    }

    /// `∇_l` by the Leibniz rule. If `l` is free in `self` the result is the divergence in
    /// that index; otherwise `l` becomes a new free index.
    pub fn derivative(&self, l: Label) -> Result<TensorJetExpr> {
        let contracted = self.free.contains(&l);
        let free: Vec<Label> = if contracted {
            self.free.iter().copied().filter(|&x| x != l).collect()
        } else {
            let mut f = self.free.clone();
            f.push(l);
            f
        };
        let mut out = TensorJetExpr::zero(self.n, free);
        for t in &self.terms {
            if !contracted && t.used_labels().contains(&l) {
                return Err(Error::Structural(format!("label {} already used as a dummy", label_char(l))));
            }
            for k in 0..t.factors.len() {
                if t.factors[k].head == Head::Metric {
                    continue;
                }
                let mut factors = t.factors.clone();
                factors[k] = factors[k].with_deriv(l);
                out.push(Term::new(t.coeff.clone(), factors));
            }
        }
        Ok(out)
    }

    /// Rename a free index.
    pub fn rename_free(&self, from: Label, to: Label) -> Result<TensorJetExpr> {
        let mut out = TensorJetExpr::zero(self.n, self.free.iter().map(|&l| if l == from { to } else { l }).collect());
        for t in &self.terms {
            let mut t2 = t.clone();
            if t.used_labels().contains(&to) && from != to {
                let mut used = t.used_labels();
                used.extend(out.free.iter().copied());
                let nl = fresh_label(&used);
                t2 = t2.relabel(&|l| if l == to { nl } else { l });
            }
            out.push(t2.relabel(&|l| if l == from { to } else { l }));
        }
        Ok(out)
    }

    /// Replace each jet of `func` by the Leibniz expansion of the product `a·b`:
    /// `(ab)_{;I} = Σ_{S ⊆ I} a_{;S} b_{;I∖S}`, order within `I` preserved.
    pub fn substitute_product(&self, func: char, a: char, b: char) -> TensorJetExpr {
        let mut out = TensorJetExpr::zero(self.n, self.free.clone());
        for t in &self.terms {
            let mut partial: Vec<Vec<Factor>> = vec![Vec::new()];
            for f in &t.factors {
                if f.head != Head::Jet(func) {
                    for p in &mut partial {
                        p.push(f.clone());
                    }
                    continue;
                }
                let d = f.derivs();
                let mut next = Vec::new();
                for p in &partial {
                    for mask in 0u32..(1 << d.len()) {
                        let sa: Vec<Label> = (0..d.len()).filter(|i| mask >> i & 1 == 1).map(|i| d[i]).collect();
                        let sb: Vec<Label> = (0..d.len()).filter(|i| mask >> i & 1 == 0).map(|i| d[i]).collect();
                        let mut q = p.clone();
                        q.push(Factor::jet(a, &sa));
                        q.push(Factor::jet(b, &sb));
                        next.push(q);
                    }
                }
                partial = next;
            }
            for p in partial {
                out.push(Term::new(t.coeff.clone(), p));
            }
        }
        out
    }

    /// Rename scalar functions simultaneously.
    pub fn rename_funcs(&self, map: &[(char, char)]) -> TensorJetExpr {
        let mut out = self.clone();
        for t in &mut out.terms {
            for f in &mut t.factors {
                if let Head::Jet(c) = f.head {
                    if let Some((_, to)) = map.iter().find(|(from, _)| *from == c) {
                        f.head = Head::Jet(*to);
                    }
                }
            }
        }
        out
    }

    /// `(2·deg_R + deg_∇)` of every term.
    pub fn weights(&self) -> BTreeSet<usize> {
        self.terms.iter().map(|t| 2 * t.deg_r() + t.deg_nabla()).collect()
    }

    /// Whether every term satisfies `2·deg_R + deg_∇ = n`.
    pub fn homogeneity_audit(&self, n: usize) -> bool {
        self.terms.iter().all(|t| 2 * t.deg_r() + t.deg_nabla() == n)
    }

    pub fn to_latex(&self) -> String {
        render(self, true)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dimension": self.n,
            "free": self.free.iter().map(|&l| label_char(l)).collect::<Vec<_>>(),
            "terms": self.terms.iter().map(|t| json!({
                "coeff": fmt_q(&t.coeff),
                "factors": t.factors.iter().map(|f| json!({
                    "tensor": f.head.plain(),
                    "slots": f.slots().iter().map(|&l| label_char(l)).collect::<Vec<_>>(),
                    "derivatives": f.derivs().iter().map(|&l| label_char(l)).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "text": self.to_string(),
        })
    }
}

fn parse_factor(t: &str) -> Result<Factor> {
    let (head_part, derivs) = match t.split_once(';') {
        Some((a, b)) => (a, b),
        None => (t, ""),
    };
    let (name, slots) = match head_part.split_once('[') {
        Some((a, b)) => (a, b.strip_suffix(']').ok_or_else(|| Error::Structural(format!("unclosed '[' in {}", t)))?),
        None => (head_part, ""),
    };
    let head = Head::parse(name)?;
    let slots: Vec<Label> = slots.chars().map(parse_label).collect::<Result<_>>()?;
    if slots.len() != head.slots() {
        return Err(Error::Structural(format!("{} needs {} slot indices", name, head.slots())));
    }
    let derivs: Vec<Label> = derivs.chars().map(parse_label).collect::<Result<_>>()?;
    Ok(Factor::new(head, &slots, &derivs))
}

fn render(e: &TensorJetExpr, latex: bool) -> String {
    if e.terms.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, t) in e.terms.iter().enumerate() {
        let neg = t.coeff.is_negative();
        let mag = t.coeff.abs();
        if i == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let body = t.render(latex);
        let c = if latex && !mag.is_integer() {
            format!("\\tfrac{{{}}}{{{}}}", mag.numer(), mag.denom())
        } else {
            fmt_q(&mag)
        };
        if body.is_empty() {
            s.push_str(&c);
        } else if mag.is_one() {
            s.push_str(&body);
        } else {
            s.push_str(&c);
            s.push(' ');
            s.push_str(&body);
        }
    }
    s
}

impl fmt::Display for TensorJetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render(self, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::qi;

    #[test]
    fn parse_and_render() {
        let e = TensorJetExpr::parse(4, "-4 f;ijj h;i - 1/3 Ric[ij] f;i h;j + J f;a h;a").unwrap();
        assert_eq!(e.terms.len(), 3);
        assert_eq!(e.to_string(), "-4 f_{;ijj} h_{;i} - 1/3 Ric_{ij} f_{;i} h_{;j} + J f_{;a} h_{;a}");
        assert!(e.to_latex().contains("\\tfrac{1}{3} \\mathrm{Rc}_{ij}"));
        assert!(e.homogeneity_audit(4));
        assert!(TensorJetExpr::parse(4, "f;iii h;i").is_err());
        let v = TensorJetExpr::parse(4, "f;ab h;b").unwrap();
        assert_eq!(v.free, vec![0]);
    }

    #[test]
    fn leibniz_and_divergence() {
        let v = TensorJetExpr::parse(4, "f h;a").unwrap();
        let d = v.derivative(0).unwrap();
        assert!(d.free.is_empty());
        assert_eq!(d.to_string(), "f_{;a} h_{;a} + f h_{;aa}");
        let p = TensorJetExpr::parse(4, "u;ab").unwrap().substitute_product('u', 'f', 'h');
        assert_eq!(p.terms.len(), 4);
        assert_eq!(p.terms.iter().map(|t| t.coeff.clone()).sum::<Q>(), qi(4));
    }

    #[test]
    fn products_rename_dummies() {
        let a = TensorJetExpr::parse(4, "f;a h;a").unwrap();
        let b = TensorJetExpr::parse(4, "k;a k;a").unwrap();
        let c = a.mul(&b).unwrap();
        c.validate().unwrap();
        assert_eq!(c.terms[0].dummies().len(), 2);
    }
}
