//! Exact integration over the unit cosphere with the normalized measure (total mass 1).

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::{GaussianRational, Monomial, MultiIndex, MultiPoly, Q};
use crate::error::{Error, Result};
use crate::symbol::HomogSymbol;

type MemoKey = (Vec<u8>, usize);

fn memo() -> &'static Mutex<HashMap<MemoKey, Q>> {
    static MEMO: OnceLock<Mutex<HashMap<MemoKey, Q>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

fn double_factorial_odd(a: u32) -> BigInt {
    // (2a − 1)!!
    (1..=a).map(|k| BigInt::from(2 * k - 1)).product()
}

/// Normalized `∫_{S^{n−1}} ξ^α dξ`.
///
/// Zero if some exponent is odd; otherwise with `α = 2a`,
/// `Π_i (2a_i − 1)!! / Π_{k<|a|} (n + 2k)`.
pub fn integrate_monomial_exps(alpha: &[u8], n: usize) -> Q {
    if alpha.iter().any(|e| e % 2 == 1) {
        return Q::zero();
    }
    let mut key: Vec<u8> = alpha.iter().copied().filter(|&e| e > 0).collect();
    key.sort_unstable();
    let k = (key, n);
    if let Some(v) = memo().lock().unwrap().get(&k) {
        return v.clone();
    }
    let half: Vec<u32> = k.0.iter().map(|&e| e as u32 / 2).collect();
    let num: BigInt = half.iter().map(|&a| double_factorial_odd(a)).product();
    let total: u32 = half.iter().sum();
    let den: BigInt = (0..total).map(|j| BigInt::from(n as u64 + 2 * j as u64)).product();
    let v = Q::new(num, den);
    memo().lock().unwrap().insert(k, v.clone());
    v
}

pub fn integrate_monomial(alpha: &MultiIndex, n: usize) -> Q {
    integrate_monomial_exps(&alpha.0, n)
}

/// Integrate a polynomial restricted to the sphere (every power of `‖ξ‖²` set to 1).
/// The result keeps base variables and formal symbols; ξ is integrated out.
pub fn integrate_poly(p: &MultiPoly, n: usize) -> MultiPoly {
    let mut out = MultiPoly::zero(p.nxi(), p.nx());
    for (m, c) in p.terms() {
        let w = integrate_monomial_exps(&m.xi, n);
        if w.is_zero() {
            continue;
        }
        let mut rest = m.clone();
        rest.xi.iter_mut().for_each(|e| *e = 0);
        rest.norm = 0;
        out.add_term(rest, c.scale(&w));
    }
    out
}

/// `∫_{‖ξ‖=1} tr s(0, ξ) dξ` for a symbol of degree `−n` evaluated at the origin of
/// normal coordinates. Formal symbols pass through as coefficients.
pub fn integrate_residue_trace(s: &HomogSymbol, n: usize) -> Result<MultiPoly> {
    if s.degree() != -(n as i32) {
        return Err(Error::WrongHomogeneity { expected: -(n as i32), found: s.degree() });
    }
    let tr = s.trace()?;
    if tr.terms().any(|(m, _)| m.x_degree() > 0) {
        return Err(Error::Precondition(
            "symbol still depends on base variables; evaluate at the origin (identity metric) first".into(),
        ));
    }
    if let Some(d) = tr.xi_homogeneity()? {
        if d != -(n as i32) {
            return Err(Error::WrongHomogeneity { expected: -(n as i32), found: d });
        }
    }
    Ok(integrate_poly(&tr, n))
}

/// Integral of a constant-coefficient polynomial, as a Gaussian rational.
pub fn integrate_constant_poly(p: &MultiPoly, n: usize) -> Result<GaussianRational> {
    let v = integrate_poly(p, n);
    v.as_constant()
        .ok_or_else(|| Error::Precondition("integrand carries formal symbols".into()))
}

/// `∫ ⟨ξ,u⟩⟨ξ,v⟩ dξ` by monomial expansion.
pub fn integrate_bilinear(u: &[Q], v: &[Q]) -> Q {
    let n = u.len();
    let mut acc = Q::zero();
    for i in 0..n {
        for j in 0..n {
            let mut e = vec![0u8; n];
            e[i] += 1;
            e[j] += 1;
            acc += &u[i] * &v[j] * integrate_monomial_exps(&e, n);
        }
    }
    acc
}

/// Monomial `ξ^α` in a polynomial ring with `n` cotangent variables and no base variables.
pub fn xi_monomial(alpha: &MultiIndex) -> MultiPoly {
    let n = alpha.dim();
    let mut m = Monomial::one(n, 0);
    m.xi = alpha.0.clone();
    MultiPoly::monomial(n, 0, m, GaussianRational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{enumerate_up_to, q, qi};
    use crate::forms::FormOperator;

    #[test]
    fn low_moments() {
        assert_eq!(integrate_monomial(&MultiIndex::from_slice(&[1, 0, 0, 0]), 4), Q::zero());
        for n in 2..9 {
            assert_eq!(integrate_monomial(&MultiIndex::from_slice(&[2, 0]), n), q(1, n as i64));
            assert_eq!(integrate_monomial(&MultiIndex::zero(n), n), Q::one());
            let mut a = vec![0u8; n];
            a[0] = 4;
            assert_eq!(integrate_monomial_exps(&a, n), q(3, (n * (n + 2)) as i64));
            a[0] = 2;
            a[1] = 2;
            assert_eq!(integrate_monomial_exps(&a, n), q(1, (n * (n + 2)) as i64));
        }
    }

    // Σ_i ∫ ξ^α ξ_i² = ∫ ξ^α on the unit sphere.
    #[test]
    fn sphere_relation_holds() {
        for n in [2usize, 3, 4, 6] {
            for a in enumerate_up_to(n, 0, 6) {
                let lhs: Q = (0..n)
                    .map(|i| {
                        let mut b = a.clone();
                        b.0[i] += 2;
                        integrate_monomial(&b, n)
                    })
                    .sum();
                assert_eq!(lhs, integrate_monomial(&a, n), "{:?}", a);
            }
        }
    }

    #[test]
    fn bilinear_rotation_invariance() {
        let u = vec![qi(1), q(2, 3), qi(-5), q(1, 7)];
        let v = vec![q(3, 2), qi(0), qi(4), qi(-1)];
        let dot: Q = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert_eq!(integrate_bilinear(&u, &v), dot / qi(4));
    }

    #[test]
    fn residue_trace_of_identity_times_square() {
        let n = 4;
        let num = xi_monomial(&MultiIndex::from_slice(&[2, 0, 0, 0])).shift_norm(-3);
        let op = FormOperator::scalar(4, 2, num);
        let s = HomogSymbol::new(op, -4);
        let v = integrate_residue_trace(&s, n).unwrap();
        assert_eq!(v.as_constant().unwrap(), GaussianRational::real(q(3, 2)));
        let wrong = HomogSymbol::new(s.op().clone(), -4);
        assert!(integrate_residue_trace(&wrong, 6).is_err());
    }
}
