//! Property-based invariants of the exact engines, checked against the numeric oracle.

use gjms_residue::algebra::Q;
use gjms_residue::flat::{psi_closed_form, to_f64};
use gjms_residue::oracle::{numeric_psi, random_jet_eval, required_degree, NumericAssignment};
use gjms_residue::sphere::integrate_monomial_exps;
use gjms_residue::tensor::{canonicalize, canonicalize_in, Geometry, TensorJetExpr};
use proptest::prelude::*;

/// Fully contracted `f_{;I} h_{;J} [curvature]` from a pairing of slot positions.
fn contracted(p: usize, q: usize, curv: usize, perm: &[usize]) -> String {
    let slots = p + q + [0, 0, 2, 4][curv];
    let mut labels = vec!['?'; slots];
    let order: Vec<usize> = perm.iter().copied().filter(|&i| i < slots).collect();
    for (k, pair) in order.chunks(2).enumerate() {
        let c = (b'a' + k as u8) as char;
        labels[pair[0]] = c;
        labels[pair[1]] = c;
    }
    let take = |r: std::ops::Range<usize>| labels[r].iter().collect::<String>();
    let mut s = String::new();
    s.push('f');
    if p > 0 {
        s.push(';');
        s.push_str(&take(0..p));
    }
    s.push_str(" h");
    if q > 0 {
        s.push(';');
        s.push_str(&take(p..p + q));
    }
    match curv {
        1 => s.push_str(" J"),
        2 => s.push_str(&format!(" rho[{}]", take(p + q..slots))),
        3 => s.push_str(&format!(" R[{}]", take(p + q..slots))),
        _ => {}
    }
    s
}

fn expr_strategy() -> impl Strategy<Value = String> {
    (0usize..4, 0usize..4, 0usize..4, Just((0..10).collect::<Vec<usize>>()).prop_shuffle(), -3i64..=3)
        .prop_filter("even slot count", |(p, q, c, _, k)| (p + q + [0, 0, 2, 4][*c]) % 2 == 0 && *k != 0)
        .prop_map(|(p, q, c, perm, k)| format!("{} {}", k, contracted(p, q, c, &perm)))
}

fn eval_pair(a: &TensorJetExpr, b: &TensorJetExpr, seed: u64) -> (f64, f64) {
    let d = required_degree(a).max(required_degree(b));
    let asg = NumericAssignment::random(a.n, &['f', 'h'], d, true, seed);
    (random_jet_eval(a, &asg).unwrap(), random_jet_eval(b, &asg).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonicalize_is_idempotent(s in expr_strategy()) {
        let e = TensorJetExpr::parse(4, &s).unwrap();
        let c = canonicalize(&e).unwrap();
        prop_assert_eq!(canonicalize(&c).unwrap(), c);
    }

    #[test]
    fn canonicalize_is_linear(s in expr_strategy(), t in expr_strategy()) {
        let a = TensorJetExpr::parse(4, &s).unwrap();
        let b = TensorJetExpr::parse(4, &t).unwrap();
        let sum = canonicalize(&a.add(&b).unwrap()).unwrap();
        let parts = canonicalize(&canonicalize(&a).unwrap().add(&canonicalize(&b).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(sum, parts);
        prop_assert!(canonicalize(&a.sub(&a).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn canonicalize_preserves_value(s in expr_strategy(), seed in 0u64..1000) {
        let e = TensorJetExpr::parse(4, &s).unwrap();
        let c = canonicalize(&e).unwrap();
        let (x, y) = eval_pair(&e, &c, seed);
        prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()), "{} -> {}: {} vs {}", e, c, x, y);
    }

    #[test]
    fn flat_canonicalization_drops_only_curvature(s in expr_strategy()) {
        let e = TensorJetExpr::parse(4, &s).unwrap();
        let flat = canonicalize_in(&e, Geometry::Flat).unwrap();
        prop_assert!(flat.terms.iter().all(|t| t.deg_r() == 0));
        let curved_flat_part: Vec<_> = canonicalize(&e).unwrap().terms.into_iter().filter(|t| t.deg_r() == 0).collect();
        prop_assert_eq!(flat.terms.len(), curved_flat_part.len());
    }

    #[test]
    fn sphere_moments_satisfy_trace_recursion(alpha in proptest::collection::vec(0u8..4, 2..7)) {
        let n = alpha.len();
        let mut lhs = Q::from_integer(0.into());
        for i in 0..n {
            let mut b = alpha.clone();
            b[i] += 2;
            lhs += integrate_monomial_exps(&b, n);
        }
        prop_assert_eq!(lhs, integrate_monomial_exps(&alpha, n));
    }

    #[test]
    fn odd_sphere_moments_vanish(alpha in proptest::collection::vec(0u8..5, 2..7)) {
        prop_assume!(alpha.iter().any(|a| a % 2 == 1));
        prop_assert_eq!(integrate_monomial_exps(&alpha, alpha.len()), Q::from_integer(0.into()));
    }

    #[test]
    fn psi_matrix_trace_matches_closed_form(
        half in 1usize..5,
        m_frac in 0.0f64..1.0,
        xi in proptest::collection::vec(-4i32..=4, 8),
        eta in proptest::collection::vec(-4i32..=4, 8),
    ) {
        let n = 2 * half;
        let m = 1 + ((n - 1) as f64 * m_frac) as usize % (n - 1);
        let xi: Vec<f64> = xi[..n].iter().map(|&v| v as f64).collect();
        let eta: Vec<f64> = eta[..n].iter().map(|&v| v as f64).collect();
        prop_assume!(xi.iter().any(|&v| v != 0.0) && eta.iter().any(|&v| v != 0.0));
        let c = psi_closed_form(n, m);
        let scale = to_f64(&c.a).abs() + to_f64(&c.b).abs();
        let v = numeric_psi(&xi, &eta, n, m).unwrap();
        prop_assert!((v - c.eval(&xi, &eta)).abs() <= 1e-9 * scale);
    }
}
