//! Floating-point witnesses for the symbolic identities, at random jets.

use gjms_residue::algebra::qi;
use gjms_residue::oracle::{max_abs_over_assignments, DEFAULT_SEED};
use gjms_residue::tensor::{Factor, OperatorExpr, TensorJetExpr};
use gjms_residue::verify::Verifier;

const ASSIGNMENTS: usize = 50;

fn vi_residual(p: &OperatorExpr, b: &TensorJetExpr) -> TensorJetExpr {
    let pfh = p.expr.substitute_product('h', 'f', 'h');
    let fph = p.apply_to('h').times_factor(Factor::jet('f', &[]));
    let hpf = p.apply_to('f').times_factor(Factor::jet('h', &[]));
    pfh.sub(&fph).unwrap().sub(&hpf).unwrap().add(&b.scale(&qi(2))).unwrap()
}

fn assert_vanishes(e: &TensorJetExpr, curved: bool) {
    let (worst, scale) = max_abs_over_assignments(e, &['f', 'h'], curved, ASSIGNMENTS, DEFAULT_SEED).unwrap();
    assert!(scale > 0.0);
    assert!(worst <= 1e-9 * scale, "residual {} at term scale {}", worst, scale);
}

#[test]
fn identity_vi_flat_at_random_jets() {
    let v = Verifier::new();
    for n in [4, 6] {
        let run = v.flat(n).unwrap();
        assert_vanishes(&vi_residual(&run.p, &run.b), false);
    }
}

#[test]
fn identity_vi_curved_at_random_jets() {
    let v = Verifier::new();
    let run = v.curved().unwrap();
    assert_vanishes(&vi_residual(&run.p, &run.b), true);
    // the flat operator misses the curvature terms
    let flat = v.flat(4).unwrap();
    let e = vi_residual(&flat.p, &run.b);
    let (worst, _) = max_abs_over_assignments(&e, &['f', 'h'], true, 5, DEFAULT_SEED).unwrap();
    assert!(worst > 1e-6);
}

#[test]
fn perturbed_identity_is_detected() {
    let v = Verifier::new();
    let run = v.flat(4).unwrap();
    let e = vi_residual(&run.p, &run.b).add(&TensorJetExpr::parse(4, "f;a h;a").unwrap()).unwrap();
    let (worst, _) = max_abs_over_assignments(&e, &['f', 'h'], false, 5, DEFAULT_SEED).unwrap();
    assert!(worst > 1e-6);
}

#[test]
fn paneitz_multiple_at_random_jets() {
    let v = Verifier::new();
    let p = &v.curved().unwrap().p.expr;
    let pan = TensorJetExpr::parse(4, "4 h;aabb - 8 J h;aa + 16 rho[ab] h;ab + 8 J;a h;a").unwrap();
    let e = p.sub(&pan).unwrap().times_factor(Factor::jet('f', &[]));
    assert_vanishes(&e, true);
}
