mod common;

use common::{random_drive, random_operator, rng};
use proptest::prelude::*;
use qflq::{CMatrix, CombineKind, MultiIndex, QPOperator, C64};
use rand::Rng;

fn coeff_distance(a: &QPOperator, b: &QPOperator) -> f64 {
    a.max_distance(b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evaluation_is_a_homomorphism(seed in any::<u64>(), d in 1usize..=3, dim in 2usize..=4) {
        let mut r = rng(seed);
        let a = random_operator(&mut r, d, dim, 3, 1.0);
        let b = random_operator(&mut r, d, dim, 3, 1.0);
        let sum = a.combine(&b, CombineKind::Add).unwrap();
        let prod = a.combine(&b, CombineKind::Multiply).unwrap();
        for _ in 0..100 {
            let t: f64 = r.random_range(-50.0..50.0);
            let (ea, eb) = (a.evaluate(t), b.evaluate(t));
            prop_assert!((sum.evaluate(t) - (&ea + &eb)).norm() < 1e-12);
            let gap = (prod.evaluate(t) - &ea * &eb).norm();
            prop_assert!(gap < 1e-12 * (ea.norm() * eb.norm()).max(1.0), "gap {gap:e}, scale {}", ea.norm() * eb.norm());
        }
    }

    #[test]
    fn commutator_is_antisymmetric(seed in any::<u64>(), d in 1usize..=3) {
        let mut r = rng(seed);
        let a = random_operator(&mut r, d, 3, 3, 1.0);
        let b = random_operator(&mut r, d, 3, 3, 1.0);
        let ab = a.commutator(&b).unwrap();
        let ba = b.commutator(&a).unwrap();
        prop_assert!(coeff_distance(&ab, &ba.scale(C64::from(-1.0))) < 1e-14);
    }

    #[test]
    fn jacobi_identity(seed in any::<u64>(), d in 1usize..=2) {
        let mut r = rng(seed);
        let a = random_operator(&mut r, d, 3, 2, 1.0);
        let b = random_operator(&mut r, d, 3, 2, 1.0);
        let c = random_operator(&mut r, d, 3, 2, 1.0);
        let j1 = a.commutator(&b.commutator(&c).unwrap()).unwrap();
        let j2 = b.commutator(&c.commutator(&a).unwrap()).unwrap();
        let j3 = c.commutator(&a.commutator(&b).unwrap()).unwrap();
        let total = j1.add(&j2).unwrap().add(&j3).unwrap();
        let worst = total.terms().map(|(_, m)| m.norm()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-10, "jacobi defect {}", worst);
    }

    #[test]
    fn adjoint_laws(seed in any::<u64>(), d in 1usize..=3, dim in 2usize..=4) {
        let mut r = rng(seed);
        let a = random_operator(&mut r, d, dim, 3, 1.0);
        let b = random_operator(&mut r, d, dim, 3, 1.0);
        prop_assert_eq!(a.adjoint().adjoint(), a.clone());
        let lhs = a.add(&b).unwrap().adjoint();
        let rhs = a.adjoint().add(&b.adjoint()).unwrap();
        prop_assert!(coeff_distance(&lhs, &rhs) < 1e-15);
        let lhs = a.multiply(&b).unwrap().adjoint();
        let rhs = b.adjoint().multiply(&a.adjoint()).unwrap();
        prop_assert!(coeff_distance(&lhs, &rhs) < 1e-13);
        for _ in 0..20 {
            let t: f64 = r.random_range(-20.0..20.0);
            prop_assert!((a.adjoint().evaluate(t) - a.evaluate(t).adjoint()).norm() < 1e-14);
        }
    }

    #[test]
    fn hermitian_drives_are_adjoint_fixed_points(seed in any::<u64>(), d in 1usize..=3, dim in 2usize..=4) {
        let mut r = rng(seed);
        let h = random_drive(&mut r, d, dim, 4, 1.0);
        prop_assert!(coeff_distance(&h.adjoint(), &h) == 0.0);
        let t: f64 = r.random_range(-10.0..10.0);
        let e = h.evaluate(t);
        prop_assert!((&e - e.adjoint()).norm() < 1e-14);
    }

    #[test]
    fn integrate_inverts_differentiate(seed in any::<u64>(), d in 1usize..=3, dim in 2usize..=4) {
        let mut r = rng(seed);
        let a = random_operator(&mut r, d, dim, 4, 1.0);
        // Zero-average, zero-at-origin: remove the constant and re-anchor.
        let shifted = a.differentiate().integrate_from_zero().unwrap();
        prop_assert!(shifted.evaluate(0.0).norm() < 1e-12);
        let round = shifted.differentiate().integrate_from_zero().unwrap();
        prop_assert!(coeff_distance(&round, &shifted) < 1e-12);
        // and the other direction
        prop_assert!(coeff_distance(&shifted.differentiate(), &a.differentiate()) < 1e-12);
    }

    #[test]
    fn evaluation_at_origin_sums_coefficients(seed in any::<u64>(), d in 1usize..=3) {
        let mut r = rng(seed);
        let a = random_operator(&mut r, d, 3, 4, 1.0);
        let sum = a.terms().fold(CMatrix::zeros(3, 3), |acc, (_, m)| acc + m);
        prop_assert!((a.evaluate(0.0) - sum).norm() < 1e-14);
    }
}

#[test]
fn derivative_matches_central_difference() {
    let mut r = rng(7);
    for d in 1..=3 {
        let a = random_operator(&mut r, d, 3, 4, 1.0);
        let da = a.differentiate();
        for _ in 0..20 {
            let t: f64 = r.random_range(-10.0..10.0);
            let h = 1e-6;
            let fd = (a.evaluate(t + h) - a.evaluate(t - h)) / C64::from(2.0 * h);
            let exact = da.evaluate(t);
            assert!((fd - &exact).norm() <= 1e-6 * exact.norm().max(1.0));
        }
    }
}

#[test]
fn time_average_approaches_static_term() {
    let mut r = rng(11);
    let a = random_operator(&mut r, 2, 2, 3, 1.0);
    let min_freq = a
        .support()
        .filter(|n| !n.is_zero())
        .map(|n| n.dot(a.omega()).abs())
        .fold(f64::INFINITY, f64::min);
    let period = 1e4 / min_freq;
    let samples = 400_000;
    let dt = period / samples as f64;
    // Trapezoid rule.
    let mut acc = (a.evaluate(0.0) + a.evaluate(period)) * C64::from(0.5);
    for k in 1..samples {
        acc += a.evaluate(k as f64 * dt);
    }
    let avg = acc * C64::from(dt / period);
    let bound = 2.0 * a.coefficient_norm_sum() / (period * min_freq);
    assert!((avg - a.average()).norm() < bound.max(1e-8));
}

#[test]
fn opposite_harmonics_commute_into_static_term() {
    let mut r = rng(3);
    let w = common::omega(2, 1.0);
    let n = MultiIndex::from([1, -2]);
    let a = common::random_matrix(&mut r, 3, 1.0);
    let b = common::random_matrix(&mut r, 3, 1.0);
    let x = QPOperator::from_terms(3, w.clone(), [(n.clone(), a.clone())]).unwrap();
    let y = QPOperator::from_terms(3, w, [(-&n, b.clone())]).unwrap();
    let c = x.commutator(&y).unwrap();
    let support: Vec<_> = c.support().cloned().collect();
    assert_eq!(support, vec![MultiIndex::zero(2)]);
    assert!((c.average() - (&a * &b - &b * &a)).norm() < 1e-14);
}
