mod common;

use common::rng;
use logshrink::penalty::{penalty_grad, penalty_hess, penalty_value};
use logshrink::{Center, PenaltyFamily, PenaltySpec};
use proptest::prelude::*;
use rand::Rng;

fn spec(f: PenaltyFamily) -> PenaltySpec {
    match f {
        PenaltyFamily::AdjustedLogFrobenius => PenaltySpec::adjusted(Center::Fixed(0.3)),
        other => PenaltySpec::new(other).unwrap(),
    }
}

fn family() -> impl Strategy<Value = PenaltyFamily> {
    prop::sample::select(PenaltyFamily::ALL.to_vec())
}

fn smooth_family() -> impl Strategy<Value = PenaltyFamily> {
    prop::sample::select(PenaltyFamily::ALL.into_iter().filter(|f| f.is_smooth()).collect::<Vec<_>>())
}

fn log_eigs(max_q: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 2..=max_q)
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn value_is_permutation_symmetric(f in family(), a in log_eigs(10), seed in any::<u64>()) {
        let p = spec(f);
        let mut b = a.clone();
        let mut r = rng(seed);
        for i in (1..b.len()).rev() {
            b.swap(i, r.random_range(0..=i));
        }
        let (va, vb) = (penalty_value(&p, &a).unwrap(), penalty_value(&p, &b).unwrap());
        prop_assert!((va - vb).abs() <= 1e-12 * va.abs().max(1.0));
    }

    #[test]
    fn shape_families_ignore_shifts(f in family(), a in log_eigs(10), s in -5.0f64..5.0) {
        let p = spec(f);
        let shifted: Vec<f64> = a.iter().map(|x| x + s).collect();
        let (v0, v1) = (penalty_value(&p, &a).unwrap(), penalty_value(&p, &shifted).unwrap());
        if f.is_scale_invariant() {
            prop_assert!((v0 - v1).abs() <= 1e-12 * v0.abs().max(1.0), "{f}: {v0} vs {v1}");
        }
    }

    #[test]
    fn gradient_matches_central_differences(f in smooth_family(), a in log_eigs(8)) {
        let p = spec(f);
        let h = 1e-5;
        let fd: Vec<f64> = (0..a.len())
            .map(|i| {
                let (mut up, mut dn) = (a.clone(), a.clone());
                up[i] += h;
                dn[i] -= h;
                (penalty_value(&p, &up).unwrap() - penalty_value(&p, &dn).unwrap()) / (2.0 * h)
            })
            .collect();
        let g = penalty_grad(&p, &a).unwrap();
        prop_assert!(rel_err(&fd, &g) <= 1e-6, "{f}: {:e}", rel_err(&fd, &g));
    }

    #[test]
    fn hessian_matches_central_differences(f in smooth_family(), a in log_eigs(8)) {
        let p = spec(f);
        let h = 1e-5;
        let hess = penalty_hess(&p, &a).unwrap();
        for i in 0..a.len() {
            let (mut up, mut dn) = (a.clone(), a.clone());
            up[i] += h;
            dn[i] -= h;
            let gu = penalty_grad(&p, &up).unwrap();
            let gd = penalty_grad(&p, &dn).unwrap();
            let fd: Vec<f64> = gu.iter().zip(&gd).map(|(u, d)| (u - d) / (2.0 * h)).collect();
            let row: Vec<f64> = hess.row(i).to_vec();
            prop_assert!(rel_err(&fd, &row) <= 1e-5, "{f} row {i}: {:e}", rel_err(&fd, &row));
        }
    }
}

#[test]
fn midpoint_convexity_on_random_pairs() {
    for f in PenaltyFamily::ALL {
        let p = spec(f);
        let mut r = rng(f as u64 + 17);
        for _ in 0..1000 {
            let q = r.random_range(2..=8);
            let a: Vec<f64> = (0..q).map(|_| r.random_range(-3.0..3.0)).collect();
            let b: Vec<f64> = (0..q).map(|_| r.random_range(-3.0..3.0)).collect();
            let m: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let lhs = penalty_value(&p, &m).unwrap();
            let rhs = 0.5 * (penalty_value(&p, &a).unwrap() + penalty_value(&p, &b).unwrap());
            assert!(lhs <= rhs + 1e-12, "{f}: {lhs} > {rhs}");
            if f == PenaltyFamily::LogFrobenius {
                assert!(lhs < rhs, "log_frobenius must be strictly convex");
            }
        }
    }
}

#[test]
fn non_shape_families_change_under_shift() {
    let a = [0.4, -0.2, 1.1];
    let shifted: Vec<f64> = a.iter().map(|x| x + 0.7).collect();
    for f in PenaltyFamily::ALL.into_iter().filter(|f| !f.is_scale_invariant()) {
        let p = spec(f);
        let (v0, v1) = (penalty_value(&p, &a).unwrap(), penalty_value(&p, &shifted).unwrap());
        assert!((v0 - v1).abs() > 1e-3, "{f} should not be shift invariant: {v0} vs {v1}");
    }
}

#[test]
fn closed_form_values() {
    let a = [2.0f64.ln(), 0.0];
    assert!((penalty_value(&spec(PenaltyFamily::LogFrobenius), &a).unwrap() - 2.0f64.ln().powi(2)).abs() < 1e-15);
    // tr Σ⁻¹ + log det Σ for Σ = diag(2, 1).
    let kl = penalty_value(&spec(PenaltyFamily::KlIdentity), &a).unwrap();
    assert!((kl - (0.5 + 1.0 + 2.0f64.ln())).abs() < 1e-15);
    // Condition number of diag(2, 1).
    assert!((penalty_value(&spec(PenaltyFamily::ConditionNumber), &a).unwrap() - 2.0).abs() < 1e-15);
    // q · geometric mean / harmonic mean of (2, 1) = 2 · √2 / (4/3).
    let skl = penalty_value(&spec(PenaltyFamily::ShapeKl), &a).unwrap();
    assert!((skl - 2.0 * 2.0f64.sqrt() * 0.75).abs() < 1e-14);
}
