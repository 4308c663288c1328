mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use sigtensors::{
    core_monomial, recover, sig_poly, sig_pwln_congruence, CoefMatrix, CoreKind, RecoveryOptions,
    TensorAlgebraSpace,
};

fn fspace(d: usize, k: usize) -> TensorAlgebraSpace {
    TensorAlgebraSpace::of::<f64>(d, k).unwrap()
}

#[test]
fn round_trip_on_random_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    for d in 1..=4 {
        for m in 1..=4 {
            for k in 1..=4 {
                let a = random_int_matrix::<f64>(&mut rng, d, m, 5);
                let t = fspace(d, k);
                let target = sig_pwln_congruence(t, &a).unwrap();
                let result = recover(&target, m, CoreKind::Axis, RecoveryOptions::default()).unwrap();
                let back = sig_pwln_congruence(t, &result.coef).unwrap();
                let sig_err = back.max_abs_diff(&target).unwrap();
                if !(result.converged && result.residual_norm <= 1e-8 && sig_err <= 1e-6) {
                    failures.push(format!(
                        "d={d} m={m} k={k}: converged={} residual={:e} sig_err={sig_err:e}",
                        result.converged, result.residual_norm
                    ));
                }
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn recovery_is_deterministic() {
    let a = CoefMatrix::<f64>::from_rows(vec![vec![6.0, -2.0, 6.0, -10.0], vec![7.0, -4.0, 10.0, -4.0]])
        .unwrap();
    let t = fspace(2, 3);
    let target = sig_pwln_congruence(t, &a).unwrap();
    let options = RecoveryOptions {
        restarts: 6,
        rng_seed: 17,
        ..RecoveryOptions::default()
    };
    let first = recover(&target, 4, CoreKind::Axis, options.clone()).unwrap();
    let second = recover(&target, 4, CoreKind::Axis, options).unwrap();
    assert_eq!(first.restart_index, second.restart_index);
    assert_eq!(first.iterations, second.iterations);
    assert_eq!(first.residual_norm.to_bits(), second.residual_norm.to_bits());
    let bits = |m: &CoefMatrix<f64>| m.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&first.coef), bits(&second.coef));
    assert_eq!(first.to_json(), second.to_json());
}

#[test]
fn invertible_square_case_recovers_the_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for n in [2, 3] {
        let rows = random_invertible(&mut rng, n, 5);
        let a = CoefMatrix::<f64>::from_rows(
            rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect(),
        )
        .unwrap();
        let target = sig_pwln_congruence(fspace(n, 3), &a).unwrap();
        let result = recover(&target, n, CoreKind::Axis, RecoveryOptions::default()).unwrap();
        assert!(result.converged);
        let err = a
            .as_slice()
            .iter()
            .zip(result.coef.as_slice())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(err <= 1e-6, "n={n} err={err:e}");
    }
}

#[test]
fn monomial_core_recovery() {
    let a = CoefMatrix::<f64>::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    let t = fspace(2, 3);
    let target = sig_poly(t, &a).unwrap();
    let result = recover(&target, 2, CoreKind::Monomial, RecoveryOptions::default()).unwrap();
    assert!(result.converged, "residual {:e}", result.residual_norm);
    assert!(result.residual_norm <= 1e-8);
    let core = core_monomial::<f64>(fspace(2, 3)).unwrap();
    let back = sigtensors::congruence(&result.coef, &core, t).unwrap();
    assert!(back.max_abs_diff(&target).unwrap() <= 1e-6);
}
