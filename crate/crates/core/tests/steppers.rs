mod common;

use common::{benchmark_systems, gaussian, max_rel_diff, well_conditioned};
use conservo::linalg::{norm_inf, svd_thin};
use conservo::multiplier::{discrete_time_partial, residual, telescoping_multiplier, MultiplierMatrix, DEFAULT_DEGENERACY_TOL};
use conservo::steppers::{
    mn_correct, mn_correct_m1, predictor_improved_euler, step, step_implicit_midpoint, step_mn, BaseScheme, Method,
    StepperConfig,
};
use conservo::systems::{lv2, lv3, rotation, Lv2Params, Lv3Params};
use conservo::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn corrected_field_satisfies_the_multiplier_condition() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (sys, sample) in benchmark_systems() {
        for _ in 0..50 {
            let t = rng.random_range(0.0..1.0);
            let y = sample(&mut rng);
            let tau = 1e-3;
            let Ok(x) = predictor_improved_euler(&sys, t, &y, tau) else { continue };
            let lam = telescoping_multiplier(&sys, t, &x, &y, DEFAULT_DEGENERACY_TOL).unwrap();
            let f = sys.source(t, &y).unwrap();
            let dt = discrete_time_partial(&sys, t, t + tau, &x).unwrap();
            for method in [Method::Direct, Method::Mixed, Method::MixedSvd] {
                let Ok((f_mn, _)) = mn_correct(&lam, &f, &dt, method) else { continue };
                let r = residual(&lam, &f_mn, &dt);
                let scale = lam.matrix.max_abs() * norm_inf(&f) + norm_inf(&dt);
                assert!(
                    norm_inf(&r) <= 1e-12 * scale.max(1.0),
                    "{} {method}: residual {:?}",
                    sys.name(),
                    r
                );
            }
        }
    }
}

#[test]
fn variants_agree_per_step_on_lv3() {
    let sys = lv3(Lv3Params::default()).unwrap();
    let y = [0.2, 0.5, 0.3];
    let psi = sys.conserved(0.0, &y).unwrap();
    let mut out = Vec::new();
    for method in [Method::Direct, Method::Mixed, Method::MixedSvd] {
        let cfg = StepperConfig::new(method, 0.05);
        out.push(step_mn(&sys, &cfg, 0.0, 0.05, &y, &psi).unwrap());
    }
    for (x, d) in &out {
        assert!(d.converged);
        assert!(max_rel_diff(x, &out[0].0) < 1e-12);
    }
    // κ(B) = κ(A)² for B = AAᵀ
    let ka = out[2].1.kappa.unwrap();
    let kb = out[1].1.kappa.unwrap();
    assert!((kb / (ka * ka) - 1.0).abs() < 1e-6, "{kb} vs {ka}^2");
}

#[test]
fn fast_path_matches_generic_variants() {
    let cases = [
        (lv2(Lv2Params::default()).unwrap(), vec![0.3, 0.7], 0.1),
        (lv3(Lv3Params::default()).unwrap(), vec![0.2, 0.5, 0.3], 0.05),
    ];
    for (sys, y, tau) in cases {
        let psi = sys.conserved(0.0, &y).unwrap();
        let slow = step(&sys, &StepperConfig::new(Method::Mixed, tau), 0.0, tau, &y, &psi).unwrap();
        let fast_cfg = StepperConfig { fast_path: true, ..StepperConfig::new(Method::Mixed, tau) };
        let fast = step(&sys, &fast_cfg, 0.0, tau, &y, &psi).unwrap();
        assert!(max_rel_diff(&slow.0, &fast.0) < 1e-13, "{}", sys.name());
        assert!(fast.1.converged);
    }
}

#[test]
fn closed_form_m1_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let a = gaussian(&mut rng, 4);
        let f = gaussian(&mut rng, 4);
        let dt: f64 = rng.random_range(-1.0..1.0);
        let lam = MultiplierMatrix::from_matrix(conservo::DenseMatrix::new(1, 4, a.clone()).unwrap());
        let (direct, kappa) = mn_correct(&lam, &f, &[dt], Method::Direct).unwrap();
        let closed = mn_correct_m1(&a, &f, dt).unwrap();
        assert!(max_rel_diff(&direct, &closed) < 1e-13);
        assert_eq!(kappa, 1.0);
    }
}

#[test]
fn correction_is_orthogonal_to_the_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let m = rng.random_range(1..=4);
        let n = rng.random_range(m + 1..=10);
        let a = well_conditioned(&mut rng, m, n, 1e3);
        let f = gaussian(&mut rng, n);
        let dt = gaussian(&mut rng, m);
        let lam = MultiplierMatrix::from_matrix(a.clone());
        let (f_mn, _) = mn_correct(&lam, &f, &dt, Method::Mixed).unwrap();
        let delta: Vec<f64> = f.iter().zip(&f_mn).map(|(x, y)| x - y).collect();
        // f − f_mn lies in the row space: its projection off VVᵀ vanishes
        let v = svd_thin(&a).unwrap().v;
        let coef = v.tmatvec(&delta);
        let back = v.matvec(&coef);
        let off: f64 = delta.iter().zip(&back).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(off <= 1e-12 * norm_inf(&delta).max(1.0));
    }
}

#[test]
fn iteration_counts_do_not_grow_as_tau_shrinks() {
    let sys = rotation();
    let y = [1.0, 0.0];
    let psi = sys.conserved(0.0, &y).unwrap();
    let mut counts = Vec::new();
    for tau in [0.2, 0.1, 0.05, 0.025] {
        let cfg = StepperConfig { delta: 1e-13, epsilon: 1e-13, ..StepperConfig::new(Method::Mixed, tau) };
        let (_, d) = step_mn(&sys, &cfg, 0.0, tau, &y, &psi).unwrap();
        assert!(d.converged);
        counts.push(d.iterations);
    }
    assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
}

#[test]
fn lv2_steps_stay_below_delta() {
    let sys = lv2(Lv2Params::default()).unwrap();
    let mut y = vec![0.3, 0.7];
    let psi = sys.conserved(0.0, &y).unwrap();
    let cfg = StepperConfig::new(Method::Mixed, 0.1);
    let mut iterations = 0;
    let mut converged = 0;
    let steps = 2000;
    for k in 0..steps {
        let (x, d) = step(&sys, &cfg, k as f64 * 0.1, 0.1, &y, &psi).unwrap();
        iterations += d.iterations;
        if d.converged {
            converged += 1;
            assert!(norm_inf(&d.psi_defect) < cfg.delta);
        }
        y = x;
    }
    assert!(converged > steps * 9 / 10);
    let mean = iterations as f64 / steps as f64;
    assert!((8.0..=16.0).contains(&mean), "mean FPI {mean}");
}

#[test]
fn midpoint_preserves_the_oscillator_norm() {
    let sys = rotation();
    let y = [0.6, 0.8];
    let psi = sys.conserved(0.0, &y).unwrap();
    let cfg = StepperConfig::new(Method::ImplicitMidpoint, 0.1);
    let (x, d) = step_implicit_midpoint(&sys, &cfg, 0.0, 0.1, &y, &psi).unwrap();
    assert!(d.converged);
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    assert!((r - 1.0).abs() <= 1e-15);
}

#[test]
fn trapezoidal_base_scheme_also_conserves() {
    let sys = lv3(Lv3Params::default()).unwrap();
    let y = [0.2, 0.5, 0.3];
    let psi = sys.conserved(0.0, &y).unwrap();
    let cfg = StepperConfig { base_scheme: BaseScheme::Trapezoidal, ..StepperConfig::new(Method::MixedSvd, 0.05) };
    let (_, d) = step(&sys, &cfg, 0.0, 0.05, &y, &psi).unwrap();
    assert!(d.converged);
    assert!(norm_inf(&d.psi_defect) < 1e-15);
}

#[test]
fn singular_multiplier_aborts_the_step() {
    let a = conservo::DenseMatrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 0.0]]).unwrap();
    let lam = MultiplierMatrix::from_matrix(a);
    for method in [Method::Direct, Method::Mixed, Method::MixedSvd, Method::ClosedM2] {
        let r = mn_correct(&lam, &[1.0, 1.0, 1.0], &[0.0, 0.0], method);
        assert!(matches!(r, Err(Error::SingularMatrix { .. })), "{method}: {r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mixed_and_svd_agree(seed in any::<u64>(), m in 1usize..=4, extra in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = m + extra;
        let a = well_conditioned(&mut rng, m, n, 1e2);
        let f = gaussian(&mut rng, n);
        let dt = gaussian(&mut rng, m);
        let lam = MultiplierMatrix::from_matrix(a);
        let (x, _) = mn_correct(&lam, &f, &dt, Method::Mixed).unwrap();
        let (y, _) = mn_correct(&lam, &f, &dt, Method::MixedSvd).unwrap();
        prop_assert!(max_rel_diff(&x, &y) < 1e-10);
    }
}
