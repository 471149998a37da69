//! Shared samplers for the integration tests.
#![allow(dead_code)]

use conservo::linalg::DenseMatrix;
use conservo::ode::SystemSpec;
use conservo::systems::{
    lorenz, lv2, lv3, point_vortex, schwarzschild, three_body, Lv2Params, Lv3Params, SchwarzschildParams,
    VortexParams, ARENSTORF_ALPHA,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Sampler = fn(&mut ChaCha8Rng) -> Vec<f64>;

fn uniform(rng: &mut ChaCha8Rng, ranges: &[(f64, f64)]) -> Vec<f64> {
    ranges.iter().map(|&(a, b)| rng.random_range(a..b)).collect()
}

fn vortex_state(rng: &mut ChaCha8Rng) -> Vec<f64> {
    VortexParams::random(8, rng.random(), false).state()
}

/// The benchmark systems with samplers of admissible states. Vortex states
/// are fresh random positions for the fixed 8-vortex system.
pub fn benchmark_systems() -> Vec<(SystemSpec, Sampler)> {
    vec![
        (lv2(Lv2Params::default()).unwrap(), |r| uniform(r, &[(0.05, 3.0), (0.05, 3.0)])),
        (lv3(Lv3Params::default()).unwrap(), |r| uniform(r, &[(0.05, 3.0), (0.05, 3.0), (0.05, 3.0)])),
        (three_body(ARENSTORF_ALPHA).unwrap(), |r| {
            uniform(r, &[(-1.5, -0.1), (0.05, 1.2), (-2.0, 2.0), (-2.0, 2.0)])
        }),
        (lorenz(), |r| uniform(r, &[(-20.0, 20.0), (-20.0, 20.0), (0.0, 40.0)])),
        (point_vortex(&VortexParams::random(8, 99, false)).unwrap(), vortex_state),
        (schwarzschild(SchwarzschildParams::default()).unwrap(), |r| {
            uniform(
                r,
                &[(0.0, 50.0), (3.0, 40.0), (0.3, 2.8), (-3.0, 3.0), (0.5, 2.0), (-1.0, 1.0), (-0.05, 0.05), (-0.05, 0.05)],
            )
        }),
    ]
}

/// A random `m × n` Gaussian matrix with `κ(A) ≤ max_cond`.
pub fn well_conditioned(rng: &mut ChaCha8Rng, m: usize, n: usize, max_cond: f64) -> DenseMatrix {
    loop {
        let data: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
        let a = DenseMatrix::new(m, n, data).unwrap();
        if conservo::linalg::cond_2(&a) <= max_cond {
            return a;
        }
    }
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(1.0_f64, |s, v| s.max(v.abs()));
    a.iter().zip(b).fold(0.0_f64, |d, (x, y)| d.max((x - y).abs())) / scale
}
