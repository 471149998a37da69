//! Lorenz system in the integrable regime `σ = 1/3, ρ = 400, β = 0`.

use crate::ode::SystemSpec;

pub const LORENZ_SIGMA: f64 = 1.0 / 3.0;
pub const LORENZ_RHO: f64 = 400.0;
pub const LORENZ_BETA: f64 = 0.0;

/// Spatial factor `g(x)` of the invariant `ψ(t, x) = g(x)·e^{4t/3}`.
fn spatial(x: &[f64]) -> f64 {
    let (x, y, z) = (x[0], x[1], x[2]);
    x.powi(4) - 4.0 / 3.0 * x * x * z - 4.0 / 9.0 * y * y - 8.0 / 9.0 * x * y
        + 1600.0 / 3.0 * x * x
}

/// Lorenz flow with its time-dependent invariant.
pub fn lorenz() -> SystemSpec {
    let (sigma, rho, beta) = (LORENZ_SIGMA, LORENZ_RHO, LORENZ_BETA);
    SystemSpec::builder(
        "lorenz",
        3,
        1,
        move |_, x, f| {
            f[0] = sigma * (x[1] - x[0]);
            f[1] = x[0] * (rho - x[2]) - x[1];
            f[2] = x[0] * x[1] - beta * x[2];
        },
        |t, x, psi| psi[0] = spatial(x) * (4.0 * t / 3.0).exp(),
    )
    .time_dependent(true)
    .gradient(|t, x, g| {
        let (x, y, z) = (x[0], x[1], x[2]);
        let e = (4.0 * t / 3.0).exp();
        g[(0, 0)] = (4.0 * x.powi(3) - 8.0 / 3.0 * x * z - 8.0 / 9.0 * y + 3200.0 / 3.0 * x) * e;
        g[(0, 1)] = (-8.0 / 9.0 * y - 8.0 / 9.0 * x) * e;
        g[(0, 2)] = (-4.0 / 3.0 * x * x) * e;
    })
    .build()
    .expect("lorenz dimensions are valid")
}
