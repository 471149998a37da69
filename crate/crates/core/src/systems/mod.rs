//! Benchmark systems.

mod lorenz;
mod lotka_volterra;
mod schwarzschild;
mod three_body;
mod vortex;

pub use lorenz::{lorenz, LORENZ_BETA, LORENZ_RHO, LORENZ_SIGMA};
pub use lotka_volterra::{lv2, lv3, Lv2Params, Lv3Params};
pub use schwarzschild::{
    christoffel_fd_oracle, christoffel_schwarzschild, schwarzschild, schwarzschild_metric, Christoffel,
    SchwarzschildParams, SCHWARZSCHILD_X0, SCHWARZSCHILD_Y0,
};
pub use three_body::{three_body, ARENSTORF_ALPHA, ARENSTORF_PERIOD, ARENSTORF_X0, SINGULARITY_RADIUS};
pub use vortex::{point_vortex, VortexParams, COINCIDENCE_TOL};

use crate::ode::SystemSpec;

/// Harmonic rotation `ẋ = −y, ẏ = x` with `ψ = x² + y²`.
pub fn rotation() -> SystemSpec {
    SystemSpec::builder(
        "rotation",
        2,
        1,
        |_, x, f| {
            f[0] = -x[1];
            f[1] = x[0];
        },
        |_, x, psi| psi[0] = x[0] * x[0] + x[1] * x[1],
    )
    .gradient(|_, x, g| {
        g[(0, 0)] = 2.0 * x[0];
        g[(0, 1)] = 2.0 * x[1];
    })
    .build()
    .expect("rotation dimensions are valid")
}
