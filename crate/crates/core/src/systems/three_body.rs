//! Planar restricted three-body problem in the rotating frame.

use crate::error::{Error, Result};
use crate::ode::SystemSpec;

/// Mass ratio of the Arenstorf orbit.
pub const ARENSTORF_ALPHA: f64 = 0.012277471;
/// Period of the Arenstorf orbit.
pub const ARENSTORF_PERIOD: f64 = 17.065_216_560_157_962_558_891_720_624_9;
/// Initial state `(x₁, x₂, y₁, y₂)` of the Arenstorf orbit.
pub const ARENSTORF_X0: [f64; 4] = [0.994, 0.0, 0.0, -2.001_585_106_379_082_522_405_378_622_24];

/// Radius of the excluded disks around both primaries.
pub const SINGULARITY_RADIUS: f64 = 1e-8;

/// `x = (x₁, x₂, y₁, y₂)` with primaries of relative masses `β = 1 − α` at
/// `(−α, 0)` and `α` at `(β, 0)`. Conserves the Jacobi integral
/// `J = (x₁² + x₂² − y₁² − y₂²)/2 + α/r₁ + β/r₂`.
pub fn three_body(alpha: f64) -> Result<SystemSpec> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!("three_body: alpha = {alpha} not in (0, 1)")));
    }
    let beta = 1.0 - alpha;
    // distances to the α-body at (β, 0) and the β-body at (−α, 0)
    let dists = move |x: &[f64]| {
        let r1 = ((x[0] - beta).powi(2) + x[1] * x[1]).sqrt();
        let r2 = ((x[0] + alpha).powi(2) + x[1] * x[1]).sqrt();
        (r1, r2)
    };
    SystemSpec::builder(
        "arenstorf",
        4,
        1,
        move |_, x, f| {
            let (r1, r2) = dists(x);
            let (d1, d2) = (r1 * r1 * r1, r2 * r2 * r2);
            f[0] = x[2];
            f[1] = x[3];
            f[2] = x[0] + 2.0 * x[3] - alpha * (x[0] - beta) / d1 - beta * (x[0] + alpha) / d2;
            f[3] = x[1] - 2.0 * x[2] - alpha * x[1] / d1 - beta * x[1] / d2;
        },
        move |_, x, psi| {
            let (r1, r2) = dists(x);
            psi[0] = 0.5 * (x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3])
                + alpha / r1
                + beta / r2;
        },
    )
    .domain(move |_, x| {
        let (r1, r2) = dists(x);
        if r1 < SINGULARITY_RADIUS || r2 < SINGULARITY_RADIUS {
            Err(format!("collision with a primary (r1 = {r1:e}, r2 = {r2:e})"))
        } else {
            Ok(())
        }
    })
    .gradient(move |_, x, g| {
        let (r1, r2) = dists(x);
        let (d1, d2) = (r1 * r1 * r1, r2 * r2 * r2);
        g[(0, 0)] = x[0] - alpha * (x[0] - beta) / d1 - beta * (x[0] + alpha) / d2;
        g[(0, 1)] = x[1] - alpha * x[1] / d1 - beta * x[1] / d2;
        g[(0, 2)] = -x[2];
        g[(0, 3)] = -x[3];
    })
    .build()
}
