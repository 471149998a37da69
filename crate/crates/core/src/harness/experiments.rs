//! Registered benchmark experiments with their reference settings.

use crate::error::{Error, Result};
use crate::ode::SystemSpec;
use crate::steppers::{Method, StepperConfig};
use crate::systems::{
    lorenz, lv2, lv3, point_vortex, rotation, schwarzschild, three_body, Lv2Params, Lv3Params,
    SchwarzschildParams, VortexParams, ARENSTORF_ALPHA, ARENSTORF_PERIOD, ARENSTORF_X0,
};

/// Default number of vortices.
pub const VORTEX_COUNT: usize = 100;
/// Default seed for the random vortex configuration.
pub const VORTEX_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Lv2,
    Lv3,
    Arenstorf,
    Lorenz,
    Vortex,
    Schwarzschild,
    Rotation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: &'static str,
    pub description: &'static str,
    pub kind: ExperimentKind,
    pub tau: f64,
    pub t0: f64,
    pub t_final: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub max_iters: usize,
}

fn exp(name: &'static str, description: &'static str, kind: ExperimentKind, tau: f64, t_final: f64) -> Experiment {
    Experiment { name, description, kind, tau, t0: 0.0, t_final, delta: 1e-15, epsilon: 1e-15, max_iters: 20 }
}

/// Every registered experiment, in display order.
pub fn registry() -> Vec<Experiment> {
    let arenstorf_t = 1.015 * ARENSTORF_PERIOD;
    vec![
        exp("lv2", "two-species Lotka-Volterra, (a,b,c,d) = (1,2,3,4)", ExperimentKind::Lv2, 0.1, 10000.0),
        exp("lv3", "three-species Lotka-Volterra, two invariants", ExperimentKind::Lv3, 0.05, 30000.0),
        exp(
            "arenstorf",
            "restricted three-body problem, Arenstorf orbit",
            ExperimentKind::Arenstorf,
            arenstorf_t * 1e-6,
            arenstorf_t,
        ),
        exp("lorenz", "Lorenz system, sigma = 1/3, rho = 400, beta = 0", ExperimentKind::Lorenz, 0.001, 5.0),
        exp("vortex", "point vortices on the sphere (random configuration)", ExperimentKind::Vortex, 0.1, 200.0),
        exp(
            "schwarzschild",
            "geodesic in the Schwarzschild metric, r_s = 2",
            ExperimentKind::Schwarzschild,
            1.0 / 3.0,
            200.0,
        ),
        exp("rotation", "harmonic rotation with a quadratic invariant", ExperimentKind::Rotation, 0.1, 10.0),
    ]
}

pub fn find(name: &str) -> Result<Experiment> {
    registry().into_iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = registry().iter().map(|e| e.name).collect();
        Error::InvalidParams(format!("unknown experiment '{name}' (expected one of: {})", names.join(", ")))
    })
}

impl Experiment {
    /// The system and initial state. `seed` and `vortex_count` only affect
    /// the vortex experiment.
    pub fn build(&self, seed: u64, vortex_count: usize) -> Result<(SystemSpec, Vec<f64>)> {
        Ok(match self.kind {
            ExperimentKind::Lv2 => (lv2(Lv2Params::default())?, vec![0.3, 0.7]),
            ExperimentKind::Lv3 => (lv3(Lv3Params::default())?, vec![0.2, 0.5, 0.3]),
            ExperimentKind::Arenstorf => (three_body(ARENSTORF_ALPHA)?, ARENSTORF_X0.to_vec()),
            ExperimentKind::Lorenz => (lorenz(), vec![0.1, 0.0, 0.0]),
            ExperimentKind::Vortex => {
                let p = VortexParams::random(vortex_count, seed, false);
                (point_vortex(&p)?, p.state())
            }
            ExperimentKind::Schwarzschild => {
                (schwarzschild(SchwarzschildParams::default())?, SchwarzschildParams::initial_state())
            }
            ExperimentKind::Rotation => (rotation(), vec![1.0, 0.0]),
        })
    }

    pub fn build_default(&self) -> Result<(SystemSpec, Vec<f64>)> {
        self.build(VORTEX_SEED, VORTEX_COUNT)
    }

    /// Stepper settings for `method` at the reference `(τ, δ, ε, K)`.
    pub fn config(&self, method: Method) -> StepperConfig {
        StepperConfig {
            tau: self.tau,
            delta: self.delta,
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            method,
            ..StepperConfig::default()
        }
    }
}
