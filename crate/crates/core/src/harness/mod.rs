//! Full integrations, summary statistics and method comparisons.

mod experiments;

pub use experiments::{find, registry, Experiment, ExperimentKind, VORTEX_COUNT, VORTEX_SEED};

use std::thread;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::ode::SystemSpec;
use crate::steppers::{step, step_rk4, Method, StepDiagnostics, StepperConfig};

/// Where and why an integration stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    /// Index of the step that failed (1-based; step `k` goes `t_{k−1} → t_k`).
    pub step: usize,
    pub t: f64,
    pub error: Error,
}

/// Aggregates over every step, stored or not.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats {
    pub steps: usize,
    pub total_iterations: usize,
    pub nonconverged: usize,
    pub max_psi_defect: Vec<f64>,
    /// Same, restricted to steps whose iteration converged.
    pub max_psi_defect_converged: Vec<f64>,
    pub max_kappa: Option<f64>,
}

impl RunningStats {
    fn new(m: usize) -> Self {
        Self {
            steps: 0,
            total_iterations: 0,
            nonconverged: 0,
            max_psi_defect: vec![0.0; m],
            max_psi_defect_converged: vec![0.0; m],
            max_kappa: None,
        }
    }

    fn record(&mut self, d: &StepDiagnostics) {
        self.steps += 1;
        self.total_iterations += d.iterations;
        if !d.converged {
            self.nonconverged += 1;
        }
        for (i, v) in d.psi_defect.iter().enumerate() {
            self.max_psi_defect[i] = self.max_psi_defect[i].max(*v);
            if d.converged {
                self.max_psi_defect_converged[i] = self.max_psi_defect_converged[i].max(*v);
            }
        }
        if let Some(k) = d.kappa {
            self.max_kappa = Some(self.max_kappa.map_or(k, |m| m.max(k)));
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub system: String,
    pub method: Method,
    /// Step index of each stored state (0 is the initial condition).
    pub steps: Vec<usize>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Diagnostics of the step that produced each stored state; the entry
    /// for the initial condition has zero iterations and zero defect.
    pub diagnostics: Vec<StepDiagnostics>,
    /// `ψ(t₀, x₀)`.
    pub psi_ref: Vec<f64>,
    pub stats: RunningStats,
    pub failure: Option<Failure>,
    pub wall_time: f64,
}

impl Trajectory {
    pub fn is_truncated(&self) -> bool {
        self.failure.is_some()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial time")
    }
}

/// Step count and final step size for `[t0, t_final]`: the ratio rounds to
/// an integer when within `1e-9`, otherwise an extra shortened step ends
/// exactly on `t_final`.
pub fn step_schedule(t0: f64, t_final: f64, tau: f64) -> Result<(usize, f64)> {
    if !(t_final > t0) || !(tau > 0.0) {
        return Err(Error::InvalidParams(format!("need t_final > t0 and tau > 0 (t0 = {t0}, t_final = {t_final}, tau = {tau})")));
    }
    let ratio = (t_final - t0) / tau;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) && rounded >= 1.0 {
        return Ok((rounded as usize, tau));
    }
    let full = ratio.floor() as usize;
    let last = t_final - (t0 + full as f64 * tau);
    Ok((full + 1, last))
}

/// Integrates with every state stored.
pub fn integrate(sys: &SystemSpec, cfg: &StepperConfig, x0: &[f64], t0: f64, t_final: f64) -> Result<Trajectory> {
    integrate_decimated(sys, cfg, x0, t0, t_final, 1)
}

/// Integrates `[t0, t_final]`, storing every `decimate`-th state plus the
/// final one. Statistics still cover every step.
///
/// A domain violation or singular multiplier ends the run; the trajectory is
/// returned truncated with the failure recorded. Errors are returned only for
/// invalid settings or an inadmissible initial state.
pub fn integrate_decimated(
    sys: &SystemSpec,
    cfg: &StepperConfig,
    x0: &[f64],
    t0: f64,
    t_final: f64,
    decimate: usize,
) -> Result<Trajectory> {
    cfg.validate()?;
    if decimate == 0 {
        return Err(Error::InvalidParams("decimate must be at least 1".into()));
    }
    let (n_steps, last_tau) = step_schedule(t0, t_final, cfg.tau)?;
    let psi_ref = sys.conserved(t0, x0)?;
    let m = psi_ref.len();
    let start = Instant::now();

    let initial = StepDiagnostics {
        iterations: 0,
        converged: true,
        psi_defect: vec![0.0; m],
        residual_norm: 0.0,
        kappa: None,
    };
    let mut traj = Trajectory {
        system: sys.name().to_string(),
        method: cfg.method,
        steps: vec![0],
        times: vec![t0],
        states: vec![x0.to_vec()],
        diagnostics: vec![initial],
        psi_ref,
        stats: RunningStats::new(m),
        failure: None,
        wall_time: 0.0,
    };

    let mut y = x0.to_vec();
    for k in 1..=n_steps {
        let t = t0 + (k - 1) as f64 * cfg.tau;
        let shortened = k == n_steps && last_tau != cfg.tau;
        let (tau, t_next) = if shortened { (last_tau, t_final) } else { (cfg.tau, t0 + k as f64 * cfg.tau) };
        match step(sys, cfg, t, tau, &y, &traj.psi_ref) {
            Ok((x, d)) => {
                traj.stats.record(&d);
                if k % decimate == 0 || k == n_steps {
                    traj.steps.push(k);
                    traj.times.push(t_next);
                    traj.states.push(x.clone());
                    traj.diagnostics.push(d);
                }
                y = x;
            }
            Err(error) => {
                traj.failure = Some(Failure { step: k, t: t_next, error });
                break;
            }
        }
    }
    traj.wall_time = start.elapsed().as_secs_f64();
    Ok(traj)
}

/// Table-row summary of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub system: String,
    pub method: Method,
    /// `max_k |ψ_i(t_k, x_k) − ψ_i(t₀, x₀)|` per component.
    pub max_psi_defect: Vec<f64>,
    /// Same over converged steps only (equal to the above for RK4).
    pub max_psi_defect_converged: Vec<f64>,
    /// Mean corrector iterations per step; `None` for RK4.
    pub mean_fpi: Option<f64>,
    pub max_kappa: Option<f64>,
    pub wall_time: f64,
    pub steps: usize,
    pub nonconverged_steps: usize,
    pub failure_step: Option<usize>,
    pub failure: Option<String>,
}

impl ExperimentReport {
    pub fn max_defect(&self) -> f64 {
        self.max_psi_defect.iter().fold(0.0, |a: f64, b| a.max(*b))
    }
}

/// Summarizes a trajectory, re-evaluating `ψ` on every stored state and
/// merging with the per-step maxima collected during the run.
pub fn summarize(traj: &Trajectory, sys: &SystemSpec) -> ExperimentReport {
    let mut max_def = traj.stats.max_psi_defect.clone();
    for (t, x) in traj.times.iter().zip(&traj.states) {
        match sys.conserved(*t, x) {
            Ok(psi) => {
                for i in 0..max_def.len() {
                    max_def[i] = max_def[i].max((psi[i] - traj.psi_ref[i]).abs());
                }
            }
            Err(_) => max_def.iter_mut().for_each(|v| *v = f64::NAN),
        }
    }
    let mean_fpi = (traj.method.is_implicit() && traj.stats.steps > 0)
        .then(|| traj.stats.total_iterations as f64 / traj.stats.steps as f64);
    ExperimentReport {
        system: traj.system.clone(),
        method: traj.method,
        max_psi_defect: max_def,
        max_psi_defect_converged: traj.stats.max_psi_defect_converged.clone(),
        mean_fpi,
        max_kappa: traj.stats.max_kappa,
        wall_time: traj.wall_time,
        steps: traj.stats.steps,
        nonconverged_steps: traj.stats.nonconverged,
        failure_step: traj.failure.as_ref().map(|f| f.step),
        failure: traj.failure.as_ref().map(|f| f.error.to_string()),
    }
}

/// Runs several methods on the same problem concurrently, one thread each,
/// sharing every setting of `base` except the method. Results come back in
/// the order of `methods`.
pub fn compare_methods(
    sys: &SystemSpec,
    base: &StepperConfig,
    methods: &[Method],
    x0: &[f64],
    t0: f64,
    t_final: f64,
    decimate: usize,
) -> Vec<Result<Trajectory>> {
    thread::scope(|s| {
        let handles: Vec<_> = methods
            .iter()
            .map(|&method| {
                let cfg = StepperConfig { method, ..base.clone() };
                s.spawn(move || integrate_decimated(sys, &cfg, x0, t0, t_final, decimate))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("integration thread panicked")).collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub tau: f64,
    /// `‖x(T) − x_ref(T)‖∞`; NaN when the run failed.
    pub error: f64,
    /// `log₂(e(2τ)/e(τ))` against the previous row.
    pub observed_order: Option<f64>,
}

/// Global error at `t_final` for `τ, τ/2, …, τ/2^halvings` against an RK4
/// reference computed with step `τ_min/64`.
pub fn convergence_study(
    sys: &SystemSpec,
    cfg: &StepperConfig,
    x0: &[f64],
    t0: f64,
    t_final: f64,
    halvings: usize,
) -> Result<Vec<ConvergenceRow>> {
    if halvings < 2 {
        return Err(Error::InvalidParams(format!("convergence_study needs at least 2 halvings, got {halvings}")));
    }
    let tau_min = cfg.tau / (1u64 << halvings) as f64;
    let reference = reference_solution(sys, x0, t0, t_final, tau_min / 64.0)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(halvings + 1);
    for i in 0..=halvings {
        let tau = cfg.tau / (1u64 << i) as f64;
        let run = integrate_decimated(sys, &StepperConfig { tau, ..cfg.clone() }, x0, t0, t_final, usize::MAX)?;
        let error = if run.is_truncated() {
            f64::NAN
        } else {
            run.final_state().iter().zip(&reference).fold(0.0, |a: f64, (x, r)| a.max((x - r).abs()))
        };
        let observed_order = rows.last().map(|prev| (prev.error / error).log2());
        rows.push(ConvergenceRow { tau, error, observed_order });
    }
    Ok(rows)
}

fn reference_solution(sys: &SystemSpec, x0: &[f64], t0: f64, t_final: f64, tau: f64) -> Result<Vec<f64>> {
    let (n, _) = step_schedule(t0, t_final, tau)?;
    let mut y = x0.to_vec();
    for k in 1..=n {
        let t = t0 + (k - 1) as f64 * tau;
        let h = if k == n { t_final - t } else { tau };
        y = step_rk4(sys, t, &y, h)?;
    }
    Ok(y)
}
