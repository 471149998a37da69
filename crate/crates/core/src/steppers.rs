//! One-step integrators: the minimal-norm multiplier schemes and the RK4 and
//! implicit midpoint baselines.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{cond_2, dot, inverse_sym, norm_inf, solve_sym, svd_thin, SINGULAR_VALUE_RTOL};
use crate::multiplier::{
    discrete_time_partial, residual, telescoping_multiplier, MultiplierMatrix, DEFAULT_DEGENERACY_TOL,
};
use crate::ode::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Explicit pseudoinverse `Aᵀ(AAᵀ)⁻¹`.
    Direct,
    /// Solve `B g = r` with `B = AAᵀ`, then `f − Aᵀg`.
    Mixed,
    /// Thin SVD of `A`, then `f − VΣ⁻¹Uᵀr`.
    MixedSvd,
    /// Closed form for a single conserved quantity.
    ClosedM1,
    /// Closed form for two conserved quantities.
    ClosedM2,
    Rk4,
    ImplicitMidpoint,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Direct,
        Method::Mixed,
        Method::MixedSvd,
        Method::ClosedM1,
        Method::ClosedM2,
        Method::Rk4,
        Method::ImplicitMidpoint,
    ];

    /// The rows of a standard comparison table.
    pub const TABLE: [Method; 5] =
        [Method::Rk4, Method::ImplicitMidpoint, Method::Direct, Method::Mixed, Method::MixedSvd];

    pub fn name(self) -> &'static str {
        match self {
            Method::Direct => "mn_dmm",
            Method::Mixed => "mixed_mn_dmm",
            Method::MixedSvd => "mixed_mn_dmm_svd",
            Method::ClosedM1 => "mn_dmm_m1",
            Method::ClosedM2 => "mn_dmm_m2",
            Method::Rk4 => "rk4",
            Method::ImplicitMidpoint => "implicit_midpoint",
        }
    }

    /// True for the multiplier-corrected schemes.
    pub fn is_mn(self) -> bool {
        !matches!(self, Method::Rk4 | Method::ImplicitMidpoint)
    }

    pub fn is_implicit(self) -> bool {
        self != Method::Rk4
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let m = match s {
            "direct" => Method::Direct,
            "mixed" => Method::Mixed,
            "mixed_svd" | "svd" => Method::MixedSvd,
            "midpoint" => Method::ImplicitMidpoint,
            _ => match Method::ALL.iter().find(|m| m.name() == s) {
                Some(m) => *m,
                None => {
                    let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                    return Err(Error::InvalidParams(format!(
                        "unknown method '{s}' (expected one of: {})",
                        names.join(", ")
                    )));
                }
            },
        };
        Ok(m)
    }
}

/// The consistent scheme `f^τ` that the multiplier correction modifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseScheme {
    /// `½[f(t, y) + f(t+τ, y + τf(t, y))]`, independent of the new state.
    #[default]
    ImprovedEuler,
    /// `½[f(t, y) + f(t+τ, x)]`.
    Trapezoidal,
}

impl BaseScheme {
    pub fn name(self) -> &'static str {
        match self {
            BaseScheme::ImprovedEuler => "improved_euler",
            BaseScheme::Trapezoidal => "trapezoidal",
        }
    }
}

impl FromStr for BaseScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "improved_euler" | "heun" => Ok(BaseScheme::ImprovedEuler),
            "trapezoidal" => Ok(BaseScheme::Trapezoidal),
            _ => Err(Error::InvalidParams(format!(
                "unknown base scheme '{s}' (expected improved_euler or trapezoidal)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    pub tau: f64,
    /// Tolerance on `|ψ(x) − ψ_ref|∞`.
    pub delta: f64,
    /// Tolerance on successive iterates `‖x_i − x_{i−1}‖∞`.
    pub epsilon: f64,
    /// Fixed-point iteration cap `K`.
    pub max_iters: usize,
    pub method: Method,
    pub base_scheme: BaseScheme,
    /// Use the closed forms whenever `m ≤ 2`, whatever the variant.
    pub fast_path: bool,
    /// Use a system's hand-derived multiplier instead of telescoping.
    pub prefer_analytic_multiplier: bool,
    pub deg_tol: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            tau: 0.1,
            delta: 1e-15,
            epsilon: 1e-15,
            max_iters: 20,
            method: Method::Mixed,
            base_scheme: BaseScheme::ImprovedEuler,
            fast_path: false,
            prefer_analytic_multiplier: false,
            deg_tol: DEFAULT_DEGENERACY_TOL,
        }
    }
}

impl StepperConfig {
    pub fn new(method: Method, tau: f64) -> Self {
        Self { method, tau, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("tau", self.tau), ("delta", self.delta), ("epsilon", self.epsilon), ("deg_tol", self.deg_tol)];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{key} must be positive and finite, got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParams("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    /// Corrector iterations (the predictor is not counted); 0 for RK4.
    pub iterations: usize,
    pub converged: bool,
    /// `|ψ(t_next, x_next) − ψ_ref|` per component.
    pub psi_defect: Vec<f64>,
    /// `‖x_i − x_{i−1}‖∞` at the last iteration.
    pub residual_norm: f64,
    /// Largest condition number met during the step (multiplier schemes only).
    pub kappa: Option<f64>,
}

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(yi, xi)| yi + a * xi).collect()
}

fn diff_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

fn defect(sys: &SystemSpec, t: f64, x: &[f64], psi_ref: &[f64]) -> Result<Vec<f64>> {
    let psi = sys.conserved(t, x)?;
    Ok(psi.iter().zip(psi_ref).map(|(p, q)| (p - q).abs()).collect())
}

/// Improved Euler (Heun) step `y + (τ/2)[f(t, y) + f(t+τ, y + τf(t, y))]`.
pub fn predictor_improved_euler(sys: &SystemSpec, t: f64, y: &[f64], tau: f64) -> Result<Vec<f64>> {
    let f0 = sys.source(t, y)?;
    let f1 = sys.source(t + tau, &axpy(y, tau, &f0))?;
    Ok(y.iter().zip(f0.iter().zip(&f1)).map(|(yi, (a, b))| yi + 0.5 * tau * (a + b)).collect())
}

/// The base scheme `f^τ(t, x_new, x_old)`.
pub fn base_scheme_f_tau(
    sys: &SystemSpec,
    t: f64,
    x_new: &[f64],
    x_old: &[f64],
    tau: f64,
    scheme: BaseScheme,
) -> Result<Vec<f64>> {
    let f0 = sys.source(t, x_old)?;
    let f1 = match scheme {
        BaseScheme::ImprovedEuler => sys.source(t + tau, &axpy(x_old, tau, &f0))?,
        BaseScheme::Trapezoidal => sys.source(t + tau, x_new)?,
    };
    Ok(f0.iter().zip(&f1).map(|(a, b)| 0.5 * (a + b)).collect())
}

/// `f^τ − (Λ^τ)⁺(Λ^τ f^τ + ∂_t^τψ)` by the general algorithm of `method`.
///
/// Returns the corrected field and the condition number of the matrix the
/// variant factors: `κ(B)` for direct and mixed, `κ(A)` for SVD; exactly
/// 1.0 when `m = 1`. The closed-form methods dispatch to
/// [`mn_correct_m1`] / [`mn_correct_m2`].
pub fn mn_correct(
    lam: &MultiplierMatrix,
    f_tau: &[f64],
    dt_psi: &[f64],
    method: Method,
) -> Result<(Vec<f64>, f64)> {
    let a = &lam.matrix;
    let m = a.rows();
    if f_tau.len() != a.cols() || dt_psi.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "mn_correct: {m}x{} multiplier with f of length {} and dt_psi of length {}",
            a.cols(),
            f_tau.len(),
            dt_psi.len()
        )));
    }
    let r = residual(lam, f_tau, dt_psi);
    match method {
        Method::Direct => {
            let b = a.gram_rows();
            let pinv = a.transpose().matmul(&inverse_sym(&b)?);
            let corr = pinv.matvec(&r);
            let kappa = if m == 1 { 1.0 } else { cond_2(&b) };
            Ok((axpy(f_tau, -1.0, &corr), kappa))
        }
        Method::Mixed => {
            let b = a.gram_rows();
            let g = solve_sym(&b, &r)?;
            let kappa = if m == 1 { 1.0 } else { cond_2(&b) };
            Ok((axpy(f_tau, -1.0, &a.tmatvec(&g)), kappa))
        }
        Method::MixedSvd => {
            let svd = svd_thin(a)?;
            let smax = svd.sigma[0];
            let threshold = SINGULAR_VALUE_RTOL * smax;
            let coef = svd.u.tmatvec(&r);
            let mut b = vec![0.0; m];
            for i in 0..m {
                let s = svd.sigma[i];
                if !(s > threshold) {
                    return Err(Error::SingularMatrix { pivot: s, threshold });
                }
                b[i] = coef[i] / s;
            }
            let kappa = if m == 1 { 1.0 } else { smax / svd.sigma[m - 1] };
            Ok((axpy(f_tau, -1.0, &svd.v.matvec(&b)), kappa))
        }
        Method::ClosedM1 => {
            check_rows(m, 1)?;
            Ok((mn_correct_m1(a.row(0), f_tau, dt_psi[0])?, 1.0))
        }
        Method::ClosedM2 => {
            check_rows(m, 2)?;
            mn_correct_m2(a.row(0), a.row(1), f_tau, [dt_psi[0], dt_psi[1]])
        }
        Method::Rk4 | Method::ImplicitMidpoint => {
            Err(Error::InvalidParams(format!("{method} is not a multiplier scheme")))
        }
    }
}

fn check_rows(m: usize, expected: usize) -> Result<()> {
    if m != expected {
        return Err(Error::InvalidParams(format!(
            "closed form for m = {expected} applied to a system with m = {m}"
        )));
    }
    Ok(())
}

/// `m = 1`: `f − a·(a·f + ∂_t^τψ)/‖a‖²`.
pub fn mn_correct_m1(a: &[f64], f_tau: &[f64], dt_psi: f64) -> Result<Vec<f64>> {
    let aa = dot(a, a);
    let threshold = SINGULAR_VALUE_RTOL * a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(aa.sqrt() > threshold) || aa == 0.0 {
        return Err(Error::SingularMatrix { pivot: aa, threshold });
    }
    let c = (dot(a, f_tau) + dt_psi) / aa;
    Ok(axpy(f_tau, -c, a))
}

/// `m = 2` via Cramer's rule on the 2×2 Gram matrix. Returns the corrected
/// field and `κ(B)` from the closed-form eigenvalues.
pub fn mn_correct_m2(a1: &[f64], a2: &[f64], f_tau: &[f64], dt_psi: [f64; 2]) -> Result<(Vec<f64>, f64)> {
    let (b11, b12, b22) = (dot(a1, a1), dot(a1, a2), dot(a2, a2));
    let det = b11 * b22 - b12 * b12;
    let threshold = 1e-28 * b11 * b22;
    if !(det > threshold) {
        return Err(Error::SingularMatrix { pivot: det, threshold });
    }
    let r1 = dot(a1, f_tau) + dt_psi[0];
    let r2 = dot(a2, f_tau) + dt_psi[1];
    let g1 = (b22 * r1 - b12 * r2) / det;
    let g2 = (b11 * r2 - b12 * r1) / det;
    let f = f_tau.iter().enumerate().map(|(j, v)| v - a1[j] * g1 - a2[j] * g2).collect();
    let tr = b11 + b22;
    let disc = ((b11 - b22).powi(2) + 4.0 * b12 * b12).sqrt();
    let lmax = 0.5 * (tr + disc);
    // det = λ_max·λ_min avoids cancellation in (tr − disc)/2
    let kappa = lmax / (det / lmax);
    Ok((f, kappa))
}

/// Condition number reported for a closed-form correction, matched to the
/// matrix the general variant would factor.
fn closed_kappa(method: Method, m: usize, kappa_b: f64) -> f64 {
    match (m, method) {
        (1, _) => 1.0,
        (_, Method::MixedSvd) => kappa_b.sqrt(),
        _ => kappa_b,
    }
}

fn correct(lam: &MultiplierMatrix, f_tau: &[f64], dt_psi: &[f64], cfg: &StepperConfig) -> Result<(Vec<f64>, f64)> {
    let m = lam.rows();
    if cfg.fast_path && m <= 2 && matches!(cfg.method, Method::Direct | Method::Mixed | Method::MixedSvd) {
        let (f, kb) = if m == 1 {
            (mn_correct_m1(lam.matrix.row(0), f_tau, dt_psi[0])?, 1.0)
        } else {
            mn_correct_m2(lam.matrix.row(0), lam.matrix.row(1), f_tau, [dt_psi[0], dt_psi[1]])?
        };
        return Ok((f, closed_kappa(cfg.method, m, kb)));
    }
    mn_correct(lam, f_tau, dt_psi, cfg.method)
}

/// One multiplier-corrected step from `(t, y)` with step `tau`.
///
/// Iterates `x_i = y + τ f_MN(t, x_{i−1}, y)` from the improved-Euler
/// predictor until both `|ψ(t+τ, x_i) − ψ_ref|∞ < δ` and
/// `‖x_i − x_{i−1}‖∞ < ε`, or `K` iterations have run (the step is then
/// accepted with `converged = false`).
pub fn step_mn(
    sys: &SystemSpec,
    cfg: &StepperConfig,
    t: f64,
    tau: f64,
    y: &[f64],
    psi_ref: &[f64],
) -> Result<(Vec<f64>, StepDiagnostics)> {
    if !cfg.method.is_mn() {
        return Err(Error::InvalidParams(format!("step_mn called with {}", cfg.method)));
    }
    let t_next = t + tau;
    let f0 = sys.source(t, y)?;
    let f1 = sys.source(t_next, &axpy(y, tau, &f0))?;
    let heun: Vec<f64> = f0.iter().zip(&f1).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut x_prev = axpy(y, tau, &heun);

    let analytic = cfg.prefer_analytic_multiplier;
    let mut kappa_max: f64 = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut psi_defect = vec![f64::NAN; sys.num_conserved()];
    let mut res = f64::INFINITY;
    while iterations < cfg.max_iters {
        iterations += 1;
        let lam = match sys.analytic_multiplier(t, &x_prev, y).filter(|_| analytic) {
            Some(mat) => MultiplierMatrix::from_matrix(mat),
            None => telescoping_multiplier(sys, t, &x_prev, y, cfg.deg_tol)?,
        };
        let f_tau = match cfg.base_scheme {
            BaseScheme::ImprovedEuler => heun.clone(),
            BaseScheme::Trapezoidal => {
                let fx = sys.source(t_next, &x_prev)?;
                f0.iter().zip(&fx).map(|(a, b)| 0.5 * (a + b)).collect()
            }
        };
        let dt_psi = discrete_time_partial(sys, t, t_next, &x_prev)?;
        let (f_mn, kappa) = correct(&lam, &f_tau, &dt_psi, cfg)?;
        kappa_max = kappa_max.max(kappa);
        let x = axpy(y, tau, &f_mn);
        psi_defect = defect(sys, t_next, &x, psi_ref)?;
        res = diff_inf(&x, &x_prev);
        x_prev = x;
        if norm_inf(&psi_defect) < cfg.delta && res < cfg.epsilon {
            converged = true;
            break;
        }
    }
    let diag = StepDiagnostics { iterations, converged, psi_defect, residual_norm: res, kappa: Some(kappa_max) };
    Ok((x_prev, diag))
}

/// Classical four-stage Runge–Kutta step.
pub fn step_rk4(sys: &SystemSpec, t: f64, y: &[f64], tau: f64) -> Result<Vec<f64>> {
    let h = 0.5 * tau;
    let k1 = sys.source(t, y)?;
    let k2 = sys.source(t + h, &axpy(y, h, &k1))?;
    let k3 = sys.source(t + h, &axpy(y, h, &k2))?;
    let k4 = sys.source(t + tau, &axpy(y, tau, &k3))?;
    Ok((0..y.len()).map(|i| y[i] + tau / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// Implicit midpoint `x = y + τ f(t + τ/2, (x + y)/2)` by fixed-point
/// iteration from the improved-Euler predictor, stopping on `ε` or `K`.
/// The `ψ` defect is recorded but does not stop the iteration.
pub fn step_implicit_midpoint(
    sys: &SystemSpec,
    cfg: &StepperConfig,
    t: f64,
    tau: f64,
    y: &[f64],
    psi_ref: &[f64],
) -> Result<(Vec<f64>, StepDiagnostics)> {
    let mut x_prev = predictor_improved_euler(sys, t, y, tau)?;
    let t_mid = t + 0.5 * tau;
    let mut mid = vec![0.0; y.len()];
    let mut f = vec![0.0; y.len()];
    let mut iterations = 0;
    let mut converged = false;
    let mut res = f64::INFINITY;
    while iterations < cfg.max_iters {
        iterations += 1;
        for i in 0..y.len() {
            mid[i] = 0.5 * (x_prev[i] + y[i]);
        }
        sys.eval_source(t_mid, &mid, &mut f)?;
        let x = axpy(y, tau, &f);
        res = diff_inf(&x, &x_prev);
        x_prev = x;
        if res < cfg.epsilon {
            converged = true;
            break;
        }
    }
    let psi_defect = defect(sys, t + tau, &x_prev, psi_ref)?;
    Ok((x_prev, StepDiagnostics { iterations, converged, psi_defect, residual_norm: res, kappa: None }))
}

/// One step of whichever method `cfg` selects.
pub fn step(
    sys: &SystemSpec,
    cfg: &StepperConfig,
    t: f64,
    tau: f64,
    y: &[f64],
    psi_ref: &[f64],
) -> Result<(Vec<f64>, StepDiagnostics)> {
    match cfg.method {
        Method::Rk4 => {
            let x = step_rk4(sys, t, y, tau)?;
            let psi_defect = defect(sys, t + tau, &x, psi_ref)?;
            let diag = StepDiagnostics { iterations: 0, converged: true, psi_defect, residual_norm: 0.0, kappa: None };
            Ok((x, diag))
        }
        Method::ImplicitMidpoint => step_implicit_midpoint(sys, cfg, t, tau, y, psi_ref),
        _ => step_mn(sys, cfg, t, tau, y, psi_ref),
    }
}
