//! Two- and three-species Lotka-Volterra systems.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::ode::SystemSpec;

fn positive(x: &[f64]) -> std::result::Result<(), String> {
    match x.iter().position(|&v| !(v > 0.0)) {
        Some(i) => Err(format!("population x_{i} = {} is not positive", x[i])),
        None => Ok(()),
    }
}

/// Rates of `ẋ = x(a − by)`, `ẏ = y(dx − c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lv2Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Default for Lv2Params {
    fn default() -> Self {
        Self { a: 1.0, b: 2.0, c: 3.0, d: 4.0 }
    }
}

/// `(log u − log v)/(u − v)`, falling back to `1/mid` when the endpoints
/// (nearly) coincide.
fn log_divided_difference(u: f64, v: f64) -> f64 {
    let du = u - v;
    if du.abs() < 1e-10 * u.abs().max(v.abs()) {
        2.0 / (u + v)
    } else {
        (u / v).ln() / du
    }
}

/// Two-species system with `ψ = a log y − b y + c log x − d x` on `x, y > 0`.
///
/// Because `ψ` is separable, a closed-form multiplier (per-coordinate
/// logarithmic divided differences) is attached as well.
pub fn lv2(p: Lv2Params) -> Result<SystemSpec> {
    let Lv2Params { a, b, c, d } = p;
    if !(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0) {
        return Err(Error::InvalidParams(format!("lv2 rates must be positive: {p:?}")));
    }
    SystemSpec::builder(
        "lv2",
        2,
        1,
        move |_, x, f| {
            f[0] = x[0] * (a - b * x[1]);
            f[1] = x[1] * (d * x[0] - c);
        },
        move |_, x, psi| psi[0] = a * x[1].ln() - b * x[1] + c * x[0].ln() - d * x[0],
    )
    .domain(|_, x| positive(x))
    .gradient(move |_, x, g| {
        g[(0, 0)] = c / x[0] - d;
        g[(0, 1)] = a / x[1] - b;
    })
    .analytic_multiplier(move |_, xn, xo| {
        let row = vec![
            c * log_divided_difference(xn[0], xo[0]) - d,
            a * log_divided_difference(xn[1], xo[1]) - b,
        ];
        DenseMatrix::from_rows(&[row]).expect("finite multiplier")
    })
    .build()
}

/// Interaction matrix, fixed point, and the weights of the two invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Lv3Params {
    pub interaction: [[f64; 3]; 3],
    pub fixed_point: [f64; 3],
    pub d_diag: [f64; 3],
    pub eta: [f64; 3],
}

impl Default for Lv3Params {
    fn default() -> Self {
        Self {
            interaction: [[0.0, 3.0, -2.0], [-3.0, 0.0, 1.0], [2.0, -1.0, 0.0]],
            fixed_point: [1.0, 1.0, 1.0],
            d_diag: [1.0, 1.0, 1.0],
            eta: [1.0, 2.0, 3.0],
        }
    }
}

impl Lv3Params {
    /// Largest entry of `|DA + AᵀD|` and `|ηᵀA|`; both must vanish for the two
    /// quantities to be conserved.
    pub fn invariant_residual(&self) -> f64 {
        let a = &self.interaction;
        let d = &self.d_diag;
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((d[i] * a[i][j] + a[j][i] * d[j]).abs());
            }
        }
        for j in 0..3 {
            let s: f64 = (0..3).map(|i| self.eta[i] * a[i][j]).sum();
            worst = worst.max(s.abs());
        }
        worst
    }
}

/// Three-species system `ẋ_i = x_i Σ_j a_ij (x_j − ξ_j)` with
/// `ψ₁ = Σ d_i (x_i − ξ_i log x_i)` and `ψ₂ = Π x_i^{η_i}`.
pub fn lv3(p: Lv3Params) -> Result<SystemSpec> {
    let resid = p.invariant_residual();
    if resid > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "lv3: DA + AᵀD = 0 and ηᵀA = 0 violated by {resid:e}"
        )));
    }
    let Lv3Params { interaction: a, fixed_point: xi, d_diag: dd, eta } = p;
    SystemSpec::builder(
        "lv3",
        3,
        2,
        move |_, x, f| {
            for i in 0..3 {
                let s: f64 = (0..3).map(|j| a[i][j] * (x[j] - xi[j])).sum();
                f[i] = x[i] * s;
            }
        },
        move |_, x, psi| {
            psi[0] = (0..3).map(|i| dd[i] * (x[i] - xi[i] * x[i].ln())).sum();
            psi[1] = (0..3).map(|i| x[i].powf(eta[i])).product();
        },
    )
    .domain(|_, x| positive(x))
    .gradient(move |_, x, g| {
        let prod: f64 = (0..3).map(|i| x[i].powf(eta[i])).product();
        for i in 0..3 {
            g[(0, i)] = dd[i] * (1.0 - xi[i] / x[i]);
            g[(1, i)] = eta[i] * prod / x[i];
        }
    })
    .build()
}
