//! Geodesics of the Schwarzschild metric in Schwarzschild coordinates.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::linalg::{inverse_sym, DenseMatrix};
use crate::ode::SystemSpec;

/// `Γ[l][j][k] = Γ^l_{jk}`, indices ordered `(t, r, θ, φ)`.
pub type Christoffel = [[[f64; 4]; 4]; 4];

/// Initial position `(t, r, θ, φ)` of the reference orbit.
pub const SCHWARZSCHILD_X0: [f64; 4] = [0.0, 37.338_379_348_829_989, FRAC_PI_2, 3.006_861_595_479_139];
/// Initial velocity `(t′, r′, θ′, φ′)` of the reference orbit.
pub const SCHWARZSCHILD_Y0: [f64; 4] = [1.0, -0.990_937_492_340_824, 0.0, 0.003_597_472_991_852];

const HORIZON_RTOL: f64 = 1e-12;
const AXIS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzschildParams {
    pub r_s: f64,
}

impl Default for SchwarzschildParams {
    /// `G = M = c = 1`.
    fn default() -> Self {
        Self { r_s: 2.0 }
    }
}

impl SchwarzschildParams {
    /// The reference state `(x⁰, y⁰)` as one 8-vector.
    pub fn initial_state() -> Vec<f64> {
        SCHWARZSCHILD_X0.iter().chain(&SCHWARZSCHILD_Y0).copied().collect()
    }
}

fn check_position(r_s: f64, x: &[f64]) -> std::result::Result<(), String> {
    let (r, theta) = (x[1], x[2]);
    if !(r > r_s * (1.0 + HORIZON_RTOL)) {
        return Err(format!("r = {r} inside the horizon r_s = {r_s}"));
    }
    if theta.sin().abs() <= AXIS_TOL {
        return Err(format!("theta = {theta} on the polar axis"));
    }
    Ok(())
}

/// `diag(1 − r_s/r, −(1 − r_s/r)⁻¹, −r², −r² sin²θ)`.
pub fn schwarzschild_metric(r_s: f64, x: &[f64; 4]) -> [[f64; 4]; 4] {
    let (r, s) = (x[1], x[2].sin());
    let a = 1.0 - r_s / r;
    let mut g = [[0.0; 4]; 4];
    g[0][0] = a;
    g[1][1] = -1.0 / a;
    g[2][2] = -r * r;
    g[3][3] = -r * r * s * s;
    g
}

fn christoffel_unchecked(r_s: f64, r: f64, theta: f64) -> Christoffel {
    let (s, c) = theta.sin_cos();
    let mut g = [[[0.0; 4]; 4]; 4];
    let (t, rr, th, ph) = (0, 1, 2, 3);
    let tr = r_s / (2.0 * r * (r - r_s));
    g[t][t][rr] = tr;
    g[t][rr][t] = tr;
    g[rr][t][t] = r_s * (r - r_s) / (2.0 * r * r * r);
    g[rr][rr][rr] = -tr;
    g[rr][th][th] = -(r - r_s);
    g[rr][ph][ph] = -(r - r_s) * s * s;
    g[th][rr][th] = 1.0 / r;
    g[th][th][rr] = 1.0 / r;
    g[th][ph][ph] = -s * c;
    g[ph][rr][ph] = 1.0 / r;
    g[ph][ph][rr] = 1.0 / r;
    g[ph][th][ph] = c / s;
    g[ph][ph][th] = c / s;
    g
}

/// Closed-form Christoffel symbols at `x = (t, r, θ, φ)`.
pub fn christoffel_schwarzschild(p: SchwarzschildParams, x: &[f64; 4]) -> Result<Christoffel> {
    check_position(p.r_s, x).map_err(Error::DomainViolation)?;
    Ok(christoffel_unchecked(p.r_s, x[1], x[2]))
}

/// `Γ^l_{jk} = ½ g^{lm}(∂_j g_{mk} + ∂_k g_{mj} − ∂_m g_{jk})` with metric
/// derivatives by central differences (step `1e-6·max(1, |x_j|)`).
pub fn christoffel_fd_oracle(
    metric: impl Fn(&[f64; 4]) -> [[f64; 4]; 4],
    x: &[f64; 4],
) -> Result<Christoffel> {
    let g = metric(x);
    let ginv = inverse_sym(&DenseMatrix::from_rows(&g.iter().map(|r| r.to_vec()).collect::<Vec<_>>())?)?;
    // dg[a][i][j] = ∂_a g_ij
    let mut dg = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        let h = 1e-6 * x[a].abs().max(1.0);
        let (mut xp, mut xm) = (*x, *x);
        xp[a] += h;
        xm[a] -= h;
        let (gp, gm) = (metric(&xp), metric(&xm));
        let width = xp[a] - xm[a];
        for i in 0..4 {
            for j in 0..4 {
                dg[a][i][j] = (gp[i][j] - gm[i][j]) / width;
            }
        }
    }
    let mut out = [[[0.0; 4]; 4]; 4];
    for l in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let mut acc = 0.0;
                for m in 0..4 {
                    acc += ginv[(l, m)] * (dg[j][m][k] + dg[k][m][j] - dg[m][j][k]);
                }
                out[l][j][k] = 0.5 * acc;
            }
        }
    }
    Ok(out)
}

/// Geodesic equations `x′ = y`, `y′^l = −Γ^l_{jk} y^j y^k` for the state
/// `(t, r, θ, φ, t′, r′, θ′, φ′)`.
///
/// Conserved quantities `(S, E, L₁, L₂, L₃)`: the speed `g_ij y^i y^j`, the
/// energy `(1 − r_s/r)t′` and the Cartesian components of angular momentum.
pub fn schwarzschild(p: SchwarzschildParams) -> Result<SystemSpec> {
    let r_s = p.r_s;
    if !(r_s > 0.0 && r_s.is_finite()) {
        return Err(Error::InvalidParams(format!("schwarzschild: r_s = {r_s}")));
    }
    SystemSpec::builder(
        "schwarzschild",
        8,
        5,
        move |_, x, f| {
            let gam = christoffel_unchecked(r_s, x[1], x[2]);
            let y = &x[4..];
            f[..4].copy_from_slice(y);
            for l in 0..4 {
                let mut acc = 0.0;
                for j in 0..4 {
                    for k in 0..4 {
                        acc += gam[l][j][k] * y[j] * y[k];
                    }
                }
                f[4 + l] = -acc;
            }
        },
        move |_, x, psi| {
            let (r, (s, c), (sp, cp)) = (x[1], x[2].sin_cos(), x[3].sin_cos());
            let (dt, dr, dth, dph) = (x[4], x[5], x[6], x[7]);
            let a = 1.0 - r_s / r;
            let r2 = r * r;
            psi[0] = a * dt * dt - dr * dr / a - r2 * dth * dth - r2 * s * s * dph * dph;
            psi[1] = a * dt;
            psi[2] = r2 * s * s * dph;
            psi[3] = r2 * (cp * dth - s * c * sp * dph);
            psi[4] = r2 * (sp * dth + s * c * cp * dph);
        },
    )
    .domain(move |_, x| check_position(r_s, x))
    .gradient(move |_, x, g| {
        let (r, (s, c), (sp, cp)) = (x[1], x[2].sin_cos(), x[3].sin_cos());
        let (dt, dr, dth, dph) = (x[4], x[5], x[6], x[7]);
        let a = 1.0 - r_s / r;
        let da = r_s / (r * r);
        let r2 = r * r;
        // S
        g[(0, 1)] = da * dt * dt + dr * dr * da / (a * a) - 2.0 * r * dth * dth
            - 2.0 * r * s * s * dph * dph;
        g[(0, 2)] = -2.0 * r2 * s * c * dph * dph;
        g[(0, 4)] = 2.0 * a * dt;
        g[(0, 5)] = -2.0 * dr / a;
        g[(0, 6)] = -2.0 * r2 * dth;
        g[(0, 7)] = -2.0 * r2 * s * s * dph;
        // E
        g[(1, 1)] = da * dt;
        g[(1, 4)] = a;
        // L₁
        g[(2, 1)] = 2.0 * r * s * s * dph;
        g[(2, 2)] = 2.0 * r2 * s * c * dph;
        g[(2, 7)] = r2 * s * s;
        // L₂
        let cos2 = c * c - s * s;
        g[(3, 1)] = 2.0 * r * (cp * dth - s * c * sp * dph);
        g[(3, 2)] = -r2 * cos2 * sp * dph;
        g[(3, 3)] = r2 * (-sp * dth - s * c * cp * dph);
        g[(3, 6)] = r2 * cp;
        g[(3, 7)] = -r2 * s * c * sp;
        // L₃
        g[(4, 1)] = 2.0 * r * (sp * dth + s * c * cp * dph);
        g[(4, 2)] = r2 * cos2 * cp * dph;
        g[(4, 3)] = r2 * (cp * dth - s * c * sp * dph);
        g[(4, 6)] = r2 * sp;
        g[(4, 7)] = r2 * s * c * cp;
    })
    .build()
}
