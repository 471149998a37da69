//! Point vortices on the unit sphere.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::ode::SystemSpec;

/// Vortices closer than this (in `1 − x_i·x_j`) count as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct VortexParams {
    pub strengths: Vec<f64>,
    /// Unit vectors, one per vortex.
    pub positions: Vec<[f64; 3]>,
    /// Seed the configuration was drawn from (informational once drawn).
    pub rng_seed: u64,
    /// Adds `‖x_i‖²` for every vortex to the conserved set.
    pub include_norm_constraints: bool,
}

impl VortexParams {
    /// Draws `count` vortices: positions are normalized 3-d standard
    /// Gaussians (uniform on the sphere), strengths are uniform on `[−1, 1]`.
    /// Positions are drawn first, then strengths, from one ChaCha20 stream.
    pub fn random(count: usize, seed: u64, include_norm_constraints: bool) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut positions = Vec::with_capacity(count);
        while positions.len() < count {
            let v: [f64; 3] = [
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            ];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm < 1e-8 {
                continue;
            }
            positions.push([v[0] / norm, v[1] / norm, v[2] / norm]);
        }
        let dist = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
        let strengths = (0..count).map(|_| rng.sample(dist)).collect();
        Self { strengths, positions, rng_seed: seed, include_norm_constraints }
    }

    pub fn count(&self) -> usize {
        self.positions.len()
    }

    /// Flattened state `(x_1, …, x_N)`.
    pub fn state(&self) -> Vec<f64> {
        self.positions.iter().flatten().copied().collect()
    }
}

/// `log|1 + q|`, accurate for small `q`.
fn ln_1p_abs(q: f64) -> f64 {
    if q > -1.0 {
        q.ln_1p()
    } else {
        (1.0 + q).abs().ln()
    }
}

#[inline]
fn dot3(x: &[f64], i: usize, j: usize) -> f64 {
    x[3 * i] * x[3 * j] + x[3 * i + 1] * x[3 * j + 1] + x[3 * i + 2] * x[3 * j + 2]
}

/// `ẋ_i = (1/4π) Σ_{j≠i} Γ_j (x_j × x_i)/(1 − x_i·x_j)` with momentum
/// `P = Σ Γ_i x_i` and Hamiltonian `H = −(1/4π) Σ_{i<j} Γ_iΓ_j log|1 − x_i·x_j|`.
///
/// The absolute value changes nothing on the sphere. It keeps `H` finite at
/// the off-sphere intermediate states of a telescoped multiplier, where a
/// partially updated vortex close to another can have `x_i·x_j > 1`.
///
/// Conserved quantities are ordered `(P₁, P₂, P₃, H[, ‖x_1‖², …])`.
pub fn point_vortex(p: &VortexParams) -> Result<SystemSpec> {
    let count = p.count();
    if count < 2 || p.strengths.len() != count {
        return Err(Error::InvalidParams(format!(
            "point_vortex: {} positions and {} strengths",
            count,
            p.strengths.len()
        )));
    }
    for (i, x) in p.positions.iter().enumerate() {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if (r - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidParams(format!("vortex {i} is off the sphere (|x| = {r})")));
        }
    }
    let gamma = p.strengths.clone();
    let n = 3 * count;
    let m = if p.include_norm_constraints { 4 + count } else { 4 };
    let norms = p.include_norm_constraints;
    let coeff = 1.0 / (4.0 * PI);

    let domain = move |_t: f64, x: &[f64]| {
        for i in 0..count {
            for j in i + 1..count {
                if (1.0 - dot3(x, i, j)).abs() < COINCIDENCE_TOL {
                    return Err(format!("vortices {i} and {j} coincide"));
                }
            }
        }
        Ok(())
    };

    let g_src = gamma.clone();
    let g_psi = gamma.clone();
    let g_grad = gamma.clone();
    let g_inc = gamma;
    let sys = SystemSpec::builder(
        "vortex",
        n,
        m,
        move |_, x, f| {
            f.fill(0.0);
            for i in 0..count {
                let xi = &x[3 * i..3 * i + 3];
                for j in 0..count {
                    if j == i {
                        continue;
                    }
                    let xj = &x[3 * j..3 * j + 3];
                    let w = coeff * g_src[j] / (1.0 - dot3(x, i, j));
                    f[3 * i] += w * (xj[1] * xi[2] - xj[2] * xi[1]);
                    f[3 * i + 1] += w * (xj[2] * xi[0] - xj[0] * xi[2]);
                    f[3 * i + 2] += w * (xj[0] * xi[1] - xj[1] * xi[0]);
                }
            }
        },
        move |_, x, psi| {
            psi[..4].fill(0.0);
            let mut h = 0.0;
            for i in 0..count {
                for c in 0..3 {
                    psi[c] += g_psi[i] * x[3 * i + c];
                }
                for j in i + 1..count {
                    h += g_psi[i] * g_psi[j] * (1.0 - dot3(x, i, j)).abs().ln();
                }
            }
            psi[3] = -coeff * h;
            if norms {
                for i in 0..count {
                    psi[4 + i] = dot3(x, i, i);
                }
            }
        },
    )
    .domain(domain)
    .gradient(move |_, x, g| {
        for i in 0..count {
            for c in 0..3 {
                g[(c, 3 * i + c)] = g_grad[i];
            }
            let mut acc = [0.0; 3];
            for j in 0..count {
                if j == i {
                    continue;
                }
                let w = coeff * g_grad[i] * g_grad[j] / (1.0 - dot3(x, i, j));
                for c in 0..3 {
                    acc[c] += w * x[3 * j + c];
                }
            }
            for c in 0..3 {
                g[(3, 3 * i + c)] = acc[c];
                if norms {
                    g[(4 + i, 3 * i + c)] = 2.0 * x[3 * i + c];
                }
            }
        }
    })
    .increment(move |_, z, j, value, out| {
        let i = j / 3;
        let c = j % 3;
        let dz = value - z[j];
        out.fill(0.0);
        out[c] = g_inc[i] * dz;
        let mut dh = 0.0;
        for k in 0..count {
            if k == i {
                continue;
            }
            let gap = 1.0 - dot3(z, i, k);
            let shift = dz * z[3 * k + c];
            if (gap - shift).abs() < COINCIDENCE_TOL {
                return Err(format!("vortices {i} and {k} coincide"));
            }
            // log|1 − a'| − log|1 − a| with a' = a + shift
            dh += g_inc[k] * ln_1p_abs(-shift / gap);
        }
        out[3] = -coeff * g_inc[i] * dh;
        if norms {
            out[4 + i] = value * value - z[j] * z[j];
        }
        Ok(())
    })
    .build()?;
    Ok(sys)
}
