//! Discrete multipliers built from telescoping partial divided differences.
//!
//! For states `x_old → x_new` the intermediate states `z_j` switch the first
//! `j` coordinates to `x_new`. Column `j` of `Λ^τ` is the divided difference
//! of `ψ` between `z_j` and `z_{j+1}`, so `Λ^τ·(x_new − x_old)` telescopes to
//! `ψ(x_new) − ψ(x_old)` exactly (the discrete chain rule). Time is frozen at
//! `t_k` inside the spatial differences; explicit time dependence goes
//! through [`discrete_time_partial`].

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};
use crate::ode::SystemSpec;

/// Default relative degeneracy tolerance: column `j` is degenerate when
/// `|x_new_j − x_old_j| < 1e-10·max(1, |x_new_j|, |x_old_j|)`.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-10;

/// The `m × n` discrete multiplier `Λ^τ`.
#[derive(Debug, Clone)]
pub struct MultiplierMatrix {
    pub matrix: DenseMatrix,
    /// Columns where the coordinate barely moved and the midpoint partial
    /// derivative replaced the divided difference.
    pub degenerate_columns: Vec<usize>,
}

impl MultiplierMatrix {
    /// Wraps a hand-derived multiplier (no degeneracy bookkeeping).
    pub fn from_matrix(matrix: DenseMatrix) -> Self {
        Self { matrix, degenerate_columns: Vec::new() }
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }
}

/// Builds `Λ^τ(t, x_new, x_old)` column by column along the identity
/// permutation of coordinates.
///
/// `deg_tol` is relative to `max(1, |x_new_j|, |x_old_j|)`. Degenerate
/// columns fall back to `∂ψ/∂x_j` at the midpoint of `z_j, z_{j+1}` (analytic
/// gradient if the system has one, central differences otherwise).
pub fn telescoping_multiplier(
    sys: &SystemSpec,
    t: f64,
    x_new: &[f64],
    x_old: &[f64],
    deg_tol: f64,
) -> Result<MultiplierMatrix> {
    let n = sys.dim();
    let m = sys.num_conserved();
    if x_new.len() != n || x_old.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "telescoping_multiplier: states of length {}/{} for n = {n}",
            x_new.len(),
            x_old.len()
        )));
    }
    let mut lam = DenseMatrix::zeros(m, n);
    let mut degenerate = Vec::new();

    let mut z = x_old.to_vec();
    let use_increment = sys.has_increment();
    let mut psi_prev = vec![0.0; m];
    let mut psi_next = vec![0.0; m];
    let mut inc = vec![0.0; m];
    if use_increment {
        // The hook validates each intermediate state locally.
        sys.check_domain(t, x_old)?;
        sys.check_domain(t, x_new)?;
    } else {
        sys.eval_conserved(t, &z, &mut psi_prev)?;
    }

    for j in 0..n {
        let old = x_old[j];
        let new = x_new[j];
        let dx = new - old;
        let tol = deg_tol * 1f64.max(old.abs()).max(new.abs());

        if use_increment {
            if let Some(r) = sys.increment(t, &z, j, new, &mut inc) {
                r?;
            }
            z[j] = new;
        } else {
            z[j] = new;
            sys.eval_conserved(t, &z, &mut psi_next)?;
            for i in 0..m {
                inc[i] = psi_next[i] - psi_prev[i];
            }
            std::mem::swap(&mut psi_prev, &mut psi_next);
        }

        if dx.abs() < tol {
            z[j] = 0.5 * (old + new);
            let col = sys.gradient_column(t, &z, j)?;
            z[j] = new;
            lam.set_column(j, &col);
            degenerate.push(j);
        } else {
            for i in 0..m {
                lam[(i, j)] = inc[i] / dx;
            }
        }
    }
    if !lam.is_finite() {
        return Err(Error::DomainViolation(format!("{}: non-finite multiplier", sys.name())));
    }
    Ok(MultiplierMatrix { matrix: lam, degenerate_columns: degenerate })
}

/// Frozen-time chain-rule defect `Λ^τ·(x_new − x_old) − [ψ(t, x_new) − ψ(t, x_old)]`.
pub fn check_chain_rule(
    lam: &MultiplierMatrix,
    sys: &SystemSpec,
    t: f64,
    x_new: &[f64],
    x_old: &[f64],
) -> Result<Vec<f64>> {
    let dx: Vec<f64> = x_new.iter().zip(x_old).map(|(a, b)| a - b).collect();
    let lhs = lam.matrix.matvec(&dx);
    let psi_new = sys.conserved(t, x_new)?;
    let psi_old = sys.conserved(t, x_old)?;
    Ok((0..lhs.len()).map(|i| lhs[i] - (psi_new[i] - psi_old[i])).collect())
}

/// `∂_t^τψ = [ψ(t_next, x_new) − ψ(t_k, x_new)] / (t_next − t_k)`; zero
/// without evaluating `ψ` for time-independent systems.
pub fn discrete_time_partial(
    sys: &SystemSpec,
    t_k: f64,
    t_next: f64,
    x_new: &[f64],
) -> Result<Vec<f64>> {
    let m = sys.num_conserved();
    if !sys.is_time_dependent() {
        return Ok(vec![0.0; m]);
    }
    let tau = t_next - t_k;
    if !(tau > 0.0) {
        return Err(Error::InvalidParams(format!("discrete_time_partial: t_next - t_k = {tau}")));
    }
    let later = sys.conserved(t_next, x_new)?;
    let now = sys.conserved(t_k, x_new)?;
    Ok(later.iter().zip(&now).map(|(a, b)| (a - b) / tau).collect())
}

/// `r = Λ^τ·f^τ + ∂_t^τψ`.
pub fn residual(lam: &MultiplierMatrix, f_tau: &[f64], dt_psi: &[f64]) -> Vec<f64> {
    (0..lam.rows()).map(|i| dot(lam.matrix.row(i), f_tau) + dt_psi[i]).collect()
}
