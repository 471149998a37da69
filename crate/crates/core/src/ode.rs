//! Dynamical systems with conserved quantities.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// `(t, x, out)`: writes `f(t, x)` into `out` (length `n`).
pub type SourceFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
/// `(t, x, out)`: writes `ψ(t, x)` into `out` (length `m`).
pub type ConservedFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
/// `(t, x, out)`: writes the `m × n` Jacobian `∂ₓψ(t, x)` into `out`.
pub type GradientFn = dyn Fn(f64, &[f64], &mut DenseMatrix) + Send + Sync;
/// `(t, x_new, x_old)`: a hand-derived discrete multiplier.
pub type MultiplierFn = dyn Fn(f64, &[f64], &[f64]) -> DenseMatrix + Send + Sync;
/// `(t, x)`: `Err(reason)` when `x` is outside the admissible domain.
pub type DomainFn = dyn Fn(f64, &[f64]) -> std::result::Result<(), String> + Send + Sync;
/// `(t, z, j, value, out)`: writes `ψ(t, z with z_j = value) − ψ(t, z)`,
/// or `Err(reason)` if the modified state leaves the domain.
///
/// Optional fast path for systems where changing one coordinate only touches
/// a few terms of `ψ` (pairwise sums); telescoping then costs `O(n)` per
/// column instead of a full evaluation.
pub type IncrementFn =
    dyn Fn(f64, &[f64], usize, f64, &mut [f64]) -> std::result::Result<(), String> + Send + Sync;

/// An ODE `ẋ = f(t, x)` in `ℝⁿ` together with `m < n` conserved quantities.
///
/// Cheap to clone; every callback is shared behind an `Arc`.
#[derive(Clone)]
pub struct SystemSpec {
    name: String,
    n: usize,
    m: usize,
    time_dependent: bool,
    source: Arc<SourceFn>,
    conserved: Arc<ConservedFn>,
    grad_conserved: Option<Arc<GradientFn>>,
    analytic_multiplier: Option<Arc<MultiplierFn>>,
    domain: Option<Arc<DomainFn>>,
    increment: Option<Arc<IncrementFn>>,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("time_dependent", &self.time_dependent)
            .field("grad_conserved", &self.grad_conserved.is_some())
            .field("analytic_multiplier", &self.analytic_multiplier.is_some())
            .finish()
    }
}

impl SystemSpec {
    pub fn builder(
        name: impl Into<String>,
        n: usize,
        m: usize,
        source: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        conserved: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> SystemBuilder {
        SystemBuilder {
            spec: SystemSpec {
                name: name.into(),
                n,
                m,
                time_dependent: false,
                source: Arc::new(source),
                conserved: Arc::new(conserved),
                grad_conserved: None,
                analytic_multiplier: None,
                domain: None,
                increment: None,
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// State dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of conserved quantities `m`.
    pub fn num_conserved(&self) -> usize {
        self.m
    }

    pub fn is_time_dependent(&self) -> bool {
        self.time_dependent
    }

    pub fn has_gradient(&self) -> bool {
        self.grad_conserved.is_some()
    }

    pub fn has_increment(&self) -> bool {
        self.increment.is_some()
    }

    pub fn check_domain(&self, t: f64, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{}: state of length {} (expected {})",
                self.name,
                x.len(),
                self.n
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainViolation(format!("{}: non-finite state", self.name)));
        }
        match &self.domain {
            Some(d) => d(t, x).map_err(|e| Error::DomainViolation(format!("{}: {e}", self.name))),
            None => Ok(()),
        }
    }

    /// `f(t, x)` into `out`, after a domain check.
    pub fn eval_source(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_domain(t, x)?;
        (self.source)(t, x, out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainViolation(format!("{}: non-finite source term", self.name)));
        }
        Ok(())
    }

    pub fn source(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.eval_source(t, x, &mut out)?;
        Ok(out)
    }

    /// `ψ(t, x)` into `out`, after a domain check.
    pub fn eval_conserved(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_domain(t, x)?;
        (self.conserved)(t, x, out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainViolation(format!(
                "{}: non-finite conserved quantity",
                self.name
            )));
        }
        Ok(())
    }

    pub fn conserved(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.m];
        self.eval_conserved(t, x, &mut out)?;
        Ok(out)
    }

    /// `ψ(t, z with z_j = value) − ψ(t, z)` via the increment hook.
    /// `None` when the system has no hook.
    pub(crate) fn increment(
        &self,
        t: f64,
        z: &[f64],
        j: usize,
        value: f64,
        out: &mut [f64],
    ) -> Option<Result<()>> {
        let inc = self.increment.as_ref()?;
        Some(inc(t, z, j, value, out).map_err(|e| Error::DomainViolation(format!("{}: {e}", self.name))))
    }

    /// The analytic Jacobian `∂ₓψ(t, x)` when one was supplied.
    pub fn analytic_gradient(&self, t: f64, x: &[f64]) -> Option<Result<DenseMatrix>> {
        let g = self.grad_conserved.as_ref()?;
        Some(self.check_domain(t, x).map(|_| {
            let mut out = DenseMatrix::zeros(self.m, self.n);
            g(t, x, &mut out);
            out
        }))
    }

    /// Column `j` of `∂ₓψ(t, x)`: analytic when available, otherwise a
    /// central difference with step `1e-6·max(1, |x_j|)`.
    pub fn gradient_column(&self, t: f64, x: &[f64], j: usize) -> Result<Vec<f64>> {
        if let Some(g) = self.analytic_gradient(t, x) {
            return Ok(g?.column(j));
        }
        let h = 1e-6 * x[j].abs().max(1.0);
        let mut xp = x.to_vec();
        xp[j] = x[j] + h;
        let plus = self.conserved(t, &xp)?;
        xp[j] = x[j] - h;
        let minus = self.conserved(t, &xp)?;
        let width = (x[j] + h) - (x[j] - h);
        Ok(plus.iter().zip(&minus).map(|(p, q)| (p - q) / width).collect())
    }

    /// Full Jacobian `∂ₓψ(t, x)`, analytic or by central differences.
    pub fn gradient(&self, t: f64, x: &[f64]) -> Result<DenseMatrix> {
        if let Some(g) = self.analytic_gradient(t, x) {
            return g;
        }
        let mut out = DenseMatrix::zeros(self.m, self.n);
        for j in 0..self.n {
            out.set_column(j, &self.gradient_column(t, x, j)?);
        }
        Ok(out)
    }

    pub fn analytic_multiplier(&self, t: f64, x_new: &[f64], x_old: &[f64]) -> Option<DenseMatrix> {
        self.analytic_multiplier.as_ref().map(|f| f(t, x_new, x_old))
    }
}

pub struct SystemBuilder {
    spec: SystemSpec,
}

impl SystemBuilder {
    pub fn time_dependent(mut self, flag: bool) -> Self {
        self.spec.time_dependent = flag;
        self
    }

    pub fn gradient(
        mut self,
        g: impl Fn(f64, &[f64], &mut DenseMatrix) + Send + Sync + 'static,
    ) -> Self {
        self.spec.grad_conserved = Some(Arc::new(g));
        self
    }

    pub fn analytic_multiplier(
        mut self,
        f: impl Fn(f64, &[f64], &[f64]) -> DenseMatrix + Send + Sync + 'static,
    ) -> Self {
        self.spec.analytic_multiplier = Some(Arc::new(f));
        self
    }

    pub fn domain(
        mut self,
        d: impl Fn(f64, &[f64]) -> std::result::Result<(), String> + Send + Sync + 'static,
    ) -> Self {
        self.spec.domain = Some(Arc::new(d));
        self
    }

    pub fn increment(
        mut self,
        f: impl Fn(f64, &[f64], usize, f64, &mut [f64]) -> std::result::Result<(), String>
            + Send
            + Sync
            + 'static,
    ) -> Self {
        self.spec.increment = Some(Arc::new(f));
        self
    }

    /// Validates `1 ≤ m < n`.
    pub fn build(self) -> Result<SystemSpec> {
        let s = self.spec;
        if s.m == 0 || s.m >= s.n {
            return Err(Error::InvalidParams(format!(
                "{}: need 1 <= m < n, got m = {}, n = {}",
                s.name, s.m, s.n
            )));
        }
        Ok(s)
    }
}
