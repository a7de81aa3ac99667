//! Damped Newton iteration for the implicit per-step equations.

use crate::error::{check_len, Error, Result};
use crate::linalg::{norm_inf, Lu, Matrix};

/// Smallest pivot magnitude accepted by the Newton linear solve.
pub const MIN_PIVOT: f64 = 1e-300;

/// Maximum number of step halvings in the backtracking line search.
pub const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Convergence threshold on the residual ∞-norm.
    pub abs_tol: f64,
    pub max_iters: usize,
    /// Relative increment for the forward-difference Jacobian.
    pub fd_step: f64,
    /// Step shrink factor of the line search.
    pub damping: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            abs_tol: 5e-16,
            max_iters: 50,
            fd_step: 1e-7,
            damping: 0.5,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::Input("newton abs_tol must be positive".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::Input("newton max_iters must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::Input("newton damping must lie in (0, 1)".into()));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::Input("newton fd_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub root: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
}

/// Forward-difference Jacobian with increments `fd_step·(1+|x_i|)`.
pub fn fd_jacobian<R>(residual: &R, x: &[f64], r0: &[f64], fd_step: f64) -> Result<Matrix>
where
    R: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut jac = Matrix::zeros(r0.len(), n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = fd_step * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        // the increment actually represented in floating point
        let h = xp[j] - x[j];
        let rp = residual(&xp)?;
        for i in 0..r0.len() {
            jac.set(i, j, (rp[i] - r0[i]) / h);
        }
        xp[j] = x[j];
    }
    Ok(jac)
}

/// Solves `residual(x) = 0` from `x0`.
///
/// Each iteration solves `J dx = -r` (analytic Jacobian if given, forward
/// differences otherwise) and backtracks `x + λ dx`, multiplying λ by
/// `cfg.damping` while the residual norm fails to decrease. Stops as soon as
/// `‖r‖_∞ ≤ cfg.abs_tol`. Errors from `residual` are propagated unchanged.
pub fn newton_solve<R, J>(residual: R, jacobian: Option<J>, x0: &[f64], cfg: &NewtonConfig) -> Result<SolveResult>
where
    R: Fn(&[f64]) -> Result<Vec<f64>>,
    J: Fn(&[f64]) -> Result<Matrix>,
{
    cfg.validate()?;
    let mut x = x0.to_vec();
    let mut r = residual(&x)?;
    check_len("residual", r.len(), x.len())?;
    let mut norm = norm_inf(&r);
    let mut iterations = 0;
    while !(norm <= cfg.abs_tol) {
        if iterations == cfg.max_iters || !norm.is_finite() {
            return Err(Error::NotConverged {
                best: SolveResult {
                    root: x,
                    iterations,
                    residual_norm: norm,
                    converged: false,
                },
            });
        }
        iterations += 1;
        let jac = match &jacobian {
            Some(jf) => jf(&x)?,
            None => fd_jacobian(&residual, &x, &r, cfg.fd_step)?,
        };
        let lu = Lu::factor(&jac, MIN_PIVOT)?;
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = lu.solve(&neg_r);

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(xi, d)| xi + lambda * d).collect();
            let rt = residual(&trial)?;
            let nt = norm_inf(&rt);
            if nt < norm {
                accepted = Some((trial, rt, nt));
                break;
            }
            lambda *= cfg.damping;
        }
        match accepted {
            Some((xt, rt, nt)) => {
                x = xt;
                r = rt;
                norm = nt;
            }
            None => {
                // no descent along the Newton direction: at the round-off floor
                return Err(Error::NotConverged {
                    best: SolveResult {
                        root: x,
                        iterations,
                        residual_norm: norm,
                        converged: false,
                    },
                });
            }
        }
    }
    Ok(SolveResult {
        root: x,
        iterations,
        residual_norm: norm,
        converged: true,
    })
}

/// Type hint for callers without an analytic Jacobian.
pub type NoJacobian = fn(&[f64]) -> Result<Matrix>;
