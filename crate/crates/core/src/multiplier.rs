//! Conservation-law multipliers for polynomial conserved quantities.
//!
//! For `ẋ = f(x)` with conserved `ψ: Rⁿ → Rᵐ`, the continuous multiplier is
//! the Jacobian `Λ = J_ψ` and satisfies `Λ f ≡ 0`. The discrete multiplier
//! `Λ^τ(x_prev, x_next)` is the two-point matrix whose `(i, j)` entry is the
//! telescoping factor of `ψ_i` in variable `j`, so that
//! `Λ^τ (x_next - x_prev) = ψ(x_next) - ψ(x_prev)` holds identically.

use crate::error::{check_len, Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::polynomial::{factor_term, MultiIndex, Polynomial};

/// Relative singularity threshold for the partition minor:
/// `|det Λ̃^τ| < MINOR_SINGULAR_REL · (1 + ‖Λ^τ‖_∞)`.
pub const MINOR_SINGULAR_REL: f64 = 1e-12;

/// An autonomous polynomial ODE `ẋ = f(x)` together with `m` polynomial
/// conserved quantities and the column partition `Λ = (Λ̃ Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedSystem {
    f: Vec<Polynomial>,
    psi: Vec<Polynomial>,
    /// Permutation of `0..n`; the first `m` entries are the columns of `Λ̃`.
    partition: Vec<usize>,
    /// Variable used by the polarized right-hand side discretization.
    polarize_var: Option<usize>,
}

impl ConservedSystem {
    /// Checks shapes only: `n ≥ 2`, `1 ≤ m ≤ n-1`, every polynomial in `n`
    /// variables. Use [`verify_multiplier`] to check that `ψ` is conserved.
    pub fn new(f: Vec<Polynomial>, psi: Vec<Polynomial>) -> Result<Self> {
        let n = f.len();
        let m = psi.len();
        if n < 2 {
            return Err(Error::Input(format!("state dimension must be at least 2, got {n}")));
        }
        if m < 1 || m > n - 1 {
            return Err(Error::Input(format!(
                "need 1 ≤ m ≤ n-1 conserved quantities, got m = {m} for n = {n}"
            )));
        }
        for (k, p) in f.iter().chain(&psi).enumerate() {
            if p.n_vars() != n {
                return Err(Error::Input(format!(
                    "polynomial #{} has {} variables, system has {n}",
                    k + 1,
                    p.n_vars()
                )));
            }
        }
        Ok(ConservedSystem {
            f,
            psi,
            partition: (0..n).collect(),
            polarize_var: None,
        })
    }

    /// Overrides the identity column partition (0-based permutation).
    pub fn with_partition(mut self, partition: Vec<usize>) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if partition.len() != n {
            return Err(Error::Input(format!("partition must list all {n} columns")));
        }
        for &c in &partition {
            if c >= n || seen[c] {
                return Err(Error::Input(format!("partition {partition:?} is not a permutation")));
            }
            seen[c] = true;
        }
        self.partition = partition;
        Ok(self)
    }

    pub fn with_polarize_var(mut self, var: usize) -> Result<Self> {
        if var >= self.n() {
            return Err(Error::Input(format!("polarize variable {var} out of range")));
        }
        self.polarize_var = Some(var);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn m(&self) -> usize {
        self.psi.len()
    }

    pub fn f(&self) -> &[Polynomial] {
        &self.f
    }

    pub fn psi(&self) -> &[Polynomial] {
        &self.psi
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    /// Columns of `Λ̃`.
    pub fn minor_columns(&self) -> &[usize] {
        &self.partition[..self.m()]
    }

    /// Columns of `Σ`; also the components driven directly by `f̂`.
    pub fn free_columns(&self) -> &[usize] {
        &self.partition[self.m()..]
    }

    /// Designated variable for polarization; defaults to the first minor column.
    pub fn polarize_var(&self) -> usize {
        self.polarize_var.unwrap_or(self.partition[0])
    }

    pub fn eval_f(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("state", x.len(), self.n())?;
        Ok(self.f.iter().map(|p| p.eval_unchecked(x)).collect())
    }

    pub fn eval_psi(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("state", x.len(), self.n())?;
        Ok(self.psi.iter().map(|p| p.eval_unchecked(x)).collect())
    }

    /// The discrete conserved quantity of the one-step scheme. It does not
    /// depend on the step size and coincides with `ψ`.
    pub fn psi_tau(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval_psi(x)
    }
}

/// `Λ = J_ψ`, one row of gradient polynomials per conserved quantity.
pub fn continuous_multiplier(system: &ConservedSystem) -> Vec<Vec<Polynomial>> {
    system.psi().iter().map(Polynomial::gradient).collect()
}

/// Outcome of [`verify_multiplier`].
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierReport {
    /// max over samples and rows of `|(Λ f)_i|`.
    pub max_residual: f64,
    /// Same, divided by `1 + Σ_j |Λ_ij f_j|`.
    pub max_scaled_residual: f64,
    /// max `|J_ψ - Λ_candidate| / (1 + |J_ψ|)` when a candidate was given.
    pub max_lambda_deviation: Option<f64>,
    /// Sample index of the largest scaled residual.
    pub worst_sample: Option<usize>,
    pub samples: usize,
    pub tol: f64,
    pub passed: bool,
}

/// Checks `Λ(y) f(y) = 0` at the sample points, with `Λ = J_ψ` or the
/// supplied candidate multiplier. When a candidate is given its deviation
/// from `J_ψ` is checked too. Passes iff both scaled measures are `≤ tol`.
pub fn verify_multiplier(
    system: &ConservedSystem,
    samples: &[Vec<f64>],
    tol: f64,
    candidate: Option<&[Vec<Polynomial>]>,
) -> Result<MultiplierReport> {
    let jac = continuous_multiplier(system);
    if let Some(c) = candidate {
        if c.len() != system.m() || c.iter().any(|row| row.len() != system.n()) {
            return Err(Error::Input(format!(
                "candidate multiplier must be {}×{}",
                system.m(),
                system.n()
            )));
        }
    }
    let lambda: &[Vec<Polynomial>] = candidate.unwrap_or(&jac);
    let mut max_residual = 0.0_f64;
    let mut max_scaled = 0.0_f64;
    let mut worst = None;
    let mut max_dev: Option<f64> = candidate.map(|_| 0.0);
    for (s, y) in samples.iter().enumerate() {
        let fy = system.eval_f(y)?;
        for (i, row) in lambda.iter().enumerate() {
            let mut sum = 0.0;
            let mut mag = 0.0;
            for (j, l) in row.iter().enumerate() {
                let t = l.eval_unchecked(y) * fy[j];
                sum += t;
                mag += t.abs();
            }
            let scaled = sum.abs() / (1.0 + mag);
            max_residual = max_residual.max(sum.abs());
            if scaled > max_scaled || worst.is_none() {
                max_scaled = max_scaled.max(scaled);
                worst = Some(s);
            }
            if let Some(dev) = max_dev.as_mut() {
                for (j, l) in row.iter().enumerate() {
                    let exact = jac[i][j].eval_unchecked(y);
                    let d = (exact - l.eval_unchecked(y)).abs() / (1.0 + exact.abs());
                    *dev = dev.max(d);
                }
            }
        }
    }
    let passed = max_scaled <= tol && max_dev.is_none_or(|d| d <= tol);
    Ok(MultiplierReport {
        max_residual,
        max_scaled_residual: max_scaled,
        max_lambda_deviation: max_dev,
        worst_sample: worst,
        samples: samples.len(),
        tol,
        passed,
    })
}

/// `Λ̃^τ`, `Σ^τ` and `det Λ̃^τ` at one pair of states.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorSplit {
    pub tilde: Matrix,
    pub sigma: Matrix,
    pub det: f64,
}

/// Evaluator for the discrete multiplier matrix `Λ^τ(x_prev, x_next)`.
///
/// Term tables are precomputed per `(i, j)`: only the terms of `ψ_i` with a
/// positive exponent in variable `j` contribute to entry `(i, j)`.
#[derive(Debug, Clone)]
pub struct DiscreteMultiplier {
    n: usize,
    m: usize,
    minor_cols: Vec<usize>,
    free_cols: Vec<usize>,
    tables: Vec<Vec<Vec<(MultiIndex, f64)>>>,
}

impl DiscreteMultiplier {
    pub fn new(system: &ConservedSystem) -> Self {
        let n = system.n();
        let tables = system
            .psi()
            .iter()
            .map(|p| {
                (0..n)
                    .map(|j| {
                        p.terms()
                            .iter()
                            .filter(|(a, _)| a.exponents()[j] > 0)
                            .cloned()
                            .collect()
                    })
                    .collect()
            })
            .collect();
        DiscreteMultiplier {
            n,
            m: system.m(),
            minor_cols: system.minor_columns().to_vec(),
            free_cols: system.free_columns().to_vec(),
            tables,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The m×n matrix `Λ^τ(x_prev, x_next)`.
    pub fn eval(&self, x_prev: &[f64], x_next: &[f64]) -> Result<Matrix> {
        check_len("x_prev", x_prev.len(), self.n)?;
        check_len("x_next", x_next.len(), self.n)?;
        let mut out = Matrix::zeros(self.m, self.n);
        for (i, row) in self.tables.iter().enumerate() {
            for (j, terms) in row.iter().enumerate() {
                let mut acc = 0.0;
                for (alpha, c) in terms {
                    acc += factor_term(alpha, *c, j, x_prev, x_next);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Splits `Λ^τ` by the system partition. Fails with `MinorSingular` when
    /// `|det Λ̃^τ|` falls below the scale-aware threshold.
    pub fn partition_minor(&self, x_prev: &[f64], x_next: &[f64]) -> Result<MinorSplit> {
        let lam = self.eval(x_prev, x_next)?;
        self.split(&lam, x_prev, x_next)
    }

    fn split(&self, lam: &Matrix, x_prev: &[f64], x_next: &[f64]) -> Result<MinorSplit> {
        let tilde = lam.select_columns(&self.minor_cols);
        let sigma = lam.select_columns(&self.free_cols);
        let det = crate::linalg::det(&tilde);
        if !(det.abs() >= MINOR_SINGULAR_REL * (1.0 + lam.norm_inf())) {
            return Err(Error::MinorSingular {
                det,
                x_prev: x_prev.to_vec(),
                x_next: x_next.to_vec(),
            });
        }
        Ok(MinorSplit { tilde, sigma, det })
    }

    /// The discrete vector field `f^τ`: components in the free columns are
    /// `f̂^τ` and the minor columns are `-(Λ̃^τ)⁻¹ Σ^τ f̂^τ`, so that
    /// `Λ^τ f^τ = 0`. `fhat` is ordered like the free columns.
    ///
    /// When `Σ^τ f̂^τ` is exactly zero the minor components are zero and no
    /// singularity check is made; this keeps equilibria, where `Λ̃^τ`
    /// degenerates, fixed points of the step.
    pub fn conservative_field(&self, x_prev: &[f64], x_next: &[f64], fhat: &[f64]) -> Result<Vec<f64>> {
        check_len("fhat", fhat.len(), self.n - self.m)?;
        let lam = self.eval(x_prev, x_next)?;
        let rhs = lam.select_columns(&self.free_cols).mul_vec(fhat);
        let z = if rhs.iter().all(|v| *v == 0.0) {
            vec![0.0; self.m]
        } else {
            let split = self.split(&lam, x_prev, x_next)?;
            let lu = Lu::factor(&split.tilde, 0.0).map_err(|_| Error::MinorSingular {
                det: split.det,
                x_prev: x_prev.to_vec(),
                x_next: x_next.to_vec(),
            })?;
            lu.solve(&rhs)
        };
        let mut g = vec![0.0; self.n];
        for (k, &c) in self.minor_cols.iter().enumerate() {
            g[c] = -z[k];
        }
        for (q, &c) in self.free_cols.iter().enumerate() {
            g[c] = fhat[q];
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    pub(crate) fn elliptic(a: f64) -> ConservedSystem {
        let p = HashMap::from([("a".to_string(), a)]);
        let f = vec![
            Polynomial::parse_with("2*x2", 2, &p).unwrap(),
            Polynomial::parse_with("3*x1^2 + a", 2, &p).unwrap(),
        ];
        let psi = vec![Polynomial::parse_with("x2^2 - x1^3 - a*x1", 2, &p).unwrap()];
        ConservedSystem::new(f, psi).unwrap()
    }

    #[test]
    fn shape_checks() {
        let x = Polynomial::var(2, 0);
        assert!(ConservedSystem::new(vec![x.clone(), x.clone()], vec![]).is_err());
        assert!(ConservedSystem::new(vec![x.clone(), x.clone()], vec![x.clone(), x.clone()]).is_err());
        assert!(ConservedSystem::new(vec![x.clone()], vec![x.clone()]).is_err());
        let s = elliptic(-1.0);
        assert!(s.clone().with_partition(vec![0, 0]).is_err());
        assert!(s.clone().with_partition(vec![1]).is_err());
        let s = s.with_partition(vec![1, 0]).unwrap();
        assert_eq!(s.minor_columns(), &[1]);
        assert_eq!(s.free_columns(), &[0]);
        assert_eq!(s.polarize_var(), 1);
    }

    #[test]
    fn continuous_multiplier_of_elliptic() {
        let lam = continuous_multiplier(&elliptic(-1.0));
        assert_eq!(lam[0][0].to_string(), "-3 * x1^2 + 1");
        assert_eq!(lam[0][1].to_string(), "2 * x2");
    }

    #[test]
    fn discrete_multiplier_closed_form() {
        let dm = DiscreteMultiplier::new(&elliptic(-1.0));
        let lam = dm.eval(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(lam.row(0), &[-12.0, 6.0]);
        let (x, y, xn, yn) = (0.3, -0.2, 0.5, 0.9);
        let lam = dm.eval(&[x, y], &[xn, yn]).unwrap();
        assert!((lam.get(0, 0) - (-(x * x + x * xn + xn * xn) + 1.0)).abs() < 1e-15);
        assert!((lam.get(0, 1) - (y + yn)).abs() < 1e-15);
    }

    #[test]
    fn singular_minor_at_saddle() {
        let dm = DiscreteMultiplier::new(&elliptic(-1.0));
        let s = 1.0 / 3f64.sqrt();
        match dm.partition_minor(&[s, 0.4], &[s, 0.4]) {
            Err(Error::MinorSingular { det, .. }) => assert!(det.abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coordinate_conserved_quantity() {
        let x1 = Polynomial::var(2, 0);
        let sys = ConservedSystem::new(vec![Polynomial::zero(2), x1.clone()], vec![x1]).unwrap();
        let dm = DiscreteMultiplier::new(&sys);
        let split = dm.partition_minor(&[0.3, 1.0], &[-2.0, 5.0]).unwrap();
        assert_eq!(split.tilde.row(0), &[1.0]);
        assert_eq!(split.sigma.row(0), &[0.0]);
        assert_eq!(split.det, 1.0);
    }

    #[test]
    fn conservative_field_annihilated() {
        let sys = elliptic(-1.0);
        let dm = DiscreteMultiplier::new(&sys);
        let (p, n) = ([0.2, 0.1], [0.25, 0.3]);
        let g = dm.conservative_field(&p, &n, &[0.7]).unwrap();
        let lam = dm.eval(&p, &n).unwrap();
        assert!(lam.mul_vec(&g)[0].abs() < 1e-15);
        assert_eq!(g[1], 0.7);
    }

    #[test]
    fn verify_flags_bad_candidate() {
        let sys = elliptic(-1.0);
        let samples = vec![vec![0.1, 0.2], vec![-0.4, 0.9]];
        let good = continuous_multiplier(&sys);
        let r = verify_multiplier(&sys, &samples, 1e-12, Some(&good)).unwrap();
        assert!(r.passed);
        assert_eq!(r.max_lambda_deviation, Some(0.0));
        let mut bad = good.clone();
        bad[0][1] = bad[0][1].scale(1.5);
        let r = verify_multiplier(&sys, &samples, 1e-12, Some(&bad)).unwrap();
        assert!(!r.passed);
        assert!(verify_multiplier(&sys, &samples, 1e-12, Some(&bad[..0])).is_err());
    }
}
