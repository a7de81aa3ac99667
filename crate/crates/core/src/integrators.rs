//! One-step integrators behind a uniform interface: the conservative
//! multiplier scheme and four baselines (explicit Euler, backward Euler,
//! Störmer–Verlet, implicit midpoint).
//!
//! The conservative step solves
//!
//! ```text
//! (x' - x)/τ = f^τ(x, x'),   f^τ = P ( -(Λ̃^τ)⁻¹ Σ^τ f̂^τ ; f̂^τ )
//! ```
//!
//! where `Λ^τ = (Λ̃^τ Σ^τ)` is the discrete multiplier split by the system
//! partition `P` and `f̂^τ` discretizes the free components of `f`. Since
//! `Λ^τ f^τ = 0` and `Λ^τ (x' - x) = ψ(x') - ψ(x)`, every solution conserves
//! `ψ` exactly up to the Newton tolerance.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::error::{check_len, Error, Result};
use crate::linalg::norm_inf;
use crate::multiplier::{ConservedSystem, DiscreteMultiplier};
use crate::solver::{newton_solve, NewtonConfig, NoJacobian, SolveResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepperKind {
    ConservativeMultiplier,
    ExplicitEuler,
    BackwardEuler,
    StormerVerlet,
    ImplicitMidpoint,
}

impl StepperKind {
    pub const ALL: [StepperKind; 5] = [
        StepperKind::ExplicitEuler,
        StepperKind::BackwardEuler,
        StepperKind::StormerVerlet,
        StepperKind::ImplicitMidpoint,
        StepperKind::ConservativeMultiplier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StepperKind::ConservativeMultiplier => "conservative_multiplier",
            StepperKind::ExplicitEuler => "explicit_euler",
            StepperKind::BackwardEuler => "backward_euler",
            StepperKind::StormerVerlet => "stormer_verlet",
            StepperKind::ImplicitMidpoint => "implicit_midpoint",
        }
    }

    pub fn is_implicit(self) -> bool {
        matches!(
            self,
            StepperKind::ConservativeMultiplier | StepperKind::BackwardEuler | StepperKind::ImplicitMidpoint
        )
    }
}

impl fmt::Display for StepperKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StepperKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StepperKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown stepper `{s}`")))
    }
}

/// Discretization `f̂^τ(x, x')` of the free components of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FhatForm {
    /// Divided difference in the system's designated variable, midpoint in
    /// the others. See [`crate::Polynomial::polarized_eval`].
    #[default]
    Polarized,
    /// `(f̂(x) + f̂(x'))/2`.
    Average,
    /// `f̂((x + x')/2)`.
    Midpoint,
}

impl FhatForm {
    pub fn name(self) -> &'static str {
        match self {
            FhatForm::Polarized => "polarized",
            FhatForm::Average => "average",
            FhatForm::Midpoint => "midpoint",
        }
    }
}

impl fmt::Display for FhatForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FhatForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [FhatForm::Polarized, FhatForm::Average, FhatForm::Midpoint]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown fhat form `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperSpec {
    pub kind: StepperKind,
    pub tau: f64,
    pub newton: NewtonConfig,
    pub fhat_form: FhatForm,
}

impl StepperSpec {
    pub fn new(kind: StepperKind, tau: f64) -> Self {
        StepperSpec {
            kind,
            tau,
            newton: NewtonConfig::default(),
            fhat_form: FhatForm::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Input(format!("time step must be positive, got {}", self.tau)));
        }
        self.newton.validate()
    }
}

/// Per-step solver metadata; zero iterations and residual for explicit steps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepInfo {
    pub newton_iters: usize,
    pub residual: f64,
}

impl From<&SolveResult> for StepInfo {
    fn from(s: &SolveResult) -> Self {
        StepInfo {
            newton_iters: s.iterations,
            residual: s.residual_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub state: Vec<f64>,
    pub info: StepInfo,
}

/// `x + τ f(x)`.
pub fn euler_step<F>(f: F, x_prev: &[f64], tau: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let fx = f(x_prev);
    x_prev.iter().zip(&fx).map(|(x, v)| x + tau * v).collect()
}

/// Solves `x' = x + τ f(x')` from the explicit Euler predictor.
pub fn backward_euler_step<F>(f: F, x_prev: &[f64], tau: f64, newton: &NewtonConfig) -> Result<StepOutput>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let guess = euler_step(&f, x_prev, tau);
    let residual = |xn: &[f64]| {
        let fx = f(xn);
        Ok(xn
            .iter()
            .zip(x_prev)
            .zip(&fx)
            .map(|((a, b), v)| a - b - tau * v)
            .collect())
    };
    let s = newton_solve(residual, None::<NoJacobian>, &guess, newton)?;
    Ok(StepOutput {
        info: StepInfo::from(&s),
        state: s.root,
    })
}

/// Solves `x' = x + τ f((x + x')/2)` from the explicit Euler predictor.
pub fn implicit_midpoint_step<F>(f: F, x_prev: &[f64], tau: f64, newton: &NewtonConfig) -> Result<StepOutput>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let guess = euler_step(&f, x_prev, tau);
    let residual = |xn: &[f64]| {
        let mid: Vec<f64> = xn.iter().zip(x_prev).map(|(a, b)| 0.5 * (a + b)).collect();
        let fx = f(&mid);
        Ok(xn
            .iter()
            .zip(x_prev)
            .zip(&fx)
            .map(|((a, b), v)| a - b - tau * v)
            .collect())
    };
    let s = newton_solve(residual, None::<NoJacobian>, &guess, newton)?;
    Ok(StepOutput {
        info: StepInfo::from(&s),
        state: s.root,
    })
}

/// Kick–drift–kick for `q̇ = g(p)`, `ṗ = h(q)`:
/// `p½ = p + τ/2 h(q)`, `q' = q + τ g(p½)`, `p' = p½ + τ/2 h(q')`.
pub fn stormer_verlet_step<G, H>(g: G, h: H, q: &[f64], p: &[f64], tau: f64) -> (Vec<f64>, Vec<f64>)
where
    G: Fn(&[f64]) -> Vec<f64>,
    H: Fn(&[f64]) -> Vec<f64>,
{
    let half = 0.5 * tau;
    let p_half: Vec<f64> = p.iter().zip(h(q)).map(|(pi, hi)| pi + half * hi).collect();
    let q_next: Vec<f64> = q.iter().zip(g(&p_half)).map(|(qi, gi)| qi + tau * gi).collect();
    let p_next: Vec<f64> = p_half.iter().zip(h(&q_next)).map(|(pi, hi)| pi + half * hi).collect();
    (q_next, p_next)
}

/// `f̂^τ` for the free columns of the system.
pub fn fhat_values(system: &ConservedSystem, form: FhatForm, x_prev: &[f64], x_next: &[f64]) -> Vec<f64> {
    let free = system.free_columns();
    match form {
        FhatForm::Polarized => {
            let v = system.polarize_var();
            free.iter()
                .map(|&c| {
                    system.f()[c]
                        .polarized_eval(v, x_prev, x_next)
                        .expect("dimensions checked by caller")
                })
                .collect()
        }
        FhatForm::Average => free
            .iter()
            .map(|&c| {
                let p = &system.f()[c];
                0.5 * (p.eval_unchecked(x_prev) + p.eval_unchecked(x_next))
            })
            .collect(),
        FhatForm::Midpoint => {
            let mid: Vec<f64> = x_prev.iter().zip(x_next).map(|(a, b)| 0.5 * (a + b)).collect();
            free.iter().map(|&c| system.f()[c].eval_unchecked(&mid)).collect()
        }
    }
}

/// The conservative residual `x' - x - τ f^τ(x, x')`, i.e. `τ F^τ`.
///
/// Newton works on this undivided form: dividing by `τ` would scale the
/// round-off floor of the residual by `1/τ`.
pub fn conservative_residual(
    system: &ConservedSystem,
    dm: &DiscreteMultiplier,
    form: FhatForm,
    x_prev: &[f64],
    x_next: &[f64],
    tau: f64,
) -> Result<Vec<f64>> {
    check_len("x_prev", x_prev.len(), system.n())?;
    check_len("x_next", x_next.len(), system.n())?;
    let fhat = fhat_values(system, form, x_prev, x_next);
    let g = dm.conservative_field(x_prev, x_next, &fhat)?;
    Ok(x_next
        .iter()
        .zip(x_prev)
        .zip(&g)
        .map(|((a, b), v)| a - b - tau * v)
        .collect())
}

/// One step of the conservative multiplier scheme.
///
/// The Newton guess is the explicit Euler predictor, except at states where
/// `‖f‖_∞` is already below the Newton tolerance; there the step starts from
/// `x_prev` itself.
pub fn conservative_step(
    system: &ConservedSystem,
    dm: &DiscreteMultiplier,
    x_prev: &[f64],
    spec: &StepperSpec,
) -> Result<StepOutput> {
    check_len("state", x_prev.len(), system.n())?;
    let tau = spec.tau;
    let fx = system.eval_f(x_prev)?;
    let guess: Vec<f64> = if norm_inf(&fx) <= spec.newton.abs_tol {
        x_prev.to_vec()
    } else {
        x_prev.iter().zip(&fx).map(|(x, v)| x + tau * v).collect()
    };
    let residual = |xn: &[f64]| conservative_residual(system, dm, spec.fhat_form, x_prev, xn, tau);
    let s = newton_solve(residual, None::<NoJacobian>, &guess, &spec.newton)?;
    debug_assert!(
        annihilation_defect(system, dm, spec.fhat_form, x_prev, &s.root) <= 1e-12,
        "Λ^τ f^τ != 0 at accepted step"
    );
    Ok(StepOutput {
        info: StepInfo::from(&s),
        state: s.root,
    })
}

/// `‖Λ^τ f^τ‖_∞` scaled by `1 + Σ|Λ^τ_ij f^τ_j|`; zero in exact arithmetic.
pub fn annihilation_defect(
    system: &ConservedSystem,
    dm: &DiscreteMultiplier,
    form: FhatForm,
    x_prev: &[f64],
    x_next: &[f64],
) -> f64 {
    let fhat = fhat_values(system, form, x_prev, x_next);
    let (Ok(g), Ok(lam)) = (dm.conservative_field(x_prev, x_next, &fhat), dm.eval(x_prev, x_next)) else {
        return 0.0;
    };
    (0..lam.rows())
        .map(|i| {
            let row = lam.row(i);
            let s: f64 = row.iter().zip(&g).map(|(a, b)| a * b).sum();
            let mag: f64 = row.iter().zip(&g).map(|(a, b)| (a * b).abs()).sum();
            s.abs() / (1.0 + mag)
        })
        .fold(0.0, f64::max)
}

/// A stepper bound to a system.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    system: &'a ConservedSystem,
    spec: StepperSpec,
    dm: Option<DiscreteMultiplier>,
    half: usize,
}

impl<'a> Stepper<'a> {
    /// Validates the spec against the system. Störmer–Verlet requires the
    /// separable split `ẋ_q = g(x_p)`, `ẋ_p = h(x_q)` with `q` the first half of
    /// the state and `p` the second.
    pub fn new(system: &'a ConservedSystem, spec: StepperSpec) -> Result<Self> {
        spec.validate()?;
        let n = system.n();
        let half = n / 2;
        if spec.kind == StepperKind::StormerVerlet {
            let separable = n.is_multiple_of(2)
                && system.f()[..half].iter().all(|p| (0..half).all(|v| !p.depends_on(v)))
                && system.f()[half..].iter().all(|p| (half..n).all(|v| !p.depends_on(v)));
            if !separable {
                return Err(Error::Unsupported(
                    "Störmer–Verlet needs a separable system q' = g(p), p' = h(q)".into(),
                ));
            }
        }
        let dm = (spec.kind == StepperKind::ConservativeMultiplier).then(|| DiscreteMultiplier::new(system));
        Ok(Stepper { system, spec, dm, half })
    }

    pub fn spec(&self) -> &StepperSpec {
        &self.spec
    }

    pub fn system(&self) -> &ConservedSystem {
        self.system
    }

    pub fn step(&self, x: &[f64]) -> Result<StepOutput> {
        check_len("state", x.len(), self.system.n())?;
        let sys = self.system;
        let f = |y: &[f64]| sys.f().iter().map(|p| p.eval_unchecked(y)).collect::<Vec<f64>>();
        let tau = self.spec.tau;
        match self.spec.kind {
            StepperKind::ConservativeMultiplier => {
                let dm = self.dm.as_ref().expect("built for conservative stepper");
                conservative_step(sys, dm, x, &self.spec)
            }
            StepperKind::ExplicitEuler => Ok(StepOutput {
                state: euler_step(f, x, tau),
                info: StepInfo::default(),
            }),
            StepperKind::BackwardEuler => backward_euler_step(f, x, tau, &self.spec.newton),
            StepperKind::ImplicitMidpoint => implicit_midpoint_step(f, x, tau, &self.spec.newton),
            StepperKind::StormerVerlet => {
                let h = self.half;
                let (q, p) = x.split_at(h);
                // f_q ignores q and f_p ignores p, so either half may be stale
                let g = |pp: &[f64]| {
                    let y: Vec<f64> = q.iter().chain(pp).copied().collect();
                    sys.f()[..h].iter().map(|poly| poly.eval_unchecked(&y)).collect()
                };
                let hq = |qq: &[f64]| {
                    let y: Vec<f64> = qq.iter().chain(p).copied().collect();
                    sys.f()[h..].iter().map(|poly| poly.eval_unchecked(&y)).collect()
                };
                let (qn, pn) = stormer_verlet_step(g, hq, q, p, tau);
                Ok(StepOutput {
                    state: qn.into_iter().chain(pn).collect(),
                    info: StepInfo::default(),
                })
            }
        }
    }
}

/// How an integration run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    /// `‖x_k‖₂ > R_div` or a non-finite state at step `k` (state kept).
    Diverged {
        k: usize,
    },
    /// Step `k` failed; the trajectory stops at `x_{k-1}`.
    StepFailed {
        k: usize,
        error: Error,
    },
}

/// States `x_0 .. x_N` at times `t_k = k τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub tau: f64,
    pub states: Vec<Vec<f64>>,
    /// Metadata for steps `1..=N`; `step_info[k-1]` belongs to `x_k`.
    pub step_info: Vec<StepInfo>,
    pub termination: Termination,
}

impl Trajectory {
    /// Number of accepted steps.
    pub fn len_steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.tau
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory holds x_0")
    }

    pub fn is_complete(&self) -> bool {
        self.termination == Termination::Completed
    }

    /// Writes `k,t,x1..xn,psi_1..psi_m,newton_iters,residual`, one row per
    /// state, reals with 17 significant digits.
    pub fn write_csv<W: Write>(&self, system: &ConservedSystem, mut out: W) -> io::Result<()> {
        let n = system.n();
        let m = system.m();
        let mut header = vec!["k".to_string(), "t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=m).map(|i| format!("psi_{i}")));
        header.push("newton_iters".into());
        header.push("residual".into());
        writeln!(out, "{}", header.join(","))?;
        for (k, x) in self.states.iter().enumerate() {
            let info = if k == 0 {
                StepInfo::default()
            } else {
                self.step_info[k - 1]
            };
            let mut row = vec![k.to_string(), fmt_real(self.time(k))];
            row.extend(x.iter().map(|v| fmt_real(*v)));
            row.extend(system.psi().iter().map(|p| fmt_real(p.eval_unchecked(x))));
            row.push(info.newton_iters.to_string());
            row.push(fmt_real(info.residual));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// 17 significant digits, lossless for f64.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Applies `stepper` up to `n_steps` times from `x0`, stopping early on a step
/// error or when the divergence guard `r_div` trips.
pub fn integrate_with(stepper: &Stepper<'_>, x0: &[f64], n_steps: usize, r_div: f64) -> Result<Trajectory> {
    check_len("initial state", x0.len(), stepper.system().n())?;
    if n_steps < 1 {
        return Err(Error::Input("number of steps must be at least 1".into()));
    }
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut step_info = Vec::with_capacity(n_steps);
    states.push(x0.to_vec());
    let mut termination = Termination::Completed;
    for k in 1..=n_steps {
        match stepper.step(&states[k - 1]) {
            Ok(out) => {
                let norm = out.state.iter().map(|v| v * v).sum::<f64>().sqrt();
                states.push(out.state);
                step_info.push(out.info);
                if !(norm <= r_div) {
                    termination = Termination::Diverged { k };
                    break;
                }
            }
            Err(e) => {
                termination = Termination::StepFailed {
                    k,
                    error: Error::Step { k, source: Box::new(e) },
                };
                break;
            }
        }
    }
    Ok(Trajectory {
        tau: stepper.spec().tau,
        states,
        step_info,
        termination,
    })
}

/// Default divergence radius.
pub const DEFAULT_R_DIV: f64 = 1e3;

/// [`integrate_with`] for a freshly built stepper.
pub fn integrate(
    system: &ConservedSystem,
    spec: &StepperSpec,
    x0: &[f64],
    n_steps: usize,
    r_div: f64,
) -> Result<Trajectory> {
    let stepper = Stepper::new(system, *spec)?;
    integrate_with(&stepper, x0, n_steps, r_div)
}
