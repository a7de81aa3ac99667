//! Acceptance criteria: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::fs;
use std::time::Instant;

use common::*;
use conservative_ode::analysis::{
    discriminant, elliptic_geometry, epsilon_to_merge, fit_accumulation_rate, log_schedule, n_max, AccumulationFit,
    DriftSeries, DriftTracker,
};
use conservative_ode::config::ExperimentConfig;
use conservative_ode::experiment::{run, RunStatus};
use conservative_ode::integrators::conservative_residual;
use conservative_ode::{integrate, verify_multiplier, DiscreteMultiplier, FhatForm, StepperKind, StepperSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn load(name: &str, overrides: &[(&str, &str)]) -> ExperimentConfig {
    let ov: Vec<(String, String)> = overrides.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    ExperimentConfig::load(&config(name), &ov).expect("bundled config loads")
}

fn c1_exact_conservation() -> Outcome {
    let cfg = load("elliptic_conservative.cfg", &[]);
    let t = Instant::now();
    let rep = run(&cfg).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    check(
        rep.status == RunStatus::Ok && rep.trajectory.len_steps() == 5000 && rep.max_drift <= 1e-12 && secs <= 10.0,
        format!(
            "status {}, max drift {:.3e}, {secs:.2} s",
            rep.status.name(),
            rep.max_drift
        ),
    )
}

fn c2_component_exits() -> Outcome {
    let cons = run(&load("elliptic_conservative.cfg", &[])).map_err(|e| e.to_string())?;
    let euler = run(&load("elliptic_euler.cfg", &[])).map_err(|e| e.to_string())?;
    let verlet = run(&load("elliptic_verlet.cfg", &[])).map_err(|e| e.to_string())?;
    let mid = run(&load("elliptic_midpoint.cfg", &[])).map_err(|e| e.to_string())?;
    let within = |k: Option<usize>| k.is_some_and(|k| k <= 5000);
    check(
        cons.exit_step.is_none()
            && matches!(euler.status, RunStatus::Diverged { .. })
            && within(verlet.exit_step)
            && within(mid.exit_step),
        format!(
            "conservative exit {:?}, euler {:?}, verlet exit {:?}, midpoint exit {:?}",
            cons.exit_step, euler.status, verlet.exit_step, mid.exit_step
        ),
    )
}

fn c3_backward_euler_fixed_point() -> Outcome {
    let rep = run(&load("elliptic_backward_euler.cfg", &[])).map_err(|e| e.to_string())?;
    let x = rep.trajectory.last();
    let d = ((x[0] + 1.0 / 3f64.sqrt()).powi(2) + x[1] * x[1]).sqrt();
    check(
        rep.trajectory.len_steps() == 5000 && d <= 1e-2,
        format!(
            "distance to (-1/sqrt3, 0) after {} steps: {d:.3e}",
            rep.trajectory.len_steps()
        ),
    )
}

fn c4_telescoping() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_tel, mut worst_col) = (0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=4);
        let p = random_polynomial(&mut rng, n, 5, 6);
        let x = random_point(&mut rng, n, 2.0);
        let y = random_point(&mut rng, n, 2.0);
        let dpsi = p.evaluate(&y).unwrap() - p.evaluate(&x).unwrap();
        let mut sum = 0.0;
        let mut mag = dpsi.abs();
        for j in 0..n {
            let t = p.forward_difference_factor(j, &x, &y).unwrap() * (y[j] - x[j]);
            sum += t;
            mag += t.abs();
        }
        worst_tel = worst_tel.max((sum - dpsi).abs() / mag.max(1e-300));
        for (j, g) in p.gradient().iter().enumerate() {
            let exact = g.evaluate(&y).unwrap();
            let lam = p.forward_difference_factor(j, &y, &y).unwrap();
            worst_col = worst_col.max((lam - exact).abs() / exact.abs().max(1.0));
        }
    }
    check(
        worst_tel <= 1e-10 && worst_col <= 1e-12,
        format!("telescoping rel {worst_tel:.2e}, collapse rel {worst_col:.2e}"),
    )
}

fn c5_multiplier_verification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples: Vec<Vec<f64>> = (0..1000).map(|_| random_point(&mut rng, 2, 2.0)).collect();
    let good = verify_multiplier(&elliptic(A), &samples, 1e-12, None).map_err(|e| e.to_string())?;
    let bad = verify_multiplier(&elliptic_with_f2(A, "3*x1^2 + a + 0.01*x1"), &samples, 1e-12, None)
        .map_err(|e| e.to_string())?;
    check(
        good.passed && !bad.passed,
        format!(
            "elliptic scaled residual {:.2e}, perturbed {:.2e}",
            good.max_scaled_residual, bad.max_scaled_residual
        ),
    )
}

fn final_state(kind: StepperKind, tau: f64, steps: usize) -> Result<Vec<f64>, String> {
    let sys = elliptic(A);
    let traj = integrate(&sys, &StepperSpec::new(kind, tau), &reference_x0(), steps, 1e3).map_err(|e| e.to_string())?;
    if !traj.is_complete() {
        return Err(format!("{kind} at tau {tau} ended early: {:?}", traj.termination));
    }
    Ok(traj.last().to_vec())
}

fn c6_order() -> Outcome {
    let taus = [0.1, 0.05, 0.025];
    let fine_steps = 40 * 1024;
    let fine_tau = 1.0 / fine_steps as f64;
    let reference = final_state(StepperKind::ConservativeMultiplier, fine_tau, fine_steps)?;
    let cross = final_state(StepperKind::ImplicitMidpoint, fine_tau, fine_steps)?;
    let agree = max_abs_diff(&reference, &cross);
    if agree > 1e-8 {
        return Err(format!("reference and midpoint cross-check differ by {agree:.2e}"));
    }
    let mut errs = Vec::new();
    for tau in taus {
        let x = final_state(StepperKind::ConservativeMultiplier, tau, (1.0 / tau).round() as usize)?;
        errs.push(max_abs_diff(&x, &reference));
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    check(
        orders.iter().all(|p| (0.8..=1.2).contains(p)),
        format!(
            "errors {}, observed orders {:.3?} (target [0.8, 1.2])",
            errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" "),
            orders
        ),
    )
}

fn c7_epsilon_and_discriminant() -> Outcome {
    let eps = epsilon_to_merge(A, B).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut wrong = 0;
    let mut checked = 0;
    for _ in 0..1000 {
        let a: f64 = rng.gen_range(-3.0..3.0);
        let b: f64 = rng.gen_range(-3.0..3.0);
        if discriminant(a, b).abs() < 1e-9 {
            continue;
        }
        checked += 1;
        // three real roots iff the local max is positive and the local min negative
        let three = a < 0.0 && {
            let c = (-a / 3.0).sqrt();
            let p = |x: f64| x * x * x + a * x + b;
            p(-c) > 0.0 && p(c) < 0.0
        };
        if (elliptic_geometry(a, b).component_count == 2) != three {
            wrong += 1;
        }
    }
    check(
        (1.7e-7..=1.9e-7).contains(&eps) && wrong == 0,
        format!("epsilon {eps:.4e}, {wrong} misclassified of {checked}"),
    )
}

fn c8_accumulation() -> Outcome {
    let synth = DriftSeries {
        checkpoints: log_schedule(1_000_000, 10)
            .into_iter()
            .map(|n| (n, 1e-17 * (n as f64).powf(0.6)))
            .collect(),
    };
    let fit = fit_accumulation_rate(&synth).map_err(|e| e.to_string())?;
    let exact = ((fit.c_a - 1e-17) / 1e-17).abs() <= 1e-12 && ((fit.s - 0.6) / 0.6).abs() <= 1e-12;

    let cfg = load("elliptic_conservative.cfg", &[("steps", "1000000")]);
    let sys = cfg.system.build().map_err(|e| e.to_string())?;
    let traj = integrate(&sys, &cfg.spec, &cfg.x0, cfg.steps, cfg.r_div).map_err(|e| e.to_string())?;
    let mut tracker = DriftTracker::new(sys.eval_psi(&cfg.x0).unwrap(), log_schedule(cfg.steps, cfg.per_decade));
    for x in &traj.states[1..] {
        tracker.push(&sys.eval_psi(x).unwrap());
    }
    let run_fit = fit_accumulation_rate(&tracker.finish()).map_err(|e| e.to_string())?;

    let unit = |c_a: f64, s: f64| AccumulationFit {
        c_a,
        s,
        r_squared: 1.0,
        n_points: 3,
    };
    let identities = n_max(4.0 * 2.5e-17, &unit(2.5e-17, 0.6)).unwrap() == 1.0
        && n_max(8.0 * 2.5e-17, &unit(2.5e-17, 1.0)).unwrap() == 2.0;
    let published = n_max(1.8e-7, &unit(2.45e-17, 0.5964)).unwrap();
    check(
        exact && traj.is_complete() && run_fit.s > 0.0 && run_fit.s <= 1.0 && identities && (1e15..=1e17).contains(&published),
        format!(
            "synthetic fit ({:.6e}, {:.12}), run to 1e6: s = {:.4}, C_a = {:.3e}; identities {identities}; N_max from published constants {published:.3e}",
            fit.c_a, fit.s, run_fit.s, run_fit.c_a
        ),
    )
}

fn c9_closed_form_residual() -> Outcome {
    let sys = elliptic(A);
    let dm = DiscreteMultiplier::new(&sys);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0_f64;
    let mut used = 0;
    while used < 1000 {
        let x = random_point(&mut rng, 2, 2.0);
        let xn = random_point(&mut rng, 2, 2.0);
        let tau = rng.gen_range(0.01..1.0);
        let q = x[0] * x[0] + x[0] * xn[0] + xn[0] * xn[0] + A;
        if q.abs() < 1e-3 {
            continue;
        }
        used += 1;
        let hand = [(xn[0] - x[0]) / tau - (x[1] + xn[1]), (xn[1] - x[1]) / tau - q];
        let got = conservative_residual(&sys, &dm, FhatForm::Polarized, &x, &xn, tau).map_err(|e| e.to_string())?;
        for i in 0..2 {
            let scale = 1.0 + ((xn[i] - x[i]) / tau).abs();
            worst = worst.max((got[i] / tau - hand[i]).abs() / scale);
        }
    }
    check(
        worst <= 1e-14,
        format!("max scaled difference {worst:.2e} over {used} samples"),
    )
}

fn c10_determinism() -> Outcome {
    let names = [
        "elliptic_conservative.cfg",
        "elliptic_euler.cfg",
        "elliptic_backward_euler.cfg",
        "elliptic_verlet.cfg",
        "elliptic_midpoint.cfg",
    ];
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for name in names {
        let cfg = load(name, &[]);
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let dir = root.path().join(format!("{name}.{rep}"));
            let paths = run(&cfg)
                .and_then(|r| r.write_artifacts(&dir))
                .map_err(|e| e.to_string())?;
            let files: Vec<(String, Vec<u8>)> = paths
                .iter()
                .map(|p| {
                    (
                        p.file_name().unwrap().to_string_lossy().into_owned(),
                        fs::read(p).unwrap(),
                    )
                })
                .collect();
            outputs.push(files);
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{name}: artifacts differ between runs"));
        }
        compared += outputs[0].len();
    }
    check(
        true,
        format!("{compared} artifact files bit-identical across repeated runs"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact conservation, N = 5000", c1_exact_conservation),
        ("component exits", c2_component_exits),
        ("backward Euler fixed point", c3_backward_euler_fixed_point),
        ("telescoping property", c4_telescoping),
        ("multiplier verification", c5_multiplier_verification),
        ("first-order convergence", c6_order),
        ("merge distance and discriminant", c7_epsilon_and_discriminant),
        ("accumulation rate and N_max", c8_accumulation),
        ("closed-form elliptic residual", c9_closed_form_residual),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
