//! Experiment runner: integrate a configured system, measure drift and
//! component exits, and write the CSV artifacts.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::analysis::{
    elliptic_geometry, exit_detector, fit_accumulation_rate, log_schedule, AccumulationFit, DriftSeries, DriftTracker,
    EllipticGeometry,
};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::integrators::{fmt_real, integrate, Termination, Trajectory};
use crate::multiplier::ConservedSystem;

/// Process exit codes of the runner.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const STEP_FAILURE: i32 = 3;
    pub const DIVERGED: i32 = 4;
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Ok,
    StepFailure { k: usize, message: String },
    Diverged { k: usize },
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunStatus::Ok => exit_code::OK,
            RunStatus::StepFailure { .. } => exit_code::STEP_FAILURE,
            RunStatus::Diverged { .. } => exit_code::DIVERGED,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::StepFailure { .. } => "step_failure",
            RunStatus::Diverged { .. } => "diverged",
        }
    }
}

/// Everything a run produces, before it is written to disk.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub system: ConservedSystem,
    pub trajectory: Trajectory,
    pub status: RunStatus,
    pub drift: DriftSeries,
    /// `max_k ‖ψ(x_k) - ψ(x_0)‖_∞` over all accepted steps.
    pub max_drift: f64,
    pub fit: Option<AccumulationFit>,
    pub geometry: Option<EllipticGeometry>,
    pub exit_step: Option<usize>,
}

impl RunReport {
    pub fn newton_mean(&self) -> f64 {
        let info = &self.trajectory.step_info;
        if info.is_empty() {
            return 0.0;
        }
        info.iter().map(|s| s.newton_iters as f64).sum::<f64>() / info.len() as f64
    }

    pub fn newton_max(&self) -> usize {
        self.trajectory
            .step_info
            .iter()
            .map(|s| s.newton_iters)
            .max()
            .unwrap_or(0)
    }

    /// The manifest: the resolved config followed by `result.*` lines.
    pub fn manifest(&self) -> String {
        let mut s = self.config.to_manifest();
        let _ = writeln!(s, "result.status = {}", self.status.name());
        let _ = writeln!(s, "result.steps_completed = {}", self.trajectory.len_steps());
        match &self.status {
            RunStatus::StepFailure { k, message } => {
                let _ = writeln!(s, "result.failed_step = {k}");
                let _ = writeln!(s, "result.error = {}", message.replace(['#', '\n'], " "));
            }
            RunStatus::Diverged { k } => {
                let _ = writeln!(s, "result.diverged_step = {k}");
            }
            RunStatus::Ok => {}
        }
        let exit = self.exit_step.map_or("none".to_string(), |k| k.to_string());
        let _ = writeln!(s, "result.exit_step = {exit}");
        let _ = writeln!(s, "result.max_drift = {}", fmt_real(self.max_drift));
        s
    }

    /// Writes trajectory, drift, fit (when available), geometry (elliptic
    /// systems) and manifest into `dir`; returns the paths written.
    pub fn write_artifacts(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut emit = |name: &str, f: &dyn Fn(&mut dyn Write) -> std::io::Result<()>| -> Result<()> {
            let path = dir.join(name);
            let mut w = BufWriter::new(fs::File::create(&path)?);
            f(&mut w)?;
            w.flush()?;
            written.push(path);
            Ok(())
        };
        emit("trajectory.csv", &|w| self.trajectory.write_csv(&self.system, w))?;
        emit("drift.csv", &|w| self.drift.write_csv(w))?;
        if let Some(fit) = &self.fit {
            emit("fit.csv", &|w| fit.write_csv(w))?;
        }
        if let Some(g) = &self.geometry {
            emit("geometry.csv", &|w| g.write_csv(w))?;
        }
        emit("manifest.cfg", &|w| w.write_all(self.manifest().as_bytes()))?;
        Ok(written)
    }
}

/// Integrates the configured run and analyses it. Step failures and
/// divergence are reported in [`RunReport::status`], not as errors.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let system = config.system.build()?;
    let trajectory = integrate(&system, &config.spec, &config.x0, config.steps, config.r_div)?;
    let status = match &trajectory.termination {
        Termination::Completed => RunStatus::Ok,
        Termination::Diverged { k } => RunStatus::Diverged { k: *k },
        Termination::StepFailed { k, error } => RunStatus::StepFailure {
            k: *k,
            message: error.to_string(),
        },
    };

    let reference = system.eval_psi(&config.x0)?;
    let mut tracker = DriftTracker::new(reference, log_schedule(config.steps, config.per_decade));
    for x in &trajectory.states[1..] {
        tracker.push(&system.eval_psi(x)?);
    }
    let max_drift = tracker.running_max();
    let drift = tracker.finish();
    let fit = fit_accumulation_rate(&drift).ok();

    let (geometry, exit_step) = if config.system.is_elliptic() {
        let a = config.system.params["a"];
        let g = elliptic_geometry(a, config.elliptic_level()?);
        let exit = if g.component_count == 2 {
            exit_detector(&g, &trajectory.states, config.r_div)?
        } else {
            None
        };
        (Some(g), exit)
    } else {
        (None, None)
    };

    Ok(RunReport {
        config: config.clone(),
        system,
        trajectory,
        status,
        drift,
        max_drift,
        fit,
        geometry,
        exit_step,
    })
}

/// One row per method of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub label: String,
    pub stepper: String,
    pub status: String,
    pub steps_completed: usize,
    pub max_drift: f64,
    pub exit_step: Option<usize>,
    pub final_state: Vec<f64>,
    pub newton_mean: f64,
    pub newton_max: usize,
}

impl From<&RunReport> for CompareRow {
    fn from(r: &RunReport) -> Self {
        CompareRow {
            label: r.config.label.clone(),
            stepper: r.config.spec.kind.name().to_string(),
            status: r.status.name().to_string(),
            steps_completed: r.trajectory.len_steps(),
            max_drift: r.max_drift,
            exit_step: r.exit_step,
            final_state: r.trajectory.last().to_vec(),
            newton_mean: r.newton_mean(),
            newton_max: r.newton_max(),
        }
    }
}

/// Runs every config (concurrently) after checking that they share the
/// system and the initial state. Rows keep the input order.
pub fn compare(configs: &[ExperimentConfig]) -> Result<Vec<CompareRow>> {
    let Some(first) = configs.first() else {
        return Err(Error::Input("compare needs at least one config".into()));
    };
    let base = first.system.build()?;
    for c in &configs[1..] {
        if c.system.build()? != base || c.system.params != first.system.params {
            return Err(Error::Input(format!(
                "config `{}` uses a different system than `{}`",
                c.label, first.label
            )));
        }
        if c.x0 != first.x0 {
            return Err(Error::Input(format!(
                "config `{}` starts from {:?}, `{}` from {:?}",
                c.label, c.x0, first.label, first.x0
            )));
        }
    }
    let reports: Vec<Result<RunReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs.iter().map(|c| scope.spawn(move || run(c))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("run thread panicked"))
            .collect()
    });
    reports
        .into_iter()
        .map(|r| r.map(|rep| CompareRow::from(&rep)))
        .collect()
}

/// `label,stepper,status,steps_completed,max_drift,exit_step,final_x1..,newton_mean,newton_max`.
pub fn write_compare_csv<W: Write>(rows: &[CompareRow], mut out: W) -> std::io::Result<()> {
    let n = rows.first().map_or(0, |r| r.final_state.len());
    let mut header: Vec<String> = [
        "label",
        "stepper",
        "status",
        "steps_completed",
        "max_drift",
        "exit_step",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=n).map(|i| format!("final_x{i}")));
    header.push("newton_mean".into());
    header.push("newton_max".into());
    writeln!(out, "{}", header.join(","))?;
    for r in rows {
        let mut cols = vec![
            r.label.clone(),
            r.stepper.clone(),
            r.status.clone(),
            r.steps_completed.to_string(),
            fmt_real(r.max_drift),
            r.exit_step.map_or("none".to_string(), |k| k.to_string()),
        ];
        cols.extend(r.final_state.iter().map(|v| fmt_real(*v)));
        cols.push(fmt_real(r.newton_mean));
        cols.push(r.newton_max.to_string());
        writeln!(out, "{}", cols.join(","))?;
    }
    Ok(())
}
