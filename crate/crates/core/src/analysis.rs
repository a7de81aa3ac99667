//! Drift accounting, power-law fits of error accumulation, the step horizon
//! `N_max`, and level-set geometry of the elliptic family
//! `ψ(x, y) = y² - x³ - a x`.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::integrators::{fmt_real, Trajectory};
use crate::polynomial::Polynomial;

/// Running maximum of `‖ψ(x_k) - ψ(x_0)‖_∞` sampled at checkpoints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DriftSeries {
    /// `(N, max_{1≤k≤N} ‖ψ(x_k) - c‖_∞)` with `N` strictly increasing.
    pub checkpoints: Vec<(usize, f64)>,
}

impl DriftSeries {
    /// The drift at the last checkpoint, or 0 for an empty series.
    pub fn final_drift(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.1)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "N,max_drift")?;
        for (n, d) in &self.checkpoints {
            writeln!(out, "{n},{}", fmt_real(*d))?;
        }
        Ok(())
    }
}

/// Log-spaced step counts `round(10^(i/per_decade))` up to `n_max`,
/// deduplicated, always ending at `n_max`.
pub fn log_schedule(n_max: usize, per_decade: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    if n_max == 0 {
        return out;
    }
    let per_decade = per_decade.max(1);
    let mut i = 0;
    loop {
        let v = 10f64.powf(i as f64 / per_decade as f64).round() as usize;
        if v > n_max {
            break;
        }
        if out.last() != Some(&v) {
            out.push(v);
        }
        i += 1;
    }
    if out.last() != Some(&n_max) {
        out.push(n_max);
    }
    out
}

/// Incremental drift tracker for runs that do not keep their states.
#[derive(Debug, Clone)]
pub struct DriftTracker {
    reference: Vec<f64>,
    schedule: Vec<usize>,
    next: usize,
    steps: usize,
    running_max: f64,
    series: DriftSeries,
}

impl DriftTracker {
    pub fn new(reference: Vec<f64>, schedule: Vec<usize>) -> Self {
        let mut schedule = schedule;
        schedule.sort_unstable();
        schedule.dedup();
        schedule.retain(|&n| n >= 1);
        DriftTracker {
            reference,
            schedule,
            next: 0,
            steps: 0,
            running_max: 0.0,
            series: DriftSeries::default(),
        }
    }

    /// Records `ψ(x_k)` for the next step `k = steps + 1`.
    pub fn push(&mut self, psi: &[f64]) {
        self.steps += 1;
        let d = psi
            .iter()
            .zip(&self.reference)
            .fold(0.0_f64, |m, (p, c)| m.max((p - c).abs()));
        self.running_max = self.running_max.max(d);
        while self.next < self.schedule.len() && self.schedule[self.next] == self.steps {
            self.series.checkpoints.push((self.steps, self.running_max));
            self.next += 1;
        }
    }

    pub fn running_max(&self) -> f64 {
        self.running_max
    }

    pub fn finish(self) -> DriftSeries {
        self.series
    }
}

/// Drift series of a trajectory; checkpoints past its end are dropped.
pub fn drift_series(trajectory: &Trajectory, psi: &[Polynomial], schedule: &[usize]) -> Result<DriftSeries> {
    let eval = |x: &[f64]| -> Result<Vec<f64>> { psi.iter().map(|p| p.evaluate(x)).collect() };
    let reference = eval(&trajectory.states[0])?;
    let mut tracker = DriftTracker::new(reference, schedule.to_vec());
    for x in &trajectory.states[1..] {
        tracker.push(&eval(x)?);
    }
    Ok(tracker.finish())
}

/// Least-squares fit `E ≈ C_a N^s` in log–log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccumulationFit {
    pub c_a: f64,
    pub s: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

impl AccumulationFit {
    /// Fitted drift at `n` steps.
    pub fn predict(&self, n: f64) -> f64 {
        self.c_a * n.powf(self.s)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "C_a,s,r_squared,n_points")?;
        writeln!(
            out,
            "{},{},{},{}",
            fmt_real(self.c_a),
            fmt_real(self.s),
            fmt_real(self.r_squared),
            self.n_points
        )
    }
}

/// Ordinary least squares of `log E` on `log N` over checkpoints with
/// positive drift. Needs at least three such points.
pub fn fit_accumulation_rate(series: &DriftSeries) -> Result<AccumulationFit> {
    let pts: Vec<(f64, f64)> = series
        .checkpoints
        .iter()
        .filter(|(n, e)| *n >= 1 && *e > 0.0 && e.is_finite())
        .map(|(n, e)| ((*n as f64).ln(), e.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 checkpoints with positive drift, have {}",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all checkpoints share one N".into()));
    }
    let s = sxy / sxx;
    let intercept = my - s * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + s * p.0);
            r * r
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(AccumulationFit {
        c_a: intercept.exp(),
        s,
        r_squared,
        n_points: pts.len(),
    })
}

/// `N_max = (ε / (4 C_a))^{1/s}`: the number of steps before the accumulated
/// drift can reach a quarter of the merge distance `ε`.
pub fn n_max(epsilon: f64, fit: &AccumulationFit) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(fit.c_a > 0.0 && fit.s > 0.0) {
        return Err(Error::Domain("fit needs C_a > 0 and s > 0".into()));
    }
    Ok((epsilon / (4.0 * fit.c_a)).powf(1.0 / fit.s))
}

/// Real geometry of the level set `y² = x³ + a x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticGeometry {
    pub a: f64,
    pub b: f64,
    /// `4a³ + 27b²`; negative iff the curve has two components.
    pub discriminant: f64,
    /// Sorted real roots of `x³ + a x + b`.
    pub real_roots: Vec<f64>,
    pub component_count: usize,
    /// `[x₁, x₂]`, the x-range of the bounded oval.
    pub oval_interval: Option<(f64, f64)>,
    /// `x₃ - x₂`, the x-axis gap between the oval and the unbounded branch.
    pub gap: Option<f64>,
}

impl EllipticGeometry {
    /// Midpoint `(x₂ + x₃)/2` between the oval and the unbounded branch.
    pub fn exit_threshold(&self) -> Option<f64> {
        match self.real_roots.as_slice() {
            [_, x2, x3] if self.component_count == 2 => Some(0.5 * (x2 + x3)),
            _ => None,
        }
    }

    pub fn cubic(&self, x: f64) -> f64 {
        cubic(self.a, self.b, x)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "a,b,discriminant,component_count,x1,x2,x3,gap,epsilon")?;
        let root = |i: usize| self.real_roots.get(i).map(|v| fmt_real(*v)).unwrap_or_default();
        let gap = self.gap.map(fmt_real).unwrap_or_default();
        let eps = epsilon_to_merge(self.a, self.b).map(fmt_real).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_real(self.a),
            fmt_real(self.b),
            fmt_real(self.discriminant),
            self.component_count,
            root(0),
            root(1),
            root(2),
            gap,
            eps
        )
    }
}

fn cubic(a: f64, b: f64, x: f64) -> f64 {
    x * x * x + a * x + b
}

fn polish(a: f64, b: f64, x: f64) -> f64 {
    let d = 3.0 * x * x + a;
    if d == 0.0 {
        return x;
    }
    let y = x - cubic(a, b, x) / d;
    if y.is_finite() && cubic(a, b, y).abs() < cubic(a, b, x).abs() {
        y
    } else {
        x
    }
}

pub fn discriminant(a: f64, b: f64) -> f64 {
    4.0 * a * a * a + 27.0 * b * b
}

/// Closed-form roots (trigonometric when three are real, Cardano otherwise),
/// each polished by one Newton step.
pub fn elliptic_geometry(a: f64, b: f64) -> EllipticGeometry {
    let disc = discriminant(a, b);
    let mut roots: Vec<f64> = if disc < 0.0 {
        let m = 2.0 * (-a / 3.0).sqrt();
        let arg = ((3.0 * b) / (2.0 * a) * (-3.0 / a).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    } else if disc == 0.0 && a < 0.0 {
        // simple root 3b/a, double root -3b/(2a)
        let simple = 3.0 * b / a;
        let double = -1.5 * b / a;
        vec![simple, double]
    } else {
        let half_q = 0.5 * b;
        let d = (disc / 108.0).max(0.0).sqrt();
        vec![(-half_q + d).cbrt() + (-half_q - d).cbrt()]
    };
    for r in roots.iter_mut() {
        *r = polish(a, b, *r);
    }
    roots.sort_by(f64::total_cmp);
    let two = disc < 0.0 && roots.len() == 3;
    EllipticGeometry {
        a,
        b,
        discriminant: disc,
        component_count: if two { 2 } else { 1 },
        oval_interval: two.then(|| (roots[0], roots[1])),
        gap: two.then(|| roots[2] - roots[1]),
        real_roots: roots,
    }
}

/// Smallest level shift `δ > 0` at which the two components merge:
/// `4a³ + 27(|b| + δ)² = 0`, i.e. `δ = √(-4a³/27) - |b|`.
pub fn epsilon_to_merge(a: f64, b: f64) -> Result<f64> {
    if !(discriminant(a, b) < 0.0) {
        return Err(Error::Domain(format!(
            "level set of a = {a}, b = {b} has a single component"
        )));
    }
    Ok((-4.0 * a * a * a / 27.0).sqrt() - b.abs())
}

/// First step whose x-coordinate passes the midpoint between the oval and the
/// unbounded branch, or whose Euclidean norm exceeds `r_div`.
pub fn exit_detector(geometry: &EllipticGeometry, states: &[Vec<f64>], r_div: f64) -> Result<Option<usize>> {
    let threshold = geometry
        .exit_threshold()
        .ok_or_else(|| Error::Domain("exit detection needs two components".into()))?;
    for (k, x) in states.iter().enumerate() {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if x.first().is_some_and(|&x0| x0 > threshold) || !(norm <= r_div) {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_shape() {
        let s = log_schedule(100, 10);
        assert_eq!(&s[..6], &[1, 2, 3, 4, 5, 6]);
        assert_eq!(*s.last().unwrap(), 100);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(log_schedule(7, 1), vec![1, 7]);
        assert!(log_schedule(0, 10).is_empty());
    }

    #[test]
    fn tracker_checkpoints() {
        let mut t = DriftTracker::new(vec![1.0], vec![3, 1, 3, 0]);
        t.push(&[1.5]);
        t.push(&[0.75]);
        t.push(&[1.0]);
        let s = t.finish();
        assert_eq!(s.checkpoints, vec![(1, 0.5), (3, 0.5)]);
    }

    #[test]
    fn nmax_identities() {
        let fit = AccumulationFit {
            c_a: 2.45e-17,
            s: 0.5964,
            r_squared: 1.0,
            n_points: 3,
        };
        assert_eq!(n_max(4.0 * fit.c_a, &fit).unwrap(), 1.0);
        let lin = AccumulationFit { s: 1.0, ..fit };
        assert_eq!(n_max(8.0 * fit.c_a, &lin).unwrap(), 2.0);
        assert!(n_max(0.0, &fit).is_err());
    }

    #[test]
    fn geometry_hand_factored() {
        let g = elliptic_geometry(-1.0, 0.0);
        assert_eq!(g.component_count, 2);
        let want = [-1.0, 0.0, 1.0];
        for (r, w) in g.real_roots.iter().zip(want) {
            assert!((r - w).abs() < 1e-15, "{:?}", g.real_roots);
        }
        let (x1, x2) = g.oval_interval.unwrap();
        assert!((x1 + 1.0).abs() < 1e-15 && x2.abs() < 1e-15);
        assert!((g.gap.unwrap() - 1.0).abs() < 1e-15);
        let one = elliptic_geometry(0.0, 1.0);
        assert_eq!(one.discriminant, 27.0);
        assert_eq!(one.component_count, 1);
        assert!((one.real_roots[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn double_root_case() {
        // x³ - 3x + 2 = (x - 1)²(x + 2)
        let g = elliptic_geometry(-3.0, 2.0);
        assert_eq!(g.discriminant, 0.0);
        assert_eq!(g.component_count, 1);
        assert_eq!(g.real_roots, vec![-2.0, 1.0]);
    }

    #[test]
    fn merge_distance() {
        let e = epsilon_to_merge(-1.0, 0.0).unwrap();
        assert!((e - (4.0f64 / 27.0).sqrt()).abs() < 1e-16);
        let b = (4.0f64 / 27.0).sqrt();
        assert!(epsilon_to_merge(-1.0, b * (1.0 - 1e-15)).unwrap() < 1e-15);
        assert!(matches!(epsilon_to_merge(0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn exit_on_constructed_jump() {
        let g = elliptic_geometry(-1.0, 0.0);
        let mut states = vec![vec![-0.5, 0.1]; 7];
        states.push(vec![5.0, 0.1]);
        states.push(vec![-0.5, 0.1]);
        assert_eq!(exit_detector(&g, &states, 1e3).unwrap(), Some(7));
        assert_eq!(exit_detector(&g, &states[..7], 1e3).unwrap(), None);
        let far = vec![vec![-0.5, 0.0], vec![-0.5, 2e3]];
        assert_eq!(exit_detector(&g, &far, 1e3).unwrap(), Some(1));
        assert!(exit_detector(&elliptic_geometry(0.0, 1.0), &states, 1e3).is_err());
    }

    #[test]
    fn fit_needs_three_points() {
        let s = DriftSeries {
            checkpoints: vec![(1, 0.0), (2, 1e-16), (4, 2e-16)],
        };
        assert!(matches!(fit_accumulation_rate(&s), Err(Error::InsufficientData(_))));
    }
}
