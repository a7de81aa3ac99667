//! Flat `key = value` text formats for system definitions and experiments.
//!
//! A system file declares the ODE and its conserved quantities:
//!
//! ```text
//! # elliptic curve y^2 = x^3 + a x + b
//! name = elliptic
//! family = elliptic
//! n = 2
//! m = 1
//! param.a = -1
//! f1 = 2*x2
//! f2 = 3*x1^2 + a
//! psi1 = x2^2 - x1^3 - a*x1
//! partition = 1 2
//! ```
//!
//! An experiment config includes a system file and sets up a run:
//!
//! ```text
//! system = elliptic.sys
//! stepper = conservative_multiplier
//! tau = 0.3
//! steps = 5000
//! x0 = 0.571
//! level = 0.3849
//! ```
//!
//! Indices in files are 1-based. Keys under `result.` are written by the
//! runner into manifests and ignored when read back.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Location, Result};
use crate::integrators::{FhatForm, StepperKind, StepperSpec, DEFAULT_R_DIV};
use crate::multiplier::ConservedSystem;
use crate::polynomial::Polynomial;
use crate::solver::NewtonConfig;

/// Ordered `key = value` entries with their source lines.
#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    source: String,
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut kv = KeyValues {
            source: source.to_string(),
            entries: BTreeMap::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(kv.err(line, format!("expected `key = value`, found `{content}`")));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(kv.err(line, "empty key"));
            }
            if kv.entries.contains_key(k) {
                return Err(kv.err(line, format!("duplicate key `{k}`")));
            }
            kv.entries.insert(k.to_string(), (v.to_string(), line));
        }
        Ok(kv)
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            location: Location {
                source: self.source.clone(),
                line,
                column: 0,
            },
            message: message.into(),
        }
    }

    fn field_err(&self, key: &str, message: impl Into<String>) -> Error {
        let line = self.entries.get(key).map_or(0, |e| e.1);
        let msg = format!("`{key}`: {}", message.into());
        self.err(line, msg)
    }

    /// Sets or replaces a value; overrides report line 0.
    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), (value.to_string(), 0));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.0.as_str())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| self.err(0, format!("missing required key `{key}`")))
    }

    fn parse_as<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| self.field_err(key, format!("expected {what}, found `{v}`"))),
        }
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        self.parse_as(key, "a real number")
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.parse_as(key, "a non-negative integer")
    }

    fn reals(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        v.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| self.field_err(key, format!("bad number `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn keys_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> + 'a {
        self.entries
            .iter()
            .filter_map(move |(k, (v, _))| k.strip_prefix(prefix).map(|rest| (rest, v.as_str())))
    }

    fn unknown_keys(&self, allowed: impl Fn(&str) -> bool) -> Result<()> {
        for key in self.entries.keys() {
            if !allowed(key) {
                return Err(self.field_err(key, "unknown key"));
            }
        }
        Ok(())
    }
}

/// A parsed system file, kept in source form so it can be re-emitted.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDef {
    pub name: String,
    /// `elliptic` enables the level-set geometry (needs `param.a`).
    pub family: Option<String>,
    pub n: usize,
    pub m: usize,
    /// Parameters in name order.
    pub params: BTreeMap<String, f64>,
    pub f: Vec<String>,
    pub psi: Vec<String>,
    /// 1-based column permutation.
    pub partition: Vec<usize>,
    /// 1-based designated variable for the polarized `f̂`.
    pub polarize: Option<usize>,
}

impl SystemDef {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let kv = KeyValues::parse(text, source)?;
        Self::from_kv(&kv)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn from_kv(kv: &KeyValues) -> Result<Self> {
        let n = kv.count("n")?.ok_or_else(|| kv.err(0, "missing required key `n`"))?;
        let m = kv.count("m")?.ok_or_else(|| kv.err(0, "missing required key `m`"))?;
        if n < 2 {
            return Err(kv.field_err("n", "state dimension must be at least 2"));
        }
        if m < 1 || m >= n {
            return Err(kv.field_err("m", format!("need 1 ≤ m ≤ n-1 = {}", n - 1)));
        }
        let mut params = BTreeMap::new();
        for (name, v) in kv.keys_with_prefix("param.") {
            let val: f64 = v
                .parse()
                .map_err(|_| kv.field_err(&format!("param.{name}"), "expected a real number"))?;
            params.insert(name.to_string(), val);
        }
        let f = (1..=n)
            .map(|i| kv.require(&format!("f{i}")).map(str::to_string))
            .collect::<Result<Vec<_>>>()?;
        let psi = (1..=m)
            .map(|i| kv.require(&format!("psi{i}")).map(str::to_string))
            .collect::<Result<Vec<_>>>()?;
        let partition = match kv.get("partition") {
            None => (1..=n).collect(),
            Some(v) => v
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| kv.field_err("partition", format!("bad column `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let polarize = kv.count("polarize")?;
        let def = SystemDef {
            name: kv.get("name").unwrap_or("system").to_string(),
            family: kv.get("family").map(str::to_string),
            n,
            m,
            params,
            f,
            psi,
            partition,
            polarize,
        };
        let allowed = |k: &str| {
            matches!(k, "name" | "family" | "n" | "m" | "partition" | "polarize")
                || k.starts_with("param.")
                || k.strip_prefix('f')
                    .and_then(|i| i.parse::<usize>().ok())
                    .is_some_and(|i| (1..=n).contains(&i))
                || k.strip_prefix("psi")
                    .and_then(|i| i.parse::<usize>().ok())
                    .is_some_and(|i| (1..=m).contains(&i))
        };
        kv.unknown_keys(allowed)?;
        let params: std::collections::HashMap<String, f64> = def.params.clone().into_iter().collect();
        let named = def
            .f
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("f{}", i + 1), t))
            .chain(def.psi.iter().enumerate().map(|(i, t)| (format!("psi{}", i + 1), t)));
        for (key, text) in named {
            Polynomial::parse_with(text, n, &params).map_err(|e| kv.field_err(&key, e.to_string()))?;
        }
        def.build().map_err(|e| kv.field_err("partition", e.to_string()))?;
        if def.family.as_deref() == Some("elliptic") && !def.params.contains_key("a") {
            return Err(kv.field_err("family", "elliptic family needs `param.a`"));
        }
        Ok(def)
    }

    /// Parses the polynomials and assembles the system.
    pub fn build(&self) -> Result<ConservedSystem> {
        let params = self.params.clone().into_iter().collect();
        let parse = |s: &String| Polynomial::parse_with(s, self.n, &params);
        let f = self.f.iter().map(parse).collect::<Result<Vec<_>>>()?;
        let psi = self.psi.iter().map(parse).collect::<Result<Vec<_>>>()?;
        let mut sys = ConservedSystem::new(f, psi)?;
        if self.partition.contains(&0) {
            return Err(Error::Input("partition columns are 1-based".into()));
        }
        sys = sys.with_partition(self.partition.iter().map(|c| c - 1).collect())?;
        if let Some(v) = self.polarize {
            if v == 0 {
                return Err(Error::Input("polarize variable is 1-based".into()));
            }
            sys = sys.with_polarize_var(v - 1)?;
        }
        Ok(sys)
    }

    pub fn is_elliptic(&self) -> bool {
        self.family.as_deref() == Some("elliptic")
    }

    /// Canonical text form; parses back to an equal definition.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "name = {}", self.name);
        if let Some(fam) = &self.family {
            let _ = writeln!(s, "family = {fam}");
        }
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "m = {}", self.m);
        for (k, v) in &self.params {
            let _ = writeln!(s, "param.{k} = {v:?}");
        }
        for (i, f) in self.f.iter().enumerate() {
            let _ = writeln!(s, "f{} = {f}", i + 1);
        }
        for (i, p) in self.psi.iter().enumerate() {
            let _ = writeln!(s, "psi{} = {p}", i + 1);
        }
        let part: Vec<String> = self.partition.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "partition = {}", part.join(" "));
        if let Some(v) = self.polarize {
            let _ = writeln!(s, "polarize = {v}");
        }
        s
    }
}

/// Environment variable that overrides the output directory of every run.
pub const OUTPUT_DIR_ENV: &str = "CONSODE_OUTPUT_DIR";

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub label: String,
    pub system_path: PathBuf,
    pub system: SystemDef,
    pub spec: StepperSpec,
    pub x0: Vec<f64>,
    /// Target level used to derive the last initial component, if given.
    pub level: Option<f64>,
    pub steps: usize,
    pub per_decade: usize,
    pub r_div: f64,
    pub output: PathBuf,
}

const EXPERIMENT_KEYS: &[&str] = &[
    "label",
    "system",
    "stepper",
    "tau",
    "steps",
    "fhat",
    "newton.abs_tol",
    "newton.max_iters",
    "newton.fd_step",
    "newton.damping",
    "x0",
    "level",
    "checkpoints.per_decade",
    "r_div",
    "output",
];

impl ExperimentConfig {
    /// Reads a config file, applies `key=value` overrides, then resolves it.
    /// Relative paths are taken from the config file's directory; the output
    /// directory honours [`OUTPUT_DIR_ENV`].
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::parse(&text, &path.display().to_string(), base, overrides)?;
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                cfg.output = PathBuf::from(dir);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str, source: &str, base_dir: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let mut kv = KeyValues::parse(text, source)?;
        for (k, v) in overrides {
            kv.set(k, v);
        }
        kv.unknown_keys(|k| EXPERIMENT_KEYS.contains(&k) || k.starts_with("param.") || k.starts_with("result."))?;

        let system_rel = kv.require("system")?;
        let system_path = base_dir.join(system_rel);
        let mut system = SystemDef::load(&system_path).map_err(|e| match e {
            Error::Io(msg) => kv.field_err("system", msg),
            other => other,
        })?;
        for (name, v) in kv.keys_with_prefix("param.") {
            let val: f64 = v
                .parse()
                .map_err(|_| kv.field_err(&format!("param.{name}"), "expected a real number"))?;
            if !system.params.contains_key(name) {
                return Err(kv.field_err(&format!("param.{name}"), "system has no such parameter"));
            }
            system.params.insert(name.to_string(), val);
        }
        let built = system.build()?;

        let kind: StepperKind = kv
            .require("stepper")?
            .parse()
            .map_err(|e: Error| kv.field_err("stepper", e.to_string()))?;
        let tau = kv.real("tau")?.ok_or_else(|| kv.err(0, "missing required key `tau`"))?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(kv.field_err("tau", "time step must be positive"));
        }
        let steps = kv
            .count("steps")?
            .ok_or_else(|| kv.err(0, "missing required key `steps`"))?;
        if steps == 0 {
            return Err(kv.field_err("steps", "number of steps must be at least 1"));
        }
        let fhat_form = match kv.get("fhat") {
            None => FhatForm::default(),
            Some(v) => v.parse().map_err(|e: Error| kv.field_err("fhat", e.to_string()))?,
        };
        let d = NewtonConfig::default();
        let newton = NewtonConfig {
            abs_tol: kv.real("newton.abs_tol")?.unwrap_or(d.abs_tol),
            max_iters: kv.count("newton.max_iters")?.unwrap_or(d.max_iters),
            fd_step: kv.real("newton.fd_step")?.unwrap_or(d.fd_step),
            damping: kv.real("newton.damping")?.unwrap_or(d.damping),
        };
        newton.validate().map_err(|e| kv.field_err("newton", e.to_string()))?;
        let spec = StepperSpec {
            kind,
            tau,
            newton,
            fhat_form,
        };

        let level = kv.real("level")?;
        let mut x0 = kv.reals("x0")?.ok_or_else(|| kv.err(0, "missing required key `x0`"))?;
        let n = system.n;
        if x0.len() == n - 1 {
            let Some(level) = level else {
                return Err(kv.field_err("x0", format!("{} entries given; set `level` to derive x{n}", n - 1)));
            };
            let mut probe = x0.clone();
            probe.push(0.0);
            let rest = built.psi()[0].evaluate(&probe)?;
            let sq = level - rest;
            if !(sq >= 0.0) {
                return Err(kv.field_err(
                    "level",
                    format!("level {level} is unreachable from x0 (needs x{n}² = {sq})"),
                ));
            }
            x0.push(sq.sqrt());
        } else if x0.len() != n {
            return Err(kv.field_err("x0", format!("expected {n} (or {}) entries, found {}", n - 1, x0.len())));
        }

        let per_decade = kv.count("checkpoints.per_decade")?.unwrap_or(10);
        if per_decade == 0 {
            return Err(kv.field_err("checkpoints.per_decade", "must be at least 1"));
        }
        let r_div = kv.real("r_div")?.unwrap_or(DEFAULT_R_DIV);
        if !(r_div > 0.0) {
            return Err(kv.field_err("r_div", "divergence radius must be positive"));
        }
        let label = kv.get("label").unwrap_or(kind.name()).to_string();
        let output = match kv.get("output") {
            Some(o) => base_dir.join(o),
            None => base_dir.join("out").join(&label),
        };
        Ok(ExperimentConfig {
            label,
            system_path,
            system,
            spec,
            x0,
            level,
            steps,
            per_decade,
            r_div,
            output,
        })
    }

    /// Config text that reproduces this run. Paths are written as given,
    /// after resolution against the original config directory; the initial
    /// state is written in full and `result.*` lines are appended by the caller.
    pub fn to_manifest(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "label = {}", self.label);
        let _ = writeln!(s, "system = {}", absolute(&self.system_path).display());
        for (k, v) in &self.system.params {
            let _ = writeln!(s, "param.{k} = {v:?}");
        }
        let _ = writeln!(s, "stepper = {}", self.spec.kind);
        let _ = writeln!(s, "tau = {:?}", self.spec.tau);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "fhat = {}", self.spec.fhat_form);
        let _ = writeln!(s, "newton.abs_tol = {:?}", self.spec.newton.abs_tol);
        let _ = writeln!(s, "newton.max_iters = {}", self.spec.newton.max_iters);
        let _ = writeln!(s, "newton.fd_step = {:?}", self.spec.newton.fd_step);
        let _ = writeln!(s, "newton.damping = {:?}", self.spec.newton.damping);
        let x0: Vec<String> = self.x0.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(s, "x0 = {}", x0.join(" "));
        if let Some(level) = self.level {
            let _ = writeln!(s, "level = {level:?}");
        }
        let _ = writeln!(s, "checkpoints.per_decade = {}", self.per_decade);
        let _ = writeln!(s, "r_div = {:?}", self.r_div);
        let _ = writeln!(s, "output = {}", absolute(&self.output).display());
        s
    }

    /// `b` for the elliptic geometry: the configured level, else `ψ(x0)`.
    pub fn elliptic_level(&self) -> Result<f64> {
        match self.level {
            Some(l) => Ok(l),
            None => Ok(self.system.build()?.eval_psi(&self.x0)?[0]),
        }
    }
}

fn absolute(p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir()
            .map(|d| d.join(p))
            .unwrap_or_else(|_| p.to_path_buf())
    }
}
