//! Application task classes and randomized task generation.
//!
//! Size `L` and compute intensity are drawn log-uniformly (their ranges span one to two
//! decades); `gamma` and `beta` are drawn uniformly. The root-only fraction defaults to
//! `f = 1 - gamma` and can be overridden per source with [`WithSequentialFraction`].
//!
//! Class override files use one class per line:
//!
//! ```text
//! class iot_agg gamma=0.6:0.8 beta=0.05:0.15 L=1e2:1e3 ci=1e6:1e7
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::RngCore;

use crate::constellation::strip_comment;
use crate::error::{ensure_finite, Error, Result};
use crate::interval::Interval;
use crate::mpcc::DivisibilitySpec;

/// One divisible task instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskSpec {
    /// Size in MB (or in base-load units for normalized real-time classes).
    pub load: f64,
    /// Flops per MB.
    pub ci: f64,
    pub gamma: f64,
    pub beta: f64,
    pub f: f64,
}

impl TaskSpec {
    /// A task with the default root-only fraction `f = 1 - gamma`.
    pub fn new(load: f64, ci: f64, gamma: f64, beta: f64) -> Result<Self> {
        TaskSpec::with_f(load, ci, gamma, beta, 1.0 - gamma)
    }

    pub fn with_f(load: f64, ci: f64, gamma: f64, beta: f64, f: f64) -> Result<Self> {
        for (name, v) in [("L", load), ("ci", ci), ("gamma", gamma), ("beta", beta), ("f", f)] {
            ensure_finite(name, v)?;
        }
        if load <= 0.0 || ci <= 0.0 {
            return Err(Error::domain(format!("L and ci must be > 0, got L={load} ci={ci}")));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::domain(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        let spec = DivisibilitySpec::new(f, beta)?;
        Ok(TaskSpec {
            load,
            ci,
            gamma,
            beta: spec.beta(),
            f: spec.f(),
        })
    }

    pub fn divisibility(&self) -> DivisibilitySpec {
        DivisibilitySpec::new(self.f, self.beta).expect("validated on construction")
    }
}

/// Anything that can draw a task from a random stream.
pub trait TaskSource: Send + Sync {
    fn sample(&self, rng: &mut dyn RngCore) -> TaskSpec;

    fn name(&self) -> &str;
}

/// Parameter ranges for one application class.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskClass {
    pub name: String,
    pub load: Interval,
    pub ci: Interval,
    pub gamma: Interval,
    pub beta: Interval,
}

impl TaskClass {
    pub fn new(name: impl Into<String>, load: Interval, ci: Interval, gamma: Interval, beta: Interval) -> Result<Self> {
        let name = name.into();
        if !(load.is_positive() && ci.is_positive() && gamma.is_positive() && beta.is_positive()) {
            return Err(Error::domain(format!("class {name}: all bounds must be positive")));
        }
        if gamma.hi() >= 1.0 || beta.hi() >= 1.0 {
            return Err(Error::domain(format!(
                "class {name}: gamma and beta must lie in (0, 1)"
            )));
        }
        Ok(TaskClass {
            name,
            load,
            ci,
            gamma,
            beta,
        })
    }

    /// A fixed-semantics task: range midpoints for `gamma`/`beta`, geometric midpoint for `ci`.
    pub fn representative(&self, load: f64) -> Result<TaskSpec> {
        TaskSpec::new(
            load,
            self.ci.geometric_midpoint(),
            self.gamma.midpoint(),
            self.beta.midpoint(),
        )
    }

    pub fn parse_line(line: &str) -> std::result::Result<Self, String> {
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("class") {
            return Err(format!("expected `class <name> ...`, got {line:?}"));
        }
        let name = tokens.next().ok_or("missing class name")?;
        let (mut gamma, mut beta, mut load, mut ci) = (None, None, None, None);
        for tok in tokens {
            let (key, value) = tok.split_once('=').ok_or_else(|| format!("unknown token {tok:?}"))?;
            let iv = Interval::from_str(value).map_err(|e| format!("{key}: {e}"))?;
            match key {
                "gamma" => gamma = Some(iv),
                "beta" => beta = Some(iv),
                "L" => load = Some(iv),
                "ci" => ci = Some(iv),
                _ => return Err(format!("unknown key {key:?}")),
            }
        }
        let need = |v: Option<Interval>, k: &str| v.ok_or_else(|| format!("class {name} is missing {k}="));
        TaskClass::new(
            name,
            need(load, "L")?,
            need(ci, "ci")?,
            need(gamma, "gamma")?,
            need(beta, "beta")?,
        )
        .map_err(|e| e.to_string())
    }

    pub fn parse_file(text: &str, source_name: &str) -> Result<Vec<Self>> {
        let mut classes = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            classes.push(TaskClass::parse_line(line).map_err(|m| Error::parse(source_name, idx + 1, m))?);
        }
        Ok(classes)
    }

    pub fn load_file(path: &Path) -> Result<Vec<Self>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TaskClass::parse_file(&text, &path.display().to_string())
    }
}

impl TaskSource for TaskClass {
    fn sample(&self, rng: &mut dyn RngCore) -> TaskSpec {
        let load = self.load.sample_log_uniform(rng);
        let ci = self.ci.sample_log_uniform(rng);
        let gamma = self.gamma.sample_uniform(rng);
        let beta = self.beta.sample_uniform(rng);
        TaskSpec::new(load, ci, gamma, beta).expect("class ranges validated on construction")
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// The four application classes with their published parameter ranges.
pub fn builtin_classes() -> Vec<TaskClass> {
    let iv = |lo: f64, hi: f64| Interval::new(lo, hi).expect("static range");
    let class = |name: &str, l: Interval, ci: Interval, g: Interval, b: Interval| {
        TaskClass::new(name, l, ci, g, b).expect("static class")
    };
    vec![
        class("iot_agg", iv(1e2, 1e3), iv(1e6, 1e7), iv(0.6, 0.8), iv(0.05, 0.15)),
        class("ai_inf", iv(1e2, 1e4), iv(1e8, 1e9), iv(0.7, 0.9), iv(0.1, 0.3)),
        class("img_sig_pre", iv(1e3, 1e4), iv(1e7, 1e8), iv(0.5, 0.7), iv(0.05, 0.2)),
        class("sci_data", iv(1e3, 1e5), iv(1e8, 1e10), iv(0.4, 0.6), iv(0.1, 0.25)),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RtClassName {
    A,
    B,
    C,
    D,
}

impl fmt::Display for RtClassName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RtClassName::A => "A",
            RtClassName::B => "B",
            RtClassName::C => "C",
            RtClassName::D => "D",
        };
        f.write_str(s)
    }
}

impl FromStr for RtClassName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.trim_start_matches("class").trim_start_matches('_') {
            "a" => Ok(RtClassName::A),
            "b" => Ok(RtClassName::B),
            "c" => Ok(RtClassName::C),
            "d" => Ok(RtClassName::D),
            _ => Err(Error::domain(format!(
                "unknown real-time class {s:?} (expected A, B, C or D)"
            ))),
        }
    }
}

/// Default task size multiplier, log-uniform on a unit base load.
pub const DEFAULT_SIZE_MULTIPLIER: (f64, f64) = (0.5, 2.0);

/// Real-time task class with fixed `gamma` and `beta`. Tasks are expressed on an
/// already-normalized platform, so their size is `base_load * multiplier` units and
/// `ci` is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RtTaskClass {
    pub name: RtClassName,
    pub gamma: f64,
    pub beta: f64,
    pub size_multiplier: Interval,
    pub base_load: f64,
    label: String,
}

impl RtTaskClass {
    pub fn new(name: RtClassName, gamma: f64, beta: f64, size_multiplier: Interval) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0 && beta > 0.0 && beta < 1.0) {
            return Err(Error::domain(format!(
                "class {name}: gamma and beta must lie in (0, 1)"
            )));
        }
        if !size_multiplier.is_positive() {
            return Err(Error::domain(format!("class {name}: size multiplier must be positive")));
        }
        Ok(RtTaskClass {
            name,
            gamma,
            beta,
            size_multiplier,
            base_load: 1.0,
            label: name.to_string(),
        })
    }

    pub fn with_size_multiplier(mut self, range: Interval) -> Result<Self> {
        if !range.is_positive() {
            return Err(Error::domain("size multiplier must be positive"));
        }
        self.size_multiplier = range;
        Ok(self)
    }
}

impl TaskSource for RtTaskClass {
    fn sample(&self, rng: &mut dyn RngCore) -> TaskSpec {
        let load = self.base_load * self.size_multiplier.sample_log_uniform(rng);
        TaskSpec::new(load, 1.0, self.gamma, self.beta).expect("class validated on construction")
    }

    fn name(&self) -> &str {
        &self.label
    }
}

/// The four real-time classes: A (0.8, 0.10), B (0.8, 0.20), C (0.6, 0.40), D (0.35, 0.10).
pub fn builtin_rt_classes() -> Vec<RtTaskClass> {
    let m = Interval::new(DEFAULT_SIZE_MULTIPLIER.0, DEFAULT_SIZE_MULTIPLIER.1).expect("static range");
    [
        (RtClassName::A, 0.8, 0.10),
        (RtClassName::B, 0.8, 0.20),
        (RtClassName::C, 0.6, 0.40),
        (RtClassName::D, 0.35, 0.10),
    ]
    .into_iter()
    .map(|(n, g, b)| RtTaskClass::new(n, g, b, m).expect("static class"))
    .collect()
}

pub fn rt_class(name: RtClassName) -> RtTaskClass {
    builtin_rt_classes()
        .into_iter()
        .find(|c| c.name == name)
        .expect("all names are built in")
}

/// Wraps a source and replaces every sampled task's root-only fraction with `f`.
#[derive(Debug, Clone)]
pub struct WithSequentialFraction<S> {
    inner: S,
    f: f64,
}

impl<S: TaskSource> WithSequentialFraction<S> {
    pub fn new(inner: S, f: f64) -> Result<Self> {
        DivisibilitySpec::new(f, 0.0)?;
        Ok(WithSequentialFraction { inner, f })
    }
}

impl<S: TaskSource> TaskSource for WithSequentialFraction<S> {
    fn sample(&self, rng: &mut dyn RngCore) -> TaskSpec {
        TaskSpec {
            f: self.f,
            ..self.inner.sample(rng)
        }
    }

    fn name(&self) -> &str {
        self.inner.name()
    }
}

/// Draws one task; identical to `class.sample(rng)`.
pub fn sample_task<S: TaskSource + ?Sized>(class: &S, rng: &mut dyn RngCore) -> TaskSpec {
    class.sample(rng)
}
