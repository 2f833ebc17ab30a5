//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # blocking against offered load
//! experiment = rt-load
//! output = out/rt_load.csv
//! seeds = 1..=20
//! offered_loads = 0.3, 0.7, 1.2
//! ```
//!
//! Lists are comma separated, ranges are `lo:hi`, and seed sets are either a list or a
//! Rust-style range (`1..21` or `1..=20`). Relative paths are resolved against the
//! directory of the config file. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::constellation::strip_comment;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::sim::{DEFAULT_ARRIVALS, DEFAULT_SLACK, DEFAULT_WARMUP_FRACTION, MIN_PILOT_SAMPLES};
use crate::workload::DEFAULT_SIZE_MULTIPLIER;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Scale,
    Sensitivity,
    Sizing,
    RtLoad,
    RtSeqfrac,
    RtBandwidth,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Scale,
        ExperimentKind::Sensitivity,
        ExperimentKind::Sizing,
        ExperimentKind::RtLoad,
        ExperimentKind::RtSeqfrac,
        ExperimentKind::RtBandwidth,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Scale => "scale",
            ExperimentKind::Sensitivity => "sensitivity",
            ExperimentKind::Sizing => "sizing",
            ExperimentKind::RtLoad => "rt-load",
            ExperimentKind::RtSeqfrac => "rt-seqfrac",
            ExperimentKind::RtBandwidth => "rt-bandwidth",
        }
    }

    pub fn is_real_time(self) -> bool {
        matches!(
            self,
            ExperimentKind::RtLoad | ExperimentKind::RtSeqfrac | ExperimentKind::RtBandwidth
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.as_str()).collect();
                format!("unknown experiment {s:?}; expected one of {}", known.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlatformSource {
    /// The built-in 13-node physical topology.
    Reference,
    /// A cluster file.
    ClusterFile(PathBuf),
    /// Per-unit-load parameters drawn uniformly; independent of compute intensity.
    Sampled {
        neighbors: usize,
        w_range: Interval,
        z_range: Interval,
        seed: u64,
    },
}

/// How real-time sweeps turn the target offered load into an arrival rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationMode {
    /// Recalibrate at every sweep point.
    Own,
    /// Calibrate once at `calibrate_at` and hold the rate across the sweep.
    Reference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub output: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub platform: PlatformSource,
    /// Compute intensity (Flops/MB) used to normalize a physical cluster for sizing.
    pub ci: f64,

    /// Class names to run; `None` means the experiment's default set.
    pub classes: Option<Vec<String>>,
    pub class_file: Option<PathBuf>,

    pub load_multipliers: Vec<f64>,
    /// Base load for the scale grid; defaults to each class's smallest load.
    pub base_load: Option<f64>,

    pub samples: usize,
    pub workload_seed: u64,

    pub t_req_factor: f64,
    pub beta: f64,

    pub offered_loads: Vec<f64>,
    pub offered_load: f64,
    pub f_values: Vec<f64>,
    pub bw_scales: Vec<f64>,
    pub calibration: CalibrationMode,
    /// Sweep value the rate is calibrated at; 0 for `f`, 1 for bandwidth scale.
    pub calibrate_at: Option<f64>,
    pub slack: f64,
    pub arrivals: usize,
    pub warmup_fraction: f64,
    pub pilot: usize,
    pub size_multiplier: Interval,
    pub event_log: Option<PathBuf>,
}

pub const DEFAULT_W_RANGE: (f64, f64) = (0.02, 0.08);
pub const DEFAULT_Z_RANGE: (f64, f64) = (0.01, 0.06);
pub const DEFAULT_NEIGHBORS: usize = 12;
pub const DEFAULT_PLATFORM_SEED: u64 = 42;
pub const DEFAULT_T_REQ_FACTOR: f64 = 0.6;
pub const DEFAULT_PILOT: usize = 2000;

const KEYS: &[&str] = &[
    "experiment",
    "output",
    "seeds",
    "platform",
    "cluster_file",
    "ci",
    "neighbors",
    "w_range",
    "z_range",
    "platform_seed",
    "classes",
    "class_file",
    "load_multipliers",
    "base_load",
    "samples",
    "workload_seed",
    "t_req_factor",
    "beta",
    "offered_loads",
    "offered_load",
    "f_values",
    "bw_scales",
    "calibration",
    "calibrate_at",
    "slack",
    "arrivals",
    "warmup_fraction",
    "pilot",
    "size_multiplier",
    "event_log",
];

impl ExperimentConfig {
    /// Defaults for `experiment`, before any keys are applied.
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let platform = if experiment.is_real_time() {
            PlatformSource::Sampled {
                neighbors: DEFAULT_NEIGHBORS,
                w_range: Interval::new(DEFAULT_W_RANGE.0, DEFAULT_W_RANGE.1).expect("valid"),
                z_range: Interval::new(DEFAULT_Z_RANGE.0, DEFAULT_Z_RANGE.1).expect("valid"),
                seed: DEFAULT_PLATFORM_SEED,
            }
        } else {
            PlatformSource::Reference
        };
        ExperimentConfig {
            experiment,
            output: None,
            seeds: (1..=20).collect(),
            platform,
            ci: 1e8,
            classes: None,
            class_file: None,
            load_multipliers: vec![1.0, 2.0, 4.0, 8.0],
            base_load: None,
            samples: 12,
            workload_seed: 1,
            t_req_factor: DEFAULT_T_REQ_FACTOR,
            beta: 0.1,
            offered_loads: vec![0.3, 0.7, 1.2],
            offered_load: 0.7,
            f_values: (0..=6).map(|i| i as f64 / 10.0).collect(),
            bw_scales: vec![0.5, 1.0, 2.0, 4.0],
            calibration: CalibrationMode::Reference,
            calibrate_at: None,
            slack: DEFAULT_SLACK,
            arrivals: DEFAULT_ARRIVALS,
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
            pilot: DEFAULT_PILOT,
            size_multiplier: Interval::new(DEFAULT_SIZE_MULTIPLIER.0, DEFAULT_SIZE_MULTIPLIER.1).expect("valid"),
            event_log: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::parse(&text, &path.display().to_string())?;
        if let Some(dir) = path.parent() {
            config.resolve_paths(dir);
        }
        Ok(config)
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source_name, line_no, format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::parse(source_name, line_no, format!("unknown key {key:?}")));
            }
            if let Some((first, _)) = entries.insert(key, (line_no, value)) {
                return Err(Error::parse(
                    source_name,
                    line_no,
                    format!("duplicate key {key:?} (first set on line {first})"),
                ));
            }
        }

        let (line, kind) = entries.get("experiment").copied().ok_or_else(|| {
            Error::parse(
                source_name,
                text.lines().count().max(1),
                "missing required key `experiment`",
            )
        })?;
        let kind: ExperimentKind = kind.parse().map_err(|m: String| Error::parse(source_name, line, m))?;
        let mut c = Self::defaults(kind);

        let mut neighbors = DEFAULT_NEIGHBORS;
        let mut w_range = Interval::new(DEFAULT_W_RANGE.0, DEFAULT_W_RANGE.1)?;
        let mut z_range = Interval::new(DEFAULT_Z_RANGE.0, DEFAULT_Z_RANGE.1)?;
        let mut platform_seed = DEFAULT_PLATFORM_SEED;
        let mut platform_kind: Option<(usize, &str)> = None;
        let mut cluster_file = None;

        for (&key, &(line, value)) in &entries {
            let err = |m: String| Error::parse(source_name, line, format!("{key}: {m}"));
            match key {
                "experiment" => {}
                "output" => c.output = Some(PathBuf::from(value)),
                "seeds" => c.seeds = parse_seeds(value).map_err(err)?,
                "platform" => platform_kind = Some((line, value)),
                "cluster_file" => cluster_file = Some(PathBuf::from(value)),
                "ci" => c.ci = positive(value).map_err(err)?,
                "neighbors" => neighbors = number(value).map_err(err)?,
                "w_range" => w_range = interval(value).map_err(err)?,
                "z_range" => z_range = interval(value).map_err(err)?,
                "platform_seed" => platform_seed = number(value).map_err(err)?,
                "classes" => c.classes = Some(list(value).map_err(err)?),
                "class_file" => c.class_file = Some(PathBuf::from(value)),
                "load_multipliers" => c.load_multipliers = positive_list(value).map_err(err)?,
                "base_load" => c.base_load = Some(positive(value).map_err(err)?),
                "samples" => c.samples = number(value).map_err(err)?,
                "workload_seed" => c.workload_seed = number(value).map_err(err)?,
                "t_req_factor" => c.t_req_factor = positive(value).map_err(err)?,
                "beta" => c.beta = number(value).map_err(err)?,
                "offered_loads" => c.offered_loads = positive_list(value).map_err(err)?,
                "offered_load" => c.offered_load = positive(value).map_err(err)?,
                "f_values" => c.f_values = number_list(value).map_err(err)?,
                "bw_scales" => c.bw_scales = positive_list(value).map_err(err)?,
                "calibration" => {
                    c.calibration = match value {
                        "own" => CalibrationMode::Own,
                        "reference" => CalibrationMode::Reference,
                        _ => return Err(err(format!("expected `own` or `reference`, got {value:?}"))),
                    }
                }
                "calibrate_at" => c.calibrate_at = Some(number(value).map_err(err)?),
                "slack" => c.slack = positive(value).map_err(err)?,
                "arrivals" => c.arrivals = number(value).map_err(err)?,
                "warmup_fraction" => c.warmup_fraction = number(value).map_err(err)?,
                "pilot" => c.pilot = number(value).map_err(err)?,
                "size_multiplier" => c.size_multiplier = interval(value).map_err(err)?,
                "event_log" => c.event_log = Some(PathBuf::from(value)),
                _ => unreachable!("key list and match arms agree"),
            }
        }

        c.platform = match platform_kind {
            None if cluster_file.is_some() => PlatformSource::ClusterFile(cluster_file.take().expect("checked")),
            None => c.platform,
            Some((_, "reference")) => PlatformSource::Reference,
            Some((_, "sampled")) => PlatformSource::Sampled {
                neighbors,
                w_range,
                z_range,
                seed: platform_seed,
            },
            Some((line, "file")) => PlatformSource::ClusterFile(
                cluster_file
                    .take()
                    .ok_or_else(|| Error::parse(source_name, line, "platform = file needs cluster_file"))?,
            ),
            Some((line, other)) => {
                return Err(Error::parse(
                    source_name,
                    line,
                    format!("platform: expected reference, sampled or file, got {other:?}"),
                ))
            }
        };
        if let PlatformSource::Sampled {
            neighbors: n,
            w_range: w,
            z_range: z,
            seed,
        } = &mut c.platform
        {
            // keys given without `platform = sampled` still refine the default sampler
            *n = neighbors;
            *w = w_range;
            *z = z_range;
            *seed = platform_seed;
        }

        c.validate().map_err(|m| Error::parse(source_name, line, m))?;
        Ok(c)
    }

    /// Checks grid and parameter ranges. Messages are suitable for a parse error.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let nonempty = |name: &str, v: &[f64]| {
            if v.is_empty() {
                Err(format!("{name} must not be empty"))
            } else {
                Ok(())
            }
        };
        nonempty("load_multipliers", &self.load_multipliers)?;
        nonempty("offered_loads", &self.offered_loads)?;
        nonempty("f_values", &self.f_values)?;
        nonempty("bw_scales", &self.bw_scales)?;
        if self.seeds.is_empty() {
            return Err("seeds must not be empty".into());
        }
        if self.experiment.is_real_time() && self.seeds.len() < 2 {
            return Err("real-time experiments need at least 2 seeds".into());
        }
        if let Some(v) = self.f_values.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(format!("f_values entries must lie in [0, 1], got {v}"));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(format!("beta must lie in [0, 1], got {}", self.beta));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(format!(
                "warmup_fraction must lie in [0, 1), got {}",
                self.warmup_fraction
            ));
        }
        if self.samples == 0 {
            return Err("samples must be at least 1".into());
        }
        if self.arrivals == 0 {
            return Err("arrivals must be at least 1".into());
        }
        if self.pilot < MIN_PILOT_SAMPLES {
            return Err(format!("pilot must be at least {MIN_PILOT_SAMPLES}"));
        }
        if !self.size_multiplier.is_positive() {
            return Err("size_multiplier must be positive".into());
        }
        Ok(())
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let Some(p) = self.output.as_mut() {
            fix(p);
        }
        if let Some(p) = self.class_file.as_mut() {
            fix(p);
        }
        if let Some(p) = self.event_log.as_mut() {
            fix(p);
        }
        if let PlatformSource::ClusterFile(p) = &mut self.platform {
            fix(p);
        }
    }
}

fn number<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse::<T>().map_err(|_| format!("cannot parse {v:?}"))
}

fn positive(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = number(v)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be a positive number, got {v:?}"))
    }
}

fn interval(v: &str) -> std::result::Result<Interval, String> {
    v.parse::<Interval>().map_err(|e| e.to_string())
}

fn list(v: &str) -> std::result::Result<Vec<String>, String> {
    let items: Vec<String> = v.split(',').map(|s| s.trim().to_string()).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(format!("empty entry in list {v:?}"));
    }
    Ok(items)
}

fn number_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    list(v)?.iter().map(|s| number::<f64>(s)).collect()
}

fn positive_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    list(v)?.iter().map(|s| positive(s)).collect()
}

/// `1,2,5`, `1..21` or `1..=20`.
pub fn parse_seeds(v: &str) -> std::result::Result<Vec<u64>, String> {
    let seeds: Vec<u64> = if let Some((lo, hi)) = v.split_once("..=") {
        (number(lo.trim())?..=number(hi.trim())?).collect()
    } else if let Some((lo, hi)) = v.split_once("..") {
        (number(lo.trim())?..number(hi.trim())?).collect()
    } else {
        list(v)?
            .iter()
            .map(|s| number(s))
            .collect::<std::result::Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(format!("seed set {v:?} is empty"));
    }
    Ok(seeds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_experiment() {
        let c = ExperimentConfig::parse("experiment = rt-load\n", "c").unwrap();
        assert_eq!(c.seeds.len(), 20);
        assert!(matches!(
            c.platform,
            PlatformSource::Sampled {
                neighbors: 12,
                seed: 42,
                ..
            }
        ));
        let c = ExperimentConfig::parse("experiment = scale\n", "c").unwrap();
        assert_eq!(c.platform, PlatformSource::Reference);
    }

    #[test]
    fn keys_and_lists() {
        let text = "\
# comment
experiment = rt-seqfrac   # trailing comment
seeds = 3..=6
f_values = 0, 0.2,0.4
classes = A, D
platform_seed = 7
calibration = own
output = out.csv
";
        let c = ExperimentConfig::parse(text, "c").unwrap();
        assert_eq!(c.experiment, ExperimentKind::RtSeqfrac);
        assert_eq!(c.seeds, vec![3, 4, 5, 6]);
        assert_eq!(c.f_values, vec![0.0, 0.2, 0.4]);
        assert_eq!(c.classes, Some(vec!["A".to_string(), "D".to_string()]));
        assert!(matches!(c.platform, PlatformSource::Sampled { seed: 7, .. }));
        assert_eq!(c.calibration, CalibrationMode::Own);
        assert_eq!(c.output, Some(PathBuf::from("out.csv")));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line_of = |text: &str| match ExperimentConfig::parse(text, "c") {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(line_of("experiment = scale\nbogus = 1\n"), 2);
        assert_eq!(line_of("experiment = scale\n\nseeds = x\n"), 3);
        assert_eq!(line_of("# x\nexperiment = fig7\n"), 2);
        assert_eq!(line_of("experiment = scale\nno equals sign\n"), 2);
        assert_eq!(line_of("experiment = scale\nslack = 1\nslack = 2\n"), 3);
        assert_eq!(line_of("experiment = rt-load\nbw_scales = 1,-2\n"), 2);
        assert!(ExperimentConfig::parse("seeds = 1\n", "c").is_err());
        assert!(ExperimentConfig::parse("experiment = rt-load\nseeds = 1\n", "c").is_err());
        assert!(ExperimentConfig::parse("experiment = scale\nplatform = file\n", "c").is_err());
    }

    #[test]
    fn seed_sets() {
        assert_eq!(parse_seeds("1..4").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("1..=3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("9, 2").unwrap(), vec![9, 2]);
        assert!(parse_seeds("4..4").is_err());
        assert!(parse_seeds("a..b").is_err());
    }

    #[test]
    fn paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        std::fs::write(&path, "experiment = scale\noutput = o.csv\ncluster_file = /abs/x.txt\n").unwrap();
        let c = ExperimentConfig::load(&path).unwrap();
        assert_eq!(c.output, Some(dir.path().join("o.csv")));
        assert_eq!(c.platform, PlatformSource::ClusterFile(PathBuf::from("/abs/x.txt")));
    }
}
