//! Drivers for the six experiment families. Each returns typed rows; [`run`] turns
//! them into the CSV tables written by [`execute`].

use std::path::{Path, PathBuf};

use super::config::{CalibrationMode, ExperimentConfig, ExperimentKind, PlatformSource};
use super::csv::{format_number, write_all, CsvTable};
use super::reference::reference_cluster;
use crate::constellation::{normalize, sample_cluster, scale_bandwidth, Cluster};
use crate::error::{Error, Result};
use crate::mpcc::{allocate, makespan_for_load, NormalizedPlatform};
use crate::rng::{stream_rng, Stream};
use crate::sim::{
    replicate, AdmissionPolicy, ArrivalEvent, Calibration, Decision, Horizon, ReplicationConfig, SimStats,
};
use crate::sizing::{n_min, DeadlineQuery};
use crate::workload::{
    builtin_classes, rt_class, RtClassName, RtTaskClass, TaskClass, TaskSource, WithSequentialFraction,
};

/// A cluster either in physical units, normalized per task, or already per unit load.
#[derive(Debug, Clone)]
pub enum PlatformModel {
    Physical(Cluster),
    Normalized(NormalizedPlatform),
}

impl PlatformModel {
    pub fn resolve(source: &PlatformSource) -> Result<Self> {
        Ok(match source {
            PlatformSource::Reference => PlatformModel::Physical(reference_cluster()),
            PlatformSource::ClusterFile(path) => PlatformModel::Physical(Cluster::load(path)?),
            PlatformSource::Sampled {
                neighbors,
                w_range,
                z_range,
                seed,
            } => PlatformModel::Normalized(sample_cluster(*neighbors, *w_range, *z_range, *seed)?),
        })
    }

    /// Per-unit-load parameters for compute intensity `ci`; sampled platforms ignore it.
    pub fn for_ci(&self, ci: f64) -> Result<NormalizedPlatform> {
        match self {
            PlatformModel::Physical(c) => normalize(c, ci),
            PlatformModel::Normalized(p) => Ok(p.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRow {
    pub class: String,
    pub load: f64,
    pub t_star: f64,
    pub makespan: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub class: String,
    pub load: f64,
    pub gamma: f64,
    pub beta: f64,
    pub ci: f64,
    pub t_star_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizingRow {
    pub n: usize,
    pub cumulative_g: f64,
    pub threshold: f64,
    pub feasible: bool,
}

/// One point of a real-time sweep; `x` is the offered load, `f` or bandwidth scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub class: String,
    pub x: f64,
    pub mean_blocking: f64,
    pub ci95: f64,
}

fn static_classes(config: &ExperimentConfig) -> Result<Vec<TaskClass>> {
    let all = match &config.class_file {
        Some(path) => TaskClass::load_file(path)?,
        None => builtin_classes(),
    };
    match &config.classes {
        None => Ok(all),
        Some(names) => names
            .iter()
            .map(|n| {
                all.iter()
                    .find(|c| &c.name == n)
                    .cloned()
                    .ok_or_else(|| Error::Domain(format!("unknown class {n:?}")))
            })
            .collect(),
    }
}

fn rt_classes(config: &ExperimentConfig) -> Result<Vec<RtTaskClass>> {
    let default: &[&str] = match config.experiment {
        ExperimentKind::RtSeqfrac => &["A", "D"],
        ExperimentKind::RtBandwidth => &["B", "C"],
        _ => &["A", "B", "C", "D"],
    };
    let names: Vec<String> = match &config.classes {
        Some(n) => n.clone(),
        None => default.iter().map(|s| s.to_string()).collect(),
    };
    names
        .iter()
        .map(|n| {
            let name: RtClassName = n.parse()?;
            rt_class(name).with_size_multiplier(config.size_multiplier)
        })
        .collect()
}

/// Representative task of every class at `base * m` for each load multiplier `m`.
pub fn scale_rows(config: &ExperimentConfig) -> Result<Vec<ScaleRow>> {
    let model = PlatformModel::resolve(&config.platform)?;
    let mut rows = Vec::new();
    for class in static_classes(config)? {
        let base = config.base_load.unwrap_or(class.load.lo());
        let probe = class.representative(base)?;
        let platform = model.for_ci(probe.ci)?;
        let alloc = allocate(&platform, &probe.divisibility())?;
        for &m in &config.load_multipliers {
            let load = base * m;
            rows.push(ScaleRow {
                class: class.name.clone(),
                load,
                t_star: alloc.t_star,
                makespan: makespan_for_load(&alloc, load)?,
            });
        }
    }
    rows.sort_by(|a, b| a.class.cmp(&b.class).then(a.load.total_cmp(&b.load)));
    Ok(rows)
}

/// `samples` random tasks per class; class `i` draws from workload seed `workload_seed + i`.
pub fn sensitivity_rows(config: &ExperimentConfig) -> Result<Vec<SensitivityRow>> {
    let model = PlatformModel::resolve(&config.platform)?;
    let mut rows = Vec::new();
    for (i, class) in static_classes(config)?.iter().enumerate() {
        let mut rng = stream_rng(config.workload_seed.wrapping_add(i as u64), Stream::Workload);
        for _ in 0..config.samples {
            let task = class.sample(&mut rng);
            let alloc = allocate(&model.for_ci(task.ci)?, &task.divisibility())?;
            rows.push(SensitivityRow {
                class: class.name.clone(),
                load: task.load,
                gamma: task.gamma,
                beta: task.beta,
                ci: task.ci,
                t_star_seconds: makespan_for_load(&alloc, task.load)?,
            });
        }
    }
    // stable: samples keep their draw order within a class
    rows.sort_by(|a, b| a.class.cmp(&b.class));
    Ok(rows)
}

/// Column means of the sensitivity rows, one row per class.
pub fn sensitivity_means(rows: &[SensitivityRow]) -> Vec<SensitivityRow> {
    let mut out: Vec<SensitivityRow> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for r in rows {
        match out.iter().position(|m| m.class == r.class) {
            Some(i) => {
                let m = &mut out[i];
                m.load += r.load;
                m.gamma += r.gamma;
                m.beta += r.beta;
                m.ci += r.ci;
                m.t_star_seconds += r.t_star_seconds;
                counts[i] += 1.0;
            }
            None => {
                out.push(r.clone());
                counts.push(1.0);
            }
        }
    }
    for (m, n) in out.iter_mut().zip(counts) {
        m.load /= n;
        m.gamma /= n;
        m.beta /= n;
        m.ci /= n;
        m.t_star_seconds /= n;
    }
    out
}

/// Cumulative contribution of the `n` best children against the deficit for a deadline
/// of `t_req_factor * w0`, for `n = 0..=N`.
pub fn sizing_rows(config: &ExperimentConfig) -> Result<Vec<SizingRow>> {
    let platform = PlatformModel::resolve(&config.platform)?.for_ci(config.ci)?;
    let t_req = config.t_req_factor * platform.w0();
    let report = n_min(&DeadlineQuery::new(t_req, platform, config.beta)?);
    let feasible = |c: f64| report.delta <= 0.0 || c >= report.delta;
    let mut rows = vec![SizingRow {
        n: 0,
        cumulative_g: 0.0,
        threshold: report.delta,
        feasible: feasible(0.0),
    }];
    rows.extend(report.cumulative.iter().enumerate().map(|(k, &c)| SizingRow {
        n: k + 1,
        cumulative_g: c,
        threshold: report.delta,
        feasible: feasible(c),
    }));
    Ok(rows)
}

fn rt_platform(config: &ExperimentConfig) -> Result<NormalizedPlatform> {
    PlatformModel::resolve(&config.platform)?.for_ci(config.ci)
}

struct RtContext {
    policy: AdmissionPolicy,
    horizon: Horizon,
}

impl RtContext {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        Ok(RtContext {
            policy: AdmissionPolicy::new(config.slack)?,
            horizon: Horizon::Arrivals(config.arrivals),
        })
    }

    fn replication<'a>(
        &self,
        config: &ExperimentConfig,
        platform: &'a NormalizedPlatform,
        source: &'a dyn TaskSource,
        offered_load: f64,
        calibration: Calibration<'a>,
    ) -> ReplicationConfig<'a> {
        ReplicationConfig {
            platform,
            source,
            policy: self.policy,
            offered_load,
            calibration,
            horizon: self.horizon,
            warmup_fraction: config.warmup_fraction,
            n_pilot: config.pilot,
        }
    }
}

/// Runs one sweep point over all seeds; the first point of the first class also
/// feeds the optional event log.
fn sweep_point(
    class: &str,
    x: f64,
    replication: &ReplicationConfig<'_>,
    seeds: &[u64],
    log: &mut Option<Vec<ArrivalEvent>>,
) -> Result<SweepRow> {
    if let Some(events) = log.as_mut().filter(|e| e.is_empty()) {
        replication.run_with_log(seeds[0], |e| events.push(*e))?;
    }
    let stats: SimStats = replicate(replication, seeds)?;
    Ok(SweepRow {
        class: class.to_string(),
        x,
        mean_blocking: stats.blocking_probability,
        ci95: stats.ci95_halfwidth,
    })
}

fn sort_sweep(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| a.class.cmp(&b.class).then(a.x.total_cmp(&b.x)));
}

/// Blocking against offered load, rate recalibrated at every load.
pub fn rt_load_rows(config: &ExperimentConfig, log: &mut Option<Vec<ArrivalEvent>>) -> Result<Vec<SweepRow>> {
    let platform = rt_platform(config)?;
    let ctx = RtContext::new(config)?;
    let mut rows = Vec::new();
    for class in rt_classes(config)? {
        for &a in &config.offered_loads {
            let r = ctx.replication(config, &platform, &class, a, Calibration::Own);
            rows.push(sweep_point(class.name(), a, &r, &config.seeds, log)?);
        }
    }
    sort_sweep(&mut rows);
    Ok(rows)
}

/// Blocking against the root-only fraction `f` at fixed offered load.
pub fn rt_seqfrac_rows(config: &ExperimentConfig, log: &mut Option<Vec<ArrivalEvent>>) -> Result<Vec<SweepRow>> {
    let platform = rt_platform(config)?;
    let ctx = RtContext::new(config)?;
    let reference_f = config.calibrate_at.unwrap_or(0.0);
    let mut rows = Vec::new();
    for class in rt_classes(config)? {
        let reference = WithSequentialFraction::new(class.clone(), reference_f)?;
        for &f in &config.f_values {
            let source = WithSequentialFraction::new(class.clone(), f)?;
            let calibration = match config.calibration {
                CalibrationMode::Own => Calibration::Own,
                CalibrationMode::Reference => Calibration::Reference {
                    platform: &platform,
                    source: &reference,
                },
            };
            let r = ctx.replication(config, &platform, &source, config.offered_load, calibration);
            rows.push(sweep_point(class.name(), f, &r, &config.seeds, log)?);
        }
    }
    sort_sweep(&mut rows);
    Ok(rows)
}

/// Blocking against an ISL bandwidth multiplier at fixed offered load.
pub fn rt_bandwidth_rows(config: &ExperimentConfig, log: &mut Option<Vec<ArrivalEvent>>) -> Result<Vec<SweepRow>> {
    let base = rt_platform(config)?;
    let ctx = RtContext::new(config)?;
    let reference = scale_bandwidth(&base, config.calibrate_at.unwrap_or(1.0))?;
    let scaled = config
        .bw_scales
        .iter()
        .map(|&s| scale_bandwidth(&base, s))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for class in rt_classes(config)? {
        for (&s, platform) in config.bw_scales.iter().zip(&scaled) {
            let calibration = match config.calibration {
                CalibrationMode::Own => Calibration::Own,
                CalibrationMode::Reference => Calibration::Reference {
                    platform: &reference,
                    source: &class,
                },
            };
            let r = ctx.replication(config, platform, &class, config.offered_load, calibration);
            rows.push(sweep_point(class.name(), s, &r, &config.seeds, log)?);
        }
    }
    sort_sweep(&mut rows);
    Ok(rows)
}

pub fn scale_table(rows: &[ScaleRow]) -> CsvTable {
    let mut t = CsvTable::new(&["class", "L", "t_star", "makespan"]);
    for r in rows {
        t.push(vec![
            r.class.clone(),
            format_number(r.load),
            format_number(r.t_star),
            format_number(r.makespan),
        ]);
    }
    t
}

pub fn sensitivity_table(rows: &[SensitivityRow]) -> CsvTable {
    let mut t = CsvTable::new(&["class", "L", "gamma", "beta", "ci", "t_star_seconds"]);
    for r in rows {
        t.push(vec![
            r.class.clone(),
            format_number(r.load),
            format_number(r.gamma),
            format_number(r.beta),
            format_number(r.ci),
            format_number(r.t_star_seconds),
        ]);
    }
    t
}

pub fn sizing_table(rows: &[SizingRow]) -> CsvTable {
    let mut t = CsvTable::new(&["n", "cumulative_g", "threshold", "feasible"]);
    for r in rows {
        t.push(vec![
            r.n.to_string(),
            format_number(r.cumulative_g),
            format_number(r.threshold),
            u8::from(r.feasible).to_string(),
        ]);
    }
    t
}

pub fn sweep_table(x_name: &str, rows: &[SweepRow]) -> CsvTable {
    let mut t = CsvTable::new(&["class", x_name, "mean_blocking", "ci95"]);
    for r in rows {
        t.push(vec![
            r.class.clone(),
            format_number(r.x),
            format_number(r.mean_blocking),
            format_number(r.ci95),
        ]);
    }
    t
}

pub fn event_table(events: &[ArrivalEvent]) -> CsvTable {
    let mut t = CsvTable::new(&[
        "index",
        "time",
        "service",
        "deadline",
        "predicted_finish",
        "decision",
        "warmup",
    ]);
    for e in events {
        t.push(vec![
            e.index.to_string(),
            format_number(e.time),
            format_number(e.service),
            format_number(e.deadline),
            format_number(e.predicted_finish),
            match e.decision {
                Decision::Admit => "admit".into(),
                Decision::Block => "block".into(),
            },
            u8::from(e.warmup).to_string(),
        ]);
    }
    t
}

/// `dir/stem_suffix.csv` next to `path`.
pub fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

/// Runs the configured experiment and returns every output table with its path.
/// Nothing is written.
pub fn run(config: &ExperimentConfig) -> Result<Vec<(PathBuf, CsvTable)>> {
    config.validate().map_err(Error::Domain)?;
    let output = config
        .output
        .clone()
        .ok_or_else(|| Error::Domain("no output path configured".into()))?;
    let mut log = config.event_log.as_ref().map(|_| Vec::new());
    let mut files = match config.experiment {
        ExperimentKind::Scale => vec![(output, scale_table(&scale_rows(config)?))],
        ExperimentKind::Sensitivity => {
            let rows = sensitivity_rows(config)?;
            let means = sibling_path(&output, "means");
            vec![
                (output, sensitivity_table(&rows)),
                (means, sensitivity_table(&sensitivity_means(&rows))),
            ]
        }
        ExperimentKind::Sizing => vec![(output, sizing_table(&sizing_rows(config)?))],
        ExperimentKind::RtLoad => vec![(output, sweep_table("a", &rt_load_rows(config, &mut log)?))],
        ExperimentKind::RtSeqfrac => vec![(output, sweep_table("f", &rt_seqfrac_rows(config, &mut log)?))],
        ExperimentKind::RtBandwidth => vec![(output, sweep_table("bw_scale", &rt_bandwidth_rows(config, &mut log)?))],
    };
    if let (Some(path), Some(events)) = (&config.event_log, log) {
        files.push((path.clone(), event_table(&events)));
    }
    Ok(files)
}

/// Runs and writes all outputs, or none of them.
pub fn execute(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let files = run(config)?;
    write_all(&files)?;
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
