use crate::error::{Error, Result};
use crate::mpcc::NormalizedPlatform;
use crate::rng::{stream_rng, Stream};
use crate::workload::TaskSource;

use super::{
    calibrate_lambda, run_simulation_with_log, AdmissionPolicy, ArrivalEvent, ArrivalProcess, Horizon, SimSeeds,
    SimStats,
};

/// Where the arrival rate for a target offered load is calibrated.
#[derive(Clone, Copy)]
pub enum Calibration<'a> {
    /// Against the configuration's own platform and task source.
    Own,
    /// Against a fixed reference, so that sweeping the platform or the tasks changes
    /// the load a given arrival stream imposes.
    Reference {
        platform: &'a NormalizedPlatform,
        source: &'a dyn TaskSource,
    },
}

/// Everything one replication needs apart from its seed.
#[derive(Clone, Copy)]
pub struct ReplicationConfig<'a> {
    pub platform: &'a NormalizedPlatform,
    pub source: &'a dyn TaskSource,
    pub policy: AdmissionPolicy,
    pub offered_load: f64,
    pub calibration: Calibration<'a>,
    pub horizon: Horizon,
    pub warmup_fraction: f64,
    pub n_pilot: usize,
}

impl ReplicationConfig<'_> {
    /// Calibrates the arrival rate from the seed's pilot stream, then runs.
    pub fn run(&self, seed: u64) -> Result<SimStats> {
        self.run_with_log(seed, |_| {})
    }

    /// As [`ReplicationConfig::run`], reporting every arrival to `log`.
    pub fn run_with_log<F: FnMut(&ArrivalEvent)>(&self, seed: u64, log: F) -> Result<SimStats> {
        let (ref_platform, ref_source) = match self.calibration {
            Calibration::Own => (self.platform, self.source),
            Calibration::Reference { platform, source } => (platform, source),
        };
        let mut pilot = stream_rng(seed, Stream::Pilot);
        let lambda = calibrate_lambda(self.offered_load, ref_source, ref_platform, self.n_pilot, &mut pilot)?;
        let arrivals = ArrivalProcess::new(lambda, self.horizon)?.with_warmup(self.warmup_fraction)?;
        run_simulation_with_log(
            self.platform,
            self.source,
            &self.policy,
            &arrivals,
            SimSeeds::from_replication(seed),
            log,
        )
    }
}

/// Pools per-seed results: counts are summed, blocking probability is the mean of the
/// per-seed values with a 95% normal-approximation half-width, and latency is
/// weighted by admitted count.
pub fn aggregate(runs: &[SimStats]) -> Result<SimStats> {
    if runs.len() < 2 {
        return Err(Error::domain(format!(
            "at least 2 replications are required, got {}",
            runs.len()
        )));
    }
    let n = runs.len() as f64;
    let mean = runs.iter().map(|r| r.blocking_probability).sum::<f64>() / n;
    let var = runs
        .iter()
        .map(|r| (r.blocking_probability - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    let admitted: u64 = runs.iter().map(|r| r.admitted).sum();
    let latency = if admitted == 0 {
        0.0
    } else {
        runs.iter()
            .map(|r| r.mean_admitted_latency * r.admitted as f64)
            .sum::<f64>()
            / admitted as f64
    };
    Ok(SimStats {
        arrivals: runs.iter().map(|r| r.arrivals).sum(),
        admitted,
        blocked: runs.iter().map(|r| r.blocked).sum(),
        blocking_probability: mean,
        ci95_halfwidth: 1.96 * (var / n).sqrt(),
        mean_admitted_latency: latency,
    })
}

fn check_seeds(seeds: &[u64]) -> Result<()> {
    if seeds.len() < 2 {
        return Err(Error::domain(format!(
            "at least 2 seeds are required, got {}",
            seeds.len()
        )));
    }
    Ok(())
}

pub fn replicate_sequential(config: &ReplicationConfig<'_>, seeds: &[u64]) -> Result<SimStats> {
    check_seeds(seeds)?;
    let runs = seeds.iter().map(|&s| config.run(s)).collect::<Result<Vec<_>>>()?;
    aggregate(&runs)
}

/// Runs seeds on the rayon pool. Results are collected in seed order, so the
/// aggregate is bit-identical to [`replicate_sequential`].
#[cfg(feature = "parallel")]
pub fn replicate_parallel(config: &ReplicationConfig<'_>, seeds: &[u64]) -> Result<SimStats> {
    use rayon::prelude::*;

    check_seeds(seeds)?;
    let runs = seeds.par_iter().map(|&s| config.run(s)).collect::<Result<Vec<_>>>()?;
    aggregate(&runs)
}

/// Parallel across seeds when the `parallel` feature is on, sequential otherwise.
pub fn replicate(config: &ReplicationConfig<'_>, seeds: &[u64]) -> Result<SimStats> {
    #[cfg(feature = "parallel")]
    {
        replicate_parallel(config, seeds)
    }
    #[cfg(not(feature = "parallel"))]
    {
        replicate_sequential(config, seeds)
    }
}
