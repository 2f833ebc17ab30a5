//! Real-time admission control under Poisson arrivals.
//!
//! Each arriving task is priced in isolation with the closed-form allocation
//! (`S = L * T*`) and given the relative deadline `T_req = (1 + slack) * S`. Under the
//! exclusive-cluster occupancy model an admitted task holds the whole star until its
//! makespan elapses, so the admission test reduces to a single busy-until horizon:
//! admit iff `max(t, busy_until) + S <= t + T_req`. Blocked tasks are dropped.

mod replicate;

#[cfg(feature = "parallel")]
pub use replicate::replicate_parallel;
pub use replicate::{aggregate, replicate, replicate_sequential, Calibration, ReplicationConfig};

use rand::RngCore;
use rand_distr::{Distribution, Exp};

use crate::error::{ensure_finite, Error, Result};
use crate::mpcc::{allocate, NormalizedPlatform};
use crate::rng::{stream_rng, Stream};
use crate::workload::{TaskSource, TaskSpec};

pub const DEFAULT_SLACK: f64 = 0.5;
pub const DEFAULT_WARMUP_FRACTION: f64 = 0.1;
pub const DEFAULT_ARRIVALS: usize = 10_000;
pub const MIN_PILOT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// Stop after this many arrivals.
    Arrivals(usize),
    /// Stop at the first arrival past this time, in seconds.
    Duration(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalProcess {
    rate: f64,
    pub horizon: Horizon,
    /// Leading share of the horizon excluded from statistics.
    pub warmup_fraction: f64,
}

impl ArrivalProcess {
    pub fn new(rate: f64, horizon: Horizon) -> Result<Self> {
        ensure_finite("arrival rate", rate)?;
        if rate <= 0.0 {
            return Err(Error::domain(format!("arrival rate must be > 0, got {rate}")));
        }
        if let Horizon::Duration(d) = horizon {
            ensure_finite("horizon", d)?;
            if d <= 0.0 {
                return Err(Error::domain("horizon duration must be > 0"));
            }
        }
        Ok(ArrivalProcess {
            rate,
            horizon,
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
        })
    }

    pub fn with_warmup(mut self, fraction: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::domain(format!(
                "warmup fraction must lie in [0, 1), got {fraction}"
            )));
        }
        self.warmup_fraction = fraction;
        Ok(self)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccupancyModel {
    /// One admitted task holds every node until its makespan elapses.
    ExclusiveCluster,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissionPolicy {
    slack: f64,
    pub occupancy: OccupancyModel,
}

impl AdmissionPolicy {
    pub fn new(slack: f64) -> Result<Self> {
        ensure_finite("slack", slack)?;
        if slack <= 0.0 {
            return Err(Error::domain(format!("slack must be > 0, got {slack}")));
        }
        Ok(AdmissionPolicy {
            slack,
            occupancy: OccupancyModel::ExclusiveCluster,
        })
    }

    pub fn slack(&self) -> f64 {
        self.slack
    }

    /// Relative deadline for a task whose isolated service time is `service`.
    pub fn deadline(&self, service: f64) -> f64 {
        (1.0 + self.slack) * service
    }
}

impl Default for AdmissionPolicy {
    fn default() -> Self {
        AdmissionPolicy::new(DEFAULT_SLACK).expect("default slack is positive")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimStats {
    pub arrivals: u64,
    pub admitted: u64,
    pub blocked: u64,
    pub blocking_probability: f64,
    /// 95% normal-approximation half-width across replications; 0 for a single run.
    pub ci95_halfwidth: f64,
    /// Mean of `finish - arrival` over admitted tasks, seconds.
    pub mean_admitted_latency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Admit,
    Block,
}

/// Isolated makespan of `task` on `platform`, seconds.
pub fn service_time(task: &TaskSpec, platform: &NormalizedPlatform) -> Result<f64> {
    let alloc = allocate(platform, &task.divisibility())?;
    Ok(task.load * alloc.t_star)
}

/// Pilot estimate of the mean isolated service time.
pub fn mean_service_time(
    source: &dyn TaskSource,
    platform: &NormalizedPlatform,
    n_pilot: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if n_pilot < MIN_PILOT_SAMPLES {
        return Err(Error::domain(format!(
            "at least {MIN_PILOT_SAMPLES} pilot samples are required, got {n_pilot}"
        )));
    }
    let mut total = 0.0;
    for _ in 0..n_pilot {
        total += service_time(&source.sample(rng), platform)?;
    }
    Ok(total / n_pilot as f64)
}

/// `lambda = a / E[S]`.
pub fn lambda_for_load(target_load: f64, mean_service: f64) -> Result<f64> {
    ensure_finite("offered load", target_load)?;
    if target_load <= 0.0 {
        return Err(Error::domain(format!("offered load must be > 0, got {target_load}")));
    }
    if !(mean_service > 0.0 && mean_service.is_finite()) {
        return Err(Error::domain(format!(
            "mean service time must be positive, got {mean_service}"
        )));
    }
    Ok(target_load / mean_service)
}

/// Arrival rate that produces offered load `target_load`, estimated from `n_pilot`
/// tasks drawn from `rng`.
pub fn calibrate_lambda(
    target_load: f64,
    source: &dyn TaskSource,
    platform: &NormalizedPlatform,
    n_pilot: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    let mean = mean_service_time(source, platform, n_pilot, rng)?;
    lambda_for_load(target_load, mean)
}

/// Exclusive-cluster admission test. Returns the decision and the new busy-until time.
pub fn admit_or_block(arrival_time: f64, service: f64, deadline: f64, busy_until: f64) -> (Decision, f64) {
    let finish = arrival_time.max(busy_until) + service;
    if finish <= arrival_time + deadline {
        (Decision::Admit, finish)
    } else {
        (Decision::Block, busy_until)
    }
}

/// One arrival as seen by the admission controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalEvent {
    pub index: u64,
    pub time: f64,
    pub service: f64,
    pub deadline: f64,
    pub predicted_finish: f64,
    pub decision: Decision,
    pub warmup: bool,
}

/// Seeds of the two streams a single run consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimSeeds {
    pub workload: u64,
    pub arrivals: u64,
}

impl SimSeeds {
    pub fn from_replication(seed: u64) -> Self {
        SimSeeds {
            workload: seed,
            arrivals: seed,
        }
    }
}

pub fn run_simulation(
    platform: &NormalizedPlatform,
    source: &dyn TaskSource,
    policy: &AdmissionPolicy,
    arrivals: &ArrivalProcess,
    seeds: SimSeeds,
) -> Result<SimStats> {
    run_simulation_with_log(platform, source, policy, arrivals, seeds, |_| {})
}

/// As [`run_simulation`], calling `log` for every arrival including warmup.
pub fn run_simulation_with_log<F: FnMut(&ArrivalEvent)>(
    platform: &NormalizedPlatform,
    source: &dyn TaskSource,
    policy: &AdmissionPolicy,
    arrivals: &ArrivalProcess,
    seeds: SimSeeds,
    mut log: F,
) -> Result<SimStats> {
    let mut task_rng = stream_rng(seeds.workload, Stream::Workload);
    let mut arrival_rng = stream_rng(seeds.arrivals, Stream::Arrivals);
    let gaps = Exp::new(arrivals.rate()).map_err(|e| Error::domain(e.to_string()))?;

    let (limit, warmup_count, warmup_until) = match arrivals.horizon {
        Horizon::Arrivals(n) => (
            n as u64,
            (n as f64 * arrivals.warmup_fraction).floor() as u64,
            f64::NEG_INFINITY,
        ),
        Horizon::Duration(d) => (u64::MAX, 0, d * arrivals.warmup_fraction),
    };

    let mut clock = 0.0;
    let mut busy_until = 0.0;
    let (mut counted, mut admitted, mut latency_sum) = (0u64, 0u64, 0.0);
    let mut index = 0u64;
    while index < limit {
        clock += gaps.sample(&mut arrival_rng);
        if let Horizon::Duration(d) = arrivals.horizon {
            if clock > d {
                break;
            }
        }
        let task = source.sample(&mut task_rng);
        let service = service_time(&task, platform)?;
        let deadline = policy.deadline(service);
        let (decision, next_busy) = admit_or_block(clock, service, deadline, busy_until);
        let finish = clock.max(busy_until) + service;
        busy_until = next_busy;

        let warmup = index < warmup_count || clock < warmup_until;
        if !warmup {
            counted += 1;
            if decision == Decision::Admit {
                admitted += 1;
                latency_sum += finish - clock;
            }
        }
        log(&ArrivalEvent {
            index,
            time: clock,
            service,
            deadline,
            predicted_finish: finish,
            decision,
            warmup,
        });
        index += 1;
    }

    let blocked = counted - admitted;
    Ok(SimStats {
        arrivals: counted,
        admitted,
        blocked,
        blocking_probability: if counted == 0 {
            0.0
        } else {
            blocked as f64 / counted as f64
        },
        ci95_halfwidth: 0.0,
        mean_admitted_latency: if admitted == 0 {
            0.0
        } else {
            latency_sum / admitted as f64
        },
    })
}
