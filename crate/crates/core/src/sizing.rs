//! Deadline feasibility and cluster sizing.
//!
//! Each child contributes an additive service rate `g_i = 1/(w_i + (1+beta) z_i)`.
//! A per-unit deadline `t_req` is met (relay participating, no mandatory fraction)
//! iff `1/w0 + sum g_i >= 1/t_req`; the children must cover the rate deficit
//! `delta = 1/t_req - 1/w0`, and the fewest children that do so are the ones with the
//! largest contributions.

use std::fmt;

use crate::error::{ensure_finite, Error, Result};
use crate::mpcc::{child_cost, NormalizedPlatform};

/// Default dominance ratio for [`regime_classify`]: one order of magnitude.
pub const DEFAULT_DOMINANCE_RATIO: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DeadlineQuery {
    t_req: f64,
    platform: NormalizedPlatform,
    beta: f64,
}

impl DeadlineQuery {
    pub fn new(t_req: f64, platform: NormalizedPlatform, beta: f64) -> Result<Self> {
        ensure_finite("t_req", t_req)?;
        if t_req <= 0.0 {
            return Err(Error::domain(format!("t_req must be > 0, got {t_req}")));
        }
        crate::mpcc::check_beta(beta)?;
        Ok(DeadlineQuery { t_req, platform, beta })
    }

    pub fn t_req(&self) -> f64 {
        self.t_req
    }

    pub fn platform(&self) -> &NormalizedPlatform {
        &self.platform
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinCooperators {
    Count(usize),
    /// Every child together still falls short of the deficit.
    Infeasible,
}

impl fmt::Display for MinCooperators {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinCooperators::Count(n) => write!(f, "{n}"),
            MinCooperators::Infeasible => f.write_str("INFEASIBLE"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizingReport {
    /// `g_i` in original child order.
    pub contributions: Vec<f64>,
    /// Child indices sorted by descending `g`, ties by index.
    pub order: Vec<usize>,
    pub delta: f64,
    pub n_min: MinCooperators,
    /// `cumulative[k]` is the sum of the `k + 1` largest contributions.
    pub cumulative: Vec<f64>,
}

impl SizingReport {
    /// Builds the report from raw contributions and a deficit.
    pub fn from_contributions(contributions: Vec<f64>, delta: f64) -> Self {
        let mut order: Vec<usize> = (0..contributions.len()).collect();
        // stable, so equal contributions keep index order
        order.sort_by(|&a, &b| contributions[b].total_cmp(&contributions[a]));
        let cumulative: Vec<f64> = order
            .iter()
            .scan(0.0, |acc, &i| {
                *acc += contributions[i];
                Some(*acc)
            })
            .collect();
        let n_min = if delta <= 0.0 {
            MinCooperators::Count(0)
        } else {
            match cumulative.iter().position(|&c| c >= delta) {
                Some(k) => MinCooperators::Count(k + 1),
                None => MinCooperators::Infeasible,
            }
        };
        SizingReport {
            contributions,
            order,
            delta,
            n_min,
            cumulative,
        }
    }

    /// Contributions in descending order.
    pub fn sorted_contributions(&self) -> Vec<f64> {
        self.order.iter().map(|&i| self.contributions[i]).collect()
    }
}

/// `g = 1/(w + (1 + beta) z)`.
pub fn effective_contribution(w: f64, z: f64, beta: f64) -> Result<f64> {
    Ok(1.0 / child_cost(w, z, beta)?)
}

/// `g = 1/(w + (1 + beta)/rate)` for a link rate in units per second.
pub fn effective_contribution_from_rate(w: f64, rate: f64, beta: f64) -> Result<f64> {
    ensure_finite("link rate", rate)?;
    if rate <= 0.0 {
        return Err(Error::domain(format!("link rate must be > 0, got {rate}")));
    }
    effective_contribution(w, 1.0 / rate, beta)
}

/// `delta = 1/t_req - 1/w0`; negative when the relay alone beats the deadline.
pub fn rate_deficit(t_req: f64, w0: f64) -> f64 {
    1.0 / t_req - 1.0 / w0
}

pub fn contributions(platform: &NormalizedPlatform, beta: f64) -> Vec<f64> {
    platform
        .children()
        .iter()
        .map(|c| 1.0 / (c.w + (1.0 + beta) * c.z))
        .collect()
}

pub fn n_min(query: &DeadlineQuery) -> SizingReport {
    SizingReport::from_contributions(
        contributions(query.platform(), query.beta()),
        rate_deficit(query.t_req(), query.platform().w0()),
    )
}

pub fn deadline_feasible(query: &DeadlineQuery) -> bool {
    let total = 1.0 / query.platform().w0() + contributions(query.platform(), query.beta()).iter().sum::<f64>();
    total >= 1.0 / query.t_req()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkRegime {
    ComputationLimited,
    CommunicationLimited,
    Balanced,
}

/// Which term dominates a child's cost, by a factor of at least `ratio`.
pub fn regime_classify(w: f64, z: f64, beta: f64, ratio: f64) -> LinkRegime {
    let link = (1.0 + beta) * z;
    if w > ratio * link {
        LinkRegime::ComputationLimited
    } else if link > ratio * w {
        LinkRegime::CommunicationLimited
    } else {
        LinkRegime::Balanced
    }
}
