//! Closed-form load allocation on a single-level star under multi-port concurrent
//! communication.
//!
//! The relay (node 0) sends every child its fraction concurrently, each child
//! computes and returns a result of size `beta * alpha_i` over the same link, and the
//! relay receives all results concurrently. Child `i` therefore finishes at
//! `alpha_i * (w_i + (1 + beta) * z_i)` while the relay, which also owns the
//! mandatory root-only fraction `f`, finishes at `(f + alpha_0) * w_0`.
//!
//! Two regimes exist:
//!
//! * **Case 1**: the relay takes a nonnegative share of the divisible part and all
//!   `N + 1` nodes finish together at `T* = 1 / S` with
//!   `S = 1/w_0 + sum_i 1/(w_i + (1+beta) z_i)`.
//! * **Case 2**: `f` alone keeps the relay busy past the Case-1 makespan, so the
//!   relay takes no divisible work, the children split `1 - f` in proportion to their
//!   effective rates, and `T* = max(f w_0, (1 - f) / G)`.
//!
//! All quantities are per unit of normalized load; [`makespan_for_load`] scales to a
//! physical task size.

use crate::error::{ensure_finite, Error, Result};

/// Per-unit computation time `w` and per-unit link time `z` of one child.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Child {
    pub w: f64,
    pub z: f64,
}

impl Child {
    pub fn new(w: f64, z: f64) -> Result<Self> {
        ensure_finite("w", w)?;
        ensure_finite("z", z)?;
        if w <= 0.0 {
            return Err(Error::domain(format!("child computation time must be > 0, got {w}")));
        }
        if z < 0.0 {
            return Err(Error::domain(format!("child link time must be >= 0, got {z}")));
        }
        Ok(Child { w, z })
    }
}

/// A relay plus `N >= 0` children, all expressed in seconds per unit load.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPlatform {
    w0: f64,
    children: Vec<Child>,
}

impl NormalizedPlatform {
    pub fn new(w0: f64, children: Vec<Child>) -> Result<Self> {
        ensure_finite("w0", w0)?;
        if w0 <= 0.0 {
            return Err(Error::domain(format!("relay computation time must be > 0, got {w0}")));
        }
        for c in &children {
            Child::new(c.w, c.z)?;
        }
        Ok(NormalizedPlatform { w0, children })
    }

    /// Builds a platform from `(w, z)` pairs.
    pub fn from_pairs(w0: f64, children: &[(f64, f64)]) -> Result<Self> {
        let children = children
            .iter()
            .map(|&(w, z)| Child::new(w, z))
            .collect::<Result<Vec<_>>>()?;
        NormalizedPlatform::new(w0, children)
    }

    pub fn relay_only(w0: f64) -> Result<Self> {
        NormalizedPlatform::new(w0, Vec::new())
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn children(&self) -> &[Child] {
        &self.children
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    /// The same platform restricted to the given children, in the given order.
    pub fn with_children(&self, indices: &[usize]) -> Self {
        NormalizedPlatform {
            w0: self.w0,
            children: indices.iter().map(|&i| self.children[i]).collect(),
        }
    }

    pub fn push_child(&mut self, child: Child) {
        self.children.push(child);
    }

    pub(crate) fn children_mut(&mut self) -> &mut [Child] {
        &mut self.children
    }
}

/// Mandatory root-only fraction `f` and result-size ratio `beta` of a task.
///
/// `f` lies in `[0, 1]` and `beta` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivisibilitySpec {
    f: f64,
    beta: f64,
}

impl DivisibilitySpec {
    pub fn new(f: f64, beta: f64) -> Result<Self> {
        ensure_finite("f", f)?;
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::domain(format!("f must lie in [0, 1], got {f}")));
        }
        check_beta(beta)?;
        Ok(DivisibilitySpec { f, beta })
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Divisible fraction `1 - f`.
    pub fn gamma(&self) -> f64 {
        1.0 - self.f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Relay shares the divisible load; every node finishes at `T*`.
    Case1,
    /// Relay is saturated by its mandatory fraction and takes no divisible load.
    Case2,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Case1 => "Case1",
            Regime::Case2 => "Case2",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Relay's share of the divisible part (excludes `f`).
    pub alpha0: f64,
    pub alphas: Vec<f64>,
    /// Makespan per unit load, seconds.
    pub t_star: f64,
    pub regime: Regime,
}

impl Allocation {
    /// `alpha0 + sum(alphas)`, which equals `1 - f`.
    pub fn distributed_total(&self) -> f64 {
        self.alpha0 + self.alphas.iter().sum::<f64>()
    }

    /// Finish time of every node, relay first, per unit load.
    pub fn finish_times(&self, platform: &NormalizedPlatform, spec: &DivisibilitySpec) -> Vec<f64> {
        std::iter::once((spec.f() + self.alpha0) * platform.w0())
            .chain(
                platform
                    .children()
                    .iter()
                    .zip(&self.alphas)
                    .map(|(c, a)| a * cost(c, spec.beta())),
            )
            .collect()
    }
}

/// Result ratios up to and including 1 (result as large as the input) are accepted.
pub(crate) fn check_beta(beta: f64) -> Result<()> {
    ensure_finite("beta", beta)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::domain(format!("beta must lie in [0, 1], got {beta}")));
    }
    Ok(())
}

#[inline]
fn cost(c: &Child, beta: f64) -> f64 {
    c.w + (1.0 + beta) * c.z
}

/// Per-unit send + compute + return time of a child: `w + (1 + beta) z`.
pub fn child_cost(w: f64, z: f64, beta: f64) -> Result<f64> {
    let c = Child::new(w, z)?;
    check_beta(beta)?;
    Ok(cost(&c, beta))
}

/// Sum of the children's effective rates, `G = sum_i 1/(w_i + (1+beta) z_i)`.
pub fn children_rate(platform: &NormalizedPlatform, beta: f64) -> f64 {
    platform.children().iter().map(|c| 1.0 / cost(c, beta)).sum()
}

/// Aggregate effective service rate `S = 1/w0 + G`.
pub fn aggregate_rate(platform: &NormalizedPlatform, spec: &DivisibilitySpec) -> f64 {
    1.0 / platform.w0() + children_rate(platform, spec.beta())
}

/// Largest `f` for which the relay's Case-1 share stays nonnegative: `T*/w0 = 1/(w0 S)`.
///
/// Computed as `(1/S)/w0`, the same expression [`solve_case1`] uses for `alpha0 + f`,
/// so that `f` set to this value yields `alpha0 == 0.0` exactly.
pub fn root_share_threshold(platform: &NormalizedPlatform, spec: &DivisibilitySpec) -> f64 {
    let t_star = 1.0 / aggregate_rate(platform, spec);
    t_star / platform.w0()
}

/// Whether Case 1 applies, i.e. `f <= 1/(w0 S)`. The boundary counts as feasible.
pub fn root_share_feasible(platform: &NormalizedPlatform, spec: &DivisibilitySpec) -> bool {
    spec.f() <= root_share_threshold(platform, spec)
}

/// Equal-finish solution with the relay participating.
pub fn solve_case1(platform: &NormalizedPlatform, spec: &DivisibilitySpec) -> Result<Allocation> {
    let beta = spec.beta();
    let t_star = 1.0 / aggregate_rate(platform, spec);
    let alpha0 = t_star / platform.w0() - spec.f();
    if alpha0 < 0.0 {
        return Err(Error::Regime { alpha0 });
    }
    let alphas = platform.children().iter().map(|c| t_star / cost(c, beta)).collect();
    Ok(Allocation {
        alpha0,
        alphas,
        t_star,
        regime: Regime::Case1,
    })
}

/// Root-saturated solution: the relay runs only `f`, the children split `1 - f`.
pub fn solve_case2(platform: &NormalizedPlatform, spec: &DivisibilitySpec) -> Result<Allocation> {
    let gamma = spec.gamma();
    let root_time = spec.f() * platform.w0();
    if platform.is_empty() {
        if gamma > 0.0 {
            return Err(Error::Infeasible(format!(
                "divisible fraction {gamma} has no host: relay excluded and no children"
            )));
        }
        return Ok(Allocation {
            alpha0: 0.0,
            alphas: Vec::new(),
            t_star: root_time,
            regime: Regime::Case2,
        });
    }
    let rates: Vec<f64> = platform.children().iter().map(|c| 1.0 / cost(c, spec.beta())).collect();
    let total: f64 = rates.iter().sum();
    let alphas = rates.iter().map(|g| gamma * g / total).collect();
    Ok(Allocation {
        alpha0: 0.0,
        alphas,
        t_star: root_time.max(gamma / total),
        regime: Regime::Case2,
    })
}

/// Optimal allocation: Case 1 when the relay share is feasible, Case 2 otherwise.
pub fn allocate(platform: &NormalizedPlatform, spec: &DivisibilitySpec) -> Result<Allocation> {
    if root_share_feasible(platform, spec) {
        solve_case1(platform, spec)
    } else {
        solve_case2(platform, spec)
    }
}

/// Physical makespan in seconds for a task of `load` units (MB): `load * t_star`.
pub fn makespan_for_load(alloc: &Allocation, load: f64) -> Result<f64> {
    ensure_finite("load", load)?;
    if load < 0.0 {
        return Err(Error::domain(format!("load must be >= 0, got {load}")));
    }
    Ok(load * alloc.t_star)
}
