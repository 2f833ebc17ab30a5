//! Divisible load scheduling for relay-centric satellite clusters with multi-port
//! concurrent communication.
//!
//! * [`mpcc`]: closed-form optimal load fractions and makespan on a single-level star.
//! * [`sizing`]: deadline feasibility and the minimum number of cooperating satellites.
//! * [`constellation`]: physical clusters, normalization, random heterogeneous clusters.
//! * [`workload`]: application task classes and task sampling.
//! * [`sim`]: Poisson-arrival admission control and blocking statistics.
//! * [`harness`]: configuration files, experiment drivers and CSV output.
//!
//! ```
//! use mpcc_dlt::mpcc::{allocate, DivisibilitySpec, NormalizedPlatform, Regime};
//!
//! let platform = NormalizedPlatform::from_pairs(1.0, &[(2.0, 1.0), (2.0, 1.0)]).unwrap();
//! let alloc = allocate(&platform, &DivisibilitySpec::new(0.0, 1.0).unwrap()).unwrap();
//! assert_eq!(alloc.regime, Regime::Case1);
//! assert!((alloc.t_star - 2.0 / 3.0).abs() < 1e-12);
//! ```

pub mod constellation;
pub mod error;
pub mod harness;
pub mod interval;
pub mod mpcc;
pub mod rng;
pub mod sim;
pub mod sizing;
pub mod workload;

pub use error::{Error, Result};
pub use interval::Interval;
