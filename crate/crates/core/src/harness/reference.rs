//! Default 13-node reference topology: one relay and twelve heterogeneous neighbors.
//!
//! Compute speeds span 5–24 GFlop/s and ISL bandwidths 75–1000 MB/s, so light,
//! data-heavy classes are link bound while compute-dense classes are CPU bound on the
//! same cluster. Results obtained with it are conditional on this choice of topology.

use crate::constellation::{Cluster, PhysicalNode};

/// (id, Flops/s, MB/s)
const NEIGHBORS: [(&str, f64, f64); 12] = [
    ("s01", 1.6e10, 400.0),
    ("s02", 8.0e9, 200.0),
    ("s03", 2.4e10, 800.0),
    ("s04", 1.2e10, 100.0),
    ("s05", 6.0e9, 600.0),
    ("s06", 2.0e10, 250.0),
    ("s07", 1.0e10, 1000.0),
    ("s08", 1.4e10, 150.0),
    ("s09", 5.0e9, 300.0),
    ("s10", 1.8e10, 500.0),
    ("s11", 9.0e9, 75.0),
    ("s12", 2.2e10, 350.0),
];

const RELAY_SPEED: f64 = 2.0e10;

pub fn reference_cluster() -> Cluster {
    let relay = PhysicalNode::relay("r0", RELAY_SPEED).expect("valid relay");
    let neighbors = NEIGHBORS
        .iter()
        .map(|&(id, cs, bw)| PhysicalNode::neighbor(id, cs, bw).expect("valid neighbor"))
        .collect();
    Cluster::new("reference", relay, neighbors).expect("valid reference cluster")
}
