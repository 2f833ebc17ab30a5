//! Physical cluster description, conversion to per-unit-load parameters, and random
//! heterogeneous cluster generation.
//!
//! A task of compute intensity `ci` (Flops/MB) takes `w = ci / cs` seconds per MB on a
//! node with compute speed `cs` (Flops/s), and `z = 1 / bandwidth` seconds per MB to
//! cross an ISL of `bandwidth` MB/s.
//!
//! Cluster files are line oriented, one node per line:
//!
//! ```text
//! # comment
//! node r0 relay cs=2e10
//! node s1 cs=8e9 bw=400
//! ```
//!
//! Exactly one node carries the `relay` flag and it takes no `bw`; every other node
//! needs one.

use std::path::Path;

use crate::error::{ensure_finite, Error, Result};
use crate::interval::Interval;
use crate::mpcc::{Child, NormalizedPlatform};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalNode {
    pub id: String,
    /// Flops per second.
    pub compute_speed: f64,
    /// MB per second; `None` for the relay.
    pub isl_bandwidth: Option<f64>,
}

impl PhysicalNode {
    pub fn relay(id: impl Into<String>, compute_speed: f64) -> Result<Self> {
        check_positive("compute speed", compute_speed)?;
        Ok(PhysicalNode {
            id: id.into(),
            compute_speed,
            isl_bandwidth: None,
        })
    }

    pub fn neighbor(id: impl Into<String>, compute_speed: f64, isl_bandwidth: f64) -> Result<Self> {
        check_positive("compute speed", compute_speed)?;
        check_positive("ISL bandwidth", isl_bandwidth)?;
        Ok(PhysicalNode {
            id: id.into(),
            compute_speed,
            isl_bandwidth: Some(isl_bandwidth),
        })
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    ensure_finite(name, x)?;
    if x <= 0.0 {
        return Err(Error::domain(format!("{name} must be > 0, got {x}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub label: String,
    pub relay: PhysicalNode,
    pub neighbors: Vec<PhysicalNode>,
}

impl Cluster {
    pub fn new(label: impl Into<String>, relay: PhysicalNode, neighbors: Vec<PhysicalNode>) -> Result<Self> {
        if relay.isl_bandwidth.is_some() {
            return Err(Error::domain("the relay has no ISL to itself"));
        }
        if let Some(n) = neighbors.iter().find(|n| n.isl_bandwidth.is_none()) {
            return Err(Error::domain(format!("neighbor {} has no ISL bandwidth", n.id)));
        }
        Ok(Cluster {
            label: label.into(),
            relay,
            neighbors,
        })
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut relay = None;
        let mut neighbors = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let err = |m: String| Error::parse(source_name, line_no, m);
            let mut tokens = line.split_whitespace();
            if tokens.next() != Some("node") {
                return Err(err(format!("expected `node <id> ...`, got {line:?}")));
            }
            let id = tokens.next().ok_or_else(|| err("missing node id".into()))?;
            let (mut is_relay, mut cs, mut bw) = (false, None, None);
            for tok in tokens {
                match tok.split_once('=') {
                    None if tok == "relay" => is_relay = true,
                    Some(("cs", v)) => cs = Some(parse_number(v).map_err(err)?),
                    Some(("bw", v)) => bw = Some(parse_number(v).map_err(err)?),
                    _ => return Err(err(format!("unknown token {tok:?}"))),
                }
            }
            let cs = cs.ok_or_else(|| err(format!("node {id} is missing cs=")))?;
            let node = if is_relay {
                if bw.is_some() {
                    return Err(err(format!("relay {id} must not declare bw=")));
                }
                if relay.is_some() {
                    return Err(err("more than one relay".into()));
                }
                PhysicalNode::relay(id, cs)
            } else {
                let bw = bw.ok_or_else(|| err(format!("node {id} is missing bw=")))?;
                PhysicalNode::neighbor(id, cs, bw)
            }
            .map_err(|e| err(e.to_string()))?;
            if is_relay {
                relay = Some(node);
            } else {
                neighbors.push(node);
            }
        }
        let relay = relay
            .ok_or_else(|| Error::parse(source_name, text.lines().count().max(1), "no node is flagged `relay`"))?;
        Cluster::new(source_name, relay, neighbors)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cluster = Cluster::parse(&text, &path.display().to_string())?;
        if let Some(stem) = path.file_stem() {
            cluster.label = stem.to_string_lossy().into_owned();
        }
        Ok(cluster)
    }

    /// Renders the cluster in the file format accepted by [`Cluster::parse`].
    pub fn to_file_format(&self) -> String {
        let mut out = format!("node {} relay cs={:e}\n", self.relay.id, self.relay.compute_speed);
        for n in &self.neighbors {
            out += &format!(
                "node {} cs={:e} bw={}\n",
                n.id,
                n.compute_speed,
                n.isl_bandwidth.unwrap_or_default()
            );
        }
        out
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_number(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("not a number: {v:?}"))
}

/// Per-unit-load parameters for a task of compute intensity `ci` (Flops/MB).
pub fn normalize(cluster: &Cluster, ci: f64) -> Result<NormalizedPlatform> {
    check_positive("compute intensity", ci)?;
    let children = cluster
        .neighbors
        .iter()
        .map(|n| Child::new(ci / n.compute_speed, 1.0 / n.isl_bandwidth.unwrap_or(f64::NAN)))
        .collect::<Result<Vec<_>>>()?;
    NormalizedPlatform::new(ci / cluster.relay.compute_speed, children)
}

/// Draws the relay's `w0` and each neighbor's `(w, z)` uniformly from the given
/// intervals. The relay is drawn first, then the neighbors in order, `w` before `z`.
pub fn sample_cluster(
    n_neighbors: usize,
    w_range: Interval,
    z_range: Interval,
    seed: u64,
) -> Result<NormalizedPlatform> {
    if !w_range.is_positive() {
        return Err(Error::domain(format!("w range must be positive, got {w_range}")));
    }
    if z_range.lo() < 0.0 {
        return Err(Error::domain(format!("z range must be nonnegative, got {z_range}")));
    }
    let mut rng = stream_rng(seed, Stream::Platform);
    let w0 = w_range.sample_uniform(&mut rng);
    let children = (0..n_neighbors)
        .map(|_| {
            let w = w_range.sample_uniform(&mut rng);
            let z = z_range.sample_uniform(&mut rng);
            Child::new(w, z)
        })
        .collect::<Result<Vec<_>>>()?;
    NormalizedPlatform::new(w0, children)
}

/// Multiplies every ISL bandwidth by `factor`, i.e. divides every `z` by it.
pub fn scale_bandwidth(platform: &NormalizedPlatform, factor: f64) -> Result<NormalizedPlatform> {
    check_positive("bandwidth scale factor", factor)?;
    let mut scaled = platform.clone();
    for c in scaled.children_mut() {
        c.z /= factor;
    }
    Ok(scaled)
}
