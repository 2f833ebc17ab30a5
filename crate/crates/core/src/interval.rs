//! Closed real intervals and the two sampling laws used by the generators.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{ensure_finite, Error, Result};

/// A closed interval `[lo, hi]` with `lo <= hi`. Zero-width intervals are allowed
/// and always sample their single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        ensure_finite("interval lower bound", lo)?;
        ensure_finite("interval upper bound", hi)?;
        if lo > hi {
            return Err(Error::domain(format!("inverted interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Result<Self> {
        Interval::new(x, x)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Geometric midpoint `sqrt(lo * hi)`; requires a positive interval.
    pub fn geometric_midpoint(&self) -> f64 {
        (self.lo * self.hi).sqrt()
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0.0
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let x = rng.random_range(self.lo..=self.hi);
        x.clamp(self.lo, self.hi)
    }

    /// Samples so that `log10(x)` is uniform on `[log10(lo), log10(hi)]`.
    ///
    /// The interval must be strictly positive.
    pub fn sample_log_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        debug_assert!(self.lo > 0.0);
        if self.lo == self.hi {
            return self.lo;
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        let u: f64 = rng.random_range(a..=b);
        // exp(ln(hi)) can land one ulp outside the interval
        u.exp().clamp(self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// Parses `lo:hi`, or a single number as a zero-width interval.
impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::domain(format!("not a number: {t:?}")))
        };
        match s.split_once(':') {
            Some((lo, hi)) => Interval::new(parse(lo)?, parse(hi)?),
            None => Interval::point(parse(s)?),
        }
    }
}
