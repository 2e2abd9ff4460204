//! Method-of-moments estimates from observed data.
//!
//! The empirical moment of order `k` is `ν_k = (1/n) Σ X_i^k`. The arrival
//! rate of a Poisson stream is estimated by `ν₁` (unbiased), the rate of an
//! exponential service law by `1/ν₁`. The latter is biased upward for small
//! `n`; no correction is applied.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationKind {
    /// Per-period arrival counts, or interarrival records; see `estimate_arrival_rate`.
    Arrivals,
    /// Service durations.
    Service,
}

impl fmt::Display for ObservationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObservationKind::Arrivals => "arrival",
            ObservationKind::Service => "service",
        })
    }
}

impl FromStr for ObservationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "arrival" | "arrivals" => Ok(Self::Arrivals),
            "service" => Ok(Self::Service),
            other => Err(Error::Parse(format!(
                "unknown observation kind '{other}' (arrival|service)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSample {
    values: Vec<f64>,
    kind: ObservationKind,
}

impl ObservationSample {
    pub fn new(values: Vec<f64>, kind: ObservationKind) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "sample must contain at least one observation".into(),
            ));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "observation {} must be finite and non-negative, got {v}",
                i + 1
            )));
        }
        Ok(Self { values, kind })
    }

    /// One number per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, kind: ObservationKind) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let v: f64 = content
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: not a number: '{content}'", lineno + 1)))?;
            values.push(v);
        }
        Self::new(values, kind)
    }

    pub fn from_file(path: &Path, kind: ObservationKind) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, kind)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> ObservationKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `ν_k = (1/n) Σ X_i^k`.
pub fn empirical_moment(sample: &ObservationSample, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("moment order must be at least 1".into()));
    }
    let n = sample.values.len() as f64;
    Ok(sample.values.iter().map(|x| x.powi(k as i32)).sum::<f64>() / n)
}

/// Poisson arrival-rate estimate `a = ν₁`.
///
/// With per-period counts this is arrivals per period. With interarrival
/// times it is the mean gap, whose reciprocal is the rate; the estimator is
/// the same sample mean either way and the reading is left to the caller.
pub fn estimate_arrival_rate(sample: &ObservationSample) -> f64 {
    sample.values.iter().sum::<f64>() / sample.values.len() as f64
}

/// Exponential service-rate estimate `b = 1/ν₁`.
pub fn estimate_service_rate(sample: &ObservationSample) -> Result<f64> {
    let mean = estimate_arrival_rate(sample);
    if mean > 0.0 {
        Ok(1.0 / mean)
    } else {
        Err(Error::Degenerate(
            "all service durations are zero; the rate is unbounded".into(),
        ))
    }
}
