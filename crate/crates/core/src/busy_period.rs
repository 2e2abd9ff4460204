//! Busy-period transform of the M|G|1 queue.
//!
//! `π(s)` is the least root in `[0, 1]` of Kendall's functional equation
//! `π = β(s + a - aπ)`. The right-hand side is increasing in `π`, so plain
//! iteration from `π₀ = 0` climbs monotonically to that root.

use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusyPeriodSolution {
    /// `π(s)`.
    pub value: f64,
    pub iterations: usize,
    /// `|π - β(s + a - aπ)|` at `value`.
    pub residual: f64,
}

/// Solves Kendall's equation with the default tolerance and iteration cap.
pub fn busy_period_lst(d: &ServiceDistribution, arrival_rate: f64, s: f64) -> Result<BusyPeriodSolution> {
    busy_period_lst_with(d, arrival_rate, s, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)
}

pub fn busy_period_lst_with(
    d: &ServiceDistribution,
    arrival_rate: f64,
    s: f64,
    tol: f64,
    max_iter: usize,
) -> Result<BusyPeriodSolution> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("busy-period transform needs s > 0, got {s}")));
    }
    if !(arrival_rate > 0.0 && arrival_rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "arrival rate must be positive, got {arrival_rate}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }

    let kendall = |pi: f64| {
        let arg = s + arrival_rate - arrival_rate * pi;
        assert!(arg >= 0.0, "Kendall argument negative: {arg}");
        d.lst_unchecked(arg)
    };

    // first iterate from 0, so a fixed point that is numerically tiny is still positive
    let mut pi = kendall(0.0);
    let mut next = kendall(pi);
    for iteration in 0..max_iter {
        let residual = (next - pi).abs();
        if residual <= tol {
            return Ok(BusyPeriodSolution {
                value: pi,
                iterations: iteration,
                residual,
            });
        }
        debug_assert!(next >= pi - 4.0 * f64::EPSILON, "iterates must not decrease");
        pi = next;
        next = kendall(pi);
    }
    Err(Error::Convergence {
        iterations: max_iter,
        last: pi,
        residual: (next - pi).abs(),
    })
}
