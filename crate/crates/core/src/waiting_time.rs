//! Waiting-time transforms of the M|G|1 queue under FIFO and non-preemptive
//! LIFO order, and the waiting-time CDF recovered by numerical inversion.
//!
//! With `ρ = a·β₁`:
//!
//! ```text
//! LIFO:  w(s) = (1 - ρ) + a(1 - π(s)) / (s + a - aπ(s))
//! FIFO:  w(s) = (1 - ρ) · s / (s - a + aβ(s))
//! ```
//!
//! Transforms are evaluated for any load; the `stationary` flag records
//! whether `ρ < 1`. The CDF is only defined for stationary queues.

use std::fmt;
use std::str::FromStr;

use crate::busy_period::{busy_period_lst, BusyPeriodSolution};
use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};
use crate::lst_inversion::{invert, InversionSpec};

const SINGULARITY_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discipline {
    Fifo,
    Lifo,
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Discipline::Fifo => "fifo",
            Discipline::Lifo => "lifo",
        })
    }
}

impl FromStr for Discipline {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fifo" => Ok(Discipline::Fifo),
            "lifo" => Ok(Discipline::Lifo),
            other => Err(Error::Parse(format!("unknown service order '{other}' (fifo|lifo)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationKind {
    /// `w(s)` at a transform argument.
    Transform,
    /// `W(x)` at a time point.
    Cdf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaitEvaluation {
    pub discipline: Discipline,
    pub kind: EvaluationKind,
    /// `s` for transforms, `x` for the CDF.
    pub argument: f64,
    pub value: f64,
    /// `a·β₁ < 1`.
    pub stationary: bool,
    /// Busy-period solve behind a LIFO transform value.
    pub solver: Option<BusyPeriodSolution>,
}

pub fn traffic_intensity(d: &ServiceDistribution, arrival_rate: f64) -> f64 {
    arrival_rate * d.moment1()
}

/// Pollaczek-Khinchine mean wait `aβ₂ / (2(1-ρ))`, shared by every
/// non-preemptive work-conserving order.
pub fn mean_wait(d: &ServiceDistribution, arrival_rate: f64) -> Result<f64> {
    check_rate(arrival_rate)?;
    let rho = traffic_intensity(d, arrival_rate);
    if rho >= 1.0 {
        return Err(non_stationary(rho));
    }
    Ok(arrival_rate * d.moment2() / (2.0 * (1.0 - rho)))
}

pub fn lifo_wait_lst(d: &ServiceDistribution, arrival_rate: f64, s: f64) -> Result<WaitEvaluation> {
    check_rate(arrival_rate)?;
    check_positive_s(s)?;
    let rho = traffic_intensity(d, arrival_rate);
    let busy = busy_period_lst(d, arrival_rate, s)?;
    let pi = busy.value;
    let value = (1.0 - rho) + arrival_rate * (1.0 - pi) / (s + arrival_rate - arrival_rate * pi);
    Ok(WaitEvaluation {
        discipline: Discipline::Lifo,
        kind: EvaluationKind::Transform,
        argument: s,
        value,
        stationary: rho < 1.0,
        solver: Some(busy),
    })
}

pub fn fifo_wait_lst(d: &ServiceDistribution, arrival_rate: f64, s: f64) -> Result<WaitEvaluation> {
    check_rate(arrival_rate)?;
    check_positive_s(s)?;
    let rho = traffic_intensity(d, arrival_rate);
    let denominator = s - arrival_rate + arrival_rate * d.lst_unchecked(s);
    if denominator.abs() <= SINGULARITY_EPS {
        return Err(Error::Singularity { s, denominator });
    }
    Ok(WaitEvaluation {
        discipline: Discipline::Fifo,
        kind: EvaluationKind::Transform,
        argument: s,
        value: (1.0 - rho) * s / denominator,
        stationary: rho < 1.0,
        solver: None,
    })
}

pub fn wait_lst(discipline: Discipline, d: &ServiceDistribution, arrival_rate: f64, s: f64) -> Result<WaitEvaluation> {
    match discipline {
        Discipline::Fifo => fifo_wait_lst(d, arrival_rate, s),
        Discipline::Lifo => lifo_wait_lst(d, arrival_rate, s),
    }
}

/// `W(x)`, obtained by inverting `w(s)/s` (the Laplace transform of the CDF,
/// which carries the atom `1-ρ` at zero). Clamped to `[0, 1]`.
pub fn wait_cdf(
    discipline: Discipline,
    d: &ServiceDistribution,
    arrival_rate: f64,
    x: f64,
    spec: &InversionSpec,
) -> Result<WaitEvaluation> {
    check_rate(arrival_rate)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("CDF point must be positive, got {x}")));
    }
    let rho = traffic_intensity(d, arrival_rate);
    if rho >= 1.0 {
        return Err(non_stationary(rho));
    }
    let raw = invert(
        |s| wait_lst(discipline, d, arrival_rate, s).map(|w| w.value / s),
        x,
        spec,
    )?;
    Ok(WaitEvaluation {
        discipline,
        kind: EvaluationKind::Cdf,
        argument: x,
        value: raw.clamp(0.0, 1.0),
        stationary: true,
        solver: None,
    })
}

fn non_stationary(rho: f64) -> Error {
    Error::NonStationary(format!(
        "traffic intensity a*beta1 = {rho} >= 1, the waiting-time distribution does not exist"
    ))
}

fn check_rate(arrival_rate: f64) -> Result<()> {
    if arrival_rate > 0.0 && arrival_rate.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "arrival rate must be positive, got {arrival_rate}"
        )))
    }
}

fn check_positive_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("transform argument must be positive, got {s}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn exp(b: f64) -> ServiceDistribution {
        ServiceDistribution::exponential(b).unwrap()
    }

    #[test]
    fn lifo_examples() {
        let w = lifo_wait_lst(&exp(10.0), 12.0, 1.0).unwrap();
        assert_abs_diff_eq!(w.value, 0.6, epsilon = 1e-10);
        assert!(!w.stationary);
        assert!(w.solver.unwrap().residual <= 1e-12);

        let u = ServiceDistribution::uniform(1.0, 5.0).unwrap();
        let w = lifo_wait_lst(&u, 0.2, 1.0).unwrap();
        assert_abs_diff_eq!(w.value, 0.5577276, epsilon = 5e-7);
        assert!(w.stationary);

        let w = lifo_wait_lst(&exp(10.0), 16.0, 1.0).unwrap();
        assert_abs_diff_eq!(w.value, 0.2783011, epsilon = 5e-7);
    }

    #[test]
    fn fifo_examples() {
        let d = exp(5.0);
        assert_abs_diff_eq!(fifo_wait_lst(&d, 4.0, 1.0).unwrap().value, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(fifo_wait_lst(&d, 4.0, 5.0).unwrap().value, 1.0 / 3.0, epsilon = 1e-15);
        let u = ServiceDistribution::uniform(1.0, 3.0).unwrap();
        assert_abs_diff_eq!(fifo_wait_lst(&u, 0.3, 1.0).unwrap().value, 0.5349640, epsilon = 5e-8);
    }

    #[test]
    fn fifo_singularity() {
        // s - a + a·b/(s+b) = 0 at s = a - b for exponential service
        let err = fifo_wait_lst(&exp(1.0), 2.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Singularity { .. }));
    }

    #[test]
    fn mm1_cdf_closed_form() {
        let spec = InversionSpec::default();
        let w = wait_cdf(Discipline::Fifo, &exp(5.0), 4.0, 3.0, &spec).unwrap();
        assert_abs_diff_eq!(w.value, 1.0 - 0.8 * (-3f64).exp(), epsilon = 1e-3);
        let w = wait_cdf(Discipline::Fifo, &exp(5.0), 4.0, 20.0, &spec).unwrap();
        assert_abs_diff_eq!(w.value, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn cdf_refuses_overload() {
        let spec = InversionSpec::default();
        let err = wait_cdf(Discipline::Fifo, &exp(9.0), 16.0, 2.0, &spec).unwrap_err();
        assert!(matches!(err, Error::NonStationary(_)));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn normalisation_near_zero() {
        let cases = [
            (exp(5.0), 4.0),
            (ServiceDistribution::uniform(1.0, 5.0).unwrap(), 0.2),
            (ServiceDistribution::gamma3(5.0).unwrap(), 1.0),
        ];
        for (d, a) in &cases {
            for disc in [Discipline::Fifo, Discipline::Lifo] {
                let w = wait_lst(disc, d, *a, 1e-6).unwrap();
                assert_abs_diff_eq!(w.value, 1.0, epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn means_agree_across_orders() {
        let d = ServiceDistribution::uniform(1.0, 3.0).unwrap();
        let a = 0.3;
        // central difference at s = 1e-4
        let (s0, h) = (1e-4, 5e-5);
        let mean = |disc| {
            let up = wait_lst(disc, &d, a, s0 + h).unwrap().value;
            let down = wait_lst(disc, &d, a, s0 - h).unwrap().value;
            -(up - down) / (2.0 * h)
        };
        let (lifo, fifo) = (mean(Discipline::Lifo), mean(Discipline::Fifo));
        let pk = mean_wait(&d, a).unwrap();
        assert!((lifo - fifo).abs() / fifo < 1e-2, "{lifo} vs {fifo}");
        assert!((fifo - pk).abs() / pk < 1e-2, "{fifo} vs {pk}");
    }

    #[test]
    fn discipline_literals() {
        assert_eq!("FIFO".parse::<Discipline>().unwrap(), Discipline::Fifo);
        assert_eq!(Discipline::Lifo.to_string(), "lifo");
        assert!("sjf".parse::<Discipline>().is_err());
    }
}
