//! Service-time laws: exponential, uniform on `[lo, hi]`, Erlang of order 2
//! and Gamma with integer shape 3 (i.e. Erlang of order 3).
//!
//! Every law exposes its Laplace-Stieltjes transform `β(s) = ∫ e^{-sx} dB(x)`,
//! its first moment, its CDF and a sampler. Parameters are checked once, when
//! the value is built; after that every method is total on its domain.
//!
//! The textual literal form (`exp(b)`, `unif(lo,hi)`, `erlang2(b)`,
//! `gamma3(b)`) is what scenario files and CLI flags use.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// Below this value of `s·(hi-lo)` the uniform transform switches to a Taylor expansion.
const UNIFORM_TAYLOR_THRESHOLD: f64 = 1e-8;

/// The parameters of one service-time law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    Erlang2 { rate: f64 },
    Gamma3 { rate: f64 },
}

/// A validated service-time distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceDistribution(Law);

impl ServiceDistribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(Self(Law::Exponential { rate }))
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "uniform bounds must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self(Law::Uniform { lo, hi }))
    }

    pub fn erlang2(rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(Self(Law::Erlang2 { rate }))
    }

    pub fn gamma3(rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(Self(Law::Gamma3 { rate }))
    }

    pub fn from_law(law: Law) -> Result<Self> {
        match law {
            Law::Exponential { rate } => Self::exponential(rate),
            Law::Uniform { lo, hi } => Self::uniform(lo, hi),
            Law::Erlang2 { rate } => Self::erlang2(rate),
            Law::Gamma3 { rate } => Self::gamma3(rate),
        }
    }

    pub fn law(&self) -> Law {
        self.0
    }

    /// Laplace-Stieltjes transform `β(s)` for `s >= 0`.
    pub fn lst(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::Domain(format!("transform argument must be >= 0, got {s}")));
        }
        Ok(self.lst_unchecked(s))
    }

    /// `β(s)` without the domain check; callers guarantee `s >= 0`.
    pub(crate) fn lst_unchecked(&self, s: f64) -> f64 {
        match self.0 {
            Law::Exponential { rate } => rate / (s + rate),
            Law::Erlang2 { rate } => (rate / (s + rate)).powi(2),
            Law::Gamma3 { rate } => (rate / (s + rate)).powi(3),
            Law::Uniform { lo, hi } => {
                let u = s * (hi - lo);
                let head = (-s * lo).exp();
                if u < UNIFORM_TAYLOR_THRESHOLD {
                    // (1 - e^{-u}) / u = 1 - u/2 + u^2/6 - ...
                    head * (1.0 - u / 2.0 + u * u / 6.0)
                } else {
                    head * -(-u).exp_m1() / u
                }
            }
        }
    }

    /// Mean service time `β₁`.
    pub fn moment1(&self) -> f64 {
        match self.0 {
            Law::Exponential { rate } => 1.0 / rate,
            Law::Uniform { lo, hi } => (lo + hi) / 2.0,
            Law::Erlang2 { rate } => 2.0 / rate,
            Law::Gamma3 { rate } => 3.0 / rate,
        }
    }

    /// Second raw moment; used for the Pollaczek-Khinchine mean wait.
    pub fn moment2(&self) -> f64 {
        match self.0 {
            Law::Exponential { rate } => 2.0 / (rate * rate),
            Law::Uniform { lo, hi } => (lo * lo + lo * hi + hi * hi) / 3.0,
            Law::Erlang2 { rate } => 6.0 / (rate * rate),
            Law::Gamma3 { rate } => 12.0 / (rate * rate),
        }
    }

    /// Distribution function `B(x)`; zero for `x <= 0`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.0 {
            Law::Exponential { rate } => -(-rate * x).exp_m1(),
            Law::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Law::Erlang2 { rate } => {
                let y = rate * x;
                (1.0 - (-y).exp() * (1.0 + y)).max(0.0)
            }
            Law::Gamma3 { rate } => {
                let y = rate * x;
                (1.0 - (-y).exp() * (1.0 + y + 0.5 * y * y)).max(0.0)
            }
        }
    }

    /// One draw. Erlang2 and Gamma3 are sums of 2 and 3 exponential draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.0 {
            Law::Exponential { rate } => exp_draw(rng, rate),
            Law::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Law::Erlang2 { rate } => exp_draw(rng, rate) + exp_draw(rng, rate),
            Law::Gamma3 { rate } => exp_draw(rng, rate) + exp_draw(rng, rate) + exp_draw(rng, rate),
        }
    }
}

fn exp_draw<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e / rate
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("rate must be positive, got {rate}")))
    }
}

impl fmt::Display for ServiceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Law::Exponential { rate } => write!(f, "exp({rate})"),
            Law::Uniform { lo, hi } => write!(f, "unif({lo},{hi})"),
            Law::Erlang2 { rate } => write!(f, "erlang2({rate})"),
            Law::Gamma3 { rate } => write!(f, "gamma3({rate})"),
        }
    }
}

impl FromStr for ServiceDistribution {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, rest) = text
            .split_once('(')
            .ok_or_else(|| Error::Parse(format!("unknown distribution literal '{text}'")))?;
        let body = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("missing ')' in distribution literal '{text}'")))?;
        let args = body
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number '{}' in '{text}'", a.trim())))
            })
            .collect::<Result<Vec<f64>>>()?;
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!(
                    "'{}' takes {n} argument(s), got {} in '{text}'",
                    name.trim(),
                    args.len()
                )))
            }
        };
        match name.trim() {
            "exp" => arity(1).and_then(|_| Self::exponential(args[0])),
            "unif" => arity(2).and_then(|_| Self::uniform(args[0], args[1])),
            "erlang2" => arity(1).and_then(|_| Self::erlang2(args[0])),
            "gamma3" => arity(1).and_then(|_| Self::gamma3(args[0])),
            other => Err(Error::Parse(format!("unknown distribution '{other}' in '{text}'"))),
        }
    }
}

impl serde::Serialize for ServiceDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for ServiceDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
