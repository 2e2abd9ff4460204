//! Queueing analytics for single-berth systems.
//!
//! * M|G|1 waiting-time transforms under FIFO and non-preemptive LIFO
//!   ([`waiting_time`]), with the busy-period transform from Kendall's
//!   equation ([`busy_period`]) and Gaver-Stehfest inversion to the
//!   waiting-time CDF ([`lst_inversion`]).
//! * Traffic coefficients and stationarity verdicts for preemptive-priority
//!   systems under resume, loss and repeat disciplines ([`traffic`]).
//! * A seeded discrete-event simulator used to cross-check both
//!   ([`sim_oracle`]).
//!
//! ```
//! use quayside::distributions::ServiceDistribution;
//! use quayside::waiting_time::{wait_lst, Discipline};
//!
//! let d: ServiceDistribution = "exp(5)".parse().unwrap();
//! let w = wait_lst(Discipline::Fifo, &d, 4.0, 1.0).unwrap();
//! assert!((w.value - 0.6).abs() < 1e-12);
//! ```

pub mod busy_period;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod lst_inversion;
pub mod reference_tables;
pub mod reproduce;
pub mod scenario;
pub mod sim_oracle;
pub mod traffic;
pub mod waiting_time;

pub use distributions::ServiceDistribution;
pub use error::{Error, Result};
pub use traffic::{PreemptionDiscipline, PriorityClass, PriorityScenario};
pub use waiting_time::Discipline;
