//! Traffic coefficients of the preemptive-priority queue M_r|G_r|1.
//!
//! Class 1 has the highest priority. A class-`i` job in service is
//! interrupted by any arrival of classes `1..i-1`, which arrive at the
//! cumulative rate `σ_{i-1}`. The server time consumed per admitted class-`i`
//! job depends on what happens to an interrupted job:
//!
//! | discipline | server time per job                  |
//! |------------|--------------------------------------|
//! | resume     | `β_{i1}`                             |
//! | loss       | `(1 - β_i(σ_{i-1})) / σ_{i-1}`       |
//! | repeat     | `(1/β_i(σ_{i-1}) - 1) / σ_{i-1}`     |
//!
//! and `ρ_k` is the sum of `λ_i` times that quantity over `i <= k`. Class 1
//! is never interrupted, so its term is `λ₁β₁₁` under all three.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};
use crate::reference_tables::ReferenceTables;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreemptionDiscipline {
    /// Interrupted service continues where it stopped.
    Resume,
    /// Interrupted job leaves the system.
    Loss,
    /// Interrupted job starts over with a fresh service time.
    Repeat,
}

impl fmt::Display for PreemptionDiscipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PreemptionDiscipline::Resume => "resume",
            PreemptionDiscipline::Loss => "loss",
            PreemptionDiscipline::Repeat => "repeat",
        })
    }
}

impl FromStr for PreemptionDiscipline {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "resume" => Ok(Self::Resume),
            "loss" => Ok(Self::Loss),
            "repeat" => Ok(Self::Repeat),
            other => Err(Error::Parse(format!(
                "unknown preemption discipline '{other}' (resume|loss|repeat)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorityClass {
    lambda: f64,
    service: ServiceDistribution,
}

impl PriorityClass {
    pub fn new(lambda: f64, service: ServiceDistribution) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "arrival rate must be positive, got {lambda}"
            )));
        }
        Ok(Self { lambda, service })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn service(&self) -> &ServiceDistribution {
        &self.service
    }
}

/// Priority classes in priority order (index 0 is class 1) and the
/// preemption discipline shared by all of them.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityScenario {
    classes: Vec<PriorityClass>,
    discipline: PreemptionDiscipline,
}

impl PriorityScenario {
    pub fn new(classes: Vec<PriorityClass>, discipline: PreemptionDiscipline) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidParameter("scenario needs at least one class".into()));
        }
        Ok(Self { classes, discipline })
    }

    pub fn classes(&self) -> &[PriorityClass] {
        &self.classes
    }

    pub fn discipline(&self) -> PreemptionDiscipline {
        self.discipline
    }

    pub fn with_discipline(&self, discipline: PreemptionDiscipline) -> Self {
        Self {
            classes: self.classes.clone(),
            discipline,
        }
    }

    /// `σ_k = λ₁ + … + λ_k` for every class.
    pub fn cumulative_rates(&self) -> Vec<f64> {
        self.classes
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c.lambda;
                Some(*acc)
            })
            .collect()
    }
}

/// Expected server time consumed per admitted job of a class whose service
/// is interrupted at rate `interrupt_rate` (zero for the top class).
pub fn effective_service(
    discipline: PreemptionDiscipline,
    service: &ServiceDistribution,
    interrupt_rate: f64,
) -> Result<f64> {
    if interrupt_rate == 0.0 || discipline == PreemptionDiscipline::Resume {
        return Ok(service.moment1());
    }
    let beta = service.lst(interrupt_rate)?;
    match discipline {
        PreemptionDiscipline::Resume => unreachable!(),
        PreemptionDiscipline::Loss => Ok((1.0 - beta) / interrupt_rate),
        PreemptionDiscipline::Repeat => {
            let value = (1.0 / beta - 1.0) / interrupt_rate;
            if beta > 0.0 && value.is_finite() {
                Ok(value)
            } else {
                Err(Error::Overflow {
                    class: 0,
                    sigma: interrupt_rate,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassTraffic {
    /// `σ_k`.
    pub sigma: f64,
    /// Cumulative `ρ_k`.
    pub rho: f64,
    pub stationary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficReport {
    pub discipline: PreemptionDiscipline,
    pub classes: Vec<ClassTraffic>,
    pub stationary: bool,
    /// 1-based index of the first class with `ρ_k >= 1`.
    pub first_overloaded_class: Option<usize>,
}

impl TrafficReport {
    /// Per-class contributions `ρ_k - ρ_{k-1}`.
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.classes
            .iter()
            .map(|c| {
                let inc = c.rho - prev;
                prev = c.rho;
                inc
            })
            .collect()
    }

    pub fn rhos(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.rho).collect()
    }
}

pub fn traffic_coefficients(sc: &PriorityScenario) -> Result<TrafficReport> {
    let mut classes = Vec::with_capacity(sc.classes.len());
    let mut sigma_prev = 0.0;
    let mut rho = 0.0;
    for (i, class) in sc.classes.iter().enumerate() {
        let per_job = effective_service(sc.discipline, &class.service, sigma_prev).map_err(|e| match e {
            Error::Overflow { sigma, .. } => Error::Overflow { class: i + 1, sigma },
            other => other,
        })?;
        rho += class.lambda * per_job;
        sigma_prev += class.lambda;
        classes.push(ClassTraffic {
            sigma: sigma_prev,
            rho,
            stationary: rho < 1.0,
        });
    }
    let first_overloaded_class = classes.iter().position(|c| !c.stationary).map(|i| i + 1);
    Ok(TrafficReport {
        discipline: sc.discipline,
        stationary: first_overloaded_class.is_none(),
        classes,
        first_overloaded_class,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StationarityVerdict {
    pub stationary: bool,
    /// Classes `1..=stationary_prefix` have `ρ_k < 1`.
    pub stationary_prefix: usize,
    pub first_overloaded_class: Option<usize>,
}

pub fn stationarity_verdict(report: &TrafficReport) -> StationarityVerdict {
    let prefix = report.classes.iter().take_while(|c| c.rho < 1.0).count();
    let first = (prefix < report.classes.len()).then_some(prefix + 1);
    StationarityVerdict {
        stationary: first.is_none(),
        stationary_prefix: prefix,
        first_overloaded_class: first,
    }
}

pub const MATCH_TOLERANCE: f64 = 0.02;
pub const ROUNDING_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellStatus {
    Match,
    Rounding,
    Erratum,
}

impl CellStatus {
    pub fn classify(delta: f64) -> Self {
        let d = delta.abs();
        if d <= MATCH_TOLERANCE {
            CellStatus::Match
        } else if d <= ROUNDING_TOLERANCE {
            CellStatus::Rounding
        } else {
            CellStatus::Erratum
        }
    }
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellStatus::Match => "MATCH",
            CellStatus::Rounding => "ROUNDING",
            CellStatus::Erratum => "ERRATUM",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrafficColumn {
    Beta1,
    Sigma,
    Rho,
}

impl fmt::Display for TrafficColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrafficColumn::Beta1 => "beta_k1",
            TrafficColumn::Sigma => "sigma_k",
            TrafficColumn::Rho => "rho_k",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellCheck {
    /// 1-based class index.
    pub row: usize,
    pub column: TrafficColumn,
    pub printed: String,
    pub published: f64,
    pub recomputed: f64,
    pub status: CellStatus,
}

impl CellCheck {
    fn new(row: usize, column: TrafficColumn, printed: &str, published: f64, recomputed: f64) -> Self {
        Self {
            row,
            column,
            printed: printed.to_string(),
            published,
            recomputed,
            status: CellStatus::classify(recomputed - published),
        }
    }

    pub fn delta(&self) -> f64 {
        self.recomputed - self.published
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrataRecord {
    pub table_id: String,
    pub title: String,
    pub scenario: PriorityScenario,
    pub report: TrafficReport,
    pub cells: Vec<CellCheck>,
}

impl ErrataRecord {
    pub fn errata(&self) -> impl Iterator<Item = &CellCheck> {
        self.cells.iter().filter(|c| c.status == CellStatus::Erratum)
    }

    pub fn cell(&self, row: usize, column: TrafficColumn) -> Option<&CellCheck> {
        self.cells.iter().find(|c| c.row == row && c.column == column)
    }
}

/// The scenario behind one of the published traffic tables.
pub fn reference_scenario(table_id: &str) -> Result<PriorityScenario> {
    let table = ReferenceTables::get()
        .traffic_table(table_id)
        .ok_or_else(|| Error::UnknownTable(table_id.to_string()))?;
    let classes = table
        .rows
        .iter()
        .map(|r| PriorityClass::new(r.lambda, r.service))
        .collect::<Result<Vec<_>>>()?;
    PriorityScenario::new(classes, table.discipline)
}

/// Recomputes every cell of a published traffic table and grades the
/// printed values against the recomputation.
pub fn recompute_table(table_id: &str) -> Result<ErrataRecord> {
    let table = ReferenceTables::get()
        .traffic_table(table_id)
        .ok_or_else(|| Error::UnknownTable(table_id.to_string()))?;
    let scenario = reference_scenario(table_id)?;
    let report = traffic_coefficients(&scenario)?;
    let mut cells = Vec::new();
    for (i, (row, computed)) in table.rows.iter().zip(&report.classes).enumerate() {
        let k = i + 1;
        if let Some(beta) = &row.beta1 {
            cells.push(CellCheck::new(
                k,
                TrafficColumn::Beta1,
                &beta.printed,
                beta.value,
                row.service.moment1(),
            ));
        }
        if let Some(sigma) = &row.sigma {
            cells.push(CellCheck::new(
                k,
                TrafficColumn::Sigma,
                &sigma.printed,
                sigma.value,
                computed.sigma,
            ));
        }
        cells.push(CellCheck::new(
            k,
            TrafficColumn::Rho,
            &row.rho.printed,
            row.rho.value,
            computed.rho,
        ));
    }
    Ok(ErrataRecord {
        table_id: table.id.clone(),
        title: table.title.clone(),
        scenario,
        report,
        cells,
    })
}
