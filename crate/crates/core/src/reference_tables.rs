//! Published numeric tables used for regression and errata reporting.
//!
//! `data/reference_tables.json` keeps every printed output cell twice: the
//! string exactly as typeset (decimal comma) and its decimal-point value.
//! Inputs are stored as numbers and distribution literals.

use std::sync::OnceLock;

use serde::Deserialize;

use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};
use crate::traffic::PreemptionDiscipline;
use crate::waiting_time::Discipline;

const RAW: &str = include_str!("../data/reference_tables.json");

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrintedCell {
    pub printed: String,
    pub value: f64,
}

impl PrintedCell {
    /// The printed string read with a decimal comma.
    pub fn parse_printed(&self) -> Result<f64> {
        self.printed
            .replace(',', ".")
            .parse()
            .map_err(|_| Error::Parse(format!("unreadable printed value '{}'", self.printed)))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaitRow {
    pub s: f64,
    pub service: ServiceDistribution,
    pub arrival_rate: f64,
    pub x: f64,
    pub w: PrintedCell,
    pub cdf: PrintedCell,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaitTable {
    pub id: String,
    pub order: Discipline,
    pub title: String,
    pub rows: Vec<WaitRow>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficRow {
    pub service: ServiceDistribution,
    pub lambda: f64,
    /// Printed mean service time (resume tables).
    #[serde(default)]
    pub beta1: Option<PrintedCell>,
    /// Printed cumulative arrival rate (loss and repeat tables).
    #[serde(default)]
    pub sigma: Option<PrintedCell>,
    pub rho: PrintedCell,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficTable {
    pub id: String,
    pub discipline: PreemptionDiscipline,
    pub title: String,
    pub rows: Vec<TrafficRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceTables {
    pub wait_tables: Vec<WaitTable>,
    pub traffic_tables: Vec<TrafficTable>,
}

impl ReferenceTables {
    pub fn get() -> &'static ReferenceTables {
        static TABLES: OnceLock<ReferenceTables> = OnceLock::new();
        TABLES.get_or_init(|| serde_json::from_str(RAW).expect("embedded reference tables are valid"))
    }

    pub fn wait_table(&self, id: &str) -> Option<&WaitTable> {
        self.wait_tables.iter().find(|t| t.id == id)
    }

    pub fn traffic_table(&self, id: &str) -> Option<&TrafficTable> {
        self.traffic_tables.iter().find(|t| t.id == id)
    }

    /// All table ids in document order.
    pub fn ids(&self) -> Vec<&str> {
        self.wait_tables
            .iter()
            .map(|t| t.id.as_str())
            .chain(self.traffic_tables.iter().map(|t| t.id.as_str()))
            .collect()
    }
}
