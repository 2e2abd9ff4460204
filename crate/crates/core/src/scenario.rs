//! Scenario files.
//!
//! Two JSON shapes are accepted:
//!
//! ```json
//! {"discipline": "loss", "classes": [{"lambda": 0.3, "service": "exp(7)"}]}
//! {"arrival_rate": 4, "service": "exp(5)", "order": "fifo"}
//! ```
//!
//! The first describes a preemptive-priority system (classes in priority
//! order, highest first), the second a single M|G|1 queue. Unknown keys are
//! rejected.

use std::path::Path;

use serde::Deserialize;

use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};
use crate::traffic::{PreemptionDiscipline, PriorityClass, PriorityScenario};
use crate::waiting_time::Discipline;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQueue {
    pub arrival_rate: f64,
    pub service: ServiceDistribution,
    pub order: Discipline,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Priority(PriorityScenario),
    Single(SingleQueue),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassEntry {
    lambda: f64,
    service: ServiceDistribution,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorityEntry {
    discipline: PreemptionDiscipline,
    classes: Vec<ClassEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SingleEntry {
    arrival_rate: f64,
    service: ServiceDistribution,
    order: Discipline,
}

fn json_error(e: serde_json::Error) -> Error {
    // serde_json already appends "at line L column C"
    Error::Parse(format!("scenario: {e}"))
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(json_error)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Parse("scenario: top level must be a JSON object".into()))?;

    if obj.contains_key("classes") || obj.contains_key("discipline") {
        let entry: PriorityEntry = serde_json::from_str(text).map_err(json_error)?;
        if entry.classes.is_empty() {
            return Err(Error::InvalidParameter(
                "scenario: 'classes' must list at least one class".into(),
            ));
        }
        let classes = entry
            .classes
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                PriorityClass::new(c.lambda, c.service)
                    .map_err(|e| Error::InvalidParameter(format!("scenario: classes[{i}].lambda: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Scenario::Priority(PriorityScenario::new(classes, entry.discipline)?))
    } else if obj.contains_key("arrival_rate") {
        let entry: SingleEntry = serde_json::from_str(text).map_err(json_error)?;
        if !(entry.arrival_rate > 0.0 && entry.arrival_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scenario: arrival_rate: rate must be positive, got {}",
                entry.arrival_rate
            )));
        }
        Ok(Scenario::Single(SingleQueue {
            arrival_rate: entry.arrival_rate,
            service: entry.service,
            order: entry.order,
        }))
    } else {
        Err(Error::Parse(
            "scenario: expected either 'discipline' and 'classes' or 'arrival_rate', 'service' and 'order'".into(),
        ))
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        Error::InvalidParameter(msg) => Error::InvalidParameter(format!("{}: {msg}", path.display())),
        other => other,
    })
}
