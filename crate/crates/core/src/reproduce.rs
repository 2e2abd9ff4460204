//! Recomputes the published tables and renders them next to the printed
//! values.
//!
//! Transform columns `w(s)` are recomputed and graded. Distribution
//! columns `W(x)` are shown from our own inversion beside the printed value
//! for inspection only; they are not graded.

use crate::error::{Error, Result};
use crate::lst_inversion::InversionSpec;
use crate::reference_tables::{ReferenceTables, WaitTable};
use crate::traffic::{recompute_table, CellStatus, ErrataRecord, TrafficColumn};
use crate::waiting_time::{traffic_intensity, wait_cdf, wait_lst};

/// Largest `|Δ|` for which a recomputed `w(s)` cell counts as a match.
pub const WAIT_MATCH_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct WaitRowCheck {
    pub s: f64,
    pub rho: f64,
    pub published: f64,
    pub printed: String,
    pub recomputed: f64,
    pub x: f64,
    /// Our `W(x)`, or the reason it is unavailable.
    pub cdf: std::result::Result<f64, String>,
    pub cdf_printed: String,
}

impl WaitRowCheck {
    pub fn delta(&self) -> f64 {
        self.recomputed - self.published
    }

    pub fn matches(&self) -> bool {
        self.delta().abs() <= WAIT_MATCH_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaitReproduction {
    pub table_id: String,
    pub title: String,
    pub rows: Vec<WaitRowCheck>,
}

pub fn reproduce_wait_table(table: &WaitTable, spec: &InversionSpec) -> Result<WaitReproduction> {
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let w = wait_lst(table.order, &row.service, row.arrival_rate, row.s)?;
            let rho = traffic_intensity(&row.service, row.arrival_rate);
            let cdf = if rho < 1.0 {
                wait_cdf(table.order, &row.service, row.arrival_rate, row.x, spec)
                    .map(|e| e.value)
                    .map_err(|e| e.to_string())
            } else {
                Err("n/a (non-stationary)".to_string())
            };
            Ok(WaitRowCheck {
                s: row.s,
                rho,
                published: row.w.value,
                printed: row.w.printed.clone(),
                recomputed: w.value,
                x: row.x,
                cdf,
                cdf_printed: row.cdf.printed.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WaitReproduction {
        table_id: table.id.clone(),
        title: table.title.clone(),
        rows,
    })
}

/// Six significant digits, decimal point.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedTable {
    pub id: String,
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Per-cell annotations, one line each.
    pub notes: Vec<String>,
}

impl RenderedTable {
    pub fn to_text(&self) -> String {
        let mut out = format!("Table {}: {}\n", self.id, self.title);
        out.push_str(&align(&self.headers, &self.rows));
        for note in &self.notes {
            out.push_str("  * ");
            out.push_str(note);
            out.push('\n');
        }
        out
    }
}

/// Left-aligned columns separated by two spaces.
pub fn align(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut l = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string();
        l.push('\n');
        l
    };
    let mut out = line(headers);
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

pub fn render_wait(rep: &WaitReproduction) -> RenderedTable {
    let headers = [
        "s",
        "rho",
        "w(s)",
        "published",
        "delta",
        "status",
        "x",
        "W(x)",
        "W(x) published",
    ];
    let rows = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                sig6(r.s),
                sig6(r.rho),
                sig6(r.recomputed),
                r.printed.replace(',', "."),
                format!("{:.1e}", r.delta()),
                if r.matches() { "MATCH" } else { "MISMATCH" }.to_string(),
                sig6(r.x),
                match &r.cdf {
                    Ok(v) => sig6(*v),
                    Err(msg) => msg.clone(),
                },
                r.cdf_printed.replace(',', "."),
            ]
        })
        .collect();
    let notes = rep
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.matches())
        .map(|(i, r)| {
            format!(
                "row {}: w(s) printed {} recomputed {}",
                i + 1,
                r.printed,
                sig6(r.recomputed)
            )
        })
        .collect();
    RenderedTable {
        id: rep.table_id.clone(),
        title: rep.title.clone(),
        headers: headers.iter().map(|h| h.to_string()).collect(),
        rows,
        notes,
    }
}

pub fn render_traffic(rec: &ErrataRecord) -> RenderedTable {
    let mut headers = vec!["class", "lambda", "service"];
    let input_col = rec
        .cells
        .iter()
        .find(|c| c.column != TrafficColumn::Rho)
        .map(|c| c.column);
    let input_name = input_col.map(|c| c.to_string()).unwrap_or_default();
    headers.extend([input_name.as_str(), "published", "rho", "published", "status"]);
    let rows = rec
        .scenario
        .classes()
        .iter()
        .enumerate()
        .map(|(i, class)| {
            let k = i + 1;
            let input = input_col.and_then(|c| rec.cell(k, c));
            let rho = rec.cell(k, TrafficColumn::Rho);
            let worst = [input, rho]
                .iter()
                .flatten()
                .map(|c| c.status)
                .max_by_key(|s| match s {
                    CellStatus::Match => 0,
                    CellStatus::Rounding => 1,
                    CellStatus::Erratum => 2,
                })
                .unwrap_or(CellStatus::Match);
            vec![
                k.to_string(),
                sig6(class.lambda()),
                class.service().to_string(),
                input.map(|c| sig6(c.recomputed)).unwrap_or_default(),
                input.map(|c| c.printed.replace(',', ".")).unwrap_or_default(),
                rho.map(|c| sig6(c.recomputed)).unwrap_or_default(),
                rho.map(|c| c.printed.replace(',', ".")).unwrap_or_default(),
                worst.to_string(),
            ]
        })
        .collect();
    let notes = rec
        .cells
        .iter()
        .filter(|c| c.status != CellStatus::Match)
        .map(|c| {
            format!(
                "row {} {}: printed {} recomputed {} ({})",
                c.row,
                c.column,
                c.printed,
                sig6(c.recomputed),
                c.status
            )
        })
        .collect();
    RenderedTable {
        id: rec.table_id.clone(),
        title: rec.title.clone(),
        headers: headers.iter().map(|h| h.to_string()).collect(),
        rows,
        notes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection<'a> {
    All,
    Wait,
    Traffic,
    Ids(&'a [String]),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reproduced {
    Wait(WaitReproduction),
    Traffic(ErrataRecord),
}

impl Reproduced {
    pub fn id(&self) -> &str {
        match self {
            Reproduced::Wait(w) => &w.table_id,
            Reproduced::Traffic(t) => &t.table_id,
        }
    }

    pub fn render(&self) -> RenderedTable {
        match self {
            Reproduced::Wait(w) => render_wait(w),
            Reproduced::Traffic(t) => render_traffic(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reproduction {
    pub tables: Vec<Reproduced>,
}

impl Reproduction {
    /// One line per cell that is not a match, in table order.
    pub fn errata_summary(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in &self.tables {
            for note in t.render().notes {
                out.push(format!("{} {note}", t.id()));
            }
        }
        out
    }
}

pub fn reproduce(selection: Selection<'_>, spec: &InversionSpec) -> Result<Reproduction> {
    let refs = ReferenceTables::get();
    let ids: Vec<String> = match selection {
        Selection::All => refs.ids().into_iter().map(String::from).collect(),
        Selection::Wait => refs.wait_tables.iter().map(|t| t.id.clone()).collect(),
        Selection::Traffic => refs.traffic_tables.iter().map(|t| t.id.clone()).collect(),
        Selection::Ids(ids) => ids.to_vec(),
    };
    let tables = ids
        .iter()
        .map(|id| {
            if let Some(t) = refs.wait_table(id) {
                reproduce_wait_table(t, spec).map(Reproduced::Wait)
            } else if refs.traffic_table(id).is_some() {
                recompute_table(id).map(Reproduced::Traffic)
            } else {
                Err(Error::UnknownTable(id.clone()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Reproduction { tables })
}
