//! Command-line surface.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numeric failure,
//! 3 stationarity refusal. Results go to stdout, diagnostics to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};
use crate::estimation::{
    empirical_moment, estimate_arrival_rate, estimate_service_rate, ObservationKind, ObservationSample,
};
use crate::lst_inversion::{invert, InversionSpec, DEFAULT_ORDER};
use crate::reproduce::{align, reproduce, Reproduced, Selection};
use crate::scenario::{load_scenario, Scenario, SingleQueue};
use crate::sim_oracle::{simulate_mg1, simulate_priority, SimConfig, SimResult};
use crate::traffic::{reference_scenario, traffic_coefficients, PreemptionDiscipline, PriorityScenario};
use crate::waiting_time::{traffic_intensity, wait_cdf, wait_lst, Discipline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "quayside",
    version,
    about = "Waiting times and traffic coefficients for single-berth queues"
)]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Waiting-time transform w(s) of an M|G|1 queue
    Wait(WaitArgs),
    /// Waiting-time distribution W(x) of a stationary M|G|1 queue
    Cdf(CdfArgs),
    /// Traffic coefficients of a preemptive-priority system
    Traffic(TrafficArgs),
    /// Simulate a scenario and report estimates with 95% confidence half-widths
    Simulate(SimulateArgs),
    /// Method-of-moments estimates from an observation file
    Estimate(EstimateArgs),
    /// Invert a Laplace transform from the built-in catalog
    Invert(InvertArgs),
    /// Recompute the published tables and list misprints
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
struct QueueArgs {
    /// JSON file with arrival_rate, service and order
    #[arg(long, conflicts_with_all = ["order", "service", "rate"])]
    scenario: Option<PathBuf>,
    /// Service order: fifo or lifo
    #[arg(long)]
    order: Option<Discipline>,
    /// Service law: exp(b), unif(lo,hi), erlang2(b) or gamma3(b)
    #[arg(long)]
    service: Option<ServiceDistribution>,
    /// Poisson arrival rate
    #[arg(long)]
    rate: Option<f64>,
}

impl QueueArgs {
    fn resolve(&self) -> Result<SingleQueue> {
        if let Some(path) = &self.scenario {
            return match load_scenario(path)? {
                Scenario::Single(q) => Ok(q),
                Scenario::Priority(_) => Err(Error::InvalidParameter(format!(
                    "{} describes a priority system; expected arrival_rate, service and order",
                    path.display()
                ))),
            };
        }
        match (self.order, self.service, self.rate) {
            (Some(order), Some(service), Some(arrival_rate)) => Ok(SingleQueue {
                arrival_rate,
                service,
                order,
            }),
            _ => Err(Error::InvalidParameter(
                "--order, --service and --rate are required unless --scenario is given".into(),
            )),
        }
    }
}

#[derive(Debug, Args)]
struct WaitArgs {
    #[command(flatten)]
    queue: QueueArgs,
    /// Transform arguments, comma separated
    #[arg(long = "s", value_delimiter = ',', required = true)]
    s: Vec<f64>,
}

#[derive(Debug, Args)]
struct CdfArgs {
    #[command(flatten)]
    queue: QueueArgs,
    /// Time points, comma separated
    #[arg(long = "x", value_delimiter = ',', required = true)]
    x: Vec<f64>,
    /// Gaver-Stehfest order (even, 4 to 20)
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    stehfest: usize,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["scenario", "table"])))]
struct TrafficArgs {
    /// JSON file with discipline and classes
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Published table whose inputs to use, e.g. 4.4.1
    #[arg(long)]
    table: Option<String>,
    /// Override the preemption discipline: resume, loss or repeat
    #[arg(long)]
    discipline: Option<PreemptionDiscipline>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario file, either shape
    #[arg(long)]
    scenario: PathBuf,
    /// Measured arrivals (after warmup)
    #[arg(long, default_value_t = 1_000_000)]
    arrivals: usize,
    /// Discarded initial arrivals [default: 10% of --arrivals]
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long, env = "QUAYSIDE_SEED", default_value_t = 1)]
    seed: u64,
    /// ECDF points, comma separated
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
    /// Batches for the batch-means intervals
    #[arg(long, default_value_t = crate::sim_oracle::DEFAULT_BATCHES)]
    batches: usize,
}

#[derive(Debug, Args)]
#[command(after_help = "Arrival data may be per-period arrival counts or interarrival times. \
The estimate is the sample mean in both cases: with counts it is the arrival rate per period, \
with interarrival times it is the mean gap, whose reciprocal is the rate.")]
struct EstimateArgs {
    /// arrival or service
    #[arg(long)]
    kind: ObservationKind,
    /// One observation per line; '#' starts a comment
    #[arg(long)]
    file: PathBuf,
}

#[derive(Debug, Args)]
struct InvertArgs {
    /// one_over_s, one_over_s_plus_1, or a service law (its CDF is recovered)
    #[arg(long)]
    transform: String,
    /// Time points, comma separated
    #[arg(long = "x", value_delimiter = ',', required = true)]
    x: Vec<f64>,
    /// Gaver-Stehfest order (even, 4 to 20)
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// all, wait, traffic, ids, or a comma-separated list of table ids
    #[arg(long, default_value = "all")]
    tables: String,
    /// Gaver-Stehfest order for the W(x) column
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    stehfest: usize,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out).and_then(|()| out.flush().map_err(Error::from)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Report {
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    /// Extra lines shown after the table in text mode only.
    footer: Vec<String>,
}

impl Report {
    fn new(headers: Vec<&'static str>) -> Self {
        Self {
            headers,
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Text => {
                let headers: Vec<String> = self.headers.iter().map(|h| h.to_string()).collect();
                out.write_all(align(&headers, &self.rows).as_bytes())?;
                for line in &self.footer {
                    writeln!(out, "{line}")?;
                }
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.headers).map_err(csv_error)?;
                for row in &self.rows {
                    w.write_record(row).map_err(csv_error)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Wait(args) => wait(args)?.write(cli.format, out),
        Command::Cdf(args) => cdf(args)?.write(cli.format, out),
        Command::Traffic(args) => traffic(args)?.write(cli.format, out),
        Command::Simulate(args) => simulate(args)?.write(cli.format, out),
        Command::Estimate(args) => estimate(args)?.write(cli.format, out),
        Command::Invert(args) => invert_cmd(args)?.write(cli.format, out),
        Command::Reproduce(args) => reproduce_cmd(args, cli.format, out),
    }
}

fn wait(args: &WaitArgs) -> Result<Report> {
    let q = args.queue.resolve()?;
    let mut r = Report::new(vec!["order", "s", "w", "rho", "stationary", "kendall_iterations"]);
    for &s in &args.s {
        let w = wait_lst(q.order, &q.service, q.arrival_rate, s)?;
        r.rows.push(vec![
            q.order.to_string(),
            s.to_string(),
            w.value.to_string(),
            traffic_intensity(&q.service, q.arrival_rate).to_string(),
            w.stationary.to_string(),
            w.solver.map(|b| b.iterations.to_string()).unwrap_or_default(),
        ]);
    }
    Ok(r)
}

fn cdf(args: &CdfArgs) -> Result<Report> {
    let q = args.queue.resolve()?;
    let spec = InversionSpec::gaver_stehfest(args.stehfest)?;
    let mut r = Report::new(vec!["order", "x", "W", "rho", "stehfest_order"]);
    for &x in &args.x {
        let w = wait_cdf(q.order, &q.service, q.arrival_rate, x, &spec)?;
        r.rows.push(vec![
            q.order.to_string(),
            x.to_string(),
            w.value.to_string(),
            traffic_intensity(&q.service, q.arrival_rate).to_string(),
            spec.order().to_string(),
        ]);
    }
    Ok(r)
}

fn priority_scenario(path: &std::path::Path) -> Result<PriorityScenario> {
    match load_scenario(path)? {
        Scenario::Priority(sc) => Ok(sc),
        Scenario::Single(_) => Err(Error::InvalidParameter(format!(
            "{} describes a single queue; expected discipline and classes",
            path.display()
        ))),
    }
}

fn traffic(args: &TrafficArgs) -> Result<Report> {
    let mut sc = match (&args.scenario, &args.table) {
        (Some(path), _) => priority_scenario(path)?,
        (None, Some(id)) => reference_scenario(id)?,
        (None, None) => unreachable!("clap enforces one source"),
    };
    if let Some(d) = args.discipline {
        sc = sc.with_discipline(d);
    }
    let report = traffic_coefficients(&sc)?;
    let mut r = Report::new(vec![
        "class",
        "lambda",
        "service",
        "sigma",
        "increment",
        "rho",
        "stationary",
    ]);
    for (k, ((class, c), inc)) in sc
        .classes()
        .iter()
        .zip(&report.classes)
        .zip(report.increments())
        .enumerate()
    {
        r.rows.push(vec![
            (k + 1).to_string(),
            class.lambda().to_string(),
            class.service().to_string(),
            c.sigma.to_string(),
            inc.to_string(),
            c.rho.to_string(),
            c.stationary.to_string(),
        ]);
    }
    r.footer.push(format!("discipline: {}", report.discipline));
    r.footer.push(match report.first_overloaded_class {
        None => "verdict: stationary".to_string(),
        Some(1) => "verdict: class 1 overloaded, no stationary prefix".to_string(),
        Some(k) => format!("verdict: classes 1..{} stationary, class {k} overloaded", k - 1),
    });
    Ok(r)
}

fn simulate(args: &SimulateArgs) -> Result<Report> {
    let mut grid = args.grid.clone();
    grid.sort_by(f64::total_cmp);
    let mut cfg = SimConfig::new(args.seed, args.arrivals)
        .with_grid(grid)
        .with_batches(args.batches);
    if let Some(w) = args.warmup {
        cfg = cfg.with_warmup(w);
    }
    let result = match load_scenario(&args.scenario)? {
        Scenario::Single(q) => simulate_mg1(&q.service, q.arrival_rate, q.order, &cfg)?,
        Scenario::Priority(sc) => simulate_priority(&sc, &cfg)?,
    };
    Ok(sim_report(&result))
}

fn sim_report(res: &SimResult) -> Report {
    let mut r = Report::new(vec!["metric", "value", "half_width"]);
    let mut push = |metric: String, value: String, hw: String| r.rows.push(vec![metric, value, hw]);
    push(
        "mean_wait".into(),
        res.mean_wait.value.to_string(),
        res.mean_wait.half_width.to_string(),
    );
    let multi = res.class_mean_wait.len() > 1;
    if multi {
        for (k, e) in res.class_mean_wait.iter().enumerate() {
            push(
                format!("mean_wait_class_{}", k + 1),
                e.value.to_string(),
                e.half_width.to_string(),
            );
        }
    }
    for p in &res.ecdf {
        push(format!("ecdf({})", p.x), p.value.to_string(), p.half_width.to_string());
    }
    for (k, e) in res.utilization_prefix.iter().enumerate() {
        push(
            format!("utilization_prefix_{}", k + 1),
            e.value.to_string(),
            e.half_width.to_string(),
        );
    }
    for (k, (c, l)) in res.completed.iter().zip(&res.lost).enumerate() {
        push(format!("completed_class_{}", k + 1), c.to_string(), String::new());
        push(format!("lost_class_{}", k + 1), l.to_string(), String::new());
    }
    push("horizon".into(), res.horizon.to_string(), String::new());
    r
}

fn estimate(args: &EstimateArgs) -> Result<Report> {
    let sample = ObservationSample::from_file(&args.file, args.kind)?;
    let mut r = Report::new(vec!["quantity", "value"]);
    r.rows.push(vec!["n".into(), sample.len().to_string()]);
    r.rows
        .push(vec!["nu1".into(), empirical_moment(&sample, 1)?.to_string()]);
    r.rows
        .push(vec!["nu2".into(), empirical_moment(&sample, 2)?.to_string()]);
    match args.kind {
        ObservationKind::Arrivals => r
            .rows
            .push(vec!["arrival_rate".into(), estimate_arrival_rate(&sample).to_string()]),
        ObservationKind::Service => r
            .rows
            .push(vec!["service_rate".into(), estimate_service_rate(&sample)?.to_string()]),
    }
    Ok(r)
}

fn invert_cmd(args: &InvertArgs) -> Result<Report> {
    let spec = InversionSpec::gaver_stehfest(args.order)?;
    let name = args.transform.trim();
    let mut r = Report::new(vec!["transform", "x", "order", "value", "exact"]);
    for &x in &args.x {
        let (value, exact) = match name {
            "one_over_s" => (invert(|s| Ok(1.0 / s), x, &spec)?, 1.0),
            "one_over_s_plus_1" => (invert(|s| Ok(1.0 / (s + 1.0)), x, &spec)?, (-x).exp()),
            literal => {
                let d: ServiceDistribution = literal.parse().map_err(|e| match e {
                    Error::Parse(msg) => Error::InvalidParameter(format!(
                        "unknown transform '{literal}' (one_over_s, one_over_s_plus_1 or a service law): {msg}"
                    )),
                    other => other,
                })?;
                (invert(|s| d.lst(s).map(|b| b / s), x, &spec)?, d.cdf(x))
            }
        };
        r.rows.push(vec![
            name.to_string(),
            x.to_string(),
            spec.order().to_string(),
            value.to_string(),
            exact.to_string(),
        ]);
    }
    Ok(r)
}

fn reproduce_cmd(args: &ReproduceArgs, format: Format, out: &mut dyn Write) -> Result<()> {
    let spec = InversionSpec::gaver_stehfest(args.stehfest)?;
    let ids: Vec<String>;
    let selection = match args.tables.trim() {
        "all" => Selection::All,
        "wait" => Selection::Wait,
        "traffic" => Selection::Traffic,
        "ids" => {
            for id in crate::reference_tables::ReferenceTables::get().ids() {
                writeln!(out, "{id}")?;
            }
            return Ok(());
        }
        list => {
            ids = list.split(',').map(|s| s.trim().to_string()).collect();
            Selection::Ids(&ids)
        }
    };
    let rep = reproduce(selection, &spec)?;
    match format {
        Format::Text => {
            for t in &rep.tables {
                writeln!(out, "{}", t.render().to_text())?;
            }
            let summary = rep.errata_summary();
            writeln!(out, "Errata summary ({} cells):", summary.len())?;
            for line in summary {
                writeln!(out, "  {line}")?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["table", "row", "quantity", "recomputed", "printed", "status"])
                .map_err(csv_error)?;
            for t in &rep.tables {
                match t {
                    Reproduced::Wait(wt) => {
                        for (i, row) in wt.rows.iter().enumerate() {
                            let status = if row.matches() { "MATCH" } else { "MISMATCH" };
                            w.write_record([
                                &wt.table_id,
                                &(i + 1).to_string(),
                                "w(s)",
                                &row.recomputed.to_string(),
                                &row.printed,
                                status,
                            ])
                            .map_err(csv_error)?;
                            let ours = match &row.cdf {
                                Ok(v) => v.to_string(),
                                Err(msg) => msg.clone(),
                            };
                            w.write_record([
                                &wt.table_id,
                                &(i + 1).to_string(),
                                "W(x)",
                                &ours,
                                &row.cdf_printed,
                                "UNGRADED",
                            ])
                            .map_err(csv_error)?;
                        }
                    }
                    Reproduced::Traffic(rec) => {
                        for c in &rec.cells {
                            w.write_record([
                                &rec.table_id,
                                &c.row.to_string(),
                                &c.column.to_string(),
                                &c.recomputed.to_string(),
                                &c.printed,
                                &c.status.to_string(),
                            ])
                            .map_err(csv_error)?;
                        }
                    }
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}
