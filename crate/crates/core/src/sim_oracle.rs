//! Discrete-event simulation of the single-server queue, used as an
//! independent check on every analytic output.
//!
//! Two engines share the measurement code:
//!
//! * [`simulate_mg1`]: M|G|1 under FIFO or non-preemptive LIFO (an arrival
//!   never interrupts the job in service; it goes on top of the stack).
//! * [`simulate_priority`]: M_r|G_r|1 with preemptive priority. A higher
//!   class arriving interrupts a lower class in service immediately. Within
//!   a class jobs are served FIFO; an interrupted job goes back to the head
//!   of its class queue (resume keeps its remaining work, repeat draws a
//!   fresh service time) or leaves the system (loss).
//!
//! Waiting time is the time from arrival to the first start of service.
//! The first `warmup_arrivals` jobs are simulated but not measured; the
//! measurement window for time averages runs from the arrival of the first
//! measured job to the last arrival. Confidence half-widths are 95%
//! batch-means intervals, batches formed by consecutive arrivals.
//!
//! Randomness comes from ChaCha8 substreams of one master seed: class `c`
//! draws interarrival gaps from stream `2c` and service times from stream
//! `2c + 1`, so adding a class leaves the other classes' draws unchanged.
//! Service times are drawn when a job arrives.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};
use crate::traffic::{stationarity_verdict, traffic_coefficients, PreemptionDiscipline, PriorityScenario};
use crate::waiting_time::Discipline;

pub const DEFAULT_BATCHES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    /// Measured arrivals, after warmup.
    pub total_arrivals: usize,
    pub warmup_arrivals: usize,
    /// Sorted points at which the waiting-time ECDF is reported.
    pub ecdf_grid: Vec<f64>,
    pub batches: usize,
}

impl SimConfig {
    /// Warmup defaults to 10% of `total_arrivals`.
    pub fn new(seed: u64, total_arrivals: usize) -> Self {
        Self {
            seed,
            total_arrivals,
            warmup_arrivals: total_arrivals / 10,
            ecdf_grid: Vec::new(),
            batches: DEFAULT_BATCHES,
        }
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.ecdf_grid = grid;
        self
    }

    pub fn with_warmup(mut self, warmup_arrivals: usize) -> Self {
        self.warmup_arrivals = warmup_arrivals;
        self
    }

    pub fn with_batches(mut self, batches: usize) -> Self {
        self.batches = batches;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.batches < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 batches, got {}",
                self.batches
            )));
        }
        if self.total_arrivals < self.batches {
            return Err(Error::InvalidParameter(format!(
                "total arrivals ({}) must be at least the number of batches ({})",
                self.total_arrivals, self.batches
            )));
        }
        if self.ecdf_grid.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidParameter(
                "ECDF grid points must be finite and >= 0".into(),
            ));
        }
        if self.ecdf_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("ECDF grid must be sorted".into()));
        }
        Ok(())
    }

    fn batch_size(&self) -> usize {
        self.total_arrivals / self.batches
    }

    /// Batch of the `measured`-th measured job; the last batch absorbs the remainder.
    fn batch_of(&self, measured: usize) -> usize {
        (measured / self.batch_size()).min(self.batches - 1)
    }
}

/// Point estimate with a 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.half_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcdfPoint {
    pub x: f64,
    pub value: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimDiagnostics {
    /// Sum of all service segments over the whole run.
    pub served_time: f64,
    /// Time the server was non-idle over the whole run, integrated event to event.
    pub busy_time: f64,
    /// Time of the last event.
    pub run_length: f64,
    /// Largest `|served - required|` over completed service attempts.
    pub max_service_overshoot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub mean_wait: Estimate,
    pub class_mean_wait: Vec<Estimate>,
    pub ecdf: Vec<EcdfPoint>,
    /// Entry `k` is the fraction of time the server spends on classes `1..=k+1`.
    pub utilization_prefix: Vec<Estimate>,
    pub completed: Vec<u64>,
    pub lost: Vec<u64>,
    /// Length of the measurement window.
    pub horizon: f64,
    pub diagnostics: SimDiagnostics,
}

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn batch_estimate(overall: f64, batch_values: &[f64]) -> Estimate {
    let m = batch_values.len();
    if m < 2 {
        return Estimate {
            value: overall,
            half_width: f64::INFINITY,
        };
    }
    let mean = batch_values.iter().sum::<f64>() / m as f64;
    let var = batch_values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (m - 1) as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(0.975);
    Estimate {
        value: overall,
        half_width: t * (var / m as f64).sqrt(),
    }
}

/// Busy time per batch and class inside the measurement window.
struct Accountant {
    /// Start time of each batch opened so far.
    boundaries: Vec<f64>,
    end: Option<f64>,
    busy: Vec<Vec<f64>>,
    classes: usize,
}

impl Accountant {
    fn new(classes: usize) -> Self {
        Self {
            boundaries: Vec::new(),
            end: None,
            busy: Vec::new(),
            classes,
        }
    }

    fn open_batch(&mut self, t: f64) {
        self.boundaries.push(t);
        self.busy.push(vec![0.0; self.classes]);
    }

    fn close(&mut self, t: f64) {
        self.end = Some(t);
    }

    /// Adds a service segment; every boundary at or before `end` must already be open.
    fn add(&mut self, class: usize, start: f64, end: f64) {
        let Some(&window_start) = self.boundaries.first() else {
            return;
        };
        let mut s = start.max(window_start);
        let e = end.min(self.end.unwrap_or(f64::INFINITY));
        if e <= s {
            return;
        }
        let mut b = self.boundaries.partition_point(|&x| x <= s) - 1;
        while s < e {
            let batch_end = self
                .boundaries
                .get(b + 1)
                .copied()
                .or(self.end)
                .unwrap_or(f64::INFINITY);
            let upto = e.min(batch_end);
            self.busy[b][class] += upto - s;
            s = upto;
            b += 1;
        }
    }

    fn utilization_prefix(&self) -> (f64, Vec<Estimate>) {
        let end = self.end.expect("window closed before reporting");
        let start = self.boundaries[0];
        let horizon = end - start;
        let durations: Vec<f64> = (0..self.boundaries.len())
            .map(|b| self.boundaries.get(b + 1).copied().unwrap_or(end) - self.boundaries[b])
            .collect();
        let prefix = (0..self.classes)
            .map(|k| {
                let busy_in = |b: usize| self.busy[b][..=k].iter().sum::<f64>();
                let total: f64 = (0..self.busy.len()).map(busy_in).sum();
                let per_batch: Vec<f64> = (0..self.busy.len())
                    .filter(|&b| durations[b] > 0.0)
                    .map(|b| busy_in(b) / durations[b])
                    .collect();
                batch_estimate(total / horizon, &per_batch)
            })
            .collect();
        (horizon, prefix)
    }
}

/// Waiting times of the measured jobs, indexed by arrival order.
struct WaitLog {
    waits: Vec<f64>,
    classes: Vec<usize>,
}

impl WaitLog {
    fn new(n: usize) -> Self {
        Self {
            waits: vec![f64::NAN; n],
            classes: vec![0; n],
        }
    }

    fn summarise(&self, cfg: &SimConfig, n_classes: usize) -> (Estimate, Vec<Estimate>, Vec<EcdfPoint>) {
        let n = self.waits.len();
        debug_assert!(self.waits.iter().all(|w| w.is_finite()));
        let nb = cfg.batches;
        let mut sums = vec![0.0; nb];
        let mut counts = vec![0usize; nb];
        let mut class_sums = vec![vec![0.0; nb]; n_classes];
        let mut class_counts = vec![vec![0usize; nb]; n_classes];
        let grid = &cfg.ecdf_grid;
        // hits[b][g]: waits in batch b whose first grid point at or above is g
        let mut hits = vec![vec![0usize; grid.len() + 1]; nb];
        for (i, (&w, &c)) in self.waits.iter().zip(&self.classes).enumerate() {
            let b = cfg.batch_of(i);
            sums[b] += w;
            counts[b] += 1;
            class_sums[c][b] += w;
            class_counts[c][b] += 1;
            hits[b][grid.partition_point(|&x| x < w)] += 1;
        }
        let total: f64 = sums.iter().sum();
        let batch_means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
        let mean = batch_estimate(total / n as f64, &batch_means);

        let class_mean = (0..n_classes)
            .map(|c| {
                let count: usize = class_counts[c].iter().sum();
                let sum: f64 = class_sums[c].iter().sum();
                let per_batch: Vec<f64> = (0..nb)
                    .filter(|&b| class_counts[c][b] > 0)
                    .map(|b| class_sums[c][b] / class_counts[c][b] as f64)
                    .collect();
                let overall = if count > 0 { sum / count as f64 } else { f64::NAN };
                batch_estimate(overall, &per_batch)
            })
            .collect();

        let ecdf = grid
            .iter()
            .enumerate()
            .map(|(g, &x)| {
                let below = |b: usize| hits[b][..=g].iter().sum::<usize>();
                let overall = (0..nb).map(below).sum::<usize>() as f64 / n as f64;
                let per_batch: Vec<f64> = (0..nb).map(|b| below(b) as f64 / counts[b] as f64).collect();
                let est = batch_estimate(overall, &per_batch);
                EcdfPoint {
                    x,
                    value: est.value,
                    half_width: est.half_width,
                }
            })
            .collect();
        (mean, class_mean, ecdf)
    }
}

/// Simulates a stationary M|G|1 queue under FIFO or non-preemptive LIFO.
pub fn simulate_mg1(
    d: &ServiceDistribution,
    arrival_rate: f64,
    order: Discipline,
    cfg: &SimConfig,
) -> Result<SimResult> {
    cfg.validate()?;
    if !(arrival_rate > 0.0 && arrival_rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "arrival rate must be positive, got {arrival_rate}"
        )));
    }
    let rho = arrival_rate * d.moment1();
    if rho >= 1.0 {
        return Err(Error::NonStationary(format!(
            "traffic intensity {rho} >= 1; the simulator only runs stationary queues"
        )));
    }

    let warmup = cfg.warmup_arrivals;
    let n = warmup + cfg.total_arrivals;
    let mut arrival_rng = substream(cfg.seed, 0);
    let mut service_rng = substream(cfg.seed, 1);
    let gap = Exp::new(arrival_rate).map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let mut arrivals = Vec::with_capacity(n);
    let mut services = Vec::with_capacity(n);
    let mut t = 0.0;
    for _ in 0..n {
        t += gap.sample(&mut arrival_rng);
        arrivals.push(t);
        services.push(d.sample(&mut service_rng));
    }

    let mut acct = Accountant::new(1);
    for b in 0..cfg.batches {
        acct.open_batch(arrivals[warmup + b * cfg.batch_size()]);
    }
    acct.close(arrivals[n - 1]);

    let mut log = WaitLog::new(cfg.total_arrivals);
    let mut diag = SimDiagnostics::default();
    let mut waiting: VecDeque<usize> = VecDeque::new();
    let mut free_at = 0.0;

    let mut start_job = |job: usize, at: f64, diag: &mut SimDiagnostics| -> f64 {
        if job >= warmup {
            log.waits[job - warmup] = at - arrivals[job];
        }
        let end = at + services[job];
        acct.add(0, at, end);
        diag.served_time += services[job];
        diag.busy_time += end - at;
        end
    };

    for (i, &now) in arrivals.iter().enumerate() {
        // completions at or before this arrival are handled first
        while free_at <= now {
            let next = match order {
                Discipline::Fifo => waiting.pop_front(),
                Discipline::Lifo => waiting.pop_back(),
            };
            match next {
                Some(job) => free_at = start_job(job, free_at, &mut diag),
                None => break,
            }
        }
        if waiting.is_empty() && free_at <= now {
            free_at = start_job(i, now, &mut diag);
        } else {
            waiting.push_back(i);
        }
    }
    while let Some(job) = match order {
        Discipline::Fifo => waiting.pop_front(),
        Discipline::Lifo => waiting.pop_back(),
    } {
        free_at = start_job(job, free_at, &mut diag);
    }
    diag.run_length = free_at;

    let (mean_wait, class_mean_wait, ecdf) = log.summarise(cfg, 1);
    let (horizon, utilization_prefix) = acct.utilization_prefix();
    Ok(SimResult {
        mean_wait,
        class_mean_wait,
        ecdf,
        utilization_prefix,
        completed: vec![cfg.total_arrivals as u64],
        lost: vec![0],
        horizon,
        diagnostics: diag,
    })
}

#[derive(Debug, Clone)]
struct Job {
    id: usize,
    class: usize,
    arrival: f64,
    /// Service required by the current attempt.
    required: f64,
    /// Service received in the current attempt.
    served: f64,
    started: bool,
}

impl Job {
    fn remaining(&self) -> f64 {
        (self.required - self.served).max(0.0)
    }
}

struct ClassStreams {
    arrivals: ChaCha8Rng,
    services: ChaCha8Rng,
    gap: Exp<f64>,
    service: ServiceDistribution,
}

/// Simulates a stationary preemptive-priority queue.
pub fn simulate_priority(sc: &PriorityScenario, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let report = traffic_coefficients(sc)?;
    let verdict = stationarity_verdict(&report);
    if let Some(k) = verdict.first_overloaded_class {
        return Err(Error::NonStationary(format!(
            "class {k} is overloaded (rho_{k} = {:.6} >= 1); the simulator only runs stationary scenarios",
            report.classes[k - 1].rho
        )));
    }

    let discipline = sc.discipline();
    let k_classes = sc.classes().len();
    let warmup = cfg.warmup_arrivals;
    let n = warmup + cfg.total_arrivals;

    let mut streams = sc
        .classes()
        .iter()
        .enumerate()
        .map(|(c, class)| {
            Ok(ClassStreams {
                arrivals: substream(cfg.seed, 2 * c as u64),
                services: substream(cfg.seed, 2 * c as u64 + 1),
                gap: Exp::new(class.lambda()).map_err(|e| Error::InvalidParameter(e.to_string()))?,
                service: *class.service(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut next_arrival: Vec<f64> = streams.iter_mut().map(|s| s.gap.sample(&mut s.arrivals)).collect();

    let mut acct = Accountant::new(k_classes);
    let mut log = WaitLog::new(cfg.total_arrivals);
    let mut diag = SimDiagnostics::default();
    let mut completed = vec![0u64; k_classes];
    let mut lost = vec![0u64; k_classes];
    let mut queues: Vec<VecDeque<Job>> = vec![VecDeque::new(); k_classes];
    // job in service and the start of its current segment
    let mut current: Option<(Job, f64)> = None;
    let mut arrived = 0usize;
    let mut clock = 0.0;

    let record_start = |job: &mut Job, at: f64, log: &mut WaitLog| {
        if !job.started {
            job.started = true;
            if job.id >= warmup {
                log.waits[job.id - warmup] = at - job.arrival;
                log.classes[job.id - warmup] = job.class;
            }
        }
    };

    loop {
        let arrival = (arrived < n).then(|| {
            next_arrival
                .iter()
                .copied()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least one class")
        });
        let completion = current.as_ref().map(|(job, seg)| seg + job.remaining());

        let completes_first = match (completion, arrival) {
            (Some(done), Some((_, t_arr))) => done <= t_arr,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };

        if completes_first {
            let now = completion.expect("completion exists");
            let (mut job, seg) = current.take().expect("job in service");
            diag.busy_time += now - clock;
            clock = now;
            acct.add(job.class, seg, now);
            let segment = now - seg;
            diag.served_time += segment;
            job.served += segment;
            diag.max_service_overshoot = diag.max_service_overshoot.max((job.served - job.required).abs());
            if job.id >= warmup {
                completed[job.class] += 1;
            }
            if let Some(c) = queues.iter().position(|q| !q.is_empty()) {
                let mut next = queues[c].pop_front().expect("non-empty queue");
                record_start(&mut next, now, &mut log);
                current = Some((next, now));
            }
            continue;
        }

        let (class, now) = arrival.expect("arrival exists");
        if current.is_some() {
            diag.busy_time += now - clock;
        }
        clock = now;
        let id = arrived;
        arrived += 1;
        if id >= warmup
            && (id - warmup).is_multiple_of(cfg.batch_size())
            && (id - warmup) / cfg.batch_size() < cfg.batches
        {
            acct.open_batch(now);
        }
        if id == n - 1 {
            acct.close(now);
        }
        let stream = &mut streams[class];
        let required = stream.service.sample(&mut stream.services);
        next_arrival[class] = now + stream.gap.sample(&mut stream.arrivals);
        let mut job = Job {
            id,
            class,
            arrival: now,
            required,
            served: 0.0,
            started: false,
        };

        match current.take() {
            None => {
                record_start(&mut job, now, &mut log);
                current = Some((job, now));
            }
            Some((running, seg)) if running.class <= class => {
                current = Some((running, seg));
                queues[class].push_back(job);
            }
            Some((mut running, seg)) => {
                // preemption
                acct.add(running.class, seg, now);
                let segment = now - seg;
                diag.served_time += segment;
                running.served += segment;
                match discipline {
                    PreemptionDiscipline::Resume => queues[running.class].push_front(running),
                    PreemptionDiscipline::Loss => {
                        if running.id >= warmup {
                            lost[running.class] += 1;
                        }
                    }
                    PreemptionDiscipline::Repeat => {
                        let stream = &mut streams[running.class];
                        running.required = stream.service.sample(&mut stream.services);
                        running.served = 0.0;
                        queues[running.class].push_front(running);
                    }
                }
                record_start(&mut job, now, &mut log);
                current = Some((job, now));
            }
        }
    }
    diag.run_length = clock;

    let (mean_wait, class_mean_wait, ecdf) = log.summarise(cfg, k_classes);
    let (horizon, utilization_prefix) = acct.utilization_prefix();
    Ok(SimResult {
        mean_wait,
        class_mean_wait,
        ecdf,
        utilization_prefix,
        completed,
        lost,
        horizon,
        diagnostics: diag,
    })
}
