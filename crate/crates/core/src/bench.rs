//! The evaluation matrix: generation, compilation, planning, replay and
//! measurement for every coordinate, plus the comparison report.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::DepthBound;
use crate::compiler::{compile, prune_unreachable, CompileOptions};
use crate::domains::{bw4t, gridworld, Bw4tConfig, CommModel, DomainError, GeneratedTask, GridworldConfig, Scenario};
use crate::execution::{build_query_set, goal_relevant_queries, metrics, simulate, smm_overlap, MetricsRecord};
use crate::search::{solve, validate_plan, Limits, Provenance, SearchError, Strategy};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Gridworld,
    Bw4t,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::Gridworld => "gridworld",
            DomainKind::Bw4t => "bw4t",
        })
    }
}

impl FromStr for DomainKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gridworld" | "grid" => Ok(DomainKind::Gridworld),
            "bw4t" => Ok(DomainKind::Bw4t),
            other => Err(format!("unknown domain `{other}` (expected gridworld or bw4t)")),
        }
    }
}

/// A map with its team size, e.g. Gridworld `3x3` with 3 agents or BW4T
/// `rooms6` with 4.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MapSpec {
    pub domain: DomainKind,
    pub map: String,
    pub agents: usize,
}

impl MapSpec {
    pub fn new(domain: DomainKind, map: impl Into<String>, agents: usize) -> Self {
        MapSpec {
            domain,
            map: map.into(),
            agents,
        }
    }

    /// Grid dimensions for Gridworld (`WxH`), room count for BW4T (`roomsN`).
    pub fn dimensions(&self) -> Result<(usize, usize), DomainError> {
        let bad = || DomainError::Config(format!("bad {} map `{}`", self.domain, self.map));
        match self.domain {
            DomainKind::Gridworld => {
                let (w, h) = self.map.split_once(['x', 'X']).ok_or_else(bad)?;
                Ok((w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?))
            }
            DomainKind::Bw4t => {
                let n = self.map.strip_prefix("rooms").ok_or_else(bad)?;
                Ok((n.parse().map_err(|_| bad())?, 0))
            }
        }
    }

    pub fn generate(&self, scenario: Scenario, model: CommModel, seed: u64) -> Result<GeneratedTask, DomainError> {
        let (a, b) = self.dimensions()?;
        match self.domain {
            DomainKind::Gridworld => gridworld(&GridworldConfig::seeded(a, b, self.agents, scenario, model, seed)?),
            DomainKind::Bw4t => bw4t(&Bw4tConfig::seeded(a, self.agents, scenario, model, seed)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatrixConfig {
    pub maps: Vec<MapSpec>,
    pub scenarios: Vec<Scenario>,
    pub models: Vec<CommModel>,
    pub seed: u64,
    pub strategy: Strategy,
    pub turn_taking: bool,
    pub depth: usize,
    pub prune: bool,
    pub limits: Limits,
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        MatrixConfig {
            maps: vec![
                MapSpec::new(DomainKind::Gridworld, "3x3", 3),
                MapSpec::new(DomainKind::Gridworld, "4x3", 4),
                MapSpec::new(DomainKind::Bw4t, "rooms3", 3),
                MapSpec::new(DomainKind::Bw4t, "rooms6", 4),
            ],
            scenarios: Scenario::ALL.to_vec(),
            models: CommModel::ALL.to_vec(),
            seed: 1,
            strategy: Strategy::Gbfs,
            turn_taking: true,
            depth: 1,
            prune: true,
            limits: Limits::default(),
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coordinate {
    pub map: MapSpec,
    pub scenario: Scenario,
    pub model: CommModel,
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{} agents {} {}",
            self.map.domain, self.map.map, self.map.agents, self.scenario, self.model
        )
    }
}

impl MatrixConfig {
    /// Map-major, then scenario, then model.
    pub fn coordinates(&self) -> Vec<Coordinate> {
        let mut out = Vec::new();
        for map in &self.maps {
            for &scenario in &self.scenarios {
                for &model in &self.models {
                    out.push(Coordinate {
                        map: map.clone(),
                        scenario,
                        model,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Solved,
    Unsolvable,
    Limit,
    /// Generation, compilation or replay failed.
    Error,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Solved => "solved",
            Outcome::Unsolvable => "unsolvable",
            Outcome::Limit => "limit",
            Outcome::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub coordinate: Coordinate,
    pub seed: u64,
    pub outcome: Outcome,
    #[serde(default)]
    pub error: Option<String>,
    pub expansions: u64,
    pub generated: u64,
    #[serde(default)]
    pub provenance: Option<Provenance>,
    /// Plan labels, no-ops included.
    #[serde(default)]
    pub plan: Option<Vec<String>>,
    #[serde(default)]
    pub plan_valid: Option<bool>,
    #[serde(default)]
    pub metrics: Option<MetricsRecord>,
    /// Final overlap restricted to queries a belief goal is about.
    #[serde(default)]
    pub goal_relevant_sharedness: Option<f64>,
}

impl BenchRecord {
    fn failed(coordinate: Coordinate, seed: u64, outcome: Outcome, error: String) -> Self {
        BenchRecord {
            coordinate,
            seed,
            outcome,
            error: Some(error),
            expansions: 0,
            generated: 0,
            provenance: None,
            plan: None,
            plan_valid: None,
            metrics: None,
            goal_relevant_sharedness: None,
        }
    }

    /// The record with wall-clock fields zeroed, for determinism checks.
    pub fn without_timing(&self) -> BenchRecord {
        let mut r = self.clone();
        if let Some(p) = &mut r.provenance {
            p.planning_ms = 0.0;
        }
        if let Some(m) = &mut r.metrics {
            m.completion_ms = 0.0;
        }
        if r.outcome == Outcome::Limit {
            // a wall-clock limit trips at a machine-dependent expansion count
            r.expansions = 0;
            r.generated = 0;
            r.error = None;
        }
        r
    }
}

/// Generates, compiles, solves, validates, replays and measures one
/// coordinate. Failures become the record's outcome.
pub fn run_coordinate(c: &MatrixConfig, coord: &Coordinate) -> BenchRecord {
    let fail = |outcome, e: String| BenchRecord::failed(coord.clone(), c.seed, outcome, e);
    let task = match coord.map.generate(coord.scenario, coord.model, c.seed) {
        Ok(t) => t,
        Err(e) => return fail(Outcome::Error, e.to_string()),
    };
    let depth = match DepthBound::new(c.depth) {
        Ok(d) => d,
        Err(e) => return fail(Outcome::Error, e.to_string()),
    };
    let opts = CompileOptions {
        depth,
        turn_taking: c.turn_taking,
    };
    let full = match compile(&task.domain, &task.problem, opts) {
        Ok(t) => t,
        Err(e) => return fail(Outcome::Error, e.to_string()),
    };
    let searched = if c.prune {
        prune_unreachable(&full)
    } else {
        full.clone()
    };
    let plan = match solve(&searched, c.strategy, c.limits) {
        Ok(p) => p,
        Err(e) => {
            let outcome = match e {
                SearchError::Unsolvable(_) => Outcome::Unsolvable,
                SearchError::LimitExceeded(_) => Outcome::Limit,
            };
            let mut r = fail(outcome, e.to_string());
            r.expansions = e.stats().expansions;
            r.generated = e.stats().generated;
            return r;
        }
    };
    // labels are shared, so the unpruned task checks the pruned search
    let valid = validate_plan(&full, &plan).valid;
    let mut record = BenchRecord {
        coordinate: coord.clone(),
        seed: c.seed,
        outcome: Outcome::Solved,
        error: None,
        expansions: plan.provenance.expansions,
        generated: plan.provenance.generated,
        provenance: Some(plan.provenance.clone()),
        plan: Some(plan.labels().into_iter().map(String::from).collect()),
        plan_valid: Some(valid),
        metrics: None,
        goal_relevant_sharedness: None,
    };
    let measured = (|| {
        let trace = simulate(&plan, &task.ground_truth, &task.domain, &task.problem)?;
        let queries = build_query_set(&task.problem, &task.domain)?;
        let m = metrics(&plan, &trace, &queries, coord.scenario.has_commander())?;
        let relevant = goal_relevant_queries(&queries, &task.problem.goal.conjuncts);
        let g = if relevant.is_empty() || trace.agents.len() < 2 {
            None
        } else {
            Some(smm_overlap(&trace.last().stores, &relevant)?.percent)
        };
        Ok::<_, crate::execution::ExecutionError>((m, g))
    })();
    match measured {
        Ok((m, g)) => {
            record.metrics = Some(m);
            record.goal_relevant_sharedness = g;
        }
        Err(e) => {
            record.outcome = Outcome::Error;
            record.error = Some(e.to_string());
        }
    }
    record
}

/// Runs every coordinate, in parallel when `jobs` allows, and returns the
/// records in coordinate order.
pub fn run_matrix(c: &MatrixConfig) -> Vec<BenchRecord> {
    let coords = c.coordinates();
    let run = || coords.par_iter().map(|k| run_coordinate(c, k)).collect::<Vec<_>>();
    match c.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => coords.iter().map(|k| run_coordinate(c, k)).collect(),
        },
        None => run(),
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("records contain no solved Selective/baseline pair")]
    NoPairs,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `(baseline - selective) / selective * 100`; `None` when selective is 0.
pub fn percentage_change(selective: f64, baseline: f64) -> Option<f64> {
    (selective != 0.0).then(|| (baseline - selective) / selective * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    CompletionMs,
    TotalActions,
    TotalCommunications,
    Sharedness,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::CompletionMs,
        Metric::TotalActions,
        Metric::TotalCommunications,
        Metric::Sharedness,
    ];
    pub const HEADLINE: [Metric; 2] = [Metric::CompletionMs, Metric::TotalActions];

    fn of(self, m: &MetricsRecord) -> Option<f64> {
        match self {
            Metric::CompletionMs => Some(m.completion_ms),
            Metric::TotalActions => Some(m.total_actions as f64),
            Metric::TotalCommunications => Some(m.total_communications as f64),
            Metric::Sharedness => m.sharedness_percent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub runs: usize,
    pub solved: usize,
    /// Means over solved runs.
    pub values: BTreeMap<Metric, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Change {
    pub baseline: CommModel,
    pub metric: Metric,
    /// Coordinates solved by both models.
    pub pairs: usize,
    pub selective: f64,
    pub baseline_value: f64,
    /// Positive when the baseline is worse than Selective.
    pub percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub map: String,
    pub scenario: Scenario,
    pub model: CommModel,
    pub outcome: Outcome,
    pub total_actions: Option<usize>,
    pub total_communications: Option<usize>,
    pub completion_ms: Option<f64>,
    pub sharedness_percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSummary {
    pub domain: DomainKind,
    pub models: BTreeMap<CommModel, Averages>,
    /// Headline comparisons (completion time and plan length) against each baseline.
    pub changes: Vec<Change>,
    /// Communication and sharedness comparisons.
    pub other_changes: Vec<Change>,
    pub scenarios: Vec<ScenarioRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub domains: Vec<DomainSummary>,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn solved_metrics(r: &BenchRecord) -> Option<&MetricsRecord> {
    (r.outcome == Outcome::Solved).then_some(r.metrics.as_ref()).flatten()
}

fn compare(records: &[&BenchRecord], baseline: CommModel, metric: Metric) -> Option<Change> {
    let key = |r: &BenchRecord| (r.coordinate.map.clone(), r.coordinate.scenario);
    let selective: BTreeMap<_, f64> = records
        .iter()
        .filter(|r| r.coordinate.model == CommModel::Selective)
        .filter_map(|r| Some((key(r), metric.of(solved_metrics(r)?)?)))
        .collect();
    let mut s = Vec::new();
    let mut b = Vec::new();
    for r in records.iter().filter(|r| r.coordinate.model == baseline) {
        let Some(v) = solved_metrics(r).and_then(|m| metric.of(m)) else {
            continue;
        };
        if let Some(&sv) = selective.get(&key(r)) {
            s.push(sv);
            b.push(v);
        }
    }
    if s.is_empty() {
        return None;
    }
    let (sm, bm) = (mean(&s), mean(&b));
    Some(Change {
        baseline,
        metric,
        pairs: s.len(),
        selective: sm,
        baseline_value: bm,
        percent: percentage_change(sm, bm),
    })
}

/// Per-domain averages across maps and scenarios, and Selective-versus-
/// baseline percentage changes over coordinates both models solved.
pub fn report(records: &[BenchRecord]) -> Result<Report, BenchError> {
    let mut by_domain: BTreeMap<DomainKind, Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        by_domain.entry(r.coordinate.map.domain).or_default().push(r);
    }
    let mut domains = Vec::new();
    let mut paired = false;
    for (domain, rs) in by_domain {
        let mut models = BTreeMap::new();
        for model in CommModel::ALL {
            let of_model: Vec<&&BenchRecord> = rs.iter().filter(|r| r.coordinate.model == model).collect();
            if of_model.is_empty() {
                continue;
            }
            let solved: Vec<&MetricsRecord> = of_model.iter().filter_map(|r| solved_metrics(r)).collect();
            let values = Metric::ALL
                .into_iter()
                .filter_map(|m| {
                    let xs: Vec<f64> = solved.iter().filter_map(|r| m.of(r)).collect();
                    (!xs.is_empty()).then(|| (m, mean(&xs)))
                })
                .collect();
            models.insert(
                model,
                Averages {
                    runs: of_model.len(),
                    solved: solved.len(),
                    values,
                },
            );
        }
        let mut changes = Vec::new();
        let mut other_changes = Vec::new();
        for baseline in [CommModel::NoComm, CommModel::CommAll] {
            for metric in Metric::ALL {
                if let Some(c) = compare(&rs, baseline, metric) {
                    paired = true;
                    if Metric::HEADLINE.contains(&metric) {
                        changes.push(c);
                    } else {
                        other_changes.push(c);
                    }
                }
            }
        }
        let scenarios = rs
            .iter()
            .map(|r| {
                let m = solved_metrics(r);
                ScenarioRow {
                    map: r.coordinate.map.map.clone(),
                    scenario: r.coordinate.scenario,
                    model: r.coordinate.model,
                    outcome: r.outcome,
                    total_actions: m.map(|m| m.total_actions),
                    total_communications: m.map(|m| m.total_communications),
                    completion_ms: m.map(|m| m.completion_ms),
                    sharedness_percent: m.and_then(|m| m.sharedness_percent),
                }
            })
            .collect();
        domains.push(DomainSummary {
            domain,
            models,
            changes,
            other_changes,
            scenarios,
        });
    }
    if !paired {
        return Err(BenchError::NoPairs);
    }
    Ok(Report {
        schema: REPORT_SCHEMA,
        domains,
    })
}

/// Column order of [`write_csv`].
pub const CSV_COLUMNS: [&str; 19] = [
    "domain",
    "map",
    "agents",
    "scenario",
    "model",
    "seed",
    "outcome",
    "plan_valid",
    "completion_ms",
    "total_actions",
    "noops",
    "raw_length",
    "total_communications",
    "sharedness_percent",
    "goal_relevant_sharedness",
    "pairwise_sharedness",
    "expansions",
    "generated",
    "error",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per record, columns as in [`CSV_COLUMNS`]. Pairwise overlaps are
/// packed as `a1-a2=50;a1-a3=25`.
pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        let m = r.metrics.as_ref();
        let pairs = m
            .and_then(|m| m.pairwise_sharedness.as_ref())
            .map(|p| p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";"));
        let k = &r.coordinate;
        w.write_record([
            k.map.domain.to_string(),
            k.map.map.clone(),
            k.map.agents.to_string(),
            k.scenario.to_string(),
            k.model.to_string(),
            r.seed.to_string(),
            r.outcome.to_string(),
            opt(r.plan_valid),
            opt(m.map(|m| format!("{:.3}", m.completion_ms))),
            opt(m.map(|m| m.total_actions)),
            opt(m.map(|m| m.noops)),
            opt(m.map(|m| m.raw_length)),
            opt(m.map(|m| m.total_communications)),
            opt(m.and_then(|m| m.sharedness_percent)),
            opt(r.goal_relevant_sharedness),
            pairs.unwrap_or_default(),
            r.expansions.to_string(),
            r.generated.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
