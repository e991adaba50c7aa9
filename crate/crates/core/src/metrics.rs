//! Run results, cross-seed aggregation and app-vs-service verdicts.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::placement::{OrderingMode, PlacementPlan, Strategy};
use crate::simulation::LatencySample;
use crate::topology::Topology;
use crate::workload::AppId;

/// Share of all nodes, cloud included, hosting at least one service, in percent.
pub fn used_node_percentage(plan: &PlacementPlan, topology: &Topology) -> f64 {
    100.0 * plan.used_nodes().len() as f64 / topology.len() as f64
}

/// Outcome of one (strategy, mode, seed) simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub strategy: Strategy,
    pub mode: OrderingMode,
    pub seed: u64,
    /// Mean latency per app over its own samples, ms.
    pub per_app_mean_latency: BTreeMap<AppId, f64>,
    /// Mean over every sample of the run, ms.
    pub overall_mean_latency: f64,
    pub sample_count: usize,
    /// In `[0, 1]`.
    pub used_node_fraction: f64,
}

impl RunResult {
    pub fn new(
        strategy: Strategy,
        mode: OrderingMode,
        seed: u64,
        samples: &[LatencySample],
        plan: &PlacementPlan,
        topology: &Topology,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::MissingData(format!(
                "{strategy}/{mode} seed {seed} produced no latency samples"
            )));
        }
        let mut per_app: BTreeMap<AppId, (f64, usize)> = BTreeMap::new();
        let mut total = 0.0;
        for s in samples {
            let entry = per_app.entry(s.app_id).or_default();
            entry.0 += s.latency;
            entry.1 += 1;
            total += s.latency;
        }
        Ok(RunResult {
            strategy,
            mode,
            seed,
            per_app_mean_latency: per_app
                .into_iter()
                .map(|(a, (sum, n))| (a, sum / n as f64))
                .collect(),
            overall_mean_latency: total / samples.len() as f64,
            sample_count: samples.len(),
            used_node_fraction: plan.used_nodes().len() as f64 / topology.len() as f64,
        })
    }

    pub fn used_pct(&self) -> f64 {
        100.0 * self.used_node_fraction
    }

    /// Unweighted mean of the per-app means.
    pub fn app_averaged_latency(&self) -> f64 {
        mean(self.per_app_mean_latency.values().copied())
    }
}

/// Statistics of one (strategy, mode) group across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub strategy: Strategy,
    pub mode: OrderingMode,
    pub runs: usize,
    /// Mean of the runs' overall mean latency.
    pub mean_latency: f64,
    /// Sample standard deviation (n - 1) of the same; 0 for a single run.
    pub std_latency: f64,
    /// Per app, mean of its per-run means.
    pub per_app_mean_latency: BTreeMap<AppId, f64>,
    /// Mean over runs of the app-averaged latency.
    pub app_averaged_latency: f64,
    pub used_pct: f64,
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values.iter().copied());
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Summarises the runs of one group. Runs are taken in seed order, so the
/// result does not depend on the order they are passed in.
pub fn aggregate_group(runs: &[&RunResult]) -> Result<Summary> {
    let first = runs
        .first()
        .ok_or_else(|| Error::MissingData("cannot aggregate an empty group".into()))?;
    let (strategy, mode) = (first.strategy, first.mode);
    if let Some(other) = runs.iter().find(|r| r.strategy != strategy || r.mode != mode) {
        return Err(Error::InvalidConfig(format!(
            "group mixes {strategy}/{mode} with {}/{}",
            other.strategy, other.mode
        )));
    }
    let mut sorted: Vec<&RunResult> = runs.to_vec();
    sorted.sort_by_key(|r| r.seed);

    let overall: Vec<f64> = sorted.iter().map(|r| r.overall_mean_latency).collect();
    let mut per_app: BTreeMap<AppId, Vec<f64>> = BTreeMap::new();
    for r in &sorted {
        for (&app, &m) in &r.per_app_mean_latency {
            per_app.entry(app).or_default().push(m);
        }
    }
    Ok(Summary {
        strategy,
        mode,
        runs: sorted.len(),
        mean_latency: mean(overall.iter().copied()),
        std_latency: sample_std(&overall),
        per_app_mean_latency: per_app.into_iter().map(|(a, v)| (a, mean(v))).collect(),
        app_averaged_latency: mean(sorted.iter().map(|r| r.app_averaged_latency())),
        used_pct: mean(sorted.iter().map(|r| r.used_pct())),
    })
}

/// Groups `results` by (strategy, mode) and summarises each group.
pub fn aggregate(results: &[RunResult]) -> Result<Vec<Summary>> {
    let mut groups: BTreeMap<(Strategy, OrderingMode), Vec<&RunResult>> = BTreeMap::new();
    for r in results {
        groups.entry((r.strategy, r.mode)).or_default().push(r);
    }
    groups.values().map(|g| aggregate_group(g)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winner {
    ServiceBased,
    AppBased,
    Draw,
}

impl Winner {
    pub fn name(self) -> &'static str {
        match self {
            Winner::ServiceBased => "service_based",
            Winner::AppBased => "app_based",
            Winner::Draw => "draw",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    pub strategy: Strategy,
    pub winner: Winner,
    /// App-based mean minus service-based mean, ms. Positive favours
    /// service-based.
    pub delta: f64,
}

/// Lower-latency ordering per strategy. A draw is declared when the gap is
/// within `draw_threshold` times the larger of the two means.
pub fn compare_modes(summaries: &[Summary], draw_threshold: f64) -> Result<Vec<ComparisonVerdict>> {
    let mut by_strategy: BTreeMap<Strategy, BTreeMap<OrderingMode, f64>> = BTreeMap::new();
    for s in summaries {
        by_strategy
            .entry(s.strategy)
            .or_default()
            .insert(s.mode, s.mean_latency);
    }
    by_strategy
        .into_iter()
        .map(|(strategy, modes)| {
            let get = |m: OrderingMode| {
                modes
                    .get(&m)
                    .copied()
                    .ok_or_else(|| Error::MissingData(format!("{strategy} has no {m} summary")))
            };
            let (app, service) = (get(OrderingMode::AppBased)?, get(OrderingMode::ServiceBased)?);
            let delta = app - service;
            let winner = if delta.abs() <= draw_threshold * app.max(service) {
                Winner::Draw
            } else if delta > 0.0 {
                Winner::ServiceBased
            } else {
                Winner::AppBased
            };
            Ok(ComparisonVerdict {
                strategy,
                winner,
                delta,
            })
        })
        .collect()
}

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

/// `strategy,mode,seed,app_id,mean_latency_ms,used_pct`, one row per app per run.
pub fn write_runs_csv<W: Write>(out: W, results: &[RunResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "strategy",
        "mode",
        "seed",
        "app_id",
        "mean_latency_ms",
        "used_pct",
    ])?;
    for r in results {
        for (app, m) in &r.per_app_mean_latency {
            w.write_record([
                r.strategy.name().to_string(),
                r.mode.name().to_string(),
                r.seed.to_string(),
                app.to_string(),
                f6(*m),
                f6(r.used_pct()),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `strategy,mode,mean_ms,std_ms,used_pct`
pub fn write_summary_csv<W: Write>(out: W, summaries: &[Summary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["strategy", "mode", "mean_ms", "std_ms", "used_pct"])?;
    for s in summaries {
        w.write_record([
            s.strategy.name().to_string(),
            s.mode.name().to_string(),
            f6(s.mean_latency),
            f6(s.std_latency),
            f6(s.used_pct),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `strategy,winner,delta_ms`
pub fn write_verdicts_csv<W: Write>(out: W, verdicts: &[ComparisonVerdict]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["strategy", "winner", "delta_ms"])?;
    for v in verdicts {
        w.write_record([v.strategy.name(), v.winner.name(), &f6(v.delta)])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Plot-ready per-app means: `strategy,mode,app_id,mean_latency_ms`.
pub fn write_per_app_csv<W: Write>(out: W, summaries: &[Summary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["strategy", "mode", "app_id", "mean_latency_ms"])?;
    for s in summaries {
        for (app, m) in &s.per_app_mean_latency {
            w.write_record([
                s.strategy.name().to_string(),
                s.mode.name().to_string(),
                app.to_string(),
                f6(*m),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
