//! Experiment orchestration: config parsing, seeded repetitions with
//! re-randomized client placement, per-repetition footprint baselines,
//! aggregation with Student-t confidence intervals, and report emission.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::cache::{Placement, StrategyConfig};
use crate::error::{Error, Result};
use crate::metrics::{
    compute_report, footprint, BaselineFootprint, MetricsReport, MissCost,
};
use crate::simulator::{run, EventLog, SimConfig};
use crate::topology::{
    betweenness, generate_ba, load_topology, ExternalServers, Graph, RoleParams,
};
use crate::workload::{
    build_catalog, sample_requests_aged, AgingSchedule, PopularityModel, SizeModel,
};

/// Metric columns, in report order.
pub const METRIC_KEYS: [&str; 7] = [
    "hit_rate",
    "byte_hit_rate",
    "costly_miss_byte_rate",
    "avg_hops",
    "footprint",
    "footprint_reduction",
    "coupling_factor",
];

/// Reserved strategy name for the caching-disabled baseline row.
pub const BASELINE_STRATEGY: &str = "none";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologySource {
    /// Edge-list file on disk.
    File(PathBuf),
    /// Synthetic Barabási–Albert graph.
    Ba { n: usize, m: usize },
    /// Inline edge list.
    Edges(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub n_objects: usize,
    pub popularity: PopularityModel,
    pub size: SizeModel,
    pub n_requests: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoleSpec {
    /// Defaults to `max(1, round(0.05 * n))`.
    #[serde(default)]
    pub n_servers: Option<usize>,
    /// Share of eligible edge routers acting as clients.
    #[serde(default = "default_client_fraction")]
    pub client_fraction: f64,
    /// Degree threshold for edge routers; `None` uses the median degree.
    #[serde(default)]
    pub edge_degree_threshold: Option<usize>,
    #[serde(default)]
    pub external_servers: ExternalServers,
}

impl Default for RoleSpec {
    fn default() -> Self {
        RoleSpec {
            n_servers: None,
            client_fraction: default_client_fraction(),
            edge_degree_threshold: None,
            external_servers: ExternalServers::All,
        }
    }
}

fn default_client_fraction() -> f64 {
    0.25
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategySpec {
    /// Row label; defaults to the placement name plus non-default knobs.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub config: StrategyConfig,
}

impl StrategySpec {
    pub fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        let placement = match self.config.placement {
            Placement::Lce => "lce",
            Placement::Cachedbit => "cachedbit",
            Placement::EdgeOnly => "edge_only",
            Placement::CoreOnly => "core_only",
        };
        let mut label = placement.to_string();
        if self.config.search_radius > 0 {
            label.push_str(&format!("_r{}", self.config.search_radius));
        }
        if let Some(k) = self.config.copy_limit {
            label.push_str(&format!("_k{k}"));
        }
        label
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capacity {
    /// Absolute store capacity per caching node.
    Bytes(u64),
    /// Per-node capacity as a fraction of total catalog bytes.
    FractionOfCatalog(f64),
}

/// A full experiment description. All defaults become explicit in the
/// emitted resolved-config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default = "default_version")]
    pub version: u32,
    pub topology: TopologySource,
    pub workload: WorkloadSpec,
    #[serde(default)]
    pub roles: RoleSpec,
    pub strategies: Vec<StrategySpec>,
    pub cache: Capacity,
    #[serde(default = "default_warmup")]
    pub warmup_fraction: f64,
    #[serde(default = "default_snapshot_epochs")]
    pub snapshot_epochs: usize,
    #[serde(default)]
    pub aging: Option<AgingSchedule>,
    pub repetitions: usize,
    pub base_seed: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default = "default_miss_cost")]
    pub miss_cost: MissCost,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_version() -> u32 {
    1
}
fn default_warmup() -> f64 {
    0.25
}
fn default_snapshot_epochs() -> usize {
    10
}
fn default_confidence() -> f64 {
    0.95
}
fn default_miss_cost() -> MissCost {
    MissCost::Actual
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Per-metric aggregate over the repetitions of one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    /// `None` when any repetition left the metric undefined.
    pub mean: Option<f64>,
    pub std_dev: Option<f64>,
    /// Student-t confidence half-width; `None` with a single repetition.
    pub ci_half_width: Option<f64>,
    pub per_run: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyAggregate {
    pub strategy: String,
    pub metrics: BTreeMap<String, MetricStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub repetitions: usize,
    pub base_seed: u64,
    pub confidence: f64,
    pub strategies: Vec<StrategyAggregate>,
}

impl AggregateReport {
    pub fn strategy(&self, name: &str) -> Option<&StrategyAggregate> {
        self.strategies.iter().find(|s| s.strategy == name)
    }

    pub fn stats(&self, strategy: &str, metric: &str) -> Option<&MetricStats> {
        self.strategy(strategy).and_then(|s| s.metrics.get(metric))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One simulated run's metrics row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub strategy: String,
    pub repetition: usize,
    pub seed: u64,
    pub search_radius: u32,
    pub copy_limit: Option<u32>,
    pub report: MetricsReport,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// The spec with every default made explicit.
    pub resolved: ExperimentSpec,
    pub runs: Vec<RunRecord>,
    pub aggregate: AggregateReport,
    /// Event logs per `(strategy, repetition)`; kept only on request.
    pub logs: Option<Vec<(String, usize, EventLog)>>,
}

fn resolve(spec: &ExperimentSpec, graph: &Graph) -> Result<ExperimentSpec> {
    if spec.version != 1 {
        return Err(Error::Config(format!("unsupported config version {}", spec.version)));
    }
    if spec.repetitions < 1 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    if spec.strategies.is_empty() {
        return Err(Error::Config("at least one strategy is required".into()));
    }
    if !(0.0 < spec.confidence && spec.confidence < 1.0) {
        return Err(Error::Config(format!(
            "confidence must be in (0, 1), got {}",
            spec.confidence
        )));
    }
    if spec.workload.n_requests < 1 {
        return Err(Error::Config("n_requests must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&spec.warmup_fraction) {
        return Err(Error::Config(format!(
            "warmup_fraction must be in [0, 1), got {}",
            spec.warmup_fraction
        )));
    }
    let post_len = ((1.0 - spec.warmup_fraction) * spec.workload.n_requests as f64).floor();
    if post_len < 1.0 {
        return Err(Error::Config("warmup leaves no measured requests".into()));
    }

    let mut resolved = spec.clone();
    let n = graph.node_count();
    resolved.roles.n_servers =
        Some(spec.roles.n_servers.unwrap_or_else(|| ((0.05 * n as f64).round() as usize).max(1)));
    resolved.roles.edge_degree_threshold =
        Some(spec.roles.edge_degree_threshold.unwrap_or_else(|| graph.median_degree()));
    let mut seen = std::collections::HashSet::new();
    for (i, s) in spec.strategies.iter().enumerate() {
        s.config.validate()?;
        let label = s.label();
        if label == BASELINE_STRATEGY {
            return Err(Error::Config(format!(
                "strategy name `{BASELINE_STRATEGY}` is reserved for the baseline"
            )));
        }
        if !seen.insert(label.clone()) {
            return Err(Error::Config(format!("duplicate strategy name `{label}`")));
        }
        resolved.strategies[i].name = Some(label);
    }
    Ok(resolved)
}

fn build_graph(spec: &ExperimentSpec) -> Result<Graph> {
    match &spec.topology {
        TopologySource::File(path) => load_topology(&fs::read_to_string(path)?),
        TopologySource::Ba { n, m } => {
            generate_ba(*n, *m, crate::seeds::derive_seed(spec.base_seed, crate::seeds::DOMAIN_TOPOLOGY))
        }
        TopologySource::Edges(edges) => {
            let n = edges
                .iter()
                .map(|&(a, b)| a.max(b) + 1)
                .max()
                .ok_or_else(|| Error::Config("inline topology has no edges".into()))?;
            Graph::from_edges(n, edges)
        }
    }
}

/// Runs the whole experiment: per repetition, client placement and the
/// request stream are re-drawn from `base_seed + repetition`, one
/// caching-disabled baseline provides the footprint reference, and every
/// strategy consumes the identical stream.
pub fn execute(spec: &ExperimentSpec, keep_logs: bool) -> Result<ExperimentResult> {
    let graph = build_graph(spec)?;
    let resolved = resolve(spec, &graph)?;
    let centrality = betweenness(&graph)?;
    let catalog = build_catalog(
        resolved.workload.n_objects,
        resolved.workload.popularity,
        resolved.workload.size,
        resolved.base_seed,
    )?;
    let capacity = match resolved.cache {
        Capacity::Bytes(b) => b,
        Capacity::FractionOfCatalog(f) => {
            if !f.is_finite() || f <= 0.0 {
                return Err(Error::Config(format!("capacity fraction must be positive, got {f}")));
            }
            (f * catalog.total_bytes() as f64).round() as u64
        }
    };
    let role_params = RoleParams {
        n_servers: resolved.roles.n_servers.expect("resolved"),
        client_fraction: resolved.roles.client_fraction,
        edge_degree_threshold: resolved.roles.edge_degree_threshold,
        external: resolved.roles.external_servers.clone(),
    };

    let mut runs = Vec::new();
    let mut logs = Vec::new();
    let mut run_id = 0;
    for repetition in 0..resolved.repetitions {
        let seed = resolved.base_seed.wrapping_add(repetition as u64);
        let attempt = (|| -> Result<()> {
            let roles = crate::topology::assign_roles(
                &graph,
                resolved.workload.n_objects,
                &role_params,
                seed,
            )?;
            let stream = sample_requests_aged(
                &catalog,
                &roles,
                resolved.workload.n_requests,
                resolved.aging.as_ref(),
                seed,
            )?;
            let mut config = SimConfig {
                graph: &graph,
                centrality: &centrality,
                roles: &roles,
                catalog: &catalog,
                stream: &stream,
                strategy: StrategyConfig::new(Placement::Lce),
                capacity_bytes: 0,
                warmup_fraction: resolved.warmup_fraction,
                snapshot_epochs: resolved.snapshot_epochs,
                aging: resolved.aging,
                seed,
            };
            let baseline_log = run(&config)?;
            let baseline = BaselineFootprint { x_theta: footprint(&baseline_log) };
            let report =
                compute_report(&baseline_log, &centrality, &baseline, resolved.miss_cost)?;
            runs.push(RunRecord {
                run_id,
                strategy: BASELINE_STRATEGY.to_string(),
                repetition,
                seed,
                search_radius: 0,
                copy_limit: None,
                report,
            });
            run_id += 1;
            if keep_logs {
                logs.push((BASELINE_STRATEGY.to_string(), repetition, baseline_log));
            }
            for strategy in &resolved.strategies {
                config.strategy = strategy.config;
                config.capacity_bytes = capacity;
                let log = run(&config)?;
                let report = compute_report(&log, &centrality, &baseline, resolved.miss_cost)?;
                runs.push(RunRecord {
                    run_id,
                    strategy: strategy.label(),
                    repetition,
                    seed,
                    search_radius: strategy.config.search_radius,
                    copy_limit: strategy.config.copy_limit,
                    report,
                });
                run_id += 1;
                if keep_logs {
                    logs.push((strategy.label(), repetition, log));
                }
            }
            Ok(())
        })();
        attempt.map_err(|e| Error::Config(format!("repetition {repetition} (seed {seed}) failed: {e}")))?;
    }

    let aggregate = aggregate_runs(&resolved, &runs)?;
    Ok(ExperimentResult { resolved, runs, aggregate, logs: keep_logs.then_some(logs) })
}

pub fn metric_value(report: &MetricsReport, key: &str) -> Option<f64> {
    match key {
        "hit_rate" => Some(report.hit_rate),
        "byte_hit_rate" => Some(report.byte_hit_rate),
        "costly_miss_byte_rate" => Some(report.costly_miss_byte_rate),
        "avg_hops" => Some(report.avg_hops),
        "footprint" => Some(report.footprint),
        "footprint_reduction" => Some(report.footprint_reduction),
        "coupling_factor" => report.coupling_factor,
        _ => None,
    }
}

fn aggregate_runs(spec: &ExperimentSpec, runs: &[RunRecord]) -> Result<AggregateReport> {
    let mut order: Vec<String> = vec![BASELINE_STRATEGY.to_string()];
    order.extend(spec.strategies.iter().map(|s| s.label()));
    let mut strategies = Vec::new();
    for name in order {
        let rows: Vec<&RunRecord> = runs.iter().filter(|r| r.strategy == name).collect();
        let mut metrics = BTreeMap::new();
        for key in METRIC_KEYS {
            let per_run: Vec<Option<f64>> =
                rows.iter().map(|r| metric_value(&r.report, key)).collect();
            metrics.insert(key.to_string(), summarize(&per_run, spec.confidence)?);
        }
        strategies.push(StrategyAggregate { strategy: name, metrics });
    }
    Ok(AggregateReport {
        repetitions: spec.repetitions,
        base_seed: spec.base_seed,
        confidence: spec.confidence,
        strategies,
    })
}

fn summarize(per_run: &[Option<f64>], confidence: f64) -> Result<MetricStats> {
    let values: Option<Vec<f64>> = per_run.iter().copied().collect();
    let Some(values) = values else {
        return Ok(MetricStats {
            mean: None,
            std_dev: None,
            ci_half_width: None,
            per_run: per_run.to_vec(),
        });
    };
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Ok(MetricStats {
            mean: Some(mean),
            std_dev: None,
            ci_half_width: None,
            per_run: per_run.to_vec(),
        });
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let std_dev = var.sqrt();
    let half = t_quantile(confidence, (n - 1) as f64)? * std_dev / (n as f64).sqrt();
    Ok(MetricStats {
        mean: Some(mean),
        std_dev: Some(std_dev),
        ci_half_width: Some(half),
        per_run: per_run.to_vec(),
    })
}

fn t_quantile(confidence: f64, dof: f64) -> Result<f64> {
    let dist = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Config(format!("invalid t distribution: {e}")))?;
    Ok(dist.inverse_cdf(0.5 + confidence / 2.0))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

/// `run_id,strategy,r,k,hit_rate,bhr,costly_miss_byte_rate,avg_hops,footprint,fpr,cpf`
pub fn runs_csv(runs: &[RunRecord]) -> String {
    let mut out = String::from(
        "run_id,strategy,r,k,hit_rate,bhr,costly_miss_byte_rate,avg_hops,footprint,fpr,cpf\n",
    );
    for r in runs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.run_id,
            r.strategy,
            r.search_radius,
            r.copy_limit.map_or_else(|| "NA".to_string(), |k| k.to_string()),
            r.report.hit_rate,
            r.report.byte_hit_rate,
            r.report.costly_miss_byte_rate,
            r.report.avg_hops,
            r.report.footprint,
            r.report.footprint_reduction,
            fmt_opt(r.report.coupling_factor),
        ));
    }
    out
}

/// `strategy,mean,ci_half_width` figure data for one metric.
pub fn figure_csv(report: &AggregateReport, metric: &str) -> String {
    let mut out = String::from("strategy,mean,ci_half_width\n");
    for s in &report.strategies {
        let stats = &s.metrics[metric];
        out.push_str(&format!(
            "{},{},{}\n",
            s.strategy,
            fmt_opt(stats.mean),
            fmt_opt(stats.ci_half_width)
        ));
    }
    out
}

/// Executes the experiment and writes all report files into `out_dir`:
/// `resolved_config.json`, `runs.csv`, `aggregate.json`, and one
/// `fig_<metric>.csv` per metric. With `dump_logs`, per-run event logs and
/// final cache snapshots are written as CSV too.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path, dump_logs: bool) -> Result<AggregateReport> {
    let result = execute(spec, dump_logs)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("resolved_config.json"), result.resolved.to_json()?)?;
    fs::write(out_dir.join("runs.csv"), runs_csv(&result.runs))?;
    fs::write(
        out_dir.join("aggregate.json"),
        serde_json::to_string_pretty(&result.aggregate)?,
    )?;
    for key in METRIC_KEYS {
        fs::write(out_dir.join(format!("fig_{key}.csv")), figure_csv(&result.aggregate, key))?;
    }
    if let Some(logs) = &result.logs {
        for (strategy, repetition, log) in logs {
            fs::write(out_dir.join(format!("events_{strategy}_{repetition}.csv")), log.to_csv())?;
            if let Some(snapshot) = log.snapshots.last() {
                fs::write(
                    out_dir.join(format!("snapshot_{strategy}_{repetition}.csv")),
                    snapshot.to_csv(),
                )?;
            }
        }
    }
    Ok(result.aggregate)
}

/// Whether larger values of a metric rank first.
pub fn higher_is_better(metric: &str) -> bool {
    !matches!(metric, "costly_miss_byte_rate" | "avg_hops" | "footprint")
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonEntry {
    pub strategy: String,
    pub mean: Option<f64>,
    pub ci_half_width: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricComparison {
    pub metric: String,
    pub higher_is_better: bool,
    /// Best first; strategies without a defined mean rank last.
    pub ranking: Vec<ComparisonEntry>,
    /// Pairs whose confidence intervals overlap (or lack intervals): their
    /// ranking is not significant.
    pub overlapping: Vec<(String, String)>,
}

/// Strategy comparison. The headline always pairs byte hit rate with
/// footprint reduction; neither is meaningful alone.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    pub headline: Vec<(ComparisonEntry, ComparisonEntry)>,
    pub metrics: Vec<MetricComparison>,
}

pub fn compare(reports: &[&AggregateReport]) -> Result<ComparisonTable> {
    if reports.is_empty() {
        return Err(Error::Config("nothing to compare".into()));
    }
    let keys: Vec<String> = reports[0].strategies[0].metrics.keys().cloned().collect();
    let mut entries: Vec<(String, &BTreeMap<String, MetricStats>)> = Vec::new();
    for (i, report) in reports.iter().enumerate() {
        for s in &report.strategies {
            let name = if reports.len() > 1 {
                format!("{}@{}", s.strategy, (b'A' + i as u8) as char)
            } else {
                s.strategy.clone()
            };
            let this_keys: Vec<String> = s.metrics.keys().cloned().collect();
            if this_keys != keys {
                return Err(Error::MetricMismatch);
            }
            entries.push((name, &s.metrics));
        }
    }

    let headline = entries
        .iter()
        .map(|(name, metrics)| {
            let pick = |key: &str| ComparisonEntry {
                strategy: name.clone(),
                mean: metrics[key].mean,
                ci_half_width: metrics[key].ci_half_width,
            };
            (pick("byte_hit_rate"), pick("footprint_reduction"))
        })
        .collect();

    let mut metric_tables = Vec::new();
    for key in &keys {
        let mut ranking: Vec<ComparisonEntry> = entries
            .iter()
            .map(|(name, metrics)| ComparisonEntry {
                strategy: name.clone(),
                mean: metrics[key].mean,
                ci_half_width: metrics[key].ci_half_width,
            })
            .collect();
        let better = higher_is_better(key);
        ranking.sort_by(|a, b| match (a.mean, b.mean) {
            (Some(x), Some(y)) => {
                let ord = x.total_cmp(&y);
                if better {
                    ord.reverse()
                } else {
                    ord
                }
            }
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        });
        let mut overlapping = Vec::new();
        for i in 0..ranking.len() {
            for j in (i + 1)..ranking.len() {
                let (a, b) = (&ranking[i], &ranking[j]);
                let overlaps = match (a.mean, b.mean, a.ci_half_width, b.ci_half_width) {
                    (Some(ma), Some(mb), Some(ca), Some(cb)) => (ma - mb).abs() <= ca + cb,
                    // Without both intervals, significance cannot be established.
                    _ => true,
                };
                if overlaps {
                    overlapping.push((a.strategy.clone(), b.strategy.clone()));
                }
            }
        }
        metric_tables.push(MetricComparison {
            metric: key.clone(),
            higher_is_better: better,
            ranking,
            overlapping,
        });
    }
    Ok(ComparisonTable { headline, metrics: metric_tables })
}

/// Plain-text rendering of a comparison.
pub fn render_comparison(table: &ComparisonTable) -> String {
    let mut out = String::new();
    out.push_str("strategy                      BHR                 FPR\n");
    for (bhr, fpr) in &table.headline {
        out.push_str(&format!(
            "{:<28}  {:<18}  {:<18}\n",
            bhr.strategy,
            render_entry(bhr),
            render_entry(fpr)
        ));
    }
    for metric in &table.metrics {
        out.push_str(&format!(
            "\n{} ({} is better)\n",
            metric.metric,
            if metric.higher_is_better { "higher" } else { "lower" }
        ));
        for (rank, entry) in metric.ranking.iter().enumerate() {
            out.push_str(&format!(
                "  {}. {:<25} {}\n",
                rank + 1,
                entry.strategy,
                render_entry(entry)
            ));
        }
        if !metric.overlapping.is_empty() {
            let pairs: Vec<String> = metric
                .overlapping
                .iter()
                .map(|(a, b)| format!("{a}~{b}"))
                .collect();
            out.push_str(&format!("  not significant: {}\n", pairs.join(", ")));
        }
    }
    out
}

fn render_entry(entry: &ComparisonEntry) -> String {
    match (entry.mean, entry.ci_half_width) {
        (Some(m), Some(ci)) => format!("{m:.6} ±{ci:.6}"),
        (Some(m), None) => format!("{m:.6} ±NA"),
        _ => "NA".to_string(),
    }
}
