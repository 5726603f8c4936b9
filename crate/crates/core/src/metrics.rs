//! The measurement suite: (byte) hit rate, costly-miss byte rate, average
//! hops, traffic footprint, footprint reduction with baseline rebasing, and
//! the coupling factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{CacheSnapshot, EventLog, Outcome};
use crate::topology::CentralityTable;

/// Footprint of the caching-disabled run of the same configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineFootprint {
    pub x_theta: f64,
}

/// What a miss contributes to the average-hops metric. Serializes as the
/// string `"actual"` or a plain hop number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MissCost {
    /// Use the recorded client-to-origin distance.
    Actual,
    /// A fixed hop value.
    Hops(f64),
}

impl Serialize for MissCost {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MissCost::Actual => serializer.serialize_str("actual"),
            MissCost::Hops(h) => serializer.serialize_f64(*h),
        }
    }
}

impl<'de> Deserialize<'de> for MissCost {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Hops(f64),
            Tag(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Hops(h) => Ok(MissCost::Hops(h)),
            Repr::Tag(s) if s == "actual" => Ok(MissCost::Actual),
            Repr::Tag(s) => Err(serde::de::Error::custom(format!(
                "miss_cost must be \"actual\" or a hop count, got \"{s}\""
            ))),
        }
    }
}

/// Hit rate and byte hit rate of the whole network treated as one cache.
pub fn hit_and_byte_hit_rate(log: &EventLog) -> Result<(f64, f64)> {
    if log.records.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut hits = 0usize;
    let mut hit_bytes = 0u64;
    let mut total_bytes = 0u64;
    for r in &log.records {
        total_bytes += r.size_bytes;
        if r.outcome == Outcome::CacheHit {
            hits += 1;
            hit_bytes += r.size_bytes;
        }
    }
    let hit_rate = hits as f64 / log.records.len() as f64;
    let byte_hit_rate = hit_bytes as f64 / total_bytes as f64;
    Ok((hit_rate, byte_hit_rate))
}

/// Byte share of misses that went to external-classified servers — the
/// traffic that actually costs the ISP.
pub fn costly_miss_byte_rate(log: &EventLog) -> Result<f64> {
    if log.records.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut costly_bytes = 0u64;
    let mut total_bytes = 0u64;
    for r in &log.records {
        total_bytes += r.size_bytes;
        if r.outcome == Outcome::ServerHit && r.server_external {
            costly_bytes += r.size_bytes;
        }
    }
    Ok(costly_bytes as f64 / total_bytes as f64)
}

/// Mean hops per request; hits contribute their delivery distance, misses
/// the configured miss cost.
pub fn average_hops(log: &EventLog, miss_cost: MissCost) -> Result<f64> {
    if log.records.is_empty() {
        return Err(Error::EmptyLog);
    }
    if let MissCost::Hops(h) = miss_cost {
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::InvalidParameter(format!("miss cost must be >= 0, got {h}")));
        }
    }
    let total: f64 = log
        .records
        .iter()
        .map(|r| match r.outcome {
            Outcome::CacheHit => r.delivery_hops as f64,
            Outcome::ServerHit => match miss_cost {
                MissCost::Actual => r.origin_hops as f64,
                MissCost::Hops(h) => h,
            },
        })
        .sum();
    Ok(total / log.records.len() as f64)
}

/// Traffic footprint: bytes times hops, summed over all deliveries.
pub fn footprint(log: &EventLog) -> f64 {
    log.records.iter().map(|r| r.size_bytes as f64 * r.delivery_hops as f64).sum()
}

/// Footprint reduction against the caching-disabled baseline.
pub fn footprint_reduction(x: f64, baseline: &BaselineFootprint) -> Result<f64> {
    if !baseline.x_theta.is_finite() || baseline.x_theta <= 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok(1.0 - x / baseline.x_theta)
}

/// Re-expresses footprint reductions against a new baseline strategy whose
/// reduction (vs. no caching) is `y_beta`.
///
/// The map is affine, `y' = y / (1 - y_beta) + 1 - 1 / (1 - y_beta)`, so
/// strict ordering is preserved and the chosen baseline lands exactly on 0.
pub fn rebase(y_values: &[f64], y_beta: f64) -> Result<Vec<f64>> {
    if y_beta >= 1.0 {
        return Err(Error::DegenerateBaseline(y_beta));
    }
    let a = 1.0 / (1.0 - y_beta);
    let b = 1.0 - a;
    Ok(y_values.iter().map(|&y| a * y + b).collect())
}

/// How per-node popularity mass is computed from a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PopularityMass {
    /// Weight times size: large popular objects dominate, consistent with
    /// the byte-oriented metrics.
    #[default]
    WeightTimesSize,
    WeightOnly,
}

/// Coupling factor: Pearson correlation, across all cache-equipped nodes,
/// between time-averaged cached popularity mass and betweenness centrality.
/// Positive means the popular content sits in the core.
pub fn coupling_factor(snapshots: &[CacheSnapshot], centrality: &CentralityTable) -> Result<f64> {
    coupling_factor_with(snapshots, centrality, PopularityMass::WeightTimesSize)
}

pub fn coupling_factor_with(
    snapshots: &[CacheSnapshot],
    centrality: &CentralityTable,
    mass: PopularityMass,
) -> Result<f64> {
    let first = snapshots
        .first()
        .ok_or_else(|| Error::InvalidParameter("coupling factor needs at least one snapshot".into()))?;
    let nodes: Vec<_> = first.contents.iter().map(|(v, _)| *v).collect();
    if nodes.len() < 2 {
        return Err(Error::InvalidParameter("coupling factor needs at least two caching nodes".into()));
    }
    let mut masses = vec![0.0f64; nodes.len()];
    for snapshot in snapshots {
        if snapshot.contents.len() != nodes.len() {
            return Err(Error::InvalidParameter("snapshots cover different node sets".into()));
        }
        for (i, (_, objects)) in snapshot.contents.iter().enumerate() {
            for &(_, size, weight) in objects {
                masses[i] += match mass {
                    PopularityMass::WeightTimesSize => weight * size as f64,
                    PopularityMass::WeightOnly => weight,
                };
            }
        }
    }
    for m in &mut masses {
        *m /= snapshots.len() as f64;
    }
    let betweenness: Vec<f64> = nodes.iter().map(|&v| centrality.get(v)).collect();
    pearson(&masses, &betweenness)
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        syy += (y - mean_y) * (y - mean_y);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::UndefinedCorrelation("popularity mass"));
    }
    if syy == 0.0 {
        return Err(Error::UndefinedCorrelation("betweenness"));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// All metrics of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub hit_rate: f64,
    pub byte_hit_rate: f64,
    pub costly_miss_byte_rate: f64,
    pub avg_hops: f64,
    /// The miss cost the average was computed with.
    pub miss_cost: MissCost,
    pub footprint: f64,
    pub footprint_reduction: f64,
    /// `None` when the correlation is undefined (degenerate placement, e.g.
    /// the caching-disabled baseline).
    pub coupling_factor: Option<f64>,
}

/// Computes the full report for one event log.
pub fn compute_report(
    log: &EventLog,
    centrality: &CentralityTable,
    baseline: &BaselineFootprint,
    miss_cost: MissCost,
) -> Result<MetricsReport> {
    let (hit_rate, byte_hit_rate) = hit_and_byte_hit_rate(log)?;
    let costly = costly_miss_byte_rate(log)?;
    let avg_hops = average_hops(log, miss_cost)?;
    let x = footprint(log);
    let fpr = footprint_reduction(x, baseline)?;
    let cpf = match coupling_factor(&log.snapshots, centrality) {
        Ok(v) => Some(v),
        Err(Error::UndefinedCorrelation(_)) => None,
        Err(other) => return Err(other),
    };
    Ok(MetricsReport {
        hit_rate,
        byte_hit_rate,
        costly_miss_byte_rate: costly,
        avg_hops,
        miss_cost,
        footprint: x,
        footprint_reduction: fpr,
        coupling_factor: cpf,
    })
}
