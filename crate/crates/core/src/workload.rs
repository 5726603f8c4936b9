//! Content catalogs, popularity models, request streams, and aging.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::{derive_seed, DOMAIN_AGING, DOMAIN_REQUESTS, DOMAIN_SIZES};
use crate::topology::{NodeId, RoleAssignment};

/// A cacheable content object. Ids are dense ranks: id 0 is the most
/// popular object in the freshly built catalog.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct ObjectId(pub usize);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopularityModel {
    /// Weight of rank `i` (1-based) is `i^-exponent`.
    Zipf { exponent: f64 },
    /// Weight of rank `i` is the Weibull density evaluated at `i`.
    Weibull { shape: f64, scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeModel {
    Fixed { bytes: u64 },
    Uniform { min: u64, max: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub object: ObjectId,
    pub size_bytes: u64,
    pub weight: f64,
}

/// Content catalog: objects with sizes and strictly positive popularity
/// weights. Weights are unnormalized; sampling normalizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
    pub model: PopularityModel,
}

impl Catalog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn size_of(&self, object: ObjectId) -> u64 {
        self.entries[object.0].size_bytes
    }

    pub fn weight_of(&self, object: ObjectId) -> f64 {
        self.entries[object.0].weight
    }

    pub fn total_bytes(&self) -> u64 {
        self.entries.iter().map(|e| e.size_bytes).sum()
    }

    /// Normalized sampling probabilities, indexed by object id.
    pub fn probabilities(&self) -> Vec<f64> {
        let total: f64 = self.entries.iter().map(|e| e.weight).sum();
        self.entries.iter().map(|e| e.weight / total).collect()
    }

    /// `object,size,weight` CSV export.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("object,size,weight\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.object, e.size_bytes, e.weight));
        }
        out
    }
}

/// Builds a catalog of `n_objects` with popularity weights from `model` and
/// sizes from `size_model`, deterministically per seed.
pub fn build_catalog(
    n_objects: usize,
    model: PopularityModel,
    size_model: SizeModel,
    seed: u64,
) -> Result<Catalog> {
    if n_objects == 0 {
        return Err(Error::InvalidParameter("catalog needs at least one object".into()));
    }
    let weights: Vec<f64> = match model {
        PopularityModel::Zipf { exponent } => {
            if exponent <= 0.0 || !exponent.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "Zipf exponent must be positive, got {exponent}"
                )));
            }
            (1..=n_objects).map(|i| (i as f64).powf(-exponent)).collect()
        }
        PopularityModel::Weibull { shape, scale } => {
            if shape <= 0.0 || scale <= 0.0 || !shape.is_finite() || !scale.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "Weibull parameters must be positive, got shape {shape}, scale {scale}"
                )));
            }
            (1..=n_objects)
                .map(|i| {
                    let x = i as f64 / scale;
                    (shape / scale) * x.powf(shape - 1.0) * (-x.powf(shape)).exp()
                })
                .collect()
        }
    };
    for (i, &w) in weights.iter().enumerate() {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weight of rank {} is not strictly positive ({w}); shrink the catalog or adjust \
                 the model parameters",
                i + 1
            )));
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, DOMAIN_SIZES));
    let sizes: Vec<u64> = match size_model {
        SizeModel::Fixed { bytes } => {
            if bytes == 0 {
                return Err(Error::InvalidParameter("object size must be positive".into()));
            }
            vec![bytes; n_objects]
        }
        SizeModel::Uniform { min, max } => {
            if min == 0 || min > max {
                return Err(Error::InvalidParameter(format!(
                    "size range must satisfy 1 <= min <= max, got {min}..{max}"
                )));
            }
            (0..n_objects).map(|_| rng.gen_range(min..=max)).collect()
        }
    };
    let entries = weights
        .into_iter()
        .zip(sizes)
        .enumerate()
        .map(|(i, (weight, size_bytes))| CatalogEntry { object: ObjectId(i), size_bytes, weight })
        .collect();
    Ok(Catalog { entries, model })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Request {
    pub seq: usize,
    pub client: NodeId,
    pub object: ObjectId,
}

/// Ordered request sequence; `seq` is strictly increasing from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestStream {
    pub requests: Vec<Request>,
}

impl RequestStream {
    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// `seq,client,object` CSV export.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seq,client,object\n");
        for r in &self.requests {
            out.push_str(&format!("{},{},{}\n", r.seq, r.client, r.object));
        }
        out
    }

    /// Parses the `seq,client,object` CSV form produced by [`to_csv`].
    ///
    /// [`to_csv`]: RequestStream::to_csv
    pub fn from_csv(text: &str) -> Result<RequestStream> {
        let mut requests = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 {
                if line.trim() != "seq,client,object" {
                    return Err(Error::Parse {
                        line: 1,
                        message: format!("expected header `seq,client,object`, got `{line}`"),
                    });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let parse = |s: &str| -> Result<usize> {
                s.trim().parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("invalid integer `{s}`"),
                })
            };
            let seq = parse(fields[0])?;
            if seq != requests.len() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("seq must increase from 0; expected {}, got {seq}", requests.len()),
                });
            }
            requests.push(Request {
                seq,
                client: NodeId(parse(fields[1])?),
                object: ObjectId(parse(fields[2])?),
            });
        }
        Ok(RequestStream { requests })
    }
}

/// Popularity aging: every `interval` requests, a fraction of objects has its
/// popularity rank reshuffled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgingSchedule {
    /// Requests per aging epoch.
    pub interval: usize,
    /// Fraction of objects whose ranks are reshuffled per epoch.
    pub shuffle_fraction: f64,
}

impl AgingSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.interval < 1 {
            return Err(Error::InvalidParameter("aging interval must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.shuffle_fraction) {
            return Err(Error::InvalidParameter(format!(
                "shuffle fraction must be in [0, 1], got {}",
                self.shuffle_fraction
            )));
        }
        Ok(())
    }
}

/// Reassigns popularity ranks for a fraction of objects.
///
/// `round(f * n / 2)` disjoint pairs of objects swap weights, so exactly
/// `2 * round(f * n / 2)` objects change rank. Object ids, sizes, and the
/// weight multiset are preserved. Deterministic per `(seed, epoch)`.
pub fn apply_aging(
    catalog: &Catalog,
    schedule: &AgingSchedule,
    epoch: usize,
    seed: u64,
) -> Catalog {
    let n = catalog.len();
    let swaps = (schedule.shuffle_fraction * n as f64 / 2.0).round() as usize;
    if swaps == 0 {
        return catalog.clone();
    }
    let mut rng =
        ChaCha12Rng::seed_from_u64(derive_seed(derive_seed(seed, DOMAIN_AGING), epoch as u64));
    // Partial Fisher-Yates picks 2*swaps distinct objects; consecutive picks
    // form the swap pairs.
    let mut indices: Vec<usize> = (0..n).collect();
    let picks = (2 * swaps).min(n);
    for i in 0..picks {
        let j = rng.gen_range(i..n);
        indices.swap(i, j);
    }
    let mut entries = catalog.entries.clone();
    for pair in 0..picks / 2 {
        let a = indices[2 * pair];
        let b = indices[2 * pair + 1];
        let wa = entries[a].weight;
        entries[a].weight = entries[b].weight;
        entries[b].weight = wa;
    }
    Catalog { entries, model: catalog.model }
}

/// Epoch boundary test shared by the stream sampler and the simulator:
/// aging epoch `idx / interval - 1` fires before request `idx` whenever
/// `idx` is a positive multiple of the interval.
pub(crate) fn aging_epoch_before(idx: usize, interval: usize) -> Option<usize> {
    if idx > 0 && idx.is_multiple_of(interval) {
        Some(idx / interval - 1)
    } else {
        None
    }
}

/// Samples `n_requests` IID requests: the client is drawn proportionally to
/// its gravity weight and the object proportionally to its catalog weight.
pub fn sample_requests(
    catalog: &Catalog,
    roles: &RoleAssignment,
    n_requests: usize,
    seed: u64,
) -> Result<RequestStream> {
    sample_requests_aged(catalog, roles, n_requests, None, seed)
}

/// Like [`sample_requests`], but with popularity aging applied between
/// epochs: requests in epoch `e` are drawn from the catalog aged `e` times.
/// A simulator run configured with the same schedule and seed replays the
/// identical catalog sequence.
pub fn sample_requests_aged(
    catalog: &Catalog,
    roles: &RoleAssignment,
    n_requests: usize,
    aging: Option<&AgingSchedule>,
    seed: u64,
) -> Result<RequestStream> {
    if roles.clients.is_empty() {
        return Err(Error::EmptyClients);
    }
    if let Some(schedule) = aging {
        schedule.validate()?;
    }
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, DOMAIN_REQUESTS));
    let client_cdf = cumulative(&roles.client_weights);
    let mut current = catalog.clone();
    let mut object_cdf = cumulative_weights(&current);
    let mut requests = Vec::with_capacity(n_requests);
    for seq in 0..n_requests {
        if let Some(schedule) = aging {
            if let Some(epoch) = aging_epoch_before(seq, schedule.interval) {
                current = apply_aging(&current, schedule, epoch, seed);
                object_cdf = cumulative_weights(&current);
            }
        }
        let client = roles.clients[draw(&client_cdf, &mut rng)];
        let object = ObjectId(draw(&object_cdf, &mut rng));
        requests.push(Request { seq, client, object });
    }
    Ok(RequestStream { requests })
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

fn cumulative_weights(catalog: &Catalog) -> Vec<f64> {
    let weights: Vec<f64> = catalog.entries.iter().map(|e| e.weight).collect();
    cumulative(&weights)
}

fn draw(cdf: &[f64], rng: &mut ChaCha12Rng) -> usize {
    let total = *cdf.last().expect("non-empty cdf");
    let x = rng.gen_range(0.0..total);
    cdf.partition_point(|&c| c <= x).min(cdf.len() - 1)
}
