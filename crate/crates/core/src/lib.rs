//! Deterministic simulation and measurement of networks of in-network caches.
//!
//! The crate models a single ISP as an undirected router graph. Some routers
//! act as clients (request entry points), a few as content servers, and the
//! rest carry a bounded LRU content store. Requests walk the shortest path
//! from client to origin, may be answered en route or via a scoped
//! cooperative search, and leave copies behind according to a placement
//! strategy. Every run produces an event log from which the full metric
//! suite is computed: hit rate, byte hit rate, costly-miss byte rate,
//! average hops, traffic footprint, footprint reduction (with
//! baseline-independent rebasing), and the coupling factor between content
//! popularity and node betweenness.
//!
//! The [`harness`] module wraps all of this into repeatable experiments:
//! seeded repetitions with re-randomized client placement, a shared
//! caching-disabled baseline per repetition, and Student-t confidence
//! intervals across runs. Identical inputs produce byte-identical outputs.

pub mod cache;
pub mod error;
pub mod harness;
pub mod metrics;
mod seeds;
pub mod simulator;
pub mod topology;
pub mod workload;

pub use error::{Error, Result};
pub use topology::{Graph, NodeId};
pub use workload::{Catalog, ObjectId, RequestStream};
