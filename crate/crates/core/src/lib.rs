//! Microservice placement in the cloud-to-edge continuum.
//!
//! The crate is organised bottom-up:
//!
//! - [`topology`]: the fog/edge/cloud network graph, gateways, tiers and the
//!   link-latency and distance metrics the placement heuristics rank nodes by.
//! - [`workload`]: applications as linear chains of services, their messages
//!   and the user sources that drive them.
//! - [`placement`]: the two service orderings (app-based and service-based)
//!   and the five placement configurations (greedy latency, greedy free RAM,
//!   near-gateway under two distance metrics, round-robin IPT over Louvain
//!   communities).
//! - [`simulation`]: a deterministic discrete-event engine that replays user
//!   traffic through a placement and records end-to-end request latency.
//! - [`metrics`]: per-run results, cross-seed aggregation, used-node
//!   percentages and the per-strategy app-vs-service verdicts.
//! - [`experiment`]: configuration and the strategy × mode × seed sweep that
//!   ties everything together and writes CSV reports.

pub mod error;
pub mod experiment;
pub mod metrics;
pub mod placement;
pub mod seed;
pub mod simulation;
pub mod topology;
pub mod workload;

pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, ExperimentReport};
pub use metrics::{ComparisonVerdict, RunResult, Summary, Winner};
pub use placement::{OrderingMode, PlacementPlan, Strategy};
pub use simulation::{LatencySample, SimulationConfig};
pub use topology::{Capacity, DistanceMetric, Link, Node, NodeId, Topology};
pub use workload::{App, Message, Service, ServiceId, UserSource};
