//! Service orderings and placement strategies.
//!
//! Every strategy consumes services in an order fixed by [`OrderingMode`]
//! and produces a total [`PlacementPlan`]. Fog nodes are never filled past
//! their RAM capacity; the cloud (unbounded) absorbs whatever does not fit.

mod greedy_fram;
mod greedy_latency;
pub mod louvain;
mod near_gateway;
mod ordering;
mod rr_ipt;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{Capacity, DistanceMetric, NodeId, Topology};
use crate::workload::{App, Service, ServiceId};

pub use greedy_fram::greedy_fram_place;
pub use greedy_latency::greedy_latency_place;
pub use louvain::{louvain_communities, Community};
pub use near_gateway::near_gateway_place;
pub use ordering::{apps_by_request_rate, interleave, order_services};
pub use rr_ipt::{apps_by_message_instructions, rr_ipt_place};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OrderingMode {
    /// All services of one app before the next app.
    AppBased,
    /// One service of each app per round.
    ServiceBased,
}

impl OrderingMode {
    pub const ALL: [OrderingMode; 2] = [OrderingMode::AppBased, OrderingMode::ServiceBased];

    pub fn name(self) -> &'static str {
        match self {
            OrderingMode::AppBased => "app_based",
            OrderingMode::ServiceBased => "service_based",
        }
    }
}

impl fmt::Display for OrderingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OrderingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "app" | "app_based" | "appbased" => Ok(OrderingMode::AppBased),
            "service" | "service_based" | "servicebased" => Ok(OrderingMode::ServiceBased),
            other => Err(Error::Parse(format!("unknown ordering mode `{other}`"))),
        }
    }
}

/// The five placement configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    GreedyLatency,
    GreedyFram,
    NearGatewayPd,
    NearGatewayPdBw,
    RrIpt,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::GreedyLatency,
        Strategy::GreedyFram,
        Strategy::NearGatewayPd,
        Strategy::NearGatewayPdBw,
        Strategy::RrIpt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::GreedyLatency => "greedy_latency",
            Strategy::GreedyFram => "greedy_fram",
            Strategy::NearGatewayPd => "near_gw_pd",
            Strategy::NearGatewayPdBw => "near_gw_pd_bw",
            Strategy::RrIpt => "rr_ipt",
        }
    }

    /// Builds a plan for `apps` on `topology`.
    pub fn place(self, topology: &Topology, apps: &[App], mode: OrderingMode) -> Result<PlacementPlan> {
        match self {
            Strategy::GreedyLatency => greedy_latency_place(topology, &order_services(apps, mode)),
            Strategy::GreedyFram => greedy_fram_place(topology, &order_services(apps, mode)),
            Strategy::NearGatewayPd => near_gateway_place(topology, apps, mode, DistanceMetric::Pd),
            Strategy::NearGatewayPdBw => {
                near_gateway_place(topology, apps, mode, DistanceMetric::PdPlusInvBw)
            }
            Strategy::RrIpt => rr_ipt_place(topology, apps, mode),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == key)
            .ok_or_else(|| Error::Parse(format!("unknown strategy `{s}`")))
    }
}

/// Total mapping of services to nodes, plus each node's free RAM after
/// placement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementPlan {
    assignments: BTreeMap<ServiceId, NodeId>,
    residual: Vec<Capacity>,
}

impl PlacementPlan {
    /// Builds a plan from explicit assignments, which may be partial.
    /// Fails if a service is unknown or a fog node would overflow.
    pub fn from_assignments(
        topology: &Topology,
        apps: &[App],
        assignments: impl IntoIterator<Item = (ServiceId, NodeId)>,
    ) -> Result<Self> {
        let mut plan = PlanBuilder::new(topology);
        for (sid, node) in assignments {
            let service = apps
                .iter()
                .find(|a| a.id == sid.app)
                .and_then(|a| a.service(sid.order))
                .ok_or_else(|| Error::InvalidConfig(format!("unknown service {sid}")))?;
            topology.node(node)?;
            if !plan.try_place(node, service) {
                return Err(Error::InvalidConfig(format!("{sid} does not fit on node {node}")));
            }
        }
        Ok(plan.finish())
    }

    pub fn assignments(&self) -> &BTreeMap<ServiceId, NodeId> {
        &self.assignments
    }

    pub fn node_of(&self, service: ServiceId) -> Option<NodeId> {
        self.assignments.get(&service).copied()
    }

    /// Free RAM per node id after every placement.
    pub fn residual(&self) -> &[Capacity] {
        &self.residual
    }

    /// Distinct nodes hosting at least one service.
    pub fn used_nodes(&self) -> BTreeSet<NodeId> {
        self.assignments.values().copied().collect()
    }

    /// Checks totality over `apps`, fog capacity limits and that the
    /// residual table matches capacity minus placed demand.
    pub fn verify(&self, topology: &Topology, apps: &[App]) -> Result<()> {
        let mut placed = vec![0u64; topology.len()];
        let mut expected = 0usize;
        for app in apps {
            for s in &app.services {
                expected += 1;
                let node = self.node_of(s.id()).ok_or(Error::IncompletePlan(s.id()))?;
                topology.node(node)?;
                placed[node] += u64::from(s.ram_demand);
            }
        }
        if expected != self.assignments.len() {
            return Err(Error::InvalidConfig(format!(
                "plan assigns {} services, apps define {expected}",
                self.assignments.len()
            )));
        }
        for node in topology.nodes() {
            let want = match node.ram_capacity {
                Capacity::Unbounded => Capacity::Unbounded,
                Capacity::Finite(cap) => {
                    let used = placed[node.id];
                    if used > u64::from(cap) {
                        return Err(Error::InvalidConfig(format!(
                            "node {} holds {used} MB over capacity {cap} MB",
                            node.id
                        )));
                    }
                    Capacity::Finite(cap - used as u32)
                }
            };
            if self.residual.get(node.id) != Some(&want) {
                return Err(Error::InvalidConfig(format!(
                    "residual RAM of node {} is stale",
                    node.id
                )));
            }
        }
        Ok(())
    }

    /// Two-section text form: `service,node` rows sorted by service, a
    /// blank line, then `node,free_ram` rows sorted by node.
    pub fn to_text(&self) -> String {
        let mut out = String::from("service,node\n");
        for (s, n) in &self.assignments {
            let _ = writeln!(out, "{s},{n}");
        }
        out.push_str("\nnode,free_ram\n");
        for (n, free) in self.residual.iter().enumerate() {
            let _ = writeln!(out, "{n},{free}");
        }
        out
    }
}

/// Mutable free-RAM ledger a strategy places into.
#[derive(Debug, Clone)]
pub(crate) struct PlanBuilder {
    free: Vec<Capacity>,
    assignments: BTreeMap<ServiceId, NodeId>,
}

impl PlanBuilder {
    pub fn new(topology: &Topology) -> Self {
        PlanBuilder {
            free: topology.nodes().iter().map(|n| n.free_ram).collect(),
            assignments: BTreeMap::new(),
        }
    }

    pub fn free(&self, node: NodeId) -> Capacity {
        self.free[node]
    }

    pub fn fits(&self, node: NodeId, demand: u32) -> bool {
        self.free[node].fits(demand)
    }

    /// Places `service` on `node` if it fits.
    pub fn try_place(&mut self, node: NodeId, service: &Service) -> bool {
        match self.free[node].take(service.ram_demand) {
            Some(rest) => {
                self.free[node] = rest;
                self.assignments.insert(service.id(), node);
                true
            }
            None => false,
        }
    }

    /// Cloud fallback for a service no fog node could take.
    pub fn place_on_cloud(&mut self, topology: &Topology, service: &Service) -> Result<NodeId> {
        let cloud = topology.cloud().ok_or_else(|| {
            Error::InvalidTopology(format!("no node can host {} and there is no cloud", service.id()))
        })?;
        let placed = self.try_place(cloud, service);
        debug_assert!(placed);
        Ok(cloud)
    }

    pub fn finish(self) -> PlacementPlan {
        PlacementPlan {
            assignments: self.assignments,
            residual: self.free,
        }
    }
}
