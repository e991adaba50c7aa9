use crate::error::Result;
use crate::placement::{PlacementPlan, PlanBuilder};
use crate::topology::{avg_link_latency, NodeId, Topology};
use crate::workload::Service;

/// Fog nodes by ascending mean link latency (ties by id), cloud last.
pub(crate) fn latency_order(topology: &Topology) -> Result<Vec<NodeId>> {
    let mut keyed = Vec::with_capacity(topology.len());
    for node in topology.fog_nodes() {
        keyed.push((avg_link_latency(topology, node.id)?, node.id));
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut order: Vec<NodeId> = keyed.into_iter().map(|(_, id)| id).collect();
    order.extend(topology.cloud());
    Ok(order)
}

/// First fit over a node list sorted once by link latency.
pub fn greedy_latency_place(topology: &Topology, services: &[&Service]) -> Result<PlacementPlan> {
    let order = latency_order(topology)?;
    let mut plan = PlanBuilder::new(topology);
    for service in services {
        if !order.iter().any(|&n| plan.try_place(n, service)) {
            plan.place_on_cloud(topology, service)?;
        }
    }
    Ok(plan.finish())
}
