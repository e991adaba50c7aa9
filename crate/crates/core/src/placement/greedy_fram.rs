use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::placement::{PlacementPlan, PlanBuilder};
use crate::topology::{Capacity, NodeId, Topology};
use crate::workload::Service;

/// Heap key: higher tier first, then more free RAM, then lower id.
type Entry = (u32, Capacity, Reverse<NodeId>);

/// Places each service on the fog node with the highest tier and, within
/// that tier, the most free RAM.
///
/// Nodes popped without room are held aside for the current service and
/// pushed back before the next one. A service nothing fits goes to the
/// cloud.
pub fn greedy_fram_place(topology: &Topology, services: &[&Service]) -> Result<PlacementPlan> {
    let mut plan = PlanBuilder::new(topology);
    let mut heap: BinaryHeap<Entry> = topology
        .fog_nodes()
        .map(|n| (n.tier, plan.free(n.id), Reverse(n.id)))
        .collect();
    let mut retrieved: Vec<Entry> = Vec::new();

    for service in services {
        let mut placed = false;
        while let Some(entry) = heap.pop() {
            let (tier, _, Reverse(id)) = entry;
            if plan.try_place(id, service) {
                heap.push((tier, plan.free(id), Reverse(id)));
                placed = true;
                break;
            }
            retrieved.push(entry);
        }
        if !placed {
            plan.place_on_cloud(topology, service)?;
        }
        heap.extend(retrieved.drain(..));
    }
    Ok(plan.finish())
}
