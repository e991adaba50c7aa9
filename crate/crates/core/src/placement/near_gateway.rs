use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::placement::{apps_by_request_rate, OrderingMode, PlacementPlan, PlanBuilder};
use crate::topology::{DistanceMatrix, DistanceMetric, NodeId, Topology};
use crate::workload::{message_routing_sequence, App, AppId, ServiceId};

/// Places zero-order services on the feasible node closest on average to
/// every gateway, then each later service on the feasible node closest to
/// where its predecessor landed.
///
/// Service-based walks the routing sequence order by order, app-based
/// walks it app by app. Apps are visited by descending request rate. The
/// cloud is an ordinary candidate.
pub fn near_gateway_place(
    topology: &Topology,
    apps: &[App],
    mode: OrderingMode,
    metric: DistanceMetric,
) -> Result<PlacementPlan> {
    let dist = DistanceMatrix::new(topology, metric);
    let to_gateways: Vec<f64> = (0..topology.len())
        .map(|n| dist.avg_to(n, topology.gateways()))
        .collect();
    let routing = message_routing_sequence(apps);
    let sorted = apps_by_request_rate(apps);

    let steps: Vec<(usize, AppId)> = match mode {
        OrderingMode::ServiceBased => routing
            .iter()
            .flat_map(|(&order, per_app)| {
                sorted
                    .iter()
                    .filter(move |a| per_app.contains_key(&a.id))
                    .map(move |a| (order, a.id))
            })
            .collect(),
        OrderingMode::AppBased => sorted
            .iter()
            .flat_map(|a| {
                routing
                    .iter()
                    .filter(move |(_, per_app)| per_app.contains_key(&a.id))
                    .map(move |(&order, _)| (order, a.id))
            })
            .collect(),
    };

    let by_id: HashMap<AppId, &App> = apps.iter().map(|a| (a.id, a)).collect();
    let mut parent: HashMap<AppId, NodeId> = HashMap::new();
    let mut plan = PlanBuilder::new(topology);
    for (order, app_id) in steps {
        let app = by_id[&app_id];
        for sid in &routing[&order][&app_id] {
            let service = &app.services[sid.order];
            let score = |n: NodeId| match parent.get(&app_id) {
                Some(&p) if order > 0 => dist.get(n, p),
                _ => to_gateways[n],
            };
            let node = argmin_feasible(topology, &plan, service.ram_demand, score)
                .ok_or_else(|| no_candidate(*sid))?;
            plan.try_place(node, service);
            parent.insert(app_id, node);
        }
    }
    Ok(plan.finish())
}

/// Feasible node with the smallest score, lowest id on ties.
fn argmin_feasible(
    topology: &Topology,
    plan: &PlanBuilder,
    demand: u32,
    score: impl Fn(NodeId) -> f64,
) -> Option<NodeId> {
    let mut best: Option<(f64, NodeId)> = None;
    for node in topology.nodes() {
        if !plan.fits(node.id, demand) {
            continue;
        }
        let s = score(node.id);
        if best.is_none_or(|(b, _)| s < b) {
            best = Some((s, node.id));
        }
    }
    best.map(|(_, n)| n)
}

fn no_candidate(service: ServiceId) -> Error {
    Error::InvalidTopology(format!("no node can host {service}"))
}
