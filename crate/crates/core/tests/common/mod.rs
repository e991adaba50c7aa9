//! Independent reference implementations used by the integration tests.
//!
//! Each check returns `Err` with a description of the first mismatch so
//! the same code can back both `#[test]`s and the acceptance report.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use continuum_core::placement::{greedy_fram_place, greedy_latency_place, order_services, Strategy};
use continuum_core::simulation::Simulator;
use continuum_core::topology::{generate_topology, DistanceMatrix, TopologyParams};
use continuum_core::workload::{assign_users, generate_apps, WorkloadParams};
use continuum_core::{
    App, Capacity, DistanceMetric, NodeId, OrderingMode, PlacementPlan, ServiceId, Topology,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub struct Instance {
    pub topology: Topology,
    pub apps: Vec<App>,
}

/// A random instance of at most 15 nodes (cloud included) and 5 apps.
/// Every other instance uses tight node RAM so the cloud fallback and
/// skipped-node paths are exercised.
pub fn small_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fog = rng.random_range(3..=14);
    let mut tp = TopologyParams::default();
    if seed % 2 == 1 {
        tp.node_ram = (3, 9);
    }
    let topology = generate_topology(fog, rng.random(), &tp).unwrap();
    let apps = generate_apps(rng.random_range(1..=5), rng.random(), &WorkloadParams::default()).unwrap();
    Instance { topology, apps }
}

pub fn assignments(plan: &PlacementPlan) -> BTreeMap<ServiceId, NodeId> {
    plan.assignments().clone()
}

fn free_ram(topology: &Topology) -> Vec<Option<u64>> {
    topology
        .nodes()
        .iter()
        .map(|n| n.free_ram.finite().map(u64::from))
        .collect()
}

fn take(free: &mut [Option<u64>], node: NodeId, demand: u32) -> bool {
    match free[node] {
        None => true,
        Some(f) if f >= u64::from(demand) => {
            free[node] = Some(f - u64::from(demand));
            true
        }
        Some(_) => false,
    }
}

fn cloud(topology: &Topology) -> NodeId {
    topology.nodes().iter().find(|n| n.is_cloud).unwrap().id
}

/// Rescans every fog node per service: highest tier, then most free RAM,
/// then lowest id. Cloud when nothing fits.
pub fn fram_rescan(topology: &Topology, apps: &[App], mode: OrderingMode) -> BTreeMap<ServiceId, NodeId> {
    let mut free = free_ram(topology);
    let mut out = BTreeMap::new();
    for s in order_services(apps, mode) {
        let mut best: Option<(u32, u64, NodeId)> = None;
        for n in topology.nodes().iter().filter(|n| !n.is_cloud) {
            let f = free[n.id].unwrap();
            if f < u64::from(s.ram_demand) {
                continue;
            }
            let better = match best {
                None => true,
                Some((t, bf, _)) => n.tier > t || (n.tier == t && f > bf),
            };
            if better {
                best = Some((n.tier, f, n.id));
            }
        }
        let node = best.map_or(cloud(topology), |b| b.2);
        take(&mut free, node, s.ram_demand);
        out.insert(s.id(), node);
    }
    out
}

/// First fit over fog nodes sorted by mean `PD + 1/BW` of their links.
pub fn latency_first_fit(
    topology: &Topology,
    apps: &[App],
    mode: OrderingMode,
) -> BTreeMap<ServiceId, NodeId> {
    let mut sums = vec![(0.0f64, 0usize); topology.len()];
    for l in topology.links() {
        let w = l.propagation_delay + 1.0 / l.bandwidth;
        for end in [l.endpoint_a, l.endpoint_b] {
            sums[end].0 += w;
            sums[end].1 += 1;
        }
    }
    let mut order: Vec<(f64, NodeId)> = topology
        .nodes()
        .iter()
        .filter(|n| !n.is_cloud)
        .map(|n| (sums[n.id].0 / sums[n.id].1 as f64, n.id))
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut free = free_ram(topology);
    let mut out = BTreeMap::new();
    for s in order_services(apps, mode) {
        let node = order
            .iter()
            .map(|&(_, id)| id)
            .find(|&id| free[id].unwrap() >= u64::from(s.ram_demand))
            .unwrap_or(cloud(topology));
        take(&mut free, node, s.ram_demand);
        out.insert(s.id(), node);
    }
    out
}

/// All-pairs shortest distances.
pub fn floyd_warshall(topology: &Topology, metric: DistanceMetric) -> Vec<Vec<f64>> {
    let n = topology.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for l in topology.links() {
        let w = match metric {
            DistanceMetric::Pd => l.propagation_delay,
            DistanceMetric::PdPlusInvBw => l.propagation_delay + 1.0 / l.bandwidth,
        };
        let (a, b) = (l.endpoint_a, l.endpoint_b);
        d[a][b] = d[a][b].min(w);
        d[b][a] = d[b][a].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Exhaustive near-gateway: every node (cloud included) is scored at
/// every step; lowest score wins, lowest id on ties.
pub fn near_gateway_exhaustive(
    topology: &Topology,
    apps: &[App],
    mode: OrderingMode,
    metric: DistanceMetric,
) -> BTreeMap<ServiceId, NodeId> {
    let d = floyd_warshall(topology, metric);
    let gateways: Vec<NodeId> = topology.gateways().iter().copied().collect();
    let mut free = free_ram(topology);
    let mut out: BTreeMap<ServiceId, NodeId> = BTreeMap::new();
    for s in order_services(apps, mode) {
        let score = |n: NodeId| {
            if s.order == 0 {
                gateways.iter().map(|&g| d[n][g]).sum::<f64>() / gateways.len() as f64
            } else {
                d[n][out[&ServiceId::new(s.app_id, s.order - 1)]]
            }
        };
        let mut best: Option<(f64, NodeId)> = None;
        for (n, room) in free.iter().enumerate() {
            if room.is_some_and(|f| f < u64::from(s.ram_demand)) {
                continue;
            }
            let sc = score(n);
            if best.is_none_or(|(b, _)| sc < b) {
                best = Some((sc, n));
            }
        }
        let node = best.unwrap().1;
        take(&mut free, node, s.ram_demand);
        out.insert(s.id(), node);
    }
    out
}

pub fn check_fram(seed: u64) -> Check {
    let inst = small_instance(seed);
    for mode in OrderingMode::ALL {
        let ordered = order_services(&inst.apps, mode);
        let plan = greedy_fram_place(&inst.topology, &ordered).map_err(|e| e.to_string())?;
        let want = fram_rescan(&inst.topology, &inst.apps, mode);
        if assignments(&plan) != want {
            return Err(format!(
                "greedy_fram seed {seed} {mode}: heap and rescan disagree"
            ));
        }
    }
    Ok(())
}

pub fn check_latency(seed: u64) -> Check {
    let inst = small_instance(seed);
    for mode in OrderingMode::ALL {
        let ordered = order_services(&inst.apps, mode);
        let plan = greedy_latency_place(&inst.topology, &ordered).map_err(|e| e.to_string())?;
        if assignments(&plan) != latency_first_fit(&inst.topology, &inst.apps, mode) {
            return Err(format!(
                "greedy_latency seed {seed} {mode}: differs from first fit"
            ));
        }
    }
    Ok(())
}

pub fn check_near_gateway(seed: u64) -> Check {
    let inst = small_instance(seed);
    for (strategy, metric) in [
        (Strategy::NearGatewayPd, DistanceMetric::Pd),
        (Strategy::NearGatewayPdBw, DistanceMetric::PdPlusInvBw),
    ] {
        for mode in OrderingMode::ALL {
            let plan = strategy
                .place(&inst.topology, &inst.apps, mode)
                .map_err(|e| e.to_string())?;
            if assignments(&plan) != near_gateway_exhaustive(&inst.topology, &inst.apps, mode, metric) {
                return Err(format!(
                    "{strategy} seed {seed} {mode}: differs from exhaustive scan"
                ));
            }
        }
    }
    Ok(())
}

/// Largest |Dijkstra − Floyd–Warshall| over both metrics.
pub fn distance_error(seed: u64) -> f64 {
    let inst = small_instance(seed);
    let mut worst = 0.0f64;
    for metric in [DistanceMetric::Pd, DistanceMetric::PdPlusInvBw] {
        let fw = floyd_warshall(&inst.topology, metric);
        let dm = DistanceMatrix::new(&inst.topology, metric);
        for (i, row) in fw.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                worst = worst.max((dm.get(i, j) - want).abs());
            }
        }
    }
    worst
}

/// Shortest `PD + 1/BW` path from `a` to `b` as link indices, by
/// predecessor walk over Floyd–Warshall distances.
pub fn route(topology: &Topology, a: NodeId, b: NodeId) -> Vec<usize> {
    let d = floyd_warshall(topology, DistanceMetric::PdPlusInvBw);
    let mut path = Vec::new();
    let mut at = b;
    while at != a {
        let (idx, prev) = topology
            .links()
            .iter()
            .enumerate()
            .filter_map(|(i, l)| {
                let other = if l.endpoint_a == at {
                    l.endpoint_b
                } else if l.endpoint_b == at {
                    l.endpoint_a
                } else {
                    return None;
                };
                let w = l.propagation_delay + 1.0 / l.bandwidth;
                ((d[a][other] + w - d[a][at]).abs() < 1e-9).then_some((i, other))
            })
            .min_by(|x, y| d[a][x.1].partial_cmp(&d[a][y.1]).unwrap())
            .unwrap();
        path.push(idx);
        at = prev;
    }
    path.reverse();
    path
}

fn transfer(topology: &Topology, a: NodeId, b: NodeId, size: u64) -> f64 {
    route(topology, a, b)
        .iter()
        .map(|&i| {
            let l = &topology.links()[i];
            l.propagation_delay + size as f64 / l.bandwidth
        })
        .sum()
}

/// Random single-request scenario: closed-form latency vs the simulator.
/// Returns the absolute error.
pub fn single_request_error(seed: u64) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let topology = generate_topology(rng.random_range(3..=14), rng.random(), &TopologyParams::default())
        .map_err(|e| e.to_string())?;
    let params = WorkloadParams {
        services_per_app: (1, 5),
        ..WorkloadParams::default()
    };
    let apps = generate_apps(1, rng.random(), &params).map_err(|e| e.to_string())?;
    let app = &apps[0];
    let mut free = free_ram(&topology);
    let mut hosts = Vec::new();
    for s in &app.services {
        let node = loop {
            let n = rng.random_range(0..topology.len());
            if take(&mut free, n, s.ram_demand) {
                break n;
            }
        };
        hosts.push((s.id(), node));
    }
    let plan = PlacementPlan::from_assignments(&topology, &apps, hosts.iter().copied())
        .map_err(|e| e.to_string())?;
    let gateway = *topology.gateways().iter().next().unwrap();

    let mut expected = 0.0;
    let mut at = gateway;
    for (k, &(_, host)) in hosts.iter().enumerate() {
        let msg = &app.messages[k];
        expected += transfer(&topology, at, host, msg.size);
        expected += msg.instructions as f64 / topology.nodes()[host].ipt as f64;
        at = host;
    }

    let mut sim = Simulator::new(&topology, &apps, &plan).map_err(|e| e.to_string())?;
    let emitted = rng.random_range(0.0..1000.0);
    sim.inject(app.id, gateway, emitted).map_err(|e| e.to_string())?;
    sim.run();
    match sim.samples() {
        [one] => Ok((one.latency - expected).abs()),
        other => Err(format!("seed {seed}: expected one sample, got {}", other.len())),
    }
}

/// Used for determinism checks: the assignments and residuals of every
/// strategy/mode pair on one generated scenario.
pub fn plans_for(node_count: usize, app_count: usize, seed: u64) -> Vec<PlacementPlan> {
    let topology = generate_topology(node_count, seed, &TopologyParams::default()).unwrap();
    let apps = generate_apps(app_count, seed, &WorkloadParams::default()).unwrap();
    assign_users(&topology, &apps, seed).unwrap();
    Strategy::ALL
        .iter()
        .flat_map(|s| OrderingMode::ALL.map(|m| s.place(&topology, &apps, m).unwrap()))
        .collect()
}

/// Fog nodes covered exactly once by the communities.
pub fn is_partition(topology: &Topology, communities: &[Vec<NodeId>]) -> bool {
    let fog: BTreeSet<NodeId> = topology.fog_nodes().map(|n| n.id).collect();
    let mut seen = BTreeSet::new();
    for c in communities {
        if c.is_empty() {
            return false;
        }
        for &n in c {
            if !seen.insert(n) {
                return false;
            }
        }
    }
    seen == fog
}

pub fn capacity_ok(topology: &Topology, plan: &PlacementPlan, apps: &[App]) -> bool {
    let mut used = vec![0u64; topology.len()];
    for a in apps {
        for s in &a.services {
            match plan.node_of(s.id()) {
                Some(n) => used[n] += u64::from(s.ram_demand),
                None => return false,
            }
        }
    }
    topology.nodes().iter().all(|n| match n.ram_capacity {
        Capacity::Unbounded => true,
        Capacity::Finite(c) => used[n.id] <= u64::from(c),
    })
}
