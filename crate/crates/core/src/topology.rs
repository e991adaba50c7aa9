//! The cloud-to-edge network graph.
//!
//! A [`Topology`] holds fog/edge nodes plus a single cloud node, the links
//! between them, the gateway set (the edge layer, where users attach) and a
//! per-node tier. Tiers count down from the gateways: a gateway has the
//! largest tier and nodes further from every gateway have smaller ones.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::fmt;

use rand::Rng;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seed;

pub type NodeId = usize;

/// RAM capacity in megabytes. The cloud is [`Capacity::Unbounded`].
///
/// Ordered so that every finite amount is below `Unbounded`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Capacity {
    Finite(u32),
    Unbounded,
}

impl Capacity {
    pub fn fits(self, demand: u32) -> bool {
        match self {
            Capacity::Finite(free) => free >= demand,
            Capacity::Unbounded => true,
        }
    }

    /// Capacity left after `demand` is taken, or `None` if it does not fit.
    pub fn take(self, demand: u32) -> Option<Capacity> {
        match self {
            Capacity::Finite(free) => free.checked_sub(demand).map(Capacity::Finite),
            Capacity::Unbounded => Some(Capacity::Unbounded),
        }
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Capacity::Finite(v) => Some(v),
            Capacity::Unbounded => None,
        }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(v) => write!(f, "{v}"),
            Capacity::Unbounded => f.write_str("inf"),
        }
    }
}

impl Serialize for Capacity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Capacity::Finite(v) => serializer.serialize_u32(*v),
            Capacity::Unbounded => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct CapacityVisitor;

        impl Visitor<'_> for CapacityVisitor {
            type Value = Capacity;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative integer or \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Capacity, E> {
                u32::try_from(v)
                    .map(Capacity::Finite)
                    .map_err(|_| E::custom("capacity out of range"))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Capacity, E> {
                u32::try_from(v)
                    .map(Capacity::Finite)
                    .map_err(|_| E::custom("capacity out of range"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Capacity, E> {
                match v {
                    "inf" => Ok(Capacity::Unbounded),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        deserializer.deserialize_any(CapacityVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub ram_capacity: Capacity,
    pub free_ram: Capacity,
    /// Instructions per millisecond.
    pub ipt: u32,
    pub tier: u32,
    pub is_cloud: bool,
}

/// Undirected link. Bandwidth in bytes/ms, propagation delay in ms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub endpoint_a: NodeId,
    pub endpoint_b: NodeId,
    pub bandwidth: f64,
    pub propagation_delay: f64,
}

impl Link {
    pub fn other(&self, from: NodeId) -> NodeId {
        if self.endpoint_a == from {
            self.endpoint_b
        } else {
            self.endpoint_a
        }
    }

    /// Propagation delay plus the reciprocal bandwidth, in ms.
    pub fn latency(&self) -> Result<f64> {
        link_latency(self)
    }
}

pub fn link_latency(link: &Link) -> Result<f64> {
    if !(link.bandwidth > 0.0) {
        return Err(Error::InvalidLink {
            a: link.endpoint_a,
            b: link.endpoint_b,
            reason: format!("bandwidth must be positive, got {}", link.bandwidth),
        });
    }
    Ok(link.propagation_delay + 1.0 / link.bandwidth)
}

/// Edge weight used by shortest-path queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DistanceMetric {
    /// Propagation delay only.
    Pd,
    /// Propagation delay plus reciprocal bandwidth, same as [`link_latency`].
    PdPlusInvBw,
}

impl DistanceMetric {
    pub fn weight(self, link: &Link) -> f64 {
        match self {
            DistanceMetric::Pd => link.propagation_delay,
            DistanceMetric::PdPlusInvBw => link.propagation_delay + 1.0 / link.bandwidth,
        }
    }
}

/// Ranges and constants the generator draws node and link attributes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyParams {
    /// Inclusive RAM range of fog/edge nodes, MB.
    pub node_ram: (u32, u32),
    /// Inclusive speed range of fog/edge nodes, instructions/ms.
    pub node_ipt: (u32, u32),
    pub link_bandwidth: f64,
    /// Inclusive propagation delay range of fog/edge links, ms.
    pub link_delay: (f64, f64),
    pub cloud_ipt: u32,
    pub cloud_bandwidth: f64,
    pub cloud_delay: f64,
    /// Edges added per new node by preferential attachment.
    pub attachment: usize,
    /// Minimum share of fog nodes that must be gateways.
    pub gateway_floor: f64,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            node_ram: (10, 25),
            node_ipt: (500, 1000),
            link_bandwidth: 75_000.0,
            link_delay: (2.0, 10.0),
            cloud_ipt: 10_000,
            cloud_bandwidth: 125_000.0,
            cloud_delay: 500.0,
            attachment: 2,
            gateway_floor: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    gateways: BTreeSet<NodeId>,
    /// `adjacency[n]` lists `(neighbour, link index)` sorted by neighbour.
    adjacency: Vec<Vec<(NodeId, usize)>>,
    gateway_floor: f64,
}

impl Topology {
    /// Builds a topology from explicit parts, identifying gateways with the
    /// default 5% floor and assigning tiers. Node ids must equal their index.
    pub fn new(nodes: Vec<Node>, links: Vec<Link>) -> Result<Self> {
        Self::with_floor(nodes, links, TopologyParams::default().gateway_floor)
    }

    pub fn with_floor(nodes: Vec<Node>, links: Vec<Link>, gateway_floor: f64) -> Result<Self> {
        let mut topo = Self::assemble(nodes, links, gateway_floor)?;
        topo.gateways = identify_gateways(&topo);
        topo.assign_tiers();
        Ok(topo)
    }

    /// Replaces the gateway set and recomputes tiers.
    pub fn with_gateways(mut self, gateways: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let gateways: BTreeSet<NodeId> = gateways.into_iter().collect();
        if gateways.is_empty() {
            return Err(Error::InvalidTopology("gateway set is empty".into()));
        }
        for &g in &gateways {
            let node = self.nodes.get(g).ok_or(Error::UnknownNode(g))?;
            if node.is_cloud {
                return Err(Error::InvalidTopology(format!(
                    "cloud node {g} cannot be a gateway"
                )));
            }
        }
        self.gateways = gateways;
        self.assign_tiers();
        Ok(self)
    }

    fn assemble(mut nodes: Vec<Node>, links: Vec<Link>, gateway_floor: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidTopology("no nodes".into()));
        }
        for (idx, node) in nodes.iter_mut().enumerate() {
            if node.id != idx {
                return Err(Error::InvalidTopology(format!(
                    "node at position {idx} has id {}",
                    node.id
                )));
            }
            if node.is_cloud != (node.ram_capacity == Capacity::Unbounded) {
                return Err(Error::InvalidTopology(format!(
                    "node {idx}: only the cloud has unbounded capacity"
                )));
            }
            if node.free_ram > node.ram_capacity {
                return Err(Error::InvalidTopology(format!(
                    "node {idx}: free RAM exceeds capacity"
                )));
            }
        }
        let clouds = nodes.iter().filter(|n| n.is_cloud).count();
        if clouds > 1 {
            return Err(Error::InvalidTopology(format!("{clouds} cloud nodes")));
        }
        if clouds == nodes.len() {
            return Err(Error::InvalidTopology("no fog/edge nodes".into()));
        }

        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (idx, link) in links.iter().enumerate() {
            let (a, b) = (link.endpoint_a, link.endpoint_b);
            if a >= nodes.len() {
                return Err(Error::UnknownNode(a));
            }
            if b >= nodes.len() {
                return Err(Error::UnknownNode(b));
            }
            if a == b {
                return Err(Error::InvalidLink {
                    a,
                    b,
                    reason: "self-loop".into(),
                });
            }
            link_latency(link)?;
            if !(link.propagation_delay >= 0.0) {
                return Err(Error::InvalidLink {
                    a,
                    b,
                    reason: "negative propagation delay".into(),
                });
            }
            if adjacency[a].iter().any(|&(n, _)| n == b) {
                return Err(Error::InvalidLink {
                    a,
                    b,
                    reason: "duplicate link".into(),
                });
            }
            adjacency[a].push((b, idx));
            adjacency[b].push((a, idx));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let topo = Topology {
            nodes,
            links,
            gateways: BTreeSet::new(),
            adjacency,
            gateway_floor,
        };
        if topo.hops_from(&[0]).iter().any(Option::is_none) {
            return Err(Error::InvalidTopology("graph is not connected".into()));
        }
        Ok(topo)
    }

    fn assign_tiers(&mut self) {
        let tiers = compute_tiers(self);
        for (node, tier) in self.nodes.iter_mut().zip(tiers) {
            node.tier = tier;
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.nodes.get(id).ok_or(Error::UnknownNode(id))
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn gateways(&self) -> &BTreeSet<NodeId> {
        &self.gateways
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cloud(&self) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.is_cloud).map(|n| n.id)
    }

    pub fn fog_nodes(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(|n| !n.is_cloud)
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adjacency[id].len()
    }

    /// `(neighbour, link)` pairs sorted by neighbour id.
    pub fn neighbors(&self, id: NodeId) -> impl Iterator<Item = (NodeId, &Link)> + '_ {
        self.adjacency[id].iter().map(move |&(n, l)| (n, &self.links[l]))
    }

    /// Unweighted hop counts from the nearest of `sources`.
    fn hops_from(&self, sources: &[NodeId]) -> Vec<Option<u32>> {
        let mut hops = vec![None; self.nodes.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            hops[s] = Some(0);
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            let next = hops[u].unwrap() + 1;
            for &(v, _) in &self.adjacency[u] {
                if hops[v].is_none() {
                    hops[v] = Some(next);
                    queue.push_back(v);
                }
            }
        }
        hops
    }

    /// Single-source shortest paths under `metric`.
    pub fn shortest_paths(&self, source: NodeId, metric: DistanceMetric) -> Result<ShortestPaths> {
        if source >= self.nodes.len() {
            return Err(Error::UnknownNode(source));
        }
        Ok(dijkstra(self, source, metric))
    }

    /// Serializes to the TOML node/link table format.
    pub fn to_toml(&self) -> Result<String> {
        let record = TopologyRecord {
            gateways: self.gateways.iter().copied().collect(),
            nodes: self.nodes.clone(),
            links: self.links.clone(),
        };
        toml::to_string(&record).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let record: TopologyRecord = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let tiers: Vec<u32> = record.nodes.iter().map(|n| n.tier).collect();
        let topo = Self::assemble(
            record.nodes,
            record.links,
            TopologyParams::default().gateway_floor,
        )?
        .with_gateways(record.gateways)?;
        if topo.nodes.iter().map(|n| n.tier).ne(tiers) {
            return Err(Error::Parse("stored tiers disagree with gateway set".into()));
        }
        Ok(topo)
    }
}

#[derive(Serialize, Deserialize)]
struct TopologyRecord {
    gateways: Vec<NodeId>,
    nodes: Vec<Node>,
    links: Vec<Link>,
}

/// Generates a preferential-attachment fog graph of `node_count` nodes plus
/// one cloud node attached to the highest-degree fog node.
///
/// Random draws happen in a fixed order: graph structure, then node
/// attributes by id, then link delays in link order.
pub fn generate_topology(node_count: usize, seed: u64, params: &TopologyParams) -> Result<Topology> {
    let m = params.attachment.max(1);
    if node_count < 3 || node_count <= m {
        return Err(Error::InvalidConfig(format!(
            "node_count must be at least 3 and exceed the attachment count {m}, got {node_count}"
        )));
    }
    validate_range("node_ram", params.node_ram.0 as f64, params.node_ram.1 as f64)?;
    validate_range("node_ipt", params.node_ipt.0 as f64, params.node_ipt.1 as f64)?;
    validate_range("link_delay", params.link_delay.0, params.link_delay.1)?;

    let mut rng = seed::rng(seed);

    // seed clique of m + 1 nodes
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for a in 0..=m {
        for b in a + 1..=m {
            edges.push((a, b));
        }
    }
    let mut endpoints: Vec<NodeId> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    for v in m + 1..node_count {
        let mut targets: Vec<NodeId> = Vec::with_capacity(m);
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            edges.push((t, v));
            endpoints.push(t);
            endpoints.push(v);
        }
    }

    let mut nodes: Vec<Node> = (0..node_count)
        .map(|id| {
            let ram = rng.random_range(params.node_ram.0..=params.node_ram.1);
            let ipt = rng.random_range(params.node_ipt.0..=params.node_ipt.1);
            Node {
                id,
                ram_capacity: Capacity::Finite(ram),
                free_ram: Capacity::Finite(ram),
                ipt,
                tier: 0,
                is_cloud: false,
            }
        })
        .collect();
    let mut links: Vec<Link> = edges
        .iter()
        .map(|&(a, b)| Link {
            endpoint_a: a,
            endpoint_b: b,
            bandwidth: params.link_bandwidth,
            propagation_delay: rng.random_range(params.link_delay.0..=params.link_delay.1),
        })
        .collect();

    let mut degree = vec![0usize; node_count];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let hub = (0..node_count)
        .max_by(|&x, &y| degree[x].cmp(&degree[y]).then(y.cmp(&x)))
        .expect("node_count >= 3");

    let cloud = node_count;
    nodes.push(Node {
        id: cloud,
        ram_capacity: Capacity::Unbounded,
        free_ram: Capacity::Unbounded,
        ipt: params.cloud_ipt,
        tier: 0,
        is_cloud: true,
    });
    links.push(Link {
        endpoint_a: hub,
        endpoint_b: cloud,
        bandwidth: params.cloud_bandwidth,
        propagation_delay: params.cloud_delay,
    });

    Topology::with_floor(nodes, links, params.gateway_floor)
}

fn validate_range(name: &str, lo: f64, hi: f64) -> Result<()> {
    if !(lo <= hi) {
        return Err(Error::InvalidConfig(format!("{name}: empty range [{lo}, {hi}]")));
    }
    Ok(())
}

/// Non-cloud nodes of minimum degree, extended class by class until at
/// least the topology's gateway floor (a share of fog nodes, rounded up) is met.
pub fn identify_gateways(topology: &Topology) -> BTreeSet<NodeId> {
    let fog: Vec<&Node> = topology.fog_nodes().collect();
    let floor = (topology.gateway_floor * fog.len() as f64).ceil() as usize;
    let degrees: BTreeSet<usize> = fog.iter().map(|n| topology.degree(n.id)).collect();

    let mut gateways = BTreeSet::new();
    for class in degrees {
        gateways.extend(
            fog.iter()
                .filter(|n| topology.degree(n.id) == class)
                .map(|n| n.id),
        );
        if gateways.len() >= floor.max(1) {
            break;
        }
    }
    gateways
}

/// Tier per node: the largest hop distance to the nearest gateway, minus
/// this node's hop distance to its nearest gateway.
pub fn compute_tiers(topology: &Topology) -> Vec<u32> {
    let sources: Vec<NodeId> = topology.gateways.iter().copied().collect();
    let hops: Vec<u32> = topology
        .hops_from(&sources)
        .into_iter()
        .map(|h| h.expect("topology is connected"))
        .collect();
    let max = hops.iter().copied().max().unwrap_or(0);
    hops.into_iter().map(|h| max - h).collect()
}

/// Mean latency of the links incident to `node`.
pub fn avg_link_latency(topology: &Topology, node: NodeId) -> Result<f64> {
    topology.node(node)?;
    let links = &topology.adjacency[node];
    if links.is_empty() {
        return Err(Error::UndefinedMetric(node));
    }
    let mut sum = 0.0;
    for &(_, l) in links {
        sum += link_latency(&topology.links[l])?;
    }
    Ok(sum / links.len() as f64)
}

pub fn distance(topology: &Topology, source: NodeId, target: NodeId, metric: DistanceMetric) -> Result<f64> {
    topology.node(target)?;
    topology.shortest_paths(source, metric)?.distance_to(target)
}

pub fn avg_distance_to_gateways(topology: &Topology, node: NodeId, metric: DistanceMetric) -> Result<f64> {
    let paths = topology.shortest_paths(node, metric)?;
    let gateways = topology.gateways();
    if gateways.is_empty() {
        return Err(Error::InvalidTopology("gateway set is empty".into()));
    }
    let mut sum = 0.0;
    for &g in gateways {
        sum += paths.distance_to(g)?;
    }
    Ok(sum / gateways.len() as f64)
}

/// Result of a single-source shortest path search.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    source: NodeId,
    dist: Vec<f64>,
    /// Link used to reach each node on its shortest path.
    via: Vec<Option<usize>>,
}

impl ShortestPaths {
    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn distance_to(&self, target: NodeId) -> Result<f64> {
        match self.dist.get(target) {
            None => Err(Error::UnknownNode(target)),
            Some(d) if d.is_finite() => Ok(*d),
            Some(_) => Err(Error::Unreachable {
                from: self.source,
                target,
            }),
        }
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    /// Link indices from the source to `target`, in travel order.
    pub fn links_to(&self, topology: &Topology, target: NodeId) -> Result<Vec<usize>> {
        self.distance_to(target)?;
        let mut path = Vec::new();
        let mut at = target;
        while let Some(l) = self.via[at] {
            path.push(l);
            at = topology.links[l].other(at);
        }
        path.reverse();
        Ok(path)
    }
}

#[derive(PartialEq)]
struct Frontier(f64, NodeId);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (distance, id)
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(topology: &Topology, source: NodeId, metric: DistanceMetric) -> ShortestPaths {
    let n = topology.nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut via = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Frontier(0.0, source));
    while let Some(Frontier(d, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, l) in &topology.adjacency[u] {
            let candidate = d + metric.weight(&topology.links[l]);
            if candidate < dist[v] {
                dist[v] = candidate;
                via[v] = Some(l);
                heap.push(Frontier(candidate, v));
            }
        }
    }
    ShortestPaths { source, dist, via }
}

/// All-pairs distances under one metric, row per source.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    rows: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn new(topology: &Topology, metric: DistanceMetric) -> Self {
        let rows = (0..topology.len())
            .map(|s| dijkstra(topology, s, metric).dist)
            .collect();
        DistanceMatrix { rows }
    }

    pub fn get(&self, source: NodeId, target: NodeId) -> f64 {
        self.rows[source][target]
    }

    /// Mean distance from `node` to each gateway.
    pub fn avg_to(&self, node: NodeId, targets: &BTreeSet<NodeId>) -> f64 {
        targets.iter().map(|&t| self.rows[node][t]).sum::<f64>() / targets.len() as f64
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn fog(id: NodeId, ram: u32, ipt: u32) -> Node {
        Node {
            id,
            ram_capacity: Capacity::Finite(ram),
            free_ram: Capacity::Finite(ram),
            ipt,
            tier: 0,
            is_cloud: false,
        }
    }

    pub fn cloud(id: NodeId) -> Node {
        Node {
            id,
            ram_capacity: Capacity::Unbounded,
            free_ram: Capacity::Unbounded,
            ipt: 10_000,
            tier: 0,
            is_cloud: true,
        }
    }

    pub fn link(a: NodeId, b: NodeId, pd: f64) -> Link {
        Link {
            endpoint_a: a,
            endpoint_b: b,
            bandwidth: 75_000.0,
            propagation_delay: pd,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn generates_requested_size_with_one_cloud() {
        let topo = generate_topology(100, 42, &TopologyParams::default()).unwrap();
        assert_eq!(topo.len(), 101);
        assert_eq!(topo.nodes().iter().filter(|n| n.is_cloud).count(), 1);
        assert_eq!(topo.cloud(), Some(100));
        assert!(!topo.gateways().contains(&100));
    }

    #[test]
    fn smallest_topology_respects_ranges() {
        let topo = generate_topology(3, 0, &TopologyParams::default()).unwrap();
        assert_eq!(topo.len(), 4);
        for n in topo.fog_nodes() {
            let ram = n.ram_capacity.finite().unwrap();
            assert!((10..=25).contains(&ram));
            assert!((500..=1000).contains(&n.ipt));
        }
    }

    #[test]
    fn rejects_too_few_nodes() {
        assert!(matches!(
            generate_topology(2, 0, &TopologyParams::default()),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_topology(100, 42, &TopologyParams::default()).unwrap();
        let b = generate_topology(100, 42, &TopologyParams::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_toml().unwrap(), b.to_toml().unwrap());
        let c = generate_topology(100, 43, &TopologyParams::default()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn cloud_hangs_off_highest_degree_node() {
        let topo = generate_topology(50, 9, &TopologyParams::default()).unwrap();
        let cloud = topo.cloud().unwrap();
        assert_eq!(topo.degree(cloud), 1);
        let (hub, link) = topo.neighbors(cloud).next().unwrap();
        assert_eq!(link.propagation_delay, 500.0);
        assert_eq!(link.bandwidth, 125_000.0);
        let fog_degree = |n: NodeId| topo.degree(n) - usize::from(n == hub);
        for n in topo.fog_nodes() {
            assert!(
                fog_degree(n.id) < fog_degree(hub) || (fog_degree(n.id) == fog_degree(hub) && n.id >= hub)
            );
        }
    }

    #[test]
    fn star_leaves_are_gateways() {
        let nodes = (0..5).map(|i| fog(i, 10, 500)).collect();
        let links = (1..5).map(|i| link(0, i, 2.0)).collect();
        let topo = Topology::new(nodes, links).unwrap();
        assert_eq!(
            topo.gateways().iter().copied().collect::<Vec<_>>(),
            vec![1, 2, 3, 4]
        );
    }

    #[test]
    fn path_endpoints_are_gateways() {
        let nodes = (0..3).map(|i| fog(i, 10, 500)).collect();
        let topo = Topology::new(nodes, vec![link(0, 1, 2.0), link(1, 2, 3.0)]).unwrap();
        assert_eq!(topo.gateways().iter().copied().collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn gateway_floor_pulls_in_next_degree_class() {
        // 0 is the only degree-1 node out of 21 fog nodes; the floor is 2.
        let nodes: Vec<Node> = (0..21).map(|i| fog(i, 10, 500)).collect();
        let mut links = vec![link(0, 1, 2.0)];
        for i in 1..21 {
            links.push(link(i, if i == 20 { 1 } else { i + 1 }, 2.0));
        }
        let topo = Topology::new(nodes, links).unwrap();
        assert_eq!(topo.degree(0), 1);
        // 1 has degree 3, all others degree 2
        let expected: BTreeSet<NodeId> = (0..21).filter(|&i| i != 1).collect();
        assert_eq!(topo.gateways(), &expected);
    }

    #[test]
    fn tiers_on_path() {
        let nodes = (0..3).map(|i| fog(i, 10, 500)).collect();
        let topo = Topology::new(nodes, vec![link(0, 1, 2.0), link(1, 2, 3.0)])
            .unwrap()
            .with_gateways([0])
            .unwrap();
        let tiers: Vec<u32> = topo.nodes().iter().map(|n| n.tier).collect();
        assert_eq!(tiers, vec![2, 1, 0]);
    }

    #[test]
    fn link_latency_values() {
        let l = link(0, 1, 2.0);
        assert!(approx(link_latency(&l).unwrap(), 2.0 + 1.0 / 75_000.0));
        let cloud = Link {
            endpoint_a: 0,
            endpoint_b: 1,
            bandwidth: 125_000.0,
            propagation_delay: 500.0,
        };
        assert!(approx(link_latency(&cloud).unwrap(), 500.000008));
        let unit = Link {
            endpoint_a: 0,
            endpoint_b: 1,
            bandwidth: 1.0,
            propagation_delay: 0.0,
        };
        assert_eq!(link_latency(&unit).unwrap(), 1.0);
    }

    #[test]
    fn link_latency_rejects_non_positive_bandwidth() {
        let mut l = link(0, 1, 2.0);
        l.bandwidth = 0.0;
        assert!(matches!(link_latency(&l), Err(Error::InvalidLink { .. })));
        l.bandwidth = -3.0;
        assert!(link_latency(&l).is_err());
    }

    #[test]
    fn avg_link_latency_means() {
        let nodes = (0..3).map(|i| fog(i, 10, 500)).collect();
        let topo = Topology::new(nodes, vec![link(0, 1, 2.0), link(1, 2, 10.0)]).unwrap();
        let inv = 1.0 / 75_000.0;
        assert!(approx(avg_link_latency(&topo, 0).unwrap(), 2.0 + inv));
        assert!(approx(avg_link_latency(&topo, 1).unwrap(), 6.0 + inv));
        let single = Topology::new(vec![fog(0, 10, 500), fog(1, 10, 500)], vec![link(0, 1, 4.0)]).unwrap();
        assert!(approx(avg_link_latency(&single, 0).unwrap(), 4.0 + inv));
    }

    #[test]
    fn isolated_node_is_rejected() {
        let err = Topology::new(
            vec![fog(0, 10, 500), fog(1, 10, 500), fog(2, 10, 500)],
            vec![link(0, 1, 2.0)],
        );
        assert!(matches!(err, Err(Error::InvalidTopology(_))));
    }

    #[test]
    fn distances_on_path() {
        let nodes = (0..3).map(|i| fog(i, 10, 500)).collect();
        let topo = Topology::new(nodes, vec![link(0, 1, 2.0), link(1, 2, 3.0)]).unwrap();
        assert_eq!(distance(&topo, 1, 1, DistanceMetric::Pd).unwrap(), 0.0);
        assert_eq!(distance(&topo, 0, 2, DistanceMetric::Pd).unwrap(), 5.0);
        assert!(approx(
            distance(&topo, 0, 2, DistanceMetric::PdPlusInvBw).unwrap(),
            5.0 + 2.0 / 75_000.0
        ));
        assert_eq!(
            avg_distance_to_gateways(&topo, 1, DistanceMetric::Pd).unwrap(),
            2.5
        );
        let paths = topo.shortest_paths(0, DistanceMetric::Pd).unwrap();
        assert_eq!(paths.links_to(&topo, 2).unwrap(), vec![0, 1]);
        assert!(paths.links_to(&topo, 0).unwrap().is_empty());
    }

    #[test]
    fn single_gateway_is_at_distance_zero() {
        let nodes = (0..3).map(|i| fog(i, 10, 500)).collect();
        let topo = Topology::new(nodes, vec![link(0, 1, 2.0), link(1, 2, 3.0)])
            .unwrap()
            .with_gateways([2])
            .unwrap();
        assert_eq!(
            avg_distance_to_gateways(&topo, 2, DistanceMetric::Pd).unwrap(),
            0.0
        );
    }

    #[test]
    fn rejects_malformed_links() {
        let two = || vec![fog(0, 10, 500), fog(1, 10, 500)];
        assert!(Topology::new(two(), vec![link(0, 0, 1.0), link(0, 1, 1.0)]).is_err());
        assert!(Topology::new(two(), vec![link(0, 1, 1.0), link(1, 0, 1.0)]).is_err());
        assert!(matches!(
            Topology::new(two(), vec![link(0, 5, 1.0)]),
            Err(Error::UnknownNode(5))
        ));
    }

    #[test]
    fn cloud_cannot_be_gateway() {
        let topo = Topology::new(vec![fog(0, 10, 500), cloud(1)], vec![link(0, 1, 500.0)]).unwrap();
        assert_eq!(topo.gateways().iter().copied().collect::<Vec<_>>(), vec![0]);
        assert!(topo.clone().with_gateways([1]).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let topo = generate_topology(20, 5, &TopologyParams::default()).unwrap();
        let text = topo.to_toml().unwrap();
        assert!(text.contains("ram_capacity = \"inf\""));
        let back = Topology::from_toml(&text).unwrap();
        assert_eq!(back, topo);
    }

    #[test]
    fn capacity_ordering_and_arithmetic() {
        assert!(Capacity::Finite(u32::MAX) < Capacity::Unbounded);
        assert_eq!(Capacity::Finite(5).take(3), Some(Capacity::Finite(2)));
        assert_eq!(Capacity::Finite(2).take(3), None);
        assert_eq!(Capacity::Unbounded.take(1_000_000), Some(Capacity::Unbounded));
        assert!(Capacity::Finite(3).fits(3));
        assert!(!Capacity::Finite(2).fits(3));
    }
}
