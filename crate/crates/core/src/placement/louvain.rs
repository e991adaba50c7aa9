//! Louvain modularity maximisation over the fog subgraph.
//!
//! Edges are weighted by the mean IPT of their endpoints. The local-move
//! phase visits nodes in ascending index and only accepts strictly
//! improving moves; levels are aggregated until modularity stops rising
//! by at least [`MIN_GAIN`].

use std::collections::BTreeMap;

use crate::topology::{NodeId, Topology};

pub const MIN_GAIN: f64 = 1e-7;

/// Moves gaining less than this are treated as ties and rejected.
const MOVE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Community {
    /// Descending IPT, ties by ascending id.
    pub members: Vec<NodeId>,
    pub average_ipt: f64,
}

/// Undirected weighted edge list over nodes `0..n`.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }
}

/// Modularity of `membership` (a community label per node).
pub fn modularity(graph: &WeightedGraph, membership: &[usize]) -> f64 {
    let m = graph.total_weight();
    if m <= 0.0 {
        return 0.0;
    }
    let labels = membership.iter().copied().max().map_or(0, |l| l + 1);
    let mut internal = vec![0.0; labels];
    let mut total = vec![0.0; labels];
    for &(u, v, w) in &graph.edges {
        total[membership[u]] += w;
        total[membership[v]] += w;
        if membership[u] == membership[v] {
            internal[membership[u]] += 2.0 * w;
        }
    }
    let two_m = 2.0 * m;
    internal
        .iter()
        .zip(&total)
        .map(|(i, t)| i / two_m - (t / two_m).powi(2))
        .sum()
}

/// One aggregation level: adjacency without self loops plus a separate
/// self-loop weight per node.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
}

impl Level {
    fn from_graph(graph: &WeightedGraph) -> Self {
        let mut merged: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); graph.n];
        let mut self_loop = vec![0.0; graph.n];
        for &(u, v, w) in &graph.edges {
            if u == v {
                self_loop[u] += w;
            } else {
                *merged[u].entry(v).or_default() += w;
                *merged[v].entry(u).or_default() += w;
            }
        }
        Level {
            adj: merged.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_loop,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn degree(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|e| e.1).sum::<f64>() + 2.0 * self.self_loop[i]
    }

    /// Local-move phase. Returns labels renumbered by first appearance and
    /// whether any node changed community.
    fn local_moves(&self, two_m: f64) -> (Vec<usize>, bool) {
        let n = self.len();
        let degree: Vec<f64> = (0..n).map(|i| self.degree(i)).collect();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = degree.clone();
        let mut moved_any = false;

        loop {
            let mut moved = false;
            for i in 0..n {
                let current = comm[i];
                let mut links: BTreeMap<usize, f64> = BTreeMap::new();
                for &(j, w) in &self.adj[i] {
                    *links.entry(comm[j]).or_default() += w;
                }
                tot[current] -= degree[i];
                let gain = |c: usize, w: f64| w - tot[c] * degree[i] / two_m;
                let mut best = current;
                let mut best_gain = gain(current, links.get(&current).copied().unwrap_or(0.0));
                for (&c, &w) in &links {
                    let g = gain(c, w);
                    if g > best_gain + MOVE_EPS {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += degree[i];
                if best != current {
                    comm[i] = best;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
            moved_any = true;
        }
        (renumber(&comm), moved_any)
    }

    fn aggregate(&self, labels: &[usize]) -> Level {
        let k = labels.iter().copied().max().map_or(0, |l| l + 1);
        let mut merged: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
        let mut self_loop = vec![0.0; k];
        for i in 0..self.len() {
            self_loop[labels[i]] += self.self_loop[i];
            for &(j, w) in &self.adj[i] {
                let (a, b) = (labels[i], labels[j]);
                if a == b {
                    // each internal edge is seen from both ends
                    self_loop[a] += w / 2.0;
                } else {
                    *merged[a].entry(b).or_default() += w;
                }
            }
        }
        Level {
            adj: merged.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_loop,
        }
    }
}

fn renumber(labels: &[usize]) -> Vec<usize> {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    let mut next = 0;
    labels
        .iter()
        .map(|&l| {
            *map.entry(l).or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

/// Community label per node of `graph`, numbered by first appearance.
pub fn louvain(graph: &WeightedGraph) -> Vec<usize> {
    let mut membership: Vec<usize> = (0..graph.n).collect();
    let m = graph.total_weight();
    if graph.n < 2 || m <= 0.0 {
        return membership;
    }
    let two_m = 2.0 * m;
    let mut level = Level::from_graph(graph);
    let mut q = modularity(graph, &membership);
    loop {
        let (labels, moved) = level.local_moves(two_m);
        if !moved {
            break;
        }
        let next: Vec<usize> = membership.iter().map(|&c| labels[c]).collect();
        let next_q = modularity(graph, &next);
        if next_q < q {
            break;
        }
        membership = next;
        let gained = next_q - q;
        q = next_q;
        if gained < MIN_GAIN {
            break;
        }
        level = level.aggregate(&labels);
    }
    renumber(&membership)
}

/// Edge weights between fog nodes: mean endpoint IPT.
pub fn ipt_graph(topology: &Topology) -> (WeightedGraph, Vec<NodeId>) {
    let fog: Vec<NodeId> = topology.fog_nodes().map(|n| n.id).collect();
    let index: BTreeMap<NodeId, usize> = fog.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let nodes = topology.nodes();
    let edges = topology
        .links()
        .iter()
        .filter_map(|l| {
            let a = *index.get(&l.endpoint_a)?;
            let b = *index.get(&l.endpoint_b)?;
            let w = (nodes[l.endpoint_a].ipt as f64 + nodes[l.endpoint_b].ipt as f64) / 2.0;
            Some((a, b, w))
        })
        .collect();
    (WeightedGraph { n: fog.len(), edges }, fog)
}

/// Louvain communities of the fog subgraph, by descending average IPT
/// (ties by smallest member id).
pub fn louvain_communities(topology: &Topology) -> Vec<Community> {
    let (graph, fog) = ipt_graph(topology);
    let labels = if fog.len() < 2 {
        vec![0; fog.len()]
    } else {
        louvain(&graph)
    };
    let k = labels.iter().copied().max().map_or(0, |l| l + 1);
    let mut groups: Vec<Vec<NodeId>> = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        groups[l].push(fog[i]);
    }
    let nodes = topology.nodes();
    let mut communities: Vec<Community> = groups
        .into_iter()
        .map(|mut members| {
            members.sort_by(|&a, &b| nodes[b].ipt.cmp(&nodes[a].ipt).then(a.cmp(&b)));
            let average_ipt =
                members.iter().map(|&n| nodes[n].ipt as f64).sum::<f64>() / members.len() as f64;
            Community { members, average_ipt }
        })
        .collect();
    communities.sort_by(|a, b| {
        b.average_ipt
            .total_cmp(&a.average_ipt)
            .then_with(|| a.members.iter().min().cmp(&b.members.iter().min()))
    });
    communities
}
