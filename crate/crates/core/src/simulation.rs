//! Deterministic discrete-event replay of user traffic through a placement.
//!
//! Each user emits requests for its app. A request walks the app's chain:
//! the user message travels from the user's gateway to the host of the
//! zero-order service, and every later message travels between consecutive
//! hosts along the shortest path by link latency. A hop costs its
//! propagation delay plus `size / bandwidth`; links never contend. Nodes are
//! single-server FIFO queues with service time `instructions / ipt`.
//!
//! Events are ordered by `(timestamp, sequence)`, where `sequence` counts
//! scheduling calls, so identical inputs replay identically.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::placement::PlacementPlan;
use crate::seed;
use crate::topology::{DistanceMetric, NodeId, ShortestPaths, Topology};
use crate::workload::{App, AppId, UserSource};

pub type RequestId = u64;

/// How users space their requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arrivals {
    /// Every `request_period` ms after a seeded phase in `[0, period)`.
    Periodic,
    /// Exponential gaps with mean `request_period`.
    Poisson,
}

/// What a FIFO server is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Servers {
    /// One per node, shared by every service it hosts.
    #[default]
    PerNode,
    /// One per placed service instance.
    PerService,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Requests are emitted while the clock is below this, in ms. Requests
    /// already in flight still run to completion.
    pub duration: f64,
    /// Requests emitted before this are not sampled.
    pub warmup: f64,
    pub seed: u64,
    pub arrivals: Arrivals,
    pub servers: Servers,
    /// Add a reply from the last service back to the user's gateway.
    pub include_response: bool,
    /// Keep a per-event trace.
    pub trace: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            duration: 20_000.0,
            warmup: 1_000.0,
            seed: 0,
            arrivals: Arrivals::Periodic,
            servers: Servers::PerNode,
            include_response: false,
            trace: false,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.warmup >= 0.0 && self.warmup < self.duration) {
            return Err(Error::InvalidConfig(format!(
                "need 0 <= warmup < duration, got warmup {} and duration {}",
                self.warmup, self.duration
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencySample {
    pub app_id: AppId,
    pub request_id: RequestId,
    pub emitted_at: f64,
    /// End-to-end latency in ms.
    pub latency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    RequestEmitted,
    MessageDelivered,
    ServiceCompleted,
    ResponseDelivered,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::RequestEmitted => "request_emitted",
            EventKind::MessageDelivered => "message_delivered",
            EventKind::ServiceCompleted => "service_completed",
            EventKind::ResponseDelivered => "response_delivered",
        }
    }
}

/// One processed event.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub timestamp: f64,
    pub kind: EventKind,
    pub request: RequestId,
    pub app: AppId,
    /// Chain position; `None` for emissions and responses.
    pub order: Option<usize>,
    pub node: NodeId,
}

impl fmt::Display for TraceRecord {
    /// `timestamp,kind,request,node`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.6},{},{},{}",
            self.timestamp,
            self.kind.name(),
            self.request,
            self.node
        )
    }
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Emit {
        user: usize,
    },
    Deliver {
        request: RequestId,
        order: usize,
        node: NodeId,
    },
    Complete {
        request: RequestId,
        order: usize,
        node: NodeId,
    },
    Respond {
        request: RequestId,
        node: NodeId,
    },
}

struct Scheduled {
    at: f64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; earliest (at, seq) must come out first
        other
            .at
            .total_cmp(&self.at)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Request {
    app: usize,
    gateway: NodeId,
    emitted_at: f64,
}

#[derive(Default)]
struct Server {
    busy: bool,
    queue: VecDeque<(RequestId, usize)>,
}

/// Event engine over one placement. Use [`run_simulation`] for periodic
/// user traffic, or [`Simulator::inject`] to drive it by hand.
pub struct Simulator<'a> {
    topology: &'a Topology,
    apps: &'a [App],
    /// `hosts[app][order]`
    hosts: Vec<Vec<NodeId>>,
    app_index: HashMap<AppId, usize>,
    routes: HashMap<NodeId, ShortestPaths>,
    path_cache: HashMap<(NodeId, NodeId), Vec<usize>>,
    servers: Vec<Server>,
    /// Server index of each app's services; `None` means the host node's.
    service_servers: Option<Vec<Vec<usize>>>,
    requests: Vec<Request>,
    queue: BinaryHeap<Scheduled>,
    seq: u64,
    now: f64,
    include_response: bool,
    warmup: f64,
    samples: Vec<LatencySample>,
    trace: Option<Vec<TraceRecord>>,
    emitters: Vec<Emitter>,
    /// Draws Poisson gaps in event order.
    rng: ChaCha8Rng,
}

struct Emitter {
    app: usize,
    gateway: NodeId,
    period: f64,
    arrivals: Arrivals,
    until: f64,
}

impl<'a> Simulator<'a> {
    /// Fails with [`Error::IncompletePlan`] if any service lacks a host.
    pub fn new(topology: &'a Topology, apps: &'a [App], plan: &PlacementPlan) -> Result<Self> {
        let mut hosts = Vec::with_capacity(apps.len());
        for app in apps {
            let mut chain = Vec::with_capacity(app.services.len());
            for s in &app.services {
                let node = plan.node_of(s.id()).ok_or(Error::IncompletePlan(s.id()))?;
                topology.node(node)?;
                chain.push(node);
            }
            if app.messages.len() != app.services.len() {
                return Err(Error::InvalidConfig(format!(
                    "app {} has {} services but {} messages",
                    app.id,
                    app.services.len(),
                    app.messages.len()
                )));
            }
            hosts.push(chain);
        }
        Ok(Simulator {
            topology,
            apps,
            hosts,
            app_index: apps.iter().enumerate().map(|(i, a)| (a.id, i)).collect(),
            routes: HashMap::new(),
            path_cache: HashMap::new(),
            servers: (0..topology.len()).map(|_| Server::default()).collect(),
            service_servers: None,
            requests: Vec::new(),
            queue: BinaryHeap::new(),
            seq: 0,
            now: 0.0,
            include_response: false,
            warmup: 0.0,
            samples: Vec::new(),
            trace: None,
            emitters: Vec::new(),
            rng: seed::rng(0),
        })
    }

    pub fn with_trace(mut self, on: bool) -> Self {
        self.trace = on.then(Vec::new);
        self
    }

    pub fn with_response(mut self, on: bool) -> Self {
        self.include_response = on;
        self
    }

    pub fn with_servers(mut self, servers: Servers) -> Self {
        match servers {
            Servers::PerNode => {
                self.service_servers = None;
                self.servers = (0..self.topology.len()).map(|_| Server::default()).collect();
            }
            Servers::PerService => {
                let mut next = 0;
                let ids = self
                    .hosts
                    .iter()
                    .map(|chain| {
                        chain
                            .iter()
                            .map(|_| {
                                next += 1;
                                next - 1
                            })
                            .collect()
                    })
                    .collect();
                self.service_servers = Some(ids);
                self.servers = (0..next).map(|_| Server::default()).collect();
            }
        }
        self
    }

    fn server(&self, request: RequestId, order: usize, node: NodeId) -> usize {
        match &self.service_servers {
            Some(ids) => ids[self.requests[request as usize].app][order],
            None => node,
        }
    }

    /// Requests emitted before `warmup` are not sampled.
    pub fn with_warmup(mut self, warmup: f64) -> Self {
        self.warmup = warmup;
        self
    }

    /// Schedules a single request of `app` from `gateway` at time `at`.
    pub fn inject(&mut self, app: AppId, gateway: NodeId, at: f64) -> Result<RequestId> {
        let idx = *self
            .app_index
            .get(&app)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown app {app}")))?;
        self.topology.node(gateway)?;
        Ok(self.emit(idx, gateway, at))
    }

    fn emit(&mut self, app: usize, gateway: NodeId, at: f64) -> RequestId {
        let request = self.requests.len() as RequestId;
        self.requests.push(Request {
            app,
            gateway,
            emitted_at: at,
        });
        let host = self.hosts[app][0];
        let size = self.apps[app].messages[0].size;
        self.record(at, EventKind::RequestEmitted, request, None, gateway);
        let arrival = at + self.network_delay(gateway, host, size);
        self.schedule(
            arrival,
            Event::Deliver {
                request,
                order: 0,
                node: host,
            },
        );
        request
    }

    fn schedule(&mut self, at: f64, event: Event) {
        self.queue.push(Scheduled {
            at,
            seq: self.seq,
            event,
        });
        self.seq += 1;
    }

    fn record(&mut self, at: f64, kind: EventKind, request: RequestId, order: Option<usize>, node: NodeId) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceRecord {
                timestamp: at,
                kind,
                request,
                app: self.apps[self.requests[request as usize].app].id,
                order,
                node,
            });
        }
    }

    /// Links on the latency-shortest path from `from` to `to`.
    fn path(&mut self, from: NodeId, to: NodeId) -> &[usize] {
        if !self.path_cache.contains_key(&(from, to)) {
            let topology = self.topology;
            let routes = self.routes.entry(from).or_insert_with(|| {
                topology
                    .shortest_paths(from, DistanceMetric::PdPlusInvBw)
                    .expect("node exists")
            });
            let links = routes.links_to(topology, to).expect("topology is connected");
            self.path_cache.insert((from, to), links);
        }
        &self.path_cache[&(from, to)]
    }

    /// Transfer time of `size` bytes from `from` to `to`.
    pub fn network_delay(&mut self, from: NodeId, to: NodeId, size: u64) -> f64 {
        if from == to {
            return 0.0;
        }
        let topology = self.topology;
        self.path(from, to)
            .iter()
            .map(|&l| {
                let link = &topology.links()[l];
                link.propagation_delay + size as f64 / link.bandwidth
            })
            .sum()
    }

    fn start(&mut self, request: RequestId, order: usize, node: NodeId) {
        let app = &self.apps[self.requests[request as usize].app];
        let work = app.messages[order].instructions as f64 / self.topology.nodes()[node].ipt as f64;
        let server = self.server(request, order, node);
        self.servers[server].busy = true;
        self.schedule(self.now + work, Event::Complete { request, order, node });
    }

    fn finish(&mut self, request: RequestId, at: f64) {
        let req = &self.requests[request as usize];
        if req.emitted_at >= self.warmup {
            self.samples.push(LatencySample {
                app_id: self.apps[req.app].id,
                request_id: request,
                emitted_at: req.emitted_at,
                latency: at - req.emitted_at,
            });
        }
    }

    fn handle(&mut self, event: Event) {
        match event {
            Event::Emit { user } => {
                let (app, gateway, period, arrivals, until) = {
                    let e = &self.emitters[user];
                    (e.app, e.gateway, e.period, e.arrivals, e.until)
                };
                self.emit(app, gateway, self.now);
                let gap = match arrivals {
                    Arrivals::Periodic => period,
                    Arrivals::Poisson => exponential(&mut self.rng, period),
                };
                let next = self.now + gap;
                if next < until {
                    self.schedule(next, Event::Emit { user });
                }
            }
            Event::Deliver { request, order, node } => {
                self.record(self.now, EventKind::MessageDelivered, request, Some(order), node);
                let server = self.server(request, order, node);
                if self.servers[server].busy {
                    self.servers[server].queue.push_back((request, order));
                } else {
                    self.start(request, order, node);
                }
            }
            Event::Complete { request, order, node } => {
                self.record(self.now, EventKind::ServiceCompleted, request, Some(order), node);
                let app = self.requests[request as usize].app;
                let next = order + 1;
                if next < self.hosts[app].len() {
                    let to = self.hosts[app][next];
                    let size = self.apps[app].messages[next].size;
                    let arrival = self.now + self.network_delay(node, to, size);
                    self.schedule(
                        arrival,
                        Event::Deliver {
                            request,
                            order: next,
                            node: to,
                        },
                    );
                } else if self.include_response {
                    let gateway = self.requests[request as usize].gateway;
                    let size = self.apps[app].messages[0].size;
                    let arrival = self.now + self.network_delay(node, gateway, size);
                    self.schedule(
                        arrival,
                        Event::Respond {
                            request,
                            node: gateway,
                        },
                    );
                } else {
                    self.finish(request, self.now);
                }
                let server = self.server(request, order, node);
                self.servers[server].busy = false;
                if let Some((r, o)) = self.servers[server].queue.pop_front() {
                    self.start(r, o, node);
                }
            }
            Event::Respond { request, node } => {
                self.record(self.now, EventKind::ResponseDelivered, request, None, node);
                self.finish(request, self.now);
            }
        }
    }

    /// Processes events until the queue drains.
    pub fn run(&mut self) {
        while let Some(Scheduled { at, event, .. }) = self.queue.pop() {
            debug_assert!(at >= self.now);
            self.now = at;
            self.handle(event);
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn samples(&self) -> &[LatencySample] {
        &self.samples
    }

    pub fn into_output(self) -> SimulationOutput {
        SimulationOutput {
            samples: self.samples,
            trace: self.trace.unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimulationOutput {
    pub samples: Vec<LatencySample>,
    /// Empty unless tracing was requested.
    pub trace: Vec<TraceRecord>,
}

fn exponential(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    -(1.0 - rng.random::<f64>()).ln() * mean
}

/// Replays every user's traffic through `plan` and returns the samples of
/// requests emitted at or after `config.warmup`.
pub fn run_simulation(
    topology: &Topology,
    apps: &[App],
    users: &[UserSource],
    plan: &PlacementPlan,
    config: &SimulationConfig,
) -> Result<Vec<LatencySample>> {
    Ok(simulate(topology, apps, users, plan, config)?.samples)
}

/// [`run_simulation`] keeping the trace when `config.trace` is set.
pub fn simulate(
    topology: &Topology,
    apps: &[App],
    users: &[UserSource],
    plan: &PlacementPlan,
    config: &SimulationConfig,
) -> Result<SimulationOutput> {
    config.validate()?;
    let mut sim = Simulator::new(topology, apps, plan)?
        .with_trace(config.trace)
        .with_response(config.include_response)
        .with_servers(config.servers)
        .with_warmup(config.warmup);

    let mut rng = seed::rng(config.seed);
    let mut first = Vec::with_capacity(users.len());
    for user in users {
        let app = *sim
            .app_index
            .get(&user.app_id)
            .ok_or_else(|| Error::InvalidConfig(format!("user for unknown app {}", user.app_id)))?;
        topology.node(user.gateway)?;
        if user.request_period == 0 {
            return Err(Error::InvalidConfig(format!(
                "user of app {} has zero period",
                user.app_id
            )));
        }
        let period = user.request_period as f64;
        let start = match config.arrivals {
            Arrivals::Periodic => rng.random_range(0.0..period),
            Arrivals::Poisson => exponential(&mut rng, period),
        };
        sim.emitters.push(Emitter {
            app,
            gateway: user.gateway,
            period,
            arrivals: config.arrivals,
            until: config.duration,
        });
        first.push(start);
    }
    sim.rng = rng;
    for (user, start) in first.into_iter().enumerate() {
        if start < config.duration {
            sim.schedule(start, Event::Emit { user });
        }
    }
    sim.run();
    Ok(sim.into_output())
}
