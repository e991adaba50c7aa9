//! Applications, their services and messages, and the users driving them.
//!
//! An application is a linear chain: the user request enters the
//! zero-order service, and each service forwards one message to the next.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::topology::{NodeId, Topology};

pub type AppId = usize;

/// A service is addressed by its app and its position in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ServiceId {
    pub app: AppId,
    pub order: usize,
}

impl ServiceId {
    pub fn new(app: AppId, order: usize) -> Self {
        ServiceId { app, order }
    }
}

impl fmt::Display for ServiceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}.s{}", self.app, self.order)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Service {
    pub app_id: AppId,
    pub order: usize,
    /// MB.
    pub ram_demand: u32,
}

impl Service {
    pub fn id(&self) -> ServiceId {
        ServiceId::new(self.app_id, self.order)
    }
}

/// Message into service `to_order`. `from_order == -1` is the user request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub app_id: AppId,
    pub from_order: i32,
    pub to_order: usize,
    /// Bytes.
    pub size: u64,
    /// Instructions executed by the receiving service.
    pub instructions: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct App {
    pub id: AppId,
    /// Milliseconds between two requests of this app's user.
    pub request_period: u32,
    pub services: Vec<Service>,
    /// `messages[k]` is delivered to `services[k]`.
    pub messages: Vec<Message>,
}

impl App {
    pub fn service(&self, order: usize) -> Option<&Service> {
        self.services.get(order)
    }

    pub fn message_into(&self, order: usize) -> Option<&Message> {
        self.messages.get(order)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserSource {
    pub app_id: AppId,
    pub gateway: NodeId,
    pub request_period: u32,
}

/// Inclusive ranges the workload generator draws from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadParams {
    pub services_per_app: (usize, usize),
    pub module_ram: (u32, u32),
    pub message_size: (u64, u64),
    pub module_instructions: (u64, u64),
    pub request_period: (u32, u32),
}

impl Default for WorkloadParams {
    fn default() -> Self {
        WorkloadParams {
            services_per_app: (2, 10),
            module_ram: (1, 6),
            message_size: (1_500_000, 4_500_000),
            module_instructions: (20_000, 60_000),
            request_period: (200, 1000),
        }
    }
}

impl WorkloadParams {
    fn validate(&self) -> Result<()> {
        let ranges = [
            (
                "services_per_app",
                self.services_per_app.0 as u64,
                self.services_per_app.1 as u64,
            ),
            ("module_ram", self.module_ram.0 as u64, self.module_ram.1 as u64),
            ("message_size", self.message_size.0, self.message_size.1),
            (
                "module_instructions",
                self.module_instructions.0,
                self.module_instructions.1,
            ),
            (
                "request_period",
                self.request_period.0 as u64,
                self.request_period.1 as u64,
            ),
        ];
        for (name, lo, hi) in ranges {
            if lo > hi {
                return Err(Error::InvalidConfig(format!("{name}: empty range [{lo}, {hi}]")));
            }
        }
        if self.services_per_app.0 == 0 {
            return Err(Error::InvalidConfig("services_per_app must be at least 1".into()));
        }
        if self.request_period.0 == 0 {
            return Err(Error::InvalidConfig("request_period must be positive".into()));
        }
        Ok(())
    }
}

/// Generates `app_count` linear-chain applications.
pub fn generate_apps(app_count: usize, seed: u64, params: &WorkloadParams) -> Result<Vec<App>> {
    if app_count < 1 {
        return Err(Error::InvalidConfig("app_count must be at least 1".into()));
    }
    params.validate()?;
    let mut rng = seed::rng(seed);
    let apps = (0..app_count)
        .map(|id| {
            let len = rng.random_range(params.services_per_app.0..=params.services_per_app.1);
            let request_period = rng.random_range(params.request_period.0..=params.request_period.1);
            let services = (0..len)
                .map(|order| Service {
                    app_id: id,
                    order,
                    ram_demand: rng.random_range(params.module_ram.0..=params.module_ram.1),
                })
                .collect();
            let messages = (0..len)
                .map(|to| Message {
                    app_id: id,
                    from_order: to as i32 - 1,
                    to_order: to,
                    size: rng.random_range(params.message_size.0..=params.message_size.1),
                    instructions: rng
                        .random_range(params.module_instructions.0..=params.module_instructions.1),
                })
                .collect();
            App {
                id,
                request_period,
                services,
                messages,
            }
        })
        .collect();
    Ok(apps)
}

/// Chain position → (app → services at that position).
pub type RoutingSequence = BTreeMap<usize, BTreeMap<AppId, Vec<ServiceId>>>;

pub fn message_routing_sequence(apps: &[App]) -> RoutingSequence {
    let mut seq = RoutingSequence::new();
    for app in apps {
        for s in &app.services {
            seq.entry(s.order)
                .or_default()
                .entry(app.id)
                .or_default()
                .push(s.id());
        }
    }
    seq
}

/// Mean instruction count over every message of `app`, user request included.
pub fn avg_message_instructions(app: &App) -> f64 {
    if app.messages.is_empty() {
        return 0.0;
    }
    app.messages.iter().map(|m| m.instructions as f64).sum::<f64>() / app.messages.len() as f64
}

/// Attaches one user per app to a uniformly drawn gateway. The user's
/// request period is the app's.
pub fn assign_users(topology: &Topology, apps: &[App], seed: u64) -> Result<Vec<UserSource>> {
    let gateways: Vec<NodeId> = topology.gateways().iter().copied().collect();
    if gateways.is_empty() {
        return Err(Error::InvalidTopology("gateway set is empty".into()));
    }
    let mut rng = seed::rng(seed);
    Ok(apps
        .iter()
        .map(|app| UserSource {
            app_id: app.id,
            gateway: gateways[rng.random_range(0..gateways.len())],
            request_period: app.request_period,
        })
        .collect())
}

#[derive(Serialize, Deserialize)]
struct WorkloadRecord {
    apps: Vec<App>,
    users: Vec<UserSource>,
}

/// Serializes apps and users to TOML.
pub fn to_toml(apps: &[App], users: &[UserSource]) -> Result<String> {
    let record = WorkloadRecord {
        apps: apps.to_vec(),
        users: users.to_vec(),
    };
    toml::to_string(&record).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_toml(text: &str) -> Result<(Vec<App>, Vec<UserSource>)> {
    let record: WorkloadRecord = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((record.apps, record.users))
}
