//! Strategy × mode × seed sweeps.
//!
//! Every run is derived from one master seed: the topology, workload, user
//! attachment and simulation phases each use their own [`seed::Stream`] of
//! it, so all strategies and modes of a seed see the same scenario.
//!
//! Config files are TOML. Scenario keys use the scenario table's parameter
//! names, grouped by element:
//!
//! ```toml
//! [Network]
//! NUMBER_OF_NODES = 100
//! NODE_RESOURCES = [10, 25]          # MB RAM
//! NODE_SPEED = [500, 1000]           # instructions/ms
//! LINK_BANDWIDTH = 75000             # bytes/ms
//! PROPAGATION_DELAY = [2, 10]        # ms
//!
//! [Cloud]
//! CLOUD_CAPACITY = "inf"
//! CLOUD_SPEED = 10000
//! CLOUD_BANDWIDTH = 125000
//! PROPAGATION_DELAY = 500
//!
//! [APPs]
//! NUMBER_OF_APPS = 20
//! NUMBER_OF_SERVICES_p_APP = [2, 10]
//!
//! [Modules]
//! MODULE_INSTRUCTIONS = [20000, 60000]
//! MODULE_RESOURCES = [1, 6]
//! MODULE_MESSAGE_SIZE = [1500000, 4500000]
//!
//! [User]
//! REQUEST_RATE = [200, 1000]         # ms between requests
//! ```
//!
//! All of the above are required. `[Simulation]` (`DURATION`, `WARMUP`,
//! `ARRIVALS`, `SERVERS`, `INCLUDE_RESPONSE`) and `[Sweep]` (`SEEDS`, `STRATEGIES`,
//! `MODES`, `DRAW_THRESHOLD`) are optional.

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::metrics::{
    aggregate, compare_modes, write_per_app_csv, write_runs_csv, write_summary_csv, write_verdicts_csv,
    ComparisonVerdict, RunResult, Summary,
};
use crate::placement::{OrderingMode, Strategy};
use crate::seed::{self, Stream};
use crate::simulation::{simulate, Arrivals, Servers, SimulationConfig, TraceRecord};
use crate::topology::{generate_topology, Topology, TopologyParams};
use crate::workload::{assign_users, generate_apps, App, UserSource, WorkloadParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub node_count: usize,
    pub topology: TopologyParams,
    pub app_count: usize,
    pub workload: WorkloadParams,
    /// `seed` is ignored; each run derives its own.
    pub simulation: SimulationConfig,
    pub seeds: Vec<u64>,
    pub strategies: Vec<Strategy>,
    pub modes: Vec<OrderingMode>,
    pub draw_threshold: f64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            node_count: 100,
            topology: TopologyParams::default(),
            app_count: 20,
            workload: WorkloadParams::default(),
            simulation: SimulationConfig::default(),
            seeds: (1..=50).collect(),
            strategies: Strategy::ALL.to_vec(),
            modes: OrderingMode::ALL.to_vec(),
            draw_threshold: 0.01,
            jobs: 0,
        }
    }
}

/// Collects every problem in a config file instead of stopping at the first.
struct Fields<'a> {
    root: &'a Table,
    problems: Vec<String>,
}

impl<'a> Fields<'a> {
    fn section(&mut self, name: &str, required: bool) -> Option<&'a Table> {
        match self.root.get(name) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.problems.push(format!("[{name}]: expected a table"));
                None
            }
            None => {
                if required {
                    self.problems.push(format!("[{name}]: missing section"));
                }
                None
            }
        }
    }

    fn value(&mut self, section: Option<&'a Table>, sec: &str, key: &str, role: &str) -> Option<&'a Value> {
        let v = section.and_then(|t| t.get(key));
        if v.is_none() && section.is_some() {
            self.problems.push(format!("[{sec}] {key} ({role}): missing"));
        }
        v
    }

    fn bad(&mut self, sec: &str, key: &str, role: &str, why: &str) {
        self.problems.push(format!("[{sec}] {key} ({role}): {why}"));
    }

    fn number(&mut self, section: Option<&'a Table>, sec: &str, key: &str, role: &str) -> Option<f64> {
        match self.value(section, sec, key, role)? {
            Value::Integer(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            _ => {
                self.bad(sec, key, role, "expected a number");
                None
            }
        }
    }

    fn count(&mut self, section: Option<&'a Table>, sec: &str, key: &str, role: &str) -> Option<u64> {
        match self.value(section, sec, key, role)? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            _ => {
                self.bad(sec, key, role, "expected a non-negative integer");
                None
            }
        }
    }

    fn range(&mut self, section: Option<&'a Table>, sec: &str, key: &str, role: &str) -> Option<(f64, f64)> {
        let v = self.value(section, sec, key, role)?;
        let pair = match v {
            Value::Array(items) if items.len() == 2 => {
                let num = |v: &Value| match v {
                    Value::Integer(i) => Some(*i as f64),
                    Value::Float(f) => Some(*f),
                    _ => None,
                };
                num(&items[0]).zip(num(&items[1]))
            }
            Value::Integer(i) => Some((*i as f64, *i as f64)),
            Value::Float(f) => Some((*f, *f)),
            _ => None,
        };
        match pair {
            Some((lo, hi)) if lo <= hi && lo >= 0.0 => Some((lo, hi)),
            Some(_) => {
                self.bad(sec, key, role, "range must be non-negative with min <= max");
                None
            }
            None => {
                self.bad(sec, key, role, "expected [min, max] or a single number");
                None
            }
        }
    }

    fn int_range(
        &mut self,
        section: Option<&'a Table>,
        sec: &str,
        key: &str,
        role: &str,
    ) -> Option<(u64, u64)> {
        let (lo, hi) = self.range(section, sec, key, role)?;
        if lo.fract() != 0.0 || hi.fract() != 0.0 {
            self.bad(sec, key, role, "expected integers");
            return None;
        }
        Some((lo as u64, hi as u64))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let mut f = Fields {
            root: &root,
            problems: Vec::new(),
        };
        let mut cfg = ExperimentConfig::default();

        let net = f.section("Network", true);
        if let Some(n) = f.count(net, "Network", "NUMBER_OF_NODES", "node_count") {
            if n < 3 {
                f.bad("Network", "NUMBER_OF_NODES", "node_count", "must be at least 3");
            }
            cfg.node_count = n as usize;
        }
        if let Some((lo, hi)) = f.int_range(net, "Network", "NODE_RESOURCES", "node_ram") {
            cfg.topology.node_ram = (lo as u32, hi as u32);
        }
        if let Some((lo, hi)) = f.int_range(net, "Network", "NODE_SPEED", "node_ipt") {
            if lo == 0 {
                f.bad("Network", "NODE_SPEED", "node_ipt", "must be positive");
            }
            cfg.topology.node_ipt = (lo as u32, hi as u32);
        }
        if let Some(bw) = f.number(net, "Network", "LINK_BANDWIDTH", "link_bandwidth") {
            if bw <= 0.0 {
                f.bad("Network", "LINK_BANDWIDTH", "link_bandwidth", "must be positive");
            }
            cfg.topology.link_bandwidth = bw;
        }
        if let Some(r) = f.range(net, "Network", "PROPAGATION_DELAY", "link_delay") {
            cfg.topology.link_delay = r;
        }

        let cloud = f.section("Cloud", true);
        match f.value(cloud, "Cloud", "CLOUD_CAPACITY", "cloud_capacity") {
            Some(Value::String(s)) if s == "inf" || s == "∞" => {}
            Some(_) => f.bad(
                "Cloud",
                "CLOUD_CAPACITY",
                "cloud_capacity",
                "only \"inf\" is supported",
            ),
            None => {}
        }
        if let Some(v) = f.count(cloud, "Cloud", "CLOUD_SPEED", "cloud_ipt") {
            if v == 0 {
                f.bad("Cloud", "CLOUD_SPEED", "cloud_ipt", "must be positive");
            }
            cfg.topology.cloud_ipt = v as u32;
        }
        if let Some(bw) = f.number(cloud, "Cloud", "CLOUD_BANDWIDTH", "cloud_bandwidth") {
            if bw <= 0.0 {
                f.bad("Cloud", "CLOUD_BANDWIDTH", "cloud_bandwidth", "must be positive");
            }
            cfg.topology.cloud_bandwidth = bw;
        }
        if let Some(pd) = f.number(cloud, "Cloud", "PROPAGATION_DELAY", "cloud_delay") {
            cfg.topology.cloud_delay = pd;
        }

        let apps = f.section("APPs", true);
        if let Some(n) = f.count(apps, "APPs", "NUMBER_OF_APPS", "app_count") {
            if n == 0 {
                f.bad("APPs", "NUMBER_OF_APPS", "app_count", "must be at least 1");
            }
            cfg.app_count = n as usize;
        }
        if let Some((lo, hi)) = f.int_range(apps, "APPs", "NUMBER_OF_SERVICES_p_APP", "services_per_app") {
            if lo == 0 {
                f.bad(
                    "APPs",
                    "NUMBER_OF_SERVICES_p_APP",
                    "services_per_app",
                    "must be at least 1",
                );
            }
            cfg.workload.services_per_app = (lo as usize, hi as usize);
        }

        let modules = f.section("Modules", true);
        if let Some(r) = f.int_range(modules, "Modules", "MODULE_INSTRUCTIONS", "module_instructions") {
            cfg.workload.module_instructions = r;
        }
        if let Some((lo, hi)) = f.int_range(modules, "Modules", "MODULE_RESOURCES", "module_ram") {
            cfg.workload.module_ram = (lo as u32, hi as u32);
        }
        if let Some(r) = f.int_range(modules, "Modules", "MODULE_MESSAGE_SIZE", "message_size") {
            cfg.workload.message_size = r;
        }

        let user = f.section("User", true);
        if let Some((lo, hi)) = f.int_range(user, "User", "REQUEST_RATE", "request_period") {
            if lo == 0 {
                f.bad("User", "REQUEST_RATE", "request_period", "must be positive");
            }
            cfg.workload.request_period = (lo as u32, hi as u32);
        }

        if let Some(sim) = f.section("Simulation", false) {
            let get = |k: &str| sim.get(k);
            if get("DURATION").is_some() {
                cfg.simulation.duration = f
                    .number(Some(sim), "Simulation", "DURATION", "duration")
                    .unwrap_or(0.0);
            }
            if get("WARMUP").is_some() {
                cfg.simulation.warmup = f
                    .number(Some(sim), "Simulation", "WARMUP", "warmup")
                    .unwrap_or(0.0);
            }
            match get("ARRIVALS") {
                None => {}
                Some(Value::String(s)) if s == "periodic" => cfg.simulation.arrivals = Arrivals::Periodic,
                Some(Value::String(s)) if s == "poisson" => cfg.simulation.arrivals = Arrivals::Poisson,
                Some(_) => f.bad(
                    "Simulation",
                    "ARRIVALS",
                    "arrivals",
                    "expected \"periodic\" or \"poisson\"",
                ),
            }
            match get("SERVERS") {
                None => {}
                Some(Value::String(s)) if s == "per_node" => cfg.simulation.servers = Servers::PerNode,
                Some(Value::String(s)) if s == "per_service" => cfg.simulation.servers = Servers::PerService,
                Some(_) => f.bad(
                    "Simulation",
                    "SERVERS",
                    "servers",
                    "expected \"per_node\" or \"per_service\"",
                ),
            }
            match get("INCLUDE_RESPONSE") {
                None => {}
                Some(Value::Boolean(b)) => cfg.simulation.include_response = *b,
                Some(_) => f.bad(
                    "Simulation",
                    "INCLUDE_RESPONSE",
                    "include_response",
                    "expected a boolean",
                ),
            }
            if !(cfg.simulation.warmup >= 0.0 && cfg.simulation.warmup < cfg.simulation.duration) {
                f.bad("Simulation", "WARMUP", "warmup", "need 0 <= WARMUP < DURATION");
            }
        }

        if let Some(sweep) = f.section("Sweep", false) {
            match sweep.get("SEEDS") {
                None => {}
                Some(Value::Integer(n)) if *n >= 1 => cfg.seeds = (1..=*n as u64).collect(),
                Some(Value::Array(items)) if !items.is_empty() => {
                    let seeds: Option<Vec<u64>> = items
                        .iter()
                        .map(|v| v.as_integer().and_then(|i| u64::try_from(i).ok()))
                        .collect();
                    match seeds {
                        Some(s) => cfg.seeds = s,
                        None => f.bad("Sweep", "SEEDS", "seeds", "expected non-negative integers"),
                    }
                }
                Some(_) => f.bad(
                    "Sweep",
                    "SEEDS",
                    "seeds",
                    "expected a positive count or a list of seeds",
                ),
            }
            for (key, role) in [("STRATEGIES", "strategies"), ("MODES", "modes")] {
                let Some(v) = sweep.get(key) else { continue };
                let names: Option<Vec<&str>> = v
                    .as_array()
                    .map(|a| a.iter().map(|x| x.as_str()).collect::<Option<Vec<_>>>())
                    .unwrap_or(None);
                let Some(names) = names.filter(|n| !n.is_empty()) else {
                    f.bad("Sweep", key, role, "expected a non-empty list of names");
                    continue;
                };
                let joined = names.join(",");
                let parsed = if key == "STRATEGIES" {
                    parse_strategies(&joined).map(|s| cfg.strategies = s)
                } else {
                    parse_modes(&joined).map(|m| cfg.modes = m)
                };
                if let Err(e) = parsed {
                    f.bad("Sweep", key, role, &e.to_string());
                }
            }
            if sweep.contains_key("DRAW_THRESHOLD") {
                match f.number(Some(sweep), "Sweep", "DRAW_THRESHOLD", "draw_threshold") {
                    Some(t) if t >= 0.0 => cfg.draw_threshold = t,
                    Some(_) => f.bad(
                        "Sweep",
                        "DRAW_THRESHOLD",
                        "draw_threshold",
                        "must be non-negative",
                    ),
                    None => {}
                }
            }
        }

        if f.problems.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Validation(f.problems))
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Renders the config in the file format [`from_toml`](Self::from_toml) reads.
    pub fn to_toml(&self) -> String {
        let t = &self.topology;
        let w = &self.workload;
        let s = &self.simulation;
        let list = |items: Vec<String>| format!("[{}]", items.join(", "));
        let quoted = |names: Vec<&str>| list(names.into_iter().map(|n| format!("\"{n}\"")).collect());
        let mut out = String::new();
        let _ = writeln!(out, "[Network]");
        let _ = writeln!(out, "NUMBER_OF_NODES = {}", self.node_count);
        let _ = writeln!(out, "NODE_RESOURCES = [{}, {}]", t.node_ram.0, t.node_ram.1);
        let _ = writeln!(out, "NODE_SPEED = [{}, {}]", t.node_ipt.0, t.node_ipt.1);
        let _ = writeln!(out, "LINK_BANDWIDTH = {}", t.link_bandwidth);
        let _ = writeln!(
            out,
            "PROPAGATION_DELAY = [{}, {}]",
            t.link_delay.0, t.link_delay.1
        );
        let _ = writeln!(out, "\n[Cloud]");
        let _ = writeln!(out, "CLOUD_CAPACITY = \"inf\"");
        let _ = writeln!(out, "CLOUD_SPEED = {}", t.cloud_ipt);
        let _ = writeln!(out, "CLOUD_BANDWIDTH = {}", t.cloud_bandwidth);
        let _ = writeln!(out, "PROPAGATION_DELAY = {}", t.cloud_delay);
        let _ = writeln!(out, "\n[APPs]");
        let _ = writeln!(out, "NUMBER_OF_APPS = {}", self.app_count);
        let _ = writeln!(
            out,
            "NUMBER_OF_SERVICES_p_APP = [{}, {}]",
            w.services_per_app.0, w.services_per_app.1
        );
        let _ = writeln!(out, "\n[Modules]");
        let _ = writeln!(
            out,
            "MODULE_INSTRUCTIONS = [{}, {}]",
            w.module_instructions.0, w.module_instructions.1
        );
        let _ = writeln!(out, "MODULE_RESOURCES = [{}, {}]", w.module_ram.0, w.module_ram.1);
        let _ = writeln!(
            out,
            "MODULE_MESSAGE_SIZE = [{}, {}]",
            w.message_size.0, w.message_size.1
        );
        let _ = writeln!(out, "\n[User]");
        let _ = writeln!(
            out,
            "REQUEST_RATE = [{}, {}]",
            w.request_period.0, w.request_period.1
        );
        let _ = writeln!(out, "\n[Simulation]");
        let _ = writeln!(out, "DURATION = {}", s.duration);
        let _ = writeln!(out, "WARMUP = {}", s.warmup);
        let arrivals = match s.arrivals {
            Arrivals::Periodic => "periodic",
            Arrivals::Poisson => "poisson",
        };
        let _ = writeln!(out, "ARRIVALS = \"{arrivals}\"");
        let servers = match s.servers {
            Servers::PerNode => "per_node",
            Servers::PerService => "per_service",
        };
        let _ = writeln!(out, "SERVERS = \"{servers}\"");
        let _ = writeln!(out, "INCLUDE_RESPONSE = {}", s.include_response);
        let _ = writeln!(out, "\n[Sweep]");
        let _ = writeln!(
            out,
            "SEEDS = {}",
            list(self.seeds.iter().map(u64::to_string).collect())
        );
        let _ = writeln!(
            out,
            "STRATEGIES = {}",
            quoted(self.strategies.iter().map(|s| s.name()).collect())
        );
        let _ = writeln!(
            out,
            "MODES = {}",
            quoted(self.modes.iter().map(|m| m.name()).collect())
        );
        let _ = writeln!(out, "DRAW_THRESHOLD = {}", self.draw_threshold);
        out
    }

    /// Number of (strategy, mode, seed) runs.
    pub fn run_count(&self) -> usize {
        self.strategies.len() * self.modes.len() * self.seeds.len()
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.node_count < 3 {
            problems.push("node_count: must be at least 3".to_string());
        }
        if self.app_count < 1 {
            problems.push("app_count: must be at least 1".to_string());
        }
        if self.seeds.is_empty() {
            problems.push("seeds: empty".to_string());
        }
        if self.strategies.is_empty() {
            problems.push("strategies: empty".to_string());
        }
        if self.modes.is_empty() {
            problems.push("modes: empty".to_string());
        }
        if !(self.draw_threshold >= 0.0) {
            problems.push("draw_threshold: must be non-negative".to_string());
        }
        if let Err(e) = self.simulation.validate() {
            problems.push(format!("simulation: {e}"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

pub fn parse_strategies(list: &str) -> Result<Vec<Strategy>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

pub fn parse_modes(list: &str) -> Result<Vec<OrderingMode>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// Topology, apps and users of one master seed.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub seed: u64,
    pub topology: Topology,
    pub apps: Vec<App>,
    pub users: Vec<UserSource>,
}

impl Scenario {
    pub fn build(config: &ExperimentConfig, master: u64) -> Result<Self> {
        let topology = generate_topology(
            config.node_count,
            seed::derive(master, Stream::Topology),
            &config.topology,
        )?;
        let apps = generate_apps(
            config.app_count,
            seed::derive(master, Stream::Workload),
            &config.workload,
        )?;
        let users = assign_users(&topology, &apps, seed::derive(master, Stream::Users))?;
        Ok(Scenario {
            seed: master,
            topology,
            apps,
            users,
        })
    }

    /// Places and simulates one (strategy, mode) pair.
    pub fn run(
        &self,
        config: &ExperimentConfig,
        strategy: Strategy,
        mode: OrderingMode,
        trace: bool,
    ) -> Result<(RunResult, Vec<TraceRecord>)> {
        let plan = strategy.place(&self.topology, &self.apps, mode)?;
        let sim = SimulationConfig {
            seed: seed::derive(self.seed, Stream::Simulation),
            trace,
            ..config.simulation.clone()
        };
        let out = simulate(&self.topology, &self.apps, &self.users, &plan, &sim)?;
        let result = RunResult::new(strategy, mode, self.seed, &out.samples, &plan, &self.topology)?;
        Ok((result, out.trace))
    }
}

type RunOutput = (RunResult, Vec<TraceRecord>);
/// (strategy index, mode index, seed index)
type RunKey = (usize, usize, usize);

fn sweep(config: &ExperimentConfig, trace: bool) -> Result<Vec<RunOutput>> {
    config.validate()?;
    let per_seed = |&master: &u64| -> Result<Vec<(RunKey, RunOutput)>> {
        let scenario = Scenario::build(config, master)?;
        let seed_idx = config.seeds.iter().position(|&s| s == master).unwrap_or(0);
        let mut out = Vec::with_capacity(config.strategies.len() * config.modes.len());
        for (si, &strategy) in config.strategies.iter().enumerate() {
            for (mi, &mode) in config.modes.iter().enumerate() {
                out.push(((si, mi, seed_idx), scenario.run(config, strategy, mode, trace)?));
            }
        }
        Ok(out)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let nested: Vec<_> =
        pool.install(|| config.seeds.par_iter().map(per_seed).collect::<Result<Vec<_>>>())?;
    let mut runs: Vec<_> = nested.into_iter().flatten().collect();
    runs.sort_by_key(|(key, _)| *key);
    Ok(runs.into_iter().map(|(_, r)| r).collect())
}

/// Runs the sweep without touching the filesystem. Results are ordered by
/// (strategy, mode, seed) as listed in `config`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<RunResult>> {
    Ok(sweep(config, false)?.into_iter().map(|(r, _)| r).collect())
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunResult>,
    pub summaries: Vec<Summary>,
    pub verdicts: Vec<ComparisonVerdict>,
    /// Files written, in write order.
    pub files: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn summary(&self, strategy: Strategy, mode: OrderingMode) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|s| s.strategy == strategy && s.mode == mode)
    }
}

/// Runs the sweep and writes `runs.csv`, `summary.csv`, `verdicts.csv`,
/// `per_app.csv` and `summary.txt` into `out_dir`. With `trace`, per-run
/// event logs go under `traces/`.
///
/// Files are staged in a temporary directory inside `out_dir` and renamed
/// into place once all of them are written.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path, trace: bool) -> Result<ExperimentReport> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let outputs = sweep(config, trace)?;
    let mut runs = Vec::with_capacity(outputs.len());
    let mut traces = Vec::new();
    for (r, t) in outputs {
        if trace {
            traces.push((format!("{}_{}_{}.log", r.strategy, r.mode, r.seed), t));
        }
        runs.push(r);
    }
    let summaries = aggregate(&runs)?;
    let verdicts = if config.modes.len() == 2 {
        compare_modes(&summaries, config.draw_threshold)?
    } else {
        Vec::new()
    };

    let staging = tempfile::Builder::new()
        .prefix(".continuum-")
        .tempdir_in(out_dir)
        .map_err(|e| Error::io(out_dir, e))?;
    let stage = staging.path();
    let create = |name: &str| -> Result<BufWriter<fs::File>> {
        let path = stage.join(name);
        fs::File::create(&path)
            .map(BufWriter::new)
            .map_err(|e| Error::io(path, e))
    };
    write_runs_csv(create("runs.csv")?, &runs)?;
    write_summary_csv(create("summary.csv")?, &summaries)?;
    write_verdicts_csv(create("verdicts.csv")?, &verdicts)?;
    write_per_app_csv(create("per_app.csv")?, &summaries)?;
    let text_path = stage.join("summary.txt");
    fs::write(&text_path, render_summary(config, &summaries, &verdicts))
        .map_err(|e| Error::io(&text_path, e))?;

    let mut names = vec![
        "runs.csv",
        "summary.csv",
        "verdicts.csv",
        "per_app.csv",
        "summary.txt",
    ]
    .into_iter()
    .map(PathBuf::from)
    .collect::<Vec<_>>();
    if trace {
        let dir = stage.join("traces");
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (name, records) in &traces {
            let mut text = String::new();
            for r in records {
                let _ = writeln!(text, "{r}");
            }
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        let target = out_dir.join("traces");
        if target.exists() {
            fs::remove_dir_all(&target).map_err(|e| Error::io(&target, e))?;
        }
        names.push(PathBuf::from("traces"));
    }

    let mut files = Vec::with_capacity(names.len());
    for name in names {
        let target = out_dir.join(&name);
        fs::rename(stage.join(&name), &target).map_err(|e| Error::io(&target, e))?;
        files.push(target);
    }
    Ok(ExperimentReport {
        runs,
        summaries,
        verdicts,
        files,
    })
}

/// Human-readable table of the sweep.
pub fn render_summary(
    config: &ExperimentConfig,
    summaries: &[Summary],
    verdicts: &[ComparisonVerdict],
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} nodes + cloud, {} apps, {} seeds, {} runs",
        config.node_count,
        config.app_count,
        config.seeds.len(),
        config.run_count()
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<16} {:<14} {:>12} {:>10} {:>14} {:>9}",
        "strategy", "mode", "mean_ms", "std_ms", "app_avg_ms", "used_%"
    );
    for s in summaries {
        let _ = writeln!(
            out,
            "{:<16} {:<14} {:>12.3} {:>10.3} {:>14.3} {:>9.2}",
            s.strategy.name(),
            s.mode.name(),
            s.mean_latency,
            s.std_latency,
            s.app_averaged_latency,
            s.used_pct
        );
    }
    if !verdicts.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "lower-latency ordering (draw within {}%)",
            config.draw_threshold * 100.0
        );
        for v in verdicts {
            let _ = writeln!(
                out,
                "{:<16} {:<14} delta {:+.3} ms",
                v.strategy.name(),
                v.winner.name(),
                v.delta
            );
        }
    }
    out
}
