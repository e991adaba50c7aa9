mod common;

use continuum_core::placement::Strategy;
use continuum_core::simulation::simulate;
use continuum_core::simulation::{run_simulation, EventKind, SimulationConfig};
use continuum_core::topology::{generate_topology, TopologyParams};
use continuum_core::workload::{assign_users, generate_apps, WorkloadParams};
use continuum_core::{OrderingMode, PlacementPlan};

#[test]
fn single_request_matches_closed_form() {
    for seed in 0..30 {
        let err = common::single_request_error(seed).unwrap();
        assert!(err <= 1e-9, "seed {seed}: off by {err:e} ms");
    }
}

#[test]
fn periodic_sample_count_ignores_phase() {
    let topo = generate_topology(12, 5, &TopologyParams::default()).unwrap();
    let apps = generate_apps(3, 5, &WorkloadParams::default()).unwrap();
    let users = assign_users(&topo, &apps, 5).unwrap();
    let plan = Strategy::GreedyFram
        .place(&topo, &apps, OrderingMode::ServiceBased)
        .unwrap();
    for seed in 0..20 {
        let periods = 7.0;
        for app in &apps {
            let single = vec![app.clone()];
            let user = users
                .iter()
                .filter(|u| u.app_id == app.id)
                .cloned()
                .collect::<Vec<_>>();
            let plan = PlacementPlan::from_assignments(
                &topo,
                &single,
                app.services
                    .iter()
                    .map(|s| (s.id(), plan.node_of(s.id()).unwrap())),
            )
            .unwrap();
            let config = SimulationConfig {
                warmup: 333.0,
                duration: 333.0 + periods * f64::from(app.request_period),
                seed,
                ..SimulationConfig::default()
            };
            let samples = run_simulation(&topo, &single, &user, &plan, &config).unwrap();
            assert_eq!(samples.len(), periods as usize, "seed {seed} app {}", app.id);
        }
    }
}

#[test]
fn every_sample_is_positive_and_post_warmup() {
    let topo = generate_topology(40, 8, &TopologyParams::default()).unwrap();
    let apps = generate_apps(8, 8, &WorkloadParams::default()).unwrap();
    let users = assign_users(&topo, &apps, 8).unwrap();
    let config = SimulationConfig {
        duration: 6000.0,
        warmup: 500.0,
        seed: 8,
        ..SimulationConfig::default()
    };
    for s in Strategy::ALL {
        let plan = s.place(&topo, &apps, OrderingMode::AppBased).unwrap();
        let samples = run_simulation(&topo, &apps, &users, &plan, &config).unwrap();
        assert!(!samples.is_empty());
        for x in &samples {
            assert!(x.latency > 0.0);
            assert!(x.emitted_at >= 500.0 && x.emitted_at < 6000.0);
        }
        let mut ids: Vec<u64> = samples.iter().map(|x| x.request_id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), samples.len(), "{s}: duplicate samples");
    }
}

#[test]
fn completions_advance_along_each_chain() {
    let topo = generate_topology(25, 2, &TopologyParams::default()).unwrap();
    let apps = generate_apps(5, 2, &WorkloadParams::default()).unwrap();
    let users = assign_users(&topo, &apps, 2).unwrap();
    let plan = Strategy::RrIpt
        .place(&topo, &apps, OrderingMode::ServiceBased)
        .unwrap();
    let config = SimulationConfig {
        duration: 4000.0,
        warmup: 0.0,
        trace: true,
        ..SimulationConfig::default()
    };
    let out = simulate(&topo, &apps, &users, &plan, &config).unwrap();
    let mut last: std::collections::HashMap<u64, (usize, f64)> = Default::default();
    for r in out.trace.iter().filter(|r| r.kind == EventKind::ServiceCompleted) {
        let order = r.order.unwrap();
        if let Some(&(prev_order, prev_ts)) = last.get(&r.request) {
            assert_eq!(order, prev_order + 1);
            assert!(r.timestamp > prev_ts);
        } else {
            assert_eq!(order, 0);
        }
        last.insert(r.request, (order, r.timestamp));
    }
    for pair in out.trace.windows(2) {
        assert!(pair[0].timestamp <= pair[1].timestamp);
    }
}
