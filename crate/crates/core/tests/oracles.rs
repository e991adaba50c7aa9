mod common;

const CASES: u64 = 30;

#[test]
fn greedy_fram_heap_matches_full_rescan() {
    for seed in 0..CASES {
        common::check_fram(seed).unwrap();
    }
}

#[test]
fn greedy_latency_matches_first_fit() {
    for seed in 0..CASES {
        common::check_latency(seed).unwrap();
    }
}

#[test]
fn near_gateway_matches_exhaustive_argmin() {
    for seed in 0..CASES {
        common::check_near_gateway(seed).unwrap();
    }
}

#[test]
fn dijkstra_matches_floyd_warshall() {
    for seed in 0..CASES {
        let err = common::distance_error(seed);
        assert!(err <= 1e-9, "seed {seed}: {err:e}");
    }
}

#[test]
fn small_instances_stay_small() {
    for seed in 0..CASES {
        let inst = common::small_instance(seed);
        assert!(inst.topology.len() <= 15);
        assert!((1..=5).contains(&inst.apps.len()));
    }
}
