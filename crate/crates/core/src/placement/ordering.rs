use crate::placement::OrderingMode;
use crate::workload::{App, Service};

/// Apps by descending request rate (ascending period), then ascending id.
pub fn apps_by_request_rate(apps: &[App]) -> Vec<&App> {
    let mut sorted: Vec<&App> = apps.iter().collect();
    sorted.sort_by_key(|a| (a.request_period, a.id));
    sorted
}

/// Flattens already-sorted apps into a service sequence.
///
/// App-based concatenates each chain; service-based takes every app's
/// order-0 service, then every order-1 service, skipping exhausted apps.
pub fn interleave<'a>(apps: &[&'a App], mode: OrderingMode) -> Vec<&'a Service> {
    match mode {
        OrderingMode::AppBased => apps.iter().flat_map(|a| a.services.iter()).collect(),
        OrderingMode::ServiceBased => {
            let longest = apps.iter().map(|a| a.services.len()).max().unwrap_or(0);
            (0..longest)
                .flat_map(|k| apps.iter().filter_map(move |a| a.services.get(k)))
                .collect()
        }
    }
}

/// Service order used by the greedy strategies.
pub fn order_services(apps: &[App], mode: OrderingMode) -> Vec<&Service> {
    interleave(&apps_by_request_rate(apps), mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::fixtures::chain;
    use crate::workload::{generate_apps, ServiceId, WorkloadParams};

    fn ids(services: &[&Service]) -> Vec<ServiceId> {
        services.iter().map(|s| s.id()).collect()
    }

    #[test]
    fn interleaves_and_concatenates() {
        // A (id 0) has the higher rate
        let apps = vec![chain(1, 800, &[1, 1]), chain(0, 300, &[1, 1, 1])];
        let s = ServiceId::new;
        assert_eq!(
            ids(&order_services(&apps, OrderingMode::ServiceBased)),
            vec![s(0, 0), s(1, 0), s(0, 1), s(1, 1), s(0, 2)]
        );
        assert_eq!(
            ids(&order_services(&apps, OrderingMode::AppBased)),
            vec![s(0, 0), s(0, 1), s(0, 2), s(1, 0), s(1, 1)]
        );
    }

    #[test]
    fn equal_rates_break_ties_by_id() {
        let apps = vec![chain(5, 400, &[1]), chain(2, 400, &[1])];
        let order = order_services(&apps, OrderingMode::AppBased);
        assert_eq!(order[0].app_id, 2);
    }

    #[test]
    fn service_based_matches_independent_interleaver() {
        let apps = generate_apps(20, 1, &WorkloadParams::default()).unwrap();
        // oracle: repeatedly sweep the rate-sorted apps, popping one service
        // from the front of each non-empty queue
        let mut queues: Vec<(u32, usize, std::collections::VecDeque<ServiceId>)> = apps
            .iter()
            .map(|a| {
                (
                    a.request_period,
                    a.id,
                    a.services.iter().map(|s| s.id()).collect(),
                )
            })
            .collect();
        queues.sort_by_key(|q| (q.0, q.1));
        let mut expected = Vec::new();
        while queues.iter().any(|q| !q.2.is_empty()) {
            for q in queues.iter_mut() {
                if let Some(s) = q.2.pop_front() {
                    expected.push(s);
                }
            }
        }
        assert_eq!(ids(&order_services(&apps, OrderingMode::ServiceBased)), expected);
        let total: usize = apps.iter().map(|a| a.services.len()).sum();
        assert_eq!(order_services(&apps, OrderingMode::AppBased).len(), total);
    }
}
