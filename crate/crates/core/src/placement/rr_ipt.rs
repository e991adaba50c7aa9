use crate::error::Result;
use crate::placement::{
    interleave, louvain_communities, Community, OrderingMode, PlacementPlan, PlanBuilder,
};
use crate::topology::Topology;
use crate::workload::{avg_message_instructions, App, Service};

/// Apps by descending mean message instructions, then ascending id.
pub fn apps_by_message_instructions(apps: &[App]) -> Vec<&App> {
    let mut keyed: Vec<(f64, &App)> = apps.iter().map(|a| (avg_message_instructions(a), a)).collect();
    keyed.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.id.cmp(&y.1.id)));
    keyed.into_iter().map(|(_, a)| a).collect()
}

/// A community with a round-robin cursor over its members.
struct Rotation<'a> {
    community: &'a Community,
    cursor: usize,
}

impl Rotation<'_> {
    /// Tries each member at most once starting at the cursor. The cursor
    /// ends one past the last member tried.
    fn place(&mut self, plan: &mut PlanBuilder, service: &Service) -> bool {
        let len = self.community.members.len();
        for _ in 0..len {
            let node = self.community.members[self.cursor];
            self.cursor = (self.cursor + 1) % len;
            if plan.try_place(node, service) {
                return true;
            }
        }
        false
    }
}

/// Round-robin over IPT-ranked Louvain communities.
///
/// Each service goes to the first community, in descending average IPT,
/// that has a member with room; members are tried round-robin from a
/// cursor that persists across services. The cloud takes what no community
/// can.
pub fn rr_ipt_place(topology: &Topology, apps: &[App], mode: OrderingMode) -> Result<PlacementPlan> {
    let communities = louvain_communities(topology);
    rr_ipt_place_with(
        topology,
        &communities,
        &interleave(&apps_by_message_instructions(apps), mode),
    )
}

pub(crate) fn rr_ipt_place_with(
    topology: &Topology,
    communities: &[Community],
    services: &[&Service],
) -> Result<PlacementPlan> {
    let mut rotations: Vec<Rotation> = communities
        .iter()
        .filter(|c| !c.members.is_empty())
        .map(|community| Rotation { community, cursor: 0 })
        .collect();
    let mut plan = PlanBuilder::new(topology);
    for service in services {
        if !rotations.iter_mut().any(|r| r.place(&mut plan, service)) {
            plan.place_on_cloud(topology, service)?;
        }
    }
    Ok(plan.finish())
}
