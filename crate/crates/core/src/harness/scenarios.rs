//! End-to-end checks of everyday access-control situations in the house.

use std::sync::Arc;

use super::house::{house_registry, HOUSE_POLICIES};
use crate::engine::{DecisionEngine, PolicyStore, Verdict};
use crate::formula::AccessRequest;
use crate::lang::{parse_policies, Action, TimeOfDay};
use crate::space::{Point3, SpaceRegistry};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioResult {
    pub name: &'static str,
    pub expected: &'static str,
    pub passed: bool,
    /// Failed checks, empty when the scenario passed.
    pub failures: Vec<String>,
}

struct Checker {
    engine: DecisionEngine,
    failures: Vec<String>,
}

fn t(v: u16) -> TimeOfDay {
    TimeOfDay::new(v).expect("valid literal time")
}

impl Checker {
    fn new(registry: &Arc<SpaceRegistry>, policies: &str) -> Self {
        let ps = parse_policies(policies).expect("scenario policies parse");
        let store = PolicyStore::with_policies(registry.clone(), ps).expect("scenario policies resolve");
        Checker {
            engine: DecisionEngine::cached(store),
            failures: Vec::new(),
        }
    }

    /// Records every point whose verdict differs from `want`.
    fn expect(&mut self, who: &str, action: Action, points: &[Point3], user: Point3, time: TimeOfDay, want: Verdict) {
        for p in points {
            let d = self.engine.decide(&AccessRequest::new(who, action, *p, user, time));
            if d.verdict != want {
                self.failures
                    .push(format!("{who} {action} {p:?} at {time}: got {}, expected {want}", d.verdict));
            }
        }
    }

    fn finish(self, name: &'static str, expected: &'static str) -> ScenarioResult {
        ScenarioResult {
            name,
            expected,
            passed: self.failures.is_empty(),
            failures: self.failures,
        }
    }
}

/// A few points spread through a room, kept off its walls.
fn room_points(registry: &SpaceRegistry, id: &str) -> Vec<Point3> {
    let b = registry.box_of(id).expect("scenario room exists");
    let at = |fx: f64, fy: f64, fz: f64| -> Point3 {
        let f = [fx, fy, fz];
        std::array::from_fn(|i| b.min[i] + (b.max[i] - b.min[i]) * f[i])
    };
    vec![at(0.5, 0.5, 0.5), at(0.1, 0.2, 0.3), at(0.9, 0.8, 0.7), at(0.25, 0.75, 0.5)]
}

fn center(registry: &SpaceRegistry, id: &str) -> Point3 {
    registry.box_of(id).expect("scenario room exists").center()
}

const ALL_ACTIONS: [Action; 3] = Action::ALL;

fn conservative_default(reg: &Arc<SpaceRegistry>) -> ScenarioResult {
    let mut c = Checker::new(
        reg,
        r#"Begin Name: "AliceDownstairs" Effect: allow Principal: "Alice" Space: "first_floor_all" End"#,
    );
    let pts = room_points(reg, "recreation_area");
    let user = center(reg, "recreation_area");
    for who in ["Alice", "Bob", "Carol"] {
        for a in ALL_ACTIONS {
            c.expect(who, a, &pts, user, t(1200), Verdict::Deny);
        }
    }
    c.expect("Alice", Action::Read, &[[50.0, 50.0, 1.0]], user, t(1200), Verdict::Deny);
    c.finish("Conservative default policy", "all users are denied access to a space without policies")
}

fn private_spaces(reg: &Arc<SpaceRegistry>) -> ScenarioResult {
    let mut c = Checker::new(
        reg,
        r#"Begin Name: "AliceSuite" Effect: allow Principal: "Alice" Space: "master_suite" End"#,
    );
    let pts = room_points(reg, "master_bedroom");
    let user = center(reg, "master_bedroom");
    for a in ALL_ACTIONS {
        c.expect("Alice", a, &pts, user, t(2200), Verdict::Allow);
        c.expect("Bob", a, &pts, user, t(2200), Verdict::Deny);
    }
    c.finish("Private spaces", "only the owner is allowed access to their private space")
}

fn shared_private_spaces(reg: &Arc<SpaceRegistry>) -> ScenarioResult {
    let policies = format!(
        "{HOUSE_POLICIES}\nBegin Name: \"EveryoneEverywhere\" Effect: allow Space: \"house\" End\n"
    );
    let mut c = Checker::new(reg, &policies);
    for bath in ["guest_bathroom", "shared_bathroom", "master_bathroom"] {
        let pts = room_points(reg, bath);
        let user = center(reg, bath);
        for who in ["Alice", "Bob", "Carol"] {
            for a in ALL_ACTIONS {
                c.expect(who, a, &pts, user, t(1000), Verdict::Deny);
            }
        }
    }
    let hall = room_points(reg, "foyer");
    c.expect("Carol", Action::Write, &hall, center(reg, "foyer"), t(1000), Verdict::Allow);
    c.finish("Shared private spaces", "a user in the restroom is denied mapping and localization there")
}

fn bystander_spaces(reg: &Arc<SpaceRegistry>) -> ScenarioResult {
    let mut c = Checker::new(
        reg,
        r#"
        Begin Name: "BobsRoom" Effect: allow Principal: "Bob" Space: "small_bedroom_1" End
        Begin Name: "CommonArea" Effect: allow Space: "recreation_area" End
        "#,
    );
    let user = center(reg, "recreation_area");
    let common = room_points(reg, "recreation_area");
    let private = room_points(reg, "small_bedroom_1");
    c.expect("Alice", Action::Write, &private, user, t(1500), Verdict::Deny);
    c.expect("Alice", Action::Write, &common, user, t(1500), Verdict::Allow);
    c.expect("Bob", Action::Write, &private, user, t(1500), Verdict::Allow);
    c.finish("Bystander spaces", "a passer-by is denied mapping another user's private space")
}

fn localize_with_other_map(reg: &Arc<SpaceRegistry>) -> ScenarioResult {
    let mut c = Checker::new(
        reg,
        r#"Begin Name: "BobsMap" Effect: allow Principal: "Bob" Space: "guest_bedroom" End"#,
    );
    let pts = room_points(reg, "guest_bedroom");
    let user = center(reg, "guest_bedroom");
    c.expect("Alice", Action::Localize, &pts, user, t(1900), Verdict::Deny);
    c.expect("Alice", Action::Read, &pts, user, t(1900), Verdict::Deny);
    c.expect("Bob", Action::Localize, &pts, user, t(1900), Verdict::Allow);
    c.finish("Localize with another user's map", "a user is denied another user's private map")
}

fn friends_of_friends(reg: &Arc<SpaceRegistry>) -> ScenarioResult {
    let mut c = Checker::new(
        reg,
        r#"
        Begin Name: "Owner" Effect: allow Principal: "Alice" Space: "house" End
        Begin Name: "TrustedFriend" Effect: allow Principal: "Bob" Space: "house" End
        "#,
    );
    for room in ["living_room", "small_bedroom_2"] {
        let pts = room_points(reg, room);
        let user = center(reg, room);
        for a in [Action::Write, Action::Localize, Action::Read] {
            c.expect("Bob", a, &pts, user, t(1100), Verdict::Allow);
            c.expect("Carol", a, &pts, user, t(1100), Verdict::Deny);
        }
    }
    c.finish("Denying friends of friends access", "the trusted friend maps and localizes; their friend is denied")
}

fn map_contamination(reg: &Arc<SpaceRegistry>) -> ScenarioResult {
    let mut c = Checker::new(
        reg,
        r#"
        Begin Name: "BobsSuite" Effect: allow Principal: "Bob" Space: "master_suite" End
        Begin Name: "AliceReadsHouse" Effect: allow Principal: "Alice" Action: read Space: "house" End
        "#,
    );
    let pts = room_points(reg, "master_bedroom");
    let user = center(reg, "master_bedroom");
    c.expect("Alice", Action::Write, &pts, user, t(300), Verdict::Deny);
    c.expect("Bob", Action::Write, &pts, user, t(300), Verdict::Allow);
    c.finish("Private space map contamination", "writes by another user into a private map are denied")
}

fn change_and_revoke(reg: &Arc<SpaceRegistry>) -> ScenarioResult {
    let mut c = Checker::new(
        reg,
        r#"
        Begin Name: "BobMaps" Effect: allow Principal: "Bob" Action: write Space: "house"
              Condition: TODAfter: 0900 End
        Begin Name: "CarolMaps" Effect: allow Principal: "Carol" Action: write Space: "house" End
        "#,
    );
    let pts = room_points(reg, "kitchen");
    let user = center(reg, "kitchen");
    c.expect("Bob", Action::Write, &pts, user, t(1000), Verdict::Allow);
    c.expect("Carol", Action::Write, &pts, user, t(1000), Verdict::Allow);

    let changed = parse_policies(
        r#"Begin Name: "BobMaps" Effect: allow Principal: "Bob" Action: write Space: "house"
           Condition: TODAfter: 1200 End"#,
    )
    .expect("replacement parses")
    .remove(0);
    if let Err(e) = c.engine.replace_policy(changed) {
        c.failures.push(format!("replace failed: {e}"));
    }
    if let Err(e) = c.engine.remove_policy("CarolMaps") {
        c.failures.push(format!("revoke failed: {e}"));
    }
    c.expect("Bob", Action::Write, &pts, user, t(1000), Verdict::Deny);
    c.expect("Bob", Action::Write, &pts, user, t(1300), Verdict::Allow);
    c.expect("Carol", Action::Write, &pts, user, t(1000), Verdict::Deny);
    c.finish("Changing or revoking access policies", "changed and revoked rights take effect immediately")
}

/// Runs all eight scenarios on the house geometry.
pub fn run_scenarios() -> Vec<ScenarioResult> {
    let reg = Arc::new(house_registry());
    vec![
        conservative_default(&reg),
        private_spaces(&reg),
        shared_private_spaces(&reg),
        bystander_spaces(&reg),
        localize_with_other_map(&reg),
        friends_of_friends(&reg),
        map_contamination(&reg),
        change_and_revoke(&reg),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_pass() {
        let results = run_scenarios();
        assert_eq!(results.len(), 8);
        for r in results {
            assert!(r.passed, "{}: {:?}", r.name, r.failures);
        }
    }
}
