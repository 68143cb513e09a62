mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use vmac_core::audit::{Auditor, EVERYONE_ELSE};
use vmac_core::harness::{house_registry, HOUSE_POLICIES};
use vmac_core::{parse_policies, Formula, SpaceRegistry, TimeOfDay};

#[test]
fn house_answers() {
    let ps = parse_policies(HOUSE_POLICIES).unwrap();
    let s = store(house_registry(), &ps);
    let a = Auditor::with_backend(&s, Checked::default());
    let who = a.list_principals_with_access("master_bathroom", None).unwrap();
    assert_eq!(who.principals().unwrap(), [] as [String; 0]);
    assert_eq!(a.check_too_strong("master_bathroom", "Alice").unwrap().as_bool(), Some(true));
    let carol = parse_policies(r#"Begin Name: "c" Effect: allow Principal: "Carol" Space: "master_bathroom" End"#).unwrap();
    assert_eq!(a.check_new_allow_effective(&carol[0]).unwrap().as_bool(), Some(false));
    assert_eq!(a.find_allow_deny_conflicts("master_bathroom").unwrap().principals().unwrap(), ["Alice"]);

    let ctx = Formula::and([
        Formula::time_in(TimeOfDay::new(1000).unwrap(), TimeOfDay::new(1000).unwrap()),
        Formula::user_in(s.registry().box_of("second_floor_all").unwrap()),
    ]);
    let rec = a.list_principals_with_access("recreation_area", Some(&ctx)).unwrap();
    assert_eq!(rec.principals().unwrap(), ["Alice", "Bob"]);
    assert_eq!(a.check_too_weak("recreation_area").unwrap().as_bool(), Some(false));
    // Bob's policy is also indexed under `second_floor_all` through its condition.
    assert_eq!(a.check_more_permissive_than_parent("recreation_area").unwrap().as_bool(), Some(false));
    assert_eq!(a.check_more_permissive_than_parent("staircase").unwrap().as_bool(), Some(true));
    assert!(a.backend().bad.borrow().is_empty(), "{:?}", a.backend().bad.borrow());

    let oracle = AuditOracle::new(s.registry(), &ps);
    assert!(oracle.who("master_bathroom", None, None).is_empty());
    assert!(oracle.too_strong("master_bathroom", "Alice"));
    assert!(!oracle.new_allow_effective(&carol[0]));
    assert_eq!(oracle.conflicts("master_bathroom"), set(&["Alice".into()]));
    assert!(!oracle.more_permissive("recreation_area"));
    assert!(oracle.more_permissive("staircase"));
}

#[test]
fn who_uses_one_solver_call_per_answer_plus_one() {
    let ps = parse_policies(
        r#"Begin Name: a Effect: allow Principal: Ann Space: home End
           Begin Name: b Effect: allow Principal: Ben Space: home End
           Begin Name: c Effect: allow Principal: Cy Space: other End
           Begin Name: open Effect: allow Action: read Space: home Condition: TODAfter: 2000 End"#,
    )
    .unwrap();
    let reg = SpaceRegistry::load(vec![
        vmac_core::SpaceRecord::new("home", vmac_core::Box3::new(0., 4., 0., 4., 0., 3.), None),
        vmac_core::SpaceRecord::new("other", vmac_core::Box3::new(5., 6., 0., 4., 0., 3.), None),
    ])
    .unwrap();
    let s = store(reg, &ps);
    let a = Auditor::with_backend(&s, Checked::default());
    let who = a.list_principals_with_access("home", None).unwrap();
    assert_eq!(who.principals().unwrap(), ["Ann", "Ben", "Cy", EVERYONE_ELSE]);
    assert_eq!(*a.backend().calls.borrow(), 5);
    assert!(a.backend().bad.borrow().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn audits_agree_with_region_sampling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(msg) = audit_instance(&mut rng) {
            prop_assert!(false, "{}", msg);
        }
    }
}
