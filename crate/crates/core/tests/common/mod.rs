//! Reference implementations and generators shared by the integration tests.
//!
//! Everything here works on the policy ASTs and raw boxes directly, without
//! the formula layer, the policy store, the index or the cache.

#![allow(dead_code)]

pub mod strategies;

use std::cell::RefCell;
use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use vmac_core::audit::{Assignment, AuditError, Auditor, RegionSolver, SatBackend};
use vmac_core::lang::{CondExpr, SpaceExpr};
use vmac_core::{AccessRequest, Action, Box3, Effect, Formula, Point3, PolicyAst, PolicyStore, SpaceRecord, SpaceRegistry, TimeOfDay};

pub const PRINCIPALS: [&str; 3] = ["Alice", "Bob", "Carol"];
/// A principal name no generated policy uses.
pub const STRANGER: &str = "~stranger~";

pub fn box_of(reg: &SpaceRegistry, id: &str) -> Box3 {
    reg.box_of(id).unwrap_or_else(|| panic!("unknown space {id}"))
}

pub fn space_holds(e: &SpaceExpr, reg: &SpaceRegistry, p: Point3) -> bool {
    match e {
        SpaceExpr::Id(id) => box_of(reg, id).contains_point(p),
        SpaceExpr::Not(x) => !space_holds(x, reg, p),
        SpaceExpr::And(l, r) => space_holds(l, reg, p) && space_holds(r, reg, p),
        SpaceExpr::Or(l, r) => space_holds(l, reg, p) || space_holds(r, reg, p),
    }
}

pub fn cond_holds(c: &CondExpr, reg: &SpaceRegistry, req: &AccessRequest) -> bool {
    match c {
        CondExpr::TodAfter(t) => req.time >= *t,
        CondExpr::TodBefore(t) => req.time <= *t,
        CondExpr::WhenInside(id) => box_of(reg, id).contains_point(req.user_location),
        CondExpr::Not(x) => !cond_holds(x, reg, req),
        CondExpr::And(l, r) => cond_holds(l, reg, req) && cond_holds(r, reg, req),
        CondExpr::Or(l, r) => cond_holds(l, reg, req) || cond_holds(r, reg, req),
    }
}

/// Whether every field of the policy matches the request, ignoring the effect.
pub fn policy_matches(p: &PolicyAst, reg: &SpaceRegistry, req: &AccessRequest) -> bool {
    p.principal.as_ref().is_none_or(|x| *x == req.principal)
        && p.action.is_none_or(|a| a == req.action)
        && space_holds(&p.space, reg, req.point)
        && p.condition.as_ref().is_none_or(|c| cond_holds(c, reg, req))
}

/// Allowed iff some governing allow matches and no governing deny matches.
pub fn allowed_by<'a>(set: impl IntoIterator<Item = &'a PolicyAst>, reg: &SpaceRegistry, req: &AccessRequest) -> bool {
    let mut allow = false;
    for p in set {
        if policy_matches(p, reg, req) {
            match p.effect {
                Effect::Allow => allow = true,
                Effect::Deny => return false,
            }
        }
    }
    allow
}

fn mentions(p: &PolicyAst, ids: &[String]) -> bool {
    p.referenced_spaces().iter().any(|s| ids.iter().any(|i| i == s))
}

/// Linear-scan decision: a policy governs a point when it mentions any space
/// whose box contains the point.
pub fn naive_decide(reg: &SpaceRegistry, policies: &[PolicyAst], req: &AccessRequest) -> bool {
    let containing: Vec<String> = reg
        .spaces()
        .filter(|s| s.bbox.contains_point(req.point))
        .map(|s| s.id.clone())
        .collect();
    allowed_by(policies.iter().filter(|p| mentions(p, &containing)), reg, req)
}

/// Ids of the spaces containing `p`, innermost first, by linear scan.
pub fn naive_chain(reg: &SpaceRegistry, p: Point3) -> Vec<String> {
    let mut hits: Vec<(usize, String)> = reg
        .spaces()
        .filter(|s| s.bbox.contains_point(p))
        .map(|s| (reg.ancestors(&s.id).len(), s.id.clone()))
        .collect();
    hits.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    hits.into_iter().map(|h| h.1).collect()
}

pub fn random_time(rng: &mut ChaCha8Rng) -> TimeOfDay {
    if rng.gen_ratio(1, 50) {
        return TimeOfDay::END_OF_DAY;
    }
    TimeOfDay::new(rng.gen_range(0..24) * 100 + rng.gen_range(0..60)).unwrap()
}

pub fn random_action(rng: &mut ChaCha8Rng) -> Action {
    *Action::ALL.choose(rng).unwrap()
}

/// A random hierarchy on the integer grid `[0, 4]^3`, built by cutting boxes
/// into children along integer planes and sometimes shrinking a child.
pub fn random_registry(rng: &mut ChaCha8Rng) -> SpaceRegistry {
    let mut records = Vec::new();
    let mut pending: Vec<(String, [i32; 6], usize)> = Vec::new();
    let whole = [0, 4, 0, 4, 0, 4];
    let roots: Vec<[i32; 6]> = match split(rng, whole) {
        Some(halves) if rng.gen_bool(0.3) => halves.to_vec(),
        _ => vec![whole],
    };
    for (k, b) in roots.into_iter().enumerate() {
        pending.push((format!("r{k}"), b, 0));
        records.push(SpaceRecord::new(format!("r{k}"), to_box(b), None));
    }
    let mut counter = 0;
    while let Some((id, b, depth)) = pending.pop() {
        if depth >= 3 || !rng.gen_bool(0.65) {
            continue;
        }
        let Some(halves) = split(rng, b) else { continue };
        for mut h in halves {
            if !rng.gen_bool(0.8) {
                continue;
            }
            if rng.gen_bool(0.3) {
                shrink(rng, &mut h);
            }
            counter += 1;
            let child = format!("s{counter}");
            records.push(SpaceRecord::new(child.clone(), to_box(h), Some(&id)));
            pending.push((child, h, depth + 1));
        }
    }
    SpaceRegistry::load(records).expect("generated hierarchy is valid")
}

fn to_box(b: [i32; 6]) -> Box3 {
    Box3::from_bounds(b.map(f64::from))
}

fn split(rng: &mut ChaCha8Rng, b: [i32; 6]) -> Option<[[i32; 6]; 2]> {
    let axes: Vec<usize> = (0..3).filter(|&a| b[2 * a + 1] - b[2 * a] >= 2).collect();
    let &axis = axes.choose(rng)?;
    let cut = rng.gen_range(b[2 * axis] + 1..b[2 * axis + 1]);
    let (mut lo, mut hi) = (b, b);
    lo[2 * axis + 1] = cut;
    hi[2 * axis] = cut;
    Some([lo, hi])
}

fn shrink(rng: &mut ChaCha8Rng, b: &mut [i32; 6]) {
    let axis = rng.gen_range(0..3);
    if b[2 * axis + 1] - b[2 * axis] >= 2 {
        if rng.gen_bool(0.5) {
            b[2 * axis] += 1;
        } else {
            b[2 * axis + 1] -= 1;
        }
    }
}

pub fn random_space_expr(rng: &mut ChaCha8Rng, ids: &[String], depth: u32) -> SpaceExpr {
    let leaf = |rng: &mut ChaCha8Rng| SpaceExpr::id(ids.choose(rng).unwrap().clone());
    if depth == 0 || rng.gen_bool(0.55) {
        return leaf(rng);
    }
    match rng.gen_range(0..4) {
        0 => SpaceExpr::not(random_space_expr(rng, ids, depth - 1)),
        1 => SpaceExpr::and(random_space_expr(rng, ids, depth - 1), random_space_expr(rng, ids, depth - 1)),
        _ => SpaceExpr::or(random_space_expr(rng, ids, depth - 1), random_space_expr(rng, ids, depth - 1)),
    }
}

pub fn random_cond(rng: &mut ChaCha8Rng, ids: &[String], depth: u32) -> CondExpr {
    if depth == 0 || rng.gen_bool(0.5) {
        return match rng.gen_range(0..3) {
            0 => CondExpr::TodAfter(random_time(rng)),
            1 => CondExpr::TodBefore(random_time(rng)),
            _ => CondExpr::WhenInside(ids.choose(rng).unwrap().clone()),
        };
    }
    match rng.gen_range(0..3) {
        0 => CondExpr::not(random_cond(rng, ids, depth - 1)),
        1 => CondExpr::and(random_cond(rng, ids, depth - 1), random_cond(rng, ids, depth - 1)),
        _ => CondExpr::or(random_cond(rng, ids, depth - 1), random_cond(rng, ids, depth - 1)),
    }
}

pub fn random_policy(rng: &mut ChaCha8Rng, name: String, ids: &[String]) -> PolicyAst {
    let effect = if rng.gen_bool(0.65) { Effect::Allow } else { Effect::Deny };
    let mut p = PolicyAst::new(name, effect, random_space_expr(rng, ids, 2));
    if rng.gen_bool(0.6) {
        p.principal = Some(PRINCIPALS.choose(rng).unwrap().to_string());
    }
    if rng.gen_bool(0.5) {
        p.action = Some(random_action(rng));
    }
    if rng.gen_bool(0.5) {
        p.condition = Some(random_cond(rng, ids, 2));
    }
    p
}

pub fn random_policies(rng: &mut ChaCha8Rng, reg: &SpaceRegistry, max: usize) -> Vec<PolicyAst> {
    let ids: Vec<String> = reg.spaces().map(|s| s.id.clone()).collect();
    (0..rng.gen_range(1..=max)).map(|i| random_policy(rng, format!("p{i}"), &ids)).collect()
}

/// A point on the half-integer lattice around the grid, or anywhere inside it.
pub fn random_point(rng: &mut ChaCha8Rng) -> Point3 {
    if rng.gen_bool(0.5) {
        std::array::from_fn(|_| f64::from(rng.gen_range(-1..=9)) * 0.5)
    } else {
        std::array::from_fn(|_| rng.gen_range(-0.5..4.5))
    }
}

pub fn random_request(rng: &mut ChaCha8Rng) -> AccessRequest {
    let who = if rng.gen_bool(0.15) { "Dave" } else { PRINCIPALS.choose(rng).unwrap() };
    AccessRequest::new(who, random_action(rng), random_point(rng), random_point(rng), random_time(rng))
}

/// Per axis: every box face coordinate, the midpoints between consecutive
/// faces and one value beyond each end.
fn axis_samples(boxes: &[Box3], axis: usize) -> Vec<f64> {
    let mut v: Vec<f64> = boxes.iter().flat_map(|b| [b.min[axis], b.max[axis]]).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mut out = vec![v[0] - 1.0];
    for w in v.windows(2) {
        out.push(w[0]);
        out.push((w[0] + w[1]) / 2.0);
    }
    out.push(*v.last().unwrap());
    out.push(v.last().unwrap() + 1.0);
    out
}

/// One point per distinct membership pattern over `boxes`.
fn point_classes(boxes: &[Box3]) -> Vec<Point3> {
    if boxes.is_empty() {
        return vec![[0.0; 3]];
    }
    let axes: Vec<Vec<f64>> = (0..3).map(|a| axis_samples(boxes, a)).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for &x in &axes[0] {
        for &y in &axes[1] {
            for &z in &axes[2] {
                let p = [x, y, z];
                let key: Vec<bool> = boxes.iter().map(|b| b.contains_point(p)).collect();
                if seen.insert(key) {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn cond_times(c: &CondExpr, out: &mut Vec<TimeOfDay>) {
    match c {
        CondExpr::TodAfter(t) | CondExpr::TodBefore(t) => out.push(*t),
        CondExpr::WhenInside(_) => {}
        CondExpr::Not(x) => cond_times(x, out),
        CondExpr::And(l, r) | CondExpr::Or(l, r) => {
            cond_times(l, out);
            cond_times(r, out);
        }
    }
}

fn cond_user_spaces<'a>(c: &'a CondExpr, out: &mut Vec<&'a str>) {
    out.extend(c.space_ids());
}

/// One valid time of day per distinct pattern of `t >= x`, `t <= x` over the thresholds.
fn time_classes(thresholds: &[TimeOfDay]) -> Vec<TimeOfDay> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for v in 0..=2400u16 {
        let Some(t) = TimeOfDay::new(v) else { continue };
        let key: Vec<(bool, bool)> = thresholds.iter().map(|x| (t >= *x, t <= *x)).collect();
        if seen.insert(key) {
            out.push(t);
        }
    }
    out
}

/// Brute-force audit answers: evaluates the policy ASTs on one representative
/// request per region of the request space.
pub struct AuditOracle<'a> {
    pub reg: &'a SpaceRegistry,
    pub policies: &'a [PolicyAst],
}

struct Reps {
    principals: Vec<String>,
    points: Vec<Point3>,
    users: Vec<Point3>,
    times: Vec<TimeOfDay>,
}

impl<'a> AuditOracle<'a> {
    pub fn new(reg: &'a SpaceRegistry, policies: &'a [PolicyAst]) -> Self {
        AuditOracle { reg, policies }
    }

    pub fn known(&self) -> BTreeSet<String> {
        self.policies.iter().filter_map(|p| p.principal.clone()).collect()
    }

    fn chain(&self, id: &str) -> Vec<String> {
        std::iter::once(id.to_string())
            .chain(self.reg.ancestors(id).into_iter().map(str::to_string))
            .collect()
    }

    fn governing(&self, ids: &[String]) -> Vec<&'a PolicyAst> {
        self.policies.iter().filter(|p| mentions(p, ids)).collect()
    }

    fn reps(&self, extra: &[&PolicyAst], user_box: Option<Box3>, time: Option<TimeOfDay>) -> Reps {
        let all: Vec<&PolicyAst> = self.policies.iter().chain(extra.iter().copied()).collect();
        let mut principals: Vec<String> = all.iter().filter_map(|p| p.principal.clone()).collect();
        principals.sort();
        principals.dedup();
        principals.push(STRANGER.to_string());

        let boxes: Vec<Box3> = self.reg.spaces().map(|s| s.bbox).collect();
        let mut user_boxes: Vec<Box3> = Vec::new();
        let mut thresholds = Vec::new();
        for p in &all {
            if let Some(c) = &p.condition {
                let mut ids = Vec::new();
                cond_user_spaces(c, &mut ids);
                user_boxes.extend(ids.iter().map(|id| box_of(self.reg, id)));
                cond_times(c, &mut thresholds);
            }
        }
        user_boxes.extend(user_box);
        thresholds.extend(time);
        Reps {
            principals,
            points: point_classes(&boxes),
            users: point_classes(&user_boxes),
            times: time_classes(&thresholds),
        }
    }

    /// Calls `f` on every representative request with a point in `space`
    /// until it returns true.
    fn any_request(&self, reps: &Reps, space: &str, mut f: impl FnMut(&AccessRequest) -> bool) -> bool {
        let inside = box_of(self.reg, space);
        for who in &reps.principals {
            for action in Action::ALL {
                for p in reps.points.iter().filter(|p| inside.contains_point(**p)) {
                    for u in &reps.users {
                        for t in &reps.times {
                            if f(&AccessRequest::new(who.clone(), action, *p, *u, *t)) {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }

    fn report_name(&self, who: &str) -> String {
        if self.known().contains(who) {
            who.to_string()
        } else {
            "*".to_string()
        }
    }

    pub fn who(&self, space: &str, time: Option<TimeOfDay>, user_in: Option<&str>) -> BTreeSet<String> {
        let user_box = user_in.map(|id| box_of(self.reg, id));
        let reps = self.reps(&[], user_box, time);
        let gov = self.governing(&self.chain(space));
        let mut out = BTreeSet::new();
        self.any_request(&reps, space, |r| {
            let ctx = time.is_none_or(|t| r.time == t) && user_box.is_none_or(|b| b.contains_point(r.user_location));
            if ctx && allowed_by(gov.iter().copied(), self.reg, r) {
                out.insert(self.report_name(&r.principal));
            }
            false
        });
        out
    }

    pub fn too_weak(&self, space: &str) -> bool {
        let reps = self.reps(&[], None, None);
        let gov = self.governing(&self.chain(space));
        !self.any_request(&reps, space, |r| !allowed_by(gov.iter().copied(), self.reg, r))
    }

    pub fn too_strong(&self, space: &str, owner: &str) -> bool {
        let reps = self.reps(&[], None, None);
        let gov = self.governing(&self.chain(space));
        let mut owner_reps = reps;
        owner_reps.principals = vec![owner.to_string()];
        !self.any_request(&owner_reps, space, |r| allowed_by(gov.iter().copied(), self.reg, r))
    }

    pub fn new_allow_effective(&self, policy: &PolicyAst) -> bool {
        let reps = self.reps(&[policy], None, None);
        policy.space.ids().into_iter().any(|id| {
            let old = self.governing(&self.chain(id));
            let new: Vec<&PolicyAst> = old.iter().copied().chain(std::iter::once(policy)).collect();
            self.any_request(&reps, id, |r| {
                allowed_by(new.iter().copied(), self.reg, r) && !allowed_by(old.iter().copied(), self.reg, r)
            })
        })
    }

    pub fn conflicts(&self, space: &str) -> BTreeSet<String> {
        let reps = self.reps(&[], None, None);
        let gov = self.governing(&self.chain(space));
        let mut out = BTreeSet::new();
        self.any_request(&reps, space, |r| {
            let hit = |e: Effect| gov.iter().any(|p| p.effect == e && policy_matches(p, self.reg, r));
            if hit(Effect::Allow) && hit(Effect::Deny) {
                out.insert(self.report_name(&r.principal));
            }
            false
        });
        out
    }

    pub fn more_permissive(&self, space: &str) -> bool {
        let reps = self.reps(&[], None, None);
        let own = self.governing(&[space.to_string()]);
        let inherited = self.governing(&self.chain(space)[1..]);
        self.any_request(&reps, space, |r| {
            allowed_by(own.iter().copied(), self.reg, r) && !allowed_by(inherited.iter().copied(), self.reg, r)
        })
    }
}

/// Records every query and checks each witness against its formula.
#[derive(Default)]
pub struct Checked {
    pub inner: RegionSolver,
    pub calls: RefCell<usize>,
    pub bad: RefCell<Vec<String>>,
}

impl SatBackend for Checked {
    fn solve(&self, f: &Formula, known: &BTreeSet<String>, allow_fresh: bool) -> Result<Option<Assignment>, AuditError> {
        *self.calls.borrow_mut() += 1;
        let out = self.inner.solve(f, known, allow_fresh)?;
        if let Some(w) = &out {
            if !w.satisfies(f) {
                self.bad.borrow_mut().push(format!("{w:?} does not satisfy {f}"));
            }
            let named = known.contains(&w.principal) || f.principals().contains(&w.principal);
            if w.principal_is_fresh == named || (w.principal_is_fresh && !allow_fresh) {
                self.bad.borrow_mut().push(format!("bad principal choice {w:?}"));
            }
        }
        Ok(out)
    }
}

pub fn store(reg: SpaceRegistry, policies: &[PolicyAst]) -> PolicyStore {
    PolicyStore::with_policies(Arc::new(reg), policies.to_vec()).unwrap()
}

pub fn set(v: &[String]) -> BTreeSet<String> {
    v.iter().cloned().collect()
}

/// One randomized audit instance compared with the oracle; returns a
/// description of the mismatch, if any.
pub fn audit_instance(rng: &mut ChaCha8Rng) -> Option<String> {
    let reg = random_registry(rng);
    let ps = random_policies(rng, &reg, 4);
    let s = store(reg.clone(), &ps);
    let a = Auditor::with_backend(&s, Checked::default());
    let oracle = AuditOracle::new(&reg, &ps);
    let ids: Vec<String> = reg.spaces().map(|x| x.id.clone()).collect();
    let space = ids.choose(rng).unwrap().clone();
    let kind = rng.gen_range(0..6);
    let (got, want) = match kind {
        0 => {
            let time = rng.gen_bool(0.4).then(|| random_time(rng));
            let user_in = rng.gen_bool(0.4).then(|| ids.choose(rng).unwrap().clone());
            let mut ctx = Vec::new();
            if let Some(t) = time {
                ctx.push(Formula::time_in(t, t));
            }
            if let Some(u) = &user_in {
                ctx.push(Formula::user_in(reg.box_of(u).unwrap()));
            }
            let ctx = (!ctx.is_empty()).then(|| Formula::and(ctx));
            let r = a.list_principals_with_access(&space, ctx.as_ref()).unwrap();
            (format!("{:?}", set(r.principals().unwrap())), format!("{:?}", oracle.who(&space, time, user_in.as_deref())))
        }
        1 => (
            format!("{:?}", a.check_too_weak(&space).unwrap().as_bool().unwrap()),
            format!("{:?}", oracle.too_weak(&space)),
        ),
        2 => {
            let owner = *["Alice", "Bob", "Carol", "Dave"].choose(rng).unwrap();
            (
                format!("{:?}", a.check_too_strong(&space, owner).unwrap().as_bool().unwrap()),
                format!("{:?}", oracle.too_strong(&space, owner)),
            )
        }
        3 => {
            let mut p = random_policy(rng, "candidate".into(), &ids);
            p.effect = Effect::Allow;
            (
                format!("{:?}", a.check_new_allow_effective(&p).unwrap().as_bool().unwrap()),
                format!("{:?}", oracle.new_allow_effective(&p)),
            )
        }
        4 => (
            format!("{:?}", set(a.find_allow_deny_conflicts(&space).unwrap().principals().unwrap())),
            format!("{:?}", oracle.conflicts(&space)),
        ),
        _ => (
            format!("{:?}", a.check_more_permissive_than_parent(&space).unwrap().as_bool().unwrap()),
            format!("{:?}", oracle.more_permissive(&space)),
        ),
    };
    let bad = a.backend().bad.borrow();
    if got != want || !bad.is_empty() {
        return Some(format!("query {kind} on {space}: got {got}, oracle {want}, witness issues {bad:?}\n{ps:#?}"));
    }
    None
}

fn random_box(rng: &mut ChaCha8Rng) -> Box3 {
    let mut b = [0.0; 6];
    for axis in 0..3 {
        let lo = f64::from(rng.gen_range(0..4)) + if rng.gen_bool(0.2) { 0.5 } else { 0.0 };
        let hi = lo + f64::from(rng.gen_range(1..3));
        b[2 * axis] = lo;
        b[2 * axis + 1] = hi;
    }
    Box3::from_bounds(b)
}

/// A random formula over every atom kind, with small integer boxes so that
/// overlaps and shared faces are common.
pub fn random_formula(rng: &mut ChaCha8Rng, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..6) {
            0 => Formula::principal(*PRINCIPALS.choose(rng).unwrap()),
            1 => Formula::action(random_action(rng)),
            2 => Formula::point_in(random_box(rng)),
            3 => Formula::user_in(random_box(rng)),
            4 => {
                let (a, b) = (random_time(rng), random_time(rng));
                Formula::time_in(a.min(b), a.max(b))
            }
            _ => {
                if rng.gen_bool(0.5) {
                    Formula::True
                } else {
                    Formula::False
                }
            }
        };
    }
    match rng.gen_range(0..4) {
        0 => Formula::not(random_formula(rng, depth - 1)),
        1 => {
            let n = rng.gen_range(2..4);
            Formula::And((0..n).map(|_| random_formula(rng, depth - 1)).collect())
        }
        2 => {
            let n = rng.gen_range(2..4);
            Formula::Or((0..n).map(|_| random_formula(rng, depth - 1)).collect())
        }
        _ => {
            // A contradiction or tautology hidden behind one level.
            let g = random_formula(rng, depth - 1);
            if rng.gen_bool(0.5) {
                Formula::And(vec![g.clone(), Formula::not(g)])
            } else {
                Formula::not(Formula::Or(vec![g.clone(), Formula::not(g)]))
            }
        }
    }
}

/// Simplifies and then sorts every `And`/`Or` child list by its printed form,
/// so that formulas equal up to associativity and ordering compare equal.
pub fn normalize(f: &Formula) -> Formula {
    fn sort(f: Formula) -> Formula {
        match f {
            Formula::Not(g) => Formula::not(sort(*g)),
            Formula::And(gs) => {
                let mut gs: Vec<Formula> = gs.into_iter().map(sort).collect();
                gs.sort_by_key(|g| g.to_string());
                Formula::And(gs)
            }
            Formula::Or(gs) => {
                let mut gs: Vec<Formula> = gs.into_iter().map(sort).collect();
                gs.sort_by_key(|g| g.to_string());
                Formula::Or(gs)
            }
            f => f,
        }
    }
    sort(vmac_core::formula::simplify(f))
}

fn house_request(who: &str, room: &str, user_room: &str, hhmm: u16) -> AccessRequest {
    let reg = vmac_core::harness::house_registry();
    AccessRequest::new(
        who,
        Action::Read,
        reg.box_of(room).unwrap().center(),
        reg.box_of(user_room).unwrap().center(),
        TimeOfDay::new(hhmm).unwrap(),
    )
}

/// The three house policies translated and combined for a point in the
/// master bathroom, checked against hand-built formulas, plus the four
/// example verdicts. Returns the first discrepancy.
pub fn worked_example() -> Result<(), String> {
    use vmac_core::harness::{house_registry, HOUSE_POLICIES};

    let reg = Arc::new(house_registry());
    let ps = vmac_core::parse_policies(HOUSE_POLICIES).map_err(|e| e.to_string())?;
    let engine = vmac_core::DecisionEngine::uncached(
        PolicyStore::with_policies(reg.clone(), ps.clone()).map_err(|e| e.to_string())?,
    );
    let pt = |id: &str| Formula::point_in(reg.box_of(id).unwrap());
    let first = Formula::and([
        Formula::principal("Alice"),
        Formula::action(Action::Read),
        Formula::or([pt("first_floor_all"), pt("second_floor_all"), pt("staircase")]),
    ]);
    let second = Formula::and([
        Formula::principal("Bob"),
        Formula::action(Action::Read),
        Formula::or([pt("recreation_area"), pt("small_bedroom_2")]),
        Formula::user_in(reg.box_of("second_floor_all").unwrap()),
        Formula::time_in(TimeOfDay::new(900).unwrap(), TimeOfDay::END_OF_DAY),
    ]);
    let third = Formula::not(Formula::or([pt("guest_bathroom"), pt("shared_bathroom"), pt("master_bathroom")]));
    let names = ["GrantAliceAllAccess", "GrantBobAccessToGuestArea", "DenyAccessToBathroom"];
    for (name, want) in names.iter().zip([&first, &second, &third]) {
        let got = engine.store().formula(name).ok_or(format!("no formula for {name}"))?;
        if normalize(&got) != normalize(want) {
            return Err(format!("{name}: got {got}, expected {want}"));
        }
    }
    let bath = reg.box_of("master_bathroom").unwrap().center();
    let combined = engine.point_formula(&reg.enclosing_indices(bath));
    let want = Formula::And(vec![Formula::Or(vec![first, second]), third]);
    if normalize(&combined) != normalize(&want) {
        return Err(format!("combined: got {combined}, expected {want}"));
    }

    let cases = [
        (house_request("Alice", "living_room", "living_room", 1200), true, false),
        (house_request("Alice", "master_bathroom", "master_bedroom", 1200), false, false),
        (house_request("Bob", "recreation_area", "small_bedroom_1", 900), true, true),
        (house_request("Bob", "recreation_area", "small_bedroom_1", 1430), true, true),
        (house_request("Bob", "recreation_area", "small_bedroom_1", 800), false, true),
    ];
    for (req, want, confirm) in cases {
        let got = engine.decide(&req).is_allow();
        if got != want {
            return Err(format!("{req:?}: decided {got}, expected {want}"));
        }
        if confirm && naive_decide(&reg, &ps, &req) != want {
            return Err(format!("{req:?}: interpreter disagrees"));
        }
    }
    let alice_bath = house_request("Alice", "master_bathroom", "master_bedroom", 1200);
    if vmac_core::formula::evaluate(&combined, &alice_bath) {
        return Err("the combined bathroom formula admits Alice".into());
    }
    Ok(())
}

/// Compares the external solver with the internal procedure on `n` random
/// formulas. `Ok(None)` when no external solver is installed.
pub fn smt_differential(rng: &mut ChaCha8Rng, n: usize) -> Result<Option<(usize, usize)>, String> {
    use vmac_core::audit::{export_smtlib, find_external_solver, run_external_solver, ExternalVerdict};

    let Some(solver) = find_external_solver() else {
        return Ok(None);
    };
    let internal = RegionSolver::new(256);
    let mut sat = 0;
    for _ in 0..n {
        let f = random_formula(rng, 4);
        let mine = internal.solve(&f, &BTreeSet::new(), true).map_err(|e| e.to_string())?;
        if let Some(w) = &mine {
            if !w.satisfies(&f) {
                return Err(format!("witness {w:?} does not satisfy {f}"));
            }
        }
        let theirs = run_external_solver(&solver, &export_smtlib(&f)).map_err(|e| e.to_string())?;
        let agree = match theirs {
            ExternalVerdict::Sat => mine.is_some(),
            ExternalVerdict::Unsat => mine.is_none(),
            ExternalVerdict::Other(msg) => return Err(format!("solver answered `{msg}` for {f}")),
        };
        if !agree {
            return Err(format!("external {theirs:?}, internal {} for {f}", mine.is_some()));
        }
        sat += usize::from(mine.is_some());
    }
    Ok(Some((sat, n - sat)))
}
