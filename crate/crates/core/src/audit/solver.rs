//! Complete satisfiability check for formulas over request variables.
//!
//! Every atom is a closed-interval constraint on one variable per axis (box
//! atoms are a conjunction of three such constraints) or an equality over a
//! finite label domain. Truth values are therefore constant on the
//! elementary intervals between atom endpoints, and sampling one value per
//! elementary interval plus every endpoint decides the formula.
//!
//! Variables are fixed one at a time in the order principal, action, time,
//! user location, map point. After each choice the formula is partially
//! evaluated, and the samples for the next variable come only from the atoms
//! still undecided, so most branches are cut early.

use std::collections::BTreeSet;

use serde::Serialize;

use super::AuditError;
use crate::formula::{evaluate, AccessRequest, Atom, Formula};
use crate::lang::{Action, TimeOfDay};
use crate::space::{Box3, Point3};

pub const DEFAULT_ATOM_BUDGET: usize = 64;

/// A satisfying request.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assignment {
    pub principal: String,
    /// The principal stands for every name the formula and the known set
    /// do not mention.
    pub principal_is_fresh: bool,
    pub action: Action,
    pub point: Point3,
    pub user_location: Point3,
    pub time: TimeOfDay,
}

impl Assignment {
    pub fn to_request(&self) -> AccessRequest {
        AccessRequest::new(
            self.principal.clone(),
            self.action,
            self.point,
            self.user_location,
            self.time,
        )
    }

    pub fn satisfies(&self, f: &Formula) -> bool {
        evaluate(f, &self.to_request())
    }
}

/// Something that can decide satisfiability of request formulas.
pub trait SatBackend {
    /// A witness for `f`, drawing principals from `known`, the names in `f`
    /// and, when `allow_fresh`, one name outside both.
    fn solve(
        &self,
        f: &Formula,
        known: &BTreeSet<String>,
        allow_fresh: bool,
    ) -> Result<Option<Assignment>, AuditError>;
}

#[derive(Clone, Copy, Debug)]
pub struct RegionSolver {
    pub atom_budget: usize,
}

impl Default for RegionSolver {
    fn default() -> Self {
        RegionSolver {
            atom_budget: DEFAULT_ATOM_BUDGET,
        }
    }
}

impl RegionSolver {
    pub fn new(atom_budget: usize) -> Self {
        RegionSolver { atom_budget }
    }

    pub fn is_satisfiable(&self, f: &Formula, known: &BTreeSet<String>) -> Result<Option<Assignment>, AuditError> {
        self.solve(f, known, true)
    }

    /// `f` implies `g` iff `f ∧ ¬g` has no witness.
    pub fn implies(&self, f: &Formula, g: &Formula, known: &BTreeSet<String>) -> Result<bool, AuditError> {
        let q = Formula::and([f.clone(), Formula::not(g.clone())]);
        Ok(self.solve(&q, known, true)?.is_none())
    }
}

impl SatBackend for RegionSolver {
    fn solve(
        &self,
        f: &Formula,
        known: &BTreeSet<String>,
        allow_fresh: bool,
    ) -> Result<Option<Assignment>, AuditError> {
        let atoms = f.atom_count();
        if atoms > self.atom_budget {
            return Err(AuditError::AtomBudget {
                atoms,
                budget: self.atom_budget,
            });
        }
        let mentioned = f.principals();
        let mut names: BTreeSet<String> = known.clone();
        names.extend(mentioned.iter().cloned());
        let fresh = fresh_name(&names);

        let mut search = Search {
            partial: Partial::default(),
        };
        let root = restrict(f, &search.partial);

        // Principals the formula never names all behave alike, so only the
        // first of them is searched.
        let mut unmentioned_tried = false;
        let candidates = names
            .iter()
            .map(|n| (n.clone(), false))
            .chain(allow_fresh.then(|| (fresh.clone(), true)));
        for (name, is_fresh) in candidates {
            let named = mentioned.contains(&name);
            if !named {
                if unmentioned_tried {
                    continue;
                }
                unmentioned_tried = true;
            }
            search.partial.principal = Some(name.clone());
            let residual = restrict(&root, &search.partial);
            if let Some(mut w) = search.from_action(&residual) {
                w.principal = name;
                w.principal_is_fresh = is_fresh;
                debug_assert!(w.satisfies(f));
                return Ok(Some(w));
            }
        }
        Ok(None)
    }
}

/// A name outside `taken`, stable for a given set.
pub(crate) fn fresh_name(taken: &BTreeSet<String>) -> String {
    let base = "anyone_else";
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken.contains(n))
        .unwrap()
}

#[derive(Clone, Debug, Default)]
struct Partial {
    principal: Option<String>,
    action: Option<Action>,
    time: Option<TimeOfDay>,
    user: [Option<f64>; 3],
    point: [Option<f64>; 3],
}

impl Partial {
    fn complete(&self) -> Assignment {
        let fill = |v: [Option<f64>; 3]| v.map(|c| c.unwrap_or(0.0));
        Assignment {
            principal: self.principal.clone().unwrap_or_default(),
            principal_is_fresh: false,
            action: self.action.unwrap_or(Action::Read),
            point: fill(self.point),
            user_location: fill(self.user),
            time: self.time.unwrap_or(TimeOfDay::MIDNIGHT),
        }
    }
}

#[derive(Clone, Copy)]
enum Var {
    Time,
    User(usize),
    Point(usize),
}

const REAL_VARS: [Var; 7] = [
    Var::Time,
    Var::User(0),
    Var::User(1),
    Var::User(2),
    Var::Point(0),
    Var::Point(1),
    Var::Point(2),
];

struct Search {
    partial: Partial,
}

impl Search {
    fn from_action(&mut self, f: &Formula) -> Option<Assignment> {
        match f {
            Formula::True => return Some(self.partial.complete()),
            Formula::False => return None,
            _ => {}
        }
        for a in Action::ALL {
            self.partial.action = Some(a);
            let residual = restrict(f, &self.partial);
            if let Some(w) = self.from_var(&residual, 0) {
                return Some(w);
            }
        }
        self.partial.action = None;
        None
    }

    fn from_var(&mut self, f: &Formula, k: usize) -> Option<Assignment> {
        match f {
            Formula::True => return Some(self.partial.complete()),
            Formula::False => return None,
            _ => {}
        }
        let var = *REAL_VARS.get(k)?;
        match var {
            Var::Time => {
                for t in time_samples(f) {
                    self.partial.time = Some(t);
                    let residual = restrict(f, &self.partial);
                    if let Some(w) = self.from_var(&residual, k + 1) {
                        return Some(w);
                    }
                }
                self.partial.time = None;
            }
            Var::User(axis) | Var::Point(axis) => {
                let user = matches!(var, Var::User(_));
                for v in axis_samples(f, user, axis) {
                    self.slot(user, axis, Some(v));
                    let residual = restrict(f, &self.partial);
                    if let Some(w) = self.from_var(&residual, k + 1) {
                        return Some(w);
                    }
                }
                self.slot(user, axis, None);
            }
        }
        None
    }

    fn slot(&mut self, user: bool, axis: usize, v: Option<f64>) {
        if user {
            self.partial.user[axis] = v;
        } else {
            self.partial.point[axis] = v;
        }
    }
}

/// Every endpoint of the time atoms still in `f`, plus the first valid HHMM
/// inside each gap between consecutive endpoints.
fn time_samples(f: &Formula) -> Vec<TimeOfDay> {
    let mut ends: BTreeSet<u16> = [0, 2400].into_iter().collect();
    f.visit_atoms(&mut |a| {
        if let Atom::TimeInRange(lo, hi) = a {
            ends.insert(lo.value());
            ends.insert(hi.value());
        }
    });
    let ends: Vec<u16> = ends.into_iter().collect();
    let mut out = Vec::with_capacity(ends.len() * 2);
    for (i, &e) in ends.iter().enumerate() {
        out.push(TimeOfDay::new(e).expect("endpoints are valid times"));
        if let Some(&next) = ends.get(i + 1) {
            if let Some(mid) = (e + 1..next).find_map(TimeOfDay::new) {
                out.push(mid);
            }
        }
    }
    out
}

/// Endpoints of the still-undecided box atoms on one axis, midpoints between
/// them, and one value beyond each end.
fn axis_samples(f: &Formula, user: bool, axis: usize) -> Vec<f64> {
    let mut ends: Vec<f64> = Vec::new();
    f.visit_atoms(&mut |a| match (a, user) {
        (Atom::PointInBox(b), false) | (Atom::UserInBox(b), true) => {
            ends.push(b.min[axis]);
            ends.push(b.max[axis]);
        }
        _ => {}
    });
    if ends.is_empty() {
        return vec![0.0];
    }
    ends.sort_by(f64::total_cmp);
    ends.dedup();
    let mut out = Vec::with_capacity(ends.len() * 2 + 1);
    out.push(ends[0] - 1.0);
    for (i, &e) in ends.iter().enumerate() {
        out.push(e);
        if let Some(&next) = ends.get(i + 1) {
            out.push(e + (next - e) / 2.0);
        }
    }
    out.push(ends[ends.len() - 1] + 1.0);
    out
}

/// Three-valued truth of an atom under a partial assignment.
fn atom_truth(a: &Atom, p: &Partial) -> Option<bool> {
    let in_box = |b: &Box3, coords: &[Option<f64>; 3]| {
        let mut all_known = true;
        for axis in 0..3 {
            match coords[axis] {
                Some(v) if v < b.min[axis] || v > b.max[axis] => return Some(false),
                Some(_) => {}
                None => all_known = false,
            }
        }
        all_known.then_some(true)
    };
    match a {
        Atom::PrincipalEq(name) => p.principal.as_ref().map(|v| v == name),
        Atom::ActionEq(act) => p.action.map(|v| v == *act),
        Atom::TimeInRange(lo, hi) => p.time.map(|t| *lo <= t && t <= *hi),
        Atom::PointInBox(b) => in_box(b, &p.point),
        Atom::UserInBox(b) => in_box(b, &p.user),
    }
}

/// Substitutes the assigned variables and folds what became constant.
fn restrict(f: &Formula, p: &Partial) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(a) => match atom_truth(a, p) {
            Some(true) => Formula::True,
            Some(false) => Formula::False,
            None => f.clone(),
        },
        Formula::Not(g) => match restrict(g, p) {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            r => Formula::not(r),
        },
        Formula::And(gs) => {
            let mut out = Vec::with_capacity(gs.len());
            for g in gs {
                match restrict(g, p) {
                    Formula::True => {}
                    Formula::False => return Formula::False,
                    r => out.push(r),
                }
            }
            Formula::and(out)
        }
        Formula::Or(gs) => {
            let mut out = Vec::with_capacity(gs.len());
            for g in gs {
                match restrict(g, p) {
                    Formula::False => {}
                    Formula::True => return Formula::True,
                    r => out.push(r),
                }
            }
            Formula::or(out)
        }
    }
}
