use std::collections::BTreeSet;
use std::fmt;

use crate::lang::{quote, Action, TimeOfDay};
use crate::space::{Box3, Point3};

/// Ground constraints over the request variables: the principal and action
/// labels, the map point, the user location and the time of day.
#[derive(Clone, Debug, PartialEq)]
pub enum Atom {
    PrincipalEq(String),
    ActionEq(Action),
    PointInBox(Box3),
    UserInBox(Box3),
    /// `lo <= t <= hi`, both ends inclusive.
    TimeInRange(TimeOfDay, TimeOfDay),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    pub fn principal(name: impl Into<String>) -> Self {
        Formula::Atom(Atom::PrincipalEq(name.into()))
    }

    pub fn action(a: Action) -> Self {
        Formula::Atom(Atom::ActionEq(a))
    }

    pub fn point_in(b: Box3) -> Self {
        Formula::Atom(Atom::PointInBox(b))
    }

    pub fn user_in(b: Box3) -> Self {
        Formula::Atom(Atom::UserInBox(b))
    }

    pub fn time_in(lo: TimeOfDay, hi: TimeOfDay) -> Self {
        Formula::Atom(Atom::TimeInRange(lo, hi))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Conjunction with nested `And`s spliced in. No constant folding; an
    /// empty list gives `True` and a singleton its only element.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::And(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction counterpart of [`Formula::and`]; empty gives `False`.
    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::Or(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn atom_count(&self) -> usize {
        match self {
            Formula::True | Formula::False => 0,
            Formula::Atom(_) => 1,
            Formula::Not(f) => f.atom_count(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::atom_count).sum(),
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::Not(g) => g.visit_atoms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(f)),
        }
    }

    /// Principal names compared against anywhere in the formula.
    pub fn principals(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            if let Atom::PrincipalEq(p) = a {
                out.insert(p.clone());
            }
        });
        out
    }
}

pub(crate) fn fmt_bounds(b: &Box3) -> String {
    let v = b.bounds();
    format!("[{} {} {} {} {} {}]", v[0], v[1], v[2], v[3], v[4], v[5])
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::PrincipalEq(p) => write!(f, "(= principal {})", quote(p)),
            Atom::ActionEq(a) => write!(f, "(= action {a})"),
            Atom::PointInBox(b) => write!(f, "(point-in {})", fmt_bounds(b)),
            Atom::UserInBox(b) => write!(f, "(user-in {})", fmt_bounds(b)),
            Atom::TimeInRange(lo, hi) => write!(f, "(time-in {lo} {hi})"),
        }
    }
}

/// Deterministic s-expression form, e.g.
/// `(and (= principal "Alice") (= action read) (point-in [0 10 0 10 0 3]))`.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, op: &str, gs: &[Formula]| {
            write!(f, "({op}")?;
            for g in gs {
                write!(f, " {g}")?;
            }
            write!(f, ")")
        };
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) => list(f, "and", gs),
            Formula::Or(gs) => list(f, "or", gs),
        }
    }
}

/// An access request: who asks for what on which map point, from where, when.
#[derive(Clone, Debug, PartialEq)]
pub struct AccessRequest {
    pub principal: String,
    pub action: Action,
    pub point: Point3,
    pub user_location: Point3,
    pub time: TimeOfDay,
}

impl AccessRequest {
    pub fn new(
        principal: impl Into<String>,
        action: Action,
        point: Point3,
        user_location: Point3,
        time: TimeOfDay,
    ) -> Self {
        AccessRequest {
            principal: principal.into(),
            action,
            point,
            user_location,
            time,
        }
    }
}
