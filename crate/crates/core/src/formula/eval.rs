use super::ir::{AccessRequest, Atom, Formula};

pub fn eval_atom(atom: &Atom, req: &AccessRequest) -> bool {
    match atom {
        Atom::PrincipalEq(p) => *p == req.principal,
        Atom::ActionEq(a) => *a == req.action,
        Atom::PointInBox(b) => b.contains_point(req.point),
        Atom::UserInBox(b) => b.contains_point(req.user_location),
        Atom::TimeInRange(lo, hi) => *lo <= req.time && req.time <= *hi,
    }
}

/// Substitutes the request into every atom and folds the connectives.
pub fn evaluate(formula: &Formula, req: &AccessRequest) -> bool {
    match formula {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => eval_atom(a, req),
        Formula::Not(f) => !evaluate(f, req),
        Formula::And(fs) => fs.iter().all(|f| evaluate(f, req)),
        Formula::Or(fs) => fs.iter().any(|f| evaluate(f, req)),
    }
}

/// Bottom-up canonicalisation: folds constants, removes double negation and
/// splices nested `And`/`Or`. The result is either a constant or contains no
/// constants, and every `And`/`Or` has at least two children.
pub fn simplify(formula: &Formula) -> Formula {
    match formula {
        Formula::True | Formula::False | Formula::Atom(_) => formula.clone(),
        Formula::Not(inner) => match simplify(inner) {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(g) => *g,
            g => Formula::Not(Box::new(g)),
        },
        Formula::And(fs) => {
            let mut out = Vec::with_capacity(fs.len());
            for f in fs {
                match simplify(f) {
                    Formula::True => {}
                    Formula::False => return Formula::False,
                    Formula::And(inner) => out.extend(inner),
                    g => out.push(g),
                }
            }
            Formula::and(out)
        }
        Formula::Or(fs) => {
            let mut out = Vec::with_capacity(fs.len());
            for f in fs {
                match simplify(f) {
                    Formula::False => {}
                    Formula::True => return Formula::True,
                    Formula::Or(inner) => out.extend(inner),
                    g => out.push(g),
                }
            }
            Formula::or(out)
        }
    }
}
