//! SMT-LIB v2 rendering of request formulas, for cross-checking with an
//! external solver.

use std::fmt::Write as _;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use super::solver::fresh_name;
use crate::formula::{Atom, Formula};
use crate::lang::Action;
use crate::space::Box3;

const RESERVED: &[&str] = &[
    "Principal", "Action", "s_principal", "s_action", "x", "y", "z", "ux", "uy", "uz", "t", "read", "write",
    "localize", "true", "false", "not", "and", "or", "ite", "let", "forall", "exists", "match", "par", "as",
    "mod", "div", "abs", "distinct", "BINARY", "DECIMAL", "HEXADECIMAL", "NUMERAL", "STRING", "Int", "Real",
    "Bool",
];

/// A script that is `sat` exactly when `f` has a witness.
///
/// The principal sort has one constructor per principal named in `f` and
/// one more for everyone else. Times are integers `0..=2400` whose last two
/// digits are below 60.
pub fn export_smtlib(f: &Formula) -> String {
    let mentioned = f.principals();
    let fresh = fresh_name(&mentioned);
    let mut out = String::new();
    out.push_str("(set-logic ALL)\n");
    out.push_str("(declare-datatype Principal (");
    for (i, p) in mentioned.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "({})", principal_symbol(p));
    }
    if !mentioned.is_empty() {
        out.push(' ');
    }
    let _ = writeln!(out, "(|fresh:{}|)))", escape(&fresh));
    out.push_str("(declare-datatype Action (");
    let actions: Vec<String> = Action::ALL.iter().map(|a| format!("({})", a.as_str())).collect();
    out.push_str(&actions.join(" "));
    out.push_str("))\n");
    out.push_str("(declare-const s_principal Principal)\n(declare-const s_action Action)\n");
    for v in ["x", "y", "z", "ux", "uy", "uz"] {
        let _ = writeln!(out, "(declare-const {v} Real)");
    }
    out.push_str("(declare-const t Int)\n");
    out.push_str("(assert (and (<= 0 t) (<= t 2400) (< (mod t 100) 60)))\n");
    out.push_str("(assert ");
    render(f, &mut out);
    out.push_str(")\n(check-sat)\n");
    out
}

fn is_simple(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&name)
}

fn principal_symbol(name: &str) -> String {
    if is_simple(name) {
        name.to_string()
    } else {
        format!("|p:{}|", escape(name))
    }
}

/// Percent-encodes everything a quoted symbol cannot hold.
fn escape(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for b in name.bytes() {
        if (0x20..0x7f).contains(&b) && !matches!(b, b'|' | b'\\' | b'%') {
            out.push(b as char);
        } else {
            let _ = write!(out, "%{b:02X}");
        }
    }
    out
}

fn real(v: f64) -> String {
    let abs = v.abs();
    let mut s = format!("{abs}");
    if !s.contains('.') {
        s.push_str(".0");
    }
    if v < 0.0 {
        format!("(- {s})")
    } else {
        s
    }
}

fn box_constraint(b: &Box3, vars: [&str; 3], out: &mut String) {
    out.push_str("(and");
    for (axis, v) in vars.iter().enumerate() {
        let _ = write!(out, " (<= {} {v}) (<= {v} {})", real(b.min[axis]), real(b.max[axis]));
    }
    out.push(')');
}

fn render(f: &Formula, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom(a) => match a {
            Atom::PrincipalEq(p) => {
                let _ = write!(out, "(= s_principal {})", principal_symbol(p));
            }
            Atom::ActionEq(act) => {
                let _ = write!(out, "(= s_action {})", act.as_str());
            }
            Atom::PointInBox(b) => box_constraint(b, ["x", "y", "z"], out),
            Atom::UserInBox(b) => box_constraint(b, ["ux", "uy", "uz"], out),
            Atom::TimeInRange(lo, hi) => {
                let _ = write!(out, "(and (<= {} t) (<= t {}))", lo.value(), hi.value());
            }
        },
        Formula::Not(g) => {
            out.push_str("(not ");
            render(g, out);
            out.push(')');
        }
        Formula::And(gs) | Formula::Or(gs) => {
            let (op, unit) = if matches!(f, Formula::And(_)) {
                ("and", "true")
            } else {
                ("or", "false")
            };
            match gs.as_slice() {
                [] => out.push_str(unit),
                [g] => render(g, out),
                _ => {
                    let _ = write!(out, "({op}");
                    for g in gs {
                        out.push(' ');
                        render(g, out);
                    }
                    out.push(')');
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExternalVerdict {
    Sat,
    Unsat,
    Other(String),
}

/// The solver named by `VMAC_SMT_SOLVER`, else `z3` or `cvc5` from `PATH`.
pub fn find_external_solver() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os("VMAC_SMT_SOLVER") {
        return Some(PathBuf::from(p));
    }
    let path = std::env::var_os("PATH")?;
    let dirs: Vec<PathBuf> = std::env::split_paths(&path).collect();
    ["z3", "cvc5"]
        .iter()
        .flat_map(|exe| dirs.iter().map(move |d| d.join(exe)))
        .find(|c| c.is_file())
}

/// Feeds `script` to `solver` on stdin and reads its first answer line.
pub fn run_external_solver(solver: &Path, script: &str) -> io::Result<ExternalVerdict> {
    let name = solver.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let args: &[&str] = if name.starts_with("cvc") { &["--lang=smt2"] } else { &["-in"] };
    let mut child = Command::new(solver)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()?;
    child.stdin.take().expect("piped stdin").write_all(script.as_bytes())?;
    let output = child.wait_with_output()?;
    let text = String::from_utf8_lossy(&output.stdout);
    let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or_default();
    Ok(match first {
        "sat" => ExternalVerdict::Sat,
        "unsat" => ExternalVerdict::Unsat,
        other => ExternalVerdict::Other(format!("{other} {}", String::from_utf8_lossy(&output.stderr).trim())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::TimeOfDay;

    #[test]
    fn simple_principal_is_bare() {
        let s = export_smtlib(&Formula::principal("Alice"));
        assert!(s.contains("(assert (= s_principal Alice))"));
        assert!(s.contains("(declare-datatype Principal ((Alice) (|fresh:anyone_else|)))"));
        assert!(s.trim_end().ends_with("(check-sat)"));
    }

    #[test]
    fn awkward_principals_are_quoted() {
        let f = Formula::or([
            Formula::principal("read"),
            Formula::principal("a b|c"),
            Formula::principal("Zoë"),
        ]);
        let s = export_smtlib(&f);
        assert!(s.contains("|p:read|"));
        assert!(s.contains("|p:a b%7Cc|"));
        assert!(s.contains("|p:Zo%C3%AB|"));
        assert_eq!(s.lines().nth(1).unwrap().matches(") (").count(), 3);
    }

    #[test]
    fn reals_and_times() {
        let f = Formula::and([
            Formula::point_in(Box3::new(-1.5, 2., 0., 1., 0., 3.)),
            Formula::time_in(TimeOfDay::new(900).unwrap(), TimeOfDay::END_OF_DAY),
        ]);
        let s = export_smtlib(&f);
        assert!(s.contains("(<= (- 1.5) x) (<= x 2.0)"));
        assert!(s.contains("(and (<= 900 t) (<= t 2400))"));
    }
}
