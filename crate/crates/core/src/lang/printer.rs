use std::fmt::Write;

use super::ast::{CondExpr, PolicyAst, SpaceExpr};

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_UNARY: u8 = 3;

/// Renders policies in canonical surface syntax: one field per line, all
/// strings quoted, blocks separated by a blank line.
pub fn pretty_print(policies: &[PolicyAst]) -> String {
    let mut out = String::new();
    for (i, p) in policies.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_policy(&mut out, p);
    }
    out
}

fn write_policy(out: &mut String, p: &PolicyAst) {
    out.push_str("Begin\n");
    let _ = writeln!(out, "Name: {}", quote(&p.name));
    let _ = writeln!(out, "Effect: {}", p.effect);
    if let Some(principal) = &p.principal {
        let _ = writeln!(out, "Principal: {}", quote(principal));
    }
    if let Some(action) = p.action {
        let _ = writeln!(out, "Action: {action}");
    }
    out.push_str("Space: ");
    write_space(out, &p.space, PREC_OR);
    out.push('\n');
    if let Some(cond) = &p.condition {
        out.push_str("Condition: ");
        write_cond(out, cond, PREC_OR);
        out.push('\n');
    }
    out.push_str("End\n");
}

pub(crate) fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

// Binary operators parse left-associatively, so a same-precedence right
// operand needs parentheses to keep its shape.
fn write_space(out: &mut String, e: &SpaceExpr, min_prec: u8) {
    let (prec, op, l, r) = match e {
        SpaceExpr::Id(id) => {
            out.push_str(&quote(id));
            return;
        }
        SpaceExpr::Not(inner) => {
            out.push_str("Not ");
            write_space(out, inner, PREC_UNARY);
            return;
        }
        SpaceExpr::And(l, r) => (PREC_AND, "And", l, r),
        SpaceExpr::Or(l, r) => (PREC_OR, "Or", l, r),
    };
    let paren = prec < min_prec;
    if paren {
        out.push('(');
    }
    write_space(out, l, prec);
    let _ = write!(out, " {op} ");
    write_space(out, r, prec + 1);
    if paren {
        out.push(')');
    }
}

fn write_cond(out: &mut String, e: &CondExpr, min_prec: u8) {
    let (prec, op, l, r) = match e {
        CondExpr::TodAfter(t) => {
            let _ = write!(out, "TODAfter: {t}");
            return;
        }
        CondExpr::TodBefore(t) => {
            let _ = write!(out, "TODBefore: {t}");
            return;
        }
        CondExpr::WhenInside(id) => {
            let _ = write!(out, "UserInside: {}", quote(id));
            return;
        }
        CondExpr::Not(inner) => {
            out.push_str("Not ");
            write_cond(out, inner, PREC_UNARY);
            return;
        }
        CondExpr::And(l, r) => (PREC_AND, "And", l, r),
        CondExpr::Or(l, r) => (PREC_OR, "Or", l, r),
    };
    let paren = prec < min_prec;
    if paren {
        out.push('(');
    }
    write_cond(out, l, prec);
    let _ = write!(out, " {op} ");
    write_cond(out, r, prec + 1);
    if paren {
        out.push(')');
    }
}
