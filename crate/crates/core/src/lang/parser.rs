use std::collections::HashSet;

use super::ast::{Action, CondExpr, Effect, PolicyAst, SpaceExpr, TimeOfDay};
use super::lexer::{tokenize, Tok, Token};
use super::{ErrorKind, ParseError};

const FIELDS: [&str; 6] = ["Name", "Effect", "Principal", "Action", "Space", "Condition"];

/// Parses every `Begin ... End` block of `source` in order.
///
/// A block whose `Action:` field lists several actions expands into one
/// policy per action, named `<name>[<action>]`.
pub fn parse_policies(source: &str) -> Result<Vec<PolicyAst>, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut policies = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();

    while !parser.at(&Tok::Eof) {
        let block = parser.block()?;
        for policy in block.expand() {
            if !seen.insert(policy.name.clone()) {
                return Err(ParseError::new(
                    ErrorKind::Semantic,
                    block.name_pos.0,
                    block.name_pos.1,
                    format!("duplicate policy name \"{}\"", policy.name),
                ));
            }
            policies.push(policy);
        }
    }
    Ok(policies)
}

struct Block {
    policy: PolicyAst,
    actions: Vec<Action>,
    name_pos: (usize, usize),
}

impl Block {
    fn expand(&self) -> Vec<PolicyAst> {
        match self.actions.as_slice() {
            [] => vec![self.policy.clone()],
            [single] => vec![PolicyAst {
                action: Some(*single),
                ..self.policy.clone()
            }],
            many => many
                .iter()
                .map(|a| PolicyAst {
                    name: format!("{}[{}]", self.policy.name, a),
                    action: Some(*a),
                    ..self.policy.clone()
                })
                .collect(),
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn at(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn at_word(&self, word: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(w) if w == word)
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ErrorKind, msg: impl Into<String>) -> ParseError {
        let t = self.peek();
        ParseError::new(kind, t.line, t.column, msg)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let found = self.peek().tok.describe();
        self.error_here(ErrorKind::Syntax, format!("expected {expected}, found {found}"))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if self.at(&tok) {
            Ok(self.next())
        } else {
            Err(self.unexpected(what))
        }
    }

    /// A word followed by `:` starts a new field.
    fn at_field_label(&self) -> bool {
        matches!(self.peek_at(0), Tok::Word(_)) && self.peek_at(1) == &Tok::Colon
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        if !self.at_word("Begin") {
            return Err(self.unexpected("`Begin`"));
        }
        let begin = self.next();

        let mut name: Option<(String, (usize, usize))> = None;
        let mut effect = None;
        let mut principal = None;
        let mut actions: Option<Vec<Action>> = None;
        let mut space = None;
        let mut condition = None;
        let mut any_field = false;

        loop {
            if self.at_word("End") {
                break;
            }
            if self.at(&Tok::Eof) || self.at_word("Begin") {
                return Err(self.error_here(
                    ErrorKind::Syntax,
                    format!(
                        "missing `End` for block opened at line {}, column {}",
                        begin.line, begin.column
                    ),
                ));
            }
            if !self.at_field_label() {
                return Err(self.unexpected("a field label such as `Name:` or `End`"));
            }
            let label_tok = self.next();
            let Tok::Word(label) = &label_tok.tok else {
                unreachable!()
            };
            let label = label.clone();
            if !FIELDS.contains(&label.as_str()) {
                return Err(ParseError::new(
                    ErrorKind::Syntax,
                    label_tok.line,
                    label_tok.column,
                    format!("unknown field `{label}`"),
                ));
            }
            self.expect(Tok::Colon, "`:`")?;
            any_field = true;

            let duplicate = match label.as_str() {
                "Name" => name.is_some(),
                "Effect" => effect.is_some(),
                "Principal" => principal.is_some(),
                "Action" => actions.is_some(),
                "Space" => space.is_some(),
                _ => condition.is_some(),
            };
            if duplicate {
                return Err(ParseError::new(
                    ErrorKind::Semantic,
                    label_tok.line,
                    label_tok.column,
                    format!("field `{label}` given more than once"),
                ));
            }

            match label.as_str() {
                "Name" => {
                    let t = self.peek().clone();
                    let value = self.string_value("a policy name")?;
                    if value.is_empty() {
                        return Err(ParseError::new(
                            ErrorKind::Semantic,
                            t.line,
                            t.column,
                            "policy name must not be empty",
                        ));
                    }
                    name = Some((value, (t.line, t.column)));
                }
                "Effect" => effect = Some(self.effect()?),
                "Principal" => principal = Some(self.string_value("a principal")?),
                "Action" => actions = Some(self.actions()?),
                "Space" => space = Some(self.space_or()?),
                _ => condition = Some(self.cond_or()?),
            }
        }
        let end = self.next();

        if !any_field {
            return Err(ParseError::new(
                ErrorKind::Semantic,
                begin.line,
                begin.column,
                "empty policy block",
            ));
        }
        let missing = |field: &str| {
            ParseError::new(
                ErrorKind::Semantic,
                end.line,
                end.column,
                format!("policy block is missing the required `{field}` field"),
            )
        };
        let (name, name_pos) = name.ok_or_else(|| missing("Name"))?;
        let effect = effect.ok_or_else(|| missing("Effect"))?;
        let space = space.ok_or_else(|| missing("Space"))?;

        Ok(Block {
            policy: PolicyAst {
                name,
                effect,
                principal,
                action: None,
                space,
                condition,
            },
            actions: actions.unwrap_or_default(),
            name_pos,
        })
    }

    fn string_value(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().tok.clone() {
            Tok::Str(s) => {
                self.next();
                Ok(s)
            }
            Tok::Word(w) if !self.at_field_label() && !is_reserved(&w) => {
                self.next();
                Ok(w)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn effect(&mut self) -> Result<Effect, ParseError> {
        let effect = if self.at_keyword("allow") {
            Effect::Allow
        } else if self.at_keyword("deny") {
            Effect::Deny
        } else {
            return Err(self.unexpected("`allow` or `deny`"));
        };
        self.next();
        Ok(effect)
    }

    fn actions(&mut self) -> Result<Vec<Action>, ParseError> {
        let mut out = Vec::new();
        loop {
            let t = self.peek().clone();
            let action = match &t.tok {
                Tok::Word(w) | Tok::Str(w) => w.parse::<Action>().ok(),
                _ => None,
            };
            let Some(action) = action else {
                return Err(self.unexpected("`read`, `write` or `localize`"));
            };
            self.next();
            if out.contains(&action) {
                return Err(ParseError::new(
                    ErrorKind::Semantic,
                    t.line,
                    t.column,
                    format!("action `{action}` listed twice"),
                ));
            }
            out.push(action);
            if self.at(&Tok::Comma) {
                self.next();
            } else {
                return Ok(out);
            }
        }
    }

    fn space_or(&mut self) -> Result<SpaceExpr, ParseError> {
        let mut lhs = self.space_and()?;
        while self.at_keyword("Or") {
            self.next();
            lhs = SpaceExpr::or(lhs, self.space_and()?);
        }
        Ok(lhs)
    }

    fn space_and(&mut self) -> Result<SpaceExpr, ParseError> {
        let mut lhs = self.space_unary()?;
        while self.at_keyword("And") {
            self.next();
            lhs = SpaceExpr::and(lhs, self.space_unary()?);
        }
        Ok(lhs)
    }

    fn space_unary(&mut self) -> Result<SpaceExpr, ParseError> {
        if self.at_keyword("Not") {
            self.next();
            return Ok(SpaceExpr::not(self.space_unary()?));
        }
        if self.at(&Tok::LParen) {
            self.next();
            let e = self.space_or()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(e);
        }
        Ok(SpaceExpr::Id(self.space_id()?))
    }

    fn space_id(&mut self) -> Result<String, ParseError> {
        match self.peek().tok.clone() {
            Tok::Str(s) => {
                self.next();
                Ok(s)
            }
            Tok::Word(w) if !self.at_field_label() && !is_reserved(&w) => {
                self.next();
                Ok(w)
            }
            _ => Err(self.unexpected("a space id")),
        }
    }

    fn cond_or(&mut self) -> Result<CondExpr, ParseError> {
        let mut lhs = self.cond_and()?;
        while self.at_keyword("Or") {
            self.next();
            lhs = CondExpr::or(lhs, self.cond_and()?);
        }
        Ok(lhs)
    }

    fn cond_and(&mut self) -> Result<CondExpr, ParseError> {
        let mut lhs = self.cond_unary()?;
        while self.at_keyword("And") {
            self.next();
            lhs = CondExpr::and(lhs, self.cond_unary()?);
        }
        Ok(lhs)
    }

    fn cond_unary(&mut self) -> Result<CondExpr, ParseError> {
        if self.at_keyword("Not") {
            self.next();
            return Ok(CondExpr::not(self.cond_unary()?));
        }
        if self.at(&Tok::LParen) {
            self.next();
            let e = self.cond_or()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(e);
        }
        self.cond_atom()
    }

    fn cond_atom(&mut self) -> Result<CondExpr, ParseError> {
        let Tok::Word(w) = self.peek().tok.clone() else {
            return Err(self.unexpected("a condition atom"));
        };
        match w.as_str() {
            "TODAfter" | "TODBefore" => {
                self.next();
                self.expect(Tok::Colon, "`:`")?;
                let t = self.time()?;
                Ok(if w == "TODAfter" {
                    CondExpr::TodAfter(t)
                } else {
                    CondExpr::TodBefore(t)
                })
            }
            "WhenInside" | "UserInside" => {
                self.next();
                if self.at(&Tok::Colon) {
                    self.next();
                }
                Ok(CondExpr::WhenInside(self.space_id()?))
            }
            _ => Err(self.unexpected("`TODAfter:`, `TODBefore:`, `WhenInside` or `UserInside:`")),
        }
    }

    fn time(&mut self) -> Result<TimeOfDay, ParseError> {
        let t = self.peek().clone();
        let raw = match &t.tok {
            Tok::Number(n) => n.clone(),
            _ => return Err(self.unexpected("a four-digit HHMM time")),
        };
        self.next();
        let bad = |msg: String| ParseError::new(ErrorKind::Semantic, t.line, t.column, msg);
        if raw.len() != 4 {
            return Err(bad(format!(
                "malformed time `{raw}`: expected exactly four digits HHMM"
            )));
        }
        let v: u16 = raw.parse().expect("four ascii digits");
        TimeOfDay::new(v).ok_or_else(|| {
            bad(format!(
                "malformed time `{raw}`: must be 0000..=2400 with minutes below 60"
            ))
        })
    }
}

fn is_reserved(w: &str) -> bool {
    ["and", "or", "not"].iter().any(|k| w.eq_ignore_ascii_case(k))
        || w == "Begin"
        || w == "End"
}
