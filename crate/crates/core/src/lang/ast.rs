use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Whether a policy grants or revokes access.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Effect {
    Allow,
    Deny,
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Effect::Allow => "allow",
            Effect::Deny => "deny",
        })
    }
}

/// Map access events. Ordered `read < write < localize`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Read,
    Write,
    Localize,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Read, Action::Write, Action::Localize];

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Read => "read",
            Action::Write => "write",
            Action::Localize => "localize",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "read" => Ok(Action::Read),
            "write" => Ok(Action::Write),
            "localize" => Ok(Action::Localize),
            _ => Err(format!("unknown action `{s}` (expected read, write or localize)")),
        }
    }
}

/// Time of day in HHMM encoding. `2400` is accepted as the end-of-day sentinel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct TimeOfDay(u16);

impl TimeOfDay {
    pub const MIDNIGHT: TimeOfDay = TimeOfDay(0);
    pub const END_OF_DAY: TimeOfDay = TimeOfDay(2400);

    pub fn new(hhmm: u16) -> Option<Self> {
        Self::is_valid(hhmm).then_some(TimeOfDay(hhmm))
    }

    pub fn is_valid(hhmm: u16) -> bool {
        hhmm <= 2400 && hhmm % 100 < 60
    }

    pub fn value(self) -> u16 {
        self.0
    }
}

impl TryFrom<u16> for TimeOfDay {
    type Error = String;

    fn try_from(v: u16) -> Result<Self, Self::Error> {
        TimeOfDay::new(v).ok_or_else(|| format!("invalid HHMM time `{v}`"))
    }
}

impl From<TimeOfDay> for u16 {
    fn from(t: TimeOfDay) -> u16 {
        t.0
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SpaceExpr {
    Id(String),
    Not(Box<SpaceExpr>),
    And(Box<SpaceExpr>, Box<SpaceExpr>),
    Or(Box<SpaceExpr>, Box<SpaceExpr>),
}

impl SpaceExpr {
    pub fn id(s: impl Into<String>) -> Self {
        SpaceExpr::Id(s.into())
    }

    pub fn not(e: SpaceExpr) -> Self {
        SpaceExpr::Not(Box::new(e))
    }

    pub fn and(l: SpaceExpr, r: SpaceExpr) -> Self {
        SpaceExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: SpaceExpr, r: SpaceExpr) -> Self {
        SpaceExpr::Or(Box::new(l), Box::new(r))
    }

    /// Left-associated disjunction of the given ids.
    pub fn any_of<I, S>(ids: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ids.into_iter()
            .map(SpaceExpr::id)
            .reduce(SpaceExpr::or)
    }

    pub fn ids(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_ids(&mut out);
        out
    }

    fn collect_ids<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            SpaceExpr::Id(id) => out.push(id),
            SpaceExpr::Not(e) => e.collect_ids(out),
            SpaceExpr::And(l, r) | SpaceExpr::Or(l, r) => {
                l.collect_ids(out);
                r.collect_ids(out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CondExpr {
    TodAfter(TimeOfDay),
    TodBefore(TimeOfDay),
    /// `WhenInside` / `UserInside`: the requesting user stands inside the space.
    WhenInside(String),
    Not(Box<CondExpr>),
    And(Box<CondExpr>, Box<CondExpr>),
    Or(Box<CondExpr>, Box<CondExpr>),
}

impl CondExpr {
    pub fn not(e: CondExpr) -> Self {
        CondExpr::Not(Box::new(e))
    }

    pub fn and(l: CondExpr, r: CondExpr) -> Self {
        CondExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: CondExpr, r: CondExpr) -> Self {
        CondExpr::Or(Box::new(l), Box::new(r))
    }

    pub fn space_ids(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_ids(&mut out);
        out
    }

    fn collect_ids<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            CondExpr::WhenInside(id) => out.push(id),
            CondExpr::TodAfter(_) | CondExpr::TodBefore(_) => {}
            CondExpr::Not(e) => e.collect_ids(out),
            CondExpr::And(l, r) | CondExpr::Or(l, r) => {
                l.collect_ids(out);
                r.collect_ids(out);
            }
        }
    }
}

/// One parsed policy block.
///
/// A missing `principal` applies the policy to every principal, a missing
/// `action` to all three actions and a missing `condition` makes it
/// unconditional.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolicyAst {
    pub name: String,
    pub effect: Effect,
    pub principal: Option<String>,
    pub action: Option<Action>,
    pub space: SpaceExpr,
    pub condition: Option<CondExpr>,
}

impl PolicyAst {
    pub fn new(name: impl Into<String>, effect: Effect, space: SpaceExpr) -> Self {
        PolicyAst {
            name: name.into(),
            effect,
            principal: None,
            action: None,
            space,
            condition: None,
        }
    }

    pub fn with_principal(mut self, principal: impl Into<String>) -> Self {
        self.principal = Some(principal.into());
        self
    }

    pub fn with_action(mut self, action: Action) -> Self {
        self.action = Some(action);
        self
    }

    pub fn with_condition(mut self, condition: CondExpr) -> Self {
        self.condition = Some(condition);
        self
    }

    /// Every space id the policy mentions, in the space expression first and
    /// then in the condition, without duplicates.
    pub fn referenced_spaces(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let cond = self.condition.as_ref().map(CondExpr::space_ids).unwrap_or_default();
        for id in self.space.ids().into_iter().chain(cond) {
            if !out.contains(&id) {
                out.push(id);
            }
        }
        out
    }
}
