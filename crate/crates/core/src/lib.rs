//! Spatial access control for shared AR maps.
//!
//! Policies written in the `.vmac` language are attached to named boxes in a
//! containment forest, translated to logical formulas and decided per map
//! point. The audit module answers configuration questions by deciding
//! satisfiability over the same formulas.

pub mod audit;
pub mod engine;
pub mod formula;
pub mod harness;
pub mod lang;
pub mod space;

pub use engine::{Decision, DecisionCache, DecisionEngine, PolicyStore, Verdict};
pub use formula::{AccessRequest, Atom, Formula};
pub use lang::{parse_policies, pretty_print, Action, Effect, PolicyAst, TimeOfDay};
pub use space::{Box3, Point3, SpaceRecord, SpaceRegistry};
