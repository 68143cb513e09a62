//! Named axis-aligned spaces organised as a containment forest.

mod geom;
mod index;
mod registry;

pub use geom::{Box3, Point3};
pub use registry::{RegistryError, Space, SpaceRecord, SpaceRegistry};
