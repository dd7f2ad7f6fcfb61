//! Symbolic wonderful compactifications.
//!
//! Spaces are expression trees built from atoms by products, projective
//! bundles and blowups. A building set inside an arrangement is resolved by
//! iterated blowups along its members; the resulting trace feeds Betti
//! number computation and proof certificates for ordinarity and the
//! Hodge-Witt property.

pub mod betti;
pub mod blowup;
pub mod certify;
pub mod cli;
pub mod constructions;
pub mod lattice;
pub mod space;

pub use betti::{poincare, BettiCalculator, BettiError, Poincare};
pub use blowup::{dominant_transform, wonderful, BlowupError, BlowupTrace, StageState, TransformCase};
pub use lattice::{close_under_meet, is_building_set, Arrangement, BuildingSet, ElementDescriptor, LatticeError, MeetValue};
pub use space::{SpaceError, SpaceExpr, SpaceNode, Tristate};
