//! Rigid-body world, hand colliders and force routing.

pub mod drum;
pub mod filter;
pub mod hand;
pub mod routing;
pub mod world;

pub use drum::{contact_drum_param, finger_clearance, DRUM_TOLERANCE};
pub use filter::ForceFilter;
pub use hand::{HandGeometry, HAND_COLLIDERS};
pub use routing::{pair_opposing, route_forces, HandForce, RoutedForces, SqueezePair, PAIR_ANGLE_DEG};
pub use world::{BodyId, BodyKind, BodyRole, ContactImpulse, RigidBody, Shape, SimError, SimWorld, SolverParams, StepReport};
