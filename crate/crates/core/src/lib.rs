//! Actuation-aware support regions for multi-contact legged robots.
//!
//! The crate computes the set of horizontal center-of-mass positions at which
//! a robot standing on a given set of point contacts can hold itself in static
//! equilibrium. Three variants are supported:
//!
//! - the *friction region*, where contact forces only have to stay inside the
//!   linearized friction cones;
//! - the *actuation region*, where contact forces only have to stay inside the
//!   per-limb wrench polytopes induced by the joint-torque limits;
//! - the *feasible region*, where both constraint families hold at once.
//!
//! Regions are computed by iterative projection ([`region::compute_region`]),
//! a cutting-plane method that keeps an inner and an outer polygon around the
//! exact projected set and refines them with directional linear programs.
//! On top of that sit a configuration-independent global region
//! ([`global`]), a center-of-mass target selector and a sampling-based
//! foothold planner ([`planner`]) that read terrain from a [`terrain::HeightMap`].
//!
//! Units are SI throughout: meters, newtons, newton-meters, kilograms.

// `!(x > 0.0)` checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constraints;
pub mod geometry;
pub mod global;
pub mod model;
pub mod optim;
pub mod planner;
pub mod region;
pub mod scenario;
pub mod terrain;

pub use constraints::{ConstraintSystem, Contact, ContactMode, WrenchPolytope};
pub use geometry::{Point2, Polygon2};
pub use model::{LegModel, RobotModel};
pub use region::{compute_region, ConstraintMode, RegionRequest, RegionResult};
pub use scenario::Scenario;
pub use terrain::HeightMap;
