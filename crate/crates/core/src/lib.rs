//! Simulation core for an inflated beam robot whose stiffness is set by
//! distributed positive-pressure layer-jamming pouches.
//!
//! The pouches are switched by passive magnetic valves that an internal
//! carriage addresses one at a time. Two side cables bend the robot; a
//! compliant pouch buckles into a virtual joint, and re-jamming it locks the
//! joint angle.
//!
//! Modules, bottom-up:
//! - [`pneumatics`]: valve state machine and pouch pressure network.
//! - [`mechanics`]: inflated-beam moments, buckling, cantilever deflection.
//! - [`kinematics`]: planar joint chain, cable pulls, growth by eversion.
//! - [`carriage`]: carriage travel and valve-visit route scheduling.
//! - [`engine`]: the stepped world, scenarios, traces and experiments.
//! - [`planner`]: goal shape to jam/pull/grow action script.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carriage;
pub mod engine;
pub mod geometry;
pub mod kinematics;
pub mod mechanics;
pub mod planner;
pub mod pneumatics;
pub mod script;

pub use engine::{RobotSpec, Trace, World};
pub use script::{Action, Side, ValveRole};
