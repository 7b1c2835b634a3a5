//! Symmetry-reduced necessary conditions for optimal control of multi-agent
//! left-invariant kinematic systems on Lie groups, instantiated on SE(2).
//!
//! The crate is organized bottom-up:
//!
//! - [`algebra`]: structure-constant arithmetic (bracket, ad*, pairing),
//!   the actuated/unactuated split and the quadratic cost metric;
//! - [`se2`]: the concrete group layer (poses, hat/vee, exp/log, body-frame
//!   gradients);
//! - [`interaction`]: interaction graph and collision-avoidance barrier
//!   potentials with their body-frame coupling forces;
//! - [`dynamics`]: the reduced equations in split Lagrangian and
//!   PMP/Hamiltonian form, the Legendre bridge and the reduced Hamiltonian;
//! - [`sim`]: steppers (entrywise Euler, Lie-Euler, Munthe-Kaas RK4),
//!   monitors and trajectory recording;
//! - [`scenario`]: TOML configuration and compiled-in presets.

pub mod algebra;
pub mod dynamics;
pub mod error;
pub mod interaction;
pub mod scenario;
pub mod se2;
pub mod sim;

pub use error::{Error, Result};
