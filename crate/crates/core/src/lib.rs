//! Patrol-route planning and received-signal-strength localization of
//! concealed isotropic RF emitters by a small robot swarm.
//!
//! The pipeline runs in five stages:
//!
//! * [`rf_model`]: Friis received power with a sinc² directional pattern and
//!   Gaussian RSS noise.
//! * [`patrol`]: regular-polygon routes, detection strips and the explicit
//!   coverage raster.
//! * [`de`]: differential evolution over route parameters.
//! * [`sim`]: RSS traces along patrol edges and through vertex turns.
//! * [`localization`]: edge-maxima triangulation lines and their
//!   least-squares intersection.
//!
//! [`harness`] ties them into the eight-scenario Monte Carlo campaign.

// Negated comparisons are used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod de;
pub mod error;
pub mod geom;
pub mod harness;
pub mod localization;
pub mod patrol;
pub mod rf_model;
pub mod rng;
pub mod sim;

pub use error::{CelError, Result};
pub use geom::Point2;
