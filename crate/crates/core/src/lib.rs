//! Quasi-static laboratory for robot feet: contact-stability geometry,
//! closed-form planar foot models, the articulated adaptive-foot statics and
//! an experiment harness that sweeps them.

pub mod contact_geometry;
pub mod error;
pub mod harness;
pub mod newton;
pub mod planar;
pub mod softfoot;

pub use error::{Error, Result};
