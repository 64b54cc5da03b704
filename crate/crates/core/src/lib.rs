//! Integrable billiards in domains bounded by arcs of confocal quadrics and the
//! topology of their Liouville foliations.

pub mod error;
pub mod geometry;
pub mod build;
pub mod catalog;
pub mod domain;
pub mod dynamics;
pub mod grid;
pub mod fiber;
pub mod decomposition;
pub mod diagram;
pub mod topology;
pub mod gr;
pub mod gluing;
pub mod cells;
pub mod atoms;

pub use error::{BilliardError, Result};
pub use geometry::*;
