//! Multiscale simplicial flat norm of integer chains, computed exactly.

pub mod complex;
pub mod deform;
pub mod exact;
pub mod fixtures;
pub mod geometry;
pub mod lp;
pub mod msfn;
pub mod tu;
