//! Coupled four-node finite element / first-order virtual element solver for
//! 2D steady thermoelasticity.

pub mod mesh;
pub mod fem;
pub mod materials;
pub mod vem;
pub mod assembly;
pub mod problem;
pub mod solver;
pub mod sparse;
pub mod post;
pub mod bench;
pub mod config;
