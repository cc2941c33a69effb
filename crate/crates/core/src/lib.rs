//! Quantum Tanner codes on dihedral left-right Cayley complexes: construction,
//! distance estimation, BP+OSD decoding, and memory-experiment simulation.

pub mod codes;
pub mod complex;
pub mod decoder;
pub mod gf2;
pub mod groups;
pub mod harness;
pub mod noise;
pub mod qcode;
pub mod distance;
pub mod rng;
