//! Topological vertex amplitudes, free-fermion operator words and the
//! generating functions of double-ℙ¹ open string amplitudes, computed with
//! exact truncated series arithmetic.

pub mod ctv;
pub mod error;
pub mod fock;
pub mod genfun;
pub mod partitions;
pub mod products;
pub mod ring;
pub mod schur;
pub mod strip;
pub mod vertex;

pub use error::{Error, Result};
pub use partitions::Partition;
pub use ring::{CoeffPoly, Grading, Mono, USeries, Var};
