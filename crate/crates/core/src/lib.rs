//! Exact arithmetic for skew power series rings over p-adic division
//! algebras: Weierstraß division and preparation, Dieudonné determinants by
//! diagonal reduction, reduced norms over the centre and dimension reduction.

pub mod algebra;
mod comm;
pub mod error;
pub mod instance;
pub mod linalg;
pub mod norm;
pub mod random;
pub mod selftest;
pub mod series;
pub mod tower;
mod zmod;

pub use algebra::{extend_tau, make_algebra, Algebra, AlgebraDescriptor, DElement, TauSearchReport};
pub use error::{Error, Result};
pub use series::{CenterSeries, SkewRing, SkewSeries, SkewSeriesRecord};
pub use tower::{make_tower, Tower, TowerDescriptor, TowerElement};
