//! Exact enumeration, q-series and limit-law toolkit for square-lattice polygon models.

pub mod acceptance;
pub mod amplitudes;
pub mod engine;
pub mod enumerate;
pub mod extrapolate;
pub mod hp;
pub mod limitlaws;
pub mod model;
pub mod qfunc;
pub mod ring;
pub mod scaling;
pub mod series;
pub mod specialfn;

pub use enumerate::{CountTable, DiscreteDistribution};
pub use model::{ModelSpec, PolygonClass};
