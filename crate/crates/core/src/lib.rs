//! Exact arithmetic on finite-support probability distributions in R^d:
//! convolution powers, accompanying compound Poisson laws, polyhedral
//! distances, the rare-events Poissonization model, random sums with optimal
//! couplings, and an experiment harness that measures convergence rates.

pub mod cli;
pub mod dist;
pub mod error;
pub mod harness;
pub mod models;
pub mod poly;

pub use dist::{DiscreteDistribution, LatticeDistribution, Limits, Point, WithError};
pub use error::{Error, Result};
pub use poly::{DirectionSet, DistanceCertificate, Polyhedron, ProjectionBasis};
