//! Principal eigenvalues of the Dirichlet Laplacian with sign-changing
//! bang-bang weights: grid solvers, the radial limit problem, harmonic mode
//! analysis of nearly spherical sets and favorable-set optimization.

pub mod domain;
pub mod error;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod modes;
pub mod multigrid;
pub mod nearly_spherical;
pub mod optimizer;
pub mod radial;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
