//! Pseudo-spectral solvers and verification tools for full-dispersion
//! Green-Naghdi and Whitham-Boussinesq shallow-water models.

pub mod multipliers;
pub mod spectral;
pub mod chebyshev;
pub mod strip;
pub mod fd_oracle;
pub mod krylov;
pub mod models;
pub mod conserved;
pub mod timeint;
