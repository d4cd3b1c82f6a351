//! Finite difference discretizations of the one-dimensional fractional
//! Laplacian on uniform grids, with reference solutions and explicit
//! solvers for nonlocal evolution equations.

pub mod error;
pub mod quad;
pub mod specfun;
pub mod weights;
pub mod symbol;
pub mod grid;
pub mod operator;
pub mod oracle;
pub mod dirichlet;
pub mod evolve;
pub mod convergence;
pub mod cli;
