//! Spectral analysis of a one-dimensional tight-binding chain whose effective
//! mass varies along the lattice.
//!
//! The full operator couples a uniform chain to a linear mass gradient of
//! strength `γ`. Its spectrum spans `[−2, 2 + 4γN]`; states below `E = 2`
//! are extended and states above it are localized. The crate provides
//!
//! * [`hamiltonian`]: operator builders and the recurrence residual,
//! * [`eigensolve`]: Sturm bisection, implicit QL, inverse iteration and a
//!   dense Jacobi reference,
//! * [`limits`]: closed forms for the uniform and pure-gradient limits,
//! * [`observables`]: densities of states, participation ratios,
//!   finite-size scaling and the mobility edge,
//! * [`cli`]: the `pdmchain` command-line front end.

pub mod cli;
pub mod eigensolve;
pub mod error;
pub mod format;
pub mod hamiltonian;
pub mod limits;
pub mod observables;
pub mod validate;

pub use eigensolve::{Method, SolverOptions, Spectrum};
pub use error::{Error, Result};
pub use hamiltonian::{build_full, build_h0, build_h1, ChainSpec, TridiagonalOperator, Variant};
