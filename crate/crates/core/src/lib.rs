//! Explicit weak solutions of linear PDEs
//!
//! ```text
//! dPsi/dt = sum_{n=0}^{2m} A_n(t, x) d^n Psi / dx^n,   (t, x) in [0, T[ x [-l, l[
//! ```
//!
//! whose coefficients are step functions on a rectangular time x space
//! partition and whose initial condition is a trigonometric polynomial.
//! In that setting the Fourier series of the solution is finite, each mode
//! evolves in closed form inside a cell, and cells are glued together in
//! time by matching coefficients at the interfaces.

pub mod cli;
pub mod error;
pub mod oracle;
pub mod problem_io;
pub mod propagator;
pub mod solver;
pub mod spectral;

pub use error::{Diagnostic, Error, Location, Result};
pub use propagator::{block_exp, evolve_mode, evolve_state, stitch_mode, stitch_zero_mode, Block2, CellState};
pub use solver::{
    build, check_divergence, evaluate, evaluate_grid, residual, DivergenceNote, Field,
    PiecewiseSolution, Severity, StepProblem,
};
pub use spectral::{
    apply_fourier_derivative, apply_operator_polynomial, spectral_pair, FourierState,
    OperatorCoefficients, SpectralPair,
};
