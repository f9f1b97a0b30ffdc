//! Small dense conic programs over the product cone `R^p_+ × S^n_+`.
//!
//! A [`ConicProgram`] is stated in the equality standard form
//!
//! ```text
//!   minimize    <C, X> + c·x
//!   subject to  <A_i, X> + a_i·x = b_i     i = 1..m
//!               X ⪰ 0 (n×n real symmetric),  x ≥ 0
//! ```
//!
//! Inequalities are expressed by adding nonnegative slack columns, free scalars by
//! splitting. Any backend implementing [`ConicSolver`] can be plugged in; the crate
//! ships [`InteriorPoint`], an infeasible primal-dual path-following method with the
//! HKM search direction and Mehrotra predictor-corrector steps. It is aimed at
//! problems with a handful of constraints and one PSD block of order up to a few
//! hundred, where dense linear algebra is the right tool.

mod ipm;
mod program;

pub use ipm::{InteriorPoint, IpmSettings};
pub use program::{ConicProgram, ConstraintRow};

use nalgebra::{DMatrix, DVector, RealField};
use thiserror::Error;

/// Errors raised before or while solving a conic program.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("constraint {row}: {what}")]
    Shape { row: usize, what: String },
    #[error("program has no variables")]
    Empty,
    #[error("numerical breakdown: {0}")]
    Numerical(String),
}

/// Termination state reported by a solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Feasibility and gap tolerances met.
    Optimal,
    /// A Farkas-type certificate shows the primal constraints cannot be met.
    PrimalInfeasible,
    /// The objective is unbounded below on the feasible set.
    DualInfeasible,
    /// Iteration limit hit; the last iterate is returned.
    MaxIterations,
    /// Step lengths collapsed before tolerances were met; the last iterate is returned.
    Stalled,
}

impl SolveStatus {
    pub fn is_optimal(self) -> bool {
        matches!(self, SolveStatus::Optimal)
    }
}

/// Primal-dual point returned by a solver, expressed in the caller's (unscaled) data.
#[derive(Debug, Clone)]
pub struct ConicSolution<T: RealField> {
    pub status: SolveStatus,
    pub x_psd: DMatrix<T>,
    pub x_lin: DVector<T>,
    pub y: DVector<T>,
    pub z_psd: DMatrix<T>,
    pub z_lin: DVector<T>,
    pub primal_objective: T,
    pub dual_objective: T,
    pub primal_infeasibility: T,
    pub dual_infeasibility: T,
    pub relative_gap: T,
    pub iterations: usize,
}

/// Backend boundary: anything that can solve a [`ConicProgram`].
pub trait ConicSolver<T: RealField + Copy>: Send + Sync {
    fn solve(&self, program: &ConicProgram<T>) -> Result<ConicSolution<T>, ConicError>;
}
