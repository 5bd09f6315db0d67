//! Multigrid reduction in time with FAS coarse problems.
//!
//! Block row `j >= 1` of a level reads `u_j - Psi_j(u_{j-1}) = g_j`, where
//! `Psi_j` is one backward-Euler step (Newton-solved, source sampled at
//! `t_j`) with the level's own step size. Row 0 is `u_0 = g_0`. On the finest
//! level `g` is the initial condition followed by zeros; coarse levels get the
//! FAS right-hand side `A_c(R u) + R(g - A(u))` with injection `R`.

mod cycle;
mod hierarchy;
mod relax;

pub use cycle::{
    initial_rhs, pairwise_sum, residual_norm, solve, solve_from, CycleKind, Cycler, SolveOptions, SolveResult,
};
pub use hierarchy::{Hierarchy, TimeLevel};
pub use relax::{
    apply_a, c_relax, c_relax_span, coarse_solve, correct_ideal, f_relax, f_relax_span, fas_coarse_rhs, fcf_relax,
    propagate, residual_span, restrict_injection, restrict_span, Executor, Sequential,
};
