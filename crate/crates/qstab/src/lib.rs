//! Data-driven informativity analysis for continuous-time linear systems.
//!
//! Given measured trajectories `(x, u, ẋ)` of `ẋ = Ax + Bu + w` on a finite
//! horizon, with the disturbance constrained by an energy budget
//! `∫ wwᵀ dt ⪯ Q` (or its sampled counterpart `δWWᵀ ⪯ Q`), this crate
//! decides whether the data are informative for quadratic stabilization of
//! every consistent system, synthesizes a stabilizing feedback gain with a
//! certified margin, and relates continuous-time and sampled-data
//! conclusions through noise-regularity certificates (square Lipschitzness
//! and total square variation): margin floors, admissible stepsize bounds
//! and sample-coarsening criteria.
//!
//! Modules:
//! - [`linalg`]: dense symmetric-matrix kernels (Jacobi eigensolver,
//!   Cholesky, norms, definiteness tests);
//! - [`sdp`]: a small deterministic interior-point solver for LMI problems
//!   with a linear objective;
//! - [`signals`]: uniform-grid trajectories, LTI simulation, sampling and
//!   data Gramians;
//! - [`noise`]: noise budgets, regularity estimators and the
//!   continuous↔discrete deviation bounds;
//! - [`informativity`]: consistency sets, the stabilization LMIs, gain
//!   synthesis, margin maximization, stepsize/coarsening bounds;
//! - [`benchmark`]: a published scalar benchmark dataset with reference
//!   matrices, used by the `reproduce-paper` command;
//! - [`cli`]: the command-line front end.

pub mod benchmark;
pub mod cli;
pub mod informativity;
pub mod linalg;
pub mod noise;
pub mod sdp;
pub mod signals;
