//! Mixed finite elements for stationary incompressible MHD in 2D:
//! Taylor–Hood velocity/pressure, a lowest-order Nédélec magnetic field of
//! the first or second type, and a Lagrange multiplier for `∇·b = 0` (P1 with
//! first-type edges, P2 with second-type), solved by Newton's method.

pub mod analysis;
pub mod fespace;
pub mod forms;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod solver;

pub use analysis::{convergence_study, error_norms, ConvergenceReport, ErrorReport};
pub use fespace::{DofMap, ElementKind, FeFunction};
pub use forms::{MhdSpaces, PhysParams};
pub use linalg::{lu_solve, SparseMatrix};
pub use mesh::{Mesh, MeshFamily};
pub use problems::{corner_benchmark, smooth_benchmark, BenchmarkProblem};
pub use solver::{newton_solve, InitialGuess, MhdState, NewtonConfig, NewtonOutcome};
