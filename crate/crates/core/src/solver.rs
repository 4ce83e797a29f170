//! Newton iteration for the coupled discrete problem.

use std::sync::Arc;

use thiserror::Error;

use crate::fespace::{ElementKind, FeError, FeFunction};
use crate::forms::{assemble_as, AssemblyMode, FormsError, MhdSpaces, NewtonAssembler, PhysParams};
use crate::linalg::{norm2, Backend, LinalgError, LinearSolver, SparseMatrix};
use crate::mesh::Mesh;
use crate::problems::BenchmarkProblem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("Newton did not converge in {} iterations (last increment {:e})", .history.len(), .history.last().copied().unwrap_or(f64::NAN))]
    NonConvergence { history: Vec<f64> },
    #[error("invalid Newton configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Fe(#[from] FeError),
}

/// Discrete solution `(u, p, b, r)` plus the mean-value multiplier.
#[derive(Debug, Clone)]
pub struct MhdState {
    pub u: FeFunction,
    pub p: FeFunction,
    pub b: FeFunction,
    pub r: FeFunction,
    pub mu: f64,
}

impl MhdState {
    pub fn zero(spaces: &MhdSpaces) -> Self {
        Self {
            u: FeFunction::zero(spaces.u.clone()),
            p: FeFunction::zero(spaces.p.clone()),
            b: FeFunction::zero(spaces.b.clone()),
            r: FeFunction::zero(spaces.r.clone()),
            mu: 0.0,
        }
    }

    /// Concatenation `[u | p | b | r | μ]`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = Vec::new();
        for f in [&self.u, &self.p, &self.b, &self.r] {
            x.extend_from_slice(f.coeffs());
        }
        x.push(self.mu);
        x
    }

    pub fn from_vector(spaces: &MhdSpaces, x: &[f64]) -> Result<Self, SolverError> {
        if x.len() != spaces.n_total() {
            return Err(FormsError::StateLength {
                expected: spaces.n_total(),
                got: x.len(),
            }
            .into());
        }
        let (ob, or, om) = (spaces.offset_b(), spaces.offset_r(), spaces.offset_mu());
        Ok(Self {
            u: FeFunction::new(spaces.u.clone(), x[..spaces.offset_p()].to_vec())?,
            p: FeFunction::new(spaces.p.clone(), x[spaces.offset_p()..ob].to_vec())?,
            b: FeFunction::new(spaces.b.clone(), x[ob..or].to_vec())?,
            r: FeFunction::new(spaces.r.clone(), x[or..om].to_vec())?,
            mu: x[om],
        })
    }

    pub fn spaces(&self) -> MhdSpaces {
        MhdSpaces {
            mesh: self.u.space().mesh().clone(),
            u: self.u.space().clone(),
            p: self.p.space().clone(),
            b: self.b.space().clone(),
            r: self.r.space().clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialGuess {
    /// Interior unknowns zero, boundary unknowns from the exact traces.
    #[default]
    Zero,
    /// Solution of the problem with convection and coupling removed.
    DecoupledLinear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Stop once `‖∇(uⁿ − uⁿ⁻¹)‖ ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub initial_guess: InitialGuess,
    pub backend: Backend,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 30,
            initial_guess: InitialGuess::Zero,
            backend: Backend::Auto,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(SolverError::Config(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(SolverError::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub state: MhdState,
    pub iterations: usize,
    /// `‖∇(uⁿ − uⁿ⁻¹)‖` after each step.
    pub history: Vec<f64>,
    /// Free residual norm at the returned state over the data norm.
    pub relative_residual: f64,
}

/// Runs Newton on `mesh` with the given magnetic element.
pub fn newton_solve(
    problem: &BenchmarkProblem,
    mesh: Arc<Mesh>,
    element: ElementKind,
    params: PhysParams,
    config: &NewtonConfig,
) -> Result<NewtonOutcome, SolverError> {
    config.validate()?;
    let spaces = MhdSpaces::new(mesh, element);
    let assembler = NewtonAssembler::new(spaces, problem, params);
    NewtonDriver::new(&assembler, config.backend).solve(problem, config)
}

/// Newton iteration bound to one assembler, reusing its symbolic factorization.
pub struct NewtonDriver<'a> {
    assembler: &'a NewtonAssembler,
    solver: LinearSolver,
    /// Unit-coefficient vector Laplacian, for the increment norm.
    stiffness: SparseMatrix,
}

impl<'a> NewtonDriver<'a> {
    pub fn new(assembler: &'a NewtonAssembler, backend: Backend) -> Self {
        Self {
            assembler,
            solver: LinearSolver::new(backend),
            stiffness: assemble_as(&assembler.spaces().u, 1.0),
        }
    }

    fn gradient_norm(&self, du: &[f64]) -> f64 {
        self.stiffness.bilinear(du, du).max(0.0).sqrt()
    }

    /// One step `x ← x + δ` with `J(x) δ = −R(x)`; returns `‖∇δu‖`.
    pub fn step(&mut self, x: &mut [f64], mode: AssemblyMode) -> Result<f64, SolverError> {
        let sys = self.assembler.newton_system(x, mode)?;
        let delta = sys.increment(&self.solver.solve(&sys.matrix, &sys.rhs)?);
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi += di;
        }
        Ok(self.gradient_norm(&delta[..self.assembler.spaces().u.n_dofs()]))
    }

    pub fn initial_state(
        &mut self,
        problem: &BenchmarkProblem,
        mode: InitialGuess,
    ) -> Result<MhdState, SolverError> {
        let spaces = self.assembler.spaces();
        let mut x = boundary_lift(problem, spaces)?;
        if mode == InitialGuess::DecoupledLinear {
            self.step(&mut x, AssemblyMode::Linear)?;
        }
        MhdState::from_vector(spaces, &x)
    }

    pub fn solve(
        &mut self,
        problem: &BenchmarkProblem,
        config: &NewtonConfig,
    ) -> Result<NewtonOutcome, SolverError> {
        config.validate()?;
        let mut x = self
            .initial_state(problem, config.initial_guess)?
            .to_vector();
        let mut history = Vec::new();
        loop {
            let eps = self.step(&mut x, AssemblyMode::Newton)?;
            history.push(eps);
            if eps <= config.tol {
                break;
            }
            if history.len() >= config.max_iter || !eps.is_finite() {
                return Err(SolverError::NonConvergence { history });
            }
        }
        let relative_residual = self.relative_residual(&x)?;
        Ok(NewtonOutcome {
            state: MhdState::from_vector(self.assembler.spaces(), &x)?,
            iterations: history.len(),
            history,
            relative_residual,
        })
    }

    /// `‖R(x)‖ / ‖data‖`, or the absolute norm when the data vanish.
    pub fn relative_residual(&self, x: &[f64]) -> Result<f64, SolverError> {
        let r = norm2(&self.assembler.free_residual(x, AssemblyMode::Newton)?);
        let d = norm2(&self.assembler.data_vector());
        Ok(if d > 0.0 { r / d } else { r })
    }
}

/// State with zero interior unknowns and exact essential boundary values.
pub fn boundary_lift(
    problem: &BenchmarkProblem,
    spaces: &MhdSpaces,
) -> Result<Vec<f64>, SolverError> {
    let mut x = vec![0.0; spaces.n_total()];
    for (d, v) in spaces
        .u
        .essential_bc_vector(&|p| problem.u(p), problem.edge_points)?
    {
        x[d] = v;
    }
    for (d, v) in spaces
        .b
        .essential_bc_vector(&|p| problem.b(p), problem.edge_points)?
    {
        x[spaces.offset_b() + d] = v;
    }
    for (d, v) in spaces.r.essential_bc_scalar(&|p| problem.r(p))? {
        x[spaces.offset_r() + d] = v;
    }
    Ok(x)
}

/// Seed for Newton on `spaces`, see [`InitialGuess`].
pub fn initial_state(
    problem: &BenchmarkProblem,
    spaces: &MhdSpaces,
    mode: InitialGuess,
) -> Result<MhdState, SolverError> {
    let assembler = NewtonAssembler::new(spaces.clone(), problem, problem.params);
    NewtonDriver::new(&assembler, Backend::Auto).initial_state(problem, mode)
}
