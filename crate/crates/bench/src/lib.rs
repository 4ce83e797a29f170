//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use mhd_core::fespace::ElementKind;
use mhd_core::forms::{AssemblyMode, BlockSystem, MhdSpaces, NewtonAssembler};
use mhd_core::mesh::uniform_unit_square;
use mhd_core::problems::{smooth_benchmark, BenchmarkProblem};

pub fn assembler(problem: &BenchmarkProblem, m: usize, element: ElementKind) -> NewtonAssembler {
    let mesh = Arc::new(uniform_unit_square(m).expect("valid resolution"));
    NewtonAssembler::new(MhdSpaces::new(mesh, element), problem, problem.params)
}

/// A deterministic non-trivial state of the right length.
pub fn state(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.1 * ((i as f64) * 0.37).sin()).collect()
}

/// Newton system of the smooth benchmark at a fixed state.
pub fn newton_system(m: usize, element: ElementKind) -> BlockSystem {
    let problem = smooth_benchmark();
    let asm = assembler(&problem, m, element);
    asm.newton_system(&state(asm.n_total()), AssemblyMode::Newton)
        .expect("assembly")
}
