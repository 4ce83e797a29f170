//! Run configuration shared by all subcommands, read from `key = value`
//! files and overridden by command-line flags.

use std::fmt::Write as _;

use clap::ValueEnum;
use mhd_core::fespace::ElementKind;
use mhd_core::linalg::Backend;
use mhd_core::mesh::MeshFamily;
use mhd_core::problems::{
    corner_benchmark_with, smooth_benchmark, zero_problem, BenchmarkProblem, Domain, Omega,
};
use mhd_core::solver::{InitialGuess, NewtonConfig};
use mhd_core::PhysParams;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("{key}: {message}")]
    Value { key: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemChoice {
    /// Smooth solution on the unit square.
    Smooth,
    /// Corner singularity on the L-shape.
    Corner,
    /// Homogeneous data; the exact solution is zero.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeshChoice {
    Square,
    Lshape,
    LshapeGraded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ElementChoice {
    Nedelec1,
    Nedelec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OmegaChoice {
    /// The opening angle 3π/2.
    ThreeHalvesPi,
    /// The literal value 2/3.
    TwoThirds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GuessChoice {
    Zero,
    Decoupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Auto,
    Native,
    Multifrontal,
    Supernodal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VelocityChoice {
    Exact,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemChoice,
    /// `None` selects the problem's uniform family.
    pub mesh: Option<MeshChoice>,
    pub resolutions: Vec<usize>,
    pub element: ElementChoice,
    pub tol: f64,
    pub max_iter: usize,
    pub initial_guess: GuessChoice,
    pub omega: OmegaChoice,
    pub backend: BackendChoice,
    pub velocity: VelocityChoice,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let newton = NewtonConfig::default();
        Self {
            problem: ProblemChoice::Smooth,
            mesh: None,
            resolutions: vec![4, 8, 16],
            element: ElementChoice::Nedelec1,
            tol: newton.tol,
            max_iter: newton.max_iter,
            initial_guess: GuessChoice::Zero,
            omega: OmegaChoice::ThreeHalvesPi,
            backend: BackendChoice::Auto,
            velocity: VelocityChoice::Exact,
            format: Format::Markdown,
        }
    }
}

fn name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

fn enum_value<T: ValueEnum>(key: &str, s: &str) -> Result<T, ConfigError> {
    T::from_str(s, false).map_err(|_| ConfigError::Value {
        key: key.into(),
        message: format!(
            "{s:?} is not one of {}",
            T::value_variants()
                .iter()
                .map(name)
                .collect::<Vec<_>>()
                .join(", ")
        ),
    })
}

/// Comma-separated, nonempty, strictly increasing positive integers.
pub fn parse_resolutions(s: &str) -> Result<Vec<usize>, String> {
    let values = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if values.first() == Some(&0) {
        return Err("resolutions must be positive".into());
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err("resolutions must be strictly increasing".into());
    }
    Ok(values)
}

/// Positive finite tolerance.
pub fn parse_tol(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("tolerance must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

pub fn parse_max_iter(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("at least one iteration is needed".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

impl RunConfig {
    /// Applies `key = value` lines on top of `self`. `#` starts a comment.
    pub fn merge_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: raw.into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let wrap = |message: String| ConfigError::Value {
                key: key.into(),
                message,
            };
            match key {
                "problem" => self.problem = enum_value(key, value)?,
                "mesh" => {
                    self.mesh = if value == "default" {
                        None
                    } else {
                        Some(enum_value(key, value)?)
                    }
                }
                "resolutions" => self.resolutions = parse_resolutions(value).map_err(wrap)?,
                "element" => self.element = enum_value(key, value)?,
                "tol" => self.tol = parse_tol(value).map_err(wrap)?,
                "max_iter" => self.max_iter = parse_max_iter(value).map_err(wrap)?,
                "initial_guess" => self.initial_guess = enum_value(key, value)?,
                "omega" => self.omega = enum_value(key, value)?,
                "backend" => self.backend = enum_value(key, value)?,
                "velocity" => self.velocity = enum_value(key, value)?,
                "format" => self.format = enum_value(key, value)?,
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line: i + 1,
                        key: key.into(),
                    })
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        c.merge_text(text)?;
        Ok(c)
    }

    /// Every key, in a form accepted by [`RunConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let res = self
            .resolutions
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(s, "problem = {}", name(&self.problem));
        let _ = writeln!(
            s,
            "mesh = {}",
            self.mesh.as_ref().map_or_else(|| "default".into(), name)
        );
        let _ = writeln!(s, "resolutions = {res}");
        let _ = writeln!(s, "element = {}", name(&self.element));
        let _ = writeln!(s, "tol = {:e}", self.tol);
        let _ = writeln!(s, "max_iter = {}", self.max_iter);
        let _ = writeln!(s, "initial_guess = {}", name(&self.initial_guess));
        let _ = writeln!(s, "omega = {}", name(&self.omega));
        let _ = writeln!(s, "backend = {}", name(&self.backend));
        let _ = writeln!(s, "velocity = {}", name(&self.velocity));
        let _ = writeln!(s, "format = {}", name(&self.format));
        s
    }

    pub fn family(&self) -> MeshFamily {
        match self.mesh {
            Some(MeshChoice::Square) => MeshFamily::UnitSquareUniform,
            Some(MeshChoice::Lshape) => MeshFamily::LShapeUniform,
            Some(MeshChoice::LshapeGraded) => MeshFamily::LShapeGraded,
            None => match self.problem {
                ProblemChoice::Smooth | ProblemChoice::Zero => MeshFamily::UnitSquareUniform,
                ProblemChoice::Corner => MeshFamily::LShapeUniform,
            },
        }
    }

    pub fn benchmark(&self) -> BenchmarkProblem {
        match self.problem {
            ProblemChoice::Smooth => smooth_benchmark(),
            ProblemChoice::Corner => corner_benchmark_with(match self.omega {
                OmegaChoice::ThreeHalvesPi => Omega::ThreeHalvesPi,
                OmegaChoice::TwoThirds => Omega::TwoThirds,
            }),
            ProblemChoice::Zero => {
                let domain = match self.family() {
                    MeshFamily::UnitSquareUniform => Domain::UnitSquare,
                    MeshFamily::LShapeUniform | MeshFamily::LShapeGraded => Domain::LShape,
                };
                zero_problem(domain, PhysParams::new(1.0, 1.0, 1.0))
            }
        }
    }

    /// The problem must live on the domain the mesh family covers.
    pub fn check_domain(&self) -> Result<(), ConfigError> {
        let on_square = self.family() == MeshFamily::UnitSquareUniform;
        if (self.benchmark().domain == Domain::UnitSquare) != on_square {
            return Err(ConfigError::Value {
                key: "mesh".into(),
                message: format!(
                    "the {} problem is not posed on this mesh",
                    name(&self.problem)
                ),
            });
        }
        Ok(())
    }

    pub fn element_kind(&self) -> ElementKind {
        match self.element {
            ElementChoice::Nedelec1 => ElementKind::Nedelec1,
            ElementChoice::Nedelec2 => ElementKind::Nedelec2,
        }
    }

    pub fn newton(&self) -> NewtonConfig {
        NewtonConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            initial_guess: match self.initial_guess {
                GuessChoice::Zero => InitialGuess::Zero,
                GuessChoice::Decoupled => InitialGuess::DecoupledLinear,
            },
            backend: match self.backend {
                BackendChoice::Auto => Backend::Auto,
                BackendChoice::Native => Backend::Native,
                BackendChoice::Multifrontal => Backend::Multifrontal,
                BackendChoice::Supernodal => Backend::Supernodal,
            },
        }
    }
}
