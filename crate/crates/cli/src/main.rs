use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mhd_cli::config::*;
use mhd_cli::output::{write_grid, write_history, write_summary};
use mhd_core::analysis::{
    convergence_study, element_name, error_norms, projection_study, AnalysisError, Velocity,
};
use mhd_core::forms::{AssemblyMode, MhdSpaces, NewtonAssembler};
use mhd_core::solver::{NewtonDriver, SolverError};

/// Mixed finite elements for stationary incompressible MHD.
#[derive(Parser)]
#[command(name = "mhd", version)]
struct Cli {
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on one mesh and report Newton history and errors.
    Solve {
        #[command(flatten)]
        opts: Overrides,
        /// Mesh resolution M (grading level for lshape-graded); defaults to the
        /// last configured resolution.
        #[arg(long)]
        resolution: Option<usize>,
        /// Write `fields.txt`, sampled on a grid, into this directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Grid points per direction for `fields.txt`.
        #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
        grid: u64,
        /// Write the Newton matrix at the solution as `i j value` lines.
        #[arg(long, value_name = "FILE")]
        dump_matrix: Option<PathBuf>,
    },
    /// Error and rate table over a sequence of meshes.
    Convergence {
        #[command(flatten)]
        opts: Overrides,
        /// Write the table into this directory instead of standard output.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Errors of the Stokes and Maxwell projections over uniform meshes.
    Projections {
        #[command(flatten)]
        opts: Overrides,
        /// Velocity inside the modified Maxwell projection.
        #[arg(long, value_enum)]
        velocity: Option<VelocityChoice>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Write a mesh as `nodes boundary-edges triangles`, coordinates, triangles, boundary edges.
    ExportMesh {
        #[arg(long, value_enum)]
        mesh: Option<MeshChoice>,
        #[arg(long, default_value_t = 4)]
        resolution: usize,
        /// Output file; standard output when absent.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Print the effective configuration in the file format.
    ShowConfig {
        #[command(flatten)]
        opts: Overrides,
    },
}

/// Alias so that clap parses the whole list as one value.
type ResolutionList = Vec<usize>;

#[derive(Args, Default)]
struct Overrides {
    #[arg(long, value_enum)]
    problem: Option<ProblemChoice>,
    #[arg(long, value_enum)]
    mesh: Option<MeshChoice>,
    /// Comma-separated, strictly increasing, e.g. `4,8,16`.
    #[arg(long, value_parser = parse_resolutions)]
    resolutions: Option<ResolutionList>,
    #[arg(long, value_enum)]
    element: Option<ElementChoice>,
    /// Newton stops once the velocity increment's H¹ seminorm is below this.
    #[arg(long, value_parser = parse_tol)]
    tol: Option<f64>,
    #[arg(long, value_parser = parse_max_iter)]
    max_iter: Option<usize>,
    #[arg(long, value_enum)]
    initial_guess: Option<GuessChoice>,
    /// Angle parameter of the corner problem.
    #[arg(long, value_enum)]
    omega: Option<OmegaChoice>,
    #[arg(long, value_enum)]
    backend: Option<BackendChoice>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Overrides {
    fn apply(&self, c: &mut RunConfig) {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        set(&mut c.problem, &self.problem);
        if self.mesh.is_some() {
            c.mesh = self.mesh;
        }
        set(&mut c.resolutions, &self.resolutions);
        set(&mut c.element, &self.element);
        set(&mut c.tol, &self.tol);
        set(&mut c.max_iter, &self.max_iter);
        set(&mut c.initial_guess, &self.initial_guess);
        set(&mut c.omega, &self.omega);
        set(&mut c.backend, &self.backend);
        set(&mut c.format, &self.format);
    }
}

/// Errors caused by the invocation rather than the computation.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

fn load(path: Option<&Path>, opts: &Overrides) -> Result<RunConfig> {
    let c = load_unchecked(path, opts)?;
    c.check_domain().map_err(|e| Usage(e.to_string()))?;
    Ok(c)
}

fn load_unchecked(path: Option<&Path>, opts: &Overrides) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    if let Some(path) = path {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        c.merge_text(&text)
            .map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    }
    opts.apply(&mut c);
    Ok(c)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .with_context(|| format!("writing {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>, file_stem: &str, format: Format) -> Result<()> {
    match out {
        Some(dir) => {
            create_dir(dir)?;
            let ext = match format {
                Format::Csv => "csv",
                Format::Markdown => "md",
            };
            let path = dir.join(format!("{file_stem}.{ext}"));
            write_file(&path, |w| w.write_all(text.as_bytes()))?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn solve(
    c: &RunConfig,
    resolution: Option<usize>,
    out: Option<&Path>,
    grid: usize,
    dump: Option<&Path>,
) -> Result<()> {
    let m = resolution.unwrap_or(*c.resolutions.last().expect("resolutions are nonempty"));
    let family = c.family();
    let mesh = Arc::new(family.build(m).map_err(|e| Usage(e.to_string()))?);
    let problem = c.benchmark();
    let assembler = NewtonAssembler::new(
        MhdSpaces::new(mesh, c.element_kind()),
        &problem,
        problem.params,
    );
    let mut driver = NewtonDriver::new(&assembler, c.newton().backend);
    let outcome = driver.solve(&problem, &c.newton())?;
    let mut errors = error_norms(&outcome.state, &problem);
    errors.resolution = m;
    errors.iterations = outcome.iterations;
    let header = format!(
        "problem {} on {:?} ({} {m}), element {}",
        problem.name,
        family,
        if family.is_uniform() { "M" } else { "level" },
        element_name(c.element_kind())
    );
    write_summary(io::stdout().lock(), &header, &outcome, &errors)?;
    if let Some(dir) = out {
        create_dir(dir)?;
        let path = dir.join("fields.txt");
        write_file(&path, |w| {
            write_grid(w, &outcome.state, problem.domain, grid)
        })?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = dump {
        let system = assembler.newton_system(&outcome.state.to_vector(), AssemblyMode::Newton)?;
        write_file(path, |w| system.matrix.write_coordinate(w))?;
        println!(
            "wrote {} ({} x {}, {} entries)",
            path.display(),
            system.matrix.n_rows(),
            system.matrix.n_cols(),
            system.matrix.nnz()
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Solve {
            opts,
            resolution,
            out,
            grid,
            dump_matrix,
        } => {
            let c = load(config, &opts)?;
            solve(
                &c,
                resolution,
                out.as_deref(),
                grid as usize,
                dump_matrix.as_deref(),
            )
        }
        Command::Convergence { opts, out } => {
            let c = load(config, &opts)?;
            if c.resolutions.len() < 2 {
                return Err(
                    Usage("a convergence study needs at least two resolutions".into()).into(),
                );
            }
            let report = convergence_study(
                &c.benchmark(),
                c.family(),
                &c.resolutions,
                c.element_kind(),
                &c.newton(),
            )?;
            let text = match c.format {
                Format::Csv => report.to_csv(),
                Format::Markdown => report.to_markdown(),
            };
            emit(&text, out.as_deref(), "convergence", c.format)
        }
        Command::Projections {
            opts,
            velocity,
            out,
        } => {
            let mut c = load(config, &opts)?;
            if let Some(v) = velocity {
                c.velocity = v;
            }
            if c.mesh.is_some_and(|m| m == MeshChoice::LshapeGraded) {
                return Err(
                    Usage("projection studies run on the problem's uniform meshes".into()).into(),
                );
            }
            if c.resolutions.len() < 2 {
                return Err(
                    Usage("a projection study needs at least two resolutions".into()).into(),
                );
            }
            let velocity = match c.velocity {
                VelocityChoice::Exact => Velocity::Exact,
                VelocityChoice::Zero => Velocity::Zero,
            };
            let report =
                projection_study(&c.benchmark(), &c.resolutions, c.element_kind(), velocity)?;
            let text = match c.format {
                Format::Csv => report.to_csv(),
                Format::Markdown => report.to_markdown(),
            };
            emit(&text, out.as_deref(), "projections", c.format)
        }
        Command::ExportMesh {
            mesh,
            resolution,
            out,
        } => {
            let c = load_unchecked(
                config,
                &Overrides {
                    mesh,
                    ..Overrides::default()
                },
            )?;
            let m = c
                .family()
                .build(resolution)
                .map_err(|e| Usage(e.to_string()))?;
            match out {
                Some(path) => write_file(&path, |w| m.write_text(w)),
                None => {
                    let mut w = BufWriter::new(io::stdout().lock());
                    m.write_text(&mut w)
                        .and_then(|_| w.flush())
                        .context("writing mesh")
                }
            }
        }
        Command::ShowConfig { opts } => {
            print!("{}", load(config, &opts)?.to_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(history) = nonconvergence_history(&e) {
                eprintln!("error: {e}");
                eprintln!("increment history:");
                let _ = write_history(io::stderr().lock(), history);
                return ExitCode::from(3);
            }
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn nonconvergence_history(e: &anyhow::Error) -> Option<&[f64]> {
    let solver =
        e.downcast_ref::<SolverError>()
            .or_else(|| match e.downcast_ref::<AnalysisError>()? {
                AnalysisError::Study { source, .. } | AnalysisError::Solver(source) => Some(source),
                _ => None,
            })?;
    match solver {
        SolverError::NonConvergence { history } => Some(history),
        _ => None,
    }
}
