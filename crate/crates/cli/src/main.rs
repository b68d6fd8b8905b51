//! `frontlab`: analyze fronts and coherent tangent bundles, verify the
//! Gauss-Bonnet formulas, export meshes and singular-curve tables.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use frontlab_core::analysis::{analyze_graph, Report};
use frontlab_core::gb::{verify_global_gb, verify_local_gb, Triangle};
use frontlab_core::specfile::load_spec;
use frontlab_core::{export, gallery, Config, Error, SingularGraph, Surface};

#[derive(Parser)]
#[command(
    name = "frontlab",
    version,
    about = "Singularities and Gauss-Bonnet checks for frontals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace and classify the singular set; report singular curvature profiles.
    Analyze {
        /// Spec file path or `gallery:NAME`.
        input: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Verify the global or the local Gauss-Bonnet formula.
    Gb {
        input: String,
        #[arg(long, conflicts_with = "local", required_unless_present = "local")]
        global: bool,
        /// JSON file with one triangle or a list of triangles.
        #[arg(long, value_name = "FILE")]
        local: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write an OBJ mesh, a CSV of singular curves or a JSON report.
    Export {
        input: String,
        #[arg(long, value_enum)]
        what: What,
        /// Mesh vertices per side.
        #[arg(long, default_value_t = 200)]
        mesh_n: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Gallery of examples.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
}

#[derive(Subcommand)]
enum GalleryAction {
    /// Print the entry names.
    List,
    /// Run entries (all if none given) and check their expectations.
    Run {
        names: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print the spec file of an entry.
    Spec { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Mesh,
    SingularCurves,
    Report,
}

#[derive(Args)]
struct RunArgs {
    /// Seed grid cells per side.
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Quadrature refinement level (2^k cells per seed cell side).
    #[arg(long, default_value_t = 0)]
    refine: u32,
    #[arg(long)]
    tol_nondeg: Option<f64>,
    #[arg(long)]
    tol_angle: Option<f64>,
    #[arg(long)]
    tol_transv: Option<f64>,
    #[arg(long)]
    tol_a3: Option<f64>,
    #[arg(long)]
    tol_rank: Option<f64>,
    /// Output file; standard output if omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<Config, Error> {
        let mut cfg = Config::with_grid(self.grid);
        cfg.refine = self.refine;
        let t = &mut cfg.tol;
        for (dst, src) in [
            (&mut t.nondeg, self.tol_nondeg),
            (&mut t.angle, self.tol_angle),
            (&mut t.transv, self.tol_transv),
            (&mut t.a3, self.tol_a3),
            (&mut t.rank, self.tol_rank),
        ] {
            if let Some(x) = src {
                *dst = x;
            }
        }
        if cfg.refine > 6 {
            return Err(Error::Spec {
                line: None,
                message: format!("refinement level {} is above the maximum 6", cfg.refine),
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Process outcome: success, a failed check, or an error.
enum Outcome {
    Pass,
    Fail,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::HypothesisViolation(_) => 3,
        Error::TheoremAViolation { .. }
        | Error::ErrorBudgetExceeded { .. }
        | Error::EndpointDivergence { .. }
        | Error::ExpectationFailed { .. } => 2,
        _ => 1,
    }
}

fn load(input: &str) -> Result<Surface, Error> {
    match input.strip_prefix("gallery:") {
        Some(name) => gallery::surface(name),
        None => load_spec(&fs::read(input).map_err(|e| Error::Io(format!("{input}: {e}")))?),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Error> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn report<T: Serialize>(kind: &'static str, input: &str, cfg: Config, body: T) -> String {
    Report::new(kind, input, cfg, body).to_json()
}

fn read_triangles(path: &Path) -> Result<Vec<Triangle>, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<Triangle>),
        One(Triangle),
    }
    let parsed: OneOrMany = serde_json::from_str(&text).map_err(|e| Error::Spec {
        line: Some(e.line()),
        message: format!("triangle file: {e}"),
    })?;
    Ok(match parsed {
        OneOrMany::Many(v) => v,
        OneOrMany::One(t) => vec![t],
    })
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Analyze { input, format, run } => {
            let cfg = run.config()?;
            let surface = load(&input)?;
            let graph = SingularGraph::build(&surface, &cfg)?;
            let text = match format {
                Format::Json => report("analysis", &input, cfg, analyze_graph(&surface, &graph, &cfg)?),
                Format::Csv => export::curves_csv(&surface, &graph)?,
            };
            emit(run.output.as_deref(), &text)?;
            Ok(Outcome::Pass)
        }
        Command::Gb {
            input,
            global,
            local,
            run,
        } => {
            let cfg = run.config()?;
            let surface = load(&input)?;
            let triangles = local.as_deref().map(read_triangles).transpose()?;
            let graph = SingularGraph::build(&surface, &cfg)?;
            let (text, pass) = if global {
                let r = verify_global_gb(&surface, &graph, &cfg)?;
                let pass = r.pass;
                (report("gb-global", &input, cfg, r), pass)
            } else {
                let reports = triangles
                    .unwrap_or_default()
                    .iter()
                    .map(|t| verify_local_gb(&surface, &graph, t, &cfg))
                    .collect::<Result<Vec<_>, _>>()?;
                let pass = reports.iter().all(|r| r.pass);
                (report("gb-local", &input, cfg, reports), pass)
            };
            emit(run.output.as_deref(), &text)?;
            Ok(if pass { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Export {
            input,
            what,
            mesh_n,
            run,
        } => {
            let cfg = run.config()?;
            let surface = load(&input)?;
            let text = match what {
                What::Mesh => export::mesh_obj(&surface, mesh_n)?,
                What::SingularCurves => {
                    let graph = SingularGraph::build(&surface, &cfg)?;
                    export::curves_csv(&surface, &graph)?
                }
                What::Report => {
                    let graph = SingularGraph::build(&surface, &cfg)?;
                    report("analysis", &input, cfg, analyze_graph(&surface, &graph, &cfg)?)
                }
            };
            emit(run.output.as_deref(), &text)?;
            Ok(Outcome::Pass)
        }
        Command::Gallery { action } => match action {
            GalleryAction::List => {
                let mut text = gallery::names().join("\n");
                text.push('\n');
                emit(None, &text)?;
                Ok(Outcome::Pass)
            }
            GalleryAction::Spec { name } => {
                let surface = gallery::surface(&name)?;
                emit(None, &frontlab_core::specfile::to_spec_string(&surface))?;
                Ok(Outcome::Pass)
            }
            GalleryAction::Run { names, run } => {
                let cfg = run.config()?;
                let names: Vec<String> = if names.is_empty() {
                    gallery::names().iter().map(|s| s.to_string()).collect()
                } else {
                    names
                };
                let outcomes = names
                    .iter()
                    .map(|n| gallery::run_entry(n, &cfg).map(|(o, _)| o))
                    .collect::<Result<Vec<_>, _>>()?;
                let pass = outcomes.iter().all(|o| o.pass);
                let input = format!("gallery:{}", names.join(","));
                emit(run.output.as_deref(), &report("gallery", &input, cfg, outcomes))?;
                Ok(if pass { Outcome::Pass } else { Outcome::Fail })
            }
        },
    }
}

fn init_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("FRONTLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| Error::Spec {
        line: None,
        message: format!("FRONTLAB_THREADS must be a positive integer, got `{v}`"),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Internal(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| run(cli));
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => {
            eprintln!("frontlab: check failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("frontlab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
