use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scaffold_core::field::{Axis, GridTransform};
use scaffold_core::pipeline::{
    cmd_all, cmd_eval, cmd_mesh, cmd_run, cmd_slice, cmd_stats, load_transform, progress_line, sibling_transform,
    with_threads, IsoPolicy, MeshOutcome, PipelineConfig, PipelineError, EVAL_FILE, EXIT_OK, EXIT_VALIDATION,
    FOOD_FILE,
};

/// Grow transport-network scaffolds over 3D geometry and mesh them for printing.
#[derive(Debug, Parser)]
#[command(name = "scaffold", version)]
struct Cli {
    /// Worker threads; results are identical for any count.
    #[arg(long, global = true, env = "SCAFFOLD_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate and write trace.npy, deposit.npy, transform.txt, food.txt and run.log.
    Run(RunArgs),
    /// Extract a watertight STL from an NPY field.
    Mesh {
        field: PathBuf,
        #[command(flatten)]
        iso: IsoArgs,
        /// Grid transform file; defaults to transform.txt beside the field.
        #[arg(long)]
        transform: Option<PathBuf>,
        /// Output STL; defaults to the field path with an .stl extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one axis-aligned slice of an NPY field as a PGM image.
    Slice {
        field: PathBuf,
        #[arg(long)]
        axis: Axis,
        #[arg(long)]
        index: usize,
        /// Output PGM; defaults to `<field>_<axis><index>.pgm`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print statistics of an NPY field or a mesh file.
    Stats { path: PathBuf },
    /// Compare a trace field against the minimum spanning tree of its food points.
    Eval {
        field: PathBuf,
        #[command(flatten)]
        iso: IsoArgs,
        /// Food points in model units; defaults to food.txt beside the field.
        #[arg(long)]
        food: Option<PathBuf>,
        #[arg(long)]
        transform: Option<PathBuf>,
        /// Output CSV; defaults to eval.csv beside the field.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run, mesh and evaluate in one go.
    All(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
struct IsoArgs {
    /// Absolute iso value.
    #[arg(long)]
    iso: Option<f64>,
    /// Percentile of the nonzero voxels, in (0, 100]. Default 50.
    #[arg(long)]
    iso_percentile: Option<f64>,
}

impl IsoArgs {
    fn policy(&self) -> IsoPolicy {
        match (self.iso, self.iso_percentile) {
            (Some(v), _) => IsoPolicy::Absolute(v),
            (_, Some(p)) => IsoPolicy::Percentile(p),
            _ => IsoPolicy::default(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let threads = cli.threads;
    let result = with_threads(threads, move || execute(cli.command)).and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let PipelineError::NotWatertight(report) = &e {
                for issue in &report.issues {
                    eprintln!("  {issue}");
                }
                if report.offending_edges > report.issues.len() {
                    eprintln!("  ... {} more", report.offending_edges - report.issues.len());
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(args: &RunArgs) -> Result<PipelineConfig, PipelineError> {
    let mut config = PipelineConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.params.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn transform_for(field: &Path, explicit: &Option<PathBuf>) -> Result<GridTransform, PipelineError> {
    match explicit {
        Some(path) => load_transform(path),
        None => sibling_transform(field),
    }
}

fn report_mesh(outcome: &MeshOutcome) {
    match outcome {
        MeshOutcome::Written { path, iso, stats } => {
            println!("iso={iso}");
            println!("{stats}");
            println!("wrote {}", path.display());
        }
        MeshOutcome::Empty { iso: Some(iso) } => {
            eprintln!("warning: no voxel reaches iso {iso}; no STL written")
        }
        MeshOutcome::Empty { iso: None } => eprintln!("warning: field is all zero; no STL written"),
    }
}

fn execute(command: Command) -> Result<(), PipelineError> {
    let mut progress = |stage: &str, k: usize, n: usize| eprintln!("{}", progress_line(stage, k, n));
    match command {
        Command::Run(args) => {
            let run = cmd_run(&load_config(&args)?, &mut progress)?;
            println!("wrote {}", run.output_dir.display());
        }
        Command::All(args) => {
            let all = cmd_all(&load_config(&args)?, &mut progress)?;
            report_mesh(&all.mesh);
            println!("{}", all.report);
        }
        Command::Mesh {
            field,
            iso,
            transform,
            out,
        } => {
            let transform = transform_for(&field, &transform)?;
            let out = out.unwrap_or_else(|| field.with_extension("stl"));
            report_mesh(&cmd_mesh(&field, iso.policy(), &transform, &out)?);
        }
        Command::Slice {
            field,
            axis,
            index,
            out,
        } => {
            let out = out.unwrap_or_else(|| {
                let stem = field.file_stem().and_then(|s| s.to_str()).unwrap_or("field");
                let axis = format!("{axis:?}").to_ascii_lowercase();
                field.with_file_name(format!("{stem}_{axis}{index}.pgm"))
            });
            cmd_slice(&field, axis, index, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Stats { path } => println!("{}", cmd_stats(&path)?.one_line()),
        Command::Eval {
            field,
            iso,
            food,
            transform,
            out,
        } => {
            let transform = transform_for(&field, &transform)?;
            let food = food.unwrap_or_else(|| field.with_file_name(FOOD_FILE));
            let out = out.unwrap_or_else(|| field.with_file_name(EVAL_FILE));
            let report = cmd_eval(&field, &food, iso.policy(), &transform, Some(&out))?;
            println!("{report}");
        }
    }
    Ok(())
}
