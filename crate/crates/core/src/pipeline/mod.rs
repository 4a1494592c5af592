//! End-to-end pipeline: geometry in, simulated field, printable STL out.
//!
//! Each `cmd_*` function is one CLI subcommand. They return structured
//! results and report progress through a callback; printing is left to the
//! caller. Errors map onto stable process exit codes through
//! [`PipelineError::exit_code`].

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::eval::{network_report, NetworkReport};
use crate::field::{field_stats, slice_to_image, Axis, FieldError, FieldStats, GridTransform, ScalarField3D};
use crate::geometry::{
    load_mesh, load_points, mesh_to_points, read_npy, thicken_points, write_npy, write_points, write_stl_binary,
    GeometryError, MeshFormat, PointCloud,
};
use crate::mcpm::{FoodSources, SimError, SimState};
use crate::reconstruct::{
    is_watertight, marching_cubes, mesh_stats, IsoSurfaceMesh, MeshStats, ReconstructError, WatertightReport,
};

pub use config::{ConfigError, InputKind, IsoPolicy, PipelineConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NOT_WATERTIGHT: i32 = 3;

pub const TRACE_FILE: &str = "trace.npy";
pub const DEPOSIT_FILE: &str = "deposit.npy";
pub const TRANSFORM_FILE: &str = "transform.txt";
pub const FOOD_FILE: &str = "food.txt";
pub const LOG_FILE: &str = "run.log";
pub const MESH_FILE: &str = "scaffold.stl";
pub const EVAL_FILE: &str = "eval.csv";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid {name}: {message}")]
    Invalid { name: String, message: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("mesh is not watertight: {} offending edges", .0.offending_edges)]
    NotWatertight(WatertightReport),
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn invalid(name: &str, message: impl Into<String>) -> Self {
        PipelineError::Invalid {
            name: name.to_string(),
            message: message.into(),
        }
    }

    /// 1 for bad configuration or arguments, 2 for unreadable, unwritable or
    /// malformed files, 3 for a mesh that failed the watertight check.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Invalid { .. } | PipelineError::Sim(_) => EXIT_VALIDATION,
            PipelineError::Geometry(e) => match e {
                GeometryError::MissingNormals | GeometryError::InvalidOffset(_) | GeometryError::Invalid(_) => {
                    EXIT_VALIDATION
                }
                _ => EXIT_IO,
            },
            PipelineError::Field(FieldError::Io(_)) | PipelineError::Io { .. } => EXIT_IO,
            PipelineError::Field(_) => EXIT_VALIDATION,
            PipelineError::NotWatertight(_) => EXIT_NOT_WATERTIGHT,
        }
    }
}

impl From<ReconstructError> for PipelineError {
    fn from(e: ReconstructError) -> Self {
        match e {
            ReconstructError::InvalidIso(_) => PipelineError::invalid("iso", e.to_string()),
        }
    }
}

/// Receives `(stage, step, total)` progress events.
pub type Progress<'a> = &'a mut dyn FnMut(&str, usize, usize);

/// The line printed for one progress event.
pub fn progress_line(stage: &str, step: usize, total: usize) -> String {
    format!("stage={stage} step={step}/{total}")
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`. Results never depend on the count.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(PipelineError::invalid("threads", "must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| PipelineError::invalid("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Paths written by [`cmd_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub output_dir: PathBuf,
    pub trace: PathBuf,
    pub deposit: PathBuf,
    pub transform: GridTransform,
    pub food: PathBuf,
    pub log: PathBuf,
    pub snapshots: Vec<PathBuf>,
    pub dims: [usize; 3],
}

/// Loads the configured input and prepares the food point cloud, in model units.
pub fn ingest(config: &PipelineConfig) -> Result<PointCloud, PipelineError> {
    let mut cloud = match config.input_kind {
        InputKind::Points => load_points(&config.input)?,
        InputKind::Mesh => mesh_to_points(&load_mesh(&config.input, MeshFormat::Auto)?, config.weld_epsilon),
    };
    if let Some(offset) = config.thicken_offset {
        cloud = thicken_points(&cloud, offset)?;
    }
    Ok(cloud)
}

fn create_dir(dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

/// Ingests geometry, fits the grid, simulates, and writes the trace and
/// deposit fields, the grid transform, the food points, optional snapshots
/// and a replayable `run.log`.
pub fn cmd_run(config: &PipelineConfig, progress: Progress) -> Result<RunArtifacts, PipelineError> {
    config.validate()?;
    let out = &config.output_dir;
    progress("ingest", 0, 1);
    let cloud = ingest(config)?;
    let (transform, dims) = crate::field::fit_transform(&cloud, config.resolution, config.margin)?;
    progress("ingest", 1, 1);

    create_dir(out)?;
    let food_path = out.join(FOOD_FILE);
    write_points(&cloud, &food_path)?;
    let transform_path = out.join(TRANSFORM_FILE);
    write_text(&transform_path, &format!("{transform}\n"))?;

    let food = FoodSources::from_cloud(&cloud, &transform);
    let mut state = SimState::new(config.params.clone(), food, dims)?.with_transform(transform);
    let n = config.params.num_steps;
    let report_every = (n / 20).max(1);
    let mut snapshots = Vec::new();
    progress("simulate", 0, n);
    for _ in 0..n {
        state.advance();
        let k = state.step;
        if config.snapshot_interval > 0 && k % config.snapshot_interval == 0 {
            let npy = out.join(format!("trace_{k:06}.npy"));
            write_npy(&state.trace, &npy)?;
            let pgm = out.join(format!("trace_{k:06}.pgm"));
            slice_to_image(&state.trace, Axis::Z, dims[2] / 2, &pgm)?;
            snapshots.extend([npy, pgm]);
        }
        if k % report_every == 0 || k == n {
            progress("simulate", k, n);
        }
    }

    let trace = out.join(TRACE_FILE);
    let deposit = out.join(DEPOSIT_FILE);
    write_npy(&state.trace, &trace)?;
    write_npy(&state.deposit, &deposit)?;
    let log = out.join(LOG_FILE);
    write_text(&log, &run_log(config, &transform, dims))?;

    Ok(RunArtifacts {
        output_dir: out.clone(),
        trace,
        deposit,
        transform,
        food: food_path,
        log,
        snapshots,
        dims,
    })
}

/// Resolved config with absolute paths, parseable as a config file.
fn run_log(config: &PipelineConfig, transform: &GridTransform, dims: [usize; 3]) -> String {
    let mut resolved = config.clone();
    resolved.input = std::path::absolute(&config.input).unwrap_or_else(|_| config.input.clone());
    resolved.output_dir = std::path::absolute(&config.output_dir).unwrap_or_else(|_| config.output_dir.clone());
    let mut text = format!(
        "# scaffold {}\n# replay: scaffold run --config run.log\n# grid = {} {} {}\n",
        env!("CARGO_PKG_VERSION"),
        dims[0],
        dims[1],
        dims[2]
    );
    for line in transform.to_string().lines() {
        text += &format!("# {line}\n");
    }
    text + &resolved.to_config_text()
}

/// Reads a `transform.txt` sidecar.
pub fn load_transform(path: &Path) -> Result<GridTransform, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    text.parse().map_err(|e: FieldError| {
        PipelineError::Geometry(GeometryError::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })
    })
}

/// The sidecar transform next to `field`, or identity if there is none.
pub fn sibling_transform(field: &Path) -> Result<GridTransform, PipelineError> {
    let path = field.with_file_name(TRANSFORM_FILE);
    if path.is_file() {
        load_transform(&path)
    } else {
        Ok(GridTransform::IDENTITY)
    }
}

/// What [`cmd_mesh`] produced.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshOutcome {
    Written {
        path: PathBuf,
        iso: f64,
        stats: MeshStats,
    },
    /// No voxel reached the iso value; nothing was written.
    Empty {
        iso: Option<f64>,
    },
}

/// Extracts the `iso` surface of the field at `field_path`, checks it is
/// watertight and writes it as binary STL.
pub fn cmd_mesh(
    field_path: &Path,
    iso: IsoPolicy,
    transform: &GridTransform,
    out: &Path,
) -> Result<MeshOutcome, PipelineError> {
    let field = read_npy(field_path)?;
    mesh_field(&field, iso, transform, out)
}

fn mesh_field(
    field: &ScalarField3D,
    iso: IsoPolicy,
    transform: &GridTransform,
    out: &Path,
) -> Result<MeshOutcome, PipelineError> {
    iso.validate().map_err(|m| PipelineError::invalid("iso", m))?;
    let Some(value) = iso.resolve(field) else {
        return Ok(MeshOutcome::Empty { iso: None });
    };
    let mesh = marching_cubes(field, value, transform)?;
    if mesh.is_empty() {
        return Ok(MeshOutcome::Empty { iso: Some(value) });
    }
    let report = is_watertight(&mesh);
    if !report.watertight {
        return Err(PipelineError::NotWatertight(report));
    }
    let stats = mesh_stats(&mesh);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_stl_binary(&mesh.into_triangle_mesh(), out)?;
    Ok(MeshOutcome::Written {
        path: out.to_path_buf(),
        iso: value,
        stats,
    })
}

/// Writes one axis-aligned slice of an NPY field as a PGM image.
pub fn cmd_slice(field_path: &Path, axis: Axis, index: usize, out: &Path) -> Result<(), PipelineError> {
    let field = read_npy(field_path)?;
    slice_to_image(&field, axis, index, out)?;
    Ok(())
}

/// Statistics of an NPY field or of a mesh file.
#[derive(Debug, Clone, PartialEq)]
pub enum Stats {
    Field(FieldStats),
    Mesh(MeshStats),
}

impl Stats {
    /// All values on one line as `key=value` pairs.
    pub fn one_line(&self) -> String {
        let text = match self {
            Stats::Field(s) => s.to_string(),
            Stats::Mesh(s) => s.to_string(),
        };
        text.split_whitespace().collect::<Vec<_>>().join(" ")
    }
}

/// Field statistics for `.npy` files, mesh statistics (after welding
/// identical vertices) for mesh files.
pub fn cmd_stats(path: &Path) -> Result<Stats, PipelineError> {
    let is_npy = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("npy"));
    if is_npy {
        Ok(Stats::Field(field_stats(&read_npy(path)?)))
    } else {
        let mesh = load_mesh(path, MeshFormat::Auto)?;
        Ok(Stats::Mesh(mesh_stats(&IsoSurfaceMesh::weld(&mesh))))
    }
}

/// Scores the trace at `field_path` against food points given in model
/// units; writes the CSV to `out` when given.
pub fn cmd_eval(
    field_path: &Path,
    food_path: &Path,
    threshold: IsoPolicy,
    transform: &GridTransform,
    out: Option<&Path>,
) -> Result<NetworkReport, PipelineError> {
    let trace = read_npy(field_path)?;
    let cloud = load_points(food_path)?;
    let report = eval_field(&trace, &cloud, threshold, transform)?;
    if let Some(out) = out {
        write_text(out, &report.to_csv())?;
    }
    Ok(report)
}

fn eval_field(
    trace: &ScalarField3D,
    cloud: &PointCloud,
    threshold: IsoPolicy,
    transform: &GridTransform,
) -> Result<NetworkReport, PipelineError> {
    threshold
        .validate()
        .map_err(|m| PipelineError::invalid("threshold", m))?;
    // an all-zero trace has no percentile; nothing can reach +inf
    let t = threshold.resolve(trace).unwrap_or(f64::INFINITY);
    let food = FoodSources::from_cloud(cloud, transform);
    Ok(network_report(trace, &food, t, transform))
}

/// Everything [`cmd_all`] produced.
#[derive(Debug, Clone, PartialEq)]
pub struct AllArtifacts {
    pub run: RunArtifacts,
    pub mesh: MeshOutcome,
    pub report: NetworkReport,
}

/// [`cmd_run`], then meshing and evaluation of the trace with the same
/// transform and the configured iso policy.
pub fn cmd_all(config: &PipelineConfig, progress: Progress) -> Result<AllArtifacts, PipelineError> {
    let run = cmd_run(config, progress)?;
    progress("mesh", 0, 1);
    let trace = read_npy(&run.trace)?;
    let mesh = mesh_field(
        &trace,
        config.iso_policy,
        &run.transform,
        &run.output_dir.join(MESH_FILE),
    )?;
    progress("mesh", 1, 1);
    progress("eval", 0, 1);
    let cloud = load_points(&run.food)?;
    let report = eval_field(&trace, &cloud, config.iso_policy, &run.transform)?;
    write_text(&run.output_dir.join(EVAL_FILE), &report.to_csv())?;
    progress("eval", 1, 1);
    Ok(AllArtifacts { run, mesh, report })
}
