use std::io::Write as _;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use thiserror::Error;
use vecdyn::batch::available_workers;
use vecdyn::builtin;
use vecdyn::model::{floating_base, RobotModel};
use vecdyn::urdf::load_urdf;

use crate::report::{BenchReport, Format, SCHEMA_VERSION};
use crate::stats::timer_resolution;
use crate::suites::{self, Timing, DEFAULT_BATCH_SIZES};

/// Directory for reports when `--output` is not given.
pub const OUTPUT_DIR_ENV: &str = "VECDYN_BENCH_DIR";
pub const MIN_ITERATIONS: usize = 1000;
pub const MAX_TIMER_RESOLUTION: Duration = Duration::from_nanos(100);

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Rbda,
    Batch,
    Control,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Rbda => "rbda",
            Suite::Batch => "batch",
            Suite::Control => "control",
        }
    }
}

#[derive(Clone, Debug, Parser)]
#[command(
    name = "vecdyn-bench",
    version,
    about = "Time vecdyn kinematics, dynamics and controllers"
)]
pub struct Args {
    /// Bundled robot: chain7, humanoid23 or humanoid29.
    #[arg(long, default_value = "chain7", conflicts_with = "urdf")]
    pub robot: String,
    /// Load the robot from a URDF file instead.
    #[arg(long)]
    pub urdf: Option<PathBuf>,
    /// Mount the URDF robot on a 6-DOF floating base.
    #[arg(long, requires = "urdf")]
    pub floating_base: bool,
    #[arg(long, value_enum, default_value_t = Suite::Rbda)]
    pub suite: Suite,
    /// Timed iterations per case (at least 1000).
    #[arg(long, default_value_t = 10_000)]
    pub iterations: usize,
    /// Untimed iterations before each case.
    #[arg(long, default_value_t = 200)]
    pub warmup: usize,
    /// Batch sizes for the batch suite.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_BATCH_SIZES)]
    pub sizes: Vec<usize>,
    /// Worker threads for the batch suite [default: available parallelism].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Task frame for the control suite [default: robot-specific].
    #[arg(long)]
    pub frame: Option<String>,
    /// Report path. Without it the report goes to $VECDYN_BENCH_DIR if set, else stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("failed to load model: {0}")]
    Model(String),
    #[error(
        "monotonic clock resolution {0:?} is coarser than the required {MAX_TIMER_RESOLUTION:?}"
    )]
    TimerResolution(Duration),
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("failed to write report: {0}")]
    Io(#[from] std::io::Error),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => 2,
            BenchError::Model(_) => 3,
            BenchError::TimerResolution(_) => 4,
            BenchError::Io(_) => 5,
        }
    }
}

fn load(args: &Args) -> Result<(RobotModel, String), BenchError> {
    match &args.urdf {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| BenchError::Model(format!("{}: {e}", path.display())))?;
            let model = load_urdf(&text)
                .map_err(|e| BenchError::Model(format!("{}: {e}", path.display())))?;
            let model = if args.floating_base {
                floating_base(&model).map_err(|e| BenchError::Model(e.to_string()))?
            } else {
                model
            };
            let name = path
                .file_stem()
                .map_or_else(|| model.name.clone(), |s| s.to_string_lossy().into_owned());
            Ok((model, name))
        }
        None => builtin::by_name(&args.robot)
            .map(|m| (m, args.robot.clone()))
            .ok_or_else(|| {
                BenchError::Model(format!(
                    "unknown robot `{}`; expected one of {:?}",
                    args.robot,
                    builtin::NAMES
                ))
            }),
    }
}

fn default_frame(model: &RobotModel) -> Option<String> {
    ["arm7_hand_tcp", "left_hand_link"]
        .into_iter()
        .find(|f| model.frame(f).is_some())
        .map(str::to_string)
        .or_else(|| {
            model
                .frames()
                .iter()
                .rev()
                .find(|f| f.joint.is_some())
                .map(|f| f.name.clone())
        })
}

/// Loads the model, runs the suite and returns the report.
pub fn run(args: &Args) -> Result<BenchReport, BenchError> {
    if args.iterations < MIN_ITERATIONS {
        return Err(BenchError::Usage(format!(
            "--iterations must be at least {MIN_ITERATIONS}, got {}",
            args.iterations
        )));
    }
    let workers = args.workers.unwrap_or_else(available_workers);
    if workers == 0 {
        return Err(BenchError::Usage("--workers must be at least 1".into()));
    }
    if args.sizes.is_empty() || args.sizes.contains(&0) {
        return Err(BenchError::Usage(
            "--sizes must list positive batch sizes".into(),
        ));
    }
    let resolution = timer_resolution();
    if resolution > MAX_TIMER_RESOLUTION {
        return Err(BenchError::TimerResolution(resolution));
    }
    let (model, robot) = load(args)?;
    let timing = Timing {
        warmup: args.warmup,
        iterations: args.iterations,
    };
    let mut notes = vec![
        "compile-time (JIT) columns do not apply to an ahead-of-time build and are omitted"
            .to_string(),
        "threads are not pinned to cores; expect scheduler variance".to_string(),
    ];
    let records = match args.suite {
        Suite::Rbda => suites::rbda(&model, &robot, &timing, args.seed),
        Suite::Batch => {
            notes.push(format!(
                "{} hardware threads available",
                available_workers()
            ));
            suites::batch(&model, &robot, &timing, args.seed, &args.sizes, workers)
        }
        Suite::Control => {
            let frame = match &args.frame {
                Some(f) if model.frame(f).is_some() => f.clone(),
                Some(f) => return Err(BenchError::Usage(format!("unknown frame `{f}`"))),
                None => default_frame(&model)
                    .ok_or_else(|| BenchError::Usage("model has no moving frame".into()))?,
            };
            notes.push(format!("task frame {frame}"));
            suites::control(&model, &robot, &frame, &timing, args.seed)
        }
    };
    Ok(BenchReport {
        schema_version: SCHEMA_VERSION,
        suite: args.suite.name().into(),
        robot,
        n_dof: model.n_dof(),
        seed: args.seed,
        workers,
        timer_resolution_ns: resolution.as_nanos() as u64,
        notes,
        records,
    })
}

/// Where the report should go: `--output`, else `$VECDYN_BENCH_DIR/<suite>-<robot>.<ext>`, else stdout.
pub fn output_path(args: &Args, report: &BenchReport) -> Option<PathBuf> {
    args.output.clone().or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV).map(|dir| {
            PathBuf::from(dir).join(format!(
                "{}-{}.{}",
                report.suite,
                report.robot,
                args.format.extension()
            ))
        })
    })
}

pub fn write_report(args: &Args, report: &BenchReport) -> Result<Option<PathBuf>, BenchError> {
    let path = output_path(args, report);
    let sink: Box<dyn std::io::Write> = match &path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(std::io::BufWriter::new(std::fs::File::create(p)?))
        }
        None => Box::new(std::io::stdout().lock()),
    };
    match args.format {
        Format::Csv => report.write_csv(sink)?,
        Format::Json => {
            let mut sink = sink;
            report.write_json(&mut sink).map_err(std::io::Error::from)?;
            writeln!(sink)?;
        }
    }
    Ok(path)
}
