use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use plannerbench_arena::{serve, ServerConfig, DEFAULT_UPLOAD_LIMIT};
use plannerbench_core::benchlog::{parse_log, write_log};
use plannerbench_core::planners::BuiltinPlanners;
use plannerbench_core::runner::{load_config, run_benchmark_with, RunOptions};
use plannerbench_db::ResultsDb;

#[derive(Parser)]
#[command(name = "plannerbench", version, about = "Benchmark sampling-based motion planners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark configuration and write its log.
    Run(RunArgs),
    /// Manage a results database.
    #[command(subcommand)]
    Db(DbCommand),
    /// Serve the results explorer API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Log file to write; defaults to `<experiment>.log`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Base seed; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Version string recorded in the log.
    #[arg(long)]
    version_tag: Option<String>,
    /// Override the number of runs per planner.
    #[arg(long)]
    runs: Option<u64>,
    /// Override the per-run time limit (seconds).
    #[arg(long)]
    time_limit: Option<f64>,
    /// Directory for saved paths; defaults next to the log.
    #[arg(long)]
    path_dir: Option<PathBuf>,
    /// Suppress per-run progress output.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Subcommand)]
enum DbCommand {
    /// Add log files to a database (created if missing).
    Add {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        db: PathBuf,
    },
    /// Summarize a database.
    Info {
        #[arg(long)]
        db: PathBuf,
    },
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    db: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    /// Directory with the UI bundle served at `/`.
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Upload size cap in bytes.
    #[arg(long, default_value_t = DEFAULT_UPLOAD_LIMIT)]
    upload_limit: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Db(DbCommand::Add { logs, db }) => db_add(&logs, &db),
        Command::Db(DbCommand::Info { db }) => db_info(&db),
        Command::Serve(args) => serve_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: RunArgs) -> Result<(), String> {
    let mut spec = load_config(&args.config).map_err(|e| e.to_string())?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(runs) = args.runs {
        spec.run_count = runs;
    }
    if let Some(t) = args.time_limit {
        if !(t > 0.0) {
            return Err("--time-limit must be positive".into());
        }
        spec.time_limit = t;
    }
    let output = args
        .output
        .unwrap_or_else(|| PathBuf::from(format!("{}.log", spec.name)));
    let mut options = RunOptions::default();
    if let Some(v) = args.version_tag {
        options.version = v;
    }
    options.path_dir = Some(args.path_dir.unwrap_or_else(|| {
        output
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."))
            .to_path_buf()
    }));
    let total = spec.run_count;
    let quiet = args.quiet;
    let log = run_benchmark_with(&spec, &BuiltinPlanners, &options, |p, run, record| {
        if !quiet {
            eprintln!(
                "{} run {}/{}: {} in {:.3} s",
                p.instance_name,
                run + 1,
                total,
                record.status,
                record.real("time").unwrap_or(f64::NAN)
            );
        }
    })
    .map_err(|e| e.to_string())?;
    let text = write_log(&log).map_err(|e| e.to_string())?;
    std::fs::write(&output, text).map_err(|e| format!("{}: {e}", output.display()))?;
    println!("{}", output.display());
    Ok(())
}

fn db_add(logs: &[PathBuf], db: &Path) -> Result<(), String> {
    let mut conn = ResultsDb::open(db).map_err(|e| e.to_string())?;
    for path in logs {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let log = parse_log(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let id = conn.ingest_log(&log).map_err(|e| format!("{}: {e}", path.display()))?;
        println!("{}: experiment {id}", path.display());
    }
    Ok(())
}

fn db_info(db: &Path) -> Result<(), String> {
    if !db.exists() {
        return Err(format!("{}: no such database", db.display()));
    }
    let conn = ResultsDb::open(db).map_err(|e| e.to_string())?;
    let (experiments, runs, progress) = conn.counts().map_err(|e| e.to_string())?;
    let e = conn.list_entities().map_err(|e| e.to_string())?;
    println!("experiments: {experiments}");
    println!("runs: {runs}");
    println!("progress samples: {progress}");
    println!("problems: {}", e.problems.join(", "));
    println!("planners: {}", e.planners.join(", "));
    println!("versions: {}", e.versions.join(", "));
    let attrs = |a: &[plannerbench_db::PropertyInfo]| {
        a.iter()
            .map(|p| format!("{} {}", p.name, p.tag))
            .collect::<Vec<_>>()
            .join(", ")
    };
    println!("run attributes: {}", attrs(&e.run_attributes));
    println!("progress attributes: {}", attrs(&e.progress_attributes));
    Ok(())
}

fn serve_cmd(args: ServeArgs) -> Result<(), String> {
    // fail early on unreadable or corrupt files
    ResultsDb::open(&args.db).map_err(|e| e.to_string())?;
    let config = ServerConfig {
        db_path: args.db,
        static_dir: args.static_dir,
        upload_limit: args.upload_limit,
    };
    let addr = SocketAddr::new(args.host, args.port);
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    eprintln!("listening on http://{addr}");
    rt.block_on(serve(config, addr)).map_err(|e| e.to_string())
}
