use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hforge_cli::{config, schema, Status};

#[derive(Parser)]
#[command(name = "hforge", version, about = "Run geometric and holonomic gate scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario and write <stem>.report.json (and <stem>.csv for sweeps).
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output stem; defaults to the config's `output`, resolved next to the config file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "HFORGE_THREADS")]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Tolerance override, e.g. `holonomy=1e-6`; repeatable.
        #[arg(long = "tol-override", value_name = "KEY=VAL")]
        tol_override: Vec<String>,
    },
    /// Check a config against the schema without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the scenario catalog.
    List {
        /// Emit the full parameter schema as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn load(path: &PathBuf) -> Result<config::ScenarioConfig, ExitCode> {
    let src = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(Status::Usage as u8)
    })?;
    config::parse(&src).map_err(|diags| {
        for d in diags {
            eprintln!("{}: {d}", path.display());
        }
        ExitCode::from(Status::Usage as u8)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Status::Usage as u8 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::List { json } => {
            let cat = schema::catalog();
            if json {
                println!("{}", serde_json::to_string_pretty(&cat).unwrap());
            } else {
                for s in &cat {
                    let params: Vec<String> =
                        s.params.iter().map(|p| if p.required() { p.name.to_string() } else { format!("[{}]", p.name) }).collect();
                    println!("{:<26} {:<9} {}", s.name, s.kind.name(), s.summary);
                    println!("{:<36} {}", "", params.join(" "));
                }
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                println!("{}: ok ({} / {})", config.display(), cfg.kind.name(), cfg.builder);
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { config, out, threads, seed, tol_override } => {
            let mut cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            for o in &tol_override {
                if let Err(e) = config::apply_override(&mut cfg, o) {
                    eprintln!("error: {e}");
                    return ExitCode::from(Status::Usage as u8);
                }
            }
            let threads = threads.unwrap_or(0);
            if threads > 0 {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
                    eprintln!("error: thread pool: {e}");
                    return ExitCode::from(Status::Usage as u8);
                }
            }
            let stem = out.unwrap_or_else(|| config.parent().unwrap_or_else(|| ".".as_ref()).join(&cfg.output));
            match hforge_cli::run(&cfg, &stem, rayon::current_num_threads()) {
                Ok(status) => {
                    let (report, _, _) = hforge_cli::output_paths(&stem);
                    let verdict = if status == Status::Passed { "passed" } else { "FAILED" };
                    println!("{}: assertions {verdict}", report.display());
                    ExitCode::from(status as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(Status::Usage as u8)
                }
            }
        }
    }
}
