use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mixwave::cli::{cmd_convergence, cmd_energy, cmd_run, load_config, CommandOptions, Config};

#[derive(Parser)]
#[command(
    name = "mixwave",
    version,
    about = "Mass-lumped mixed finite elements for the acoustic wave system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// configuration file (defaults of the plane-wave scenario if omitted)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// worker threads (1 gives bit-reproducible output)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// run even if the time step exceeds the estimated stability bound
    #[arg(long, global = true)]
    allow_cfl_violation: bool,

    /// progress messages on stderr
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// one level with VTK snapshots and a norms table
    Run,
    /// convergence table over all configured levels
    Convergence,
    /// discrete energy of a homogeneous run from random data
    Energy,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: &Cli) -> mixwave::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| mixwave::Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    let cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => Config::default(),
    };
    let opts = CommandOptions {
        out_dir: cli.out.clone(),
        allow_cfl_violation: cli.allow_cfl_violation,
        verbose: cli.verbose,
    };
    match cli.command {
        Command::Run => {
            let out = cmd_run(&cfg, &opts)?;
            for p in &out.snapshots {
                println!("wrote {}", p.display());
            }
            println!("wrote {}", out.norms.display());
        }
        Command::Convergence => {
            let (report, path) = cmd_convergence(&cfg, &opts)?;
            print!("{}", report.to_csv());
            println!("wrote {}", path.display());
        }
        Command::Energy => {
            let s = cmd_energy(&cfg, &opts)?;
            println!(
                "tau {:.6e} (tau_max {:.6e}), {} steps, max relative drift {:.3e}, growth {:.3e}",
                s.tau, s.tau_max, s.steps_done, s.max_drift, s.growth
            );
            if s.unstable {
                println!("status: UNSTABLE (energy growth beyond 1e3 or non-finite values)");
            } else {
                println!("status: stable");
            }
            println!("wrote {}", s.path.display());
        }
    }
    Ok(())
}
