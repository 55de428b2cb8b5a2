use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rgcn_core::model::fixtures;
use rgcn_core::Error;
use rgcn_experiments::{run, ExperimentConfig, Scenario};

#[derive(Parser)]
#[command(name = "rgcn", about = "Convergence and stability experiments for GCNs on random graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write `<out>/<scenario>.csv`.
    Run {
        scenario: String,
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output_dir`, then `results`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the built-in model and deformation fixtures.
    ListFixtures,
    /// Parse and validate a config file without running it.
    ValidateConfig { file: PathBuf },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Parse { .. } => 2,
        Error::Io(_) => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::ListFixtures => {
            println!("models:");
            for name in fixtures::MODEL_NAMES {
                let m = fixtures::model(name)?;
                println!(
                    "  {name:<22} d={} c_min={} c_max={} ({})",
                    m.dimension(),
                    m.kernel.c_min,
                    m.kernel.c_max,
                    m.space.description()
                );
            }
            println!("deformations:");
            for name in fixtures::DEFORMATION_NAMES {
                println!("  {name}");
            }
            Ok(())
        }
        Command::ValidateConfig { file } => {
            let cfg = ExperimentConfig::from_file(&file)?;
            println!("{}: ok ({} on `{}`)", file.display(), cfg.scenario, cfg.model_name);
            Ok(())
        }
        Command::Run { scenario, config, out, seed, jobs } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            cfg.scenario = scenario.parse::<Scenario>()?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(j) = jobs {
                pool = pool.num_threads(j.max(1));
            }
            let pool = pool.build().map_err(|e| Error::Config { key: "jobs".into(), message: e.to_string() })?;
            let table = pool.install(|| run(&cfg))?;
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(format!("{}.csv", cfg.scenario));
            table.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
            println!("wrote {} rows to {}", table.rows.len(), path.display());
            Ok(())
        }
    }
}
