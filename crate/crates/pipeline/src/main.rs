use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sehs::power::{energy_consumption, reference_budgets, write_power_table, PowerBudget};
use sehs::{exit, phase1, phase2, phase3, phase4, presets, report, ExperimentConfig, PipelineError, RunDir};

#[derive(Parser)]
#[command(name = "sehs", version, about = "Harvester design for simultaneous energy harvesting and damage sensing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigSource {
    /// Experiment config (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped preset name (see `sehs presets`).
    #[arg(long)]
    preset: Option<String>,
}

impl ConfigSource {
    fn load(&self) -> sehs::Result<ExperimentConfig> {
        match (&self.config, &self.preset) {
            (Some(p), _) => ExperimentConfig::load(p),
            (None, Some(n)) => presets::preset(n),
            (None, None) => Err(PipelineError::Config("pass --config or --preset".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Phase 1: bridge passages, harvester voltages and energies.
    Simulate {
        #[command(flatten)]
        source: ConfigSource,
        /// Run directory.
        #[arg(long)]
        run: PathBuf,
    },
    /// Phase 2: time-frequency images.
    Dataset {
        #[arg(long)]
        run: PathBuf,
    },
    /// Phase 3: detector training.
    Train {
        #[arg(long)]
        run: PathBuf,
    },
    /// Phase 3: thresholds and sensing accuracy.
    Evaluate {
        #[arg(long)]
        run: PathBuf,
    },
    /// Phase 4: surrogates and Pareto search.
    Optimize {
        #[arg(long)]
        run: PathBuf,
    },
    /// Result bundle of a run.
    Report {
        #[arg(long)]
        run: PathBuf,
    },
    /// Every phase in order.
    RunAll {
        #[command(flatten)]
        source: ConfigSource,
        #[arg(long)]
        run: PathBuf,
    },
    /// Energy consumption of a sensing node; without power arguments the
    /// reference comparison is printed.
    PowerBudget {
        /// Sensing power [μW] (negative for a harvesting sensor).
        #[arg(long, allow_hyphen_values = true)]
        p_sensing: Option<f64>,
        /// Sampling power [μW].
        #[arg(long, default_value_t = 480.0)]
        p_sample: f64,
        /// Sleep power [μW].
        #[arg(long, default_value_t = 6.0)]
        p_sleep: f64,
        /// Acquisition time [s].
        #[arg(long, default_value_t = 140.0)]
        t_sample: f64,
        /// Sleep time [s].
        #[arg(long, default_value_t = 0.0)]
        t_sleep: f64,
        /// Also write the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First harvester frequency over the (length, aspect ratio) box.
    FreqMap {
        #[arg(long, default_value_t = 0.0)]
        tip_mass: f64,
        /// Grid points per axis.
        #[arg(long, default_value_t = 8)]
        points: usize,
        #[arg(long, default_value_t = 12)]
        mesh: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// List shipped presets, or print one.
    Presets { name: Option<String> },
}

fn open(run: &Path) -> sehs::Result<(RunDir, ExperimentConfig)> {
    RunDir::open(run)
}

fn execute(cmd: Command) -> sehs::Result<i32> {
    let mut code = exit::SUCCESS;
    match cmd {
        Command::Simulate { source, run } => {
            let cfg = source.load()?;
            let run = RunDir::create(&run, &cfg)?;
            let out = phase1::run_phase1(&run, &cfg)?;
            println!(
                "{} passages, {} designs, {} quarantined",
                out.passages.len(),
                out.designs.len(),
                out.quarantined.len()
            );
        }
        Command::Dataset { run } => {
            let (run, cfg) = open(&run)?;
            let rows = phase2::run_phase2(&run, &cfg)?;
            println!("{} images", rows.len());
        }
        Command::Train { run } => {
            let (run, cfg) = open(&run)?;
            let failed = phase3::run_training(&run, &cfg)?;
            for f in &failed {
                eprintln!("training failed: {}/rep{}: {}", f.source, f.rep, f.message);
            }
            if !failed.is_empty() {
                code = exit::PARTIAL;
            }
        }
        Command::Evaluate { run } => {
            let (run, cfg) = open(&run)?;
            let out = phase3::run_evaluation(&run, &cfg)?;
            for a in &out.accuracy {
                println!("{:>6}  S = {:.3} ± {:.3}", a.source, a.accuracy_mean, a.accuracy_std);
            }
            if !out.skipped.is_empty() {
                code = exit::PARTIAL;
            }
        }
        Command::Optimize { run } => {
            let (run, cfg) = open(&run)?;
            let out = phase4::run_phase4(&run, &cfg)?;
            for c in &out.clusters {
                println!(
                    "cluster {}: L = {:.3} m [{:.3}, {:.3}], {} points",
                    c.cluster, c.length_center_m, c.length_min_m, c.length_max_m, c.points
                );
            }
        }
        Command::Report { run } => {
            let (run, cfg) = open(&run)?;
            let s = report::run_report(&run, &cfg)?;
            println!("{} files in {}", s.files.len() + 1, run.root.join(report::PHASE).display());
            for g in &s.gaps {
                eprintln!("gap: {g}");
            }
            if !s.gaps.is_empty() {
                code = exit::PARTIAL;
            }
        }
        Command::RunAll { source, run } => {
            let cfg = source.load()?;
            let run = RunDir::create(&run, &cfg)?;
            let s = sehs::run_all(&run, &cfg)?;
            for a in &s.evaluation.accuracy {
                println!("{:>6}  S = {:.3} ± {:.3}", a.source, a.accuracy_mean, a.accuracy_std);
            }
            for c in &s.optimization.clusters {
                println!("Pareto cluster at L = {:.3} m ({} points)", c.length_center_m, c.points);
            }
            if s.partial() {
                code = exit::PARTIAL;
            }
        }
        Command::PowerBudget {
            p_sensing,
            p_sample,
            p_sleep,
            t_sample,
            t_sleep,
            out,
        } => {
            let budgets = match p_sensing {
                Some(p) => vec![PowerBudget {
                    label: "custom".into(),
                    p_sensing_uw: p,
                    p_sample_uw: p_sample,
                    p_sleep_uw: p_sleep,
                    t_sample_s: t_sample,
                    t_sleep_s: t_sleep,
                }],
                None => reference_budgets(),
            };
            for b in &budgets {
                b.validate()?;
                println!("{:<26} {:.3} J", b.label, energy_consumption(b));
            }
            if let Some(path) = out {
                write_power_table(&path, &budgets)?;
            }
        }
        Command::FreqMap {
            tip_mass,
            points,
            mesh,
            out,
        } => {
            if points < 2 {
                return Err(PipelineError::Config("freq-map needs at least 2 points per axis".into()));
            }
            report::write_frequency_map(
                &out,
                tip_mass,
                sehs_peh::PehDesign::DEFAULT_THICKNESS,
                points,
                sehs_peh::Mesh::new(mesh, mesh),
            )?;
        }
        Command::Presets { name } => match name {
            Some(n) => print!("{}", presets::preset(&n)?.to_toml()),
            None => {
                for n in presets::names() {
                    println!("{n}");
                }
            }
        },
    }
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            let err = anyhow::Error::new(e);
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<PipelineError>().map_or(exit::FAILURE, |e| e.exit_code());
            ExitCode::from(code as u8)
        }
    }
}
