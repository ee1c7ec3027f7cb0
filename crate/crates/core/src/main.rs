use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seqgap::optimizer::OptimizerConfig;
use seqgap::runner::{self, Family, Outputs, RunOutput};

#[derive(Parser)]
#[command(
    name = "seqgap",
    version,
    about = "Fidelity gaps of sequential ancilla-qubit decompositions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory for reports, traces and MPO snapshots
    /// [default: $SEQGAP_OUT_DIR, then ./out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base optimizer seed (overrides the spec file).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random restarts per cell.
    #[arg(long)]
    restarts: Option<usize>,
}

impl Common {
    fn config(&self) -> OptimizerConfig {
        let mut cfg = OptimizerConfig::default();
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Gap table of the six paradigmatic gates at D=4 under both metrics.
    Table1 {
        #[command(flatten)]
        common: Common,
    },
    /// Frobenius gap of a generalized CNOT family at D=2 for N=2..nmax.
    Scaling {
        /// 1: controls 1..N-1 on qubit N; 2: ladder of multi-controlled NOTs.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        family: u8,
        #[arg(long, default_value_t = 8)]
        nmax: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Zero/nonzero gap classification of 1->3 and 2->3 isometries.
    Isometries {
        #[command(flatten)]
        common: Common,
    },
    /// Run an experiment file.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Print a saved report.
    Show {
        #[arg(long)]
        report: PathBuf,
    },
}

fn finish(
    out: &RunOutput,
    dir: PathBuf,
    outputs: &Outputs,
    table: Option<String>,
) -> seqgap::Result<ExitCode> {
    out.write(&dir, outputs)?;
    if let Some(t) = table {
        println!("{t}");
    }
    print!("{}", out.report.render());
    println!("\nwrote {}", dir.display());
    let failed = out.report.failed_cells();
    if failed > 0 {
        eprintln!("{failed} cell(s) failed");
        return Ok(ExitCode::from(1));
    }
    if !out.report.passed() {
        eprintln!("some checks failed");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> seqgap::Result<ExitCode> {
    let outputs = Outputs::default();
    match cli.command {
        Command::Table1 { common } => {
            let out = runner::run_table1(&common.config())?;
            let table = runner::render_table1(&out.report);
            finish(
                &out,
                runner::resolve_out_dir(common.out.as_deref()),
                &outputs,
                Some(table),
            )
        }
        Command::Scaling {
            family,
            nmax,
            common,
        } => {
            let out = runner::run_scaling(Family::from_index(family)?, nmax, &common.config())?;
            finish(
                &out,
                runner::resolve_out_dir(common.out.as_deref()),
                &outputs,
                None,
            )
        }
        Command::Isometries { common } => {
            let out = runner::run_isometry_suite(&common.config())?;
            finish(
                &out,
                runner::resolve_out_dir(common.out.as_deref()),
                &outputs,
                None,
            )
        }
        Command::Run { spec, common } => {
            let mut spec = seqgap::ExperimentSpec::load(&spec)?;
            if let Some(s) = common.seed {
                spec.optimizer.seed = s;
            }
            if let Some(r) = common.restarts {
                spec.optimizer.restarts = r;
            }
            let out = runner::run_spec(&spec);
            let dir =
                runner::resolve_out_dir(common.out.as_deref().or(spec.outputs.dir.as_deref()));
            finish(&out, dir, &spec.outputs, None)
        }
        Command::Show { report } => {
            print!("{}", runner::show(&report)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
