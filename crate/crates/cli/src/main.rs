use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fdcmac_cli::{load, output, Analysis, CliError, Format, Overrides};

#[derive(Parser)]
#[command(name = "fdcmac", version, about = "Throughput model of a full-duplex cognitive MAC protocol")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form report for the manifest's base scenario.
    Eval(Common),
    /// Best sensing time and sensing power for the base scenario.
    Optimize(Common),
    /// Run the manifest's analysis over every sweep point.
    Sweep(Common),
    /// Monte-Carlo run next to the closed form for the base scenario.
    Simulate(Common),
    /// Two-stage protocol against its single-stage and half-duplex variants.
    Compare(Common),
    /// Shape of the throughput in the sensing time at the base sensing power.
    Verify(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo cycles.
    #[arg(long)]
    cycles: Option<u64>,
    /// Output directory. Without it, and without `[output] dir` in the
    /// manifest, the table goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (analysis, sweep, args) = match cli.command {
        Command::Eval(a) => (Some(Analysis::Eval), false, a),
        Command::Optimize(a) => (Some(Analysis::Optimize), false, a),
        Command::Sweep(a) => (None, true, a),
        Command::Simulate(a) => (Some(Analysis::Simulate), false, a),
        Command::Compare(a) => (Some(Analysis::Compare), false, a),
        Command::Verify(a) => (Some(Analysis::Verify), false, a),
    };
    let exp = load(&args.manifest)?;
    let analysis = analysis.unwrap_or(exp.manifest.analysis);
    let out = exp.run(
        analysis,
        sweep,
        Overrides {
            seed: args.seed,
            cycles: args.cycles,
        },
    )?;

    let section = exp.manifest.output.clone().unwrap_or_default();
    let format = match args.format {
        Some(OutFormat::Csv) => Format::Csv,
        Some(OutFormat::Json) => Format::Json,
        None => section.format.unwrap_or_default(),
    };
    let dir = args.out.or_else(|| section.dir.map(PathBuf::from));
    for r in out.rows.iter().filter(|r| !r.is_ok()) {
        eprintln!("warning: point {} {}failed: {}", r.point, protocol_label(&r.protocol), r.error);
    }
    match dir {
        Some(dir) => {
            for p in output::write_dir(&dir, format, &out.rows, &out.summary)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => output::write_stdout(format, &out.rows, &out.summary)?,
    }
    Ok(())
}

fn protocol_label(p: &str) -> String {
    if p.is_empty() {
        String::new()
    } else {
        format!("({p}) ")
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
