use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mmsec_cli::presets::{find, PRESETS};
use mmsec_cli::spec::Format;
use mmsec_cli::{parse, run, CliError, ExperimentSpec, Overrides};

/// Runs secrecy experiments from a JSON spec or a named preset.
#[derive(Debug, Parser)]
#[command(name = "mmsec", version = mmsec_cli::run::VERSION)]
struct Args {
    /// Experiment spec (JSON).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset; see --list-presets.
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on it.
    #[arg(long)]
    lanes: Option<usize>,
    /// Table destination; a `.meta.json` sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Writes an SVG plot of the main curves.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Prints the preset names and exits.
    #[arg(long)]
    list_presets: bool,
    /// Prints the resolved spec instead of running it.
    #[arg(long)]
    emit_config: bool,
    /// Prints the JSON Schema of spec files and exits.
    #[arg(long)]
    print_schema: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn load(args: &Args) -> Result<ExperimentSpec, CliError> {
    match (&args.config, &args.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
            parse(&text)
        }
        (None, Some(name)) => find(name)
            .map(|p| (p.build)())
            .ok_or_else(|| CliError::config("--preset", format!("unknown preset `{name}`"))),
        _ => Err(CliError::config(
            "--config",
            "give exactly one of --config or --preset",
        )),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.print_schema {
        let text =
            serde_json::to_string_pretty(&mmsec_cli::spec::schema()).expect("schemas serialize");
        println!("{text}");
        return ExitCode::SUCCESS;
    }
    if args.list_presets {
        for p in PRESETS {
            println!("{:<12} {}", p.name, p.figure);
        }
        return ExitCode::SUCCESS;
    }
    let result = load(&args).and_then(|mut spec| {
        Overrides {
            seed: args.seed,
            lanes: args.lanes,
            out: args.out.clone(),
            svg: args.svg.clone(),
            format: args.format.map(|f| match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            }),
        }
        .apply(&mut spec);
        if args.emit_config {
            let text = serde_json::to_string_pretty(&spec)
                .map_err(|e| CliError::Output(format!("json: {e}")))?;
            println!("{text}");
            return Ok(());
        }
        run(&spec).map(|_| ())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mmsec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
