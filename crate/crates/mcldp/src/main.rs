use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use mcldp::config::parse_mechanisms;
use mcldp::{emit, emit_to_path, parse_config, run_sweep, Coded, Format, Scale};
use mcldp_core::ldp::{MechanismConfig, MechanismKind};
use mcldp_core::rlim::Codebook;

/// Directory for results when `--out` is not given.
const OUT_DIR_VAR: &str = "MCLDP_OUT_DIR";

#[derive(Parser)]
#[command(
    version,
    about = "Private frequency estimation over diffusion-based molecular links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep described by a TOML config.
    Run {
        config: PathBuf,
        /// First seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of consecutive seeds per point; overrides the config and scale.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long, value_enum)]
        scale: Option<Scale>,
        /// Output file; `-` for stdout. Defaults to `$MCLDP_OUT_DIR/<config>.<format>`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Comma-separated subset, e.g. `KRR,OLH`.
        #[arg(long, value_delimiter = ',')]
        mechanisms: Option<Vec<String>>,
        #[arg(long, value_enum)]
        coded: Option<Coded>,
        /// No per-point progress on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Print a run-length-limited codebook, one codeword per line.
    Codebook {
        /// Number of codewords.
        #[arg(
            long,
            conflicts_with = "mechanism",
            required_unless_present = "mechanism"
        )]
        size: Option<u64>,
        /// Size the codebook for this mechanism's report space.
        #[arg(long, requires = "k")]
        mechanism: Option<MechanismKind>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        /// Allow 1-bits in the last two positions.
        #[arg(long)]
        unrestricted: bool,
    },
}

fn default_out(config: &Path, format: Format) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_VAR).map_or_else(|| PathBuf::from("."), PathBuf::from);
    let stem = config
        .file_stem()
        .map_or_else(|| "sweep".into(), |s| s.to_os_string());
    dir.join(stem).with_extension(format.extension())
}

#[allow(clippy::too_many_arguments)]
fn run(
    config: &Path,
    seed: Option<u64>,
    seeds: Option<u64>,
    scale: Option<Scale>,
    out: Option<PathBuf>,
    format: Format,
    mechanisms: Option<Vec<String>>,
    coded: Option<Coded>,
    quiet: bool,
) -> Result<bool, String> {
    let mut spec = parse_config(config).map_err(|e| format!("{}: {e}", config.display()))?;
    if let Some(scale) = scale {
        spec.apply_scale(scale);
    }
    if let Some(s) = seed {
        spec.template.seed = s;
    }
    if let Some(n) = seeds {
        spec.seeds = n;
    }
    if let Some(names) = mechanisms {
        spec.template.mechanisms =
            parse_mechanisms(names.iter().map(String::as_str)).map_err(|e| e.to_string())?;
    }
    if let Some(c) = coded {
        spec.coded = c;
    }
    spec.validate().map_err(|e| e.to_string())?;

    let out = out.unwrap_or_else(|| default_out(config, format));
    let to_stdout = out.as_os_str() == "-";
    if !to_stdout {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        }
        // Header-only table until the first point lands.
        emit_to_path(&[], format, &out).map_err(|e| format!("{}: {e}", out.display()))?;
    }

    let start = Instant::now();
    let mut write_error = None;
    let outcome = run_sweep(&spec, |p, rows| {
        if !quiet {
            let status = match p.outcome {
                Ok(row) => format!("l1={:.4}", row.l1_mean),
                Err(e) => format!("failed: {e}"),
            };
            eprintln!(
                "[{}/{}] {}={} {} seed={} {} {status} ({:.1?})",
                p.done,
                p.total,
                spec.axis,
                p.point.axis_value,
                p.point.pipeline.name(),
                p.point.seed,
                p.point.mechanism,
                start.elapsed()
            );
        }
        if !to_stdout && write_error.is_none() {
            if let Err(e) = emit_to_path(rows, format, &out) {
                write_error = Some(format!("{}: {e}", out.display()));
            }
        }
    });
    if let Some(e) = write_error {
        return Err(e);
    }
    if to_stdout {
        let stdout = std::io::stdout();
        emit(&outcome.rows, format, stdout.lock()).map_err(|e| e.to_string())?;
    } else if !quiet {
        eprintln!("wrote {} rows to {}", outcome.rows.len(), out.display());
    }
    for (point, err) in &outcome.failures {
        eprintln!(
            "error: {}={} {} seed={} {}: {err}",
            spec.axis,
            point.axis_value,
            point.pipeline.name(),
            point.seed,
            point.mechanism
        );
    }
    Ok(outcome.complete())
}

fn codebook(
    size: Option<u64>,
    mechanism: Option<MechanismKind>,
    k: Option<u32>,
    epsilon: f64,
    unrestricted: bool,
) -> Result<(), String> {
    let safe = !unrestricted;
    let book = match (size, mechanism, k) {
        (Some(size), _, _) => Codebook::build(size, safe),
        (None, Some(kind), Some(k)) => MechanismConfig::new(kind, k, epsilon)
            .and_then(|cfg| Codebook::for_mechanism(&cfg, safe)),
        _ => unreachable!("clap enforces --size or --mechanism with --k"),
    }
    .map_err(|e| e.to_string())?;
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(book.dump().as_bytes())
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            seeds,
            scale,
            out,
            format,
            mechanisms,
            coded,
            quiet,
        } => run(
            &config, seed, seeds, scale, out, format, mechanisms, coded, quiet,
        ),
        Command::Codebook {
            size,
            mechanism,
            k,
            epsilon,
            unrestricted,
        } => codebook(size, mechanism, k, epsilon, unrestricted).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
