use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fermionic_verify::config::{parse_suite, Overrides};
use fermionic_verify::scenarios::run;
use fermionic_verify::{FieldKind, Result, Scenario, VerificationReport, VerifyError, Workspace};

#[derive(Parser)]
#[command(name = "verify", version, about = "Numerical checks of higher spin integral identities")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    single: Single,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario listed in a TOML suite file.
    All {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct Single {
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    #[arg(long = "m")]
    m: Option<usize>,
    #[arg(long = "k")]
    k: Option<usize>,
    #[arg(long = "j")]
    j: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    /// Evaluation point y, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    center: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    quad_orders: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    field: Option<FieldKind>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Clone)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Directory for cached bases and calibrated constants.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

impl Single {
    fn overrides(self) -> Overrides {
        Overrides {
            scenario: self.scenario,
            m: self.m,
            k: self.k,
            j: self.j,
            radius: self.radius,
            center: self.center,
            quad_orders: self.quad_orders,
            seed: self.seed,
            tol: self.tol,
            field: self.field,
            degree: self.degree,
            samples: self.samples,
        }
    }
}

fn render(reports: &[VerificationReport], format: Format, single: bool) -> Result<String> {
    match format {
        Format::Text => Ok(reports.iter().map(|r| r.to_text()).collect()),
        Format::Json if single => reports[0].to_json(),
        Format::Json => serde_json::to_string_pretty(reports).map_err(|e| VerifyError::Serialize(e.to_string())),
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| VerifyError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<bool> {
    let (configs, output, single) = match cli.command {
        Some(Command::All { config, output }) => {
            let text = std::fs::read_to_string(&config).map_err(|source| VerifyError::Io {
                path: config.display().to_string(),
                source,
            })?;
            (parse_suite(&text)?, output, false)
        }
        None => (vec![cli.single.overrides().build()?], cli.output, true),
    };
    let ws = match &output.cache_dir {
        Some(d) => Workspace::with_cache(d),
        None => Workspace::new(),
    };
    let mut reports = Vec::with_capacity(configs.len());
    for cfg in &configs {
        let r = run(cfg, &ws)?;
        if output.report.is_some() || output.format == Format::Json {
            eprintln!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.scenario);
        }
        reports.push(r);
    }
    write_out(output.report.as_deref(), &render(&reports, output.format, single)?)?;
    Ok(reports.iter().all(|r| r.pass))
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
