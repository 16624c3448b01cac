//! `verify`: runs verification campaigns and browses the check catalog.
//!
//! Exit status is 0 when every check passes, 1 when any check fails and 2 on
//! configuration or setup errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thinfluid::campaign::{self, CampaignConfig, CheckInfo, Suite};

const DEFAULT_OUT: &str = "report.ndjson";

#[derive(Parser)]
#[command(name = "verify", version, about = "Verification campaigns for thin-shell flow identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign and write its report.
    Run {
        /// JSON campaign config.
        #[arg(long)]
        config: PathBuf,
        /// Replace the config's seed list with this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Restrict to these suites (repeatable).
        #[arg(long = "suite", value_parser = parse_suite, num_args = 1..)]
        suites: Vec<Suite>,
        /// Report path; the summary table goes next to it. Overrides the
        /// config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List every check with its anchor.
    List {
        /// Only checks of this module, e.g. `tancalc`.
        #[arg(long)]
        module: Option<String>,
    },
    /// Print the formula and anchor of one check.
    Explain { id: String },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::parse(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            suites,
            out,
        } => run(config, seed, suites, out),
        Command::List { module } => {
            let checks: Vec<&CheckInfo> = match &module {
                Some(m) => campaign::by_module(m),
                None => campaign::catalog().iter().collect(),
            };
            for c in checks {
                println!("{:<28} {:<10} {:<10} {}", c.id, c.module, c.suite.as_str(), c.anchor);
            }
            ExitCode::SUCCESS
        }
        Command::Explain { id } => match campaign::lookup(&id) {
            Some(c) => {
                println!("check:   {}", c.id);
                println!("module:  {}", c.module);
                println!("suite:   {}", c.suite.as_str());
                println!("formula: {}", c.formula);
                println!("anchor:  {}", c.anchor);
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: unknown check `{id}` (see `verify list`)");
                ExitCode::from(2)
            }
        },
    }
}

fn run(config: PathBuf, seed: Option<u64>, suites: Vec<Suite>, out: Option<PathBuf>) -> ExitCode {
    let setup = || -> thinfluid::Result<(CampaignConfig, PathBuf)> {
        let mut cfg = CampaignConfig::load(&config)?;
        if let Some(s) = seed {
            cfg.seeds = vec![s];
        }
        if !suites.is_empty() {
            cfg.suites = suites.clone();
        }
        let path = out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| DEFAULT_OUT.into());
        cfg.validate()?;
        Ok((cfg, path))
    };
    let (cfg, path) = match setup() {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match campaign::run_campaign(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    print!("{}", report.summary_table());
    match report.write(&path) {
        Ok(table) => eprintln!("wrote {} and {}", path.display(), table.display()),
        Err(e) => {
            eprintln!("error: cannot write report: {e}");
            return ExitCode::from(2);
        }
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
