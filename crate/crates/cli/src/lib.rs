//! Command-line front end for the experiment harness.
//!
//! Exit codes: 0 when the report passes, 2 when it fails, 1 on bad input.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use revmono::curves;
use revmono::feasible::FeasibleSpec;
use revmono::lab::{self, Closeness, Report};
use revmono::learn::Setting;
use revmono::{ProductDist, ValueDist};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "revmono", version, about = "Revenue monotonicity and sample-complexity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Constant in the sample-count formula.
    #[arg(long, global = true)]
    constant: Option<f64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The minimum non-matroid counterexample.
    Nonmonotone,
    /// Disjoint copies of the counterexample at rank k.
    Copies {
        #[arg(long)]
        k: usize,
    },
    /// Embed the counterexample into a non-matroid feasible set (JSON file).
    Embed { input: PathBuf },
    /// Approximate monotonicity check for a dominated, close pair (JSON file).
    ApproxMonotone { input: PathBuf },
    /// Revenue difference on the Lipschitz lower-bound instance.
    LipschitzLb {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Failure frequency of the dominated-empirical learner (JSON file).
    SampleComplexity { input: PathBuf },
    /// The two-point family behind the sample lower bound.
    LbFamily {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Samples per bidder given to the learner.
        #[arg(long, default_value_t = 100)]
        budget: usize,
    },
    /// Revenue curve summary of one distribution (JSON file).
    Curves {
        input: PathBuf,
        /// Also write raw/ironed breakpoints and virtual values here.
        #[arg(long)]
        dump_curves: Option<PathBuf>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApproxInput {
    dd: ProductDist,
    dtilde: ProductDist,
    feasible: FeasibleSpec,
    eps: Option<f64>,
    #[serde(default)]
    closeness: Closeness,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleInput {
    feasible: FeasibleSpec,
    prior: ProductDist,
    setting: Setting,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn curves_report(d: &ValueDist) -> Report {
    let (price, revenue) = curves::monopoly(d);
    let ironed = curves::iron(&curves::revenue_curve(d));
    Report::new("curves")
        .param("support_size", d.len() as u64)
        .metric("monopoly_price", price)
        .metric("monopoly_revenue", revenue)
        .metric("ironed_max_revenue", ironed.max_revenue())
        .metric("ironing_intervals", curves::ironing_intervals(d).len() as f64)
        .metric("regular", if curves::is_regular(d) { 1.0 } else { 0.0 })
        .verdict(true)
}

fn run(cli: &Cli) -> Result<Report> {
    let c = &cli.common;
    let eps = |default: f64| c.eps.unwrap_or(default);
    let report = match &cli.command {
        Command::Nonmonotone => lab::run_nonmonotone(eps(0.1))?,
        Command::Copies { k } => lab::run_copies(*k, c.trials.unwrap_or(2000), c.seed)?,
        Command::Embed { input } => {
            let spec: FeasibleSpec = read_json(input)?;
            lab::embed_counterexample(&spec.build()?, eps(0.1))?
        }
        Command::ApproxMonotone { input } => {
            let inp: ApproxInput = read_json(input)?;
            let Some(e) = c.eps.or(inp.eps) else {
                bail!("eps missing: pass --eps or set \"eps\" in {}", input.display());
            };
            lab::check_approx_monotone(&inp.dd, &inp.dtilde, e, &inp.feasible.build()?, inp.closeness)?
        }
        Command::LipschitzLb { n, k } => lab::run_lipschitz_lb(*n, *k, eps(0.01))?,
        Command::SampleComplexity { input } => {
            let inp: SampleInput = read_json(input)?;
            lab::run_sample_complexity(
                &inp.feasible.build()?,
                &inp.prior,
                inp.setting,
                eps(0.1),
                c.delta.unwrap_or(0.1),
                c.constant.unwrap_or(1.0),
                c.trials.unwrap_or(100),
                c.seed,
            )?
        }
        Command::LbFamily { n, k, budget } => {
            lab::run_lb_family(*n, *k, eps(0.01), *budget, c.trials.unwrap_or(20), c.seed)?
        }
        Command::Curves { input, dump_curves } => {
            let d: ValueDist = read_json(input)?;
            if let Some(path) = dump_curves {
                let text = serde_json::to_string_pretty(&curves::dump(&d))?;
                fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
            curves_report(&d)
        }
    };
    Ok(report)
}

fn emit(report: &Report, common: &Common) -> Result<()> {
    let text = match common.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    match &common.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `argv` (including the program name), runs the experiment and
/// returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
        }
    };
    match run(&cli).and_then(|r| emit(&r, &cli.common).map(|()| r)) {
        Ok(r) if r.passed() => EXIT_PASS,
        Ok(_) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}
