//! Batch front end: instance ingestion, optimization, rule evaluation, and
//! experiment reproduction with tabular output.
//!
//! Exit codes: 0 success, 2 usage/schema errors, 3 infeasible instances,
//! 4 internal solver failures.

mod commands;
mod experiments;
mod instance;
mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::RuleKind;
use instance::{Instance, InstanceFile};
use table::{OutputFormat, ResultTable};

/// An error carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: String) -> Self {
        Self { code: 2, message }
    }

    fn schema(message: String) -> Self {
        Self { code: 2, message }
    }

    fn infeasible(err: optscore::Error) -> Self {
        Self {
            code: 3,
            message: err.to_string(),
        }
    }

    fn infeasible_msg(message: String) -> Self {
        Self { code: 3, message }
    }

    fn from_core(err: optscore::Error) -> Self {
        use optscore::Error::*;
        let code = match &err {
            Instance(_) | BoundInfeasible { .. } => 3,
            Solver(_) | Internal(_) => 4,
            _ => 2,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "optscore",
    version,
    about = "Design and stress-test bounded proper scoring rules that reward effort"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for all randomized computations.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for independent experiment rows.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the optimal rule for an instance file.
    Optimize {
        /// Instance file (kind: mean, full_dist, or signal_model).
        instance: PathBuf,
        /// Use the closed-form V-shape optimum (one-dimensional instances).
        #[arg(long, conflicts_with = "lp")]
        closed_form: bool,
        /// Use the exact linear program.
        #[arg(long)]
        lp: bool,
        /// Override the score bound B.
        #[arg(long)]
        bound: Option<f64>,
        /// Write the menu linear program in plain text to this path.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a named rule on an instance: objective, prior-report score,
    /// properness verdict, and score range.
    Evaluate {
        instance: PathBuf,
        /// Which rule to build.
        #[arg(long, value_enum)]
        rule: RuleKind,
        /// Override the score bound B.
        #[arg(long)]
        bound: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Reproduce a named comparison or stress experiment.
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
    /// Print the distribution over posterior means of a signal model.
    Bayes {
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Separate vs max-over-separate objectives on the i.i.d. gap family.
    SepGap {
        /// Dimensions to evaluate.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Mean-elicitation optimum vs full-distribution elicitation.
    FullGap {
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Brute-force worst case of the quadratic rule over two-point
    /// distributions with a fixed optimal value.
    QuadWorstcase {
        #[arg(long, value_delimiter = ',', required = true)]
        c: Vec<f64>,
        /// Grid resolution per axis of the (mu, p) search.
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
    /// The interval-partition adversary against fixed rules.
    PiAdversary {
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<u32>,
        /// Number of random V-shaped utilities beside the quadratic.
        #[arg(long, default_value_t = 5)]
        rules: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Incentive loss from building the rule at a perturbed prior mean.
    Robustness {
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        dims: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical check of the sample count for mean estimation.
    Sampling {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn emit(table: ResultTable, common: &Common) -> Result<(), CliError> {
    let rendered = table.render(common.format);
    match &common.out {
        Some(path) => std::fs::write(path, rendered)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Optimize {
            instance,
            closed_form,
            lp,
            bound,
            dump_lp,
            common,
        } => {
            let inst = InstanceFile::load(&instance)?.into_instance(bound)?;
            let table = commands::cmd_optimize(&inst, closed_form, lp, bound, dump_lp.as_deref())?;
            emit(table, &common)
        }
        Command::Evaluate {
            instance,
            rule,
            bound,
            common,
        } => {
            let inst = InstanceFile::load(&instance)?.into_instance(bound)?;
            let table = commands::cmd_evaluate(&inst, rule, bound, common.seed)?;
            emit(table, &common)
        }
        Command::Bayes { instance, common } => {
            let inst = InstanceFile::load(&instance)?.into_instance(None)?;
            let Instance::SignalModel(model) = &inst else {
                return Err(CliError::usage(
                    "bayes needs a signal_model instance".into(),
                ));
            };
            emit(commands::cmd_bayes(model)?, &common)
        }
        Command::Experiment { which } => match which {
            Experiment::SepGap { n, common } => {
                emit(experiments::sep_gap(&n, common.jobs)?, &common)
            }
            Experiment::FullGap { eps, common } => {
                emit(experiments::full_gap(&eps, common.jobs)?, &common)
            }
            Experiment::QuadWorstcase { c, grid, common } => {
                emit(experiments::quad_worstcase(&c, grid, common.jobs)?, &common)
            }
            Experiment::PiAdversary { d, rules, common } => emit(
                experiments::pi_adversary(&d, rules, common.seed, common.jobs)?,
                &common,
            ),
            Experiment::Robustness {
                eps,
                trials,
                dims,
                common,
            } => emit(
                experiments::robustness(&eps, trials, dims, common.seed, common.jobs)?,
                &common,
            ),
            Experiment::Sampling {
                eps,
                delta,
                n,
                trials,
                common,
            } => emit(
                experiments::sampling(eps, delta, n, trials, common.seed, common.jobs)?,
                &common,
            ),
        },
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
