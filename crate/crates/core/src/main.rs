use clap::{Args, Parser, Subcommand};
use macda::actionspace::DEFAULT_ADMISSIBLE;
use macda::harness::{self, HarnessError, OracleFile, RunConfig};
use macda::marl::Method;
use macda::metrics::{render_table, Grouping};
use macda::molgraph::Element;
use macda::oracle::{PlantedInteraction, SurrogateSpec};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Joint drug-target counterfactual generation.
#[derive(Parser)]
#[command(name = "macda", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate counterfactuals for the configured pairs and write reports.
    Run(RunArgs),
    /// Audit a records file and print its summary table.
    Eval {
        records: PathBuf,
        #[arg(long, value_enum, default_value = "per-pair")]
        grouping: GroupingArg,
        /// Also re-query this oracle (`surrogate:SEED` or a file) for every record.
        #[arg(long)]
        oracle: Option<String>,
        /// Print the reports as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// List the action space of a molecule or a protein.
    Actions {
        #[arg(long, conflicts_with = "sequence", required_unless_present = "sequence")]
        smiles: Option<String>,
        #[arg(long)]
        sequence: Option<String>,
        /// Elements allowed for added atoms, e.g. `C,N,O,F`.
        #[arg(long, value_delimiter = ',')]
        admissible: Option<Vec<String>>,
    },
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Write a surrogate oracle file.
    MakeSurrogate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fingerprint bit of a planted interaction.
        #[arg(long, requires_all = ["window_start", "window"])]
        plant_bit: Option<usize>,
        #[arg(long)]
        window_start: Option<usize>,
        /// Reference residues of the planted window.
        #[arg(long)]
        window: Option<String>,
        #[arg(long, default_value_t = 2.0)]
        strength: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict the affinity of one pair.
    Query {
        #[arg(long, default_value = "surrogate:0")]
        oracle: String,
        #[arg(long)]
        smiles: String,
        #[arg(long)]
        sequence: String,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum GroupingArg {
    PerPair,
    Global,
}

fn run(args: RunArgs) -> Result<(), HarnessError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(m) = args.method {
        config.method = m;
    }
    if let Some(s) = args.seed {
        config.train.seed = s;
    }
    if let Some(e) = args.episodes {
        config.train.episodes = e;
    }
    if let Some(k) = args.top_k {
        config.train.top_k = k;
    }
    if let Some(out) = args.out {
        // command-line paths are relative to the working directory
        config.out = std::env::current_dir()
            .map_err(|e| HarnessError::Runtime(e.to_string()))?
            .join(out);
    }
    let summary = harness::run(&config)?;
    print!("{}", summary.table);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Eval {
            records,
            grouping,
            oracle,
            json,
        } => {
            let grouping = match grouping {
                GroupingArg::PerPair => Grouping::PerPair,
                GroupingArg::Global => Grouping::Global,
            };
            let records = harness::read_records(&records)?;
            let oracle = oracle.map(|o| harness::load_oracle(&o, Path::new(""))).transpose()?;
            let reports = harness::evaluate_records(&records, grouping, oracle.as_deref())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&reports).expect("reports serialize"));
            } else {
                print!("{}", render_table(&reports));
            }
            Ok(())
        }
        Command::Actions {
            smiles,
            sequence,
            admissible,
        } => {
            let lines = match (smiles, sequence) {
                (Some(s), _) => {
                    let admissible = match admissible {
                        Some(symbols) => symbols
                            .iter()
                            .map(|s| {
                                Element::from_symbol(s.trim())
                                    .ok_or_else(|| HarnessError::Config(format!("unknown element {s:?}")))
                            })
                            .collect::<Result<Vec<_>, _>>()?,
                        None => DEFAULT_ADMISSIBLE.to_vec(),
                    };
                    harness::describe_drug_actions(&s, &admissible)?
                }
                (None, Some(p)) => harness::describe_protein_actions(&p)?,
                (None, None) => unreachable!("clap requires one of the two"),
            };
            for line in lines {
                println!("{line}");
            }
            Ok(())
        }
        Command::Oracle(OracleCommand::MakeSurrogate {
            seed,
            plant_bit,
            window_start,
            window,
            strength,
            out,
        }) => {
            let mut spec = SurrogateSpec::new(seed);
            if let (Some(bit), Some(window_start), Some(reference)) = (plant_bit, window_start, window) {
                spec = spec.with_interaction(PlantedInteraction {
                    bit,
                    window_start,
                    reference,
                    strength,
                });
            }
            // validate before writing
            macda::oracle::Surrogate::new(spec.clone())?;
            let file = OracleFile::Surrogate(spec);
            harness::write_atomic(&out, |w| {
                serde_json::to_writer_pretty(&mut *w, &file)?;
                w.write_all(b"\n")
            })
        }
        Command::Oracle(OracleCommand::Query {
            oracle,
            smiles,
            sequence,
        }) => {
            let oracle = harness::load_oracle(&oracle, Path::new(""))?;
            println!("{}", harness::query(oracle.as_ref(), &smiles, &sequence)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
