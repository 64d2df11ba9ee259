mod commands;
mod logging;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "channelformer",
    version,
    about = "Channel estimation experiments on a simulated OFDM link"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// master seed; overrides `seed` in the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// only warnings and errors on stderr
    #[arg(long, global = true)]
    quiet: bool,
    /// log lines as JSON objects
    #[arg(long, global = true)]
    json_log: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a training dataset from `[dataset]`
    GenDataset {
        /// nominal dataset size (125,000 samples)
        #[arg(long)]
        paper_scale: bool,
    },
    /// Train a model from `[train]`
    Train {
        /// full epoch schedule and, for generated data, 125,000 samples
        #[arg(long)]
        paper_scale: bool,
    },
    /// Magnitude-prune a weight file from `[prune]`
    Prune,
    /// Fine-tune a pruned weight file from `[finetune]`
    Finetune,
    /// Run the sweep in `[sweep]`
    EvalSweep {
        /// realizations per point, overriding the config
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Run the dynamic adaptation harness in `[online]`
    OnlineSim,
    /// Per-head attention magnitudes from `[probe]`
    ProbeAttention,
    /// Channel profile utilities
    Pdp {
        #[command(subcommand)]
        action: PdpAction,
    },
}

#[derive(Subcommand, Debug)]
enum PdpAction {
    /// Print the built-in profiles
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    logging::init(cli.global.quiet, cli.global.json_log);
    let result = match &cli.command {
        Command::GenDataset { paper_scale } => commands::gen_dataset(&cli.global, *paper_scale),
        Command::Train { paper_scale } => commands::train(&cli.global, *paper_scale),
        Command::Prune => commands::prune(&cli.global),
        Command::Finetune => commands::finetune(&cli.global),
        Command::EvalSweep { realizations } => commands::eval_sweep(&cli.global, *realizations),
        Command::OnlineSim => commands::online_sim(&cli.global),
        Command::ProbeAttention => commands::probe_attention(&cli.global),
        Command::Pdp {
            action: PdpAction::List,
        } => commands::pdp_list(&cli.global),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", logging::error_line(e.kind(), &e.to_string()));
            ExitCode::from(e.exit_code())
        }
    }
}
