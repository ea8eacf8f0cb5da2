use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dvfo_core::harness::{
    attn_demo, cmd_eval, cmd_oracle, cmd_sweep, cmd_train, write_csv, ExperimentConfig, Overrides, SweepParam,
    CONFIG_ENV_VAR,
};
use dvfo_core::policy::PolicyKind;
use dvfo_core::Result;

/// Train and evaluate DVFS and offloading schedulers on a simulated
/// edge-cloud system.
#[derive(Parser, Debug)]
#[command(name = "dvfo", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML experiment config; built-in defaults when absent.
    #[arg(long, global = true, env = CONFIG_ENV_VAR)]
    config: Option<PathBuf>,
    /// Run a single seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    steps: Option<u64>,
    #[arg(long, global = true)]
    device: Option<String>,
    #[arg(long, global = true)]
    workload: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Bandwidth trace CSV with a `step,mbps` header.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Action-selection time as a fraction of the step.
    #[arg(long, global = true)]
    tas_ratio: Option<f64>,
    /// edge_only, cloud_only, binary_offload, cpu_only_dvfs or dvfo.
    #[arg(long, global = true, default_value = "dvfo")]
    policy: PolicyKind,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a learned policy; writes a step log and checkpoint per seed.
    Train,
    /// Greedy rollouts; writes per-step records and a mean/std summary.
    Eval {
        /// Checkpoint to use for every seed instead of the per-seed default.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Evaluate the policy at several values of one parameter.
    Sweep {
        /// eta, lambda or bandwidth.
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Exhaustive optimum at each bandwidth sample.
    Oracle,
    /// Sorted channel importance of a synthetic feature map.
    AttnDemo {
        #[arg(long, default_value_t = 32)]
        channels: usize,
        #[arg(long, default_value_t = 16)]
        height: usize,
        #[arg(long, default_value_t = 16)]
        width: usize,
        /// Zipf exponent; calibrated to a 0.6 top-3 mass when absent.
        #[arg(long)]
        skew: Option<f64>,
    },
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let base = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    Overrides {
        seed: c.seed,
        steps: c.steps,
        device: c.device.clone(),
        workload: c.workload.clone(),
        out: c.out.clone(),
        trace: c.trace.clone(),
        eta: c.eta,
        lambda: c.lambda,
        tas_ratio: c.tas_ratio,
    }
    .apply(base)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.common)?;
    let policy = cli.common.policy;
    match cli.command {
        Command::Train => {
            for o in cmd_train(&cfg, policy)? {
                let last = o.log.episode_returns.last().copied().unwrap_or(0.0);
                println!(
                    "seed {}: {} episodes, last return {last:.1}, log {}, checkpoint {}",
                    o.seed,
                    o.log.episode_returns.len(),
                    o.log_path.display(),
                    o.checkpoint_path.display()
                );
            }
        }
        Command::Eval { checkpoint, episodes } => {
            let rows = cmd_eval(&cfg, policy, checkpoint.as_deref(), episodes.unwrap_or(cfg.eval_episodes))?;
            for r in rows {
                println!("{} {} mean {:.3} std {:.3} (n={})", r.policy, r.metric, r.mean, r.std, r.n);
            }
        }
        Command::Sweep { param, values, checkpoint } => {
            for r in cmd_sweep(&cfg, param, &values, policy, checkpoint.as_deref())? {
                println!("{}={} {} mean {:.3} std {:.3}", r.param, r.value, r.metric, r.mean, r.std);
            }
        }
        Command::Oracle => {
            let rows = cmd_oracle(&cfg)?;
            println!("{} optima written to {}", rows.len(), cfg.out.join("oracle.csv").display());
        }
        Command::AttnDemo { channels, height, width, skew } => {
            let seed = cfg.seeds[0];
            let rows = attn_demo(seed, channels, height, width, skew, cfg.env.reduction)?;
            let path = cfg.out.join("attn_demo.csv");
            write_csv(&path, &rows)?;
            for r in &rows {
                println!("{:>3} channel {:>3} {:.6}", r.rank, r.channel, r.importance);
            }
            let top3 = rows.get(2.min(rows.len() - 1)).map_or(0.0, |r| r.cumulative);
            println!("top-3 mass {top3:.4}; written to {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
