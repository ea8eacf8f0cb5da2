//! The experiment drivers behind each CLI subcommand.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::RngCore;

use super::config::ExperimentConfig;
use super::records::{mean_std, CsvSink, ImportanceRow, OracleRow, RunRecord, SummaryRow, SweepRow};
use crate::agent::{train_with, Agent, Checkpoint, TrainLog, TrainSchedule};
use crate::attention::{
    apply_scam, calibrate_skew, importance_distribution, synth_feature_map, ChannelAttnParams, SpatialAttnParams,
    TARGET_TOP3_MASS,
};
use crate::env::{encode_state, BandwidthSpec, ConcurrentEnv, Environment, Scenario, StepOutcome, DEFAULT_HORIZON_MS, STATE_DIM};
use crate::model::{brute_force_optimum, GridSpec};
use crate::policy::{baseline_action, PolicyKind};
use crate::rng::{substream, STREAM_EVAL};
use crate::{Error, Result};

/// Action grid a policy acts on.
pub fn grid_for(cfg: &ExperimentConfig, kind: PolicyKind) -> GridSpec {
    match kind {
        PolicyKind::CpuOnlyDvfs => GridSpec { cpu_only: true, ..cfg.grid },
        _ => cfg.grid,
    }
}

/// `(t_as, horizon)` in ms.
pub fn slip_times(cfg: &ExperimentConfig) -> (f64, f64) {
    (cfg.tas_ratio * DEFAULT_HORIZON_MS, DEFAULT_HORIZON_MS)
}

pub fn run_id(kind: PolicyKind, seed: u64) -> String {
    format!("{kind}-s{seed}")
}

pub fn train_log_path(cfg: &ExperimentConfig, kind: PolicyKind, seed: u64) -> PathBuf {
    cfg.out.join(format!("train_{kind}_seed{seed}.csv"))
}

pub fn checkpoint_path(cfg: &ExperimentConfig, kind: PolicyKind, seed: u64) -> PathBuf {
    cfg.out.join(format!("checkpoint_{kind}_seed{seed}.txt"))
}

fn learned_only(kind: PolicyKind) -> Result<()> {
    if kind.is_learned() {
        Ok(())
    } else {
        Err(Error::config(format!("policy `{kind}` is fixed and cannot be trained")))
    }
}

/// Trains one seed, streaming a [`RunRecord`] per step into `sink`.
pub fn train_policy(
    cfg: &ExperimentConfig,
    kind: PolicyKind,
    seed: u64,
    mut sink: Option<&mut CsvSink>,
) -> Result<(Agent, TrainLog)> {
    learned_only(kind)?;
    let scenario = cfg.scenario(grid_for(cfg, kind))?;
    let mut env = Environment::new(&scenario, cfg.bandwidth_process(seed)?, seed)?;
    let mut agent = Agent::new(cfg.agent.clone(), STATE_DIM, scenario.grid.len(), seed)?;
    let (t_as, horizon) = slip_times(cfg);
    let id = run_id(kind, seed);
    let episode_len = scenario.config.episode_len as u64;
    let (mut step, mut ret, mut write_err) = (0u64, 0.0, None);
    let log = train_with(&mut env, &mut agent, TrainSchedule::new(cfg.steps, t_as, horizon), |env, t| {
        if step % episode_len == 0 {
            ret = 0.0;
        }
        ret += t.reward;
        if let (Some(sink), Some(out), None) = (sink.as_deref_mut(), env.last_outcome(), &write_err) {
            if let Err(e) = sink.write(&RunRecord::from_outcome(&id, step, out, ret)) {
                write_err = Some(e);
            }
        }
        step += 1;
    })?;
    match write_err {
        Some(e) => Err(e),
        None => Ok((agent, log)),
    }
}

pub fn checkpoint_meta(cfg: &ExperimentConfig, kind: PolicyKind, seed: u64) -> BTreeMap<String, String> {
    let g = grid_for(cfg, kind);
    BTreeMap::from([
        ("policy".to_string(), kind.to_string()),
        ("seed".to_string(), seed.to_string()),
        ("device".to_string(), cfg.device.clone()),
        ("workload".to_string(), cfg.workload.clone()),
        ("grid".to_string(), format!("{} {} {}", g.levels_per_freq, g.xi_levels, g.cpu_only)),
    ])
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub seed: u64,
    pub log: TrainLog,
    pub log_path: PathBuf,
    pub checkpoint_path: PathBuf,
}

/// Trains every configured seed, writing a step log and a checkpoint each.
pub fn cmd_train(cfg: &ExperimentConfig, kind: PolicyKind) -> Result<Vec<TrainOutcome>> {
    learned_only(kind)?;
    let mut outcomes = Vec::new();
    for &seed in &cfg.seeds {
        let log_path = train_log_path(cfg, kind, seed);
        let mut sink = CsvSink::create::<RunRecord>(&log_path)?;
        let (agent, log) = train_policy(cfg, kind, seed, Some(&mut sink))?;
        sink.finish()?;
        let checkpoint_path = checkpoint_path(cfg, kind, seed);
        Checkpoint::from_agent(&agent, checkpoint_meta(cfg, kind, seed)).save(&checkpoint_path)?;
        outcomes.push(TrainOutcome { seed, log, log_path, checkpoint_path });
    }
    Ok(outcomes)
}

/// Who picks actions during evaluation.
pub enum Actor {
    Fixed(PolicyKind),
    Greedy(Box<Agent>),
}

impl Actor {
    fn choose(&self, env: &Environment) -> Result<usize> {
        match self {
            Actor::Fixed(kind) => env.grid().index_of(&baseline_action(*kind, env)?),
            Actor::Greedy(agent) => Ok(agent.greedy(&encode_state(env.state()))),
        }
    }
}

/// Seed of the held-out evaluation environment for a training seed.
pub fn eval_seed(seed: u64) -> u64 {
    substream(seed, STREAM_EVAL).next_u64()
}

/// Greedy rollout of `steps` concurrent steps on a fresh evaluation
/// environment.
pub fn rollout(
    cfg: &ExperimentConfig,
    scenario: &Scenario,
    actor: &Actor,
    seed: u64,
    steps: usize,
    mut sink: Option<(&mut CsvSink, &str)>,
) -> Result<Vec<StepOutcome>> {
    let es = eval_seed(seed);
    let mut env = Environment::new(scenario, cfg.bandwidth_process(es)?, es)?;
    let (t_as, horizon) = slip_times(cfg);
    let episode_len = scenario.config.episode_len;
    let mut out = Vec::with_capacity(steps);
    let mut ret = 0.0;
    for step in 0..steps {
        let idx = actor.choose(&env)?;
        env.concurrent_step(&mut |_| idx, t_as, horizon)?;
        let o = env.last_outcome().expect("step recorded").clone();
        if step % episode_len == 0 {
            ret = 0.0;
        }
        ret += o.reward;
        if let Some((sink, id)) = sink.as_mut() {
            sink.write(&RunRecord::from_outcome(id, step as u64, &o, ret))?;
        }
        out.push(o);
    }
    Ok(out)
}

/// Loads a checkpoint and checks it fits the scenario's grid.
pub fn load_agent(path: &Path, scenario: &Scenario) -> Result<Agent> {
    Checkpoint::load(path)?.into_agent(STATE_DIM, scenario.grid.len())
}

fn actor_for(
    cfg: &ExperimentConfig,
    kind: PolicyKind,
    scenario: &Scenario,
    seed: u64,
    checkpoint: Option<&Path>,
) -> Result<Actor> {
    if !kind.is_learned() {
        return Ok(Actor::Fixed(kind));
    }
    let path = checkpoint.map(Path::to_path_buf).unwrap_or_else(|| checkpoint_path(cfg, kind, seed));
    if !path.exists() {
        return Err(Error::config(format!("no checkpoint at {}; run `train` first", path.display())));
    }
    Ok(Actor::Greedy(Box::new(load_agent(&path, scenario)?)))
}

/// Per-step TTI, ETI and cost pooled across rollouts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub tti: Vec<f64>,
    pub eti: Vec<f64>,
    pub cost: Vec<f64>,
}

impl Metrics {
    pub fn extend(&mut self, outcomes: &[StepOutcome]) {
        for o in outcomes {
            self.tti.push(o.evaluation.latency.total);
            self.eti.push(o.evaluation.energy.total);
            self.cost.push(o.evaluation.cost);
        }
    }

    /// `(metric name, values)` in output order.
    pub fn named(&self) -> [(&'static str, &[f64]); 3] {
        [("tti", &self.tti), ("eti", &self.eti), ("cost", &self.cost)]
    }

    pub fn mean_cost(&self) -> f64 {
        mean_std(&self.cost).0
    }
}

/// Evaluates `kind` on every seed and returns pooled metrics.
pub fn evaluate_policy(
    cfg: &ExperimentConfig,
    kind: PolicyKind,
    checkpoint: Option<&Path>,
    episodes: usize,
    mut sink: Option<&mut CsvSink>,
) -> Result<Metrics> {
    let scenario = cfg.scenario(grid_for(cfg, kind))?;
    let steps = episodes * scenario.config.episode_len;
    let mut m = Metrics::default();
    for &seed in &cfg.seeds {
        let actor = actor_for(cfg, kind, &scenario, seed, checkpoint)?;
        let id = run_id(kind, seed);
        let outcomes = rollout(cfg, &scenario, &actor, seed, steps, sink.as_deref_mut().map(|s| (s, id.as_str())))?;
        m.extend(&outcomes);
    }
    Ok(m)
}

pub fn summary_rows(kind: PolicyKind, m: &Metrics) -> Vec<SummaryRow> {
    m.named()
        .iter()
        .map(|(name, xs)| {
            let (mean, std) = mean_std(xs);
            SummaryRow { policy: kind.to_string(), metric: name.to_string(), mean, std, n: xs.len() }
        })
        .collect()
}

/// Writes `eval_<policy>.csv` (per step) and `eval_<policy>_summary.csv`.
pub fn cmd_eval(
    cfg: &ExperimentConfig,
    kind: PolicyKind,
    checkpoint: Option<&Path>,
    episodes: usize,
) -> Result<Vec<SummaryRow>> {
    if episodes == 0 {
        return Err(Error::config("episodes must be positive"));
    }
    let mut sink = CsvSink::create::<RunRecord>(&cfg.out.join(format!("eval_{kind}.csv")))?;
    let m = evaluate_policy(cfg, kind, checkpoint, episodes, Some(&mut sink))?;
    sink.finish()?;
    let rows = summary_rows(kind, &m);
    super::records::write_csv(&cfg.out.join(format!("eval_{kind}_summary.csv")), &rows)?;
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Eta,
    Lambda,
    Bandwidth,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eta" => Ok(SweepParam::Eta),
            "lambda" => Ok(SweepParam::Lambda),
            "bandwidth" => Ok(SweepParam::Bandwidth),
            _ => Err(Error::config(format!("cannot sweep `{s}`; use eta, lambda or bandwidth"))),
        }
    }
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Eta => "eta",
            SweepParam::Lambda => "lambda",
            SweepParam::Bandwidth => "bandwidth",
        }
    }
}

/// Policy metrics at each value of `param`. Cost weights change the
/// objective, so a learned policy without a checkpoint is retrained per eta
/// or lambda value; for bandwidth it is trained once on the base config and
/// evaluated on constant-bandwidth traces.
pub fn cmd_sweep(
    cfg: &ExperimentConfig,
    param: SweepParam,
    values: &[f64],
    kind: PolicyKind,
    checkpoint: Option<&Path>,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::config("sweep needs at least one value"));
    }
    let mut rows = Vec::new();
    let base_dir = cfg.out.join(format!("sweep_{}", param.name()));
    let train_once = kind.is_learned() && checkpoint.is_none() && param == SweepParam::Bandwidth;
    if train_once {
        let base = ExperimentConfig { out: base_dir.join("base"), ..cfg.clone() };
        cmd_train(&base, kind)?;
    }
    for (i, &v) in values.iter().enumerate() {
        let mut c = cfg.clone();
        match param {
            SweepParam::Eta => c.eta = v,
            SweepParam::Lambda => c.lambda = v,
            SweepParam::Bandwidth => c.bandwidth = BandwidthSpec::constant(v),
        }
        c.out = if train_once { base_dir.join("base") } else { base_dir.join(format!("point{i}")) };
        c.validate()?;
        if kind.is_learned() && checkpoint.is_none() && !train_once {
            cmd_train(&c, kind)?;
        }
        let m = evaluate_policy(&c, kind, checkpoint, cfg.eval_episodes, None)?;
        for (metric, xs) in m.named() {
            let (mean, std) = mean_std(xs);
            rows.push(SweepRow { param: param.name().to_string(), value: v, metric: metric.to_string(), mean, std });
        }
    }
    super::records::write_csv(&cfg.out.join(format!("sweep_{}.csv", param.name())), &rows)?;
    Ok(rows)
}

/// Exhaustive optimum for each bandwidth sample of the first seed's
/// process: every trace entry once, or `steps` walk samples.
pub fn cmd_oracle(cfg: &ExperimentConfig) -> Result<Vec<OracleRow>> {
    let scenario = cfg.scenario(cfg.grid)?;
    let cp = scenario.cost_params()?;
    let n = match &cfg.bandwidth {
        BandwidthSpec::Trace { values } => values.len() as u64,
        BandwidthSpec::TraceFile { path } => crate::env::read_trace_csv(path)?.len() as u64,
        BandwidthSpec::RandomWalk { .. } => cfg.steps,
    };
    let mut process = cfg.bandwidth_process(cfg.seeds[0])?;
    let mut rows = Vec::new();
    for step in 0..n {
        let b = process.bandwidth_next();
        let o = brute_force_optimum(&scenario.grid, &scenario.system, &scenario.workload, b, &cp)?;
        rows.push(OracleRow {
            step,
            bandwidth: b,
            index: o.index,
            f_c: o.action.freq.f_c,
            f_g: o.action.freq.f_g,
            f_m: o.action.freq.f_m,
            xi: o.action.xi,
            tti_total: o.evaluation.latency.total,
            eti_total: o.evaluation.energy.total,
            cost: o.evaluation.cost,
            evaluations: scenario.grid.len(),
        });
    }
    super::records::write_csv(&cfg.out.join("oracle.csv"), &rows)?;
    Ok(rows)
}

/// Sorted channel importance of one seeded synthetic feature map after
/// attention; `skew = None` uses the skew calibrated to a 0.6 top-3 mass.
pub fn attn_demo(
    seed: u64,
    channels: usize,
    height: usize,
    width: usize,
    skew: Option<f64>,
    reduction: usize,
) -> Result<Vec<ImportanceRow>> {
    let skew = match skew {
        Some(s) => s,
        None => calibrate_skew(channels, TARGET_TOP3_MASS)?,
    };
    let mut rng = substream(seed, "attn-demo");
    let ca = ChannelAttnParams::seeded(channels, reduction.clamp(1, channels), &mut rng)?;
    let sa = SpatialAttnParams::seeded(&mut rng);
    let f = synth_feature_map(rng.next_u64(), skew, channels, height, width)?;
    let d = importance_distribution(&apply_scam(&f, &ca, &sa)?);
    let mut cumulative = 0.0;
    Ok(d.ranking()
        .into_iter()
        .enumerate()
        .map(|(rank, channel)| {
            let importance = d.weights()[channel];
            cumulative += importance;
            ImportanceRow { rank: rank + 1, channel, importance, cumulative }
        })
        .collect())
}
