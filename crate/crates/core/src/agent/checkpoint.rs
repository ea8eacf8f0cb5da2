//! Versioned plain-text checkpoint: metadata, agent config, counters, RNG
//! positions, and both networks with every weight in shortest round-trip
//! decimal form. Replay contents and optimizer moments are not stored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::Adam;
use super::dqn::{Agent, AgentConfig};
use super::mlp::{Dense, Mlp};
use super::replay::ReplayMemory;
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "dvfo-checkpoint";
const VERSION: u32 = 1;
/// Upper bound on any single layer, so a corrupt header cannot request a
/// huge allocation.
const MAX_LAYER_PARAMS: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta: BTreeMap<String, String>,
    pub config: AgentConfig,
    pub env_steps: u64,
    pub updates: u64,
    pub reward_sum: f64,
    pub explore_rng: ChaCha8Rng,
    pub replay_rng: ChaCha8Rng,
    pub online: Mlp,
    pub target: Mlp,
}

fn write_rng(out: &mut String, name: &str, rng: &ChaCha8Rng) {
    writeln!(out, "rng {name} {} {} {}", hex::encode(rng.get_seed()), rng.get_stream(), rng.get_word_pos()).unwrap();
}

fn write_values<'a>(out: &mut String, tag: &str, values: impl Iterator<Item = &'a f64>) {
    out.push_str(tag);
    for v in values {
        write!(out, " {v:?}").unwrap();
    }
    out.push('\n');
}

fn write_net(out: &mut String, name: &str, net: &Mlp) {
    writeln!(out, "net {name} {}", net.layers.len()).unwrap();
    for l in &net.layers {
        writeln!(out, "layer {} {}", l.outputs(), l.inputs()).unwrap();
        write_values(out, "w", l.w.iter());
        write_values(out, "b", l.b.iter());
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate(), line: 0 }
    }

    fn next(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(Error::parse(self.line + 1, "unexpected end of checkpoint")),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, msg)
    }

    /// Next line, which must start with `tag`; returns the remainder.
    fn expect(&mut self, tag: &str) -> Result<&'a str> {
        let l = self.next()?;
        match l.strip_prefix(tag) {
            Some(rest) if rest.is_empty() || rest.starts_with(' ') => Ok(rest.trim_start()),
            _ => Err(self.err(format!("expected `{tag}`, found `{}`", truncate(l)))),
        }
    }

    fn number<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("bad number `{}`", truncate(s))))
    }

    fn values(&mut self, tag: &str, n: usize) -> Result<Vec<f64>> {
        let rest = self.expect(tag)?;
        let v = rest.split_ascii_whitespace().map(|t| self.number::<f64>(t)).collect::<Result<Vec<f64>>>()?;
        if v.len() != n {
            return Err(self.err(format!("`{tag}` has {} values, expected {n}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(self.err("non-finite weight"));
        }
        Ok(v)
    }

    fn rng(&mut self, name: &str) -> Result<ChaCha8Rng> {
        let rest = self.expect(&format!("rng {name}"))?;
        let parts: Vec<&str> = rest.split_ascii_whitespace().collect();
        if parts.len() != 3 {
            return Err(self.err("rng line needs seed, stream and word position"));
        }
        let seed: [u8; 32] = hex::decode(parts[0])
            .ok()
            .and_then(|b| b.try_into().ok())
            .ok_or_else(|| self.err("rng seed must be 64 hex digits"))?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.number(parts[1])?);
        rng.set_word_pos(self.number(parts[2])?);
        Ok(rng)
    }

    fn net(&mut self, name: &str) -> Result<Mlp> {
        let n: usize = {
            let rest = self.expect(&format!("net {name}"))?;
            self.number(rest)?
        };
        if n == 0 || n > 64 {
            return Err(self.err(format!("implausible layer count {n}")));
        }
        let mut layers = Vec::with_capacity(n);
        for _ in 0..n {
            let rest = self.expect("layer")?;
            let dims: Vec<usize> = rest.split_ascii_whitespace().map(|t| self.number(t)).collect::<Result<_>>()?;
            let [out, inp] = dims[..] else {
                return Err(self.err("layer line needs two sizes"));
            };
            if out == 0 || inp == 0 || out.saturating_mul(inp) > MAX_LAYER_PARAMS {
                return Err(self.err(format!("bad layer shape {out}x{inp}")));
            }
            let w = Array2::from_shape_vec((out, inp), self.values("w", out * inp)?).expect("length checked");
            let b = Array1::from(self.values("b", out)?);
            layers.push(Dense { w, b });
        }
        if layers.windows(2).any(|p| p[0].outputs() != p[1].inputs()) {
            return Err(self.err(format!("layers of `{name}` do not chain")));
        }
        Ok(Mlp { layers })
    }
}

fn truncate(s: &str) -> &str {
    match s.char_indices().nth(40) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

impl Checkpoint {
    pub fn from_agent(agent: &Agent, meta: BTreeMap<String, String>) -> Self {
        Self {
            meta,
            config: agent.config.clone(),
            env_steps: agent.env_steps,
            updates: agent.updates,
            reward_sum: agent.reward_sum,
            explore_rng: agent.explore_rng.clone(),
            replay_rng: agent.replay_rng.clone(),
            online: agent.online.clone(),
            target: agent.target.clone(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{CHECKPOINT_MAGIC} {VERSION}\n");
        for (k, v) in &self.meta {
            writeln!(out, "meta {k} {v}").unwrap();
        }
        let cfg = toml::to_string(&self.config).expect("config serializes");
        for line in cfg.lines().filter(|l| !l.trim().is_empty()) {
            writeln!(out, "config {line}").unwrap();
        }
        writeln!(out, "counter env_steps {}", self.env_steps).unwrap();
        writeln!(out, "counter updates {}", self.updates).unwrap();
        writeln!(out, "counter reward_sum {:?}", self.reward_sum).unwrap();
        write_rng(&mut out, "exploration", &self.explore_rng);
        write_rng(&mut out, "replay", &self.replay_rng);
        write_net(&mut out, "online", &self.online);
        write_net(&mut out, "target", &self.target);
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let version = lines.expect(CHECKPOINT_MAGIC)?;
        if version != VERSION.to_string() {
            return Err(lines.err(format!("unsupported checkpoint version `{}`", truncate(version))));
        }
        let mut meta = BTreeMap::new();
        let mut config_lines = Vec::new();
        let mut l = lines.next()?;
        loop {
            if let Some(rest) = l.strip_prefix("meta ") {
                let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
                if k.is_empty() {
                    return Err(lines.err("empty meta key"));
                }
                meta.insert(k.to_string(), v.to_string());
            } else if let Some(rest) = l.strip_prefix("config ") {
                config_lines.push(rest);
            } else {
                break;
            }
            l = lines.next()?;
        }
        let config: AgentConfig = toml::from_str(&config_lines.join("\n"))
            .map_err(|e| lines.err(format!("bad config echo: {}", e.message())))?;
        let env_steps = match l.strip_prefix("counter env_steps ") {
            Some(v) => lines.number(v)?,
            None => return Err(lines.err("expected `counter env_steps`")),
        };
        let updates = {
            let v = lines.expect("counter updates")?;
            lines.number(v)?
        };
        let reward_sum: f64 = {
            let v = lines.expect("counter reward_sum")?;
            lines.number(v)?
        };
        if !reward_sum.is_finite() {
            return Err(lines.err("reward_sum must be finite"));
        }
        let explore_rng = lines.rng("exploration")?;
        let replay_rng = lines.rng("replay")?;
        let online = lines.net("online")?;
        let target = lines.net("target")?;
        lines.expect("end")?;
        if online.dims() != target.dims() {
            return Err(lines.err("online and target networks differ in shape"));
        }
        Ok(Self { meta, config, env_steps, updates, reward_sum, explore_rng, replay_rng, online, target })
    }

    /// Rebuilds an agent with an empty replay memory and fresh optimizer
    /// state. Rejects networks whose shape does not match `inputs` and
    /// `actions` under the stored config.
    pub fn into_agent(self, inputs: usize, actions: usize) -> Result<Agent> {
        self.config.validate()?;
        let expected = self.config.layer_dims(inputs, actions);
        if self.online.dims() != expected {
            return Err(Error::config(format!(
                "checkpoint network {:?} does not match expected {:?}",
                self.online.dims(),
                expected
            )));
        }
        Ok(Agent {
            adam: Adam::new(&self.online, self.config.lr),
            replay: ReplayMemory::new(self.config.buffer_capacity, self.config.alpha),
            online: self.online,
            target: self.target,
            env_steps: self.env_steps,
            updates: self.updates,
            reward_sum: self.reward_sum,
            explore_rng: self.explore_rng,
            replay_rng: self.replay_rng,
            config: self.config,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| Error::File { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }
}
