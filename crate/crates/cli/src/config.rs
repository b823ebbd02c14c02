//! Sweep configuration as a flat `key = value` file.
//!
//! ```text
//! # 50 trials on a generated graph
//! graph = pa:500:3
//! mechanism = mudan
//! strategy = new_agent, random
//! model = degroot
//! m = 20
//! trials = 50
//! seed = 7
//! ```

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use diffusion_auction::valuation::{ValuationModel, DEFAULT_CEILING};
use diffusion_auction::PriorityStrategy;
use serde::{Deserialize, Serialize};

use crate::graph::Generator;
use crate::mech::{Demand, MechanismKind};

/// Environment variable holding the default seed.
pub const SEED_ENV: &str = "DIFFAUC_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    File { path: PathBuf, undirected: bool },
    Generated(Generator),
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::File { path, .. } => write!(f, "file:{}", path.display()),
            GraphSource::Generated(g) => g.fmt(f),
        }
    }
}

/// How the seller node is picked in each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SellerRule {
    /// Uniform over nodes, redrawn while the pick has no out-neighbors.
    Uniform,
    /// Always the node with this label.
    Fixed(u64),
}

impl fmt::Display for SellerRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SellerRule::Uniform => f.write_str("uniform"),
            SellerRule::Fixed(l) => write!(f, "{l}"),
        }
    }
}

impl FromStr for SellerRule {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" | "random" => Ok(SellerRule::Uniform),
            other => Ok(SellerRule::Fixed(
                other.parse().with_context(|| format!("bad seller {other:?}"))?,
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub mechanisms: Vec<MechanismKind>,
    pub strategies: Vec<PriorityStrategy>,
    pub model: ValuationModel,
    pub ceiling: f64,
    pub demand: Demand,
    pub m: usize,
    pub trials: usize,
    pub seller: SellerRule,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            graph: GraphSource::Generated(Generator::PreferentialAttachment { n: 200, k: 3 }),
            mechanisms: vec![MechanismKind::Mudan],
            strategies: vec![PriorityStrategy::Degree],
            model: ValuationModel::UniformIid,
            ceiling: DEFAULT_CEILING,
            demand: Demand::Multi,
            m: 10,
            trials: 10,
            seller: SellerRule::Uniform,
            seed: 0,
        }
    }
}

fn list<T: FromStr>(value: &str) -> Result<Vec<T>>
where
    T::Err: Into<anyhow::Error>,
{
    let items = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(Into::into))
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        bail!("empty list");
    }
    Ok(items)
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Defaults with the seed taken from `DIFFAUC_SEED` when it is set.
    pub fn from_env() -> Result<Self> {
        let mut c = ExperimentConfig::default();
        if let Ok(s) = std::env::var(SEED_ENV) {
            c.seed = s.trim().parse().with_context(|| format!("{SEED_ENV}={s:?} is not a seed"))?;
        }
        Ok(c)
    }

    /// Applies one setting. Keys: graph, undirected, mechanism, strategy,
    /// model, alpha, rounds, ceiling, demand, m, trials, seller, seed.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let (key, value) = (key.trim(), value.trim());
        let ctx = || format!("{key} = {value:?}");
        match key {
            "graph" => {
                self.graph = match value.strip_prefix("file:") {
                    Some(p) => GraphSource::File {
                        path: PathBuf::from(p),
                        undirected: matches!(self.graph, GraphSource::File { undirected: true, .. }),
                    },
                    None => GraphSource::Generated(value.parse().with_context(ctx)?),
                }
            }
            "undirected" => {
                let flag: bool = value.parse().with_context(ctx)?;
                match &mut self.graph {
                    GraphSource::File { undirected, .. } => *undirected = flag,
                    GraphSource::Generated(_) => bail!("undirected applies to file graphs; set graph first"),
                }
            }
            "mechanism" => self.mechanisms = list(value).with_context(ctx)?,
            "strategy" => self.strategies = list(value).with_context(ctx)?,
            "model" => {
                let parsed: ValuationModel = value.parse().with_context(ctx)?;
                // Keep averaging parameters that were set earlier.
                if !matches!(
                    (parsed, self.model),
                    (ValuationModel::DeGroot { .. }, ValuationModel::DeGroot { .. })
                ) {
                    self.model = parsed;
                }
            }
            "alpha" | "rounds" => {
                let ValuationModel::DeGroot { alpha, rounds } = &mut self.model else {
                    bail!("{key} applies to model = degroot; set the model first");
                };
                if key == "alpha" {
                    let a: f64 = value.parse().with_context(ctx)?;
                    if !(a > 0.0 && a < 1.0) {
                        bail!("alpha must lie in (0, 1), got {a}");
                    }
                    *alpha = a;
                } else {
                    *rounds = value.parse().with_context(ctx)?;
                }
            }
            "ceiling" => {
                let c: f64 = value.parse().with_context(ctx)?;
                if !(c.is_finite() && c > 0.0) {
                    bail!("ceiling must be positive, got {c}");
                }
                self.ceiling = c;
            }
            "demand" => self.demand = value.parse()?,
            "m" => {
                self.m = value.parse().with_context(ctx)?;
                if self.m == 0 {
                    bail!("m must be at least 1");
                }
            }
            "trials" => self.trials = value.parse().with_context(ctx)?,
            "seller" => self.seller = value.parse()?,
            "seed" => self.seed = value.parse().with_context(ctx)?,
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Applies a `key=value` assignment.
    pub fn assign(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv.split_once('=').with_context(|| format!("expected key=value, got {kv:?}"))?;
        self.set(k, v)
    }

    /// Applies every assignment in a config file body. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.assign(line).with_context(|| format!("line {}", idx + 1))?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// Rejects combinations no mechanism can run.
    pub fn validate(&self) -> Result<()> {
        if self.demand == Demand::Multi && self.mechanisms.contains(&MechanismKind::Dnamu) {
            bail!("dnamu is single-demand only; set demand = single");
        }
        Ok(())
    }

    /// The config as `key = value` lines that [`ExperimentConfig::parse`]
    /// reads back to an equal value.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("graph", self.graph.to_string());
        if let GraphSource::File { undirected, .. } = self.graph {
            put("undirected", undirected.to_string());
        }
        put("mechanism", join(&self.mechanisms));
        put("strategy", join(&self.strategies));
        put("model", self.model.label().to_string());
        if let ValuationModel::DeGroot { alpha, rounds } = self.model {
            put("alpha", alpha.to_string());
            put("rounds", rounds.to_string());
        }
        put("ceiling", self.ceiling.to_string());
        put("demand", self.demand.to_string());
        put("m", self.m.to_string());
        put("trials", self.trials.to_string());
        put("seller", self.seller.to_string());
        put("seed", self.seed.to_string());
        s
    }
}
