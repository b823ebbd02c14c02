//! Repeated truthful runs over random sellers and valuations.
//!
//! The graph is drawn (or read) once from stream 0 of a ChaCha8 generator
//! seeded with the config seed; trial `t` uses stream `t + 1`. A trial can
//! therefore be rerun alone from `(config, t)`.

use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use diffusion_auction::valuation::generate;
use diffusion_auction::PriorityStrategy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, GraphSource, SellerRule};
use crate::graph::{read_edge_list, Digraph, SellerView};
use crate::mech::{run_truthful, MechanismKind};

pub const SCHEMA: &str = "diffauc-sweep-v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub trial: usize,
    /// Label of the seller node.
    pub seller: u64,
    /// Buyers reachable from the seller.
    pub buyers: usize,
    pub mechanism: MechanismKind,
    pub strategy: String,
    pub model: String,
    pub m: usize,
    pub sw: f64,
    pub rv: f64,
    pub sw_opt: f64,
    pub sw_per_item: f64,
    pub rv_per_item: f64,
    /// Wall time of the mechanism run, only when timing was requested.
    pub runtime_ms: Option<f64>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn load_graph(cfg: &ExperimentConfig) -> Result<Digraph> {
    match &cfg.graph {
        GraphSource::File { path, undirected } => read_edge_list(path, *undirected),
        GraphSource::Generated(g) => g.generate(&mut rng_for(cfg.seed, 0)),
    }
}

fn pick_seller<R: Rng>(g: &Digraph, rule: SellerRule, trial: usize, rng: &mut R) -> Result<usize> {
    match rule {
        SellerRule::Fixed(label) => {
            let node = g.node_of(label).with_context(|| format!("seller {label} is not in the graph"))?;
            if g.out_neighbors(node).is_empty() {
                bail!("seller {label} has no out-neighbors");
            }
            Ok(node)
        }
        SellerRule::Uniform => loop {
            let node = rng.gen_range(0..g.n());
            if !g.out_neighbors(node).is_empty() {
                return Ok(node);
            }
            log::info!("trial {trial}: node {} has no out-neighbors, resampling the seller", g.label(node));
        },
    }
}

/// The per-trial random priority: the configured seed mixed with a draw
/// from the trial stream, so trials differ but stay reproducible.
fn trial_strategy(s: PriorityStrategy, salt: u64) -> PriorityStrategy {
    match s {
        PriorityStrategy::Random { seed } => PriorityStrategy::Random { seed: seed ^ salt },
        other => other,
    }
}

/// Rows of trial `trial`, one per (mechanism, strategy) in config order.
pub fn run_trial(cfg: &ExperimentConfig, g: &Digraph, trial: usize, timing: bool) -> Result<Vec<SweepRow>> {
    let mut rng = rng_for(cfg.seed, trial as u64 + 1);
    let seller = pick_seller(g, cfg.seller, trial, &mut rng)?;
    let view = SellerView::new(g, seller);
    let adjacency = view.adjacency();
    let values = generate(&cfg.model, cfg.ceiling, Some(&adjacency), view.n(), cfg.m, &mut rng)?;
    let inst = view.instance(cfg.m, values)?;
    let salt: u64 = rng.gen();
    let mut rows = Vec::with_capacity(cfg.mechanisms.len() * cfg.strategies.len());
    for &mech in &cfg.mechanisms {
        for &strategy in &cfg.strategies {
            let start = Instant::now();
            let r = run_truthful(mech, trial_strategy(strategy, salt), cfg.demand, &inst)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let m = cfg.m as f64;
            rows.push(SweepRow {
                trial,
                seller: g.label(seller),
                buyers: view.n(),
                mechanism: mech,
                strategy: strategy.to_string(),
                model: cfg.model.label().to_string(),
                m: cfg.m,
                sw: r.social_welfare,
                rv: r.revenue,
                sw_opt: r.sw_opt,
                sw_per_item: r.social_welfare / m,
                rv_per_item: r.revenue / m,
                runtime_ms: timing.then_some(elapsed),
            });
        }
    }
    Ok(rows)
}

/// All trials, ordered by trial index whatever the completion order.
pub fn sweep(cfg: &ExperimentConfig, timing: bool) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let g = load_graph(cfg)?;
    if !(0..g.n()).any(|u| !g.out_neighbors(u).is_empty()) {
        bail!("the graph has no edges, so no node can be a seller");
    }
    let per_trial: Vec<Vec<SweepRow>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, &g, t, timing))
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

const COLUMNS: [&str; 13] = [
    "trial",
    "seller",
    "buyers",
    "mechanism",
    "strategy",
    "model",
    "m",
    "sw",
    "rv",
    "sw_opt",
    "sw_per_item",
    "rv_per_item",
    "runtime_ms",
];

/// Writes the schema line, the config as comment lines, a header and the
/// rows. The runtime column is present only when `timing` is set.
pub fn write_csv<W: Write>(cfg: &ExperimentConfig, rows: &[SweepRow], timing: bool, mut w: W) -> Result<()> {
    writeln!(w, "# schema={SCHEMA}")?;
    for line in cfg.to_kv().lines() {
        writeln!(w, "# {line}")?;
    }
    let ncols = if timing { COLUMNS.len() } else { COLUMNS.len() - 1 };
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(&COLUMNS[..ncols])?;
    for r in rows {
        let mut rec = vec![
            r.trial.to_string(),
            r.seller.to_string(),
            r.buyers.to_string(),
            r.mechanism.to_string(),
            r.strategy.clone(),
            r.model.clone(),
            r.m.to_string(),
            r.sw.to_string(),
            r.rv.to_string(),
            r.sw_opt.to_string(),
            r.sw_per_item.to_string(),
            r.rv_per_item.to_string(),
        ];
        if timing {
            rec.push(r.runtime_ms.map_or(String::new(), |t| format!("{t:.3}")));
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Means over trials for one (mechanism, strategy) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mechanism: MechanismKind,
    pub strategy: String,
    pub trials: usize,
    pub mean_sw: f64,
    pub mean_rv: f64,
    pub mean_sw_opt: f64,
    pub mean_sw_per_item: f64,
    pub mean_rv_per_item: f64,
}

/// Groups in order of first appearance.
pub fn summarize(rows: &[SweepRow]) -> Vec<Summary> {
    let mut out: Vec<Summary> = Vec::new();
    for r in rows {
        let idx = match out.iter().position(|s| s.mechanism == r.mechanism && s.strategy == r.strategy) {
            Some(i) => i,
            None => {
                out.push(Summary {
                    mechanism: r.mechanism,
                    strategy: r.strategy.clone(),
                    trials: 0,
                    mean_sw: 0.0,
                    mean_rv: 0.0,
                    mean_sw_opt: 0.0,
                    mean_sw_per_item: 0.0,
                    mean_rv_per_item: 0.0,
                });
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        s.trials += 1;
        s.mean_sw += r.sw;
        s.mean_rv += r.rv;
        s.mean_sw_opt += r.sw_opt;
        s.mean_sw_per_item += r.sw_per_item;
        s.mean_rv_per_item += r.rv_per_item;
    }
    for s in &mut out {
        let k = s.trials as f64;
        s.mean_sw /= k;
        s.mean_rv /= k;
        s.mean_sw_opt /= k;
        s.mean_sw_per_item /= k;
        s.mean_rv_per_item /= k;
    }
    out
}
