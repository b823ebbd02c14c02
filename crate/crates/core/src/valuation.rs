//! Synthetic valuation generators.
//!
//! All randomness comes from the caller's generator; the experiment harness
//! uses `ChaCha8Rng` so that seeded runs replicate across platforms.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AuctionError, Result};

pub const DEFAULT_CEILING: f64 = 200_000.0;
pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_ROUNDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuationModel {
    /// Every slot uniform on `(0, C)`.
    UniformIid,
    /// Top slot uniform on `(0, C)`, the rest uniform below it.
    TopAnchored,
    /// Top slots smoothed over the graph by `rounds` averaging steps with
    /// self-weight `alpha`; remaining slots as in `TopAnchored`.
    DeGroot { alpha: f64, rounds: usize },
}

impl ValuationModel {
    pub fn degroot() -> Self {
        ValuationModel::DeGroot {
            alpha: DEFAULT_ALPHA,
            rounds: DEFAULT_ROUNDS,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ValuationModel::UniformIid => "uniform",
            ValuationModel::TopAnchored => "top_anchored",
            ValuationModel::DeGroot { .. } => "degroot",
        }
    }
}

impl fmt::Display for ValuationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ValuationModel {
    type Err = AuctionError;

    /// `uniform`/`1`, `top_anchored`/`2`, `degroot`/`3`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "model1" | "uniform" | "uniform_iid" => Ok(ValuationModel::UniformIid),
            "2" | "model2" | "top_anchored" | "top-anchored" => Ok(ValuationModel::TopAnchored),
            "3" | "model3" | "degroot" => Ok(ValuationModel::degroot()),
            other => Err(AuctionError::InvalidParameter(format!(
                "unknown valuation model {other:?}"
            ))),
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + rng.gen::<f64>() * (hi - lo)
}

fn below_top<R: Rng + ?Sized>(rng: &mut R, top: f64, m: usize) -> Vec<f64> {
    let lo = top.min(1.0);
    let mut v = Vec::with_capacity(m);
    v.push(top);
    for _ in 1..m {
        v.push(uniform(rng, lo, top));
    }
    v
}

fn sort_desc(v: &mut [f64]) {
    v.sort_unstable_by(|a, b| b.total_cmp(a));
}

/// One synchronous averaging round. Agents without neighbors keep their
/// value.
pub fn degroot_step(x: &[f64], adjacency: &[Vec<usize>], alpha: f64) -> Vec<f64> {
    x.iter()
        .zip(adjacency)
        .map(|(&own, nbrs)| {
            if nbrs.is_empty() {
                own
            } else {
                let mean = nbrs.iter().map(|&j| x[j]).sum::<f64>() / nbrs.len() as f64;
                alpha * own + (1.0 - alpha) * mean
            }
        })
        .collect()
}

pub fn degroot(x: &[f64], adjacency: &[Vec<usize>], alpha: f64, rounds: usize) -> Vec<f64> {
    let mut cur = x.to_vec();
    for _ in 0..rounds {
        cur = degroot_step(&cur, adjacency, alpha);
    }
    cur
}

/// `n` non-increasing vectors of length `m`. `adjacency` (neighbor indices
/// per agent) is required by the DeGroot model and ignored otherwise.
pub fn generate<R: Rng + ?Sized>(
    model: &ValuationModel,
    ceiling: f64,
    adjacency: Option<&[Vec<usize>]>,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if m == 0 {
        return Err(AuctionError::InvalidParameter("m must be at least 1".into()));
    }
    if !(ceiling.is_finite() && ceiling > 0.0) {
        return Err(AuctionError::InvalidParameter(format!("bad value ceiling {ceiling}")));
    }
    let mut out: Vec<Vec<f64>> = match *model {
        ValuationModel::UniformIid => (0..n)
            .map(|_| (0..m).map(|_| uniform(rng, 0.0, ceiling)).collect())
            .collect(),
        ValuationModel::TopAnchored => (0..n)
            .map(|_| {
                let top = uniform(rng, 0.0, ceiling);
                below_top(rng, top, m)
            })
            .collect(),
        ValuationModel::DeGroot { alpha, rounds } => {
            let adjacency = adjacency.ok_or_else(|| {
                AuctionError::InvalidParameter("the DeGroot model needs a graph".into())
            })?;
            if adjacency.len() != n {
                return Err(AuctionError::InvalidParameter(format!(
                    "graph has {} agents, expected {n}",
                    adjacency.len()
                )));
            }
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(AuctionError::InvalidParameter(format!("alpha {alpha} outside (0, 1)")));
            }
            let tops: Vec<f64> = (0..n).map(|_| uniform(rng, 0.0, ceiling)).collect();
            let tops = degroot(&tops, adjacency, alpha, rounds);
            tops.into_iter().map(|top| below_top(rng, top, m)).collect()
        }
    };
    for v in &mut out {
        sort_desc(v);
    }
    Ok(out)
}
