//! Directed graphs read from edge lists or generated, and the step that turns
//! a graph plus a seller node into an auction instance.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use diffusion_auction::multidemand::{MultiInstance, MultiProfile};
use diffusion_auction::AgentId;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Dense directed graph. `labels[i]` is the id node `i` had in the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    labels: Vec<u64>,
    out: Vec<Vec<usize>>,
}

impl Digraph {
    /// Graph on nodes labelled `0..n` with the given edges. Self-loops and
    /// duplicates are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut out = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range");
            if u != v {
                out[u].push(v);
            }
        }
        for list in &mut out {
            list.sort_unstable();
            list.dedup();
        }
        Digraph {
            labels: (0..n as u64).collect(),
            out,
        }
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn label(&self, node: usize) -> u64 {
        self.labels[node]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn node_of(&self, label: u64) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    pub fn out_neighbors(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&v| (u, v)))
    }

    /// Adds the reverse of every edge.
    pub fn symmetrize(&mut self) {
        let rev: Vec<(usize, usize)> = self.edges().map(|(u, v)| (v, u)).collect();
        for (u, v) in rev {
            self.out[u].push(v);
        }
        for list in &mut self.out {
            list.sort_unstable();
            list.dedup();
        }
    }

    /// Nodes reachable from `root` along out-edges, `root` excluded, in
    /// ascending order.
    pub fn reachable_from(&self, root: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n()];
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &v in &self.out[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen[root] = false;
        (0..self.n()).filter(|&i| seen[i]).collect()
    }
}

/// Reads whitespace-separated `u v` pairs. Blank lines and lines starting
/// with `#` or `%` are skipped; extra columns (weights, timestamps) are
/// ignored. Labels are compacted to `0..n` in ascending order.
pub fn parse_edge_list<R: BufRead>(reader: R, undirected: bool) -> Result<Digraph> {
    let mut raw = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.with_context(|| format!("line {lineno}: read failed"))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let mut it = t.split_whitespace();
        let (Some(a), Some(b)) = (it.next(), it.next()) else {
            bail!("line {lineno}: expected two node ids, got {t:?}");
        };
        let u: u64 = a.parse().with_context(|| format!("line {lineno}: bad node id {a:?}"))?;
        let v: u64 = b.parse().with_context(|| format!("line {lineno}: bad node id {b:?}"))?;
        raw.push((u, v));
    }
    let mut labels: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    labels.sort_unstable();
    labels.dedup();
    let index = |l: u64| labels.binary_search(&l).expect("label collected above");
    let loops = raw.iter().filter(|(u, v)| u == v).count();
    if loops > 0 {
        log::warn!("dropped {loops} self-loop(s)");
    }
    let mut g = Digraph::from_edges(labels.len(), raw.iter().map(|&(u, v)| (index(u), index(v))));
    g.labels = labels;
    if undirected {
        g.symmetrize();
    }
    Ok(g)
}

pub fn read_edge_list(path: &Path, undirected: bool) -> Result<Digraph> {
    let f = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    parse_edge_list(std::io::BufReader::new(f), undirected).with_context(|| format!("in {}", path.display()))
}

/// Writes one `u v` line per directed edge, using the original labels,
/// after a comment line with the node and edge counts.
pub fn write_edge_list<W: Write>(g: &Digraph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# nodes={} edges={}", g.n(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(w, "{} {}", g.labels[u], g.labels[v])?;
    }
    Ok(())
}

/// Synthetic graph families. Node 0 is the natural seller in each: every
/// other node is reachable from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// Random recursive tree, edges pointing away from node 0.
    Tree { n: usize },
    /// Undirected preferential attachment; each new node links to `k`
    /// distinct earlier nodes chosen proportionally to degree.
    PreferentialAttachment { n: usize, k: usize },
    /// Random recursive tree plus every other ordered pair with
    /// probability `p`.
    ErdosRenyi { n: usize, p: f64 },
}

impl Generator {
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Digraph> {
        match *self {
            Generator::Tree { n } => {
                check_size(n)?;
                Ok(Digraph::from_edges(n, tree_edges(n, rng)))
            }
            Generator::PreferentialAttachment { n, k } => {
                check_size(n)?;
                if k == 0 {
                    bail!("preferential attachment needs k >= 1");
                }
                Ok(preferential_attachment(n, k, rng))
            }
            Generator::ErdosRenyi { n, p } => {
                check_size(n)?;
                if !(0.0..=1.0).contains(&p) {
                    bail!("edge probability {p} outside [0, 1]");
                }
                let mut edges = tree_edges(n, rng);
                for u in 0..n {
                    for v in 0..n {
                        if u != v && rng.gen_bool(p) {
                            edges.push((u, v));
                        }
                    }
                }
                Ok(Digraph::from_edges(n, edges))
            }
        }
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        bail!("a generated graph needs at least 2 nodes (seller and one buyer)");
    }
    Ok(())
}

fn tree_edges<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    (1..n).map(|v| (rng.gen_range(0..v), v)).collect()
}

fn preferential_attachment<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Digraph {
    // Each endpoint appears in `ends` once per incident edge, so a uniform
    // pick from it is a degree-proportional pick.
    let mut ends: Vec<usize> = Vec::new();
    let mut edges = Vec::new();
    let seed = (k + 1).min(n);
    for u in 0..seed {
        for v in 0..u {
            edges.push((u, v));
            ends.extend([u, v]);
        }
    }
    let mut targets = Vec::with_capacity(k);
    for u in seed..n {
        targets.clear();
        while targets.len() < k.min(u) {
            let t = *ends.choose(rng).expect("seed clique has edges");
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((u, t));
            ends.extend([u, t]);
        }
    }
    let mut g = Digraph::from_edges(n, edges);
    g.symmetrize();
    g
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Tree { n } => write!(f, "tree:{n}"),
            Generator::PreferentialAttachment { n, k } => write!(f, "pa:{n}:{k}"),
            Generator::ErdosRenyi { n, p } => write!(f, "er:{n}:{p}"),
        }
    }
}

impl FromStr for Generator {
    type Err = anyhow::Error;

    /// `tree:N`, `pa:N:K`, `er:N:P`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .with_context(|| format!("{s:?}: missing field {i}"))?
                .parse()
                .with_context(|| format!("{s:?}: bad integer"))
        };
        let g = match parts[0] {
            "tree" if parts.len() == 2 => Generator::Tree { n: num(1)? },
            "pa" if parts.len() == 3 => Generator::PreferentialAttachment { n: num(1)?, k: num(2)? },
            "er" if parts.len() == 3 => Generator::ErdosRenyi {
                n: num(1)?,
                p: parts[2].parse().with_context(|| format!("{s:?}: bad probability"))?,
            },
            _ => bail!("unknown generator {s:?} (expected tree:N, pa:N:K or er:N:P)"),
        };
        Ok(g)
    }
}

/// A graph with a chosen seller, mapped to buyer ids `0..n`.
#[derive(Debug, Clone)]
pub struct SellerView {
    pub seller: usize,
    /// Graph node of each buyer, ascending.
    pub buyers: Vec<usize>,
    pub seller_neighbors: Vec<AgentId>,
    /// Buyer-level out-neighbors. Edges back into the seller are dropped.
    pub neighbors: Vec<Vec<AgentId>>,
}

impl SellerView {
    /// Buyers are the nodes reachable from `seller`; everything else is out
    /// of the market.
    pub fn new(g: &Digraph, seller: usize) -> Self {
        let buyers = g.reachable_from(seller);
        let mut index = BTreeMap::new();
        for (i, &node) in buyers.iter().enumerate() {
            index.insert(node, AgentId(i));
        }
        let map = |list: &[usize]| -> Vec<AgentId> { list.iter().filter_map(|v| index.get(v).copied()).collect() };
        SellerView {
            seller,
            seller_neighbors: map(g.out_neighbors(seller)),
            neighbors: buyers.iter().map(|&u| map(g.out_neighbors(u))).collect(),
            buyers,
        }
    }

    pub fn n(&self) -> usize {
        self.buyers.len()
    }

    /// Neighbor indices per buyer, the form the DeGroot generator takes.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.neighbors.iter().map(|l| l.iter().map(|a| a.0).collect()).collect()
    }

    pub fn instance(&self, m: usize, values: Vec<Vec<f64>>) -> Result<MultiInstance> {
        if values.len() != self.n() {
            bail!("{} valuation vectors for {} buyers", values.len(), self.n());
        }
        let profiles = values
            .into_iter()
            .zip(&self.neighbors)
            .map(|(v, nb)| MultiProfile::new(v, nb.iter().copied()))
            .collect();
        Ok(MultiInstance::new(m, self.seller_neighbors.iter().copied(), profiles)?)
    }
}
