//! Social-network instances, reported profiles and the profile graph.
//!
//! Buyers are identified by dense [`AgentId`]s `0..n`. The seller is not a
//! buyer; it appears only as the root of the profile graph and as
//! [`Node::Seller`] in the critical tree.
//!
//! A [`ProfileGraph`] is built from the reports of all buyers. Buyers that are
//! not reachable from the seller through reported edges are treated as
//! silent: valuation 0 and no outgoing edges.

use std::collections::VecDeque;
use std::fmt;

use petgraph::algo::dominators;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::error::{AuctionError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl AgentId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for AgentId {
    fn from(value: usize) -> Self {
        AgentId(value)
    }
}

/// A vertex of the profile graph: the seller or a buyer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Node {
    Seller,
    Buyer(AgentId),
}

fn normalize(neighbors: impl IntoIterator<Item = AgentId>) -> Vec<AgentId> {
    let mut v: Vec<AgentId> = neighbors.into_iter().collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn check_valuation(agent: AgentId, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(AuctionError::InvalidValuation { agent, value })
    }
}

/// True private profile of a buyer: valuation and neighbor set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub valuation: f64,
    /// Sorted, without duplicates.
    pub neighbors: Vec<AgentId>,
}

impl Profile {
    pub fn new(valuation: f64, neighbors: impl IntoIterator<Item = AgentId>) -> Self {
        Profile {
            valuation,
            neighbors: normalize(neighbors),
        }
    }
}

/// A seller with `m` identical items and `n` single-demand buyers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionInstance {
    m: usize,
    seller_neighbors: Vec<AgentId>,
    profiles: Vec<Profile>,
}

impl AuctionInstance {
    /// Validates ids, valuations, self-loops and that every buyer is
    /// reachable from the seller through true neighbor sets.
    pub fn new(
        m: usize,
        seller_neighbors: impl IntoIterator<Item = AgentId>,
        profiles: Vec<Profile>,
    ) -> Result<Self> {
        let n = profiles.len();
        if m == 0 {
            return Err(AuctionError::InvalidInstance("item count must be at least 1".into()));
        }
        if n == 0 {
            return Err(AuctionError::InvalidInstance("at least one buyer is required".into()));
        }
        let seller_neighbors = normalize(seller_neighbors);
        if let Some(bad) = seller_neighbors.iter().find(|a| a.0 >= n) {
            return Err(AuctionError::InvalidInstance(format!(
                "seller neighbor {bad} out of range"
            )));
        }
        let mut profiles = profiles;
        for (i, p) in profiles.iter_mut().enumerate() {
            let agent = AgentId(i);
            check_valuation(agent, p.valuation)?;
            p.neighbors = normalize(p.neighbors.drain(..));
            if let Some(bad) = p.neighbors.iter().find(|a| a.0 >= n) {
                return Err(AuctionError::MalformedReport { agent, neighbor: bad.0 });
            }
            if p.neighbors.contains(&agent) {
                return Err(AuctionError::InvalidInstance(format!("buyer {agent} lists itself")));
            }
        }
        let reachable = reach(n, &seller_neighbors, |i| &profiles[i].neighbors);
        if let Some(i) = reachable.iter().position(|r| !r) {
            return Err(AuctionError::InvalidInstance(format!(
                "buyer {i} is not reachable from the seller"
            )));
        }
        Ok(AuctionInstance {
            m,
            seller_neighbors,
            profiles,
        })
    }

    pub fn n(&self) -> usize {
        self.profiles.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Same network and valuations with a different item count.
    pub fn with_items(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(AuctionError::InvalidInstance("item count must be at least 1".into()));
        }
        Ok(AuctionInstance { m, ..self.clone() })
    }

    pub fn seller_neighbors(&self) -> &[AgentId] {
        &self.seller_neighbors
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn profile(&self, agent: AgentId) -> &Profile {
        &self.profiles[agent.0]
    }

    pub fn valuation(&self, agent: AgentId) -> f64 {
        self.profiles[agent.0].valuation
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.n()).map(AgentId)
    }
}

/// A buyer's reported profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub valuation: f64,
    /// Sorted, without duplicates.
    pub neighbors: Vec<AgentId>,
    pub silent: bool,
}

impl Report {
    pub fn new(valuation: f64, neighbors: impl IntoIterator<Item = AgentId>) -> Self {
        Report {
            valuation,
            neighbors: normalize(neighbors),
            silent: false,
        }
    }

    pub fn truthful(profile: &Profile) -> Self {
        Report {
            valuation: profile.valuation,
            neighbors: profile.neighbors.clone(),
            silent: false,
        }
    }

    pub fn silent() -> Self {
        Report {
            valuation: 0.0,
            neighbors: Vec::new(),
            silent: true,
        }
    }
}

/// One report per buyer, indexed by [`AgentId`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportVector {
    entries: Vec<Report>,
}

impl ReportVector {
    pub fn new(entries: Vec<Report>) -> Self {
        ReportVector { entries }
    }

    pub fn truthful(instance: &AuctionInstance) -> Self {
        ReportVector {
            entries: instance.profiles().iter().map(Report::truthful).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, agent: AgentId) -> &Report {
        &self.entries[agent.0]
    }

    pub fn set(&mut self, agent: AgentId, report: Report) {
        self.entries[agent.0] = report;
    }

    /// Copy of `self` with `agent`'s entry replaced.
    pub fn with(&self, agent: AgentId, report: Report) -> Self {
        let mut out = self.clone();
        out.set(agent, report);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = &Report> {
        self.entries.iter()
    }
}

fn reach<'a, F>(n: usize, seeds: &[AgentId], neighbors: F) -> Vec<bool>
where
    F: Fn(usize) -> &'a [AgentId],
{
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if !seen[s.0] {
            seen[s.0] = true;
            queue.push_back(s.0);
        }
    }
    while let Some(i) = queue.pop_front() {
        for &j in neighbors(i) {
            if !seen[j.0] {
                seen[j.0] = true;
                queue.push_back(j.0);
            }
        }
    }
    seen
}

/// Directed graph induced by the reports, rooted at the seller, with
/// unreachable buyers silenced.
#[derive(Debug, Clone)]
pub struct ProfileGraph {
    m: usize,
    seller_neighbors: Vec<AgentId>,
    valuations: Vec<f64>,
    neighbors: Vec<Vec<AgentId>>,
    reachable: Vec<bool>,
    reachable_count: usize,
}

impl ProfileGraph {
    /// Rejects reports that reference unknown agents, claim neighbors outside
    /// the true neighbor set, or carry invalid valuations.
    pub fn build(instance: &AuctionInstance, reports: &ReportVector) -> Result<Self> {
        let n = instance.n();
        if reports.len() != n {
            return Err(AuctionError::ReportLength {
                expected: n,
                got: reports.len(),
            });
        }
        for (i, report) in reports.iter().enumerate() {
            let agent = AgentId(i);
            check_valuation(agent, report.valuation)?;
            let truth = &instance.profile(agent).neighbors;
            for &j in &report.neighbors {
                if j.0 >= n {
                    return Err(AuctionError::MalformedReport { agent, neighbor: j.0 });
                }
                if truth.binary_search(&j).is_err() {
                    return Err(AuctionError::NeighborNotOwned { agent, neighbor: j });
                }
            }
        }
        let seller_neighbors = instance.seller_neighbors().to_vec();
        let reachable = reach(n, &seller_neighbors, |i| &reports.get(AgentId(i)).neighbors);
        let mut valuations = Vec::with_capacity(n);
        let mut neighbors = Vec::with_capacity(n);
        for (i, report) in reports.iter().enumerate() {
            if reachable[i] && !report.silent {
                valuations.push(report.valuation);
                neighbors.push(report.neighbors.clone());
            } else if reachable[i] {
                // An explicitly silent report from a reachable buyer still
                // participates, with value 0 and no edges.
                valuations.push(0.0);
                neighbors.push(Vec::new());
            } else {
                valuations.push(0.0);
                neighbors.push(Vec::new());
            }
        }
        let reachable_count = reachable.iter().filter(|r| **r).count();
        Ok(ProfileGraph {
            m: instance.m(),
            seller_neighbors,
            valuations,
            neighbors,
            reachable,
            reachable_count,
        })
    }

    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seller_neighbors(&self) -> &[AgentId] {
        &self.seller_neighbors
    }

    /// Effective reported valuation (0 for silenced buyers).
    pub fn valuation(&self, agent: AgentId) -> f64 {
        self.valuations[agent.0]
    }

    /// Effective reported neighbors (empty for silenced buyers).
    pub fn neighbors(&self, agent: AgentId) -> &[AgentId] {
        &self.neighbors[agent.0]
    }

    pub fn is_reachable(&self, agent: AgentId) -> bool {
        self.reachable[agent.0]
    }

    pub fn reachable_count(&self) -> usize {
        self.reachable_count
    }

    pub fn reachable(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.reachable
            .iter()
            .enumerate()
            .filter(|(_, r)| **r)
            .map(|(i, _)| AgentId(i))
    }

    /// Buyers whose reports were replaced by the silent profile.
    pub fn silenced(&self) -> Vec<AgentId> {
        self.reachable
            .iter()
            .enumerate()
            .filter(|(_, r)| !**r)
            .map(|(i, _)| AgentId(i))
            .collect()
    }

    /// The reports as the graph sees them: silenced entries are explicit.
    pub fn effective_reports(&self) -> ReportVector {
        ReportVector::new(
            (0..self.n())
                .map(|i| {
                    if self.reachable[i] {
                        Report::new(self.valuations[i], self.neighbors[i].iter().copied())
                    } else {
                        Report::silent()
                    }
                })
                .collect(),
        )
    }

    /// Reachability from the seller when `blocked` is removed from the graph.
    fn reach_without(&self, blocked: AgentId) -> Vec<bool> {
        let n = self.n();
        let mut seen = vec![false; n];
        seen[blocked.0] = true;
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in &self.seller_neighbors {
            if !seen[s.0] {
                seen[s.0] = true;
                queue.push_back(s.0);
            }
        }
        while let Some(i) = queue.pop_front() {
            for &j in &self.neighbors[i] {
                if !seen[j.0] {
                    seen[j.0] = true;
                    queue.push_back(j.0);
                }
            }
        }
        seen[blocked.0] = false;
        seen
    }
}

/// `true` iff every seller-to-`target` path passes through `blocker`.
///
/// A buyer is critical to itself. An unreachable `blocker` is critical to
/// nobody else.
pub fn is_critical(graph: &ProfileGraph, blocker: AgentId, target: AgentId) -> Result<bool> {
    if !graph.is_reachable(target) {
        return Err(AuctionError::QueryOnSilent(target));
    }
    if blocker == target {
        return Ok(true);
    }
    if !graph.is_reachable(blocker) {
        return Ok(false);
    }
    Ok(!graph.reach_without(blocker)[target.0])
}

/// Hop distance from the seller; `None` for unreachable buyers.
pub fn distances(graph: &ProfileGraph) -> Vec<Option<usize>> {
    let n = graph.n();
    let mut dist = vec![None; n];
    let mut queue = VecDeque::new();
    for &s in graph.seller_neighbors() {
        if dist[s.0].is_none() {
            dist[s.0] = Some(1);
            queue.push_back(s);
        }
    }
    while let Some(i) = queue.pop_front() {
        let d = dist[i.0].unwrap_or(0);
        for &j in graph.neighbors(i) {
            if dist[j.0].is_none() {
                dist[j.0] = Some(d + 1);
                queue.push_back(j);
            }
        }
    }
    dist
}

/// Dominator tree of the profile graph rooted at the seller: the parent of a
/// buyer is its nearest critical ancestor.
#[derive(Debug, Clone)]
pub struct CriticalTree {
    parent: Vec<Option<Node>>,
    depth: Vec<Option<usize>>,
    children: Vec<Vec<AgentId>>,
    roots: Vec<AgentId>,
}

impl CriticalTree {
    pub fn parent(&self, agent: AgentId) -> Option<Node> {
        self.parent[agent.0]
    }

    pub fn depth(&self, agent: AgentId) -> Option<usize> {
        self.depth[agent.0]
    }

    /// Children of the seller.
    pub fn roots(&self) -> &[AgentId] {
        &self.roots
    }

    pub fn children(&self, agent: AgentId) -> &[AgentId] {
        &self.children[agent.0]
    }

    /// `agent` and all its descendants, in preorder.
    pub fn subtree(&self, agent: AgentId) -> Vec<AgentId> {
        let mut out = Vec::new();
        if self.parent[agent.0].is_none() {
            return out;
        }
        let mut stack = vec![agent];
        while let Some(a) = stack.pop() {
            out.push(a);
            stack.extend(self.children[a.0].iter().rev().copied());
        }
        out
    }

    /// `true` iff `ancestor` lies on the tree path from the seller to
    /// `agent` (inclusive of `agent`).
    pub fn is_ancestor(&self, ancestor: AgentId, agent: AgentId) -> bool {
        let mut cur = Some(Node::Buyer(agent));
        while let Some(Node::Buyer(a)) = cur {
            if a == ancestor {
                return true;
            }
            cur = self.parent[a.0];
        }
        false
    }
}

pub fn critical_tree(graph: &ProfileGraph) -> CriticalTree {
    let n = graph.n();
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n + 1, 0);
    let root = g.add_node(());
    for _ in 0..n {
        g.add_node(());
    }
    let idx = |a: AgentId| NodeIndex::new(a.0 + 1);
    for &s in graph.seller_neighbors() {
        g.add_edge(root, idx(s), ());
    }
    for a in graph.reachable() {
        for &b in graph.neighbors(a) {
            g.add_edge(idx(a), idx(b), ());
        }
    }
    let doms = dominators::simple_fast(&g, root);

    let mut parent = vec![None; n];
    let mut children = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for a in graph.reachable() {
        match doms.immediate_dominator(idx(a)) {
            Some(p) if p == root => {
                parent[a.0] = Some(Node::Seller);
                roots.push(a);
            }
            Some(p) => {
                let pa = AgentId(p.index() - 1);
                parent[a.0] = Some(Node::Buyer(pa));
                children[pa.0].push(a);
            }
            None => {}
        }
    }

    let mut depth = vec![None; n];
    let mut stack: Vec<(AgentId, usize)> = roots.iter().map(|&r| (r, 1)).collect();
    while let Some((a, d)) = stack.pop() {
        depth[a.0] = Some(d);
        stack.extend(children[a.0].iter().map(|&c| (c, d + 1)));
    }

    CriticalTree {
        parent,
        depth,
        children,
        roots,
    }
}
