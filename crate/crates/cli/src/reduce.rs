//! Writing the chain reduction of a multi-demand instance as plain files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use diffusion_auction::multidemand::{reduce_instance, MultiInstance, MultiReports};
use diffusion_auction::AgentId;

use crate::graph::Digraph;
use crate::profiles::write_profiles;

pub const EDGES_FILE: &str = "reduced.edges";
pub const PROFILES_FILE: &str = "reduced.csv";
pub const MAP_FILE: &str = "map.csv";

/// Writes the reduced graph, its single values and the node map into `dir`.
/// Reduced node `r` keeps label `r`; the seller gets the label one past the
/// last node, which is returned. `labels[i]` is the original label of
/// buyer `i`.
pub fn write_reduction(inst: &MultiInstance, labels: &[u64], dir: &Path) -> Result<u64> {
    let (red, _, map) = reduce_instance(inst, &MultiReports::truthful(inst))?;
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let n = red.n();
    let seller = n;
    let edges = red
        .seller_neighbors()
        .iter()
        .map(|a| (seller, a.0))
        .chain(red.agents().flat_map(|i| red.profile(i).neighbors.iter().map(move |j| (i.0, j.0))));
    let g = Digraph::from_edges(n + 1, edges);
    let create = |name: &str| -> Result<BufWriter<File>> {
        let p = dir.join(name);
        Ok(BufWriter::new(File::create(&p).with_context(|| format!("cannot create {}", p.display()))?))
    };
    crate::graph::write_edge_list(&g, create(EDGES_FILE)?)?;
    write_profiles(red.agents().map(|i| (i.0 as u64, vec![red.valuation(i)])), create(PROFILES_FILE)?)?;
    let mut w = create(MAP_FILE)?;
    writeln!(w, "reduced,buyer,slot")?;
    for r in 0..map.len() {
        let (i, j) = map.backward(AgentId(r));
        writeln!(w, "{r},{},{}", labels[i.0], j + 1)?;
    }
    w.flush()?;
    Ok(seller as u64)
}
