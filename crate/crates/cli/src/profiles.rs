//! Valuation files: one `agent_id,v1[,v2,...]` row per buyer.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Parses valuation rows keyed by node label. Lines starting with `#` are
/// comments; a first row whose id is not a number is taken as a header.
///
/// Single-demand input must have exactly one value per row. Multi-demand
/// rows that are not non-increasing are sorted, with a warning.
pub fn parse_profiles<R: Read>(reader: R, multi_demand: bool) -> Result<BTreeMap<u64, Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = BTreeMap::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec.context("malformed CSV")?;
        let line = rec.position().map_or(idx as u64 + 1, |p| p.line());
        let Some(id) = rec.get(0).filter(|s| !s.is_empty()) else {
            continue;
        };
        let id: u64 = match id.parse() {
            Ok(id) => id,
            Err(_) if idx == 0 => continue,
            Err(_) => bail!("line {line}: bad agent id {id:?}"),
        };
        let mut values = Vec::with_capacity(rec.len() - 1);
        for field in rec.iter().skip(1).filter(|f| !f.is_empty()) {
            let v: f64 = field
                .parse()
                .with_context(|| format!("line {line}: bad value {field:?}"))?;
            if !v.is_finite() || v < 0.0 {
                bail!("line {line}: agent {id} has negative or non-finite value {field}");
            }
            values.push(v);
        }
        if values.is_empty() {
            bail!("line {line}: agent {id} has no value");
        }
        if !multi_demand && values.len() > 1 {
            bail!("line {line}: agent {id} has {} values; single-demand rows take one", values.len());
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            log::warn!("line {line}: values of agent {id} sorted into non-increasing order");
            values.sort_unstable_by(|a, b| b.total_cmp(a));
        }
        if out.insert(id, values).is_some() {
            bail!("line {line}: agent {id} listed twice");
        }
    }
    Ok(out)
}

pub fn read_profiles(path: &Path, multi_demand: bool) -> Result<BTreeMap<u64, Vec<f64>>> {
    let f = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    parse_profiles(f, multi_demand).with_context(|| format!("in {}", path.display()))
}

/// Valuation vectors in the order of `wanted`. A row whose id is not in the
/// sorted `known` list, or a wanted label without a row, is an error. Rows
/// for known labels that are not wanted (the seller, unreachable nodes) are
/// ignored.
pub fn align(rows: &BTreeMap<u64, Vec<f64>>, known: &[u64], wanted: &[u64]) -> Result<Vec<Vec<f64>>> {
    if let Some(extra) = rows.keys().find(|k| known.binary_search(k).is_err()) {
        bail!("valuation given for unknown agent {extra}");
    }
    wanted
        .iter()
        .map(|l| rows.get(l).cloned().with_context(|| format!("no valuation for agent {l}")))
        .collect()
}

pub fn write_profiles<W: Write>(rows: impl IntoIterator<Item = (u64, Vec<f64>)>, w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(w);
    for (id, values) in rows {
        let mut rec = vec![id.to_string()];
        rec.extend(values.iter().map(|v| v.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
