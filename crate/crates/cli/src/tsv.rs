//! Ranked itemset TSV: a header row, then one row per itemset with the items
//! space-separated in the last column.

use std::io::{BufRead, Write};

use itemset_core::ranking::RankedItemset;
use itemset_core::Itemset;

use crate::{CliError, CliResult};

pub const HEADER: &str = "rank\tinterestingness\tpi\tsupport\tusage\titems";

pub fn write_ranked(out: &mut dyn Write, rows: &[RankedItemset]) -> CliResult<()> {
    writeln!(out, "{HEADER}")?;
    for (k, row) in rows.iter().enumerate() {
        let items: Vec<String> = row.itemset.raw_ids().iter().map(u32::to_string).collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            k + 1,
            row.interestingness,
            row.pi,
            row.support,
            row.usage,
            items.join(" ")
        )?;
    }
    Ok(())
}

/// Rows of a ranked TSV in file order, with their rank column.
pub fn read_ranked(reader: impl BufRead) -> CliResult<Vec<(usize, RankedItemset)>> {
    let mut rows = Vec::new();
    let mut lines = reader.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim_end) != Some(HEADER) {
        return Err(CliError::Data("ranked TSV: missing header row".into()));
    }
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| CliError::Data(format!("ranked TSV line {}: bad {what}", n + 2));
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 6 {
            return Err(bad("column count"));
        }
        let items: Vec<u32> = cols[5]
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("item")))
            .collect::<CliResult<_>>()?;
        let itemset = Itemset::new(items.into_iter().map(itemset_core::ItemId))
            .ok_or_else(|| bad("items"))?;
        rows.push((
            cols[0].parse().map_err(|_| bad("rank"))?,
            RankedItemset {
                itemset,
                interestingness: cols[1].parse().map_err(|_| bad("interestingness"))?,
                pi: cols[2].parse().map_err(|_| bad("pi"))?,
                support: cols[3].parse().map_err(|_| bad("support"))?,
                usage: cols[4].parse().map_err(|_| bad("usage"))?,
            },
        ));
    }
    Ok(rows)
}
