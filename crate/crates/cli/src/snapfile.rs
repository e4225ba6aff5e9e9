//! Line-oriented snapshot files.
//!
//! ```text
//! snapshot n 1000 V 503 E 2001 K 750 N 3 cutoff 1000 levels 1,2,3
//! 1 1 219
//! 1 2 108
//! ...
//! D 2 140
//! ```
//!
//! After the header every line is a `level weight count` triple with a
//! nonzero count, levels ascending then weights ascending. Level `D` holds
//! the degree histogram.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use cliqueweight::registry::Histogram;
use cliqueweight::Snapshot;

pub fn render(snap: &Snapshot) -> String {
    let cutoff = snap.degrees.cutoff;
    let levels: Vec<String> = snap.levels.keys().map(|l| l.to_string()).collect();
    let mut out = format!(
        "snapshot n {} V {} E {} K {} N {} cutoff {} levels {}\n",
        snap.n,
        snap.vertices,
        snap.edges,
        snap.top,
        snap.n_model,
        cutoff,
        levels.join(",")
    );
    for (level, hist) in &snap.levels {
        for (w, c) in hist.iter() {
            writeln!(out, "{level} {w} {c}").unwrap();
        }
    }
    for (d, c) in snap.degrees.iter() {
        writeln!(out, "D {d} {c}").unwrap();
    }
    out
}

pub fn parse(text: &str) -> Result<Snapshot, String> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or("empty snapshot file")?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.first() != Some(&"snapshot") || tokens.len() % 2 != 1 {
        return Err(format!("line 1: bad header {header:?}"));
    }
    let mut fields = BTreeMap::new();
    for pair in tokens[1..].chunks(2) {
        fields.insert(pair[0], pair[1]);
    }
    let num = |key: &str| -> Result<u64, String> {
        fields
            .get(key)
            .ok_or_else(|| format!("line 1: header lacks {key}"))?
            .parse()
            .map_err(|_| format!("line 1: {key} is not an integer"))
    };
    let cutoff = num("cutoff")?;
    let mut levels = BTreeMap::new();
    for l in fields
        .get("levels")
        .ok_or("line 1: header lacks levels")?
        .split(',')
    {
        let l: usize = l.parse().map_err(|_| format!("line 1: bad level {l:?}"))?;
        levels.insert(l, Histogram::new(cutoff));
    }
    let mut degrees = Histogram::new(cutoff);
    for (i, line) in lines {
        let bad = || {
            format!(
                "line {}: expected `level weight count`, got {line:?}",
                i + 1
            )
        };
        let mut it = line.split_whitespace();
        let (level, w, c) = match (it.next(), it.next(), it.next(), it.next()) {
            (Some(l), Some(w), Some(c), None) => (l, w, c),
            _ => return Err(bad()),
        };
        let w: u64 = w.parse().map_err(|_| bad())?;
        let c: u64 = c.parse().map_err(|_| bad())?;
        let hist = if level == "D" {
            &mut degrees
        } else {
            let l: usize = level.parse().map_err(|_| bad())?;
            levels
                .get_mut(&l)
                .ok_or_else(|| format!("line {}: level {l} not declared in header", i + 1))?
        };
        hist.add(w, c);
    }
    Ok(Snapshot {
        n: num("n")?,
        n_model: num("N")? as usize,
        vertices: num("V")?,
        edges: num("E")?,
        top: num("K")?,
        levels,
        degrees,
    })
}
