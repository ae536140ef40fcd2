//! Plain-text edge-list and state files.
//!
//! Score graph:
//! ```text
//! scoregraph N R n
//! i j h
//! ...
//! ```
//! with 1-based agent ids `i`, `j` and 1-based score index `h`, one line per
//! edge in sorted `(i, j)` order. State file: one `i x` line per agent, both
//! 1-based.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::ScoreGraph;
use crate::error::{Error, Result};

pub fn write_score_graph<W: Write>(mut w: W, graph: &ScoreGraph) -> Result<()> {
    writeln!(
        w,
        "scoregraph {} {} {}",
        graph.n_agents(),
        graph.score_levels(),
        graph.n_edges()
    )?;
    for (i, j, h) in graph.triples() {
        writeln!(w, "{} {} {}", i + 1, j + 1, h + 1)?;
    }
    Ok(())
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn fields<const K: usize>(path: &Path, lineno: usize, line: &str) -> Result<[usize; K]> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != K {
        return Err(parse_err(
            path,
            lineno,
            format!("expected {K} fields, found {}", parts.len()),
        ));
    }
    let mut out = [0usize; K];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("not an integer: {p:?}")))?;
    }
    Ok(out)
}

fn one_based(path: &Path, lineno: usize, v: usize, bound: usize, what: &str) -> Result<usize> {
    if v == 0 || v > bound {
        return Err(parse_err(
            path,
            lineno,
            format!("{what} {v} outside 1..={bound}"),
        ));
    }
    Ok(v - 1)
}

/// `origin` is only used in error messages.
pub fn read_score_graph<R: BufRead>(r: R, origin: &Path) -> Result<ScoreGraph> {
    let mut lines = r.lines().enumerate();
    let (n_agents, levels, n_edges) = loop {
        let Some((k, line)) = lines.next() else {
            return Err(parse_err(origin, 0, "missing header"));
        };
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let rest = line
            .strip_prefix("scoregraph")
            .ok_or_else(|| parse_err(origin, k + 1, "header must start with `scoregraph`"))?;
        let [n, r, m] = fields::<3>(origin, k + 1, rest)?;
        break (n, r, m);
    };
    let mut triples = Vec::with_capacity(n_edges);
    for (k, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let [i, j, h] = fields::<3>(origin, k + 1, line)?;
        triples.push((
            one_based(origin, k + 1, i, n_agents, "agent")?,
            one_based(origin, k + 1, j, n_agents, "agent")?,
            one_based(origin, k + 1, h, levels, "score index")?,
        ));
    }
    if triples.len() != n_edges {
        return Err(parse_err(
            origin,
            0,
            format!("header declares {n_edges} edges, found {}", triples.len()),
        ));
    }
    ScoreGraph::from_triples(n_agents, levels, &triples)
}

pub fn write_states<W: Write>(mut w: W, states: &[usize]) -> Result<()> {
    for (i, &x) in states.iter().enumerate() {
        writeln!(w, "{} {}", i + 1, x + 1)?;
    }
    Ok(())
}

/// Reads a state file; agents must appear exactly once, in any order.
pub fn read_states<R: BufRead>(r: R, origin: &Path) -> Result<Vec<usize>> {
    let mut pairs = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let [i, x] = fields::<2>(origin, k + 1, line)?;
        if i == 0 || x == 0 {
            return Err(parse_err(origin, k + 1, "ids and states are 1-based"));
        }
        pairs.push((i - 1, x - 1));
    }
    let n = pairs.len();
    let mut states = vec![None; n];
    for (i, x) in pairs {
        match states.get_mut(i) {
            Some(slot @ None) => *slot = Some(x),
            Some(Some(_)) => return Err(parse_err(origin, 0, format!("agent {} repeated", i + 1))),
            None => {
                return Err(parse_err(
                    origin,
                    0,
                    format!("agent {} out of range", i + 1),
                ))
            }
        }
    }
    Ok(states.into_iter().map(|x| x.expect("filled")).collect())
}

pub fn save_score_graph(path: impl AsRef<Path>, graph: &ScoreGraph) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_score_graph(&mut w, graph)?;
    w.flush()?;
    Ok(())
}

pub fn load_score_graph(path: impl AsRef<Path>) -> Result<ScoreGraph> {
    let path = path.as_ref();
    read_score_graph(BufReader::new(File::open(path)?), path)
}

pub fn save_states(path: impl AsRef<Path>, states: &[usize]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_states(&mut w, states)?;
    w.flush()?;
    Ok(())
}

pub fn load_states(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path: PathBuf = path.as_ref().to_path_buf();
    read_states(BufReader::new(File::open(&path)?), &path)
}
