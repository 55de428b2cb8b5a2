//! Plain-text graph files.
//!
//! The edge list has a header line `n m` followed by `m` lines `i j`
//! (0-indexed, `i < j`). The companion node table is a CSV with header
//! `x0,…,x{d-1},z0,…,z{d_z-1}` and one row per node; floats are written in
//! shortest round-trip form so reading them back is bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::SampledGraph;
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(graph: &SampledGraph, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", graph.n(), graph.edge_count())?;
    for &(i, j) in graph.edges() {
        writeln!(w, "{i} {j}")?;
    }
    Ok(())
}

/// Reads `(n, edges)` from an edge-list file.
pub fn read_edge_list<R: Read>(r: R) -> Result<(usize, Vec<(usize, usize)>)> {
    let mut lines = BufReader::new(r).lines().enumerate();
    let (n, m) = loop {
        let (no, line) = lines.next().ok_or(Error::Parse { line: 1, message: "missing header `n m`".into() })?;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_ints(&line, no + 1)?;
        if v.len() != 2 {
            return Err(Error::Parse { line: no + 1, message: "header must be `n m`".into() });
        }
        break (v[0], v[1]);
    };
    let mut edges = Vec::with_capacity(m);
    for (no, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_ints(&line, no + 1)?;
        if v.len() != 2 || v[0] >= n || v[1] >= n {
            return Err(Error::Parse { line: no + 1, message: format!("expected a pair of node indices below {n}") });
        }
        edges.push((v[0], v[1]));
    }
    if edges.len() != m {
        return Err(Error::Parse { line: 1, message: format!("header announces {m} edges, found {}", edges.len()) });
    }
    Ok((n, edges))
}

fn parse_ints(line: &str, no: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse { line: no, message: format!("`{t}` is not a node index") }))
        .collect()
}

impl SampledGraph {
    /// Writes latents and signals as CSV.
    pub fn write_node_table<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.latents.ncols();
        let dz = self.signals.ncols();
        let header: Vec<String> =
            (0..d).map(|k| format!("x{k}")).chain((0..dz).map(|k| format!("z{k}"))).collect();
        writeln!(w, "{}", header.join(","))?;
        for (x, z) in self.latents.rows().into_iter().zip(self.signals.rows()) {
            let fields: Vec<String> = x.iter().chain(z.iter()).map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    /// Reads `(latents, signals)` from a node table.
    pub fn read_node_table<R: Read>(r: R) -> Result<(Array2<f64>, Array2<f64>)> {
        let mut lines = BufReader::new(r).lines();
        let header = lines.next().ok_or(Error::Parse { line: 1, message: "missing header".into() })??;
        let names: Vec<&str> = header.split(',').filter(|s| !s.is_empty()).collect();
        let d = names.iter().take_while(|s| s.starts_with('x')).count();
        let dz = names.len() - d;
        if names[d..].iter().any(|s| !s.starts_with('z')) {
            return Err(Error::Parse { line: 1, message: "columns must be x0.. followed by z0..".into() });
        }
        let mut xs = Vec::new();
        let mut zs = Vec::new();
        let mut rows = 0;
        for (no, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: no + 2, message: e.to_string() })?;
            if vals.len() != d + dz {
                return Err(Error::Parse { line: no + 2, message: format!("expected {} fields", d + dz) });
            }
            xs.extend_from_slice(&vals[..d]);
            zs.extend_from_slice(&vals[d..]);
            rows += 1;
        }
        let latents = Array2::from_shape_vec((rows, d), xs).expect("consistent row lengths");
        let signals = Array2::from_shape_vec((rows, dz), zs).expect("consistent row lengths");
        Ok((latents, signals))
    }

    /// Writes `<stem>.edges` and `<stem>.nodes.csv`.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let (edges, nodes) = file_pair(stem);
        write_edge_list(self, BufWriter::new(File::create(edges)?))?;
        self.write_node_table(BufWriter::new(File::create(nodes)?))
    }

    /// Reads a graph written by [`SampledGraph::save`]. The sparsity value
    /// and seeds are not part of the files; `alpha` is supplied by the caller.
    pub fn load(stem: &Path, alpha: f64) -> Result<Self> {
        let (edges, nodes) = file_pair(stem);
        let (n, pairs) = read_edge_list(File::open(edges)?)?;
        let (latents, signals) = Self::read_node_table(File::open(nodes)?)?;
        if latents.nrows() != n {
            return Err(Error::shape(format!("{n} node rows"), latents.nrows()));
        }
        Self::from_edges(n, &pairs, latents, signals, alpha)
    }
}

fn file_pair(stem: &Path) -> (PathBuf, PathBuf) {
    let s = stem.as_os_str().to_string_lossy();
    (PathBuf::from(format!("{s}.edges")), PathBuf::from(format!("{s}.nodes.csv")))
}
