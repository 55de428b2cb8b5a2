//! Model fixtures from TOML text.
//!
//! ```toml
//! [space]
//! dimension = 2                        # ambient dimension d
//! intrinsic_dimension = 2              # optional, defaults to d
//! bounds = [[0.0, 1.0], [0.0, 1.0]]    # optional, defaults to [0, 1]^d
//! metric_scale = 0.7071                # optional, defaults to 1
//! description = "unit square"          # optional
//!
//! [distribution]
//! kind = "uniform-cube"                # lo = [...], hi = [...] (default: space bounds)
//! # kind = "bumped-surface"            # amplitude, scale (optional)
//! # kind = "finite-mixture"            # weights = [...], centers = [[...], ...]
//!
//! [kernel]
//! kind = "gaussian-rbf"                # bandwidth
//! # kind = "epsilon-threshold"         # radius
//! # kind = "sbm-block"                 # blocks = [[...]], thresholds = [...]
//! # kind = "constant"                  # value
//! c_min = 0.1                          # required except for `constant`
//! c_max = 1.0                          # optional override
//! c_lip = 0.0                          # optional
//! n_pieces = 1                         # optional
//!
//! [signal]
//! kind = "constant"                    # value = [...]
//! # kind = "coordinate"                # index, sup_norm_bound
//! # kind = "linear"                    # weights = [[...]], offset = [...], sup_norm_bound
//!
//! [sparsity]
//! kind = "constant"                    # alpha
//! # kind = "log-over-n"                # c
//! # kind = "power"                     # c, gamma
//! ```
//!
//! Unknown keys are rejected; every error names the offending key.

use std::collections::BTreeSet;
use std::path::Path;

use ndarray::Array2;
use toml::{Table, Value};

use super::{Kernel, LatentSpace, NodeDistribution, RandomGraphModel, SignalFunction, Sparsity};
use crate::error::{Error, Result};

/// A TOML table that remembers which keys were read.
struct Section<'a> {
    name: String,
    table: &'a Table,
    used: BTreeSet<&'static str>,
}

impl<'a> Section<'a> {
    fn new(root: &'a Table, name: &str) -> Result<Self> {
        match root.get(name) {
            Some(Value::Table(t)) => Ok(Self { name: name.to_string(), table: t, used: BTreeSet::new() }),
            Some(_) => Err(Error::config(name, "expected a table")),
            None => Err(Error::config(name, "missing section")),
        }
    }

    fn from_table(name: &str, table: &'a Table) -> Self {
        Self { name: name.to_string(), table, used: BTreeSet::new() }
    }

    fn key(&self, k: &str) -> String {
        format!("{}.{}", self.name, k)
    }

    fn get(&mut self, k: &'static str) -> Option<&'a Value> {
        self.used.insert(k);
        self.table.get(k)
    }

    fn f64_opt(&mut self, k: &'static str) -> Result<Option<f64>> {
        match self.get(k) {
            None => Ok(None),
            Some(v) => as_f64(v).map(Some).ok_or_else(|| Error::config(self.key(k), "expected a number")),
        }
    }

    fn f64(&mut self, k: &'static str) -> Result<f64> {
        self.f64_opt(k)?.ok_or_else(|| Error::config(self.key(k), "missing value"))
    }

    fn usize_opt(&mut self, k: &'static str) -> Result<Option<usize>> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(Error::config(self.key(k), "expected a nonnegative integer")),
        }
    }

    fn str_opt(&mut self, k: &'static str) -> Result<Option<&'a str>> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(Error::config(self.key(k), "expected a string")),
        }
    }

    fn kind(&mut self) -> Result<&'a str> {
        self.str_opt("kind")?.ok_or_else(|| Error::config(self.key("kind"), "missing value"))
    }

    fn vec(&mut self, k: &'static str) -> Result<Option<Vec<f64>>> {
        match self.get(k) {
            None => Ok(None),
            Some(v) => as_vec(v).map(Some).ok_or_else(|| Error::config(self.key(k), "expected an array of numbers")),
        }
    }

    fn matrix(&mut self, k: &'static str) -> Result<Option<Vec<Vec<f64>>>> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::Array(rows)) => rows
                .iter()
                .map(as_vec)
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| Error::config(self.key(k), "expected an array of number arrays")),
            Some(_) => Err(Error::config(self.key(k), "expected an array of number arrays")),
        }
    }

    fn finish(self) -> Result<()> {
        for k in self.table.keys() {
            if !self.used.contains(k.as_str()) {
                return Err(Error::config(format!("{}.{}", self.name, k), "unknown key"));
            }
        }
        Ok(())
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_vec(v: &Value) -> Option<Vec<f64>> {
    match v {
        Value::Array(a) => a.iter().map(as_f64).collect(),
        _ => None,
    }
}

/// Parses a model from TOML text.
pub fn model_from_toml_str(text: &str) -> Result<RandomGraphModel> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::config("<document>", e.to_string()))?;
    model_from_toml_table(&table)
}

pub fn model_from_file(path: &Path) -> Result<RandomGraphModel> {
    model_from_toml_str(&std::fs::read_to_string(path)?)
}

/// Parses a model from an already-parsed TOML table (used for inline
/// `[model]` sections of experiment configs).
pub fn model_from_toml_table(root: &Table) -> Result<RandomGraphModel> {
    for k in root.keys() {
        if !["space", "distribution", "kernel", "signal", "sparsity"].contains(&k.as_str()) {
            return Err(Error::config(k.as_str(), "unknown section"));
        }
    }
    let space = parse_space(Section::new(root, "space")?)?;
    let distribution = parse_distribution(Section::new(root, "distribution")?, &space)?;
    let kernel = parse_kernel(Section::new(root, "kernel")?)?;
    let signal = parse_signal(Section::new(root, "signal")?)?;
    let sparsity = match root.get("sparsity") {
        Some(_) => parse_sparsity(Section::new(root, "sparsity")?)?,
        None => Sparsity::Constant(1.0),
    };
    RandomGraphModel::new(space, distribution, kernel, signal, sparsity)
}

fn parse_space(mut s: Section<'_>) -> Result<LatentSpace> {
    let d = s.usize_opt("dimension")?.ok_or_else(|| Error::config("space.dimension", "missing value"))?;
    if d == 0 {
        return Err(Error::config("space.dimension", "must be positive"));
    }
    let intrinsic = s.usize_opt("intrinsic_dimension")?.unwrap_or(d);
    let bounds = match s.matrix("bounds")? {
        Some(rows) => {
            if rows.len() != d || rows.iter().any(|r| r.len() != 2) {
                return Err(Error::config("space.bounds", format!("expected {d} pairs [lo, hi]")));
            }
            rows.iter().map(|r| (r[0], r[1])).collect()
        }
        None => vec![(0.0, 1.0); d],
    };
    let scale = s.f64_opt("metric_scale")?;
    let description = s.str_opt("description")?.unwrap_or("").to_string();
    s.finish()?;
    let space = LatentSpace::with_bounds(intrinsic, bounds, description)?;
    match scale {
        Some(v) => space.with_metric_scale(v),
        None => Ok(space),
    }
}

fn parse_distribution(mut s: Section<'_>, space: &LatentSpace) -> Result<NodeDistribution> {
    let kind = s.kind()?;
    let dist = match kind {
        "uniform-cube" => {
            let lo = s.vec("lo")?.unwrap_or_else(|| space.bounds().iter().map(|b| b.0).collect());
            let hi = s.vec("hi")?.unwrap_or_else(|| space.bounds().iter().map(|b| b.1).collect());
            NodeDistribution::uniform_cube(lo, hi)?
        }
        "bumped-surface" => {
            let a = s.f64("amplitude")?;
            match s.f64_opt("scale")? {
                Some(scale) => NodeDistribution::BumpedSurface { amplitude: a, scale },
                None => NodeDistribution::bumped_surface(a),
            }
        }
        "finite-mixture" => {
            let w = s.vec("weights")?.ok_or_else(|| Error::config("distribution.weights", "missing value"))?;
            let c = s.matrix("centers")?.ok_or_else(|| Error::config("distribution.centers", "missing value"))?;
            NodeDistribution::finite_mixture(w, c)?
        }
        other => return Err(Error::config("distribution.kind", format!("unsupported kind `{other}`"))),
    };
    s.finish()?;
    Ok(dist)
}

fn parse_kernel(mut s: Section<'_>) -> Result<Kernel> {
    let kind = s.kind()?;
    let mut kernel = match kind {
        "constant" => Kernel::constant(s.f64("value")?)?,
        "gaussian-rbf" => Kernel::gaussian(s.f64("bandwidth")?, s.f64("c_min")?)?,
        "epsilon-threshold" => Kernel::epsilon(s.f64("radius")?, s.f64("c_min")?, 1)?,
        "sbm-block" => {
            let blocks = s.matrix("blocks")?.ok_or_else(|| Error::config("kernel.blocks", "missing value"))?;
            let thresholds = s.vec("thresholds")?.unwrap_or_default();
            Kernel::sbm(blocks, thresholds, s.f64("c_min")?)?
        }
        other => return Err(Error::config("kernel.kind", format!("unsupported kind `{other}`"))),
    };
    if let Some(c) = s.f64_opt("c_min")? {
        kernel = kernel.with_c_min(c)?;
    }
    if let Some(c) = s.f64_opt("c_max")? {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::config("kernel.c_max", "must lie in (0, 1]"));
        }
        kernel.c_max = c;
    }
    if let Some(c) = s.f64_opt("c_lip")? {
        let pieces = kernel.n_pieces;
        kernel = kernel.with_c_lip(c, pieces);
    }
    if let Some(p) = s.usize_opt("n_pieces")? {
        let c = kernel.c_lip;
        kernel = kernel.with_c_lip(c, p);
    }
    s.finish()?;
    Ok(kernel)
}

fn parse_signal(mut s: Section<'_>) -> Result<SignalFunction> {
    let kind = s.kind()?;
    let signal = match kind {
        "constant" => SignalFunction::constant(s.vec("value")?.unwrap_or_else(|| vec![1.0]))?,
        "coordinate" => {
            let index = s.usize_opt("index")?.ok_or_else(|| Error::config("signal.index", "missing value"))?;
            SignalFunction::coordinate(index, s.f64_opt("sup_norm_bound")?.unwrap_or(1.0))
        }
        "linear" => {
            let rows = s.matrix("weights")?.ok_or_else(|| Error::config("signal.weights", "missing value"))?;
            let cols = rows.first().map_or(0, |r| r.len());
            if cols == 0 || rows.iter().any(|r| r.len() != cols) {
                return Err(Error::config("signal.weights", "rows must be non-empty and of equal length"));
            }
            let weights = Array2::from_shape_fn((rows.len(), cols), |(i, j)| rows[i][j]);
            let offset = s.vec("offset")?.unwrap_or_else(|| vec![0.0; rows.len()]);
            SignalFunction::linear(weights, offset, s.f64_opt("sup_norm_bound")?.unwrap_or(1.0))?
        }
        other => return Err(Error::config("signal.kind", format!("unsupported kind `{other}`"))),
    };
    s.finish()?;
    Ok(signal)
}

/// Parses one sparsity schedule table (`kind = "constant"`, `"log-over-n"`
/// or `"power"`); `name` prefixes the keys in error messages.
pub fn sparsity_from_toml_table(table: &Table, name: &str) -> Result<Sparsity> {
    parse_sparsity(Section::from_table(name, table))
}

fn parse_sparsity(mut s: Section<'_>) -> Result<Sparsity> {
    let kind = s.kind()?;
    let sp = match kind {
        "constant" => Sparsity::Constant(s.f64("alpha")?),
        "log-over-n" => Sparsity::LogOverN { c: s.f64("c")? },
        "power" => Sparsity::Power { c: s.f64("c")?, gamma: s.f64("gamma")? },
        other => return Err(Error::config(s.key("kind"), format!("unsupported kind `{other}`"))),
    };
    s.finish()?;
    sp.validate()?;
    Ok(sp)
}
