//! Text serialization of [`GcnParams`].
//!
//! ```text
//! rgcn-params 1
//! activation relu
//! order 2
//! widths 1 8 4
//! outputs 4
//! layer 0
//! B 0
//! <d_1 rows of d_0 values>
//! B 1
//! …
//! bias <d_1 values>
//! layer 1
//! …
//! readout
//! <d_M rows of d_out values>
//! readout_bias <d_out values>
//! ```
//!
//! Values use 17 significant digits, which round-trips every double.

use std::fmt::Write as _;

use ndarray::{Array1, Array2, Array3, ArrayView1};

use super::{Activation, GcnParams};
use crate::error::{Error, Result};

pub const FORMAT_HEADER: &str = "rgcn-params 1";

fn push_row(out: &mut String, row: ArrayView1<'_, f64>) {
    let mut first = true;
    for v in row {
        if !first {
            out.push(' ');
        }
        first = false;
        write!(out, "{v:.16e}").unwrap();
    }
    out.push('\n');
}

pub fn params_to_text(p: &GcnParams) -> String {
    let mut out = String::new();
    writeln!(out, "{FORMAT_HEADER}").unwrap();
    writeln!(out, "activation {}", p.activation()).unwrap();
    writeln!(out, "order {}", p.order()).unwrap();
    let widths: Vec<String> = p.widths().iter().map(|w| w.to_string()).collect();
    writeln!(out, "widths {}", widths.join(" ")).unwrap();
    writeln!(out, "outputs {}", p.output_dim()).unwrap();
    for l in 0..p.layers() {
        writeln!(out, "layer {l}").unwrap();
        for k in 0..=p.order() {
            writeln!(out, "B {k}").unwrap();
            for row in p.filter(l, k).rows() {
                push_row(&mut out, row);
            }
        }
        out.push_str("bias ");
        push_row(&mut out, p.bias(l));
    }
    out.push_str("readout\n");
    for row in p.readout_weights().rows() {
        push_row(&mut out, row);
    }
    out.push_str("readout_bias ");
    push_row(&mut out, p.readout_bias());
    out
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        loop {
            match self.inner.next() {
                Some((i, l)) => {
                    self.last = i + 1;
                    if !l.trim().is_empty() {
                        return Ok(l.trim());
                    }
                }
                None => return Err(self.err("unexpected end of input")),
            }
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.last, message: message.into() }
    }

    /// Reads a line `key v1 v2 …` and returns the values.
    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        match line.strip_prefix(key) {
            Some(rest) if rest.is_empty() || rest.starts_with(' ') => Ok(rest.trim()),
            _ => Err(self.err(format!("expected `{key}`, found `{line}`"))),
        }
    }

    fn floats(&self, text: &str, count: usize) -> Result<Vec<f64>> {
        let v: Vec<f64> = text
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| self.err(format!("`{t}` is not a number"))))
            .collect::<Result<_>>()?;
        if v.len() != count {
            return Err(self.err(format!("expected {count} values, found {}", v.len())));
        }
        Ok(v)
    }

    fn usizes(&self, text: &str) -> Result<Vec<usize>> {
        text.split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| self.err(format!("`{t}` is not a nonnegative integer"))))
            .collect()
    }

    fn single(&mut self, key: &str) -> Result<usize> {
        let rest = self.keyed(key)?;
        match self.usizes(rest)?.as_slice() {
            [v] => Ok(*v),
            _ => Err(self.err(format!("`{key}` takes one integer"))),
        }
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Array2<f64>> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let line = self.next()?;
            data.extend(self.floats(line, cols)?);
        }
        Ok(Array2::from_shape_vec((rows, cols), data).expect("counted"))
    }
}

pub fn params_from_text(text: &str) -> Result<GcnParams> {
    let mut lines = Lines { inner: text.lines().enumerate().peekable(), last: 0 };
    let header = lines.next()?;
    if header != FORMAT_HEADER {
        return Err(lines.err(format!("expected header `{FORMAT_HEADER}`, found `{header}`")));
    }
    let activation: Activation = lines
        .keyed("activation")?
        .parse()
        .map_err(|e: Error| lines.err(e.to_string()))?;
    let order = lines.single("order")?;
    let rest = lines.keyed("widths")?;
    let widths = lines.usizes(rest)?;
    if widths.is_empty() {
        return Err(lines.err("`widths` needs at least one value"));
    }
    let d_out = lines.single("outputs")?;
    let mut coefficients = Vec::new();
    let mut biases = Vec::new();
    for l in 0..widths.len() - 1 {
        if lines.single("layer")? != l {
            return Err(lines.err(format!("expected layer {l}")));
        }
        let mut c = Array3::zeros((order + 1, widths[l + 1], widths[l]));
        for k in 0..=order {
            if lines.single("B")? != k {
                return Err(lines.err(format!("expected B {k}")));
            }
            let m = lines.matrix(widths[l + 1], widths[l])?;
            c.index_axis_mut(ndarray::Axis(0), k).assign(&m);
        }
        coefficients.push(c);
        let rest = lines.keyed("bias")?;
        biases.push(Array1::from(lines.floats(rest, widths[l + 1])?));
    }
    lines.keyed("readout")?;
    let theta = lines.matrix(*widths.last().unwrap(), d_out)?;
    let rest = lines.keyed("readout_bias")?;
    let b = Array1::from(lines.floats(rest, d_out)?);
    GcnParams::new(widths, order, coefficients, biases, theta, b, activation)
}
