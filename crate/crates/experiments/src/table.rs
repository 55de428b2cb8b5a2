//! Result rows and their CSV form.

use std::cmp::Ordering;
use std::io::{Read, Write};

use rgcn_core::{Error, Result};

/// First line of every results file.
pub const SCHEMA_TAG: &str = "# rgcn-results v1";
pub const COLUMNS: [&str; 10] = ["scenario", "n", "alpha", "amplitude", "seed", "metric", "value", "envelope", "flags", "wall_ms"];

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub n: usize,
    pub alpha: f64,
    pub amplitude: f64,
    /// Repeat index; graph seeds are derived from it and the config seed.
    pub seed: u64,
    pub metric: String,
    pub value: f64,
    pub envelope: Option<f64>,
    pub flags: Vec<String>,
    pub wall_ms: u64,
}

impl ResultRow {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.scenario
            .cmp(&other.scenario)
            .then(self.n.cmp(&other.n))
            .then(self.alpha.total_cmp(&other.alpha))
            .then(self.amplitude.total_cmp(&other.amplitude))
            .then(self.seed.cmp(&other.seed))
            .then(self.metric.cmp(&other.metric))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn extend(&mut self, rows: impl IntoIterator<Item = ResultRow>) {
        self.rows.extend(rows);
    }

    /// Sorts rows by `(scenario, n, alpha, amplitude, seed, metric)`, so the
    /// table does not depend on task scheduling.
    pub fn sort(&mut self) {
        self.rows.sort_by(ResultRow::key_cmp);
    }

    /// Rejects non-finite values and envelopes.
    pub fn check_finite(&self) -> Result<()> {
        for r in &self.rows {
            if !r.value.is_finite() || r.envelope.is_some_and(|e| !e.is_finite()) {
                return Err(Error::Model(format!(
                    "non-finite result for metric `{}` at n = {}, alpha = {}, seed = {}",
                    r.metric, r.n, r.alpha, r.seed
                )));
            }
        }
        Ok(())
    }

    /// Values of `metric` on rows accepted by `filter`, in table order.
    pub fn values(&self, metric: &str, filter: impl Fn(&ResultRow) -> bool) -> Vec<f64> {
        self.rows.iter().filter(|r| r.metric == metric && filter(r)).map(|r| r.value).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{SCHEMA_TAG}")?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(COLUMNS).map_err(csv_error)?;
        for r in &self.rows {
            out.write_record([
                r.scenario.clone(),
                r.n.to_string(),
                r.alpha.to_string(),
                r.amplitude.to_string(),
                r.seed.to_string(),
                r.metric.clone(),
                r.value.to_string(),
                r.envelope.map(|e| e.to_string()).unwrap_or_default(),
                r.flags.join(";"),
                r.wall_ms.to_string(),
            ])
            .map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut text = String::new();
        let mut r = r;
        r.read_to_string(&mut text)?;
        let body = text
            .strip_prefix(SCHEMA_TAG)
            .and_then(|b| b.strip_prefix('\n'))
            .ok_or_else(|| Error::Parse { line: 1, message: format!("expected `{SCHEMA_TAG}`") })?;
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let headers = reader.headers().map_err(csv_error)?.clone();
        if headers.iter().ne(COLUMNS) {
            return Err(Error::Parse { line: 2, message: "unexpected column header".into() });
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let line = i + 3;
            let rec = rec.map_err(csv_error)?;
            let num = |k: usize| -> Result<f64> {
                rec[k].parse().map_err(|_| Error::Parse { line, message: format!("bad number in column {}", COLUMNS[k]) })
            };
            let int = |k: usize| -> Result<u64> {
                rec[k].parse().map_err(|_| Error::Parse { line, message: format!("bad integer in column {}", COLUMNS[k]) })
            };
            rows.push(ResultRow {
                scenario: rec[0].to_string(),
                n: int(1)? as usize,
                alpha: num(2)?,
                amplitude: num(3)?,
                seed: int(4)?,
                metric: rec[5].to_string(),
                value: num(6)?,
                envelope: if rec[7].is_empty() { None } else { Some(num(7)?) },
                flags: if rec[8].is_empty() { Vec::new() } else { rec[8].split(';').map(str::to_string).collect() },
                wall_ms: int(9)?,
            });
        }
        Ok(Self { rows })
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse { line: 0, message: format!("{other:?}") },
    }
}

/// Median of a non-empty sample (mean of the two middle values for even sizes).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, seed: u64, metric: &str, value: f64) -> ResultRow {
        ResultRow {
            scenario: "convergence".into(),
            n,
            alpha: 0.25,
            amplitude: 0.0,
            seed,
            metric: metric.into(),
            value,
            envelope: None,
            flags: Vec::new(),
            wall_ms: 3,
        }
    }

    fn sample() -> ResultTable {
        let mut a = row(500, 1, "invariant_error", 1.25e-6);
        a.envelope = Some(0.5);
        a.flags = vec!["below-size-threshold".into(), "isolated=2".into()];
        ResultTable { rows: vec![a, row(250, 0, "equivariant_mse", 0.1 + 0.2)] }
    }

    #[test]
    fn csv_round_trips_exactly() {
        let t = sample();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("{SCHEMA_TAG}\n{}\n", COLUMNS.join(","))));
        assert_eq!(ResultTable::read_csv(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn missing_schema_tag_is_rejected() {
        let err = ResultTable::read_csv(COLUMNS.join(",").as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");
    }

    #[test]
    fn bad_number_reports_its_line() {
        let text = format!("{SCHEMA_TAG}\n{}\nconvergence,10,1,0,0,m,oops,,,0\n", COLUMNS.join(","));
        let err = ResultTable::read_csv(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn sort_is_canonical() {
        let mut t = sample();
        t.sort();
        assert_eq!(t.rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![250, 500]);
        let mut u = ResultTable { rows: t.rows.iter().rev().cloned().collect() };
        u.sort();
        assert_eq!(u, t);
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let mut t = sample();
        assert!(t.check_finite().is_ok());
        t.rows[1].value = f64::NAN;
        assert!(t.check_finite().is_err());
        t.rows[1].value = 1.0;
        t.rows[0].envelope = Some(f64::INFINITY);
        assert!(t.check_finite().is_err());
    }

    #[test]
    fn values_filter_by_metric_and_predicate() {
        let t = sample();
        assert_eq!(t.values("invariant_error", |_| true), vec![1.25e-6]);
        assert!(t.values("invariant_error", |r| r.n == 250).is_empty());
    }

    #[test]
    fn median_and_mean() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(mean(&[1.0, 2.0, 6.0]), 3.0);
    }
}
