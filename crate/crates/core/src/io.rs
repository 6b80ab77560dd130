//! CSV and JSON emitters. Numbers are written with 17 significant digits in
//! scientific notation, independent of locale, so identical inputs give
//! byte-identical files.

use std::io::Write;

use serde_json::{json, Value};

use crate::bloch::Magnetization;
use crate::dynamics::{ChangePoint, Trajectory};
use crate::metrology::SuiteRow;
use crate::states::{CorrelationTriple, DensityMatrix};
use crate::{Error, Result};

/// `{:.16e}`; non-finite values as `NaN`, `inf`, `-inf`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::DimensionMismatch { expected: self.header.len(), got: row.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }

    /// Writes `# config_sha256=<hash>`, the header row, then the rows.
    pub fn write_to(&self, mut w: impl Write, config_hash: &str) -> std::io::Result<()> {
        writeln!(w, "# config_sha256={config_hash}")?;
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self, config_hash: &str) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf, config_hash).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

/// Columns `t, c1, c2, c3` followed by the requested series. `time_label`
/// renames the first column (e.g. `p` for strength-parameterized runs).
pub fn trajectory_table(traj: &Trajectory, time_label: &str, series: &[&str]) -> Result<CsvTable> {
    let mut header = vec![time_label, "c1", "c2", "c3"];
    header.extend_from_slice(series);
    let columns: Vec<&[f64]> = series.iter().map(|s| traj.series(s)).collect::<Result<_>>()?;
    let mut table = CsvTable::new(&header);
    for (k, (t, c)) in traj.times.iter().zip(&traj.triples).enumerate() {
        let mut row: Vec<Cell> = vec![(*t).into(), c.c1.into(), c.c2.into(), c.c3.into()];
        row.extend(columns.iter().map(|col| Cell::Num(col[k])));
        table.push(row)?;
    }
    Ok(table)
}

pub fn triples_table(labelled: &[(String, CorrelationTriple)]) -> CsvTable {
    let mut table = CsvTable::new(&["label", "c1", "c2", "c3"]);
    for (label, c) in labelled {
        table
            .push(vec![Cell::Text(label.clone()), c.c1.into(), c.c2.into(), c.c3.into()])
            .expect("four columns");
    }
    table
}

pub fn bloch_table(times: &[f64], ms: &[Magnetization]) -> Result<CsvTable> {
    if times.len() != ms.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: ms.len() });
    }
    let mut table = CsvTable::new(&["t", "mx", "my", "mz"]);
    for (t, m) in times.iter().zip(ms) {
        table.push(vec![(*t).into(), m.mx.into(), m.my.into(), m.mz.into()])?;
    }
    Ok(table)
}

pub fn suite_table(rows: &[SuiteRow]) -> CsvTable {
    let mut table = CsvTable::new(&["probe", "p", "setting", "F", "IP", "mean_phi", "var_phi"]);
    for r in rows {
        table
            .push(vec![
                r.probe.name().into(),
                r.p.into(),
                r.setting.name().into(),
                r.f.into(),
                r.ip.into(),
                r.mean_phi.into(),
                r.var_phi.into(),
            ])
            .expect("seven columns");
    }
    table
}

pub fn change_points_table(points: &[ChangePoint]) -> CsvTable {
    let mut table = CsvTable::new(&["series", "time", "kind"]);
    for cp in points {
        let kind = serde_json::to_value(cp.kind).expect("unit enum serializes");
        table
            .push(vec![
                Cell::Text(cp.series.clone()),
                cp.time.into(),
                kind.as_str().unwrap_or_default().into(),
            ])
            .expect("three columns");
    }
    table
}

/// `{"n_qubits": n, "matrix": [[[re, im], ...], ...]}` in row-major order.
pub fn state_json(rho: &DensityMatrix) -> Value {
    let m = rho.matrix();
    let d = rho.dim();
    let rows: Vec<Value> = (0..d)
        .map(|i| Value::Array((0..d).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
        .collect();
    json!({ "n_qubits": rho.n_qubits(), "matrix": rows })
}
