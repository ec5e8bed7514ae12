//! Result tables and their CSV form.

use std::io::Write;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits: parses back to the same f64
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// A command's output: a fixed header and scalar rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    /// Appends the provenance columns to every row.
    pub fn with_provenance(mut self, seed: u64, build: &str, config_hash: &str) -> Self {
        self.header.extend(["seed", "build", "config_hash"]);
        for row in &mut self.rows {
            // seeds above i64::MAX keep their unsigned spelling
            row.push(Cell::Text(seed.to_string()));
            row.push(Cell::Text(build.to_string()));
            row.push(Cell::Text(config_hash.to_string()));
        }
        self
    }
}

/// Writes `table` as UTF-8 CSV with a header and LF line endings. Rejects
/// non-finite floats.
pub fn emit_csv<W: Write>(table: &Table, w: W) -> Result<(), CliError> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(&table.header)?;
    for (i, row) in table.rows.iter().enumerate() {
        if row.len() != table.header.len() {
            return Err(CliError::Output(format!("row {i} has {} cells, header has {}", row.len(), table.header.len())));
        }
        for (cell, name) in row.iter().zip(&table.header) {
            if let Cell::Float(x) = cell {
                if !x.is_finite() {
                    return Err(CliError::Output(format!("row {i}, column `{name}`: non-finite value {x}")));
                }
            }
        }
        out.write_record(row.iter().map(Cell::render))?;
    }
    out.flush().map_err(|e| CliError::Output(e.to_string()))?;
    Ok(())
}

pub fn to_csv_string(table: &Table) -> Result<String, CliError> {
    let mut buf = Vec::new();
    emit_csv(table, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(vec!["a", "b"]);
        assert_eq!(to_csv_string(&t).unwrap(), "a,b\n");
    }

    #[test]
    fn one_row() {
        let mut t = Table::new(vec!["x", "label", "ok"]);
        t.push(vec![0.1.into(), "none: exact R_LD".into(), true.into()]);
        let s = to_csv_string(&t).unwrap();
        assert_eq!(s.lines().count(), 2);
        assert!(s.ends_with("1.0000000000000001e-1,none: exact R_LD,true\n"));
    }

    #[test]
    fn floats_round_trip() {
        let vals = [0.1, 1.0 / 3.0, f64::MIN_POSITIVE, 1e300, -2.5e-17, std::f64::consts::PI, 0.0];
        let mut t = Table::new(vec!["x"]);
        for v in vals {
            t.push(vec![v.into()]);
        }
        let s = to_csv_string(&t).unwrap();
        for (line, v) in s.lines().skip(1).zip(vals) {
            assert_eq!(line.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn non_finite_rejected() {
        let mut t = Table::new(vec!["x"]);
        t.push(vec![f64::NAN.into()]);
        assert!(matches!(emit_csv(&t, Vec::new()), Err(CliError::Output(_))));
    }

    #[test]
    fn text_with_commas_quoted() {
        let mut t = Table::new(vec!["s"]);
        t.push(vec!["a,b".into()]);
        assert_eq!(to_csv_string(&t).unwrap(), "s\n\"a,b\"\n");
    }

    #[test]
    fn provenance_columns() {
        let mut t = Table::new(vec!["x"]);
        t.push(vec![1.0.into()]);
        let t = t.with_provenance(u64::MAX, "v0", "ab");
        assert_eq!(to_csv_string(&t).unwrap(), "x,seed,build,config_hash\n1.0000000000000000e0,18446744073709551615,v0,ab\n");
    }
}
