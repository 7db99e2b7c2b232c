//! CSV tables assembled from independently computed grid cells.

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::CliResult;

/// Formats a float with 17 significant digits, so it round-trips exactly.
pub fn float(x: f64) -> String {
    if x == 0.0 {
        // no "-0" in the output
        "0.0000000000000000e0".to_string()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row(Vec<String>);

impl Row {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(mut self, s: impl Into<String>) -> Self {
        self.0.push(s.into());
        self
    }

    pub fn int(mut self, v: impl Into<u64>) -> Self {
        self.0.push(v.into().to_string());
        self
    }

    pub fn count(self, v: usize) -> Self {
        self.int(v as u64)
    }

    pub fn float(mut self, v: f64) -> Self {
        self.0.push(float(v));
        self
    }

    pub fn flag(mut self, v: bool) -> Self {
        self.0.push(v.to_string());
        self
    }

    /// An empty field, for columns that do not apply to this row.
    pub fn blank(mut self) -> Self {
        self.0.push(String::new());
        self
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Rows produced by one grid cell and the wall time it took.
#[derive(Debug, Clone)]
pub struct CellRows {
    pub rows: Vec<Row>,
    pub elapsed: Duration,
}

/// Evaluates every cell on the worker pool and returns results in cell order.
pub fn run_cells<C, F>(cells: &[C], eval: F) -> CliResult<Vec<CellRows>>
where
    C: Sync,
    F: Fn(&C) -> CliResult<Vec<Row>> + Sync,
{
    cells
        .par_iter()
        .map(|c| {
            let start = Instant::now();
            let rows = eval(c)?;
            Ok(CellRows {
                rows,
                elapsed: start.elapsed(),
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    cells: Vec<CellRows>,
}

impl Table {
    pub fn new(header: &[&str], cells: Vec<CellRows>) -> Self {
        let header = header.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        for cell in &cells {
            for row in &cell.rows {
                debug_assert_eq!(row.len(), header.len(), "row width does not match header");
            }
        }
        Self { header, cells }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn row_count(&self) -> usize {
        self.cells.iter().map(|c| c.rows.len()).sum()
    }

    /// Writes the table. With `timing`, each row also carries its cell's
    /// runtime in milliseconds, which makes the output non-reproducible.
    pub fn write<W: Write>(&self, out: W, timing: bool) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.header.clone();
        if timing {
            header.push("runtime_ms".to_string());
        }
        w.write_record(&header)?;
        for cell in &self.cells {
            let ms = float(cell.elapsed.as_secs_f64() * 1e3);
            for row in &cell.rows {
                if timing {
                    w.write_record(row.0.iter().chain(std::iter::once(&ms)))?;
                } else {
                    w.write_record(&row.0)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = float(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(float(f64::INFINITY), "inf");
        assert_eq!(float(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn cells_come_back_in_order() {
        let cells: Vec<u64> = (0..64).collect();
        let out = run_cells(&cells, |&c| Ok(vec![Row::new().int(c)])).unwrap();
        let got: Vec<String> = out.iter().map(|c| c.rows[0].0[0].clone()).collect();
        let want: Vec<String> = (0..64).map(|c: u64| c.to_string()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn timing_adds_one_column() {
        let cells = vec![CellRows {
            rows: vec![Row::new().text("x").float(1.0)],
            elapsed: Duration::from_millis(2),
        }];
        let t = Table::new(&["a", "b"], cells);
        let mut plain = Vec::new();
        t.write(&mut plain, false).unwrap();
        assert_eq!(
            String::from_utf8(plain).unwrap(),
            "a,b\nx,1.0000000000000000e0\n"
        );
        let mut timed = Vec::new();
        t.write(&mut timed, true).unwrap();
        let text = String::from_utf8(timed).unwrap();
        assert!(text.starts_with("a,b,runtime_ms\nx,1.0000000000000000e0,2."));
    }
}
