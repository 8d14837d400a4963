//! Serialization of [`GridFn`] as CSV (`x_1,...,x_n,value`, one row per grid
//! point in row-major order, `inf` for `+∞`) and as JSON
//! (`{dims, coords, values}`).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Grid, GridFn};
use crate::{Error, Result};

/// JSON number, or the string `"inf"` for `+∞`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExtReal {
    Finite(f64),
    Text(String),
}

impl ExtReal {
    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            ExtReal::Finite(v)
        } else {
            ExtReal::Text(format_value(v))
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        match self {
            ExtReal::Finite(v) => Ok(*v),
            ExtReal::Text(s) => parse_value(s),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFnDoc {
    pub dims: usize,
    pub coords: Vec<Vec<f64>>,
    pub values: Vec<ExtReal>,
}

impl From<&GridFn> for GridFnDoc {
    fn from(f: &GridFn) -> Self {
        Self {
            dims: f.grid().dims(),
            coords: f.grid().coords().to_vec(),
            values: f.values().iter().map(|&v| ExtReal::from_f64(v)).collect(),
        }
    }
}

impl TryFrom<GridFnDoc> for GridFn {
    type Error = Error;

    fn try_from(doc: GridFnDoc) -> Result<Self> {
        if doc.dims != doc.coords.len() {
            return Err(Error::DimensionMismatch { expected: doc.dims, got: doc.coords.len() });
        }
        let grid = Grid::new(doc.coords)?;
        let values = doc.values.iter().map(ExtReal::to_f64).collect::<Result<Vec<_>>>()?;
        GridFn::new(grid, values)
    }
}

pub fn format_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v:?}")
    }
}

pub fn parse_value(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" | "Inf" | "+Inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: '{t}'"))),
    }
}

pub fn write_json<W: Write>(f: &GridFn, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, &GridFnDoc::from(f))?;
    Ok(())
}

pub fn read_json<R: Read>(r: R) -> Result<GridFn> {
    let doc: GridFnDoc = serde_json::from_reader(r)?;
    doc.try_into()
}

pub fn write_csv<W: Write>(f: &GridFn, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let n = f.grid().dims();
    let mut header: Vec<String> = (1..=n).map(|i| format!("x_{i}")).collect();
    header.push("value".into());
    wr.write_record(&header)?;
    let mut x = vec![0.0; n];
    for (i, &v) in f.values().iter().enumerate() {
        f.grid().point_into(i, &mut x);
        let mut row: Vec<String> = x.iter().map(|c| format!("{c:?}")).collect();
        row.push(format_value(v));
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// Read a CSV grid function. Rows must enumerate the full grid in row-major
/// order; coordinates are recovered from the distinct values per column.
pub fn read_csv<R: Read>(r: R) -> Result<GridFn> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    if header.len() < 2 || header.get(header.len() - 1) != Some("value") {
        return Err(Error::Parse("CSV header must be x_1,...,x_n,value".into()));
    }
    let n = header.len() - 1;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != n + 1 {
            return Err(Error::Parse(format!("row has {} fields, expected {}", rec.len(), n + 1)));
        }
        let p = (0..n).map(|i| parse_value(&rec[i])).collect::<Result<Vec<_>>>()?;
        points.push(p);
        values.push(parse_value(&rec[n])?);
    }
    let coords: Vec<Vec<f64>> = (0..n)
        .map(|d| {
            let mut c: Vec<f64> = points.iter().map(|p| p[d]).collect();
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect();
    let grid = Grid::new(coords)?;
    if grid.len() != points.len() {
        return Err(Error::Parse(format!(
            "CSV has {} rows but the coordinates span {} grid points",
            points.len(),
            grid.len()
        )));
    }
    for (i, p) in points.iter().enumerate() {
        if grid.point(i) != *p {
            return Err(Error::Parse(format!("row {} is out of row-major order", i + 1)));
        }
    }
    GridFn::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let g = Grid::new(vec![vec![0.0, 1.0], vec![-1.0, 0.5]]).unwrap();
        let f = GridFn::new(g, vec![1.0, f64::INFINITY, 2.5, -3.0]).unwrap();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "x_1,x_2,value\n0.0,-1.0,1.0\n0.0,0.5,inf\n1.0,-1.0,2.5\n1.0,0.5,-3.0\n"
        );
        assert_eq!(read_csv(buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn csv_rejects_shuffled_rows() {
        let text = "x_1,value\n1.0,0.0\n0.0,1.0\n";
        assert!(read_csv(text.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_exact(vals in prop::collection::vec(prop_oneof![
            (-1e6f64..1e6).boxed(),
            Just(f64::INFINITY).boxed(),
        ], 6)) {
            let g = Grid::new(vec![vec![0.0, 0.1, 0.3], vec![-2.0, 7.0]]).unwrap();
            let f = GridFn::new(g, vals).unwrap();
            let mut buf = Vec::new();
            write_json(&f, &mut buf).unwrap();
            prop_assert_eq!(read_json(buf.as_slice()).unwrap(), f);
        }
    }
}
