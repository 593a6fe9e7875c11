//! CSV and JSON serialization of sampled fields.

use std::fmt::Write as _;

use serde_json::{json, Value};

use super::{ChartGrid, Field, Mat2, Vec2};
use crate::error::{GeometryError, Result};

/// Flattening of a node value into CSV columns.
pub trait CsvComponents: Sized {
    const NAMES: &'static [&'static str];
    fn components(&self) -> Vec<f64>;
    fn from_components(c: &[f64]) -> Option<Self>;
}

impl CsvComponents for f64 {
    const NAMES: &'static [&'static str] = &["value"];
    fn components(&self) -> Vec<f64> {
        vec![*self]
    }
    fn from_components(c: &[f64]) -> Option<Self> {
        c.first().copied()
    }
}

impl CsvComponents for Vec2 {
    const NAMES: &'static [&'static str] = &["c1", "c2"];
    fn components(&self) -> Vec<f64> {
        vec![self[0], self[1]]
    }
    fn from_components(c: &[f64]) -> Option<Self> {
        (c.len() >= 2).then(|| Vec2::new(c[0], c[1]))
    }
}

impl CsvComponents for Mat2 {
    const NAMES: &'static [&'static str] = &["m11", "m12", "m21", "m22"];
    fn components(&self) -> Vec<f64> {
        vec![self[(0, 0)], self[(0, 1)], self[(1, 0)], self[(1, 1)]]
    }
    fn from_components(c: &[f64]) -> Option<Self> {
        (c.len() >= 4).then(|| Mat2::new(c[0], c[1], c[2], c[3]))
    }
}

/// JSON description of a grid, written next to CSV field dumps.
pub fn grid_header(grid: &ChartGrid) -> Value {
    json!({
        "u_min": grid.u_min, "u_max": grid.u_max,
        "v_min": grid.v_min, "v_max": grid.v_max,
        "n_u": grid.n_u, "n_v": grid.n_v,
        "h_u": grid.h_u(), "h_v": grid.h_v(),
        "layout": "node-major, index = j * n_u + i",
    })
}

/// One row per node: `u, v, components…`.
pub fn field_to_csv<T: CsvComponents>(field: &Field<T>) -> String {
    let mut out = String::from("u,v");
    for n in T::NAMES {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (k, val) in field.values().iter().enumerate() {
        let (u, v) = field.grid().coords(k);
        let _ = write!(out, "{u:.12e},{v:.12e}");
        for c in val.components() {
            let _ = write!(out, ",{c:.12e}");
        }
        out.push('\n');
    }
    out
}

/// Reads a CSV written by [`field_to_csv`] (or any CSV with `u,v` leading columns in
/// node-major order) back onto `grid`.
pub fn field_from_csv<T: CsvComponents>(grid: ChartGrid, text: &str) -> Result<Field<T>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| GeometryError::Invalid("empty CSV".into()))?;
    if !header.trim_start().starts_with('u') {
        return Err(GeometryError::Invalid("CSV header must start with u,v".into()));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (row, line) in lines.enumerate() {
        let nums = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| GeometryError::Invalid(format!("row {row}: {e}")))?;
        if row >= grid.len() {
            return Err(GeometryError::InvalidGrid("more CSV rows than grid nodes".into()));
        }
        let (u, v) = grid.coords(row);
        let tol = 1e-9 * (1.0 + u.abs().max(v.abs()));
        if nums.len() < 2 || (nums[0] - u).abs() > tol || (nums[1] - v).abs() > tol {
            return Err(GeometryError::InvalidGrid(format!("row {row} does not match node ({u}, {v})")));
        }
        values.push(
            T::from_components(&nums[2..])
                .ok_or_else(|| GeometryError::Invalid(format!("row {row}: too few columns")))?,
        );
    }
    Field::from_values(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let grid = ChartGrid::square(1.0, 5).unwrap();
        let f = Field::from_fn(grid, |u, v| Mat2::new(u, v, u * v, 1.0 + u * u));
        let text = field_to_csv(&f);
        assert!(text.starts_with("u,v,m11,m12,m21,m22\n"));
        let back: Field<Mat2> = field_from_csv(grid, &text).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).amax() < 1e-11);
        }
        let other = ChartGrid::square(2.0, 5).unwrap();
        assert!(field_from_csv::<Mat2>(other, &text).is_err());
    }

    #[test]
    fn header_describes_grid() {
        let grid = ChartGrid::new(0.0, 1.0, -1.0, 1.0, 11, 21).unwrap();
        let h = grid_header(&grid);
        assert_eq!(h["n_v"], 21);
        assert_eq!(h["h_u"], 0.1);
    }
}
