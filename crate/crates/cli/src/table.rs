//! Trajectory CSV: columns t, w1..wd (weighted), u1..ud (unweighted).

use std::io::{Read, Write};

use hilfer_core::{Grid, Trajectory};
use nalgebra::DVector;

use crate::CliError;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn header(dim: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=dim).map(|k| format!("w{k}")));
    h.extend((1..=dim).map(|k| format!("u{k}")));
    h
}

/// Unweighted cells are blank where the weight vanishes.
pub fn write_trajectory(u: &Trajectory, out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header(u.dim())).map_err(io)?;
    for i in 0..u.grid().len() {
        let mut row = vec![num(u.grid().node(i))];
        row.extend(u.weighted_at(i).iter().map(|&x| num(x)));
        match u.unweighted_at(i) {
            Some(v) => row.extend(v.iter().map(|&x| num(x))),
            None => row.extend(std::iter::repeat_n(String::new(), u.dim())),
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// Reads the weighted columns back onto `grid`, checking the time column.
pub fn read_trajectory(input: impl Read, grid: Grid, gamma: f64, dim: usize) -> Result<Trajectory, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let bad = |msg: String| CliError::Input(format!("solution csv: {msg}"));
    let head: Vec<String> = r
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let expected = header(dim);
    if head != expected {
        return Err(bad(format!("header {head:?}, expected {expected:?}")));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let line = i + 2;
        let field = |k: usize| -> Result<f64, CliError> {
            let cell = rec.get(k).unwrap_or("");
            cell.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("line {line} column {}: cannot read {cell:?} as a number", k + 1)))
        };
        if i >= grid.len() {
            return Err(bad(format!("more rows than the {} grid nodes", grid.len())));
        }
        let t = field(0)?;
        let node = grid.node(i);
        if (t - node).abs() > 1e-12 * (1.0 + node.abs()) {
            return Err(bad(format!("line {line}: t = {t} but grid node {i} is {node}")));
        }
        let w: Result<Vec<f64>, CliError> = (1..=dim).map(field).collect();
        values.push(DVector::from_vec(w?));
    }
    if values.len() != grid.len() {
        return Err(bad(format!("{} rows for a grid of {} nodes", values.len(), grid.len())));
    }
    Trajectory::new(grid, gamma, values).map_err(|e| bad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_blank_origin() {
        let grid = Grid::new(0.0, 1.0, 8).unwrap();
        let u = Trajectory::from_weighted_fn(grid, 0.75, |t| DVector::from_vec(vec![1.0 + t, -t])).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&u, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,w1,w2,u1,u2");
        assert!(lines.next().unwrap().ends_with(",,"));
        let back = read_trajectory(&buf[..], grid, 0.75, 2).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn rejects_mismatched_time_column() {
        let grid = Grid::new(0.0, 1.0, 8).unwrap();
        let mut csv = "t,w1,u1\n".to_string();
        for i in 0..=8 {
            let t = if i == 3 { 0.4 } else { i as f64 / 8.0 };
            csv.push_str(&format!("{t},1,1\n"));
        }
        let err = read_trajectory(csv.as_bytes(), grid, 0.5, 1).unwrap_err();
        assert!(err.to_string().contains("line 5"), "{err}");
        let short = "t,w1,u1\n0,1,\n";
        assert!(read_trajectory(short.as_bytes(), grid, 0.5, 1).is_err());
    }
}
