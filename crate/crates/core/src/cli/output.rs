use std::io::Write;
use std::path::Path;

use crate::geometry::{killing_graph_embed, KillingKind};
use crate::grid::{Grid, GridFunction};
use crate::{Error, Result};

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Column names `x1, …, x{n−1}, y, u`.
pub fn csv_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..n).map(|i| format!("x{i}")).collect();
    h.push("y".into());
    h.push("u".into());
    h
}

/// Row-major node table with 17 significant digits per value.
pub fn grid_csv(u: &GridFunction) -> Result<Vec<u8>> {
    let grid = &u.grid;
    let n = grid.dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(csv_header(n)).map_err(csv_error)?;
    for k in 0..grid.len() {
        let z = grid.coords(k);
        let row: Vec<String> = z[..n].iter().chain(std::iter::once(&u.values[k])).map(|v| format!("{v:.16e}")).collect();
        w.write_record(&row).map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Parses a table written by [`grid_csv`] back into its header and rows.
pub fn read_grid_csv(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(csv_error)?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Domain(format!("bad number `{s}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Triangulated Killing graph over a planar grid, in half-space coordinates.
pub fn graph_obj(u: &GridFunction, kind: KillingKind) -> Result<Vec<u8>> {
    let grid = &u.grid;
    if grid.dim() != 2 {
        return Err(Error::Domain("OBJ meshes are emitted for two-dimensional slices only".into()));
    }
    let samples: Vec<_> = (0..grid.len()).map(|k| (grid.point(k), u.values[k])).collect();
    let points = killing_graph_embed(kind, &samples);
    let mut out = String::with_capacity(64 * grid.len());
    for p in &points {
        let c = p.coords();
        out.push_str(&format!("v {:.16e} {:.16e} {:.16e}\n", c[0], c[1], c[2]));
    }
    let (nx, ny) = (grid.nodes()[0], grid.nodes()[1]);
    let v = |i: usize, j: usize| grid.index(&[i, j]) + 1;
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            out.push_str(&format!("f {} {} {}\n", v(i, j), v(i + 1, j), v(i + 1, j + 1)));
            out.push_str(&format!("f {} {} {}\n", v(i, j), v(i + 1, j + 1), v(i, j + 1)));
        }
    }
    Ok(out.into_bytes())
}

/// Rebuilds a grid function from CSV rows on a known grid, checking node positions.
pub fn grid_function_from_rows(grid: &Grid, rows: &[Vec<f64>]) -> Result<GridFunction> {
    let n = grid.dim();
    if rows.len() != grid.len() {
        return Err(Error::Domain(format!("expected {} rows, got {}", grid.len(), rows.len())));
    }
    let mut values = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        let z = grid.coords(k);
        if row.len() != n + 1 || row[..n] != z[..n] {
            return Err(Error::Domain(format!("row {k} does not sit on node {:?}", &z[..n])));
        }
        values.push(row[n]);
    }
    GridFunction::new(grid.clone(), values)
}
