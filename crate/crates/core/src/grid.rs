//! Structured grids on truncated chart boxes `{|x_i| ≤ L, y ∈ [y_min, y_max]}`.
//!
//! Storage is row-major with the height axis `y` last (fastest varying).

use crate::geometry::ChartPoint;
use crate::{Error, Result};

/// Maximum supported slice dimension.
pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    nodes: Vec<usize>,
    strides: Vec<usize>,
    spacing: Vec<f64>,
}

impl Grid {
    /// Box with per-axis bounds; the last axis is `y` and needs `lo > 0`.
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, nodes: Vec<usize>) -> Result<Self> {
        let n = nodes.len();
        if n == 0 || n > MAX_DIM || lo.len() != n || hi.len() != n {
            return Err(Error::Domain(format!("grid dimension must be 1..={MAX_DIM} with matching bounds")));
        }
        if nodes.iter().any(|&k| k < 3) {
            return Err(Error::Domain(format!("grid needs at least 3 nodes per axis, got {nodes:?}")));
        }
        if !(lo[n - 1] > 0.0) {
            return Err(Error::Domain(format!("grid needs y_min > 0, got {}", lo[n - 1])));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(b > a) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::Domain("grid bounds must satisfy lo < hi".into()));
        }
        let mut strides = vec![1; n];
        for a in (0..n - 1).rev() {
            strides[a] = strides[a + 1] * nodes[a + 1];
        }
        let spacing = (0..n).map(|a| (hi[a] - lo[a]) / (nodes[a] - 1) as f64).collect();
        Ok(Self { lo, hi, nodes, strides, spacing })
    }

    /// The box `[-L, L]^{n-1} × [y_min, y_max]` with `nodes` points per axis.
    pub fn chart_box(n: usize, half_width: f64, y_min: f64, y_max: f64, nodes: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("slice dimension must be at least 1".into()));
        }
        let mut lo = vec![-half_width; n];
        let mut hi = vec![half_width; n];
        lo[n - 1] = y_min;
        hi[n - 1] = y_max;
        Self::new(lo, hi, vec![nodes; n])
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut m = [0; MAX_DIM];
        for a in 0..self.dim() {
            m[a] = flat / self.strides[a];
            flat %= self.strides[a];
        }
        m
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.nodes[axis] {
            self.hi[axis]
        } else {
            self.lo[axis] + i as f64 * self.spacing[axis]
        }
    }

    /// Chart coordinates `(x, y)` of a node.
    pub fn coords(&self, flat: usize) -> [f64; MAX_DIM] {
        let m = self.multi_index(flat);
        let mut z = [0.0; MAX_DIM];
        for a in 0..self.dim() {
            z[a] = self.coord(a, m[a]);
        }
        z
    }

    pub fn point(&self, flat: usize) -> ChartPoint {
        let z = self.coords(flat);
        let n = self.dim();
        ChartPoint { x: z[..n - 1].to_vec(), y: z[n - 1] }
    }

    /// Whether a node lies on a face of the box.
    pub fn is_face(&self, flat: usize) -> bool {
        let m = self.multi_index(flat);
        (0..self.dim()).any(|a| m[a] == 0 || m[a] + 1 == self.nodes[a])
    }

    /// Whether a node lies on the bottom face `y = y_min`.
    pub fn is_bottom(&self, flat: usize) -> bool {
        self.multi_index(flat)[self.dim() - 1] == 0
    }

    /// Grid with every axis refined to `2(k-1)+1` nodes.
    pub fn refined(&self) -> Self {
        let nodes = self.nodes.iter().map(|k| 2 * (k - 1) + 1).collect();
        Self::new(self.lo.clone(), self.hi.clone(), nodes).expect("refining a valid grid")
    }

    /// Calls `f` with the flat index of every neighbor within one step in each axis
    /// (the `3^n − 1` surrounding nodes that exist).
    pub fn for_each_neighbor(&self, flat: usize, mut f: impl FnMut(usize)) {
        let m = self.multi_index(flat);
        let n = self.dim();
        let total = 3usize.pow(n as u32);
        'outer: for code in 0..total {
            if code == total / 2 {
                continue;
            }
            let mut c = code;
            let mut idx = 0usize;
            for a in (0..n).rev() {
                let off = (c % 3) as isize - 1;
                c /= 3;
                let i = m[a] as isize + off;
                if i < 0 || i >= self.nodes[a] as isize {
                    continue 'outer;
                }
                idx += i as usize * self.strides[a];
            }
            f(idx);
        }
    }
}

/// Scalar values on every node of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("grid values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values }
    }

    /// Samples `f(z)` with `z = (x, y)` at every node.
    pub fn sample(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let n = grid.dim();
        let values = (0..grid.len()).map(|k| f(&grid.coords(k)[..n])).collect();
        Self { grid, values }
    }

    pub fn try_sample(grid: Grid, f: impl Fn(&[f64]) -> Result<f64>) -> Result<Self> {
        let n = grid.dim();
        let values = (0..grid.len()).map(|k| f(&grid.coords(k)[..n])).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, values })
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Injects a fine grid function onto the coarse grid it refines.
    pub fn restrict_to(&self, coarse: &Grid) -> GridFunction {
        let n = coarse.dim();
        let values = (0..coarse.len())
            .map(|k| {
                let m = coarse.multi_index(k);
                let fine: Vec<usize> = (0..n).map(|a| m[a] * (self.grid.nodes()[a] - 1) / (coarse.nodes()[a] - 1)).collect();
                self.values[self.grid.index(&fine)]
            })
            .collect();
        GridFunction { grid: coarse.clone(), values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_roundtrip() {
        let g = Grid::chart_box(3, 1.0, 0.1, 1.0, 5).unwrap();
        for k in 0..g.len() {
            let m = g.multi_index(k);
            assert_eq!(g.index(&m[..3]), k);
        }
        assert_eq!(g.coords(g.len() - 1), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn faces_and_neighbors() {
        let g = Grid::chart_box(2, 1.0, 0.1, 1.0, 4).unwrap();
        let faces = (0..g.len()).filter(|&k| g.is_face(k)).count();
        assert_eq!(faces, 16 - 4);
        let mut count = 0;
        g.for_each_neighbor(g.index(&[1, 1]), |_| count += 1);
        assert_eq!(count, 8);
        count = 0;
        g.for_each_neighbor(0, |_| count += 1);
        assert_eq!(count, 3);
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(Grid::chart_box(2, 1.0, 0.0, 1.0, 9).is_err());
        assert!(Grid::chart_box(2, 1.0, 0.1, 1.0, 2).is_err());
        assert!(Grid::chart_box(4, 1.0, 0.1, 1.0, 5).is_err());
    }
}
