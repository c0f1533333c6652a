//! Spatial grids and node-sampled fields.
//!
//! Two grid kinds: a uniform periodic grid tiling the torus `(-pi, pi)^n`,
//! and a uniform box lattice with an inclusion mask approximating a general
//! bounded open domain by whole cells. Both use cell-centered nodes with
//! midpoint quadrature weight `h^n` per node. Node ordering is row-major
//! (last coordinate fastest) and all reductions run in that fixed order.

use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::sync::Arc;

/// Uniform periodic grid on `(-pi, pi)^dim` with `n_per_dim` cells per
/// coordinate; index arithmetic wraps modulo `n_per_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    dim: usize,
    n_per_dim: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, n_per_dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidConfig(format!("unsupported dimension {dim}")));
        }
        if n_per_dim < 2 {
            return Err(Error::InvalidConfig("torus grid needs at least 2 nodes per dimension".into()));
        }
        Ok(TorusGrid { dim, n_per_dim })
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n_per_dim as f64
    }

    pub fn n_per_dim(&self) -> usize {
        self.n_per_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Uniform box lattice with an inclusion mask. Cells are square (`h` equal in
/// every coordinate); boundary cells are kept or dropped whole.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedGrid {
    dim: usize,
    n_per_dim: usize,
    lo: Vec<f64>,
    h: f64,
    /// Row-major over the full lattice.
    mask: Vec<bool>,
    /// Lattice index of each included node, ascending.
    included: Vec<usize>,
}

impl MaskedGrid {
    /// Build from a bounding box (equal extent per coordinate), a lattice
    /// resolution and an inclusion predicate on cell centers.
    pub fn new(
        boxes: &[(f64, f64)],
        n_per_dim: usize,
        include: impl Fn(&[f64]) -> bool,
    ) -> Result<Self> {
        let dim = boxes.len();
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidConfig(format!("unsupported dimension {dim}")));
        }
        if n_per_dim == 0 {
            return Err(Error::InvalidConfig("box grid needs at least 1 cell per dimension".into()));
        }
        let extent = boxes[0].1 - boxes[0].0;
        for &(lo, hi) in boxes {
            if !(hi > lo) {
                return Err(Error::InvalidConfig(format!("empty box extent [{lo}, {hi}]")));
            }
            if ((hi - lo) - extent).abs() > 1e-12 * extent.abs() {
                return Err(Error::InvalidConfig(
                    "box extents must be equal per coordinate (square cells)".into(),
                ));
            }
        }
        let h = extent / n_per_dim as f64;
        let lo: Vec<f64> = boxes.iter().map(|b| b.0).collect();
        let total = n_per_dim.pow(dim as u32);
        let mut mask = vec![false; total];
        let mut included = Vec::new();
        let mut coord = vec![0.0; dim];
        for idx in 0..total {
            lattice_coord(idx, dim, n_per_dim, &lo, h, &mut coord);
            if include(&coord) {
                mask[idx] = true;
                included.push(idx);
            }
        }
        if included.is_empty() {
            return Err(Error::EmptyDomain);
        }
        Ok(MaskedGrid {
            dim,
            n_per_dim,
            lo,
            h,
            mask,
            included,
        })
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}

fn lattice_coord(idx: usize, dim: usize, n: usize, lo: &[f64], h: f64, out: &mut [f64]) {
    match dim {
        1 => out[0] = lo[0] + (idx as f64 + 0.5) * h,
        2 => {
            let i = idx / n;
            let j = idx % n;
            out[0] = lo[0] + (i as f64 + 0.5) * h;
            out[1] = lo[1] + (j as f64 + 0.5) * h;
        }
        _ => unreachable!(),
    }
}

/// Discretized spatial domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Torus(TorusGrid),
    Masked(MaskedGrid),
}

impl Grid {
    pub fn torus(dim: usize, n_per_dim: usize) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::Torus(TorusGrid::new(dim, n_per_dim)?)))
    }

    pub fn masked(
        boxes: &[(f64, f64)],
        n_per_dim: usize,
        include: impl Fn(&[f64]) -> bool,
    ) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::Masked(MaskedGrid::new(boxes, n_per_dim, include)?)))
    }

    /// Full box without masking, e.g. an interval in 1D.
    pub fn interval(lo: f64, hi: f64, n: usize) -> Result<Arc<Grid>> {
        Self::masked(&[(lo, hi)], n, |_| true)
    }

    pub fn dim(&self) -> usize {
        match self {
            Grid::Torus(g) => g.dim,
            Grid::Masked(g) => g.dim,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Grid::Torus(_))
    }

    pub fn spacing(&self) -> f64 {
        match self {
            Grid::Torus(g) => g.spacing(),
            Grid::Masked(g) => g.h,
        }
    }

    /// Quadrature weight per node, `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim() as i32)
    }

    /// Number of included nodes.
    pub fn node_count(&self) -> usize {
        match self {
            Grid::Torus(g) => g.n_per_dim.pow(g.dim as u32),
            Grid::Masked(g) => g.included.len(),
        }
    }

    /// Domain measure `|Omega| = (node count) * h^dim`.
    pub fn measure(&self) -> f64 {
        self.node_count() as f64 * self.cell_volume()
    }

    /// Coordinates of node `i` (row-major over included nodes).
    pub fn node_coord(&self, i: usize, out: &mut [f64]) {
        match self {
            Grid::Torus(g) => {
                let h = g.spacing();
                match g.dim {
                    1 => out[0] = -PI + (i as f64 + 0.5) * h,
                    2 => {
                        let a = i / g.n_per_dim;
                        let b = i % g.n_per_dim;
                        out[0] = -PI + (a as f64 + 0.5) * h;
                        out[1] = -PI + (b as f64 + 0.5) * h;
                    }
                    _ => unreachable!(),
                }
            }
            Grid::Masked(g) => {
                lattice_coord(g.included[i], g.dim, g.n_per_dim, &g.lo, g.h, out);
            }
        }
    }

    /// Integer lattice index of node `i` per coordinate (for CSV dumps).
    pub fn node_index(&self, i: usize) -> Vec<usize> {
        match self {
            Grid::Torus(g) => match g.dim {
                1 => vec![i],
                _ => vec![i / g.n_per_dim, i % g.n_per_dim],
            },
            Grid::Masked(g) => {
                let idx = g.included[i];
                match g.dim {
                    1 => vec![idx],
                    _ => vec![idx / g.n_per_dim, idx % g.n_per_dim],
                }
            }
        }
    }
}

/// Real-valued samples, one per included node.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let n = grid.node_count();
        Field {
            grid,
            values: vec![c; n],
        }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let n = grid.node_count();
        let dim = grid.dim();
        let mut coord = vec![0.0; dim];
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            grid.node_coord(i, &mut coord);
            values.push(f(&coord));
        }
        Field { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch("fields live on different grids".into()))
        }
    }

    /// Max and min value with their node indices; ties break to the lowest
    /// index.
    pub fn extrema(&self) -> (f64, usize, f64, usize) {
        let mut max = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        let (mut imax, mut imin) = (0usize, 0usize);
        for (i, &v) in self.values.iter().enumerate() {
            if v > max {
                max = v;
                imax = i;
            }
            if v < min {
                min = v;
                imin = i;
            }
        }
        (max, imax, min, imin)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &v| a.max(v.abs()))
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Field) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Write one row per node: lattice index coordinates, then the value.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let dim = self.grid.dim();
        out.push_str(if dim == 1 { "i,value\n" } else { "i,j,value\n" });
        for (n, &v) in self.values.iter().enumerate() {
            let idx = self.grid.node_index(n);
            for k in idx {
                out.push_str(&format!("{k},"));
            }
            out.push_str(&crate::report::g17(v));
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Read a field previously written with [`Field::write_csv`] back onto
    /// `grid` (values must appear in node order).
    pub fn read_csv(grid: Arc<Grid>, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut values = Vec::new();
        for line in text.lines().skip(1) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let last = line.rsplit(',').next().unwrap_or("");
            let v: f64 = last
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad field row `{line}`")))?;
            values.push(v);
        }
        Field::from_values(grid, values)
    }
}

/// Midpoint quadrature: sum of values times `h^dim`.
pub fn integrate(field: &Field) -> f64 {
    let w = field.grid.cell_volume();
    field.values.iter().sum::<f64>() * w
}

/// Spatial average `|Omega|^-1 int u`.
pub fn mean_mass(field: &Field) -> f64 {
    integrate(field) / field.grid.measure()
}

/// Weighted inner product `sum a_i b_i h^dim`.
pub fn l2_inner(a: &Field, b: &Field) -> Result<f64> {
    a.same_grid(b)?;
    let w = a.grid.cell_volume();
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| x * y)
        .sum::<f64>()
        * w)
}

pub fn l2_norm(field: &Field) -> f64 {
    let w = field.grid.cell_volume();
    (field.values.iter().map(|v| v * v).sum::<f64>() * w).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrate_constant_on_torus() {
        let g = Grid::torus(1, 64).unwrap();
        let one = Field::constant(g, 1.0);
        assert!((integrate(&one) - TAU).abs() < 1e-12);
    }

    #[test]
    fn integrate_cosine_vanishes() {
        for n in [2usize, 5, 64, 255] {
            let g = Grid::torus(1, n).unwrap();
            let u = Field::from_fn(g, |x| x[0].cos());
            assert!(integrate(&u).abs() < 1e-12, "N = {n}");
        }
    }

    #[test]
    fn integrate_square_on_interval() {
        // Oracle: int_{-1}^{1} x^2 dx = 2/3.
        let g = Grid::interval(-1.0, 1.0, 2000).unwrap();
        let u = Field::from_fn(g, |x| x[0] * x[0]);
        assert!((integrate(&u) - 2.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn mean_mass_examples() {
        let g = Grid::torus(1, 128).unwrap();
        let c = Field::constant(g.clone(), 0.7);
        assert!((mean_mass(&c) - 0.7).abs() < 1e-14);
        let u = Field::from_fn(g.clone(), |x| 0.5 + 0.3 * x[0].cos());
        assert!((mean_mass(&u) - 0.5).abs() < 1e-12);
        // Jump field on a symmetric mask: exact zero up to rounding.
        let gi = Grid::interval(-1.0, 1.0, 500).unwrap();
        let j = Field::from_fn(gi, |x| if x[0] < 0.0 { -1.0 } else { 1.0 });
        assert!(mean_mass(&j).abs() < 1e-12);
    }

    #[test]
    fn norms_and_inner() {
        let g = Grid::torus(1, 256).unwrap();
        let one = Field::constant(g.clone(), 1.0);
        assert!((l2_norm(&one) - TAU.sqrt()).abs() < 1e-12);
        let c = Field::from_fn(g.clone(), |x| x[0].cos());
        assert!((l2_norm(&c) - PI.sqrt()).abs() < 1e-12);
        let ip = l2_inner(&c, &c).unwrap();
        assert!((ip - l2_norm(&c).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grids_error() {
        let a = Field::constant(Grid::torus(1, 16).unwrap(), 1.0);
        let b = Field::constant(Grid::torus(1, 32).unwrap(), 1.0);
        assert!(l2_inner(&a, &b).is_err());
    }

    #[test]
    fn empty_mask_rejected() {
        let r = Grid::masked(&[(-1.0, 1.0)], 16, |_| false);
        assert!(matches!(r, Err(Error::EmptyDomain)));
    }

    #[test]
    fn masked_measure() {
        let g = Grid::masked(&[(-1.0, 1.0)], 100, |x| x[0] < 0.0).unwrap();
        assert!((g.measure() - 1.0).abs() < 1e-12);
    }
}
