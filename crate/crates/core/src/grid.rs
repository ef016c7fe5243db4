//! Uniform cell-centered meshes on axis-aligned boxes, scalar fields living on
//! them, and the zero-flux Laplacian shared by both solvers.
//!
//! Cells are stored row-major with the y index running fastest, so in 2D the
//! cell `(ix, iy)` lives at `ix * ny + iy`. A 1D grid is stored as a 2D grid
//! with a single inactive y cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: [usize; 2],
    length: [f64; 2],
}

impl Grid {
    pub fn new_1d(n: usize, length: f64) -> Result<Self> {
        Self::new(1, [n, 1], [length, 1.0])
    }

    pub fn new_2d(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::new(2, [nx, ny], [lx, ly])
    }

    fn new(dim: usize, n: [usize; 2], length: [f64; 2]) -> Result<Self> {
        for axis in 0..dim {
            if n[axis] < 3 {
                return Err(Error::Parameter(format!(
                    "axis {axis} has {} cells, need at least 3",
                    n[axis]
                )));
            }
            if !(length[axis].is_finite() && length[axis] > 0.0) {
                return Err(Error::Parameter(format!(
                    "axis {axis} length must be positive, got {}",
                    length[axis]
                )));
            }
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.length[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.length[axis] / self.n[axis] as f64
    }

    pub fn cell_count(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Measure of the whole domain.
    pub fn volume(&self) -> f64 {
        self.length[..self.dim].iter().product()
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix * self.n[1] + iy
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.n[1], idx % self.n[1])
    }

    /// Cell-center coordinates; the y entry is meaningless in 1D.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let (ix, iy) = self.coords(idx);
        [
            (ix as f64 + 0.5) * self.spacing(0),
            if self.dim == 2 {
                (iy as f64 + 0.5) * self.spacing(1)
            } else {
                0.0
            },
        ]
    }

    /// Distance from a cell center to the nearest boundary face.
    pub fn boundary_distance(&self, idx: usize) -> f64 {
        let c = self.center(idx);
        (0..self.dim)
            .map(|a| c[a].min(self.length[a] - c[a]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Same box with every active axis subdivided `factor` times.
    pub fn refined(&self, factor: usize) -> Grid {
        let mut n = self.n;
        for a in 0..self.dim {
            n[a] *= factor;
        }
        Grid { n, ..*self }
    }

    /// Integer ratio between this grid and a coarser one on the same box.
    pub fn refinement_ratio(&self, coarse: &Grid) -> Option<usize> {
        if self.dim != coarse.dim || self.length != coarse.length {
            return None;
        }
        let r = self.n[0] / coarse.n[0];
        let ok = (0..self.dim).all(|a| coarse.n[a] * r == self.n[a]);
        (ok && r >= 1).then_some(r)
    }

    pub fn sample(&self, f: impl Fn([f64; 2]) -> f64) -> Result<Field> {
        Field::new(*self, (0..self.cell_count()).map(|i| f(self.center(i))).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::Data(format!(
                "field has {} values, grid has {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        let f = Self { grid, values };
        f.check_finite()?;
        Ok(f)
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.cell_count());
        Self { grid, values }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::from_vec_unchecked(grid, vec![c; grid.cell_count()])
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::Data(format!(
                "non-finite value {} in cell {i}",
                self.values[i]
            ))),
            None => Ok(()),
        }
    }

    pub fn check_nonnegative(&self, name: &str) -> Result<()> {
        self.check_finite()?;
        match self.values.iter().position(|&v| v < 0.0) {
            Some(i) => Err(Error::Data(format!(
                "{name} is negative ({}) in cell {i}",
                self.values[i]
            ))),
            None => Ok(()),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_vec_unchecked(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        Field::from_vec_unchecked(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Conservative restriction onto a coarser grid covering the same box.
    pub fn restrict_to(&self, coarse: &Grid) -> Result<Field> {
        let r = self.grid.refinement_ratio(coarse).ok_or_else(|| {
            Error::Comparison("grids are not nested refinements of one another".into())
        })?;
        let ry = if self.grid.dim == 2 { r } else { 1 };
        let scale = 1.0 / (r * ry) as f64;
        let mut out = vec![0.0; coarse.cell_count()];
        for (c, o) in out.iter_mut().enumerate() {
            let (cx, cy) = coarse.coords(c);
            let mut s = 0.0;
            for fx in cx * r..(cx + 1) * r {
                for fy in cy * ry..(cy + 1) * ry {
                    s += self.values[self.grid.index(fx, fy)];
                }
            }
            *o = s * scale;
        }
        Ok(Field::from_vec_unchecked(*coarse, out))
    }
}

/// Sum of values times cell volume.
pub fn integrate(f: &Field) -> f64 {
    f.values.iter().sum::<f64>() * f.grid.cell_volume()
}

/// `(∫|f|^p)^{1/p}`; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::Parameter(format!("norm exponent must be positive, got {p}")));
    }
    if p == f64::INFINITY {
        return Ok(f.values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let s: f64 = if p == 2.0 {
        f.values.iter().map(|v| v * v).sum()
    } else if p == 1.0 {
        f.values.iter().map(|v| v.abs()).sum()
    } else {
        f.values.iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((s * f.grid.cell_volume()).powf(1.0 / p))
}

pub fn laplacian_neumann(f: &Field) -> Result<Field> {
    f.check_finite()?;
    let mut out = vec![0.0; f.values.len()];
    apply_laplacian(&f.grid, &f.values, &mut out);
    Ok(Field::from_vec_unchecked(f.grid, out))
}

/// Five-point (three-point in 1D) Laplacian with mirrored ghost cells, so the
/// flux through every boundary face vanishes.
pub(crate) fn apply_laplacian(grid: &Grid, x: &[f64], out: &mut [f64]) {
    let (nx, ny) = (grid.n[0], grid.n[1]);
    let ihx2 = 1.0 / (grid.spacing(0) * grid.spacing(0));
    if grid.dim == 1 {
        for i in 0..nx {
            let mut acc = 0.0;
            if i > 0 {
                acc += x[i - 1] - x[i];
            }
            if i + 1 < nx {
                acc += x[i + 1] - x[i];
            }
            out[i] = acc * ihx2;
        }
        return;
    }
    let ihy2 = 1.0 / (grid.spacing(1) * grid.spacing(1));
    for ix in 0..nx {
        for iy in 0..ny {
            let c = ix * ny + iy;
            let xc = x[c];
            let mut ax = 0.0;
            if ix > 0 {
                ax += x[c - ny] - xc;
            }
            if ix + 1 < nx {
                ax += x[c + ny] - xc;
            }
            let mut ay = 0.0;
            if iy > 0 {
                ay += x[c - 1] - xc;
            }
            if iy + 1 < ny {
                ay += x[c + 1] - xc;
            }
            out[c] = ax * ihx2 + ay * ihy2;
        }
    }
}

/// Diagonal of `-L`: sum over existing neighbours of 1/h².
pub(crate) fn laplacian_neg_diagonal(grid: &Grid) -> Vec<f64> {
    let ihx2 = 1.0 / (grid.spacing(0) * grid.spacing(0));
    let ihy2 = if grid.dim == 2 {
        1.0 / (grid.spacing(1) * grid.spacing(1))
    } else {
        0.0
    };
    let (nx, ny) = (grid.n[0], grid.n[1]);
    (0..grid.cell_count())
        .map(|c| {
            let (ix, iy) = grid.coords(c);
            let mut d = ihx2 * ((ix > 0) as u8 + (ix + 1 < nx) as u8) as f64;
            if grid.dim == 2 {
                d += ihy2 * ((iy > 0) as u8 + (iy + 1 < ny) as u8) as f64;
            }
            d
        })
        .collect()
}

/// Visits every interior face once with `(left cell, right cell, axis)`.
pub(crate) fn for_each_face(grid: &Grid, mut f: impl FnMut(usize, usize, usize)) {
    let (nx, ny) = (grid.n[0], grid.n[1]);
    for ix in 0..nx {
        for iy in 0..ny {
            let c = ix * ny + iy;
            if ix + 1 < nx {
                f(c, c + ny, 0);
            }
            if grid.dim == 2 && iy + 1 < ny {
                f(c, c + 1, 1);
            }
        }
    }
}

/// Discrete `‖∇f‖_{L²}` from face differences, each face weighted by one cell volume.
pub fn gradient_l2(f: &Field) -> f64 {
    let g = &f.grid;
    let h = [g.spacing(0), g.spacing(1)];
    let mut s = 0.0;
    for_each_face(g, |l, r, a| {
        let d = (f.values[r] - f.values[l]) / h[a];
        s += d * d;
    });
    (s * g.cell_volume()).sqrt()
}
