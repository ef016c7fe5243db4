//! Matrix-free Jacobi-preconditioned conjugate gradients for the implicit
//! diffusion systems `(diag(a) − c L) x = b`.

use crate::error::{Error, Result};
use crate::grid::{apply_laplacian, laplacian_neg_diagonal, Grid};

/// The operator `x ↦ a ∘ x − coef · L x` with `L` the zero-flux Laplacian.
///
/// Symmetric; positive definite and an M-matrix whenever every `a_i > 0`
/// and `coef ≥ 0`.
pub(crate) struct ShiftedLaplacian<'g> {
    grid: &'g Grid,
    diag: Vec<f64>,
    coef: f64,
}

impl<'g> ShiftedLaplacian<'g> {
    pub(crate) fn new(grid: &'g Grid, diag: Vec<f64>, coef: f64) -> Self {
        debug_assert_eq!(diag.len(), grid.cell_count());
        Self { grid, diag, coef }
    }

    pub(crate) fn apply(&self, x: &[f64], out: &mut [f64]) {
        apply_laplacian(self.grid, x, out);
        for ((o, &xi), &ai) in out.iter_mut().zip(x).zip(&self.diag) {
            *o = ai * xi - self.coef * *o;
        }
    }

    fn jacobi(&self) -> Vec<f64> {
        laplacian_neg_diagonal(self.grid)
            .into_iter()
            .zip(&self.diag)
            .map(|(l, a)| 1.0 / (a + self.coef * l))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `op x = b` starting from the contents of `x`, to relative residual `tol`.
pub(crate) fn pcg(
    op: &ShiftedLaplacian<'_>,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats { iterations: 0, residual: 0.0 });
    }
    let minv = op.jacobi();
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut res = dot(&r, &r).sqrt() / b_norm;
    if res <= tol {
        return Ok(SolveStats { iterations: 0, residual: res });
    }
    let mut z: Vec<f64> = r.iter().zip(&minv).map(|(a, m)| a * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::LinearSolve { iterations: it, residual: res, tolerance: tol });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt() / b_norm;
        if res <= tol {
            return Ok(SolveStats { iterations: it, residual: res });
        }
        for i in 0..n {
            z[i] = r[i] * minv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolve { iterations: max_iter, residual: res, tolerance: tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_shifted_system() {
        let g = Grid::new_2d(12, 9, 1.0, 0.7).unwrap();
        let n = g.cell_count();
        let diag: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i % 5) as f64).collect();
        let op = ShiftedLaplacian::new(&g, diag, 0.05);
        let truth: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 / 3.0).collect();
        let mut b = vec![0.0; n];
        op.apply(&truth, &mut b);
        let mut x = vec![0.0; n];
        let stats = pcg(&op, &b, &mut x, 1e-12, 500).unwrap();
        assert!(stats.residual <= 1e-12);
        let err = x.iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "err {err}");
    }

    #[test]
    fn reports_non_convergence() {
        let g = Grid::new_1d(200, 1.0).unwrap();
        let op = ShiftedLaplacian::new(&g, vec![1e-6; 200], 1.0);
        let b: Vec<f64> = (0..200).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; 200];
        let err = pcg(&op, &b, &mut x, 1e-14, 2).unwrap_err();
        assert!(matches!(err, Error::LinearSolve { iterations: 2, .. }));
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = Grid::new_1d(5, 1.0).unwrap();
        let op = ShiftedLaplacian::new(&g, vec![1.0; 5], 1.0);
        let mut x = vec![3.0; 5];
        pcg(&op, &[0.0; 5], &mut x, 1e-10, 10).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }
}
