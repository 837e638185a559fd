//! Lowest eigenpair of real symmetric operators: a sparse row-compressed
//! matrix type, dense diagonalization for small problems and restarted
//! Lanczos with full reorthogonalization for large ones.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetric sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymmetric {
    /// Builds from unsorted `(row, col, value)` triplets; duplicates are summed
    /// and exact zeros dropped. Symmetry is the caller's contract.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_start = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                values.push(v);
                row_start[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_start[r + 1] += row_start[r];
        }
        let mut m = Self {
            dim,
            row_start,
            cols,
            values,
        };
        m.drop_zeros();
        m
    }

    fn drop_zeros(&mut self) {
        let mut row_start = vec![0; self.dim + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.dim {
            for i in self.row_start[r]..self.row_start[r + 1] {
                if self.values[i] != 0.0 {
                    cols.push(self.cols[i]);
                    values.push(self.values[i]);
                }
            }
            row_start[r + 1] = cols.len();
        }
        self.row_start = row_start;
        self.cols = cols;
        self.values = values;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_start[r]..self.row_start[r + 1];
        self.cols[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    /// Principal submatrix on the sorted index list `keep`.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut position = vec![usize::MAX; self.dim];
        for (i, &k) in keep.iter().enumerate() {
            position[k] = i;
        }
        let mut triplets = Vec::new();
        for (i, &k) in keep.iter().enumerate() {
            for (c, v) in self.row(k) {
                if position[c] != usize::MAX {
                    triplets.push((i, position[c], v));
                }
            }
        }
        Self::from_triplets(keep.len(), triplets)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// Lowest eigenvalue with a normalized eigenvector and its residual norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

fn residual(op: &SparseSymmetric, value: f64, vector: &[f64]) -> f64 {
    let mut hv = vec![0.0; vector.len()];
    op.apply(vector, &mut hv);
    hv.iter().zip(vector).map(|(h, v)| (h - value * v).powi(2)).sum::<f64>().sqrt()
}

/// Fixes the sign so the largest-magnitude component is positive.
fn canonical_sign(v: &mut [f64]) {
    let pivot = v.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn lowest_dense(op: &SparseSymmetric) -> Result<Eigenpair> {
    if op.dim == 0 {
        return Err(Error::Domain("empty operator".into()));
    }
    let eig = SymmetricEigen::new(op.to_dense());
    let (i, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let mut vector: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
    canonical_sign(&mut vector);
    let residual = residual(op, value, &vector);
    Ok(Eigenpair { value, vector, residual })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Krylov dimension per restart.
    pub krylov: usize,
    pub max_restarts: usize,
    /// Convergence on `||A v - e v|| <= tol * max(1, ||A||)`.
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            krylov: 80,
            max_restarts: 200,
            tol: 1e-11,
        }
    }
}

/// Deterministic start vector without special symmetry.
fn start_vector(dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Explicitly restarted Lanczos for the lowest eigenpair; each cycle keeps
/// the full Krylov basis and reorthogonalizes against all of it.
pub fn lowest_lanczos(op: &SparseSymmetric, options: &LanczosOptions) -> Result<Eigenpair> {
    lowest_lanczos_from(op, options, None)
}

/// As [`lowest_lanczos`], seeded with `start` (need not be normalized).
pub fn lowest_lanczos_from(op: &SparseSymmetric, options: &LanczosOptions, start: Option<&[f64]>) -> Result<Eigenpair> {
    let n = op.dim;
    if n == 0 {
        return Err(Error::Domain("empty operator".into()));
    }
    let scale = op.norm_bound().max(1.0);
    let m = options.krylov.min(n).max(1);
    let mut v0 = match start {
        Some(v) if v.len() == n && dot(v, v) > 0.0 => {
            let norm = dot(v, v).sqrt();
            v.iter().map(|x| x / norm).collect()
        }
        _ => start_vector(n),
    };
    let mut best = Eigenpair {
        value: f64::NAN,
        vector: v0.clone(),
        residual: f64::INFINITY,
    };
    for _ in 0..options.max_restarts.max(1) {
        let mut basis: Vec<Vec<f64>> = vec![v0.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut w = vec![0.0; n];
        for j in 0..m {
            op.apply(&basis[j], &mut w);
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            // two passes of Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&w, b);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = dot(&w, &w).sqrt();
            if j + 1 == m || norm <= 1e-14 * scale {
                break;
            }
            beta.push(norm);
            basis.push(w.iter().map(|x| x / norm).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imin, &value) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let coeffs: DVector<f64> = eig.eigenvectors.column(imin).into_owned();
        let mut ritz = vec![0.0; n];
        for (c, b) in coeffs.iter().zip(&basis) {
            ritz.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
        }
        let norm = dot(&ritz, &ritz).sqrt();
        ritz.iter_mut().for_each(|x| *x /= norm);
        let res = residual(op, value, &ritz);
        if res < best.residual {
            best = Eigenpair {
                value,
                vector: ritz.clone(),
                residual: res,
            };
        }
        if res <= options.tol * scale {
            canonical_sign(&mut best.vector);
            return Ok(best);
        }
        v0 = ritz;
    }
    Err(Error::NotConverged {
        residual: best.residual,
        iterations: options.max_restarts,
    })
}
