//! Symmetric positive definite envelope (skyline) storage with an in-place
//! `LDLᵀ` factorization.

use crate::error::{Error, Result};

/// Lower envelope of a symmetric matrix, stored row by row.
#[derive(Debug, Clone)]
pub struct SkylineMatrix {
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineMatrix {
    /// `first[i]` is the leftmost column of row `i` that may be nonzero.
    pub fn new(first: Vec<usize>) -> Self {
        let mut offset = Vec::with_capacity(first.len() + 1);
        let mut total = 0;
        for (i, f) in first.iter().enumerate() {
            assert!(*f <= i, "envelope must start at or left of the diagonal");
            offset.push(total);
            total += i - f + 1;
        }
        offset.push(total);
        Self { first, offset, data: vec![0.0; total] }
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn stored(&self) -> usize {
        self.data.len()
    }

    /// Adds `v` to entry `(i, j)`; only the lower triangle is kept.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        debug_assert!(j >= self.first[i], "entry outside envelope");
        self.data[self.offset[i] + j - self.first[i]] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if j < self.first[i] {
            0.0
        } else {
            self.data[self.offset[i] + j - self.first[i]]
        }
    }

    /// `y = A x` using the symmetric envelope.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let f = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let mut acc = 0.0;
            for (k, a) in row.iter().enumerate() {
                let j = f + k;
                acc += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
            y[i] += acc;
        }
        y
    }

    pub fn factor(&self) -> Result<LdlFactor> {
        let n = self.dim();
        let mut data = self.data.clone();
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let fi = self.first[i];
            let oi = self.offset[i];
            // slots hold temp_j = d_j l_ij until the row is finished
            for j in fi..i {
                let fj = self.first[j];
                let oj = self.offset[j];
                let k0 = fi.max(fj);
                let mut s = 0.0;
                if k0 < j {
                    let ri = &data[oi + k0 - fi..oi + j - fi];
                    let rj = &data[oj + k0 - fj..oj + j - fj];
                    s = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
                }
                data[oi + j - fi] -= s;
            }
            let mut d = data[oi + i - fi];
            for j in fi..i {
                let t = data[oi + j - fi];
                let l = t / diag[j];
                d -= t * l;
                data[oi + j - fi] = l;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Solver(format!("non-positive pivot {d} at row {i}")));
            }
            diag[i] = d;
            data[oi + i - fi] = 1.0;
        }
        Ok(LdlFactor { first: self.first.clone(), offset: self.offset.clone(), data, diag })
    }
}

/// Unit lower factor `L` (same envelope) and diagonal `D`.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
    diag: Vec<f64>,
}

impl LdlFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut x = b.to_vec();
        for i in 0..n {
            let f = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1] - 1];
            let s: f64 = row.iter().zip(&x[f..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= d;
        }
        for i in (0..n).rev() {
            let f = self.first[i];
            let xi = x[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1] - 1];
            for (k, l) in row.iter().enumerate() {
                x[f + k] -= l * xi;
            }
        }
        x
    }

    pub fn min_pivot(&self) -> f64 {
        self.diag.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}
