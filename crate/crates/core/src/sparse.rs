//! Sparse symmetric matrices and an envelope Cholesky factorisation.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Compressed sparse row matrix. Symmetric matrices store both triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix from triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| x[i] * self.row(i).map(|(j, v)| v * x[j]).sum::<f64>())
            .sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v).sum())
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `self + alpha * other` for matrices of equal size.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix) -> CsrMatrix {
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, alpha * v)));
        }
        CsrMatrix::from_triplets(self.n, t)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (0..self.n).all(|i| {
            self.row(i)
                .all(|(j, v)| (v - self.get(j, i)).abs() <= tol * scale)
        })
    }

    /// Coordinate dump: header `n nnz sym`, then the upper triangle as `row col value`.
    pub fn to_coordinate_text(&self) -> String {
        let upper: Vec<(usize, usize, f64)> = (0..self.n)
            .flat_map(|i| {
                self.row(i)
                    .filter(move |&(j, _)| j >= i)
                    .map(move |(j, v)| (i, j, v))
            })
            .collect();
        let mut s = String::new();
        let _ = writeln!(s, "{} {} sym", self.n, upper.len());
        for (i, j, v) in upper {
            let _ = writeln!(s, "{i} {j} {v:e}");
        }
        s
    }
}

/// Reverse Cuthill–McKee ordering of the matrix graph. Returns `perm` with
/// `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.row_ptr[i + 1] - a.row_ptr[i]).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs = |start: usize, visited: &mut Vec<bool>, order: &mut Vec<usize>| -> usize {
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        let mut last = start;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            last = u;
            let mut nb: Vec<usize> = a.row(u).map(|(j, _)| j).filter(|&j| !visited[j]).collect();
            nb.sort_by_key(|&j| (degree[j], j));
            for j in nb {
                visited[j] = true;
                queue.push_back(j);
            }
        }
        last
    };
    while order.len() < n {
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i))
            .unwrap();
        // One pass to find a pseudo-peripheral node, then the real sweep.
        let mut scratch = visited.clone();
        let mut tmp = Vec::new();
        let far = bfs(start, &mut scratch, &mut tmp);
        bfs(far, &mut visited, &mut order);
    }
    order.reverse();
    order
}

/// Envelope (skyline) Cholesky factor `P A P^T = L L^T`.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    /// First column of row `i` of `L`.
    first: Vec<usize>,
    /// Offsets of each row's envelope in `data`.
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n;
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in a.row(old) {
                let c = inv[j];
                if c < first[new] {
                    first[new] = c;
                }
            }
        }
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in a.row(old) {
                let c = inv[j];
                if c <= new {
                    data[start[new] + c - first[new]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let ri = start[i] - fi;
                let rj = start[j] - fj;
                let mut s = data[ri + j];
                for k in k0..j {
                    s -= data[ri + k] * data[rj + k];
                }
                if j < i {
                    data[ri + j] = s / data[rj + j];
                } else {
                    if !(s > 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "matrix is not positive definite (pivot {s:e} at row {i})"
                        )));
                    }
                    data[ri + i] = s.sqrt();
                }
            }
        }
        Ok(EnvelopeCholesky {
            n,
            perm,
            first,
            start,
            data,
        })
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let ri = self.start[i] - self.first[i];
            let mut s = y[i];
            for k in self.first[i]..i {
                s -= self.data[ri + k] * y[k];
            }
            y[i] = s / self.data[ri + i];
        }
        for i in (0..n).rev() {
            let ri = self.start[i] - self.first[i];
            y[i] /= self.data[ri + i];
            let yi = y[i];
            for k in self.first[i]..i {
                y[k] -= self.data[ri + k] * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

impl EnvelopeCholesky {
    /// Solves for several right-hand sides at once; the factor is streamed
    /// once per sweep instead of once per vector.
    pub fn solve_many(&self, rhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let (n, p) = (self.n, rhs.len());
        if p == 0 {
            return Vec::new();
        }
        // Interleaved storage: y[i * p + r].
        let mut y = vec![0.0; n * p];
        for (new, &old) in self.perm.iter().enumerate() {
            for r in 0..p {
                y[new * p + r] = rhs[r][old];
            }
        }
        let mut acc = vec![0.0; p];
        for i in 0..n {
            let ri = self.start[i] - self.first[i];
            acc.copy_from_slice(&y[i * p..(i + 1) * p]);
            for k in self.first[i]..i {
                let l = self.data[ri + k];
                let yk = &y[k * p..(k + 1) * p];
                for r in 0..p {
                    acc[r] -= l * yk[r];
                }
            }
            let d = self.data[ri + i];
            for r in 0..p {
                y[i * p + r] = acc[r] / d;
            }
        }
        for i in (0..n).rev() {
            let ri = self.start[i] - self.first[i];
            let d = self.data[ri + i];
            for r in 0..p {
                y[i * p + r] /= d;
            }
            acc.copy_from_slice(&y[i * p..(i + 1) * p]);
            for k in self.first[i]..i {
                let l = self.data[ri + k];
                let yk = &mut y[k * p..(k + 1) * p];
                for r in 0..p {
                    yk[r] -= l * acc[r];
                }
            }
        }
        let mut out = vec![vec![0.0; n]; p];
        for (new, &old) in self.perm.iter().enumerate() {
            for r in 0..p {
                out[r][old] = y[new * p + r];
            }
        }
        out
    }
}
