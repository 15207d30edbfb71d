//! Dense symmetric eigen-decomposition for `d <= 4` (cyclic Jacobi).
//!
//! Conventions: eigenvalues ascending; each eigenvector's largest-magnitude
//! component is positive (first index wins ties); eigenvalues closer than the
//! degeneracy gap share a frame obtained by Gram-Schmidt of the standard basis
//! projected onto their common eigenspace.

use crate::field::Mat;
use crate::grid::MAX_DIM;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct SymEigen<T> {
    pub dim: usize,
    /// Ascending eigenvalues (first `dim` entries used).
    pub values: [T; MAX_DIM],
    /// Eigenvectors as columns: `vectors[i][k]` is component `i` of vector `k`.
    pub vectors: Mat<T>,
}

impl<T: Real> SymEigen<T> {
    pub fn vector(&self, k: usize) -> [T; MAX_DIM] {
        let mut v = [T::zero(); MAX_DIM];
        for (i, vi) in v.iter_mut().enumerate().take(self.dim) {
            *vi = self.vectors[i][k];
        }
        v
    }

    /// `sum_k values[k] v_k v_k^T`.
    pub fn reconstruct(&self) -> Mat<T> {
        let d = self.dim;
        let mut m = [[T::zero(); MAX_DIM]; MAX_DIM];
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    m[i][j] = m[i][j] + self.values[k] * self.vectors[i][k] * self.vectors[j][k];
                }
            }
        }
        m
    }
}

/// Relative eigenvalue gap below which eigenvectors are treated as degenerate.
pub fn degeneracy_gap<T: Real>() -> T {
    T::lit(1e-12).max(T::lit(100.0) * T::epsilon())
}

pub fn sym_eigen<T: Real>(a: &Mat<T>, d: usize) -> SymEigen<T> {
    let mut m = *a;
    let mut v = identity::<T>(d);
    let scale = frobenius_sq(&m, d).sqrt();
    if scale > T::zero() {
        for _ in 0..60 {
            let mut off = T::zero();
            for i in 0..d {
                for j in i + 1..d {
                    off = off + m[i][j] * m[i][j];
                }
            }
            if off.sqrt() <= T::epsilon() * T::lit(1e-2) * scale {
                break;
            }
            for p in 0..d {
                for q in p + 1..d {
                    rotate(&mut m, &mut v, d, p, q);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| m[x][x].partial_cmp(&m[y][y]).unwrap_or(std::cmp::Ordering::Equal));
    let mut values = [T::zero(); MAX_DIM];
    let mut vectors = [[T::zero(); MAX_DIM]; MAX_DIM];
    for (k, &src) in order.iter().enumerate() {
        values[k] = m[src][src];
        for i in 0..d {
            vectors[i][k] = v[i][src];
        }
    }
    let mut out = SymEigen { dim: d, values, vectors };
    regularize_clusters(&mut out, scale);
    for k in 0..d {
        fix_sign(&mut out.vectors, d, k);
    }
    out
}

fn rotate<T: Real>(m: &mut Mat<T>, v: &mut Mat<T>, d: usize, p: usize, q: usize) {
    let apq = m[p][q];
    if apq == T::zero() {
        return;
    }
    let two = T::lit(2.0);
    let theta = (m[q][q] - m[p][p]) / (two * apq);
    let t = {
        let s = if theta >= T::zero() { T::one() } else { -T::one() };
        s / (theta.magnitude() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    for k in 0..d {
        let mkp = m[k][p];
        let mkq = m[k][q];
        m[k][p] = c * mkp - s * mkq;
        m[k][q] = s * mkp + c * mkq;
    }
    for k in 0..d {
        let mpk = m[p][k];
        let mqk = m[q][k];
        m[p][k] = c * mpk - s * mqk;
        m[q][k] = s * mpk + c * mqk;
    }
    m[p][q] = T::zero();
    m[q][p] = T::zero();
    for k in 0..d {
        let vkp = v[k][p];
        let vkq = v[k][q];
        v[k][p] = c * vkp - s * vkq;
        v[k][q] = s * vkp + c * vkq;
    }
}

fn regularize_clusters<T: Real>(e: &mut SymEigen<T>, scale: T) {
    let d = e.dim;
    let tol = degeneracy_gap::<T>() * scale;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && e.values[end] - e.values[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            let frame = cluster_frame(&e.vectors, d, start, end);
            for (k, col) in (start..end).zip(frame.iter()) {
                for i in 0..d {
                    e.vectors[i][k] = col[i];
                }
            }
        }
        start = end;
    }
}

/// Gram-Schmidt of `P e_0, P e_1, ...` with `P` the projector onto columns
/// `start..end`.
fn cluster_frame<T: Real>(vecs: &Mat<T>, d: usize, start: usize, end: usize) -> Vec<[T; MAX_DIM]> {
    let want = end - start;
    let mut out: Vec<[T; MAX_DIM]> = Vec::with_capacity(want);
    for axis in 0..d {
        if out.len() == want {
            break;
        }
        let mut w = [T::zero(); MAX_DIM];
        for k in start..end {
            let coef = vecs[axis][k];
            for i in 0..d {
                w[i] = w[i] + coef * vecs[i][k];
            }
        }
        for u in &out {
            let dot = (0..d).fold(T::zero(), |acc, i| acc + u[i] * w[i]);
            for i in 0..d {
                w[i] = w[i] - dot * u[i];
            }
        }
        let norm = (0..d).fold(T::zero(), |acc, i| acc + w[i] * w[i]).sqrt();
        if norm > T::lit(1e-3) {
            for wi in w.iter_mut().take(d) {
                *wi = *wi / norm;
            }
            out.push(w);
        }
    }
    out
}

fn fix_sign<T: Real>(vecs: &mut Mat<T>, d: usize, k: usize) {
    let mut best = 0;
    for i in 1..d {
        if vecs[i][k].magnitude() > vecs[best][k].magnitude() {
            best = i;
        }
    }
    if vecs[best][k] < T::zero() {
        for row in vecs.iter_mut().take(d) {
            row[k] = -row[k];
        }
    }
}

pub fn identity<T: Real>(d: usize) -> Mat<T> {
    let mut m = [[T::zero(); MAX_DIM]; MAX_DIM];
    for (i, row) in m.iter_mut().enumerate().take(d) {
        row[i] = T::one();
    }
    m
}

pub fn frobenius_sq<T: Real>(m: &Mat<T>, d: usize) -> T {
    let mut s = T::zero();
    for row in m.iter().take(d) {
        for x in row.iter().take(d) {
            s = s + *x * *x;
        }
    }
    s
}

pub fn det3<T: Real>(m: &Mat<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_rows(rows: &[&[f64]]) -> Mat<f64> {
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, r) in rows.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                m[i][j] = *x;
            }
        }
        m
    }

    #[test]
    fn diagonal_input_sorts_ascending() {
        let m = from_rows(&[&[1.0, 0.0, 0.0], &[0.0, -2.0, 0.0], &[0.0, 0.0, 1.0]]);
        let e = sym_eigen(&m, 3);
        assert_eq!(&e.values[..3], &[-2.0, 1.0, 1.0]);
        // Degenerate pair gets the frame {e0, e2}.
        assert_eq!(e.vector(0)[1], 1.0);
        assert_eq!(e.vector(1)[0], 1.0);
        assert_eq!(e.vector(2)[2], 1.0);
    }

    #[test]
    fn zero_matrix_gets_standard_frame() {
        let e = sym_eigen(&[[0.0; MAX_DIM]; MAX_DIM], 3);
        assert_eq!(&e.values[..3], &[0.0, 0.0, 0.0]);
        assert_eq!(e.vectors, identity::<f64>(3));
    }

    #[test]
    fn known_two_by_two() {
        let m = from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let e = sym_eigen(&m, 2);
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        let v = e.vector(1);
        assert!((v[0] - v[1]).abs() < 1e-14 && v[0] > 0.0);
    }

    #[test]
    fn determinant_of_diag() {
        let m = from_rows(&[&[-2.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(det3(&m), -2.0);
    }

    proptest! {
        #[test]
        fn reconstruction_and_orthonormality(d in 2usize..=4, xs in prop::collection::vec(-10.0f64..10.0, 16)) {
            let mut m = [[0.0; MAX_DIM]; MAX_DIM];
            for i in 0..d {
                for j in i..d {
                    m[i][j] = xs[i * 4 + j];
                    m[j][i] = xs[i * 4 + j];
                }
            }
            let e = sym_eigen(&m, d);
            let r = e.reconstruct();
            let scale = frobenius_sq(&m, d).sqrt().max(1.0);
            for i in 0..d {
                for j in 0..d {
                    prop_assert!((r[i][j] - m[i][j]).abs() < 1e-12 * scale);
                    let dot: f64 = (0..d).map(|k| e.vectors[k][i] * e.vectors[k][j]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).abs() < 1e-12);
                }
            }
            for k in 1..d {
                prop_assert!(e.values[k - 1] <= e.values[k]);
            }
        }
    }
}
