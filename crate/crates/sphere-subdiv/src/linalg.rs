//! Small dense linear algebra for ambient dimensions up to a handful.
//!
//! The solver and certificate code never sees matrices larger than the
//! ambient dimension (stencils have at most four points, spheres of interest
//! are S² and S³), so everything here is a straightforward dense routine:
//! Householder tangent bases, cyclic Jacobi eigenvalues for symmetric
//! matrices, and Gaussian elimination with partial pivoting.

use crate::scalar::Real;

/// Euclidean inner product. Panics on length mismatch, which is an internal
/// invariant violation rather than a user-facing error.
pub fn dot<S: Real>(a: &[S], b: &[S]) -> S {
    assert_eq!(a.len(), b.len(), "dot of mismatched lengths");
    a.iter()
        .zip(b.iter())
        .fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Euclidean norm.
pub fn norm<S: Real>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

/// `out += c * v`.
pub fn axpy<S: Real>(out: &mut [S], c: S, v: &[S]) {
    assert_eq!(out.len(), v.len(), "axpy of mismatched lengths");
    for (o, &x) in out.iter_mut().zip(v.iter()) {
        *o = *o + c * x;
    }
}

/// `v *= c` in place.
pub fn scale<S: Real>(v: &mut [S], c: S) {
    for x in v.iter_mut() {
        *x = *x * c;
    }
}

/// Dense square matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Real> SquareMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![S::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.n + j] = v;
    }

    pub fn add_assign_scaled(&mut self, c: S, other: &Self) {
        assert_eq!(self.n, other.n, "matrix dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a = *a + c * b;
        }
    }

    /// `self += c * v vᵀ`.
    pub fn add_outer(&mut self, c: S, v: &[S]) {
        assert_eq!(self.n, v.len(), "outer product dimension mismatch");
        for i in 0..self.n {
            for j in 0..self.n {
                self.data[i * self.n + j] = self.data[i * self.n + j] + c * v[i] * v[j];
            }
        }
    }

    pub fn add_scaled_identity(&mut self, c: S) {
        for i in 0..self.n {
            self.data[i * self.n + i] = self.data[i * self.n + i] + c;
        }
    }

    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.n, v.len(), "matvec dimension mismatch");
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], v))
            .collect()
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<S> {
        let n = self.n;
        let mut a = self.data.clone();
        let idx = |i: usize, j: usize| i * n + j;
        let eps = S::epsilon() * S::of(16.0);
        for _sweep in 0..64 {
            let mut off = S::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off + a[idx(i, j)] * a[idx(i, j)];
                }
            }
            if off.sqrt() <= eps * (S::one() + frobenius(&a)) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[idx(p, q)];
                    if apq.abs() <= S::epsilon() {
                        continue;
                    }
                    let app = a[idx(p, p)];
                    let aqq = a[idx(q, q)];
                    let theta = (aqq - app) / (S::of(2.0) * apq);
                    let t = {
                        let sign = if theta >= S::zero() { S::one() } else { -S::one() };
                        sign / (theta.abs() + (theta * theta + S::one()).sqrt())
                    };
                    let c = S::one() / (t * t + S::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[idx(k, p)];
                        let akq = a[idx(k, q)];
                        a[idx(k, p)] = c * akp - s * akq;
                        a[idx(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[idx(p, k)];
                        let aqk = a[idx(q, k)];
                        a[idx(p, k)] = c * apk - s * aqk;
                        a[idx(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<S> = (0..n).map(|i| a[idx(i, i)]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
        eig
    }

    /// Solves `self * x = rhs` by Gaussian elimination with partial pivoting.
    /// Returns `None` when a pivot collapses to zero.
    pub fn solve(&self, rhs: &[S]) -> Option<Vec<S>> {
        assert_eq!(self.n, rhs.len(), "solve dimension mismatch");
        let n = self.n;
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        let idx = |i: usize, j: usize| i * n + j;
        for col in 0..n {
            let mut pivot = col;
            for row in (col + 1)..n {
                if a[idx(row, col)].abs() > a[idx(pivot, col)].abs() {
                    pivot = row;
                }
            }
            if a[idx(pivot, col)].abs() <= S::epsilon() * S::of(16.0) {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(idx(col, j), idx(pivot, j));
                }
                b.swap(col, pivot);
            }
            let inv = S::one() / a[idx(col, col)];
            for row in (col + 1)..n {
                let f = a[idx(row, col)] * inv;
                if f == S::zero() {
                    continue;
                }
                for j in col..n {
                    a[idx(row, j)] = a[idx(row, j)] - f * a[idx(col, j)];
                }
                b[row] = b[row] - f * b[col];
            }
        }
        let mut x = vec![S::zero(); n];
        for row in (0..n).rev() {
            let mut acc = b[row];
            for j in (row + 1)..n {
                acc = acc - a[idx(row, j)] * x[j];
            }
            x[row] = acc / a[idx(row, row)];
        }
        Some(x)
    }
}

fn frobenius<S: Real>(data: &[S]) -> S {
    data.iter()
        .fold(S::zero(), |acc, &x| acc + x * x)
        .sqrt()
}

/// Orthonormal basis of the hyperplane orthogonal to the unit vector `x`,
/// built from the Householder reflection that swaps `x` and the last
/// coordinate axis. Returns `dim(x) - 1` vectors.
pub fn tangent_basis<S: Real>(x: &[S]) -> Vec<Vec<S>> {
    let d = x.len();
    let n = d - 1;
    let mut u: Vec<S> = x.to_vec();
    u[n] = u[n] - S::one();
    let unorm = norm(&u);
    if unorm <= S::of(1e-12) {
        return (0..n)
            .map(|i| {
                let mut e = vec![S::zero(); d];
                e[i] = S::one();
                e
            })
            .collect();
    }
    scale(&mut u, S::one() / unorm);
    (0..n)
        .map(|i| {
            let mut b = vec![S::zero(); d];
            b[i] = S::one();
            let c = S::of(-2.0) * u[i];
            axpy(&mut b, c, &u);
            b
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangent_basis_is_orthonormal_and_orthogonal_to_x() {
        let x = {
            let raw = [0.3f64, -0.5, 0.2, 0.79];
            let n = norm(&raw);
            raw.iter().map(|v| v / n).collect::<Vec<_>>()
        };
        let basis = tangent_basis(&x);
        assert_eq!(basis.len(), 3);
        for (i, bi) in basis.iter().enumerate() {
            assert!(dot(bi, &x).abs() < 1e-14);
            for (j, bj) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot(bi, bj) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tangent_basis_near_north_pole_falls_back_to_axes() {
        let basis = tangent_basis(&[0.0f64, 0.0, 1.0]);
        assert_eq!(basis, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
    }

    #[test]
    fn jacobi_matches_known_spectrum() {
        let mut m = SquareMatrix::zeros(3);
        m.set(0, 0, 2.0);
        m.set(1, 1, 3.0);
        m.set(2, 2, 4.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        let eig = m.symmetric_eigenvalues();
        let expected = [2.5 - 1.25f64.sqrt(), 2.5 + 1.25f64.sqrt(), 4.0];
        let mut expected = expected.to_vec();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, x) in eig.iter().zip(expected.iter()) {
            assert!((e - x).abs() < 1e-12, "eig {e} vs {x}");
        }
    }

    #[test]
    fn solve_recovers_solution() {
        let mut m = SquareMatrix::<f64>::zeros(3);
        let rows = [[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        let x_true = vec![0.5, -1.0, 2.0];
        let rhs = m.matvec(&x_true);
        let x = m.solve(&rhs).unwrap();
        for (a, b) in x.iter().zip(x_true.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_solve_is_none() {
        let mut m = SquareMatrix::zeros(2);
        m.set(0, 0, 1.0);
        m.set(0, 1, 2.0);
        m.set(1, 0, 2.0);
        m.set(1, 1, 4.0);
        assert!(m.solve(&[1.0, 1.0]).is_none());
    }
}
