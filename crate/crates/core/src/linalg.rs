//! Dense matrices and subspaces over an exact field.

use std::fmt::Debug;
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use num_traits::{One, Zero};

/// Commutative ring with identity, enough for matrix products.
pub trait Ring:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + PartialEq
        + Debug
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

/// Exact field: Gaussian elimination is valid.
pub trait Field: Ring + Div<Output = Self> {}

impl<T: Ring + Div<Output = T>> Field for T {}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Ring> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| s.clone() * x.clone())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        let v = out[(i, j)].clone() + a.clone() * b.clone();
                        out[(i, j)] = v;
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.map(|x| -x.clone()))
    }

    /// Submatrix on the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows[i], cols[j])].clone()
        })
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| (k / self.cols.max(1), k % self.cols.max(1), v))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &mut self.data[i * self.cols + j]
    }
}

/// Reduced row echelon form of a list of vectors; returns the nonzero rows
/// and their pivot columns.
pub fn rref_rows<F: Field>(mut rows: Vec<Vec<F>>, width: usize) -> (Vec<Vec<F>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = F::one() / rows[r][col].clone();
        for x in rows[r].iter_mut() {
            if !x.is_zero() {
                *x = x.clone() * inv.clone();
            }
        }
        for i in 0..rows.len() {
            if i == r || rows[i][col].is_zero() {
                continue;
            }
            let f = rows[i][col].clone();
            for j in col..width {
                if !rows[r][j].is_zero() {
                    let v = rows[i][j].clone() - f.clone() * rows[r][j].clone();
                    rows[i][j] = v;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

impl<F: Field> Matrix<F> {
    pub fn rank(&self) -> usize {
        let rows = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        rref_rows(rows, self.cols).1.len()
    }

    /// Basis of the null space `{x : A x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<F>> {
        let rows = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        let (red, pivots) = rref_rows(rows, self.cols);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![F::zero(); self.cols];
                v[f] = F::one();
                for (row, &p) in red.iter().zip(&pivots) {
                    v[p] = -row[f].clone();
                }
                v
            })
            .collect()
    }

    /// Two-sided inverse, if the matrix is square and nonsingular.
    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let rows: Vec<Vec<F>> = (0..n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend((0..n).map(|j| if i == j { F::one() } else { F::zero() }));
                r
            })
            .collect();
        let (red, pivots) = rref_rows(rows, 2 * n);
        if pivots.len() < n || pivots.last().is_some_and(|&p| p >= n) {
            return None;
        }
        Some(Self::from_rows(
            red.into_iter().map(|r| r[n..].to_vec()).collect(),
        ))
    }
}

/// A linear subspace of `F^dim`, stored as a reduced row echelon basis so
/// that equal subspaces have equal representations.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<F> {
    dim: usize,
    basis: Vec<Vec<F>>,
    pivots: Vec<usize>,
}

impl<F: Field> Subspace<F> {
    pub fn zero(dim: usize) -> Self {
        Subspace {
            dim,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(dim: usize) -> Self {
        Self::span(dim, (0..dim).map(|i| unit(dim, i)).collect())
    }

    pub fn span(dim: usize, vectors: Vec<Vec<F>>) -> Self {
        debug_assert!(vectors.iter().all(|v| v.len() == dim));
        let (basis, pivots) = rref_rows(vectors, dim);
        Subspace { dim, basis, pivots }
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinate(dim: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        Self::span(dim, indices.into_iter().map(|i| unit(dim, i)).collect())
    }

    pub fn ambient(&self) -> usize {
        self.dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<F>] {
        &self.basis
    }

    /// Residual of `v` after elimination against the basis; zero iff `v` lies in the span.
    pub fn reduce(&self, v: &[F]) -> Vec<F> {
        let mut r = v.to_vec();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if r[p].is_zero() {
                continue;
            }
            let f = r[p].clone();
            for (x, y) in r.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
        }
        r
    }

    pub fn contains(&self, v: &[F]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    pub fn contains_space(&self, other: &Self) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut vs = self.basis.clone();
        vs.extend(other.basis.iter().cloned());
        Self::span(self.dim, vs)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        // x = Σ a_i u_i = Σ b_j w_j  ⇔  (a, -b) in the kernel of [U^T | W^T].
        let (k, l) = (self.dim(), other.dim());
        if k == 0 || l == 0 {
            return Self::zero(self.dim);
        }
        let m = Matrix::from_fn(self.dim, k + l, |i, j| {
            if j < k {
                self.basis[j][i].clone()
            } else {
                -other.basis[j - k][i].clone()
            }
        });
        let vs = m
            .kernel()
            .into_iter()
            .map(|c| {
                let mut v = vec![F::zero(); self.dim];
                for (a, u) in c[..k].iter().zip(&self.basis) {
                    if a.is_zero() {
                        continue;
                    }
                    for (x, y) in v.iter_mut().zip(u) {
                        *x = x.clone() + a.clone() * y.clone();
                    }
                }
                v
            })
            .collect();
        Self::span(self.dim, vs)
    }

    /// Image under the linear map `a` (acting on column vectors).
    pub fn image(&self, a: &Matrix<F>) -> Self {
        Self::span(a.rows(), self.basis.iter().map(|v| a.apply(v)).collect())
    }

    /// `{x in self : a x in target}`.
    pub fn preimage_within(&self, a: &Matrix<F>, target: &Subspace<F>) -> Self {
        // Coordinates c with target-residual of a(Σ c_i u_i) equal to zero;
        // the residual map is linear because `reduce` is projection along the pivots.
        let k = self.dim();
        if k == 0 {
            return self.clone();
        }
        let images: Vec<Vec<F>> = self
            .basis
            .iter()
            .map(|u| target.reduce(&a.apply(u)))
            .collect();
        let m = Matrix::from_fn(a.rows(), k, |i, j| images[j][i].clone());
        let vs = m
            .kernel()
            .into_iter()
            .map(|c| {
                let mut v = vec![F::zero(); self.dim];
                for (coef, u) in c.iter().zip(&self.basis) {
                    if coef.is_zero() {
                        continue;
                    }
                    for (x, y) in v.iter_mut().zip(u) {
                        *x = x.clone() + coef.clone() * y.clone();
                    }
                }
                v
            })
            .collect();
        Self::span(self.dim, vs)
    }
}

pub fn unit<F: Ring>(dim: usize, i: usize) -> Vec<F> {
    let mut v = vec![F::zero(); dim];
    v[i] = F::one();
    v
}
