//! Dense symmetric linear algebra for small dimensions.
//!
//! Everything here is sized for the handful of coordinates the analyses use
//! (rarely more than ten). Matrices are stored densely in row-major order and
//! symmetry is enforced when a [`SymMatrix`] is built, so every routine may
//! rely on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 64;

/// Pivots must exceed this fraction of the largest diagonal magnitude.
pub const SPD_RELATIVE_TOLERANCE: f64 = 1e-12;

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(())
}

/// A real vector with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_dim(entries.len())?;
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Vector(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        same_dim(self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        same_dim(self.dim(), other.dim())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        same_dim(self.dim(), other.dim())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|a| a * factor).collect())
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Vector::new(value)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A symmetric matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds from full rows; the rows must be exactly symmetric.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        let mut data = Vec::with_capacity(dim * dim);
        for row in &rows {
            same_dim(dim, row.len())?;
            data.extend_from_slice(row);
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if data[i * dim + j] != data[j * dim + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(SymMatrix { dim, data })
    }

    /// Builds from an entry function evaluated on the lower triangle and mirrored.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_dim(dim)?;
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite("matrix"));
                }
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Ok(SymMatrix { dim, data })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).abs()).fold(0.0, f64::max)
    }

    /// Largest absolute off-diagonal entry.
    pub fn max_abs_off_diagonal(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.dim {
            for j in 0..i {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }

    pub fn scale(&self, factor: f64) -> Result<SymMatrix> {
        Self::from_fn(self.dim, |i, j| self.get(i, j) * factor)
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        same_dim(self.dim, other.dim)?;
        Self::from_fn(self.dim, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        same_dim(self.dim, other.dim)?;
        Self::from_fn(self.dim, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn mul_vec(&self, v: &Vector) -> Result<Vector> {
        same_dim(self.dim, v.dim())?;
        Ok(Vector(
            self.data
                .chunks(self.dim)
                .map(|row| dot(row, v.as_slice()))
                .collect(),
        ))
    }

    /// Frobenius inner product.
    pub fn frobenius_dot(&self, other: &SymMatrix) -> Result<f64> {
        same_dim(self.dim, other.dim)?;
        Ok(dot(&self.data, &other.data))
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> Result<f64> {
        same_dim(self.dim, other.dim)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.rows()
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangularFactor {
    dim: usize,
    data: Vec<f64>,
}

impl LowerTriangularFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// `L x` for a vector `x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..=i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Solves `L Lᵀ x = b`.
    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        same_dim(self.dim, b.dim())?;
        let n = self.dim;
        let mut y = b.as_slice().to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.get(i, k) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.get(k, i) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        Ok(Vector(y))
    }

    /// `L Lᵀ`, to check reconstructions.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.dim;
        SymMatrix::from_fn(n, |i, j| (0..=j.min(i)).map(|k| self.get(i, k) * self.get(j, k)).sum())
            .expect("factor entries are finite")
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.get(i, i).ln()).sum::<f64>()
    }
}

/// Cholesky factorization; fails with [`Error::NotSpd`] when a pivot falls at
/// or below `1e-12 × max|diag|`.
pub fn cholesky(m: &SymMatrix) -> Result<LowerTriangularFactor> {
    let n = m.dim();
    let tolerance = SPD_RELATIVE_TOLERANCE * m.max_abs_diagonal();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut pivot = m.get(j, j);
        for k in 0..j {
            pivot -= l[j * n + k] * l[j * n + k];
        }
        if !(pivot > tolerance) {
            return Err(Error::NotSpd {
                index: j,
                pivot,
                tolerance,
            });
        }
        let d = pivot.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(LowerTriangularFactor { dim: n, data: l })
}

/// Inverse of an SPD matrix via its Cholesky factor.
pub fn spd_inverse(m: &SymMatrix) -> Result<SymMatrix> {
    let factor = cholesky(m)?;
    let n = m.dim();
    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        columns.push(factor.solve(&Vector::basis(n, j))?);
    }
    // Average the two triangles so the result is exactly symmetric.
    SymMatrix::from_fn(n, |i, j| 0.5 * (columns[j][i] + columns[i][j]))
}

/// `λᵀ m λ`.
pub fn quad_form(lambda: &Vector, m: &SymMatrix) -> Result<f64> {
    let mv = m.mul_vec(lambda)?;
    lambda.dot(&mv)
}
