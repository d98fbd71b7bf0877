//! Dense complex linear algebra shared by every other module.
//!
//! Eigenvalues, singular values and polar factors are delegated to LAPACK,
//! but nothing is returned unverified: [`eigenvalues_dense`] certifies each
//! eigenpair against a caller-supplied residual tolerance, and the
//! determinant is an independent LU elimination so that determinant-based
//! identities cross-check the eigensolver rather than restating it.

use ndarray::Array2;
use ndarray_linalg::{Eig, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix with row-major storage and finite entries.
///
/// Serializes as `{"rows": r, "cols": c, "data": [[re, im], ...]}` with
/// `data` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct ComplexMatrix {
    data: Array2<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<RawMatrix> for ComplexMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        if raw.data.len() != raw.rows * raw.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix data has {} entries, expected {}x{}",
                raw.data.len(),
                raw.rows,
                raw.cols
            )));
        }
        let entries = raw
            .data
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(raw.rows, raw.cols, entries)
    }
}

impl From<ComplexMatrix> for RawMatrix {
    fn from(m: ComplexMatrix) -> Self {
        let (rows, cols) = (m.rows(), m.cols());
        let data = m.data.iter().map(|z| [z.re, z.im]).collect();
        RawMatrix { rows, cols, data }
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                entries.len(),
                rows,
                cols
            )));
        }
        let data = Array2::from_shape_vec((rows, cols), entries)
            .expect("shape already validated");
        Self::from_array(data)
    }

    /// Wraps an existing array, rejecting non-finite values.
    pub fn from_array(data: Array2<Complex64>) -> Result<Self> {
        for ((i, j), z) in data.indexed_iter() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
        Ok(ComplexMatrix { data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            data: Array2::zeros((rows, cols)),
        }
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix {
            data: Array2::eye(n),
        }
    }

    /// Builds a matrix entry by entry; `f` must return finite values.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        Self::from_array(Array2::from_shape_fn((rows, cols), |(i, j)| f(i, j)))
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[(row, col)] = value;
    }

    /// Borrow of the underlying array for callers that need ndarray ops.
    pub fn array(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(ComplexMatrix {
            data: self.data.dot(&rhs.data),
        })
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_check(rhs)?;
        Ok(ComplexMatrix {
            data: &self.data + &rhs.data,
        })
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_check(rhs)?;
        Ok(ComplexMatrix {
            data: &self.data - &rhs.data,
        })
    }

    pub fn scale(&self, k: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            data: self.data.mapv(|z| k * z),
        }
    }

    pub fn transpose(&self) -> ComplexMatrix {
        ComplexMatrix {
            data: self.data.t().to_owned(),
        }
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix {
            data: self.data.t().mapv(|z| z.conj()),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of `A A† - I`; zero exactly when `A` is unitary.
    pub fn unitary_defect(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::NonSquare {
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        let gram = self.data.dot(&self.data.t().mapv(|z| z.conj()));
        let mut defect = 0.0;
        for ((i, j), z) in gram.indexed_iter() {
            let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            defect += (z - target).norm_sqr();
        }
        Ok(defect.sqrt())
    }

    fn zip_check(&self, rhs: &ComplexMatrix) -> Result<()> {
        if self.rows() != rhs.rows() || self.cols() != rhs.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(())
    }
}

/// Eigenvalue multiset with a certified residual bound.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<Complex64>,
    residual_bound: f64,
}

impl Spectrum {
    /// Sorts the values into canonical order and records the residual bound.
    pub fn from_values(mut values: Vec<Complex64>, residual_bound: f64) -> Self {
        sort_descending(&mut values);
        Spectrum {
            values,
            residual_bound,
        }
    }

    /// Eigenvalues sorted by descending modulus (ties: descending re, then im).
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Largest certified per-eigenpair residual `max_i |A v_i - lambda_i v_i|`.
    pub fn residual_bound(&self) -> f64 {
        self.residual_bound
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.first().map_or(0.0, |z| z.norm())
    }
}

/// Canonical eigenvalue order: descending modulus, ties broken by
/// descending real part, then descending imaginary part.
pub fn sort_descending(values: &mut [Complex64]) {
    values.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap()
            .then(b.re.partial_cmp(&a.re).unwrap())
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
}

/// Full eigenvalue set of a square matrix, certified eigenpair by eigenpair.
///
/// The returned spectrum is accepted only if every residual
/// `|A v_i - lambda_i v_i| / |v_i|` stays below `tol * |A|_F`; otherwise the
/// call fails with [`Error::NotConverged`] so silent inaccuracies cannot
/// propagate into downstream identities.
pub fn eigenvalues_dense(a: &ComplexMatrix, tol: f64) -> Result<Spectrum> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Spectrum::from_values(Vec::new(), 0.0));
    }
    let (vals, vecs) = a
        .data
        .eig()
        .map_err(|e| Error::Backend(format!("eigendecomposition failed: {e}")))?;
    let mut worst: f64 = 0.0;
    for (i, lambda) in vals.iter().enumerate() {
        let v = vecs.column(i);
        let av = a.data.dot(&v);
        let mut err = 0.0;
        let mut norm = 0.0;
        for (x, y) in av.iter().zip(v.iter()) {
            err += (x - lambda * y).norm_sqr();
            norm += y.norm_sqr();
        }
        worst = worst.max(err.sqrt() / norm.sqrt().max(f64::MIN_POSITIVE));
    }
    let bound = tol * a.frobenius_norm();
    if worst > bound {
        return Err(Error::NotConverged {
            residual: worst,
            bound,
        });
    }
    Ok(Spectrum::from_values(vals.to_vec(), worst))
}

/// Unitary factor `Q` of the polar decomposition `A = Q P` via SVD.
///
/// Fails with [`Error::RankDeficient`] when the smallest singular value is
/// numerically zero, since the factor is then not determined by `A`.
pub fn unitary_polar_factor(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let (u, s, vt) = a
        .data
        .svd(true, true)
        .map_err(|e| Error::Backend(format!("svd failed: {e}")))?;
    let u = u.expect("u requested");
    let vt = vt.expect("vt requested");
    let sigma_max = s[0];
    let sigma_min = s[n - 1];
    if sigma_min <= (n as f64) * f64::EPSILON * sigma_max {
        return Err(Error::RankDeficient { sigma_min });
    }
    ComplexMatrix::from_array(u.dot(&vt))
}

/// Determinant by LU elimination with partial pivoting.
///
/// Deliberately independent of the LAPACK eigensolver so that
/// determinant-based identities provide a second route through the code.
pub fn determinant(a: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut m: Vec<Complex64> = a.data.iter().copied().collect();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_norm = m[k * n + k].norm();
        for r in (k + 1)..n {
            let candidate = m[r * n + k].norm();
            if candidate > pivot_norm {
                pivot_norm = candidate;
                pivot_row = r;
            }
        }
        if pivot_norm == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if pivot_row != k {
            for c in 0..n {
                m.swap(k * n + c, pivot_row * n + c);
            }
            det = -det;
        }
        let pivot = m[k * n + k];
        det *= pivot;
        for r in (k + 1)..n {
            let factor = m[r * n + k] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in k..n {
                let sub = factor * m[k * n + c];
                m[r * n + c] -= sub;
            }
        }
    }
    Ok(det)
}

/// Greedy nearest-neighbour matching between two equal-size multisets of
/// complex numbers; returns the largest paired distance.
///
/// `a` is consumed in its given order, so callers should pass canonically
/// sorted values for deterministic pairing.
pub fn multiset_match_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "multisets of size {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &x in a {
        let mut best: Option<(usize, f64)> = None;
        for (j, &y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("equal lengths guarantee a free slot");
        used[j] = true;
        worst = worst.max(d);
    }
    Ok(worst)
}
