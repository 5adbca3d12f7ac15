//! Dense complex matrices.
//!
//! Everything in this crate lives in at most a 32-dimensional Hilbert space
//! (16×16 for two-qubit Choi matrices), so storage is a flat row-major `Vec`
//! and every algorithm is the textbook one.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute tolerance on `max |a - a†|` for a matrix to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_JACOBI_SWEEPS: usize = 100;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty matrix {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Argument(format!("non-finite entry at flat index {bad}")));
        }
        Ok(ComplexMatrix {
            rows,
            cols,
            data: entries,
        })
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Column vector (ket).
    pub fn ket(entries: Vec<C64>) -> Result<Self> {
        let n = entries.len();
        Self::new(n, 1, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Computational basis ket `|index⟩` of dimension `dim`.
    pub fn basis_ket(dim: usize, index: usize) -> Self {
        let mut m = Self::zeros(dim, 1);
        m.data[index] = ONE;
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, value: C64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn try_matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &ComplexMatrix, f: impl Fn(C64, C64) -> C64) -> Result<ComplexMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn try_add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, factor: C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> ComplexMatrix {
        self.scale(C64::new(factor, 0.0))
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn kron(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        kron(self, rhs)
    }

    pub fn trace(&self) -> Result<C64> {
        trace(self)
    }

    /// Largest entrywise modulus of `self - other`; `inf` on shape mismatch.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |a - a†|`, or `inf` for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let prod = &self.dagger() * self;
        prod.max_abs_diff(&ComplexMatrix::identity(self.rows)) <= tol
    }

    /// `|self⟩⟨self|` for a column vector.
    pub fn projector(&self) -> ComplexMatrix {
        self * &self.dagger()
    }

    pub fn is_vector(&self) -> bool {
        self.cols == 1
    }

    pub fn norm(&self) -> f64 {
        self.frobenius_norm()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on a shape mismatch; use [`ComplexMatrix::try_matmul`] for untrusted shapes.
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        self.try_matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.data[i * self.cols + j];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product; the left operand is the more significant index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a.data[i * a.cols + j];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out.data[(i * b.rows + k) * cols + (j * b.cols + l)] = aij * b.data[k * b.cols + l];
                }
            }
        }
    }
    out
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.dagger()
}

pub fn trace(a: &ComplexMatrix) -> Result<C64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "trace of non-square {}x{} matrix",
            a.rows, a.cols
        )));
    }
    Ok((0..a.rows).map(|i| a.data[i * a.cols + i]).sum())
}

/// `⟨a|b⟩` for column vectors of equal length.
pub fn inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    debug_assert!(a.is_vector() && b.is_vector() && a.rows == b.rows);
    a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨psi|op|psi⟩`.
pub fn expectation(op: &ComplexMatrix, psi: &ComplexMatrix) -> C64 {
    inner(psi, &(op * psi))
}

/// Partial trace over the second factor of a `(d1*d2)`-dimensional operator.
pub fn partial_trace_second(rho: &ComplexMatrix, d1: usize, d2: usize) -> Result<ComplexMatrix> {
    if rho.rows != d1 * d2 || !rho.is_square() {
        return Err(Error::Dimension(format!(
            "partial trace of {}x{} as {d1}x{d2}",
            rho.rows, rho.cols
        )));
    }
    let n = d1 * d2;
    let mut out = ComplexMatrix::zeros(d1, d1);
    for i in 0..d1 {
        for j in 0..d1 {
            let mut acc = ZERO;
            for k in 0..d2 {
                acc += rho.data[(i * d2 + k) * n + (j * d2 + k)];
            }
            out.data[i * d1 + j] = acc;
        }
    }
    Ok(out)
}

/// Spectral decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Returns eigenvalues in descending order together with a unitary whose
/// columns are the matching eigenvectors.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigenproblem of non-square {}x{} matrix",
            a.rows, a.cols
        )));
    }
    let defect = a.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::Precondition(format!(
            "matrix is not Hermitian (max |a - a†| = {defect:.3e})"
        )));
    }
    let n = a.rows;
    // Work on the exactly Hermitian part.
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let z = (a.data[i * n + j] + a.data[j * n + i].conj()) * 0.5;
            m.data[i * n + j] = z;
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.data[i * n + j].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.data[p * n + q];
                let mag = apq.norm();
                if mag <= 1e-300 || mag <= 1e-18 * scale {
                    continue;
                }
                // Rotate the phase of a_pq away so the 2x2 block is real symmetric.
                let phase = apq / mag;
                let phase_c = phase.conj();
                for k in 0..n {
                    m.data[k * n + q] *= phase_c;
                }
                for k in 0..n {
                    m.data[q * n + k] *= phase;
                }
                for k in 0..n {
                    v.data[k * n + q] *= phase_c;
                }

                let app = m.data[p * n + p].re;
                let aqq = m.data[q * n + q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = m.data[k * n + p];
                    let akq = m.data[k * n + q];
                    m.data[k * n + p] = akp * c - akq * s;
                    m.data[k * n + q] = akp * s + akq * c;
                }
                for k in 0..n {
                    let apk = m.data[p * n + k];
                    let aqk = m.data[q * n + k];
                    m.data[p * n + k] = apk * c - aqk * s;
                    m.data[q * n + k] = apk * s + aqk * c;
                }
                for k in 0..n {
                    let vkp = v.data[k * n + p];
                    let vkq = v.data[k * n + q];
                    v.data[k * n + p] = vkp * c - vkq * s;
                    v.data[k * n + q] = vkp * s + vkq * c;
                }
                m.data[p * n + q] = ZERO;
                m.data[q * n + p] = ZERO;
                m.data[p * n + p].im = 0.0;
                m.data[q * n + q].im = 0.0;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.data[j * n + j].re.total_cmp(&m.data[i * n + i].re));
    let values = order.iter().map(|&i| m.data[i * n + i].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors.data[k * n + dst] = v.data[k * n + src];
        }
    }
    Ok((values, vectors))
}

/// Real eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(a).map(|(values, _)| values)
}

/// `f(a)` for Hermitian `a`, applied through the spectral decomposition.
pub fn hermitian_function(a: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(a)?;
    let mapped: Vec<C64> = values.iter().map(|&x| C64::new(f(x), 0.0)).collect();
    Ok(&(&vectors * &ComplexMatrix::diagonal(&mapped)) * &vectors.dagger())
}
