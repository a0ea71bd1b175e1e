//! Dense complex kernels: Hermitian fractional powers, pseudo-inverse,
//! simultaneous diagonalization and generalized eigenvalue extremes.
//!
//! Matrices here are small (a handful of antennas), so everything goes
//! through a full Hermitian eigendecomposition and the spectrum is cached on
//! [`HermitianPD`] for reuse by the solvers.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Eigenvalues at or below `PD_FLOOR * max_eigenvalue` are treated as zero.
pub const PD_FLOOR: f64 = 1e-12;
/// Smallest admissible ratio between the extreme singular values.
pub const RANK_TOL: f64 = 1e-10;
/// Admissible relative asymmetry `‖A − A†‖ / ‖A‖` for Hermitian input.
pub const TOL_SYM: f64 = 1e-10;

pub(crate) fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(CMat);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl ComplexMatrix {
    pub fn new(inner: CMat) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::BadDimension("matrix must be non-empty".into()));
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self(inner))
    }

    /// Builds a matrix from real entries given in row-major order.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_iterator(
            rows,
            cols,
            entries.iter().map(|&x| c64(x)),
        ))
    }

    /// Builds a matrix from complex rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(DMatrix::from_row_iterator(
            n,
            m,
            rows.iter().flat_map(|r| r.iter().copied()),
        ))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(CMat::zeros(rows, cols))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(CMat::from_fn(n, n, |i, j| {
            if i == j {
                c64(diag[i])
            } else {
                Complex64::default()
            }
        }))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        frobenius(&self.0)
    }

    /// Row-major entries as `[re, im]` pairs.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.rows())
            .map(|i| {
                (0..self.cols())
                    .map(|j| [self.0[(i, j)].re, self.0[(i, j)].im])
                    .collect()
            })
            .collect()
    }

    pub fn from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            .collect();
        Self::from_rows(&rows)
    }
}

impl From<HermitianPD> for ComplexMatrix {
    fn from(h: HermitianPD) -> Self {
        Self(h.matrix)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn real_trace(a: &CMat) -> f64 {
    a.trace().re
}

pub(crate) fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).map(|z| z * 0.5)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
///
/// The input is symmetrized first, so only its Hermitian part matters.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep the solver's order
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn reconstruct(values: &[f64], vectors: &CMat) -> CMat {
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    hermitian_part(&(scaled * vectors.adjoint()))
}

/// `f(A)` for a Hermitian `A`, mapping every eigenvalue through `f`.
pub fn hermitian_map(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (values, vectors) = hermitian_eigen(a);
    let mapped: Vec<f64> = values.into_iter().map(f).collect();
    reconstruct(&mapped, &vectors)
}

/// Power of a positive semidefinite matrix with negative eigenvalues clipped
/// to zero. Only meaningful for `p > 0`.
pub fn psd_power(a: &CMat, p: f64) -> CMat {
    hermitian_map(a, |x| x.max(0.0).powf(p))
}

/// A Hermitian positive-definite matrix with its cached eigendecomposition.
#[derive(Clone, PartialEq)]
pub struct HermitianPD {
    matrix: CMat,
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

impl fmt::Debug for HermitianPD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermitianPD")
            .field("eigenvalues", &self.eigenvalues)
            .field("matrix", &format_args!("{}", self.matrix))
            .finish()
    }
}

impl HermitianPD {
    pub fn new(a: &CMat) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "expected a non-empty square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("Hermitian matrix entries"));
        }
        let scale = frobenius(a);
        let asymmetry = frobenius(&(a - a.adjoint()));
        if asymmetry > TOL_SYM * scale {
            return Err(Error::NotHermitian {
                asymmetry: asymmetry / scale,
            });
        }
        let (eigenvalues, eigenvectors) = hermitian_eigen(a);
        let max = eigenvalues[0];
        let min = *eigenvalues.last().expect("non-empty");
        if !(max > 0.0) || min <= PD_FLOOR * max {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
                max_eigenvalue: max,
            });
        }
        Ok(Self {
            matrix: hermitian_part(a),
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn from_matrix(a: &ComplexMatrix) -> Result<Self> {
        Self::new(a.as_matrix())
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: CMat::identity(n, n),
            eigenvalues: vec![1.0; n],
            eigenvectors: CMat::identity(n, n),
        }
    }

    /// Builds from a spectrum that is already known to be positive.
    fn from_spectrum(mut eigenvalues: Vec<f64>, mut eigenvectors: CMat) -> Self {
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            let n = eigenvalues.len();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| eigenvalues[j].total_cmp(&eigenvalues[i]));
            eigenvectors = CMat::from_fn(n, n, |r, c| eigenvectors[(r, order[c])]);
            eigenvalues = order.iter().map(|&i| eigenvalues[i]).collect();
        }
        let matrix = reconstruct(&eigenvalues, &eigenvectors);
        Self {
            matrix,
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn to_complex_matrix(&self) -> ComplexMatrix {
        ComplexMatrix(self.matrix.clone())
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `U diag(λᵢᵖ) U†`, reusing the cached spectrum.
    pub fn power(&self, p: f64) -> HermitianPD {
        if p == 0.0 {
            return Self::identity(self.dim());
        }
        let values = self.eigenvalues.iter().map(|&l| l.powf(p)).collect();
        Self::from_spectrum(values, self.eigenvectors.clone())
    }

    pub fn inverse(&self) -> HermitianPD {
        self.power(-1.0)
    }

    /// `tr{Aᵖ}` straight from the spectrum.
    pub fn trace_power(&self, p: f64) -> f64 {
        self.eigenvalues.iter().map(|&l| l.powf(p)).sum()
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn scaled(&self, s: f64) -> Result<HermitianPD> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!("scale {s} must be positive")));
        }
        Ok(Self {
            matrix: self.matrix.map(|z| z * s),
            eigenvalues: self.eigenvalues.iter().map(|l| l * s).collect(),
            eigenvectors: self.eigenvectors.clone(),
        })
    }
}

/// `U diag(λᵢᵖ) U†` for a positive-definite `a`.
pub fn herm_power(a: &HermitianPD, p: f64) -> Result<HermitianPD> {
    if !p.is_finite() {
        return Err(Error::NonFinite("matrix power exponent"));
    }
    Ok(a.power(p))
}

/// Singular values, descending.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Fails with `RankDeficient` unless `a` has full column rank.
pub fn check_full_column_rank(a: &CMat) -> Result<()> {
    if a.nrows() < a.ncols() {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    let s = singular_values(a);
    let max = s[0];
    let min = s[s.len() - 1];
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if !(ratio > RANK_TOL) {
        return Err(Error::RankDeficient { ratio });
    }
    Ok(())
}

/// Moore–Penrose pseudo-inverse of a full-column-rank matrix.
pub fn pseudo_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_full_column_rank(a.as_matrix())?;
    let svd = a.as_matrix().clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut v_scaled = v_t.adjoint();
    for (j, &s) in svd.singular_values.iter().enumerate() {
        v_scaled.column_mut(j).scale_mut(1.0 / s);
    }
    Ok(ComplexMatrix(v_scaled * u.adjoint()))
}

/// Inverse of a Hermitian positive-definite matrix given as a plain matrix.
///
/// Definiteness is checked on the spectrum: nalgebra's complex Cholesky
/// takes complex square roots of negative pivots instead of failing.
pub(crate) fn inverse_hpd(a: &CMat) -> Result<CMat> {
    let (values, vectors) = hermitian_eigen(a);
    let max = values[0];
    let min = values[values.len() - 1];
    if !(max > 0.0) || !(min > PD_FLOOR * max) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    let inv: Vec<f64> = values.iter().map(|v| 1.0 / v).collect();
    Ok(reconstruct(&inv, &vectors))
}

/// A congruence `C` with `C†MC = diag(λ_M)` and `C†EC = diag(λ_E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDiag {
    pub c: ComplexMatrix,
    pub lambda_m: Vec<f64>,
    pub lambda_e: Vec<f64>,
}

impl SimDiag {
    /// `λ_E[i] / λ_M[i]`, the generalized eigenvalues of `(E, M)`.
    pub fn ratios(&self) -> Vec<f64> {
        self.lambda_e
            .iter()
            .zip(&self.lambda_m)
            .map(|(e, m)| e / m)
            .collect()
    }

    /// Scales column `i` of `C` by `s[i] > 0`; both spectra scale by `s[i]²`.
    pub fn rescale_columns(&self, s: &[f64]) -> Result<SimDiag> {
        if s.len() != self.lambda_m.len() {
            return Err(Error::DimensionMismatch("one scale per column".into()));
        }
        if s.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument("column scales must be positive".into()));
        }
        let mut c = self.c.as_matrix().clone();
        for (j, &x) in s.iter().enumerate() {
            c.column_mut(j).scale_mut(x);
        }
        Ok(SimDiag {
            c: ComplexMatrix(c),
            lambda_m: self.lambda_m.iter().zip(s).map(|(l, x)| l * x * x).collect(),
            lambda_e: self.lambda_e.iter().zip(s).map(|(l, x)| l * x * x).collect(),
        })
    }
}

/// `C = M^{-1/2} U` with `U` the eigenvectors of `M^{-1/2} E M^{-1/2}`, so that
/// `Λ_M = I` and `Λ_E` carries the generalized eigenvalues (descending).
pub fn simultaneous_diagonalize(m: &HermitianPD, e: &HermitianPD) -> Result<SimDiag> {
    if m.dim() != e.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            m.dim(),
            m.dim(),
            e.dim(),
            e.dim()
        )));
    }
    let m_isqrt = m.power(-0.5);
    let whitened = m_isqrt.matrix() * e.matrix() * m_isqrt.matrix();
    let (lambda_e, u) = hermitian_eigen(&whitened);
    if lambda_e.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: lambda_e[lambda_e.len() - 1],
            max_eigenvalue: lambda_e[0],
        });
    }
    Ok(SimDiag {
        c: ComplexMatrix(m_isqrt.matrix() * u),
        lambda_m: vec![1.0; m.dim()],
        lambda_e,
    })
}

/// `λ_min(E^{1/2} M^{-1} E^{1/2})`, which equals the smallest eigenvalue of
/// `M^{-1}E`.
pub fn min_generalized_eigenvalue(m: &HermitianPD, e: &HermitianPD) -> Result<f64> {
    if m.dim() != e.dim() {
        return Err(Error::DimensionMismatch("generalized eigenvalue pair".into()));
    }
    let e_half = e.power(0.5);
    let k = e_half.matrix() * m.inverse().matrix() * e_half.matrix();
    let (values, _) = hermitian_eigen(&k);
    Ok(values[values.len() - 1])
}
