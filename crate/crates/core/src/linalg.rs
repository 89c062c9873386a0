//! Dense complex linear algebra for small bipartite systems.
//!
//! Composite indices follow `i = i_A * d_B + i_B` throughout the crate, and the
//! partial transpose always acts on the stored B basis.

use std::fmt;
use std::ops::{Add, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed asymmetry `|X_ij - conj(X_ji)|`, scaled by `max(1, max |X_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed deviation of a normalized vector from unit norm.
pub const NORM_TOL: f64 = 1e-12;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Complex matrices and vectors as nested `[re, im]` arrays, row-major.
pub mod serde_complex {
    use super::{CMatrix, CVector};
    use num_complex::Complex64;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect()
    }

    pub fn rows_to_matrix(rows: &[Vec<Complex64>]) -> Result<CMatrix, String> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err("ragged matrix rows".into());
        }
        Ok(CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
            matrix_to_rows(m).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
            let rows = Vec::<Vec<Complex64>>::deserialize(d)?;
            rows_to_matrix(&rows).map_err(D::Error::custom)
        }
    }

    pub mod vector {
        use super::*;

        pub fn serialize<S: Serializer>(v: &CVector, s: S) -> Result<S::Ok, S::Error> {
            v.iter().copied().collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector, D::Error> {
            Ok(CVector::from_vec(Vec::<Complex64>::deserialize(d)?))
        }
    }
}

/// Shape tag of an operator or vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub enum Dims {
    Single(usize),
    Bipartite(usize, usize),
}

impl Dims {
    pub fn total(&self) -> usize {
        match *self {
            Dims::Single(d) => d,
            Dims::Bipartite(a, b) => a * b,
        }
    }

    pub fn bipartite(&self) -> Option<(usize, usize)> {
        match *self {
            Dims::Single(_) => None,
            Dims::Bipartite(a, b) => Some((a, b)),
        }
    }
}

impl From<Dims> for Vec<usize> {
    fn from(d: Dims) -> Self {
        match d {
            Dims::Single(n) => vec![n],
            Dims::Bipartite(a, b) => vec![a, b],
        }
    }
}

impl TryFrom<Vec<usize>> for Dims {
    type Error = String;

    fn try_from(v: Vec<usize>) -> std::result::Result<Self, String> {
        match v.as_slice() {
            [d] if *d > 0 => Ok(Dims::Single(*d)),
            [a, b] if *a > 0 && *b > 0 => Ok(Dims::Bipartite(*a, *b)),
            _ => Err(format!("dims must be [d] or [dA, dB] with positive entries, got {v:?}")),
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dims::Single(d) => write!(f, "{d}"),
            Dims::Bipartite(a, b) => write!(f, "{a}x{b}"),
        }
    }
}

/// Largest absolute entry of a complex matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest `|X_ij - conj(X_ji)|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// A square complex Hermitian matrix with its subsystem shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperator", into = "RawOperator")]
pub struct HermitianOperator {
    matrix: CMatrix,
    dims: Dims,
}

#[derive(Serialize, Deserialize)]
struct RawOperator {
    dims: Dims,
    entries: Vec<Vec<Complex64>>,
}

impl TryFrom<RawOperator> for HermitianOperator {
    type Error = Error;

    fn try_from(raw: RawOperator) -> Result<Self> {
        let matrix = serde_complex::rows_to_matrix(&raw.entries).map_err(|_| Error::NotSquare {
            rows: raw.entries.len(),
            cols: 0,
        })?;
        HermitianOperator::new(matrix, raw.dims)
    }
}

impl From<HermitianOperator> for RawOperator {
    fn from(op: HermitianOperator) -> Self {
        RawOperator {
            dims: op.dims,
            entries: serde_complex::matrix_to_rows(&op.matrix),
        }
    }
}

impl HermitianOperator {
    /// Validates shape and Hermiticity, then stores the exact Hermitian part.
    pub fn new(matrix: CMatrix, dims: Dims) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                found: matrix.nrows(),
            });
        }
        let defect = hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian { asymmetry: defect });
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
            dims,
        })
    }

    pub fn single(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        Self::new(matrix, Dims::Single(d))
    }

    pub fn bipartite(matrix: CMatrix, da: usize, db: usize) -> Result<Self> {
        Self::new(matrix, Dims::Bipartite(da, db))
    }

    /// Real symmetric operator from row-major entries.
    pub fn from_real_rows(rows: &[&[f64]], dims: Dims) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| c64(rows[i][j], 0.0)), dims)
    }

    /// Takes the Hermitian part of a matrix already known to be Hermitian up to rounding.
    pub(crate) fn from_hermitian_part(matrix: CMatrix, dims: Dims) -> Self {
        debug_assert_eq!(matrix.nrows(), dims.total());
        debug_assert_eq!(matrix.ncols(), dims.total());
        Self {
            matrix: hermitian_part(&matrix),
            dims,
        }
    }

    pub fn identity(dims: Dims) -> Self {
        let n = dims.total();
        Self {
            matrix: CMatrix::identity(n, n),
            dims,
        }
    }

    pub fn zeros(dims: Dims) -> Self {
        let n = dims.total();
        Self {
            matrix: CMatrix::zeros(n, n),
            dims,
        }
    }

    /// `|v><v|`, unnormalized.
    pub fn projector(v: &PureStateVector) -> Self {
        let a = v.amplitudes();
        Self::from_hermitian_part(a * a.adjoint(), v.dims())
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            matrix: CMatrix::from_fn(n, n, |i, j| if i == j { c64(values[i], 0.0) } else { c64(0.0, 0.0) }),
            dims: Dims::Single(n),
        }
    }

    pub fn with_dims(self, dims: Dims) -> Result<Self> {
        if dims.total() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dims.total(),
            });
        }
        Ok(Self { dims, ..self })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr(XY)`, the real inner product on Hermitian matrices.
    pub fn inner(&self, other: &HermitianOperator) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    /// `<v|X|v>` for a vector of matching length.
    pub fn expectation(&self, v: &CVector) -> f64 {
        v.dotc(&(&self.matrix * v)).re
    }

    /// `U X U^dagger`; `U` must be unitary for the result to stay meaningful.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::from_hermitian_part(u * &self.matrix * u.adjoint(), self.dims)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.scale(factor),
            dims: self.dims,
        }
    }

    /// Max-entry distance to another operator of the same size.
    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;

    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix + &rhs.matrix,
            dims: self.dims,
        }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;

    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix - &rhs.matrix,
            dims: self.dims,
        }
    }
}

/// A complex amplitude vector with its subsystem shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVector", into = "RawVector")]
pub struct PureStateVector {
    amplitudes: CVector,
    dims: Dims,
}

#[derive(Serialize, Deserialize)]
struct RawVector {
    dims: Dims,
    #[serde(with = "serde_complex::vector")]
    amplitudes: CVector,
}

impl TryFrom<RawVector> for PureStateVector {
    type Error = Error;

    fn try_from(raw: RawVector) -> Result<Self> {
        PureStateVector::new(raw.amplitudes, raw.dims)
    }
}

impl From<PureStateVector> for RawVector {
    fn from(v: PureStateVector) -> Self {
        RawVector {
            dims: v.dims,
            amplitudes: v.amplitudes,
        }
    }
}

impl PureStateVector {
    pub fn new(amplitudes: CVector, dims: Dims) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { amplitudes, dims })
    }

    pub fn single(amplitudes: CVector) -> Self {
        let d = amplitudes.len();
        Self {
            amplitudes,
            dims: Dims::Single(d),
        }
    }

    pub fn bipartite(amplitudes: CVector, da: usize, db: usize) -> Result<Self> {
        Self::new(amplitudes, Dims::Bipartite(da, db))
    }

    pub fn from_real(values: &[f64], dims: Dims) -> Result<Self> {
        Self::new(CVector::from_iterator(values.len(), values.iter().map(|&x| c64(x, 0.0))), dims)
    }

    /// Standard basis vector `e_k` of a single system.
    pub fn basis(d: usize, k: usize) -> Self {
        let mut amplitudes = CVector::zeros(d);
        amplitudes[k] = c64(1.0, 0.0);
        Self::single(amplitudes)
    }

    /// Rescales to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            amplitudes: self.amplitudes.unscale(norm),
            dims: self.dims,
        })
    }

    /// Errors unless the norm is within `tol` of one.
    pub fn require_unit(&self, tol: f64) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm });
        }
        Ok(())
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureStateVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn apply(&self, u: &CMatrix) -> Self {
        Self {
            amplitudes: u * &self.amplitudes,
            dims: self.dims,
        }
    }
}

/// Tensor product. Composite operands are treated as a single system of
/// their total dimension; the result is tagged `(d_left, d_right)`.
pub trait Kron {
    fn kron(&self, other: &Self) -> Self;
}

impl Kron for HermitianOperator {
    fn kron(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
            dims: Dims::Bipartite(self.dim(), other.dim()),
        }
    }
}

impl Kron for PureStateVector {
    fn kron(&self, other: &Self) -> Self {
        Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            dims: Dims::Bipartite(self.len(), other.len()),
        }
    }
}

/// Partial transpose on the B factor:
/// `Γ(X)[(a,b),(a',b')] = X[(a,b'),(a',b)]`.
pub fn partial_transpose(x: &HermitianOperator) -> Result<HermitianOperator> {
    let (da, db) = x.dims().bipartite().ok_or(Error::NotBipartite)?;
    let m = x.matrix();
    let out = CMatrix::from_fn(da * db, da * db, |row, col| {
        let (ia, ib) = (row / db, row % db);
        let (ja, jb) = (col / db, col % db);
        m[(ia * db + jb, ja * db + ib)]
    });
    Ok(HermitianOperator {
        matrix: out,
        dims: x.dims(),
    })
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Eigenvector for the smallest eigenvalue.
    pub fn min_vector(&self) -> CVector {
        self.vectors.column(self.values.len() - 1).into_owned()
    }
}

pub fn eig_hermitian(x: &HermitianOperator) -> EigenDecomposition {
    let n = x.dim();
    let eig = x.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    EigenDecomposition { values, vectors }
}

/// Eigenvalues only, descending.
pub fn eigenvalues(x: &HermitianOperator) -> Vec<f64> {
    let mut values: Vec<f64> = x.matrix().clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Schmidt form of `v / ||v||`.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Descending, `min(d_A, d_B)` entries.
    pub coefficients: Vec<f64>,
    pub left: Vec<CVector>,
    pub right: Vec<CVector>,
    pub dims: (usize, usize),
}

impl SchmidtDecomposition {
    /// `sum_k lambda_k left_k ⊗ right_k`.
    pub fn reconstruct(&self) -> CVector {
        let (da, db) = self.dims;
        let mut out = CVector::zeros(da * db);
        for ((lambda, l), r) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            out += l.kronecker(r).scale(*lambda);
        }
        out
    }
}

pub fn schmidt(v: &PureStateVector) -> Result<SchmidtDecomposition> {
    let (da, db) = v.dims().bipartite().ok_or(Error::NotBipartite)?;
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let amps = v.amplitudes();
    let coeffs = CMatrix::from_fn(da, db, |i, j| amps[i * db + j] / norm);
    let svd = coeffs.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let d = da.min(db);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    Ok(SchmidtDecomposition {
        coefficients: order.iter().map(|&k| svd.singular_values[k]).collect(),
        left: order.iter().map(|&k| u.column(k).into_owned()).collect(),
        // C = U S V^dagger, so the B factor of term k is row k of V^dagger.
        right: order.iter().map(|&k| v_t.row(k).transpose()).collect(),
        dims: (da, db),
    })
}

/// Extends orthonormal columns to a full orthonormal basis of `C^d`, drawing
/// from the standard basis by largest residual.
fn complete_basis(mut cols: Vec<CVector>, d: usize) -> CMatrix {
    let mut candidates: Vec<usize> = (0..d).collect();
    while cols.len() < d {
        let residual = |k: usize| {
            let mut r = CVector::zeros(d);
            r[k] = c64(1.0, 0.0);
            for _ in 0..2 {
                for b in &cols {
                    let proj = b.dotc(&r);
                    r -= b * proj;
                }
            }
            r
        };
        let (pos, best) = candidates
            .iter()
            .enumerate()
            .map(|(pos, &k)| (pos, residual(k)))
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("candidates remain while basis is incomplete");
        candidates.remove(pos);
        let n = best.norm();
        cols.push(best.unscale(n));
    }
    CMatrix::from_columns(&cols)
}

/// Overlap parameter and local orthonormal frame for a pair of unit vectors.
///
/// Returns `alpha = 1 - |<v1|v2>|^2` and a unitary whose first column is `v1`
/// and in which `v2 = phase * (sqrt(1 - alpha), sqrt(alpha), 0, ...)`.
fn local_frame(v1: &CVector, v2: &CVector) -> (f64, CMatrix) {
    let d = v1.len();
    let overlap = v1.dotc(v2);
    let r = overlap.norm();
    let phase = if r > 0.0 { overlap / r } else { c64(1.0, 0.0) };
    let perp = v2 - v1 * overlap;
    let perp_sq = perp.norm_squared();
    let alpha = if perp_sq < 0.5 { perp_sq } else { 1.0 - r * r }.clamp(0.0, 1.0);
    let mut cols = vec![v1.clone()];
    let pn = perp_sq.sqrt();
    if pn > 1e-13 {
        cols.push((perp * phase.conj()).unscale(pn));
    }
    (alpha, complete_basis(cols, d))
}

/// Two product pure states rotated into the 2x2 canonical block.
///
/// In the canonical bases `rho_1 = |0><0| ⊗ |0><0|` and
/// `rho_2 = |a><a| ⊗ |b><b|` with `a = (sqrt(1-alpha1), sqrt(alpha1))`,
/// `b = (sqrt(1-alpha2), sqrt(alpha2))`, padded with zeros.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
    /// `beta1 beta2 / (alpha1 alpha2)`, absent when `alpha1 alpha2 = 0`.
    pub xi: Option<f64>,
    /// Columns are the canonical A basis in user coordinates.
    #[serde(with = "serde_complex::matrix")]
    pub basis_a: CMatrix,
    #[serde(with = "serde_complex::matrix")]
    pub basis_b: CMatrix,
    pub dims: (usize, usize),
    /// Dimensions beyond the 2x2 block on each side.
    pub padding: (usize, usize),
}

impl CanonicalForm {
    /// Canonical form with identity bases.
    pub fn from_alphas(alpha1: f64, alpha2: f64, da: usize, db: usize) -> Result<Self> {
        for (name, a) in [("alpha1", alpha1), ("alpha2", alpha2)] {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::OutOfRange {
                    name,
                    value: a,
                    range: "[0, 1]",
                });
            }
        }
        for d in [da, db] {
            if d < 2 {
                return Err(Error::DimensionTooSmall(d));
            }
        }
        Ok(Self::assemble(
            alpha1,
            alpha2,
            CMatrix::identity(da, da),
            CMatrix::identity(db, db),
        ))
    }

    fn assemble(alpha1: f64, alpha2: f64, basis_a: CMatrix, basis_b: CMatrix) -> Self {
        let beta1 = (alpha1 * (1.0 - alpha1)).sqrt();
        let beta2 = (alpha2 * (1.0 - alpha2)).sqrt();
        let xi = (alpha1 * alpha2 > 0.0).then(|| beta1 * beta2 / (alpha1 * alpha2));
        let (da, db) = (basis_a.nrows(), basis_b.nrows());
        Self {
            alpha1,
            alpha2,
            beta1,
            beta2,
            gamma: alpha1 + alpha2,
            xi,
            basis_a,
            basis_b,
            dims: (da, db),
            padding: (da - 2, db - 2),
        }
    }

    pub fn bipartite_dims(&self) -> Dims {
        Dims::Bipartite(self.dims.0, self.dims.1)
    }

    /// `x = 1 - alpha1`, `y = 1 - alpha2`.
    pub fn overlaps(&self) -> (f64, f64) {
        (1.0 - self.alpha1, 1.0 - self.alpha2)
    }

    /// `V_A ⊗ V_B`, mapping canonical coordinates to user coordinates.
    pub fn local_basis(&self) -> CMatrix {
        self.basis_a.kronecker(&self.basis_b)
    }

    /// Canonical-basis vectors `(a1 ⊗ b1, a2 ⊗ b2)`.
    pub fn canonical_vectors(&self) -> (PureStateVector, PureStateVector) {
        let (da, db) = self.dims;
        let local = |d: usize, alpha: f64| {
            let mut v = CVector::zeros(d);
            v[0] = c64((1.0 - alpha).sqrt(), 0.0);
            v[1] = c64(alpha.sqrt(), 0.0);
            PureStateVector::single(v)
        };
        let first = PureStateVector::basis(da, 0).kron(&PureStateVector::basis(db, 0));
        let second = local(da, self.alpha1).kron(&local(db, self.alpha2));
        (first, second)
    }

    /// `rho_1`, `rho_2` in the canonical bases, full dimension.
    pub fn canonical_states(&self) -> (HermitianOperator, HermitianOperator) {
        let (v1, v2) = self.canonical_vectors();
        (HermitianOperator::projector(&v1), HermitianOperator::projector(&v2))
    }

    pub fn to_user(&self, x: &HermitianOperator) -> HermitianOperator {
        x.conjugate_by(&self.local_basis())
    }

    pub fn to_canonical(&self, x: &HermitianOperator) -> HermitianOperator {
        x.conjugate_by(&self.local_basis().adjoint())
    }
}

/// Rotates `rho_1 = |a1 b1><a1 b1|`, `rho_2 = |a2 b2><a2 b2|` into canonical form.
///
/// Overlap phases are absorbed so `<a1|a2>` and `<b1|b2>` become real and
/// nonnegative in the canonical bases.
pub fn canonical_reduction(
    a1: &PureStateVector,
    a2: &PureStateVector,
    b1: &PureStateVector,
    b2: &PureStateVector,
) -> Result<CanonicalForm> {
    let check = |v: &PureStateVector, expected: usize| -> Result<()> {
        if v.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: v.len(),
            });
        }
        v.require_unit(1e-9)
    };
    let (da, db) = (a1.len(), b1.len());
    for d in [da, db] {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
    }
    check(a1, da)?;
    check(a2, da)?;
    check(b1, db)?;
    check(b2, db)?;
    let unit = |v: &PureStateVector| v.amplitudes().unscale(v.norm());
    let (alpha1, basis_a) = local_frame(&unit(a1), &unit(a2));
    let (alpha2, basis_b) = local_frame(&unit(b1), &unit(b2));
    if alpha1 <= 1e-12 && alpha2 <= 1e-12 {
        return Err(Error::IdenticalStates);
    }
    Ok(CanonicalForm::assemble(alpha1, alpha2, basis_a, basis_b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_projector() -> HermitianOperator {
        let h = 0.5;
        HermitianOperator::from_real_rows(
            &[&[h, 0., 0., h], &[0., 0., 0., 0.], &[0., 0., 0., 0.], &[h, 0., 0., h]],
            Dims::Bipartite(2, 2),
        )
        .unwrap()
    }

    #[test]
    fn kron_identities() {
        let i2 = HermitianOperator::identity(Dims::Single(2));
        let i4 = i2.kron(&i2);
        assert_eq!(i4.matrix(), &CMatrix::identity(4, 4));
        assert_eq!(i4.dims(), Dims::Bipartite(2, 2));

        let e = PureStateVector::basis(2, 0);
        let ee = e.kron(&e);
        assert_eq!(ee.amplitudes()[0], c64(1.0, 0.0));
        assert!(ee.amplitudes().iter().skip(1).all(|z| z.norm() == 0.0));

        let p = HermitianOperator::diag(&[1.0, 0.0]).kron(&HermitianOperator::diag(&[0.0, 1.0]));
        let expected = HermitianOperator::diag(&[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(p.matrix(), expected.matrix());
    }

    #[test]
    fn partial_transpose_of_bell_projector() {
        let g = partial_transpose(&bell_projector()).unwrap();
        let h = 0.5;
        let expected = HermitianOperator::from_real_rows(
            &[&[h, 0., 0., 0.], &[0., 0., h, 0.], &[0., h, 0., 0.], &[0., 0., 0., h]],
            Dims::Bipartite(2, 2),
        )
        .unwrap();
        assert_eq!(g.max_abs_diff(&expected), 0.0);
    }

    #[test]
    fn partial_transpose_needs_bipartite() {
        let x = HermitianOperator::identity(Dims::Single(4));
        assert_eq!(partial_transpose(&x), Err(Error::NotBipartite));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c64(0.3, 0.0);
        assert!(matches!(HermitianOperator::single(m), Err(Error::NotHermitian { .. })));
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(HermitianOperator::single(rect), Err(Error::NotSquare { .. })));
        assert!(matches!(
            HermitianOperator::bipartite(CMatrix::identity(3, 3), 2, 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eig_simple_cases() {
        let e = eig_hermitian(&HermitianOperator::diag(&[3.0, 1.0, 2.0]));
        assert_eq!(e.values.len(), 3);
        for (got, want) in e.values.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let e = eig_hermitian(&HermitianOperator::identity(Dims::Single(4)));
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn eig_residuals_complex() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c64(2.0, 0.0),
                c64(0.5, -1.0),
                c64(0.0, 0.3),
                c64(0.5, 1.0),
                c64(-1.0, 0.0),
                c64(0.2, 0.0),
                c64(0.0, -0.3),
                c64(0.2, 0.0),
                c64(0.7, 0.0),
            ],
        );
        let x = HermitianOperator::single(m).unwrap();
        let e = eig_hermitian(&x);
        let scale = max_abs(x.matrix());
        for k in 0..3 {
            let v = e.vectors.column(k).into_owned();
            let r = x.matrix() * &v - v.scale(e.values[k]);
            assert!(r.norm() <= 1e-10 * scale);
        }
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn schmidt_examples() {
        let e0 = PureStateVector::basis(2, 0);
        let e1 = PureStateVector::basis(2, 1);
        let s = schmidt(&e0.kron(&e0)).unwrap();
        assert!((s.coefficients[0] - 1.0).abs() < 1e-14 && s.coefficients[1].abs() < 1e-14);

        let r = 0.5_f64.sqrt();
        let bell = PureStateVector::from_real(&[r, 0.0, 0.0, r], Dims::Bipartite(2, 2)).unwrap();
        let s = schmidt(&bell).unwrap();
        assert!(s.coefficients.iter().all(|l| (l - r).abs() < 1e-14));

        let v = PureStateVector::from_real(&[0.8_f64.sqrt(), 0.0, 0.0, 0.2_f64.sqrt()], Dims::Bipartite(2, 2)).unwrap();
        let s = schmidt(&v).unwrap();
        assert!((s.coefficients[0] - 0.8_f64.sqrt()).abs() < 1e-14);
        assert!((s.coefficients[1] - 0.2_f64.sqrt()).abs() < 1e-14);
        assert!((s.reconstruct() - v.amplitudes()).norm() < 1e-12);

        assert_eq!(schmidt(&e0.kron(&e1).scale_to_zero()).unwrap_err(), Error::ZeroVector);
    }

    impl PureStateVector {
        fn scale_to_zero(&self) -> Self {
            Self {
                amplitudes: self.amplitudes.scale(0.0),
                dims: self.dims,
            }
        }
    }

    #[test]
    fn canonical_reduction_examples() {
        let e = |d, k| PureStateVector::basis(d, k);
        let cf = canonical_reduction(&e(2, 0), &e(2, 0), &e(2, 0), &e(2, 1)).unwrap();
        assert!(cf.alpha1.abs() < 1e-15);
        assert!((cf.alpha2 - 1.0).abs() < 1e-15);

        let a1 = e(3, 0);
        let a2 = PureStateVector::from_real(&[0.6, 0.8, 0.0], Dims::Single(3)).unwrap();
        let cf = canonical_reduction(&a1, &a2, &e(2, 0), &e(2, 1)).unwrap();
        assert!((cf.alpha1 - 0.64).abs() < 1e-14);
        assert_eq!(cf.padding, (1, 0));

        for theta in [0.3, 1.7, -2.9] {
            let z = Complex64::from_polar(0.6, theta);
            let a2 = PureStateVector::single(CVector::from_vec(vec![z, c64(0.8, 0.0), c64(0.0, 0.0)]));
            let cf = canonical_reduction(&a1, &a2, &e(2, 0), &e(2, 1)).unwrap();
            assert!((cf.alpha1 - 0.64).abs() < 1e-14);
            // canonical coordinates of a2 are real up to one global phase
            let coords = cf.basis_a.adjoint() * a2.amplitudes();
            let phase = coords[0] / coords[0].norm();
            let aligned = coords.map(|c| c * phase.conj());
            assert!((aligned[0] - c64(0.6, 0.0)).norm() < 1e-14);
            assert!((aligned[1] - c64(0.8, 0.0)).norm() < 1e-14);
            assert!(aligned[2].norm() < 1e-14);
        }
    }

    #[test]
    fn canonical_reduction_identical_states() {
        let e = |d, k| PureStateVector::basis(d, k);
        assert_eq!(
            canonical_reduction(&e(2, 0), &e(2, 0), &e(3, 1), &e(3, 1)).unwrap_err(),
            Error::IdenticalStates
        );
    }

    #[test]
    fn canonical_reduction_rejects_bad_input() {
        let e = |d, k| PureStateVector::basis(d, k);
        let long = PureStateVector::from_real(&[1.0, 1.0], Dims::Single(2)).unwrap();
        assert!(matches!(
            canonical_reduction(&e(2, 0), &long, &e(2, 0), &e(2, 1)),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            canonical_reduction(&e(2, 0), &e(3, 0), &e(2, 0), &e(2, 1)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            canonical_reduction(&e(1, 0), &e(1, 0), &e(2, 0), &e(2, 1)).unwrap_err(),
            Error::DimensionTooSmall(1)
        );
    }

    #[test]
    fn operator_json_shape() {
        let x = HermitianOperator::diag(&[1.0, -0.5]);
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, r#"{"dims":[2],"entries":[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[-0.5,0.0]]]}"#);
        let back: HermitianOperator = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
        let bad = r#"{"dims":[2],"entries":[[[1.0,0.0],[0.3,0.0]],[[0.0,0.0],[-0.5,0.0]]]}"#;
        assert!(serde_json::from_str::<HermitianOperator>(bad).is_err());
    }
}
