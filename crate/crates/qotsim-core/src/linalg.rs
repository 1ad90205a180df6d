//! Dense complex linear algebra over small Hilbert spaces.
//!
//! Every operator and state in the toolkit lives here: matrices are dense,
//! row-major and double precision, sized for systems of at most a few qubits
//! (dim <= 64). Subsystem ordering is **big-endian** throughout the crate:
//! in `kron(a, b)` the first factor is the most significant subsystem, so a
//! composite basis index reads `i_a * dim_b + i_b`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hermiticity tolerance for validated matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Unit-trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// How negative an eigenvalue may be before a "PSD" input is rejected.
pub const PSD_TOL: f64 = 1e-10;
/// Squared-norm tolerance for state vectors.
pub const NORM_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from nested rows. Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let complex: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&complex)
    }

    /// Rank-1 matrix `a b†` from two column vectors.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x -= y;
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x *= factor;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from another matrix.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation from `M = M†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_deviation() <= tol
    }

    /// Largest deviation of `M† M` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        assert!(self.is_square());
        self.adjoint()
            .mul(self)
            .max_abs_diff(&Self::identity(self.rows))
    }

    pub fn require_unitary(&self, tol: f64) -> Result<()> {
        let dev = self.unitarity_deviation();
        if dev > tol {
            return Err(Error::NotUnitary(dev));
        }
        Ok(())
    }

    /// Averages the matrix with its adjoint, removing numerical skew.
    pub fn hermitized(&self) -> Self {
        self.add(&self.adjoint()).scale(Complex64::new(0.5, 0.0))
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Pure state on a 2^n-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Validates dimension (power of two) and normalization.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales the amplitudes to unit norm before validating.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 {
            return Err(Error::NotNormalized(norm_sq));
        }
        let inv = 1.0 / norm_sq.sqrt();
        Self::new(amplitudes.into_iter().map(|z| z * inv).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(amps).expect("basis state is normalized")
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Projector `|psi><psi|`.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// Tensor product, `self` as the most significant subsystem.
    pub fn kron(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        Self { amplitudes: amps }
    }

    /// Applies a (typically unitary) matrix, renormalizing is NOT performed.
    pub fn apply(&self, m: &ComplexMatrix) -> Result<Self> {
        if m.cols() != self.dim() {
            return Err(Error::DimensionMismatch(m.cols(), self.dim()));
        }
        Self::new(m.mul_vec(&self.amplitudes))
    }
}

/// Validated density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare(mat.rows(), mat.cols()));
        }
        let dev = mat.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let (evals, _) = eig_hermitian(&mat)?;
        let min = evals.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { mat })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        Self {
            mat: psi.projector(),
        }
    }

    /// Equal-weight mixture of density matrices.
    pub fn mixture(parts: &[&DensityMatrix]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyInput("mixture"));
        }
        let dim = parts[0].dim();
        let w = Complex64::new(1.0 / parts.len() as f64, 0.0);
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for p in parts {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch(p.dim(), dim));
            }
            acc = acc.add(&p.mat.scale(w));
        }
        Self::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let (evals, _) = eig_hermitian(&self.mat).expect("density matrix is Hermitian");
        evals
    }

    /// Conjugation `U rho U†`. Errors if `u` is not unitary within 1e-10.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.cols() != self.dim() {
            return Err(Error::DimensionMismatch(u.cols(), self.dim()));
        }
        u.require_unitary(1e-10)?;
        Self::new(u.mul(&self.mat).mul(&u.adjoint()))
    }

    /// Expectation value `Tr(M rho)` of a Hermitian operator; the real part.
    pub fn expectation(&self, m: &ComplexMatrix) -> f64 {
        m.mul(&self.mat).trace().re
    }
}

/// Tensor product with big-endian ordering: entry `((ia, ib), (ja, jb))` of the
/// result sits at row `ia * rows_b + ib`, column `ja * cols_b + jb`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ia in 0..a.rows() {
        for ja in 0..a.cols() {
            let f = a[(ia, ja)];
            if f == ZERO {
                continue;
            }
            for ib in 0..b.rows() {
                for jb in 0..b.cols() {
                    out[(ia * b.rows() + ib, ja * b.cols() + jb)] = f * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Tensor product of a list of operators, left to right (first = most significant).
pub fn kron_all(mats: &[&ComplexMatrix]) -> ComplexMatrix {
    assert!(!mats.is_empty());
    let mut acc = mats[0].clone();
    for m in &mats[1..] {
        acc = kron(&acc, m);
    }
    acc
}

fn decode_index(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0usize; dims.len()];
    for (s, &d) in dims.iter().enumerate().rev() {
        digits[s] = index % d;
        index /= d;
    }
    digits
}

/// Partial trace on a raw matrix; see [`partial_trace`] for conventions.
/// Does not require (or produce) a normalized state.
pub fn partial_trace_matrix(
    full: &ComplexMatrix,
    subsystem_dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix> {
    let total: usize = subsystem_dims.iter().product();
    if total != full.rows() || !full.is_square() {
        return Err(Error::SubsystemMismatch {
            dims: subsystem_dims.to_vec(),
            total: full.rows(),
        });
    }
    let valid = keep.windows(2).all(|w| w[0] < w[1])
        && keep.iter().all(|&k| k < subsystem_dims.len())
        && !keep.is_empty();
    if !valid {
        return Err(Error::InvalidSubsystems(keep.to_vec()));
    }

    let kept_dims: Vec<usize> = keep.iter().map(|&k| subsystem_dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);

    for i in 0..total {
        let di = decode_index(i, subsystem_dims);
        for j in 0..total {
            let dj = decode_index(j, subsystem_dims);
            // off-diagonal in any traced subsystem contributes nothing
            let traced_match = (0..subsystem_dims.len())
                .filter(|s| !keep.contains(s))
                .all(|s| di[s] == dj[s]);
            if !traced_match {
                continue;
            }
            let mut row = 0usize;
            let mut col = 0usize;
            for (pos, &k) in keep.iter().enumerate() {
                row = row * kept_dims[pos] + di[k];
                col = col * kept_dims[pos] + dj[k];
            }
            out[(row, col)] += full[(i, j)];
        }
    }
    Ok(out)
}

/// Partial trace over the subsystems NOT listed in `keep`.
///
/// `subsystem_dims` multiply to the full dimension; `keep` lists the retained
/// subsystem positions in ascending order. The result preserves the trace and
/// remains PSD.
pub fn partial_trace(
    rho: &DensityMatrix,
    subsystem_dims: &[usize],
    keep: &[usize],
) -> Result<DensityMatrix> {
    let out = partial_trace_matrix(rho.matrix(), subsystem_dims, keep)?;
    DensityMatrix::new(out.hermitized())
}

/// Jacobi eigensolver for Hermitian matrices.
///
/// Returns eigenvalues in descending order with matching orthonormal
/// eigenvectors as the columns of the second output. Errors if the input
/// deviates from Hermiticity by more than 1e-9.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.rows(), m.cols()));
    }
    let dev = m.hermiticity_deviation();
    if dev > 1e-9 {
        return Err(Error::NotHermitian(dev));
    }

    let n = m.rows();
    let mut a = m.hermitized();
    let mut v = ComplexMatrix::identity(n);

    let scale = a.max_abs().max(1.0);
    let tol = 1e-15 * scale;

    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= tol * 1e-2 {
                    continue;
                }
                let phase = apq / r; // e^{i phi}
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                let tau = (beta - alpha) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // J = [[c, s*phase], [-s*conj(phase)... ]] folded into row/col updates:
                // columns p,q: x' = c*x - s*conj(phase)*y ; y' = s*phase*x + c*y
                let sp = phase.conj() * s;
                for i in 0..n {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    a[(i, p)] = x * c - y * sp;
                    a[(i, q)] = x * sp.conj() + y * c;
                }
                for j in 0..n {
                    let x = a[(p, j)];
                    let y = a[(q, j)];
                    a[(p, j)] = x * c - y * sp.conj();
                    a[(q, j)] = x * sp + y * c;
                }
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = x * c - y * sp;
                    v[(i, q)] = x * sp.conj() + y * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());

    let evals: Vec<f64> = pairs.iter().map(|&(val, _)| val).collect();
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
        for i in 0..n {
            vecs[(i, new_col)] = v[(i, old_col)];
        }
    }
    Ok((evals, vecs))
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (evals, vecs) = eig_hermitian(m)?;
    let n = m.rows();
    let mut scaled = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let fv = Complex64::new(f(evals[j]), 0.0);
        for i in 0..n {
            scaled[(i, j)] = vecs[(i, j)] * fv;
        }
    }
    Ok(scaled.mul(&vecs.adjoint()))
}

/// Principal square root of a PSD Hermitian matrix.
///
/// Roundoff-scale eigenvalues are clipped to zero before the root (sqrt turns
/// 1e-16 noise into 1e-8 otherwise); anything below -1e-8 is rejected as
/// genuinely non-PSD.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (evals, _) = eig_hermitian(m)?;
    if let Some(&min) = evals.last() {
        if min < -1e-8 {
            return Err(Error::NotPsd(min));
        }
    }
    let cutoff = evals.first().copied().unwrap_or(0.0).max(0.0) * 1e-13;
    hermitian_function(m, |x| if x > cutoff { x.sqrt() } else { 0.0 })
}

/// Moore-Penrose inverse square root on the support of a PSD matrix.
pub fn matrix_inv_sqrt_psd(m: &ComplexMatrix, support_cutoff: f64) -> Result<ComplexMatrix> {
    let (evals, _) = eig_hermitian(m)?;
    if let Some(&min) = evals.last() {
        if min < -1e-8 {
            return Err(Error::NotPsd(min));
        }
    }
    hermitian_function(m, |x| {
        if x > support_cutoff {
            1.0 / x.sqrt()
        } else {
            0.0
        }
    })
}

/// Uhlmann fidelity `Tr sqrt(sqrt(rho) sigma sqrt(rho))`, in [0, 1].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let sqrt_rho = matrix_sqrt_psd(rho.matrix())?;
    let inner = sqrt_rho.mul(sigma.matrix()).mul(&sqrt_rho).hermitized();
    let (evals, _) = eig_hermitian(&inner)?;
    // sqrt amplifies eigensolver noise near zero (sqrt(1e-15) ~ 3e-8), so
    // zero modes are cut relative to the spectral scale before the root
    let cutoff = evals.first().copied().unwrap_or(0.0).max(0.0) * 1e-13;
    let f: f64 = evals
        .iter()
        .map(|&x| if x > cutoff { x.sqrt() } else { 0.0 })
        .sum();
    Ok(f.min(1.0))
}

/// Trace distance `(1/2) Tr |rho - sigma|`, in [0, 1].
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let diff = rho.matrix().sub(sigma.matrix());
    let (evals, _) = eig_hermitian(&diff)?;
    Ok(0.5 * evals.iter().map(|x| x.abs()).sum::<f64>())
}

/// Trace of the positive part of a Hermitian operator.
pub fn positive_part_trace(m: &ComplexMatrix) -> Result<f64> {
    let (evals, _) = eig_hermitian(m)?;
    Ok(evals.iter().filter(|&&x| x > 0.0).sum())
}

/// Purifications of `rho` and `sigma` with maximal overlap.
///
/// Each output lives on the doubled space `dim * dim` with the purifying
/// system appended as the least significant subsystem. Tracing out the
/// purifier recovers the inputs, and the overlap magnitude equals the
/// fidelity (Uhlmann's theorem).
pub fn maximal_overlap_purifications(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<(StateVector, StateVector)> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let d = rho.dim();
    let sqrt_rho = matrix_sqrt_psd(rho.matrix())?;
    let sqrt_sigma = matrix_sqrt_psd(sigma.matrix())?;

    // Polar-align the second purification: with M = sqrt(rho) sqrt(sigma) and
    // SVD M = P D Q†, the unitary W = Q P† maximizes Re Tr(M W) = Tr D = F.
    let m = sqrt_rho.mul(&sqrt_sigma);
    let (p, q) = singular_frames(&m)?;
    let w = q.mul(&p.adjoint());

    let first = vectorize(&sqrt_rho)?;
    let second = vectorize(&sqrt_sigma.mul(&w))?;
    debug_assert_eq!(first.dim(), d * d);
    Ok((first, second))
}

/// Left and right singular-vector frames (P, Q) of `m`, i.e. `m = P D Q†`.
fn singular_frames(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = m.rows();
    let gram = m.adjoint().mul(m).hermitized();
    let (_evals, q) = eig_hermitian(&gram)?;

    // left vectors: normalize m q_j, re-orthogonalizing so P stays unitary
    // even when tiny singular values make the raw columns drift
    let mut p_cols: Vec<Option<Vec<Complex64>>> = Vec::with_capacity(n);
    for j in 0..n {
        let raw = m.mul_vec(&q.column(j));
        let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            p_cols.push(None);
            continue;
        }
        let mut unit: Vec<Complex64> = raw.iter().map(|z| z / norm).collect();
        for _ in 0..2 {
            for prev in p_cols.iter().flatten() {
                let proj: Complex64 = prev.iter().zip(&unit).map(|(a, b)| a.conj() * b).sum();
                for (u, a) in unit.iter_mut().zip(prev) {
                    *u -= proj * a;
                }
            }
        }
        let renorm: f64 = unit.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if renorm < 0.5 {
            p_cols.push(None);
        } else {
            p_cols.push(Some(unit.iter().map(|z| z / renorm).collect()));
        }
    }

    // complete the kernel columns to an orthonormal frame
    for j in 0..n {
        if p_cols[j].is_some() {
            continue;
        }
        let mut best: Option<Vec<Complex64>> = None;
        let mut best_norm = 0.0;
        for e in 0..n {
            let mut cand = vec![ZERO; n];
            cand[e] = ONE;
            for other in p_cols.iter().flatten() {
                let proj: Complex64 = other.iter().zip(&cand).map(|(o, c)| o.conj() * c).sum();
                for (ci, oi) in cand.iter_mut().zip(other) {
                    *ci -= proj * oi;
                }
            }
            let norm: f64 = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > best_norm {
                best_norm = norm;
                best = Some(cand.iter().map(|z| z / norm).collect());
            }
        }
        p_cols[j] = Some(best.expect("orthogonal complement is nonempty"));
    }

    let cols: Vec<Vec<Complex64>> = p_cols.into_iter().map(Option::unwrap).collect();
    let p = ComplexMatrix::from_fn(n, n, |i, j| cols[j][i]);
    Ok((p, q))
}

/// `|psi> = sum_ij A_ij |i>|j>`, a purification when `A A† = rho`.
fn vectorize(a: &ComplexMatrix) -> Result<StateVector> {
    let d = a.rows();
    let mut amps = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            amps.push(a[(i, j)]);
        }
    }
    StateVector::new(amps)
}

/// Single-qubit computational and conjugate basis states.
pub mod qubit {
    use super::{ComplexMatrix, StateVector};
    use num_complex::Complex64;

    pub fn ket0() -> StateVector {
        StateVector::basis(2, 0)
    }

    pub fn ket1() -> StateVector {
        StateVector::basis(2, 1)
    }

    pub fn ket_plus() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap()
    }

    pub fn ket_minus() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)]).unwrap()
    }

    pub fn hadamard() -> ComplexMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(&[vec![h, h], vec![h, -h]])
    }

    pub fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]])
    }
}
