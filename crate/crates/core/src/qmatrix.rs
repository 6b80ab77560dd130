//! Dense complex matrices for few-qubit systems.
//!
//! Qubit 0 is the most significant tensor factor: for `n` qubits the bit of
//! qubit `k` in a basis index is `(index >> (n - 1 - k)) & 1`. Every routine
//! here is a pure function of its inputs.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Eigenvalues below `-PSD_TOLERANCE` mark a matrix as not positive semidefinite.
pub const PSD_TOLERANCE: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds a square matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_real_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_major(dim, &c)
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        Self::from_fn(d, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO })
    }

    /// Projector `|v><v|`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn from_inner(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Number of qubits when the dimension is a power of two.
    pub fn n_qubits(&self) -> Result<usize> {
        qubit_count(self.dim())
    }

    pub fn row_major(&self) -> Vec<C64> {
        let d = self.dim();
        (0..d * d).map(|k| self.0[(k / d, k % d)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute entry difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        Self(&u.0 * &self.0 * u.0.adjoint())
    }

    /// `<v| A |v>` for a column vector `v`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            let mut row = ZERO;
            for j in 0..d {
                row += self.0[(i, j)] * v[j];
            }
            acc += v[i].conj() * row;
        }
        acc
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        tensor(self, other)
    }

    /// Hermitian eigendecomposition; see [`SpectralDecomposition`].
    pub fn eigh(&self) -> SpectralDecomposition {
        SpectralDecomposition::of(self)
    }

    pub fn eigvalsh(&self) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(self.hermitian_part().0)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Pauli axis selector; `X`, `Y`, `Z` are the paper-independent labels 1, 2, 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

pub fn pauli(axis: Axis) -> ComplexMatrix {
    match axis {
        Axis::X => ComplexMatrix::from_row_major(2, &[ZERO, ONE, ONE, ZERO]),
        Axis::Y => ComplexMatrix::from_row_major(2, &[ZERO, -I, I, ZERO]),
        Axis::Z => ComplexMatrix::from_row_major(2, &[ONE, ZERO, ZERO, -ONE]),
    }
    .expect("2x2 literal")
}

/// `σ_axis ⊗ σ_axis ⊗ ... ` (`n` factors).
pub fn pauli_string(axis: Axis, n: usize) -> ComplexMatrix {
    let p = pauli(axis);
    (1..n).fold(p.clone(), |acc, _| tensor(&acc, &p))
}

/// Embeds a single-qubit operator on `qubit` of an `n`-qubit register.
pub fn embed(op: &ComplexMatrix, qubit: usize, n: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let mut out = if qubit == 0 { op.clone() } else { id.clone() };
    for k in 1..n {
        out = tensor(&out, if k == qubit { op } else { &id });
    }
    out
}

pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

pub fn tensor_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| tensor(&acc, f))
}

/// Transposes the tensor factor of `qubit`. Involutive, trace-preserving.
pub fn partial_transpose(rho: &ComplexMatrix, qubit: usize) -> Result<ComplexMatrix> {
    let n = rho.n_qubits()?;
    if qubit >= n {
        return Err(Error::InvalidQubit { index: qubit, n_qubits: n });
    }
    let mask = 1usize << (n - 1 - qubit);
    Ok(ComplexMatrix::from_fn(rho.dim(), |i, j| {
        let (bi, bj) = (i & mask, j & mask);
        let i2 = (i & !mask) | bj;
        let j2 = (j & !mask) | bi;
        rho[(i2, j2)]
    }))
}

/// Traces out every qubit not listed in `keep`. Kept qubits retain their
/// relative order.
pub fn partial_trace(rho: &ComplexMatrix, keep: &[usize]) -> Result<ComplexMatrix> {
    let n = rho.n_qubits()?;
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&q| q >= n) {
        return Err(Error::InvalidQubit { index: bad, n_qubits: n });
    }
    let kept_mask: usize = kept.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    let compress = |idx: usize| -> usize {
        kept.iter()
            .fold(0usize, |acc, &q| (acc << 1) | ((idx >> (n - 1 - q)) & 1))
    };
    let dim = rho.dim();
    let mut out = ComplexMatrix::zeros(1 << kept.len());
    for i in 0..dim {
        for j in 0..dim {
            if (i & !kept_mask) == (j & !kept_mask) {
                out[(compress(i), compress(j))] += rho[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix with a reproducible gauge:
/// eigenvalues ascending, each eigenvector rotated so that its first
/// largest-magnitude component is real and positive.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn of(a: &ComplexMatrix) -> Self {
        let eig = SymmetricEigen::new(a.hermitian_part().0);
        let d = a.dim();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]).then(x.cmp(&y)));
        let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vecs = DMatrix::<C64>::zeros(d, d);
        for (col, &k) in order.iter().enumerate() {
            let v: DVector<C64> = eig.eigenvectors.column(k).into_owned();
            let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = v
                .iter()
                .position(|z| z.norm() >= vmax * (1.0 - 1e-10))
                .unwrap_or(0);
            let phase = if v[pivot].norm() > 0.0 {
                v[pivot].conj() / v[pivot].norm()
            } else {
                ONE
            };
            let norm = v.norm();
            for r in 0..d {
                vecs[(r, col)] = v[r] * phase / norm;
            }
        }
        Self {
            eigenvalues,
            eigenvectors: ComplexMatrix(vecs),
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.0.column(k).iter().copied().collect()
    }

    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.eigenvectors.0;
        let d = self.dim();
        let mut scaled = v.clone();
        for c in 0..d {
            let s = f(self.eigenvalues[c]);
            for r in 0..d {
                scaled[(r, c)] *= s;
            }
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| C64::new(x, 0.0))
    }
}

fn check_psd(eigs: &[f64]) -> Result<()> {
    match eigs.first() {
        Some(&m) if m < -PSD_TOLERANCE => Err(Error::NegativeEigenvalue(m)),
        _ => Ok(()),
    }
}

/// Square root of a PSD matrix with eigenvalues clamped at zero.
pub fn sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let sd = a.eigh();
    check_psd(&sd.eigenvalues)?;
    Ok(sd.map(|x| C64::new(x.max(0.0).sqrt(), 0.0)))
}

/// `-Σ x log2 x` over a probability-like list, with `0 log 0 = 0`.
pub fn entropy_of_spectrum(eigs: &[f64]) -> f64 {
    eigs.iter()
        .map(|&x| x.max(0.0))
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.log2())
        .sum()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let eigs = rho.eigvalsh();
    check_psd(&eigs)?;
    Ok(entropy_of_spectrum(&eigs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `½‖ρ − σ‖₁`
    Trace,
    /// `‖ρ − σ‖₂²`
    HilbertSchmidt,
    /// `√(2(1 − √F))`
    Bures,
    /// `1 − F`
    FidelityBased,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Trace,
        Metric::HilbertSchmidt,
        Metric::Bures,
        Metric::FidelityBased,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Trace => "trace",
            Metric::HilbertSchmidt => "hilbert_schmidt",
            Metric::Bures => "bures",
            Metric::FidelityBased => "fidelity_based",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace" => Ok(Metric::Trace),
            "hilbert_schmidt" | "hs" => Ok(Metric::HilbertSchmidt),
            "bures" => Ok(Metric::Bures),
            "fidelity_based" | "fidelity" => Ok(Metric::FidelityBased),
            other => Err(Error::InvalidParameter(format!("unknown metric '{other}'"))),
        }
    }
}

/// Schatten 1-norm of a Hermitian matrix.
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    a.eigvalsh().iter().map(|x| x.abs()).sum()
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let sr = sqrt_psd(rho)?;
    fidelity_with_sqrt(&sr, sigma)
}

/// Fidelity when `√ρ` is already available.
pub fn fidelity_with_sqrt(sqrt_rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let inner = &(sqrt_rho * sigma) * sqrt_rho;
    let eigs = inner.eigvalsh();
    check_psd(&eigs)?;
    let root: f64 = eigs.iter().map(|x| x.max(0.0).sqrt()).sum();
    Ok((root * root).min(1.0))
}

fn same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

pub fn distance(rho: &ComplexMatrix, sigma: &ComplexMatrix, metric: Metric) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(match metric {
        Metric::Trace => 0.5 * trace_norm(&(rho - sigma)),
        Metric::HilbertSchmidt => {
            let d = rho - sigma;
            d.frobenius_norm().powi(2)
        }
        Metric::Bures => bures_from_fidelity(fidelity(rho, sigma)?),
        Metric::FidelityBased => 1.0 - fidelity(rho, sigma)?,
    })
}

pub fn bures_from_fidelity(f: f64) -> f64 {
    (2.0 * (1.0 - f.clamp(0.0, 1.0).sqrt())).max(0.0).sqrt()
}

/// General matrix exponential (Padé scaling and squaring).
pub fn matrix_exponential(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.clone().exp())
}

/// `exp(-i φ H)` for Hermitian `H`, built spectrally so the result is unitary
/// to rounding.
pub fn unitary_of(h: &ComplexMatrix, phi: f64) -> Result<ComplexMatrix> {
    let defect = h.hermiticity_defect();
    if defect > 1e-10 * h.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(h.eigh().map(|x| C64::from_polar(1.0, -phi * x)))
}
