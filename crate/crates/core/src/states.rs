//! State families: Bell-diagonal and M³_N states, pseudopure states, the
//! metrology probe pairs, plus the Peres test and correlation readout.
//!
//! Basis convention: `|0⟩ ≡ |↑⟩`, aligned with the static field, so that
//! `σz|0⟩ = +|0⟩`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmatrix::{
    embed, partial_transpose, pauli, pauli_string, tensor, Axis, ComplexMatrix, C64, ONE,
    PSD_TOLERANCE, ZERO,
};

/// Hermiticity and trace tolerance for [`DensityMatrix::new`].
pub const STATE_TOLERANCE: f64 = 1e-10;

/// A validated density matrix on `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n_qubits = matrix.n_qubits()?;
        let defect = matrix.hermiticity_defect();
        if defect > STATE_TOLERANCE {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOLERANCE || tr.im.abs() > STATE_TOLERANCE {
            return Err(Error::BadTrace(tr.re));
        }
        let min = matrix.eigvalsh()[0];
        if min < -PSD_TOLERANCE {
            return Err(Error::NegativeEigenvalue(min));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// Wraps a matrix that is a density matrix by construction (e.g. the
    /// image of a valid state under a CPTP map). Hermiticity is restored
    /// exactly.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        let n_qubits = matrix.n_qubits().expect("power-of-two dimension");
        Self {
            n_qubits,
            matrix: matrix.hermitian_part(),
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        Self {
            n_qubits,
            matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
        }
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("state norm {norm} ≠ 1")));
        }
        Self::new(ComplexMatrix::outer(psi))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `Tr(O ρ)`, real part.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        (op * &self.matrix).trace().re
    }

    pub fn require_qubits(&self, n: usize) -> Result<()> {
        if self.n_qubits != n {
            return Err(Error::WrongQubitCount {
                required: n.to_string(),
                got: self.n_qubits,
            });
        }
        Ok(())
    }
}

/// Diagonal correlation functions `c_i = Tr(ρ σ_i⊗σ_i)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTriple {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl CorrelationTriple {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Self {
        Self { c1, c2, c3 }
    }

    pub fn from_array(c: [f64; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }

    pub fn get(&self, axis: Axis) -> f64 {
        self.as_array()[axis.index()]
    }

    /// `|c_i|` sorted ascending.
    pub fn sorted_abs(&self) -> [f64; 3] {
        let mut a = self.as_array().map(f64::abs);
        a.sort_by(f64::total_cmp);
        a
    }

    pub fn max_abs(&self) -> f64 {
        self.sorted_abs()[2]
    }

    pub fn intermediate_abs(&self) -> f64 {
        self.sorted_abs()[1]
    }

    pub fn l1_norm(&self) -> f64 {
        self.c1.abs() + self.c2.abs() + self.c3.abs()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Bell-basis weights `(Φ+, Φ−, Ψ+, Ψ−)` of `bell_diagonal(self)`.
    pub fn bell_weights(&self) -> [f64; 4] {
        let [c1, c2, c3] = self.as_array();
        [
            0.25 * (1.0 + c1 - c2 + c3),
            0.25 * (1.0 - c1 + c2 + c3),
            0.25 * (1.0 + c1 + c2 - c3),
            0.25 * (1.0 - c1 - c2 - c3),
        ]
    }
}

fn correlation_operator(c: &CorrelationTriple, n: usize) -> ComplexMatrix {
    let d = 1usize << n;
    let mut m = ComplexMatrix::identity(d);
    for axis in Axis::ALL {
        let ci = c.get(axis);
        if ci != 0.0 {
            m = &m + &pauli_string(axis, n).scale_real(ci);
        }
    }
    m.scale_real(1.0 / d as f64)
}

fn checked_state(m: ComplexMatrix) -> Result<DensityMatrix> {
    let min = m.eigvalsh()[0];
    if min < -PSD_TOLERANCE {
        return Err(Error::UnphysicalTriple { eigenvalue: min });
    }
    Ok(DensityMatrix::from_trusted(m))
}

/// `¼[𝕀 + Σ c_i σ_i⊗σ_i]`; rejects triples outside the tetrahedron.
pub fn bell_diagonal(c: &CorrelationTriple) -> Result<DensityMatrix> {
    checked_state(correlation_operator(c, 2))
}

/// `2^{−N}[𝕀 + Σ c_i σ_i^{⊗N}]`.
pub fn m3n_state(c: &CorrelationTriple, n: usize) -> Result<DensityMatrix> {
    if n < 2 {
        return Err(Error::WrongQubitCount {
            required: ">= 2".into(),
            got: n,
        });
    }
    checked_state(correlation_operator(c, n))
}

/// Whether `bell_diagonal(c)` is a state (checked spectrally).
pub fn is_physical(c: &CorrelationTriple) -> bool {
    bell_diagonal(c).is_ok()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub fn vector(self) -> [C64; 4] {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            BellState::PhiPlus => [s, ZERO, ZERO, s],
            BellState::PhiMinus => [s, ZERO, ZERO, -s],
            BellState::PsiPlus => [ZERO, s, s, ZERO],
            BellState::PsiMinus => [ZERO, s, -s, ZERO],
        }
    }

    /// Vertex of the tetrahedron of Bell-diagonal states.
    pub fn triple(self) -> CorrelationTriple {
        match self {
            BellState::PhiPlus => CorrelationTriple::new(1.0, -1.0, 1.0),
            BellState::PhiMinus => CorrelationTriple::new(-1.0, 1.0, 1.0),
            BellState::PsiPlus => CorrelationTriple::new(1.0, 1.0, -1.0),
            BellState::PsiMinus => CorrelationTriple::new(-1.0, -1.0, -1.0),
        }
    }
}

/// `(1−ε)/2^N 𝕀 + ε|ψ⟩⟨ψ|`.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudopureState {
    pub epsilon: f64,
    pub psi: Vec<C64>,
}

impl PseudopureState {
    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        pseudopure(&self.psi, self.epsilon)
    }
}

pub fn pseudopure(psi: &[C64], epsilon: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("ε = {epsilon} outside [0, 1]")));
    }
    let pure = DensityMatrix::pure(psi)?;
    let d = psi.len() as f64;
    let m = &ComplexMatrix::identity(psi.len()).scale_real((1.0 - epsilon) / d)
        + &pure.matrix.scale_real(epsilon);
    Ok(DensityMatrix::from_trusted(m))
}

/// Two-qubit pseudo-singlet: diagonal `((1−ε)/4, (1+ε)/4, (1+ε)/4, (1−ε)/4)`
/// with `−ε/2` coherence between `|01⟩` and `|10⟩`. Its partial transpose
/// has spectrum `{(1+ε)/4 ×3, (1−3ε)/4}`.
pub fn pseudo_singlet(epsilon: f64) -> Result<DensityMatrix> {
    pseudopure(&BellState::PsiMinus.vector(), epsilon)
}

/// High-temperature thermal state `e^{−H/kT}/Z` (exact).
pub fn thermal_state(h: &ComplexMatrix, kt: f64) -> Result<DensityMatrix> {
    if !(kt > 0.0) {
        return Err(Error::InvalidParameter("kT must be positive".into()));
    }
    let sd = h.eigh();
    let shift = sd.eigenvalues[0];
    let m = sd.map(|x| C64::new((-(x - shift) / kt).exp(), 0.0));
    let z = m.trace().re;
    Ok(DensityMatrix::from_trusted(m.scale_real(1.0 / z)))
}

/// First-order expansion `𝕀/2^N − H/(2^N kT)`.
pub fn high_temperature_state(h: &ComplexMatrix, kt: f64) -> Result<DensityMatrix> {
    let d = h.dim() as f64;
    let traceless = &h.clone() - &ComplexMatrix::identity(h.dim()).scale_real(h.trace().re / d);
    DensityMatrix::new(
        &ComplexMatrix::identity(h.dim()).scale_real(1.0 / d) - &traceless.scale_real(1.0 / (d * kt)),
    )
}

/// Measured magnetization along an observable, `Tr(σ_u ρ)`.
pub fn signal(rho: &DensityMatrix, observable: &ComplexMatrix) -> f64 {
    rho.expectation(observable)
}

/// Rescales a quantity into units of `ε²/ln 2` bit, the customary unit for
/// correlations of deviation matrices.
pub fn in_deviation_units(value: f64, epsilon: f64) -> f64 {
    value * std::f64::consts::LN_2 / (epsilon * epsilon)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeresReport {
    /// Smallest eigenvalue of the partial transpose.
    pub negative_eigenvalue: f64,
    pub entangled: bool,
}

/// Eigenvalues of the partial transpose below this certify entanglement.
pub const PERES_TOLERANCE: f64 = 1e-10;

pub fn peres_entangled(rho: &DensityMatrix) -> Result<PeresReport> {
    rho.require_qubits(2)?;
    let min = partial_transpose(rho.matrix(), 1)?.eigvalsh()[0];
    Ok(PeresReport {
        negative_eigenvalue: min,
        entangled: min < -PERES_TOLERANCE,
    })
}

/// Smallest `ε` at which the pseudo-singlet becomes entangled, located by
/// bisection on the partial-transpose spectrum.
pub fn pseudo_singlet_threshold(tol: f64) -> Result<f64> {
    let min_pt = |eps: f64| -> Result<f64> {
        Ok(partial_transpose(pseudo_singlet(eps)?.matrix(), 1)?.eigvalsh()[0])
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if min_pt(mid)? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Quantum,
    Classical,
}

impl ProbeKind {
    pub fn name(self) -> &'static str {
        match self {
            ProbeKind::Quantum => "quantum",
            ProbeKind::Classical => "classical",
        }
    }
}

impl std::str::FromStr for ProbeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum" | "q" => Ok(ProbeKind::Quantum),
            "classical" | "c" => Ok(ProbeKind::Classical),
            other => Err(Error::InvalidParameter(format!("unknown probe kind '{other}'"))),
        }
    }
}

/// Probe pair with equal purity `(1+p²)²/4`: a discordant Bell-diagonal
/// family and a classical-quantum family.
pub fn probe_state(p: f64, kind: ProbeKind) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    let q = p * p;
    let entries: [f64; 16] = match kind {
        ProbeKind::Quantum => [
            1.0 + q, 0.0, 0.0, 2.0 * p, //
            0.0, 1.0 - q, 0.0, 0.0, //
            0.0, 0.0, 1.0 - q, 0.0, //
            2.0 * p, 0.0, 0.0, 1.0 + q,
        ],
        ProbeKind::Classical => [
            1.0, q, p, p, //
            q, 1.0, p, p, //
            p, p, 1.0, q, //
            p, p, q, 1.0,
        ],
    };
    let m = ComplexMatrix::from_real_row_major(4, &entries)?.scale_real(0.25);
    Ok(DensityMatrix::from_trusted(m))
}

/// `c_i = Tr(ρ σ_i⊗σ_i)` for a two-qubit state.
pub fn correlation_triple(rho: &DensityMatrix) -> Result<CorrelationTriple> {
    rho.require_qubits(2)?;
    let c = Axis::ALL.map(|a| rho.expectation(&pauli_string(a, 2)));
    Ok(CorrelationTriple::from_array(c))
}

fn cnot(control: usize, target: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4);
    for i in 0..4usize {
        let cbit = (i >> (1 - control)) & 1;
        let j = if cbit == 1 { i ^ (1 << (1 - target)) } else { i };
        m[(j, i)] = ONE;
    }
    m
}

/// Unitary `U_i` with `U_i† (σ_i⊗𝕀) U_i = σ_i⊗σ_i`, so the two-body
/// correlation becomes a single-spin signal on qubit A.
pub fn axis_mapping_unitary(axis: Axis) -> ComplexMatrix {
    match axis {
        Axis::X => cnot(0, 1),
        Axis::Y => {
            let s = ComplexMatrix::diag(&[1.0, 0.0]);
            let mut s = s;
            s[(1, 1)] = C64::new(0.0, 1.0);
            let ss = tensor(&s, &s);
            &(&ss * &cnot(0, 1)) * &ss.adjoint()
        }
        Axis::Z => cnot(1, 0),
    }
}

/// `Tr((σ_i⊗𝕀) ξ_i)` with `ξ_i = U_i ρ U_i†`.
pub fn direct_measure_ci(rho: &DensityMatrix, axis: Axis) -> Result<f64> {
    rho.require_qubits(2)?;
    let xi = rho.matrix().conjugate_by(&axis_mapping_unitary(axis));
    Ok((&embed(&pauli(axis), 0, 2) * &xi).trace().re)
}
