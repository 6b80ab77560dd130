//! Correlation quantifiers: Shannon and von Neumann mutual information,
//! entropic discord (numeric and the Bell-diagonal closed form), geometric
//! discord under several metrics, and global quantum discord for up to four
//! qubits.
//!
//! Measurements are projective, `Π± = (𝕀 ± n̂·σ)/2`, with `n̂` parameterized
//! by polar angles. Discord measures subsystem A unless told otherwise.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, smallest_k, NelderMeadOptions};
use crate::par;
use crate::qmatrix::{
    distance, embed, entropy_of_spectrum, fidelity_with_sqrt, partial_trace, sqrt_psd, tensor,
    trace_norm, von_neumann_entropy, ComplexMatrix, Metric, C64, ZERO,
};
use crate::states::{bell_diagonal, correlation_triple, CorrelationTriple, DensityMatrix};

const DIST_TOLERANCE: f64 = 1e-9;

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if let Some(bad) = p.iter().find(|&&x| !(x >= -DIST_TOLERANCE)) {
        return Err(Error::InvalidDistribution(format!("negative entry {bad}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > DIST_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("sums to {total}")));
    }
    Ok(())
}

fn flatten(pxy: &[Vec<f64>]) -> Result<Vec<f64>> {
    let cols = pxy.first().map_or(0, Vec::len);
    if pxy.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidDistribution("ragged joint table".into()));
    }
    let flat: Vec<f64> = pxy.iter().flatten().copied().collect();
    check_distribution(&flat)?;
    Ok(flat)
}

fn marginals(pxy: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let px = pxy.iter().map(|r| r.iter().sum()).collect();
    let cols = pxy.first().map_or(0, Vec::len);
    let py = (0..cols).map(|j| pxy.iter().map(|r| r[j]).sum()).collect();
    (px, py)
}

/// `H(X) = −Σ p log₂ p`.
pub fn shannon(probs: &[f64]) -> Result<f64> {
    check_distribution(probs)?;
    Ok(-probs.iter().map(|&p| xlog2x(p)).sum::<f64>())
}

/// `H(X,Y)` of a joint table indexed `[x][y]`.
pub fn joint_shannon(pxy: &[Vec<f64>]) -> Result<f64> {
    Ok(-flatten(pxy)?.iter().map(|&p| xlog2x(p)).sum::<f64>())
}

/// `H(X|Y) = H(X,Y) − H(Y)`.
pub fn conditional_shannon(pxy: &[Vec<f64>]) -> Result<f64> {
    let joint = joint_shannon(pxy)?;
    let (_, py) = marginals(pxy);
    Ok(joint + py.iter().map(|&p| xlog2x(p)).sum::<f64>())
}

/// `H(X:Y) = H(X) + H(Y) − H(X,Y)`.
pub fn mutual_shannon(pxy: &[Vec<f64>]) -> Result<f64> {
    let joint = joint_shannon(pxy)?;
    let (px, py) = marginals(pxy);
    let h = |v: &[f64]| -v.iter().map(|&p| xlog2x(p)).sum::<f64>();
    Ok(h(&px) + h(&py) - joint)
}

/// `S(ρ_A) + S(ρ_B) − S(ρ)` for the cut `a_qubits | rest`.
pub fn quantum_mutual_information(rho: &DensityMatrix, a_qubits: &[usize]) -> Result<f64> {
    let n = rho.n_qubits();
    let b: Vec<usize> = (0..n).filter(|q| !a_qubits.contains(q)).collect();
    if a_qubits.is_empty() || b.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let sa = von_neumann_entropy(&partial_trace(rho.matrix(), a_qubits)?)?;
    let sb = von_neumann_entropy(&partial_trace(rho.matrix(), &b)?)?;
    Ok(sa + sb - von_neumann_entropy(rho.matrix())?)
}

/// Projective qubit measurement along `n̂(θ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementBasis {
    pub const Z: Self = Self { theta: 0.0, phi: 0.0 };
    pub const X: Self = Self { theta: PI / 2.0, phi: 0.0 };
    pub const Y: Self = Self { theta: PI / 2.0, phi: PI / 2.0 };

    /// Any angle pair, folded into `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Self {
        let [x, y, z] = Self { theta, phi }.direction();
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = if x.abs() < 1e-15 && y.abs() < 1e-15 {
            0.0
        } else {
            y.atan2(x).rem_euclid(2.0 * PI)
        };
        Self { theta, phi }
    }

    pub fn direction(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// `n̂·σ`.
    pub fn observable(&self) -> ComplexMatrix {
        let [x, y, z] = self.direction();
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 0)] = C64::new(z, 0.0);
        m[(1, 1)] = C64::new(-z, 0.0);
        m[(0, 1)] = C64::new(x, -y);
        m[(1, 0)] = C64::new(x, y);
        m
    }

    /// `[Π₊, Π₋]`.
    pub fn projectors(&self) -> [ComplexMatrix; 2] {
        let id = ComplexMatrix::identity(2);
        let s = self.observable();
        [(&id + &s).scale_real(0.5), (&id - &s).scale_real(0.5)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
    Both,
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Side::A),
            "b" => Ok(Side::B),
            "both" => Ok(Side::Both),
            other => Err(Error::InvalidParameter(format!("unknown side '{other}'"))),
        }
    }
}

/// Non-selective measurement of one qubit: `Σ Π ρ Π = (ρ + SρS)/2` with
/// `S = n̂·σ` on that qubit.
fn dephase(rho: &ComplexMatrix, qubit: usize, n: usize, basis: &MeasurementBasis) -> ComplexMatrix {
    let s = embed(&basis.observable(), qubit, n);
    (rho + &rho.conjugate_by(&s)).scale_real(0.5)
}

/// Post-measurement state of a two-qubit `rho` (`Both` uses the same basis
/// on each side).
pub fn measured_state(rho: &DensityMatrix, basis: &MeasurementBasis, side: Side) -> Result<DensityMatrix> {
    rho.require_qubits(2)?;
    let m = rho.matrix();
    let out = match side {
        Side::A => dephase(m, 0, 2, basis),
        Side::B => dephase(m, 1, 2, basis),
        Side::Both => dephase(&dephase(m, 0, 2, basis), 1, 2, basis),
    };
    Ok(DensityMatrix::from_trusted(out))
}

/// Measures every qubit in its own basis.
pub fn measured_state_product(rho: &DensityMatrix, bases: &[MeasurementBasis]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if bases.len() != n {
        return Err(Error::CountMismatch { expected: n, got: bases.len() });
    }
    let mut m = rho.matrix().clone();
    for (q, b) in bases.iter().enumerate() {
        m = dephase(&m, q, n, b);
    }
    Ok(DensityMatrix::from_trusted(m))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub mutual: f64,
    pub classical: f64,
    pub discord: f64,
    pub metric: String,
    pub basis: MeasurementBasis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_b: Option<MeasurementBasis>,
    pub residual: f64,
}

/// Result of an optimization over (products of) measurement bases.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisOptimum {
    pub value: f64,
    pub bases: Vec<MeasurementBasis>,
    pub residual: f64,
}

/// Angular grid `θ_i = iπ/nθ`, `φ_j = 2πj/nφ`. With even sizes it hits
/// the x, y and z axes exactly.
#[derive(Clone, Copy, Debug)]
pub struct AngleGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl AngleGrid {
    /// Fine grid for single-basis searches.
    pub const FINE: Self = Self { n_theta: 64, n_phi: 32 };
    /// Per-qubit grid for product-basis searches.
    pub const COARSE: Self = Self { n_theta: 16, n_phi: 8 };

    pub fn points(&self) -> Vec<MeasurementBasis> {
        let mut v = Vec::with_capacity(self.n_theta * self.n_phi);
        for i in 0..self.n_theta {
            for j in 0..self.n_phi {
                v.push(MeasurementBasis {
                    theta: i as f64 * PI / self.n_theta as f64,
                    phi: 2.0 * PI * j as f64 / self.n_phi as f64,
                });
            }
        }
        v
    }

    fn step(&self) -> f64 {
        PI / self.n_theta as f64
    }
}

fn to_params(bases: &[MeasurementBasis]) -> Vec<f64> {
    bases.iter().flat_map(|b| [b.theta, b.phi]).collect()
}

fn from_params(x: &[f64]) -> Vec<MeasurementBasis> {
    x.chunks(2).map(|c| MeasurementBasis::new(c[0], c[1])).collect()
}

/// Minimizes `objective` over products of `slots` measurement bases:
/// a scan with all slots sharing one basis, coordinate descent over the
/// per-slot grid from the best few scan points (skipped for one slot), and
/// a final simplex polish over all angles.
pub fn minimize_over_bases<F>(slots: usize, grid: AngleGrid, objective: F) -> BasisOptimum
where
    F: Fn(&[MeasurementBasis]) -> f64 + Sync + Send,
{
    let points = grid.points();
    let scan = par::map(&points, |b| objective(&vec![*b; slots]));
    let starts = smallest_k(&scan, if slots == 1 { 1 } else { 3 });

    let mut best_bases = vec![points[starts[0]]; slots];
    let mut best = scan[starts[0]];
    if slots > 1 {
        for &s in &starts {
            let mut current = vec![points[s]; slots];
            let mut value = scan[s];
            for _sweep in 0..50 {
                let before = value;
                for slot in 0..slots {
                    let trial = par::map(&points, |b| {
                        let mut c = current.clone();
                        c[slot] = *b;
                        objective(&c)
                    });
                    let k = crate::optimize::argmin(&trial);
                    if trial[k] < value {
                        value = trial[k];
                        current[slot] = points[k];
                    }
                }
                if before - value < 1e-7 {
                    break;
                }
            }
            if value < best {
                best = value;
                best_bases = current;
            }
        }
    }

    let opts = NelderMeadOptions {
        initial_step: grid.step() / 2.0,
        ..NelderMeadOptions::default()
    };
    let polished = nelder_mead(|x| objective(&from_params(x)), &to_params(&best_bases), opts);
    if polished.value < best {
        BasisOptimum {
            value: polished.value,
            bases: from_params(&polished.x),
            residual: polished.residual,
        }
    } else {
        BasisOptimum {
            value: best,
            bases: best_bases,
            residual: polished.residual,
        }
    }
}

type Block = [[C64; 2]; 2];

/// The 2×2 blocks `ρ_ab` of a two-qubit state, indexed by the A labels.
fn blocks(m: &ComplexMatrix) -> [[Block; 2]; 2] {
    let mut out = [[[[ZERO; 2]; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    out[a][b][i][j] = m[(2 * a + i, 2 * b + j)];
                }
            }
        }
    }
    out
}

/// `Σ_i p_i S(ρ_B|i)` for a measurement on A along `basis`.
fn conditional_entropy_a(bl: &[[Block; 2]; 2], basis: &MeasurementBasis) -> f64 {
    let [x, y, z] = basis.direction();
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        // Π = ½ [[1+sz, s(x−iy)], [s(x+iy), 1−sz]]
        let pi = [
            [C64::new(0.5 * (1.0 + sign * z), 0.0), C64::new(0.5 * sign * x, -0.5 * sign * y)],
            [C64::new(0.5 * sign * x, 0.5 * sign * y), C64::new(0.5 * (1.0 - sign * z), 0.0)],
        ];
        let mut s = [[ZERO; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let w = pi[b][a];
                for i in 0..2 {
                    for j in 0..2 {
                        s[i][j] += w * bl[a][b][i][j];
                    }
                }
            }
        }
        let tr = s[0][0].re + s[1][1].re;
        if tr <= 1e-15 {
            continue;
        }
        let det = s[0][0].re * s[1][1].re - s[0][1].norm_sqr();
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        let l1 = 0.5 * (tr + disc) / tr;
        let l2 = 0.5 * (tr - disc) / tr;
        total += tr * -(xlog2x(l1) + xlog2x(l2.max(0.0)));
    }
    total
}

fn swap_qubits(m: &ComplexMatrix) -> ComplexMatrix {
    let perm = |i: usize| ((i & 1) << 1) | (i >> 1);
    ComplexMatrix::from_fn(4, |i, j| m[(perm(i), perm(j))])
}

/// Entropic discord: `I(ρ) − max_{Π} [S(ρ_B) − Σ p_i S(ρ_B|i)]` with the
/// measurement on `side` (A or B).
pub fn entropic_discord_on(rho: &DensityMatrix, side: Side) -> Result<CorrelationReport> {
    rho.require_qubits(2)?;
    let m = match side {
        Side::A => rho.matrix().clone(),
        Side::B => swap_qubits(rho.matrix()),
        Side::Both => {
            return Err(Error::InvalidParameter("entropic discord measures a single side".into()))
        }
    };
    let bl = blocks(&m);
    let s_ab = von_neumann_entropy(&m)?;
    let s_a = von_neumann_entropy(&partial_trace(&m, &[0])?)?;
    let s_b = von_neumann_entropy(&partial_trace(&m, &[1])?)?;
    let opt = minimize_over_bases(1, AngleGrid::FINE, |b| conditional_entropy_a(&bl, &b[0]));
    let mutual = s_a + s_b - s_ab;
    let classical = s_b - opt.value;
    Ok(CorrelationReport {
        mutual,
        classical,
        discord: mutual - classical,
        metric: "entropic".into(),
        basis: opt.bases[0],
        basis_b: None,
        residual: opt.residual,
    })
}

pub fn entropic_discord(rho: &DensityMatrix) -> Result<CorrelationReport> {
    entropic_discord_on(rho, Side::A)
}

/// Closed-form `(mutual, classical)` for a Bell-diagonal state.
pub fn luo_parts(c: &CorrelationTriple) -> Result<(f64, f64)> {
    bell_diagonal(c)?;
    let mutual = 2.0 + c.bell_weights().iter().map(|&l| xlog2x(l.max(0.0))).sum::<f64>();
    let cm = c.max_abs();
    let classical = 0.5 * (xlog2x(1.0 - cm) + xlog2x(1.0 + cm));
    Ok((mutual, classical))
}

/// Entropic discord of a Bell-diagonal state in closed form.
pub fn luo_discord(c: &CorrelationTriple) -> Result<f64> {
    let (mutual, classical) = luo_parts(c)?;
    Ok(mutual - classical)
}

/// Geometric discord: distance from `ρ` to its closest post-measurement
/// state. The trace quantifier uses the full one-norm `‖ρ − Φ(ρ)‖₁`, which
/// on Bell-diagonal states equals the intermediate `|c_i|`.
pub fn geometric_discord(rho: &DensityMatrix, metric: Metric, side: Side) -> Result<BasisOptimum> {
    rho.require_qubits(2)?;
    let m = rho.matrix();
    let sqrt_rho = match metric {
        Metric::Bures | Metric::FidelityBased => Some(sqrt_psd(m)?),
        _ => None,
    };
    let measure = |b: &[MeasurementBasis]| match side {
        Side::A => dephase(m, 0, 2, &b[0]),
        Side::B => dephase(m, 1, 2, &b[0]),
        Side::Both => dephase(&dephase(m, 0, 2, &b[0]), 1, 2, &b[1]),
    };
    let objective = |b: &[MeasurementBasis]| {
        let sigma = measure(b);
        match metric {
            Metric::Trace => trace_norm(&(m - &sigma)),
            Metric::HilbertSchmidt => distance(m, &sigma, metric).unwrap_or(f64::INFINITY),
            Metric::Bures => {
                let f = fidelity_with_sqrt(sqrt_rho.as_ref().unwrap(), &sigma).unwrap_or(0.0);
                crate::qmatrix::bures_from_fidelity(f)
            }
            Metric::FidelityBased => 1.0 - fidelity_with_sqrt(sqrt_rho.as_ref().unwrap(), &sigma).unwrap_or(0.0),
        }
    };
    let slots = if side == Side::Both { 2 } else { 1 };
    let grid = if slots == 1 { AngleGrid::FINE } else { AngleGrid::COARSE };
    let mut opt = minimize_over_bases(slots, grid, objective);
    opt.value = opt.value.max(0.0);
    Ok(opt)
}

/// Intermediate `|c_i|`: trace geometric discord of a Bell-diagonal state.
pub fn trace_discord_bd(c: &CorrelationTriple) -> f64 {
    c.intermediate_abs()
}

/// Largest `|c_i|`: geometric classical correlation of a Bell-diagonal state.
pub fn classical_bd(c: &CorrelationTriple) -> f64 {
    c.max_abs()
}

/// Whether `rho` is a two-qubit Bell-diagonal state.
pub fn is_bell_diagonal(rho: &DensityMatrix) -> bool {
    if rho.n_qubits() != 2 {
        return false;
    }
    match correlation_triple(rho).and_then(|c| bell_diagonal(&c)) {
        Ok(bd) => bd.matrix().max_abs_diff(rho.matrix()) < 1e-10,
        Err(_) => false,
    }
}

/// Geometric classical correlation `max ‖Φ_AB(ρ) − Φ_A(ρ_A)⊗Φ_B(ρ_B)‖₁`
/// over local measurement pairs, found numerically.
pub fn geometric_classical_numeric(rho: &DensityMatrix) -> Result<BasisOptimum> {
    rho.require_qubits(2)?;
    let m = rho.matrix();
    let ra = partial_trace(m, &[0])?;
    let rb = partial_trace(m, &[1])?;
    let objective = |b: &[MeasurementBasis]| {
        let joint = dephase(&dephase(m, 0, 2, &b[0]), 1, 2, &b[1]);
        let prod = tensor(&dephase(&ra, 0, 1, &b[0]), &dephase(&rb, 0, 1, &b[1]));
        -trace_norm(&(&joint - &prod))
    };
    let mut opt = minimize_over_bases(2, AngleGrid::COARSE, objective);
    opt.value = -opt.value;
    Ok(opt)
}

/// Geometric classical correlation, using the Bell-diagonal shortcut when
/// it applies.
pub fn geometric_classical(rho: &DensityMatrix) -> Result<f64> {
    rho.require_qubits(2)?;
    if is_bell_diagonal(rho) {
        return Ok(classical_bd(&correlation_triple(rho)?));
    }
    Ok(geometric_classical_numeric(rho)?.value)
}

/// Geometric discord packaged like the entropic report: `mutual` is the
/// quantum mutual information and `classical` the geometric classical
/// correlation.
pub fn geometric_report(rho: &DensityMatrix, metric: Metric, side: Side) -> Result<CorrelationReport> {
    let opt = geometric_discord(rho, metric, side)?;
    Ok(CorrelationReport {
        mutual: quantum_mutual_information(rho, &[0])?,
        classical: geometric_classical(rho)?,
        discord: opt.value,
        metric: metric.name().into(),
        basis: opt.bases[0],
        basis_b: opt.bases.get(1).copied(),
        residual: opt.residual,
    })
}

/// Nonzero Pauli-string coefficients `Tr(ρ P)`; strings encoded with two
/// bits per qubit (0 = 𝕀, 1 = x, 2 = y, 3 = z), qubit 0 most significant.
struct PauliExpansion {
    n: usize,
    terms: Vec<(Vec<u8>, f64)>,
}

impl PauliExpansion {
    fn of(rho: &ComplexMatrix, n: usize) -> Self {
        let d = 1usize << n;
        let mut terms = Vec::new();
        for code in 0..(1usize << (2 * n)) {
            let ops: Vec<u8> = (0..n).map(|q| ((code >> (2 * (n - 1 - q))) & 3) as u8).collect();
            let mut flip = 0usize;
            for (q, &o) in ops.iter().enumerate() {
                if o == 1 || o == 2 {
                    flip |= 1 << (n - 1 - q);
                }
            }
            // Tr(ρP) = Σ_b ⟨b|ρ P|b⟩ = Σ_b phase(b) ρ[b, b ⊕ flip].
            let mut acc = ZERO;
            for b in 0..d {
                let mut phase = C64::new(1.0, 0.0);
                for (q, &o) in ops.iter().enumerate() {
                    let bit = (b >> (n - 1 - q)) & 1;
                    phase *= match (o, bit) {
                        (2, 0) => C64::new(0.0, 1.0),
                        (2, _) => C64::new(0.0, -1.0),
                        (3, 1) => C64::new(-1.0, 0.0),
                        _ => C64::new(1.0, 0.0),
                    };
                }
                acc += phase * rho[(b, b ^ flip)];
            }
            if acc.re.abs() > 1e-14 {
                terms.push((ops, acc.re));
            }
        }
        Self { n, terms }
    }

    /// Outcome probabilities of measuring every qubit along its basis.
    fn probabilities(&self, dirs: &[[f64; 3]]) -> Vec<f64> {
        let d = 1usize << self.n;
        let scale = 1.0 / d as f64;
        (0..d)
            .map(|k| {
                let mut p = 0.0;
                for (ops, r) in &self.terms {
                    let mut f = *r;
                    for (q, &o) in ops.iter().enumerate() {
                        if o != 0 {
                            let sign = if (k >> (self.n - 1 - q)) & 1 == 0 { 1.0 } else { -1.0 };
                            f *= sign * dirs[q][(o - 1) as usize];
                        }
                    }
                    p += f;
                }
                (p * scale).max(0.0)
            })
            .collect()
    }

    /// Bloch vector of qubit `q`.
    fn bloch(&self, q: usize) -> [f64; 3] {
        let mut v = [0.0; 3];
        for (ops, r) in &self.terms {
            if ops[q] != 0 && ops.iter().enumerate().all(|(j, &o)| j == q || o == 0) {
                v[(ops[q] - 1) as usize] = *r;
            }
        }
        v
    }
}

/// Global quantum discord
/// `min_Φ [S(ρ‖Φ(ρ)) − Σ_j S(ρ_j‖Φ_j(ρ_j))]` over local projective
/// measurements on every qubit, for 2 to 4 qubits.
pub fn global_quantum_discord(rho: &DensityMatrix) -> Result<BasisOptimum> {
    let n = rho.n_qubits();
    if !(2..=4).contains(&n) {
        return Err(Error::WrongQubitCount {
            required: "2..=4".into(),
            got: n,
        });
    }
    let m = rho.matrix();
    let s_total = von_neumann_entropy(m)?;
    let expansion = PauliExpansion::of(m, n);
    let blochs: Vec<[f64; 3]> = (0..n).map(|q| expansion.bloch(q)).collect();
    let s_local: f64 = blochs
        .iter()
        .map(|r| {
            let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            entropy_of_spectrum(&[0.5 * (1.0 + len), 0.5 * (1.0 - len)])
        })
        .sum();
    let objective = |bases: &[MeasurementBasis]| {
        let dirs: Vec<[f64; 3]> = bases.iter().map(MeasurementBasis::direction).collect();
        let joint = entropy_of_spectrum(&expansion.probabilities(&dirs));
        let local: f64 = dirs
            .iter()
            .zip(&blochs)
            .map(|(d, r)| {
                let proj = d[0] * r[0] + d[1] * r[1] + d[2] * r[2];
                entropy_of_spectrum(&[0.5 * (1.0 + proj), 0.5 * (1.0 - proj)])
            })
            .sum();
        (joint - s_total) - (local - s_local)
    };
    let mut opt = minimize_over_bases(n, AngleGrid::COARSE, objective);
    opt.value = opt.value.max(0.0);
    Ok(opt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmatrix::{pauli, Axis};
    use crate::states::tests::{random_physical_triple, random_state};
    use crate::states::{m3n_state, probe_state, BellState, ProbeKind};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_basis(rng: &mut impl Rng) -> MeasurementBasis {
        MeasurementBasis::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI))
    }

    #[test]
    fn shannon_family() {
        assert_abs_diff_eq!(shannon(&[0.5, 0.5]).unwrap(), 1.0);
        assert!(shannon(&[0.6, 0.6]).is_err());
        assert!(shannon(&[1.2, -0.2]).is_err());
        let indep = vec![vec![0.3 * 0.4, 0.3 * 0.6], vec![0.7 * 0.4, 0.7 * 0.6]];
        assert_abs_diff_eq!(mutual_shannon(&indep).unwrap(), 0.0, epsilon = 1e-15);
        let perfect = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
        assert_abs_diff_eq!(mutual_shannon(&perfect).unwrap(), 1.0, epsilon = 1e-15);
        let t = vec![vec![0.1, 0.2, 0.05], vec![0.3, 0.15, 0.2]];
        let hx = shannon(&[0.35, 0.65]).unwrap();
        let hy = shannon(&[0.4, 0.35, 0.25]).unwrap();
        let hxy = joint_shannon(&t).unwrap();
        assert_abs_diff_eq!(conditional_shannon(&t).unwrap(), hxy - hy, epsilon = 1e-15);
        // Both forms of the mutual information.
        assert_abs_diff_eq!(
            mutual_shannon(&t).unwrap(),
            hx - conditional_shannon(&t).unwrap(),
            epsilon = 1e-12
        );
        assert!(joint_shannon(&[vec![0.5], vec![0.25, 0.25]]).is_err());
    }

    #[test]
    fn mutual_information_cases() {
        let bell = DensityMatrix::pure(&BellState::PhiPlus.vector()).unwrap();
        assert_abs_diff_eq!(quantum_mutual_information(&bell, &[0]).unwrap(), 2.0, epsilon = 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_state(1, &mut rng);
        let b = random_state(2, &mut rng);
        let prod = DensityMatrix::new(tensor(a.matrix(), b.matrix())).unwrap();
        assert_abs_diff_eq!(quantum_mutual_information(&prod, &[0]).unwrap(), 0.0, epsilon = 1e-9);
        for _ in 0..20 {
            let c = random_physical_triple(&mut rng);
            let rho = bell_diagonal(&c).unwrap();
            let (mutual, _) = luo_parts(&c).unwrap();
            assert_abs_diff_eq!(quantum_mutual_information(&rho, &[0]).unwrap(), mutual, epsilon = 1e-9);
        }
        assert!(quantum_mutual_information(&prod, &[]).is_err());
    }

    #[test]
    fn basis_projectors_and_folding() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let b = random_basis(&mut rng);
            let [p, m] = b.projectors();
            assert!((&p + &m).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
            assert!((&p * &p).max_abs_diff(&p) < 1e-12);
            assert!((&m * &m).max_abs_diff(&m) < 1e-12);
        }
        let f = MeasurementBasis::new(-0.3, 7.0);
        assert!((0.0..=PI).contains(&f.theta) && (0.0..2.0 * PI).contains(&f.phi));
        let g = MeasurementBasis { theta: -0.3, phi: 7.0 };
        assert!(f.observable().max_abs_diff(&g.observable()) < 1e-12);
        assert!(MeasurementBasis::X.observable().max_abs_diff(&pauli(Axis::X)) < 1e-15);
        assert!(MeasurementBasis::Y.observable().max_abs_diff(&pauli(Axis::Y)) < 1e-15);
    }

    #[test]
    fn measured_state_properties() {
        let bell = DensityMatrix::pure(&BellState::PhiPlus.vector()).unwrap();
        let out = measured_state(&bell, &MeasurementBasis::Z, Side::A).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::diag(&[0.5, 0.0, 0.0, 0.5])) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let rho = random_state(2, &mut rng);
            let b = random_basis(&mut rng);
            for side in [Side::A, Side::B, Side::Both] {
                let once = measured_state(&rho, &b, side).unwrap();
                assert_abs_diff_eq!(once.matrix().trace().re, 1.0, epsilon = 1e-12);
                let twice = measured_state(&once, &b, side).unwrap();
                assert!(twice.matrix().max_abs_diff(once.matrix()) < 1e-12);
            }
            // Projector form agrees with the dephasing shortcut.
            let [p, m] = b.projectors();
            let id = ComplexMatrix::identity(2);
            let direct = &rho.matrix().conjugate_by(&tensor(&p, &id)) + &rho.matrix().conjugate_by(&tensor(&m, &id));
            assert!(measured_state(&rho, &b, Side::A).unwrap().matrix().max_abs_diff(&direct) < 1e-12);
        }
    }

    #[test]
    fn luo_reference_values() {
        assert_abs_diff_eq!(luo_discord(&CorrelationTriple::new(0.0, 0.0, 0.0)).unwrap(), 0.0, epsilon = 1e-15);
        for b in [BellState::PhiPlus, BellState::PsiMinus] {
            assert_abs_diff_eq!(luo_discord(&b.triple()).unwrap(), 1.0, epsilon = 1e-12);
        }
        assert!(luo_discord(&CorrelationTriple::new(1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn entropic_discord_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let c = random_physical_triple(&mut rng);
            let report = entropic_discord(&bell_diagonal(&c).unwrap()).unwrap();
            assert_abs_diff_eq!(report.discord, luo_discord(&c).unwrap(), epsilon = 1e-4);
            assert!(report.discord >= -1e-6 && report.discord <= report.mutual + 1e-6);
        }
        let frozen = CorrelationTriple::new(1.0, 0.7, -0.7);
        let report = entropic_discord(&bell_diagonal(&frozen).unwrap()).unwrap();
        assert_abs_diff_eq!(report.discord, luo_discord(&frozen).unwrap(), epsilon = 1e-4);
    }

    #[test]
    fn entropic_discord_zero_on_classical_states() {
        let cc = DensityMatrix::new(ComplexMatrix::diag(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        assert!(entropic_discord(&cc).unwrap().discord.abs() < 1e-6);
        for k in 0..=10 {
            let rho = probe_state(k as f64 / 10.0, ProbeKind::Classical).unwrap();
            assert!(entropic_discord(&rho).unwrap().discord.abs() < 1e-6);
        }
        let q = probe_state(0.5, ProbeKind::Quantum).unwrap();
        assert!(entropic_discord(&q).unwrap().discord > 1e-3);
    }

    #[test]
    fn entropic_discord_side_b_on_asymmetric_state() {
        // Classical-quantum: zero when measuring A, not when measuring B.
        let plus = ComplexMatrix::from_real_row_major(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let zero = ComplexMatrix::diag(&[1.0, 0.0]);
        let rho = DensityMatrix::new(
            &tensor(&ComplexMatrix::diag(&[0.5, 0.0]), &plus) + &tensor(&ComplexMatrix::diag(&[0.0, 0.5]), &zero),
        )
        .unwrap();
        assert!(entropic_discord_on(&rho, Side::A).unwrap().discord.abs() < 1e-6);
        assert!(entropic_discord_on(&rho, Side::B).unwrap().discord > 1e-2);
        assert!(entropic_discord_on(&rho, Side::Both).is_err());
    }

    #[test]
    fn trace_discord_fast_path_matches_minimizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let c = random_physical_triple(&mut rng);
            let rho = bell_diagonal(&c).unwrap();
            let numeric = geometric_discord(&rho, Metric::Trace, Side::A).unwrap().value;
            assert_abs_diff_eq!(numeric, trace_discord_bd(&c), epsilon = 1e-4);
        }
    }

    #[test]
    fn geometric_zero_on_classical_states() {
        let cc = DensityMatrix::new(ComplexMatrix::diag(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        for metric in Metric::ALL {
            for side in [Side::A, Side::Both] {
                assert!(geometric_discord(&cc, metric, side).unwrap().value <= 1e-6, "{metric:?}");
            }
        }
    }

    #[test]
    fn geometric_classical_fast_path_matches_numeric() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..10 {
            let c = random_physical_triple(&mut rng);
            let rho = bell_diagonal(&c).unwrap();
            let numeric = geometric_classical_numeric(&rho).unwrap().value;
            assert_abs_diff_eq!(numeric, classical_bd(&c), epsilon = 1e-3);
        }
        assert_abs_diff_eq!(classical_bd(&CorrelationTriple::new(0.0, 0.0, 0.5)), 0.5);
        let rho = random_state(2, &mut rng);
        assert!(!is_bell_diagonal(&rho));
        assert!(geometric_classical(&rho).unwrap() > 0.0);
    }

    #[test]
    fn permuting_axes_leaves_values_unchanged() {
        let c = CorrelationTriple::new(0.5, -0.2, 0.3);
        let permuted = CorrelationTriple::new(0.3, 0.5, -0.2);
        let a = bell_diagonal(&c).unwrap();
        let b = bell_diagonal(&permuted).unwrap();
        assert_abs_diff_eq!(luo_discord(&c).unwrap(), luo_discord(&permuted).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            entropic_discord(&a).unwrap().discord,
            entropic_discord(&b).unwrap().discord,
            epsilon = 1e-9
        );
        for metric in Metric::ALL {
            assert_abs_diff_eq!(
                geometric_discord(&a, metric, Side::A).unwrap().value,
                geometric_discord(&b, metric, Side::A).unwrap().value,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn pauli_expansion_probabilities_match_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let rho = random_state(3, &mut rng);
        let exp = PauliExpansion::of(rho.matrix(), 3);
        let bases: Vec<MeasurementBasis> = (0..3).map(|_| random_basis(&mut rng)).collect();
        let dirs: Vec<[f64; 3]> = bases.iter().map(MeasurementBasis::direction).collect();
        let probs = exp.probabilities(&dirs);
        for (k, p) in probs.iter().enumerate() {
            let proj: Vec<ComplexMatrix> =
                (0..3).map(|q| bases[q].projectors()[(k >> (2 - q)) & 1].clone()).collect();
            let direct = rho.expectation(&crate::qmatrix::tensor_all(&proj));
            assert_abs_diff_eq!(*p, direct, epsilon = 1e-12);
        }
        let r = exp.bloch(1);
        let rho1 = partial_trace(rho.matrix(), &[1]).unwrap();
        for axis in Axis::ALL {
            assert_abs_diff_eq!(r[axis.index()], (&pauli(axis) * &rho1).trace().re, epsilon = 1e-12);
        }
    }

    #[test]
    fn global_discord_cases() {
        let cc = DensityMatrix::new(ComplexMatrix::diag(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        assert!(global_quantum_discord(&cc).unwrap().value < 1e-7);
        let classical_bd = bell_diagonal(&CorrelationTriple::new(0.0, 0.0, 0.6)).unwrap();
        assert!(global_quantum_discord(&classical_bd).unwrap().value < 1e-7);
        let quantum_bd = bell_diagonal(&CorrelationTriple::new(0.4, -0.3, 0.2)).unwrap();
        assert!(global_quantum_discord(&quantum_bd).unwrap().value > 1e-3);
        assert!(entropic_discord(&quantum_bd).unwrap().discord > 1e-3);
        let m3 = m3n_state(&CorrelationTriple::new(0.7, 0.3, 0.3), 3).unwrap();
        assert!(global_quantum_discord(&m3).unwrap().value > 1e-3);
        assert!(global_quantum_discord(&DensityMatrix::maximally_mixed(1)).is_err());
        assert!(global_quantum_discord(&DensityMatrix::maximally_mixed(5)).is_err());
    }

    #[test]
    fn global_discord_reduces_to_symmetric_discord_bound() {
        // For two qubits GQD is at least the one-sided entropic discord.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let c = random_physical_triple(&mut rng);
            let rho = bell_diagonal(&c).unwrap();
            let g = global_quantum_discord(&rho).unwrap().value;
            assert!(g + 1e-6 >= entropic_discord(&rho).unwrap().discord);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn discord_bounded_by_mutual_information(seed in any::<u64>()) {
            let rho = random_state(2, &mut ChaCha8Rng::seed_from_u64(seed));
            let r = entropic_discord(&rho).unwrap();
            prop_assert!(r.discord >= -1e-6);
            prop_assert!(r.discord <= r.mutual + 1e-6);
            prop_assert!(r.classical >= -1e-9);
            let again = measured_state(&rho, &r.basis, Side::A).unwrap();
            let twice = measured_state(&again, &r.basis, Side::A).unwrap();
            prop_assert!(twice.matrix().max_abs_diff(again.matrix()) < 1e-12);
        }
    }
}
