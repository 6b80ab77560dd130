//! Black-box phase estimation on the first qubit of a probe: quantum
//! Fisher information, the symmetric logarithmic derivative, interferometric
//! power and the optimal-estimator simulation.
//!
//! The phase acts as `U = e^{−iφH}⊗𝕀` with `H` a qubit Hamiltonian on A
//! (qubit 0). The QFI convention is
//! `F = 2 Σ_{i,l} (q_i − q_l)²/(q_i + q_l) |⟨ψ_i|H⊗𝕀|ψ_l⟩|²`, which gives
//! `F = 4 Var(H)` on pure states and equals `Tr(ρ_φ L²)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use nalgebra::Matrix3;
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{golden_section, nelder_mead, smallest_k, NelderMeadOptions};
use crate::par;
use crate::qmatrix::{embed, pauli, unitary_of, Axis, ComplexMatrix, SpectralDecomposition, C64, ZERO};
use crate::states::{probe_state, DensityMatrix, ProbeKind};

/// Pairs with `q_i + q_l` at or below this are left out of QFI sums.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// QFI at or below this makes a setting useless for estimation.
pub const PATHOLOGICAL_QFI: f64 = 1e-12;

fn check_local(h_a: &ComplexMatrix) -> Result<()> {
    if h_a.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: h_a.dim() });
    }
    let defect = h_a.hermiticity_defect();
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// `U ρ U†` with `U = e^{−iφH_A}⊗𝕀`.
pub fn apply_phase(rho: &DensityMatrix, h_a: &ComplexMatrix, phi: f64) -> Result<DensityMatrix> {
    check_local(h_a)?;
    let u = embed(&unitary_of(h_a, phi)?, 0, rho.n_qubits());
    Ok(DensityMatrix::from_trusted(rho.matrix().conjugate_by(&u)))
}

/// Generator weights `(q_i − q_l)²/(q_i + q_l)`, zero off the support.
fn pair_weight(qi: f64, ql: f64) -> f64 {
    let s = qi + ql;
    if s <= SUPPORT_CUTOFF {
        0.0
    } else {
        (qi - ql).powi(2) / s
    }
}

/// `⟨ψ_i|O|ψ_l⟩` for all eigenvector pairs.
fn in_eigenbasis(sd: &SpectralDecomposition, op: &ComplexMatrix) -> ComplexMatrix {
    op.conjugate_by(&sd.eigenvectors.adjoint())
}

fn qfi_of(sd: &SpectralDecomposition, h_full: &ComplexMatrix) -> f64 {
    let hb = in_eigenbasis(sd, h_full);
    let q = &sd.eigenvalues;
    let mut f = 0.0;
    for i in 0..q.len() {
        for l in 0..q.len() {
            f += pair_weight(q[i].max(0.0), q[l].max(0.0)) * hb[(i, l)].norm_sqr();
        }
    }
    2.0 * f
}

/// Quantum Fisher information of `ρ` for the generator `H_A⊗𝕀`.
pub fn qfi(rho: &DensityMatrix, h_a: &ComplexMatrix) -> Result<f64> {
    check_local(h_a)?;
    let sd = rho.matrix().eigh();
    Ok(qfi_of(&sd, &embed(h_a, 0, rho.n_qubits())))
}

/// Symmetric logarithmic derivative in diagonal form `L = Σ l_j |λ_j⟩⟨λ_j|`.
#[derive(Clone, Debug)]
pub struct SldResult {
    pub l_values: Vec<f64>,
    pub l_basis: Vec<Vec<C64>>,
    pub matrix: ComplexMatrix,
}

/// SLD of `ρ_φ = U ρ U†` with respect to `φ`.
pub fn sld(rho: &DensityMatrix, h_a: &ComplexMatrix, phi: f64) -> Result<SldResult> {
    let rho_phi = apply_phase(rho, h_a, phi)?;
    let h = embed(h_a, 0, rho.n_qubits());
    let m = rho_phi.matrix();
    // ∂_φ ρ_φ = −i [H⊗𝕀, ρ_φ]
    let d_rho = h.commutator(m).scale(C64::new(0.0, -1.0));
    let sd = m.eigh();
    let db = in_eigenbasis(&sd, &d_rho);
    let q = &sd.eigenvalues;
    let dim = q.len();
    let lb = ComplexMatrix::from_fn(dim, |i, l| {
        let s = q[i].max(0.0) + q[l].max(0.0);
        if s <= SUPPORT_CUTOFF {
            ZERO
        } else {
            db[(i, l)] * (2.0 / s)
        }
    });
    let l = lb.conjugate_by(&sd.eigenvectors).hermitian_part();
    let lsd = l.eigh();
    Ok(SldResult {
        l_values: lsd.eigenvalues.clone(),
        l_basis: (0..dim).map(|k| lsd.vector(k)).collect(),
        matrix: l,
    })
}

/// The 3×3 matrix `M_mn = ½ Σ w_il ⟨ψ_i|σ_m⊗𝕀|ψ_l⟩⟨ψ_l|σ_n⊗𝕀|ψ_i⟩`, with
/// both Paulis on A; `F(n̂·σ)/4 = n̂ᵀ M n̂`.
pub fn interferometric_matrix(rho: &DensityMatrix) -> Result<Matrix3<f64>> {
    let n = rho.n_qubits();
    if n < 2 {
        return Err(Error::WrongQubitCount { required: ">= 2".into(), got: n });
    }
    let sd = rho.matrix().eigh();
    let q = &sd.eigenvalues;
    let sig: Vec<ComplexMatrix> = Axis::ALL.iter().map(|&a| in_eigenbasis(&sd, &embed(&pauli(a), 0, n))).collect();
    let mut m = Matrix3::zeros();
    for a in 0..3 {
        for b in a..3 {
            let mut acc = ZERO;
            for i in 0..q.len() {
                for l in 0..q.len() {
                    let w = pair_weight(q[i].max(0.0), q[l].max(0.0));
                    if w > 0.0 {
                        acc += sig[a][(i, l)] * sig[b][(l, i)] * w;
                    }
                }
            }
            m[(a, b)] = 0.5 * acc.re;
            m[(b, a)] = 0.5 * acc.re;
        }
    }
    Ok(m)
}

/// Interferometric power for generators with spectrum `{+1, −1}`: the
/// smallest eigenvalue of [`interferometric_matrix`], clamped at zero.
pub fn interferometric_power(rho: &DensityMatrix) -> Result<f64> {
    let m = interferometric_matrix(rho)?;
    let eig = m.symmetric_eigenvalues();
    Ok(eig.min().max(0.0))
}

/// Interferometric power for a qubit spectrum `{a, b}`; the QFI scales
/// with `((a − b)/2)²` and ignores the trace part.
pub fn interferometric_power_with_spectrum(rho: &DensityMatrix, spectrum: [f64; 2]) -> Result<f64> {
    let half_gap = 0.5 * (spectrum[0] - spectrum[1]);
    Ok(half_gap * half_gap * interferometric_power(rho)?)
}

/// `U Z U†` with `U = R_z(α) R_y(β) R_z(γ)`.
pub fn hamiltonian_from_euler(alpha: f64, beta: f64, gamma: f64) -> ComplexMatrix {
    let rz = |t: f64| {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 0)] = C64::from_polar(1.0, -t / 2.0);
        m[(1, 1)] = C64::from_polar(1.0, t / 2.0);
        m
    };
    let (s, c) = (beta / 2.0).sin_cos();
    let ry = ComplexMatrix::from_real_row_major(2, &[c, -s, s, c]).expect("2x2");
    let u = &(&rz(alpha) * &ry) * &rz(gamma);
    pauli(Axis::Z).conjugate_by(&u)
}

fn radical_inverse(mut k: usize, base: usize) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct IpSearch {
    /// `¼ min F` found.
    pub value: f64,
    /// Euler angles of the minimizing generator.
    pub angles: [f64; 3],
    pub samples: usize,
}

/// Interferometric power by direct minimization of `F/4` over generators
/// `U diag(1,−1) U†`: Halton samples of the Euler angles, then simplex
/// refinement from the best five. Independent of the closed form.
pub fn interferometric_power_search(rho: &DensityMatrix, samples: usize) -> Result<IpSearch> {
    let n = rho.n_qubits();
    let sd = rho.matrix().eigh();
    let objective = |x: &[f64]| {
        let h = hamiltonian_from_euler(x[0], x[1], x[2]);
        0.25 * qfi_of(&sd, &embed(&h, 0, n))
    };
    let tau = 2.0 * std::f64::consts::PI;
    let points: Vec<[f64; 3]> = (1..=samples)
        .map(|k| {
            [
                tau * radical_inverse(k, 2),
                std::f64::consts::PI * radical_inverse(k, 3),
                tau * radical_inverse(k, 5),
            ]
        })
        .collect();
    let values = par::map(&points, |p| objective(p));
    let starts = smallest_k(&values, 5);
    let refined = par::map(&starts, |&s| {
        nelder_mead(
            objective,
            &points[s],
            NelderMeadOptions {
                initial_step: 0.1,
                f_tol: 1e-12,
                x_tol: 1e-8,
                max_iter: 400,
            },
        )
    });
    let best = refined
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("five starts");
    Ok(IpSearch {
        value: best.value,
        angles: [best.x[0], best.x[1], best.x[2]],
        samples,
    })
}

/// The three black-box generators: `σz`, `(σx + σy)/√2`, `σx`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    H1,
    H2,
    H3,
}

impl Setting {
    pub const ALL: [Setting; 3] = [Setting::H1, Setting::H2, Setting::H3];

    pub fn hamiltonian(self) -> ComplexMatrix {
        match self {
            Setting::H1 => pauli(Axis::Z),
            Setting::H2 => (&pauli(Axis::X) + &pauli(Axis::Y)).scale_real(FRAC_1_SQRT_2),
            Setting::H3 => pauli(Axis::X),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Setting::H1 => "H1",
            Setting::H2 => "H2",
            Setting::H3 => "H3",
        }
    }
}

impl std::str::FromStr for Setting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "H1" | "1" => Ok(Setting::H1),
            "H2" | "2" => Ok(Setting::H2),
            "H3" | "3" => Ok(Setting::H3),
            other => Err(Error::InvalidParameter(format!("unknown setting '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimationOutcome {
    /// Populations `d_j = ⟨λ_j|ρ_φ|λ_j⟩` in the SLD eigenbasis.
    pub d_values: Vec<f64>,
    pub l_values: Vec<f64>,
    pub f: f64,
    /// `Σ l_j² d_j`.
    pub f_exp: f64,
    pub mean_phi: f64,
    pub var_phi: f64,
}

/// How the populations `d_j` are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Readout {
    /// Exact expectation values.
    #[default]
    Exact,
    /// Frequencies from `ν` multinomial draws with the given seed.
    Shots { seed: u64 },
}

/// Simulates the optimal estimator at true phase `phi0` with `nu`
/// repetitions: reads out the SLD eigenbasis, fits the mean by minimizing
/// `Θ(φ) = Σ_j (d_j − d_j^th(φ))²` over `[0, π/2]`, and evaluates the
/// estimator variance from the `d_j`.
pub fn estimate(rho: &DensityMatrix, h_a: &ComplexMatrix, phi0: f64, nu: u64, readout: Readout) -> Result<EstimationOutcome> {
    if nu == 0 {
        return Err(Error::InvalidParameter("nu must be positive".into()));
    }
    let f = qfi(rho, h_a)?;
    if f <= PATHOLOGICAL_QFI {
        return Err(Error::PathologicalSetting(format!(
            "QFI {f:.3e}: the probe commutes with the generator"
        )));
    }
    let l = sld(rho, h_a, phi0)?;
    let rho_phi = apply_phase(rho, h_a, phi0)?;
    let populations = |state: &DensityMatrix| -> Vec<f64> {
        l.l_basis.iter().map(|v| state.matrix().expectation(v).re.max(0.0)).collect()
    };
    let exact = populations(&rho_phi);
    let d = match readout {
        Readout::Exact => exact,
        Readout::Shots { seed } => {
            let dist = WeightedIndex::new(&exact).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts = vec![0u64; exact.len()];
            for _ in 0..nu {
                counts[dist.sample(&mut rng)] += 1;
            }
            counts.iter().map(|&c| c as f64 / nu as f64).collect()
        }
    };

    let theta = |phi: f64| -> f64 {
        match apply_phase(rho, h_a, phi) {
            Ok(s) => populations(&s).iter().zip(&d).map(|(a, b)| (a - b).powi(2)).sum(),
            Err(_) => f64::INFINITY,
        }
    };
    let grid = 256;
    let step = FRAC_PI_2 / grid as f64;
    let scan: Vec<f64> = par::map_range(grid + 1, |k| theta(k as f64 * step));
    let k = crate::optimize::argmin(&scan);
    let lo = (k as f64 - 1.0).max(0.0) * step;
    let hi = ((k + 1) as f64 * step).min(FRAC_PI_2);
    let mean_phi = golden_section(theta, lo, hi, 1e-9);

    let first: f64 = d.iter().zip(&l.l_values).map(|(dj, lj)| dj * lj).sum();
    let second: f64 = d.iter().zip(&l.l_values).map(|(dj, lj)| dj * lj * lj).sum();
    let nu_f = nu as f64;
    let var_phi = second / (nu_f * f * f) - (first / (nu_f.sqrt() * f)).powi(2);
    Ok(EstimationOutcome {
        d_values: d,
        l_values: l.l_values,
        f,
        f_exp: second,
        mean_phi,
        var_phi,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRow {
    pub probe: ProbeKind,
    pub p: f64,
    pub setting: Setting,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "IP")]
    pub ip: f64,
    /// NaN when the setting is pathological (`F = 0`).
    pub mean_phi: f64,
    pub var_phi: f64,
}

/// QFI, interferometric power and the estimator for every probe kind, `p`
/// and setting. Pathological settings get NaN mean and variance.
pub fn blackbox_suite(p_grid: &[f64], settings: &[Setting], phi0: f64, nu: u64) -> Result<Vec<SuiteRow>> {
    let mut jobs = Vec::new();
    for kind in [ProbeKind::Quantum, ProbeKind::Classical] {
        for &p in p_grid {
            for &s in settings {
                jobs.push((kind, p, s));
            }
        }
    }
    par::map(&jobs, |&(kind, p, setting)| {
        let rho = probe_state(p, kind)?;
        let h = setting.hamiltonian();
        let f = qfi(&rho, &h)?;
        let ip = interferometric_power(&rho)?;
        let (mean_phi, var_phi) = match estimate(&rho, &h, phi0, nu, Readout::Exact) {
            Ok(o) => (o.mean_phi, o.var_phi),
            Err(Error::PathologicalSetting(_)) => (f64::NAN, f64::NAN),
            Err(e) => return Err(e),
        };
        Ok(SuiteRow { probe: kind, p, setting, f, ip, mean_phi, var_phi })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::tests::random_state;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::FRAC_PI_4;

    fn random_qubit_hamiltonian(rng: &mut impl Rng) -> ComplexMatrix {
        hamiltonian_from_euler(rng.gen_range(0.0..6.3), rng.gen_range(0.0..3.2), rng.gen_range(0.0..6.3))
    }

    #[test]
    fn phase_application() {
        let rho = probe_state(0.6, ProbeKind::Quantum).unwrap();
        let z = pauli(Axis::Z);
        assert!(apply_phase(&rho, &z, 0.0).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);
        let phi = 0.3;
        let out = apply_phase(&rho, &z, phi).unwrap();
        let expected = rho.matrix()[(0, 3)] * C64::from_polar(1.0, -2.0 * phi);
        assert!((out.matrix()[(0, 3)] - expected).norm() < 1e-15);
        let cl = probe_state(0.6, ProbeKind::Classical).unwrap();
        let x = pauli(Axis::X);
        assert!(apply_phase(&cl, &x, 1.1).unwrap().matrix().max_abs_diff(cl.matrix()) < 1e-14);
        let mut bad = pauli(Axis::X);
        bad[(0, 1)] = C64::new(2.0, 0.0);
        assert!(matches!(apply_phase(&rho, &bad, 0.1), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn qfi_reference_values() {
        let bell = probe_state(1.0, ProbeKind::Quantum).unwrap();
        assert_abs_diff_eq!(qfi(&bell, &pauli(Axis::Z)).unwrap(), 4.0, epsilon = 1e-10);
        let cl = probe_state(0.7, ProbeKind::Classical).unwrap();
        assert!(qfi(&cl, &Setting::H3.hamiltonian()).unwrap() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(2);
        for s in Setting::ALL {
            assert!(qfi(&mixed, &s.hamiltonian()).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn qfi_pure_state_is_four_variances() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let v: Vec<C64> = (0..4).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let v: Vec<C64> = v.iter().map(|z| z / norm).collect();
            let rho = DensityMatrix::pure(&v).unwrap();
            let h = random_qubit_hamiltonian(&mut rng);
            let hf = embed(&h, 0, 2);
            let mean = hf.expectation(&v).re;
            let sq = (&hf * &hf).expectation(&v).re;
            assert_abs_diff_eq!(qfi(&rho, &h).unwrap(), 4.0 * (sq - mean * mean), epsilon = 1e-9);
        }
    }

    #[test]
    fn sld_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..20 {
            let rho = random_state(2, &mut rng);
            let h = random_qubit_hamiltonian(&mut rng);
            let phi = rng.gen_range(0.0..1.5);
            let l = sld(&rho, &h, phi).unwrap();
            let rho_phi = apply_phase(&rho, &h, phi).unwrap();
            let m = rho_phi.matrix();
            let d_rho = embed(&h, 0, 2).commutator(m).scale(C64::new(0.0, -1.0));
            let anti = (&(m * &l.matrix) + &(&l.matrix * m)).scale_real(0.5);
            assert!(anti.max_abs_diff(&d_rho) < 1e-8);
            assert!((m * &l.matrix).trace().norm() < 1e-10);
            let f2 = (&(m * &l.matrix) * &l.matrix).trace().re;
            assert_abs_diff_eq!(f2, qfi(&rho, &h).unwrap(), epsilon = 1e-8);
        }
        let q = probe_state(0.5, ProbeKind::Quantum).unwrap();
        let l = sld(&q, &Setting::H1.hamiltonian(), 0.2).unwrap();
        let rho_phi = apply_phase(&q, &Setting::H1.hamiltonian(), 0.2).unwrap();
        let f2 = (&(rho_phi.matrix() * &l.matrix) * &l.matrix).trace().re;
        assert_abs_diff_eq!(f2, qfi(&q, &Setting::H1.hamiltonian()).unwrap(), epsilon = 1e-8);
        let cl = probe_state(0.5, ProbeKind::Classical).unwrap();
        let zero = sld(&cl, &Setting::H3.hamiltonian(), 0.3).unwrap();
        assert!(zero.l_values.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn qfi_invariances() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let rho = random_state(2, &mut rng);
            let h = random_qubit_hamiltonian(&mut rng);
            let f0 = qfi(&rho, &h).unwrap();
            for k in 0..5 {
                let rotated = apply_phase(&rho, &h, 0.3 * k as f64).unwrap();
                assert_abs_diff_eq!(qfi(&rotated, &h).unwrap(), f0, epsilon = 1e-8);
            }
            let u = unitary_of(&random_qubit_hamiltonian(&mut rng), 0.7).unwrap();
            let rho_u = DensityMatrix::from_trusted(rho.matrix().conjugate_by(&embed(&u, 0, 2)));
            assert_abs_diff_eq!(qfi(&rho_u, &h.conjugate_by(&u)).unwrap(), f0, epsilon = 1e-8);
        }
    }

    #[test]
    fn ip_of_probe_families() {
        for k in 0..=4 {
            let p = 0.25 * k as f64;
            let q = probe_state(p, ProbeKind::Quantum).unwrap();
            assert_abs_diff_eq!(interferometric_power(&q).unwrap(), p * p, epsilon = 1e-9);
            let c = probe_state(p, ProbeKind::Classical).unwrap();
            assert!(interferometric_power(&c).unwrap() <= 1e-9);
        }
        let q = probe_state(0.5, ProbeKind::Quantum).unwrap();
        assert_abs_diff_eq!(interferometric_power_with_spectrum(&q, [3.0, 1.0]).unwrap(), 0.25, epsilon = 1e-9);
        assert!(interferometric_power(&DensityMatrix::maximally_mixed(1)).is_err());
    }

    #[test]
    fn ip_matrix_reproduces_qfi_quadratic_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..20 {
            let rho = random_state(2, &mut rng);
            let m = interferometric_matrix(&rho).unwrap();
            let (a, b): (f64, f64) = (rng.gen_range(0.0..3.2), rng.gen_range(0.0..6.3));
            let n = nalgebra::Vector3::new(a.sin() * b.cos(), a.sin() * b.sin(), a.cos());
            let h = ComplexMatrix::from_row_major(
                2,
                &[C64::new(n.z, 0.0), C64::new(n.x, -n.y), C64::new(n.x, n.y), C64::new(-n.z, 0.0)],
            )
            .unwrap();
            assert_abs_diff_eq!((n.transpose() * m * n)[0], 0.25 * qfi(&rho, &h).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn ip_bounded_by_every_generator_and_matches_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..5 {
            let rho = random_state(2, &mut rng);
            let ip = interferometric_power(&rho).unwrap();
            for _ in 0..200 {
                let h = random_qubit_hamiltonian(&mut rng);
                assert!(ip <= 0.25 * qfi(&rho, &h).unwrap() + 1e-9);
            }
            let search = interferometric_power_search(&rho, 1000).unwrap();
            assert!((search.value - ip).abs() <= 1e-3);
        }
        let cl = probe_state(0.8, ProbeKind::Classical).unwrap();
        assert!(interferometric_power_search(&cl, 1000).unwrap().value <= 1e-6);
    }

    #[test]
    fn ip_of_mixtures_stays_below_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let a = probe_state(0.9, ProbeKind::Quantum).unwrap();
        let b = probe_state(0.6, ProbeKind::Classical).unwrap();
        let top = interferometric_power(&a).unwrap().max(interferometric_power(&b).unwrap());
        for _ in 0..10 {
            let w = rng.gen_range(0.0..1.0);
            let mix = DensityMatrix::from_trusted(&a.matrix().scale_real(w) + &b.matrix().scale_real(1.0 - w));
            assert!(interferometric_power(&mix).unwrap() <= top + 1e-9);
        }
    }

    #[test]
    fn estimator_recovers_phase() {
        let bell = probe_state(1.0, ProbeKind::Quantum).unwrap();
        let h = Setting::H1.hamiltonian();
        let out = estimate(&bell, &h, FRAC_PI_4, 100, Readout::Exact).unwrap();
        assert_abs_diff_eq!(out.mean_phi, FRAC_PI_4, epsilon = 1e-6);
        assert_abs_diff_eq!(out.var_phi * 100.0 * out.f, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(out.d_values.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(out.f_exp, out.f, epsilon = 1e-8);
        let zero = estimate(&probe_state(0.5, ProbeKind::Quantum).unwrap(), &h, 0.0, 10, Readout::Exact).unwrap();
        assert!(zero.mean_phi.abs() < 1e-6);
        let cl = probe_state(0.5, ProbeKind::Classical).unwrap();
        assert!(matches!(
            estimate(&cl, &Setting::H3.hamiltonian(), FRAC_PI_4, 100, Readout::Exact),
            Err(Error::PathologicalSetting(_))
        ));
        assert!(estimate(&bell, &h, FRAC_PI_4, 0, Readout::Exact).is_err());
    }

    #[test]
    fn shot_noise_readout_is_seeded() {
        let q = probe_state(0.8, ProbeKind::Quantum).unwrap();
        let h = Setting::H2.hamiltonian();
        let a = estimate(&q, &h, FRAC_PI_4, 500, Readout::Shots { seed: 7 }).unwrap();
        let b = estimate(&q, &h, FRAC_PI_4, 500, Readout::Shots { seed: 7 }).unwrap();
        assert_eq!(a.d_values, b.d_values);
        assert!((a.mean_phi - FRAC_PI_4).abs() < 0.2);
        assert_abs_diff_eq!(a.d_values.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn suite_table() {
        let grid = [0.25, 0.5, 0.75, 1.0];
        let rows = blackbox_suite(&grid, &Setting::ALL, FRAC_PI_4, 100).unwrap();
        assert_eq!(rows.len(), 2 * grid.len() * 3);
        for r in &rows {
            match r.probe {
                ProbeKind::Quantum => {
                    assert!(r.f / 4.0 >= r.ip - 1e-9);
                    if r.setting != Setting::H1 {
                        assert!((r.f / 4.0 - r.ip).abs() <= 1e-6, "{r:?}");
                    }
                }
                ProbeKind::Classical => assert!(r.ip <= 1e-9),
            }
            if r.f > PATHOLOGICAL_QFI {
                assert_abs_diff_eq!(r.var_phi * 100.0 * r.f, 1.0, epsilon = 1e-9);
                assert_abs_diff_eq!(r.mean_phi, FRAC_PI_4, epsilon = 1e-6);
            } else {
                assert!(r.mean_phi.is_nan());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn qfi_nonnegative(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_state(2, &mut rng);
            let h = random_qubit_hamiltonian(&mut rng);
            let f = qfi(&rho, &h).unwrap();
            prop_assert!(f >= 0.0);
            prop_assert!(interferometric_power(&rho).unwrap() <= 0.25 * f + 1e-9);
        }
    }
}
