//! Operator-sum decoherence channels: phase damping (transverse relaxation),
//! generalized amplitude damping (longitudinal relaxation) and a global
//! two-qubit phase damping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmatrix::{embed, pauli, pauli_string, tensor, Axis, ComplexMatrix};
use crate::states::DensityMatrix;

/// Completeness residual allowed by [`KrausChannel::new`].
pub const COMPLETENESS_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::InvalidParameter("channel needs at least one Kraus operator".into()));
        };
        let dim = first.dim();
        first.n_qubits()?;
        let mut sum = ComplexMatrix::zeros(dim);
        for e in &ops {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.dim() });
            }
            sum = &sum + &(&e.adjoint() * e);
        }
        let residual = (&sum - &ComplexMatrix::identity(dim)).frobenius_norm();
        if residual > COMPLETENESS_TOLERANCE {
            return Err(Error::IncompleteChannel(residual));
        }
        Ok(Self { dim, ops })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            dim: 1 << n_qubits,
            ops: vec![ComplexMatrix::identity(1 << n_qubits)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// `‖Σ E†E − 𝕀‖_F`.
    pub fn completeness_residual(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim);
        for e in &self.ops {
            sum = &sum + &(&e.adjoint() * e);
        }
        (&sum - &ComplexMatrix::identity(self.dim)).frobenius_norm()
    }

    /// Kraus set of `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for a in &self.ops {
            for b in &other.ops {
                ops.push(tensor(a, b));
            }
        }
        Self { dim: self.dim * other.dim, ops }
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for b in &other.ops {
            for a in &self.ops {
                ops.push(b * a);
            }
        }
        Ok(Self { dim: self.dim, ops })
    }

    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: rho.dim() });
        }
        let mut out = ComplexMatrix::zeros(self.dim);
        for e in &self.ops {
            out = &out + &rho.conjugate_by(e);
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_trusted(self.apply_matrix(rho.matrix())?))
    }

    /// The same channel acting on `qubit` of an `n`-qubit register.
    fn embedded(&self, qubit: usize, n: usize) -> Self {
        Self {
            dim: 1 << n,
            ops: self.ops.iter().map(|e| embed(e, qubit, n)).collect(),
        }
    }
}

/// Applies one single-qubit channel per qubit. Equivalent to applying the
/// tensor-product Kraus set; done as successive local applications so the
/// cost stays linear in the number of qubits.
pub fn local_apply(per_qubit: &[KrausChannel], rho: &DensityMatrix) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if per_qubit.len() != n {
        return Err(Error::CountMismatch { expected: n, got: per_qubit.len() });
    }
    let mut m = rho.matrix().clone();
    for (q, ch) in per_qubit.iter().enumerate() {
        if ch.dim != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: ch.dim });
        }
        if ch.ops.len() == 1 && ch.ops[0] == ComplexMatrix::identity(2) {
            continue;
        }
        m = ch.embedded(q, n).apply_matrix(&m)?;
    }
    Ok(DensityMatrix::from_trusted(m))
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// Decay fraction `1 − e^{−t/T}`.
pub fn decay_fraction(t: f64, relaxation_time: f64) -> Result<f64> {
    if t < 0.0 || !(relaxation_time > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need t >= 0 and relaxation time > 0 (t = {t}, T = {relaxation_time})"
        )));
    }
    Ok(-(-t / relaxation_time).exp_m1())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdParams {
    pub q: f64,
}

impl PdParams {
    pub fn new(q: f64) -> Result<Self> {
        check_unit("q", q)?;
        Ok(Self { q })
    }

    /// `q = 1 − e^{−t/T₂}`.
    pub fn at_time(t: f64, t2: f64) -> Result<Self> {
        Self::new(decay_fraction(t, t2)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadParams {
    pub gamma: f64,
    pub p_bias: f64,
}

impl GadParams {
    pub fn new(gamma: f64, p_bias: f64) -> Result<Self> {
        check_unit("gamma", gamma)?;
        check_unit("p_bias", p_bias)?;
        Ok(Self { gamma, p_bias })
    }

    /// Thermal bias `p = (1 − α)/2` with `α = ħω_L/k_BT`.
    pub fn with_alpha(gamma: f64, alpha: f64) -> Result<Self> {
        Self::new(gamma, 0.5 * (1.0 - alpha))
    }

    /// `γ = 1 − e^{−t/T₁}`.
    pub fn at_time(t: f64, t1: f64, alpha: f64) -> Result<Self> {
        Self::with_alpha(decay_fraction(t, t1)?, alpha)
    }
}

pub fn pd_channel(params: PdParams) -> Result<KrausChannel> {
    check_unit("q", params.q)?;
    let q = params.q;
    KrausChannel::new(vec![
        ComplexMatrix::identity(2).scale_real((1.0 - q / 2.0).sqrt()),
        pauli(Axis::Z).scale_real((q / 2.0).sqrt()),
    ])
}

pub fn gad_channel(params: GadParams) -> Result<KrausChannel> {
    check_unit("gamma", params.gamma)?;
    check_unit("p_bias", params.p_bias)?;
    let (g, p) = (params.gamma, params.p_bias);
    let (sp, sq) = (p.sqrt(), (1.0 - p).sqrt());
    let (keep, jump) = ((1.0 - g).sqrt(), g.sqrt());
    let m = |e: [f64; 4], s: f64| ComplexMatrix::from_real_row_major(2, &e.map(|x| x * s));
    KrausChannel::new(vec![
        m([1.0, 0.0, 0.0, keep], sp)?,
        m([0.0, jump, 0.0, 0.0], sp)?,
        m([keep, 0.0, 0.0, 1.0], sq)?,
        m([0.0, 0.0, jump, 0.0], sq)?,
    ])
}

/// Two-qubit dephasing `{√(1−q/2) 𝕀, √(q/2) σz⊗σz}`: leaves the
/// `|00⟩↔|11⟩` and `|01⟩↔|10⟩` coherences untouched and damps all others
/// by `1 − q`.
pub fn gpd_channel(q: f64) -> Result<KrausChannel> {
    check_unit("q", q)?;
    KrausChannel::new(vec![
        ComplexMatrix::identity(4).scale_real((1.0 - q / 2.0).sqrt()),
        pauli_string(Axis::Z, 2).scale_real((q / 2.0).sqrt()),
    ])
}

/// Config-level description of a channel, either at a fixed strength or
/// parameterized by relaxation time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelSpec {
    Identity,
    Pd {
        #[serde(default)]
        q: Option<f64>,
        #[serde(default)]
        t2: Option<f64>,
    },
    Gad {
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default)]
        t1: Option<f64>,
        #[serde(default)]
        alpha: Option<f64>,
        #[serde(default)]
        p_bias: Option<f64>,
    },
    Gpd {
        #[serde(default)]
        q: Option<f64>,
        #[serde(default)]
        t2: Option<f64>,
    },
}

impl ChannelSpec {
    /// Number of qubits the channel acts on.
    pub fn arity(&self) -> usize {
        match self {
            ChannelSpec::Gpd { .. } => 2,
            _ => 1,
        }
    }

    /// Channel at time `t`. Fixed strengths (`q`, `gamma`) ignore `t`;
    /// otherwise the strength follows from `t2`/`t1`.
    pub fn at_time(&self, t: f64) -> Result<KrausChannel> {
        let strength = |fixed: Option<f64>, time: Option<f64>, what: &str| match (fixed, time) {
            (Some(v), _) => Ok(v),
            (None, Some(tt)) => decay_fraction(t, tt),
            (None, None) => Err(Error::InvalidParameter(format!("{what} or its relaxation time required"))),
        };
        match *self {
            ChannelSpec::Identity => Ok(KrausChannel::identity(1)),
            ChannelSpec::Pd { q, t2 } => pd_channel(PdParams::new(strength(q, t2, "q")?)?),
            ChannelSpec::Gad { gamma, t1, alpha, p_bias } => {
                let g = strength(gamma, t1, "gamma")?;
                let params = match p_bias {
                    Some(p) => GadParams::new(g, p)?,
                    None => GadParams::with_alpha(g, alpha.unwrap_or(0.0))?,
                };
                gad_channel(params)
            }
            ChannelSpec::Gpd { q, t2 } => gpd_channel(strength(q, t2, "q")?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmatrix::{C64, ONE};
    use crate::states::tests::{random_physical_triple, random_state};
    use crate::states::{bell_diagonal, correlation_triple, CorrelationTriple};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus_state() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::from_real_row_major(2, &[0.5, 0.5, 0.5, 0.5]).unwrap()).unwrap()
    }

    #[test]
    fn completeness_is_enforced() {
        let bad = vec![ComplexMatrix::identity(2).scale_real(0.9)];
        assert!(matches!(KrausChannel::new(bad), Err(Error::IncompleteChannel(_))));
        assert!(matches!(
            KrausChannel::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(4)]),
            Err(Error::DimensionMismatch { .. })
        ));
        for q in [0.0, 0.3, 1.0] {
            assert!(pd_channel(PdParams { q }).unwrap().completeness_residual() <= 1e-12);
            assert!(gpd_channel(q).unwrap().completeness_residual() <= 1e-12);
            assert!(gad_channel(GadParams { gamma: q, p_bias: 0.3 }).unwrap().completeness_residual() <= 1e-12);
        }
        assert!(pd_channel(PdParams { q: 1.2 }).is_err());
        assert!(GadParams::new(0.2, -0.1).is_err());
    }

    #[test]
    fn phase_damping_behaviour() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_state(1, &mut rng);
        assert_eq!(pd_channel(PdParams { q: 0.0 }).unwrap().apply(&rho).unwrap(), rho);
        let out = pd_channel(PdParams { q: 1.0 }).unwrap().apply(&plus_state()).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
        let p = PdParams::at_time(2.0, 2.0).unwrap();
        let out = pd_channel(p).unwrap().apply(&plus_state()).unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 1)].re, 0.5 * (-1.0f64).exp(), epsilon = 1e-15);
        let mixed = DensityMatrix::maximally_mixed(1);
        let out = pd_channel(PdParams { q: 0.4 }).unwrap().apply(&mixed).unwrap();
        assert!(out.matrix().max_abs_diff(mixed.matrix()) < 1e-15);
    }

    #[test]
    fn amplitude_damping_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = 0.3;
        let target = ComplexMatrix::diag(&[p, 1.0 - p]);
        let ch = gad_channel(GadParams { gamma: 0.2, p_bias: p }).unwrap();
        for _ in 0..5 {
            let mut rho = random_state(1, &mut rng);
            for _ in 0..200 {
                rho = ch.apply(&rho).unwrap();
            }
            assert!(rho.matrix().max_abs_diff(&target) < 1e-10);
        }
        let full = gad_channel(GadParams { gamma: 1.0, p_bias: p }).unwrap();
        let out = full.apply(&random_state(1, &mut rng)).unwrap();
        assert!(out.matrix().max_abs_diff(&target) < 1e-14);
        let rho = random_state(1, &mut rng);
        let none = gad_channel(GadParams { gamma: 0.0, p_bias: p }).unwrap();
        assert!(none.apply(&rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);
        // Non-unital away from p = 1/2.
        let mixed = DensityMatrix::maximally_mixed(1);
        assert!(ch.apply(&mixed).unwrap().matrix().max_abs_diff(mixed.matrix()) > 1e-3);
    }

    #[test]
    fn global_phase_damping() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ch = gpd_channel(0.35).unwrap();
        for _ in 0..20 {
            let c = random_physical_triple(&mut rng);
            let rho = bell_diagonal(&c).unwrap();
            assert!(ch.apply(&rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);
        }
        let rho = random_state(2, &mut rng);
        let out = ch.apply(&rho).unwrap();
        for (i, j) in [(0, 3), (3, 0), (1, 2), (2, 1)] {
            assert!((out.matrix()[(i, j)] - rho.matrix()[(i, j)]).norm() < 1e-15);
        }
        let damped = rho.matrix()[(0, 1)] * C64::new(0.65, 0.0);
        assert!((out.matrix()[(0, 1)] - damped).norm() < 1e-15);
        assert_eq!(gpd_channel(0.0).unwrap().apply(&rho).unwrap(), rho);
    }

    #[test]
    fn local_phase_damping_on_bell_diagonal() {
        let c = CorrelationTriple::new(0.3, -0.5, 0.4);
        let q = 0.25;
        let ch = pd_channel(PdParams { q }).unwrap();
        let out = local_apply(&[ch.clone(), ch.clone()], &bell_diagonal(&c).unwrap()).unwrap();
        let got = correlation_triple(&out).unwrap();
        let f = (1.0 - q) * (1.0 - q);
        assert!(got.max_abs_diff(&CorrelationTriple::new(c.c1 * f, c.c2 * f, c.c3)) < 1e-14);
        assert!(matches!(
            local_apply(&[ch], &bell_diagonal(&c).unwrap()),
            Err(Error::CountMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn local_apply_matches_tensor_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = random_state(3, &mut rng);
        let chans = [
            pd_channel(PdParams { q: 0.3 }).unwrap(),
            gad_channel(GadParams { gamma: 0.4, p_bias: 0.2 }).unwrap(),
            KrausChannel::identity(1),
        ];
        let seq = local_apply(&chans, &rho).unwrap();
        let joint = chans[0].tensor(&chans[1]).tensor(&chans[2]);
        assert!(seq.matrix().max_abs_diff(joint.apply(&rho).unwrap().matrix()) < 1e-12);
        let reversed = chans[2]
            .embedded(2, 3)
            .then(&chans[1].embedded(1, 3))
            .unwrap()
            .then(&chans[0].embedded(0, 3))
            .unwrap();
        assert!(seq.matrix().max_abs_diff(reversed.apply(&rho).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn channel_spec_from_json() {
        let spec: ChannelSpec = serde_json::from_str(r#"{"type":"pd","t2":2.0}"#).unwrap();
        let ch = spec.at_time(2.0).unwrap();
        let out = ch.apply(&plus_state()).unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 1)].re, 0.5 * (-1.0f64).exp(), epsilon = 1e-15);
        let gad: ChannelSpec = serde_json::from_str(r#"{"type":"gad","gamma":1.0,"alpha":0.2}"#).unwrap();
        let out = gad.at_time(0.0).unwrap().apply(&plus_state()).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::diag(&[0.4, 0.6])) < 1e-14);
        assert!(serde_json::from_str::<ChannelSpec>(r#"{"type":"pd","x":1}"#).is_err());
        assert!(ChannelSpec::Pd { q: None, t2: None }.at_time(1.0).is_err());
        assert_eq!(ChannelSpec::Gpd { q: Some(0.1), t2: None }.arity(), 2);
        let _ = ONE;
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pd_composition_law(q1 in 0.0f64..1.0, q2 in 0.0f64..1.0, seed in any::<u64>()) {
            let rho = random_state(1, &mut ChaCha8Rng::seed_from_u64(seed));
            let a = pd_channel(PdParams { q: q1 }).unwrap();
            let b = pd_channel(PdParams { q: q2 }).unwrap();
            let joint = pd_channel(PdParams { q: 1.0 - (1.0 - q1) * (1.0 - q2) }).unwrap();
            let two = a.apply(&b.apply(&rho).unwrap()).unwrap();
            prop_assert!(two.matrix().max_abs_diff(joint.apply(&rho).unwrap().matrix()) < 1e-10);
        }

        #[test]
        fn channels_preserve_states(g in 0.0f64..=1.0, p in 0.0f64..=1.0, seed in any::<u64>()) {
            let rho = random_state(2, &mut ChaCha8Rng::seed_from_u64(seed));
            let chans = [
                pd_channel(PdParams { q: g }).unwrap(),
                gad_channel(GadParams { gamma: g, p_bias: p }).unwrap(),
            ];
            let out = local_apply(&chans, &rho).unwrap();
            prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
            prop_assert!(out.matrix().hermiticity_defect() < 1e-14);
            prop_assert!(out.matrix().eigvalsh()[0] > -1e-12);
            let g2 = gpd_channel(g).unwrap().apply(&rho).unwrap();
            prop_assert!((g2.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }
}
