//! Correlation trajectories under decoherence, sudden-change detection and
//! the freezing analysis.
//!
//! Time-dependent channels are applied as snapshots: the state at `t` is the
//! channel at `t` applied to the initial state. Chaining step maps is only
//! valid for semigroup families and is opt-in.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channels::{local_apply, ChannelSpec, KrausChannel};
use crate::correlations::{
    entropic_discord, geometric_classical, geometric_discord, global_quantum_discord,
    quantum_mutual_information, Side,
};
use crate::error::{Error, Result};
use crate::par;
use crate::qmatrix::{pauli_string, Axis, Metric};
use crate::states::{bell_diagonal, m3n_state, CorrelationTriple, DensityMatrix};

/// Relative plateau variation below which a series counts as frozen.
pub const PLATEAU_THRESHOLD: f64 = 1e-4;
/// Default slope-jump tolerance of the change-point detector.
pub const SLOPE_TOLERANCE: f64 = 0.05;

/// Quantities that can be tabulated along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    /// Quantum mutual information.
    Mutual,
    /// Entropic classical correlation (measurement on A).
    Classical,
    /// Entropic discord (measurement on A).
    Entropic,
    Trace,
    HilbertSchmidt,
    Bures,
    FidelityBased,
    /// Geometric classical correlation.
    GeometricClassical,
    /// Global quantum discord.
    Gqd,
}

impl Quantifier {
    pub const ALL: [Quantifier; 9] = [
        Quantifier::Mutual,
        Quantifier::Classical,
        Quantifier::Entropic,
        Quantifier::Trace,
        Quantifier::HilbertSchmidt,
        Quantifier::Bures,
        Quantifier::FidelityBased,
        Quantifier::GeometricClassical,
        Quantifier::Gqd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantifier::Mutual => "mutual",
            Quantifier::Classical => "classical",
            Quantifier::Entropic => "entropic",
            Quantifier::Trace => "trace",
            Quantifier::HilbertSchmidt => "hilbert_schmidt",
            Quantifier::Bures => "bures",
            Quantifier::FidelityBased => "fidelity_based",
            Quantifier::GeometricClassical => "geometric_classical",
            Quantifier::Gqd => "gqd",
        }
    }

    pub fn metric(self) -> Option<Metric> {
        match self {
            Quantifier::Trace => Some(Metric::Trace),
            Quantifier::HilbertSchmidt => Some(Metric::HilbertSchmidt),
            Quantifier::Bures => Some(Metric::Bures),
            Quantifier::FidelityBased => Some(Metric::FidelityBased),
            _ => None,
        }
    }

    pub fn evaluate(self, rho: &DensityMatrix) -> Result<f64> {
        match self {
            Quantifier::Mutual => quantum_mutual_information(rho, &[0]),
            Quantifier::Classical => Ok(entropic_discord(rho)?.classical),
            Quantifier::Entropic => Ok(entropic_discord(rho)?.discord),
            Quantifier::GeometricClassical => geometric_classical(rho),
            Quantifier::Gqd => Ok(global_quantum_discord(rho)?.value),
            q => Ok(geometric_discord(rho, q.metric().expect("geometric"), Side::A)?.value),
        }
    }
}

impl std::str::FromStr for Quantifier {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if let Some(q) = Quantifier::ALL.into_iter().find(|q| q.name() == s) {
            return Ok(q);
        }
        match s.as_str() {
            "discord" => Ok(Quantifier::Entropic),
            "hs" => Ok(Quantifier::HilbertSchmidt),
            "fidelity" => Ok(Quantifier::FidelityBased),
            "cg" => Ok(Quantifier::GeometricClassical),
            other => Err(Error::InvalidParameter(format!("unknown quantifier '{other}'"))),
        }
    }
}

/// Sampled evolution: states, their correlation triples and any number of
/// named scalar series. The series `c1`, `c2`, `c3` are always present.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub triples: Vec<CorrelationTriple>,
    series: BTreeMap<String, Vec<f64>>,
    order: Vec<String>,
}

/// `c_i = Tr(ρ σ_i^{⊗N})`.
pub fn correlations_of(rho: &DensityMatrix) -> CorrelationTriple {
    let n = rho.n_qubits();
    CorrelationTriple::from_array(Axis::ALL.map(|a| rho.expectation(&pauli_string(a, n))))
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("times must be finite and strictly increasing".into()));
    }
    Ok(())
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        check_times(&times)?;
        if states.len() != times.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: states.len() });
        }
        let triples: Vec<CorrelationTriple> = states.iter().map(correlations_of).collect();
        let mut traj = Self {
            times,
            states,
            triples,
            series: BTreeMap::new(),
            order: Vec::new(),
        };
        for (k, name) in ["c1", "c2", "c3"].into_iter().enumerate() {
            let v = traj.triples.iter().map(|c| c.as_array()[k]).collect();
            traj.insert_series(name, v)?;
        }
        Ok(traj)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn insert_series(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.times.len() {
            return Err(Error::DimensionMismatch { expected: self.times.len(), got: values.len() });
        }
        if self.series.insert(name.to_string(), values).is_none() {
            self.order.push(name.to_string());
        }
        Ok(())
    }

    pub fn series(&self, name: &str) -> Result<&[f64]> {
        self.series
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingSeries(name.to_string()))
    }

    /// Series names in insertion order.
    pub fn series_names(&self) -> &[String] {
        &self.order
    }

    /// Evaluates `q` on every state (in parallel) and stores it under its name.
    pub fn compute(&mut self, q: Quantifier) -> Result<&[f64]> {
        let values: Result<Vec<f64>> = par::map(&self.states, |rho| q.evaluate(rho)).into_iter().collect();
        self.insert_series(q.name(), values?)?;
        self.series(q.name())
    }
}

/// `n` uniform samples on `[0, t_max]`.
pub fn uniform_times(t_max: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0];
    }
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

/// 200 samples over `[0, 5/(2γ)]`.
pub fn default_times(gamma: f64) -> Vec<f64> {
    uniform_times(5.0 / (2.0 * gamma), 200)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("decay rate must be positive, got {gamma}")));
    }
    Ok(())
}

/// Bell-diagonal state under independent phase damping on both qubits,
/// `q_j(t) = 1 − e^{−γ_j t}`: `c₁,c₂ ∝ e^{−(γ_A+γ_B)t}`, `c₃` constant.
pub fn evolve_bd_pd_rates(c0: &CorrelationTriple, gammas: [f64; 2], times: &[f64]) -> Result<Trajectory> {
    gammas.iter().try_for_each(|&g| check_gamma(g))?;
    bell_diagonal(c0)?;
    check_times(times)?;
    let rate = gammas[0] + gammas[1];
    let states: Result<Vec<DensityMatrix>> = par::map(times, |&t| {
        let f = (-rate * t).exp();
        bell_diagonal(&CorrelationTriple::new(c0.c1 * f, c0.c2 * f, c0.c3))
    })
    .into_iter()
    .collect();
    Trajectory::new(times.to_vec(), states?)
}

/// Equal rates on both qubits: `c₁,c₂ ∝ e^{−2γt}`.
pub fn evolve_bd_pd(c0: &CorrelationTriple, gamma: f64, times: &[f64]) -> Result<Trajectory> {
    evolve_bd_pd_rates(c0, [gamma, gamma], times)
}

/// Rate entering the freezing-time formula when the two qubits dephase at
/// different rates: the mean, so that `c₁ ∝ e^{−2γ_eff t}`.
pub fn effective_gamma(gammas: [f64; 2]) -> f64 {
    0.5 * (gammas[0] + gammas[1])
}

/// Same family parameterized directly by the per-qubit damping strength
/// `p ∈ [0, 1]`: `c₁,c₂ ∝ (1 − p)²`. The returned trajectory's time axis
/// holds the `p` values.
pub fn evolve_bd_pd_strength(c0: &CorrelationTriple, strengths: &[f64]) -> Result<Trajectory> {
    bell_diagonal(c0)?;
    check_times(strengths)?;
    if strengths.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidParameter("damping strengths must lie in [0, 1]".into()));
    }
    let states: Result<Vec<DensityMatrix>> = par::map(strengths, |&p| {
        let f = (1.0 - p) * (1.0 - p);
        bell_diagonal(&CorrelationTriple::new(c0.c1 * f, c0.c2 * f, c0.c3))
    })
    .into_iter()
    .collect();
    Trajectory::new(strengths.to_vec(), states?)
}

/// One channel per qubit, or one channel on the whole register.
#[derive(Clone, Debug)]
pub enum ChannelLayer {
    Local(Vec<KrausChannel>),
    Global(KrausChannel),
}

impl ChannelLayer {
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match self {
            ChannelLayer::Local(chs) => local_apply(chs, rho),
            ChannelLayer::Global(ch) => ch.apply(rho),
        }
    }

    /// Layer described by config specs: a single two-qubit spec acts
    /// globally, a single one-qubit spec is applied to every qubit, and
    /// otherwise one spec per qubit is required.
    pub fn from_specs(specs: &[ChannelSpec], n_qubits: usize, t: f64) -> Result<Self> {
        match specs {
            [] => Err(Error::InvalidParameter("no channel given".into())),
            [single] if single.arity() == n_qubits && n_qubits > 1 => Ok(ChannelLayer::Global(single.at_time(t)?)),
            [single] if single.arity() == 1 => {
                let ch = single.at_time(t)?;
                Ok(ChannelLayer::Local(vec![ch; n_qubits]))
            }
            many => {
                if many.len() != n_qubits {
                    return Err(Error::CountMismatch { expected: n_qubits, got: many.len() });
                }
                if many.iter().any(|s| s.arity() != 1) {
                    return Err(Error::InvalidParameter("per-qubit specs must be single-qubit channels".into()));
                }
                Ok(ChannelLayer::Local(many.iter().map(|s| s.at_time(t)).collect::<Result<_>>()?))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionMode {
    /// Channel at `t` applied to the initial state.
    #[default]
    Snapshot,
    /// Channel for each step `t_k − t_{k−1}` applied to the previous state.
    /// Exact only for semigroup families.
    Chained,
}

/// Evolves `rho0` under a time-parameterized channel family.
pub fn evolve_general<F>(rho0: &DensityMatrix, family: F, times: &[f64], mode: EvolutionMode) -> Result<Trajectory>
where
    F: Fn(f64) -> Result<ChannelLayer> + Sync + Send,
{
    check_times(times)?;
    let states: Vec<DensityMatrix> = match mode {
        EvolutionMode::Snapshot => par::map(times, |&t| family(t)?.apply(rho0))
            .into_iter()
            .collect::<Result<_>>()?,
        EvolutionMode::Chained => {
            let mut out = Vec::with_capacity(times.len());
            let mut current = family(times[0])?.apply(rho0)?;
            out.push(current.clone());
            for w in times.windows(2) {
                current = family(w[1] - w[0])?.apply(&current)?;
                out.push(current.clone());
            }
            out
        }
    };
    Trajectory::new(times.to_vec(), states)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChangeKind {
    /// Coincides with a reordering of the `|c_i|`.
    OrderingSwitch,
    SlopeDiscontinuity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    pub time: f64,
    pub kind: ChangeKind,
    pub series: String,
}

/// Finds kinks in a series: interior samples whose one-sided slopes differ
/// by more than `tol · max|slope|`. Flags within one grid step of each other
/// are merged and the kink is placed where the straight lines of the
/// bracketing segments intersect. A kink needs two segments on each side
/// whose slopes agree to within half the jump; this rejects the steep but
/// smooth behaviour of entropies next to a pure or rank-deficient endpoint.
pub fn detect_sudden_changes(traj: &Trajectory, series: &str, tol: f64) -> Result<Vec<ChangePoint>> {
    let v = traj.series(series)?;
    let t = &traj.times;
    let n = v.len();
    if n < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: n });
    }
    let slopes: Vec<f64> = (0..n - 1).map(|k| (v[k + 1] - v[k]) / (t[k + 1] - t[k])).collect();
    let max_slope = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if max_slope == 0.0 {
        return Ok(Vec::new());
    }
    let flagged: Vec<usize> = (1..n - 1)
        .filter(|&i| (slopes[i] - slopes[i - 1]).abs() > tol * max_slope)
        .collect();

    let mut groups: Vec<(usize, usize)> = Vec::new();
    for i in flagged {
        match groups.last_mut() {
            Some((_, b)) if i <= *b + 1 => *b = i,
            _ => groups.push((i, i)),
        }
    }

    let gaps: Vec<[f64; 3]> = traj
        .triples
        .iter()
        .map(|c| {
            let a = c.as_array().map(f64::abs);
            [a[0] - a[1], a[0] - a[2], a[1] - a[2]]
        })
        .collect();

    let supported = |&(a, b): &(usize, usize)| {
        if a < 2 || b + 2 > n - 1 {
            return false;
        }
        let jump = (slopes[b] - slopes[a - 1]).abs();
        (slopes[a - 1] - slopes[a - 2]).abs() < 0.5 * jump && (slopes[b + 1] - slopes[b]).abs() < 0.5 * jump
    };

    Ok(groups
        .into_iter()
        .filter(supported)
        .map(|(a, b)| {
            let (sl, sr) = (slopes[a - 1], slopes[b]);
            let (lo, hi) = (t[a - 1], t[b + 1]);
            let time = if (sl - sr).abs() > f64::EPSILON * max_slope {
                // v[a-1] + sl (x − t[a-1]) = v[b] + sr (x − t[b])
                let x = (v[b] - sr * t[b] - v[a - 1] + sl * t[a - 1]) / (sl - sr);
                x.clamp(lo, hi)
            } else {
                t[a]
            };
            let window = &gaps[a.saturating_sub(2)..(b + 3).min(n)];
            let switched = (0..3).any(|k| {
                let signs: Vec<f64> = window.iter().map(|g| g[k]).filter(|x| x.abs() > 1e-12).map(f64::signum).collect();
                signs.windows(2).any(|w| w[0] != w[1])
            });
            ChangePoint {
                time,
                kind: if switched { ChangeKind::OrderingSwitch } else { ChangeKind::SlopeDiscontinuity },
                series: series.to_string(),
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreezeReport {
    pub frozen: bool,
    pub t_star: f64,
    /// `(max − min)/|value at 0|` over samples before `t*`.
    pub plateau_relative_variation: Option<f64>,
    /// Whether the series strictly decreases after `t*`.
    pub decreasing_after: Option<bool>,
}

/// Predicted end of the plateau, `t* = ln(|c₁(0)|/|c₃(0)|)/(2γ)`, and
/// whether the triple meets the freezing condition `c₁ = ±1`, `c₂ = ∓c₃`.
pub fn freezing_time(c0: &CorrelationTriple, gamma: f64) -> Result<FreezeReport> {
    check_gamma(gamma)?;
    let t_star = crossing_time(c0, 2.0 * gamma)?;
    let frozen = (c0.c1.abs() - 1.0).abs() <= 1e-9 && (c0.c2 + c0.c1.signum() * c0.c3).abs() <= 1e-9;
    Ok(FreezeReport {
        frozen,
        t_star,
        plateau_relative_variation: None,
        decreasing_after: None,
    })
}

/// Time at which `|c₁| e^{−rate·t}` reaches `|c₃|`.
fn crossing_time(c0: &CorrelationTriple, rate: f64) -> Result<f64> {
    if c0.c3 == 0.0 {
        return Err(Error::InvalidParameter("t* undefined for c3 = 0".into()));
    }
    if c0.c3.abs() > c0.c1.abs() {
        return Err(Error::InvalidParameter("t* requires |c3| <= |c1|".into()));
    }
    Ok((c0.c1.abs() / c0.c3.abs()).ln() / rate)
}

fn plateau_analysis(times: &[f64], values: &[f64], t_star: f64) -> (f64, bool) {
    let before: Vec<f64> = times.iter().zip(values).filter(|(t, _)| **t < t_star).map(|(_, v)| *v).collect();
    let variation = if before.is_empty() {
        0.0
    } else {
        let max = before.iter().cloned().fold(f64::MIN, f64::max);
        let min = before.iter().cloned().fold(f64::MAX, f64::min);
        let scale = before[0].abs();
        if scale > 0.0 {
            (max - min) / scale
        } else {
            max - min
        }
    };
    let after: Vec<f64> = times.iter().zip(values).filter(|(t, _)| **t > t_star).map(|(_, v)| *v).collect();
    let decreasing = after.windows(2).all(|w| w[1] < w[0]);
    (variation, decreasing)
}

/// Evolves `c0` under phase damping and checks that `quantifier` stays
/// constant (relative variation below `threshold`) before `t*` and
/// decreases after it.
pub fn verify_freezing(
    c0: &CorrelationTriple,
    gamma: f64,
    quantifier: Quantifier,
    times: Option<&[f64]>,
    threshold: f64,
) -> Result<FreezeReport> {
    let nominal = freezing_time(c0, gamma)?;
    let default;
    let times = match times {
        Some(t) => t,
        None => {
            default = default_times(gamma);
            &default
        }
    };
    let mut traj = evolve_bd_pd(c0, gamma, times)?;
    let values = traj.compute(quantifier)?.to_vec();
    let (variation, decreasing) = plateau_analysis(times, &values, nominal.t_star);
    Ok(FreezeReport {
        frozen: variation < threshold,
        t_star: nominal.t_star,
        plateau_relative_variation: Some(variation),
        decreasing_after: Some(decreasing),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DynamicsCase {
    /// `|c₃| ≥ |c₁|, |c₂|`: classical correlation unaffected by dephasing.
    #[serde(rename = "i")]
    CaseI,
    /// `c₃ = 0`: monotone decay of everything.
    #[serde(rename = "ii")]
    CaseII,
    /// Largest `|c|` in the dephased plane with `c₃ ≠ 0`: sudden change.
    #[serde(rename = "iii")]
    CaseIII,
}

pub fn classify_dynamics(c: &CorrelationTriple) -> DynamicsCase {
    let [a1, a2, a3] = c.as_array().map(f64::abs);
    if c.c3 == 0.0 {
        DynamicsCase::CaseII
    } else if a3 >= a1 && a3 >= a2 {
        DynamicsCase::CaseI
    } else {
        DynamicsCase::CaseIII
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ParityScan {
    pub n_qubits: usize,
    pub plateau_detected: bool,
    pub t_star: f64,
    pub plateau_relative_variation: f64,
    pub decreasing_after: bool,
    pub times: Vec<f64>,
    pub series: Vec<f64>,
}

/// Global quantum discord of `m3n(c(t), n)` under phase damping on every
/// qubit, where `c₁,c₂ ∝ e^{−nγt}`; the plateau rule is applied before the
/// crossing time `ln(|c₁|/|c₃|)/(nγ)`.
pub fn gqd_parity_scan(
    n: usize,
    c0: &CorrelationTriple,
    gamma: f64,
    times: Option<&[f64]>,
    threshold: f64,
) -> Result<ParityScan> {
    check_gamma(gamma)?;
    m3n_state(c0, n)?;
    let rate = n as f64 * gamma;
    let t_star = crossing_time(c0, rate)?;
    let times = match times {
        Some(t) => t.to_vec(),
        None => uniform_times(5.0 / rate, 200),
    };
    check_times(&times)?;
    let values: Vec<f64> = par::map(&times, |&t| {
        let f = (-rate * t).exp();
        let rho = m3n_state(&CorrelationTriple::new(c0.c1 * f, c0.c2 * f, c0.c3), n)?;
        Ok(global_quantum_discord(&rho)?.value)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let (variation, decreasing) = plateau_analysis(&times, &values, t_star);
    Ok(ParityScan {
        n_qubits: n,
        plateau_detected: variation < threshold,
        t_star,
        plateau_relative_variation: variation,
        decreasing_after: decreasing,
        times,
        series: values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{gad_channel, gpd_channel, pd_channel, GadParams, PdParams};
    use crate::states::tests::random_physical_triple;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_pd_matches_kraus() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let gamma = 1.3;
        let times = uniform_times(2.0, 50);
        for _ in 0..5 {
            let c0 = random_physical_triple(&mut rng);
            let closed = evolve_bd_pd(&c0, gamma, &times).unwrap();
            let kraus = evolve_general(
                &bell_diagonal(&c0).unwrap(),
                |t| {
                    let ch = pd_channel(PdParams::new(-(-gamma * t).exp_m1())?)?;
                    Ok(ChannelLayer::Local(vec![ch.clone(), ch]))
                },
                &times,
                EvolutionMode::Snapshot,
            )
            .unwrap();
            for (a, b) in closed.states.iter().zip(&kraus.states) {
                assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-10);
            }
            assert!(closed.series("c3").unwrap().iter().all(|&x| x == c0.c3));
        }
        let c0 = CorrelationTriple::new(0.6, -0.2, 0.1);
        let t = evolve_bd_pd(&c0, gamma, &[0.0, std::f64::consts::LN_2 / (2.0 * gamma)]).unwrap();
        assert!(t.triples[0].max_abs_diff(&c0) < 1e-15);
        assert_abs_diff_eq!(t.triples[1].c1, 0.3, epsilon = 1e-15);
        assert!(evolve_bd_pd(&CorrelationTriple::new(1.0, 1.0, 1.0), 1.0, &times).is_err());
        assert!(evolve_bd_pd(&c0, 0.0, &times).is_err());
        assert!(evolve_bd_pd(&c0, 1.0, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn chained_matches_snapshot_for_semigroup() {
        let c0 = CorrelationTriple::new(0.5, -0.3, 0.2);
        let times = uniform_times(1.0, 11);
        let family = |t: f64| {
            let ch = pd_channel(PdParams::new(-(-0.7 * t).exp_m1())?)?;
            Ok(ChannelLayer::Local(vec![ch.clone(), ch]))
        };
        let rho0 = bell_diagonal(&c0).unwrap();
        let a = evolve_general(&rho0, family, &times, EvolutionMode::Snapshot).unwrap();
        let b = evolve_general(&rho0, family, &times, EvolutionMode::Chained).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!(x.matrix().max_abs_diff(y.matrix()) < 1e-12);
        }
    }

    #[test]
    fn identity_and_gpd_families_are_constant() {
        let c0 = CorrelationTriple::new(0.3, 0.2, -0.4);
        let rho0 = bell_diagonal(&c0).unwrap();
        let times = uniform_times(3.0, 10);
        let id = evolve_general(
            &rho0,
            |_| Ok(ChannelLayer::Local(vec![KrausChannel::identity(1); 2])),
            &times,
            EvolutionMode::Snapshot,
        )
        .unwrap();
        let gpd = evolve_general(
            &rho0,
            |t| Ok(ChannelLayer::Global(gpd_channel(-(-t).exp_m1())?)),
            &times,
            EvolutionMode::Snapshot,
        )
        .unwrap();
        for traj in [id, gpd] {
            assert!(traj.triples.iter().all(|c| c.max_abs_diff(&c0) < 1e-14));
        }
    }

    #[test]
    fn amplitude_damping_at_infinite_temperature() {
        let c0 = CorrelationTriple::new(0.08, 0.14, 0.16);
        let times = uniform_times(2.0, 21);
        let traj = evolve_general(
            &bell_diagonal(&c0).unwrap(),
            |t| {
                let ch = gad_channel(GadParams::at_time(t, 1.0, 0.0)?)?;
                Ok(ChannelLayer::Local(vec![ch.clone(), ch]))
            },
            &times,
            EvolutionMode::Snapshot,
        )
        .unwrap();
        for (t, c) in times.iter().zip(&traj.triples) {
            let g = -(-t).exp_m1();
            assert_abs_diff_eq!(c.c1, c0.c1 * (1.0 - g), epsilon = 1e-12);
            assert_abs_diff_eq!(c.c2, c0.c2 * (1.0 - g), epsilon = 1e-12);
            assert_abs_diff_eq!(c.c3, c0.c3 * (1.0 - g) * (1.0 - g), epsilon = 1e-12);
        }
    }

    #[test]
    fn layer_from_specs() {
        let pd = ChannelSpec::Pd { q: Some(0.2), t2: None };
        let gpd = ChannelSpec::Gpd { q: Some(0.2), t2: None };
        assert!(matches!(ChannelLayer::from_specs(&[pd.clone()], 3, 0.0).unwrap(), ChannelLayer::Local(v) if v.len() == 3));
        assert!(matches!(ChannelLayer::from_specs(&[gpd.clone()], 2, 0.0).unwrap(), ChannelLayer::Global(_)));
        assert!(ChannelLayer::from_specs(&[pd.clone(), pd.clone()], 3, 0.0).is_err());
        assert!(ChannelLayer::from_specs(&[pd, gpd], 2, 0.0).is_err());
        assert!(ChannelLayer::from_specs(&[], 2, 0.0).is_err());
    }

    #[test]
    fn change_points_on_geometric_series() {
        let gamma = 1.0;
        let c0 = CorrelationTriple::new(0.49, 0.20, 0.067);
        let times = default_times(gamma);
        let mut traj = evolve_bd_pd(&c0, gamma, &times).unwrap();
        traj.compute(Quantifier::Trace).unwrap();
        traj.compute(Quantifier::GeometricClassical).unwrap();
        let step = times[1] - times[0];
        let trace = detect_sudden_changes(&traj, "trace", SLOPE_TOLERANCE).unwrap();
        assert_eq!(trace.len(), 2, "{trace:?}");
        let t1 = (0.20f64 / 0.067).ln() / (2.0 * gamma);
        let t2 = (0.49f64 / 0.067).ln() / (2.0 * gamma);
        assert!((trace[0].time - t1).abs() < step);
        assert!((trace[1].time - t2).abs() < step);
        assert!(trace.iter().all(|c| c.kind == ChangeKind::OrderingSwitch));
        let classical = detect_sudden_changes(&traj, "geometric_classical", SLOPE_TOLERANCE).unwrap();
        assert_eq!(classical.len(), 1);
        assert!((classical[0].time - t2).abs() < step);
    }

    #[test]
    fn change_point_edge_cases() {
        let times = uniform_times(1.0, 10);
        let c0 = CorrelationTriple::new(0.0, 0.0, 0.5);
        let traj = evolve_bd_pd(&c0, 1.0, &times).unwrap();
        assert!(detect_sudden_changes(&traj, "c3", SLOPE_TOLERANCE).unwrap().is_empty());
        assert!(matches!(detect_sudden_changes(&traj, "nope", 0.05), Err(Error::MissingSeries(_))));
        let short = evolve_bd_pd(&c0, 1.0, &[0.0, 0.1, 0.2]).unwrap();
        assert!(matches!(detect_sudden_changes(&short, "c3", 0.05), Err(Error::TooFewSamples { .. })));
        // A kink without any reordering of |c_i|.
        let mut traj = evolve_bd_pd(&c0, 1.0, &uniform_times(1.0, 11)).unwrap();
        let v: Vec<f64> = traj.times.iter().map(|&t| if t < 0.45 { t } else { 0.45 }).collect();
        traj.insert_series("bent", v).unwrap();
        let cp = detect_sudden_changes(&traj, "bent", 0.05).unwrap();
        assert_eq!(cp.len(), 1);
        assert_abs_diff_eq!(cp[0].time, 0.45, epsilon = 1e-12);
        assert_eq!(cp[0].kind, ChangeKind::SlopeDiscontinuity);
    }

    #[test]
    fn freezing_time_formula() {
        let r = freezing_time(&CorrelationTriple::new(1.0, 0.7, -0.7), 1.0).unwrap();
        assert!(r.frozen);
        assert_abs_diff_eq!(r.t_star, (10.0f64 / 7.0).ln() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(freezing_time(&CorrelationTriple::new(1.0, -1.0, 1.0), 1.0).unwrap().t_star, 0.0);
        assert!(!freezing_time(&CorrelationTriple::new(0.9, 0.5, -0.5), 1.0).unwrap().frozen);
        assert!(freezing_time(&CorrelationTriple::new(1.0, 0.0, 0.0), 1.0).is_err());
        assert!(freezing_time(&CorrelationTriple::new(0.2, 0.0, 0.5), 1.0).is_err());
        assert_abs_diff_eq!(effective_gamma([1.0 / 0.27, 1.0 / 0.15]), 0.5 * (1.0 / 0.27 + 1.0 / 0.15));
    }

    #[test]
    fn freezing_verified_for_trace_and_broken_off_condition() {
        let frozen = verify_freezing(&CorrelationTriple::new(1.0, 0.5, -0.5), 1.0, Quantifier::Trace, None, PLATEAU_THRESHOLD).unwrap();
        assert!(frozen.frozen && frozen.decreasing_after == Some(true));
        assert_abs_diff_eq!(frozen.t_star, std::f64::consts::LN_2 / 2.0, epsilon = 1e-15);
        let off = verify_freezing(&CorrelationTriple::new(0.8, 0.5, -0.5), 1.0, Quantifier::Entropic, None, PLATEAU_THRESHOLD).unwrap();
        assert!(!off.frozen);
        assert!(off.plateau_relative_variation.unwrap() > 1e-3);
    }

    #[test]
    fn classification() {
        assert_eq!(classify_dynamics(&CorrelationTriple::new(0.06, 0.30, 0.33)), DynamicsCase::CaseI);
        assert_eq!(classify_dynamics(&CorrelationTriple::new(0.25, 0.25, 0.0)), DynamicsCase::CaseII);
        assert_eq!(classify_dynamics(&CorrelationTriple::new(1.0, -0.6, 0.6)), DynamicsCase::CaseIII);
    }

    #[test]
    fn case_one_keeps_classical_and_case_two_decays() {
        let times = uniform_times(2.0, 30);
        let mut t1 = evolve_bd_pd(&CorrelationTriple::new(0.06, 0.30, 0.33), 1.0, &times).unwrap();
        let classical = t1.compute(Quantifier::Classical).unwrap().to_vec();
        assert!(classical.iter().all(|x| (x - classical[0]).abs() < 1e-6));
        let d = t1.compute(Quantifier::Entropic).unwrap();
        assert!(d.last().unwrap() < &d[0]);
        let mut t2 = evolve_bd_pd(&CorrelationTriple::new(0.25, 0.25, 0.0), 1.0, &times).unwrap();
        for q in [Quantifier::Mutual, Quantifier::Classical, Quantifier::Entropic] {
            let v = t2.compute(q).unwrap();
            assert!(v.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{q:?}");
        }
    }

    #[test]
    fn gqd_plateau_depends_on_parity() {
        let two = gqd_parity_scan(2, &CorrelationTriple::new(1.0, 0.7, -0.7), 1.0, None, PLATEAU_THRESHOLD).unwrap();
        let three = gqd_parity_scan(3, &CorrelationTriple::new(0.7, 0.3, 0.3), 1.0, None, PLATEAU_THRESHOLD).unwrap();
        let four = gqd_parity_scan(4, &CorrelationTriple::new(1.0, 0.7, 0.7), 1.0, None, PLATEAU_THRESHOLD).unwrap();
        assert!(two.plateau_detected && two.decreasing_after);
        assert!(!three.plateau_detected);
        assert!(three.series.windows(2).all(|w| w[1] < w[0]));
        assert!(four.plateau_detected && four.decreasing_after);
    }

    #[test]
    fn quantifier_names_round_trip() {
        for q in Quantifier::ALL {
            assert_eq!(q.name().parse::<Quantifier>().unwrap(), q);
        }
        assert!("nonsense".parse::<Quantifier>().is_err());
    }
}
