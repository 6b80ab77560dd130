//! Rotating-frame Bloch equations and the single-spin pulse picture.
//!
//! Angular frequencies are in rad/s, times in seconds. The classical
//! dynamics is `dM/dt = f − Ã M` with
//!
//! ```text
//!     | 1/T2  −Δω    0   |        | 0     |
//! Ã = | +Δω   1/T2  −ω1  |,   f = | 0     |
//!     | 0     ω1    1/T1 |        | M0/T1 |
//! ```

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::qmatrix::{pauli, unitary_of, Axis, C64};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Nuclear magneton, J/T.
pub const NUCLEAR_MAGNETON: f64 = 5.050_783_7393e-27;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochParams {
    pub m0: f64,
    /// Longitudinal relaxation time; `f64::INFINITY` disables it.
    pub t1: f64,
    /// Transverse relaxation time; `f64::INFINITY` disables it.
    pub t2: f64,
    pub delta_omega: f64,
    pub omega1: f64,
    pub b0: f64,
}

impl BlochParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if !(self.t1 > 0.0) || !(self.t2 > 0.0) {
            return bad("T1 and T2 must be positive");
        }
        if self.t2 > 2.0 * self.t1 {
            return bad("T2 must not exceed 2·T1");
        }
        if !(self.m0 >= 0.0) || !self.m0.is_finite() {
            return bad("M0 must be finite and non-negative");
        }
        if !self.delta_omega.is_finite() || !self.omega1.is_finite() || !self.b0.is_finite() {
            return bad("frequencies and B0 must be finite");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Magnetization {
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

impl Magnetization {
    pub fn new(mx: f64, my: f64, mz: f64) -> Self {
        Self { mx, my, mz }
    }

    pub fn equilibrium(m0: f64) -> Self {
        Self::new(0.0, 0.0, m0)
    }

    pub fn norm(&self) -> f64 {
        self.as_vector().norm()
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.mx, self.my, self.mz)
    }

    fn from_vector(v: Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.as_vector() - other.as_vector()).norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinPulse {
    /// Larmor frequency.
    pub omega0: f64,
    pub omega1: f64,
    pub delta_omega: f64,
    /// Pulse duration.
    pub tau: f64,
}

impl SpinPulse {
    /// Effective nutation frequency `Ω = √(Δω² + ω1²)`.
    pub fn omega_big(&self) -> f64 {
        self.delta_omega.hypot(self.omega1)
    }

    /// `(ω1/Ω)² sin²(Ωτ/2)`, the inverted population fraction.
    pub fn flip_fraction(&self) -> f64 {
        flip_fraction(self.omega1, self.omega_big(), self.tau)
    }
}

fn flip_fraction(omega1: f64, omega: f64, t: f64) -> f64 {
    if omega == 0.0 {
        return 0.0;
    }
    let s = (0.5 * omega * t).sin();
    (omega1 / omega).powi(2) * s * s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxationSystem {
    pub a: Matrix3<f64>,
    pub f: Vector3<f64>,
}

pub fn relaxation_operator(p: &BlochParams) -> Result<RelaxationSystem> {
    p.validate()?;
    let (r1, r2) = (1.0 / p.t1, 1.0 / p.t2);
    let a = Matrix3::new(
        r2, -p.delta_omega, 0.0, //
        p.delta_omega, r2, -p.omega1, //
        0.0, p.omega1, r1,
    );
    Ok(RelaxationSystem {
        a,
        f: Vector3::new(0.0, 0.0, p.m0 * r1),
    })
}

/// Steady state `Ã⁻¹ f`.
pub fn stationary(p: &BlochParams) -> Result<Magnetization> {
    let sys = relaxation_operator(p)?;
    solve_stationary(&sys)
}

fn solve_stationary(sys: &RelaxationSystem) -> Result<Magnetization> {
    if sys.f.norm() == 0.0 {
        return Ok(Magnetization::default());
    }
    let lu = sys.a.lu();
    let x = lu.solve(&sys.f).ok_or(Error::SingularSystem)?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(Magnetization::from_vector(x))
}

/// `M(t) = M∞ + exp(−Ãt)(M(0) − M∞)`.
pub fn evolve(p: &BlochParams, m_init: Magnetization, t: f64) -> Result<Magnetization> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("negative time {t}")));
    }
    let sys = relaxation_operator(p)?;
    let m_inf = solve_stationary(&sys)?;
    if t == 0.0 {
        return Ok(m_init);
    }
    let prop = (sys.a * (-t)).exp();
    Ok(Magnetization::from_vector(
        m_inf.as_vector() + prop * (m_init.as_vector() - m_inf.as_vector()),
    ))
}

/// Samples [`evolve`] on a time grid.
pub fn trajectory(
    p: &BlochParams,
    m_init: Magnetization,
    times: &[f64],
) -> Result<Vec<Magnetization>> {
    par::map(times, |&t| evolve(p, m_init, t))
        .into_iter()
        .collect()
}

/// Relaxation-free precession from equilibrium, integrator-consistent form:
/// `Mx = 2M0 (ω1Δω/Ω²) sin²(Ωt/2)`, `My = M0 (ω1/Ω) sin(Ωt)`,
/// `Mz = M0 [1 − 2(ω1²/Ω²) sin²(Ωt/2)]`.
pub fn no_relaxation(m0: f64, sp: &SpinPulse, t: f64) -> Magnetization {
    let omega = sp.omega_big();
    if omega == 0.0 {
        return Magnetization::equilibrium(m0);
    }
    let s2 = (0.5 * omega * t).sin().powi(2);
    Magnetization::new(
        2.0 * m0 * sp.omega1 * sp.delta_omega / (omega * omega) * s2,
        m0 * sp.omega1 / omega * (omega * t).sin(),
        m0 * (1.0 - 2.0 * (sp.omega1 / omega).powi(2) * s2),
    )
}

/// The commonly quoted closed form with `Mx = −2M0(ω1Δω/Ω²)sin²(Ωt/2)` and
/// `My = −M0(ω1/Ω)sin(Ωt/2)`. Its `Mz` is exact; its transverse components
/// disagree with the Bloch integrator (see [`closed_form_discrepancy`]).
pub fn no_relaxation_quoted(m0: f64, sp: &SpinPulse, t: f64) -> Magnetization {
    let omega = sp.omega_big();
    if omega == 0.0 {
        return Magnetization::equilibrium(m0);
    }
    let half = 0.5 * omega * t;
    let s2 = half.sin().powi(2);
    Magnetization::new(
        -2.0 * m0 * sp.omega1 * sp.delta_omega / (omega * omega) * s2,
        -m0 * sp.omega1 / omega * half.sin(),
        m0 * (1.0 - 2.0 * (sp.omega1 / omega).powi(2) * s2),
    )
}

/// Relaxation-free integrator: `exp(−Ãt) M(0)` with `1/T1 = 1/T2 = 0`.
pub fn integrate_without_relaxation(m0: f64, sp: &SpinPulse, t: f64) -> Magnetization {
    let p = BlochParams {
        m0,
        t1: f64::INFINITY,
        t2: f64::INFINITY,
        delta_omega: sp.delta_omega,
        omega1: sp.omega1,
        b0: 0.0,
    };
    evolve(&p, Magnetization::equilibrium(m0), t).expect("relaxation-free system is always valid")
}

/// Per-component absolute deviation of a closed form from the integrator,
/// maximized over `times`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComponentDeviation {
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

pub fn closed_form_discrepancy(
    closed: impl Fn(f64, &SpinPulse, f64) -> Magnetization,
    m0: f64,
    sp: &SpinPulse,
    times: &[f64],
) -> ComponentDeviation {
    let mut dev = ComponentDeviation { mx: 0.0, my: 0.0, mz: 0.0 };
    for &t in times {
        let a = closed(m0, sp, t);
        let b = integrate_without_relaxation(m0, sp, t);
        dev.mx = dev.mx.max((a.mx - b.mx).abs());
        dev.my = dev.my.max((a.my - b.my).abs());
        dev.mz = dev.mz.max((a.mz - b.mz).abs());
    }
    dev
}

/// Work done by a pulse on the classical magnetization: `2 B0 M0 (ω1/Ω)² sin²(Ωτ/2)`.
pub fn classical_work(m0: f64, b0: f64, sp: &SpinPulse) -> f64 {
    2.0 * b0 * m0 * sp.flip_fraction()
}

/// Effective-field direction `σ_u = (Δω/Ω)σz − (ω1/Ω)σx`.
fn sigma_u(sp: &SpinPulse) -> crate::qmatrix::ComplexMatrix {
    let omega = sp.omega_big();
    let z = pauli(Axis::Z).scale_real(sp.delta_omega / omega);
    let x = pauli(Axis::X).scale_real(sp.omega1 / omega);
    &z - &x
}

/// `exp(−i(Ωτ/2)σ_u)|↑⟩` as amplitudes `[⟨↑|ψ⟩, ⟨↓|ψ⟩]`.
pub fn pulse_state(sp: &SpinPulse) -> [C64; 2] {
    let omega = sp.omega_big();
    if omega == 0.0 {
        return [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    }
    let u = unitary_of(&sigma_u(sp), 0.5 * omega * sp.tau).expect("σ_u is Hermitian");
    [u[(0, 0)], u[(1, 0)]]
}

/// `⟨σz⟩ = 1 − 2(ω1/Ω)² sin²(Ωτ/2)`.
pub fn sigma_z_expect(sp: &SpinPulse) -> f64 {
    1.0 - 2.0 * sp.flip_fraction()
}

/// `⟨σz⟩` evaluated from the propagated state.
pub fn sigma_z_from_state(sp: &SpinPulse) -> f64 {
    let [a, b] = pulse_state(sp);
    a.norm_sqr() - b.norm_sqr()
}

/// `W = ħω0 (ω1/Ω)² sin²(Ωτ/2)` in joules.
pub fn quantum_work(sp: &SpinPulse) -> f64 {
    HBAR * sp.omega0 * sp.flip_fraction()
}

/// Thermal average work `2 ⟨σz⟩₀ B0 (ω1/Ω)² sin²(Ωτ/2)`.
pub fn average_work(sigma_z_0: f64, b0: f64, sp: &SpinPulse) -> f64 {
    2.0 * sigma_z_0 * b0 * sp.flip_fraction()
}

/// Field at which a spin-1/2 with magnetic moment `μ_N` has splitting `ħω0`.
pub fn field_for_larmor(omega0: f64) -> f64 {
    HBAR * omega0 / (2.0 * NUCLEAR_MAGNETON)
}
