//! Classical dynamics: Ostrogradski phase space, the two linear canonical
//! transformations, and RK4 trajectories checked against the closed-form
//! solution of the fourth-order equation of motion.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::io::Write;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::params::{classify_regime, frequencies, OscillatorParams, Regime};

/// `q` and its first three time derivatives at a common instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JetState {
    pub q: f64,
    pub qd: f64,
    pub qdd: f64,
    pub qddd: f64,
}

impl JetState {
    pub fn new(q: f64, qd: f64, qdd: f64, qddd: f64) -> Self {
        JetState { q, qd, qdd, qddd }
    }

    fn as_array(&self) -> [f64; 4] {
        [self.q, self.qd, self.qdd, self.qddd]
    }

    fn from_array(a: [f64; 4]) -> Self {
        JetState::new(a[0], a[1], a[2], a[3])
    }
}

/// Ostrogradski canonical pair `(q₁, q₂; Π₁, Π₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassicalState {
    pub q1: f64,
    pub q2: f64,
    pub pi1: f64,
    pub pi2: f64,
}

/// Decoupled coordinates `(x₁, x₂; p₁, p₂)`, real-distinct regime only.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormalModeState {
    pub x1: f64,
    pub x2: f64,
    pub p1: f64,
    pub p2: f64,
}

/// `(Q₁, Q₂; P₁, P₂)` of the λ-independent transformation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DegenerateModeState {
    pub big_q1: f64,
    pub big_q2: f64,
    pub big_p1: f64,
    pub big_p2: f64,
}

macro_rules! vec4_conv {
    ($t:ty, $a:ident, $b:ident, $c:ident, $d:ident) => {
        impl From<$t> for Vector4<f64> {
            fn from(s: $t) -> Self {
                Vector4::new(s.$a, s.$b, s.$c, s.$d)
            }
        }
        impl From<Vector4<f64>> for $t {
            fn from(v: Vector4<f64>) -> Self {
                Self { $a: v[0], $b: v[1], $c: v[2], $d: v[3] }
            }
        }
    };
}

vec4_conv!(ClassicalState, q1, q2, pi1, pi2);
vec4_conv!(NormalModeState, x1, x2, p1, p2);
vec4_conv!(DegenerateModeState, big_q1, big_q2, big_p1, big_p2);

/// Standard symplectic form on `(coords; momenta)`.
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    )
}

/// A linear map `new → (q₁, q₂, Π₁, Π₂)`; columns index the new variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearCanonicalMap {
    pub matrix: Matrix4<f64>,
}

impl LinearCanonicalMap {
    /// Max-abs entry of `SᵀJS − J`.
    pub fn symplectic_defect(&self) -> f64 {
        let j = symplectic_form();
        (self.matrix.transpose() * j * self.matrix - j).amax()
    }

    /// Inverse through `S⁻¹ = −J Sᵀ J`, valid for symplectic `S`.
    pub fn symplectic_inverse(&self) -> Matrix4<f64> {
        let j = symplectic_form();
        -(j * self.matrix.transpose() * j)
    }

    /// 2-norm condition number.
    pub fn condition_number(&self) -> f64 {
        let sv = self.matrix.singular_values();
        sv.max() / sv.min()
    }
}

/// `q₁ = q`, `q₂ = q̇`, `Π₁ = m(q̇ + λq⃛)`, `Π₂ = −mλq̈`.
pub fn ostrogradski_state(jet: &JetState, params: &OscillatorParams) -> ClassicalState {
    ClassicalState {
        q1: jet.q,
        q2: jet.qd,
        pi1: params.m * (jet.qd + params.lambda * jet.qddd),
        pi2: -params.m * params.lambda * jet.qdd,
    }
}

/// Inverse of [`ostrogradski_state`].
pub fn jet_from_state(state: &ClassicalState, params: &OscillatorParams) -> JetState {
    let (m, l) = (params.m, params.lambda);
    JetState::new(state.q1, state.q2, -state.pi2 / (m * l), (state.pi1 / m - state.q2) / l)
}

/// `H = Π₁q₂ − Π₂²/(2mλ) + mω²q₁²/2 − mq₂²/2`.
pub fn hamiltonian_ostrogradski(state: &ClassicalState, params: &OscillatorParams) -> Result<f64> {
    if params.lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let (m, w, l) = (params.m, params.omega, params.lambda);
    Ok(state.pi1 * state.q2 - state.pi2 * state.pi2 / (2.0 * m * l) + 0.5 * m * w * w * state.q1 * state.q1
        - 0.5 * m * state.q2 * state.q2)
}

/// The decoupling map; singular at equal frequencies.
pub fn normal_mode_map(params: &OscillatorParams) -> Result<LinearCanonicalMap> {
    let f = params.require_real_distinct()?;
    let (m, l) = (params.m, params.lambda);
    let (w1s, w2s) = (f.omega1 * f.omega1, f.omega2 * f.omega2);
    // λ(ω₁² − ω₂²) = √(1 − 4λω²), taken directly to avoid cancellation.
    let s = params.discriminant().sqrt().sqrt();
    let r = l / s;
    Ok(LinearCanonicalMap {
        matrix: Matrix4::new(
            -1.0 / s, 1.0 / s, 0.0, 0.0, //
            0.0, 0.0, 1.0 / (m * s), 1.0 / (m * s), //
            0.0, 0.0, r * w2s, r * w1s, //
            -m * r * w1s, m * r * w2s, 0.0, 0.0,
        ),
    })
}

pub fn to_normal_modes(state: &ClassicalState, params: &OscillatorParams) -> Result<NormalModeState> {
    let map = normal_mode_map(params)?;
    Ok((map.symplectic_inverse() * Vector4::from(*state)).into())
}

pub fn from_normal_modes(state: &NormalModeState, params: &OscillatorParams) -> Result<ClassicalState> {
    let map = normal_mode_map(params)?;
    Ok((map.matrix * Vector4::from(*state)).into())
}

/// `(p₂²/2m + mω₂²x₂²/2) − (p₁²/2m + mω₁²x₁²/2)`.
pub fn hamiltonian_normal(state: &NormalModeState, params: &OscillatorParams) -> Result<f64> {
    let f = params.require_real_distinct()?;
    let m = params.m;
    let h1 = state.p1 * state.p1 / (2.0 * m) + 0.5 * m * f.omega1 * f.omega1 * state.x1 * state.x1;
    let h2 = state.p2 * state.p2 / (2.0 * m) + 0.5 * m * f.omega2 * f.omega2 * state.x2 * state.x2;
    Ok(h2 - h1)
}

/// The λ-independent map to `(Q, P)`.
pub fn degenerate_mode_map(params: &OscillatorParams) -> LinearCanonicalMap {
    let (m, w) = (params.m, params.omega);
    let inv_2r2 = 0.5 * FRAC_1_SQRT_2;
    LinearCanonicalMap {
        matrix: Matrix4::new(
            inv_2r2, 0.0, 0.0, 1.0 / (m * w), //
            0.0, 0.5 * w, SQRT_2 / m, 0.0, //
            0.0, -0.75 * m * w, FRAC_1_SQRT_2, 0.0, //
            -0.75 * m * FRAC_1_SQRT_2, 0.0, 0.0, 0.5 / w,
        ),
    }
}

pub fn to_degenerate_modes(state: &ClassicalState, params: &OscillatorParams) -> DegenerateModeState {
    let map = degenerate_mode_map(params);
    (map.symplectic_inverse() * Vector4::from(*state)).into()
}

pub fn from_degenerate_modes(state: &DegenerateModeState, params: &OscillatorParams) -> ClassicalState {
    (degenerate_mode_map(params).matrix * Vector4::from(*state)).into()
}

/// `√2ω(Q₁P₂ − Q₂P₁) − mω²(Q₁² + Q₂²)/2`, the equal-frequency Hamiltonian.
pub fn hamiltonian_degenerate(state: &DegenerateModeState, params: &OscillatorParams) -> f64 {
    let (m, w) = (params.m, params.omega);
    SQRT_2 * w * (state.big_q1 * state.big_p2 - state.big_q2 * state.big_p1)
        - 0.5 * m * w * w * (state.big_q1 * state.big_q1 + state.big_q2 * state.big_q2)
}

/// `b₁,₂ = (m/2√2)(3/2 + λω₁,₂²)`.
///
/// On the ε-family `λω₁,₂² = (1 ± ε)/2`, so `b₁,₂ = (m/√2)(1 ± ε/4)` holds
/// exactly, not only to first order.
pub fn kernel_coefficients(params: &OscillatorParams) -> Result<(f64, f64)> {
    let f = params.require_real_distinct()?;
    let c = params.m / (2.0 * SQRT_2);
    let l = params.lambda;
    Ok((c * (1.5 + l * f.omega1 * f.omega1), c * (1.5 + l * f.omega2 * f.omega2)))
}

/// Coefficients of `P₁`, `P₂` over `(x₁, x₂, p₁, p₂)`, obtained by
/// composing the inverse λ-independent map with the decoupling map.
pub fn momentum_rows_by_composition(params: &OscillatorParams) -> Result<(Vector4<f64>, Vector4<f64>)> {
    let composed = degenerate_mode_map(params).symplectic_inverse() * normal_mode_map(params)?.matrix;
    let row = |i: usize| Vector4::new(composed[(i, 0)], composed[(i, 1)], composed[(i, 2)], composed[(i, 3)]);
    Ok((row(2), row(3)))
}

/// The same rows written through `b₁`, `b₂`.
pub fn momentum_rows_from_coefficients(params: &OscillatorParams) -> Result<(Vector4<f64>, Vector4<f64>)> {
    let (b1, b2) = kernel_coefficients(params)?;
    let s = params.discriminant().sqrt().sqrt();
    let m = params.m;
    let w = params.omega;
    Ok((
        Vector4::new(0.0, 0.0, b2 / (m * s), b1 / (m * s)),
        Vector4::new(-SQRT_2 * w * b1 / s, SQRT_2 * w * b2 / s, 0.0, 0.0),
    ))
}

/// Closed-form solution of the equation of motion fitted to an initial jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// `Σᵢ aᵢ cos ωᵢt + bᵢ sin ωᵢt`.
    Distinct { omega1: f64, omega2: f64, a1: f64, b1: f64, a2: f64, b2: f64 },
    /// `(a + bt) cos Ωt + (c + dt) sin Ωt`, with the secular terms of the double root.
    Resonant { omega: f64, a: f64, b: f64, c: f64, d: f64 },
}

/// k-th derivative of `cos(ωt)` / `sin(ωt)` at t.
fn trig_derivative(k: u32, omega: f64, t: f64, sine: bool) -> f64 {
    let phase = omega * t + k as f64 * std::f64::consts::FRAC_PI_2;
    omega.powi(k as i32) * if sine { phase.sin() } else { phase.cos() }
}

impl ClosedForm {
    pub fn fit(jet0: &JetState, params: &OscillatorParams) -> Result<Self> {
        match classify_regime(params)? {
            Regime::RealDistinct => {
                let (w1, w2) = frequencies(params)?.real().expect("real regime");
                let d = w1 * w1 - w2 * w2;
                // q(0) = a₁ + a₂, q̈(0) = −ω₁²a₁ − ω₂²a₂
                let a1 = -(jet0.qdd + w2 * w2 * jet0.q) / d;
                let a2 = (jet0.qdd + w1 * w1 * jet0.q) / d;
                // q̇(0) = ω₁b₁ + ω₂b₂, q⃛(0) = −ω₁³b₁ − ω₂³b₂
                let b1 = -(jet0.qddd + w2 * w2 * jet0.qd) / (w1 * d);
                let b2 = (jet0.qddd + w1 * w1 * jet0.qd) / (w2 * d);
                Ok(ClosedForm::Distinct { omega1: w1, omega2: w2, a1, b1, a2, b2 })
            }
            Regime::Degenerate => {
                let w = SQRT_2 * params.omega;
                let a = jet0.q;
                let c = (jet0.qddd + 3.0 * w * w * jet0.qd) / (2.0 * w * w * w);
                let b = jet0.qd - c * w;
                let d = (jet0.qdd + a * w * w) / (2.0 * w);
                Ok(ClosedForm::Resonant { omega: w, a, b, c, d })
            }
            other => Err(Error::RegimeMismatch { expected: "RealDistinct or Degenerate", found: other }),
        }
    }

    pub fn jet_at(&self, t: f64) -> JetState {
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            let k = k as u32;
            *slot = match *self {
                ClosedForm::Distinct { omega1, omega2, a1, b1, a2, b2 } => {
                    a1 * trig_derivative(k, omega1, t, false)
                        + b1 * trig_derivative(k, omega1, t, true)
                        + a2 * trig_derivative(k, omega2, t, false)
                        + b2 * trig_derivative(k, omega2, t, true)
                }
                ClosedForm::Resonant { omega, a, b, c, d } => {
                    // Leibniz rule on (a + bt)·f(t): (a + bt) f⁽ᵏ⁾ + k b f⁽ᵏ⁻¹⁾
                    let lower = |sine| if k == 0 { 0.0 } else { trig_derivative(k - 1, omega, t, sine) };
                    (a + b * t) * trig_derivative(k, omega, t, false)
                        + k as f64 * b * lower(false)
                        + (c + d * t) * trig_derivative(k, omega, t, true)
                        + k as f64 * d * lower(true)
                }
            };
        }
        JetState::from_array(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub jet: JetState,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub closed_form: ClosedForm,
}

impl Trajectory {
    /// Largest `|q_rk4(t) − q_exact(t)|` over the samples.
    pub fn max_position_error(&self) -> f64 {
        self.samples.iter().map(|s| (s.jet.q - self.closed_form.jet_at(s.t).q).abs()).fold(0.0, f64::max)
    }

    /// Largest `|H(t) − H(0)| / |H(0)|`.
    pub fn max_relative_energy_drift(&self) -> f64 {
        let h0 = self.samples[0].energy;
        self.samples.iter().map(|s| (s.energy - h0).abs() / h0.abs()).fold(0.0, f64::max)
    }

    /// CSV with columns `t,q,qd,qdd,qddd,H`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,q,qd,qdd,qddd,H")?;
        for s in &self.samples {
            writeln!(w, "{},{},{},{},{},{}", s.t, s.jet.q, s.jet.qd, s.jet.qdd, s.jet.qddd, s.energy)?;
        }
        Ok(())
    }
}

/// Energy of a jet through the Ostrogradski Hamiltonian.
pub fn jet_energy(jet: &JetState, params: &OscillatorParams) -> f64 {
    hamiltonian_ostrogradski(&ostrogradski_state(jet, params), params).expect("validated params")
}

/// Classical RK4 on `(q, q̇, q̈, q⃛)` with `q⁗ = −(ω₁² + ω₂²)q̈ − ω₁²ω₂²q`.
///
/// Using Vieta, `ω₁² + ω₂² = 1/λ` and `ω₁²ω₂² = ω²/λ`. The step is shrunk so
/// that an integer number of steps lands on `t_end`.
pub fn integrate_eom(jet0: &JetState, params: &OscillatorParams, t_end: f64, dt: f64) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("need dt > 0 and t_end >= 0, got dt={dt}, t_end={t_end}")));
    }
    let closed_form = ClosedForm::fit(jet0, params)?;
    let sum = 1.0 / params.lambda;
    let prod = params.omega * params.omega / params.lambda;
    let rhs = |y: [f64; 4]| [y[1], y[2], y[3], -sum * y[2] - prod * y[0]];

    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let mut y = jet0.as_array();
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(TrajectorySample { t: 0.0, jet: *jet0, energy: jet_energy(jet0, params) });
    for i in 1..=steps {
        let k1 = rhs(y);
        let k2 = rhs(axpy(&y, 0.5 * h, &k1));
        let k3 = rhs(axpy(&y, 0.5 * h, &k2));
        let k4 = rhs(axpy(&y, h, &k3));
        for j in 0..4 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let jet = JetState::from_array(y);
        samples.push(TrajectorySample { t: i as f64 * h, jet, energy: jet_energy(&jet, params) });
    }
    Ok(Trajectory { samples, closed_form })
}

fn axpy(y: &[f64; 4], a: f64, k: &[f64; 4]) -> [f64; 4] {
    [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2], y[3] + a * k[3]]
}

/// Shortest period `2π/ω₁` (real-distinct) or `2π/(√2ω)` (degenerate).
pub fn shortest_period(params: &OscillatorParams) -> Result<f64> {
    match classify_regime(params)? {
        Regime::RealDistinct | Regime::Degenerate => {
            let (w1, _) = frequencies(params)?.real().expect("real regime");
            Ok(2.0 * std::f64::consts::PI / w1)
        }
        other => Err(Error::RegimeMismatch { expected: "RealDistinct or Degenerate", found: other }),
    }
}
