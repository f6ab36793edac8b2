//! Eigenfunctions in the coordinate and momentum representations, the
//! coordinate-to-momentum transition kernel, and the scan that follows the
//! discrete eigenfunctions into the Bessel continuum.
//!
//! Polar momentum convention: `P₁ = P cos Θ`, `P₂ = P sin Θ`, so that
//! `P₂ − iP₁ = −i P e^{iΘ}`.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2, TAU};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::kernel_coefficients;
use crate::error::{Error, Result};
use crate::params::{loglog_slope, OscillatorParams};
use crate::specfun::{bessel_j, gauss_hermite, hermite_normalized, laguerre_scaled, ln_hermite_norm, log_factorial, QuadratureRule, Scaled};
use crate::spectra::{energy_indefinite, DegenerateLabel, LimitSchedule, QuantumNumbers};
use crate::table::ScanTable;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarMomentum {
    pub p: f64,
    pub theta: f64,
}

impl PolarMomentum {
    /// `Θ` is reduced to `[0, 2π)`.
    pub fn new(p: f64, theta: f64) -> Result<Self> {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("radial momentum must be >= 0, got {p}")));
        }
        Ok(PolarMomentum { p, theta: theta.rem_euclid(TAU) })
    }

    pub fn from_cartesian(p1: f64, p2: f64) -> Self {
        PolarMomentum { p: p1.hypot(p2), theta: p2.atan2(p1).rem_euclid(TAU) }
    }

    pub fn cartesian(&self) -> (f64, f64) {
        (self.p * self.theta.cos(), self.p * self.theta.sin())
    }
}

fn rule(k: usize) -> Result<Arc<QuadratureRule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().expect("quadrature cache poisoned").get(&k) {
        return Ok(r.clone());
    }
    let r = Arc::new(gauss_hermite(k)?);
    cache.lock().expect("quadrature cache poisoned").insert(k, r.clone());
    Ok(r)
}

/// Which Hermite argument the second mode uses in the coordinate eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CoordinateForm {
    /// `H_{n₂}(x₂√(mω₂/ħ))`, the oscillator product.
    #[default]
    Corrected,
    /// `H_{n₂}(x₂√(mω₁/ħ))` as printed; not an eigenfunction.
    PaperLiteral,
}

/// `N(n₁)N(n₂)(m²ω₁ω₂/ħ²)^{1/4} H_{n₁}(ξ₁) H_{n₂}(ξ₂) e^{−(ξ₁²+ξ₂²)/2}`, `ξᵢ = xᵢ√(mωᵢ/ħ)`.
pub fn coord_wavefunction(qn: QuantumNumbers, x1: f64, x2: f64, params: &OscillatorParams) -> Result<f64> {
    coord_wavefunction_form(qn, x1, x2, params, CoordinateForm::Corrected)
}

pub fn coord_wavefunction_form(
    qn: QuantumNumbers,
    x1: f64,
    x2: f64,
    params: &OscillatorParams,
    form: CoordinateForm,
) -> Result<f64> {
    let f = params.require_real_distinct()?;
    let (m, h) = (params.m, params.hbar);
    let a1 = (m * f.omega1 / h).sqrt();
    let a2 = (m * f.omega2 / h).sqrt();
    let (xi1, xi2) = (a1 * x1, a2 * x2);
    let herm2_arg = match form {
        CoordinateForm::Corrected => xi2,
        CoordinateForm::PaperLiteral => a1 * x2,
    };
    // N(n)Hₙ = π^{−1/4} h̃ₙ with h̃ the orthonormal Hermite polynomial.
    let h1 = hermite_normalized(qn.n1 as usize, Complex64::new(xi1, 0.0)).re;
    let h2 = hermite_normalized(qn.n2 as usize, Complex64::new(herm2_arg, 0.0)).re;
    Ok((a1 * a2).sqrt() / PI.sqrt() * h1 * h2 * (-0.5 * (xi1 * xi1 + xi2 * xi2)).exp())
}

/// Largest entry of `|G − I|` for the Gram matrix of all labels with
/// `n₁, n₂ ≤ nmax`, by a tensor Gauss–Hermite rule exact for these products.
pub fn coord_orthonormality_defect(nmax: u64, params: &OscillatorParams, form: CoordinateForm) -> Result<f64> {
    let f = params.require_real_distinct()?;
    let (m, h) = (params.m, params.hbar);
    let a1 = (m * f.omega1 / h).sqrt();
    let a2 = (m * f.omega2 / h).sqrt();
    let r = rule(nmax as usize + 4)?;
    let k = r.len();
    let labels: Vec<QuantumNumbers> =
        (0..=nmax).flat_map(|n1| (0..=nmax).map(move |n2| QuantumNumbers::new(n1, n2))).collect();
    let mut v = DMatrix::<f64>::zeros(labels.len(), k * k);
    for i in 0..k {
        for j in 0..k {
            let (t1, t2) = (r.nodes[i], r.nodes[j]);
            let w = (r.weights[i] * r.weights[j] * (t1 * t1 + t2 * t2).exp() / (a1 * a2)).sqrt();
            for (l, qn) in labels.iter().enumerate() {
                v[(l, i * k + j)] = w * coord_wavefunction_form(*qn, t1 / a1, t2 / a2, params, form)?;
            }
        }
    }
    let gram = &v * v.transpose();
    let mut worst = 0.0f64;
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    Ok(worst)
}

/// Finite-difference residual with a Richardson check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdResidual {
    pub h: f64,
    /// Relative residual with step `h`.
    pub coarse: f64,
    /// Relative residual with step `h/2`.
    pub fine: f64,
    /// Relative residual of the extrapolated operator `(4D(h/2) − D(h))/3`.
    pub extrapolated: f64,
}

impl FdResidual {
    /// `coarse/fine`, close to 4 for a second-order stencil.
    pub fn order_ratio(&self) -> f64 {
        self.coarse / self.fine
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.extrapolated < tol && (2.5..=6.0).contains(&self.order_ratio())
    }
}

fn second_diff<F: Fn(f64) -> Complex64>(f: F, x: f64, h: f64) -> Complex64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

fn first_diff<F: Fn(f64) -> Complex64>(f: F, x: f64, h: f64) -> Complex64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Applies the diagonal two-mode Hamiltonian by central differences and
/// compares with the two-frequency energy on a grid covering the classically
/// allowed region.
pub fn coord_eigen_residual(qn: QuantumNumbers, params: &OscillatorParams, h_xi: f64) -> Result<FdResidual> {
    let f = params.require_real_distinct()?;
    let (m, hb) = (params.m, params.hbar);
    let a1 = (m * f.omega1 / hb).sqrt();
    let a2 = (m * f.omega2 / hb).sqrt();
    let e = energy_indefinite(qn, params)?;
    let scale = hb * f.omega1 * (qn.n1 as f64 + 0.5) + hb * f.omega2 * (qn.n2 as f64 + 0.5);
    let psi = |x1: f64, x2: f64| coord_wavefunction(qn, x1, x2, params).expect("regime checked");
    let apply = |x1: f64, x2: f64, h1: f64, h2: f64| {
        let d11 = second_diff(|t| Complex64::new(psi(t, x2), 0.0), x1, h1).re;
        let d22 = second_diff(|t| Complex64::new(psi(x1, t), 0.0), x2, h2).re;
        let v = psi(x1, x2);
        let h2_part = -hb * hb / (2.0 * m) * d22 + 0.5 * m * f.omega2 * f.omega2 * x2 * x2 * v;
        let h1_part = -hb * hb / (2.0 * m) * d11 + 0.5 * m * f.omega1 * f.omega1 * x1 * x1 * v;
        h2_part - h1_part
    };
    let r1 = (2.0 * qn.n1 as f64 + 1.0).sqrt() + 0.5;
    let r2 = (2.0 * qn.n2 as f64 + 1.0).sqrt() + 0.5;
    let pts = 7;
    let (mut coarse, mut fine, mut extra, mut vmax) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..pts {
        for j in 0..pts {
            // Offsets by an irrational fraction keep points off the nodes.
            let t1 = -r1 + 2.0 * r1 * (i as f64 + 0.382) / pts as f64;
            let t2 = -r2 + 2.0 * r2 * (j as f64 + 0.382) / pts as f64;
            let (x1, x2) = (t1 / a1, t2 / a2);
            let v = psi(x1, x2);
            vmax = vmax.max(v.abs());
            let dc = apply(x1, x2, h_xi / a1, h_xi / a2);
            let df = apply(x1, x2, 0.5 * h_xi / a1, 0.5 * h_xi / a2);
            let dx = (4.0 * df - dc) / 3.0;
            coarse = coarse.max((dc - e * v).abs());
            fine = fine.max((df - e * v).abs());
            extra = extra.max((dx - e * v).abs());
        }
    }
    let denom = scale * vmax;
    Ok(FdResidual { h: h_xi, coarse: coarse / denom, fine: fine / denom, extrapolated: extra / denom })
}

/// `√(k/2π) Jₙ(kP) e^{inΘ}`.
pub fn degenerate_wavefunction(label: DegenerateLabel, pm: PolarMomentum) -> Result<Complex64> {
    if !(label.k > 0.0) {
        return Err(Error::NonPositiveK(label.k));
    }
    let n = i32::try_from(label.n)
        .map_err(|_| Error::OutOfRange { what: "bessel order", value: label.n as f64, max: 1e3 })?;
    let radial = (label.k / TAU).sqrt() * bessel_j(n, label.k * pm.p);
    Ok(radial * Complex64::from_polar(1.0, label.n as f64 * pm.theta))
}

/// Residual of `[−i√2ωħ∂_Θ + (mω²ħ²/2)∇²] Ψ = E Ψ` in polar momentum
/// coordinates at points with `P ∈ [p_min, p_max]`.
pub fn degenerate_pde_residual(
    label: DegenerateLabel,
    params: &OscillatorParams,
    p_min: f64,
    p_max: f64,
    h: f64,
) -> Result<FdResidual> {
    let (m, w, hb) = (params.m, params.omega, params.hbar);
    let e = w * hb * (SQRT_2 * label.n as f64 - 0.5 * m * w * hb * label.k * label.k);
    let scale = (SQRT_2 * w * hb * label.n as f64).abs() + 0.5 * m * w * w * hb * hb * label.k * label.k;
    let psi = |p: f64, t: f64| degenerate_wavefunction(label, PolarMomentum { p, theta: t }).expect("k checked");
    let apply = |p: f64, t: f64, hp: f64, ht: f64| {
        let d_t = first_diff(|s| psi(p, s), t, ht);
        let d_tt = second_diff(|s| psi(p, s), t, ht);
        let d_p = first_diff(|s| psi(s, t), p, hp);
        let d_pp = second_diff(|s| psi(s, t), p, hp);
        -I * SQRT_2 * w * hb * d_t + 0.5 * m * w * w * hb * hb * (d_pp + d_p / p + d_tt / (p * p))
    };
    degenerate_label_check(label)?;
    let (np, nt) = (9, 5);
    let hp = h / label.k.max(1.0);
    let (mut coarse, mut fine, mut extra, mut vmax) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..np {
        let p = p_min + (p_max - p_min) * (i as f64 + 0.5) / np as f64;
        for j in 0..nt {
            let t = TAU * (j as f64 + 0.3) / nt as f64;
            let v = psi(p, t);
            vmax = vmax.max(v.norm());
            let dc = apply(p, t, hp, h);
            let df = apply(p, t, 0.5 * hp, 0.5 * h);
            let dx = (4.0 * df - dc) / 3.0;
            coarse = coarse.max((dc - e * v).norm());
            fine = fine.max((df - e * v).norm());
            extra = extra.max((dx - e * v).norm());
        }
    }
    let denom = scale * vmax;
    Ok(FdResidual { h, coarse: coarse / denom, fine: fine / denom, extrapolated: extra / denom })
}

fn degenerate_label_check(label: DegenerateLabel) -> Result<()> {
    if label.n.unsigned_abs() > 1000 {
        return Err(Error::OutOfRange { what: "bessel order", value: label.n as f64, max: 1e3 });
    }
    Ok(())
}

/// `⟨x₁,x₂|P₁,P₂⟩ = norm · δ(c₁x₁ + c₂x₂ + c_P₂ P₂) · e^{iP₁(d₁x₁ + d₂x₂)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelForm {
    /// `(c₁, c₂, c_P₂) = (−b₁, b₂, −√(λ(ω₁²−ω₂²))/(√2ω))`.
    pub delta_coeffs: (f64, f64, f64),
    /// `(d₁, d₂) = m√(λ(ω₁²−ω₂²))(b₂, b₁) / (ħ(b₁²+b₂²))`.
    pub phase_coeffs: (f64, f64),
    /// `√(mλ(ω₁²−ω₂²) / (2√2πħω))`.
    pub norm: f64,
    pub b1: f64,
    pub b2: f64,
    /// `√(λ(ω₁²−ω₂²))`, equal to `√ε` on the ε-family.
    pub s: f64,
}

pub fn transition_kernel(params: &OscillatorParams) -> Result<KernelForm> {
    let (b1, b2) = kernel_coefficients(params)?;
    let (m, w, hb) = (params.m, params.omega, params.hbar);
    let s = params.discriminant().sqrt().sqrt();
    let big_b = b1 * b1 + b2 * b2;
    let c = m * s / (hb * big_b);
    Ok(KernelForm {
        delta_coeffs: (-b1, b2, -s / (SQRT_2 * w)),
        phase_coeffs: (c * b2, c * b1),
        norm: (m * s * s / (2.0 * SQRT_2 * PI * hb * w)).sqrt(),
        b1,
        b2,
        s,
    })
}

/// Defects of the eigenvalue equations and of the delta normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelChecks {
    /// `|ħ(b₂d₁ + b₁d₂)/(ms) − 1|`: the momentum operator `P̂₁` returns `P₁`.
    pub p1_eigen: f64,
    /// `|b₂c₁ + b₁c₂| / (b₁b₂)`: `P̂₁` does not act on the delta factor.
    pub p1_transverse: f64,
    /// `|−√2ω c_P₂ / s − 1|`: `P̂₂` equals `P₂` on the delta support.
    pub p2_eigen: f64,
    /// `|norm² · 2π √2ω / (s c (b₁²+b₂²)) − 1|`: `⟨P|P'⟩ = δ²(P − P')`.
    pub normalisation: f64,
}

impl KernelForm {
    pub fn checks(&self, params: &OscillatorParams) -> KernelChecks {
        let (m, w, hb) = (params.m, params.omega, params.hbar);
        let (c1, c2, cp2) = self.delta_coeffs;
        let (d1, d2) = self.phase_coeffs;
        let big_b = self.b1 * self.b1 + self.b2 * self.b2;
        let c = d2 / self.b1;
        KernelChecks {
            p1_eigen: (hb * (self.b2 * d1 + self.b1 * d2) / (m * self.s) - 1.0).abs(),
            p1_transverse: (self.b2 * c1 + self.b1 * c2).abs() / (self.b1 * self.b2),
            p2_eigen: (-SQRT_2 * w * cp2 / self.s - 1.0).abs(),
            normalisation: (self.norm * self.norm * TAU * SQRT_2 * w / (self.s * c * big_b) - 1.0).abs(),
        }
    }

    /// Phase coefficient `c = m s / (ħ(b₁² + b₂²))`.
    pub fn phase_scale(&self, params: &OscillatorParams) -> f64 {
        params.m * self.s / (params.hbar * (self.b1 * self.b1 + self.b2 * self.b2))
    }
}

fn check_quadrature_degree(qn: QuantumNumbers, max: u64) -> Result<()> {
    let top = qn.n1.max(qn.n2);
    if top > max {
        return Err(Error::OutOfRange { what: "quadrature label", value: top as f64, max: max as f64 });
    }
    Ok(())
}

/// Two Gauss–Hermite sums of different order; the integrand is a polynomial
/// of degree `deg` times `e^{−y²}`, so both must agree.
fn converged_sum<F: Fn(f64) -> Complex64>(deg: u64, f: F) -> Result<Complex64> {
    let k0 = (deg as usize / 2 + 2).max(4);
    let k1 = k0 + 8;
    let lo = rule(k0)?;
    let hi = rule(k1)?;
    let mut scale = 0.0;
    let mut a = Complex64::new(0.0, 0.0);
    for (&y, &w) in lo.nodes.iter().zip(&lo.weights) {
        let v = w * f(y);
        scale += v.norm();
        a += v;
    }
    let b = hi.integrate_complex(&f);
    let change = (a - b).norm() / scale.max(f64::MIN_POSITIVE);
    if !(change <= 1e-9) {
        return Err(Error::QuadratureNonConvergence { nodes: k1, change });
    }
    Ok(b)
}

/// Momentum-space eigenfunction from the exact kernel.
///
/// The delta factor removes one integration; the remaining integral over
/// `v = b₂x₁ + b₁x₂` is Gaussian times a polynomial and is evaluated by
/// Gauss–Hermite quadrature after completing the square. `n₁, n₂ ≤ 200`.
pub fn momentum_wavefunction_exact(qn: QuantumNumbers, p1: f64, p2: f64, params: &OscillatorParams) -> Result<Complex64> {
    check_quadrature_degree(qn, 200)?;
    let f = params.require_real_distinct()?;
    let kf = transition_kernel(params)?;
    let (m, w, hb) = (params.m, params.omega, params.hbar);
    let (w1, w2) = (f.omega1, f.omega2);
    let (b1, b2) = (kf.b1, kf.b2);
    let big_b = b1 * b1 + b2 * b2;
    let c = kf.phase_scale(params);
    let kappa = m / (2.0 * hb * big_b * big_b);
    let alpha = w1 * b2 * b2 + w2 * b1 * b1;
    let beta = b1 * b2 * (w2 - w1);
    let gamma = w1 * b1 * b1 + w2 * b2 * b2;
    let u0 = kf.s * p2 / (SQRT_2 * w);
    let ka = kappa * alpha;
    let v0 = (2.0 * kappa * beta * u0 + I * c * p1) / (2.0 * ka);
    let (a1, a2) = ((m * w1 / hb).sqrt(), (m * w2 / hb).sqrt());
    let sqrt_ka = ka.sqrt();
    let sum = converged_sum(qn.n1 + qn.n2, |y| {
        let v = y / sqrt_ka - v0;
        let x1 = (b2 * v - b1 * u0) / big_b;
        let x2 = (b1 * v + b2 * u0) / big_b;
        hermite_normalized(qn.n1 as usize, a1 * x1) * hermite_normalized(qn.n2 as usize, a2 * x2)
    })?;
    let pref = kf.norm / big_b * (a1 * a2).sqrt() / PI.sqrt() / sqrt_ka;
    Ok(pref * (ka * v0 * v0 - kappa * gamma * u0 * u0).exp() * sum)
}

/// `σ = √(ε / (2√2 m ħ ω))`, the shift scale of the small-ε forms.
pub fn shift_scale(epsilon: f64, params: &OscillatorParams) -> f64 {
    (epsilon / (2.0 * SQRT_2 * params.m * params.hbar * params.omega)).sqrt()
}

fn check_small_epsilon(epsilon: f64, max: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= max) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    Ok(())
}

/// Leading small-ε form:
/// `N(n₁)N(n₂)√ε/√(√2πmħω) ∫dy e^{−y²} H_{n₁}(y − σ(P₂+iP₁)) H_{n₂}(y + σ(P₂−iP₁))`.
///
/// Only `m`, `ω`, `ħ` are read from `params`.
pub fn momentum_wavefunction_dominant(
    qn: QuantumNumbers,
    p1: f64,
    p2: f64,
    epsilon: f64,
    params: &OscillatorParams,
) -> Result<Complex64> {
    check_small_epsilon(epsilon, 0.1)?;
    check_quadrature_degree(qn, 500)?;
    let (m, w, hb) = (params.m, params.omega, params.hbar);
    let sigma = shift_scale(epsilon, params);
    let a = sigma * Complex64::new(p2, p1);
    let b = sigma * Complex64::new(p2, -p1);
    let sum = converged_sum(qn.n1 + qn.n2, |y| {
        hermite_normalized(qn.n1 as usize, y - a) * hermite_normalized(qn.n2 as usize, y + b)
    })?;
    // N(n₁)N(n₂)·√(2^{n₁}n₁! 2^{n₂}n₂!) = 1/√π.
    let pref = epsilon.sqrt() / (SQRT_2 * PI * hb * w * m).sqrt() / PI.sqrt();
    Ok(pref * sum)
}

/// Closed form of the leading small-ε integral, in scaled form.
///
/// For `n = n₂ − n₁ ≥ 0`:
/// `√ε/√(√2mħω) σⁿ(P₂−iP₁)ⁿ n₁! 2^{n₂} N(n₁)N(n₂) Lⁿ_{n₁}(2σ²P²)`.
/// For `n < 0` the roles swap: `(−σ)^{|n|}(P₂+iP₁)^{|n|} n₂! 2^{n₁} … L^{|n|}_{n₂}`,
/// which is the complex conjugate of the `n → −n` expression up to `(−1)^{|n|}`.
pub fn momentum_wavefunction_closed_scaled(
    qn: QuantumNumbers,
    p1: f64,
    p2: f64,
    epsilon: f64,
    params: &OscillatorParams,
) -> Result<Scaled<Complex64>> {
    check_small_epsilon(epsilon, 1.0 - f64::EPSILON)?;
    if qn.n1.max(qn.n2) > 1_000_000 {
        return Err(Error::OutOfRange { what: "closed-form label", value: qn.n1.max(qn.n2) as f64, max: 1e6 });
    }
    let (m, w, hb) = (params.m, params.omega, params.hbar);
    let sigma = shift_scale(epsilon, params);
    let n = qn.n2 as i64 - qn.n1 as i64;
    let (lo, hi) = if n >= 0 { (qn.n1, qn.n2) } else { (qn.n2, qn.n1) };
    let order = n.unsigned_abs();
    let p_sq = p1 * p1 + p2 * p2;
    let mut log_scale = 0.5 * epsilon.ln() - 0.5 * (SQRT_2 * m * hb * w).ln()
        + log_factorial(lo)
        + hi as f64 * std::f64::consts::LN_2
        + ln_hermite_norm(qn.n1)
        + ln_hermite_norm(qn.n2);
    let mut phase = Complex64::new(1.0, 0.0);
    if order > 0 {
        if p_sq == 0.0 {
            return Ok(Scaled { mantissa: Complex64::new(0.0, 0.0), log_scale: 0.0 });
        }
        let z = if n >= 0 { Complex64::new(p2, -p1) } else { -Complex64::new(p2, p1) };
        log_scale += order as f64 * (sigma.ln() + 0.5 * p_sq.ln());
        phase = (z / z.norm()).powu(order as u32);
    }
    let lag = laguerre_scaled(lo as usize, order as u32, 2.0 * sigma * sigma * p_sq);
    Ok(Scaled { mantissa: phase * lag.mantissa, log_scale: log_scale + lag.log_scale })
}

pub fn momentum_wavefunction_closed(
    qn: QuantumNumbers,
    p1: f64,
    p2: f64,
    epsilon: f64,
    params: &OscillatorParams,
) -> Result<Complex64> {
    Ok(momentum_wavefunction_closed_scaled(qn, p1, p2, epsilon, params)?.to_complex())
}

/// Radial grid `P ∈ [0, p_max]` with angular samples for the phase check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub p_max: f64,
    pub points: usize,
    pub theta_samples: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid { p_max: 10.0, points: 401, theta_samples: 8 }
    }
}

impl ScanGrid {
    pub fn radii(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n).map(|j| self.p_max * j as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n1: u64,
    pub n2: u64,
    pub epsilon: f64,
    pub sup_error: f64,
    pub l2_error: f64,
    /// `‖closed‖ / ‖√(k/2π)Jₙ(kP)‖` on the radial window.
    pub prefactor_ratio: f64,
    /// `√(√2ε/(mħωk))`.
    pub prefactor_expected: f64,
    /// Largest deviation of the angular phase from `nΘ`.
    pub phase_error: f64,
}

/// Radial `L²` norm `(∫|f|² P dP)^{1/2}` by the trapezoid rule.
fn radial_norm(radii: &[f64], vals: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 1..radii.len() {
        let a = vals[j - 1] * vals[j - 1] * radii[j - 1];
        let b = vals[j] * vals[j] * radii[j];
        acc += 0.5 * (a + b) * (radii[j] - radii[j - 1]);
    }
    acc.sqrt()
}

fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// One schedule step of the equal-frequency limit comparison.
pub fn limit_scan_row(
    n: i64,
    k: f64,
    step: &crate::spectra::LimitStep,
    grid: &ScanGrid,
    params: &OscillatorParams,
) -> Result<ConvergenceRow> {
    let radii = grid.radii();
    let qn = step.labels();
    let eps = step.epsilon;
    let order = i32::try_from(n).map_err(|_| Error::OutOfRange { what: "bessel order", value: n as f64, max: 1e3 })?;
    let logs: Vec<Scaled<Complex64>> = radii
        .iter()
        .map(|&p| momentum_wavefunction_closed_scaled(qn, p, 0.0, eps, params))
        .collect::<Result<_>>()?;
    let ln_max = logs.iter().filter(|s| s.mantissa.norm() > 0.0).map(|s| s.mantissa.norm().ln() + s.log_scale).fold(f64::NEG_INFINITY, f64::max);
    let closed: Vec<f64> = logs.iter().map(|s| s.mantissa.norm() * (s.log_scale - ln_max).exp()).collect();
    let target: Vec<f64> = radii.iter().map(|&p| ((k / TAU).sqrt() * bessel_j(order, k * p)).abs()).collect();
    let nc = radial_norm(&radii, &closed);
    let nt = radial_norm(&radii, &target);
    let diff: Vec<f64> = closed.iter().zip(&target).map(|(c, t)| c / nc - t / nt).collect();
    let tmax = target.iter().fold(0.0f64, |a, &b| a.max(b)) / nt;
    let sup_error = diff.iter().fold(0.0f64, |a, &b| a.max(b.abs())) / tmax;
    let l2_error = radial_norm(&radii, &diff);
    let prefactor_ratio = (nc.ln() + ln_max - nt.ln()).exp();
    let (m, w, hb) = (params.m, params.omega, params.hbar);
    let prefactor_expected = (SQRT_2 * eps / (m * hb * w * k)).sqrt();

    let j_star = (0..radii.len()).max_by(|&a, &b| target[a].total_cmp(&target[b])).unwrap_or(0);
    let p_star = radii[j_star];
    let reference = momentum_wavefunction_closed_scaled(qn, p_star, 0.0, eps, params)?.mantissa.arg();
    let mut phase_error = 0.0f64;
    for i in 1..grid.theta_samples.max(1) {
        let theta = TAU * i as f64 / grid.theta_samples as f64;
        let v = momentum_wavefunction_closed_scaled(qn, p_star * theta.cos(), p_star * theta.sin(), eps, params)?;
        phase_error = phase_error.max(wrap_angle(v.mantissa.arg() - reference - n as f64 * theta).abs());
    }
    Ok(ConvergenceRow {
        n1: step.n1,
        n2: step.n2,
        epsilon: eps,
        sup_error,
        l2_error,
        prefactor_ratio,
        prefactor_expected,
        phase_error,
    })
}

/// Compares the closed form with the Bessel eigenfunction along a schedule.
/// Rows are independent and computed in parallel.
pub fn limit_scan(schedule: &LimitSchedule, grid: &ScanGrid, params: &OscillatorParams) -> Result<Vec<ConvergenceRow>> {
    schedule.validate(params)?;
    schedule.steps.par_iter().map(|s| limit_scan_row(schedule.n, schedule.k, s, grid, params)).collect()
}

/// True when every error is at most `(1 + jitter)` times its predecessor.
pub fn is_monotone_with_jitter(errors: &[f64], jitter: f64) -> bool {
    errors.windows(2).all(|w| w[1] <= w[0] * (1.0 + jitter))
}

/// Log-log slope of the prefactor ratio against ε.
pub fn prefactor_slope(rows: &[ConvergenceRow]) -> f64 {
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let ratio: Vec<f64> = rows.iter().map(|r| r.prefactor_ratio).collect();
    loglog_slope(&eps, &ratio)
}

/// Log-log slope of the sup error against `n₁ + n₂`.
pub fn convergence_rate(rows: &[ConvergenceRow]) -> f64 {
    let tot: Vec<f64> = rows.iter().map(|r| (r.n1 + r.n2) as f64).collect();
    let err: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
    loglog_slope(&tot, &err)
}

/// `|m^{−α} L^α_m(x/m) / (x^{−α/2} J_α(2√x)) − 1|`.
pub fn laguerre_bessel_error(m: usize, alpha: u32, x: f64) -> f64 {
    let lag = laguerre_scaled(m, alpha, x / m as f64);
    let approx = lag.mantissa * (lag.log_scale - alpha as f64 * (m as f64).ln()).exp();
    let target = x.powf(-0.5 * alpha as f64) * bessel_j(alpha as i32, 2.0 * x.sqrt());
    (approx / target - 1.0).abs()
}

/// Log-log slope of [`laguerre_bessel_error`] over the given degrees.
pub fn laguerre_bessel_rate(degrees: &[usize], alpha: u32, x: f64) -> f64 {
    let ms: Vec<f64> = degrees.iter().map(|&m| m as f64).collect();
    let errs: Vec<f64> = degrees.iter().map(|&m| laguerre_bessel_error(m, alpha, x)).collect();
    loglog_slope(&ms, &errs)
}

/// Columns `n1,n2,epsilon,sup_err,l2_err,prefactor_ratio,prefactor_expected,sqrt_eps_slope,phase_err`.
///
/// `sqrt_eps_slope` is the local log-log slope of the norm ratio against ε
/// between a row and its predecessor (the first row pairs with the second).
pub fn scan_table(rows: &[ConvergenceRow]) -> ScanTable {
    let mut t = ScanTable::new(&[
        "n1",
        "n2",
        "epsilon",
        "sup_err",
        "l2_err",
        "prefactor_ratio",
        "prefactor_expected",
        "sqrt_eps_slope",
        "phase_err",
    ]);
    let local = |a: &ConvergenceRow, b: &ConvergenceRow| (b.prefactor_ratio / a.prefactor_ratio).ln() / (b.epsilon / a.epsilon).ln();
    for (j, r) in rows.iter().enumerate() {
        let slope = match (j, rows.len()) {
            (_, 0 | 1) => f64::NAN,
            (0, _) => local(&rows[0], &rows[1]),
            _ => local(&rows[j - 1], r),
        };
        t.push(vec![
            r.n1.into(),
            r.n2.into(),
            r.epsilon.into(),
            r.sup_error.into(),
            r.l2_error.into(),
            r.prefactor_ratio.into(),
            r.prefactor_expected.into(),
            slope.into(),
            r.phase_error.into(),
        ]);
    }
    t
}

/// Sample points `(P₁, P₂)` spread over a disc of radius `radius`.
pub fn disc_samples(radius: f64, count: usize) -> Vec<(f64, f64)> {
    // Golden-angle spiral: deterministic and evenly spread.
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|j| {
            let r = radius * ((j as f64 + 0.5) / count as f64).sqrt();
            let t = golden * j as f64;
            (r * t.cos(), r * t.sin())
        })
        .collect()
}

/// `max|a − b| / max|b|` over paired samples.
pub fn relative_sup_difference(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm())) / scale
}

/// Same after dividing each list by its own largest modulus, on moduli only.
pub fn shape_sup_difference(a: &[Complex64], b: &[Complex64]) -> f64 {
    let sa = a.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let sb = b.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x.norm() / sa - y.norm() / sb).abs()))
}

/// Quadrature form against the closed form at sample points scaled to the
/// oscillatory region of the Laguerre factor. Returns `(complex, shape)` errors.
pub fn dominant_vs_closed(qn: QuantumNumbers, epsilon: f64, params: &OscillatorParams, samples: usize) -> Result<(f64, f64)> {
    let sigma = shift_scale(epsilon, params);
    let x_max = 4.0 * (qn.n1 + qn.n2) as f64 + 10.0;
    let radius = (x_max / 2.0).sqrt() / sigma;
    let pts = disc_samples(radius, samples);
    let mut d = Vec::with_capacity(samples);
    let mut c = Vec::with_capacity(samples);
    for &(p1, p2) in &pts {
        d.push(momentum_wavefunction_dominant(qn, p1, p2, epsilon, params)?);
        c.push(momentum_wavefunction_closed(qn, p1, p2, epsilon, params)?);
    }
    Ok((relative_sup_difference(&d, &c), shape_sup_difference(&d, &c)))
}

/// Exact kernel form against the small-ε form with its Gaussian envelope
/// `e^{−σ²P²}` restored, over the region where either is non-negligible.
/// Returns the shape-normalised sup difference of the moduli.
pub fn exact_vs_dominant(qn: QuantumNumbers, epsilon: f64, params: &OscillatorParams, samples: usize) -> Result<f64> {
    let p = crate::params::params_from_epsilon(params.m, params.omega, params.hbar, epsilon)?;
    let sigma = shift_scale(epsilon, params);
    let radius = ((2.0 * (qn.n1 + qn.n2) as f64 + 1.0).sqrt() + 5.0) / sigma;
    let mut e = Vec::with_capacity(samples);
    let mut d = Vec::with_capacity(samples);
    for (p1, p2) in disc_samples(radius, samples) {
        e.push(momentum_wavefunction_exact(qn, p1, p2, &p)?);
        let env = (-sigma * sigma * (p1 * p1 + p2 * p2)).exp();
        d.push(env * momentum_wavefunction_dominant(qn, p1, p2, epsilon, params)?);
    }
    Ok(shape_sup_difference(&e, &d))
}

/// `∫∫|ψ(P₁,P₂)|² dP₁dP₂` for the exact momentum eigenfunction by the
/// trapezoid rule on a box grown until the edges are negligible.
pub fn momentum_norm(qn: QuantumNumbers, params: &OscillatorParams, points: usize) -> Result<f64> {
    let val = |p1: f64, p2: f64| momentum_wavefunction_exact(qn, p1, p2, params).map(|v| v.norm_sqr());
    let peak = {
        let mut best = 0.0f64;
        for (p1, p2) in disc_samples(1.0, 16) {
            best = best.max(val(p1, p2)?);
        }
        best.max(val(0.0, 0.0)?)
    };
    let mut half = [1.0f64, 1.0f64];
    for axis in 0..2 {
        loop {
            let edge = if axis == 0 { val(half[0], 0.0)?.max(val(-half[0], 0.0)?) } else { val(0.0, half[1])?.max(val(0.0, -half[1])?) };
            let beyond = if axis == 0 { val(1.5 * half[0], 0.0)? } else { val(0.0, 1.5 * half[1])? };
            if edge.max(beyond) < 1e-18 * peak.max(f64::MIN_POSITIVE) && half[axis] > 2.0 {
                break;
            }
            half[axis] *= 1.5;
            if half[axis] > 1e8 {
                return Err(Error::InvalidParameter("momentum wavefunction does not decay".into()));
            }
        }
    }
    let n = points.max(16);
    let (h1, h2) = (2.0 * half[0] / n as f64, 2.0 * half[1] / n as f64);
    let mut acc = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            acc += val(-half[0] + i as f64 * h1, -half[1] + j as f64 * h2)?;
        }
    }
    Ok(acc * h1 * h2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::params_from_epsilon;
    use crate::spectra::limit_schedule_between;

    fn p015() -> OscillatorParams {
        OscillatorParams::natural(0.15).unwrap()
    }

    #[test]
    fn ground_state_at_origin() {
        let p = p015();
        let f = p.require_real_distinct().unwrap();
        let v = coord_wavefunction(QuantumNumbers::new(0, 0), 0.0, 0.0, &p).unwrap();
        assert!((v - (f.omega1 * f.omega2).powf(0.25) / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn coordinate_orthonormality() {
        let d = coord_orthonormality_defect(8, &p015(), CoordinateForm::Corrected).unwrap();
        assert!(d < 1e-12, "{d}");
        let lit = coord_orthonormality_defect(3, &p015(), CoordinateForm::PaperLiteral).unwrap();
        assert!(lit > 1e-3, "printed form is not orthonormal: {lit}");
    }

    #[test]
    fn coordinate_fd_residual() {
        for (n1, n2) in [(0, 0), (2, 3), (5, 1)] {
            let r = coord_eigen_residual(QuantumNumbers::new(n1, n2), &p015(), 0.01).unwrap();
            assert!(r.passes(1e-6), "{r:?}");
        }
    }

    #[test]
    fn degenerate_wavefunction_properties() {
        let l0 = DegenerateLabel::new(0, 1.3).unwrap();
        let v = degenerate_wavefunction(l0, PolarMomentum::new(2.0, 1.1).unwrap()).unwrap();
        assert_eq!(v.im, 0.0);
        assert!((v.re - (1.3 / TAU).sqrt() * bessel_j(0, 2.6)).abs() < 1e-15);
        let l3 = DegenerateLabel::new(3, 0.8).unwrap();
        let lm3 = DegenerateLabel::new(-3, 0.8).unwrap();
        let pm = PolarMomentum::new(4.0, 0.7).unwrap();
        let a = degenerate_wavefunction(l3, pm).unwrap();
        let b = degenerate_wavefunction(lm3, pm).unwrap();
        assert!((b - (-1.0) * a.conj()).norm() < 1e-14);
        let shifted = degenerate_wavefunction(l3, PolarMomentum { p: 4.0, theta: 0.7 + TAU }).unwrap();
        assert!((shifted - a).norm() < 1e-13);
    }

    #[test]
    fn degenerate_pde_residual_small() {
        let deg = OscillatorParams::natural(0.25).unwrap();
        for (n, k) in [(0, 1.0), (2, 1.0), (-1, 0.5), (3, 2.0)] {
            let r = degenerate_pde_residual(DegenerateLabel::new(n, k).unwrap(), &deg, 0.5, 10.0, 1e-2).unwrap();
            assert!(r.passes(1e-6), "n={n} k={k}: {r:?}");
        }
    }

    #[test]
    fn kernel_identities() {
        for eps in [0.5, 0.1, 0.01] {
            let p = params_from_epsilon(1.0, 1.0, 1.0, eps).unwrap();
            let kf = transition_kernel(&p).unwrap();
            let c = kf.checks(&p);
            assert!(c.p1_eigen < 1e-12 && c.p1_transverse < 1e-12 && c.p2_eigen < 1e-12 && c.normalisation < 1e-12, "{c:?}");
        }
        assert!(transition_kernel(&OscillatorParams::natural(0.25).unwrap()).is_err());
    }

    #[test]
    fn kernel_phase_converges_quadratically() {
        let eps = [0.1, 0.03, 0.01, 0.003];
        let errs: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let p = params_from_epsilon(1.0, 1.0, 1.0, e).unwrap();
                let c = transition_kernel(&p).unwrap().phase_scale(&p);
                (c / e.sqrt() - 1.0).abs()
            })
            .collect();
        let slope = loglog_slope(&eps, &errs);
        assert!((slope - 2.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn exact_momentum_ground_state_is_gaussian() {
        let p = params_from_epsilon(1.0, 1.0, 1.0, 0.3).unwrap();
        let qn = QuantumNumbers::new(0, 0);
        // ln|ψ| is quadratic: second differences along a line are constant.
        let l = |t: f64| momentum_wavefunction_exact(qn, 0.3 * t, 0.7 * t, &p).unwrap().norm().ln();
        let d1 = l(1.0) - 2.0 * l(0.0) + l(-1.0);
        let d2 = l(3.0) - 2.0 * l(2.0) + l(1.0);
        assert!((d1 - d2).abs() < 1e-10);
    }

    #[test]
    fn exact_momentum_is_normalised() {
        for (eps, n1, n2) in [(0.3, 0, 0), (0.3, 1, 2), (0.1, 2, 1)] {
            let p = params_from_epsilon(1.0, 1.0, 1.0, eps).unwrap();
            let norm = momentum_norm(QuantumNumbers::new(n1, n2), &p, 200).unwrap();
            assert!((norm - 1.0).abs() < 1e-6, "eps={eps} ({n1},{n2}): {norm}");
        }
    }

    #[test]
    fn exact_approaches_dominant() {
        let base = OscillatorParams::natural(0.2).unwrap();
        let d = exact_vs_dominant(QuantumNumbers::new(3, 3), 1e-3, &base, 300).unwrap();
        assert!(d < 1e-2, "{d}");
    }

    #[test]
    fn dominant_matches_closed() {
        let base = OscillatorParams::natural(0.2).unwrap();
        for (n1, n2) in [(0, 0), (3, 3), (2, 7), (9, 4), (40, 40), (40, 0), (0, 40)] {
            for eps in [0.1, 0.01] {
                let (c, s) = dominant_vs_closed(QuantumNumbers::new(n1, n2), eps, &base, 24).unwrap();
                assert!(c < 1e-8 && s < 1e-8, "({n1},{n2}) eps={eps}: {c} {s}");
            }
        }
    }

    #[test]
    fn closed_form_structure() {
        let base = OscillatorParams::natural(0.2).unwrap();
        let qn = QuantumNumbers::new(4, 4);
        let a = momentum_wavefunction_closed(qn, 1.0, 2.0, 0.05, &base).unwrap();
        let b = momentum_wavefunction_closed(qn, 2.0, 1.0, 0.05, &base).unwrap();
        assert!((a - b).norm() < 1e-14 * a.norm());
        assert_eq!(momentum_wavefunction_closed(QuantumNumbers::new(1, 3), 0.0, 0.0, 0.05, &base).unwrap(), Complex64::new(0.0, 0.0));
        let c0 = momentum_wavefunction_dominant(QuantumNumbers::new(0, 0), 3.0, -1.0, 0.05, &base).unwrap();
        let c1 = momentum_wavefunction_dominant(QuantumNumbers::new(0, 0), 0.0, 0.0, 0.05, &base).unwrap();
        assert!((c0 - c1).norm() < 1e-14);
        let half = momentum_wavefunction_dominant(QuantumNumbers::new(2, 2), 0.0, 0.0, 0.025, &base).unwrap();
        let full = momentum_wavefunction_dominant(QuantumNumbers::new(2, 2), 0.0, 0.0, 0.05, &base).unwrap();
        assert!((half / full - Complex64::new(SQRT_2.recip(), 0.0)).norm() < 1e-14);
        let huge = momentum_wavefunction_closed_scaled(QuantumNumbers::new(500_000, 500_002), 0.3, 0.1, 1e-6, &base).unwrap();
        assert!(huge.log_scale.is_finite() && huge.mantissa.norm().is_finite());
    }

    #[test]
    fn limit_scan_converges() {
        let base = OscillatorParams::natural(0.25).unwrap();
        let s = limit_schedule_between(0, 1.0, &base, 6, 20.0, 2000.0).unwrap();
        let rows = limit_scan(&s, &ScanGrid::default(), &base).unwrap();
        let errs: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
        assert!(is_monotone_with_jitter(&errs, 0.05), "{errs:?}");
        assert!(*errs.last().unwrap() < 0.02);
        let s2 = limit_schedule_between(2, 1.0, &base, 3, 100.0, 400.0).unwrap();
        for r in limit_scan(&s2, &ScanGrid::default(), &base).unwrap() {
            assert!(r.phase_error < 1e-6);
        }
    }

    #[test]
    fn rate_matches_laguerre_asymptotics() {
        let r = laguerre_bessel_rate(&[1000, 2000, 4000, 8000], 1, 1.0);
        assert!((r + 1.0).abs() < 0.1, "{r}");
    }
}
