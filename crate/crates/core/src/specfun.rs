//! Special functions used by the eigenfunction and limit machinery:
//! physicists' Hermite polynomials (complex argument), generalised Laguerre
//! polynomials, integer-order Bessel functions, Gauss–Hermite rules and
//! log-factorials.
//!
//! Large-degree evaluations go through [`Scaled`] values, a mantissa paired
//! with a natural-log scale, so `n₁, n₂ ~ 10⁴` never overflow.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

const RESCALE_ABOVE: f64 = 1e150;

/// `mantissa · e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled<T> {
    pub mantissa: T,
    pub log_scale: f64,
}

impl Scaled<f64> {
    pub fn to_f64(self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }

    /// `ln |value|`.
    pub fn ln_abs(self) -> f64 {
        self.mantissa.abs().ln() + self.log_scale
    }
}

impl Scaled<Complex64> {
    pub fn to_complex(self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }
}

/// `Hₙ(z)` by `H_{k+1} = 2zH_k − 2kH_{k−1}`.
pub fn hermite(n: usize, z: Complex64) -> Result<Complex64> {
    if n > 100_000 {
        return Err(Error::OutOfRange { what: "hermite degree", value: n as f64, max: 1e5 });
    }
    let (mut prev, mut cur) = (Complex64::new(1.0, 0.0), 2.0 * z);
    if n == 0 {
        return Ok(prev);
    }
    for k in 1..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    if cur.re.is_finite() && cur.im.is_finite() {
        Ok(cur)
    } else {
        Err(Error::Overflow("hermite"))
    }
}

pub fn hermite_real(n: usize, x: f64) -> Result<f64> {
    hermite(n, Complex64::new(x, 0.0)).map(|h| h.re)
}

/// `Hₙ(z)` as a scaled value; the recurrence is renormalised when it grows.
pub fn hermite_scaled(n: usize, z: Complex64) -> Scaled<Complex64> {
    let (mut prev, mut cur) = (Complex64::new(1.0, 0.0), 2.0 * z);
    let mut log_scale = 0.0;
    if n == 0 {
        return Scaled { mantissa: prev, log_scale };
    }
    for k in 1..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
        let mag = cur.norm();
        if mag > RESCALE_ABOVE {
            prev /= mag;
            cur /= mag;
            log_scale += mag.ln();
        }
    }
    Scaled { mantissa: cur, log_scale }
}

/// Orthonormal Hermite values `h̃ₖ(z) = Hₖ(z)/√(2ᵏ k!)` for `k = 0..=n`.
///
/// `h̃_{k+1} = √(2/(k+1)) z h̃ₖ − √(k/(k+1)) h̃_{k−1}`; stays O(e^{|z|²/2}).
pub fn hermite_normalized_all(n: usize, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Complex64::new(1.0, 0.0));
    if n == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * z);
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * z * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

pub fn hermite_normalized(n: usize, z: Complex64) -> Complex64 {
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * z * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Generalised Laguerre `L^α_m(x)` by the three-term recurrence in `m`.
pub fn laguerre(m: usize, alpha: u32, x: f64) -> f64 {
    laguerre_scaled(m, alpha, x).to_f64()
}

pub fn laguerre_scaled(m: usize, alpha: u32, x: f64) -> Scaled<f64> {
    let a = alpha as f64;
    let mut prev = 1.0;
    let mut log_scale = 0.0;
    if m == 0 {
        return Scaled { mantissa: prev, log_scale };
    }
    let mut cur = 1.0 + a - x;
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        let mag = cur.abs();
        if mag > RESCALE_ABOVE {
            prev /= mag;
            cur /= mag;
            log_scale += mag.ln();
        }
    }
    Scaled { mantissa: cur, log_scale }
}

/// `ln n!`: exact product below 20, Stirling series with four correction terms above.
pub fn log_factorial(n: u64) -> f64 {
    if n < 20 {
        let mut p = 1.0f64;
        for k in 2..=n {
            p *= k as f64;
        }
        return p.ln();
    }
    let x = n as f64;
    let x2 = x * x;
    stirling_ln_factorial(n) + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2) + 1.0 / (1260.0 * x * x2 * x2)
        - 1.0 / (1680.0 * x * x2 * x2 * x2)
}

/// Leading Stirling approximation `n ln n − n + ½ ln(2πn)`.
pub fn stirling_ln_factorial(n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * PI * x).ln()
}

/// `n! / stirling(n)`, tends to 1 from above as `1 + 1/(12n)`.
pub fn stirling_ratio(n: u64) -> f64 {
    (log_factorial(n) - stirling_ln_factorial(n)).exp()
}

/// `ln Γ(x)` for `x > 0` (Stirling series after shifting to `x ≥ 20`).
pub fn ln_gamma(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut y = x;
    while y < 20.0 {
        shift -= y.ln();
        y += 1.0;
    }
    let y2 = y * y;
    shift + (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * y) - 1.0 / (360.0 * y * y2)
        + 1.0 / (1260.0 * y * y2 * y2)
        - 1.0 / (1680.0 * y * y2 * y2 * y2)
}

/// `ln N(n)` with `N(n) = (√π 2ⁿ n!)^{−1/2}`.
pub fn ln_hermite_norm(n: u64) -> f64 {
    -0.5 * (0.5 * PI.ln() + n as f64 * std::f64::consts::LN_2 + log_factorial(n))
}

/// Bessel function of the first kind `Jₙ(x)`, integer order, `x ≥ 0`.
///
/// Power series for `x < 1`, Miller's backward recurrence normalised by
/// `J₀ + 2Σ J₂ₖ = 1` otherwise. `J₋ₙ = (−1)ⁿ Jₙ`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    assert!(x >= 0.0, "bessel_j needs x >= 0");
    let order = n.unsigned_abs();
    let sign = if n < 0 && order % 2 == 1 { -1.0 } else { 1.0 };
    sign * bessel_j_nonneg(order, x)
}

fn bessel_j_nonneg(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < 1.0 {
        return bessel_series(n, x);
    }
    bessel_miller(n, x)[n as usize]
}

fn bessel_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let lead = (n as f64 * half.ln() - log_factorial(n as u64)).exp();
    let q = -half * half;
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// `J₀..=J_{n}` at `x ≥ 1` from one backward sweep.
pub fn bessel_j_all(n: u32, x: f64) -> Vec<f64> {
    if x < 1.0 {
        return (0..=n).map(|k| bessel_j_nonneg(k, x)).collect();
    }
    bessel_miller(n, x)
}

fn bessel_miller(n: u32, x: f64) -> Vec<f64> {
    let top_order = (n as f64).max(x);
    let mut start = (top_order + 20.0 + 10.0 * top_order.cbrt()) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        vals[k - 1] = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
            norm *= 1e-250;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * vals[k - 1];
        }
    }
    norm += vals[0];
    vals.truncate(n as usize + 1);
    vals.iter_mut().for_each(|v| *v /= norm);
    vals
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    GaussHermite,
}

/// Nodes and weights for `∫ f(x) e^{−x²} dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: QuadratureKind,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn integrate_complex<F: FnMut(f64) -> Complex64>(&self, mut f: F) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// K-point Gauss–Hermite rule, exact through degree `2K − 1`.
///
/// Golub–Welsch eigenvalues seed a Newton polish on the orthonormal
/// recurrence; weights are `2 / p'_K(x)²` in that normalisation.
pub fn gauss_hermite(k: usize) -> Result<QuadratureRule> {
    if !(2..=512).contains(&k) {
        return Err(Error::QuadratureOrder(k));
    }
    let jacobi = DMatrix::from_fn(k, k, |i, j| if i + 1 == j || j + 1 == i { (i.max(j) as f64 / 2.0).sqrt() } else { 0.0 });
    let mut guesses: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    guesses.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let half = k / 2;
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    for i in 0..half {
        let mut x = guesses[i];
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (p, dp) = orthonormal_hermite_and_derivative(k, x);
            deriv = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, dp) = orthonormal_hermite_and_derivative(k, x);
        if dp.is_finite() {
            deriv = dp;
        }
        let w = 2.0 / (deriv * deriv);
        nodes[i] = x;
        weights[i] = w;
        nodes[k - 1 - i] = -x;
        weights[k - 1 - i] = w;
    }
    if k % 2 == 1 {
        let (_, dp) = orthonormal_hermite_and_derivative(k, 0.0);
        nodes[half] = 0.0;
        weights[half] = 2.0 / (dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    Ok(QuadratureRule { nodes, weights, kind: QuadratureKind::GaussHermite })
}

/// `p_K(x)` and `p_K'(x)` for the `π^{−1/4}`-normalised Hermite polynomials.
fn orthonormal_hermite_and_derivative(k: usize, x: f64) -> (f64, f64) {
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 1..=k {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = x * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * k as f64).sqrt() * p2)
}
