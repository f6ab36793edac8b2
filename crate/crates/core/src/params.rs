//! Oscillator parameters, regime classification and the two frequencies.
//!
//! The fourth-order equation of motion factorises as
//! `λ (d²/dt² + ω₁²)(d²/dt² + ω₂²) q = 0` with
//! `ω₁,₂² = (1 ± √(1 − 4λω²)) / 2λ`. Which of the four regimes a parameter
//! set falls into is fixed by the sign of `λ` and of `1 − 4λω²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance on `1 − 4λω²` used to detect equal frequencies.
pub const DEGENERACY_TOL: f64 = 1e-14;

/// Physical constants of one oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub m: f64,
    pub omega: f64,
    pub lambda: f64,
    pub hbar: f64,
}

impl OscillatorParams {
    pub fn new(m: f64, omega: f64, lambda: f64, hbar: f64) -> Result<Self> {
        let p = OscillatorParams { m, omega, lambda, hbar };
        p.validate()?;
        Ok(p)
    }

    /// Natural units `m = ω = ħ = 1`.
    pub fn natural(lambda: f64) -> Result<Self> {
        Self::new(1.0, 1.0, lambda, 1.0)
    }

    /// The equal-frequency point `λ = 1/(4ω²)`.
    pub fn degenerate(m: f64, omega: f64, hbar: f64) -> Result<Self> {
        Self::new(m, omega, 0.25 / (omega * omega), hbar)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("m", self.m), ("omega", self.omega), ("hbar", self.hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and positive, got {v}")));
            }
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be finite, got {}", self.lambda)));
        }
        if self.lambda == 0.0 {
            return Err(Error::ZeroLambda);
        }
        Ok(())
    }

    /// `1 − 4λω²`; equals `ε²` in the near-degenerate family.
    pub fn discriminant(&self) -> f64 {
        1.0 - 4.0 * self.lambda * self.omega * self.omega
    }

    /// `ε = √(1 − 4λω²)`, defined in the real-distinct regime.
    pub fn epsilon(&self) -> Option<f64> {
        let d = self.discriminant();
        (d >= 0.0 && self.lambda > 0.0).then(|| d.sqrt())
    }

    pub fn regime(&self) -> Result<Regime> {
        classify_regime(self)
    }

    /// Errors unless the parameters are in the real-distinct regime.
    pub fn require_real_distinct(&self) -> Result<RealFrequencies> {
        match classify_regime(self)? {
            Regime::RealDistinct => {
                let f = frequencies(self)?;
                Ok(RealFrequencies { omega1: f.omega1.re, omega2: f.omega2.re })
            }
            Regime::Degenerate => Err(Error::SingularTransformation),
            other => Err(Error::RegimeMismatch { expected: "RealDistinct", found: other }),
        }
    }

    pub fn require_degenerate(&self) -> Result<()> {
        match classify_regime(self)? {
            Regime::Degenerate => Ok(()),
            other => Err(Error::RegimeMismatch { expected: "Degenerate", found: other }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `λ > 1/(4ω²)`: both frequencies complex.
    ComplexPair,
    /// `0 < λ < 1/(4ω²)`: `ω₁² > ω₂² > 0`.
    RealDistinct,
    /// `λ = 1/(4ω²)`: `ω₁ = ω₂ = √2 ω`.
    Degenerate,
    /// `λ < 0`: one real and one imaginary frequency.
    MixedRealImaginary,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::ComplexPair => "ComplexPair",
            Regime::RealDistinct => "RealDistinct",
            Regime::Degenerate => "Degenerate",
            Regime::MixedRealImaginary => "MixedRealImaginary",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyPair {
    pub omega1: Complex64,
    pub omega2: Complex64,
}

impl FrequencyPair {
    pub fn squares(&self) -> (Complex64, Complex64) {
        (self.omega1 * self.omega1, self.omega2 * self.omega2)
    }

    /// Both frequencies when they are real (imaginary parts exactly zero).
    pub fn real(&self) -> Option<(f64, f64)> {
        (self.omega1.im == 0.0 && self.omega2.im == 0.0).then_some((self.omega1.re, self.omega2.re))
    }
}

/// Real frequencies of the real-distinct regime, `ω₁ > ω₂ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealFrequencies {
    pub omega1: f64,
    pub omega2: f64,
}

/// Classify with the default degeneracy tolerance.
pub fn classify_regime(params: &OscillatorParams) -> Result<Regime> {
    classify_regime_with_tol(params, DEGENERACY_TOL)
}

pub fn classify_regime_with_tol(params: &OscillatorParams, tol: f64) -> Result<Regime> {
    params.validate()?;
    let d = params.discriminant();
    Ok(if d.abs() <= tol {
        Regime::Degenerate
    } else if d < 0.0 {
        Regime::ComplexPair
    } else if params.lambda < 0.0 {
        Regime::MixedRealImaginary
    } else {
        Regime::RealDistinct
    })
}

/// `ω₁`, `ω₂` from the factorised equation of motion.
///
/// `ω₂²` is evaluated as `2ω² / (1 + √(1 − 4λω²))`, algebraically equal to
/// `(1 − √(1 − 4λω²)) / 2λ` but free of cancellation for small `λ`.
/// Square roots are principal branches.
pub fn frequencies(params: &OscillatorParams) -> Result<FrequencyPair> {
    params.validate()?;
    let w2 = params.omega * params.omega;
    let d = params.discriminant();
    // Inside the degeneracy window the root is pinned to zero so both
    // frequencies stay real.
    let s = if d.abs() <= DEGENERACY_TOL { Complex64::new(0.0, 0.0) } else { Complex64::new(d, 0.0).sqrt() };
    let omega1_sq = positive_zero_im((1.0 + s) / (2.0 * params.lambda));
    let omega2_sq = positive_zero_im(2.0 * w2 / (1.0 + s));
    Ok(FrequencyPair { omega1: omega1_sq.sqrt(), omega2: omega2_sq.sqrt() })
}

/// Replaces a `-0.0` imaginary part so the principal root lands on `+i`.
fn positive_zero_im(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

/// Near-degenerate parametrisation `1 − 4λω² = ε²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonParam {
    pub epsilon: f64,
}

impl EpsilonParam {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::EpsilonOutOfRange(epsilon));
        }
        Ok(EpsilonParam { epsilon })
    }
}

/// Parameters with `λ = (1 − ε²)/(4ω²)`.
pub fn params_from_epsilon(m: f64, omega: f64, hbar: f64, epsilon: f64) -> Result<OscillatorParams> {
    let eps = EpsilonParam::new(epsilon)?;
    OscillatorParams::new(m, omega, (1.0 - eps.epsilon * eps.epsilon) / (4.0 * omega * omega), hbar)
}

/// First-order expansion `ω₁,₂ ≈ √2 ω (1 ± ε/2)`.
pub fn frequencies_first_order(omega: f64, epsilon: f64) -> (f64, f64) {
    let base = std::f64::consts::SQRT_2 * omega;
    (base * (1.0 + 0.5 * epsilon), base * (1.0 - 0.5 * epsilon))
}

/// Exact frequencies on the ε-family: `ω₁ = √2ω/√(1−ε)`, `ω₂ = √2ω/√(1+ε)`.
pub fn frequencies_on_epsilon_family(omega: f64, epsilon: f64) -> (f64, f64) {
    let base = std::f64::consts::SQRT_2 * omega;
    (base / (1.0 - epsilon).sqrt(), base / (1.0 + epsilon).sqrt())
}

/// λ giving the frequency ratio `ω₁/ω₂ = ratio > 1` at base frequency ω.
///
/// From `ω₁² + ω₂² = 1/λ` and `ω₁²ω₂² = ω²/λ`: `λ = r² / ((1 + r²)² ω²)`.
pub fn lambda_for_ratio(ratio: f64, omega: f64) -> Result<f64> {
    if !(ratio > 1.0 && ratio.is_finite()) {
        return Err(Error::InvalidParameter(format!("frequency ratio must exceed 1, got {ratio}")));
    }
    let r2 = ratio * ratio;
    Ok(r2 / ((1.0 + r2) * (1.0 + r2) * omega * omega))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_slope(&lx, &ly)
}

pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn check_vieta(p: &OscillatorParams) {
        let f = frequencies(p).unwrap();
        let (a, b) = f.squares();
        let sum = Complex64::new(1.0 / p.lambda, 0.0);
        let prod = Complex64::new(p.omega * p.omega / p.lambda, 0.0);
        assert!(rel(a + b, sum) < 1e-12, "sum {:?} vs {:?}", a + b, sum);
        assert!(rel(a * b, prod) < 1e-12, "product {:?} vs {:?}", a * b, prod);
    }

    #[test]
    fn regimes_match_lambda_ranges() {
        let cases = [(0.25, Regime::Degenerate), (0.15, Regime::RealDistinct), (-1.0, Regime::MixedRealImaginary), (1.0, Regime::ComplexPair)];
        for (lambda, want) in cases {
            assert_eq!(OscillatorParams::natural(lambda).unwrap().regime().unwrap(), want, "lambda={lambda}");
        }
    }

    #[test]
    fn zero_lambda_is_rejected() {
        assert_eq!(OscillatorParams::natural(0.0).unwrap_err(), Error::ZeroLambda);
        let p = OscillatorParams { m: 1.0, omega: 1.0, lambda: 0.0, hbar: 1.0 };
        assert_eq!(classify_regime(&p).unwrap_err(), Error::ZeroLambda);
    }

    #[test]
    fn degenerate_point_has_equal_frequencies() {
        let f = frequencies(&OscillatorParams::natural(0.25).unwrap()).unwrap();
        assert_eq!(f.real(), Some((SQRT_2, SQRT_2)));
        let p = OscillatorParams::degenerate(1.3, 0.7, 1.0).unwrap();
        assert_eq!(p.regime().unwrap(), Regime::Degenerate);
        let (w1, w2) = frequencies(&p).unwrap().real().unwrap();
        assert!((w1 - SQRT_2 * 0.7).abs() < 1e-15 && (w2 - SQRT_2 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn degeneracy_tolerance_is_on_discriminant() {
        let p = OscillatorParams::natural(0.25 - 1e-16).unwrap();
        assert_eq!(p.regime().unwrap(), Regime::Degenerate);
        let p = OscillatorParams::natural(0.25 - 1e-9).unwrap();
        assert_eq!(p.regime().unwrap(), Regime::RealDistinct);
        assert_eq!(classify_regime_with_tol(&p, 1e-6).unwrap(), Regime::Degenerate);
    }

    #[test]
    fn real_distinct_values() {
        let f = frequencies(&OscillatorParams::natural(0.15).unwrap()).unwrap();
        let (w1, w2) = f.real().unwrap();
        // ω₁² = (1 + √0.4)/0.3, ω₂² = (1 − √0.4)/0.3
        let s = 0.4f64.sqrt();
        assert!((w1 - ((1.0 + s) / 0.3).sqrt()).abs() < 1e-14);
        assert!((w2 - ((1.0 - s) / 0.3).sqrt()).abs() < 1e-14);
        assert!((w1 - 2.332706).abs() < 1e-6 && (w2 - 1.106864).abs() < 1e-6);
        assert!((w1 * w1 * w2 * w2 - 1.0 / 0.15).abs() < 1e-12);
    }

    #[test]
    fn mixed_regime_has_one_imaginary_frequency() {
        let f = frequencies(&OscillatorParams::natural(-0.25).unwrap()).unwrap();
        assert!(f.omega1.re.abs() < 1e-15 && f.omega1.im > 0.0);
        assert!(f.omega2.im == 0.0 && f.omega2.re > 0.0);
    }

    #[test]
    fn vieta_holds_in_every_regime() {
        for lambda in [-3.0, -1.0, -0.25, 1e-6, 0.01, 0.15, 0.2499, 0.25, 0.2501, 1.0, 7.5] {
            for omega in [0.3, 1.0, 2.5] {
                check_vieta(&OscillatorParams::new(1.7, omega, lambda / (omega * omega), 0.9).unwrap());
            }
        }
    }

    #[test]
    fn epsilon_inversion() {
        let p = params_from_epsilon(1.0, 1.0, 1.0, 0.2).unwrap();
        assert!((p.lambda - 0.24).abs() < 1e-15);
        assert!((p.epsilon().unwrap() - 0.2).abs() < 1e-15);
        let (w1, _) = frequencies(&p).unwrap().real().unwrap();
        assert!((w1 - 2.5f64.sqrt()).abs() < 1e-14);
        let (a1, _) = frequencies_first_order(1.0, 0.2);
        assert!((a1 - 1.555635).abs() < 1e-6);
        assert!((w1 - a1).abs() <= 0.2 * 0.2);
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(params_from_epsilon(1.0, 1.0, 1.0, bad), Err(Error::EpsilonOutOfRange(_))));
        }
    }

    #[test]
    fn first_order_expansion_error_is_quadratic() {
        let eps = [0.1, 0.01, 0.001];
        let gaps: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let p = params_from_epsilon(1.0, 1.0, 1.0, e).unwrap();
                let (w1, _) = frequencies(&p).unwrap().real().unwrap();
                (w1 - frequencies_first_order(1.0, e).0).abs()
            })
            .collect();
        let slope = loglog_slope(&eps, &gaps);
        assert!((slope - 2.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn expansion_bound_for_small_epsilon() {
        for omega in [0.5, 1.0, 3.0] {
            for e in [0.1, 0.05, 0.01, 0.003] {
                let p = params_from_epsilon(1.0, omega, 1.0, e).unwrap();
                let (w1, w2) = frequencies(&p).unwrap().real().unwrap();
                let (a1, a2) = frequencies_first_order(omega, e);
                assert!((w1 - a1).abs() <= omega * e * e);
                assert!((w2 - a2).abs() <= omega * e * e);
                let (x1, x2) = frequencies_on_epsilon_family(omega, e);
                assert!((w1 - x1).abs() < 1e-13 * x1 && (w2 - x2).abs() < 1e-13 * x2);
            }
        }
    }

    #[test]
    fn ratio_two_lambda() {
        let lambda = lambda_for_ratio(2.0, 1.0).unwrap();
        assert!((lambda - 4.0 / 25.0).abs() < 1e-16);
        let (w1, w2) = frequencies(&OscillatorParams::natural(lambda).unwrap()).unwrap().real().unwrap();
        assert!((w1 / w2 - 2.0).abs() < 1e-14);
    }

    proptest::proptest! {
        #[test]
        fn epsilon_family_is_real_distinct(e in 1e-6f64..0.999_999, omega in 0.1f64..10.0) {
            let p = params_from_epsilon(1.0, omega, 1.0, e).unwrap();
            proptest::prop_assert_eq!(p.regime().unwrap(), Regime::RealDistinct);
        }
    }
}
