//! Floating-point ladder operators, metric operators and the two
//! quantization schemes on a truncated two-mode Fock space.

use std::sync::Arc;

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::FockBasis;
use crate::classical::normal_mode_map;
use crate::error::Result;
use crate::params::{loglog_slope, params_from_epsilon, OscillatorParams};
use crate::spectra::{energy_indefinite, energy_positive, QuantumNumbers};

type CMat = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Dense operator on a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub basis: Arc<FockBasis>,
    pub matrix: CMat,
}

impl FockOperator {
    pub fn new(basis: Arc<FockBasis>, matrix: CMat) -> Self {
        assert_eq!(matrix.nrows(), basis.dim());
        assert_eq!(matrix.ncols(), basis.dim());
        FockOperator { basis, matrix }
    }

    pub fn identity(basis: Arc<FockBasis>) -> Self {
        let d = basis.dim();
        FockOperator { basis, matrix: CMat::identity(d, d) }
    }

    /// Conjugate transpose: the adjoint for the positive-definite product.
    pub fn adjoint(&self) -> Self {
        FockOperator { basis: self.basis.clone(), matrix: self.matrix.adjoint() }
    }

    fn with(&self, matrix: CMat) -> Self {
        FockOperator { basis: self.basis.clone(), matrix }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.with(&self.matrix * &other.matrix)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.with(&self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.with(&self.matrix - &other.matrix)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.with(&self.matrix * c)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Largest `|Aᵢⱼ − Bᵢⱼ|` over columns of interior states.
    pub fn interior_distance(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for j in self.basis.interior() {
            for i in 0..self.basis.dim() {
                worst = worst.max((self.matrix[(i, j)] - other.matrix[(i, j)]).norm());
            }
        }
        worst
    }

    /// Largest `|Aᵢⱼ − Bᵢⱼ|` over the whole matrix.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }
}

/// Standard annihilators `(c₁, c₂)` on the truncated basis.
pub fn ladder_operators(basis: &Arc<FockBasis>) -> (FockOperator, FockOperator) {
    let d = basis.dim();
    let mut c1 = CMat::zeros(d, d);
    let mut c2 = CMat::zeros(d, d);
    for j in 0..d {
        let (n1, n2) = basis.state(j);
        if n1 > 0 {
            let i = basis.index_of(n1 - 1, n2).expect("lower state exists");
            c1[(i, j)] = re((n1 as f64).sqrt());
        }
        if n2 > 0 {
            let i = basis.index_of(n1, n2 - 1).expect("lower state exists");
            c2[(i, j)] = re((n2 as f64).sqrt());
        }
    }
    (FockOperator::new(basis.clone(), c1), FockOperator::new(basis.clone(), c2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricKind {
    /// `(−1)^{n₁}`.
    Eta,
    /// `(−1)^{n₂}`.
    Tau,
}

/// Diagonal metric with entries `±1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricOperator {
    pub kind: MetricKind,
    pub signs: Vec<i8>,
}

impl MetricOperator {
    pub fn new(kind: MetricKind, basis: &FockBasis) -> Self {
        let signs = basis
            .states()
            .iter()
            .map(|&(n1, n2)| {
                let n = if kind == MetricKind::Eta { n1 } else { n2 };
                if n % 2 == 0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        MetricOperator { kind, signs }
    }

    pub fn matrix(&self) -> CMat {
        CMat::from_diagonal(&nalgebra::DVector::from_iterator(self.signs.len(), self.signs.iter().map(|&s| re(s as f64))))
    }

    /// `η = η⁺ = η⁻¹` as a matrix identity.
    pub fn is_involutive(&self) -> bool {
        let m = self.matrix();
        let id = CMat::identity(m.nrows(), m.ncols());
        &m * &m == id && m.adjoint() == m
    }

    /// Indefinite product `(a, η b)`.
    pub fn inner(&self, a: &nalgebra::DVector<Complex64>, b: &nalgebra::DVector<Complex64>) -> Complex64 {
        a.iter().zip(b.iter()).zip(&self.signs).map(|((x, y), &s)| x.conj() * y * s as f64).sum()
    }
}

/// `A⋆ = η A⁺ η`.
pub fn star_conjugate(op: &FockOperator, metric: &MetricOperator) -> FockOperator {
    let mut m = op.matrix.adjoint();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let s = (metric.signs[i] * metric.signs[j]) as f64;
            m[(i, j)] *= s;
        }
    }
    FockOperator::new(op.basis.clone(), m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Positive metric, spectrum unbounded below.
    IndefiniteEnergy,
    /// Metric `η = (−1)^{n₁}`, positive spectrum. Mode 1 is built with the
    /// roles of creation and annihilation exchanged (`a₁ = c₁†`, `a₁⋆ = −c₁`).
    IndefiniteMetric,
}

/// Mode operators `x̂ᵢ = i√(ħ/2mωᵢ)(aᵢ − aᵢ⋆)`, `p̂ᵢ = √(mħωᵢ/2)(aᵢ + aᵢ⋆)`.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub scheme: Scheme,
    pub a1: FockOperator,
    pub a2: FockOperator,
    /// The creation partners; `a₁⋆`, `a₂⋆` under the scheme's metric.
    pub a1_dag: FockOperator,
    pub a2_dag: FockOperator,
    pub x1: FockOperator,
    pub x2: FockOperator,
    pub p1: FockOperator,
    pub p2: FockOperator,
}

pub fn build_mode_operators(basis: &Arc<FockBasis>, params: &OscillatorParams, scheme: Scheme) -> Result<ModeOperators> {
    let f = params.require_real_distinct()?;
    let (m, h) = (params.m, params.hbar);
    let (c1, c2) = ladder_operators(basis);
    let (c1d, c2d) = (c1.adjoint(), c2.adjoint());
    let (a1, a1_dag) = match scheme {
        Scheme::IndefiniteEnergy => (c1.clone(), c1d.clone()),
        Scheme::IndefiniteMetric => (c1d.clone(), c1.scale(re(-1.0))),
    };
    let xs = |w: f64| (h / (2.0 * m * w)).sqrt();
    let ps = |w: f64| (m * h * w / 2.0).sqrt();
    let x1 = a1.sub(&a1_dag).scale(I * xs(f.omega1));
    let p1 = a1.add(&a1_dag).scale(re(ps(f.omega1)));
    let x2 = c2.sub(&c2d).scale(I * xs(f.omega2));
    let p2 = c2.add(&c2d).scale(re(ps(f.omega2)));
    Ok(ModeOperators { scheme, a1, a2: c2, a1_dag, a2_dag: c2d, x1, x2, p1, p2 })
}

impl ModeOperators {
    /// `(p₂²/2m + mω₂²x₂²/2) − (p₁²/2m + mω₁²x₁²/2)`.
    pub fn hamiltonian_normal(&self, params: &OscillatorParams) -> Result<FockOperator> {
        let f = params.require_real_distinct()?;
        let m = params.m;
        let osc = |x: &FockOperator, p: &FockOperator, w: f64| {
            p.mul(p).scale(re(0.5 / m)).add(&x.mul(x).scale(re(0.5 * m * w * w)))
        };
        Ok(osc(&self.x2, &self.p2, f.omega2).sub(&osc(&self.x1, &self.p1, f.omega1)))
    }

    /// Canonical operators `(q̂₁, q̂₂, Π̂₁, Π̂₂)` through the decoupling map.
    pub fn canonical(&self, params: &OscillatorParams) -> Result<[FockOperator; 4]> {
        let s = normal_mode_map(params)?.matrix;
        let z = [&self.x1, &self.x2, &self.p1, &self.p2];
        Ok(std::array::from_fn(|r| {
            (0..4).fold(FockOperator::new(self.x1.basis.clone(), CMat::zeros(self.x1.basis.dim(), self.x1.basis.dim())), |acc, c| {
                acc.add(&z[c].scale(re(s[(r, c)])))
            })
        }))
    }

    /// `Π̂₁q̂₂ − Π̂₂²/(2mλ) + mω²q̂₁²/2 − mq̂₂²/2`.
    pub fn hamiltonian_ostrogradski(&self, params: &OscillatorParams) -> Result<FockOperator> {
        let [q1, q2, pi1, pi2] = self.canonical(params)?;
        let (m, w, l) = (params.m, params.omega, params.lambda);
        Ok(pi1
            .mul(&q2)
            .sub(&pi2.mul(&pi2).scale(re(0.5 / (m * l))))
            .add(&q1.mul(&q1).scale(re(0.5 * m * w * w)))
            .sub(&q2.mul(&q2).scale(re(0.5 * m))))
    }
}

/// Greedy nearest matching of predicted levels against computed eigenvalues;
/// returns the largest relative mismatch.
fn match_levels(predicted: &[f64], eigenvalues: &[f64]) -> f64 {
    let mut used = vec![false; eigenvalues.len()];
    let mut worst = 0.0f64;
    for &e in predicted {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in eigenvalues.iter().enumerate() {
            if used[i] {
                continue;
            }
            let d = (v - e).abs();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, d)) => {
                used[i] = true;
                worst = worst.max(d / e.abs().max(f64::MIN_POSITIVE));
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositiveSchemeReport {
    pub cutoff: u64,
    pub lowest_eigenvalue: f64,
    pub expected_ground: f64,
    /// Largest relative mismatch between interior levels and eigenvalues.
    pub spectrum_rel_err: f64,
    /// `x̂₁⁺ = −x̂₁`, `p̂₁⁺ = −p̂₁`, `x̂₂⁺ = x̂₂`, `p̂₂⁺ = p̂₂`.
    pub plus_parity_defect: f64,
    /// `x̂ᵢ⋆ = x̂ᵢ`, `p̂ᵢ⋆ = p̂ᵢ`.
    pub star_hermitian_defect: f64,
    /// Hermiticity of the primed operators.
    pub primed_hermitian_defect: f64,
    /// Primed oscillator sum against the two-frequency Hamiltonian.
    pub primed_vs_normal: f64,
    /// Ostrogradski Hamiltonian against the two-frequency one (interior).
    pub ostrogradski_vs_normal: f64,
    /// `[x̂ᵢ, p̂ⱼ] = iħδᵢⱼ` on the interior.
    pub ccr_defect: f64,
    /// All states `|2j, n₂⟩` have metric norm `+1`.
    pub physical_norms_positive: bool,
}

/// Builds the primed operators, the positive Hamiltonian, and compares its
/// eigenvalues with `ħω₁(n₁+½) + ħω₂(n₂+½)` on interior labels.
pub fn positive_hamiltonian_check(params: &OscillatorParams, basis: &Arc<FockBasis>) -> Result<PositiveSchemeReport> {
    let f = params.require_real_distinct()?;
    let (m, h) = (params.m, params.hbar);
    let ops = build_mode_operators(basis, params, Scheme::IndefiniteMetric)?;
    let eta = MetricOperator::new(MetricKind::Eta, basis);

    let plus_parity_defect = [
        ops.x1.adjoint().distance(&ops.x1.scale(re(-1.0))),
        ops.p1.adjoint().distance(&ops.p1.scale(re(-1.0))),
        ops.x2.adjoint().distance(&ops.x2),
        ops.p2.adjoint().distance(&ops.p2),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let star_hermitian_defect = [&ops.x1, &ops.x2, &ops.p1, &ops.p2]
        .iter()
        .map(|o| star_conjugate(o, &eta).distance(o))
        .fold(0.0, f64::max);

    let x1p = ops.x1.scale(I);
    let p1p = ops.p1.scale(-I);
    let primed_hermitian_defect = [&x1p, &p1p].iter().map(|o| o.adjoint().distance(o)).fold(0.0, f64::max);
    let osc = |x: &FockOperator, p: &FockOperator, w: f64| p.mul(p).scale(re(0.5 / m)).add(&x.mul(x).scale(re(0.5 * m * w * w)));
    let h18 = osc(&x1p, &p1p, f.omega1).add(&osc(&ops.x2, &ops.p2, f.omega2));
    let h8 = ops.hamiltonian_normal(params)?;
    let h5 = ops.hamiltonian_ostrogradski(params)?;
    let scale = h18.max_abs();
    let primed_vs_normal = h18.distance(&h8) / scale;
    let ostrogradski_vs_normal = h5.interior_distance(&h8) / scale;

    let id = FockOperator::identity(basis.clone());
    let ihbar = id.scale(I * h);
    let zero = id.scale(re(0.0));
    let ccr_defect = [
        ops.x1.commutator(&ops.p1).interior_distance(&ihbar),
        ops.x2.commutator(&ops.p2).interior_distance(&ihbar),
        ops.x1.commutator(&ops.p2).interior_distance(&zero),
        ops.x2.commutator(&ops.p1).interior_distance(&zero),
        ops.x1.commutator(&ops.x2).interior_distance(&zero),
        ops.p1.commutator(&ops.p2).interior_distance(&zero),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let eig = SymmetricEigen::new(h18.matrix.clone()).eigenvalues;
    let eigenvalues: Vec<f64> = eig.iter().copied().collect();
    let lowest_eigenvalue = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let predicted: Vec<f64> = basis
        .interior()
        .map(|i| {
            let (n1, n2) = basis.state(i);
            energy_positive(QuantumNumbers::new(n1, n2), params)
        })
        .collect::<Result<_>>()?;
    let spectrum_rel_err = match_levels(&predicted, &eigenvalues);
    let expected_ground = 0.5 * h * (f.omega1 + f.omega2);

    let physical_norms_positive = (0..basis.dim()).filter(|&i| basis.state(i).0 % 2 == 0).all(|i| eta.signs[i] == 1);
    Ok(PositiveSchemeReport {
        cutoff: basis.cutoff(),
        lowest_eigenvalue,
        expected_ground,
        spectrum_rel_err,
        plus_parity_defect,
        star_hermitian_defect,
        primed_hermitian_defect,
        primed_vs_normal,
        ostrogradski_vs_normal,
        ccr_defect,
        physical_norms_positive,
    })
}

/// Eigenvalues of the two-frequency Hamiltonian with the positive metric
/// against `−ħω₁(n₁+½) + ħω₂(n₂+½)`; returns the largest relative mismatch.
pub fn indefinite_energy_check(params: &OscillatorParams, basis: &Arc<FockBasis>) -> Result<f64> {
    let ops = build_mode_operators(basis, params, Scheme::IndefiniteEnergy)?;
    let h8 = ops.hamiltonian_normal(params)?;
    let eigenvalues: Vec<f64> = SymmetricEigen::new(h8.matrix).eigenvalues.iter().copied().collect();
    let predicted: Vec<f64> = basis
        .interior()
        .map(|i| {
            let (n1, n2) = basis.state(i);
            energy_indefinite(QuantumNumbers::new(n1, n2), params)
        })
        .collect::<Result<_>>()?;
    Ok(match_levels(&predicted, &eigenvalues))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupRow {
    pub epsilon: f64,
    /// Coefficient of `q̂₁` in `q̂₁⁺`.
    pub leading: f64,
    /// `|c_{Π₂} + 2c_{q₁}/m|` and the other two coefficients, largest of the three.
    pub subleading: f64,
    /// `‖q̂₁⁺ − Σ cₖ Ôₖ‖ / ‖q̂₁⁺‖`.
    pub fit_residual: f64,
    /// `‖(q̂₁⁺)⁺ − q̂₁‖`.
    pub involution_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    pub rows: Vec<BlowupRow>,
    /// Log-log slope of `|leading|` against ε.
    pub slope: f64,
}

/// For each ε: builds `q̂₁` in the positive-metric scheme, takes its
/// positive-product adjoint, and expands the result over the fixed
/// operators `(q̂₁, q̂₂, Π̂₁, Π̂₂)`.
pub fn adjoint_blowup_scan(epsilons: &[f64], basis: &Arc<FockBasis>, params: &OscillatorParams) -> Result<BlowupReport> {
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let p = params_from_epsilon(params.m, params.omega, params.hbar, eps)?;
        let ops = build_mode_operators(basis, &p, Scheme::IndefiniteMetric)?;
        let [q1, ..] = ops.canonical(&p)?;
        let target = q1.adjoint();
        // Expand over (x₁, x₂, p₁, p₂) first, where the Gram matrix is well conditioned.
        let z = [&ops.x1, &ops.x2, &ops.p1, &ops.p2];
        let frob = |a: &CMat, b: &CMat| a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>();
        let gram = nalgebra::Matrix4::<Complex64>::from_fn(|a, b| frob(&z[a].matrix, &z[b].matrix));
        let rhs = nalgebra::Vector4::<Complex64>::from_fn(|a, _| frob(&z[a].matrix, &target.matrix));
        let d = gram.lu().solve(&rhs).expect("mode operators are independent");
        let fitted = (0..4).fold(target.scale(re(0.0)), |acc, j| acc.add(&z[j].scale(d[j])));
        let fit_residual = fitted.distance(&target) / target.max_abs();
        // z = S⁻¹ (q, Π), so the coefficients over (q, Π) are (S⁻¹)ᵀ d.
        let s_inv: Matrix4<f64> = normal_mode_map(&p)?.symplectic_inverse();
        let d_re = Vector4::new(d[0].re, d[1].re, d[2].re, d[3].re);
        let c = s_inv.transpose() * d_re;
        let subleading = c[1].abs().max(c[2].abs()).max((c[3] + 2.0 * c[0] / p.m).abs());
        let involution_defect = target.adjoint().distance(&q1);
        rows.push(BlowupRow { epsilon: eps, leading: c[0], subleading, fit_residual, involution_defect });
    }
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let lead: Vec<f64> = rows.iter().map(|r| r.leading.abs()).collect();
    let slope = loglog_slope(&eps, &lead);
    Ok(BlowupReport { rows, slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(cutoff: u64) -> (Arc<FockBasis>, OscillatorParams) {
        (Arc::new(FockBasis::new(cutoff)), OscillatorParams::natural(0.15).unwrap())
    }

    #[test]
    fn ladder_algebra_on_interior() {
        let (b, _) = setup(8);
        let (c1, c2) = ladder_operators(&b);
        let id = FockOperator::identity(b.clone());
        let zero = id.scale(re(0.0));
        assert!(c1.commutator(&c1.adjoint()).interior_distance(&id) < 1e-13);
        assert!(c2.commutator(&c2.adjoint()).interior_distance(&id) < 1e-13);
        assert!(c1.commutator(&c2.adjoint()).interior_distance(&zero) < 1e-13);
        let vac = b.index_of(0, 0).unwrap();
        assert!(c1.matrix.column(vac).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn canonical_commutators_in_both_schemes() {
        let (b, p) = setup(10);
        for scheme in [Scheme::IndefiniteEnergy, Scheme::IndefiniteMetric] {
            let ops = build_mode_operators(&b, &p, scheme).unwrap();
            let id = FockOperator::identity(b.clone());
            assert!(ops.x1.commutator(&ops.p1).interior_distance(&id.scale(I)) < 1e-12);
            assert!(ops.x2.commutator(&ops.p2).interior_distance(&id.scale(I)) < 1e-12);
            let [q1, q2, pi1, pi2] = ops.canonical(&p).unwrap();
            assert!(q1.commutator(&pi1).interior_distance(&id.scale(I)) < 1e-11);
            assert!(q2.commutator(&pi2).interior_distance(&id.scale(I)) < 1e-11);
            assert!(q1.commutator(&pi2).interior_distance(&id.scale(re(0.0))) < 1e-11);
        }
    }

    #[test]
    fn star_is_an_involutive_antihomomorphism() {
        let (b, p) = setup(6);
        let ops = build_mode_operators(&b, &p, Scheme::IndefiniteMetric).unwrap();
        let eta = MetricOperator::new(MetricKind::Eta, &b);
        assert!(eta.is_involutive());
        let a = ops.x1.mul(&ops.p2).add(&ops.a1);
        assert_eq!(star_conjugate(&star_conjugate(&a, &eta), &eta), a);
        let lhs = star_conjugate(&a.mul(&ops.x2), &eta);
        let rhs = star_conjugate(&ops.x2, &eta).mul(&star_conjugate(&a, &eta));
        assert!(lhs.distance(&rhs) < 1e-13);
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                let ei = nalgebra::DVector::from_fn(b.dim(), |k, _| re((k == i) as u8 as f64));
                let ej = nalgebra::DVector::from_fn(b.dim(), |k, _| re((k == j) as u8 as f64));
                let expect = if i == j { if b.state(i).0 % 2 == 0 { 1.0 } else { -1.0 } } else { 0.0 };
                assert_eq!(eta.inner(&ei, &ej), re(expect));
            }
        }
    }

    #[test]
    fn positive_scheme_spectrum() {
        let (b, p) = setup(20);
        let r = positive_hamiltonian_check(&p, &b).unwrap();
        assert!(r.spectrum_rel_err < 1e-10, "{r:?}");
        assert!(((r.lowest_eigenvalue - r.expected_ground) / r.expected_ground).abs() < 1e-10);
        assert!(r.plus_parity_defect < 1e-14 && r.star_hermitian_defect < 1e-14 && r.primed_hermitian_defect < 1e-14);
        assert!(r.primed_vs_normal < 1e-14, "{}", r.primed_vs_normal);
        assert!(r.ostrogradski_vs_normal < 1e-12, "{}", r.ostrogradski_vs_normal);
        assert!(r.ccr_defect < 1e-12);
        assert!(r.physical_norms_positive);
    }

    #[test]
    fn indefinite_energy_spectrum() {
        let (b, p) = setup(16);
        assert!(indefinite_energy_check(&p, &b).unwrap() < 1e-10);
    }

    #[test]
    fn adjoint_coefficient_scaling() {
        let b = Arc::new(FockBasis::new(4));
        let p = OscillatorParams::natural(0.2).unwrap();
        let eps = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
        let rep = adjoint_blowup_scan(&eps, &b, &p).unwrap();
        for r in &rep.rows {
            assert!(r.fit_residual < 1e-10, "{r:?}");
            assert!(((r.leading * r.epsilon) - 1.0).abs() < 1e-8, "{r:?}");
            assert!(r.subleading * r.epsilon < 1e-8);
            assert_eq!(r.involution_defect, 0.0);
        }
        assert!((rep.slope + 1.0).abs() < 1e-6, "{}", rep.slope);
    }
}
