//! Energy formulas of both quantization schemes, the continuous spectrum of
//! the equal-frequency point, and the constrained limit schedule linking them.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{params_from_epsilon, OscillatorParams};
use crate::table::ScanTable;

/// Occupation numbers `(n₁, n₂)` of the two decoupled modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub n1: u64,
    pub n2: u64,
}

impl QuantumNumbers {
    pub fn new(n1: u64, n2: u64) -> Self {
        QuantumNumbers { n1, n2 }
    }
}

/// Continuous-spectrum label: angular number `n` and radial momentum `k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateLabel {
    pub n: i64,
    pub k: f64,
}

impl DegenerateLabel {
    /// Every integer `n` is accepted; `J₋ₙ` is as well defined as `Jₙ`.
    pub fn new(n: i64, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::NonPositiveK(k));
        }
        Ok(DegenerateLabel { n, k })
    }
}

/// `−ħω₁(n₁+½) + ħω₂(n₂+½)`; unbounded below in `n₁`.
pub fn energy_indefinite(qn: QuantumNumbers, params: &OscillatorParams) -> Result<f64> {
    let f = params.require_real_distinct()?;
    let h = params.hbar;
    Ok(-h * f.omega1 * (qn.n1 as f64 + 0.5) + h * f.omega2 * (qn.n2 as f64 + 0.5))
}

/// `ħω₁(n₁+½) + ħω₂(n₂+½)` of the indefinite-metric scheme.
pub fn energy_positive(qn: QuantumNumbers, params: &OscillatorParams) -> Result<f64> {
    let f = params.require_real_distinct()?;
    let h = params.hbar;
    Ok(h * f.omega1 * (qn.n1 as f64 + 0.5) + h * f.omega2 * (qn.n2 as f64 + 0.5))
}

/// `ωħ(√2 n − mωħk²/2)` at the equal-frequency point.
pub fn energy_degenerate(label: DegenerateLabel, params: &OscillatorParams) -> Result<f64> {
    if !(label.k > 0.0) {
        return Err(Error::NonPositiveK(label.k));
    }
    params.require_degenerate()?;
    Ok(continuous_energy(label.n, label.k, params))
}

fn continuous_energy(n: i64, k: f64, p: &OscillatorParams) -> f64 {
    p.omega * p.hbar * (SQRT_2 * n as f64 - 0.5 * p.m * p.omega * p.hbar * k * k)
}

/// First-order split of the spectrum on the ε-family:
/// `(√2ωħ(n₂−n₁), −(√2/2)ωħε(n₁+n₂+1))`.
pub fn energy_split(qn: QuantumNumbers, params: &OscillatorParams) -> Result<(f64, f64)> {
    params.require_real_distinct()?;
    let eps = params.epsilon().ok_or(Error::SingularTransformation)?;
    Ok(split_at_epsilon(qn, params, eps))
}

/// [`energy_split`] with `ε` supplied directly; recovering `ε` from `λ`
/// costs a relative `~10⁻¹⁶/ε²`.
pub fn split_at_epsilon(qn: QuantumNumbers, params: &OscillatorParams, eps: f64) -> (f64, f64) {
    let wh = params.omega * params.hbar;
    let disc = SQRT_2 * wh * (qn.n2 as f64 - qn.n1 as f64);
    let eps_part = -0.5 * SQRT_2 * wh * eps * (qn.n1 + qn.n2 + 1) as f64;
    (disc, eps_part)
}

/// What the spectrum would tend to if `ε → 0` at fixed labels: `√2ωħ(n₂−n₁)`.
pub fn energy_naive_limit(qn: QuantumNumbers, params: &OscillatorParams) -> f64 {
    SQRT_2 * params.omega * params.hbar * (qn.n2 as f64 - qn.n1 as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitStep {
    pub n1: u64,
    pub n2: u64,
    pub epsilon: f64,
}

impl LimitStep {
    pub fn labels(&self) -> QuantumNumbers {
        QuantumNumbers::new(self.n1, self.n2)
    }

    pub fn total(&self) -> u64 {
        self.n1 + self.n2
    }
}

/// Sequence of `(n₁, n₂, ε)` with `n₂ − n₁ = n` and `ε(n₁+n₂)` held at
/// `mωħk²/√2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSchedule {
    pub n: i64,
    pub k: f64,
    pub steps: Vec<LimitStep>,
}

impl LimitSchedule {
    /// The held product `ε(n₁+n₂)`.
    pub fn target_product(&self, params: &OscillatorParams) -> f64 {
        params.m * params.omega * params.hbar * self.k * self.k / SQRT_2
    }

    /// Checks `n₂ − n₁ = n` and `|ε(n₁+n₂) − mωħk²/√2| ≤ ε` on every step.
    pub fn validate(&self, params: &OscillatorParams) -> Result<()> {
        let target = self.target_product(params);
        for s in &self.steps {
            if s.n2 as i64 - s.n1 as i64 != self.n {
                return Err(Error::InvalidParameter(format!("step ({}, {}) does not have n2-n1={}", s.n1, s.n2, self.n)));
            }
            if !(s.epsilon > 0.0 && s.epsilon < 1.0) {
                return Err(Error::EpsilonOutOfRange(s.epsilon));
            }
            if (s.epsilon * s.total() as f64 - target).abs() > s.epsilon {
                return Err(Error::InvalidParameter(format!("step ({}, {}) breaks eps*(n1+n2)", s.n1, s.n2)));
            }
        }
        Ok(())
    }
}

/// Geometric schedule with `n₁ + n₂` running from `total_start` to `total_end`.
///
/// Labels are integers, so `n₁ = round((S − n)/2)` and `ε` is then computed
/// from the realised `n₁ + n₂`; repeated totals after rounding are dropped.
pub fn limit_schedule_between(
    n: i64,
    k: f64,
    params: &OscillatorParams,
    step_count: usize,
    total_start: f64,
    total_end: f64,
) -> Result<LimitSchedule> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::NonPositiveK(k));
    }
    if step_count == 0 {
        return Err(Error::InvalidParameter("schedule needs at least one step".into()));
    }
    if !(total_start >= 1.0 && total_end >= total_start) {
        return Err(Error::InvalidParameter(format!("bad total range [{total_start}, {total_end}]")));
    }
    let target = params.m * params.omega * params.hbar * k * k / SQRT_2;
    let mut steps: Vec<LimitStep> = Vec::with_capacity(step_count);
    for i in 0..step_count {
        let t = if step_count == 1 { 0.0 } else { i as f64 / (step_count - 1) as f64 };
        let s = total_start * (total_end / total_start).powf(t);
        let min_n1 = if n < 0 { -n } else { 0 };
        let n1 = (((s - n as f64) / 2.0).round() as i64).max(min_n1);
        let n2 = n1 + n;
        let total = (n1 + n2) as f64;
        if total <= 0.0 {
            continue;
        }
        let epsilon = target / total;
        if !(epsilon < 1.0) {
            return Err(Error::EpsilonOutOfRange(epsilon));
        }
        let step = LimitStep { n1: n1 as u64, n2: n2 as u64, epsilon };
        if steps.last().is_none_or(|last| last.total() != step.total()) {
            steps.push(step);
        }
    }
    let sched = LimitSchedule { n, k, steps };
    sched.validate(params)?;
    Ok(sched)
}

/// Default schedule: totals from 20 to 2000.
pub fn limit_schedule(n: i64, k: f64, params: &OscillatorParams, step_count: usize) -> Result<LimitSchedule> {
    limit_schedule_between(n, k, params, step_count, 20.0, 2000.0)
}

/// One line of the schedule-energy table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleEnergy {
    pub step: LimitStep,
    pub e_disc: f64,
    pub e_eps: f64,
    pub e_total: f64,
    /// Unexpanded two-frequency energy at the step's ε.
    pub e_exact: f64,
    pub e_target: f64,
    pub abs_err: f64,
}

/// Evaluates the split energy, the exact energy and the continuous target
/// along a schedule. `params` supplies `m`, `ω`, `ħ`; its `λ` is ignored.
pub fn schedule_energies(sched: &LimitSchedule, params: &OscillatorParams) -> Result<Vec<ScheduleEnergy>> {
    let target = continuous_energy(sched.n, sched.k, params);
    sched
        .steps
        .iter()
        .map(|s| {
            let p = params_from_epsilon(params.m, params.omega, params.hbar, s.epsilon)?;
            let (e_disc, e_eps) = split_at_epsilon(s.labels(), &p, s.epsilon);
            let e_total = e_disc + e_eps;
            let e_exact = energy_indefinite(s.labels(), &p)?;
            Ok(ScheduleEnergy { step: *s, e_disc, e_eps, e_total, e_exact, e_target: target, abs_err: (e_total - target).abs() })
        })
        .collect()
}

pub fn schedule_table(rows: &[ScheduleEnergy]) -> ScanTable {
    let mut t = ScanTable::new(&["n1", "n2", "epsilon", "E_disc", "E_eps", "E_total", "E_target", "abs_err"]);
    for r in rows {
        t.push(vec![
            r.step.n1.into(),
            r.step.n2.into(),
            r.step.epsilon.into(),
            r.e_disc.into(),
            r.e_eps.into(),
            r.e_total.into(),
            r.e_target.into(),
            r.abs_err.into(),
        ]);
    }
    t
}

/// Label pairs on the `(0..=nmax)²` grid whose indefinite energies agree within `tol`.
pub fn energy_collisions(
    params: &OscillatorParams,
    nmax: u64,
    tol: f64,
) -> Result<Vec<(QuantumNumbers, QuantumNumbers)>> {
    let mut levels = Vec::with_capacity(((nmax + 1) * (nmax + 1)) as usize);
    for n1 in 0..=nmax {
        for n2 in 0..=nmax {
            let qn = QuantumNumbers::new(n1, n2);
            levels.push((energy_indefinite(qn, params)?, qn));
        }
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    for i in 0..levels.len() {
        for j in i + 1..levels.len() {
            if levels[j].0 - levels[i].0 > tol {
                break;
            }
            out.push((levels[i].1, levels[j].1));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::lambda_for_ratio;

    fn p015() -> OscillatorParams {
        OscillatorParams::natural(0.15).unwrap()
    }

    #[test]
    fn ground_energies_at_lambda_015() {
        let e = energy_indefinite(QuantumNumbers::new(0, 0), &p015()).unwrap();
        let ep = energy_positive(QuantumNumbers::new(0, 0), &p015()).unwrap();
        assert!((e + 0.612921).abs() < 1e-6, "{e}");
        assert!((ep - 1.719785).abs() < 1e-6, "{ep}");
    }

    #[test]
    fn indefinite_is_unbounded_below() {
        let mut last = f64::INFINITY;
        for n in [1u64, 10, 100, 1000, 10000] {
            let e = energy_indefinite(QuantumNumbers::new(n, 0), &p015()).unwrap();
            assert!(e < last);
            last = e;
        }
        assert!(last < -2e4);
    }

    #[test]
    fn positive_scheme_grid() {
        let p = p015();
        let w1 = p.require_real_distinct().unwrap().omega1;
        for n1 in 0..50 {
            for n2 in 0..50 {
                let qn = QuantumNumbers::new(n1, n2);
                let ep = energy_positive(qn, &p).unwrap();
                let ei = energy_indefinite(qn, &p).unwrap();
                assert!(ep > 0.0);
                let gap = 2.0 * w1 * (n1 as f64 + 0.5);
                assert!(((ep - ei) - gap).abs() <= 1e-12 * gap);
            }
        }
    }

    #[test]
    fn regime_mismatch_is_reported() {
        let deg = OscillatorParams::natural(0.25).unwrap();
        assert_eq!(energy_indefinite(QuantumNumbers::new(0, 0), &deg), Err(Error::SingularTransformation));
        let p = p015();
        assert!(energy_degenerate(DegenerateLabel { n: 0, k: 1.0 }, &p).is_err());
    }

    #[test]
    fn degenerate_energies() {
        let deg = OscillatorParams::natural(0.25).unwrap();
        let e = energy_degenerate(DegenerateLabel::new(2, 1.0).unwrap(), &deg).unwrap();
        assert!((e - 2.328427).abs() < 1e-6);
        let tiny = energy_degenerate(DegenerateLabel::new(0, 1e-9).unwrap(), &deg).unwrap();
        assert!(tiny.abs() < 1e-15);
        assert_eq!(DegenerateLabel::new(1, 0.0), Err(Error::NonPositiveK(0.0)));
        let a = energy_degenerate(DegenerateLabel::new(3, 0.5).unwrap(), &deg).unwrap();
        let b = energy_degenerate(DegenerateLabel::new(3, 2.0).unwrap(), &deg).unwrap();
        assert!(((a - b) - 0.5 * (4.0 - 0.25)).abs() < 1e-12);
        assert!(energy_degenerate(DegenerateLabel::new(-4, 1.0).unwrap(), &deg).is_ok());
    }

    #[test]
    fn split_reproduces_spectrum_to_second_order() {
        let qn = QuantumNumbers::new(3, 5);
        let p = params_from_epsilon(1.0, 1.0, 1.0, 0.01).unwrap();
        let (disc, _) = energy_split(qn, &p).unwrap();
        assert!((disc - 2.0 * SQRT_2).abs() < 1e-14);

        let eps = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
        let errs: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let p = params_from_epsilon(1.0, 1.0, 1.0, e).unwrap();
                let (d, x) = energy_split(qn, &p).unwrap();
                let exact = energy_indefinite(qn, &p).unwrap();
                ((d + x) - exact).abs() / exact.abs()
            })
            .collect();
        let slope = crate::params::loglog_slope(&eps, &errs);
        assert!((slope - 2.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn naive_limit_at_fixed_labels() {
        let qn = QuantumNumbers::new(4, 6);
        let naive = energy_naive_limit(qn, &OscillatorParams::natural(0.2).unwrap());
        let p = params_from_epsilon(1.0, 1.0, 1.0, 1e-6).unwrap();
        let e = energy_indefinite(qn, &p).unwrap();
        assert!((e - naive).abs() < 1e-5);
    }

    #[test]
    fn schedule_for_n0_k1() {
        let base = OscillatorParams::natural(0.25).unwrap();
        let s = limit_schedule_between(0, 1.0, &base, 5, 20.0, 2000.0).unwrap();
        for st in &s.steps {
            assert_eq!(st.n1, st.n2);
            let expected = 1.0 / (2.0 * SQRT_2 * st.n1 as f64);
            assert!((st.epsilon - expected).abs() < 1e-15);
        }
        let rows = schedule_energies(&s, &base).unwrap();
        let target = -0.5;
        let mut last = f64::INFINITY;
        for r in &rows {
            assert!((r.e_target - target).abs() < 1e-15);
            assert!(r.abs_err <= SQRT_2 * r.step.epsilon / 2.0 * (1.0 + 1e-9), "{r:?}");
            let exact_err = (r.e_exact - target).abs();
            assert!(exact_err < last, "{exact_err} {last} {:?}", r);
            last = exact_err;
        }
    }

    #[test]
    fn schedule_and_naive_limit_differ_by_k2_term() {
        let base = OscillatorParams::natural(0.25).unwrap();
        let k = 1.5;
        let s = limit_schedule_between(2, k, &base, 3, 1e5, 1e6).unwrap();
        let last = schedule_energies(&s, &base).unwrap().pop().unwrap();
        let naive = energy_naive_limit(last.step.labels(), &base);
        assert!(((last.e_exact - naive) + 0.5 * k * k).abs() < 1e-4);
    }

    #[test]
    fn negative_n_schedule() {
        let base = OscillatorParams::natural(0.25).unwrap();
        let s = limit_schedule(-3, 1.0, &base, 6).unwrap();
        assert!(s.steps.iter().all(|st| st.n1 == st.n2 + 3));
    }

    #[test]
    fn schedule_csv_columns() {
        let base = OscillatorParams::natural(0.25).unwrap();
        let s = limit_schedule(1, 1.0, &base, 3).unwrap();
        let t = schedule_table(&schedule_energies(&s, &base).unwrap());
        assert!(t.to_csv_string().starts_with("n1,n2,epsilon,E_disc,E_eps,E_total,E_target,abs_err\n"));
        assert_eq!(t.rows.len(), 3);
    }

    #[test]
    fn irrational_ratio_has_no_collisions() {
        assert!(energy_collisions(&p015(), 50, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn ratio_two_has_collisions() {
        let p = OscillatorParams::natural(lambda_for_ratio(2.0, 1.0).unwrap()).unwrap();
        let c = energy_collisions(&p, 50, 1e-9).unwrap();
        assert!(c.iter().any(|(a, b)| {
            let (lo, hi) = if a.n1 < b.n1 { (a, b) } else { (b, a) };
            hi.n1 == lo.n1 + 1 && hi.n2 == lo.n2 + 2
        }));
    }
}
