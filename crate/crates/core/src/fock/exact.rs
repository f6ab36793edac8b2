//! Exact operators on the unnormalized monomial basis
//! `e(k₁,k₂) = (A₁⁺)^{k₁}(A₂⁺)^{k₂}|0,0⟩`, where every ladder entry is an integer.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::basis::FockBasis;

/// Ladder operators of the degenerate algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Lower1,
    Lower2,
    Raise1,
    Raise2,
}

impl Ladder {
    /// Action on a monomial: lowering brings down the exponent, raising
    /// appends a factor with coefficient one.
    pub fn act(self, (k1, k2): (u64, u64)) -> Option<(u64, (u64, u64))> {
        match self {
            Ladder::Lower1 => (k1 > 0).then(|| (k1, (k1 - 1, k2))),
            Ladder::Lower2 => (k2 > 0).then(|| (k2, (k1, k2 - 1))),
            Ladder::Raise1 => Some((1, (k1 + 1, k2))),
            Ladder::Raise2 => Some((1, (k1, k2 + 1))),
        }
    }
}

/// `k₁! k₂!`, the squared norm of a monomial under the positive product.
pub fn monomial_gram(k1: u64, k2: u64) -> BigInt {
    factorial(k1) * factorial(k2)
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

type Column = BTreeMap<usize, BigRational>;

/// Column-sparse exact operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactOperator {
    basis: Arc<FockBasis>,
    columns: Vec<Column>,
}

impl ExactOperator {
    pub fn zero(basis: Arc<FockBasis>) -> Self {
        let columns = vec![Column::new(); basis.dim()];
        ExactOperator { basis, columns }
    }

    pub fn identity(basis: Arc<FockBasis>) -> Self {
        let columns = (0..basis.dim()).map(|j| Column::from([(j, BigRational::one())])).collect();
        ExactOperator { basis, columns }
    }

    /// Ladder operator truncated at the basis cutoff.
    pub fn ladder(basis: Arc<FockBasis>, op: Ladder) -> Self {
        let mut out = Self::zero(basis.clone());
        for j in 0..basis.dim() {
            if let Some((c, (a, b))) = op.act(basis.state(j)) {
                if let Some(i) = basis.index_of(a, b) {
                    out.columns[j].insert(i, BigRational::from_integer(c.into()));
                }
            }
        }
        out
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn entry(&self, i: usize, j: usize) -> BigRational {
        self.columns[j].get(&i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn column(&self, j: usize) -> &BTreeMap<usize, BigRational> {
        &self.columns[j]
    }

    fn accumulate(col: &mut Column, i: usize, v: BigRational) {
        let e = col.entry(i).or_insert_with(BigRational::zero);
        *e += v;
        if e.is_zero() {
            col.remove(&i);
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let columns = other
            .columns
            .iter()
            .map(|bcol| {
                let mut out = Column::new();
                for (k, bkj) in bcol {
                    for (i, aik) in &self.columns[*k] {
                        Self::accumulate(&mut out, *i, aik * bkj);
                    }
                }
                out
            })
            .collect();
        ExactOperator { basis: self.basis.clone(), columns }
    }

    fn combine(&self, other: &Self, sign: &BigRational) -> Self {
        let mut out = self.clone();
        for (j, col) in other.columns.iter().enumerate() {
            for (i, v) in col {
                Self::accumulate(&mut out.columns[j], *i, v * sign);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, &BigRational::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, &-BigRational::one())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.basis.clone());
        }
        let columns = self.columns.iter().map(|col| col.iter().map(|(i, v)| (*i, v * c)).collect()).collect();
        ExactOperator { basis: self.basis.clone(), columns }
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&BigRational::from_integer(c.into()))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Adjoint for the positive product with Gram matrix `diag(k₁!k₂!)`:
    /// `M⁺ᵢⱼ = Mⱼᵢ Gⱼ / Gᵢ`.
    pub fn adjoint(&self) -> Self {
        let gram: Vec<BigInt> = self.basis.states().iter().map(|&(a, b)| monomial_gram(a, b)).collect();
        let mut out = Self::zero(self.basis.clone());
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col {
                // Mᵢⱼ contributes to M⁺ at (j, i).
                let w = v * BigRational::new(gram[*i].clone(), gram[j].clone());
                out.columns[*i].insert(j, w);
            }
        }
        out
    }

    /// `τ M⁺ τ` with `τ = (−1)^{k₂}`.
    pub fn star(&self) -> Self {
        let mut out = self.adjoint();
        for (j, col) in out.columns.iter_mut().enumerate() {
            let sj = self.basis.state(j).1 % 2;
            for (i, v) in col.iter_mut() {
                if (self.basis.state(*i).1 % 2) != sj {
                    *v = -v.clone();
                }
            }
        }
        out
    }

    /// Exact equality on the columns of interior states.
    pub fn eq_on_interior(&self, other: &Self) -> bool {
        self.basis.interior().all(|j| self.columns[j] == other.columns[j])
    }

    /// Exact equality on all columns.
    pub fn eq_exact(&self, other: &Self) -> bool {
        self.columns == other.columns
    }

    /// Largest `|Mᵢⱼ|`.
    pub fn max_abs(&self) -> BigRational {
        self.columns.iter().flat_map(|c| c.values()).map(|v| v.abs()).max().unwrap_or_else(BigRational::zero)
    }

    /// Whether any entry connects states of different total occupation.
    pub fn crosses_shells(&self) -> bool {
        self.columns
            .iter()
            .enumerate()
            .any(|(j, col)| col.keys().any(|&i| self.basis.total(i) != self.basis.total(j)))
    }
}

/// Degenerate-limit operators. `â = A₁+A₂`, `b̂ = A₁−A₂`; the physical
/// `a, b` are `√(μ/2)` times these, so every quadratic expression in `a, b`
/// is `μ/2` times the same expression in `â, b̂`.
#[derive(Debug, Clone)]
pub struct DegenerateAlgebra {
    pub mu: BigRational,
    pub a1: ExactOperator,
    pub a2: ExactOperator,
    pub a1_star: ExactOperator,
    pub a2_star: ExactOperator,
    pub a_hat: ExactOperator,
    pub b_hat: ExactOperator,
    /// `H/ω` built from `A₁⁺, A₂⁺` with constant 0.
    pub hamiltonian: ExactOperator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegenerateAlgebraReport {
    pub mu: String,
    pub cutoff: u64,
    pub checks: Vec<IdentityCheck>,
}

impl DegenerateAlgebraReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.holds).map(|c| c.name.as_str()).collect()
    }
}

pub fn degenerate_algebra(mu: BigRational, basis: &Arc<FockBasis>) -> DegenerateAlgebra {
    let a1 = ExactOperator::ladder(basis.clone(), Ladder::Lower1);
    let a2 = ExactOperator::ladder(basis.clone(), Ladder::Lower2);
    let r1 = ExactOperator::ladder(basis.clone(), Ladder::Raise1);
    let r2 = ExactOperator::ladder(basis.clone(), Ladder::Raise2);
    let a1_star = a1.star();
    let a2_star = a2.star();
    let a_hat = a1.add(&a2);
    let b_hat = a1.sub(&a2);
    let hamiltonian = r1.mul(&a1).scale_int(2).sub(&r1.mul(&a2)).add(&r2.mul(&a1));
    DegenerateAlgebra { mu, a1, a2, a1_star, a2_star, a_hat, b_hat, hamiltonian }
}

impl DegenerateAlgebra {
    pub fn basis(&self) -> &Arc<FockBasis> {
        self.a1.basis()
    }

    /// `H/ω = (1/μ)(μ/2)(2b̂⋆b̂ + â⋆b̂ + b̂⋆â)`.
    pub fn hamiltonian_ab(&self) -> ExactOperator {
        let half_mu = &self.mu / BigRational::from_integer(2.into());
        let (a, b) = (&self.a_hat, &self.b_hat);
        let (a_s, b_s) = (a.star(), b.star());
        b_s.mul(b).scale_int(2).add(&a_s.mul(b)).add(&b_s.mul(a)).scale(&(half_mu / &self.mu))
    }

    /// `H/ω = 2A₁⋆A₁ − A₁⋆A₂ − A₂⋆A₁`.
    pub fn hamiltonian_star(&self) -> ExactOperator {
        self.a1_star.mul(&self.a1).scale_int(2).sub(&self.a1_star.mul(&self.a2)).sub(&self.a2_star.mul(&self.a1))
    }

    pub fn number_operator(&self) -> ExactOperator {
        let b = self.basis().clone();
        let r1 = ExactOperator::ladder(b.clone(), Ladder::Raise1);
        let r2 = ExactOperator::ladder(b, Ladder::Raise2);
        r1.mul(&self.a1).add(&r2.mul(&self.a2))
    }

    pub fn report(&self) -> DegenerateAlgebraReport {
        let basis = self.basis().clone();
        let id = ExactOperator::identity(basis.clone());
        let zero = ExactOperator::zero(basis.clone());
        let half_mu = &self.mu / BigRational::from_integer(2.into());
        let mu_id = id.scale(&self.mu);
        let (a, b) = (&self.a_hat, &self.b_hat);
        let (a_s, b_s) = (a.star(), b.star());
        // Physical commutators are (μ/2) times the hatted ones.
        let phys = |x: &ExactOperator, y: &ExactOperator| x.commutator(y).scale(&half_mu);
        let r1 = ExactOperator::ladder(basis.clone(), Ladder::Raise1);
        let r2 = ExactOperator::ladder(basis.clone(), Ladder::Raise2);
        let h_ab = self.hamiltonian_ab();
        let h_star = self.hamiltonian_star();
        let mut checks = Vec::new();
        let mut push = |name: &str, holds: bool| checks.push(IdentityCheck { name: name.to_string(), holds });

        push("[a,a*]=0", phys(a, &a_s).eq_on_interior(&zero));
        push("[b,b*]=0", phys(b, &b_s).eq_on_interior(&zero));
        push("[b,a*]=mu", phys(b, &a_s).eq_on_interior(&mu_id));
        push("[a,b*]=mu", phys(a, &b_s).eq_on_interior(&mu_id));
        push("[a,b]=0", phys(a, b).eq_on_interior(&zero));

        push("[A1,A2]=0", self.a1.commutator(&self.a2).eq_on_interior(&zero));
        push("[A1*,A2*]=0", self.a1_star.commutator(&self.a2_star).eq_on_interior(&zero));
        push("[A1,A2*]=0", self.a1.commutator(&self.a2_star).eq_on_interior(&zero));
        push("[A2,A1*]=0", self.a2.commutator(&self.a1_star).eq_on_interior(&zero));
        push("[A1,A1*]=1", self.a1.commutator(&self.a1_star).eq_on_interior(&id));
        push("[A2,A2*]=-1", self.a2.commutator(&self.a2_star).eq_on_interior(&id.scale_int(-1)));

        push("A1+=A1*", r1.eq_exact(&self.a1_star) && self.a1.adjoint().eq_exact(&r1));
        push("A2+=-A2*", r2.eq_exact(&self.a2_star.scale_int(-1)) && self.a2.adjoint().eq_exact(&r2));
        push("[A1,A1+]=1", self.a1.commutator(&r1).eq_on_interior(&id));
        push("[A2,A2+]=1", self.a2.commutator(&r2).eq_on_interior(&id));

        push("H(a,b)=H(A*)", h_ab.eq_on_interior(&h_star));
        push("H(A*)=H(A+)", h_star.eq_on_interior(&self.hamiltonian));
        push("H(a,b)=H(A+)", h_ab.eq_on_interior(&self.hamiltonian));
        push("[H,N]=0", self.hamiltonian.commutator(&self.number_operator()).eq_on_interior(&zero));
        let raise = r1.add(&r2);
        push("[H,A1++A2+]=A1++A2+", self.hamiltonian.commutator(&raise).eq_on_interior(&raise));
        DegenerateAlgebraReport { mu: self.mu.to_string(), cutoff: basis.cutoff(), checks }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn algebra_holds_for_two_mu_values() {
        let basis = Arc::new(FockBasis::new(12));
        for mu in [rat(1), rat(2), BigRational::new(3.into(), 7.into())] {
            let rep = degenerate_algebra(mu, &basis).report();
            assert!(rep.all_hold(), "{:?}", rep.failing());
        }
    }

    #[test]
    fn star_and_adjoint_are_involutions() {
        let basis = Arc::new(FockBasis::new(6));
        let alg = degenerate_algebra(rat(1), &basis);
        let m = alg.a1.mul(&alg.a2_star).add(&alg.hamiltonian);
        assert!(m.star().star().eq_exact(&m));
        assert!(m.adjoint().adjoint().eq_exact(&m));
        let lhs = alg.a1.mul(&alg.a2).star();
        let rhs = alg.a2.star().mul(&alg.a1.star());
        assert!(lhs.eq_exact(&rhs));
    }

    #[test]
    fn hamiltonian_is_shell_diagonal() {
        let basis = Arc::new(FockBasis::new(10));
        let alg = degenerate_algebra(rat(1), &basis);
        assert!(!alg.hamiltonian.crosses_shells());
        // H/ω on |0,0⟩ is zero; on shell 1 it is [[0, 1], [-1, 2]] in (e₀₁, e₁₀).
        let h = &alg.hamiltonian;
        assert!(h.column(basis.index_of(0, 0).unwrap()).is_empty());
        let (i01, i10) = (basis.index_of(0, 1).unwrap(), basis.index_of(1, 0).unwrap());
        assert_eq!(h.entry(i01, i01), rat(0));
        assert_eq!(h.entry(i10, i01), rat(-1));
        assert_eq!(h.entry(i01, i10), rat(1));
        assert_eq!(h.entry(i10, i10), rat(2));
    }

    #[test]
    fn flipped_sign_is_detected() {
        let basis = Arc::new(FockBasis::new(8));
        let mut alg = degenerate_algebra(rat(1), &basis);
        alg.a2_star = alg.a2_star.scale_int(-1);
        let rep = alg.report();
        assert!(rep.failing().contains(&"[A2,A2*]=-1"));
    }
}
