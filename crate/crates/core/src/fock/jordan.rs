//! Exact Jordan structure of the degenerate Hamiltonian on fixed-occupation
//! shells, its eigenvectors and their indefinite norms.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::basis::FockBasis;
use super::exact::{degenerate_algebra, factorial, monomial_gram, Ladder};
use crate::error::{Error, Result};

pub const MAX_SHELL: u64 = 64;

fn check_shell(n: u64) -> Result<()> {
    if n > MAX_SHELL {
        return Err(Error::OutOfRange { what: "shell occupation", value: n as f64, max: MAX_SHELL as f64 });
    }
    Ok(())
}

fn ser_bigint<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_bigints<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn ser_rational<S: Serializer>(v: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

type IntMatrix = Vec<Vec<BigInt>>;

/// `H/ω` on shell `n` in the monomial basis `e_k = (A₁⁺)^k (A₂⁺)^{n−k}|0,0⟩`,
/// built from the ladder actions of `2A₁⁺A₁ − A₁⁺A₂ + A₂⁺A₁`. Column `k` is
/// the image of `e_k`.
pub fn shell_hamiltonian(n: u64) -> IntMatrix {
    let d = n as usize + 1;
    let mut h = vec![vec![BigInt::zero(); d]; d];
    let terms: [(i64, Ladder, Ladder); 3] =
        [(2, Ladder::Raise1, Ladder::Lower1), (-1, Ladder::Raise1, Ladder::Lower2), (1, Ladder::Raise2, Ladder::Lower1)];
    for k in 0..=n {
        for (c, outer, inner) in terms {
            let Some((c1, s1)) = inner.act((k, n - k)) else { continue };
            let Some((c2, (k1, _))) = outer.act(s1) else { continue };
            h[k1 as usize][k as usize] += BigInt::from(c) * c1 * c2;
        }
    }
    h
}

/// `H − n` on shell `n`.
pub fn shell_shifted(n: u64) -> IntMatrix {
    let mut m = shell_hamiltonian(n);
    for (k, row) in m.iter_mut().enumerate() {
        row[k] -= n;
    }
    m
}

fn apply(m: &IntMatrix, v: &[BigInt]) -> Vec<BigInt> {
    m.iter().map(|row| row.iter().zip(v).filter(|(a, _)| !a.is_zero()).map(|(a, b)| a * b).sum()).collect()
}

fn primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
    if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in v.iter_mut() {
            *x = -x.clone();
        }
    }
    v
}

/// Integer row echelon basis, kept fraction-free: every reduction step is
/// `b_p·v − v_p·b` followed by removal of the content.
#[derive(Debug, Default)]
struct Echelon {
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl Echelon {
    fn insert(&mut self, mut v: Vec<BigInt>) -> bool {
        for (p, b) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let (bp, vp) = (b[*p].clone(), v[*p].clone());
            for (x, y) in v.iter_mut().zip(b) {
                *x = &bp * &*x - &vp * y;
            }
            v = primitive(v);
        }
        match v.iter().position(|x| !x.is_zero()) {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn vectors(&self) -> impl Iterator<Item = &Vec<BigInt>> {
        self.rows.iter().map(|(_, v)| v)
    }
}

/// `rank(Mʲ)` for `j = 0, 1, …` until the rank reaches zero or stops
/// falling, computed by pushing a basis of `im Mʲ⁻¹` through `M`.
pub fn rank_sequence(m: &IntMatrix) -> Vec<usize> {
    let d = m.len();
    let mut image = Echelon::default();
    for k in 0..d {
        let mut e = vec![BigInt::zero(); d];
        e[k] = BigInt::one();
        image.insert(e);
    }
    let mut ranks = vec![image.rank()];
    while image.rank() > 0 {
        let mut next = Echelon::default();
        for v in image.vectors() {
            next.insert(apply(m, v));
        }
        let stalled = next.rank() == image.rank();
        ranks.push(next.rank());
        image = next;
        if stalled {
            break;
        }
    }
    ranks
}

/// Kernel of an integer matrix by reduced row echelon form over the
/// rationals; each basis vector is returned as a primitive integer vector.
pub fn kernel(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut a: Vec<Vec<BigRational>> =
        m.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[i][f].clone();
            }
            let lcm = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
            primitive(v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect())
        })
        .collect()
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `integer · √radicand` with square-free radicand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurdCoefficient {
    #[serde(serialize_with = "ser_bigint")]
    pub integer: BigInt,
    #[serde(serialize_with = "ser_bigint")]
    pub radicand: BigInt,
}

impl SurdCoefficient {
    /// `integer² · radicand`.
    pub fn square(&self) -> BigInt {
        &self.integer * &self.integer * &self.radicand
    }
}

fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

fn legendre(n: u64, p: u64) -> u64 {
    let mut e = 0;
    let mut q = p;
    while q <= n {
        e += n / q;
        q *= p;
    }
    e
}

/// `c · √(a! b!)` split into integer and square-free parts.
pub fn surd_times_sqrt_factorials(c: BigInt, a: u64, b: u64) -> SurdCoefficient {
    let mut integer = c;
    let mut radicand = BigInt::one();
    for p in primes_up_to(a.max(b)) {
        let e = legendre(a, p) + legendre(b, p);
        integer *= BigInt::from(p).pow((e / 2) as u32);
        if e % 2 == 1 {
            radicand *= p;
        }
    }
    SurdCoefficient { integer, radicand }
}

/// `(A₁⁺+A₂⁺)ⁿ|0,0⟩` in the normalized basis `|k, n−k⟩`, indexed by `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainEigenvector {
    pub n: u64,
    /// Coefficients on the monomials `e_k`.
    #[serde(serialize_with = "ser_bigints")]
    pub monomial: Vec<BigInt>,
    /// `binom(n,k) √(k!(n−k)!)`.
    pub normalized: Vec<SurdCoefficient>,
    /// `H|n⟩ = n|n⟩` holds exactly.
    pub is_eigenvector: bool,
}

pub fn chain_eigenvector(n: u64) -> ChainEigenvector {
    // Expand the power by repeated application of the raising sum.
    let mut v = vec![BigInt::one()];
    for step in 0..n {
        let mut w = vec![BigInt::zero(); step as usize + 2];
        for (k, c) in v.iter().enumerate() {
            for op in [Ladder::Raise1, Ladder::Raise2] {
                let (f, (k1, _)) = op.act((k as u64, step - k as u64)).expect("raising never fails");
                w[k1 as usize] += c * f;
            }
        }
        v = w;
    }
    let normalized = v.iter().enumerate().map(|(k, c)| surd_times_sqrt_factorials(c.clone(), k as u64, n - k as u64)).collect();
    let hv = apply(&shell_hamiltonian(n), &v);
    let is_eigenvector = hv.iter().zip(&v).all(|(a, b)| *a == b * n);
    ChainEigenvector { n, monomial: v, normalized, is_eigenvector }
}

/// `⟨n|n⟩ = Σ_k binom(n,k)² k!(n−k)! (−1)^{n−k}`.
pub fn zero_norm(n: u64) -> Result<BigInt> {
    check_shell(n)?;
    Ok((0..=n)
        .map(|k| {
            let t = binomial(n, k).pow(2) * factorial(k) * factorial(n - k);
            if (n - k) % 2 == 0 {
                t
            } else {
                -t
            }
        })
        .sum())
}

/// The same norm from the chain coefficients and the metric
/// `G·τ = diag(k!(n−k)!(−1)^{n−k})`.
pub fn metric_norm(chain: &ChainEigenvector) -> BigInt {
    let n = chain.n;
    chain
        .normalized
        .iter()
        .enumerate()
        .map(|(k, c)| if (n - k as u64) % 2 == 0 { c.square() } else { -c.square() })
        .sum()
}

/// Largest entry of `|[H, H⁺]|` on shell `n`, with `H⁺` the adjoint for the
/// Gram matrix `diag(k!(n−k)!)`.
pub fn normality_defect(n: u64) -> Result<BigRational> {
    check_shell(n)?;
    let h = shell_hamiltonian(n);
    let d = h.len();
    let g: Vec<BigInt> = (0..=n).map(|k| monomial_gram(k, n - k)).collect();
    let hr: Vec<Vec<BigRational>> = h.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
    let hp: Vec<Vec<BigRational>> =
        (0..d).map(|i| (0..d).map(|j| &hr[j][i] * BigRational::new(g[j].clone(), g[i].clone())).collect()).collect();
    let mul = |a: &Vec<Vec<BigRational>>, b: &Vec<Vec<BigRational>>| -> Vec<Vec<BigRational>> {
        (0..d).map(|i| (0..d).map(|j| (0..d).map(|k| &a[i][k] * &b[k][j]).sum()).collect()).collect()
    };
    let (ab, ba) = (mul(&hr, &hp), mul(&hp, &hr));
    Ok(ab.iter().zip(&ba).flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs())).max().unwrap_or_else(BigRational::zero))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JordanReport {
    pub n: u64,
    pub dimension: usize,
    /// `rank((H − n)^j)`, `j = 0, …, n+1`.
    pub rank_sequence: Vec<usize>,
    /// Smallest `j` with `(H − n)^j = 0`.
    pub nilpotency_index: Option<usize>,
    /// Primitive integer kernel vector on the monomials, when unique.
    #[serde(serialize_with = "ser_bigints")]
    pub eigenvector: Vec<BigInt>,
    pub kernel_dimension: usize,
    pub is_single_block: bool,
    /// Kernel agrees with the chain eigenvector up to scale.
    pub matches_chain: bool,
    pub chain: ChainEigenvector,
    #[serde(serialize_with = "ser_bigint")]
    pub zero_norm: BigInt,
    #[serde(serialize_with = "ser_bigint")]
    pub metric_norm: BigInt,
    #[serde(serialize_with = "ser_rational")]
    pub normality_defect: BigRational,
}

impl JordanReport {
    /// Every structural claim for this shell holds.
    pub fn holds(&self) -> bool {
        let norm_ok = if self.n == 0 { self.zero_norm.is_one() } else { self.zero_norm.is_zero() };
        let normal_ok = (self.n == 0) == self.normality_defect.is_zero();
        self.is_single_block
            && self.nilpotency_index == Some(self.n as usize + 1)
            && self.kernel_dimension == 1
            && self.matches_chain
            && self.chain.is_eigenvector
            && norm_ok
            && self.metric_norm == self.zero_norm
            && normal_ok
    }
}

pub fn jordan_analysis(n: u64) -> Result<JordanReport> {
    check_shell(n)?;
    let m = shell_shifted(n);
    let mut ranks = rank_sequence(&m);
    let d = n as usize + 1;
    let nilpotency_index = ranks.iter().position(|&r| r == 0);
    ranks.resize(d + 1, *ranks.last().expect("rank sequence is non-empty"));
    let expected: Vec<usize> = (0..=d).rev().collect();
    let is_single_block = ranks == expected;
    let ker = kernel(&m);
    let kernel_dimension = ker.len();
    let eigenvector = ker.into_iter().next().unwrap_or_default();
    let chain = chain_eigenvector(n);
    let matches_chain = kernel_dimension == 1 && primitive(chain.monomial.clone()) == eigenvector;
    let zero_norm = zero_norm(n)?;
    let metric_norm = metric_norm(&chain);
    let normality_defect = normality_defect(n)?;
    Ok(JordanReport {
        n,
        dimension: d,
        rank_sequence: ranks,
        nilpotency_index,
        eigenvector,
        kernel_dimension,
        is_single_block,
        matches_chain,
        chain,
        zero_norm,
        metric_norm,
        normality_defect,
    })
}

/// Shells `0..=max_n` analysed in parallel.
pub fn jordan_analysis_all(max_n: u64) -> Result<Vec<JordanReport>> {
    check_shell(max_n)?;
    (0..=max_n).into_par_iter().map(jordan_analysis).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShellIdentities {
    pub cutoff: u64,
    /// `[H, N] = 0` on interior columns.
    pub commutes_with_number: bool,
    /// `[H, A₁⁺+A₂⁺] = A₁⁺+A₂⁺` on interior columns.
    pub raising_relation: bool,
    /// No matrix entry of `H` joins different shells.
    pub shell_diagonal: bool,
}

/// Whole-space identities on a basis large enough that shells `≤ max_n`
/// are interior.
pub fn shell_identities(max_n: u64) -> Result<ShellIdentities> {
    check_shell(max_n)?;
    let basis = Arc::new(FockBasis::new(max_n + 2));
    let alg = degenerate_algebra(BigRational::one(), &basis);
    let zero = super::exact::ExactOperator::zero(basis.clone());
    let raise = super::exact::ExactOperator::ladder(basis.clone(), Ladder::Raise1)
        .add(&super::exact::ExactOperator::ladder(basis.clone(), Ladder::Raise2));
    Ok(ShellIdentities {
        cutoff: basis.cutoff(),
        commutes_with_number: alg.hamiltonian.commutator(&alg.number_operator()).eq_on_interior(&zero),
        raising_relation: alg.hamiltonian.commutator(&raise).eq_on_interior(&raise),
        shell_diagonal: !alg.hamiltonian.crosses_shells(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn shell_one_is_a_defective_pair() {
        let h = shell_hamiltonian(1);
        assert_eq!(h, vec![ints(&[0, 1]), ints(&[-1, 2])]);
        let r = jordan_analysis(1).unwrap();
        assert_eq!(r.rank_sequence, vec![2, 1, 0]);
        assert_eq!(r.kernel_dimension, 1);
        assert_eq!(r.eigenvector, ints(&[1, 1]));
        assert!(r.holds());
    }

    #[test]
    fn vacuum_shell() {
        let r = jordan_analysis(0).unwrap();
        assert_eq!(r.rank_sequence, vec![1, 0]);
        assert_eq!(r.zero_norm, BigInt::one());
        assert!(r.normality_defect.is_zero());
        assert!(r.holds());
    }

    #[test]
    fn shell_twenty() {
        let r = jordan_analysis(20).unwrap();
        assert_eq!(r.rank_sequence, (0..=21).rev().collect::<Vec<_>>());
        assert!(r.holds());
    }

    #[test]
    fn chain_coefficients() {
        let c = chain_eigenvector(1);
        assert_eq!(c.normalized.iter().map(|s| (s.integer.clone(), s.radicand.clone())).collect::<Vec<_>>(), vec![(1.into(), 1.into()); 2]);
        let c = chain_eigenvector(2);
        let pairs: Vec<(BigInt, BigInt)> = c.normalized.iter().map(|s| (s.integer.clone(), s.radicand.clone())).collect();
        assert_eq!(pairs, vec![(1.into(), 2.into()), (2.into(), 1.into()), (1.into(), 2.into())]);
        for n in 0..30 {
            let c = chain_eigenvector(n);
            for (k, s) in c.normalized.iter().enumerate() {
                let k = k as u64;
                assert_eq!(s.square(), binomial(n, k).pow(2) * monomial_gram(k, n - k));
            }
        }
    }

    #[test]
    fn norms() {
        assert_eq!(zero_norm(0).unwrap(), BigInt::one());
        assert_eq!(zero_norm(1).unwrap(), BigInt::zero());
        assert_eq!(zero_norm(2).unwrap(), BigInt::zero());
        assert!(zero_norm(65).is_err());
    }

    #[test]
    fn rank_of_known_matrices() {
        let nil = vec![ints(&[0, 1, 0]), ints(&[0, 0, 1]), ints(&[0, 0, 0])];
        assert_eq!(rank_sequence(&nil), vec![3, 2, 1, 0]);
        let id = vec![ints(&[1, 0]), ints(&[0, 1])];
        assert_eq!(rank_sequence(&id), vec![2, 2]);
        let k = kernel(&vec![ints(&[1, 2]), ints(&[2, 4])]);
        assert_eq!(k, vec![ints(&[-2, 1])].into_iter().map(primitive).collect::<Vec<_>>());
    }

    #[test]
    fn whole_space_identities() {
        let s = shell_identities(12).unwrap();
        assert!(s.commutes_with_number && s.raising_relation && s.shell_diagonal);
    }

    #[test]
    fn json_uses_decimal_strings() {
        let r = jordan_analysis(3).unwrap();
        let j = serde_json::to_value(&r).unwrap();
        assert_eq!(j["zero_norm"], "0");
        assert_eq!(j["eigenvector"][1], "3");
    }
}
