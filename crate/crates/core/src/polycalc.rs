//! Exact Dunkl calculus on polynomials.
//!
//! For coordinate roots the reflection term of T_j is the divided difference
//! (f - f∘sigma_j) / x_j, which on a monomial x^a is 2 x^{a - e_j} when a_j is
//! odd and 0 otherwise, so every operation here is exact in the coefficient
//! field. With `BigRational` coefficients the results are exact; `f64`
//! coefficients are supported for quick evaluation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::rootsys::ReflectionSetup;

/// Coefficient field for [`Poly`].
pub trait Coeff:
    Clone + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// Exact conversion of a finite double (multiplicities, directions).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn from_int(v: i64) -> Self;
}

impl Coeff for BigRational {
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite coefficient")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

impl Coeff for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
}

/// Multivariate polynomial as a sparse map from exponent vectors to
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct Poly<C: Coeff> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, C>,
}

pub type RationalPoly = Poly<BigRational>;

impl<C: Coeff> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// c x^exps
    pub fn monomial(exps: Vec<u32>, c: C) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// The coordinate function x_j.
    pub fn coordinate(nvars: usize, j: usize) -> Self {
        let mut e = vec![0; nvars];
        e[j] = 1;
        Self::monomial(e, C::one())
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, C)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length must equal the variable count");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, c: C) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&exps) {
            Some(v) => v.clone() + c,
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&exps);
        } else {
            self.terms.insert(exps, sum);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> C {
        self.terms.get(exps).cloned().unwrap_or_else(C::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, v)| (e.clone(), v.clone() * c.clone())),
        )
    }

    /// Partial derivative in x_j.
    pub fn partial(&self, j: usize) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().filter(|(e, _)| e[j] > 0).map(|(e, v)| {
                let mut e2 = e.clone();
                e2[j] -= 1;
                (e2, v.clone() * C::from_int(e[j] as i64))
            }),
        )
    }

    /// f∘sigma_j, i.e. x_j -> -x_j.
    pub fn reflect(&self, j: usize) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, v)| {
                let c = if e[j] % 2 == 1 { -v.clone() } else { v.clone() };
                (e.clone(), c)
            }),
        )
    }

    /// Exact quotient (f - f∘sigma_j) / x_j.
    pub fn reflection_quotient(&self, j: usize) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().filter(|(e, _)| e[j] % 2 == 1).map(|(e, v)| {
                let mut e2 = e.clone();
                e2[j] -= 1;
                (e2, v.clone() * C::from_int(2))
            }),
        )
    }

    /// Multiplication by x_j.
    pub fn times_coordinate(&self, j: usize) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, v)| {
                let mut e2 = e.clone();
                e2[j] += 1;
                (e2, v.clone())
            }),
        )
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let terms: Vec<f64> = self
            .terms
            .iter()
            .map(|(e, c)| {
                c.to_f64()
                    * e.iter()
                        .zip(x)
                        .map(|(&p, &xi)| xi.powi(p as i32))
                        .product::<f64>()
            })
            .collect();
        terms.iter().sum()
    }

    pub fn to_f64_poly(&self) -> Poly<f64> {
        Poly::from_terms(self.nvars, self.terms.iter().map(|(e, c)| (e.clone(), c.to_f64())))
    }
}

impl<C: Coeff> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &Poly<C>) -> Poly<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &Poly<C>) -> Poly<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coeff> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &Poly<C>) -> Poly<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Coeff + fmt::Display> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0)
                    .map(|(i, &p)| if p == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, p) })
                    .collect();
                if mono.is_empty() {
                    format!("{c}")
                } else {
                    format!("({c})*{}", mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// T_j f = ∂_j f + k_j (f - f∘sigma_j) / x_j.
pub fn dunkl_coordinate<C: Coeff>(setup: &ReflectionSetup, j: usize, f: &Poly<C>) -> Poly<C> {
    let k = setup.multiplicity(j);
    let d = f.partial(j);
    if k == 0.0 {
        return d;
    }
    &d + &f.reflection_quotient(j).scale(&C::from_f64(k))
}

/// T_xi f = sum_j xi_j T_j f.
pub fn dunkl_apply<C: Coeff>(setup: &ReflectionSetup, xi: &[f64], f: &Poly<C>) -> Poly<C> {
    assert_eq!(xi.len(), setup.dimension());
    let mut out = Poly::zero(f.nvars());
    for (j, &c) in xi.iter().enumerate() {
        if c != 0.0 {
            out = &out + &dunkl_coordinate(setup, j, f).scale(&C::from_f64(c));
        }
    }
    out
}

/// Delta_k f = sum_r T_r^2 f.
pub fn dunkl_laplacian<C: Coeff>(setup: &ReflectionSetup, f: &Poly<C>) -> Poly<C> {
    let mut out = Poly::zero(f.nvars());
    for r in 0..setup.dimension() {
        let t = dunkl_coordinate(setup, r, f);
        out = &out + &dunkl_coordinate(setup, r, &t);
    }
    out
}

/// Polynomial factor q with T_j (p e^{-|x|^2/2}) = q e^{-|x|^2/2}, namely
/// q = T_j p - x_j p (the Gaussian is G-invariant).
pub fn dunkl_coordinate_gaussian<C: Coeff>(setup: &ReflectionSetup, j: usize, p: &Poly<C>) -> Poly<C> {
    &dunkl_coordinate(setup, j, p) - &p.times_coordinate(j)
}

/// Polynomial factor of Delta_k (p e^{-|x|^2/2}).
pub fn dunkl_laplacian_gaussian<C: Coeff>(setup: &ReflectionSetup, p: &Poly<C>) -> Poly<C> {
    let mut out = Poly::zero(p.nvars());
    for r in 0..setup.dimension() {
        let t = dunkl_coordinate_gaussian(setup, r, p);
        out = &out + &dunkl_coordinate_gaussian(setup, r, &t);
    }
    out
}

/// Deterministic pseudo-random polynomial with small integer coefficients,
/// used by the commutativity suite.
pub fn random_poly(nvars: usize, max_degree: u32, nterms: usize, rng: &mut impl rand::Rng) -> RationalPoly {
    let mut p = Poly::zero(nvars);
    for _ in 0..nterms {
        let total = rng.gen_range(0..=max_degree);
        let mut e = vec![0u32; nvars];
        for _ in 0..total {
            e[rng.gen_range(0..nvars)] += 1;
        }
        let num = rng.gen_range(-9i64..=9);
        let den = rng.gen_range(1i64..=4);
        p.add_term(e, BigRational::new(BigInt::from(num), BigInt::from(den)));
    }
    p
}

/// Outcome of the exact commutativity suite.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CommutationReport {
    pub polynomials: usize,
    pub pairs_checked: usize,
    pub failures: usize,
}

/// Checks T_i T_j f = T_j T_i f exactly for `count` random polynomials.
pub fn commutativity_suite(setup: &ReflectionSetup, count: usize, max_degree: u32, seed: u64) -> CommutationReport {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = setup.dimension();
    let mut pairs = 0;
    let mut failures = 0;
    for _ in 0..count {
        let f = random_poly(n, max_degree, 12, &mut rng);
        for i in 0..n {
            for j in (i + 1)..n {
                let a = dunkl_coordinate(setup, i, &dunkl_coordinate(setup, j, &f));
                let b = dunkl_coordinate(setup, j, &dunkl_coordinate(setup, i, &f));
                pairs += 1;
                if a != b {
                    failures += 1;
                }
            }
        }
    }
    CommutationReport {
        polynomials: count,
        pairs_checked: pairs,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn setup(ks: &[f64]) -> ReflectionSetup {
        ReflectionSetup::new(ks.to_vec()).unwrap()
    }

    #[test]
    fn rank_one_monomials() {
        // Oracle: expand (x^n - (-x)^n) / x by hand.
        let g = 0.75;
        let s = setup(&[g]);
        for n in 0..10u32 {
            let f = RationalPoly::monomial(vec![n], BigRational::one());
            let t = dunkl_coordinate(&s, 0, &f);
            if n == 0 {
                assert!(t.is_zero());
                continue;
            }
            let odd = if n % 2 == 1 { 2.0 * g } else { 0.0 };
            let expect = RationalPoly::monomial(vec![n - 1], BigRational::from_f64(n as f64 + odd));
            assert_eq!(t, expect, "n={n}");
        }
    }

    #[test]
    fn classical_reduction_is_partial_derivative() {
        let s = setup(&[0.0, 0.0]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = random_poly(2, 6, 8, &mut rng);
            assert_eq!(dunkl_apply(&s, &[1.0, 0.0], &f), f.partial(0));
            assert_eq!(dunkl_apply(&s, &[0.0, 1.0], &f), f.partial(1));
        }
    }

    #[test]
    fn orthogonal_direction_kills_x1() {
        let s = setup(&[0.5, 1.0]);
        let f = RationalPoly::coordinate(2, 0);
        assert!(dunkl_apply(&s, &[0.0, 1.0], &f).is_zero());
    }

    #[test]
    fn laplacian_examples() {
        let s0 = setup(&[0.0, 0.0]);
        let x1sq = RationalPoly::monomial(vec![2, 0], BigRational::one());
        assert_eq!(dunkl_laplacian(&s0, &x1sq), RationalPoly::constant(2, q(2, 1)));
        let g = 0.5;
        let s = setup(&[g]);
        let x2 = RationalPoly::monomial(vec![2], BigRational::one());
        assert_eq!(dunkl_laplacian(&s, &x2), RationalPoly::constant(1, BigRational::from_f64(2.0 + 4.0 * g)));
        let x = RationalPoly::coordinate(1, 0);
        assert!(dunkl_laplacian(&s, &x).is_zero());
    }

    #[test]
    fn commutativity_is_exact() {
        for ks in [[0.5, 1.0, 0.0], [0.3, 2.5, 1.0 / 3.0]] {
            let report = commutativity_suite(&setup(&ks), 100, 8, 11);
            assert_eq!(report.failures, 0);
            assert_eq!(report.pairs_checked, 300);
        }
    }

    #[test]
    fn gaussian_factor_matches_product_rule() {
        // T_j (p e) evaluated pointwise through the defining formula.
        let s = setup(&[0.5, 1.0]);
        let p = RationalPoly::from_terms(2, vec![(vec![1, 0], q(1, 1)), (vec![0, 2], q(-1, 2)), (vec![2, 1], q(3, 1))]);
        let e = |x: &[f64]| (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp();
        let pf = |x: &[f64]| p.eval(x) * e(x);
        let x = [0.7, -1.1];
        for j in 0..2 {
            let h = 1e-5;
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let deriv = (pf(&xp) - pf(&xm)) / (2.0 * h);
            let refl = s.reflect(j, &x);
            let direct = deriv + s.multiplicity(j) * (pf(&x) - pf(&refl)) / x[j];
            let via = dunkl_coordinate_gaussian(&s, j, &p).eval(&x) * e(&x);
            assert!((direct - via).abs() < 1e-8, "j={j}");
        }
    }

    proptest! {
        #[test]
        fn homogeneous_degree_drops_by_one(seed in 0u64..1000, deg in 1u32..8) {
            let s = setup(&[0.5, 1.25]);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut f = RationalPoly::zero(2);
            for a in 0..=deg {
                let c = q(rng.gen_range(1..5), 1);
                f = &f + &RationalPoly::monomial(vec![a, deg - a], c);
            }
            for j in 0..2 {
                let t = dunkl_coordinate(&s, j, &f);
                prop_assert!(t.is_homogeneous());
                if let Some(d) = t.degree() {
                    prop_assert_eq!(d, deg - 1);
                }
            }
        }
    }
}
