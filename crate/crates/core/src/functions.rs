//! Analytic test functions: sums of polynomial-times-Gaussian terms with an
//! optional plane-wave factor, and radial profiles.
//!
//! Every family has a closed-form derivative, so the Dunkl operator of a test
//! function is available pointwise without any grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::rootsys::ReflectionSetup;

/// Magnitude below which a Gaussian term counts as zero when deciding its
/// effective support.
pub const SUPPORT_CUTOFF: f64 = 1e-17;

/// coeff * x^exponents * exp(-sum_j (x_j - c_j)^2 / (2 s_j^2) + i ⟨freq, x⟩)
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: [f64; 2],
    pub exponents: Vec<u32>,
    pub center: Vec<f64>,
    pub width: Vec<f64>,
    pub freq: Vec<f64>,
}

impl Term {
    pub fn gaussian(center: Vec<f64>, width: f64, amplitude: f64) -> Self {
        let n = center.len();
        Self {
            coeff: [amplitude, 0.0],
            exponents: vec![0; n],
            center,
            width: vec![width; n],
            freq: vec![0.0; n],
        }
    }

    fn coeff(&self) -> Complex64 {
        Complex64::new(self.coeff[0], self.coeff[1])
    }

    fn envelope_exponent(&self, x: &[f64]) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for j in 0..x.len() {
            let d = x[j] - self.center[j];
            re -= d * d / (2.0 * self.width[j] * self.width[j]);
            im += self.freq[j] * x[j];
        }
        Complex64::new(re, im)
    }

    fn monomial(&self, x: &[f64]) -> f64 {
        self.exponents.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.coeff() * self.monomial(x) * self.envelope_exponent(x).exp()
    }

    pub fn partial(&self, j: usize, x: &[f64]) -> Complex64 {
        let env = self.envelope_exponent(x).exp();
        let mono = self.monomial(x);
        let e = self.exponents[j];
        let dmono = if e == 0 {
            0.0
        } else {
            let mut m = e as f64 * x[j].powi(e as i32 - 1);
            for (i, (&ei, &v)) in self.exponents.iter().zip(x).enumerate() {
                if i != j {
                    m *= v.powi(ei as i32);
                }
            }
            m
        };
        let dexp = Complex64::new(
            -(x[j] - self.center[j]) / (self.width[j] * self.width[j]),
            self.freq[j],
        );
        self.coeff() * env * (dmono + mono * dexp)
    }

    /// Radius around the center outside of which the term is below the cutoff.
    pub fn support_radius(&self) -> f64 {
        let s = self.width.iter().cloned().fold(0.0, f64::max);
        let deg: u32 = self.exponents.iter().sum();
        let cmag = self.coeff().norm().max(1e-300);
        let cnorm: f64 = self.center.iter().map(|c| c * c).sum::<f64>().sqrt();
        // Solve |c| (|center| + r)^deg exp(-r^2 / (2 s^2)) = cutoff by bisection.
        let size = |r: f64| {
            cmag.ln() + deg as f64 * (cnorm + r).max(1e-300).ln() - r * r / (2.0 * s * s) - SUPPORT_CUTOFF.ln()
        };
        let mut lo = 0.0;
        let mut hi = s * 20.0 + cnorm + 10.0;
        if size(lo) <= 0.0 {
            return 0.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if size(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// A named sum of [`Term`]s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub name: String,
    pub terms: Vec<Term>,
}

impl TestFunction {
    pub fn new(name: impl Into<String>, terms: Vec<Term>) -> Self {
        Self {
            name: name.into(),
            terms,
        }
    }

    pub fn dimension(&self) -> usize {
        self.terms.first().map_or(0, |t| t.center.len())
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn partial(&self, j: usize, x: &[f64]) -> Complex64 {
        self.terms.iter().map(|t| t.partial(j, x)).sum()
    }

    /// T_j f(x) from the analytic derivative and the reflection quotient; the
    /// quotient is replaced by its limit 2 d_j f_odd on the hyperplane.
    pub fn dunkl(&self, setup: &ReflectionSetup, j: usize, x: &[f64]) -> Complex64 {
        let d = self.partial(j, x);
        let k = setup.multiplicity(j);
        if k == 0.0 {
            return d;
        }
        let rx = setup.reflect(j, x);
        let q = if x[j].abs() < 1e-7 {
            self.partial(j, x) + self.partial(j, &rx)
        } else {
            (self.eval(x) - self.eval(&rx)) / x[j]
        };
        d + q * k
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for t in out.terms.iter_mut() {
            t.coeff = [t.coeff[0] * c, t.coeff[1] * c];
        }
        out
    }

    /// f_t(x) = f(t x).
    pub fn dilated(&self, t: f64) -> Self {
        let mut out = self.clone();
        out.name = format!("{}@dil{t}", self.name);
        for term in out.terms.iter_mut() {
            let deg: u32 = term.exponents.iter().sum();
            let s = t.powi(deg as i32);
            term.coeff = [term.coeff[0] * s, term.coeff[1] * s];
            for j in 0..term.center.len() {
                term.center[j] /= t;
                term.width[j] /= t;
                term.freq[j] *= t;
            }
        }
        out
    }

    /// Effective support as balls (center, radius), one per term.
    pub fn support_balls(&self) -> Vec<(Vec<f64>, f64)> {
        self.terms
            .iter()
            .map(|t| (t.center.clone(), t.support_radius()))
            .collect()
    }

    /// min over g in G and support balls of |g.x - center| - radius.
    pub fn orbit_separation(&self, setup: &ReflectionSetup, x: &[f64]) -> f64 {
        self.support_balls()
            .iter()
            .map(|(c, r)| setup.orbit_distance(x, c) - r)
            .fold(f64::INFINITY, f64::min)
    }

    /// Axis-aligned box containing the effective support.
    pub fn support_box(&self) -> Vec<(f64, f64)> {
        let n = self.dimension();
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
        for (c, r) in self.support_balls() {
            for j in 0..n {
                b[j].0 = b[j].0.min(c[j] - r);
                b[j].1 = b[j].1.max(c[j] + r);
            }
        }
        b
    }
}

/// Radial profile f~ with f(y) = f~(|y|), stored as a function of u = |y|^2:
/// f~(sqrt u) = sum_i a_i (1 + b_i u) exp(-u / (2 s_i^2)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub name: String,
    pub amplitudes: Vec<f64>,
    pub quadratic: Vec<f64>,
    pub widths: Vec<f64>,
}

impl RadialProfile {
    pub fn gaussian(width: f64) -> Self {
        Self {
            name: format!("radial-gauss-s{width}"),
            amplitudes: vec![1.0],
            quadratic: vec![0.0],
            widths: vec![width],
        }
    }

    pub fn eval_sq(&self, u: f64) -> f64 {
        let u = u.max(0.0);
        self.amplitudes
            .iter()
            .zip(&self.quadratic)
            .zip(&self.widths)
            .map(|((a, b), s)| a * (1.0 + b * u) * (-u / (2.0 * s * s)).exp())
            .sum()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_sq(t * t)
    }

    pub fn eval_point(&self, y: &[f64]) -> f64 {
        self.eval_sq(y.iter().map(|v| v * v).sum())
    }

    /// Recorded decay (C, m) with |f~(t)| <= C (1 + t)^{-m}, here m = 8.
    pub fn decay_bound(&self) -> (f64, f64) {
        let m = 8.0;
        let c = (0..=4000)
            .map(|i| {
                let t = i as f64 * 0.01;
                self.eval(t).abs() * (1.0 + t).powf(m)
            })
            .fold(0.0, f64::max);
        (c * 1.01, m)
    }

    /// The same function expressed as a [`TestFunction`] (needs b_i = 0 or
    /// expands the quadratic factor into monomials).
    pub fn to_test_function(&self, dimension: usize) -> TestFunction {
        let mut terms = Vec::new();
        for ((&a, &b), &s) in self.amplitudes.iter().zip(&self.quadratic).zip(&self.widths) {
            let mut base = Term::gaussian(vec![0.0; dimension], s, a);
            terms.push(base.clone());
            if b != 0.0 {
                for j in 0..dimension {
                    base.exponents = vec![0; dimension];
                    base.exponents[j] = 2;
                    base.coeff = [a * b, 0.0];
                    terms.push(base.clone());
                }
            }
        }
        TestFunction::new(self.name.clone(), terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_derivative_matches_differences() {
        let t = Term {
            coeff: [0.7, -0.2],
            exponents: vec![2, 1],
            center: vec![0.3, -0.5],
            width: vec![0.8, 1.1],
            freq: vec![1.5, -0.4],
        };
        let f = TestFunction::new("t", vec![t]);
        let x = [0.4, 0.9];
        for j in 0..2 {
            let h = 1e-5;
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let fd = (f.eval(&xp) - f.eval(&xm)) / (2.0 * h);
            assert!((fd - f.partial(j, &x)).norm() < 1e-8);
        }
    }

    #[test]
    fn dilation_and_support() {
        let f = TestFunction::new("g", vec![Term::gaussian(vec![1.0, 0.0], 0.5, 1.0)]);
        let g = f.dilated(2.0);
        let x = [0.3, -0.2];
        assert!((g.eval(&x) - f.eval(&[0.6, -0.4])).norm() < 1e-15);
        let r = f.terms[0].support_radius();
        assert!((f.eval(&[1.0 + r, 0.0]).norm() - SUPPORT_CUTOFF).abs() < 1e-3 * SUPPORT_CUTOFF);
    }

    #[test]
    fn radial_profile_round_trip() {
        let p = RadialProfile {
            name: "mix".into(),
            amplitudes: vec![1.0, -0.5],
            quadratic: vec![0.3, 0.0],
            widths: vec![0.9, 0.6],
        };
        let f = p.to_test_function(2);
        let y = [0.7, -1.2];
        assert!((f.eval(&y).re - p.eval_point(&y)).abs() < 1e-15);
        let (c, m) = p.decay_bound();
        for i in 0..100 {
            let t = i as f64 * 0.13;
            assert!(p.eval(t).abs() <= c * (1.0 + t).powf(-m));
        }
    }
}
