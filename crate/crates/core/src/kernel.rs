//! The Dunkl kernel E_k and the intertwining measures mu_x for Z_2^N.
//!
//! Both factor over coordinates. The rank-one kernel is
//! E_g(z) = sum_n a_n z^n with a_0 = 1 and a_n = a_{n-1} / (n + 2g [n odd]).
//! Direct summation loses about exp(|z| - Re z) in relative accuracy, so the
//! evaluator picks between
//! * the direct series,
//! * the Kummer form E_g(z) = e^z 1F1(g; 2g+1; -2z) (positive terms for real z < 0),
//! * Bessel functions on the imaginary axis,
//!   E_g(iy) = j_{g-1/2}(y) + i y/(2g+1) j_{g+1/2}(y), j_mu(y) = Gamma(mu+1)(2/y)^mu J_mu(y),
//! * the modified-Bessel asymptotic expansion for large real arguments.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{DunklError, Result};
use crate::quadrature::{gauss_jacobi, left_singular_on, legendre_on, right_singular_on};
use crate::rootsys::ReflectionSetup;
use crate::special::{bessel_j_pair, ln_gamma, rank_one_kernel_real_asymptotic};

const MAX_TERMS: usize = 500;
/// Accept a summation route when its cancellation exponent stays below this.
const MAX_LOSS: f64 = 9.0;
const IMAG_SERIES_LIMIT: f64 = 8.0;
const REAL_SERIES_LIMIT: f64 = 60.0;

fn direct_series(g: f64, z: Complex64) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let zabs = z.norm();
    for n in 1..=MAX_TERMS {
        let odd = if n % 2 == 1 { 2.0 * g } else { 0.0 };
        term = term * z / (n as f64 + odd);
        sum += term;
        if n as f64 > zabs && term.norm() <= 1e-17 * sum.norm() {
            return Ok(sum);
        }
    }
    Err(DunklError::SeriesNonConvergence { re: z.re, im: z.im })
}

/// 1F1(a; b; w) by its power series.
fn hypergeometric_1f1(a: f64, b: f64, w: Complex64) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let wabs = w.norm();
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term = term * w * ((a + nf) / ((b + nf) * (nf + 1.0)));
        sum += term;
        if nf > wabs && term.norm() <= 1e-17 * sum.norm() {
            return Ok(sum);
        }
    }
    Err(DunklError::SeriesNonConvergence { re: w.re, im: w.im })
}

/// E_g(iy) for real y via Bessel functions.
fn imaginary_axis(g: f64, y: f64) -> Complex64 {
    if y == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let ay = y.abs();
    let mu = g - 0.5;
    let (j_mu, j_mu1) = bessel_j_pair(mu, ay);
    // j_mu(y) = Gamma(mu + 1) (2/y)^mu J_mu(y)
    let log2y = (2.0 / ay).ln();
    let even = (ln_gamma(mu + 1.0) + mu * log2y).exp() * j_mu;
    let odd_norm = (ln_gamma(mu + 2.0) + (mu + 1.0) * log2y).exp() * j_mu1;
    let im = ay / (2.0 * g + 1.0) * odd_norm;
    Complex64::new(even, if y > 0.0 { im } else { -im })
}

/// Rank-one Dunkl kernel E_g(z) for complex z.
pub fn rank_one_kernel(g: f64, z: Complex64) -> Result<Complex64> {
    if g == 0.0 {
        return Ok(z.exp());
    }
    if z.re == 0.0 {
        if z.im.abs() <= IMAG_SERIES_LIMIT {
            return direct_series(g, z);
        }
        return Ok(imaginary_axis(g, z.im));
    }
    if z.im == 0.0 && z.re.abs() > REAL_SERIES_LIMIT {
        return Ok(Complex64::new(rank_one_kernel_real_asymptotic(g, z.re), 0.0));
    }
    let r = z.norm();
    if r > REAL_SERIES_LIMIT {
        return Err(DunklError::KernelDomain { re: z.re, im: z.im });
    }
    let loss_direct = r - z.re;
    let loss_kummer = 2.0 * (r + z.re);
    if loss_direct <= loss_kummer && loss_direct <= MAX_LOSS {
        direct_series(g, z)
    } else if loss_kummer <= MAX_LOSS {
        Ok(z.exp() * hypergeometric_1f1(g, 2.0 * g + 1.0, -2.0 * z)?)
    } else {
        Err(DunklError::KernelDomain { re: z.re, im: z.im })
    }
}

/// Real rank-one kernel; always positive.
pub fn rank_one_kernel_real(g: f64, x: f64) -> f64 {
    rank_one_kernel(g, Complex64::new(x, 0.0))
        .expect("real arguments are always in range")
        .re
}

/// E_k(lambda, x) = prod_j E_{k_j}(lambda_j x_j).
pub fn dunkl_kernel(setup: &ReflectionSetup, lambda: &[Complex64], x: &[f64]) -> Result<Complex64> {
    setup.check_point(x)?;
    if lambda.len() != x.len() {
        return Err(DunklError::DimensionMismatch {
            expected: x.len(),
            got: lambda.len(),
        });
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for (j, (&l, &xj)) in lambda.iter().zip(x).enumerate() {
        acc *= rank_one_kernel(setup.multiplicity(j), l * xj)?;
    }
    Ok(acc)
}

/// Real-argument convenience wrapper: E_k(lambda, x) with lambda real.
pub fn dunkl_kernel_real(setup: &ReflectionSetup, lambda: &[f64], x: &[f64]) -> f64 {
    lambda
        .iter()
        .zip(x)
        .enumerate()
        .map(|(j, (&l, &xj))| rank_one_kernel_real(setup.multiplicity(j), l * xj))
        .product()
}

/// E_k(i xi, x), the kernel of the inverse transform, for real xi and x.
pub fn dunkl_kernel_imag(setup: &ReflectionSetup, xi: &[f64], x: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (j, (&l, &xj)) in xi.iter().zip(x).enumerate() {
        acc *= rank_one_kernel(setup.multiplicity(j), Complex64::new(0.0, l * xj))
            .expect("imaginary arguments are always in range");
    }
    acc
}

/// One-coordinate factor of mu_x: nodes eta_j in [-|x_j|, |x_j|] and weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisMeasure {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Quadrature representation of the intertwining measure mu_x.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntertwiningMeasure {
    pub base: Vec<f64>,
    pub axes: Vec<AxisMeasure>,
}

/// Rank-one measure: with t = eta/x the density on [-1, 1] is proportional to
/// (1 - t)^{g-1} (1 + t)^g. A zero multiplicity or x = 0 gives a point mass.
pub fn rank_one_measure(g: f64, x: f64, npts: usize) -> AxisMeasure {
    if g == 0.0 || x == 0.0 {
        return AxisMeasure {
            nodes: vec![x],
            weights: vec![1.0],
        };
    }
    let rule = gauss_jacobi(npts, g - 1.0, g);
    let total: f64 = rule.weights.iter().sum();
    AxisMeasure {
        nodes: rule.nodes.iter().map(|t| x * t).collect(),
        weights: rule.weights.iter().map(|w| w / total).collect(),
    }
}

/// Same measure with panels refined geometrically towards both endpoints
/// t = ±1, down to width `scale` in t. Integrands such as A^{-p} with A
/// close to its minimum vary on that scale near an endpoint; a single
/// Jacobi rule cannot see it. `npts` nodes per panel.
pub fn rank_one_measure_graded(g: f64, x: f64, npts: usize, scale: f64) -> AxisMeasure {
    if g == 0.0 || x == 0.0 || !(scale < 0.25) {
        return rank_one_measure(g, x, npts);
    }
    let scale = scale.max(1e-14);
    let mut breaks = vec![-1.0];
    let mut h = scale;
    while h < 0.5 {
        breaks.push(-1.0 + h);
        h *= 2.0;
    }
    let mirror: Vec<f64> = breaks.iter().rev().map(|b| -b).collect();
    breaks.push(0.0);
    breaks.extend(mirror);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let last = breaks.len() - 2;
    for (i, pair) in breaks.windows(2).enumerate() {
        let (lo, hi) = (pair[0], pair[1]);
        let (rule, left, right) = if i == 0 {
            (left_singular_on(npts, g, lo, hi), false, true)
        } else if i == last {
            (right_singular_on(npts, g - 1.0, lo, hi), true, false)
        } else {
            (legendre_on(npts, lo, hi), true, true)
        };
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let mut w = w;
            if left {
                w *= (1.0 + t).powf(g);
            }
            if right {
                w *= (1.0 - t).powf(g - 1.0);
            }
            nodes.push(x * t);
            weights.push(w);
        }
    }
    let total: f64 = gauss_jacobi(npts, g - 1.0, g).weights.iter().sum();
    AxisMeasure {
        nodes,
        weights: weights.iter().map(|w| w / total).collect(),
    }
}

impl IntertwiningMeasure {
    pub fn new(setup: &ReflectionSetup, x: &[f64], npts: usize) -> Result<Self> {
        setup.check_point(x)?;
        if npts < 1 {
            return Err(DunklError::InvalidArgument("intertwining measure needs npts >= 1".into()));
        }
        let axes = x
            .iter()
            .enumerate()
            .map(|(j, &xj)| rank_one_measure(setup.multiplicity(j), xj, npts))
            .collect();
        Ok(Self { base: x.to_vec(), axes })
    }

    /// Graded variant: `scales[j]` is the endpoint panel width on axis j.
    pub fn graded(setup: &ReflectionSetup, x: &[f64], npts: usize, scales: &[f64]) -> Result<Self> {
        setup.check_point(x)?;
        if npts < 1 {
            return Err(DunklError::InvalidArgument("intertwining measure needs npts >= 1".into()));
        }
        if scales.len() != x.len() {
            return Err(DunklError::DimensionMismatch {
                expected: x.len(),
                got: scales.len(),
            });
        }
        let axes = x
            .iter()
            .zip(scales)
            .enumerate()
            .map(|(j, (&xj, &s))| rank_one_measure_graded(setup.multiplicity(j), xj, npts, s))
            .collect();
        Ok(Self { base: x.to_vec(), axes })
    }

    /// Number of tensor nodes.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.nodes.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `f(eta, weight)` for every tensor node, in a fixed order.
    pub fn for_each<F: FnMut(&[f64], f64)>(&self, mut f: F) {
        let n = self.axes.len();
        let mut idx = vec![0usize; n];
        let mut eta: Vec<f64> = self.axes.iter().map(|a| a.nodes[0]).collect();
        loop {
            let w: f64 = idx.iter().zip(&self.axes).map(|(&i, a)| a.weights[i]).product();
            f(&eta, w);
            let mut d = 0;
            loop {
                if d == n {
                    return;
                }
                idx[d] += 1;
                if idx[d] < self.axes[d].nodes.len() {
                    eta[d] = self.axes[d].nodes[idx[d]];
                    break;
                }
                idx[d] = 0;
                eta[d] = self.axes[d].nodes[0];
                d += 1;
            }
        }
    }

    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        let mut terms = Vec::with_capacity(self.len());
        self.for_each(|eta, w| terms.push(w * f(eta)));
        terms.iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    /// Plain-text dump, one node per line: eta_1 .. eta_N weight.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.for_each(|eta, w| {
            let cols: Vec<String> = eta.iter().map(|v| format!("{v:.17e}")).collect();
            out.push_str(&cols.join(" "));
            out.push_str(&format!(" {w:.17e}\n"));
        });
        out
    }
}
