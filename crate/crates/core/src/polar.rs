//! Polar quadrature for m_k.
//!
//! With y = r s w, s a sign pattern and w in the closed positive orthant of the
//! unit sphere,
//!
//!   int F dm_k = int_0^inf r^{D-1} sum_w W_w sum_s F(r s w) dr,   D = 2 gamma + N.
//!
//! Substituting t_j = w_j^2 turns the angular part into a Dirichlet integral on
//! the simplex with exponents k_j - 1/2, handled by nested Gauss-Jacobi rules.
//! Any integrand whose sign-orbit sum is even in every coordinate is then a
//! smooth function of t.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{DunklError, Result};
use crate::grid::{Grid, GridFunction};
use crate::kernel::rank_one_kernel;
use crate::quadrature::{gauss_jacobi, left_singular_on, legendre_on, Rule};
use crate::rootsys::ReflectionSetup;
use crate::transform::{check_tail, transform_on_orbit};

/// Angular nodes w (positive orthant) and weights W.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthantRule {
    pub directions: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl OrthantRule {
    /// `m` nodes per nested Jacobi rule, m^{N-1} directions in total.
    pub fn new(setup: &ReflectionSetup, m: usize) -> Self {
        let ks = setup.multiplicities();
        let n = ks.len();
        let gamma: f64 = ks.iter().sum();
        let prefactor = 2f64.powf(gamma) * 2f64.powi(1 - n as i32);
        let a: Vec<f64> = ks.iter().map(|k| k - 0.5).collect();
        let simplex = dirichlet(&a, m);
        let directions = simplex
            .iter()
            .map(|(t, _)| t.iter().map(|v| v.max(0.0).sqrt()).collect())
            .collect();
        let weights = simplex.iter().map(|(_, w)| w * prefactor).collect();
        Self { directions, weights }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Nodes t on the simplex sum t = 1 and weights for prod t_j^{a_j} dt.
fn dirichlet(a: &[f64], m: usize) -> Vec<(Vec<f64>, f64)> {
    if a.len() == 1 {
        return vec![(vec![1.0], 1.0)];
    }
    let rest: f64 = a[1..].iter().sum::<f64>() + (a.len() - 2) as f64;
    // s in [0, 1] with weight s^{a_0} (1 - s)^{rest}.
    let rule = gauss_jacobi(m, rest, a[0]).mapped(0.0, 1.0, rest + a[0]);
    let inner = dirichlet(&a[1..], m);
    let mut out = Vec::with_capacity(rule.len() * inner.len());
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        for (t, v) in &inner {
            let mut node = Vec::with_capacity(a.len());
            node.push(s);
            node.extend(t.iter().map(|x| (1.0 - s) * x));
            out.push((node, w * v));
        }
    }
    out
}

/// Point y = r s w for a sign mask (bit j set means coordinate j negative).
pub fn signed_point(r: f64, mask: usize, w: &[f64]) -> Vec<f64> {
    w.iter()
        .enumerate()
        .map(|(j, &v)| if mask >> j & 1 == 1 { -r * v } else { r * v })
        .collect()
}

/// Rule for int_a^b F(r) r^{power} dr: geometric panels a, 2a, 4a, ... up to
/// `switch`, then panels of width at most `width`. If `a == 0` the first panel
/// is [0, min(switch, b)] and carries r^{power} in a Jacobi rule.
pub fn radial_rule(a: f64, b: f64, switch: f64, width: f64, per_panel: usize, power: f64) -> Rule {
    let mut breaks = vec![a];
    let mut t = if a == 0.0 { switch.min(b) } else { 2.0 * a };
    while t < switch.min(b) {
        breaks.push(t);
        t *= 2.0;
    }
    let mut lo = *breaks.last().unwrap();
    if lo < switch.min(b) {
        breaks.push(switch.min(b));
        lo = switch.min(b);
    }
    if lo < b {
        let count = ((b - lo) / width).ceil().max(1.0) as usize;
        for i in 1..=count {
            breaks.push(lo + (b - lo) * i as f64 / count as f64);
        }
    }
    breaks.dedup();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (i, pair) in breaks.windows(2).enumerate() {
        let (lo, hi) = (pair[0], pair[1]);
        if hi <= lo {
            continue;
        }
        if i == 0 && a == 0.0 && power != 0.0 {
            let r = left_singular_on(per_panel, power, lo, hi);
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        } else {
            let r = legendre_on(per_panel, lo, hi);
            nodes.extend(r.nodes.iter().cloned());
            weights.extend(r.nodes.iter().zip(&r.weights).map(|(&x, &w)| w * x.powf(power)));
        }
    }
    Rule { nodes, weights }
}

/// Quadrature settings for polar integrals.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolarOptions {
    /// Nodes per nested angular Jacobi rule.
    pub angular_nodes: usize,
    /// Gauss points per radial panel.
    pub per_panel: usize,
    /// Largest radial panel width.
    pub panel_width: f64,
    /// Outer radius; the grid radius when absent.
    pub radius: Option<f64>,
}

impl Default for PolarOptions {
    fn default() -> Self {
        Self {
            angular_nodes: 48,
            per_panel: 16,
            panel_width: 0.75,
            radius: None,
        }
    }
}

/// F f sampled on a polar frequency rule. A symbol |xi|^degree a(xi / |xi|)
/// is singular at the origin; here its radial power sits in the rule, so
/// the inverse transform of symbol * F f keeps spectral accuracy.
#[derive(Debug, Clone)]
pub struct PolarSpectrum {
    grid: Arc<Grid>,
    radial: Rule,
    angular: OrthantRule,
    /// Orbit values of F f, one vector per (radius, direction), radius major.
    values: Vec<Vec<Complex64>>,
}

impl PolarSpectrum {
    pub fn new(f: &GridFunction, degree: f64, opts: &PolarOptions) -> Result<Self> {
        let grid = Arc::clone(&f.grid);
        grid.check_symmetric()?;
        check_tail(f)?;
        let setup = &grid.setup;
        let d = setup.constants().homogeneous_dim;
        let power = d - 1.0 + degree;
        if power <= -1.0 {
            return Err(DunklError::InvalidArgument(format!(
                "symbol degree {degree} is not integrable at the origin"
            )));
        }
        let radius = opts.radius.unwrap_or_else(|| grid.axes[0].radius());
        let radial = radial_rule(0.0, radius, 1.0, opts.panel_width, opts.per_panel, power);
        let angular = OrthantRule::new(setup, opts.angular_nodes);
        let mut values = Vec::with_capacity(radial.len() * angular.len());
        for &r in &radial.nodes {
            for w in &angular.directions {
                let xi: Vec<f64> = w.iter().map(|v| r * v).collect();
                values.push(transform_on_orbit(f, &xi));
            }
        }
        Ok(Self {
            grid,
            radial,
            angular,
            values,
        })
    }

    /// F^{-1}(|xi|^degree a(xi/|xi|) F f)(x); `symbol` receives the signed unit direction.
    pub fn inverse_at<M: Fn(&[f64]) -> Complex64>(&self, symbol: M, x: &[f64]) -> Complex64 {
        let setup = &self.grid.setup;
        let n = setup.dimension();
        let ck = setup.constants().c_k;
        let mut terms = Vec::with_capacity(self.values.len());
        let nd = self.angular.len();
        for (i, (&r, &wr)) in self.radial.nodes.iter().zip(&self.radial.weights).enumerate() {
            for (d, (w, ww)) in self.angular.directions.iter().zip(&self.angular.weights).enumerate() {
                let factors: Vec<Complex64> = (0..n)
                    .map(|a| {
                        rank_one_kernel(setup.multiplicity(a), Complex64::new(0.0, x[a] * r * w[a]))
                            .expect("imaginary arguments are in range")
                    })
                    .collect();
                let orbit = &self.values[i * nd + d];
                let mut acc = Complex64::new(0.0, 0.0);
                for (mask, v) in orbit.iter().enumerate() {
                    let dir = signed_point(1.0, mask, w);
                    let mut e = Complex64::new(1.0, 0.0);
                    for a in 0..n {
                        e *= if mask >> a & 1 == 1 { factors[a].conj() } else { factors[a] };
                    }
                    acc += symbol(&dir) * v * e;
                }
                terms.push(acc * (wr * ww));
            }
        }
        terms.iter().sum::<Complex64>() / ck
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    #[test]
    fn gaussian_mass_by_polar_rule() {
        for ks in [vec![0.0], vec![0.5], vec![0.0, 0.0], vec![0.5, 1.0], vec![0.3, 0.0, 1.2]] {
            let setup = ReflectionSetup::new(ks.clone()).unwrap();
            let c = setup.constants();
            let rule = OrthantRule::new(&setup, 12);
            let d = c.homogeneous_dim;
            let radial = 2f64.powf(d / 2.0 - 1.0) * gamma(d / 2.0);
            let total: f64 = rule.weights.iter().sum::<f64>() * radial * 2f64.powi(ks.len() as i32);
            assert!((total - c.c_k).abs() < 1e-12 * c.c_k, "{ks:?}: {total} vs {}", c.c_k);
        }
    }

    #[test]
    fn polynomial_moment_in_2d() {
        // int y1^2 y2^4 e^{-|y|^2/2} dm_k factorizes over coordinates.
        let setup = ReflectionSetup::new(vec![0.5, 1.0]).unwrap();
        let rule = OrthantRule::new(&setup, 10);
        let radial = radial_rule(0.0, 14.0, 1.0, 0.5, 20, 0.0);
        let mut total = 0.0;
        for (w, ww) in rule.directions.iter().zip(&rule.weights) {
            for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
                let d = 2.0 * 1.5 + 2.0;
                for mask in 0..4 {
                    let y = signed_point(r, mask, w);
                    total += wr * ww * r.powf(d - 1.0) * y[0].powi(2) * y[1].powi(4) * (-0.5 * r * r).exp();
                }
            }
        }
        let one = |k: f64, e: f64| 2f64.powf(k) * 2f64.powf((2.0 * k + e + 1.0) / 2.0) * gamma((2.0 * k + e + 1.0) / 2.0);
        let exact = one(0.5, 2.0) * one(1.0, 4.0);
        assert!((total - exact).abs() < 1e-11 * exact, "{total} {exact}");
    }

    #[test]
    fn singular_first_panel() {
        let r = radial_rule(0.0, 3.0, 1.0, 0.5, 10, -0.5);
        let v: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * (1.0 + x)).sum();
        let exact = 2.0 * 3f64.sqrt() + 2.0 / 3.0 * 3f64.powf(1.5);
        assert!((v - exact).abs() < 1e-12);
    }
}
