//! Riesz transforms R_j by three routes, their kernel K_j, the Hörmander
//! estimator and the Riesz potential.
//!
//! Normalization: with m_k unnormalized,
//!
//!   R_j f(x) = (d_k / c_k) lim_{eps -> 0} int_{|y| > eps} tau_x f(-y) y_j |y|^{-p_k} dm_k(y)
//!            = c_k^{-1} int K_j(x, y) f(y) dm_k(y)      (x away from supp f)
//!
//! and F(R_j f)(xi) = -i xi_j / |xi| F f(xi).

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::functions::TestFunction;
use crate::grid::{Grid, GridFunction};
use crate::kernel::IntertwiningMeasure;
pub use crate::polar::PolarOptions;
use crate::polar::{radial_rule, OrthantRule, PolarSpectrum};
use crate::quadrature::{left_singular_on, legendre_on, right_singular_on, Rule};
use crate::rootsys::{coordinate_weight, DerivedConstants, ReflectionSetup};
use crate::transform::{apply_multiplier, dunkl_transform, inverse_on_orbit};
use crate::translate::translated_spectrum;

/// Orbit distance below which a kernel pair counts as singular.
pub const SINGULAR_TOL: f64 = 1e-9;
/// Size of |y_m|, relative to |(x, y)|, below which K^(alpha_m) switches to its limit.
pub const HYPERPLANE_TOL: f64 = 1e-6;

/// A(x, y, eta) = sqrt(|x|^2 + |y|^2 - 2⟨y, eta⟩), radicand clamped at 0.
pub fn metric_a(setup: &ReflectionSetup, x: &[f64], y: &[f64], eta: &[f64]) -> Result<f64> {
    setup.check_point(x)?;
    setup.check_point(y)?;
    setup.check_point(eta)?;
    for (e, xj) in eta.iter().zip(x) {
        if e.abs() > xj.abs() * (1.0 + 1e-12) + 1e-300 {
            return Err(DunklError::OutsideHull);
        }
    }
    Ok(radicand(x, y, eta).max(0.0).sqrt())
}

/// a2^{-p/2}; p is often an integer, where powi and sqrt are much cheaper than powf.
fn neg_half_power(a2: f64, p: f64) -> f64 {
    let r = p.round();
    if (p - r).abs() < 1e-15 && r.abs() < 64.0 {
        let n = r as i32;
        if n % 2 == 0 {
            a2.powi(-n / 2)
        } else {
            a2.powi(-(n + 1) / 2) * a2.sqrt()
        }
    } else {
        a2.powf(-0.5 * p)
    }
}

fn radicand(x: &[f64], y: &[f64], eta: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..x.len() {
        s += x[j] * x[j] + y[j] * y[j] - 2.0 * y[j] * eta[j];
    }
    s
}

/// Two-point kernel K_j(x, y) evaluated lazily by mu_x quadrature. Every
/// radicand is checked against min_g |g.x - y|^2 <= A^2 <= max_g |g.x - y|^2.
#[derive(Debug)]
pub struct KernelField {
    setup: ReflectionSetup,
    constants: DerivedConstants,
    mu_nodes: usize,
    checks: AtomicU64,
    violations: AtomicU64,
}

impl Clone for KernelField {
    fn clone(&self) -> Self {
        Self::new(&self.setup, self.mu_nodes)
    }
}

struct Pair {
    lo2: f64,
    hi2: f64,
    tol: f64,
}

impl KernelField {
    pub fn new(setup: &ReflectionSetup, mu_nodes: usize) -> Self {
        Self {
            setup: setup.clone(),
            constants: setup.constants(),
            mu_nodes: mu_nodes.max(1),
            checks: AtomicU64::new(0),
            violations: AtomicU64::new(0),
        }
    }

    pub fn setup(&self) -> &ReflectionSetup {
        &self.setup
    }

    pub fn mu_nodes(&self) -> usize {
        self.mu_nodes
    }

    /// (radicands checked, violations found) so far.
    pub fn sandwich_counts(&self) -> (u64, u64) {
        (self.checks.load(Ordering::Relaxed), self.violations.load(Ordering::Relaxed))
    }

    pub fn measure(&self, x: &[f64]) -> Result<IntertwiningMeasure> {
        IntertwiningMeasure::new(&self.setup, x, self.mu_nodes)
    }

    /// mu_x graded for integrands A(x, t, .)^{-p} with t among `targets`:
    /// along axis j, A^2 - d^2 grows like 2 |x_j t_j| (1 -+ eta_j / x_j),
    /// d the orbit distance, so the endpoint panels get width ~ d^2 / (2 p |x_j t_j|).
    pub fn measure_near(&self, x: &[f64], targets: &[&[f64]]) -> Result<IntertwiningMeasure> {
        let d2 = targets
            .iter()
            .map(|t| self.setup.orbit_distance(x, t).powi(2))
            .fold(f64::INFINITY, f64::min);
        let p = self.constants.p_k;
        let scales: Vec<f64> = (0..x.len())
            .map(|j| {
                let t = targets.iter().map(|t| t[j].abs()).fold(0.0, f64::max);
                let c = 2.0 * p * (x[j] * t).abs();
                if c > 0.0 {
                    d2 / c
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        IntertwiningMeasure::graded(&self.setup, x, self.mu_nodes, &scales)
    }

    fn pair(&self, x: &[f64], y: &[f64]) -> Result<Pair> {
        self.setup.check_point(x)?;
        self.setup.check_point(y)?;
        let lo = self.setup.orbit_distance(x, y);
        if lo < SINGULAR_TOL {
            return Err(DunklError::SingularPair(lo));
        }
        let hi = self.setup.orbit_max_distance(x, y);
        let scale: f64 = x.iter().chain(y).map(|v| v * v).sum();
        Ok(Pair {
            lo2: lo * lo,
            hi2: hi * hi,
            tol: 1e-12 * scale,
        })
    }

    fn checked(&self, a2: f64, pair: &Pair) -> Result<f64> {
        self.checks.fetch_add(1, Ordering::Relaxed);
        if a2 < pair.lo2 - pair.tol || a2 > pair.hi2 + pair.tol {
            self.violations.fetch_add(1, Ordering::Relaxed);
            return Err(DunklError::SandwichViolation {
                value: a2.max(0.0).sqrt(),
                lower: pair.lo2.sqrt(),
                upper: pair.hi2.sqrt(),
            });
        }
        Ok(a2.max(pair.lo2))
    }

    /// (K_j^(1), K^(alpha_j)) at (x, y) for a prepared mu_x.
    fn components(&self, j: usize, measure: &IntertwiningMeasure, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
        if j >= self.setup.dimension() {
            return Err(DunklError::InvalidArgument(format!("coordinate {j} out of range")));
        }
        let pair = self.pair(x, y)?;
        let p = self.constants.p_k;
        let k = self.setup.multiplicity(j);
        let scale = x.iter().chain(y).map(|v| v * v).sum::<f64>().sqrt();
        let on_plane = y[j].abs() <= HYPERPLANE_TOL * scale;
        let mut ry = y.to_vec();
        ry[j] = -ry[j];
        let mut k1 = Vec::with_capacity(measure.len());
        let mut ka = Vec::with_capacity(measure.len());
        let mut err = None;
        measure.for_each(|eta, w| {
            if err.is_some() {
                return;
            }
            let a2 = match self.checked(radicand(x, y, eta), &pair) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    return;
                }
            };
            let ap = neg_half_power(a2, p);
            k1.push(w * (eta[j] - y[j]) * ap);
            if k != 0.0 {
                if on_plane {
                    ka.push(w * eta[j] * ap);
                } else {
                    let b2 = match self.checked(radicand(x, &ry, eta), &pair) {
                        Ok(v) => v,
                        Err(e) => {
                            err = Some(e);
                            return;
                        }
                    };
                    ka.push(w * (a2 * ap - b2 * neg_half_power(b2, p)));
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let k1: f64 = k1.iter().sum();
        let ka: f64 = ka.iter().sum();
        let ka = if k == 0.0 {
            0.0
        } else if on_plane {
            std::f64::consts::SQRT_2 * (p - 2.0) * ka
        } else {
            ka / (std::f64::consts::SQRT_2 * y[j])
        };
        Ok((k1, ka))
    }

    /// K_j^(1)(x, y) = int (eta_j - y_j) A^{-p_k} dmu_x(eta).
    pub fn k1(&self, j: usize, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.components(j, &self.measure(x)?, x, y)?.0)
    }

    /// K^(alpha_m)(x, y) = ⟨y, alpha_m⟩^{-1} int [A^{2-p}(x, y, eta) - A^{2-p}(x, sigma_m y, eta)] dmu_x,
    /// replaced on the hyperplane by its limit sqrt 2 (p - 2) int eta_m A^{-p} dmu_x.
    /// Zero when k_m = 0.
    pub fn kalpha(&self, m: usize, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.components(m, &self.measure(x)?, x, y)?.1)
    }

    /// K_j = d_k {K_j^(1) + k_j sqrt 2 / (p_k - 2) K^(alpha_j)}; for Z_2^N only
    /// the root alpha_j has a nonzero j-th component.
    pub fn full(&self, j: usize, x: &[f64], y: &[f64]) -> Result<f64> {
        let measure = self.measure(x)?;
        self.full_with(j, &measure, x, y)
    }

    fn full_with(&self, j: usize, measure: &IntertwiningMeasure, x: &[f64], y: &[f64]) -> Result<f64> {
        let (k1, ka) = self.components(j, measure, x, y)?;
        let c = &self.constants;
        let k = self.setup.multiplicity(j);
        let extra = if k == 0.0 {
            0.0
        } else {
            k * std::f64::consts::SQRT_2 / (c.p_k - 2.0) * ka
        };
        Ok(c.d_k * (k1 + extra))
    }

    /// Kernel of R_j against dm_k: c_k^{-1} K_j.
    pub fn operator_kernel(&self, j: usize, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.full(j, x, y)? / self.constants.c_k)
    }
}

/// Symbol -i xi_j / |xi|, zero at xi = 0.
pub fn riesz_symbol(j: usize, xi: &[f64]) -> Complex64 {
    let n = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, -xi[j] / n)
    }
}

fn check_coordinate(grid: &Grid, j: usize) -> Result<()> {
    if j >= grid.dimension() {
        return Err(DunklError::InvalidArgument(format!("coordinate {j} out of range")));
    }
    Ok(())
}

/// Multiplier route on the grid.
pub fn riesz_multiplier(j: usize, f: &GridFunction) -> Result<GridFunction> {
    check_coordinate(&f.grid, j)?;
    apply_multiplier(f, |xi| riesz_symbol(j, xi))
}

/// Multiplier route at arbitrary points; the symbol's discontinuity at 0 is
/// handled by a polar frequency rule.
pub fn riesz_multiplier_at(j: usize, f: &GridFunction, xs: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    check_coordinate(&f.grid, j)?;
    let polar = PolarSpectrum::new(f, 0.0, &PolarOptions::default())?;
    Ok(riesz_multiplier_polar(j, &polar, xs))
}

/// Multiplier route from a prepared degree-0 polar spectrum.
pub fn riesz_multiplier_polar(j: usize, polar: &PolarSpectrum, xs: &[Vec<f64>]) -> Vec<Complex64> {
    xs.iter()
        .map(|x| polar.inverse_at(|w| Complex64::new(0.0, -w[j]), x))
        .collect()
}

/// Truncated integrals and their extrapolated limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedValue {
    pub eps: Vec<f64>,
    pub values: Vec<Complex64>,
    pub limit: Complex64,
}

/// eps_m = 2^{-m}, m = 0..count.
pub fn default_eps(count: usize) -> Vec<f64> {
    (0..count).map(|m| 0.5f64.powi(m as i32)).collect()
}

/// Truncated-integral route. The integrand is symmetrized over the sign
/// group, which makes the radial integrand even and smooth, so
/// T(eps) = L + a_1 eps + a_3 eps^3 + ... and the limit is extrapolated in
/// odd powers.
pub fn riesz_truncated(j: usize, f: &GridFunction, x: &[f64], eps: &[f64], opts: &PolarOptions) -> Result<TruncatedValue> {
    let grid = &f.grid;
    check_coordinate(grid, j)?;
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(DunklError::InvalidArgument("eps values must be positive".into()));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(DunklError::InvalidArgument("eps sequence must be strictly decreasing".into()));
    }
    let setup = &grid.setup;
    let c = setup.constants();
    let spectrum = translated_spectrum(x, f)?;
    let angular = OrthantRule::new(setup, opts.angular_nodes);
    let radius = opts.radius.unwrap_or_else(|| grid.axes[0].radius());
    if radius <= eps[0] {
        return Err(DunklError::InvalidArgument("outer radius must exceed the largest eps".into()));
    }
    // Panel breaks: every eps, then uniform panels to the radius.
    let mut breaks: Vec<f64> = eps.iter().rev().cloned().collect();
    let start = eps[0];
    let count = ((radius - start) / opts.panel_width).ceil().max(1.0) as usize;
    for i in 1..=count {
        breaks.push(start + (radius - start) * i as f64 / count as f64);
    }
    let phi = |r: f64| -> Complex64 {
        let mut acc = Vec::with_capacity(angular.len());
        for (w, ww) in angular.directions.iter().zip(&angular.weights) {
            if w[j] == 0.0 {
                continue;
            }
            let y: Vec<f64> = w.iter().map(|v| r * v).collect();
            let orbit = inverse_on_orbit(&spectrum, &y);
            let mut s = Complex64::new(0.0, 0.0);
            for (mask, v) in orbit.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    s -= v;
                } else {
                    s += v;
                }
            }
            // g(y) = tau_x f(-y) flips every sign, hence the minus.
            acc.push(-s * (ww * w[j]));
        }
        acc.iter().sum()
    };
    let mut panels = Vec::with_capacity(breaks.len());
    for pair in breaks.windows(2) {
        let rule = legendre_on(opts.per_panel, pair[0], pair[1]);
        let terms: Vec<Complex64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&r, &w)| phi(r) * (w / r))
            .collect();
        panels.push((pair[0], terms.iter().sum::<Complex64>()));
    }
    let factor = c.d_k / c.c_k;
    let values: Vec<Complex64> = eps
        .iter()
        .map(|&e| {
            let parts: Vec<Complex64> = panels.iter().filter(|(lo, _)| *lo >= e).map(|(_, v)| *v).collect();
            parts.iter().sum::<Complex64>() * factor
        })
        .collect();
    let limit = extrapolate_odd(eps, &values);
    Ok(TruncatedValue {
        eps: eps.to_vec(),
        values,
        limit,
    })
}

/// Value at eps = 0 of the interpolant L + sum_i a_i eps^{2i-1}.
pub fn extrapolate_odd(eps: &[f64], values: &[Complex64]) -> Complex64 {
    let n = eps.len();
    let scale = eps[0];
    let mut m: Vec<Vec<f64>> = eps
        .iter()
        .map(|&e| {
            let t = e / scale;
            (0..n)
                .map(|c| if c == 0 { 1.0 } else { t.powi(2 * c as i32 - 1) })
                .collect()
        })
        .collect();
    let mut rhs = values.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for c in col..n {
                m[row][c] -= f * m[col][c];
            }
            let r = rhs[col];
            rhs[row] -= r * f;
        }
    }
    let mut coef = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for c in row + 1..n {
            s -= coef[c] * m[row][c];
        }
        coef[row] = s / m[row][row];
    }
    coef[0]
}

/// Settings for the kernel route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRouteOptions {
    pub per_panel: usize,
    pub panel_width: f64,
    /// Required gap between the orbit of x and the support of f.
    pub min_separation: f64,
}

impl Default for KernelRouteOptions {
    fn default() -> Self {
        Self {
            per_panel: 10,
            panel_width: 0.5,
            min_separation: 1e-3,
        }
    }
}

/// Composite rule on [lo, hi] for the weight 2^k |t|^{2k}, split at 0.
pub fn weighted_axis_rule(k: f64, lo: f64, hi: f64, width: f64, per_panel: usize) -> Rule {
    let mut breaks = vec![lo];
    if lo < 0.0 && hi > 0.0 {
        breaks.push(0.0);
    }
    breaks.push(hi);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let count = ((b - a) / width).ceil().max(1.0) as usize;
        for i in 0..count {
            let pa = a + (b - a) * i as f64 / count as f64;
            let pb = a + (b - a) * (i + 1) as f64 / count as f64;
            let (rule, singular) = if k > 0.0 && pa == 0.0 {
                (left_singular_on(per_panel, 2.0 * k, pa, pb), true)
            } else if k > 0.0 && pb == 0.0 {
                (right_singular_on(per_panel, 2.0 * k, pa, pb), true)
            } else {
                (legendre_on(per_panel, pa, pb), false)
            };
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(t);
                weights.push(if singular { w * 2f64.powf(k) } else { w * coordinate_weight(k, t) });
            }
        }
    }
    Rule { nodes, weights }
}

/// Kernel route c_k^{-1} int K_j(x, y) f(y) dm_k(y); needs every g.x outside
/// the effective support of f.
pub fn riesz_kernel_route(
    field: &KernelField,
    j: usize,
    f: &TestFunction,
    x: &[f64],
    opts: &KernelRouteOptions,
) -> Result<Complex64> {
    let setup = field.setup();
    setup.check_point(x)?;
    if f.dimension() != setup.dimension() {
        return Err(DunklError::DimensionMismatch {
            expected: setup.dimension(),
            got: f.dimension(),
        });
    }
    let sep = f.orbit_separation(setup, x);
    if sep < opts.min_separation {
        return Err(DunklError::SupportSeparation { distance: sep });
    }
    let width = opts.panel_width.min(sep.max(0.05));
    let rules: Vec<Rule> = f
        .support_box()
        .iter()
        .enumerate()
        .map(|(a, &(lo, hi))| weighted_axis_rule(setup.multiplicity(a), lo, hi, width, opts.per_panel))
        .collect();
    let measure = field.measure(x)?;
    let n = rules.len();
    let mut idx = vec![0usize; n];
    let mut terms = Vec::new();
    loop {
        let y: Vec<f64> = idx.iter().zip(&rules).map(|(&i, r)| r.nodes[i]).collect();
        let w: f64 = idx.iter().zip(&rules).map(|(&i, r)| r.weights[i]).product();
        let fy = f.eval(&y);
        if fy.norm() > 0.0 {
            terms.push(fy * (w * field.full_with(j, &measure, x, &y)?));
        }
        let mut d = 0;
        loop {
            if d == n {
                let total: Complex64 = terms.iter().sum();
                return Ok(total / setup.constants().c_k);
            }
            idx[d] += 1;
            if idx[d] < rules[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Which point the excluded balls of the Hörmander region surround.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HormanderCenter {
    /// {x : min_g |g.x - y0| > 2 |y - y0|}
    Y0,
    /// {x : min_g |g.x - y| > 2 |y - y0|}
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HormanderOptions {
    pub center: HormanderCenter,
    /// Truncation: distance from the orbit point of the center, in units of |y - y0|.
    pub radius_factor: f64,
    pub radial_per_panel: usize,
    pub angular_per_interval: usize,
    pub mu_nodes: usize,
}

impl Default for HormanderOptions {
    fn default() -> Self {
        Self {
            center: HormanderCenter::Y0,
            radius_factor: 256.0,
            radial_per_panel: 6,
            angular_per_interval: 8,
            mu_nodes: 4,
        }
    }
}

impl HormanderOptions {
    pub fn refined(&self) -> Self {
        Self {
            radial_per_panel: self.radial_per_panel * 2,
            angular_per_interval: self.angular_per_interval * 2,
            mu_nodes: self.mu_nodes * 2,
            ..self.clone()
        }
    }

    pub fn with_double_radius(&self) -> Self {
        Self {
            radius_factor: 2.0 * self.radius_factor,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HormanderEstimate {
    /// Integral over the truncated region.
    pub value: f64,
    /// Contribution of the outer half of the radial range, used as the tail estimate.
    pub tail: f64,
    /// value + tail, the 1/R-extrapolated integral.
    pub extrapolated: f64,
    pub nodes: usize,
    pub sandwich_checks: u64,
    pub sandwich_violations: u64,
}

/// Estimate of int_region |k(x, y) - k(x, y0)| dm_k(x) for the operator kernel
/// k = c_k^{-1} K_j. Each orthant is integrated in polar coordinates around
/// its copy of the center; the radial range is [2 delta, min(exit, R)] with
/// the weight's zero on the exit hyperplane carried by a Jacobi panel.
pub fn hormander_estimate(
    setup: &ReflectionSetup,
    j: usize,
    y: &[f64],
    y0: &[f64],
    opts: &HormanderOptions,
) -> Result<HormanderEstimate> {
    setup.check_point(y)?;
    setup.check_point(y0)?;
    let n = setup.dimension();
    if n > 2 {
        return Err(DunklError::InvalidArgument("the Hörmander estimator supports N <= 2".into()));
    }
    if j >= n {
        return Err(DunklError::InvalidArgument(format!("coordinate {j} out of range")));
    }
    let delta = y.iter().zip(y0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    if delta == 0.0 {
        return Err(DunklError::InvalidArgument("y and y0 must differ".into()));
    }
    let field = KernelField::new(setup, opts.mu_nodes);
    let c = setup.constants();
    let center: Vec<f64> = match opts.center {
        HormanderCenter::Y0 => y0.iter().map(|v| v.abs()).collect(),
        HormanderCenter::Y => y.iter().map(|v| v.abs()).collect(),
    };
    let inner = 2.0 * delta;
    let outer = opts.radius_factor * delta;
    let half = 0.5 * outer;
    let mut full = Vec::new();
    let mut tail = Vec::new();
    let mut nodes = 0usize;
    let mut eval = |x: &[f64], w: f64, in_tail: bool| -> Result<()> {
        let measure = field.measure_near(x, &[y, y0])?;
        let a = field.full_with(j, &measure, x, y)?;
        let b = field.full_with(j, &measure, x, y0)?;
        let v = w * (a - b).abs() / c.c_k;
        full.push(v);
        if in_tail {
            tail.push(v);
        }
        nodes += 1;
        Ok(())
    };
    for mask in 0..(1usize << n) {
        let sign: Vec<f64> = (0..n).map(|a| if mask >> a & 1 == 1 { -1.0 } else { 1.0 }).collect();
        for (omega, w_dir) in directions(&center, outer, opts.angular_per_interval) {
            // Exit distance through the hyperplanes of this orthant.
            let mut exit = f64::INFINITY;
            let mut exit_axis = None;
            for a in 0..n {
                if omega[a] < 0.0 {
                    let t = center[a] / -omega[a];
                    if t < exit {
                        exit = t;
                        exit_axis = Some(a);
                    }
                }
            }
            let (upper, singular_axis) = if exit < outer { (exit, exit_axis) } else { (outer, None) };
            if upper <= inner {
                continue;
            }
            for (lo, hi) in radial_breaks(inner, upper, half) {
                let singular = if hi == upper { singular_axis } else { None };
                let rule = match singular {
                    Some(a) if setup.multiplicity(a) > 0.0 => {
                        right_singular_on(opts.radial_per_panel, 2.0 * setup.multiplicity(a), lo, hi)
                    }
                    _ => legendre_on(opts.radial_per_panel, lo, hi),
                };
                for (&r, &wr) in rule.nodes.iter().zip(&rule.weights) {
                    let u: Vec<f64> = (0..n).map(|a| center[a] + r * omega[a]).collect();
                    let x: Vec<f64> = u.iter().zip(&sign).map(|(v, s)| v * s).collect();
                    let mut weight = wr * w_dir * r.powi(n as i32 - 1);
                    for a in 0..n {
                        let k = setup.multiplicity(a);
                        if Some(a) == singular && k > 0.0 {
                            weight *= 2f64.powf(k) * (-omega[a]).powf(2.0 * k);
                        } else {
                            weight *= coordinate_weight(k, u[a]);
                        }
                    }
                    eval(&x, weight, lo >= half)?;
                }
            }
        }
    }
    let value: f64 = full.iter().sum();
    let tail: f64 = tail.iter().sum();
    let (checks, violations) = field.sandwich_counts();
    Ok(HormanderEstimate {
        value,
        tail,
        extrapolated: value + tail,
        nodes,
        sandwich_checks: checks,
        sandwich_violations: violations,
    })
}

/// Geometric breaks from `inner` doubling up to `upper`, with `half` inserted.
fn radial_breaks(inner: f64, upper: f64, half: f64) -> Vec<(f64, f64)> {
    let mut b = vec![inner];
    let mut t = 2.0 * inner;
    while t < upper {
        b.push(t);
        t *= 2.0;
    }
    if half > inner && half < upper {
        b.push(half);
    }
    b.push(upper);
    b.sort_by(|a, c| a.total_cmp(c));
    b.dedup();
    b.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Unit directions with weights: {±1} in 1-D; in 2-D Gauss-Legendre in the
/// angle on intervals split where the exit distance changes form.
fn directions(center: &[f64], outer: f64, per_interval: usize) -> Vec<(Vec<f64>, f64)> {
    if center.len() == 1 {
        return vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)];
    }
    use std::f64::consts::PI;
    let mut cuts = vec![0.0, 0.5 * PI, PI, 1.5 * PI, 2.0 * PI];
    let wrap = |t: f64| t.rem_euclid(2.0 * PI);
    if center[0] > 0.0 || center[1] > 0.0 {
        cuts.push(wrap((-center[1]).atan2(-center[0])));
    }
    for a in 0..2 {
        let ratio = center[a] / outer;
        if ratio < 1.0 {
            // Angles where the exit through axis a happens exactly at the outer radius.
            let base = ratio.acos();
            let (t1, t2) = if a == 0 {
                (PI - base, PI + base)
            } else {
                (1.5 * PI - base, 1.5 * PI + base)
            };
            cuts.push(wrap(t1));
            cuts.push(wrap(t2));
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut out = Vec::new();
    for pair in cuts.windows(2) {
        if pair[1] - pair[0] < 1e-14 {
            continue;
        }
        let rule = legendre_on(per_interval, pair[0], pair[1]);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            out.push((vec![t.cos(), t.sin()], w));
        }
    }
    out
}

/// Riesz potential I^beta f(x) = (c_k d_k^beta)^{-1} int tau_x f(y) |y|^{beta - D} dm_k(y)
/// by polar quadrature of a given spectrum F f.
pub fn riesz_potential_of_spectrum(beta: f64, spectrum: &GridFunction, x: &[f64], opts: &PolarOptions) -> Result<Complex64> {
    let grid: &Arc<Grid> = &spectrum.grid;
    let setup = &grid.setup;
    setup.check_point(x)?;
    let c = setup.constants();
    let dim = c.homogeneous_dim;
    if !(beta > 0.0 && beta < dim) {
        return Err(DunklError::InvalidArgument(format!(
            "beta must lie in (0, {dim}), got {beta}"
        )));
    }
    let translated = spectrum.map(|xi, v| v * crate::kernel::dunkl_kernel_imag(setup, x, xi));
    let angular = OrthantRule::new(setup, opts.angular_nodes);
    let radius = opts.radius.unwrap_or_else(|| grid.axes[0].radius());
    let rule = radial_rule(0.0, radius, 1.0, opts.panel_width, opts.per_panel, beta - 1.0);
    let mut terms = Vec::with_capacity(rule.len());
    for (&r, &wr) in rule.nodes.iter().zip(&rule.weights) {
        let mut s = Vec::with_capacity(angular.len());
        for (w, ww) in angular.directions.iter().zip(&angular.weights) {
            let y: Vec<f64> = w.iter().map(|v| r * v).collect();
            let orbit: Complex64 = inverse_on_orbit(&translated, &y).iter().sum();
            s.push(orbit * *ww);
        }
        terms.push(s.iter().sum::<Complex64>() * wr);
    }
    let total: Complex64 = terms.iter().sum();
    Ok(total / (c.c_k * setup.potential_constant(beta)))
}

/// Riesz potential of grid samples by polar quadrature.
pub fn riesz_potential(beta: f64, f: &GridFunction, x: &[f64], opts: &PolarOptions) -> Result<Complex64> {
    riesz_potential_of_spectrum(beta, &dunkl_transform(f)?, x, opts)
}

/// Spectral form F^{-1}(|xi|^{-beta} F f)(x), the multiplier check for the potential.
pub fn potential_multiplier_at(beta: f64, f: &GridFunction, x: &[f64]) -> Result<Complex64> {
    let polar = PolarSpectrum::new(f, -beta, &PolarOptions::default())?;
    Ok(polar.inverse_at(|_| Complex64::new(1.0, 0.0), x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::Term;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn setup(ks: &[f64]) -> ReflectionSetup {
        ReflectionSetup::new(ks.to_vec()).unwrap()
    }

    #[test]
    fn metric_a_basics() {
        let s = setup(&[0.5, 1.0]);
        let x = [0.8f64, -0.3];
        let y = [-0.2, 1.1];
        let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        assert!((metric_a(&s, &x, &y, &x).unwrap() - d).abs() < 1e-15);
        assert_eq!(metric_a(&s, &x, &y, &[0.9, 0.0]), Err(DunklError::OutsideHull));
    }

    #[test]
    fn classical_kernel() {
        let s = setup(&[0.0, 0.0]);
        let field = KernelField::new(&s, 8);
        let x = [0.4f64, -1.0];
        let y = [1.5, 0.2];
        let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        for j in 0..2 {
            let k = field.full(j, &x, &y).unwrap();
            assert!((k - (x[j] - y[j]) / d.powi(3)).abs() < 1e-14);
        }
    }

    #[test]
    fn k1_against_dense_oracle() {
        // N = 1, gamma = 0.5: mu_x has density (1 + t)^{1/2} (1 - t)^{-1/2} / pi
        // on t = eta / x; the oracle substitutes t = cos(theta) and uses a
        // dense Legendre rule in theta.
        let s = setup(&[0.5]);
        let field = KernelField::new(&s, 64);
        let (x, y) = (1.0f64, 3.0f64);
        let p = s.constants().p_k;
        let v = field.k1(0, &[x], &[y]).unwrap();
        let rule = legendre_on(640, 0.0, PI);
        let mut mass = 0.0;
        let mut acc = 0.0;
        for (&th, &w) in rule.nodes.iter().zip(&rule.weights) {
            let t = th.cos();
            // (1 + t)^{1/2} (1 - t)^{-1/2} dt = (1 + cos th) d th
            let dens = 1.0 + t;
            let eta = x * t;
            let a2 = x * x + y * y - 2.0 * y * eta;
            acc += w * dens * (eta - y) * a2.powf(-0.5 * p);
            mass += w * dens;
        }
        assert!((v - acc / mass).abs() < 1e-9 * v.abs());
    }

    #[test]
    fn kalpha_against_dense_oracle_and_scaling() {
        let s = setup(&[0.5]);
        let field = KernelField::new(&s, 64);
        let p = s.constants().p_k;
        let (x, y) = (1.0f64, 3.0f64);
        let v = field.kalpha(0, &[x], &[y]).unwrap();
        let rule = legendre_on(640, 0.0, PI);
        let (mut acc, mut mass) = (0.0, 0.0);
        for (&th, &w) in rule.nodes.iter().zip(&rule.weights) {
            let t = th.cos();
            let dens = 1.0 + t;
            let eta = x * t;
            let a = (x * x + y * y - 2.0 * y * eta).powf(1.0 - 0.5 * p);
            let b = (x * x + y * y + 2.0 * y * eta).powf(1.0 - 0.5 * p);
            acc += w * dens * (a - b);
            mass += w * dens;
        }
        let oracle = acc / mass / (std::f64::consts::SQRT_2 * y);
        assert!((v - oracle).abs() < 1e-9 * v.abs());
        for cscale in [0.5, 2.0] {
            let w = field.full(0, &[cscale * x], &[cscale * y]).unwrap();
            let u = field.full(0, &[x], &[y]).unwrap();
            assert!((w / u - cscale.powf(1.0 - p)).abs() < 1e-10);
        }
    }

    #[test]
    fn hyperplane_limit_matches_difference_quotients() {
        let s = setup(&[0.5, 1.0]);
        let field = KernelField::new(&s, 48);
        let x = [0.9, -0.7];
        let on = field.kalpha(1, &x, &[1.3, 0.0]).unwrap();
        // Richardson on h -> K(x, (1.3, h)) with even expansion in h.
        let vals: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&h| field.kalpha(1, &x, &[1.3, h]).unwrap())
            .collect();
        let r1 = [(4.0 * vals[1] - vals[0]) / 3.0, (4.0 * vals[2] - vals[1]) / 3.0];
        let lim = (16.0 * r1[1] - r1[0]) / 15.0;
        assert!((on - lim).abs() < 1e-8 * on.abs(), "{on} {lim}");
    }

    #[test]
    fn full_kernel_is_continuous_through_the_origin_in_one_dimension() {
        // y = 0 is the whole hyperplane when N = 1.
        let field = KernelField::new(&setup(&[0.5]), 64);
        let at = field.full(0, &[1.1], &[0.0]).unwrap();
        assert!(at.is_finite());
        let vals: Vec<f64> = [0.02, 0.01, 0.005]
            .iter()
            .map(|&h| 0.5 * (field.full(0, &[1.1], &[h]).unwrap() + field.full(0, &[1.1], &[-h]).unwrap()))
            .collect();
        let r1 = [(4.0 * vals[1] - vals[0]) / 3.0, (4.0 * vals[2] - vals[1]) / 3.0];
        let lim = (16.0 * r1[1] - r1[0]) / 15.0;
        assert!((at - lim).abs() < 1e-7 * at.abs(), "{at} {lim}");
    }

    #[test]
    fn kernel_at_the_origin_is_the_riesz_profile() {
        // A(x, 0, eta) = |x| and int eta_j dmu_x = x_j / (2 k_j + 1), so
        // K_j(x, 0) = d_k x_j |x|^{-p_k}.
        for ks in [&[0.5, 1.0][..], &[2.5], &[0.0, 0.0], &[0.3, 0.0]] {
            let s = setup(ks);
            let c = s.constants();
            let field = KernelField::new(&s, 32);
            let x = &[0.9, -0.7][..ks.len()];
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            for j in 0..ks.len() {
                let v = field.full(j, x, &vec![0.0; ks.len()]).unwrap();
                let exact = c.d_k * x[j] / r.powf(c.p_k);
                assert!((v - exact).abs() < 1e-12 * exact.abs(), "{ks:?} {j}: {v} {exact}");
            }
        }
    }

    #[test]
    fn sandwich_counts_accumulate() {
        let s = setup(&[0.5, 1.0]);
        let field = KernelField::new(&s, 16);
        field.full(0, &[0.5, 0.6], &[1.5, -1.1]).unwrap();
        let (checks, violations) = field.sandwich_counts();
        assert_eq!(checks, 2 * 256);
        assert_eq!(violations, 0);
        assert!(matches!(field.full(0, &[0.5, 0.6], &[-0.5, 0.6]), Err(DunklError::SingularPair(_))));
    }

    #[test]
    fn multiplier_symbol_and_square() {
        assert_eq!(riesz_symbol(0, &[1.0, 0.0]), Complex64::new(0.0, -1.0));
        let s = setup(&[0.5]);
        let g = Grid::default_for(&s).unwrap();
        let f = GridFunction::from_real_fn(Arc::clone(&g), |x| (-(x[0] - 0.4).powi(2)).exp());
        let rr = apply_multiplier(&f, |xi| riesz_symbol(0, xi) * riesz_symbol(0, xi)).unwrap();
        assert!(rr.add(&f).norm_p(2.0) / f.norm_p(2.0) < 1e-6);
    }

    #[test]
    fn hilbert_transform_of_gaussian() {
        // H e^{-x^2} = (2 / sqrt pi) D(x), D the Dawson function; oracle by
        // D(x) = int_0^x e^{t^2 - x^2} dt.
        let s = setup(&[0.0]);
        let g = Grid::default_for(&s).unwrap();
        let f = GridFunction::from_real_fn(Arc::clone(&g), |x| (-x[0] * x[0]).exp());
        for x in [0.3, 1.2, -2.0] {
            let rule = legendre_on(60, 0.0, x);
            let dawson: f64 = rule.nodes.iter().zip(&rule.weights).map(|(t, w)| w * (t * t - x * x).exp()).sum();
            let exact = 2.0 / PI.sqrt() * dawson;
            let m = riesz_multiplier_at(0, &f, &[vec![x]]).unwrap()[0];
            assert!((m.re - exact).abs() < 1e-6, "{x}: {} {exact}", m.re);
            let t = riesz_truncated(0, &f, &[x], &default_eps(6), &PolarOptions::default()).unwrap();
            assert!((t.limit.re - exact).abs() < 1e-6, "{x}: {} {exact}", t.limit.re);
        }
    }

    #[test]
    fn odd_extrapolation_is_exact_on_model() {
        let eps = default_eps(5);
        let vals: Vec<Complex64> = eps
            .iter()
            .map(|e| Complex64::new(2.0 + 0.3 * e - 0.1 * e.powi(3), -1.0 + e.powi(5)))
            .collect();
        let l = extrapolate_odd(&eps, &vals);
        assert!((l - Complex64::new(2.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn truncated_route_rejects_bad_eps() {
        let s = setup(&[0.5]);
        let g = Grid::default_for(&s).unwrap();
        let f = GridFunction::from_real_fn(Arc::clone(&g), |x| (-x[0] * x[0]).exp());
        assert!(riesz_truncated(0, &f, &[0.1], &[0.1, 0.2], &PolarOptions::default()).is_err());
    }

    #[test]
    fn radial_even_input_at_origin_vanishes() {
        let s = setup(&[0.5, 1.0]);
        let g = Grid::default_for(&s).unwrap();
        let f = GridFunction::from_real_fn(Arc::clone(&g), |x| (-(x[0] * x[0] + x[1] * x[1])).exp());
        let t = riesz_truncated(1, &f, &[0.0, 0.0], &default_eps(4), &PolarOptions::default()).unwrap();
        assert!(t.limit.norm() < 1e-12);
    }

    #[test]
    fn three_routes_agree_in_one_dimension() {
        for k in [0.5, 2.5] {
            let s = setup(&[k]);
            let g = Grid::default_for(&s).unwrap();
            let tf = TestFunction::new("g", vec![Term::gaussian(vec![0.8], 0.6, 1.0)]);
            let f = GridFunction::from_fn(Arc::clone(&g), |x| tf.eval(x));
            let field = KernelField::new(&s, 64);
            for x in [7.0, -7.5, 9.0] {
                let m = riesz_multiplier_at(0, &f, &[vec![x]]).unwrap()[0];
                let t = riesz_truncated(0, &f, &[x], &default_eps(6), &PolarOptions::default()).unwrap().limit;
                let kr = riesz_kernel_route(&field, 0, &tf, &[x], &KernelRouteOptions::default()).unwrap();
                let scale = m.norm();
                assert!((m - t).norm() < 1e-4 * scale, "k={k} x={x}: {m} {t}");
                assert!((m - kr).norm() < 1e-4 * scale, "k={k} x={x}: {m} {kr}");
            }
        }
    }

    #[test]
    fn kernel_route_requires_separation() {
        let s = setup(&[0.5]);
        let tf = TestFunction::new("g", vec![Term::gaussian(vec![0.8], 0.6, 1.0)]);
        let field = KernelField::new(&s, 16);
        let r = riesz_kernel_route(&field, 0, &tf, &[-1.0], &KernelRouteOptions::default());
        assert!(matches!(r, Err(DunklError::SupportSeparation { .. })));
    }

    #[test]
    fn hormander_classical_oracle() {
        // k = 0, N = 1: |1/(x-y) - 1/(x-y0)| / pi integrates to a difference of
        // logarithms on each interval of the region.
        let s = setup(&[0.0]);
        let (y, y0) = (1.3, 1.0);
        let delta = 0.3;
        let opts = HormanderOptions {
            radius_factor: 64.0,
            radial_per_panel: 12,
            ..HormanderOptions::default()
        };
        let est = hormander_estimate(&s, 0, &[y], &[y0], &opts).unwrap();
        let prim = |x: f64| (x - y).abs().ln() - (x - y0).abs().ln();
        let rr = 64.0 * delta;
        let mut intervals = vec![(y0 + 2.0 * delta, y0 + rr), (y0 - rr, y0 - 2.0 * delta)];
        // Orbit copy at -y0, clipped to the half line x < 0 and to the region.
        intervals.push((-y0 - rr, -y0 - 2.0 * delta));
        intervals.push((-y0 + 2.0 * delta, 0.0));
        intervals[1].0 = 0.0;
        let mut exact = 0.0;
        for (a, b) in intervals {
            if b > a {
                exact += (prim(b) - prim(a)).abs();
            }
        }
        exact /= PI;
        assert!((est.value - exact).abs() < 1e-8 * exact, "{} {exact}", est.value);
    }

    #[test]
    fn hormander_is_scale_invariant() {
        let s = setup(&[0.5]);
        let a = hormander_estimate(&s, 0, &[1.2], &[1.0], &HormanderOptions::default()).unwrap();
        let b = hormander_estimate(&s, 0, &[2.4], &[2.0], &HormanderOptions::default()).unwrap();
        assert!((a.value - b.value).abs() < 1e-9 * a.value);
        assert_eq!(a.sandwich_violations, 0);
        assert!(a.sandwich_checks > 0);
    }

    #[test]
    fn hormander_near_reflected_center_is_resolved() {
        // x close to the reflection of y0 makes the mu_x integrand peak at an endpoint.
        let s = setup(&[2.5]);
        let o = HormanderOptions::default();
        let a = hormander_estimate(&s, 0, &[-1.516], &[-1.391], &o).unwrap();
        let b = hormander_estimate(&s, 0, &[-1.516], &[-1.391], &o.refined().refined()).unwrap();
        assert!((a.extrapolated - b.extrapolated).abs() < 1e-3 * b.extrapolated, "{a:?} {b:?}");
    }

    #[test]
    fn potential_matches_multiplier() {
        let s = setup(&[0.5]);
        let g = Grid::default_for(&s).unwrap();
        let f = GridFunction::from_real_fn(Arc::clone(&g), |x| (-(x[0] - 0.3).powi(2)).exp());
        for beta in [0.5, 1.0, 1.5] {
            for x in [0.0, 0.7, -1.4] {
                let q = riesz_potential(beta, &f, &[x], &PolarOptions::default()).unwrap();
                let m = potential_multiplier_at(beta, &f, &[x]).unwrap();
                assert!((q - m).norm() < 1e-4 * m.norm(), "beta={beta} x={x}: {q} {m}");
            }
        }
        assert!(riesz_potential(2.0, &f, &[0.0], &PolarOptions::default()).is_err());
    }
}
