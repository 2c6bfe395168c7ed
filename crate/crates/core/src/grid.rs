//! Tensor quadrature grids carrying the m_k weight, and complex grid functions.
//!
//! Every axis is symmetric about the origin (node i and node n-1-i are
//! mirror images), so reflections act by index reversal. An axis is built
//! from a central block [-a, a] and Gauss-Legendre panels on [a, R] and
//! [-R, -a]. The central block carries the |x|^{2k} weight exactly: either
//! two Gauss-Jacobi half panels meeting at 0 (`CentralRule::Split`) or one
//! Gauss rule for |x|^{2k} on [-a, a] (`CentralRule::Symmetric`).
//! Derivatives are spectral within each block.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::quadrature::{
    barycentric_eval, barycentric_weights, differentiation_matrix, legendre_on, left_singular_on,
    symmetric_power_rule,
};
use crate::rootsys::{coordinate_weight, ReflectionSetup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CentralRule {
    Split,
    Symmetric,
}

/// Layout of one axis; the same scheme is used on every coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureScheme {
    /// Truncation radius R.
    pub radius: f64,
    /// Half width a of the central block.
    pub central_half_width: f64,
    /// Nodes on each side of the origin inside the central block.
    pub central_points: usize,
    /// Target width of the Legendre panels on [a, R].
    pub panel_width: f64,
    /// Nodes per Legendre panel.
    pub panel_points: usize,
    pub central_rule: CentralRule,
}

impl QuadratureScheme {
    /// 256 nodes per axis on [-12, 12].
    pub fn one_dimensional() -> Self {
        Self {
            radius: 12.0,
            central_half_width: 1.5,
            central_points: 16,
            panel_width: 1.5,
            panel_points: 16,
            central_rule: CentralRule::Symmetric,
        }
    }

    /// 220 nodes per axis on [-12, 12] for two and more dimensions.
    pub fn multi_dimensional() -> Self {
        Self {
            radius: 12.0,
            central_half_width: 1.5,
            central_points: 12,
            panel_width: 1.5,
            panel_points: 14,
            central_rule: CentralRule::Symmetric,
        }
    }

    pub fn default_for(dimension: usize) -> Self {
        if dimension == 1 {
            Self::one_dimensional()
        } else {
            Self::multi_dimensional()
        }
    }

    pub fn panel_count(&self) -> usize {
        ((self.radius - self.central_half_width) / self.panel_width).ceil().max(0.0) as usize
    }

    pub fn points_per_axis(&self) -> usize {
        2 * (self.central_points + self.panel_count() * self.panel_points)
    }

    /// Same layout with every node count multiplied by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        let scale = |n: usize| ((n as f64) * factor).round().max(1.0) as usize;
        Self {
            central_points: scale(self.central_points),
            panel_points: scale(self.panel_points),
            ..*self
        }
    }

    /// Same node density on a larger radius.
    pub fn with_radius(&self, radius: f64) -> Self {
        Self { radius, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.radius > 0.0
            && self.central_half_width > 0.0
            && self.central_half_width <= self.radius
            && self.panel_width > 0.0
            && self.central_points >= 1
            && self.panel_points >= 1;
        if ok {
            Ok(())
        } else {
            Err(DunklError::InvalidArgument(format!("invalid quadrature scheme {self:?}")))
        }
    }
}

/// Contiguous range of nodes sharing one interpolant.
#[derive(Debug, Clone)]
struct Block {
    start: usize,
    len: usize,
    lo: f64,
    hi: f64,
    bary: Vec<f64>,
}

/// One symmetric axis with m_k weights.
#[derive(Debug, Clone)]
pub struct Axis {
    pub multiplicity: f64,
    pub nodes: Vec<f64>,
    /// Quadrature weights including the factor 2^k |x|^{2k}.
    pub weights: Vec<f64>,
    blocks: Vec<Block>,
    /// Block-diagonal differentiation matrix, row-major n x n.
    diff: Vec<f64>,
}

impl Axis {
    pub fn new(k: f64, scheme: &QuadratureScheme) -> Result<Self> {
        scheme.validate()?;
        let a = scheme.central_half_width;
        let r = scheme.radius;
        let panels = scheme.panel_count();
        let width = if panels > 0 { (r - a) / panels as f64 } else { 0.0 };
        let pow2k = 2f64.powf(k);
        // Right half: central part then panels, ascending.
        let mut right_nodes = Vec::new();
        let mut right_weights = Vec::new();
        match scheme.central_rule {
            CentralRule::Split => {
                let rule = left_singular_on(scheme.central_points, 2.0 * k, 0.0, a);
                right_nodes.extend(&rule.nodes);
                right_weights.extend(rule.weights.iter().map(|w| w * pow2k));
            }
            CentralRule::Symmetric => {
                let rule = symmetric_power_rule(scheme.central_points, k);
                let scale = a.powf(2.0 * k + 1.0) * pow2k;
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    if *x > 0.0 {
                        right_nodes.push(a * x);
                        right_weights.push(w * scale);
                    }
                }
            }
        }
        for p in 0..panels {
            let lo = a + p as f64 * width;
            let rule = legendre_on(scheme.panel_points, lo, lo + width);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                right_nodes.push(*x);
                right_weights.push(w * coordinate_weight(k, *x));
            }
        }
        let half = right_nodes.len();
        let mut nodes: Vec<f64> = right_nodes.iter().rev().map(|x| -x).collect();
        nodes.extend(&right_nodes);
        let mut weights: Vec<f64> = right_weights.iter().rev().copied().collect();
        weights.extend(&right_weights);

        let c = scheme.central_points;
        let p = scheme.panel_points;
        let mut blocks = Vec::new();
        for q in (0..panels).rev() {
            let start = half - c - (q + 1) * p;
            blocks.push((start, p, -(a + (q + 1) as f64 * width), -(a + q as f64 * width)));
        }
        blocks.push((half - c, 2 * c, -a, a));
        for q in 0..panels {
            let start = half + c + q * p;
            blocks.push((start, p, a + q as f64 * width, a + (q + 1) as f64 * width));
        }
        let n = nodes.len();
        let mut diff = vec![0.0; n * n];
        let blocks: Vec<Block> = blocks
            .into_iter()
            .map(|(start, len, lo, hi)| {
                let local = &nodes[start..start + len];
                let d = differentiation_matrix(local);
                for i in 0..len {
                    for j in 0..len {
                        diff[(start + i) * n + start + j] = d[i * len + j];
                    }
                }
                Block {
                    start,
                    len,
                    lo,
                    hi,
                    bary: barycentric_weights(local),
                }
            })
            .collect();
        Ok(Self {
            multiplicity: k,
            nodes,
            weights,
            blocks,
            diff,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.blocks.last().map_or(0.0, |b| b.hi)
    }

    pub fn mirror(&self, i: usize) -> usize {
        self.len() - 1 - i
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            self.nodes[i] == -self.nodes[n - 1 - i] && self.weights[i] == self.weights[n - 1 - i]
        })
    }

    pub fn differentiation(&self) -> &[f64] {
        &self.diff
    }

    /// Interpolates axis samples at an arbitrary x in [-R, R].
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let block = self
            .blocks
            .iter()
            .find(|b| x >= b.lo && x <= b.hi)
            .unwrap_or_else(|| if x < 0.0 { &self.blocks[0] } else { self.blocks.last().unwrap() });
        let range = block.start..block.start + block.len;
        barycentric_eval(&self.nodes[range.clone()], &block.bary, &values[range], x)
    }

    /// Node indices of the outermost panel on each side.
    fn outer_indices(&self) -> Vec<usize> {
        let first = &self.blocks[0];
        let last = self.blocks.last().unwrap();
        (first.start..first.start + first.len)
            .chain(last.start..last.start + last.len)
            .collect()
    }
}

/// Tensor grid over a reflection setup.
#[derive(Debug, Clone)]
pub struct Grid {
    pub setup: ReflectionSetup,
    pub scheme: QuadratureScheme,
    pub axes: Vec<Axis>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    /// Per-axis transform matrices, built on first use by the transform module.
    pub(crate) spectral: OnceLock<Vec<Vec<Complex64>>>,
}

impl Grid {
    pub fn new(setup: &ReflectionSetup, scheme: QuadratureScheme) -> Result<Arc<Self>> {
        let axes: Vec<Axis> = setup
            .multiplicities()
            .iter()
            .map(|&k| Axis::new(k, &scheme))
            .collect::<Result<_>>()?;
        let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
        let mut strides = vec![1; shape.len()];
        for j in (0..shape.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * shape[j + 1];
        }
        Ok(Arc::new(Self {
            setup: setup.clone(),
            scheme,
            axes,
            shape,
            strides,
            spectral: OnceLock::new(),
        }))
    }

    pub fn default_for(setup: &ReflectionSetup) -> Result<Arc<Self>> {
        Self::new(setup, QuadratureScheme::default_for(setup.dimension()))
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for j in 0..self.shape.len() {
            idx[j] = flat / self.strides[j];
            flat %= self.strides[j];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.nodes[i])
            .collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn weight(&self, flat: usize) -> f64 {
        self.multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.weights[i])
            .product()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// Flat index of sigma_j applied to the node at `flat`.
    pub fn reflected_index(&self, j: usize, flat: usize) -> usize {
        let i = (flat / self.strides[j]) % self.shape[j];
        let m = self.axes[j].mirror(i);
        flat + m * self.strides[j] - i * self.strides[j]
    }

    /// Flat index of -x.
    pub fn negated_index(&self, flat: usize) -> usize {
        let idx: Vec<usize> = self
            .multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.mirror(i))
            .collect();
        self.flat_index(&idx)
    }

    pub fn check_symmetric(&self) -> Result<()> {
        for (j, a) in self.axes.iter().enumerate() {
            if !a.is_symmetric() {
                return Err(DunklError::AsymmetricGrid(j));
            }
        }
        Ok(())
    }

    /// Applies a complex n_j x n_j matrix along axis j.
    pub fn apply_axis(&self, j: usize, matrix: &[Complex64], values: &[Complex64]) -> Vec<Complex64> {
        let n = self.shape[j];
        assert_eq!(matrix.len(), n * n);
        let stride = self.strides[j];
        let outer = self.len() / (n * stride);
        let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for b in 0..n {
                    column[b] = values[base + b * stride];
                }
                for a in 0..n {
                    let row = &matrix[a * n..(a + 1) * n];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for b in 0..n {
                        acc += row[b] * column[b];
                    }
                    out[base + a * stride] = acc;
                }
            }
        }
        out
    }

    /// Applies a real n_j x n_j matrix along axis j.
    pub fn apply_axis_real(&self, j: usize, matrix: &[f64], values: &[Complex64]) -> Vec<Complex64> {
        let m: Vec<Complex64> = matrix.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.apply_axis(j, &m, values)
    }
}

/// Complex samples on a grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: Arc<Grid>,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.len(), "value array must match the grid");
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self::new(grid, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn from_fn<F: FnMut(&[f64]) -> Complex64>(grid: Arc<Grid>, mut f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn<F: FnMut(&[f64]) -> f64>(grid: Arc<Grid>, mut f: F) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn map<F: FnMut(&[f64], Complex64) -> Complex64>(&self, mut f: F) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(&self.grid.point(i), v))
            .collect();
        Self::new(Arc::clone(&self.grid), values)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(Arc::clone(&self.grid), self.values.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            Arc::clone(&self.grid),
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            Arc::clone(&self.grid),
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        )
    }

    /// f(-x).
    pub fn negated(&self) -> Self {
        let values = (0..self.values.len())
            .map(|i| self.values[self.grid.negated_index(i)])
            .collect();
        Self::new(Arc::clone(&self.grid), values)
    }

    /// f∘sigma_j.
    pub fn reflected(&self, j: usize) -> Self {
        let values = (0..self.values.len())
            .map(|i| self.values[self.grid.reflected_index(j, i)])
            .collect();
        Self::new(Arc::clone(&self.grid), values)
    }

    /// (int |f|^p dm_k)^{1/p}; magnitudes are floored at 1e-300 before powering.
    pub fn norm_p(&self, p: f64) -> f64 {
        let terms: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.weight(i) * v.norm().max(1e-300).powf(p))
            .collect();
        terms.iter().sum::<f64>().powf(1.0 / p)
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// int f conj(g) dm_k
    pub fn inner(&self, other: &Self) -> Complex64 {
        let terms: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| a * b.conj() * self.grid.weight(i))
            .collect();
        terms.iter().sum()
    }

    /// int f dm_k
    pub fn integral(&self) -> Complex64 {
        let terms: Vec<Complex64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.grid.weight(i))
            .collect();
        terms.iter().sum()
    }

    /// ||f - g||_2 / ||g||_2
    pub fn relative_l2_error(&self, reference: &Self) -> f64 {
        let num = self.sub(reference).norm_p(2.0);
        let den = reference.norm_p(2.0);
        num / den
    }

    /// Fraction of the L^2 mass carried by the outermost panels of all axes.
    pub fn tail_fraction(&self) -> f64 {
        let total = self.norm_p(2.0).powi(2);
        if total == 0.0 {
            return 0.0;
        }
        let outer: Vec<Vec<usize>> = self.grid.axes.iter().map(|a| a.outer_indices()).collect();
        let mut tail = Vec::new();
        for (i, v) in self.values.iter().enumerate() {
            let idx = self.grid.multi_index(i);
            if idx.iter().zip(&outer).any(|(k, o)| o.contains(k)) {
                tail.push(self.grid.weight(i) * v.norm_sqr());
            }
        }
        tail.iter().sum::<f64>() / total
    }

    /// Real parts as a plain vector.
    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(ks: &[f64], scheme: QuadratureScheme) -> Arc<Grid> {
        Grid::new(&ReflectionSetup::new(ks.to_vec()).unwrap(), scheme).unwrap()
    }

    #[test]
    fn axes_are_symmetric_and_sized() {
        for rule in [CentralRule::Split, CentralRule::Symmetric] {
            let scheme = QuadratureScheme {
                central_rule: rule,
                ..QuadratureScheme::one_dimensional()
            };
            let g = grid(&[0.5], scheme);
            assert_eq!(g.len(), 256);
            g.check_symmetric().unwrap();
            assert!(g.axes[0].nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn gaussian_mass_is_exact() {
        for &k in &[0.0, 0.5, 2.5] {
            for rule in [CentralRule::Split, CentralRule::Symmetric] {
                let scheme = QuadratureScheme {
                    central_rule: rule,
                    ..QuadratureScheme::one_dimensional()
                };
                let g = grid(&[k], scheme);
                let f = GridFunction::from_real_fn(g, |x| (-0.5 * x[0] * x[0]).exp());
                let exact = crate::rootsys::gaussian_mass_1d(k);
                assert!((f.integral().re - exact).abs() < 1e-13 * exact, "k={k} {rule:?}");
            }
        }
    }

    #[test]
    fn derivative_of_gaussian() {
        for &k in &[0.0, 0.5, 2.5] {
            for rule in [CentralRule::Symmetric] {
                let scheme = QuadratureScheme {
                    central_rule: rule,
                    ..QuadratureScheme::one_dimensional()
                };
                let g = grid(&[k], scheme);
                let f = GridFunction::from_real_fn(Arc::clone(&g), |x| (-(x[0] - 0.3).powi(2) / 0.72).exp());
                let d = g.apply_axis_real(0, g.axes[0].differentiation(), &f.values);
                let mut err: f64 = 0.0;
                for (i, v) in d.iter().enumerate() {
                    let x = g.point(i)[0];
                    let exact = -2.0 * (x - 0.3) / 0.72 * (-(x - 0.3).powi(2) / 0.72).exp();
                    err = err.max((v.re - exact).abs());
                }
                assert!(err < 5e-9, "k={k} {rule:?} err={err:e}");
            }
        }
    }

    #[test]
    fn reflection_indices() {
        let g = grid(&[0.5, 1.0], QuadratureScheme::multi_dimensional());
        for flat in [0usize, 17, 1234, g.len() - 1] {
            let x = g.point(flat);
            let r = g.point(g.reflected_index(1, flat));
            assert_eq!(r, vec![x[0], -x[1]]);
            let n = g.point(g.negated_index(flat));
            assert_eq!(n, vec![-x[0], -x[1]]);
        }
    }

    #[test]
    fn interpolation_reproduces_smooth_functions() {
        let g = grid(&[0.5], QuadratureScheme::one_dimensional());
        let vals: Vec<f64> = g.axes[0].nodes.iter().map(|x| (x * 0.7).sin() * (-x * x / 8.0).exp()).collect();
        for &x in &[-11.0, -1.5, -0.01, 0.0, 0.33, 1.49, 1.51, 7.7] {
            let got = g.axes[0].interpolate(&vals, x);
            let exact = (x * 0.7).sin() * (-x * x / 8.0).exp();
            assert!((got - exact).abs() < 1e-10, "x={x}");
        }
    }
}
