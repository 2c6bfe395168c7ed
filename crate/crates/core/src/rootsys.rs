//! The product reflection group Z_2^N, its roots, multiplicities and the
//! constants derived from them.
//!
//! Roots are alpha_j = sqrt(2) e_j, so ⟨alpha, alpha⟩ = 2 and the weight of
//! m_k is prod_j |sqrt(2) x_j|^{2 k_j} = prod_j 2^{k_j} |x_j|^{2 k_j}.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::special::{gamma, ln_gamma};

/// Reflection group {±1}^N with one multiplicity per coordinate root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSetup {
    multiplicities: Vec<f64>,
}

/// Constants attached to a setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// gamma_k = sum of multiplicities over positive roots
    pub gamma_k: f64,
    /// p_k = 2 gamma_k + N + 1
    pub p_k: f64,
    /// Gaussian mass c_k = int exp(-|x|^2/2) dm_k
    pub c_k: f64,
    /// Riesz normalization d_k = 2^{(p_k-1)/2} Gamma(p_k/2) / sqrt(pi)
    pub d_k: f64,
    /// Homogeneous dimension 2 gamma_k + N of m_k.
    pub homogeneous_dim: f64,
}

impl ReflectionSetup {
    pub fn new(multiplicities: Vec<f64>) -> Result<Self> {
        if multiplicities.is_empty() {
            return Err(DunklError::EmptyDimension);
        }
        for (index, &value) in multiplicities.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(DunklError::BadMultiplicity { index, value });
            }
        }
        Ok(Self { multiplicities })
    }

    /// The k = 0 setup in dimension n.
    pub fn classical(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    pub fn dimension(&self) -> usize {
        self.multiplicities.len()
    }

    pub fn multiplicities(&self) -> &[f64] {
        &self.multiplicities
    }

    pub fn multiplicity(&self, j: usize) -> f64 {
        self.multiplicities[j]
    }

    pub fn is_classical(&self) -> bool {
        self.multiplicities.iter().all(|&k| k == 0.0)
    }

    /// Positive roots sqrt(2) e_j, one per coordinate.
    pub fn positive_roots(&self) -> Vec<Vec<f64>> {
        let n = self.dimension();
        (0..n)
            .map(|j| {
                let mut a = vec![0.0; n];
                a[j] = SQRT_2;
                a
            })
            .collect()
    }

    /// Multiplicity of an arbitrary root (zero if the vector is not a root).
    pub fn root_multiplicity(&self, alpha: &[f64]) -> f64 {
        let mut hit = None;
        for (j, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                if hit.is_some() || (a.abs() - SQRT_2).abs() > 1e-15 {
                    return 0.0;
                }
                hit = Some(j);
            }
        }
        hit.map_or(0.0, |j| self.multiplicities[j])
    }

    /// All 2^N sign patterns, as diagonal entries of the group elements.
    pub fn group_elements(&self) -> Vec<Vec<f64>> {
        let n = self.dimension();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect()
    }

    /// Reflection sigma_j in the hyperplane x_j = 0.
    pub fn reflect(&self, j: usize, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        y[j] = -y[j];
        y
    }

    /// Multiplicity-weighted density prod_j |sqrt(2) x_j|^{2 k_j}.
    pub fn weight_density(&self, x: &[f64]) -> f64 {
        self.multiplicities
            .iter()
            .zip(x)
            .map(|(&k, &xj)| coordinate_weight(k, xj))
            .product()
    }

    pub fn constants(&self) -> DerivedConstants {
        let n = self.dimension() as f64;
        let gamma_k: f64 = self.multiplicities.iter().sum();
        let p_k = 2.0 * gamma_k + n + 1.0;
        let c_k = self.multiplicities.iter().map(|&k| gaussian_mass_1d(k)).product();
        let d_k = (0.5 * (p_k - 1.0) * std::f64::consts::LN_2 + ln_gamma(0.5 * p_k)).exp() / PI.sqrt();
        DerivedConstants {
            gamma_k,
            p_k,
            c_k,
            d_k,
            homogeneous_dim: 2.0 * gamma_k + n,
        }
    }

    /// Per-coordinate exponents 2 k_j of the weight.
    pub fn weight_exponents(&self) -> Vec<f64> {
        self.multiplicities.iter().map(|k| 2.0 * k).collect()
    }

    /// min_g |g.x - y|, computed coordinatewise since G acts by sign flips.
    pub fn orbit_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .map(|(a, b)| {
                let d = (a.abs() - b.abs()).abs();
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// max_g |g.x - y|.
    pub fn orbit_max_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .map(|(a, b)| {
                let d = a.abs() + b.abs();
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(DunklError::DimensionMismatch {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Riesz-potential constant d_k^beta, the factor in
    /// F(|y|^{beta - 2gamma - N}) = d_k^beta |xi|^{-beta}.
    pub fn potential_constant(&self, beta: f64) -> f64 {
        let c = self.constants();
        let half_dim = 0.5 * c.homogeneous_dim;
        ((beta - half_dim) * std::f64::consts::LN_2 + ln_gamma(0.5 * beta)
            - ln_gamma(half_dim - 0.5 * beta))
        .exp()
    }
}

/// The factor 2^k |x|^{2k} contributed by one coordinate.
pub fn coordinate_weight(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        (SQRT_2 * x.abs()).powf(2.0 * k)
    }
}

/// int exp(-x^2/2) 2^k |x|^{2k} dx = 2^{2k + 1/2} Gamma(k + 1/2).
pub fn gaussian_mass_1d(k: f64) -> f64 {
    2f64.powf(2.0 * k + 0.5) * gamma(k + 0.5)
}

/// int_0^t 2^k s^{2k} ds, the one-sided m_k mass of [0, t] in one coordinate.
pub fn half_line_mass(k: f64, t: f64) -> f64 {
    2f64.powf(k) * t.powf(2.0 * k + 1.0) / (2.0 * k + 1.0)
}

/// Signed antiderivative of the coordinate weight: m_k([a, b]) = F(b) - F(a).
pub fn coordinate_mass_primitive(k: f64, t: f64) -> f64 {
    t.signum() * half_line_mass(k, t.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::left_singular_on;
    use proptest::prelude::*;

    fn setup(ks: &[f64]) -> ReflectionSetup {
        ReflectionSetup::new(ks.to_vec()).unwrap()
    }

    #[test]
    fn roots_have_squared_length_two() {
        let s = setup(&[0.5, 1.0, 0.0]);
        for a in s.positive_roots() {
            let norm2: f64 = a.iter().map(|v| v * v).sum();
            assert!((norm2 - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn group_maps_roots_to_roots() {
        let s = setup(&[0.5, 1.0]);
        let roots = s.positive_roots();
        for g in s.group_elements() {
            for a in &roots {
                let ga: Vec<f64> = a.iter().zip(&g).map(|(x, s)| x * s).collect();
                let neg: Vec<f64> = ga.iter().map(|v| -v).collect();
                assert!(roots.iter().any(|r| *r == ga || *r == neg));
                assert_eq!(s.root_multiplicity(&ga), s.root_multiplicity(a));
            }
        }
        assert_eq!(s.group_elements().len(), 4);
    }

    #[test]
    fn weight_density_examples() {
        assert_eq!(setup(&[0.0, 0.0]).weight_density(&[0.3, -2.0]), 1.0);
        let g = 0.7;
        let x: f64 = -1.3;
        let w = setup(&[g]).weight_density(&[x]);
        assert!((w - 2f64.powf(g) * x.abs().powf(2.0 * g)).abs() < 1e-14);
        assert!((setup(&[0.5, 1.0]).weight_density(&[1.0, 1.0]) - 2.0 * SQRT_2).abs() < 1e-14);
        assert_eq!(setup(&[0.5, 1.0]).weight_density(&[0.0, 1.0]), 0.0);
    }

    #[test]
    fn classical_constants() {
        let c = setup(&[0.0, 0.0]).constants();
        assert_eq!(c.p_k, 3.0);
        assert!((c.d_k - 1.0).abs() < 1e-14);
        assert!((c.c_k - 2.0 * PI).abs() < 1e-13);
        for n in 1..=4 {
            let c = ReflectionSetup::classical(n).unwrap().constants();
            // d_0 = Gamma((N+1)/2) / pi^{(N+1)/2} times (2 pi)^{N/2}... expressed as
            // d_k / c_k, the classical Riesz constant.
            let classical = gamma(0.5 * (n as f64 + 1.0)) / PI.powf(0.5 * (n as f64 + 1.0));
            assert!(((c.d_k / c.c_k) - classical).abs() < 1e-14 * classical);
        }
        let c1 = ReflectionSetup::classical(1).unwrap().constants();
        assert!((c1.c_k - (2.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn gaussian_mass_matches_quadrature() {
        for &k in &[0.0, 0.5, 1.0, 2.5, 0.7] {
            let rule = left_singular_on(120, 2.0 * k, 0.0, 40.0);
            let half = rule.integrate(|x| 2f64.powf(k) * (-0.5 * x * x).exp());
            let exact = gaussian_mass_1d(k);
            assert!((2.0 * half - exact).abs() < 1e-13 * exact, "k={k}");
        }
        assert!((gaussian_mass_1d(0.5) - 2.0 * SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn orbit_distance_examples() {
        let s = setup(&[0.3, 0.4]);
        assert_eq!(s.orbit_distance(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert!((s.orbit_distance(&[1.0, 0.0], &[0.0, 1.0]) - SQRT_2).abs() < 1e-15);
        let s1 = setup(&[0.5]);
        assert_eq!(s1.orbit_distance(&[1.0], &[-1.0]), 0.0);
    }

    #[test]
    fn rejects_negative_multiplicity() {
        assert!(matches!(
            ReflectionSetup::new(vec![0.5, -0.1]),
            Err(DunklError::BadMultiplicity { index: 1, .. })
        ));
        assert!(matches!(ReflectionSetup::new(vec![]), Err(DunklError::EmptyDimension)));
    }

    proptest! {
        #[test]
        fn weight_is_group_invariant(x0 in -3.0f64..3.0, x1 in -3.0f64..3.0, mask in 0usize..4) {
            let s = setup(&[0.5, 1.0]);
            let g = &s.group_elements()[mask];
            let x = [x0, x1];
            let gx = [g[0] * x0, g[1] * x1];
            prop_assert!((s.weight_density(&x) - s.weight_density(&gx)).abs() <= 1e-14 * s.weight_density(&x).max(1.0));
        }

        #[test]
        fn weight_factorizes(x0 in -3.0f64..3.0, x1 in -3.0f64..3.0) {
            let s = setup(&[0.5, 1.0]);
            let prod = setup(&[0.5]).weight_density(&[x0]) * setup(&[1.0]).weight_density(&[x1]);
            prop_assert!((s.weight_density(&[x0, x1]) - prod).abs() <= 1e-14 * prod.max(1.0));
        }

        #[test]
        fn orbit_distance_is_group_symmetric(x0 in -3.0f64..3.0, x1 in -3.0f64..3.0,
                                             y0 in -3.0f64..3.0, y1 in -3.0f64..3.0, mask in 0usize..4) {
            let s = setup(&[0.5, 1.0]);
            let g = &s.group_elements()[mask];
            let x = [x0, x1];
            let y = [y0, y1];
            let brute = s.group_elements().iter().map(|h| {
                ((h[0] * x0 - y0).powi(2) + (h[1] * x1 - y1).powi(2)).sqrt()
            }).fold(f64::INFINITY, f64::min);
            let d = s.orbit_distance(&x, &y);
            prop_assert!((d - brute).abs() < 1e-12);
            prop_assert!((d - s.orbit_distance(&y, &x)).abs() < 1e-15);
            let gy = [g[0] * y0, g[1] * y1];
            prop_assert!((d - s.orbit_distance(&x, &gy)).abs() < 1e-15);
        }
    }
}
