//! Dunkl transform on tensor grids, its inverse, and the grid Dunkl operators.
//!
//! F f(xi) = c_k^{-1} int f(x) E_k(-i xi, x) dm_k(x). For Z_2^N both the kernel
//! and c_k factor over coordinates, so the transform is one dense matrix per
//! axis applied along that axis; the frequency grid is the spatial grid.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{DunklError, Result};
use crate::grid::{Grid, GridFunction};
use crate::kernel::rank_one_kernel;
use crate::rootsys::gaussian_mass_1d;

/// Largest admissible share of L^2 mass in the outermost panels.
pub const TAIL_LIMIT: f64 = 1e-10;

fn axis_matrices(grid: &Grid) -> &Vec<Vec<Complex64>> {
    grid.spectral.get_or_init(|| {
        grid.axes
            .iter()
            .map(|axis| {
                let n = axis.len();
                let k = axis.multiplicity;
                let ck = gaussian_mass_1d(k);
                let mut m = vec![Complex64::new(0.0, 0.0); n * n];
                for a in 0..n {
                    for b in 0..n {
                        let z = Complex64::new(0.0, -axis.nodes[a] * axis.nodes[b]);
                        let e = rank_one_kernel(k, z).expect("imaginary arguments are in range");
                        m[a * n + b] = e * (axis.weights[b] / ck);
                    }
                }
                m
            })
            .collect()
    })
}

pub(crate) fn check_tail(f: &GridFunction) -> Result<()> {
    let tail = f.tail_fraction();
    if tail > TAIL_LIMIT {
        return Err(DunklError::TailMass {
            tail,
            limit: TAIL_LIMIT,
        });
    }
    Ok(())
}

/// Transform without the tail-mass check.
pub fn dunkl_transform_unchecked(f: &GridFunction) -> GridFunction {
    let grid = &f.grid;
    let mats = axis_matrices(grid);
    let mut values = f.values.clone();
    for (j, m) in mats.iter().enumerate() {
        values = grid.apply_axis(j, m, &values);
    }
    GridFunction::new(Arc::clone(grid), values)
}

/// Dunkl transform sampled on the same grid.
pub fn dunkl_transform(f: &GridFunction) -> Result<GridFunction> {
    f.grid.check_symmetric()?;
    check_tail(f)?;
    Ok(dunkl_transform_unchecked(f))
}

/// Inverse transform: F^{-1} g(x) = F g(-x).
pub fn inverse_dunkl_transform(spectrum: &GridFunction) -> Result<GridFunction> {
    Ok(dunkl_transform(spectrum)?.negated())
}

pub fn inverse_dunkl_transform_unchecked(spectrum: &GridFunction) -> GridFunction {
    dunkl_transform_unchecked(spectrum).negated()
}

/// | ||F f|| - ||f|| | / ||f|| in L^2(m_k).
pub fn plancherel_defect(f: &GridFunction) -> Result<f64> {
    let norm = f.norm_p(2.0);
    if norm == 0.0 {
        return Err(DunklError::ZeroNorm);
    }
    let spectrum = dunkl_transform(f)?;
    Ok((spectrum.norm_p(2.0) - norm).abs() / norm)
}

/// Relative L^2 error of F^{-1} F f against f.
pub fn inversion_defect(f: &GridFunction) -> Result<f64> {
    let norm = f.norm_p(2.0);
    if norm == 0.0 {
        return Err(DunklError::ZeroNorm);
    }
    let back = inverse_dunkl_transform(&dunkl_transform(f)?)?;
    Ok(back.relative_l2_error(f))
}

/// Multiplies the spectrum of f by m(xi) and transforms back.
pub fn apply_multiplier<M>(f: &GridFunction, m: M) -> Result<GridFunction>
where
    M: Fn(&[f64]) -> Complex64,
{
    let spectrum = dunkl_transform(f)?;
    let multiplied = spectrum.map(|xi, v| v * m(xi));
    Ok(inverse_dunkl_transform_unchecked(&multiplied))
}

/// Grid Dunkl operator T_j f = d_j f + k_j (f - f∘sigma_j) / x_j. The
/// reflection uses index reversal; at a node on the hyperplane the quotient
/// is replaced by its limit 2 d_j f.
pub fn grid_dunkl_op(j: usize, f: &GridFunction) -> Result<GridFunction> {
    let grid = &f.grid;
    if j >= grid.dimension() {
        return Err(DunklError::InvalidArgument(format!("coordinate {j} out of range")));
    }
    grid.check_symmetric()?;
    let axis = &grid.axes[j];
    let deriv = grid.apply_axis_real(j, axis.differentiation(), &f.values);
    let k = axis.multiplicity;
    if k == 0.0 {
        return Ok(GridFunction::new(Arc::clone(grid), deriv));
    }
    let tol = 1e-12 * axis.radius();
    let values = (0..f.values.len())
        .map(|i| {
            let xj = grid.point(i)[j];
            let quotient = if xj.abs() < tol {
                2.0 * deriv[i]
            } else {
                (f.values[i] - f.values[grid.reflected_index(j, i)]) / xj
            };
            deriv[i] + quotient * k
        })
        .collect();
    Ok(GridFunction::new(Arc::clone(grid), values))
}

/// Relative L^2 defect of F(T_j f) - i xi_j F f.
pub fn multiplier_identity_defect(j: usize, f: &GridFunction) -> Result<f64> {
    let lhs = dunkl_transform(&grid_dunkl_op(j, f)?)?;
    let rhs = dunkl_transform(f)?.map(|xi, v| v * Complex64::new(0.0, xi[j]));
    let den = rhs.norm_p(2.0).max(dunkl_transform(f)?.norm_p(2.0));
    if den == 0.0 {
        return Err(DunklError::ZeroNorm);
    }
    Ok(lhs.sub(&rhs).norm_p(2.0) / den)
}

/// Directional form: F(T_v f)(xi) = i ⟨v, xi⟩ F f(xi) for a direction v.
pub fn directional_identity_defect(direction: &[f64], f: &GridFunction) -> Result<f64> {
    let mut tv = GridFunction::zeros(Arc::clone(&f.grid));
    for (j, &c) in direction.iter().enumerate() {
        if c != 0.0 {
            tv = tv.add(&grid_dunkl_op(j, f)?.scale(Complex64::new(c, 0.0)));
        }
    }
    let lhs = dunkl_transform(&tv)?;
    let spectrum = dunkl_transform(f)?;
    let rhs = spectrum.map(|xi, v| {
        let dot: f64 = xi.iter().zip(direction).map(|(a, b)| a * b).sum();
        v * Complex64::new(0.0, dot)
    });
    Ok(lhs.sub(&rhs).norm_p(2.0) / spectrum.norm_p(2.0))
}

/// Contracts a tensor of grid values with one vector per axis.
pub fn contract(grid: &Grid, values: &[Complex64], vectors: &[Vec<Complex64>]) -> Complex64 {
    let shape = grid.shape();
    let mut current: Vec<Complex64> = values.to_vec();
    for j in (0..shape.len()).rev() {
        let n = shape[j];
        let outer = current.len() / n;
        let v = &vectors[j];
        current = (0..outer)
            .map(|o| {
                let row = &current[o * n..(o + 1) * n];
                let mut acc = Complex64::new(0.0, 0.0);
                for b in 0..n {
                    acc += row[b] * v[b];
                }
                acc
            })
            .collect();
    }
    current[0]
}

/// Per-axis vectors E_{k_j}(sign i t_j node_b) w_b / c_{k_j}.
fn kernel_vectors(grid: &Grid, t: &[f64], sign: f64) -> Vec<Vec<Complex64>> {
    grid.axes
        .iter()
        .zip(t)
        .map(|(axis, &tj)| {
            let ck = gaussian_mass_1d(axis.multiplicity);
            axis.nodes
                .iter()
                .zip(&axis.weights)
                .map(|(&node, &w)| {
                    let z = Complex64::new(0.0, sign * tj * node);
                    rank_one_kernel(axis.multiplicity, z).expect("imaginary arguments are in range") * (w / ck)
                })
                .collect()
        })
        .collect()
}

/// Inverse transform of grid spectrum values evaluated at an arbitrary point x.
pub fn inverse_at(spectrum: &GridFunction, x: &[f64]) -> Complex64 {
    let vecs = kernel_vectors(&spectrum.grid, x, 1.0);
    contract(&spectrum.grid, &spectrum.values, &vecs)
}

/// Inverse transform at every sign flip s.y of y, indexed by sign mask (bit j
/// set means coordinate j negated).
pub fn inverse_on_orbit(spectrum: &GridFunction, y: &[f64]) -> Vec<Complex64> {
    orbit_contract(spectrum, y, 1.0)
}

/// Forward transform at every sign flip s.xi of xi, indexed as in [`inverse_on_orbit`].
pub fn transform_on_orbit(f: &GridFunction, xi: &[f64]) -> Vec<Complex64> {
    orbit_contract(f, xi, -1.0)
}

/// One contraction per sign pattern, sharing partial sums; uses
/// E(-i t) = conj E(i t) for real t.
fn orbit_contract(g: &GridFunction, t: &[f64], sign: f64) -> Vec<Complex64> {
    let grid = &g.grid;
    let vecs = kernel_vectors(grid, t, sign);
    let shape = grid.shape();
    let mut partial: Vec<Vec<Complex64>> = vec![g.values.clone()];
    for j in (0..shape.len()).rev() {
        let n = shape[j];
        let v = &vecs[j];
        let mut next = Vec::with_capacity(partial.len() * 2);
        for cur in &partial {
            let outer = cur.len() / n;
            for negate in [false, true] {
                next.push(
                    (0..outer)
                        .map(|o| {
                            let row = &cur[o * n..(o + 1) * n];
                            let mut acc = Complex64::new(0.0, 0.0);
                            for b in 0..n {
                                acc += row[b] * if negate { v[b].conj() } else { v[b] };
                            }
                            acc
                        })
                        .collect(),
                );
            }
        }
        partial = next;
    }
    partial.into_iter().map(|p| p[0]).collect()
}

/// Forward transform of grid samples evaluated at an arbitrary frequency xi.
pub fn transform_at(f: &GridFunction, xi: &[f64]) -> Complex64 {
    let vecs = kernel_vectors(&f.grid, xi, -1.0);
    contract(&f.grid, &f.values, &vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::QuadratureScheme;
    use crate::kernel::dunkl_kernel;
    use crate::polycalc::{dunkl_coordinate_gaussian, RationalPoly};
    use crate::rootsys::ReflectionSetup;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn grid(ks: &[f64]) -> Arc<Grid> {
        let s = ReflectionSetup::new(ks.to_vec()).unwrap();
        Grid::default_for(&s).unwrap()
    }

    fn gaussian(g: &Arc<Grid>) -> GridFunction {
        GridFunction::from_real_fn(Arc::clone(g), |x| (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp())
    }

    #[test]
    fn gaussian_is_a_fixed_point() {
        for ks in [vec![0.0], vec![0.5], vec![2.5], vec![0.5, 1.0]] {
            let g = grid(&ks);
            let f = gaussian(&g);
            let t = dunkl_transform(&f).unwrap();
            let err = t.relative_l2_error(&f);
            assert!(err < 1e-8, "{ks:?} err={err:e}");
            assert!(plancherel_defect(&f).unwrap() < 1e-8);
        }
    }

    #[test]
    fn classical_fourier_of_bump() {
        // Oracle: the classical unitary Fourier transform of a shifted
        // Gaussian by independent Legendre quadrature on [-20, 20].
        let g = grid(&[0.0]);
        let f = GridFunction::from_real_fn(Arc::clone(&g), |x| (-(x[0] - 0.8).powi(2)).exp() * (1.0 + 0.3 * x[0]));
        let t = dunkl_transform(&f).unwrap();
        let rule = crate::quadrature::legendre_on(600, -20.0, 20.0);
        let mut worst: f64 = 0.0;
        for (i, v) in t.values.iter().enumerate() {
            let xi = g.point(i)[0];
            let re = rule.integrate(|x| (-(x - 0.8f64).powi(2)).exp() * (1.0 + 0.3 * x) * (xi * x).cos());
            let im = -rule.integrate(|x| (-(x - 0.8f64).powi(2)).exp() * (1.0 + 0.3 * x) * (xi * x).sin());
            let exact = Complex64::new(re, im) / (2.0 * std::f64::consts::PI).sqrt();
            worst = worst.max((v - exact).norm());
        }
        assert!(worst < 1e-8, "worst={worst:e}");
    }

    #[test]
    fn linearity_is_exact() {
        let g = grid(&[0.5]);
        let f = gaussian(&g);
        let a = dunkl_transform(&f.scale(Complex64::new(2.0, 0.0))).unwrap();
        let b = dunkl_transform(&f).unwrap().scale(Complex64::new(2.0, 0.0));
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x == y));
    }

    #[test]
    fn round_trips() {
        for ks in [vec![0.5], vec![0.5, 1.0]] {
            let g = grid(&ks);
            let f = gaussian(&g);
            assert!(inversion_defect(&f).unwrap() < 1e-7);
            let odd = GridFunction::from_real_fn(Arc::clone(&g), |x| x[0] * (-x.iter().map(|v| v * v).sum::<f64>()).exp());
            let err = inversion_defect(&odd).unwrap();
            assert!(err < 1e-6, "{ks:?} err={err:e}");
        }
    }

    #[test]
    fn zero_input_is_rejected() {
        let g = grid(&[0.5]);
        let f = GridFunction::zeros(g);
        assert_eq!(plancherel_defect(&f), Err(DunklError::ZeroNorm));
    }

    #[test]
    fn tail_violation_is_reported() {
        let g = grid(&[0.5]);
        let f = GridFunction::from_real_fn(g, |x| 1.0 / (1.0 + x[0] * x[0]));
        assert!(matches!(dunkl_transform(&f), Err(DunklError::TailMass { .. })));
    }

    #[test]
    fn grid_operator_matches_polynomial_oracle() {
        let s = ReflectionSetup::new(vec![0.5, 1.0]).unwrap();
        let g = Grid::default_for(&s).unwrap();
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        let p = RationalPoly::from_terms(
            2,
            vec![(vec![1, 0], q(1, 1)), (vec![2, 1], q(-1, 3)), (vec![0, 3], q(1, 2)), (vec![0, 0], q(2, 1))],
        );
        let f = GridFunction::from_real_fn(Arc::clone(&g), |x| p.eval(x) * (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp());
        for j in 0..2 {
            let t = grid_dunkl_op(j, &f).unwrap();
            let oracle = dunkl_coordinate_gaussian(&s, j, &p);
            let mut worst: f64 = 0.0;
            for (i, v) in t.values.iter().enumerate() {
                let x = g.point(i);
                if x.iter().all(|c| c.abs() < 4.0) {
                    let exact = oracle.eval(&x) * (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp();
                    worst = worst.max((v.re - exact).abs());
                }
            }
            assert!(worst < 1e-8, "j={j} worst={worst:e}");
        }
    }

    #[test]
    fn kernel_is_an_eigenfunction() {
        let s = ReflectionSetup::new(vec![0.5, 1.0]).unwrap();
        let g = Grid::default_for(&s).unwrap();
        let lam = [0.4, -0.3];
        // Damped so the sample has no tail; T_j(E h) with h radial Gaussian
        // equals (lambda_j - x_j) E h.
        let f = GridFunction::from_real_fn(Arc::clone(&g), |x| {
            let e = dunkl_kernel(&s, &[Complex64::new(lam[0], 0.0), Complex64::new(lam[1], 0.0)], x).unwrap().re;
            e * (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp()
        });
        for j in 0..2 {
            let t = grid_dunkl_op(j, &f).unwrap();
            let mut worst: f64 = 0.0;
            for (i, v) in t.values.iter().enumerate() {
                let x = g.point(i);
                let expect = (lam[j] - x[j]) * f.values[i].re;
                worst = worst.max((v.re - expect).abs());
            }
            assert!(worst < 1e-7, "j={j} worst={worst:e}");
        }
    }

    #[test]
    fn multiplier_identity_on_gaussians() {
        let g = grid(&[0.5, 1.0]);
        let f = GridFunction::from_real_fn(Arc::clone(&g), |x| x[1] * (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp());
        for j in 0..2 {
            let d = multiplier_identity_defect(j, &f).unwrap();
            assert!(d < 1e-6, "j={j} d={d:e}");
        }
        let d = directional_identity_defect(&[0.6, -0.8], &f).unwrap();
        assert!(d < 1e-6);
    }

    #[test]
    fn pointwise_evaluation_matches_grid() {
        let g = grid(&[0.5, 1.0]);
        let f = GridFunction::from_real_fn(Arc::clone(&g), |x| (x[0] - 0.2 * x[1]) * (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp());
        let spectrum = dunkl_transform(&f).unwrap();
        for &flat in &[5usize, 777, 4321] {
            let x = g.point(flat);
            let v = inverse_at(&spectrum, &x);
            assert!((v - f.values[flat]).norm() < 1e-8);
            let w = transform_at(&f, &x);
            assert!((w - spectrum.values[flat]).norm() < 1e-12);
        }
        let _ = QuadratureScheme::default_for(2);
    }

    #[test]
    fn orbit_evaluation_matches_pointwise() {
        let g = grid(&[0.5, 1.0]);
        let f = GridFunction::from_real_fn(Arc::clone(&g), |x| (x[0] - 0.2 * x[1] + 0.3) * (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp());
        let spectrum = dunkl_transform(&f).unwrap();
        let y = [0.7, -1.3];
        let orbit = inverse_on_orbit(&spectrum, &y);
        for (mask, v) in orbit.iter().enumerate() {
            let p: Vec<f64> = (0..2).map(|j| if mask >> j & 1 == 1 { -y[j] } else { y[j] }).collect();
            assert!((v - inverse_at(&spectrum, &p)).norm() < 1e-14);
        }
    }
}
