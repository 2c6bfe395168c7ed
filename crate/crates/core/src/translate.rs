//! Dunkl translation by two routes.
//!
//! Spectral: F(tau_x f)(xi) = E_k(i x, xi) F f(xi). Radial: for f(y) = f~(|y|),
//! tau_x f(y) = int f~(sqrt(|x|^2 + |y|^2 + 2⟨y, eta⟩)) dmu_x(eta).
//! With k = 0 both reduce to tau_x f(y) = f(x + y).

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DunklError, Result};
use crate::functions::RadialProfile;
use crate::grid::{Grid, GridFunction};
use crate::kernel::{dunkl_kernel_imag, IntertwiningMeasure};
use crate::rootsys::ReflectionSetup;
use crate::transform::{dunkl_transform, grid_dunkl_op, inverse_at, inverse_dunkl_transform_unchecked};

/// Starting number of mu_x nodes per coordinate for the radial route.
pub const RADIAL_START_NODES: usize = 64;
/// Largest number of mu_x nodes per coordinate the doubling may reach.
pub const RADIAL_MAX_NODES: usize = 1024;
/// Doubling stops once the value changes by less than this.
pub const RADIAL_TOL: f64 = 1e-9;

fn check_base(grid: &Grid, x: &[f64]) -> Result<()> {
    if x.len() != grid.dimension() {
        return Err(DunklError::DimensionMismatch {
            expected: grid.dimension(),
            got: x.len(),
        });
    }
    grid.setup.check_point(x)
}

/// Spectrum of tau_x f on the grid.
pub fn translated_spectrum(x: &[f64], f: &GridFunction) -> Result<GridFunction> {
    check_base(&f.grid, x)?;
    let setup = f.grid.setup.clone();
    Ok(dunkl_transform(f)?.map(|xi, v| v * dunkl_kernel_imag(&setup, x, xi)))
}

/// tau_x f sampled on the grid of f.
pub fn translate_spectral(x: &[f64], f: &GridFunction) -> Result<GridFunction> {
    Ok(inverse_dunkl_transform_unchecked(&translated_spectrum(x, f)?))
}

/// tau_x f at arbitrary points, sharing one transform.
pub fn translate_spectral_at(x: &[f64], f: &GridFunction, ys: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    let spectrum = translated_spectrum(x, f)?;
    Ok(ys.iter().map(|y| inverse_at(&spectrum, y)).collect())
}

/// Radial-route evaluator for a fixed base point and profile.
#[derive(Debug, Clone)]
pub struct RadialTranslator {
    measure: IntertwiningMeasure,
    profile: RadialProfile,
    xnorm2: f64,
    envelope: Vec<f64>,
}

const ENVELOPE_STEP: f64 = 0.01;
const ENVELOPE_LEN: usize = 8001;

impl RadialTranslator {
    pub fn new(setup: &ReflectionSetup, x: &[f64], profile: &RadialProfile, npts: usize) -> Result<Self> {
        let measure = IntertwiningMeasure::new(setup, x, npts)?;
        // envelope[i] = sup_{t >= i h} |f~(t)|, used to skip exact zeros far out.
        let mut envelope: Vec<f64> = (0..ENVELOPE_LEN)
            .map(|i| profile.eval(i as f64 * ENVELOPE_STEP).abs())
            .collect();
        for i in (0..ENVELOPE_LEN - 1).rev() {
            envelope[i] = envelope[i].max(envelope[i + 1]);
        }
        Ok(Self {
            measure,
            profile: profile.clone(),
            xnorm2: x.iter().map(|v| v * v).sum(),
            envelope,
        })
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.measure.axes.iter().map(|a| a.nodes.len()).max().unwrap_or(1)
    }

    fn negligible(&self, y: &[f64]) -> bool {
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let gap = (ynorm - self.xnorm2.sqrt()).abs();
        let i = (gap / ENVELOPE_STEP).floor() as usize;
        // One step of slack against the sampled envelope.
        i >= 1 && i - 1 < ENVELOPE_LEN && self.envelope[i - 1] < 1e-30 * self.envelope[0].max(1e-300)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        if self.negligible(y) {
            return 0.0;
        }
        let base = self.xnorm2 + y.iter().map(|v| v * v).sum::<f64>();
        self.measure.integrate(|eta| {
            let dot: f64 = y.iter().zip(eta).map(|(a, b)| a * b).sum();
            self.profile.eval_sq(base + 2.0 * dot)
        })
    }
}

/// Radial route at a single point with a fixed number of mu_x nodes.
pub fn translate_radial_fixed(
    setup: &ReflectionSetup,
    x: &[f64],
    profile: &RadialProfile,
    y: &[f64],
    npts: usize,
) -> Result<f64> {
    Ok(RadialTranslator::new(setup, x, profile, npts)?.eval(y))
}

/// Radial route at a single point; mu_x nodes are doubled from 64 until the
/// value moves by less than 1e-9 (relative to max(1, |value|)).
pub fn translate_radial(setup: &ReflectionSetup, x: &[f64], profile: &RadialProfile, y: &[f64]) -> Result<f64> {
    if y.len() != x.len() {
        return Err(DunklError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    setup.check_point(y)?;
    let mut n = RADIAL_START_NODES;
    let mut prev = translate_radial_fixed(setup, x, profile, y, n)?;
    while n < RADIAL_MAX_NODES {
        n *= 2;
        let next = translate_radial_fixed(setup, x, profile, y, n)?;
        if (next - prev).abs() < RADIAL_TOL * prev.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

/// Node count for a whole grid: doubled until every probe point is stable.
fn calibrated_nodes(setup: &ReflectionSetup, x: &[f64], profile: &RadialProfile, probes: &[Vec<f64>]) -> Result<usize> {
    let mut n = RADIAL_START_NODES;
    let mut prev = RadialTranslator::new(setup, x, profile, n)?;
    while n < RADIAL_MAX_NODES {
        let next = RadialTranslator::new(setup, x, profile, 2 * n)?;
        let stable = probes.iter().all(|y| {
            let a = prev.eval(y);
            let b = next.eval(y);
            (a - b).abs() < RADIAL_TOL * a.abs().max(1.0)
        });
        if stable {
            return Ok(n);
        }
        n *= 2;
        prev = next;
    }
    Ok(n)
}

fn probe_points(x: &[f64], count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7261_6469_616c);
    let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut out = vec![x.iter().map(|v| -v).collect::<Vec<f64>>(), x.to_vec()];
    while out.len() < count {
        let r = rng.gen_range(0.0..xn + 3.0);
        let mut d: Vec<f64> = x.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dn = d.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        d.iter_mut().for_each(|v| *v *= r / dn);
        out.push(d);
    }
    out
}

/// tau_x f sampled on a grid by the radial route.
pub fn translate_radial_grid(grid: &Arc<Grid>, x: &[f64], profile: &RadialProfile) -> Result<GridFunction> {
    check_base(grid, x)?;
    let setup = &grid.setup;
    let n = calibrated_nodes(setup, x, profile, &probe_points(x, 12))?;
    let tr = RadialTranslator::new(setup, x, profile, n)?;
    Ok(GridFunction::from_real_fn(Arc::clone(grid), |y| tr.eval(y)))
}

/// Relative L^2 gap between the spectral and radial routes on the grid.
pub fn route_agreement(grid: &Arc<Grid>, x: &[f64], profile: &RadialProfile) -> Result<f64> {
    let f = GridFunction::from_real_fn(Arc::clone(grid), |y| profile.eval_point(y));
    let spectral = translate_spectral(x, &f)?;
    let radial = translate_radial_grid(grid, x, profile)?;
    Ok(spectral.relative_l2_error(&radial))
}

/// max |tau_x f(y) - tau_y f(x)| over the pairs, both by the radial route.
pub fn check_symmetry(setup: &ReflectionSetup, profile: &RadialProfile, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (x, y) in pairs {
        let a = translate_radial(setup, x, profile, y)?;
        let b = translate_radial(setup, y, profile, x)?;
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

/// max_j ||T_j tau_x f - tau_x T_j f|| / ||tau_x T_j f|| on the grid.
pub fn check_op_commutation(x: &[f64], f: &GridFunction) -> Result<f64> {
    let translated = translate_spectral(x, f)?;
    let mut worst: f64 = 0.0;
    for j in 0..f.grid.dimension() {
        let lhs = grid_dunkl_op(j, &translated)?;
        let rhs = translate_spectral(x, &grid_dunkl_op(j, f)?)?;
        let den = rhs.norm_p(2.0).max(f.norm_p(2.0) * 1e-12);
        worst = worst.max(lhs.sub(&rhs).norm_p(2.0) / den);
    }
    Ok(worst)
}

/// |int tau_x f(-y) g(y) dm_k - int f(y) tau_x g(-y) dm_k|.
pub fn check_duality(x: &[f64], f: &GridFunction, g: &GridFunction) -> Result<f64> {
    let tf = translate_spectral(x, f)?.negated();
    let tg = translate_spectral(x, g)?.negated();
    let bilinear = |a: &GridFunction, b: &GridFunction| -> Complex64 {
        let terms: Vec<Complex64> = (0..a.values.len())
            .map(|i| a.values[i] * b.values[i] * a.grid.weight(i))
            .collect();
        terms.iter().sum()
    };
    Ok((bilinear(&tf, g) - bilinear(f, &tg)).norm())
}

/// ||tau_x f||_p / ||f||_p for radial f from radial-route samples, 1 <= p <= 2.
pub fn contraction_ratio(grid: &Arc<Grid>, x: &[f64], profile: &RadialProfile, p: f64) -> Result<f64> {
    Ok(contraction_ratios(grid, x, profile, &[p])?[0])
}

/// Several exponents sharing one set of samples.
pub fn contraction_ratios(grid: &Arc<Grid>, x: &[f64], profile: &RadialProfile, ps: &[f64]) -> Result<Vec<f64>> {
    for &p in ps {
        if !(1.0..=2.0).contains(&p) {
            return Err(DunklError::InvalidArgument(format!(
                "contraction is only asserted for 1 <= p <= 2, got {p}"
            )));
        }
    }
    let f = GridFunction::from_real_fn(Arc::clone(grid), |y| profile.eval_point(y));
    let translated = translate_radial_grid(grid, x, profile)?;
    let norm = f.norm_p(2.0);
    if norm == 0.0 {
        return Err(DunklError::ZeroNorm);
    }
    Ok(ps.iter().map(|&p| translated.norm_p(p) / f.norm_p(p)).collect())
}
