//! Test corpora, L^p ratio scans and the Riesz / Sobolev inequality checks.
//!
//! Every sup reported here is a lower bound for an operator norm: it is a
//! maximum over a finite corpus.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::functions::{RadialProfile, Term, TestFunction};
use crate::grid::{Grid, GridFunction};
use crate::polycalc::{dunkl_laplacian_gaussian, Poly};
use crate::riesz::{riesz_multiplier, riesz_potential_of_spectrum, riesz_symbol, PolarOptions};
use crate::rootsys::ReflectionSetup;
use crate::transform::{dunkl_transform, grid_dunkl_op};

/// Number of fixed families in every corpus.
pub const DETERMINISTIC: usize = 12;
/// Seeded random members added by [`Corpus::standard`].
pub const RANDOM: usize = 38;
pub const DEFAULT_SEED: u64 = 0x5eed_d0c1;

/// A reproducible list of test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub dimension: usize,
    pub seed: u64,
    pub members: Vec<TestFunction>,
}

impl Corpus {
    /// The 12 fixed families followed by 38 random superpositions.
    pub fn standard(dimension: usize, seed: u64) -> Self {
        let mut members = deterministic_families(dimension);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..RANDOM {
            members.push(random_member(dimension, i, &mut rng));
        }
        Self {
            dimension,
            seed,
            members,
        }
    }

    /// Only the fixed families.
    pub fn deterministic(dimension: usize) -> Self {
        Self {
            dimension,
            seed: 0,
            members: deterministic_families(dimension),
        }
    }

    pub fn sample(&self, grid: &Arc<Grid>) -> Vec<(String, GridFunction)> {
        self.members
            .iter()
            .map(|f| (f.name.clone(), GridFunction::from_fn(Arc::clone(grid), |x| f.eval(x))))
            .collect()
    }
}

fn along(n: usize, values: &[f64]) -> Vec<f64> {
    (0..n).map(|j| values[j % values.len()]).collect()
}

fn term(center: Vec<f64>, width: f64, coeff: [f64; 2], exponents: Vec<u32>, freq: Vec<f64>) -> Term {
    let n = center.len();
    Term {
        coeff,
        exponents,
        center,
        width: vec![width; n],
        freq,
    }
}

fn deterministic_families(n: usize) -> Vec<TestFunction> {
    let zero = vec![0.0; n];
    let e = |j: usize, p: u32| {
        let mut v = vec![0; n];
        v[j] = p;
        v
    };
    let last = n - 1;
    vec![
        TestFunction::new("gauss", vec![Term::gaussian(zero.clone(), 1.0, 1.0)]),
        TestFunction::new("gauss-shifted", vec![Term::gaussian(along(n, &[0.8, -0.5]), 0.7, 1.0)]),
        TestFunction::new("gauss-narrow", vec![Term::gaussian(along(n, &[0.3, 0.2]), 0.55, 1.0)]),
        TestFunction::new("gauss-wide", vec![Term::gaussian(zero.clone(), 1.2, 0.8)]),
        TestFunction::new(
            "modulated",
            vec![term(zero.clone(), 0.8, [1.0, 0.0], vec![0; n], along(n, &[1.5, 0.0]))],
        ),
        TestFunction::new(
            "modulated-shifted",
            vec![term(along(n, &[-0.6, 0.4]), 0.7, [0.6, 0.8], vec![0; n], along(n, &[-1.0, 0.8]))],
        ),
        TestFunction::new("odd", vec![term(zero.clone(), 1.0, [1.0, 0.0], e(0, 1), vec![0.0; n])]),
        TestFunction::new("even-quadratic", vec![term(zero.clone(), 1.0, [1.0, 0.0], e(last, 2), vec![0.0; n])]),
        TestFunction::new(
            "odd-even-mixture",
            vec![
                term(zero.clone(), 1.0, [0.5, 0.0], e(0, 3), vec![0.0; n]),
                Term::gaussian(zero.clone(), 1.0, -0.7),
            ],
        ),
        TestFunction::new(
            "bump-pair-odd",
            vec![
                Term::gaussian(along(n, &[1.2, 0.3]), 0.6, 1.0),
                Term::gaussian(along(n, &[-1.2, -0.3]), 0.6, -1.0),
            ],
        ),
        TestFunction::new(
            "bump-pair-even",
            vec![
                Term::gaussian(along(n, &[1.0, -0.7]), 0.6, 1.0),
                Term::gaussian(along(n, &[-1.0, 0.7]), 0.6, 1.0),
            ],
        ),
        TestFunction::new(
            "gauss-difference",
            vec![Term::gaussian(zero.clone(), 0.8, 1.0), Term::gaussian(zero, 1.2, -0.5)],
        ),
    ]
}

fn random_member(n: usize, index: usize, rng: &mut ChaCha8Rng) -> TestFunction {
    let count = rng.gen_range(1..=3);
    let terms = (0..count)
        .map(|_| {
            let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let width = rng.gen_range(0.6..1.2);
            let re = rng.gen_range(-1.0..1.0);
            let im = if rng.gen_bool(0.3) { rng.gen_range(-1.0..1.0) } else { 0.0 };
            let mut exponents = vec![0u32; n];
            for _ in 0..rng.gen_range(0..=2) {
                exponents[rng.gen_range(0..n)] += 1;
            }
            let freq: Vec<f64> = if rng.gen_bool(0.3) {
                (0..n).map(|_| rng.gen_range(-1.2..1.2)).collect()
            } else {
                vec![0.0; n]
            };
            term(center, width, [re, im], exponents, freq)
        })
        .collect();
    TestFunction::new(format!("random-{index:02}"), terms)
}

/// Splits `name[:key=value,...]` into the name and its parameters.
fn parse_spec(spec: &str) -> Result<(&str, Vec<(&str, f64)>)> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params = Vec::new();
    for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| DunklError::InvalidArgument(format!("parameter `{item}` is not key=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| DunklError::InvalidArgument(format!("parameter `{item}` has a non-numeric value")))?;
        params.push((k.trim(), v));
    }
    Ok((name.trim(), params))
}

/// A fixed corpus family by name, optionally as `name:dilate=t,scale=c`.
pub fn named_function(dimension: usize, spec: &str) -> Result<TestFunction> {
    if dimension == 0 {
        return Err(DunklError::EmptyDimension);
    }
    let (name, params) = parse_spec(spec)?;
    let mut f = deterministic_families(dimension)
        .into_iter()
        .find(|f| f.name == name)
        .ok_or_else(|| {
            let known: Vec<String> = deterministic_families(dimension).into_iter().map(|f| f.name).collect();
            DunklError::InvalidArgument(format!("unknown function `{name}`; known: {}", known.join(", ")))
        })?;
    for (k, v) in params {
        f = match k {
            "dilate" if v > 0.0 => f.dilated(v),
            "scale" => f.scaled(v),
            _ => return Err(DunklError::InvalidArgument(format!("bad function parameter {k}={v}"))),
        };
    }
    Ok(f)
}

/// A radial profile by name from [`radial_corpus`], or `gauss:width=s`.
pub fn named_profile(spec: &str) -> Result<RadialProfile> {
    let (name, params) = parse_spec(spec)?;
    if name == "gauss" {
        return match params.as_slice() {
            [] => Ok(RadialProfile::gaussian(1.0)),
            [("width", w)] if *w > 0.0 => Ok(RadialProfile::gaussian(*w)),
            _ => Err(DunklError::InvalidArgument(format!("bad profile parameters in `{spec}`"))),
        };
    }
    if !params.is_empty() {
        return Err(DunklError::InvalidArgument(format!("profile `{name}` takes no parameters")));
    }
    radial_corpus().into_iter().find(|p| p.name == name).ok_or_else(|| {
        let known: Vec<String> = radial_corpus().into_iter().map(|p| p.name).collect();
        DunklError::InvalidArgument(format!("unknown profile `{name}`; known: gauss, {}", known.join(", ")))
    })
}

/// Radial profiles for translation checks.
pub fn radial_corpus() -> Vec<RadialProfile> {
    vec![
        RadialProfile::gaussian(0.8),
        RadialProfile::gaussian(1.0),
        RadialProfile {
            name: "radial-mix".into(),
            amplitudes: vec![1.0, -0.5],
            quadratic: vec![0.3, 0.0],
            widths: vec![0.9, 0.6],
        },
        RadialProfile {
            name: "radial-ring".into(),
            amplitudes: vec![1.0],
            quadratic: vec![1.0],
            widths: vec![0.7],
        },
    ]
}

/// Polynomial p with f = p e^{-|x|^2/2}, when f has that form.
pub fn gaussian_polynomial(f: &TestFunction) -> Option<Poly<f64>> {
    let n = f.dimension();
    let ok = f.terms.iter().all(|t| {
        t.center.iter().all(|&c| c == 0.0)
            && t.width.iter().all(|&s| s == 1.0)
            && t.freq.iter().all(|&v| v == 0.0)
            && t.coeff[1] == 0.0
    });
    if !ok || f.terms.is_empty() {
        return None;
    }
    Some(Poly::from_terms(n, f.terms.iter().map(|t| (t.exponents.clone(), t.coeff[0]))))
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(DunklError::InvalidArgument(format!("exponent must be finite and > 1, got {p}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub function: String,
    pub p: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpScanReport {
    pub multiplicities: Vec<f64>,
    pub coordinate: usize,
    pub seed: u64,
    pub p_grid: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub sup_per_p: Vec<f64>,
}

/// ||R_j f||_p / ||f||_p over a sampled corpus, multiplier route.
pub fn lp_ratio_scan(j: usize, corpus: &[(String, GridFunction)], p_grid: &[f64], seed: u64) -> Result<LpScanReport> {
    for &p in p_grid {
        check_exponent(p)?;
    }
    let first = corpus
        .first()
        .ok_or_else(|| DunklError::InvalidArgument("empty corpus".into()))?;
    let multiplicities = first.1.grid.setup.multiplicities().to_vec();
    let mut rows = Vec::with_capacity(corpus.len() * p_grid.len());
    let mut sup_per_p = vec![0.0f64; p_grid.len()];
    for (name, f) in corpus {
        let rf = riesz_multiplier(j, f)?;
        for (i, &p) in p_grid.iter().enumerate() {
            let ratio = rf.norm_p(p) / f.norm_p(p);
            sup_per_p[i] = sup_per_p[i].max(ratio);
            rows.push(LpRow {
                function: name.clone(),
                p,
                ratio,
            });
        }
    }
    Ok(LpScanReport {
        multiplicities,
        coordinate: j,
        seed,
        p_grid: p_grid.to_vec(),
        rows,
        sup_per_p,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszInequalityRow {
    pub function: String,
    /// ||T_r T_s f||_p / ||Delta_k f||_p; absent when Delta_k f vanishes.
    pub ratio: Option<f64>,
    /// Relative L^2 defect of F(T_r T_s f) - m_r m_s F(-Delta_k f).
    pub factorization_defect: f64,
    /// Delta_k came from exact polynomial calculus.
    pub exact_laplacian: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszInequalityReport {
    pub r: usize,
    pub s: usize,
    pub p: f64,
    pub rows: Vec<RieszInequalityRow>,
    pub skipped: Vec<String>,
    pub sup_ratio: f64,
    pub max_factorization_defect: f64,
}

/// Delta_k f on the grid: polynomial calculus for p e^{-|x|^2/2}, grid
/// operators otherwise.
pub fn dunkl_laplacian_on_grid(grid: &Arc<Grid>, f: &TestFunction) -> Result<(GridFunction, bool)> {
    let setup = &grid.setup;
    if let Some(p) = gaussian_polynomial(f) {
        let q = dunkl_laplacian_gaussian(setup, &p);
        let g = GridFunction::from_real_fn(Arc::clone(grid), |x| {
            q.eval(x) * (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp()
        });
        return Ok((g, true));
    }
    let sampled = GridFunction::from_fn(Arc::clone(grid), |x| f.eval(x));
    let mut out = GridFunction::zeros(Arc::clone(grid));
    for j in 0..setup.dimension() {
        out = out.add(&grid_dunkl_op(j, &grid_dunkl_op(j, &sampled)?)?);
    }
    Ok((out, false))
}

pub fn riesz_inequality_check(
    grid: &Arc<Grid>,
    r: usize,
    s: usize,
    corpus: &[TestFunction],
    p: f64,
) -> Result<RieszInequalityReport> {
    check_exponent(p)?;
    let n = grid.dimension();
    if r >= n || s >= n {
        return Err(DunklError::InvalidArgument(format!("coordinates ({r}, {s}) out of range")));
    }
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for f in corpus {
        let sampled = GridFunction::from_fn(Arc::clone(grid), |x| f.eval(x));
        let trs = grid_dunkl_op(r, &grid_dunkl_op(s, &sampled)?)?;
        let (lap, exact) = dunkl_laplacian_on_grid(grid, f)?;
        let lap_norm = lap.norm_p(p);
        if lap_norm <= 1e-12 * sampled.norm_p(p).max(1.0) {
            skipped.push(f.name.clone());
            continue;
        }
        let lhs = dunkl_transform(&trs)?;
        let rhs = dunkl_transform(&lap)?.map(|xi, v| -v * riesz_symbol(r, xi) * riesz_symbol(s, xi));
        let scale = lhs.norm_p(2.0).max(rhs.norm_p(2.0));
        let factorization_defect = if scale > 0.0 { lhs.sub(&rhs).norm_p(2.0) / scale } else { 0.0 };
        rows.push(RieszInequalityRow {
            function: f.name.clone(),
            ratio: Some(trs.norm_p(p) / lap_norm),
            factorization_defect,
            exact_laplacian: exact,
        });
    }
    let sup_ratio = rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    let max_factorization_defect = rows.iter().map(|r| r.factorization_defect).fold(0.0, f64::max);
    Ok(RieszInequalityReport {
        r,
        s,
        p,
        rows,
        skipped,
        sup_ratio,
        max_factorization_defect,
    })
}

/// q with 1/q = 1/p - 1/D, D = 2 gamma + N, for 1 < p < D.
pub fn sobolev_exponent(setup: &ReflectionSetup, p: f64) -> Result<f64> {
    let d = setup.constants().homogeneous_dim;
    if !(p > 1.0 && p < d) {
        let q = 1.0 / (1.0 / p - 1.0 / d);
        return Err(DunklError::ExponentWindow { p, q });
    }
    Ok(1.0 / (1.0 / p - 1.0 / d))
}

/// ||f||_q / || |grad_k f| ||_p.
pub fn sobolev_ratio(f: &GridFunction, p: f64, q: f64) -> Result<f64> {
    let grid = &f.grid;
    let mut sq = vec![0.0; f.values.len()];
    for j in 0..grid.dimension() {
        let t = grid_dunkl_op(j, f)?;
        for (acc, v) in sq.iter_mut().zip(&t.values) {
            *acc += v.norm_sqr();
        }
    }
    let grad = GridFunction::new(Arc::clone(grid), sq.iter().map(|v| Complex64::new(v.sqrt(), 0.0)).collect());
    let den = grad.norm_p(p);
    if den == 0.0 {
        return Err(DunklError::ZeroNorm);
    }
    Ok(f.norm_p(q) / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevRow {
    pub function: String,
    /// Ratios at the dilations t in [`DILATIONS`].
    pub ratios: Vec<f64>,
    /// (max - min) / min over the dilations.
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    pub p: f64,
    pub q: f64,
    pub dilations: Vec<f64>,
    pub rows: Vec<SobolevRow>,
    pub sup_ratio: f64,
    pub max_drift: f64,
}

pub const DILATIONS: [f64; 3] = [0.5, 1.0, 2.0];

pub fn sobolev_inequality_check(grid: &Arc<Grid>, corpus: &[TestFunction], p: f64) -> Result<SobolevReport> {
    let q = sobolev_exponent(&grid.setup, p)?;
    let mut rows = Vec::with_capacity(corpus.len());
    for f in corpus {
        let ratios = DILATIONS
            .iter()
            .map(|&t| {
                let ft = f.dilated(t);
                sobolev_ratio(&GridFunction::from_fn(Arc::clone(grid), |x| ft.eval(x)), p, q)
            })
            .collect::<Result<Vec<f64>>>()?;
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        rows.push(SobolevRow {
            function: f.name.clone(),
            ratios,
            drift: (hi - lo) / lo,
        });
    }
    Ok(SobolevReport {
        p,
        q,
        dilations: DILATIONS.to_vec(),
        sup_ratio: rows.iter().flat_map(|r| r.ratios.iter().cloned()).fold(0.0, f64::max),
        max_drift: rows.iter().map(|r| r.drift).fold(0.0, f64::max),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<[f64; 2]>,
    pub exact: Vec<[f64; 2]>,
    /// Relative l^2 defect over the points.
    pub defect: f64,
}

/// f = I^1(sum_j R_j T_j f) at sample points. The inner sum is formed
/// spectrally from grid T_j f; the potential is the polar spatial integral,
/// taken at radii R/2 and R and extrapolated with the tail decay R^{-D}.
pub fn identity_check(grid: &Arc<Grid>, f: &TestFunction, points: &[Vec<f64>]) -> Result<IdentityReport> {
    let setup = &grid.setup;
    let d = setup.constants().homogeneous_dim;
    if d <= 1.0 {
        return Err(DunklError::InvalidArgument(format!(
            "the first-order potential needs 2 gamma + N > 1, got {d}"
        )));
    }
    let sampled = GridFunction::from_fn(Arc::clone(grid), |x| f.eval(x));
    let mut spectrum = GridFunction::zeros(Arc::clone(grid));
    for j in 0..setup.dimension() {
        let t = dunkl_transform(&grid_dunkl_op(j, &sampled)?)?;
        spectrum = spectrum.add(&t.map(|xi, v| v * riesz_symbol(j, xi)));
    }
    let radius = grid.axes[0].radius();
    let mut values = Vec::with_capacity(points.len());
    let mut exact = Vec::with_capacity(points.len());
    let mut num = Vec::with_capacity(points.len());
    let mut den = Vec::with_capacity(points.len());
    for x in points {
        let at = |r: f64| {
            let opts = PolarOptions {
                radius: Some(r),
                ..PolarOptions::default()
            };
            riesz_potential_of_spectrum(1.0, &spectrum, x, &opts)
        };
        let half = at(0.5 * radius)?;
        let full = at(radius)?;
        let v = full + (full - half) / (2f64.powf(d) - 1.0);
        let e = f.eval(x);
        num.push((v - e).norm_sqr());
        den.push(e.norm_sqr());
        values.push([v.re, v.im]);
        exact.push([e.re, e.im]);
    }
    let den: f64 = den.iter().sum();
    if den == 0.0 {
        return Err(DunklError::ZeroNorm);
    }
    Ok(IdentityReport {
        points: points.to_vec(),
        values,
        exact,
        defect: (num.iter().sum::<f64>() / den).sqrt(),
    })
}
