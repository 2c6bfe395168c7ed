//! Acceptance checks, one function per criterion. Each returns a list of
//! measurements (value against a limit) so that reports are plain data; the
//! acceptance test target and `dunkl selftest` both drive these.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::czd::{constant_budget, cz_decompose, doubling_ratio, doubling_survey, random_mesh, CzMesh};
use crate::error::Result;
use crate::functions::{RadialProfile, Term, TestFunction};
use crate::grid::{Grid, GridFunction};
use crate::harness::{
    identity_check, lp_ratio_scan, radial_corpus, riesz_inequality_check, sobolev_inequality_check, Corpus,
};
use crate::kernel::{dunkl_kernel_real, IntertwiningMeasure};
use crate::polar::{PolarOptions, PolarSpectrum};
use crate::quadrature::legendre_on;
use crate::riesz::{
    default_eps, hormander_estimate, riesz_kernel_route, riesz_multiplier_at, riesz_multiplier_polar,
    riesz_potential, riesz_truncated, HormanderOptions, KernelField, KernelRouteOptions,
};
use crate::rootsys::ReflectionSetup;
use crate::special::gamma;
use crate::transform::{dunkl_transform, inversion_defect, multiplier_identity_defect, plancherel_defect};
use crate::translate::{
    check_duality, check_op_commutation, check_symmetry, contraction_ratios, route_agreement, translate_radial,
    translate_spectral,
};

/// Limits used by the criteria.
pub mod limits {
    pub const CLASSICAL: f64 = 1e-6;
    pub const CLASSICAL_TRANSFORM: f64 = 1e-8;
    pub const CLASSICAL_SECONDS: f64 = 60.0;
    pub const THREE_ROUTE: f64 = 1e-4;
    pub const THREE_ROUTE_SECONDS: f64 = 600.0;
    pub const TRANSFORM: f64 = 1e-6;
    pub const TRANSLATION_ROUTES: f64 = 1e-6;
    pub const TRANSLATION_IDENTITIES: f64 = 1e-5;
    /// Allowed excess of the contraction ratio over 1.
    pub const CONTRACTION: f64 = 1e-6;
    pub const INTERTWINING: f64 = 1e-10;
    pub const DRIFT: f64 = 0.05;
    pub const DOUBLING_AT_ORIGIN: f64 = 1e-12;
    /// Allowed excess of the p = 2 ratio over 1.
    pub const P_TWO: f64 = 1e-6;
    pub const FACTORIZATION: f64 = 1e-5;
    pub const IDENTITY: f64 = 1e-3;
}

/// Name of the wall-clock measurements.
pub const RUNTIME: &str = "runtime seconds";

/// Titles of the nine criteria, indexed from 1.
pub const TITLES: [&str; 9] = [
    "classical reduction",
    "three-route Riesz agreement",
    "Plancherel, inversion and Dunkl-operator defects",
    "translation routes and identities",
    "intertwining oracle",
    "Hormander estimator",
    "CZ decomposition and doubling",
    "L^p scans and inequalities",
    "determinism",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub setup: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Measurement {
    /// Passes when value <= limit (NaN fails).
    pub fn at_most(name: impl Into<String>, setup: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            setup: setup.to_string(),
            value,
            limit,
            pass: value <= limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: usize,
    pub title: String,
    pub pass: bool,
    pub measurements: Vec<Measurement>,
    /// Wall time; kept out of the serialized report so reports stay comparable.
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionReport {
    pub fn new(id: usize, measurements: Vec<Measurement>, seconds: f64) -> Self {
        Self {
            id,
            title: TITLES[id - 1].to_string(),
            pass: !measurements.is_empty() && measurements.iter().all(|m| m.pass),
            measurements,
            seconds,
        }
    }

    /// The failing measurement with the largest value / limit; passing
    /// runtimes are not ranked.
    pub fn worst(&self) -> Option<&Measurement> {
        let key = |m: &Measurement| if m.limit > 0.0 { m.value / m.limit } else { m.value };
        self.measurements
            .iter()
            .filter(|m| !m.pass)
            .chain(self.measurements.iter().filter(|m| m.name != RUNTIME))
            .max_by(|a, b| key(a).total_cmp(&key(b)).then(b.pass.cmp(&a.pass)))
    }

    /// One-line summary.
    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let detail = match self.worst() {
            Some(m) => format!("worst {} [{}] = {:.3e} (limit {:.1e})", m.name, m.setup, m.value, m.limit),
            None => "no measurements".into(),
        };
        format!(
            "criterion {} {verdict}: {} | {} checks | {detail} | {:.1} s",
            self.id,
            self.title,
            self.measurements.len(),
            self.seconds
        )
    }
}

/// Sample counts; `full` follows the acceptance sizes, `quick` is for smoke runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub three_route_functions: usize,
    pub three_route_points: usize,
    pub translation_samples: usize,
    pub intertwining_samples: usize,
    pub hormander_pairs: usize,
    pub cz_samples: usize,
    pub doubling_samples: usize,
    pub identity_points: usize,
}

impl SuiteOptions {
    pub fn full(seed: u64) -> Self {
        Self {
            seed,
            three_route_functions: 5,
            three_route_points: 4,
            translation_samples: 30,
            intertwining_samples: 20,
            hormander_pairs: 100,
            cz_samples: 20,
            doubling_samples: 200,
            identity_points: 2,
        }
    }

    pub fn quick(seed: u64) -> Self {
        Self {
            seed,
            three_route_functions: 1,
            three_route_points: 2,
            translation_samples: 3,
            intertwining_samples: 5,
            hormander_pairs: 3,
            cz_samples: 3,
            doubling_samples: 20,
            identity_points: 1,
        }
    }
}

/// (1, 0), (1, 0.5), (1, 2.5), (2, (0.5, 1)).
pub fn standard_setups() -> Vec<ReflectionSetup> {
    [vec![0.0], vec![0.5], vec![2.5], vec![0.5, 1.0]]
        .into_iter()
        .map(|k| ReflectionSetup::new(k).expect("valid multiplicities"))
        .collect()
}

pub fn label(setup: &ReflectionSetup) -> String {
    let ks: Vec<String> = setup.multiplicities().iter().map(|k| format!("{k}")).collect();
    format!("k=({})", ks.join(","))
}

fn rng_for(seed: u64, criterion: u64, setup: &ReflectionSetup) -> ChaCha8Rng {
    let mut h = seed ^ criterion.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for k in setup.multiplicities() {
        h = h.rotate_left(13) ^ k.to_bits();
    }
    h ^= setup.dimension() as u64;
    ChaCha8Rng::seed_from_u64(h)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Runs criterion `id` (1..=9) on one setup.
pub fn run(id: usize, setup: &ReflectionSetup, opts: &SuiteOptions) -> Result<Vec<Measurement>> {
    match id {
        1 => classical_reduction(setup.dimension(), opts),
        2 => three_routes(setup, opts),
        3 => transform_gates(setup),
        4 => translation(setup, opts),
        5 => intertwining(setup, opts),
        6 => hormander(setup, opts),
        7 => calderon_zygmund(setup, opts),
        8 => lp_and_inequalities(setup, opts),
        9 => determinism(setup, opts),
        _ => Err(crate::error::DunklError::InvalidArgument(format!("no criterion {id}"))),
    }
}

/// Runs criterion `id` over several setups and times it.
pub fn criterion(id: usize, setups: &[ReflectionSetup], opts: &SuiteOptions) -> CriterionReport {
    let start = Instant::now();
    let mut all = Vec::new();
    for s in setups {
        match run(id, s, opts) {
            Ok(m) => all.extend(m),
            Err(e) => all.push(Measurement {
                name: format!("error: {e}"),
                setup: label(s),
                value: f64::NAN,
                limit: 0.0,
                pass: false,
            }),
        }
    }
    CriterionReport::new(id, all, start.elapsed().as_secs_f64())
}

/// Classical Riesz kernel Gamma((N+1)/2) pi^{-(N+1)/2} (x - y)_j / |x - y|^{N+1}.
fn classical_riesz_kernel(j: usize, x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    gamma(0.5 * (n + 1.0)) / PI.powf(0.5 * (n + 1.0)) * (x[j] - y[j]) / d.powf(n + 1.0)
}

/// J_1 by Bessel's integral (1/pi) int_0^pi cos(t - z sin t) dt.
fn bessel_j1_integral(z: f64) -> f64 {
    let n = 40 + (4.0 * z.abs()) as usize;
    legendre_on(n, 0.0, PI).integrate(|t| (t - z * t.sin()).cos()) / PI
}

/// R_j of e^{-|x|^2/2} in the plane: (x_j / |x|) int_0^inf e^{-r^2/2} J_1(|x| r) r dr.
fn classical_riesz_gaussian_2d(j: usize, x: &[f64]) -> f64 {
    let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if rho == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in 0..12 {
        let rule = legendre_on(40, k as f64, k as f64 + 1.0);
        acc += rule.integrate(|r| (-0.5 * r * r).exp() * bessel_j1_integral(rho * r) * r);
    }
    x[j] / rho * acc
}

/// Dawson-based Hilbert transform of e^{-x^2}: (2 / sqrt pi) int_0^x e^{t^2 - x^2} dt.
fn classical_hilbert_gaussian(x: f64) -> f64 {
    2.0 / PI.sqrt() * legendre_on(60, 0.0, x).integrate(|t| (t * t - x * x).exp())
}

/// Dyadic stopping time on a uniform mesh, written directly on cell values.
fn classical_cz_oracle(values: &[f64], n: usize, per_axis: usize, lambda: f64) -> Vec<(Vec<usize>, usize)> {
    fn mean(values: &[f64], n: usize, per_axis: usize, lower: &[usize], side: usize) -> f64 {
        let count = side.pow(n as u32);
        let mut acc = 0.0;
        for i in 0..count {
            let mut flat = 0;
            let mut rest = i;
            for a in 0..n {
                let off = rest % side;
                rest /= side;
                flat = flat * per_axis + lower[a] + off;
            }
            acc += values[flat];
        }
        acc / count as f64
    }
    fn descend(
        values: &[f64],
        n: usize,
        per_axis: usize,
        lower: &[usize],
        side: usize,
        lambda: f64,
        out: &mut Vec<(Vec<usize>, usize)>,
    ) {
        if side == 1 {
            return;
        }
        let half = side / 2;
        for mask in 0..(1usize << n) {
            let child: Vec<usize> = (0..n).map(|a| lower[a] + if mask >> a & 1 == 1 { half } else { 0 }).collect();
            if mean(values, n, per_axis, &child, half) > lambda {
                out.push((child, half));
            } else {
                descend(values, n, per_axis, &child, half, lambda, out);
            }
        }
    }
    let mut out = Vec::new();
    descend(values, n, per_axis, &vec![0; n], per_axis, lambda, &mut out);
    out.sort();
    out
}

fn classical_reduction(n: usize, opts: &SuiteOptions) -> Result<Vec<Measurement>> {
    let start = Instant::now();
    let setup = ReflectionSetup::classical(n)?;
    let name = label(&setup);
    let tag = name.as_str();
    let grid = Grid::default_for(&setup)?;
    let mut rng = rng_for(opts.seed, 1, &setup);
    let mut out = Vec::new();

    // Transform of a modulated shifted Gaussian: e^{-|xi - b|^2/2} e^{-i a.(xi - b)}.
    let a: Vec<f64> = (0..n).map(|i| 0.7 - 1.1 * i as f64).collect();
    let b: Vec<f64> = (0..n).map(|i| -0.4 + 0.9 * i as f64).collect();
    let f = GridFunction::from_fn(Arc::clone(&grid), |x| {
        let d2: f64 = x.iter().zip(&a).map(|(u, v)| (u - v) * (u - v)).sum();
        let phase: f64 = x.iter().zip(&b).map(|(u, v)| u * v).sum();
        Complex64::from_polar((-0.5 * d2).exp(), phase)
    });
    let t = dunkl_transform(&f)?;
    let mut worst: f64 = 0.0;
    for (i, v) in t.values.iter().enumerate() {
        let xi = grid.point(i);
        let d2: f64 = xi.iter().zip(&b).map(|(u, v)| (u - v) * (u - v)).sum();
        let phase: f64 = -xi.iter().zip(&b).zip(&a).map(|((u, v), w)| (u - v) * w).sum::<f64>();
        worst = worst.max((v - Complex64::from_polar((-0.5 * d2).exp(), phase)).norm());
    }
    out.push(Measurement::at_most("transform vs closed form", tag, worst, limits::CLASSICAL_TRANSFORM));

    // Translation is the shift y -> f(x + y) on both routes.
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let shifted = translate_spectral(&x, &f)?;
    let exact = f.map(|y, _| {
        let s: Vec<f64> = y.iter().zip(&x).map(|(u, v)| u + v).collect();
        let d2: f64 = s.iter().zip(&a).map(|(u, v)| (u - v) * (u - v)).sum();
        let phase: f64 = s.iter().zip(&b).map(|(u, v)| u * v).sum();
        Complex64::from_polar((-0.5 * d2).exp(), phase)
    });
    out.push(Measurement::at_most(
        "spectral translation vs shift",
        tag,
        shifted.relative_l2_error(&exact),
        limits::CLASSICAL,
    ));
    let profile = RadialProfile::gaussian(0.9);
    let mut worst: f64 = 0.0;
    for _ in 0..8 {
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let v = translate_radial(&setup, &x, &profile, &y)?;
        let s: Vec<f64> = y.iter().zip(&x).map(|(u, v)| u + v).collect();
        let e = profile.eval_point(&s);
        worst = worst.max((v - e).abs() / e.abs().max(1e-300));
    }
    out.push(Measurement::at_most("radial translation vs shift", tag, worst, limits::CLASSICAL));

    // Riesz kernel.
    let field = KernelField::new(&setup, 8);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        for j in 0..n {
            let e = classical_riesz_kernel(j, &x, &y);
            let v = field.operator_kernel(j, &x, &y)?;
            worst = worst.max((v - e).abs() / e.abs().max(1e-300));
        }
    }
    out.push(Measurement::at_most("Riesz kernel vs classical kernel", tag, worst, limits::CLASSICAL));

    // Riesz transform of a Gaussian by the multiplier and truncated routes.
    let (g, points, oracle): (GridFunction, Vec<Vec<f64>>, Box<dyn Fn(&[f64]) -> f64>) = if n == 1 {
        (
            GridFunction::from_real_fn(Arc::clone(&grid), |x| (-x[0] * x[0]).exp()),
            vec![vec![0.3], vec![1.2], vec![-2.0]],
            Box::new(|x: &[f64]| classical_hilbert_gaussian(x[0])),
        )
    } else {
        (
            GridFunction::from_real_fn(Arc::clone(&grid), |x| (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp()),
            vec![[0.8, -0.3, 0.0, 0.0, 0.0][..n].to_vec(), [-1.5, 0.6, 0.2, 0.0, 0.0][..n].to_vec()],
            Box::new(|x: &[f64]| classical_riesz_gaussian_2d(0, x)),
        )
    };
    if n <= 2 {
        let m = riesz_multiplier_at(0, &g, &points)?;
        let exact: Vec<f64> = points.iter().map(|p| oracle(p)).collect();
        let scale = exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let worst = m.iter().zip(&exact).map(|(v, e)| (v - e).norm() / scale).fold(0.0, f64::max);
        out.push(Measurement::at_most("Riesz multiplier vs classical", tag, worst, limits::CLASSICAL));
        let tr = riesz_truncated(0, &g, &points[0], &default_eps(6), &PolarOptions::default())?;
        out.push(Measurement::at_most(
            "truncated Riesz vs classical",
            tag,
            (tr.limit - exact[0]).norm() / scale,
            limits::CLASSICAL,
        ));
    }

    // Riesz potential of e^{-|y|^2/2} at 0: 2^{-beta/2} Gamma((N - beta)/2) / Gamma(N/2).
    let h = GridFunction::from_real_fn(Arc::clone(&grid), |x| (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp());
    let origin = vec![0.0; n];
    let mut worst: f64 = 0.0;
    for beta in [0.25, 0.5, 0.75].iter().map(|b| b * n as f64) {
        let v = riesz_potential(beta, &h, &origin, &PolarOptions::default())?;
        let e = 2f64.powf(-0.5 * beta) * gamma(0.5 * (n as f64 - beta)) / gamma(0.5 * n as f64);
        worst = worst.max(rel(v, Complex64::new(e, 0.0)));
    }
    out.push(Measurement::at_most("Riesz potential vs closed form", tag, worst, limits::CLASSICAL));

    // Decomposition against the plain recursion.
    let level = if n == 1 { 10 } else { 6 };
    let mut mismatches = 0usize;
    for _ in 0..4 {
        let mesh = random_mesh(&setup, 8.0, level, &mut rng)?;
        let lambda = mesh.top_average() * 10f64.powf(rng.gen_range(0.05..1.5));
        let d = cz_decompose(&mesh, lambda)?;
        let abs: Vec<f64> = mesh.values.iter().map(|v| v.norm()).collect();
        let expected = classical_cz_oracle(&abs, n, mesh.cells_per_axis(), lambda);
        let mut got: Vec<(Vec<usize>, usize)> = d.bad.iter().map(|b| (b.lower.clone(), b.cells)).collect();
        got.sort();
        if got != expected {
            mismatches += 1;
        }
    }
    out.push(Measurement::at_most("CZ cubes vs plain recursion (mismatches)", tag, mismatches as f64, 0.0));

    // Lebesgue doubling.
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let r = 10f64.powf(rng.gen_range(-2.0..1.0));
        let v = doubling_ratio(&setup, &x, r)?;
        worst = worst.max((v / 2f64.powi(n as i32) - 1.0).abs());
    }
    out.push(Measurement::at_most("Lebesgue doubling vs 2^N", tag, worst, limits::CLASSICAL));
    out.push(Measurement::at_most(
        RUNTIME,
        tag,
        start.elapsed().as_secs_f64().round(),
        limits::CLASSICAL_SECONDS,
    ));
    Ok(out)
}

/// Separated (f, x) configurations: Gaussian sums near the origin, x outside
/// the orbit of the effective support but inside the grid window.
pub fn three_route_configurations(
    setup: &ReflectionSetup,
    functions: usize,
    points: usize,
    seed: u64,
) -> Vec<(TestFunction, Vec<Vec<f64>>)> {
    let n = setup.dimension();
    let mut rng = rng_for(seed, 2, setup);
    (0..functions)
        .map(|i| {
            let terms: Vec<Term> = (0..rng.gen_range(1..3))
                .map(|_| {
                    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.6..0.6)).collect();
                    let mut t = Term::gaussian(c, rng.gen_range(0.5..0.6), rng.gen_range(0.5..1.5));
                    t.coeff[1] = rng.gen_range(-0.5..0.5);
                    t
                })
                .collect();
            let f = TestFunction::new(format!("route-{i}"), terms);
            let mut xs = Vec::new();
            while xs.len() < points {
                let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm < 0.2 {
                    continue;
                }
                let r = rng.gen_range(7.0..8.5);
                let x: Vec<f64> = dir.iter().map(|v| r * v / norm).collect();
                if f.orbit_separation(setup, &x) > 0.2 {
                    xs.push(x);
                }
            }
            (f, xs)
        })
        .collect()
}

fn three_routes(setup: &ReflectionSetup, opts: &SuiteOptions) -> Result<Vec<Measurement>> {
    let start = Instant::now();
    let tag = label(setup);
    let n = setup.dimension();
    let grid = Grid::default_for(setup)?;
    let field = KernelField::new(setup, if n == 1 { 64 } else { 24 });
    let configs = three_route_configurations(setup, opts.three_route_functions, opts.three_route_points, opts.seed);
    let mut out = Vec::new();
    let mut count = 0;
    for (f, xs) in &configs {
        let sampled = GridFunction::from_fn(Arc::clone(&grid), |x| f.eval(x));
        let polar = PolarSpectrum::new(&sampled, 0.0, &PolarOptions::default())?;
        for (i, x) in xs.iter().enumerate() {
            let j = i % n;
            let m = riesz_multiplier_polar(j, &polar, std::slice::from_ref(x))[0];
            let t = riesz_truncated(j, &sampled, x, &default_eps(6), &PolarOptions::default())?.limit;
            let k = riesz_kernel_route(&field, j, f, x, &KernelRouteOptions::default())?;
            let name = format!("{} j={j} x={:?}", f.name, x.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>());
            out.push(Measurement::at_most(format!("multiplier vs truncated, {name}"), &tag, rel(t, m), limits::THREE_ROUTE));
            out.push(Measurement::at_most(format!("multiplier vs kernel, {name}"), &tag, rel(k, m), limits::THREE_ROUTE));
            count += 1;
        }
    }
    out.push(Measurement::at_most(
        "configurations short of request",
        &tag,
        (opts.three_route_functions * opts.three_route_points - count) as f64,
        0.0,
    ));
    out.push(Measurement::at_most(
        RUNTIME,
        &tag,
        start.elapsed().as_secs_f64().round(),
        limits::THREE_ROUTE_SECONDS,
    ));
    Ok(out)
}

fn transform_gates(setup: &ReflectionSetup) -> Result<Vec<Measurement>> {
    let tag = label(setup);
    let grid = Grid::default_for(setup)?;
    let mut out = Vec::new();
    for (name, f) in Corpus::deterministic(setup.dimension()).sample(&grid) {
        out.push(Measurement::at_most(format!("Plancherel {name}"), &tag, plancherel_defect(&f)?, limits::TRANSFORM));
        out.push(Measurement::at_most(format!("inversion {name}"), &tag, inversion_defect(&f)?, limits::TRANSFORM));
        for j in 0..setup.dimension() {
            out.push(Measurement::at_most(
                format!("T_{j} multiplier identity {name}"),
                &tag,
                multiplier_identity_defect(j, &f)?,
                limits::TRANSFORM,
            ));
        }
    }
    Ok(out)
}

fn translation(setup: &ReflectionSetup, opts: &SuiteOptions) -> Result<Vec<Measurement>> {
    let tag = label(setup);
    let n = setup.dimension();
    let grid = Grid::default_for(setup)?;
    let mut rng = rng_for(opts.seed, 4, setup);
    let corpus = radial_corpus();
    let mut out = Vec::new();
    let mut worst: f64 = 0.0;
    for p in &corpus {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
        worst = worst.max(route_agreement(&grid, &x, p)?);
    }
    out.push(Measurement::at_most("spectral vs radial route", &tag, worst, limits::TRANSLATION_ROUTES));

    let f = GridFunction::from_real_fn(Arc::clone(&grid), |y| {
        (-y.iter().enumerate().map(|(i, v)| (v - 0.3 + 0.2 * i as f64).powi(2)).sum::<f64>()).exp()
    });
    let g = GridFunction::from_real_fn(Arc::clone(&grid), |y| {
        y[0] * (-y.iter().map(|v| (v + 0.5) * (v + 0.5)).sum::<f64>() / 1.2).exp()
    });
    let (mut com, mut dual) = (0.0f64, 0.0f64);
    for _ in 0..2 {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.2..1.2)).collect();
        com = com.max(check_op_commutation(&x, &f)?);
        dual = dual.max(check_duality(&x, &f, &g)?);
    }
    out.push(Measurement::at_most("T_j commutes with translation", &tag, com, limits::TRANSLATION_IDENTITIES));
    out.push(Measurement::at_most("translation duality", &tag, dual, limits::TRANSLATION_IDENTITIES));
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..10)
        .map(|_| {
            (
                (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            )
        })
        .collect();
    let mut sym: f64 = 0.0;
    for p in &corpus {
        sym = sym.max(check_symmetry(setup, p, &pairs)?);
    }
    out.push(Measurement::at_most("tau_x f(y) = tau_y f(x)", &tag, sym, limits::TRANSLATION_IDENTITIES));

    let mut worst: f64 = 0.0;
    for _ in 0..opts.translation_samples {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let p = RadialProfile::gaussian(rng.gen_range(0.6..1.2));
        for r in contraction_ratios(&grid, &x, &p, &[1.0, 1.5, 2.0])? {
            worst = worst.max(r);
        }
    }
    out.push(Measurement::at_most(
        "contraction ratio - 1, p in {1, 1.5, 2}",
        &tag,
        worst - 1.0,
        limits::CONTRACTION,
    ));
    Ok(out)
}

fn intertwining(setup: &ReflectionSetup, opts: &SuiteOptions) -> Result<Vec<Measurement>> {
    let tag = label(setup);
    let n = setup.dimension();
    let mut rng = rng_for(opts.seed, 5, setup);
    let mut worst: f64 = 0.0;
    for _ in 0..opts.intertwining_samples {
        let lam: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mu = IntertwiningMeasure::new(setup, &x, 40)?;
        let v = mu.integrate(|eta| lam.iter().zip(eta).map(|(a, b)| a * b).sum::<f64>().exp());
        let e = dunkl_kernel_real(setup, &lam, &x);
        worst = worst.max((v - e).abs() / e);
    }
    Ok(vec![Measurement::at_most("mu_x moments vs E_k", &tag, worst, limits::INTERTWINING)])
}

/// Random (y, y0): y0 in [-3, 3]^N and |y - y0| a fraction in [0.05, 0.5] of |y0|.
pub fn hormander_pairs(setup: &ReflectionSetup, count: usize, seed: u64) -> Vec<(usize, Vec<f64>, Vec<f64>)> {
    let n = setup.dimension();
    let mut rng = rng_for(seed, 6, setup);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let y0: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let norm = y0.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dn = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 0.1 || dn < 0.1 {
            continue;
        }
        let frac = rng.gen_range(0.05..0.5);
        let y: Vec<f64> = y0.iter().zip(&dir).map(|(a, d)| a + frac * norm * d / dn).collect();
        out.push((rng.gen_range(0..n), y, y0));
    }
    out
}

fn hormander(setup: &ReflectionSetup, opts: &SuiteOptions) -> Result<Vec<Measurement>> {
    let tag = label(setup);
    let base = HormanderOptions::default();
    let (mut sup, mut drift_res, mut drift_rad, mut violations, mut checks) = (0.0f64, 0.0f64, 0.0f64, 0u64, 0u64);
    for (j, y, y0) in hormander_pairs(setup, opts.hormander_pairs, opts.seed) {
        let a = hormander_estimate(setup, j, &y, &y0, &base)?;
        let b = hormander_estimate(setup, j, &y, &y0, &base.refined())?;
        let c = hormander_estimate(setup, j, &y, &y0, &base.with_double_radius())?;
        if !a.extrapolated.is_finite() {
            sup = f64::INFINITY;
        }
        sup = sup.max(a.extrapolated);
        drift_res = drift_res.max((b.extrapolated - a.extrapolated).abs() / a.extrapolated);
        drift_rad = drift_rad.max((c.extrapolated - a.extrapolated).abs() / a.extrapolated);
        for e in [&a, &b, &c] {
            violations += e.sandwich_violations;
            checks += e.sandwich_checks;
        }
    }
    Ok(vec![
        Measurement::at_most("sup over pairs (finite)", &tag, sup, f64::MAX),
        Measurement::at_most("drift under quadrature doubling", &tag, drift_res, limits::DRIFT),
        Measurement::at_most("drift under radius doubling", &tag, drift_rad, limits::DRIFT),
        Measurement::at_most("sandwich violations", &tag, violations as f64, 0.0),
        Measurement::at_most("sandwich checks missing", &tag, if checks > 0 { 0.0 } else { 1.0 }, 0.0),
    ])
}

fn calderon_zygmund(setup: &ReflectionSetup, opts: &SuiteOptions) -> Result<Vec<Measurement>> {
    let tag = label(setup);
    let n = setup.dimension();
    let mut rng = rng_for(opts.seed, 7, setup);
    let level = if n == 1 { 12 } else { 7 };
    let budget = constant_budget(setup);
    let mut out = Vec::new();
    let (mut recon, mut c_good, mut c_local, mut c_total, mut mean_zero, mut outside, mut failed) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0usize, 0usize);
    for _ in 0..opts.cz_samples {
        let mesh: CzMesh = random_mesh(setup, 16.0, level, &mut rng)?;
        let lambda = mesh.top_average() * 10f64.powf(rng.gen_range(0.05..1.5));
        let d = cz_decompose(&mesh, lambda)?;
        let p = &d.properties;
        recon = recon.max(p.reconstruction);
        c_good = c_good.max(p.c_good);
        c_local = c_local.max(p.c_local);
        c_total = c_total.max(p.c_total);
        mean_zero = mean_zero.max(p.mean_zero);
        if !p.supports_inside_balls {
            outside += 1;
        }
        if !p.pass(budget) {
            failed += 1;
        }
    }
    out.push(Measurement::at_most("reconstruction max |f - h - sum b|", &tag, recon, 1e-12));
    out.push(Measurement::at_most("(i) sup|h| / lambda", &tag, c_good, budget));
    out.push(Measurement::at_most("(ii) cubes outside their balls", &tag, outside as f64, 0.0));
    out.push(Measurement::at_most("(iii) |int b_j| / int_Q |f|", &tag, mean_zero, 1e-12));
    out.push(Measurement::at_most("(iv) ||b_j||_1 / (lambda m(B_j))", &tag, c_local, budget));
    out.push(Measurement::at_most("(v) lambda sum m(B_j) / ||f||_1", &tag, c_total, budget));
    out.push(Measurement::at_most("decompositions failing (i)-(v)", &tag, failed as f64, 0.0));
    let survey = doubling_survey(setup, opts.doubling_samples, opts.seed)?;
    out.push(Measurement::at_most("doubling sup (finite)", &tag, survey.sup, f64::MAX));
    out.push(Measurement::at_most("doubling sup drift under refinement", &tag, survey.drift, limits::DRIFT));
    let classical = ReflectionSetup::classical(n)?;
    let mut worst: f64 = 0.0;
    for r in [0.01, 0.5, 1.0, 7.0] {
        let v = doubling_ratio(&classical, &vec![0.0; n], r)?;
        worst = worst.max((v - 2f64.powi(n as i32)).abs());
    }
    out.push(Measurement::at_most("k=0 doubling at 0 vs 2^N", &label(&classical), worst, limits::DOUBLING_AT_ORIGIN));
    Ok(out)
}

/// Sobolev exponent used for a setup: 2 when the window allows, else midway.
pub fn sobolev_p(setup: &ReflectionSetup) -> Option<f64> {
    let d = setup.constants().homogeneous_dim;
    if d <= 1.0 {
        None
    } else if d > 2.5 {
        Some(2.0)
    } else {
        Some(0.5 * (1.0 + d))
    }
}

pub const P_GRID: [f64; 5] = [1.25, 1.5, 2.0, 3.0, 4.0];

fn lp_and_inequalities(setup: &ReflectionSetup, opts: &SuiteOptions) -> Result<Vec<Measurement>> {
    let tag = label(setup);
    let n = setup.dimension();
    let grid = Grid::default_for(setup)?;
    let corpus = Corpus::standard(n, opts.seed);
    let sampled = corpus.sample(&grid);
    let mut out = Vec::new();
    for j in 0..n {
        let scan = lp_ratio_scan(j, &sampled, &P_GRID, opts.seed)?;
        for (p, s) in scan.p_grid.iter().zip(&scan.sup_per_p) {
            if *p == 2.0 {
                out.push(Measurement::at_most(format!("R_{j} sup ratio - 1, p=2"), &tag, *s - 1.0, limits::P_TWO));
            } else {
                out.push(Measurement::at_most(format!("R_{j} sup ratio p={p} (finite)"), &tag, *s, f64::MAX));
            }
        }
    }
    for r in 0..n {
        for s in r..n {
            let rep = riesz_inequality_check(&grid, r, s, &corpus.members, 1.5)?;
            out.push(Measurement::at_most(
                format!("factorization T_{r}T_{s} = -R_{r}R_{s} Delta"),
                &tag,
                rep.max_factorization_defect,
                limits::FACTORIZATION,
            ));
            out.push(Measurement::at_most(format!("Riesz inequality sup ratio ({r},{s}) (finite)"), &tag, rep.sup_ratio, f64::MAX));
        }
    }
    if let Some(p) = sobolev_p(setup) {
        let rep = sobolev_inequality_check(&grid, &corpus.members[..crate::harness::DETERMINISTIC], p)?;
        out.push(Measurement::at_most(format!("Sobolev dilation drift p={p}"), &tag, rep.max_drift, limits::DRIFT));
        let f = TestFunction::new("identity", vec![Term::gaussian(vec![0.3; n], 0.8, 1.0)]);
        let points: Vec<Vec<f64>> = [0.4, -0.9, 1.3]
            .iter()
            .take(opts.identity_points.max(1))
            .map(|&v| (0..n).map(|i| v * (1.0 - 0.3 * i as f64)).collect())
            .collect();
        let rep = identity_check(&grid, &f, &points)?;
        out.push(Measurement::at_most("f = I^1(sum R_j T_j f)", &tag, rep.defect, limits::IDENTITY));
    }
    Ok(out)
}

/// A report assembled from seeded pieces of several modules.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminismProbe {
    pub lp: crate::harness::LpScanReport,
    pub hormander: Vec<f64>,
    pub doubling: crate::czd::DoublingSurvey,
    pub cz_bad_cubes: Vec<(Vec<usize>, usize)>,
    pub cz_properties: crate::czd::CzProperties,
}

pub fn determinism_probe(setup: &ReflectionSetup, seed: u64) -> Result<DeterminismProbe> {
    let grid = Grid::default_for(setup)?;
    let corpus = Corpus::standard(setup.dimension(), seed).sample(&grid);
    let lp = lp_ratio_scan(0, &corpus[crate::harness::DETERMINISTIC..crate::harness::DETERMINISTIC + 4], &P_GRID, seed)?;
    let hormander = hormander_pairs(setup, 2, seed)
        .into_iter()
        .map(|(j, y, y0)| hormander_estimate(setup, j, &y, &y0, &HormanderOptions::default()).map(|e| e.extrapolated))
        .collect::<Result<Vec<f64>>>()?;
    let doubling = doubling_survey(setup, 10, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = random_mesh(setup, 16.0, if setup.dimension() == 1 { 10 } else { 6 }, &mut rng)?;
    let d = cz_decompose(&mesh, 0.5)?;
    Ok(DeterminismProbe {
        lp,
        hormander,
        doubling,
        cz_bad_cubes: d.bad.iter().map(|b| (b.lower.clone(), b.cells)).collect(),
        cz_properties: d.properties,
    })
}

fn determinism(setup: &ReflectionSetup, opts: &SuiteOptions) -> Result<Vec<Measurement>> {
    let tag = label(setup);
    let a = serde_json::to_string(&determinism_probe(setup, opts.seed)?).map_err(|e| crate::error::DunklError::Config(e.to_string()))?;
    let b = serde_json::to_string(&determinism_probe(setup, opts.seed)?).map_err(|e| crate::error::DunklError::Config(e.to_string()))?;
    Ok(vec![Measurement::at_most(
        "differing report bytes on rerun",
        &tag,
        a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count() as f64 + a.len().abs_diff(b.len()) as f64,
        0.0,
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_integral_matches_series() {
        for z in [0.5, 3.0, 11.0] {
            let (j1, _) = crate::special::bessel_j_pair(1.0, z);
            assert!((bessel_j1_integral(z) - j1).abs() < 1e-13, "{z}");
        }
    }

    #[test]
    fn oracle_recursion_on_a_known_pattern() {
        let v = [0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0, 3.0];
        let got = classical_cz_oracle(&v, 1, 8, 1.2);
        assert_eq!(got, vec![(vec![2], 2), (vec![6], 2)]);
    }

    #[test]
    fn measurement_verdicts() {
        assert!(Measurement::at_most("a", "s", 1.0, 1.0).pass);
        assert!(!Measurement::at_most("a", "s", f64::NAN, 1.0).pass);
        let r = CriterionReport::new(3, vec![Measurement::at_most("a", "s", 2.0, 1.0)], 0.0);
        assert!(!r.pass);
        assert!(r.line().contains("FAIL"));
        assert!(!CriterionReport::new(3, vec![], 0.0).pass);
    }

    #[test]
    fn quick_criteria_pass_in_one_dimension() {
        let s = ReflectionSetup::new(vec![0.5]).unwrap();
        let opts = SuiteOptions::quick(1);
        for id in [3, 5, 6, 9] {
            let r = criterion(id, std::slice::from_ref(&s), &opts);
            assert!(r.pass, "{}", r.line());
        }
    }
}
