//! Doubling diagnostics and a dyadic Calderón–Zygmund decomposition for m_k.
//!
//! The decomposition runs on a piecewise-constant function: a dyadic mesh of
//! cells over [-S, S]^N with one value per cell. Cube masses come from the
//! closed-form primitive of 2^k |t|^{2k}, so every integral in the
//! construction is exact up to rounding.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::grid::GridFunction;
use crate::quadrature::{left_singular_on, legendre_on, right_singular_on, Rule};
use crate::riesz::riesz_multiplier;
use crate::rootsys::{coordinate_mass_primitive, coordinate_weight, ReflectionSetup};

/// Default Gauss points per panel for ball masses.
pub const BALL_NODES: usize = 16;

/// m_k(B(center, r)) by nested quadrature over coordinates.
pub fn ball_mass(setup: &ReflectionSetup, center: &[f64], r: f64, nodes: usize) -> Result<f64> {
    setup.check_point(center)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(DunklError::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    Ok(ball_mass_rec(setup.multiplicities(), center, r, nodes))
}

fn ball_mass_rec(ks: &[f64], c: &[f64], r: f64, nodes: usize) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let k = ks[0];
    if ks.len() == 1 {
        return coordinate_mass_primitive(k, c[0] + r) - coordinate_mass_primitive(k, c[0] - r);
    }
    // t = c0 + r sin(theta); the slice at t is a ball of radius r cos(theta).
    let half = std::f64::consts::FRAC_PI_2;
    let mut cuts = vec![-half, half];
    let hyper = if c[0].abs() < r { Some((-c[0] / r).asin()) } else { None };
    if let Some(t0) = hyper {
        cuts.push(t0);
    }
    // Slice radii where the next coordinate's interval touches 0.
    if c[1].abs() < r {
        let t = (c[1].abs() / r).acos();
        cuts.push(t);
        cuts.push(-t);
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let inner = |theta: f64| {
        let t = c[0] + r * theta.sin();
        r * theta.cos() * ball_mass_rec(&ks[1..], &c[1..], r * theta.cos(), nodes) * coordinate_weight(k, t)
    };
    let mut parts = Vec::new();
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a < 1e-15 {
            continue;
        }
        let s = 2.0 * k;
        let sub = match hyper {
            // |t|^{2k} vanishes like |theta - t0|^{2k} at the hyperplane crossing.
            Some(t0) if k > 0.0 && (a - t0).abs() < 1e-15 => {
                weighted(&left_singular_on(nodes, s, a, b), |th| inner(th) / (th - t0).powf(s))
            }
            Some(t0) if k > 0.0 && (b - t0).abs() < 1e-15 => {
                weighted(&right_singular_on(nodes, s, a, b), |th| inner(th) / (t0 - th).powf(s))
            }
            _ => weighted(&legendre_on(nodes, a, b), inner),
        };
        parts.push(sub);
    }
    parts.iter().sum()
}

fn weighted<F: Fn(f64) -> f64>(rule: &Rule, f: F) -> f64 {
    let terms: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w * f(x)).collect();
    terms.iter().sum()
}

/// m_k(B(x, 2r)) / m_k(B(x, r)).
pub fn doubling_ratio(setup: &ReflectionSetup, x: &[f64], r: f64) -> Result<f64> {
    doubling_ratio_with(setup, x, r, BALL_NODES)
}

pub fn doubling_ratio_with(setup: &ReflectionSetup, x: &[f64], r: f64, nodes: usize) -> Result<f64> {
    Ok(ball_mass(setup, x, 2.0 * r, nodes)? / ball_mass(setup, x, r, nodes)?)
}

/// Sup of the doubling ratio over random balls, at two quadrature resolutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingSurvey {
    pub samples: usize,
    pub seed: u64,
    pub sup: f64,
    pub sup_refined: f64,
    pub argmax: (Vec<f64>, f64),
    pub drift: f64,
}

/// Centers uniform in [-4, 4]^N, radii log-uniform in [1e-2, 1e1].
pub fn doubling_survey(setup: &ReflectionSetup, samples: usize, seed: u64) -> Result<DoublingSurvey> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = setup.dimension();
    let mut sup = 0.0;
    let mut sup_refined = 0.0;
    let mut argmax = (vec![0.0; n], 1.0);
    for _ in 0..samples {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let r = 10f64.powf(rng.gen_range(-2.0..1.0));
        let v = doubling_ratio_with(setup, &x, r, BALL_NODES)?;
        let w = doubling_ratio_with(setup, &x, r, 2 * BALL_NODES)?;
        if v > sup {
            sup = v;
            argmax = (x, r);
        }
        sup_refined = f64::max(sup_refined, w);
    }
    Ok(DoublingSurvey {
        samples,
        seed,
        sup,
        sup_refined,
        argmax,
        drift: (sup_refined - sup).abs() / sup,
    })
}

/// Piecewise-constant function on the dyadic mesh of [-S, S]^N with 2^level
/// cells per axis (last axis fastest).
#[derive(Debug, Clone)]
pub struct CzMesh {
    pub setup: ReflectionSetup,
    pub half_side: f64,
    pub level: u32,
    pub values: Vec<Complex64>,
    cell_mass: Vec<f64>,
}

impl CzMesh {
    pub fn from_fn<F: FnMut(&[f64]) -> Complex64>(
        setup: &ReflectionSetup,
        half_side: f64,
        level: u32,
        mut f: F,
    ) -> Result<Self> {
        let mut mesh = Self::empty(setup, half_side, level)?;
        let n = setup.dimension();
        let m = mesh.cells_per_axis();
        let mut idx = vec![0usize; n];
        for flat in 0..mesh.values.len() {
            unflatten(flat, m, &mut idx);
            let x: Vec<f64> = idx.iter().map(|&i| mesh.center(i)).collect();
            mesh.values[flat] = f(&x);
        }
        Ok(mesh)
    }

    /// Samples a grid function at cell centers by per-axis interpolation.
    /// Cells outside the grid box get 0.
    pub fn from_grid(f: &GridFunction, half_side: f64, level: u32) -> Result<Self> {
        let grid = &f.grid;
        let mut mesh = Self::empty(&grid.setup, half_side, level)?;
        let n = grid.dimension();
        let m = mesh.cells_per_axis();
        let centers: Vec<f64> = (0..m).map(|i| mesh.center(i)).collect();
        let mut shape: Vec<usize> = grid.shape().to_vec();
        let mut re: Vec<f64> = f.values.iter().map(|v| v.re).collect();
        let mut im: Vec<f64> = f.values.iter().map(|v| v.im).collect();
        for a in (0..n).rev() {
            let axis = &grid.axes[a];
            let radius = axis.radius();
            let outer: usize = shape[..a].iter().product();
            let inner: usize = shape[a + 1..].iter().product();
            let len = shape[a];
            let mut next_re = vec![0.0; outer * m * inner];
            let mut next_im = vec![0.0; outer * m * inner];
            let mut line_re = vec![0.0; len];
            let mut line_im = vec![0.0; len];
            for o in 0..outer {
                for i in 0..inner {
                    for l in 0..len {
                        line_re[l] = re[(o * len + l) * inner + i];
                        line_im[l] = im[(o * len + l) * inner + i];
                    }
                    for (c, &x) in centers.iter().enumerate() {
                        if x.abs() > radius {
                            continue;
                        }
                        let at = (o * m + c) * inner + i;
                        next_re[at] = axis.interpolate(&line_re, x);
                        next_im[at] = axis.interpolate(&line_im, x);
                    }
                }
            }
            re = next_re;
            im = next_im;
            shape[a] = m;
        }
        mesh.values = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        Ok(mesh)
    }

    fn empty(setup: &ReflectionSetup, half_side: f64, level: u32) -> Result<Self> {
        if !(half_side > 0.0 && half_side.is_finite()) {
            return Err(DunklError::InvalidArgument(format!("mesh half side must be positive, got {half_side}")));
        }
        let n = setup.dimension();
        if level == 0 || level as usize * n > 26 {
            return Err(DunklError::InvalidArgument(format!(
                "mesh level {level} is out of range for dimension {n}"
            )));
        }
        let m = 1usize << level;
        let h = 2.0 * half_side / m as f64;
        let per_axis: Vec<Vec<f64>> = setup
            .multiplicities()
            .iter()
            .map(|&k| {
                (0..m)
                    .map(|i| {
                        let lo = -half_side + i as f64 * h;
                        coordinate_mass_primitive(k, lo + h) - coordinate_mass_primitive(k, lo)
                    })
                    .collect()
            })
            .collect();
        let total = m.pow(n as u32);
        let mut idx = vec![0usize; n];
        let cell_mass = (0..total)
            .map(|flat| {
                unflatten(flat, m, &mut idx);
                idx.iter().enumerate().map(|(a, &i)| per_axis[a][i]).product()
            })
            .collect();
        Ok(Self {
            setup: setup.clone(),
            half_side,
            level,
            values: vec![Complex64::new(0.0, 0.0); total],
            cell_mass,
        })
    }

    pub fn cells_per_axis(&self) -> usize {
        1 << self.level
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.half_side / self.cells_per_axis() as f64
    }

    fn center(&self, i: usize) -> f64 {
        -self.half_side + (i as f64 + 0.5) * self.cell_width()
    }

    pub fn cell_mass(&self) -> &[f64] {
        &self.cell_mass
    }

    pub fn norm_l1(&self) -> f64 {
        let terms: Vec<f64> = self.values.iter().zip(&self.cell_mass).map(|(v, m)| v.norm() * m).collect();
        terms.iter().sum()
    }

    /// Largest m_k-average of |f| over the 2^N orthant cubes; the stopping
    /// time needs lambda at least this large.
    pub fn top_average(&self) -> f64 {
        let n = self.setup.dimension();
        let m = self.cells_per_axis();
        let mut l1 = vec![0.0; 1 << n];
        let mut mass = vec![0.0; 1 << n];
        for (cell, (v, w)) in self.values.iter().zip(&self.cell_mass).enumerate() {
            let mut rest = cell;
            let mut orthant = 0;
            for a in (0..n).rev() {
                if rest % m >= m / 2 {
                    orthant |= 1 << a;
                }
                rest /= m;
            }
            l1[orthant] += v.norm() * w;
            mass[orthant] += w;
        }
        l1.iter().zip(&mass).map(|(a, b)| a / b).fold(0.0, f64::max)
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn unflatten(mut flat: usize, m: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % m;
        flat /= m;
    }
}

/// A selected cube Q_j (as a cell-index box) with its enclosing ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadPart {
    /// Lower cell index per axis and side length in cells.
    pub lower: Vec<usize>,
    pub cells: usize,
    pub center: Vec<f64>,
    /// Half-diagonal of the cube.
    pub radius: f64,
    pub cube_mass: f64,
    pub ball_mass: f64,
    /// m_k-mean of f over the cube.
    pub mean: [f64; 2],
    /// int |f| dm_k / m_k(Q) over the cube; exceeds lambda.
    pub average: f64,
    /// m_k(parent) / m_k(Q).
    pub parent_ratio: f64,
    /// ||b_j||_{1,k}.
    pub l1: f64,
    /// |int b_j dm_k|.
    pub integral: f64,
}

/// Budget 2^{D+1}, D = 2 gamma + N, for the constants of (i)-(v). A dyadic
/// child touching the hyperplanes has m_k mass 2^{-D} times its parent's,
/// so the good part is bounded by 2^D lambda and ||b_j||_1 by 2^{D+1} lambda m_k(Q_j).
pub fn constant_budget(setup: &ReflectionSetup) -> f64 {
    2f64.powf(setup.constants().homogeneous_dim + 1.0)
}

/// Properties (i)-(v) with the measured constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzProperties {
    /// max |f - h - sum b_j| over cells.
    pub reconstruction: f64,
    /// (i) sup |h| / lambda.
    pub c_good: f64,
    /// (ii) every cube lies inside its ball.
    pub supports_inside_balls: bool,
    /// (iii) max_j |int b_j| / int_{Q_j} |f|.
    pub mean_zero: f64,
    /// (iv) max_j ||b_j||_1 / (lambda m_k(B_j)).
    pub c_local: f64,
    /// (v) sum m_k(B_j) lambda / ||f||_1.
    pub c_total: f64,
    /// max m_k(B_j) / m_k(Q_j).
    pub ball_to_cube: f64,
}

impl CzProperties {
    /// All five properties hold with constants at most `budget`.
    pub fn pass(&self, budget: f64) -> bool {
        self.reconstruction <= 1e-12 * 1f64.max(self.c_good)
            && self.c_good <= budget
            && self.supports_inside_balls
            && self.mean_zero <= 1e-12
            && self.c_local <= budget
            && self.c_total <= budget
    }
}

#[derive(Debug, Clone)]
pub struct CzDecomposition {
    pub lambda: f64,
    pub good: Vec<Complex64>,
    pub bad: Vec<BadPart>,
    /// Owning bad part per cell.
    pub owner: Vec<Option<usize>>,
    pub properties: CzProperties,
}

impl CzDecomposition {
    /// b_j at a cell.
    pub fn bad_value(&self, mesh: &CzMesh, j: usize, cell: usize) -> Complex64 {
        if self.owner[cell] == Some(j) {
            let m = self.bad[j].mean;
            mesh.values[cell] - Complex64::new(m[0], m[1])
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

struct Cube {
    lower: Vec<usize>,
    cells: usize,
}

/// Dyadic stopping time at level lambda.
pub fn cz_decompose(mesh: &CzMesh, lambda: f64) -> Result<CzDecomposition> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(DunklError::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let setup = &mesh.setup;
    let n = setup.dimension();
    let m = mesh.cells_per_axis();
    let ks = setup.multiplicities();
    let h = mesh.cell_width();
    let total_l1 = mesh.norm_l1();

    let weighted_abs: Vec<f64> = mesh.values.iter().zip(&mesh.cell_mass).map(|(v, w)| v.norm() * w).collect();
    let table = PrefixTable::new(&weighted_abs, n, m);

    let cube_mass = |lower: &[usize], cells: usize| -> f64 {
        (0..n)
            .map(|a| {
                let lo = -mesh.half_side + lower[a] as f64 * h;
                let hi = lo + cells as f64 * h;
                coordinate_mass_primitive(ks[a], hi) - coordinate_mass_primitive(ks[a], lo)
            })
            .product()
    };

    // The 2^N orthant cubes of side S start the stopping time.
    let mut selected: Vec<(Cube, f64)> = Vec::new();
    let mut stack: Vec<Cube> = Vec::new();
    for orthant in 0..(1usize << n) {
        let lower: Vec<usize> = (0..n).map(|a| if orthant >> (n - 1 - a) & 1 == 1 { m / 2 } else { 0 }).collect();
        let avg = table.sum(&lower, m / 2) / cube_mass(&lower, m / 2);
        if avg > lambda {
            return Err(DunklError::InvalidArgument(format!(
                "lambda {lambda:.3e} is below the mean {avg:.3e} of a top-level cube; enlarge the mesh"
            )));
        }
        stack.push(Cube { lower, cells: m / 2 });
    }

    while let Some(cube) = stack.pop() {
        if cube.cells == 1 {
            continue;
        }
        let half = cube.cells / 2;
        let parent_mass = cube_mass(&cube.lower, cube.cells);
        for child in 0..(1usize << n) {
            let lower: Vec<usize> = (0..n)
                .map(|a| cube.lower[a] + if child >> (n - 1 - a) & 1 == 1 { half } else { 0 })
                .collect();
            let mass = cube_mass(&lower, half);
            let avg = table.sum(&lower, half) / mass;
            let c = Cube { lower, cells: half };
            if avg > lambda {
                selected.push((c, parent_mass / mass));
            } else {
                stack.push(c);
            }
        }
    }
    selected.sort_by(|a, b| a.0.lower.cmp(&b.0.lower).then(a.0.cells.cmp(&b.0.cells)));

    let mut good = mesh.values.clone();
    let mut owner = vec![None; mesh.values.len()];
    let mut bad = Vec::with_capacity(selected.len());
    for (j, (cube, parent_ratio)) in selected.iter().enumerate() {
        let cells = cube_cells(&cube.lower, cube.cells, m);
        let cube_m = cube_mass(&cube.lower, cube.cells);
        let weighted: Vec<Complex64> = cells.iter().map(|&c| mesh.values[c] * mesh.cell_mass[c]).collect();
        let abs: Vec<f64> = cells.iter().map(|&c| mesh.values[c].norm() * mesh.cell_mass[c]).collect();
        let mean = weighted.iter().sum::<Complex64>() / cube_m;
        let b: Vec<Complex64> = cells.iter().map(|&c| mesh.values[c] - mean).collect();
        let l1_terms: Vec<f64> = cells.iter().zip(&b).map(|(&c, v)| v.norm() * mesh.cell_mass[c]).collect();
        let integral_terms: Vec<Complex64> = cells.iter().zip(&b).map(|(&c, v)| v * mesh.cell_mass[c]).collect();
        for &c in &cells {
            good[c] = mean;
            owner[c] = Some(j);
        }
        let center: Vec<f64> = (0..n)
            .map(|a| -mesh.half_side + (cube.lower[a] as f64 + 0.5 * cube.cells as f64) * h)
            .collect();
        let radius = 0.5 * cube.cells as f64 * h * (n as f64).sqrt();
        bad.push(BadPart {
            lower: cube.lower.clone(),
            cells: cube.cells,
            center: center.clone(),
            radius,
            cube_mass: cube_m,
            ball_mass: ball_mass(setup, &center, radius, BALL_NODES)?,
            mean: [mean.re, mean.im],
            average: abs.iter().sum::<f64>() / cube_m,
            parent_ratio: *parent_ratio,
            l1: l1_terms.iter().sum(),
            integral: integral_terms.iter().sum::<Complex64>().norm(),
        });
    }

    let reconstruction = (0..mesh.values.len())
        .map(|c| {
            let b = owner[c].map_or(Complex64::new(0.0, 0.0), |j| {
                let mu = bad[j].mean;
                mesh.values[c] - Complex64::new(mu[0], mu[1])
            });
            (mesh.values[c] - good[c] - b).norm()
        })
        .fold(0.0, f64::max);
    let supports_inside_balls = bad.iter().all(|b| {
        // The farthest corner of the cube from its center.
        let half = 0.5 * b.cells as f64 * h;
        let d = (n as f64).sqrt() * half;
        d <= b.radius * (1.0 + 1e-12)
    });
    let sum_ball: Vec<f64> = bad.iter().map(|b| b.ball_mass).collect();
    let properties = CzProperties {
        reconstruction,
        c_good: good.iter().map(|v| v.norm()).fold(0.0, f64::max) / lambda,
        supports_inside_balls,
        mean_zero: bad
            .iter()
            .map(|b| b.integral / (b.average * b.cube_mass).max(1e-300))
            .fold(0.0, f64::max),
        c_local: bad.iter().map(|b| b.l1 / (lambda * b.ball_mass)).fold(0.0, f64::max),
        c_total: if total_l1 > 0.0 {
            sum_ball.iter().sum::<f64>() * lambda / total_l1
        } else {
            0.0
        },
        ball_to_cube: bad.iter().map(|b| b.ball_mass / b.cube_mass).fold(0.0, f64::max),
    };
    Ok(CzDecomposition {
        lambda,
        good,
        bad,
        owner,
        properties,
    })
}

fn cube_cells(lower: &[usize], cells: usize, m: usize) -> Vec<usize> {
    let n = lower.len();
    let count = cells.pow(n as u32);
    let mut local = vec![0usize; n];
    (0..count)
        .map(|t| {
            unflatten(t, cells, &mut local);
            lower.iter().zip(&local).fold(0, |acc, (&lo, &l)| acc * m + lo + l)
        })
        .collect()
}

/// Summed-area table for box sums over the cell array.
struct PrefixTable {
    n: usize,
    m: usize,
    data: Vec<f64>,
}

impl PrefixTable {
    fn new(values: &[f64], n: usize, m: usize) -> Self {
        // data has (m + 1)^n entries; entry at i holds the sum over cells < i.
        let side = m + 1;
        let mut data = vec![0.0; side.pow(n as u32)];
        let mut idx = vec![0usize; n];
        for (flat, &v) in values.iter().enumerate() {
            unflatten(flat, m, &mut idx);
            let at = idx.iter().fold(0, |acc, &i| acc * side + i + 1);
            data[at] = v;
        }
        let mut stride = 1;
        for _ in 0..n {
            for at in 0..data.len() {
                if (at / stride) % side != 0 {
                    data[at] += data[at - stride];
                }
            }
            stride *= side;
        }
        Self { n, m, data }
    }

    fn sum(&self, lower: &[usize], cells: usize) -> f64 {
        let side = self.m + 1;
        let mut total = 0.0;
        for corner in 0..(1usize << self.n) {
            let mut at = 0;
            let mut sign = 1.0;
            for a in 0..self.n {
                let upper = corner >> (self.n - 1 - a) & 1 == 1;
                let i = if upper { lower[a] + cells } else { lower[a] };
                if !upper {
                    sign = -sign;
                }
                at = at * side + i;
            }
            total += sign * self.data[at];
        }
        total
    }
}

/// One row of the weak-type probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakRow {
    pub lambda: f64,
    /// m_k{|R_j f| > lambda} within the grid box.
    pub level_set_mass: f64,
    /// lambda * level_set_mass / ||f||_{1,k}.
    pub ratio: f64,
    /// The level set reaches the outermost grid nodes; the mass is a lower bound.
    pub truncated: bool,
}

/// lambda m_k{|R_j f| > lambda} / ||f||_1 via the multiplier route on the grid.
pub fn weak11_probe(j: usize, f: &GridFunction, lambdas: &[f64]) -> Result<Vec<WeakRow>> {
    let l1 = f.norm_p(1.0);
    if l1 == 0.0 {
        return Ok(lambdas
            .iter()
            .map(|&lambda| WeakRow {
                lambda,
                level_set_mass: 0.0,
                ratio: 0.0,
                truncated: false,
            })
            .collect());
    }
    let rf = riesz_multiplier(j, f)?;
    let grid = &f.grid;
    let weights = grid.weights();
    let n = grid.dimension();
    let edge: Vec<bool> = (0..grid.len())
        .map(|flat| {
            let idx = grid.multi_index(flat);
            (0..n).any(|a| idx[a] == 0 || idx[a] + 1 == grid.shape()[a])
        })
        .collect();
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(DunklError::InvalidArgument(format!("lambda must be positive, got {lambda}")));
        }
        let mut terms = Vec::new();
        let mut truncated = false;
        for (flat, v) in rf.values.iter().enumerate() {
            if v.norm() > lambda {
                terms.push(weights[flat]);
                truncated |= edge[flat];
            }
        }
        let mass: f64 = terms.iter().sum();
        rows.push(WeakRow {
            lambda,
            level_set_mass: mass,
            ratio: lambda * mass / l1,
            truncated,
        });
    }
    Ok(rows)
}

/// Random smooth mesh function for decomposition sweeps.
pub fn random_mesh(setup: &ReflectionSetup, half_side: f64, level: u32, rng: &mut impl Rng) -> Result<CzMesh> {
    let n = setup.dimension();
    let bumps: Vec<(Vec<f64>, f64, f64)> = (0..rng.gen_range(1..4))
        .map(|_| {
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            (c, rng.gen_range(0.3..1.2), rng.gen_range(-2.0..2.0))
        })
        .collect();
    CzMesh::from_fn(setup, half_side, level, |x| {
        let v: f64 = bumps
            .iter()
            .map(|(c, s, a)| {
                let d2: f64 = x.iter().zip(c).map(|(u, v)| (u - v) * (u - v)).sum();
                a * (-d2 / (2.0 * s * s)).exp()
            })
            .sum();
        Complex64::new(v, 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::sync::Arc;

    fn setup(ks: &[f64]) -> ReflectionSetup {
        ReflectionSetup::new(ks.to_vec()).unwrap()
    }

    #[test]
    fn lebesgue_doubling_is_two_to_the_n() {
        for n in 1..=3 {
            let s = ReflectionSetup::classical(n).unwrap();
            for (x, r) in [(0.0, 1.0), (0.7, 0.3), (-2.0, 5.0)] {
                let c = vec![x; n];
                let v = doubling_ratio(&s, &c, r).unwrap();
                assert!((v - 2f64.powi(n as i32)).abs() < 1e-12, "n={n}: {v}");
            }
        }
    }

    #[test]
    fn power_weight_doubling_at_origin() {
        for g in [0.5, 2.5] {
            let v = doubling_ratio(&setup(&[g]), &[0.0], 0.8).unwrap();
            assert!((v - 2f64.powf(2.0 * g + 1.0)).abs() < 1e-12);
        }
        let v = doubling_ratio(&setup(&[0.5, 1.0]), &[0.0, 0.0], 1.3).unwrap();
        assert!((v - 2f64.powf(5.0)).abs() < 1e-11, "{v}");
    }

    #[test]
    fn ball_mass_against_dense_oracle() {
        // Cartesian midpoint oracle over the bounding box at fine resolution.
        let s = setup(&[0.5, 1.0]);
        let c = [0.4, -0.3];
        let r = 1.1;
        let m = 4000;
        let h = 2.0 * r / m as f64;
        let mut total = 0.0;
        for i in 0..m {
            let x = c[0] - r + (i as f64 + 0.5) * h;
            let half = (r * r - (x - c[0]).powi(2)).max(0.0).sqrt();
            let inner = coordinate_mass_primitive(1.0, c[1] + half) - coordinate_mass_primitive(1.0, c[1] - half);
            total += h * coordinate_weight(0.5, x) * inner;
        }
        let v = ball_mass(&s, &c, r, BALL_NODES).unwrap();
        assert!((v - total).abs() < 1e-6 * v, "{v} {total}");
    }

    #[test]
    fn prefix_sums_match_direct() {
        let n = 2;
        let m = 8;
        let vals: Vec<f64> = (0..m * m).map(|i| (i as f64 * 0.37).sin().abs()).collect();
        let t = PrefixTable::new(&vals, n, m);
        let cells = cube_cells(&[2, 4], 4, m);
        let direct: f64 = cells.iter().map(|&c| vals[c]).sum();
        assert!((t.sum(&[2, 4], 4) - direct).abs() < 1e-12);
        let t1 = PrefixTable::new(&vals[..m], 1, m);
        assert!((t1.sum(&[3], 4) - vals[3..7].iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn large_lambda_is_all_good() {
        let s = setup(&[0.5]);
        let mesh = CzMesh::from_fn(&s, 8.0, 10, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
        let d = cz_decompose(&mesh, 1.5).unwrap();
        assert!(d.bad.is_empty());
        assert_eq!(d.good, mesh.values);
    }

    #[test]
    fn classical_step_function_matches_textbook_oracle() {
        // Lebesgue dyadic CZ on [0, 16) x {values}: plain recursion over intervals.
        let s = ReflectionSetup::classical(1).unwrap();
        let level = 6;
        let step = |x: f64| if (1.0..2.5).contains(&x) { 3.0 } else if (-4.0..-3.0).contains(&x) { -1.5 } else { 0.0 };
        let mesh = CzMesh::from_fn(&s, 8.0, level, |x| Complex64::new(step(x[0]), 0.0)).unwrap();
        let vals: Vec<f64> = mesh.values.iter().map(|v| v.re.abs()).collect();
        let lambda = 0.9;
        fn oracle(vals: &[f64], lo: usize, len: usize, lambda: f64, out: &mut Vec<(usize, usize)>) {
            if len == 1 {
                return;
            }
            for lo2 in [lo, lo + len / 2] {
                let avg = vals[lo2..lo2 + len / 2].iter().sum::<f64>() / (len / 2) as f64;
                if avg > lambda {
                    out.push((lo2, len / 2));
                } else {
                    oracle(vals, lo2, len / 2, lambda, out);
                }
            }
        }
        let mut expected = Vec::new();
        oracle(&vals, 0, 64, lambda, &mut expected);
        expected.sort();
        let d = cz_decompose(&mesh, lambda).unwrap();
        let got: Vec<(usize, usize)> = d.bad.iter().map(|b| (b.lower[0], b.cells)).collect();
        assert_eq!(got, expected);
        assert!(d.properties.pass(64.0), "{:?}", d.properties);
    }

    #[test]
    fn random_decompositions_pass_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (ks, level) in [(vec![0.5], 13), (vec![0.5, 1.0], 7), (vec![2.5], 13)] {
            let s = setup(&ks);
            let mesh = random_mesh(&s, 16.0, level, &mut rng).unwrap();
            for lambda in [0.05, 0.3, 1.0] {
                let d = cz_decompose(&mesh, lambda).unwrap();
                let p = &d.properties;
                assert!(p.pass(64.0), "lambda={lambda}: {p:?}");
            }
        }
    }

    #[test]
    fn lambda_below_top_mean_is_rejected() {
        let s = setup(&[0.5]);
        let mesh = CzMesh::from_fn(&s, 2.0, 8, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
        assert!(cz_decompose(&mesh, 1e-3).is_err());
        let top = mesh.top_average();
        assert!(cz_decompose(&mesh, 0.999 * top).is_err());
        assert!(cz_decompose(&mesh, 1.001 * top).is_ok());
        assert!(cz_decompose(&mesh, 0.0).is_err());
    }

    #[test]
    fn mesh_from_grid_interpolates() {
        let s = setup(&[0.5, 1.0]);
        let g = Grid::default_for(&s).unwrap();
        let f = GridFunction::from_real_fn(Arc::clone(&g), |x| (-(x[0] - 0.2).powi(2) - x[1] * x[1]).exp());
        let mesh = CzMesh::from_grid(&f, 8.0, 5).unwrap();
        let exact = CzMesh::from_fn(&s, 8.0, 5, |x| Complex64::new((-(x[0] - 0.2).powi(2) - x[1] * x[1]).exp(), 0.0)).unwrap();
        let err = mesh.values.iter().zip(&exact.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn weak_probe_of_zero_is_zero() {
        let s = setup(&[0.5]);
        let g = Grid::default_for(&s).unwrap();
        let f = GridFunction::zeros(g);
        let rows = weak11_probe(0, &f, &[0.1, 1.0]).unwrap();
        assert!(rows.iter().all(|r| r.level_set_mass == 0.0));
    }

    #[test]
    fn classical_weak_probe_against_dawson_oracle() {
        // H(e^{-x^2/2})(x) = (2 / sqrt(pi)) F(x / sqrt 2), F the Dawson integral.
        let dawson = |x: f64| {
            let r = legendre_on(40, 0.0, x);
            (-x * x).exp() * r.integrate(|t| (t * t).exp())
        };
        let hilbert = |x: f64| 2.0 / std::f64::consts::PI.sqrt() * dawson(x / std::f64::consts::SQRT_2);
        let s = ReflectionSetup::classical(1).unwrap();
        let g = Grid::default_for(&s).unwrap();
        let f = GridFunction::from_real_fn(Arc::clone(&g), |x| (-0.5 * x[0] * x[0]).exp());
        let lambdas = [0.1, 0.2, 0.3, 0.5];
        let rows = weak11_probe(0, &f, &lambdas).unwrap();
        let l1 = (2.0 * std::f64::consts::PI).sqrt();
        let steps = 240_000;
        let h = 24.0 / steps as f64;
        let values: Vec<f64> = (0..steps).map(|i| hilbert(-12.0 + (i as f64 + 0.5) * h).abs()).collect();
        for (row, &lambda) in rows.iter().zip(&lambdas) {
            let mass = values.iter().filter(|&&v| v > lambda).count() as f64 * h;
            let oracle = lambda * mass / l1;
            assert!(!row.truncated);
            assert!((row.ratio - oracle).abs() < 0.1 * oracle, "lambda={lambda}: {} vs {oracle}", row.ratio);
        }
    }
}
