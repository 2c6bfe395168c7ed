//! One function per subcommand. Each computes, records its checks and
//! artifacts on the [`Run`], and hands it back for the summary.

use std::collections::BTreeMap;
use std::sync::Arc;

use clap::{Args, ValueEnum};
use dunkl::czd::{constant_budget, cz_decompose as decompose, random_mesh, CzMesh};
use dunkl::grid::GridFunction;
use dunkl::harness::{
    lp_ratio_scan, named_function, named_profile, riesz_inequality_check, sobolev_inequality_check, Corpus,
    DETERMINISTIC,
};
use dunkl::polar::PolarSpectrum;
use dunkl::polycalc::commutativity_suite;
use dunkl::riesz::{
    default_eps, hormander_estimate, riesz_kernel_route, riesz_multiplier_polar, riesz_truncated, KernelField,
    KernelRouteOptions,
};
use dunkl::selftest::{self, hormander_pairs, limits, sobolev_p, three_route_configurations, SuiteOptions, P_GRID};
use dunkl::transform::{dunkl_transform, inversion_defect, plancherel_defect};
use dunkl::translate::{translate_radial_grid, translate_spectral};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::report::{num, CliError, Run};

type Outcome = Result<Run, CliError>;

fn coords(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("{prefix}_{j}")).collect()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

#[derive(Debug, Args, Serialize)]
pub struct TransformArgs {
    /// Corpus family, `name[:dilate=t,scale=c]`.
    #[arg(long, default_value = "gauss")]
    pub function: String,
}

pub fn transform(mut run: Run, args: &TransformArgs) -> Outcome {
    let n = run.setup().dimension();
    let grid = run.config.grid()?;
    let f = named_function(n, &args.function).map_err(|e| CliError::Usage(e.to_string()))?;
    let sampled = GridFunction::from_fn(Arc::clone(&grid), |x| f.eval(x));
    let spectrum = dunkl_transform(&sampled)?;
    let mut header = coords("xi", n);
    header.extend(["re".to_string(), "im".to_string()]);
    let rows: Vec<Vec<String>> = (0..grid.len())
        .map(|i| {
            let mut r: Vec<String> = grid.point(i).into_iter().map(num).collect();
            r.push(num(spectrum.values[i].re));
            r.push(num(spectrum.values[i].im));
            r
        })
        .collect();
    run.write_csv("transform.csv", &header, &rows)?;
    let tol = run.tol(limits::TRANSFORM);
    let plancherel = plancherel_defect(&sampled)?;
    let inversion = inversion_defect(&sampled)?;
    run.check("Plancherel defect", plancherel, tol);
    run.check("inversion defect", inversion, tol);
    let report = json!({
        "function": f,
        "nodes": grid.len(),
        "plancherel_defect": plancherel,
        "inversion_defect": inversion,
    });
    run.write_json("transform.json", args, &report)?;
    Ok(run)
}

#[derive(Debug, Args, Serialize)]
pub struct TranslateArgs {
    /// Radial profile: gauss[:width=s], radial-mix, radial-ring, ...
    #[arg(long, default_value = "gauss")]
    pub profile: String,
    /// Translation point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub x: Vec<f64>,
}

pub fn translate(mut run: Run, args: &TranslateArgs) -> Outcome {
    let n = run.setup().dimension();
    if args.x.len() != n {
        return Err(CliError::Usage(format!("--x needs {n} coordinates, got {}", args.x.len())));
    }
    let profile = named_profile(&args.profile).map_err(|e| CliError::Usage(e.to_string()))?;
    let grid = run.config.grid()?;
    let f = GridFunction::from_real_fn(Arc::clone(&grid), |y| profile.eval_point(y));
    let spectral = translate_spectral(&args.x, &f)?;
    let radial = translate_radial_grid(&grid, &args.x, &profile)?;
    let mut header = coords("y", n);
    header.extend(["spectral_re", "spectral_im", "radial", "discrepancy"].map(String::from));
    let mut worst = 0.0f64;
    let rows: Vec<Vec<String>> = (0..grid.len())
        .map(|i| {
            let d = (spectral.values[i] - radial.values[i]).norm();
            worst = worst.max(d);
            let mut r: Vec<String> = grid.point(i).into_iter().map(num).collect();
            r.extend([spectral.values[i].re, spectral.values[i].im, radial.values[i].re, d].map(num));
            r
        })
        .collect();
    run.write_csv("translate.csv", &header, &rows)?;
    let gap = spectral.relative_l2_error(&radial);
    run.check("spectral vs radial translation, relative L2", gap, run.tol(limits::TRANSLATION_ROUTES));
    let report = json!({
        "profile": profile,
        "x": args.x,
        "relative_l2": gap,
        "max_discrepancy": worst,
    });
    run.write_json("translate.json", args, &report)?;
    Ok(run)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Multiplier,
    Truncated,
    Kernel,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct RieszArgs {
    #[arg(long, value_enum, default_value_t = Route::All)]
    pub route: Route,
    /// Number of (f, x) configurations; x lies outside the orbit of supp f.
    #[arg(long, default_value_t = 8)]
    pub pairs: usize,
    /// Truncation radii used by the extrapolated truncated route.
    #[arg(long, default_value_t = 6)]
    pub eps_count: usize,
}

pub fn riesz(mut run: Run, args: &RieszArgs) -> Outcome {
    if args.pairs == 0 || args.eps_count < 2 {
        return Err(CliError::Usage("--pairs must be positive and --eps-count at least 2".into()));
    }
    let setup = run.setup();
    let n = setup.dimension();
    let grid = run.config.grid()?;
    let polar_opts = run.config.polar.clone();
    let field = KernelField::new(&setup, run.config.mu_nodes());
    let want = |r: Route| args.route == r || args.route == Route::All;
    let per = 4;
    let configs = three_route_configurations(&setup, args.pairs.div_ceil(per), per, run.common.seed);
    let mut header = vec!["function".to_string(), "j".to_string()];
    header.extend(coords("x", n));
    for r in ["multiplier", "truncated", "kernel"] {
        if want(match r {
            "multiplier" => Route::Multiplier,
            "truncated" => Route::Truncated,
            _ => Route::Kernel,
        }) {
            header.extend([format!("{r}_re"), format!("{r}_im")]);
        }
    }
    if args.route == Route::All {
        header.extend(["defect_truncated".to_string(), "defect_kernel".to_string()]);
    }
    let (mut rows, mut nonfinite, mut worst_t, mut worst_k) = (Vec::new(), 0usize, 0.0f64, 0.0f64);
    let mut count = 0;
    'outer: for (f, xs) in &configs {
        let sampled = GridFunction::from_fn(Arc::clone(&grid), |x| f.eval(x));
        let polar = if want(Route::Multiplier) {
            Some(PolarSpectrum::new(&sampled, 0.0, &polar_opts)?)
        } else {
            None
        };
        for (i, x) in xs.iter().enumerate() {
            if count == args.pairs {
                break 'outer;
            }
            count += 1;
            let j = i % n;
            let mut row = vec![f.name.clone(), j.to_string()];
            row.extend(x.iter().map(|&v| num(v)));
            let mut values = Vec::new();
            let m = polar.as_ref().map(|p| riesz_multiplier_polar(j, p, std::slice::from_ref(x))[0]);
            values.extend(m);
            let t = if want(Route::Truncated) {
                Some(riesz_truncated(j, &sampled, x, &default_eps(args.eps_count), &polar_opts)?.limit)
            } else {
                None
            };
            values.extend(t);
            let k = if want(Route::Kernel) {
                Some(riesz_kernel_route(&field, j, f, x, &KernelRouteOptions::default())?)
            } else {
                None
            };
            values.extend(k);
            nonfinite += values.iter().filter(|v| !v.is_finite()).count();
            for v in &values {
                row.extend([num(v.re), num(v.im)]);
            }
            if let (Some(m), Some(t), Some(k)) = (m, t, k) {
                let (dt, dk) = (rel(t, m), rel(k, m));
                worst_t = worst_t.max(dt);
                worst_k = worst_k.max(dk);
                row.extend([num(dt), num(dk)]);
            }
            rows.push(row);
        }
    }
    run.write_csv("riesz.csv", &header, &rows)?;
    run.check("non-finite route values", nonfinite as f64, 0.0);
    if args.route == Route::All {
        let tol = run.tol(limits::THREE_ROUTE);
        run.check("multiplier vs truncated, relative", worst_t, tol);
        run.check("multiplier vs kernel, relative", worst_k, tol);
    }
    let report = json!({
        "rows": rows.len(),
        "max_defect_truncated": (args.route == Route::All).then_some(worst_t),
        "max_defect_kernel": (args.route == Route::All).then_some(worst_k),
    });
    run.write_json("riesz.json", args, &report)?;
    Ok(run)
}

#[derive(Debug, Args, Serialize)]
pub struct HormanderArgs {
    /// Number of random (y, y0) pairs.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    /// Truncation radius in units of |y - y0|; the setup file's value otherwise.
    #[arg(long)]
    pub radius_factor: Option<f64>,
    /// Repeat each pair with doubled quadrature and check the drift.
    #[arg(long)]
    pub refine: bool,
}

#[derive(Serialize)]
struct PairOut {
    j: usize,
    y: Vec<f64>,
    y0: Vec<f64>,
}

pub fn hormander_check(mut run: Run, args: &HormanderArgs) -> Outcome {
    let setup = run.setup();
    let mut opts = run.config.hormander.clone();
    if let Some(r) = args.radius_factor {
        if !(r > 2.0 && r.is_finite()) {
            return Err(CliError::Usage(format!("--radius-factor must exceed 2, got {r}")));
        }
        opts.radius_factor = r;
    }
    let (mut pairs, mut values, mut tails) = (Vec::new(), Vec::new(), Vec::new());
    let (mut violations, mut drift) = (0u64, 0.0f64);
    for (j, y, y0) in hormander_pairs(&setup, args.samples, run.common.seed) {
        let e = hormander_estimate(&setup, j, &y, &y0, &opts)?;
        violations += e.sandwich_violations;
        if args.refine {
            let r = hormander_estimate(&setup, j, &y, &y0, &opts.refined())?;
            violations += r.sandwich_violations;
            drift = drift.max((r.extrapolated - e.extrapolated).abs() / e.extrapolated);
        }
        values.push(e.extrapolated);
        tails.push(e.tail.abs());
        pairs.push(PairOut { j, y, y0 });
    }
    let sup = values.iter().cloned().fold(0.0f64, f64::max);
    run.check("non-finite integrals", values.iter().filter(|v| !v.is_finite()).count() as f64, 0.0);
    run.check("orbit sandwich violations", violations as f64, 0.0);
    if args.refine {
        run.check("drift under quadrature doubling", drift, run.tol(limits::DRIFT));
    }
    let report = json!({
        "options": opts,
        "pairs": pairs,
        "values": values,
        "sup": sup,
        "tail_bounds": tails,
        "drift": args.refine.then_some(drift),
    });
    run.write_json("hormander.json", args, &report)?;
    Ok(run)
}

#[derive(Debug, Args, Serialize)]
pub struct CzArgs {
    /// Corpus family `name[:dilate=t,scale=c]`, or `random` for a seeded bump sum.
    #[arg(long, default_value = "gauss-shifted")]
    pub function: String,
    /// Level; twice the largest top-cube average when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// The mesh covers [-half_side, half_side]^N.
    #[arg(long, default_value_t = 8.0)]
    pub half_side: f64,
    /// 2^level cells per axis; 12 in 1D, 7 in 2D, 4 above.
    #[arg(long)]
    pub level: Option<u32>,
}

pub fn cz_decompose(mut run: Run, args: &CzArgs) -> Outcome {
    let setup = run.setup();
    let n = setup.dimension();
    let level = args.level.unwrap_or(match n {
        1 => 12,
        2 => 7,
        _ => 4,
    });
    let mesh = if args.function == "random" {
        let mut rng = ChaCha8Rng::seed_from_u64(run.common.seed);
        random_mesh(&setup, args.half_side, level, &mut rng)?
    } else {
        let f = named_function(n, &args.function).map_err(|e| CliError::Usage(e.to_string()))?;
        CzMesh::from_fn(&setup, args.half_side, level, |x| f.eval(x))?
    };
    let lambda = args.lambda.unwrap_or_else(|| 2.0 * mesh.top_average());
    let d = decompose(&mesh, lambda)?;
    let p = &d.properties;
    let budget = run.tol(constant_budget(&setup));
    run.check("reconstruction f = h + sum b_j", p.reconstruction, 1e-12 * p.c_good.max(1.0));
    run.check("(i) sup|h| / lambda", p.c_good, budget);
    run.check("(ii) cubes outside their balls", if p.supports_inside_balls { 0.0 } else { 1.0 }, 0.0);
    run.check("(iii) |int b_j| / int_Qj |f|", p.mean_zero, 1e-12);
    run.check("(iv) ||b_j||_1 / (lambda m(B_j))", p.c_local, budget);
    run.check("(v) lambda sum m(B_j) / ||f||_1", p.c_total, budget);
    let report = json!({
        "lambda": lambda,
        "level": level,
        "budget": budget,
        "norm_l1": mesh.norm_l1(),
        "properties": p,
        "bad": d.bad,
    });
    run.write_json("cz.json", args, &report)?;
    Ok(run)
}

fn per_p(ps: &[f64], sups: &[f64]) -> BTreeMap<String, f64> {
    ps.iter().zip(sups).map(|(p, s)| (format!("{p}"), *s)).collect()
}

#[derive(Debug, Args, Serialize)]
pub struct LpArgs {
    /// Riesz coordinate j (from 0).
    #[arg(long, default_value_t = 0)]
    pub coordinate: usize,
    #[arg(long, value_delimiter = ',', default_values_t = P_GRID)]
    pub p: Vec<f64>,
}

pub fn lp_scan(mut run: Run, args: &LpArgs) -> Outcome {
    let n = run.setup().dimension();
    if args.coordinate >= n {
        return Err(CliError::Usage(format!("--coordinate must be below {n}")));
    }
    if args.p.iter().any(|&p| !(p > 1.0 && p.is_finite())) {
        return Err(CliError::Usage("every --p must be finite and > 1".into()));
    }
    let grid = run.config.grid()?;
    let corpus = Corpus::standard(n, run.common.seed).sample(&grid);
    let scan = lp_ratio_scan(args.coordinate, &corpus, &args.p, run.common.seed)?;
    let rows: Vec<Vec<String>> = scan
        .rows
        .iter()
        .map(|r| vec![r.function.clone(), format!("{}", r.p), num(r.ratio)])
        .collect();
    run.write_csv("lp_scan.csv", &["function", "p", "ratio"].map(String::from), &rows)?;
    if let Some(i) = args.p.iter().position(|&p| p == 2.0) {
        run.check("sup ||R_j f||_2 / ||f||_2 - 1", scan.sup_per_p[i] - 1.0, run.tol(limits::P_TWO));
    }
    run.check("non-finite ratios", scan.rows.iter().filter(|r| !r.ratio.is_finite()).count() as f64, 0.0);
    let report = json!({
        "coordinate": args.coordinate,
        "functions": corpus.len(),
        "sup_ratio_per_p": per_p(&args.p, &scan.sup_per_p),
    });
    run.write_json("lp_scan.json", args, &report)?;
    Ok(run)
}

#[derive(Debug, Args, Serialize)]
pub struct InequalityArgs {
    /// Exponents for ||T_r T_s f||_p <= C ||Delta_k f||_p.
    #[arg(long, value_delimiter = ',', default_values_t = [1.5, 3.0])]
    pub p: Vec<f64>,
    /// Sobolev exponent p in (1, D); chosen from D when absent.
    #[arg(long)]
    pub sobolev_p: Option<f64>,
}

pub fn inequalities(mut run: Run, args: &InequalityArgs) -> Outcome {
    let setup = run.setup();
    let n = setup.dimension();
    if args.p.iter().any(|&p| !(p > 1.0 && p.is_finite())) {
        return Err(CliError::Usage("every --p must be finite and > 1".into()));
    }
    let grid = run.config.grid()?;
    let corpus = Corpus::standard(n, run.common.seed);
    let mut rows = Vec::new();
    let mut sups = vec![0.0f64; args.p.len()];
    let mut defect = 0.0f64;
    for (i, &p) in args.p.iter().enumerate() {
        for r in 0..n {
            for s in r..n {
                let rep = riesz_inequality_check(&grid, r, s, &corpus.members, p)?;
                sups[i] = sups[i].max(rep.sup_ratio);
                defect = defect.max(rep.max_factorization_defect);
                for row in &rep.rows {
                    rows.push(vec![
                        "riesz".into(),
                        format!("{r},{s}"),
                        row.function.clone(),
                        format!("{p}"),
                        row.ratio.map(num).unwrap_or_default(),
                        num(row.factorization_defect),
                    ]);
                }
            }
        }
    }
    run.check("factorization T_r T_s = -R_r R_s Delta_k", defect, run.tol(limits::FACTORIZATION));
    let sobolev_exp = args.sobolev_p.or_else(|| sobolev_p(&setup));
    let sobolev = match sobolev_exp {
        Some(p) => {
            let rep = sobolev_inequality_check(&grid, &corpus.members[..DETERMINISTIC], p)?;
            for row in &rep.rows {
                let worst = row.ratios.iter().cloned().fold(0.0f64, f64::max);
                rows.push(vec![
                    "sobolev".into(),
                    String::new(),
                    row.function.clone(),
                    format!("{p}"),
                    num(worst),
                    num(row.drift),
                ]);
            }
            run.check("Sobolev ratio drift under dilation", rep.max_drift, limits::DRIFT);
            Some(json!({"p": rep.p, "q": rep.q, "sup_ratio": rep.sup_ratio, "max_drift": rep.max_drift}))
        }
        None => None,
    };
    run.write_csv(
        "inequalities.csv",
        &["kind", "pair", "function", "p", "ratio", "defect"].map(String::from),
        &rows,
    )?;
    let report = json!({
        "sup_ratio_per_p": per_p(&args.p, &sups),
        "max_factorization_defect": defect,
        "sobolev": sobolev,
    });
    run.write_json("inequalities.json", args, &report)?;
    Ok(run)
}

#[derive(Debug, Args, Serialize)]
pub struct PolyArgs {
    /// Random rational polynomials to test.
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 6)]
    pub degree: u32,
}

pub fn poly_check(mut run: Run, args: &PolyArgs) -> Outcome {
    let rep = commutativity_suite(&run.setup(), args.count, args.degree, run.common.seed);
    run.check("T_i T_j f = T_j T_i f, failing pairs", rep.failures as f64, 0.0);
    run.write_json("poly_check.json", args, &rep)?;
    Ok(run)
}

#[derive(Debug, Args, Serialize)]
pub struct SelftestArgs {
    /// Criteria to run (1-9); all when absent.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<usize>,
    /// Small sample counts instead of the acceptance sizes.
    #[arg(long)]
    pub quick: bool,
}

pub fn selftest(mut run: Run, args: &SelftestArgs) -> Outcome {
    if run.common.tol.is_some() {
        return Err(CliError::Usage("selftest uses the fixed criterion limits; drop --tol".into()));
    }
    let ids: Vec<usize> = if args.criteria.is_empty() { (1..=9).collect() } else { args.criteria.clone() };
    if let Some(bad) = ids.iter().find(|&&i| !(1..=9).contains(&i)) {
        return Err(CliError::Usage(format!("no criterion {bad}")));
    }
    let opts = if args.quick {
        SuiteOptions::quick(run.common.seed)
    } else {
        SuiteOptions::full(run.common.seed)
    };
    let setups = [run.setup()];
    let mut reports = Vec::new();
    for id in ids {
        let mut r = selftest::criterion(id, &setups, &opts);
        println!("{}", r.line());
        for m in &r.measurements {
            let name = format!("criterion {id}: {} [{}]", m.name, m.setup);
            if m.name == selftest::RUNTIME {
                run.check_timing(name, m.value, m.limit);
            } else {
                run.check(name, m.value, m.limit);
            }
        }
        r.measurements.retain(|m| m.name != selftest::RUNTIME);
        reports.push(r);
    }
    run.write_json("selftest.json", args, &json!({"options": opts, "criteria": reports}))?;
    Ok(run)
}
