//! Python module `dunkl`. Multiplicities are passed as a list, one per
//! coordinate; reports come back as JSON strings.

use std::sync::Arc;

use dunkl::czd::{cz_decompose, CzMesh};
use dunkl::error::DunklError;
use dunkl::grid::{Grid, GridFunction};
use dunkl::harness::{named_function, named_profile};
use dunkl::kernel::dunkl_kernel_real;
use dunkl::polar::{PolarOptions, PolarSpectrum};
use dunkl::riesz::{
    default_eps, hormander_estimate, riesz_kernel_route, riesz_multiplier_polar, riesz_truncated, HormanderOptions,
    KernelField, KernelRouteOptions,
};
use dunkl::rootsys::ReflectionSetup;
use dunkl::selftest::{self, SuiteOptions};
use dunkl::transform::dunkl_transform;
use dunkl::translate::translate_radial;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

type Result<T> = std::result::Result<T, DunklError>;

fn py_err(e: DunklError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Transform of a named corpus function: grid nodes and values.
pub fn transform_nodes(k: Vec<f64>, function: &str) -> Result<(Vec<Vec<f64>>, Vec<Complex64>)> {
    let setup = ReflectionSetup::new(k)?;
    let grid = Grid::default_for(&setup)?;
    let f = named_function(setup.dimension(), function)?;
    let spectrum = dunkl_transform(&GridFunction::from_fn(Arc::clone(&grid), |x| f.eval(x)))?;
    Ok((grid.points(), spectrum.values))
}

/// R_j f(x) by one route: "multiplier", "truncated" or "kernel".
pub fn riesz_value(k: Vec<f64>, function: &str, j: usize, x: &[f64], route: &str) -> Result<Complex64> {
    let setup = ReflectionSetup::new(k)?;
    if j >= setup.dimension() || x.len() != setup.dimension() {
        return Err(DunklError::InvalidArgument(format!(
            "need j < {n} and a point with {n} coordinates",
            n = setup.dimension()
        )));
    }
    let f = named_function(setup.dimension(), function)?;
    let grid = Grid::default_for(&setup)?;
    let sampled = GridFunction::from_fn(Arc::clone(&grid), |y| f.eval(y));
    let opts = PolarOptions::default();
    match route {
        "multiplier" => {
            let polar = PolarSpectrum::new(&sampled, 0.0, &opts)?;
            Ok(riesz_multiplier_polar(j, &polar, &[x.to_vec()])[0])
        }
        "truncated" => Ok(riesz_truncated(j, &sampled, x, &default_eps(6), &opts)?.limit),
        "kernel" => {
            let field = KernelField::new(&setup, if setup.dimension() == 1 { 64 } else { 24 });
            riesz_kernel_route(&field, j, &f, x, &KernelRouteOptions::default())
        }
        other => Err(DunklError::InvalidArgument(format!("unknown route `{other}`"))),
    }
}

/// CZ decomposition of a named function on [-half_side, half_side]^N; JSON properties.
pub fn cz_report(k: Vec<f64>, function: &str, lambda: Option<f64>, half_side: f64, level: u32) -> Result<String> {
    let setup = ReflectionSetup::new(k)?;
    let f = named_function(setup.dimension(), function)?;
    let mesh = CzMesh::from_fn(&setup, half_side, level, |x| f.eval(x))?;
    let lambda = lambda.unwrap_or_else(|| 2.0 * mesh.top_average());
    let d = cz_decompose(&mesh, lambda)?;
    let v = serde_json::json!({"lambda": lambda, "bad_cubes": d.bad.len(), "properties": d.properties});
    Ok(v.to_string())
}

/// Derived constants: gamma_k, p_k, c_k, d_k, homogeneous_dim.
#[pyfunction]
fn constants<'py>(py: Python<'py>, k: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let c = ReflectionSetup::new(k).map_err(py_err)?.constants();
    let d = PyDict::new(py);
    d.set_item("gamma_k", c.gamma_k)?;
    d.set_item("p_k", c.p_k)?;
    d.set_item("c_k", c.c_k)?;
    d.set_item("d_k", c.d_k)?;
    d.set_item("homogeneous_dim", c.homogeneous_dim)?;
    Ok(d)
}

/// E_k(lam, x) for real arguments.
#[pyfunction]
fn kernel(k: Vec<f64>, lam: Vec<f64>, x: Vec<f64>) -> PyResult<f64> {
    let setup = ReflectionSetup::new(k).map_err(py_err)?;
    if lam.len() != setup.dimension() || x.len() != setup.dimension() {
        return Err(PyValueError::new_err("lam and x need one entry per coordinate"));
    }
    Ok(dunkl_kernel_real(&setup, &lam, &x))
}

#[pyfunction]
#[pyo3(signature = (k, function = "gauss"))]
fn transform(k: Vec<f64>, function: &str) -> PyResult<(Vec<Vec<f64>>, Vec<Complex64>)> {
    transform_nodes(k, function).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (k, function, j, x, route = "multiplier"))]
fn riesz(k: Vec<f64>, function: &str, j: usize, x: Vec<f64>, route: &str) -> PyResult<Complex64> {
    riesz_value(k, function, j, &x, route).map_err(py_err)
}

/// tau_x f(y) for a radial profile, radial route.
#[pyfunction]
#[pyo3(signature = (k, x, y, profile = "gauss"))]
fn translate(k: Vec<f64>, x: Vec<f64>, y: Vec<f64>, profile: &str) -> PyResult<f64> {
    let setup = ReflectionSetup::new(k).map_err(py_err)?;
    let p = named_profile(profile).map_err(py_err)?;
    translate_radial(&setup, &x, &p, &y).map_err(py_err)
}

/// Extrapolated Hormander integral for one (y, y0) pair.
#[pyfunction]
fn hormander(k: Vec<f64>, j: usize, y: Vec<f64>, y0: Vec<f64>) -> PyResult<f64> {
    let setup = ReflectionSetup::new(k).map_err(py_err)?;
    let e = hormander_estimate(&setup, j, &y, &y0, &HormanderOptions::default()).map_err(py_err)?;
    Ok(e.extrapolated)
}

#[pyfunction]
#[pyo3(signature = (k, function = "gauss-shifted", lam = None, half_side = 8.0, level = 10))]
fn cz(k: Vec<f64>, function: &str, lam: Option<f64>, half_side: f64, level: u32) -> PyResult<String> {
    cz_report(k, function, lam, half_side, level).map_err(py_err)
}

/// Runs criteria on one setup; returns (all pass, summary lines).
#[pyfunction]
#[pyo3(signature = (k, criteria, quick = true, seed = 1))]
fn selftest_criteria(k: Vec<f64>, criteria: Vec<usize>, quick: bool, seed: u64) -> PyResult<(bool, Vec<String>)> {
    let setup = ReflectionSetup::new(k).map_err(py_err)?;
    if let Some(bad) = criteria.iter().find(|&&i| !(1..=9).contains(&i)) {
        return Err(PyValueError::new_err(format!("no criterion {bad}")));
    }
    let opts = if quick { SuiteOptions::quick(seed) } else { SuiteOptions::full(seed) };
    let reports: Vec<_> = criteria
        .iter()
        .map(|&id| selftest::criterion(id, std::slice::from_ref(&setup), &opts))
        .collect();
    Ok((reports.iter().all(|r| r.pass), reports.iter().map(|r| r.line()).collect()))
}

#[pymodule]
#[pyo3(name = "dunkl")]
fn dunkl_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(transform, m)?)?;
    m.add_function(wrap_pyfunction!(riesz, m)?)?;
    m.add_function(wrap_pyfunction!(translate, m)?)?;
    m.add_function(wrap_pyfunction!(hormander, m)?)?;
    m.add_function(wrap_pyfunction!(cz, m)?)?;
    m.add_function(wrap_pyfunction!(selftest_criteria, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_of_gauss_is_gauss() {
        // F(e^{-|x|^2/2}) = e^{-|xi|^2/2}.
        let (nodes, values) = transform_nodes(vec![0.5], "gauss").unwrap();
        for (x, v) in nodes.iter().zip(&values).step_by(7) {
            assert!((v - Complex64::new((-0.5 * x[0] * x[0]).exp(), 0.0)).norm() < 1e-10, "{x:?}");
        }
    }

    #[test]
    fn routes_agree_through_the_wrappers() {
        let x = [7.5];
        let m = riesz_value(vec![0.5], "bump-pair-odd", 0, &x, "multiplier").unwrap();
        let k = riesz_value(vec![0.5], "bump-pair-odd", 0, &x, "kernel").unwrap();
        assert!((m - k).norm() < 1e-4 * m.norm(), "{m} {k}");
        assert!(riesz_value(vec![0.5], "gauss", 1, &x, "kernel").is_err());
        assert!(riesz_value(vec![0.5], "gauss", 0, &x, "fft").is_err());
    }

    #[test]
    fn cz_report_is_json() {
        let s = cz_report(vec![0.5], "gauss-shifted", None, 8.0, 8).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert!(v["properties"]["c_good"].as_f64().unwrap() <= 8.0);
    }
}
