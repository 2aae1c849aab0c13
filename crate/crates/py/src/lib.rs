//! Python bindings: a thin JSON-string surface over the core library.
//!
//! System and category descriptions come in as JSON strings in the same
//! schema the `qk` command line reads; results go back as JSON strings, so
//! callers stay in `json.loads` land and rationals stay exact.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use qk_core::behaviour::{behavioural_distance, BdOpts};
use qk_core::enriched::VCat;
use qk_core::functor::Elem;
use qk_core::lifting::Lifting;
use qk_core::logic::{
    eval_formula, expressivity_report, logical_distance, parse_formula, registry_for, LdOpts,
};
use qk_core::quantale::{fmt_rat, parse_rat};
use qk_core::sysspec;
use qk_core::transport;
use serde_json::json;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn coalgebra(system_json: &str) -> PyResult<qk_core::behaviour::Coalgebra> {
    let v: serde_json::Value = serde_json::from_str(system_json).map_err(err)?;
    sysspec::coalgebra_from_value(&v, None).map_err(err)
}

fn category(category_json: &str) -> PyResult<VCat> {
    let v: serde_json::Value = serde_json::from_str(category_json).map_err(err)?;
    sysspec::category_from_value(&v, None).map_err(err)
}

fn eps(epsilon: &str) -> PyResult<qk_core::quantale::Rat> {
    parse_rat(epsilon).map_err(err)
}

/// Behavioural distance of a system under a lifting; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (system_json, lifting, epsilon = "1/1000000", max_iter = 1000))]
fn bd(system_json: &str, lifting: &str, epsilon: &str, max_iter: usize) -> PyResult<String> {
    let c = coalgebra(system_json)?;
    let l = Lifting::parse(lifting, &c.functor).map_err(err)?;
    let opts = BdOpts { epsilon: eps(epsilon)?, max_iter };
    let res = behavioural_distance(&c, &l, &opts).map_err(err)?;
    let report = sysspec::distance_report_value(&c, lifting, &res);
    serde_json::to_string(&report).map_err(err)
}

/// Depth-stratified logical distance; returns per-depth matrices as JSON.
#[pyfunction]
#[pyo3(signature = (system_json, depth = 3, grid = 4, budget = 512))]
fn ld(system_json: &str, depth: usize, grid: u32, budget: usize) -> PyResult<String> {
    let c = coalgebra(system_json)?;
    let reg = registry_for(&c.functor);
    let opts = LdOpts { depth, const_den: grid, max_vectors: budget };
    let res = logical_distance(&c, &reg, &opts).map_err(err)?;
    let depths: Vec<serde_json::Value> = res
        .per_depth
        .iter()
        .map(|d| {
            let mut v = sysspec::category_to_value(&d.cat);
            let obj = v.as_object_mut().expect("object");
            obj.insert("depth".into(), json!(d.depth));
            obj.insert("vectors".into(), json!(d.vectors));
            v
        })
        .collect();
    serde_json::to_string(&json!({ "depths": depths, "budget_hit": res.budget_hit })).map_err(err)
}

/// Evaluate one formula; returns {state: value} as JSON.
#[pyfunction]
fn formula(system_json: &str, text: &str) -> PyResult<String> {
    let c = coalgebra(system_json)?;
    let reg = registry_for(&c.functor);
    let phi = parse_formula(&c.q, text).map_err(err)?;
    reg.validate(&phi).map_err(err)?;
    let vals = eval_formula(&phi, &c, &reg).map_err(err)?;
    let mut m = serde_json::Map::new();
    for (x, v) in c.states.iter().zip(&vals) {
        m.insert(x.to_string(), json!(c.q.value_to_string(v)));
    }
    serde_json::to_string(&serde_json::Value::Object(m)).map_err(err)
}

/// Behavioural vs logical distance on one system; returns the gap report.
#[pyfunction]
#[pyo3(signature = (system_json, lifting, depth = 3, grid = 4, budget = 512, epsilon = "1/1000000", max_iter = 1000))]
fn compare(
    system_json: &str,
    lifting: &str,
    depth: usize,
    grid: u32,
    budget: usize,
    epsilon: &str,
    max_iter: usize,
) -> PyResult<String> {
    let c = coalgebra(system_json)?;
    let l = Lifting::parse(lifting, &c.functor).map_err(err)?;
    let reg = registry_for(&c.functor);
    let bd_opts = BdOpts { epsilon: eps(epsilon)?, max_iter };
    let ld_opts = LdOpts { depth, const_den: grid, max_vectors: budget };
    let rep = expressivity_report(&c, &l, &reg, &bd_opts, &ld_opts).map_err(err)?;
    serde_json::to_string(&sysspec::expressivity_report_value(&rep)).map_err(err)
}

/// Wasserstein distance between two distributions over a finite category,
/// given as {point: mass} maps; exact rational in, exact rational out.
#[pyfunction]
fn wasserstein(category_json: &str, mu: &str, nu: &str) -> PyResult<String> {
    let ground = category(category_json)?;
    let (dm, dn) = (dist_on(&ground, mu)?, dist_on(&ground, nu)?);
    let d = transport::wasserstein_lp(&ground, &dm, &dn).map_err(err)?;
    Ok(fmt_rat(&d))
}

/// Total variation distance between two {point: mass} maps.
#[pyfunction]
fn tv(mu: &str, nu: &str) -> PyResult<String> {
    let (dm, dn) = (dist(mu)?, dist(nu)?);
    Ok(fmt_rat(&transport::total_variation(&dm, &dn)))
}

fn dist(text: &str) -> PyResult<Elem> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(err)?;
    let obj = v.as_object().ok_or_else(|| err("distribution must be an object"))?;
    let mut pairs = Vec::new();
    for (name, mass) in obj {
        let ms = mass.as_str().ok_or_else(|| err("masses must be rational strings"))?;
        pairs.push((Elem::atom(name), parse_rat(ms).map_err(err)?));
    }
    Elem::dist(pairs).map_err(err)
}

fn dist_on(ground: &VCat, text: &str) -> PyResult<Elem> {
    let d = dist(text)?;
    if let Elem::Dist(m) = &d {
        for x in m.keys() {
            if !ground.carrier.contains(x) {
                return Err(err(format!("{x} is not a point of the ground category")));
            }
        }
    }
    Ok(d)
}

#[pymodule]
fn pyqk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(bd, m)?)?;
    m.add_function(wrap_pyfunction!(ld, m)?)?;
    m.add_function(wrap_pyfunction!(formula, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(wasserstein, m)?)?;
    m.add_function(wrap_pyfunction!(tv, m)?)?;
    Ok(())
}
