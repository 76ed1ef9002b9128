//! Python bindings: lattices, nested chains, the rate-region calculator and
//! both Monte Carlo drivers. Vectors cross the boundary as lists of floats,
//! reports come back as dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nestcode::chain::{self, Alpha, User};
use nestcode::mac::{self, MacConfig, Pipeline, Target};
use nestcode::parallel::trial_rng;
use nestcode::region::{self, RateRegionPoint, RegionReport};
use nestcode::relay;
use nestcode::Family;

fn err(e: nestcode::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>()
        .map_err(|e| PyValueError::new_err(format!("bad {what} {s:?}: {e}")))
}

fn user(u: u8) -> PyResult<User> {
    match u {
        1 => Ok(User::One),
        2 => Ok(User::Two),
        _ => Err(PyValueError::new_err(format!("user must be 1 or 2, got {u}"))),
    }
}

#[pyclass(name = "Lattice", module = "nestcode_py", frozen)]
struct PyLattice(nestcode::Lattice);

#[pymethods]
impl PyLattice {
    /// Rows of `generator` are the basis vectors.
    #[new]
    fn new(generator: Vec<Vec<f64>>) -> PyResult<Self> {
        nestcode::Lattice::from_generator(&generator).map(Self).map_err(err)
    }

    /// `family` is one of "z", "d", "e8".
    #[staticmethod]
    fn canonical(family: &str, n: usize) -> PyResult<Self> {
        nestcode::Lattice::canonical(parse::<Family>(family, "family")?, n)
            .map(Self)
            .map_err(err)
    }

    fn scale(&self, c: f64) -> PyResult<Self> {
        self.0.scale(c).map(Self).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn family(&self) -> String {
        self.0.family().to_string()
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.0.volume()
    }

    fn generator(&self) -> Vec<Vec<f64>> {
        self.0.generator_rows()
    }

    fn nearest_point(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.nearest_point(&x).map_err(err)
    }

    fn mod_lattice(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.mod_lattice(&x).map_err(err)
    }

    fn contains(&self, x: Vec<f64>) -> PyResult<bool> {
        self.0.contains(&x).map_err(err)
    }

    fn is_sublattice_of(&self, fine: &PyLattice) -> bool {
        self.0.is_sublattice_of(&fine.0)
    }

    fn vnr(&self, noise_var: f64) -> PyResult<f64> {
        self.0.vnr(noise_var).map_err(err)
    }

    /// Exhaustive search within `radius`, for checking `nearest_point`.
    fn brute_force_cvp(&self, x: Vec<f64>, radius: f64) -> PyResult<Vec<f64>> {
        self.0.brute_force_cvp(&x, radius).map_err(err)
    }

    /// Returns `(sigma2, std_err)`; deterministic in `seed`.
    #[pyo3(signature = (samples = 100_000, seed = 0))]
    fn second_moment(&self, py: Python<'_>, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
        let lat = &self.0;
        let est = py.detach(|| lat.second_moment_mc(samples, seed)).map_err(err)?;
        Ok((est.sigma2, est.std_err))
    }

    fn second_moment_exact(&self) -> Option<f64> {
        self.0.second_moment_exact()
    }

    fn __repr__(&self) -> String {
        format!("Lattice(family={}, n={}, volume={})", self.0.family(), self.0.dim(), self.0.volume())
    }
}

#[pyclass(name = "NestedChain", module = "nestcode_py", frozen)]
struct PyChain(chain::NestedChain);

#[pymethods]
impl PyChain {
    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha().value()
    }

    #[getter]
    fn power(&self) -> f64 {
        self.0.power()
    }

    fn lambda1(&self) -> PyLattice {
        PyLattice(self.0.lambda1().clone())
    }

    fn lambda2(&self) -> PyLattice {
        PyLattice(self.0.lambda2().clone())
    }

    fn lambda_c(&self) -> PyLattice {
        PyLattice(self.0.lambda_c().clone())
    }

    fn swapped(&self) -> Self {
        Self(self.0.swapped())
    }

    fn code_rate(&self, user_index: u8) -> PyResult<f64> {
        Ok(self.0.code_rate(user(user_index)?))
    }

    fn codebook(&self, user_index: u8) -> PyResult<Vec<Vec<f64>>> {
        let cb = self.0.enumerate_codebook(user(user_index)?).map_err(err)?;
        Ok(cb.codewords)
    }

    /// `(name, passed, detail)` for every structural check.
    fn validate(&self) -> Vec<(String, bool, String)> {
        self.0
            .validate()
            .into_iter()
            .map(|c| (c.name, c.passed, c.detail))
            .collect()
    }

    fn encode(&self, user_index: u8, v: Vec<f64>, d: Vec<f64>) -> PyResult<Vec<f64>> {
        mac::encode(&self.0, user(user_index)?, &v, &d).map_err(err)
    }

    fn target_t1(&self, v1: Vec<f64>, v2: Vec<f64>, d2: Vec<f64>) -> PyResult<Vec<f64>> {
        mac::target_t1(&self.0, &v1, &v2, &d2).map_err(err)
    }

    fn target_t2(&self, v1: Vec<f64>, v2: Vec<f64>, d1: Vec<f64>) -> PyResult<Vec<f64>> {
        mac::target_t2(&self.0, &v1, &v2, &d1).map_err(err)
    }

    fn decode_t1(&self, y: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> PyResult<Vec<f64>> {
        mac::decode_t1(&self.0, &y, &d1, &d2).map_err(err)
    }

    fn decode_t2(&self, y: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> PyResult<Vec<f64>> {
        mac::decode_t2(&self.0, &y, &d1, &d2).map_err(err)
    }

    /// Node 1's estimate of `v2` from a decoded `t1`.
    fn recover_v2(&self, t1: Vec<f64>, v1: Vec<f64>) -> PyResult<Vec<f64>> {
        relay::node_recover_v2(&self.0, &t1, &v1).map_err(err)
    }

    /// Node 2's estimate of `v1` from a decoded `t1`.
    fn recover_v1_from_t1(&self, t1: Vec<f64>, v2: Vec<f64>, d2: Vec<f64>) -> PyResult<Vec<f64>> {
        relay::node_recover_v1_from_t1(&self.0, &t1, &v2, &d2).map_err(err)
    }

    /// One channel use from stream `(seed, index)`, the same draw the
    /// simulators make for trial `index`.
    #[pyo3(signature = (noise_var, seed, index = 0, target = "T1"))]
    fn trial<'py>(
        &self,
        py: Python<'py>,
        noise_var: f64,
        seed: u64,
        index: u64,
        target: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let p = Pipeline::new(&self.0, parse::<Target>(target, "target")?).map_err(err)?;
        let t = p.trial(noise_var, &mut trial_rng(seed, index));
        let d = PyDict::new(py);
        for (k, v) in [
            ("v1", t.v1),
            ("v2", t.v2),
            ("d1", t.d1),
            ("d2", t.d2),
            ("x1", t.x1),
            ("x2", t.x2),
            ("z", t.z),
            ("y", t.y),
            ("y_d", t.y_d),
            ("target", t.target),
            ("estimate", t.estimate),
            ("z_eff", t.z_eff),
        ] {
            d.set_item(k, v)?;
        }
        d.set_item("correct", t.correct)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("NestedChain(n={}, alpha={}, P={})", self.0.dim(), self.0.alpha(), self.0.power())
    }
}

/// Self-similar chain with α₁ = `alpha` (a fraction such as "1/2") or 1/`k`.
#[pyfunction]
#[pyo3(signature = (family, n, k = None, f = 2, power = 1.0, alpha = None))]
fn build_chain(
    family: &str,
    n: usize,
    k: Option<u32>,
    f: u32,
    power: f64,
    alpha: Option<&str>,
) -> PyResult<PyChain> {
    let family = parse::<Family>(family, "family")?;
    let alpha = match (k, alpha) {
        (Some(_), Some(_)) => return Err(PyValueError::new_err("give k or alpha, not both")),
        (_, Some(a)) => parse::<Alpha>(a, "alpha")?,
        (k, None) => Alpha::reciprocal(k.unwrap_or(2)).map_err(err)?,
    };
    chain::build_chain_with_alpha(family, n, alpha, f, power)
        .map(PyChain)
        .map_err(err)
}

fn config(chain: &PyChain, snr: f64, trials: u64, seed: u64, target: &str) -> PyResult<MacConfig> {
    if !(snr > 0.0) {
        return Err(PyValueError::new_err(format!("snr must be positive, got {snr}")));
    }
    let config = MacConfig {
        noise_var: chain.0.power() / snr,
        chain: chain.0.clone(),
        trials,
        master_seed: seed,
        target: parse::<Target>(target, "target")?,
    };
    config.validate().map_err(err)?;
    Ok(config)
}

#[pyfunction]
#[pyo3(signature = (chain, snr, trials, seed, target = "T1"))]
fn run_monte_carlo<'py>(
    py: Python<'py>,
    chain: &PyChain,
    snr: f64,
    trials: u64,
    seed: u64,
    target: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let config = config(chain, snr, trials, seed, target)?;
    let r = py.detach(|| mac::run_monte_carlo(&config)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("target", r.target.to_string())?;
    d.set_item("snr", r.snr)?;
    d.set_item("alpha1", r.alpha1)?;
    d.set_item("n", r.n)?;
    d.set_item("family", r.family)?;
    d.set_item("k", r.k)?;
    d.set_item("f", r.f)?;
    d.set_item("error_count", r.error_count)?;
    d.set_item("trials", r.trials)?;
    d.set_item("p_e_hat", r.p_e_hat)?;
    d.set_item("wilson_95_interval", r.wilson_95_interval)?;
    d.set_item("measured_zeff_var_per_dim", r.measured_zeff_var_per_dim)?;
    d.set_item("predicted_zeff_var_per_dim", r.predicted_zeff_var_per_dim)?;
    d.set_item("vnr_at_predicted_var", r.vnr_at_predicted_var)?;
    d.set_item("master_seed", r.master_seed)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (chain, snr, trials, seed, target = "T1"))]
fn run_gtwrc<'py>(
    py: Python<'py>,
    chain: &PyChain,
    snr: f64,
    trials: u64,
    seed: u64,
    target: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let config = config(chain, snr, trials, seed, target)?;
    let r = py.detach(|| relay::run_gtwrc(&config)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("snr", r.snr)?;
    d.set_item("alpha1", r.alpha1)?;
    d.set_item("trials", r.trials)?;
    d.set_item("uplink_errors", r.uplink_errors)?;
    d.set_item("e2e_errors", r.e2e_errors)?;
    d.set_item("mismatched_trials", r.mismatched_trials)?;
    d.set_item("master_seed", r.master_seed)?;
    Ok(d)
}

#[pyfunction]
fn r1_region(alpha1: f64, snr: f64) -> PyResult<(f64, f64)> {
    region::r1_region(alpha1, snr).map(|p| (p.r1, p.r2)).map_err(err)
}

#[pyfunction]
fn r2_region(alpha2: f64, snr: f64) -> PyResult<(f64, f64)> {
    region::r2_region(alpha2, snr).map(|p| (p.r1, p.r2)).map_err(err)
}

#[pyfunction]
fn alpha_mmse(snr: f64) -> f64 {
    region::alpha_mmse(snr)
}

#[pyfunction]
fn outer_bound(snr: f64) -> f64 {
    region::outer_bound(snr)
}

#[pyfunction]
fn cf_rate(snr: f64) -> f64 {
    region::cf_rate(snr)
}

#[pyfunction]
fn convex_hull(points: Vec<(f64, f64)>) -> PyResult<Vec<(f64, f64)>> {
    region::convex_hull(&points).map_err(err)
}

fn point_tuple(p: &RateRegionPoint) -> (String, Option<f64>, f64, f64) {
    (p.scheme.tag().to_string(), p.alpha, p.r1, p.r2)
}

/// Summary numbers plus `rows`, a list of `(scheme, alpha, r1, r2)`.
#[pyfunction]
#[pyo3(signature = (snr, grid = 512))]
fn rate_region<'py>(py: Python<'py>, snr: f64, grid: usize) -> PyResult<Bound<'py, PyDict>> {
    let alphas = region::alpha_grid(grid, snr).map_err(err)?;
    let r = RegionReport::compute(snr, &alphas).map_err(err)?;
    let s = &r.summary;
    let d = PyDict::new(py);
    d.set_item("snr", s.snr)?;
    d.set_item("alpha_mmse", s.alpha_mmse)?;
    d.set_item("point_a", (s.point_a.r1, s.point_a.r2))?;
    d.set_item("point_b", (s.point_b.r1, s.point_b.r2))?;
    d.set_item("outer_bound", s.outer_bound)?;
    d.set_item("cf_rate", s.cf_rate)?;
    d.set_item("hull_symmetric_rate", s.hull_symmetric_rate)?;
    d.set_item("hull_cf_symmetric_rate", s.hull_cf_symmetric_rate)?;
    d.set_item("grid_size", s.grid_size)?;
    let rows: Vec<_> = r.rows(true, true).iter().map(point_tuple).collect();
    d.set_item("rows", rows)?;
    Ok(d)
}

#[pymodule]
fn nestcode_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLattice>()?;
    m.add_class::<PyChain>()?;
    m.add_function(wrap_pyfunction!(build_chain, m)?)?;
    m.add_function(wrap_pyfunction!(run_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(run_gtwrc, m)?)?;
    m.add_function(wrap_pyfunction!(r1_region, m)?)?;
    m.add_function(wrap_pyfunction!(r2_region, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_mmse, m)?)?;
    m.add_function(wrap_pyfunction!(outer_bound, m)?)?;
    m.add_function(wrap_pyfunction!(cf_rate, m)?)?;
    m.add_function(wrap_pyfunction!(convex_hull, m)?)?;
    m.add_function(wrap_pyfunction!(rate_region, m)?)?;
    Ok(())
}
