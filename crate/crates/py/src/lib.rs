//! Python bindings for the `prodsys` crate.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use prodsys::action::{FiniteGroup, SystemAction};
use prodsys::cli::{load_action, load_system, parse_dr, Doc, LoadedSystem};
use prodsys::crossed;
use prodsys::dr::{self, DRSpec};
use prodsys::fdalg::Tol;
use prodsys::prodsys::{self as ps, IndexVector};

fn err(e: prodsys::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn doc(path: PathBuf) -> PyResult<Doc> {
    Doc::load(&path).map_err(err)
}

fn chain(levels: Vec<Vec<usize>>) -> Vec<IndexVector> {
    levels.into_iter().map(IndexVector).collect()
}

/// A product system over N^k, loaded from a JSON document or built from loop counts.
#[pyclass(module = "prodsys")]
struct ProductSystem {
    inner: LoadedSystem,
}

#[pymethods]
impl ProductSystem {
    /// Loads a `product_system`, `kgraph` or `dr` document.
    #[staticmethod]
    #[pyo3(signature = (path, cap=None))]
    fn load(path: PathBuf, cap: Option<usize>) -> PyResult<Self> {
        Ok(Self { inner: load_system(&doc(path)?, cap).map_err(err)? })
    }

    /// One vertex with `dims[i]` loops of color `i` and transposition flips.
    #[staticmethod]
    #[pyo3(signature = (dims, cap=ps::DEFAULT_CAP))]
    fn one_vertex(dims: Vec<usize>, cap: usize) -> PyResult<Self> {
        let sys = ps::one_vertex_system(&dims, cap).map_err(err)?;
        Ok(Self { inner: LoadedSystem { ps: sys, kgraph: None, dr: None } })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.ps.k()
    }

    #[getter]
    fn cap(&self) -> usize {
        self.inner.ps.cap()
    }

    #[getter]
    fn vertices(&self) -> usize {
        self.inner.ps.vertices().len()
    }

    fn fiber_dim(&self, p: Vec<usize>) -> usize {
        self.inner.ps.fiber_dim(&IndexVector(p))
    }

    fn is_faithful(&self) -> bool {
        self.inner.ps.is_row_finite_and_faithful()
    }

    fn check_axioms<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.ps.check_axioms(Tol::default()))
    }

    /// `(injective, witness)` for the map p ↦ dim fiber(p) up to total degree `n_max`.
    fn fowler_injectivity(&self, n_max: usize) -> PyResult<(bool, Option<(Vec<usize>, Vec<usize>)>)> {
        let (ok, w) = self.inner.ps.fowler_injectivity(n_max).map_err(err)?;
        Ok((ok, w.map(|(a, b)| (a.0, b.0))))
    }

    fn core_bratteli<'py>(&self, py: Python<'py>, chain_: Vec<Vec<usize>>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.ps.core_bratteli(&chain(chain_)).map_err(err)?)
    }
}

/// A finite group acting on a product system.
#[pyclass(module = "prodsys")]
struct Action {
    inner: SystemAction,
}

#[pymethods]
impl Action {
    /// Loads an `action` document (or a `dr` document) against `system`.
    #[staticmethod]
    fn load(path: PathBuf, system: &ProductSystem) -> PyResult<Self> {
        Ok(Self { inner: load_action(&doc(path)?, &system.inner).map_err(err)? })
    }

    /// The trivial action of the cyclic group of the given order.
    #[staticmethod]
    fn trivial(system: &ProductSystem, order: usize) -> Self {
        Self { inner: SystemAction::trivial(&system.inner.ps, FiniteGroup::cyclic(order)) }
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.group().order()
    }
}

/// The crossed-product system Y ⋊ G.
#[pyclass(module = "prodsys")]
struct CrossedSystem {
    inner: crossed::CrossedSystem,
}

#[pymethods]
impl CrossedSystem {
    #[new]
    fn new(system: &ProductSystem, action: &Action) -> PyResult<Self> {
        Ok(Self { inner: crossed::crossed_system(&system.inner.ps, &action.inner).map_err(err)? })
    }

    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, self.inner.report())
    }

    fn fiber_dim(&self, p: Vec<usize>) -> PyResult<usize> {
        Ok(self.inner.fiber(&IndexVector(p)).map_err(err)?.dim())
    }

    #[pyo3(signature = (p, q, samples=100, seed=0))]
    fn inner_identity<'py>(&self, py: Python<'py>, p: Vec<usize>, q: Vec<usize>, samples: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let r = crossed::check_inner_identity(&self.inner, &IndexVector(p), &IndexVector(q), samples, seed).map_err(err)?;
        to_py(py, &r)
    }

    /// `(faithful, kernel_dim)` of the left action at degree `p`.
    fn faithfulness(&self, p: Vec<usize>) -> PyResult<(bool, usize)> {
        crossed::crossed_faithfulness(&self.inner, &IndexVector(p)).map_err(err)
    }

    #[pyo3(signature = (p, samples=10, seed=0))]
    fn lambda_isomorphism<'py>(&self, py: Python<'py>, p: Vec<usize>, samples: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let r = crossed::check_lambda_isomorphism(&self.inner, &IndexVector(p), samples, seed).map_err(err)?;
        to_py(py, &r)
    }

    fn core_bratteli<'py>(&self, py: Python<'py>, chain_: Vec<Vec<usize>>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &crossed::crossed_core_bratteli(&self.inner, &chain(chain_)).map_err(err)?)
    }

    fn reference_core_blocks(&self, p: Vec<usize>) -> PyResult<Vec<usize>> {
        crossed::reference_core_blocks(&self.inner, &IndexVector(p)).map_err(err)
    }
}

/// Representations ρ_1..ρ_k of one finite group.
#[pyclass(module = "prodsys")]
struct DoplicherRoberts {
    spec: DRSpec,
    cap: usize,
}

#[pymethods]
impl DoplicherRoberts {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (spec, cap) = parse_dr(&doc(path)?).map_err(err)?;
        Ok(Self { spec, cap: cap.unwrap_or(ps::DEFAULT_CAP) })
    }

    fn hom_dim(&self, n: Vec<usize>, m: Vec<usize>) -> PyResult<usize> {
        dr::hom_dim_char(&self.spec, &IndexVector(n), &IndexVector(m), self.cap).map_err(err)
    }

    fn hom_basis_len(&self, n: Vec<usize>, m: Vec<usize>) -> PyResult<usize> {
        let b = dr::hom_basis(&self.spec, &IndexVector(n), &IndexVector(m), self.cap, Tol::default()).map_err(err)?;
        Ok(b.len())
    }

    fn invariant_core_dim(&self, n: Vec<usize>) -> PyResult<(usize, usize)> {
        dr::invariant_core_dim(&self.spec, &IndexVector(n), self.cap, Tol::default()).map_err(err)
    }
}

/// Runs the command-line tool with `args` (without the program name) and returns its exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> PyResult<i32> {
    use clap::Parser;
    let cli = prodsys::cli::Cli::try_parse_from(std::iter::once("prodsys".to_string()).chain(args))
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(prodsys::cli::run(&cli))
}

#[pymodule]
#[pyo3(name = "prodsys")]
fn prodsys_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ProductSystem>()?;
    m.add_class::<Action>()?;
    m.add_class::<CrossedSystem>()?;
    m.add_class::<DoplicherRoberts>()?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
