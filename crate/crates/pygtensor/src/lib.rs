//! Python bindings for the graph-tensor toolkit.
//!
//! Exposes the main types (graphs, sparse tensors, circuits) and the
//! headline operations (exponent bounds, treewidth, the 4-clique entropy
//! bound, the permanent reduction) as an extension module named
//! `pygtensor`. Exact rationals cross the boundary as strings `"p/q"`;
//! integers cross as Python ints.

use std::collections::BTreeSet;

use num::BigInt;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use gtensor::circuits;
use gtensor::exponents::{self, StarSumMethod};
use gtensor::graphs;
use gtensor::laser;
use gtensor::reductions;
use gtensor::tensors;
use gtensor::treewidth;
use gtensor::util::{fmt_rat, parse_rat, Rat};

fn err(e: gtensor::Error) -> PyErr {
    match e {
        gtensor::Error::InvalidArgument(m) | gtensor::Error::Parse(m) => PyValueError::new_err(m),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn rat_from_py(value: &Bound<'_, PyAny>) -> PyResult<Rat> {
    if let Ok(i) = value.extract::<BigInt>() {
        return Ok(Rat::from_integer(i));
    }
    let s: String = value.extract()?;
    parse_rat(&s).map_err(err)
}

/// Fractional multigraph.
#[pyclass(name = "Graph")]
#[derive(Clone)]
struct PyGraph {
    inner: graphs::FractionalGraph,
}

#[pymethods]
impl PyGraph {
    /// Builds a graph from 1-based vertex count and weighted edges
    /// `(u, v, weight)` where weight is an int or a string like `"1/2"`.
    #[new]
    fn new(num_vertices: usize, edges: Vec<(usize, usize, Py<PyAny>)>, py: Python<'_>) -> PyResult<Self> {
        let mut list = Vec::new();
        for (u, v, w) in edges {
            list.push((u, v, rat_from_py(w.bind(py))?));
        }
        Ok(PyGraph {
            inner: graphs::FractionalGraph::new((1..=num_vertices).collect(), list).map_err(err)?,
        })
    }

    #[staticmethod]
    fn clique(d: usize) -> PyResult<Self> {
        Ok(PyGraph { inner: graphs::clique(d).map_err(err)? })
    }

    #[staticmethod]
    fn star(d: usize, center: usize) -> PyResult<Self> {
        Ok(PyGraph { inner: graphs::star(d, center).map_err(err)? })
    }

    #[staticmethod]
    fn matching(k: usize) -> PyResult<Self> {
        Ok(PyGraph { inner: graphs::matching(k).map_err(err)? })
    }

    #[staticmethod]
    fn cycle(d: usize) -> PyResult<Self> {
        Ok(PyGraph { inner: graphs::cycle(d).map_err(err)? })
    }

    #[staticmethod]
    fn path(k: usize) -> PyResult<Self> {
        Ok(PyGraph { inner: graphs::path(k).map_err(err)? })
    }

    #[staticmethod]
    fn grid(rows: usize, cols: usize) -> PyResult<Self> {
        Ok(PyGraph { inner: graphs::grid(rows, cols).map_err(err)? })
    }

    #[staticmethod]
    fn cat(k: usize, d: usize) -> PyResult<Self> {
        Ok(PyGraph { inner: graphs::cat(k, d).map_err(err)? })
    }

    #[staticmethod]
    fn hyperclique_incidence(h: usize, k: usize) -> PyResult<Self> {
        Ok(PyGraph { inner: graphs::hyperclique_incidence(h, k).map_err(err)? })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyGraph { inner: graphs::parse_graph(text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        graphs::write_graph(&self.inner)
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }

    /// Edges as `(u, v, weight_string)` triples.
    fn edges(&self) -> Vec<(usize, usize, String)> {
        self.inner.edges().iter().map(|e| (e.u, e.v, fmt_rat(&e.weight))).collect()
    }

    fn sum(&self, other: &PyGraph) -> PyGraph {
        PyGraph { inner: self.inner.sum(&other.inner) }
    }

    fn repeat(&self, k: usize) -> PyGraph {
        PyGraph { inner: self.inner.repeat(k) }
    }

    fn scale(&self, factor: &Bound<'_, PyAny>) -> PyResult<PyGraph> {
        Ok(PyGraph { inner: self.inner.scale(&rat_from_py(factor)?).map_err(err)? })
    }

    fn common_denominator(&self) -> BigInt {
        self.inner.common_denominator()
    }

    /// Expands fractional weights to unit parallel edges.
    fn integerized(&self) -> PyGraph {
        PyGraph { inner: self.inner.integerized() }
    }

    fn line_graph(&self) -> PyResult<PyGraph> {
        Ok(PyGraph { inner: self.inner.line_graph().map_err(err)? })
    }

    /// Contracts the vertex set; returns the contracted graph and the
    /// incident-edge count of the set.
    fn contract(&self, vertices: Vec<usize>) -> PyResult<(PyGraph, usize)> {
        let set: BTreeSet<usize> = vertices.into_iter().collect();
        let (g, a) = self.inner.contract(&set).map_err(err)?;
        Ok((PyGraph { inner: g }, a))
    }

    fn is_isomorphic(&self, other: &PyGraph) -> PyResult<bool> {
        Ok(graphs::find_isomorphism(&self.inner, &other.inner).map_err(err)?.is_some())
    }

    /// Edge partition into matchings; each part is returned as a graph.
    fn matchings(&self) -> PyResult<Vec<PyGraph>> {
        Ok(graphs::edge_partition_into_matchings(&self.inner.integerized())
            .map_err(err)?
            .into_iter()
            .map(|g| PyGraph { inner: g })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Graph(vertices={}, edges={})", self.inner.num_vertices(), self.inner.num_edges())
    }
}

/// Sparse exact-arithmetic tensor.
#[pyclass(name = "Tensor")]
#[derive(Clone)]
struct PyTensor {
    inner: tensors::SparseTensor,
}

#[pymethods]
impl PyTensor {
    /// Graph tensor of a graph (integerized first) at length `n`.
    #[staticmethod]
    fn graph_tensor(g: &PyGraph, n: usize) -> PyResult<Self> {
        let expanded = g.inner.integerized();
        Ok(PyTensor { inner: tensors::graph_tensor(&expanded, n).map_err(err)? })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyTensor { inner: tensors::parse_tensor(text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        tensors::write_tensor(&self.inner)
    }

    #[getter]
    fn mode_dims(&self) -> Vec<usize> {
        self.inner.mode_dims().to_vec()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    fn kronecker(&self, other: &PyTensor) -> PyResult<PyTensor> {
        Ok(PyTensor { inner: tensors::kronecker(&self.inner, &other.inner).map_err(err)? })
    }

    /// Evaluates the multilinear form; entries are ints or `"p/q"` strings,
    /// the result is an exact rational string.
    fn evaluate(&self, inputs: Vec<Vec<Py<PyAny>>>, py: Python<'_>) -> PyResult<String> {
        let vectors = convert_inputs(inputs, py)?;
        Ok(fmt_rat(&self.inner.evaluate(&vectors).map_err(err)?))
    }

    /// Exact rank of the flattening with the given 0-based row modes.
    fn flattening_rank(&self, row_modes: Vec<usize>) -> PyResult<usize> {
        let rows: BTreeSet<usize> = row_modes.into_iter().collect();
        tensors::flattening_rank(&self.inner, &rows).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Tensor(modes={:?}, nnz={})", self.inner.mode_dims(), self.inner.nnz())
    }
}

fn convert_inputs(inputs: Vec<Vec<Py<PyAny>>>, py: Python<'_>) -> PyResult<Vec<Vec<Rat>>> {
    inputs
        .into_iter()
        .map(|v| v.into_iter().map(|x| rat_from_py(x.bind(py))).collect())
        .collect()
}

/// Arithmetic circuit handle.
#[pyclass(name = "Circuit")]
struct PyCircuit {
    inner: circuits::Circuit,
}

#[pymethods]
impl PyCircuit {
    /// Wire count (the size measure).
    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn mode_dims(&self) -> Vec<usize> {
        self.inner.mode_dims.clone()
    }

    fn evaluate(&self, inputs: Vec<Vec<Py<PyAny>>>, py: Python<'_>) -> PyResult<String> {
        let vectors = convert_inputs(inputs, py)?;
        Ok(fmt_rat(&self.inner.evaluate_scalar(&vectors).map_err(err)?))
    }

    fn to_text(&self) -> String {
        circuits::write_circuit(&self.inner)
    }
}

/// Builds the contraction circuit of a graph tensor along a tree
/// decomposition of its line graph.
#[pyfunction]
fn treedec_circuit(g: &PyGraph, n: usize) -> PyResult<PyCircuit> {
    let expanded = g.inner.integerized();
    let (_, td) = treewidth::ltw(&expanded).map_err(err)?;
    let (c, _) = circuits::treedec_circuit(&expanded, n, &td).map_err(err)?;
    Ok(PyCircuit { inner: c })
}

/// Exact treewidth of a small graph.
#[pyfunction]
fn exact_treewidth(g: &PyGraph) -> PyResult<i64> {
    Ok(treewidth::exact_treewidth(&g.inner).map_err(err)?.0)
}

/// Line-treewidth as an `(exact_or_lower, upper)` pair.
#[pyfunction]
fn ltw(g: &PyGraph) -> PyResult<(i64, i64)> {
    let (bound, _) = treewidth::ltw(&g.inner).map_err(err)?;
    Ok(match bound {
        treewidth::LtwBound::Exact(w) => (w, w),
        treewidth::LtwBound::Interval(lo, hi) => (lo, hi),
    })
}

/// Closed form for the line-treewidth of the complete graph.
#[pyfunction]
fn ltw_clique_closed_form(d: usize) -> i64 {
    treewidth::ltw_clique_closed_form(d)
}

/// Star-sum exponent bound; method is "rank", "treewidth" or "mixed".
/// Returns `(float_value, exact_rational_string)`.
#[pyfunction]
fn star_sum_bound(d: usize, method: &str) -> PyResult<(f64, String)> {
    let m = match method {
        "rank" => StarSumMethod::Rank,
        "treewidth" => StarSumMethod::Treewidth,
        "mixed" => StarSumMethod::Mixed,
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    let table = exponents::OmegaTable::shipped_default();
    let bound = exponents::star_sum_bound(d, m, &table, &Default::default()).map_err(err)?;
    Ok((bound.to_f64(), fmt_rat(&bound.value)))
}

/// Optimized conic decomposition of a graph; returns
/// `(float_bound, exact_rational_string, num_parts)`.
#[pyfunction]
fn decompose_optimize(g: &PyGraph) -> PyResult<(f64, String, usize)> {
    let table = exponents::OmegaTable::shipped_default();
    let (dec, bound) =
        exponents::decompose_optimize(&g.inner, &table, &Default::default()).map_err(err)?;
    Ok((bound.to_f64(), fmt_rat(&bound.value), dec.parts.len()))
}

/// Rounded summary-table rows as lists of strings.
#[pyfunction]
fn table1() -> PyResult<std::collections::BTreeMap<String, Vec<String>>> {
    let table = exponents::OmegaTable::shipped_default();
    let t1 = exponents::table1(&table, &Default::default()).map_err(err)?;
    let mut out = std::collections::BTreeMap::new();
    out.insert("d".into(), t1.dims.iter().map(|d| d.to_string()).collect());
    out.insert("rank".into(), t1.rank_row.iter().map(|c| c.rounded.clone()).collect());
    out.insert("treewidth".into(), t1.treewidth_row.iter().map(|c| c.rounded.clone()).collect());
    out.insert(
        "specialized".into(),
        t1.dims
            .iter()
            .map(|d| t1.specialized.get(d).map(|c| c.rounded.clone()).unwrap_or("--".into()))
            .collect(),
    );
    out.insert("flattening".into(), t1.flattening_row.iter().map(|c| c.rounded.clone()).collect());
    Ok(out)
}

/// `τ(K_4)` bound at the given `q` and `γ`.
#[pyfunction]
fn tau_k4_bound(q: u64, gamma: f64) -> PyResult<f64> {
    laser::tau_k4_bound(q, gamma).map_err(err)
}

/// Optimizes the `τ(K_4)` bound over `γ` for each `q` in the inclusive
/// range; returns `(q, gamma, bound)`.
#[pyfunction]
fn optimize_tau_k4(q_min: u64, q_max: u64) -> PyResult<(u64, f64, f64)> {
    let best = laser::optimize_tau_k4(&(q_min..=q_max).collect::<Vec<_>>()).map_err(err)?;
    Ok((best.q, best.gamma, best.bound))
}

/// `μ(γ)`: the marginal entropy governing the laser bound.
#[pyfunction]
fn mu(gamma: f64) -> PyResult<f64> {
    laser::mu(gamma).map_err(err)
}

/// Permanent of an integer matrix through the grid-tensor reduction.
#[pyfunction]
fn permanent(matrix: Vec<Vec<BigInt>>) -> PyResult<BigInt> {
    let (_, value) = reductions::permanent_reduction(&matrix).map_err(err)?;
    Ok(value)
}

/// Inclusion–exclusion permanent (the oracle).
#[pyfunction]
fn permanent_ryser(matrix: Vec<Vec<BigInt>>) -> BigInt {
    reductions::permanent_ryser(&matrix)
}

/// Checks the CW border-rank degeneration at `(q, k)`.
#[pyfunction]
fn cw_degeneration_check(q: usize, k: usize) -> PyResult<bool> {
    Ok(tensors::cw_degeneration_check(q, k).map_err(err)?.pass)
}

/// Checks the hyperclique incidence projection at dimension `n`.
#[pyfunction]
fn hyperclique_projection_check(n: usize) -> PyResult<bool> {
    Ok(reductions::hyperclique_projection_check(n).map_err(err)?.pass)
}

#[pymodule]
fn pygtensor(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyTensor>()?;
    m.add_class::<PyCircuit>()?;
    m.add_function(wrap_pyfunction!(treedec_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(exact_treewidth, m)?)?;
    m.add_function(wrap_pyfunction!(ltw, m)?)?;
    m.add_function(wrap_pyfunction!(ltw_clique_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(star_sum_bound, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_optimize, m)?)?;
    m.add_function(wrap_pyfunction!(table1, m)?)?;
    m.add_function(wrap_pyfunction!(tau_k4_bound, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_tau_k4, m)?)?;
    m.add_function(wrap_pyfunction!(mu, m)?)?;
    m.add_function(wrap_pyfunction!(permanent, m)?)?;
    m.add_function(wrap_pyfunction!(permanent_ryser, m)?)?;
    m.add_function(wrap_pyfunction!(cw_degeneration_check, m)?)?;
    m.add_function(wrap_pyfunction!(hyperclique_projection_check, m)?)?;
    Ok(())
}
