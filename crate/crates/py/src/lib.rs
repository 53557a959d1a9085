//! Python bindings: the main graphon-lab types and operations exposed as the
//! `graphon_lab_py` extension module.

use graphon_lab::counting::{self, MotifGraph};
use graphon_lab::cutmetric::{self, DeltaOptions};
use graphon_lab::graphon::{self, StepGraphon};
use graphon_lab::regularity::{self, RegularityParams};
use graphon_lab::sampling::{self, ChernoffParams};
use graphon_lab::upperreg::{self, Falsification, VerdictStatus};
use graphon_lab::{Partition, WeightedGraph};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: graphon_lab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "StepGraphon", skip_from_py_object)]
#[derive(Clone)]
struct PyStepGraphon {
    inner: StepGraphon,
}

#[pymethods]
impl PyStepGraphon {
    #[new]
    fn new(lengths: Vec<f64>, values: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyStepGraphon { inner: StepGraphon::new(lengths, values).map_err(err)? })
    }

    #[staticmethod]
    fn constant(c: f64) -> Self {
        PyStepGraphon { inner: StepGraphon::constant(c) }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyStepGraphon { inner: StepGraphon::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }

    #[getter]
    fn lengths(&self) -> Vec<f64> {
        self.inner.lengths().to_vec()
    }

    fn value(&self, i: usize, j: usize) -> f64 {
        self.inner.value(i, j)
    }

    fn lp_norm(&self, p: f64) -> PyResult<f64> {
        self.inner.lp_norm(p).map_err(err)
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn inner_product(&self, other: &PyStepGraphon) -> PyResult<f64> {
        self.inner.inner_product(&other.inner).map_err(err)
    }

    fn truncate(&self, k: f64) -> PyResult<(PyStepGraphon, PyStepGraphon)> {
        let (low, high) = self.inner.truncate(k).map_err(err)?;
        Ok((PyStepGraphon { inner: low }, PyStepGraphon { inner: high }))
    }

    fn scale(&self, c: f64) -> PyStepGraphon {
        PyStepGraphon { inner: self.inner.scale(c) }
    }

    /// Average over the partition given by per-class labels.
    fn step(&self, labels: Vec<usize>) -> PyResult<PyStepGraphon> {
        let p = Partition::new(labels, self.inner.lengths().to_vec()).map_err(err)?;
        Ok(PyStepGraphon { inner: self.inner.step(&p).map_err(err)? })
    }

    fn regrid(&self, classes: usize) -> PyResult<PyStepGraphon> {
        Ok(PyStepGraphon { inner: self.inner.regrid_equipartition(classes).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("StepGraphon(classes={})", self.inner.num_classes())
    }
}

#[pyclass(name = "WeightedGraph", skip_from_py_object)]
#[derive(Clone)]
struct PyWeightedGraph {
    inner: WeightedGraph,
}

#[pymethods]
impl PyWeightedGraph {
    #[new]
    fn new(vertex_weights: Vec<f64>, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        Ok(PyWeightedGraph { inner: WeightedGraph::new(vertex_weights, edges).map_err(err)? })
    }

    #[staticmethod]
    fn simple(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyWeightedGraph { inner: WeightedGraph::simple(n, edges).map_err(err)? })
    }

    #[staticmethod]
    fn complete(n: usize) -> Self {
        PyWeightedGraph { inner: WeightedGraph::complete(n) }
    }

    #[staticmethod]
    fn from_tsv(text: &str) -> PyResult<Self> {
        Ok(PyWeightedGraph { inner: WeightedGraph::from_tsv(text).map_err(err)? })
    }

    fn to_tsv(&self) -> String {
        self.inner.to_tsv()
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn total_weight(&self) -> f64 {
        self.inner.total_weight()
    }

    fn beta(&self, i: usize, j: usize) -> f64 {
        self.inner.beta(i, j)
    }

    fn lp_norm(&self, p: f64) -> PyResult<f64> {
        self.inner.lp_norm(p).map_err(err)
    }

    fn edge_density(&self, s: Vec<usize>, t: Vec<usize>) -> PyResult<f64> {
        self.inner.edge_density(&s, &t).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "WeightedGraph(vertices={}, edges={})",
            self.inner.vertex_count(),
            self.inner.edge_count()
        )
    }
}

#[pyclass(name = "CutResult", skip_from_py_object)]
#[derive(Clone)]
struct PyCutResult {
    #[pyo3(get)]
    lower: f64,
    #[pyo3(get)]
    upper: f64,
    #[pyo3(get)]
    method: String,
    #[pyo3(get)]
    witness_s: Vec<usize>,
    #[pyo3(get)]
    witness_t: Vec<usize>,
    #[pyo3(get)]
    witness_value: f64,
}

impl From<cutmetric::CutResult> for PyCutResult {
    fn from(r: cutmetric::CutResult) -> Self {
        PyCutResult {
            lower: r.lower,
            upper: r.upper,
            method: match r.method {
                cutmetric::SolveMethod::Exact => "exact".into(),
                cutmetric::SolveMethod::Alternating => "alternating".into(),
            },
            witness_s: r.witness.s,
            witness_t: r.witness.t,
            witness_value: r.witness.value,
        }
    }
}

#[pymethods]
impl PyCutResult {
    fn __repr__(&self) -> String {
        format!(
            "CutResult(lower={}, upper={}, method='{}')",
            self.lower, self.upper, self.method
        )
    }
}

#[pyclass(name = "RegularityReport", skip_from_py_object)]
#[derive(Clone)]
struct PyRegularityReport {
    #[pyo3(get)]
    labels: Vec<usize>,
    #[pyo3(get)]
    classes: usize,
    #[pyo3(get)]
    error_cut: f64,
    #[pyo3(get)]
    certified: bool,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    trace: Vec<f64>,
}

impl From<regularity::RegularityReport> for PyRegularityReport {
    fn from(r: regularity::RegularityReport) -> Self {
        PyRegularityReport {
            labels: r.partition.labels().to_vec(),
            classes: r.partition.num_classes(),
            error_cut: r.error_cut,
            certified: r.certified,
            iterations: r.iterations,
            trace: r.trace.iter().map(|s| s.witness).collect(),
        }
    }
}

#[pyclass(name = "Verdict", skip_from_py_object)]
#[derive(Clone)]
struct PyVerdict {
    #[pyo3(get)]
    status: String,
    #[pyo3(get)]
    worst_value: f64,
    #[pyo3(get)]
    certificate_labels: Option<Vec<usize>>,
    #[pyo3(get)]
    dominant_vertex: Option<usize>,
}

impl From<upperreg::RegularityVerdict> for PyVerdict {
    fn from(v: upperreg::RegularityVerdict) -> Self {
        let status = match v.status {
            VerdictStatus::VerifiedExact => "verified_exact",
            VerdictStatus::Falsified => "falsified",
            VerdictStatus::Unfalsified => "unfalsified",
        }
        .to_string();
        let (labels, vertex) = match v.certificate {
            Some(Falsification::Partition { labels, .. }) => (Some(labels), None),
            Some(Falsification::DominantNode { vertex }) => (None, Some(vertex)),
            None => (None, None),
        };
        PyVerdict {
            status,
            worst_value: v.worst_value,
            certificate_labels: labels,
            dominant_vertex: vertex,
        }
    }
}

#[pyfunction]
fn embed_graph(g: &PyWeightedGraph) -> PyResult<PyStepGraphon> {
    Ok(PyStepGraphon { inner: graphon::embed_graph(&g.inner).map_err(err)? })
}

#[pyfunction]
fn normalize_graph(g: &PyWeightedGraph) -> PyResult<PyStepGraphon> {
    Ok(PyStepGraphon { inner: graphon::normalize_graph(&g.inner).map_err(err)? })
}

#[pyfunction]
fn cut_norm(w: &PyStepGraphon) -> PyCutResult {
    cutmetric::cut_norm(&w.inner).into()
}

#[pyfunction]
fn cut_norm_exact(w: &PyStepGraphon) -> PyResult<PyCutResult> {
    Ok(cutmetric::cut_norm_exact(&w.inner).map_err(err)?.into())
}

#[pyfunction]
#[pyo3(signature = (w, restarts = 32, seed = 0))]
fn cut_norm_heuristic(w: &PyStepGraphon, restarts: usize, seed: u64) -> PyCutResult {
    cutmetric::cut_norm_heuristic(&w.inner, restarts, seed).into()
}

#[pyfunction]
fn infty_to_one_norm(w: &PyStepGraphon) -> PyCutResult {
    cutmetric::infty_to_one_norm(&w.inner).into()
}

#[pyfunction]
fn d_cut(u: &PyStepGraphon, w: &PyStepGraphon) -> PyResult<PyCutResult> {
    Ok(cutmetric::d_cut(&u.inner, &w.inner).map_err(err)?.into())
}

#[pyfunction]
#[pyo3(signature = (u, w, classes = 24, budget = 8, seed = 0))]
fn delta_cut_upper(
    u: &PyStepGraphon,
    w: &PyStepGraphon,
    classes: usize,
    budget: usize,
    seed: u64,
) -> PyResult<(f64, bool)> {
    let bound = cutmetric::delta_cut_upper(
        &u.inner,
        &w.inner,
        &DeltaOptions { classes, budget, seed },
    )
    .map_err(err)?;
    Ok((bound.upper, bound.certified))
}

#[pyfunction]
fn delta_cut_lower(u: &PyStepGraphon, w: &PyStepGraphon) -> f64 {
    cutmetric::delta_cut_lower(&u.inner, &w.inner)
}

#[pyfunction]
fn sample_h(n: usize, w: &PyStepGraphon, seed: u64) -> PyResult<PyWeightedGraph> {
    Ok(PyWeightedGraph { inner: sampling::sample_h(n, &w.inner, seed).map_err(err)? })
}

#[pyfunction]
fn sample_g(n: usize, w: &PyStepGraphon, rho: f64, seed: u64) -> PyResult<PyWeightedGraph> {
    Ok(PyWeightedGraph { inner: sampling::sample_g(n, &w.inner, rho, seed).map_err(err)? })
}

#[pyfunction]
fn sparsify(h: &PyWeightedGraph, rho: f64, seed: u64) -> PyResult<PyWeightedGraph> {
    Ok(PyWeightedGraph { inner: sampling::sparsify(&h.inner, rho, seed).map_err(err)? })
}

#[pyfunction]
fn power_law_graph(n: usize, alpha: f64, beta: f64, seed: u64) -> PyResult<PyWeightedGraph> {
    Ok(PyWeightedGraph { inner: sampling::power_law_graph(n, alpha, beta, seed).map_err(err)? })
}

#[pyfunction]
fn power_law_graphon(alpha: f64, grid: usize) -> PyResult<PyStepGraphon> {
    Ok(PyStepGraphon { inner: sampling::power_law_graphon(alpha, grid).map_err(err)? })
}

#[pyfunction]
fn clique_sequence(idx: usize) -> PyResult<PyWeightedGraph> {
    Ok(PyWeightedGraph { inner: sampling::clique_sequence(idx).map_err(err)? })
}

#[pyfunction]
fn chernoff_bound(probs: Vec<f64>, signs: Vec<i8>, lam: f64) -> PyResult<f64> {
    Ok(sampling::chernoff_bound(&ChernoffParams::new(probs, signs, lam).map_err(err)?))
}

#[pyfunction]
fn hom_density(motif: &str, w: &PyStepGraphon) -> PyResult<f64> {
    let f = MotifGraph::parse(motif).map_err(err)?;
    counting::hom_density_graphon(&f, &w.inner).map_err(err)
}

#[pyfunction]
fn hom_density_graph(motif: &str, g: &PyWeightedGraph) -> PyResult<f64> {
    let f = MotifGraph::parse(motif).map_err(err)?;
    counting::hom_density_graph(&f, &g.inner).map_err(err)
}

#[pyfunction]
fn counting_bound(motif: &str, p: f64, eps: f64) -> PyResult<f64> {
    let f = MotifGraph::parse(motif).map_err(err)?;
    counting::counting_bound(&f, p, eps).map_err(err)
}

#[pyfunction]
fn holder_bound(motif: &str, w: &PyStepGraphon) -> PyResult<f64> {
    let f = MotifGraph::parse(motif).map_err(err)?;
    counting::holder_bound(&f, &w.inner).map_err(err)
}

#[pyfunction]
fn weak_regularity_l2(w: &PyStepGraphon, eps: f64) -> PyResult<PyRegularityReport> {
    let p0 = Partition::trivial(w.inner.lengths().to_vec());
    Ok(regularity::weak_regularity_l2(&w.inner, eps, &p0).map_err(err)?.into())
}

#[pyfunction]
fn weak_regularity_graph(
    g: &PyWeightedGraph,
    p: f64,
    eps: f64,
    c: f64,
    eta: f64,
) -> PyResult<PyRegularityReport> {
    let params = RegularityParams::new(p, eps, c, eta).map_err(err)?;
    Ok(regularity::weak_regularity_graph(&g.inner, &params).map_err(err)?.into())
}

#[pyfunction]
fn check_upper_regular_exact(
    g: &PyWeightedGraph,
    c: f64,
    eta: f64,
    p: f64,
) -> PyResult<PyVerdict> {
    Ok(upperreg::check_upper_regular_exact(&g.inner, c, eta, p).map_err(err)?.into())
}

#[pyfunction]
#[pyo3(signature = (g, c, eta, p, budget = 64, seed = 0))]
fn falsify_upper_regular(
    g: &PyWeightedGraph,
    c: f64,
    eta: f64,
    p: f64,
    budget: usize,
    seed: u64,
) -> PyResult<PyVerdict> {
    Ok(upperreg::falsify_upper_regular(&g.inner, c, eta, p, budget, seed).map_err(err)?.into())
}

#[pyfunction]
fn tail_mass(w: &PyStepGraphon, k: f64) -> PyResult<f64> {
    upperreg::tail_mass(&w.inner, k).map_err(err)
}

#[pymodule]
fn graphon_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStepGraphon>()?;
    m.add_class::<PyWeightedGraph>()?;
    m.add_class::<PyCutResult>()?;
    m.add_class::<PyRegularityReport>()?;
    m.add_class::<PyVerdict>()?;
    m.add_function(wrap_pyfunction!(embed_graph, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_graph, m)?)?;
    m.add_function(wrap_pyfunction!(cut_norm, m)?)?;
    m.add_function(wrap_pyfunction!(cut_norm_exact, m)?)?;
    m.add_function(wrap_pyfunction!(cut_norm_heuristic, m)?)?;
    m.add_function(wrap_pyfunction!(infty_to_one_norm, m)?)?;
    m.add_function(wrap_pyfunction!(d_cut, m)?)?;
    m.add_function(wrap_pyfunction!(delta_cut_upper, m)?)?;
    m.add_function(wrap_pyfunction!(delta_cut_lower, m)?)?;
    m.add_function(wrap_pyfunction!(sample_h, m)?)?;
    m.add_function(wrap_pyfunction!(sample_g, m)?)?;
    m.add_function(wrap_pyfunction!(sparsify, m)?)?;
    m.add_function(wrap_pyfunction!(power_law_graph, m)?)?;
    m.add_function(wrap_pyfunction!(power_law_graphon, m)?)?;
    m.add_function(wrap_pyfunction!(clique_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(chernoff_bound, m)?)?;
    m.add_function(wrap_pyfunction!(hom_density, m)?)?;
    m.add_function(wrap_pyfunction!(hom_density_graph, m)?)?;
    m.add_function(wrap_pyfunction!(counting_bound, m)?)?;
    m.add_function(wrap_pyfunction!(holder_bound, m)?)?;
    m.add_function(wrap_pyfunction!(weak_regularity_l2, m)?)?;
    m.add_function(wrap_pyfunction!(weak_regularity_graph, m)?)?;
    m.add_function(wrap_pyfunction!(check_upper_regular_exact, m)?)?;
    m.add_function(wrap_pyfunction!(falsify_upper_regular, m)?)?;
    m.add_function(wrap_pyfunction!(tail_mass, m)?)?;
    Ok(())
}
