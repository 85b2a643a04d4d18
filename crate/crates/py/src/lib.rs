//! Python bindings for the `fragtree` core crate.

use std::collections::HashMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use fragtree::diagnostics::gw_conditioned_oracle;
use fragtree::linebreak::{assemble_tree, run_chain, sample_sk_initial, sample_v1, V1_TRUNCATION};
use fragtree::samplers::{FordGrowth, MarkovBranching, RngState};
use fragtree::splitting_rules::{consistency_residual, RuleSpec, SplittingRule};
use fragtree::trees::{parse_newick, Cladogram};
use fragtree::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Parse { .. } | Error::Capacity(_) | Error::State(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A splitting rule, built from `beta:-1.5`, `ford:0.3`, `stable:1.5` or rule JSON.
#[pyclass(name = "Rule", module = "fragtree_py", frozen)]
#[derive(Clone)]
struct PyRule {
    inner: RuleSpec,
}

#[pymethods]
impl PyRule {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(PyRule { inner: RuleSpec::parse(spec).map_err(err)? })
    }

    #[getter]
    fn model(&self) -> &'static str {
        self.inner.model_name()
    }

    #[getter]
    fn gamma(&self) -> Option<f64> {
        self.inner.gamma()
    }

    /// `{partition: probability}` for the first split of `n` leaves; partitions print as `3-1`.
    fn qtable(&self, n: usize) -> PyResult<HashMap<String, f64>> {
        let q = self.inner.qtable(n).map_err(err)?;
        Ok(q.entries().iter().map(|(p, v)| (p.to_string(), *v)).collect())
    }

    fn qtilde(&self, n: usize) -> PyResult<Vec<f64>> {
        self.inner.qtilde(n).map_err(err)
    }

    fn normalizer(&self, n: usize) -> PyResult<f64> {
        self.inner.normalizer(n).map_err(err)
    }

    fn consistency_residual(&self, n: usize) -> PyResult<f64> {
        consistency_residual(&self.inner, n).map_err(err)
    }

    /// `reps` Newick strings of independent trees with `n` leaves.
    #[pyo3(signature = (n, reps=1, seed=fragtree::samplers::DEFAULT_SEED))]
    fn simulate(&self, n: usize, reps: usize, seed: u64) -> PyResult<Vec<String>> {
        let sampler = MarkovBranching::new(&self.inner, n.max(1)).map_err(err)?;
        (0..reps)
            .map(|rep| {
                let mut rng = RngState::new(seed).with_stream(rep as u64).rng();
                Ok(sampler.sample(n, &mut rng).map_err(err)?.with_unit_lengths().newick())
            })
            .collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!("Rule({})", self.inner.to_json())
    }
}

/// Unordered leaf-labelled tree.
#[pyclass(name = "Cladogram", module = "fragtree_py", frozen)]
struct PyCladogram {
    inner: Cladogram,
}

#[pymethods]
impl PyCladogram {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyCladogram { inner: Cladogram::parse(text).map_err(err)? })
    }

    #[staticmethod]
    fn from_newick(text: &str) -> PyResult<Self> {
        Ok(PyCladogram { inner: parse_newick(text).map_err(err)?.shape() })
    }

    #[getter]
    fn n_leaves(&self) -> usize {
        self.inner.n_leaves()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn clusters(&self) -> Vec<Vec<u32>> {
        self.inner.clusters().into_iter().collect()
    }

    fn shape_key(&self) -> String {
        self.inner.shape_key()
    }

    fn newick(&self) -> String {
        self.inner.with_unit_lengths().newick()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Cladogram({})", self.inner)
    }
}

/// Ford's sequential growth of the alpha model.
#[pyclass(name = "FordGrowth", module = "fragtree_py")]
struct PyFordGrowth {
    inner: FordGrowth,
    rng: rand_chacha::ChaCha8Rng,
}

#[pymethods]
impl PyFordGrowth {
    #[new]
    #[pyo3(signature = (alpha, seed=fragtree::samplers::DEFAULT_SEED))]
    fn new(alpha: f64, seed: u64) -> PyResult<Self> {
        Ok(PyFordGrowth { inner: FordGrowth::new(alpha).map_err(err)?, rng: RngState::new(seed).rng() })
    }

    #[getter]
    fn n_leaves(&self) -> usize {
        self.inner.n_leaves()
    }

    fn grow_to(&mut self, n: usize) {
        self.inner.grow_to(n, &mut self.rng);
    }

    /// Ordered tree with unit edges as Newick.
    fn newick(&self) -> String {
        fragtree::trees::EdgeWeightedTree::unit(self.inner.topology()).newick()
    }

    /// Leaves to the left of the spine of leaf 1.
    fn spine_left(&self) -> Option<usize> {
        self.inner.leaves_left_of(1)
    }
}

/// Run the line-breaking chain to `k` leaves; returns `(total, proportions, newick)`.
#[pyfunction]
#[pyo3(signature = (alpha, k, seed=fragtree::samplers::DEFAULT_SEED))]
fn line_breaking(alpha: f64, k: usize, seed: u64) -> PyResult<(f64, Vec<f64>, String)> {
    let (state, _) = run_chain(alpha, k, &mut RngState::new(seed).rng()).map_err(err)?;
    let tree = assemble_tree(&state).map_err(err)?;
    Ok((state.total(), state.proportions(), tree.newick()))
}

/// `reps` draws of the total length `S_k` from its closed-form law.
#[pyfunction]
#[pyo3(signature = (alpha, k, reps, seed=fragtree::samplers::DEFAULT_SEED))]
fn sample_total_length(alpha: f64, k: usize, reps: usize, seed: u64) -> PyResult<Vec<f64>> {
    let mut rng = RngState::new(seed).rng();
    (0..reps).map(|_| sample_sk_initial(alpha, k, &mut rng).map_err(err)).collect()
}

/// `reps` draws of the limiting spinal proportion.
#[pyfunction]
#[pyo3(signature = (alpha, reps, seed=fragtree::samplers::DEFAULT_SEED))]
fn spinal_proportion(alpha: f64, reps: usize, seed: u64) -> PyResult<Vec<f64>> {
    let mut rng = RngState::new(seed).rng();
    (0..reps).map(|_| Ok(sample_v1(alpha, V1_TRUNCATION, &mut rng).map_err(err)?.midpoint())).collect()
}

/// First-split law of the conditioned Galton-Watson tree with stable offspring law.
#[pyfunction]
fn gw_first_split(alpha: f64, n: usize) -> PyResult<HashMap<String, f64>> {
    let o = gw_conditioned_oracle(alpha, n).map_err(err)?;
    Ok(o.first_split.iter().map(|(p, v)| (p.to_string(), *v)).collect())
}

#[pymodule]
fn fragtree_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRule>()?;
    m.add_class::<PyCladogram>()?;
    m.add_class::<PyFordGrowth>()?;
    m.add_function(wrap_pyfunction!(line_breaking, m)?)?;
    m.add_function(wrap_pyfunction!(sample_total_length, m)?)?;
    m.add_function(wrap_pyfunction!(spinal_proportion, m)?)?;
    m.add_function(wrap_pyfunction!(gw_first_split, m)?)?;
    Ok(())
}
