//! Python bindings: synthetic data, training, sampling and scoring.

use netload_core::data::{DatasetSplit, PreparedDataset, SyntheticDatasetConfig};
use netload_core::denoiser::{Denoiser, DenoiserConfig, Variant};
use netload_core::diffusion::{build_schedule, NoiseSchedule, SamplerConfig, TrainConfig, Trainer};
use netload_core::metrics::{self, Ensemble};
use netload_core::numerics::Tensor;
use netload_core::pipeline::{ensembles_from_samples, sample_for_profiles, synthetic_experiment};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: netload_core::Error) -> PyErr {
    match e {
        netload_core::Error::Numeric(_) | netload_core::Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rows(t: &Tensor) -> Vec<Vec<f64>> {
    (0..t.rows()).map(|i| t.row(i).to_vec()).collect()
}

fn parse_variant(name: &str) -> PyResult<Variant> {
    name.parse().map_err(err)
}

/// Linear beta schedule with cumulative products.
#[pyclass(name = "NoiseSchedule", frozen, from_py_object)]
#[derive(Clone)]
struct PySchedule(NoiseSchedule);

#[pymethods]
impl PySchedule {
    #[new]
    #[pyo3(signature = (beta_1=1e-6, beta_last=0.2, steps=50))]
    fn new(beta_1: f64, beta_last: f64, steps: usize) -> PyResult<Self> {
        build_schedule(beta_1, beta_last, steps).map(Self).map_err(err)
    }

    #[getter]
    fn steps(&self) -> usize {
        self.0.steps()
    }

    fn betas(&self) -> Vec<f64> {
        self.0.betas().to_vec()
    }

    fn alpha_bars(&self) -> Vec<f64> {
        self.0.alpha_bars().to_vec()
    }

    fn sigma(&self, n: usize) -> f64 {
        self.0.sigma(n)
    }
}

/// Synthetic customers prepared for training, with a train/test split.
#[pyclass(name = "Dataset", frozen)]
struct PyDataset {
    data: PreparedDataset,
    split: DatasetSplit,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    #[pyo3(signature = (customers=3, days=120, seed=0, split_ratio=0.6, split_seed=0))]
    fn synthetic(customers: usize, days: usize, seed: u64, split_ratio: f64, split_seed: u64) -> PyResult<Self> {
        let cfg = SyntheticDatasetConfig::desk_scale(customers, days, seed);
        let (data, split) = synthetic_experiment(&cfg, split_ratio, split_seed).map_err(err)?;
        Ok(Self { data, split })
    }

    fn __len__(&self) -> usize {
        self.data.len()
    }

    #[getter]
    fn train_indices(&self) -> Vec<usize> {
        self.split.train.clone()
    }

    #[getter]
    fn test_indices(&self) -> Vec<usize> {
        self.split.test.clone()
    }

    /// Observed net load in kW as `(customer_id, iso_date, values)`.
    fn profile(&self, i: usize) -> PyResult<(u32, String, Vec<f64>)> {
        let p = self
            .data
            .profiles
            .get(i)
            .ok_or_else(|| PyValueError::new_err(format!("profile {i} out of range")))?;
        Ok((p.customer_id, p.date.to_string(), p.values.clone()))
    }

    /// Normalized profiles in `[-1, 1]`.
    fn normalized(&self) -> Vec<Vec<f64>> {
        rows(&self.data.x0)
    }

    fn conditions(&self) -> Vec<Vec<f64>> {
        rows(&self.data.cond)
    }

    /// Flattened PV basis per profile (`L * T` values each).
    fn basis(&self) -> Vec<Vec<f64>> {
        rows(&self.data.basis)
    }
}

/// Noise-prediction network.
#[pyclass(name = "Denoiser", from_py_object)]
#[derive(Clone)]
struct PyDenoiser(Denoiser);

#[pymethods]
impl PyDenoiser {
    #[new]
    #[pyo3(signature = (variant="pdm", hidden=64, tokens=4, basis_rows=7, seed=0))]
    fn new(variant: &str, hidden: usize, tokens: usize, basis_rows: usize, seed: u64) -> PyResult<Self> {
        let cfg = DenoiserConfig {
            hidden,
            tokens,
            basis_rows,
            ..DenoiserConfig::desk(parse_variant(variant)?)
        };
        Denoiser::new(cfg, seed).map(Self).map_err(err)
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.0.variant().label()
    }

    #[getter]
    fn parameter_count(&self) -> usize {
        self.0.params().numel()
    }

    /// Zeroes every weight of the PV branch.
    fn zero_physics_branch(&mut self) {
        self.0.zero_physics_branch();
    }

    /// Predicted noise for a batch of noisy profiles.
    #[pyo3(signature = (x, levels, cond, basis=None))]
    fn predict(
        &self,
        x: Vec<Vec<f64>>,
        levels: Vec<f64>,
        cond: Vec<Vec<f64>>,
        basis: Option<Vec<Vec<f64>>>,
    ) -> PyResult<Vec<Vec<f64>>> {
        let x = Tensor::from_rows(&x).map_err(err)?;
        let y = Tensor::from_rows(&cond).map_err(err)?;
        let b = basis.map(|b| Tensor::from_rows(&b)).transpose().map_err(err)?;
        let out = self.0.predict(&x, &levels, &y, b.as_ref()).map_err(err)?;
        Ok(rows(&out))
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.0.save(&path).map_err(err)
    }
}

/// Trains one variant on the dataset's training split.
#[pyclass(name = "Trainer", unsendable)]
struct PyTrainer {
    trainer: Trainer,
}

#[pymethods]
impl PyTrainer {
    #[new]
    #[pyo3(signature = (dataset, variant="pdm", steps=3000, seed=0, learning_rate=None, batch_size=None, hidden=64))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        dataset: &PyDataset,
        variant: &str,
        steps: usize,
        seed: u64,
        learning_rate: Option<f64>,
        batch_size: Option<usize>,
        hidden: usize,
    ) -> PyResult<Self> {
        let base = TrainConfig::desk();
        let tcfg = TrainConfig {
            steps,
            seed,
            learning_rate: learning_rate.unwrap_or(base.learning_rate),
            batch_size: batch_size.unwrap_or(base.batch_size),
            ..base
        };
        let dcfg = DenoiserConfig {
            hidden,
            basis_rows: dataset.data.basis_rows(),
            ..DenoiserConfig::desk(parse_variant(variant)?)
        };
        let net = Denoiser::new(dcfg, seed).map_err(err)?;
        Ok(Self {
            trainer: Trainer::new(net, tcfg).map_err(err)?,
        })
    }

    /// One optimizer step on a random minibatch; returns the loss.
    fn step(&mut self, dataset: &PyDataset) -> PyResult<f64> {
        self.trainer.step_on(&dataset.data, &dataset.split.train).map_err(err)
    }

    /// Runs the configured number of steps; returns logged `(step, loss)`.
    fn fit(&mut self, dataset: &PyDataset) -> PyResult<Vec<(usize, f64)>> {
        self.trainer.fit(&dataset.data, &dataset.split.train).map_err(err)?;
        Ok(self.trainer.log().iter().map(|r| (r.step, r.loss)).collect())
    }

    #[getter]
    fn steps_taken(&self) -> usize {
        self.trainer.steps_taken()
    }

    #[getter]
    fn schedule(&self) -> PySchedule {
        PySchedule(self.trainer.schedule().clone())
    }

    /// Network carrying the EMA weights.
    fn ema_model(&self) -> PyResult<PyDenoiser> {
        self.trainer.ema_model().map(PyDenoiser).map_err(err)
    }

    /// Samples `members` trajectories per test profile with the EMA weights
    /// and scores them. Returns `(samples_kw, scores)`.
    #[pyo3(signature = (dataset, members=20, seed=0, indices=None))]
    fn sample(
        &self,
        py: Python<'_>,
        dataset: &PyDataset,
        members: usize,
        seed: u64,
        indices: Option<Vec<usize>>,
    ) -> PyResult<(Vec<Vec<Vec<f64>>>, Py<PyAny>)> {
        let idx = indices.unwrap_or_else(|| dataset.split.test.clone());
        let net = self.trainer.ema_model().map_err(err)?;
        let s = sample_for_profiles(&net, self.trainer.schedule(), &dataset.data, &idx, members, &SamplerConfig::new(seed))
            .map_err(err)?;
        let ens = ensembles_from_samples(&dataset.data, &idx, &s).map_err(err)?;
        let scores = score_dict(py, &ens)?;
        Ok((ens.iter().map(|e| rows(e.samples())).collect(), scores))
    }
}

fn score_dict(py: Python<'_>, ens: &[Ensemble]) -> PyResult<Py<PyAny>> {
    let row = metrics::evaluate_model("model", ens).map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("mae", row.mae)?;
    d.set_item("rmse", row.rmse)?;
    d.set_item("qs", row.qs)?;
    d.set_item("crps", row.crps)?;
    d.set_item("es", row.es)?;
    d.set_item("vs", row.vs)?;
    Ok(d.into_any().unbind())
}

fn ensemble(samples: Vec<Vec<f64>>, actual: Vec<f64>) -> PyResult<Ensemble> {
    Ensemble::new(Tensor::from_rows(&samples).map_err(err)?, actual).map_err(err)
}

/// Mean CRPS over time slots of one ensemble.
#[pyfunction]
fn crps(samples: Vec<Vec<f64>>, actual: Vec<f64>) -> PyResult<f64> {
    Ok(metrics::crps_mean(&ensemble(samples, actual)?))
}

#[pyfunction]
fn energy_score(samples: Vec<Vec<f64>>, actual: Vec<f64>) -> PyResult<f64> {
    metrics::energy_score(&ensemble(samples, actual)?).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (samples, actual, gamma=0.5))]
fn variogram_score(samples: Vec<Vec<f64>>, actual: Vec<f64>, gamma: f64) -> PyResult<f64> {
    metrics::variogram_score(&ensemble(samples, actual)?, gamma).map_err(err)
}

#[pyfunction]
fn quantile_score(samples: Vec<Vec<f64>>, actual: Vec<f64>, q: f64) -> PyResult<f64> {
    metrics::quantile_score(&ensemble(samples, actual)?, q).map_err(err)
}

/// Scores a list of `(samples, actual)` ensembles.
#[pyfunction]
fn evaluate(py: Python<'_>, ensembles: Vec<(Vec<Vec<f64>>, Vec<f64>)>) -> PyResult<Py<PyAny>> {
    let ens = ensembles
        .into_iter()
        .map(|(s, a)| ensemble(s, a))
        .collect::<PyResult<Vec<_>>>()?;
    score_dict(py, &ens)
}

#[pymodule]
fn netload(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySchedule>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyDenoiser>()?;
    m.add_class::<PyTrainer>()?;
    m.add_function(wrap_pyfunction!(crps, m)?)?;
    m.add_function(wrap_pyfunction!(energy_score, m)?)?;
    m.add_function(wrap_pyfunction!(variogram_score, m)?)?;
    m.add_function(wrap_pyfunction!(quantile_score, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add("STEPS_PER_DAY", netload_core::STEPS_PER_DAY)?;
    Ok(())
}
