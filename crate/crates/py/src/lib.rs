//! Python bindings for the `hyper2d` crate.
//!
//! Build the importable module with `maturin develop` (or
//! `cargo build --release -p hyper2d-py --features extension-module` and
//! copy `libhyper2d_py.so` to `hyper2d.so`), then `import hyper2d`.

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hyper2d::adiabatic::{build_basis_with, solve_channels, BasisConfig, SymmetrySpec};
use hyper2d::channels::{
    allowed_thresholds, classify_tails, compute_surface, ChannelSurface, SurfaceOptions, TailClass, TailOptions,
};
use hyper2d::geometry::{HyperPoint, MassGeometry};
use hyper2d::harmonics::{self, HarmonicLabel, SymmetryClass};
use hyper2d::run::{self, BasisSize, SurfaceOutput};
use hyper2d::threshold::{self, ThresholdReport, WkbEstimate};
use hyper2d::twobody::{self, BoundState, PairPotential};
use hyper2d::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Numerical { .. } | Error::Phase(_) | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn class_of(name: &str) -> PyResult<SymmetryClass> {
    name.parse().map_err(to_py)
}

fn reflection_of(r: &Bound<'_, PyAny>) -> PyResult<u8> {
    if let Ok(i) = r.extract::<u8>() {
        return run::parse_reflection(&i.to_string()).map_err(to_py);
    }
    run::parse_reflection(&r.extract::<String>()?).map_err(to_py)
}

/// Symmetry sector |M|^π_r of a symmetry class.
#[pyclass(name = "SymmetrySpec", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PySymmetrySpec {
    inner: SymmetrySpec,
}

#[pymethods]
impl PySymmetrySpec {
    #[new]
    #[pyo3(signature = (class_name, m, r = None))]
    fn new(class_name: &str, m: i32, r: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let r = r.map(reflection_of).transpose()?.unwrap_or(0);
        let inner = SymmetrySpec::new(class_of(class_name)?, m, r).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn class_name(&self) -> String {
        self.inner.class.to_string()
    }

    #[getter]
    fn m(&self) -> i32 {
        self.inner.m
    }

    #[getter]
    fn r(&self) -> u8 {
        self.inner.r
    }

    #[getter]
    fn parity(&self) -> i32 {
        self.inner.parity()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    fn lambda_min(&self) -> Option<i32> {
        harmonics::lambda_min(self.inner.class, self.inner.m, self.inner.r)
    }

    fn __repr__(&self) -> String {
        format!(
            "SymmetrySpec('{}', {}, {})",
            self.inner.class, self.inner.m, self.inner.r
        )
    }
}

#[pyclass(name = "BoundState", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyBoundState {
    v: usize,
    m2b: i32,
    energy: f64,
}

impl From<BoundState> for PyBoundState {
    fn from(b: BoundState) -> Self {
        Self {
            v: b.v,
            m2b: b.m2b,
            energy: b.energy,
        }
    }
}

#[pymethods]
impl PyBoundState {
    fn __repr__(&self) -> String {
        format!("BoundState(v={}, m2b={}, energy={})", self.v, self.m2b, self.energy)
    }
}

/// Threshold laws of one sector; `atom_diatom` holds
/// (m2b, m_AD, exponent, dominant) tuples.
#[pyclass(name = "ThresholdReport", frozen)]
struct PyThresholdReport {
    inner: ThresholdReport,
}

#[pymethods]
impl PyThresholdReport {
    #[getter]
    fn class_name(&self) -> String {
        self.inner.class.to_string()
    }

    #[getter]
    fn m(&self) -> i32 {
        self.inner.m
    }

    #[getter]
    fn r(&self) -> u8 {
        self.inner.r
    }

    #[getter]
    fn atom_diatom(&self) -> Vec<(i32, i32, i32, bool)> {
        self.inner
            .atom_diatom
            .iter()
            .map(|a| (a.m2b, a.m_ad, a.exponent, a.dominant))
            .collect()
    }

    #[getter]
    fn lambda_min(&self) -> i32 {
        self.inner.lambda_min
    }

    #[getter]
    fn k3_exponent(&self) -> i32 {
        self.inner.k3_exponent
    }

    #[getter]
    fn d3_exponent(&self) -> i32 {
        self.inner.d3_exponent
    }

    #[getter]
    fn k3_dominant(&self) -> bool {
        self.inner.k3_dominant
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "ThresholdReport({} M={} r={} lambda_min={} K3~k^{})",
            self.inner.class, self.inner.m, self.inner.r, self.inner.lambda_min, self.inner.k3_exponent
        )
    }
}

#[pyclass(name = "WkbEstimate", frozen, get_all)]
struct PyWkbEstimate {
    energy: f64,
    k: f64,
    l_eff: f64,
    exponent: f64,
    probability: f64,
    scaling_power: f64,
    above_barrier: bool,
}

impl From<WkbEstimate> for PyWkbEstimate {
    fn from(w: WkbEstimate) -> Self {
        Self {
            energy: w.energy,
            k: w.k,
            l_eff: w.l_eff,
            exponent: w.exponent,
            probability: w.probability,
            scaling_power: w.scaling_power,
            above_barrier: w.above_barrier,
        }
    }
}

/// Adiabatic surfaces of one sector with couplings and tail classes.
#[pyclass(name = "Surface", frozen)]
struct PySurface {
    inner: ChannelSurface,
}

fn tail_tuple(t: &TailClass) -> (String, Option<f64>, Option<f64>) {
    match t {
        TailClass::Continuum { lambda } => ("continuum".into(), Some(*lambda as f64), None),
        TailClass::AtomDiatom { energy, m_ad, .. } => ("atom_diatom".into(), Some(*m_ad as f64), Some(*energy)),
        TailClass::Unresolved => ("unresolved".into(), None, None),
    }
}

#[pymethods]
impl PySurface {
    #[getter]
    fn spec(&self) -> PySymmetrySpec {
        PySymmetrySpec { inner: self.inner.spec }
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }

    #[getter]
    fn r(&self) -> Vec<f64> {
        self.inner.r.clone()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.inner.channels()
    }

    /// U[i][nu] on the grid.
    #[getter]
    fn u(&self) -> Vec<Vec<f64>> {
        self.inner.u.clone()
    }

    /// W[i][nu] on the grid.
    #[getter]
    fn w(&self) -> Vec<Vec<f64>> {
        self.inner.w.clone()
    }

    fn q_diagonal(&self, nu: usize) -> PyResult<Vec<f64>> {
        self.check_channel(nu)?;
        Ok(self.inner.q_diagonal(nu))
    }

    /// P matrix at grid index i, as nested rows.
    fn p(&self, i: usize) -> PyResult<Vec<Vec<f64>>> {
        let m = self
            .inner
            .p
            .get(i)
            .ok_or_else(|| PyValueError::new_err("grid index out of range"))?;
        Ok(m.row_iter().map(|row| row.iter().copied().collect()).collect())
    }

    /// Q matrix at grid index i, as nested rows.
    fn q(&self, i: usize) -> PyResult<Vec<Vec<f64>>> {
        let m = self
            .inner
            .q
            .get(i)
            .ok_or_else(|| PyValueError::new_err("grid index out of range"))?;
        Ok(m.row_iter().map(|row| row.iter().copied().collect()).collect())
    }

    /// Per channel: (kind, param1, param2) with kind one of continuum
    /// (param1 = λ), atom_diatom (param1 = |m_AD|, param2 = threshold
    /// energy) or unresolved.
    #[getter]
    fn tails(&self) -> Vec<(String, Option<f64>, Option<f64>)> {
        self.inner.tails.iter().map(tail_tuple).collect()
    }

    /// Per channel: (c0, c2, residual) of the tail fit, if any.
    #[getter]
    fn fits(&self) -> Vec<Option<(f64, f64, f64)>> {
        self.inner
            .fits
            .iter()
            .map(|f| f.map(|f| (f.c0, f.c2, f.residual)))
            .collect()
    }

    fn to_csv(&self) -> PyResult<String> {
        run::surface_csv(&self.inner).map_err(to_py)
    }

    fn couplings_csv(&self) -> PyResult<String> {
        run::couplings_csv(&self.inner).map_err(to_py)
    }
}

impl PySurface {
    fn check_channel(&self, nu: usize) -> PyResult<()> {
        if nu >= self.inner.channels() {
            return Err(PyValueError::new_err(format!("channel {nu} out of range")));
        }
        Ok(())
    }
}

/// Run configuration, identical to the JSON accepted by the CLI.
#[pyclass(name = "RunConfig", skip_from_py_object)]
#[derive(Clone)]
struct PyRunConfig {
    inner: run::RunConfig,
}

#[pymethods]
impl PyRunConfig {
    #[new]
    #[pyo3(signature = (
        class_name = "BBB", m = vec![0], r = vec![0], masses = [1.0, 1.0, 1.0],
        depth = -30.0, range = 1.0, grid = "0.5:15:200", basis = (50, 50, 6),
        channels = 10, output_dir = PathBuf::from("out"), workers = None
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        class_name: &str,
        m: Vec<i32>,
        r: Vec<u8>,
        masses: [f64; 3],
        depth: f64,
        range: f64,
        grid: &str,
        basis: (usize, usize, usize),
        channels: usize,
        output_dir: PathBuf,
        workers: Option<usize>,
    ) -> PyResult<Self> {
        let inner = run::RunConfig {
            class: class_of(class_name)?,
            m,
            r,
            masses,
            depth,
            range,
            grid: grid.parse().map_err(to_py)?,
            basis: BasisSize {
                n_theta: basis.0,
                n_phi: basis.1,
                order: basis.2,
            },
            channels,
            output_dir,
            workers,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        let inner = run::RunConfig::from_json(s).map_err(to_py)?;
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    /// Content hash that ignores workers and output_dir.
    fn hash(&self) -> String {
        self.inner.hash()
    }

    fn grid_points(&self) -> Vec<f64> {
        self.inner.grid.points()
    }
}

/// Symmetry-allowed (λ, [|ω|...]) for a class and M.
#[pyfunction]
fn enumerate_allowed(class_name: &str, m: i32, lambda_max: i32) -> PyResult<Vec<(i32, Vec<i32>)>> {
    Ok(harmonics::enumerate_allowed(class_of(class_name)?, m, lambda_max))
}

/// Lowest allowed λ of a sector, or None.
#[pyfunction]
fn lambda_min(class_name: &str, m: i32, r: &Bound<'_, PyAny>) -> PyResult<Option<i32>> {
    Ok(harmonics::lambda_min(class_of(class_name)?, m, reflection_of(r)?))
}

/// Unsymmetrized harmonic Y_{λω}^M at (θ, φ, γ).
#[pyfunction]
fn harmonic_value(lam: i32, omega: i32, m: i32, theta: f64, phi: f64, gamma: f64) -> PyResult<Complex64> {
    let h = HarmonicLabel::new(lam, omega, m).map_err(to_py)?;
    let p = HyperPoint::new(1.0, theta, phi, gamma).map_err(to_py)?;
    harmonics::harmonic_value(h, &p).map_err(to_py)
}

/// Bound levels of D sech²(r/r0) for one m2b.
#[pyfunction]
#[pyo3(signature = (m2b, depth = -30.0, range = 1.0, reduced_mass = 0.5))]
fn bound_states(m2b: i32, depth: f64, range: f64, reduced_mass: f64) -> PyResult<Vec<PyBoundState>> {
    let pp = PairPotential::new(depth, range).map_err(to_py)?;
    let states = twobody::bound_states(&pp, m2b, reduced_mass).map_err(to_py)?;
    Ok(states.into_iter().map(Into::into).collect())
}

/// Summary threshold table for a class with identical particles.
#[pyfunction]
#[pyo3(signature = (class_name, m_max = 2))]
fn threshold_table(class_name: &str, m_max: i32) -> PyResult<Vec<PyThresholdReport>> {
    let rows = threshold::threshold_table(class_of(class_name)?, m_max).map_err(to_py)?;
    Ok(rows.into_iter().map(|inner| PyThresholdReport { inner }).collect())
}

/// WKB tunnelling through c2/(2μR²) from r0 inwards of the turning point.
#[pyfunction]
#[pyo3(signature = (c2, mu, energy, r0 = 1.0))]
fn wkb_probability(c2: f64, mu: f64, energy: f64, r0: f64) -> PyResult<PyWkbEstimate> {
    threshold::wkb_probability(c2, mu, energy, r0)
        .map(Into::into)
        .map_err(to_py)
}

/// Local power of the WKB probability in k over [k_lo, k_hi].
#[pyfunction]
#[pyo3(signature = (c2, mu, k_lo, k_hi, r0 = 1.0))]
fn wkb_scaling_power(c2: f64, mu: f64, k_lo: f64, k_hi: f64, r0: f64) -> PyResult<f64> {
    threshold::wkb_scaling_power(c2, mu, k_lo, k_hi, r0).map_err(to_py)
}

/// Lowest adiabatic potentials U_ν(R) of one sector at one R.
#[pyfunction]
#[pyo3(signature = (spec, r, channels = 6, depth = -30.0, range = 1.0, masses = [1.0, 1.0, 1.0], basis = (50, 50, 6)))]
fn adiabatic_potentials(
    py: Python<'_>,
    spec: &PySymmetrySpec,
    r: f64,
    channels: usize,
    depth: f64,
    range: f64,
    masses: [f64; 3],
    basis: (usize, usize, usize),
) -> PyResult<Vec<f64>> {
    let spec = spec.inner;
    py.detach(move || {
        let g = MassGeometry::new(masses[0], masses[1], masses[2])?;
        let pp = PairPotential::new(depth, range)?;
        let b = build_basis_with(spec, &BasisConfig::with_size(basis.0, basis.1, basis.2), &g)?;
        Ok(solve_channels(&spec, &Arc::new(b), r, &g, &pp, channels)?.values)
    })
    .map_err(to_py)
}

/// Surfaces, couplings and tail classes of one sector over an R grid,
/// without writing files.
#[pyfunction]
#[pyo3(signature = (spec, grid, channels = 6, depth = -30.0, range = 1.0, masses = [1.0, 1.0, 1.0], basis = (50, 50, 6)))]
fn compute_surfaces(
    py: Python<'_>,
    spec: &PySymmetrySpec,
    grid: Vec<f64>,
    channels: usize,
    depth: f64,
    range: f64,
    masses: [f64; 3],
    basis: (usize, usize, usize),
) -> PyResult<PySurface> {
    let spec = spec.inner;
    py.detach(move || -> hyper2d::Result<ChannelSurface> {
        let g = MassGeometry::new(masses[0], masses[1], masses[2])?;
        let pp = PairPotential::new(depth, range)?;
        let b = build_basis_with(spec, &BasisConfig::with_size(basis.0, basis.1, basis.2), &g)?;
        let mut s = compute_surface(
            &spec,
            &Arc::new(b),
            &grid,
            &g,
            &pp,
            channels,
            &SurfaceOptions::default(),
        )?;
        let thresholds = allowed_thresholds(&spec, &g, &pp)?;
        classify_tails(&mut s, &thresholds, &TailOptions::default());
        Ok(s)
    })
    .map(|inner| PySurface { inner })
    .map_err(to_py)
}

/// Runs a configuration like the CLI: writes CSV files and a manifest to
/// `config.output_dir` and returns the surfaces.
#[pyfunction]
#[pyo3(signature = (config, couplings = false))]
fn run_surfaces(py: Python<'_>, config: &PyRunConfig, couplings: bool) -> PyResult<Vec<PySurface>> {
    let cfg = config.inner.clone();
    let output = if couplings {
        SurfaceOutput::SurfacesAndCouplings
    } else {
        SurfaceOutput::Surfaces
    };
    let results = py.detach(move || run::run_surfaces(&cfg, output)).map_err(to_py)?;
    Ok(results.into_iter().map(|r| PySurface { inner: r.surface }).collect())
}

#[pymodule(name = "hyper2d")]
pub fn hyper2d_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySymmetrySpec>()?;
    m.add_class::<PyBoundState>()?;
    m.add_class::<PyThresholdReport>()?;
    m.add_class::<PyWkbEstimate>()?;
    m.add_class::<PySurface>()?;
    m.add_class::<PyRunConfig>()?;
    m.add_function(wrap_pyfunction!(enumerate_allowed, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_min, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_value, m)?)?;
    m.add_function(wrap_pyfunction!(bound_states, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_table, m)?)?;
    m.add_function(wrap_pyfunction!(wkb_probability, m)?)?;
    m.add_function(wrap_pyfunction!(wkb_scaling_power, m)?)?;
    m.add_function(wrap_pyfunction!(adiabatic_potentials, m)?)?;
    m.add_function(wrap_pyfunction!(compute_surfaces, m)?)?;
    m.add_function(wrap_pyfunction!(run_surfaces, m)?)?;
    m.add("MU", MassGeometry::equal().mu)?;
    Ok(())
}
