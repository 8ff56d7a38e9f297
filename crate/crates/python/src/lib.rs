//! Python bindings: algebras, skew series, matrices, determinants and norms.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use skewdet::instance::{Instance, Overrides};
use skewdet::linalg::{dieudonne_det, DetNormalForm, LaurentEntry, SkewMatrix};
use skewdet::norm::{dimension_reduce, monic_norm_check, nr_det_compat, reduced_norm_center};
use skewdet::random::Sampler;
use skewdet::selftest::{self, Level};
use skewdet::{make_algebra, make_tower, SkewRing, SkewSeries};

create_exception!(skewdet, SkewdetError, PyException);

fn err(e: skewdet::Error) -> PyErr {
    SkewdetError::new_err(e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serialisable")
}

/// `𝔒 / (p^N, T^{M_T})` for the division algebra of invariant `r/s`.
#[pyclass(name = "Ring", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRing(SkewRing);

#[pymethods]
impl PyRing {
    #[new]
    #[pyo3(signature = (p, f_k, d, s, prec_p, prec_x, r = 1))]
    fn new(p: u64, f_k: usize, d: usize, s: usize, prec_p: u32, prec_x: usize, r: usize) -> PyResult<Self> {
        let t = make_tower(p, f_k, d, s, prec_p).map_err(err)?;
        let a = make_algebra(&t, r).map_err(err)?;
        Ok(PyRing(SkewRing::new(&a, prec_x).map_err(err)?))
    }

    #[getter]
    fn prec_x(&self) -> usize {
        self.0.prec_x()
    }

    #[getter]
    fn prec_t(&self) -> usize {
        self.0.prec_t()
    }

    /// `(a, c)` describing `τ` on `O_D`.
    fn tau(&self) -> (usize, String) {
        let d = self.0.algebra().descriptor();
        (d.tau_a, json(&d.tau_c))
    }

    fn descriptor_json(&self) -> String {
        json(self.0.algebra().descriptor())
    }

    fn zero(&self) -> PySeries {
        PySeries(self.0.zero())
    }

    fn one(&self) -> PySeries {
        PySeries(self.0.one())
    }

    fn x(&self) -> PySeries {
        PySeries(self.0.x())
    }

    /// The uniformiser `π_D` as a constant series.
    fn pi(&self) -> PyResult<PySeries> {
        Ok(PySeries(self.0.constant(&self.0.algebra().pi()).map_err(err)?))
    }

    /// The Teichmüller generator `ω` as a constant series.
    fn omega(&self) -> PyResult<PySeries> {
        let a = self.0.algebra();
        let w = a.from_tower(&self.0.tower().omega()).map_err(err)?;
        Ok(PySeries(self.0.constant(&w).map_err(err)?))
    }

    /// `Σ c_i X^i` with integer coefficients.
    fn from_ints(&self, coeffs: Vec<i64>) -> PyResult<PySeries> {
        let t = self.0.tower();
        let a = self.0.algebra();
        let cs = coeffs.iter().map(|&c| a.from_tower(&t.from_int(c))).collect::<Result<Vec<_>, _>>().map_err(err)?;
        Ok(PySeries(self.0.from_coeffs(&cs).map_err(err)?))
    }

    fn series_from_json(&self, text: &str) -> PyResult<PySeries> {
        let rec = serde_json::from_str(text).map_err(|e| err(e.into()))?;
        Ok(PySeries(self.0.from_record(&rec).map_err(err)?))
    }

    #[pyo3(signature = (n, degree, seed))]
    fn random_matrix(&self, n: usize, degree: usize, seed: u64) -> PyMatrix {
        PyMatrix(Sampler::new(seed).matrix(&self.0, n, degree))
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[pyclass(name = "Series", frozen, from_py_object)]
#[derive(Clone)]
struct PySeries(SkewSeries);

#[pymethods]
impl PySeries {
    fn __add__(&self, o: &PySeries) -> PySeries {
        PySeries(self.0.add(&o.0))
    }
    fn __sub__(&self, o: &PySeries) -> PySeries {
        PySeries(self.0.sub(&o.0))
    }
    fn __mul__(&self, o: &PySeries) -> PySeries {
        PySeries(self.0.mul(&o.0))
    }
    fn __neg__(&self) -> PySeries {
        PySeries(self.0.neg())
    }
    fn __pow__(&self, k: usize, _modulo: Option<usize>) -> PySeries {
        PySeries(self.0.pow(k))
    }
    fn __eq__(&self, o: &PySeries) -> bool {
        self.0 == o.0
    }
    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }

    fn reduced_order(&self) -> Option<usize> {
        self.0.reduced_order()
    }

    fn degree(&self) -> Option<usize> {
        self.0.degree()
    }

    fn is_distinguished(&self) -> bool {
        self.0.is_distinguished()
    }

    fn invert_unit(&self) -> PyResult<PySeries> {
        Ok(PySeries(self.0.invert_unit().map_err(err)?))
    }

    /// `(ε, F)` with `self = ε F`.
    fn prepare(&self) -> PyResult<(PySeries, PySeries)> {
        let (e, f) = self.0.weierstrass_prepare().map_err(err)?;
        Ok((PySeries(e), PySeries(f)))
    }

    /// `(q, r)` with `g = q · self + r`.
    fn divide(&self, g: &PySeries) -> PyResult<(PySeries, PySeries)> {
        let (q, r) = self.0.weierstrass_divide(&g.0).map_err(err)?;
        Ok((PySeries(q), PySeries(r)))
    }

    /// Monicity report of the reduced norm, as JSON.
    fn monic_norm_check(&self) -> PyResult<String> {
        Ok(json(&monic_norm_check(&self.0).map_err(err)?))
    }

    fn to_json(&self) -> String {
        json(&self.0.to_record())
    }
}

#[pyclass(name = "DetNormalForm", frozen)]
struct PyDet(DetNormalForm);

#[pymethods]
impl PyDet {
    #[getter]
    fn w(&self) -> i64 {
        self.0.w
    }
    #[getter]
    fn prec_p(&self) -> u32 {
        self.0.prec_p
    }
    #[getter]
    fn f(&self) -> PySeries {
        PySeries(self.0.f.clone())
    }
    fn same_class(&self, o: &PyDet) -> PyResult<bool> {
        self.0.same_class(&o.0).map_err(err)
    }
    fn to_json(&self) -> String {
        json(&self.0.to_record())
    }
}

#[pyclass(name = "Matrix", frozen)]
struct PyMatrix(SkewMatrix);

#[pymethods]
impl PyMatrix {
    #[new]
    fn new(ring: &PyRing, rows: Vec<Vec<PySeries>>) -> PyResult<Self> {
        let entries = rows.into_iter().map(|r| r.into_iter().map(|g| LaurentEntry::integral(g.0)).collect()).collect();
        Ok(PyMatrix(SkewMatrix::new(&ring.0, entries).map_err(err)?))
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.rows(), self.0.cols())
    }

    fn __mul__(&self, o: &PyMatrix) -> PyResult<PyMatrix> {
        Ok(PyMatrix(self.0.mul(&o.0).map_err(err)?))
    }

    fn __eq__(&self, o: &PyMatrix) -> bool {
        self.0 == o.0
    }

    fn det(&self) -> PyResult<PyDet> {
        Ok(PyDet(dieudonne_det(&self.0).map_err(err)?))
    }

    /// Reduced norm report over the centre, as JSON.
    fn reduced_norm(&self) -> PyResult<String> {
        Ok(json(&reduced_norm_center(&self.0).map_err(err)?))
    }

    /// Whether `nr(A)` agrees with the norm of the determinant normal form.
    fn compat(&self) -> PyResult<bool> {
        Ok(nr_det_compat(&self.0).map_err(err)?.agree)
    }

    /// `(C, report_json)` with `C` of size `n`.
    fn dimension_reduce(&self, n: usize) -> PyResult<(PyMatrix, String)> {
        let (c, rep) = dimension_reduce(&self.0, n).map_err(err)?;
        Ok((PyMatrix(c), json(&rep)))
    }

    fn to_json(&self) -> String {
        json(&self.0.to_record())
    }
}

/// Loads an instance file; returns the ring and the named matrices.
#[pyfunction]
#[pyo3(signature = (text, prec_p = None, prec_x = None))]
fn load_instance(text: &str, prec_p: Option<u32>, prec_x: Option<usize>) -> PyResult<(PyRing, Vec<(String, PyMatrix)>)> {
    let inst = Instance::from_json(text, Overrides { prec_p, prec_x }).map_err(err)?;
    let mats = inst.matrices.into_iter().map(|(n, m)| (n, PyMatrix(m))).collect();
    Ok((PyRing(inst.ring), mats))
}

/// Runs the seeded property suites; returns `(all_passed, report_json)`.
#[pyfunction]
#[pyo3(signature = (seed = 1, level = "quick"))]
fn run_selftest(seed: u64, level: &str) -> PyResult<(bool, String)> {
    let level: Level = level.parse().map_err(err)?;
    let rep = selftest::run(seed, level).map_err(err)?;
    Ok((rep.all_passed(), json(&rep)))
}

#[pymodule]
#[pyo3(name = "skewdet")]
fn skewdet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SkewdetError", m.py().get_type::<SkewdetError>())?;
    m.add_class::<PyRing>()?;
    m.add_class::<PySeries>()?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyDet>()?;
    m.add_function(wrap_pyfunction!(load_instance, m)?)?;
    m.add_function(wrap_pyfunction!(run_selftest, m)?)?;
    Ok(())
}
