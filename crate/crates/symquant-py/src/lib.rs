//! Python bindings: algebra models, exact polynomials, products and graph weights.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use symquant::graphs::{self, ColoredGraph, ZeroVerdict};
use symquant::hc::{hc_projection_uea, hc_restrict, IwasawaData};
use symquant::io::{parse_algebra, Model as CoreModel};
use symquant::poly::Poly as CorePoly;
use symquant::polyops::{apply_density, invariant_subspace};
use symquant::rat::fmt_q;
use symquant::starprod::{e_series, star_cf};
use symquant::trace::DensityKind;
use symquant::uea::{duflo_relation_check, rouviere_sharp, star_dk};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An exact polynomial with variable names for display.
#[pyclass(name = "Poly", module = "symquant_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Poly {
    inner: CorePoly,
    names: Vec<String>,
}

impl Poly {
    fn wrap(inner: CorePoly, names: Vec<String>) -> Self {
        Poly { inner, names }
    }

    fn check(&self, o: &Poly) -> PyResult<()> {
        if self.inner.nvars != o.inner.nvars {
            return Err(err("polynomials live in different rings"));
        }
        Ok(())
    }
}

#[pymethods]
impl Poly {
    fn __str__(&self) -> String {
        self.inner.fmt_with(&self.names)
    }

    fn __repr__(&self) -> String {
        format!("Poly({})", self.__str__())
    }

    fn __eq__(&self, o: &Poly) -> bool {
        self.inner == o.inner
    }

    fn __add__(&self, o: &Poly) -> PyResult<Poly> {
        self.check(o)?;
        Ok(Poly::wrap(&self.inner + &o.inner, self.names.clone()))
    }

    fn __sub__(&self, o: &Poly) -> PyResult<Poly> {
        self.check(o)?;
        Ok(Poly::wrap(&self.inner - &o.inner, self.names.clone()))
    }

    fn __mul__(&self, o: &Poly) -> PyResult<Poly> {
        self.check(o)?;
        Ok(Poly::wrap(&self.inner * &o.inner, self.names.clone()))
    }

    #[getter]
    fn nvars(&self) -> usize {
        self.inner.nvars
    }

    #[getter]
    fn degree(&self) -> Option<u32> {
        self.inner.degree()
    }

    /// Exponent tuple -> coefficient as a "p/q" string.
    fn coefficients(&self) -> BTreeMap<Vec<u32>, String> {
        self.inner.terms.iter().map(|(e, c)| (e.clone(), fmt_q(c))).collect()
    }
}

/// A symmetric pair loaded from an algebra definition file.
#[pyclass(name = "Model", module = "symquant_py", frozen)]
struct Model {
    inner: CoreModel,
}

impl Model {
    fn p_poly(&self, p: CorePoly) -> Poly {
        Poly::wrap(p, self.inner.pair.p_names())
    }

    fn on_p(&self, f: &Poly) -> PyResult<()> {
        if f.inner.nvars != self.inner.pair.np {
            return Err(err("expected a polynomial on p"));
        }
        Ok(())
    }
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Model> {
        let text = std::fs::read_to_string(path).map_err(err)?;
        Model::from_json(&text)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Model> {
        let inner = parse_algebra(text).and_then(|f| f.model()).map_err(err)?;
        Ok(Model { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.pair.def.name.clone()
    }

    #[getter]
    fn dim_p(&self) -> usize {
        self.inner.pair.np
    }

    #[getter]
    fn dim_k(&self) -> usize {
        self.inner.pair.nk
    }

    #[getter]
    fn p_names(&self) -> Vec<String> {
        self.inner.pair.p_names()
    }

    #[getter]
    fn k_names(&self) -> Vec<String> {
        self.inner.pair.names[self.inner.pair.np..].to_vec()
    }

    fn parse_p(&self, expr: &str) -> PyResult<Poly> {
        Ok(self.p_poly(self.inner.parse_p(expr).map_err(err)?))
    }

    fn parse_g(&self, expr: &str) -> PyResult<Poly> {
        Ok(Poly::wrap(self.inner.parse_g(expr).map_err(err)?, self.inner.pair.names.clone()))
    }

    /// Rewrites a polynomial on p through the file's named definitions where possible.
    #[pyo3(signature = (f, max_degree = 8))]
    fn express(&self, f: &Poly, max_degree: u32) -> PyResult<String> {
        self.on_p(f)?;
        Ok(self.inner.express(&f.inner, max_degree))
    }

    fn invariants(&self, degree: u32) -> Vec<Poly> {
        invariant_subspace(&self.inner.pair, degree).into_iter().map(|p| self.p_poly(p)).collect()
    }

    /// Applies the differential operator of a density ("J_half", "q_inv_half", ...).
    fn density(&self, kind: &str, f: &Poly) -> PyResult<Poly> {
        let kind = DensityKind::parse(kind).map_err(err)?;
        let out = apply_density(&self.inner.pair, kind, &f.inner).map_err(err)?;
        Ok(Poly::wrap(out, f.names.clone()))
    }

    #[pyo3(signature = (p, q, char = "zero"))]
    fn sharp(&self, p: &Poly, q: &Poly, char: &str) -> PyResult<Poly> {
        let lam = self.inner.character(char).map_err(err)?;
        Ok(self.p_poly(rouviere_sharp(&self.inner.pair, &p.inner, &q.inner, &lam).map_err(err)?))
    }

    /// Returns (product, truncated).
    #[pyo3(signature = (p, q, char = "zero"))]
    fn star_cf(&self, p: &Poly, q: &Poly, char: &str) -> PyResult<(Poly, bool)> {
        let lam = self.inner.character(char).map_err(err)?;
        let out = star_cf(&self.inner.pair, &p.inner, &q.inner, &lam).map_err(err)?;
        Ok((self.p_poly(out.value), out.truncated))
    }

    fn star_dk(&self, f: &Poly, g: &Poly) -> PyResult<Poly> {
        let out = star_dk(&self.inner.pair, &f.inner, &g.inner).map_err(err)?;
        Ok(Poly::wrap(out, self.inner.pair.names.clone()))
    }

    #[pyo3(signature = (order, char = "zero"))]
    fn e_series(&self, order: usize, char: &str) -> PyResult<Poly> {
        let lam = self.inner.character(char).map_err(err)?;
        let e = e_series(&self.inner.pair, &lam, order).map_err(err)?;
        let np = self.inner.pair.np;
        let names = (1..=np).map(|i| format!("x{i}")).chain((1..=np).map(|i| format!("y{i}"))).collect();
        Ok(Poly::wrap(e, names))
    }

    #[pyo3(signature = (degree, char = "zero"))]
    fn duflo_check(&self, degree: usize, char: &str) -> PyResult<bool> {
        let lam = self.inner.character(char).map_err(err)?;
        Ok(duflo_relation_check(&self.inner.pair, &lam, degree).equal)
    }

    /// (restriction, UEA projection) with the file's Iwasawa data.
    fn hc_project(&self, f: &Poly) -> PyResult<(Poly, Poly)> {
        self.on_p(f)?;
        let pair = &self.inner.pair;
        let data = IwasawaData::from_json(pair, &self.inner.raw).map_err(err)?;
        let names: Vec<String> = data
            .p0
            .iter()
            .map(|v| symquant::lie::vector_name(&pair.to_file(v), &pair.def.basis))
            .collect();
        let r = hc_restrict(&data, &f.inner, true).map_err(err)?;
        let u = hc_projection_uea(&data, &f.inner).map_err(err)?;
        Ok((Poly::wrap(r, names.clone()), Poly::wrap(u, names)))
    }
}

/// A colored graph in the {n, m, edges} JSON form.
#[pyclass(name = "Graph", module = "symquant_py", frozen)]
struct Graph {
    inner: ColoredGraph,
}

#[pymethods]
impl Graph {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Graph> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(err)?;
        Ok(Graph { inner: ColoredGraph::from_json(&v).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    /// Returns (value, standard error).
    #[pyo3(signature = (samples = 100_000, seed = 0))]
    fn weight(&self, py: Python<'_>, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
        let g = self.inner.clone();
        let w = py.detach(move || graphs::weight_mc(&g, samples, seed)).map_err(err)?;
        Ok((w.value, w.std_error))
    }

    /// "unknown" or the reason the weight vanishes.
    fn zero_verdict(&self) -> String {
        match graphs::zero_weight_predicate(&self.inner) {
            ZeroVerdict::Unknown => "unknown".into(),
            ZeroVerdict::Zero(r) => format!("{r:?}"),
        }
    }

    fn mirror(&self) -> Graph {
        Graph { inner: self.inner.mirror() }
    }

    fn mirror_sign(&self) -> f64 {
        graphs::mirror_sign(&self.inner)
    }

    fn canonical(&self) -> Graph {
        Graph { inner: self.inner.canonical() }
    }
}

#[pyfunction]
fn bch(order: usize) -> PyResult<String> {
    Ok(symquant::freelie::bch(order).map_err(err)?.to_string())
}

#[pyfunction]
fn z_sym(order: usize) -> PyResult<String> {
    Ok(symquant::freelie::z_sym(order).map_err(err)?.to_string())
}

#[pymodule]
fn symquant_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Poly>()?;
    m.add_class::<Model>()?;
    m.add_class::<Graph>()?;
    m.add_function(wrap_pyfunction!(bch, m)?)?;
    m.add_function(wrap_pyfunction!(z_sym, m)?)?;
    Ok(())
}
