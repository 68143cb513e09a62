//! Python bindings: spaces, policies, decisions and audits.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::IntoPyObjectExt;

use vmac_core::audit::{export_smtlib, AuditResult, Auditor};
use vmac_core::engine::{DecisionCache, DecisionEngine, PolicyStore};
use vmac_core::harness::{generate_house, house_registry, run_scenarios, HOUSE_POLICIES};
use vmac_core::{parse_policies as core_parse, pretty_print, AccessRequest, Action, Box3, Formula, Point3, SpaceRecord, TimeOfDay};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn action_of(s: &str) -> PyResult<Action> {
    s.parse().map_err(value_err)
}

fn time_of(hhmm: u16) -> PyResult<TimeOfDay> {
    TimeOfDay::new(hhmm).ok_or_else(|| PyValueError::new_err(format!("invalid time of day {hhmm:04}")))
}

/// Named axis-aligned boxes forming a containment forest.
#[pyclass(name = "SpaceRegistry", frozen)]
struct PySpaceRegistry {
    inner: Arc<vmac_core::SpaceRegistry>,
}

#[pymethods]
impl PySpaceRegistry {
    /// `spaces` is a list of `(id, [lx, rx, ly, ry, lz, rz], parent_or_None)`.
    #[new]
    fn new(spaces: Vec<(String, [f64; 6], Option<String>)>) -> PyResult<Self> {
        let records = spaces
            .into_iter()
            .map(|(id, b, parent)| SpaceRecord::new(id, Box3::from_bounds(b), parent.as_deref()))
            .collect();
        let inner = vmac_core::SpaceRegistry::load(records).map_err(value_err)?;
        Ok(PySpaceRegistry { inner: Arc::new(inner) })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = vmac_core::SpaceRegistry::from_json(text).map_err(value_err)?;
        Ok(PySpaceRegistry { inner: Arc::new(inner) })
    }

    /// The two-storey example house.
    #[staticmethod]
    fn house() -> Self {
        PySpaceRegistry {
            inner: Arc::new(house_registry()),
        }
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn ids(&self) -> Vec<String> {
        self.inner.spaces().map(|s| s.id.clone()).collect()
    }

    fn parent_of(&self, id: &str) -> Option<String> {
        self.inner.parent_of(id).map(str::to_string)
    }

    fn children_of(&self, id: &str) -> Vec<String> {
        self.inner.children_of(id).into_iter().map(str::to_string).collect()
    }

    /// Ids of the spaces containing `point`, innermost first.
    fn enclosing_chain(&self, point: Point3) -> Vec<String> {
        self.inner.enclosing_chain(point).into_iter().map(str::to_string).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "Decision", frozen, get_all)]
struct PyDecision {
    verdict: String,
    fired_allow: Vec<String>,
    fired_deny: Vec<String>,
    cache_hit: bool,
}

#[pymethods]
impl PyDecision {
    #[getter]
    fn allowed(&self) -> bool {
        self.verdict == "allow"
    }

    fn __repr__(&self) -> String {
        format!(
            "Decision(verdict={:?}, fired_allow={:?}, fired_deny={:?}, cache_hit={})",
            self.verdict, self.fired_allow, self.fired_deny, self.cache_hit
        )
    }
}

/// A policy store bound to a registry, with an optional decision cache.
#[pyclass(name = "Engine")]
struct PyEngine {
    inner: DecisionEngine,
}

impl PyEngine {
    fn auditor(&self) -> Auditor<'_> {
        Auditor::new(self.inner.store())
    }
}

fn result_to_py(py: Python<'_>, r: AuditResult) -> PyResult<Py<PyAny>> {
    match r {
        AuditResult::Bool(b) => b.into_py_any(py),
        AuditResult::Principals(ps) => ps.into_py_any(py),
    }
}

#[pymethods]
impl PyEngine {
    #[new]
    #[pyo3(signature = (registry, policies = "", cache = true, cache_capacity = 4096))]
    fn new(registry: &PySpaceRegistry, policies: &str, cache: bool, cache_capacity: usize) -> PyResult<Self> {
        let ps = core_parse(policies).map_err(value_err)?;
        let store = PolicyStore::with_policies(registry.inner.clone(), ps).map_err(value_err)?;
        let cache = cache.then(|| DecisionCache::new(cache_capacity.max(1)));
        Ok(PyEngine {
            inner: DecisionEngine::new(store, cache),
        })
    }

    #[pyo3(signature = (principal, action, point, user_location, time))]
    fn decide(&self, principal: &str, action: &str, point: Point3, user_location: Point3, time: u16) -> PyResult<PyDecision> {
        let req = AccessRequest::new(principal, action_of(action)?, point, user_location, time_of(time)?);
        let d = self.inner.decide(&req);
        Ok(PyDecision {
            verdict: d.verdict.to_string(),
            fired_allow: d.fired_allow.to_vec(),
            fired_deny: d.fired_deny.to_vec(),
            cache_hit: d.cache_hit,
        })
    }

    /// One `True` (allow) or `False` (deny) per point.
    fn decide_frame(&self, principal: &str, action: &str, points: Vec<Point3>, user_location: Point3, time: u16) -> PyResult<Vec<bool>> {
        let ds = self
            .inner
            .decide_frame(principal, action_of(action)?, &points, user_location, time_of(time)?);
        Ok(ds.iter().map(|d| d.is_allow()).collect())
    }

    /// Adds every policy in `text`.
    fn add_policies(&mut self, text: &str) -> PyResult<()> {
        for p in core_parse(text).map_err(value_err)? {
            self.inner.add_policy(p).map_err(value_err)?;
        }
        Ok(())
    }

    fn replace_policy(&mut self, text: &str) -> PyResult<()> {
        let mut ps = core_parse(text).map_err(value_err)?;
        if ps.len() != 1 {
            return Err(PyValueError::new_err(format!("expected exactly one policy, found {}", ps.len())));
        }
        self.inner.replace_policy(ps.remove(0)).map_err(value_err)?;
        Ok(())
    }

    fn remove_policy(&mut self, name: &str) -> PyResult<()> {
        self.inner.remove_policy(name).map(drop).map_err(value_err)
    }

    fn policy_names(&self) -> Vec<String> {
        self.inner.store().policies().map(|p| p.name.clone()).collect()
    }

    /// The policies in canonical text form.
    fn policies_text(&self) -> String {
        let ps: Vec<_> = self.inner.store().policies().cloned().collect();
        pretty_print(&ps)
    }

    /// The translated formula of one policy as an s-expression.
    fn formula(&self, name: &str) -> PyResult<String> {
        self.inner
            .store()
            .formula(name)
            .map(|f| f.to_string())
            .ok_or_else(|| PyValueError::new_err(format!("unknown policy \"{name}\"")))
    }

    /// Principals that can reach some point of `space`, optionally at a fixed
    /// time and with the user inside another space. `"*"` stands for anyone
    /// not named in a policy.
    #[pyo3(signature = (space, time = None, user_in = None))]
    fn who_has_access(&self, space: &str, time: Option<u16>, user_in: Option<&str>) -> PyResult<Vec<String>> {
        let mut ctx = Vec::new();
        if let Some(t) = time {
            let t = time_of(t)?;
            ctx.push(Formula::time_in(t, t));
        }
        if let Some(id) = user_in {
            let b = self
                .inner
                .registry()
                .box_of(id)
                .ok_or_else(|| PyValueError::new_err(format!("unknown space \"{id}\"")))?;
            ctx.push(Formula::user_in(b));
        }
        let ctx = (!ctx.is_empty()).then(|| Formula::and(ctx));
        let report = self
            .auditor()
            .list_principals_with_access(space, ctx.as_ref())
            .map_err(value_err)?;
        Ok(report.principals().map(<[String]>::to_vec).unwrap_or_default())
    }

    fn check_too_weak(&self, py: Python<'_>, space: &str) -> PyResult<Py<PyAny>> {
        result_to_py(py, self.auditor().check_too_weak(space).map_err(value_err)?.result)
    }

    fn check_too_strong(&self, py: Python<'_>, space: &str, owner: &str) -> PyResult<Py<PyAny>> {
        result_to_py(py, self.auditor().check_too_strong(space, owner).map_err(value_err)?.result)
    }

    fn check_new_allow_effective(&self, py: Python<'_>, policy: &str) -> PyResult<Py<PyAny>> {
        let mut ps = core_parse(policy).map_err(value_err)?;
        if ps.len() != 1 {
            return Err(PyValueError::new_err(format!("expected exactly one policy, found {}", ps.len())));
        }
        let report = self.auditor().check_new_allow_effective(&ps.remove(0)).map_err(value_err)?;
        result_to_py(py, report.result)
    }

    fn find_allow_deny_conflicts(&self, py: Python<'_>, space: &str) -> PyResult<Py<PyAny>> {
        result_to_py(py, self.auditor().find_allow_deny_conflicts(space).map_err(value_err)?.result)
    }

    fn check_more_permissive_than_parent(&self, py: Python<'_>, space: &str) -> PyResult<Py<PyAny>> {
        let report = self.auditor().check_more_permissive_than_parent(space).map_err(value_err)?;
        result_to_py(py, report.result)
    }

    /// SMT-LIB script asserting that some point of `space` is reachable.
    fn export_smtlib(&self, space: &str) -> PyResult<String> {
        let b = self
            .inner
            .registry()
            .box_of(space)
            .ok_or_else(|| PyValueError::new_err(format!("unknown space \"{space}\"")))?;
        let f = self.auditor().space_formula(space).map_err(value_err)?;
        Ok(export_smtlib(&Formula::and([f, Formula::point_in(b)])))
    }
}

/// Parses policy text and returns it in canonical form.
#[pyfunction]
fn normalize_policies(text: &str) -> PyResult<String> {
    core_parse(text).map(|ps| pretty_print(&ps)).map_err(value_err)
}

/// Names of the policies in `text`, in order.
#[pyfunction]
fn parse_policy_names(text: &str) -> PyResult<Vec<String>> {
    Ok(core_parse(text).map_err(value_err)?.into_iter().map(|p| p.name).collect())
}

/// Writes the example house and a camera tour into `out_dir`; returns the
/// number of frames.
#[pyfunction]
#[pyo3(signature = (out_dir, seed = 1))]
fn write_house(out_dir: PathBuf, seed: u64) -> PyResult<usize> {
    let d = generate_house(seed);
    d.write_to(&out_dir).map_err(|e| PyOSError::new_err(e.to_string()))?;
    Ok(d.frames.len())
}

/// `(name, passed)` for each built-in scenario.
#[pyfunction]
fn scenarios() -> Vec<(String, bool)> {
    run_scenarios().into_iter().map(|r| (r.name.to_string(), r.passed)).collect()
}

#[pymodule]
fn vmac(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpaceRegistry>()?;
    m.add_class::<PyEngine>()?;
    m.add_class::<PyDecision>()?;
    m.add_function(wrap_pyfunction!(normalize_policies, m)?)?;
    m.add_function(wrap_pyfunction!(parse_policy_names, m)?)?;
    m.add_function(wrap_pyfunction!(write_house, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add("HOUSE_POLICIES", HOUSE_POLICIES)?;
    Ok(())
}
