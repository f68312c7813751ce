//! Python bindings for `loopinv`.
//!
//! Rationals cross the boundary as strings such as `"3/4"`; initial states
//! are given either as `"x=0,y=1/2"` or as a dict whose values are ints,
//! strings or `fractions.Fraction`.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use loopinv::poly::format_rational;
use loopinv::report::{render_annotated, render_text, to_json, Extras};
use loopinv::{Config, Elevation, State};

create_exception!(pyloopinv, LoopinvError, PyValueError);

fn err(e: loopinv::Error) -> PyErr {
    LoopinvError::new_err((e.to_string(), e.exit_code()))
}

fn state_from(obj: &Bound<'_, PyAny>) -> PyResult<State> {
    if let Ok(text) = obj.extract::<String>() {
        return State::parse(&text).map_err(err);
    }
    let dict = obj.cast::<PyDict>()?;
    let parts = dict
        .iter()
        .map(|(k, v)| Ok(format!("{}={}", k.str()?, v.str()?)))
        .collect::<PyResult<Vec<String>>>()?;
    State::parse(&parts.join(",")).map_err(err)
}

fn config(degree: u32, init: Option<&Bound<'_, PyAny>>, elevate: Option<u32>) -> PyResult<Config> {
    let mut cfg = Config::new(degree);
    cfg.init = init.map(state_from).transpose()?;
    cfg.elevation = match elevate {
        None => Elevation::Off,
        Some(0) => Elevation::Auto,
        Some(e) => Elevation::UpTo(e),
    };
    Ok(cfg)
}

/// Basis names and one matrix of rational strings per body.
type Linearized = (Vec<String>, Vec<Vec<Vec<String>>>);

/// A parsed loop program.
#[pyclass(module = "pyloopinv", frozen)]
struct Program {
    inner: loopinv::Program,
    source: String,
}

#[pymethods]
impl Program {
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        Ok(Program {
            inner: loopinv::parse(source).map_err(err)?,
            source: source.to_string(),
        })
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.inner.variables.clone()
    }

    /// Each loop body as one simultaneous assignment, components rendered.
    fn bodies(&self) -> Vec<Vec<String>> {
        self.inner
            .loop_bodies()
            .iter()
            .map(|g| g.components().iter().map(|p| p.render(&self.inner.variables)).collect())
            .collect()
    }

    fn pretty(&self) -> String {
        loopinv::pretty_print(&self.inner)
    }

    /// Executes the loop; `choices[t]` selects the body of iteration `t`.
    #[pyo3(signature = (init, choices))]
    fn run(&self, init: &Bound<'_, PyAny>, choices: Vec<usize>) -> PyResult<Vec<Vec<String>>> {
        let trace = loopinv::run(&self.inner, &state_from(init)?, choices.len(), &choices).map_err(err)?;
        Ok(trace
            .values
            .iter()
            .map(|s| s.iter().map(format_rational).collect())
            .collect())
    }

    /// Linearized transition of each body: `(basis, matrices)`.
    #[pyo3(signature = (degree = 2))]
    fn linearize(&self, degree: u32) -> PyResult<Linearized> {
        let vars = &self.inner.variables;
        let loops = loopinv::linearize_bodies(&self.inner.loop_bodies(), degree, vars).map_err(err)?;
        let basis = loops
            .first()
            .map(|l| l.basis.iter().map(|m| m.render(vars)).collect())
            .unwrap_or_default();
        let matrices = loops
            .iter()
            .map(|l| {
                l.matrix
                    .to_rows()
                    .iter()
                    .map(|r| r.iter().map(format_rational).collect())
                    .collect()
            })
            .collect();
        Ok((basis, matrices))
    }

    /// Semi-invariants as `(eigenvalue label, rendered form)` pairs.
    #[pyo3(signature = (degree = 2))]
    fn semi_invariants(&self, degree: u32) -> PyResult<Vec<(String, String)>> {
        let a = loopinv::analyze(&self.inner, &Config::new(degree)).map_err(err)?;
        Ok(a.invariants
            .iter()
            .map(|i| (i.eigenvalue_label(), i.rendered.clone()))
            .collect())
    }

    /// Runs the full analysis and renders it as `json`, `text` or
    /// `annotated`.
    #[pyo3(signature = (degree = 2, init = None, elevate = None, format = "json"))]
    fn analyze(
        &self,
        degree: u32,
        init: Option<&Bound<'_, PyAny>>,
        elevate: Option<u32>,
        format: &str,
    ) -> PyResult<String> {
        let a = loopinv::analyze(&self.inner, &config(degree, init, elevate)?).map_err(err)?;
        match format {
            "json" => Ok(serde_json::to_string_pretty(&to_json(&a, "-", Extras::default())).unwrap()),
            "text" => Ok(render_text(&a, "-", Extras::default())),
            "annotated" => {
                let (_, info) = loopinv::frontend::parse_with_info(&self.source).map_err(err)?;
                Ok(render_annotated(&a, &self.source, info.loop_line))
            }
            other => Err(PyValueError::new_err(format!("unknown format `{other}`"))),
        }
    }

    fn __repr__(&self) -> String {
        format!("Program(variables={:?})", self.inner.variables)
    }
}

/// Analyzes `source` and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (source, degree = 2, init = None, elevate = None))]
fn analyze(source: &str, degree: u32, init: Option<&Bound<'_, PyAny>>, elevate: Option<u32>) -> PyResult<String> {
    Program::new(source)?.analyze(degree, init, elevate, "json")
}

#[pymodule]
fn pyloopinv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Program>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add("LoopinvError", m.py().get_type::<LoopinvError>())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pyo3::types::PyString;

    #[test]
    fn states_from_strings_and_dicts() {
        Python::initialize();
        Python::attach(|py| {
            let s = state_from(PyString::new(py, "x=1/2,y=3").as_any()).unwrap();
            assert_eq!(s.to_string(), "x=1/2,y=3");
            let d = PyDict::new(py);
            d.set_item("x", 2).unwrap();
            d.set_item("y", "-1/3").unwrap();
            assert_eq!(state_from(d.as_any()).unwrap().to_string(), "x=2,y=-1/3");
            assert!(state_from(PyString::new(py, "x").as_any()).is_err());
        });
    }

    #[test]
    fn program_methods() {
        Python::initialize();
        let p = Program::new("while (*) do (x,y) := (x + y*y, y + 1) done").unwrap();
        assert_eq!(p.bodies(), [["x + y^2", "y + 1"]]);
        let forms = p.semi_invariants(3).unwrap();
        assert!(forms.iter().any(|(l, f)| l == "1" && f == "6*x - y + 3*y^2 - 2*y^3 = k"));
        assert!(p.analyze(3, None, None, "xml").is_err());
    }
}
