//! The end-to-end analysis: parse result in, invariants and diagnostics out,
//! rendered as text, JSON or annotated source.

use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::algext::{
    detect_irrational, elevated_invariants, escalation_degrees, ResidualSpectrum,
    DEFAULT_SIZE_CAP,
};
use crate::error::{Error, Result};
use crate::frontend::{modified_variables, Program, State};
use crate::invgen::{
    filter_trivial, instantiate, intersect, is_evident, reduce_parameters, semi_invariants,
    InvariantFamily, DEFAULT_MAX_COMBOS,
};
use crate::linearize::{linearize_bodies, LinearLoop};
use crate::poly::{format_rational, Monomial, Polynomial, Rational};
use crate::solvability::{check_solvable, SolvablePartition};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Elevation {
    Off,
    /// Escalate through the default schedule.
    Auto,
    /// Escalate, but never past this degree.
    UpTo(u32),
}

#[derive(Clone, Debug)]
pub struct Config {
    pub degree: u32,
    pub init: Option<State>,
    pub elevation: Elevation,
    pub max_combos: usize,
    pub size_cap: usize,
    pub timing: bool,
}

impl Config {
    pub fn new(degree: u32) -> Self {
        Config {
            degree,
            ..Config::default()
        }
    }
}

impl Default for Config {
    fn default() -> Self {
        Config {
            degree: 2,
            init: None,
            elevation: Elevation::Off,
            max_combos: DEFAULT_MAX_COMBOS,
            size_cap: DEFAULT_SIZE_CAP,
            timing: false,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    SemiInvariant,
    Invariant,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::SemiInvariant => "semi-invariant",
            Status::Invariant => "invariant",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InvariantEntry {
    pub eigenvalues: Vec<Rational>,
    /// `(parameter, polynomial)` components; instantiated equations have a
    /// single component without parameter.
    pub form: Vec<(Option<String>, Polynomial)>,
    pub rendered: String,
    pub status: Status,
    pub parameters: Vec<String>,
    pub evident: bool,
    pub rhs: Option<Rational>,
    /// Elevation degree the entry was found at, if any.
    pub elevation: Option<u32>,
}

impl InvariantEntry {
    pub fn eigenvalue_label(&self) -> String {
        match self.eigenvalues.first() {
            Some(first) if self.eigenvalues.iter().all(|l| l == first) => format_rational(first),
            _ => self
                .eigenvalues
                .iter()
                .map(format_rational)
                .collect::<Vec<_>>()
                .join(","),
        }
    }

    fn to_json(&self, vars: &[String]) -> Value {
        let form: Vec<Value> = self
            .form
            .iter()
            .map(|(k, p)| json!({"parameter": k, "terms": p.to_json(vars)}))
            .collect();
        json!({
            "eigenvalue": self.eigenvalue_label(),
            "eigenvalues": self.eigenvalues.iter().map(format_rational).collect::<Vec<_>>(),
            "form": form,
            "rendered": self.rendered,
            "status": self.status.as_str(),
            "parameters": self.parameters,
            "evident": self.evident,
            "rhs": self.rhs.as_ref().map(format_rational),
            "elevation": self.elevation,
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Timings {
    pub linearize: Duration,
    pub invariants: Duration,
    pub total: Duration,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub variables: Vec<String>,
    pub degree: u32,
    pub bodies: Vec<crate::poly::PolyMap>,
    pub partitions: Vec<SolvablePartition>,
    pub loops: Vec<LinearLoop>,
    pub family: InvariantFamily,
    pub elevated: Vec<(u32, LinearLoopSet, InvariantFamily)>,
    pub invariants: Vec<InvariantEntry>,
    pub residual: ResidualSpectrum,
    pub diagnostics: Vec<String>,
    pub timings: Option<Timings>,
}

pub type LinearLoopSet = Vec<LinearLoop>;

impl Analysis {
    pub fn basis(&self) -> &[Monomial] {
        &self.family.basis
    }

    /// Every family the invariants were read from, base first.
    pub fn families(&self) -> Vec<&InvariantFamily> {
        std::iter::once(&self.family)
            .chain(self.elevated.iter().map(|(_, _, f)| f))
            .collect()
    }

    pub fn interesting(&self) -> impl Iterator<Item = &InvariantEntry> {
        self.invariants.iter().filter(|i| !i.evident)
    }
}

fn entries(
    fam: &InvariantFamily,
    vars: &[String],
    init: Option<&[Rational]>,
    modified: &[bool],
    elevation: Option<u32>,
) -> Vec<InvariantEntry> {
    match init {
        Some(init) => {
            let (interesting, evident) = filter_trivial(instantiate(fam, init), modified);
            interesting
                .into_iter()
                .map(|i| (i, false))
                .chain(evident.into_iter().map(|i| (i, true)))
                .map(|(inv, evident)| InvariantEntry {
                    rendered: inv.render(vars),
                    eigenvalues: inv.eigenvalues,
                    form: vec![(None, inv.lhs)],
                    status: Status::Invariant,
                    parameters: Vec::new(),
                    evident,
                    rhs: Some(inv.rhs),
                    elevation,
                })
                .collect()
        }
        None => {
            let mut out: Vec<InvariantEntry> = reduce_parameters(fam, vars)
                .into_iter()
                .map(|s| InvariantEntry {
                    evident: is_evident(&s.support(), modified),
                    form: s
                        .parameters
                        .iter()
                        .cloned()
                        .map(Some)
                        .zip(s.terms)
                        .collect(),
                    rendered: s.rendered,
                    eigenvalues: s.eigenvalues,
                    status: Status::SemiInvariant,
                    parameters: s.parameters,
                    rhs: None,
                    elevation,
                })
                .collect();
            out.sort_by_key(|e| e.evident);
            out
        }
    }
}

/// Runs the pipeline on a parsed program: solvability gate, joint
/// linearization, eigenspaces, intersection, then reduction or
/// instantiation and the evident-invariant filter.
pub fn analyze(p: &Program, cfg: &Config) -> Result<Analysis> {
    if cfg.degree == 0 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    let start = Instant::now();
    let vars = &p.variables;
    let init = cfg
        .init
        .as_ref()
        .map(|s| s.to_vector(vars))
        .transpose()?;
    let bodies = p.loop_bodies();
    let partitions = bodies
        .iter()
        .map(|g| check_solvable(g, vars))
        .collect::<Result<Vec<_>>>()?;
    let loops = linearize_bodies(&bodies, cfg.degree, vars)?;
    let linearized = start.elapsed();

    let families: Vec<InvariantFamily> = loops.iter().map(semi_invariants).collect();
    let family = intersect(&families, cfg.max_combos)?;
    let residual = detect_irrational(&loops);
    let modified = modified_variables(p);
    let mut diagnostics = Vec::new();
    if family.truncated {
        diagnostics.push(format!(
            "eigenvalue combinations truncated at {}",
            cfg.max_combos
        ));
    }
    let mut invariants = entries(&family, vars, init.as_deref(), &modified, None);

    let mut elevated = Vec::new();
    if cfg.elevation != Elevation::Off && !residual.is_empty() {
        let limit = match cfg.elevation {
            Elevation::UpTo(e) => e,
            _ => u32::MAX,
        };
        for e in escalation_degrees(&residual).into_iter().filter(|&e| e <= limit) {
            match elevated_invariants(&loops, e, cfg.size_cap, cfg.max_combos) {
                Ok((lifted, fam)) => {
                    let fresh: Vec<InvariantEntry> =
                        entries(&fam, vars, init.as_deref(), &modified, Some(e))
                            .into_iter()
                            .filter(|n| invariants.iter().all(|o| o.rendered != n.rendered))
                            .collect();
                    let found = !fresh.is_empty();
                    invariants.extend(fresh);
                    if fam.truncated {
                        diagnostics.push(format!(
                            "eigenvalue combinations truncated at {} (elevation {e})",
                            cfg.max_combos
                        ));
                    }
                    elevated.push((e, lifted, fam));
                    if found {
                        break;
                    }
                }
                Err(err @ Error::SizeLimit { .. }) => {
                    diagnostics.push(format!("elevation {e} skipped: {err}"));
                    break;
                }
                Err(err) => return Err(err),
            }
        }
    }
    let total = start.elapsed();
    Ok(Analysis {
        variables: vars.clone(),
        degree: cfg.degree,
        bodies,
        partitions,
        loops,
        family,
        elevated,
        invariants,
        residual,
        diagnostics,
        timings: cfg.timing.then_some(Timings {
            linearize: linearized,
            invariants: total - linearized,
            total,
        }),
    })
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Extra sections requested on the command line.
#[derive(Clone, Copy, Debug, Default)]
pub struct Extras {
    pub solvability: bool,
    pub linearized: bool,
}

fn render_matrix_rows(l: &LinearLoop, vars: &[String]) -> Vec<String> {
    l.basis
        .iter()
        .enumerate()
        .map(|(r, m)| {
            let row = l.polynomial(l.matrix.row(r));
            format!("{} -> {}", m.render(vars), row.render(vars))
        })
        .collect()
}

pub fn to_json(a: &Analysis, program: &str, extras: Extras) -> Value {
    let vars = &a.variables;
    let mut out = json!({
        "program": program,
        "degree": a.degree,
        "basis": a.basis().iter().map(|m| m.render(vars)).collect::<Vec<_>>(),
        "invariants": a.invariants.iter().map(|i| i.to_json(vars)).collect::<Vec<_>>(),
        "residual_spectrum": a.residual.to_json(),
        "diagnostics": a.diagnostics,
        "timings": a.timings.map(|t| json!({
            "linearize_ms": millis(t.linearize),
            "invariants_ms": millis(t.invariants),
            "total_ms": millis(t.total),
        })),
    });
    if extras.solvability {
        out["solvability"] = json!(a
            .partitions
            .iter()
            .map(|p| p.render(vars))
            .collect::<Vec<_>>());
    }
    if extras.linearized {
        out["linearized"] = json!(a
            .loops
            .iter()
            .map(|l| render_matrix_rows(l, vars))
            .collect::<Vec<_>>());
    }
    out
}

pub fn render_text(a: &Analysis, program: &str, extras: Extras) -> String {
    let vars = &a.variables;
    let mut out = String::new();
    out.push_str(&format!("program: {program}\n"));
    out.push_str(&format!("variables: {}\n", vars.join(", ")));
    out.push_str(&format!("degree: {}\n", a.degree));
    let basis: Vec<String> = a.basis().iter().map(|m| m.render(vars)).collect();
    out.push_str(&format!("basis ({}): {}\n", basis.len(), basis.join(", ")));
    if extras.solvability {
        for (i, p) in a.partitions.iter().enumerate() {
            out.push_str(&format!("solvable body {}: {}\n", i + 1, p.render(vars)));
        }
    }
    if extras.linearized {
        for (i, l) in a.loops.iter().enumerate() {
            out.push_str(&format!("linearized body {}:\n", i + 1));
            for row in render_matrix_rows(l, vars) {
                out.push_str(&format!("  {row}\n"));
            }
        }
    }
    out.push_str("invariants:\n");
    if a.invariants.is_empty() {
        out.push_str("  (none)\n");
    }
    for inv in &a.invariants {
        let mut line = format!("  [λ={}] {}", inv.eigenvalue_label(), inv.rendered);
        if let Some(e) = inv.elevation {
            line.push_str(&format!("  (elevation {e})"));
        }
        if inv.evident {
            line.push_str("  (evident)");
        }
        out.push_str(&line);
        out.push('\n');
    }
    if !a.residual.is_empty() {
        out.push_str("residual spectrum:\n");
        for f in &a.residual.factors {
            out.push_str(&format!(
                "  body {}: {} (root product {})\n",
                f.body + 1,
                f.factor,
                format_rational(&f.root_product)
            ));
        }
    }
    for d in &a.diagnostics {
        out.push_str(&format!("note: {d}\n"));
    }
    if let Some(t) = a.timings {
        out.push_str(&format!(
            "time: {:.3} ms (linearize {:.3} ms, invariants {:.3} ms)\n",
            millis(t.total),
            millis(t.linearize),
            millis(t.invariants)
        ));
    }
    out
}

/// The source with `# invariant ...` comments inserted before the analyzed
/// loop (or at the top when there is none).
pub fn render_annotated(a: &Analysis, source: &str, loop_line: Option<usize>) -> String {
    let lines: Vec<&str> = source.lines().collect();
    let at = loop_line.map_or(0, |l| l.saturating_sub(1)).min(lines.len());
    let indent: String = lines
        .get(at)
        .map(|l| l.chars().take_while(|c| c.is_whitespace()).collect())
        .unwrap_or_default();
    let mut out = String::new();
    for line in &lines[..at] {
        out.push_str(line);
        out.push('\n');
    }
    for inv in &a.invariants {
        out.push_str(&format!("{indent}# invariant {}", inv.rendered));
        if inv.evident {
            out.push_str("  (evident)");
        }
        out.push('\n');
    }
    for line in &lines[at..] {
        out.push_str(line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, parse_with_info};
    use crate::poly::int;

    const EUCLI: &str = "x := x0;\ny := y0;\nq := 0;\nwhile (*) do\n  (x,q) := (x - y, q + 1)\ndone\n";

    #[test]
    fn eucli_div_annotated() {
        let src = "# Euclidean division\nwhile (*) do\n  (x,y,q) := (x - y, y, q + 1)\ndone\n";
        let (p, info) = parse_with_info(src).unwrap();
        let a = analyze(&p, &Config::new(2)).unwrap();
        let out = render_annotated(&a, src, info.loop_line);
        let expect = "# Euclidean division\n\
                      # invariant x + y*q = k\n\
                      # invariant y = k  (evident)\n\
                      # invariant y^2 = k  (evident)\n\
                      while (*) do\n  (x,y,q) := (x - y, y, q + 1)\ndone\n";
        assert_eq!(out, expect);
    }

    #[test]
    fn identity_loop_all_evident() {
        let p = parse("(a,b,c) := (a,b,c)").unwrap();
        let a = analyze(&p, &Config::new(1)).unwrap();
        let r: Vec<(&str, bool)> = a
            .invariants
            .iter()
            .map(|i| (i.rendered.as_str(), i.evident))
            .collect();
        assert_eq!(r, [("a = k", true), ("b = k", true), ("c = k", true)]);
    }

    #[test]
    fn json_is_deterministic_and_shaped() {
        let p = parse("(x,y) := (x + y*y, y + 1)").unwrap();
        let mut cfg = Config::new(3);
        cfg.init = Some(State::parse("x=0,y=0").unwrap());
        let a = analyze(&p, &cfg).unwrap();
        let j = to_json(&a, "running", Extras::default());
        let again = to_json(&analyze(&p, &cfg).unwrap(), "running", Extras::default());
        assert_eq!(j.to_string(), again.to_string());
        assert_eq!(j["basis"], json!(["x", "y", "x*y", "y^2", "y^3", "1"]));
        assert_eq!(j["timings"], Value::Null);
        let inv = &j["invariants"][0];
        assert_eq!(inv["rendered"], "6*x - y + 3*y^2 - 2*y^3 = 0");
        assert_eq!(inv["status"], "invariant");
        assert_eq!(inv["eigenvalue"], "1");
        assert_eq!(inv["rhs"], "0");
    }

    #[test]
    fn init_must_bind_every_variable() {
        let p = parse(EUCLI).unwrap();
        let mut cfg = Config::new(2);
        cfg.init = Some(State::parse("x=1").unwrap());
        assert!(matches!(analyze(&p, &cfg), Err(Error::UnboundVariable(_))));
    }

    #[test]
    fn elevation_on_irrational() {
        let p = parse("(x,y) := (y, 2*x)").unwrap();
        let base = analyze(&p, &Config::new(1)).unwrap();
        assert!(base.invariants.is_empty());
        assert_eq!(base.residual.factors.len(), 1);
        let mut cfg = Config::new(1);
        cfg.elevation = Elevation::Auto;
        let a = analyze(&p, &cfg).unwrap();
        let r: Vec<&str> = a.invariants.iter().map(|i| i.rendered.as_str()).collect();
        assert_eq!(r, ["k*(2*x^2 - y^2) = 0", "k1*(2*x^2 + y^2) + k2*(x*y) = 0"]);
        assert!(a.invariants.iter().all(|i| i.elevation == Some(2)));
        cfg.init = Some(State::from_pairs([("x", int(1)), ("y", int(1))]));
        let a = analyze(&p, &cfg).unwrap();
        assert!(!a.invariants.is_empty());
    }

    #[test]
    fn elevation_size_limit_is_a_diagnostic() {
        let p = parse("(a,b,c,d) := (b, c, d, 2*a)").unwrap();
        let mut cfg = Config::new(1);
        cfg.elevation = Elevation::UpTo(4);
        cfg.size_cap = 5;
        let a = analyze(&p, &cfg).unwrap();
        assert_eq!(a.diagnostics.len(), 1);
        assert!(a.diagnostics[0].starts_with("elevation 2 skipped"));
    }
}
