//! Semi-invariants as eigenvectors of the dual transition, intersection
//! across loop bodies, parameter reduction and instantiation.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactla::{dot, eigenspaces, intersect_spans, normalize, VecBasis, Vector};
use crate::linearize::LinearLoop;
use crate::poly::{format_rational, Monomial, Polynomial, Rational};

pub const DEFAULT_MAX_COMBOS: usize = 10_000;

/// A space of linear forms `φ` with `φᵀ A_b = λ_b φᵀ` for every body `b`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InvariantSpan {
    /// One eigenvalue per body.
    pub eigenvalues: Vec<Rational>,
    /// Canonical basis (normalized reduced echelon rows).
    pub basis: VecBasis,
    /// Whether the constant form `e_1` lies in the span.
    pub has_unit: bool,
}

impl InvariantSpan {
    fn new(eigenvalues: Vec<Rational>, vectors: &[Vector], dim: usize) -> Self {
        let basis = VecBasis::spanning(vectors, dim);
        let has_unit = basis
            .vectors()
            .iter()
            .any(|v| v[dim - 1].is_one() && v[..dim - 1].iter().all(Zero::is_zero));
        InvariantSpan {
            eigenvalues,
            basis,
            has_unit,
        }
    }

    /// Eigenvalue shared by all bodies, if they agree.
    pub fn common_eigenvalue(&self) -> Option<&Rational> {
        let first = self.eigenvalues.first()?;
        self.eigenvalues.iter().all(|l| l == first).then_some(first)
    }

    pub fn eigenvalue_label(&self) -> String {
        match self.common_eigenvalue() {
            Some(l) => format_rational(l),
            None => self
                .eigenvalues
                .iter()
                .map(format_rational)
                .collect::<Vec<_>>()
                .join(","),
        }
    }

    /// The basis with `e_1` split off: every remaining vector has a zero
    /// constant coordinate.
    pub fn directions(&self) -> Vec<Vector> {
        let dim = self.basis.vectors().first().map_or(0, Vec::len);
        self.basis
            .vectors()
            .iter()
            .filter(|v| !(self.has_unit && v[..dim - 1].iter().all(Zero::is_zero)))
            .cloned()
            .collect()
    }
}

/// A union of spans over a shared monomial basis.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InvariantFamily {
    pub basis: Vec<Monomial>,
    pub spans: Vec<InvariantSpan>,
    /// Set when the combination cap cut the intersection short.
    pub truncated: bool,
}

impl InvariantFamily {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn span_for(&self, eigenvalues: &[Rational]) -> Option<&InvariantSpan> {
        self.spans.iter().find(|s| s.eigenvalues == eigenvalues)
    }

    pub fn polynomial(&self, v: &[Rational]) -> Polynomial {
        let n = self.basis[0].nvars();
        Polynomial::from_terms(
            n,
            self.basis
                .iter()
                .zip(v)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Every span vector satisfies `φᵀ A_b = λ_b φᵀ` exactly.
    pub fn is_sound_for(&self, loops: &[LinearLoop]) -> bool {
        self.spans.iter().all(|s| {
            s.eigenvalues.len() == loops.len()
                && s.basis.vectors().iter().all(|phi| {
                    loops.iter().zip(&s.eigenvalues).all(|(l, lambda)| {
                        let lhs = l.matrix.vec_mul(phi);
                        lhs.iter().zip(phi).all(|(a, p)| *a == lambda * p)
                    })
                })
        })
    }
}

/// Rational eigenspaces of the dual of a single loop body.
pub fn semi_invariants(l: &LinearLoop) -> InvariantFamily {
    let dim = l.dim();
    let spectrum = eigenspaces(&l.matrix.transpose());
    let spans = spectrum
        .eigenspaces
        .into_iter()
        .map(|e| InvariantSpan::new(vec![e.eigenvalue], e.basis.vectors(), dim))
        .collect();
    InvariantFamily {
        basis: l.basis.clone(),
        spans,
        truncated: false,
    }
}

/// Forms that are semi-invariant for every body: for each choice of one
/// span per family, the intersection of the chosen spans.
pub fn intersect(families: &[InvariantFamily], max_combos: usize) -> Result<InvariantFamily> {
    let Some(first) = families.first() else {
        return Err(Error::InvalidArgument("no families to intersect".into()));
    };
    if families.iter().any(|f| f.basis != first.basis) {
        return Err(Error::BasisMismatch);
    }
    let dim = first.dim();
    let mut current: Vec<InvariantSpan> = first.spans.clone();
    let mut truncated = families.iter().any(|f| f.truncated);
    let mut combos = 0usize;
    'outer: for fam in &families[1..] {
        let mut next = Vec::new();
        for a in &current {
            for b in &fam.spans {
                if combos >= max_combos {
                    truncated = true;
                    current = next;
                    break 'outer;
                }
                combos += 1;
                let meet = intersect_spans(a.basis.vectors(), b.basis.vectors(), dim);
                if meet.is_empty() {
                    continue;
                }
                let mut eigenvalues = a.eigenvalues.clone();
                eigenvalues.extend(b.eigenvalues.iter().cloned());
                next.push(InvariantSpan::new(eigenvalues, meet.vectors(), dim));
            }
        }
        current = next;
    }
    if truncated && current.first().map(|s| s.eigenvalues.len()) != Some(families.len()) {
        current.retain(|s| s.eigenvalues.len() == families.len());
    }
    current.sort_by(|a, b| a.eigenvalues.cmp(&b.eigenvalues));
    current.dedup_by(|a, b| a.basis == b.basis);
    Ok(InvariantFamily {
        basis: first.basis.clone(),
        spans: current,
        truncated,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FormKind {
    /// `ψ(X) = k`, from a span containing the constant form.
    Level,
    /// `Σ kᵢ ψᵢ(X) = 0`, kept fully parametrized.
    Homogeneous,
}

/// A parametrized semi-invariant ready for display.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymbolicInvariant {
    pub eigenvalues: Vec<Rational>,
    pub kind: FormKind,
    /// The directions, as polynomials over the program variables.
    pub terms: Vec<Polynomial>,
    pub parameters: Vec<String>,
    pub rendered: String,
}

impl SymbolicInvariant {
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.terms.iter().flat_map(Polynomial::support).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// `k`, unless a program variable would be shadowed by it or its indexed
/// forms.
fn parameter_base(vars: &[String]) -> String {
    let clashes = |base: &str| {
        vars.iter().any(|v| {
            v.strip_prefix(base)
                .is_some_and(|rest| rest.chars().all(|c| c.is_ascii_digit()))
        })
    };
    ["k", "K", "c", "C"]
        .into_iter()
        .find(|b| !clashes(b))
        .map_or_else(|| "k_".to_string(), str::to_string)
}

fn parameter_names(base: &str, count: usize) -> Vec<String> {
    if count == 1 {
        vec![base.to_string()]
    } else {
        (1..=count).map(|i| format!("{base}{i}")).collect()
    }
}

fn render_homogeneous(terms: &[Polynomial], params: &[String], vars: &[String]) -> String {
    let parts: Vec<String> = terms
        .iter()
        .zip(params)
        .map(|(t, k)| {
            let body = t.render(vars);
            if t.num_terms() == 1 && !body.starts_with('-') && !body.contains(['*', '/']) {
                format!("{k}*{body}")
            } else {
                format!("{k}*({body})")
            }
        })
        .collect();
    format!("{} = 0", parts.join(" + "))
}

/// Parameter reduction: spans containing `e_1` yield one `ψ = k` form per
/// remaining direction; other spans stay fully parametrized. A span that is
/// only `e_1` says `1 = 1` and is dropped.
pub fn reduce_parameters(fam: &InvariantFamily, vars: &[String]) -> Vec<SymbolicInvariant> {
    let base = parameter_base(vars);
    let mut out = Vec::new();
    for span in &fam.spans {
        let dirs = span.directions();
        if span.has_unit {
            for d in dirs {
                let term = fam.polynomial(&d);
                let rendered = format!("{} = {base}", term.render(vars));
                out.push(SymbolicInvariant {
                    eigenvalues: span.eigenvalues.clone(),
                    kind: FormKind::Level,
                    terms: vec![term],
                    parameters: vec![base.clone()],
                    rendered,
                });
            }
        } else if !dirs.is_empty() {
            let terms: Vec<Polynomial> = dirs.iter().map(|d| fam.polynomial(d)).collect();
            let params = parameter_names(&base, terms.len());
            let rendered = render_homogeneous(&terms, &params, vars);
            out.push(SymbolicInvariant {
                eigenvalues: span.eigenvalues.clone(),
                kind: FormKind::Homogeneous,
                terms,
                parameters: params,
                rendered,
            });
        }
    }
    out
}

/// `lhs(X) = rhs`, valid along every run from the instantiating state.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConcreteInvariant {
    pub lhs: Polynomial,
    pub rhs: Rational,
    pub eigenvalues: Vec<Rational>,
    /// Loop bodies this invariant was derived for.
    pub bodies: Vec<usize>,
}

impl ConcreteInvariant {
    pub fn render(&self, vars: &[String]) -> String {
        format!("{} = {}", self.lhs.render(vars), format_rational(&self.rhs))
    }

    pub fn holds_at(&self, state: &[Rational]) -> bool {
        self.lhs.eval(state) == self.rhs
    }
}

/// Fixes the parameters from an initial state (given in program variable
/// order). Every form in a span that vanishes at `init` is covered.
pub fn instantiate(fam: &InvariantFamily, init: &[Rational]) -> Vec<ConcreteInvariant> {
    let values: Vector = fam.basis.iter().map(|m| m.eval(init)).collect();
    let dim = fam.dim();
    let unit = dim - 1;
    let mut out = Vec::new();
    for span in &fam.spans {
        let bodies: Vec<usize> = (0..span.eigenvalues.len()).collect();
        let mut push = |v: &[Rational], rhs: Rational| {
            out.push(ConcreteInvariant {
                lhs: fam.polynomial(v),
                rhs,
                eigenvalues: span.eigenvalues.clone(),
                bodies: bodies.clone(),
            })
        };
        let dirs = span.directions();
        if span.has_unit {
            for d in &dirs {
                push(d, dot(d, &values));
            }
            continue;
        }
        let at_init: Vec<Rational> = dirs.iter().map(|d| dot(d, &values)).collect();
        let pivot = at_init.iter().position(|c| !c.is_zero());
        for (i, d) in dirs.iter().enumerate() {
            match pivot {
                Some(j) if i == j => {}
                Some(j) if !at_init[i].is_zero() => {
                    // <e_i, X> * <e_j, X0> - <e_j, X> * <e_i, X0> = 0
                    let combo: Vector = d
                        .iter()
                        .zip(&dirs[j])
                        .map(|(a, b)| a * &at_init[j] - b * &at_init[i])
                        .collect();
                    push(&normalize(&combo), Rational::zero());
                }
                _ => {
                    debug_assert!(d[unit].is_zero() || !span.has_unit);
                    push(d, Rational::zero());
                }
            }
        }
    }
    out
}

/// True when every variable in the support is left unchanged by every body.
pub fn is_evident(support: &[usize], modified: &[bool]) -> bool {
    support.iter().all(|&v| !modified[v])
}

/// Splits invariants into `(interesting, evident)`.
pub fn filter_trivial(
    invs: Vec<ConcreteInvariant>,
    modified: &[bool],
) -> (Vec<ConcreteInvariant>, Vec<ConcreteInvariant>) {
    invs.into_iter()
        .partition(|inv| !is_evident(&inv.lhs.support(), modified))
}
