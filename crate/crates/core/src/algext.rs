//! Irrational eigenvalues: detection of characteristic-polynomial factors
//! without rational roots, and recovery of rational invariants that live on
//! products of their eigenvectors by elevating the linearized loop.

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::Result;
use crate::exactla::{char_poly_factors, deflate, UniPoly};
use crate::invgen::{intersect, semi_invariants, InvariantFamily};
use crate::linearize::{elevate_loop, LinearLoop};
use crate::poly::{format_rational, Rational};

pub const DEFAULT_SIZE_CAP: usize = 500;

/// A factor of the characteristic polynomial of one body with no rational
/// root.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ResidualFactor {
    pub body: usize,
    /// Monic.
    pub factor: UniPoly,
    /// Product of its complex roots, `(-1)^m c0 / cm`.
    pub root_product: Rational,
}

impl ResidualFactor {
    pub fn degree(&self) -> usize {
        self.factor.degree()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "body": self.body,
            "factor": self.factor.render("lambda"),
            "degree": self.degree(),
            "root_product": format_rational(&self.root_product),
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ResidualSpectrum {
    pub factors: Vec<ResidualFactor>,
}

impl ResidualSpectrum {
    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.factors.iter().map(ResidualFactor::degree).min()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.factors.iter().map(ResidualFactor::to_json).collect())
    }
}

fn root_product(f: &UniPoly) -> Rational {
    let m = f.degree();
    let p = f.coeff(0) / f.lead();
    if m.is_multiple_of(2) {
        p
    } else {
        -p
    }
}

/// Residual factors of the characteristic polynomial of each body.
pub fn detect_irrational(loops: &[LinearLoop]) -> ResidualSpectrum {
    let mut factors = Vec::new();
    for (body, l) in loops.iter().enumerate() {
        for block in char_poly_factors(&l.matrix) {
            if block.degree() <= 1 {
                continue;
            }
            let (_, rest) = deflate(&block);
            for factor in split_residual(&rest) {
                let root_product = root_product(&factor);
                let entry = ResidualFactor {
                    body,
                    factor,
                    root_product,
                };
                if !factors.contains(&entry) {
                    factors.push(entry);
                }
            }
        }
    }
    factors.sort_by_key(|f| (f.body, f.degree()));
    ResidualSpectrum { factors }
}

/// Splits a root-free polynomial into its squarefree parts.
fn split_residual(p: &UniPoly) -> Vec<UniPoly> {
    if p.degree() == 0 {
        return Vec::new();
    }
    p.squarefree_decomposition()
        .into_iter()
        .filter(|(f, _)| f.degree() > 0)
        .map(|(f, _)| f.monic())
        .collect()
}

/// Invariants of the loops elevated to degree `e`: rational combinations of
/// products of up to `e` linearized coordinates. Fails with `SizeLimit`
/// when the elevated basis exceeds `cap`.
pub fn elevated_invariants(
    loops: &[LinearLoop],
    e: u32,
    cap: usize,
    max_combos: usize,
) -> Result<(Vec<LinearLoop>, InvariantFamily)> {
    let elevated = loops
        .iter()
        .map(|l| elevate_loop(l, e, cap))
        .collect::<Result<Vec<_>>>()?;
    let families: Vec<InvariantFamily> = elevated.iter().map(semi_invariants).collect();
    let family = intersect(&families, max_combos)?;
    Ok((elevated, family))
}

/// Elevation degrees worth trying for a residual spectrum: 2 first, then
/// the smallest residual factor degree.
pub fn escalation_degrees(residual: &ResidualSpectrum) -> Vec<u32> {
    let mut out = vec![2];
    if let Some(m) = residual.min_degree() {
        let m = m as u32;
        if m > 2 {
            out.push(m);
        }
    }
    out
}

/// Whether a residual factor's roots multiply to a rational number of
/// modulus one (a sign of conserved products).
pub fn has_unit_product(f: &ResidualFactor) -> bool {
    let p = &f.root_product;
    p.is_one() || (-p).is_one() || p.is_zero()
}
