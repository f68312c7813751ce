//! Linearization of solvable polynomial loops: every relevant monomial
//! becomes a coordinate and the loop body becomes a linear map on them.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactla::{RatMatrix, Vector};
use crate::poly::{compose, monomial_count, monomials_up_to, Monomial, PolyMap, Polynomial, Rational};
use crate::solvability::check_solvable;

/// A linear transition over an ordered monomial basis whose last element
/// is the constant monomial. Row `m` holds the image of `m`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearLoop {
    pub basis: Vec<Monomial>,
    pub matrix: RatMatrix,
}

impl LinearLoop {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn unit_index(&self) -> usize {
        self.basis.len() - 1
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.basis.iter().position(|b| b == m)
    }

    /// The polynomial encoded by a coefficient vector over the basis.
    pub fn polynomial(&self, coeffs: &[Rational]) -> Polynomial {
        let n = self.basis[0].nvars();
        Polynomial::from_terms(
            n,
            self.basis
                .iter()
                .zip(coeffs)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Coordinates of a polynomial, if it only uses basis monomials.
    pub fn coordinates(&self, p: &Polynomial) -> Option<Vector> {
        let mut v = vec![Rational::zero(); self.dim()];
        for (m, c) in p.terms() {
            v[self.index_of(m)?] = c.clone();
        }
        Some(v)
    }

    /// Values of the basis monomials at a concrete state.
    pub fn monomial_vector(&self, state: &[Rational]) -> Vector {
        self.basis.iter().map(|m| m.eval(state)).collect()
    }

    pub fn render_basis(&self, vars: &[String]) -> Vec<String> {
        self.basis.iter().map(|m| m.render(vars)).collect()
    }
}

/// Removal order for the relevance fixpoint; the result does not depend on
/// it (greatest fixpoint).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DiscardOrder {
    Ascending,
    Descending,
}

struct ImageCache<'a> {
    body: &'a PolyMap,
    memo: HashMap<Monomial, Polynomial>,
}

impl<'a> ImageCache<'a> {
    fn new(body: &'a PolyMap) -> Self {
        ImageCache {
            body,
            memo: HashMap::new(),
        }
    }

    /// `compose(m, body)` via `m = x_i * rest`.
    fn image(&mut self, m: &Monomial) -> Polynomial {
        if let Some(p) = self.memo.get(m) {
            return p.clone();
        }
        let p = match m.split_first() {
            None => Polynomial::one(m.nvars()),
            Some((i, rest)) => &self.image(&rest) * self.body.component(i),
        };
        self.memo.insert(m.clone(), p.clone());
        p
    }
}

/// Upper bound on the degree of `compose(m, body)` without expanding it.
fn image_degree_bound(m: &Monomial, degrees: &[u32]) -> u32 {
    m.exponents().iter().zip(degrees).map(|(e, d)| e * d).sum()
}

/// Greatest subset of `candidates` closed under every body's images.
/// `images[b][k]` is the image of `candidates[k]` under body `b`, or `None`
/// when its degree exceeds the bound.
pub fn relevance_fixpoint(
    candidates: &[Monomial],
    images: &[Vec<Option<Polynomial>>],
    order: DiscardOrder,
) -> Vec<bool> {
    let index: HashMap<&Monomial, usize> =
        candidates.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut keep: Vec<bool> = (0..candidates.len())
        .map(|k| images.iter().all(|imgs| imgs[k].is_some()))
        .collect();
    let visit: Vec<usize> = match order {
        DiscardOrder::Ascending => (0..candidates.len()).collect(),
        DiscardOrder::Descending => (0..candidates.len()).rev().collect(),
    };
    loop {
        let mut changed = false;
        for &k in &visit {
            if !keep[k] {
                continue;
            }
            let closed = images.iter().all(|imgs| {
                imgs[k]
                    .as_ref()
                    .expect("kept monomials have bounded images")
                    .terms()
                    .all(|(m, _)| index.get(m).is_some_and(|&j| keep[j]))
            });
            if !closed {
                keep[k] = false;
                changed = true;
            }
        }
        if !changed {
            return keep;
        }
    }
}

fn build_loop(
    candidates: &[Monomial],
    keep: &[bool],
    images: &[Polynomial],
) -> LinearLoop {
    let n = candidates[0].nvars();
    let mut basis: Vec<Monomial> = candidates
        .iter()
        .zip(keep)
        .filter(|(m, &k)| k && !m.is_one())
        .map(|(m, _)| m.clone())
        .collect();
    basis.push(Monomial::one(n));
    let col: HashMap<&Monomial, usize> = basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let cand_index: HashMap<&Monomial, usize> =
        candidates.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut matrix = RatMatrix::zeros(basis.len(), basis.len());
    for (r, m) in basis.iter().enumerate() {
        let img = &images[cand_index[m]];
        for (t, c) in img.terms() {
            matrix[(r, col[t])] = c.clone();
        }
    }
    LinearLoop { basis, matrix }
}

/// Jointly linearizes several bodies at degree `d` over one shared basis:
/// a monomial survives only if every body keeps it.
pub fn linearize_bodies(
    bodies: &[PolyMap],
    d: u32,
    vars: &[String],
) -> Result<Vec<LinearLoop>> {
    linearize_bodies_with(bodies, d, vars, DiscardOrder::Ascending)
}

pub fn linearize_bodies_with(
    bodies: &[PolyMap],
    d: u32,
    vars: &[String],
    order: DiscardOrder,
) -> Result<Vec<LinearLoop>> {
    assert!(!bodies.is_empty(), "a loop needs at least one body");
    for g in bodies {
        check_solvable(g, vars)?;
    }
    let n = bodies[0].nvars();
    if d == 0 {
        return Err(Error::DegreeTooSmall {
            degree: d,
            monomial: vars.first().cloned().unwrap_or_else(|| "1".into()),
        });
    }
    let candidates = monomials_up_to(n, d);
    let mut images: Vec<Vec<Option<Polynomial>>> = Vec::with_capacity(bodies.len());
    for g in bodies {
        let degrees: Vec<u32> = g.components().iter().map(Polynomial::degree).collect();
        let mut cache = ImageCache::new(g);
        let imgs = candidates
            .iter()
            .map(|m| {
                if image_degree_bound(m, &degrees) <= d {
                    return Some(cache.image(m));
                }
                let img = cache.image(m);
                (img.degree() <= d).then_some(img)
            })
            .collect();
        images.push(imgs);
    }
    let keep = relevance_fixpoint(&candidates, &images, order);
    if let Some(k) = (0..candidates.len()).find(|&k| candidates[k].degree() == 1 && !keep[k]) {
        return Err(Error::DegreeTooSmall {
            degree: d,
            monomial: candidates[k].render(vars),
        });
    }
    Ok(images
        .into_iter()
        .map(|imgs| {
            let imgs: Vec<Polynomial> = imgs
                .into_iter()
                .map(|p| p.unwrap_or_else(|| Polynomial::zero(n)))
                .collect();
            build_loop(&candidates, &keep, &imgs)
        })
        .collect())
}

/// Linearizes a single solvable body at degree `d`.
pub fn linearize(g: &PolyMap, d: u32, vars: &[String]) -> Result<LinearLoop> {
    Ok(linearize_bodies(std::slice::from_ref(g), d, vars)?.remove(0))
}

/// The homogenized affine map encoded by a square matrix whose last row is
/// the unit row: row `i < n` gives variable `i`, the last column the
/// constant.
pub fn affine_map_of(a: &RatMatrix) -> PolyMap {
    assert!(a.is_square() && a.rows() >= 1);
    let n = a.rows() - 1;
    PolyMap::new(
        (0..n)
            .map(|i| {
                let mut p = Polynomial::constant(n, a[(i, n)].clone());
                for j in 0..n {
                    p.add_term(Monomial::var(n, j), a[(i, j)].clone());
                }
                p
            })
            .collect(),
    )
}

/// Elevation `Ψ_d(A)` of a homogenized affine matrix: the induced linear
/// map on all monomials of degree at most `d`, over the basis of
/// [`monomials_up_to`] with the constant moved last.
pub fn elevate(a: &RatMatrix, d: u32) -> LinearLoop {
    let g = affine_map_of(a);
    let n = g.nvars();
    let candidates = monomials_up_to(n, d);
    let mut cache = ImageCache::new(&g);
    let images: Vec<Polynomial> = candidates.iter().map(|m| cache.image(m)).collect();
    build_loop(&candidates, &vec![true; candidates.len()], &images)
}

/// Elevation of a linearized loop: the new basis is every product of at
/// most `e` basis monomials, with coinciding products merged.
pub fn elevate_loop(l: &LinearLoop, e: u32, cap: usize) -> Result<LinearLoop> {
    let k = l.dim() - 1;
    let n = l.basis[0].nvars();
    let formal_count = monomial_count(k, e);
    if formal_count > cap.saturating_mul(64) {
        return Err(Error::SizeLimit {
            what: format!("degree-{e} elevation"),
            size: formal_count,
            cap,
        });
    }
    let g = affine_map_of(&l.matrix);
    let actual = |fm: &Monomial| -> Monomial {
        fm.exponents()
            .iter()
            .zip(&l.basis)
            .fold(Monomial::one(n), |acc, (&p, b)| {
                (0..p).fold(acc, |acc, _| acc.mul(b))
            })
    };
    let formal = monomials_up_to(k, e);
    let mut representative: Vec<(Monomial, Monomial)> = Vec::new();
    let mut seen = BTreeSet::new();
    for fm in &formal {
        let am = actual(fm);
        if seen.insert(am.clone()) {
            representative.push((am, fm.clone()));
        }
    }
    if representative.len() > cap {
        return Err(Error::SizeLimit {
            what: format!("degree-{e} elevation"),
            size: representative.len(),
            cap,
        });
    }
    representative.sort_by(|a, b| match (a.0.is_one(), b.0.is_one()) {
        (true, false) => std::cmp::Ordering::Greater,
        (false, true) => std::cmp::Ordering::Less,
        _ => a.0.cmp(&b.0),
    });
    let basis: Vec<Monomial> = representative.iter().map(|(a, _)| a.clone()).collect();
    let col: HashMap<&Monomial, usize> = basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut cache = ImageCache::new(&g);
    let mut matrix = RatMatrix::zeros(basis.len(), basis.len());
    for (r, (_, fm)) in representative.iter().enumerate() {
        for (t, c) in cache.image(fm).terms() {
            matrix[(r, col[&actual(t)])] += c;
        }
    }
    Ok(LinearLoop { basis, matrix })
}

/// Checks the transition identity `row(m) == compose(m, g)` for every
/// basis monomial, and closure of the basis.
pub fn is_sound_linearization(l: &LinearLoop, g: &PolyMap) -> bool {
    l.basis.iter().enumerate().all(|(r, m)| {
        let row: Vec<Rational> = l.matrix.row(r).to_vec();
        l.polynomial(&row) == compose(m, g)
    }) && l.basis.last().is_some_and(Monomial::is_one)
        && l.matrix.row(l.unit_index()).iter().enumerate().all(|(j, v)| {
            if j == l.unit_index() {
                v.is_one()
            } else {
                v.is_zero()
            }
        })
}
