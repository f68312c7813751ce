//! Exact rational linear algebra: characteristic polynomials, rational
//! spectra, kernels and subspace operations.

mod matrix;
mod unipoly;

pub use matrix::{normalize, RatMatrix, VecBasis, Vector};
pub use unipoly::{deflate, rational_roots, UniPoly};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::graph::strongly_connected_components;
use crate::poly::Rational;

pub fn transpose(a: &RatMatrix) -> RatMatrix {
    a.transpose()
}

pub fn kernel(a: &RatMatrix) -> VecBasis {
    a.kernel()
}

pub fn determinant(a: &RatMatrix) -> Rational {
    a.determinant()
}

/// `det(λI - A)` by the Faddeev-LeVerrier trace recursion.
pub fn char_poly_faddeev_leverrier(a: &RatMatrix) -> UniPoly {
    assert!(a.is_square(), "characteristic polynomial of a non-square matrix");
    let n = a.rows();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    // M_k = A M_{k-1} + c_{n-k+1} I,  c_{n-k} = -tr(A M_k) / k
    let mut m = RatMatrix::zeros(n, n);
    for k in 1..=n {
        let mut next = a.mul(&m);
        for i in 0..n {
            next[(i, i)] += &coeffs[n - k + 1];
        }
        m = next;
        let am = a.mul(&m);
        coeffs[n - k] = -am.trace() / Rational::from_integer(BigInt::from(k));
    }
    UniPoly::new(coeffs)
}

/// Diagonal blocks of `A` after a symmetric permutation to block upper
/// triangular form (the strongly connected components of its pattern).
pub fn triangular_blocks(a: &RatMatrix) -> Vec<Vec<usize>> {
    strongly_connected_components(&a.pattern())
}

/// Characteristic polynomial of each diagonal block; their product is
/// `det(λI - A)`.
pub fn char_poly_factors(a: &RatMatrix) -> Vec<UniPoly> {
    triangular_blocks(a)
        .iter()
        .map(|block| {
            if block.len() == 1 {
                UniPoly::linear(&a[(block[0], block[0])])
            } else {
                char_poly_faddeev_leverrier(&a.submatrix(block))
            }
        })
        .collect()
}

/// Monic `det(λI - A)`.
pub fn char_poly(a: &RatMatrix) -> UniPoly {
    assert!(a.is_square(), "characteristic polynomial of a non-square matrix");
    char_poly_factors(a)
        .iter()
        .fold(UniPoly::one(), |acc, f| acc.mul(f))
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Eigenspace {
    pub eigenvalue: Rational,
    pub basis: VecBasis,
    /// Algebraic multiplicity in the characteristic polynomial.
    pub multiplicity: usize,
}

/// Rational eigenspaces plus the factors of the characteristic polynomial
/// that have no rational root.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Spectrum {
    pub eigenspaces: Vec<Eigenspace>,
    pub residual: Vec<UniPoly>,
}

impl Spectrum {
    pub fn residual_degree(&self) -> usize {
        self.residual.iter().map(UniPoly::degree).sum()
    }

    pub fn eigenspace(&self, lambda: &Rational) -> Option<&Eigenspace> {
        self.eigenspaces.iter().find(|e| &e.eigenvalue == lambda)
    }
}

/// Rational eigenvalues with multiplicities, and the residual factors.
pub fn rational_spectrum(a: &RatMatrix) -> (Vec<(Rational, usize)>, Vec<UniPoly>) {
    let mut roots: Vec<(Rational, usize)> = Vec::new();
    let mut residual = Vec::new();
    for factor in char_poly_factors(a) {
        let (rs, rest) = if factor.degree() == 1 {
            (vec![(-factor.coeff(0) / factor.lead(), 1)], UniPoly::one())
        } else {
            deflate(&factor)
        };
        for (r, m) in rs {
            match roots.iter_mut().find(|(x, _)| *x == r) {
                Some(entry) => entry.1 += m,
                None => roots.push((r, m)),
            }
        }
        if rest.degree() > 0 {
            residual.push(rest);
        }
    }
    roots.sort();
    (roots, residual)
}

/// One eigenspace per rational root of the characteristic polynomial.
pub fn eigenspaces(a: &RatMatrix) -> Spectrum {
    let (roots, residual) = rational_spectrum(a);
    let eigenspaces = roots
        .into_iter()
        .map(|(lambda, multiplicity)| Eigenspace {
            basis: a.shift(&lambda).kernel(),
            eigenvalue: lambda,
            multiplicity,
        })
        .collect();
    Spectrum {
        eigenspaces,
        residual,
    }
}

// ---------------------------------------------------------------------------
// Subspaces given by spanning vectors

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn rank_of(vectors: &[Vector], dim: usize) -> usize {
    VecBasis::spanning(vectors, dim).len()
}

pub fn span_contains(basis: &[Vector], v: &[Rational]) -> bool {
    let dim = v.len();
    let mut with = basis.to_vec();
    with.push(v.to_vec());
    rank_of(&with, dim) == rank_of(basis, dim)
}

pub fn spans_equal(a: &[Vector], b: &[Vector], dim: usize) -> bool {
    VecBasis::spanning(a, dim) == VecBasis::spanning(b, dim)
}

/// `span(a) ∩ span(b)`: solve `a·s = b·t` and map the solutions through `a`.
pub fn intersect_spans(a: &[Vector], b: &[Vector], dim: usize) -> VecBasis {
    if a.is_empty() || b.is_empty() {
        return VecBasis::default();
    }
    let mut cols: Vec<Vector> = a.to_vec();
    cols.extend(b.iter().map(|v| v.iter().map(|x| -x.clone()).collect()));
    let system = RatMatrix::from_columns(&cols, dim);
    let sols = system.kernel();
    let vectors: Vec<Vector> = sols
        .vectors()
        .iter()
        .map(|s| {
            let mut phi = vec![Rational::zero(); dim];
            for (coef, v) in s[..a.len()].iter().zip(a) {
                if coef.is_zero() {
                    continue;
                }
                for (p, x) in phi.iter_mut().zip(v) {
                    *p += coef * x;
                }
            }
            phi
        })
        .collect();
    VecBasis::spanning(&vectors, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    fn running_dual() -> RatMatrix {
        // rows: x, y, y^2, xy, y^3, 1 (the linearized running example)
        RatMatrix::from_i64(&[
            &[1, 0, 1, 0, 0, 0],
            &[0, 1, 0, 0, 0, 1],
            &[0, 2, 1, 0, 0, 1],
            &[1, 0, 1, 1, 1, 0],
            &[0, 3, 3, 0, 1, 1],
            &[0, 0, 0, 0, 0, 1],
        ])
        .transpose()
    }

    #[test]
    fn char_poly_examples() {
        let a = RatMatrix::from_i64(&[&[0, 1], &[2, 0]]);
        assert_eq!(char_poly(&a), UniPoly::from_i64(&[-2, 0, 1]));
        assert_eq!(char_poly_faddeev_leverrier(&a), UniPoly::from_i64(&[-2, 0, 1]));
        assert_eq!(
            char_poly(&RatMatrix::identity(3)),
            UniPoly::from_i64(&[-1, 1]).pow(3)
        );
        // (x, y) -> (y, 2x) lifted to (x^2, xy, y^2)
        let lifted = RatMatrix::from_i64(&[&[0, 0, 1], &[0, 2, 0], &[4, 0, 0]]);
        let expect = UniPoly::from_i64(&[-2, 1]).mul(&UniPoly::from_i64(&[-4, 0, 1]));
        assert_eq!(char_poly(&lifted), expect);
        let (roots, residual) = rational_spectrum(&lifted);
        assert_eq!(roots, vec![(int(-2), 1), (int(2), 2)]);
        assert!(residual.is_empty());
    }

    #[test]
    fn e_unit_is_fixed_by_the_dual() {
        let d = running_dual();
        let e1: Vector = (0..6).map(|i| if i == 5 { int(1) } else { int(0) }).collect();
        assert_eq!(d.mul_vec(&e1), e1);
    }

    #[test]
    fn running_example_eigenspace() {
        let spec = eigenspaces(&running_dual());
        assert_eq!(spec.eigenspaces.len(), 1);
        let e = &spec.eigenspaces[0];
        assert_eq!(e.eigenvalue, int(1));
        assert_eq!(e.multiplicity, 6);
        assert_eq!(e.basis.len(), 2);
        let line: Vector = [-6, 1, -3, 0, 2, 0].iter().map(|&v| int(v)).collect();
        assert!(span_contains(e.basis.vectors(), &line));
    }

    #[test]
    fn three_eigenvalue_example() {
        // f(x, y, xy, 1) = (2x, y/2 + 1, xy + 2x, 1)
        let f = RatMatrix::from_rows(vec![
            vec![int(2), int(0), int(0), int(0)],
            vec![int(0), rat(1, 2), int(0), int(1)],
            vec![int(2), int(0), int(1), int(0)],
            vec![int(0), int(0), int(0), int(1)],
        ]);
        let spec = eigenspaces(&f.transpose());
        let values: Vec<Rational> = spec.eigenspaces.iter().map(|e| e.eigenvalue.clone()).collect();
        assert_eq!(values, vec![rat(1, 2), int(1), int(2)]);
        let one = spec.eigenspace(&int(1)).unwrap();
        let expect = vec![
            vec![int(-2), int(0), int(1), int(0)],
            vec![int(0), int(0), int(0), int(1)],
        ];
        assert!(spans_equal(one.basis.vectors(), &expect, 4));
    }

    #[test]
    fn scaling_map_has_full_eigenspace() {
        let f = RatMatrix::from_i64(&[&[2, 0, 0], &[0, 2, 0], &[0, 0, 2]]);
        let spec = eigenspaces(&f.transpose());
        assert_eq!(spec.eigenspaces.len(), 1);
        assert_eq!(spec.eigenspaces[0].basis.len(), 3);
    }

    #[test]
    fn residual_factor_reported() {
        let spec = eigenspaces(&RatMatrix::from_i64(&[&[0, 1], &[2, 0]]));
        assert!(spec.eigenspaces.is_empty());
        assert_eq!(spec.residual, vec![UniPoly::from_i64(&[-2, 0, 1])]);
    }

    #[test]
    fn intersection_of_planes() {
        let a = vec![
            vec![int(1), int(0), int(0)],
            vec![int(0), int(1), int(0)],
        ];
        let b = vec![
            vec![int(0), int(1), int(0)],
            vec![int(0), int(0), int(1)],
        ];
        let i = intersect_spans(&a, &b, 3);
        assert_eq!(i.vectors(), &[vec![int(0), int(1), int(0)]]);
        assert!(intersect_spans(&a, &[], 3).is_empty());
    }
}
