//! Independent reference routines and random generators shared by the
//! integration tests. Nothing here calls into the library's linear algebra.

#![allow(dead_code, clippy::needless_range_loop)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::Rng;

use loopinv::poly::{Monomial, PolyMap, Polynomial};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qq(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row echelon form by elimination that always pivots on the *last*
/// eligible row, returning the nonzero rows and the pivot columns.
pub fn echelon(mut rows: Vec<Vec<Q>>, cols: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).rev().find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &rows[r][j];
                    rows[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rank(rows: &[Vec<Q>], cols: usize) -> usize {
    echelon(rows.to_vec(), cols).0.len()
}

/// Null space of `m` (rows x cols) from its reduced echelon form.
pub fn null_space(m: &[Vec<Q>], cols: usize) -> Vec<Vec<Q>> {
    let (rref, pivots) = echelon(m.to_vec(), cols);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); cols];
            v[free] = Q::one();
            for (row, &pc) in rref.iter().zip(&pivots) {
                v[pc] = -row[free].clone();
            }
            v
        })
        .collect()
}

pub fn det(m: &[Vec<Q>]) -> Q {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        for i in c + 1..n {
            let f = &a[i][c] / &a[c][c];
            for j in c..n {
                let delta = &f * &a[c][j];
                a[i][j] -= delta;
            }
        }
    }
    d
}

/// `det(λI - A)` recovered by Lagrange interpolation through `n + 1`
/// integer points, coefficients low to high.
pub fn char_poly_interpolated(a: &[Vec<Q>]) -> Vec<Q> {
    let n = a.len();
    let xs: Vec<Q> = (0..=n as i64).map(q).collect();
    let ys: Vec<Q> = xs
        .iter()
        .map(|x| {
            let m: Vec<Vec<Q>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { x - &a[i][j] } else { -a[i][j].clone() })
                        .collect()
                })
                .collect();
            det(&m)
        })
        .collect();
    let mut coeffs = vec![Q::zero(); n + 1];
    for i in 0..=n {
        // basis polynomial prod_{j != i} (t - x_j) / (x_i - x_j)
        let mut basis = vec![Q::one()];
        let mut denom = Q::one();
        for j in 0..=n {
            if j == i {
                continue;
            }
            let mut next = vec![Q::zero(); basis.len() + 1];
            for (k, c) in basis.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * &xs[j];
            }
            basis = next;
            denom *= &xs[i] - &xs[j];
        }
        let scale = &ys[i] / denom;
        for (k, c) in basis.iter().enumerate() {
            coeffs[k] += c * &scale;
        }
    }
    coeffs
}

pub fn eval_upoly(coeffs: &[Q], x: &Q) -> Q {
    coeffs.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
}

fn small_divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut out = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            out.push(&n / &d);
        }
        d += 1;
    }
    out.sort();
    out.dedup();
    out
}

/// Rational roots by exhaustive candidate testing; zero handled
/// separately. Meant for the small coefficients of random test matrices.
pub fn brute_rational_roots(coeffs: &[Q]) -> Vec<Q> {
    let mut c: Vec<Q> = coeffs.to_vec();
    while c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
    let mut roots = Vec::new();
    if c.first().is_some_and(Zero::is_zero) {
        roots.push(Q::zero());
        while c.first().is_some_and(Zero::is_zero) {
            c.remove(0);
        }
    }
    if c.len() <= 1 {
        return roots;
    }
    let lcm = c
        .iter()
        .fold(BigInt::one(), |acc, x| num_integer::lcm(acc, x.denom().clone()));
    let ints: Vec<BigInt> = c.iter().map(|x| (x * Q::from_integer(lcm.clone())).to_integer()).collect();
    for p in small_divisors(&ints[0]) {
        for qd in small_divisors(ints.last().unwrap()) {
            for sign in [1, -1] {
                let cand = Q::new(&p * sign, qd.clone());
                if eval_upoly(&c, &cand).is_zero() && !roots.contains(&cand) {
                    roots.push(cand);
                }
            }
        }
    }
    roots.sort();
    roots
}

pub fn span_contains(basis: &[Vec<Q>], v: &[Q]) -> bool {
    let cols = v.len();
    let mut with = basis.to_vec();
    with.push(v.to_vec());
    rank(&with, cols) == rank(basis, cols)
}

pub fn same_span(a: &[Vec<Q>], b: &[Vec<Q>]) -> bool {
    let cols = a.first().or(b.first()).map_or(0, Vec::len);
    rank(a, cols) == rank(b, cols) && b.iter().all(|v| span_contains(a, v))
}

pub fn transpose(a: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

// ---------------------------------------------------------------------------
// Random generators

pub fn arb_rational() -> impl Strategy<Value = Q> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| qq(n, d))
}

pub fn arb_monomial(nvars: usize, max_degree: u32) -> impl Strategy<Value = Monomial> {
    proptest::collection::vec(0..=max_degree, nvars)
        .prop_filter("degree bound", move |e| e.iter().sum::<u32>() <= max_degree)
        .prop_map(Monomial::from_exponents)
}

pub fn arb_poly(nvars: usize, max_degree: u32, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    proptest::collection::vec((arb_monomial(nvars, max_degree), arb_rational()), 0..=max_terms)
        .prop_map(move |terms| Polynomial::from_terms(nvars, terms))
}

pub fn arb_state(nvars: usize) -> impl Strategy<Value = Vec<Q>> {
    proptest::collection::vec(arb_rational(), nvars)
}

pub fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<Q>>> {
    proptest::collection::vec(proptest::collection::vec(-3i64..=3, cols), rows)
        .prop_map(|m| m.into_iter().map(|r| r.into_iter().map(q).collect()).collect())
}

/// A homogenized affine matrix on `n` variables: last row is the unit row.
pub fn arb_affine(n: usize) -> impl Strategy<Value = Vec<Vec<Q>>> {
    arb_matrix(n, n + 1).prop_map(move |mut m| {
        let mut unit = vec![Q::zero(); n + 1];
        unit[n] = Q::one();
        m.push(unit);
        m
    })
}

fn random_small(rng: &mut impl Rng) -> Q {
    qq(rng.gen_range(-3..=3), rng.gen_range(1..=2))
}

/// A random solvable map: variables are processed in a random order; each
/// is a linear combination of itself and the previously processed
/// variables, plus a polynomial of degree up to `max_degree` in the earlier
/// ones only.
pub fn random_solvable_map(rng: &mut impl Rng, n: usize, max_degree: u32) -> PolyMap {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut comps = vec![Polynomial::zero(n); n];
    for (pos, &v) in order.iter().enumerate() {
        let earlier = &order[..pos];
        let mut p = Polynomial::zero(n);
        p.add_term(Monomial::var(n, v), random_small(rng));
        p.add_term(Monomial::one(n), random_small(rng));
        for &u in earlier {
            if rng.gen_bool(0.5) {
                p.add_term(Monomial::var(n, u), random_small(rng));
            }
        }
        if !earlier.is_empty() && max_degree >= 2 {
            for _ in 0..rng.gen_range(0..=2) {
                let mut exps = vec![0u32; n];
                let deg = rng.gen_range(2..=max_degree);
                for _ in 0..deg {
                    exps[earlier[rng.gen_range(0..earlier.len())]] += 1;
                }
                p.add_term(Monomial::from_exponents(exps), random_small(rng));
            }
        }
        comps[v] = p;
    }
    PolyMap::new(comps)
}

pub fn var_names(n: usize) -> Vec<String> {
    ["x", "y", "z", "w", "u", "v"]
        .iter()
        .take(n)
        .map(|s| s.to_string())
        .collect()
}
