use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::poly::{format_rational, Rational};

/// Univariate polynomial over Q, coefficients from the constant term up.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `x - root`
    pub fn linear(root: &Rational) -> Self {
        Self::new(vec![-root.clone(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn monic(&self) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        Self::new(self.coeffs.iter().map(|c| c / &l).collect())
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: usize) -> UniPoly {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    pub fn div_rem(&self, divisor: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let lead = divisor.lead();
        if rem.len() < divisor.coeffs.len() {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if c.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &c * d;
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn derivative(&self) -> UniPoly {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Square-free decomposition (Yun): pairs `(a_i, i)` with `a_i` monic,
    /// square-free, pairwise coprime and `self = lead * prod a_i^i`.
    pub fn squarefree_decomposition(&self) -> Vec<(UniPoly, usize)> {
        if self.degree() == 0 {
            return Vec::new();
        }
        let f = self.monic();
        let df = f.derivative();
        let b = f.gcd(&df);
        let mut c = f.div_rem(&b).0;
        let mut d = df.div_rem(&b).0.sub(&c.derivative());
        let mut out = Vec::new();
        let mut i = 1;
        while c.degree() > 0 {
            let a = c.gcd(&d);
            c = c.div_rem(&a).0;
            d = d.div_rem(&a).0.sub(&c.derivative());
            if a.degree() > 0 {
                out.push((a, i));
            }
            i += 1;
        }
        out
    }

    /// Integer coefficients with content 1 and positive leading coefficient.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        let l = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|q| q.numer() * (&l / q.denom()))
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if g.is_zero() {
            return ints;
        }
        let g = if ints.last().unwrap().is_negative() { -g } else { g };
        ints.into_iter().map(|x| x / &g).collect()
    }

    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            if k == 0 {
                out.push_str(&format_rational(&abs));
            } else if abs.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{}*{mono}", format_rational(&abs)));
            }
        }
        out
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("λ"))
    }
}

/// All positive divisors of `n != 0`. Trial division up to 10^6; a leftover
/// cofactor above that bound is treated as prime.
fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mut n = n.abs();
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let mut p = BigInt::from(2u32);
    let bound = BigInt::from(1_000_000u32);
    while &p * &p <= n && p <= bound {
        let mut e = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        if e > 0 {
            factors.push((p.clone(), e));
        }
        p += if p == BigInt::from(2u32) { 1u32 } else { 2u32 };
    }
    if !n.is_one() {
        factors.push((n, 1));
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in factors {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for d in &divs {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
            }
        }
        divs = next;
    }
    divs.sort();
    divs
}

/// Rational roots of a square-free polynomial by the rational-root theorem.
fn squarefree_rational_roots(p: &UniPoly) -> Vec<Rational> {
    let mut ints = p.primitive_integer();
    let mut roots = Vec::new();
    if ints.first().is_some_and(Zero::is_zero) {
        roots.push(Rational::zero());
        ints.remove(0);
    }
    if ints.len() <= 1 {
        return roots;
    }
    let a0 = ints[0].clone();
    let an = ints.last().unwrap().clone();
    let n = ints.len() - 1;
    // Cauchy bound on root magnitude.
    let bound = ints[..n]
        .iter()
        .map(|c| Rational::new(c.abs(), an.abs()))
        .max()
        .unwrap_or_else(Rational::zero)
        + Rational::one();
    let nums = divisors(&a0);
    let dens = divisors(&an);
    let vanishes = |num: &BigInt, den: &BigInt| {
        // sum a_k num^k den^(n-k) == 0
        let mut acc = BigInt::zero();
        let mut np = BigInt::one();
        let mut dp: Vec<BigInt> = Vec::with_capacity(n + 1);
        let mut d = BigInt::one();
        for _ in 0..=n {
            dp.push(d.clone());
            d *= den;
        }
        for (k, a) in ints.iter().enumerate() {
            acc += a * &np * &dp[n - k];
            np *= num;
        }
        acc.is_zero()
    };
    for q in &dens {
        for pn in &nums {
            if !pn.gcd(q).is_one() {
                continue;
            }
            let cand = Rational::new(pn.clone(), q.clone());
            if cand > bound {
                continue;
            }
            for num in [pn.clone(), -pn.clone()] {
                if vanishes(&num, q) {
                    roots.push(Rational::new(num, q.clone()));
                }
            }
        }
    }
    roots.sort();
    roots
}

/// Every rational root with its exact multiplicity, ascending.
pub fn rational_roots(p: &UniPoly) -> Vec<(Rational, usize)> {
    assert!(!p.is_zero(), "rational roots of the zero polynomial");
    let mut out = Vec::new();
    for (factor, mult) in p.squarefree_decomposition() {
        for r in squarefree_rational_roots(&factor) {
            out.push((r, mult));
        }
    }
    out.sort();
    out
}

/// Splits `p` into its rational-root part and the monic remaining factor.
pub fn deflate(p: &UniPoly) -> (Vec<(Rational, usize)>, UniPoly) {
    let roots = rational_roots(p);
    let mut rest = p.monic();
    for (r, m) in &roots {
        rest = rest.div_rem(&UniPoly::linear(r).pow(*m)).0;
    }
    (roots, rest)
}
