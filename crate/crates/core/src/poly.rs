//! Exact multivariate polynomial arithmetic over the rationals.
//!
//! Monomials are dense exponent vectors over the program's ordered
//! variables. The constant monomial (all exponents zero) doubles as the
//! homogenizing coordinate `1` of linearized loops.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

/// The scalar field: arbitrary precision fractions kept in lowest terms.
pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p"`, `"-p/q"` or a plain decimal such as `"0.25"`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let whole = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse::<BigInt>().ok()?.abs()
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac: BigInt = frac.parse().ok()?;
        let value = Rational::new(whole * &scale + frac, scale);
        return Some(if negative { -value } else { value });
    }
    text.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Canonical `p/q` text (just `p` for integers).
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

/// A power product of the program variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn from_exponents(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.nvars(), other.nvars());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Indices of the variables with a nonzero exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
    }

    /// Splits off one occurrence of the first variable in the support.
    pub fn split_first(&self) -> Option<(usize, Monomial)> {
        let i = self.support().next()?;
        let mut rest = self.0.clone();
        rest[i] -= 1;
        Some((i, Monomial(rest)))
    }

    pub fn eval(&self, values: &[Rational]) -> Rational {
        let mut acc = Rational::one();
        for (e, v) in self.0.iter().zip(values) {
            for _ in 0..*e {
                acc *= v;
            }
        }
        acc
    }

    /// `x*y^2` style rendering; the constant monomial renders as `1`.
    pub fn render(&self, vars: &[String]) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    vars[i].clone()
                } else {
                    format!("{}^{}", vars[i], e)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn to_json(&self, vars: &[String]) -> Value {
        let map: serde_json::Map<String, Value> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| (vars[i].clone(), json!(e)))
            .collect();
        Value::Object(map)
    }
}

/// Graded order: lower degree first, and within a degree the earlier
/// variables come first (`x^2 < x*y < y^2` for variable order `x, y`).
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials of degree at most `degree` in `nvars` variables, sorted by
/// the graded order. There are exactly `C(nvars + degree, degree)`.
pub fn monomials_up_to(nvars: usize, degree: u32) -> Vec<Monomial> {
    fn fill(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if pos == cur.len() {
            out.push(Monomial(cur.clone()));
            return;
        }
        for e in 0..=left {
            cur[pos] = e;
            fill(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0; nvars];
    fill(0, degree, &mut cur, &mut out);
    out.sort();
    out
}

/// `C(nvars + degree, degree)`, saturating.
pub fn monomial_count(nvars: usize, degree: u32) -> usize {
    let d = degree as usize;
    (1..=d).fold(1usize, |acc, i| acc.saturating_mul(nvars + i) / i)
}

/// A polynomial in canonical form: no zero coefficients are stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::term(Monomial::one(nvars), c)
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        Self::term(Monomial::var(nvars, index), Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero(m.nvars());
        p.add_term(m, c);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Variable indices occurring in some term.
    pub fn support(&self) -> Vec<usize> {
        let mut seen = vec![false; self.nvars];
        for m in self.terms.keys() {
            for i in m.support() {
                seen[i] = true;
            }
        }
        (0..self.nvars).filter(|&i| seen[i]).collect()
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn eval(&self, values: &[Rational]) -> Rational {
        self.terms
            .iter()
            .map(|(m, c)| c * m.eval(values))
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// Substitutes `g[i]` for every variable `i`.
    pub fn compose(&self, g: &PolyMap) -> Polynomial {
        let mut out = Self::zero(g.nvars());
        for (m, c) in &self.terms {
            out = &out + &compose(m, g).scale(c);
        }
        out
    }

    /// Human-readable form: ascending graded order with the constant last,
    /// e.g. `-6*x + y - 3*y^2 + 2*y^3`.
    pub fn render(&self, vars: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let ordered = self
            .terms
            .iter()
            .filter(|(m, _)| !m.is_one())
            .chain(self.terms.iter().filter(|(m, _)| m.is_one()));
        let mut out = String::new();
        for (i, (m, c)) in ordered.enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            if m.is_one() {
                out.push_str(&format_rational(&abs));
            } else if abs.is_one() {
                out.push_str(&m.render(vars));
            } else {
                out.push_str(&format!("{}*{}", format_rational(&abs), m.render(vars)));
            }
        }
        out
    }

    /// Stable term list `[{"monomial": {var: exp}, "coeff": "p/q"}]`.
    pub fn to_json(&self, vars: &[String]) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(m, c)| json!({"monomial": m.to_json(vars), "coeff": format_rational(c)}))
                .collect(),
        )
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<String> = (0..self.nvars).map(|i| format!("x{i}")).collect();
        f.write_str(&self.render(&vars))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: Polynomial) -> Polynomial {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// A simultaneous assignment: component `i` is the new value of variable `i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMap {
    components: Vec<Polynomial>,
}

impl PolyMap {
    pub fn new(components: Vec<Polynomial>) -> Self {
        let n = components.len();
        assert!(
            components.iter().all(|p| p.nvars() == n),
            "PolyMap components must range over its own arity"
        );
        PolyMap { components }
    }

    pub fn identity(nvars: usize) -> Self {
        PolyMap {
            components: (0..nvars).map(|i| Polynomial::var(nvars, i)).collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Polynomial {
        &self.components[i]
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn is_identity_on(&self, var: usize) -> bool {
        self.components[var] == Polynomial::var(self.nvars(), var)
    }

    pub fn apply(&self, values: &[Rational]) -> Vec<Rational> {
        self.components.iter().map(|p| p.eval(values)).collect()
    }

    /// Runs `self` and then `next`, folded into one simultaneous assignment.
    pub fn then(&self, next: &PolyMap) -> PolyMap {
        PolyMap {
            components: next.components.iter().map(|p| p.compose(self)).collect(),
        }
    }
}

/// Substitutes each variable of `m` by its image under `g` and expands.
pub fn compose(m: &Monomial, g: &PolyMap) -> Polynomial {
    let n = g.nvars();
    let mut acc = Polynomial::one(n);
    for (i, &e) in m.exponents().iter().enumerate() {
        if e > 0 {
            acc = &acc * &g.component(i).pow(e);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn running_example() -> PolyMap {
        // g(x, y) = (x + y^2, y + 1)
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        PolyMap::new(vec![&x + &(&y * &y), &y + &Polynomial::one(2)])
    }

    #[test]
    fn square_of_y_plus_one() {
        let y1 = &Polynomial::var(2, 1) + &Polynomial::one(2);
        let sq = &y1 * &y1;
        assert_eq!(sq.render(&names(&["x", "y"])), "2*y + y^2 + 1");
        assert_eq!(sq.coeff(&Monomial::from_exponents(vec![0, 1])), int(2));
    }

    #[test]
    fn adding_zero_is_identity() {
        let p = running_example().component(0).clone();
        assert_eq!(&p + &Polynomial::zero(2), p);
    }

    #[test]
    fn compose_examples() {
        let g = running_example();
        let y2 = compose(&Monomial::from_exponents(vec![0, 2]), &g);
        let expect = Polynomial::from_terms(
            2,
            [
                (Monomial::from_exponents(vec![0, 2]), int(1)),
                (Monomial::from_exponents(vec![0, 1]), int(2)),
                (Monomial::one(2), int(1)),
            ],
        );
        assert_eq!(y2, expect);

        let xy = compose(&Monomial::from_exponents(vec![1, 1]), &g);
        let expect = Polynomial::from_terms(
            2,
            [
                (Monomial::from_exponents(vec![1, 1]), int(1)),
                (Monomial::from_exponents(vec![1, 0]), int(1)),
                (Monomial::from_exponents(vec![0, 3]), int(1)),
                (Monomial::from_exponents(vec![0, 2]), int(1)),
            ],
        );
        assert_eq!(xy, expect);

        assert_eq!(compose(&Monomial::one(2), &g), Polynomial::one(2));
    }

    #[test]
    fn eval_running_invariant_at_origin() {
        let v = names(&["x", "y"]);
        let p = Polynomial::from_terms(
            2,
            [
                (Monomial::from_exponents(vec![1, 0]), int(-6)),
                (Monomial::from_exponents(vec![0, 1]), int(1)),
                (Monomial::from_exponents(vec![0, 2]), int(-3)),
                (Monomial::from_exponents(vec![0, 3]), int(2)),
            ],
        );
        assert_eq!(p.render(&v), "-6*x + y - 3*y^2 + 2*y^3");
        assert_eq!(p.eval(&[int(0), int(0)]), int(0));
        assert_eq!(Polynomial::one(2).eval(&[rat(7, 3), int(-4)]), int(1));
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials_up_to(2, 3).len(), 10);
        assert_eq!(monomials_up_to(1, 0), vec![Monomial::one(1)]);
        let binom = |n: u64, k: u64| -> u64 { (1..=k).fold(1, |acc, i| acc * (n - k + i) / i) };
        for n in 1..=6usize {
            for d in 0..=6u32 {
                assert_eq!(
                    monomials_up_to(n, d).len() as u64,
                    binom(n as u64 + d as u64, d as u64),
                    "n={n} d={d}"
                );
            }
        }
    }

    #[test]
    fn graded_order() {
        let v = names(&["x", "y"]);
        let rendered: Vec<String> = monomials_up_to(2, 2).iter().map(|m| m.render(&v)).collect();
        assert_eq!(rendered, ["1", "x", "y", "x^2", "x*y", "y^2"]);
    }

    #[test]
    fn parse_and_format_rationals() {
        assert_eq!(parse_rational("-3/6"), Some(rat(-1, 2)));
        assert_eq!(parse_rational("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_rational("-1.5"), Some(rat(-3, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(format_rational(&rat(4, 2)), "2");
        assert_eq!(format_rational(&rat(-2, 6)), "-1/3");
    }

    #[test]
    fn json_term_list() {
        let v = names(&["x", "y"]);
        let p = Polynomial::from_terms(
            2,
            [
                (Monomial::from_exponents(vec![1, 2]), rat(1, 2)),
                (Monomial::one(2), int(-1)),
            ],
        );
        assert_eq!(
            p.to_json(&v).to_string(),
            r#"[{"coeff":"-1","monomial":{}},{"coeff":"1/2","monomial":{"x":1,"y":2}}]"#
        );
    }

    #[test]
    fn sequential_composition_folds() {
        // (x) := (x + 1) ; (x, y) := (x, x*y)  ==  (x, y) := (x + 1, (x + 1)*y)
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let one = Polynomial::one(2);
        let first = PolyMap::new(vec![&x + &one, y.clone()]);
        let second = PolyMap::new(vec![x.clone(), &x * &y]);
        let folded = first.then(&second);
        assert_eq!(folded.component(1), &(&(&x + &one) * &y));
        let s = [int(2), int(5)];
        assert_eq!(folded.apply(&s), second.apply(&first.apply(&s)));
    }
}
