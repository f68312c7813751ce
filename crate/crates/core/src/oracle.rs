//! Trace oracle: instantiates invariant families at random rational initial
//! states and checks every resulting equation on concrete runs with random
//! body choices.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::invgen::{instantiate, ConcreteInvariant, InvariantFamily};
use crate::poly::{format_rational, PolyMap, Rational};

#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    pub iterations: usize,
    pub initial_states: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            iterations: 100,
            initial_states: 3,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Verdict {
    pub passed: bool,
    /// Number of (invariant, state) evaluations performed.
    pub checks: usize,
    pub failure: Option<String>,
}

impl Verdict {
    fn pass(checks: usize) -> Self {
        Verdict {
            passed: true,
            checks,
            failure: None,
        }
    }
}

pub fn random_rational(rng: &mut impl Rng) -> Rational {
    let n: i64 = rng.gen_range(-20..=20);
    let d: i64 = rng.gen_range(1..=9);
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn random_state(nvars: usize, rng: &mut impl Rng) -> Vec<Rational> {
    (0..nvars).map(|_| random_rational(rng)).collect()
}

/// Checks `invs` on every state of one run of `iterations` steps.
pub fn check_run(
    bodies: &[PolyMap],
    invs: &[ConcreteInvariant],
    init: &[Rational],
    iterations: usize,
    rng: &mut impl Rng,
    vars: &[String],
) -> Verdict {
    let mut state = init.to_vec();
    let mut checks = 0;
    for step in 0..=iterations {
        for inv in invs {
            checks += 1;
            if !inv.holds_at(&state) {
                let shown: Vec<String> = vars
                    .iter()
                    .zip(&state)
                    .map(|(v, q)| format!("{v}={}", format_rational(q)))
                    .collect();
                return Verdict {
                    passed: false,
                    checks,
                    failure: Some(format!(
                        "`{}` fails after {step} steps at {}",
                        inv.render(vars),
                        shown.join(",")
                    )),
                };
            }
        }
        if step < iterations && !bodies.is_empty() {
            let b = rng.gen_range(0..bodies.len());
            state = bodies[b].apply(&state);
        }
    }
    Verdict::pass(checks)
}

/// Instantiates each family at several random initial states and runs the
/// loop from each of them.
pub fn check_families(
    bodies: &[PolyMap],
    families: &[&InvariantFamily],
    vars: &[String],
    cfg: &OracleConfig,
) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = 0;
    for _ in 0..cfg.initial_states {
        let init = random_state(vars.len(), &mut rng);
        let invs: Vec<ConcreteInvariant> = families
            .iter()
            .flat_map(|fam| instantiate(fam, &init))
            .collect();
        let v = check_run(bodies, &invs, &init, cfg.iterations, &mut rng, vars);
        checks += v.checks;
        if !v.passed {
            return Verdict { checks, ..v };
        }
    }
    Verdict::pass(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::invgen::{intersect, semi_invariants, DEFAULT_MAX_COMBOS};
    use crate::linearize::linearize_bodies;
    use crate::poly::{int, Monomial, Polynomial};

    #[test]
    fn running_example_passes() {
        let p = parse("(x,y) := (x + y*y, y + 1)").unwrap();
        let bodies = p.loop_bodies();
        let loops = linearize_bodies(&bodies, 3, &p.variables).unwrap();
        let fam = intersect(&[semi_invariants(&loops[0])], DEFAULT_MAX_COMBOS).unwrap();
        let v = check_families(&bodies, &[&fam], &p.variables, &OracleConfig::default());
        assert!(v.passed, "{:?}", v.failure);
        assert_eq!(v.checks, 3 * 101);
    }

    #[test]
    fn false_invariant_is_caught() {
        let p = parse("(x,y) := (x + y*y, y + 1)").unwrap();
        let bogus = ConcreteInvariant {
            lhs: Polynomial::term(Monomial::var(2, 0), int(1)),
            rhs: int(0),
            eigenvalues: vec![int(1)],
            bodies: vec![0],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = check_run(
            &p.loop_bodies(),
            &[bogus],
            &[int(0), int(1)],
            10,
            &mut rng,
            &p.variables,
        );
        assert!(!v.passed);
        assert_eq!(v.failure.unwrap(), "`x = 0` fails after 1 steps at x=1,y=2");
    }
}
