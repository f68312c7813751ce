mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use loopinv::exactla::RatMatrix;
use loopinv::frontend::parse;
use loopinv::linearize::{
    affine_map_of, elevate, is_sound_linearization, linearize, linearize_bodies_with,
    DiscardOrder, LinearLoop,
};
use loopinv::poly::{monomial_count, monomials_up_to, PolyMap};
use loopinv::Error;

/// Linearizes random solvable maps, skipping the ones whose degree is too
/// small for their nonlinear chains.
fn random_linearized(seed: u64, count: usize, n: usize, d: u32) -> Vec<(PolyMap, LinearLoop)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = var_names(n);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 50 * count, "generator rarely linearizes");
        let g = random_solvable_map(&mut rng, n, 2);
        match linearize(&g, d, &vars) {
            Ok(l) => out.push((g, l)),
            Err(Error::DegreeTooSmall { .. }) => continue,
            Err(e) => panic!("unexpected {e}"),
        }
    }
    out
}

#[test]
fn simulation_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cases = random_linearized(7, 25, 3, 3);
    let mut states = 0;
    for (g, l) in &cases {
        assert!(is_sound_linearization(l, g));
        for _ in 0..4 {
            let mut s = loopinv::oracle::random_state(3, &mut rng);
            let mut v = l.monomial_vector(&s);
            for _ in 0..10 {
                s = g.apply(&s);
                v = l.matrix.mul_vec(&v);
                assert_eq!(v, l.monomial_vector(&s));
            }
            states += 1;
        }
    }
    assert_eq!(states, 100);
}

#[test]
fn simulation_twenty_steps_running_example() {
    let p = parse("(x,y) := (x + y*y, y + 1)").unwrap();
    let g = &p.loop_bodies()[0];
    let l = linearize(g, 3, &p.variables).unwrap();
    let mut s = vec![qq(1, 3), qq(-5, 2)];
    let mut v = l.monomial_vector(&s);
    for _ in 0..20 {
        s = g.apply(&s);
        v = l.matrix.mul_vec(&v);
        assert_eq!(v, l.monomial_vector(&s));
    }
}

#[test]
fn basis_bound_and_running_example_size() {
    for (g, l) in random_linearized(3, 30, 3, 3) {
        assert!(l.dim() <= monomial_count(g.nvars(), 3));
        assert!(l.basis.last().unwrap().is_one());
    }
    let p = parse("(x,y) := (x + y*y, y + 1)").unwrap();
    let l = linearize(&p.loop_bodies()[0], 3, &p.variables).unwrap();
    assert_eq!(l.dim(), 6);
    assert_eq!(monomial_count(2, 3), 10);
}

#[test]
fn discard_order_does_not_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let vars = var_names(3);
    for _ in 0..40 {
        let bodies = vec![
            random_solvable_map(&mut rng, 3, 2),
            random_solvable_map(&mut rng, 3, 2),
        ];
        let a = linearize_bodies_with(&bodies, 3, &vars, DiscardOrder::Ascending);
        let b = linearize_bodies_with(&bodies, 3, &vars, DiscardOrder::Descending);
        assert_eq!(a, b);
    }
}

#[test]
fn fixpoint_basis_is_the_largest_closed_set() {
    // Brute force over all subsets of the degree-2 monomials of two
    // variables: the basis must be the union of every closed subset.
    let p = parse("(x,y) := (x + y*y, y + 1)").unwrap();
    let g = &p.loop_bodies()[0];
    let all = monomials_up_to(2, 2);
    let l = linearize(g, 2, &p.variables).unwrap();
    let mut union = std::collections::BTreeSet::new();
    for mask in 0u32..(1 << all.len()) {
        let set: Vec<_> = (0..all.len()).filter(|i| mask >> i & 1 == 1).map(|i| &all[i]).collect();
        let closed = set.iter().all(|m| {
            let img = loopinv::poly::compose(m, g);
            img.degree() <= 2 && img.terms().all(|(t, _)| set.contains(&t))
        });
        if closed {
            union.extend(set.into_iter().cloned());
        }
    }
    let basis: std::collections::BTreeSet<_> = l.basis.iter().cloned().collect();
    assert_eq!(basis, union);
}

fn mat(rows: &[Vec<Q>]) -> RatMatrix {
    RatMatrix::from_rows(rows.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn elevation_intertwines(a in arb_affine(2), x in arb_state(2), d in 1u32..=3) {
        let a = mat(&a);
        let psi = elevate(&a, d);
        let g = affine_map_of(&a);
        let lhs = psi.matrix.mul_vec(&psi.monomial_vector(&x));
        let rhs = psi.monomial_vector(&g.apply(&x));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn elevation_is_functorial(a in arb_affine(2), b in arb_affine(2), d in 2u32..=3) {
        let (a, b) = (mat(&a), mat(&b));
        let ab = elevate(&a.mul(&b), d).matrix;
        let prod = elevate(&a, d).matrix.mul(&elevate(&b, d).matrix);
        prop_assert_eq!(ab, prod);
    }

    #[test]
    fn elevation_degree_one_is_identity_map(a in arb_affine(3)) {
        let a = mat(&a);
        prop_assert_eq!(elevate(&a, 1).matrix, a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn elevation_is_functorial_three_vars(a in arb_affine(3), b in arb_affine(3)) {
        let (a, b) = (mat(&a), mat(&b));
        for d in [2u32, 3] {
            let ab = elevate(&a.mul(&b), d).matrix;
            let prod = elevate(&a, d).matrix.mul(&elevate(&b, d).matrix);
            prop_assert_eq!(ab, prod);
        }
    }
}
