mod common;

use common::{
    brute_force_vectors, fixture, oracle_theta11, oracle_theta_nn, random_integral_lattice,
};
use lattice_theta::lattice::{embed, random_orthogonal};
use lattice_theta::polyalg::{exponents_of_degree, Coeff};
use lattice_theta::sphere::{monomial_integral, polynomial_sphere_integral};
use lattice_theta::theta::{theta11, theta_nn, theta_series};
use lattice_theta::{BigRational, GramLattice, RatPoly};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn lattice_strategy(dim: usize) -> impl Strategy<Value = GramLattice> {
    any::<u64>()
        .prop_map(move |seed| random_integral_lattice(&mut ChaCha8Rng::seed_from_u64(seed), dim))
}

#[test]
fn short_vectors_match_box_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dim in 2..=4 {
        for _ in 0..4 {
            let l = random_integral_lattice(&mut rng, dim);
            let e = embed(&l).unwrap();
            let exact = l.short_vectors(&BigRational::from_integer(14.into()));
            let scanned = brute_force_vectors(&l, &e, 14.0);
            assert_eq!(exact.len(), scanned.len(), "{}", l.to_gram_text());
        }
    }
}

#[test]
fn theta_counts_match_box_scan() {
    let l = fixture("schiemann2.gram");
    let e = embed(&l).unwrap();
    let mut counts = vec![0i64; 21];
    counts[0] = 1;
    for (_, norm) in brute_force_vectors(&l, &e, 20.0) {
        counts[norm as usize] += 1;
    }
    assert_eq!(
        theta_series(&l, 20).unwrap(),
        lattice_theta::QExpansion::from_integers(20, &counts)
    );
}

#[test]
fn fixture_levels() {
    assert_eq!(
        fixture("z2.gram").level_and_discriminant().unwrap().level,
        4
    );
    assert_eq!(
        fixture("hex.gram").level_and_discriminant().unwrap().level,
        3
    );
}

/// Monte-Carlo average over Gaussian directions; `4/√samples` sigma-ish margin.
#[test]
fn sphere_integrals_match_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples = 200_000;
    for n in 2..=4usize {
        let points: Vec<Vec<f64>> = (0..samples)
            .map(|_| {
                let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / r).collect()
            })
            .collect();
        for d in [2u32, 4] {
            for e in exponents_of_degree(n, d) {
                let exact = monomial_integral(&e, n).to_f64();
                let mc: f64 = points
                    .iter()
                    .map(|p| {
                        p.iter()
                            .zip(&e)
                            .map(|(x, &k)| x.powi(k as i32))
                            .product::<f64>()
                    })
                    .sum::<f64>()
                    / samples as f64;
                assert!((exact - mc).abs() < 6e-3, "n={n} {e:?}: {exact} vs {mc}");
            }
        }
    }
}

/// The spherical average of `P(Qx)` equals that of `P(x)` for orthogonal `Q`.
#[test]
fn sphere_integral_is_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = RatPoly::parse("3 x0^4 - x0 x1^3 + 5/2 x1^2 x2^2 + x2^4 - 7 x0^2 x2^2", 3).unwrap();
    let base = polynomial_sphere_integral(&p, 3).unwrap().to_f64();
    for _ in 0..5 {
        let q = random_orthogonal(3, &mut rng);
        // P(Qx) as a float polynomial, then read back exactly
        let mut rotated = lattice_theta::FloatPoly::zero(3);
        for (e, c) in p.terms() {
            let mut term = lattice_theta::FloatPoly::constant(3, c.to_f64());
            for (i, &k) in e.iter().enumerate() {
                let row = lattice_theta::FloatPoly::from_terms(
                    3,
                    (0..3).map(|j| {
                        let mut ex = vec![0u32; 3];
                        ex[j] = 1;
                        (ex, q[i][j])
                    }),
                );
                term = &term * &row.pow(k);
            }
            rotated = &rotated + &term;
        }
        let value = polynomial_sphere_integral(&RatPoly::from_float_exact(&rotated), 3)
            .unwrap()
            .to_f64();
        assert!(
            (value - base).abs() < 1e-12 * base.abs().max(1.0),
            "{value} vs {base}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn theta11_matches_cosine_oracle(l in lattice_strategy(3)) {
        let exact = theta11(&l, 10).unwrap();
        for (m, o) in oracle_theta11(&l, 10).iter().enumerate() {
            prop_assert!((exact.coefficient(m as u64).to_f64() - o).abs() < 1e-6);
        }
    }

    #[test]
    fn theta_nn_matches_angle_oracle(l in lattice_strategy(2), order in 1u32..=4) {
        let exact = theta_nn(&l, order, 12).unwrap();
        let oracle = oracle_theta_nn(&l, order, 12);
        let scale = oracle.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        for (m, o) in oracle.iter().enumerate() {
            prop_assert!((exact.coefficient(m as u64).to_f64() - o).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn theta_nn_coefficients_in_4z(l in lattice_strategy(2), order in 1u32..=5) {
        let s = theta_nn(&l, order, 20).unwrap();
        prop_assert!(s.all_divisible_by(4));
        let k: u64 = l.minimum().to_integer().try_into().unwrap();
        prop_assert!(s.valuation().is_none_or(|v| v >= 2 * k));
    }

    #[test]
    fn bridge_holds(l in lattice_strategy(2)) {
        let two = BigRational::from_integer(2.into());
        prop_assert_eq!(theta11(&l, 20).unwrap(), theta_nn(&l, 1, 20).unwrap().scale(&two));
    }
}
