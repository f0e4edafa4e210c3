//! Randomized invariants.

use catlab_core::arith::{self, PrimePowerModulus};
use catlab_core::fixtures;
use catlab_core::linalg::{CMatrix, C64};
use catlab_core::quantization::{
    apply_heisenberg, e_q, heisenberg_matrix, omega, HeisenbergIndex, StateVector,
};
use catlab_core::symplectic::{admit, good_primes, matrix_order, u_orbit_matrix};
use catlab_core::verify::{
    count_q, saving_exponent, sequence_period, spectral_data, MeetInTheMiddle, NaiveCounter, RateConstants,
};
use proptest::prelude::*;

fn hi(u: &[i64]) -> HeisenbergIndex {
    HeisenbergIndex::new(u.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_law(n in prop::sample::select(vec![3u64, 5, 7, 9, 11]),
                       u in prop::collection::vec(-20i64..20, 4),
                       v in prop::collection::vec(-20i64..20, 4)) {
        let (u, v) = (hi(&u), hi(&v));
        let lhs = heisenberg_matrix(&u, n, 2).unwrap().matmul(&heisenberg_matrix(&v, n, 2).unwrap());
        let rhs = heisenberg_matrix(&u.add(&v), n, 2).unwrap().scale(e_q(omega(&u, &v), 2 * n));
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-12);
    }

    #[test]
    fn heisenberg_unitary_and_matrix_free(n in prop::sample::select(vec![3u64, 5, 25]),
                                          u in prop::collection::vec(-30i64..30, 2),
                                          re in prop::collection::vec(-1.0f64..1.0, 25),
                                          im in prop::collection::vec(-1.0f64..1.0, 25)) {
        let vals: Vec<C64> = re.iter().zip(&im).take(n as usize).map(|(&a, &b)| C64::new(a, b)).collect();
        let phi = StateVector::new(n, 1, vals).unwrap();
        let out = apply_heisenberg(&hi(&u), &phi).unwrap();
        prop_assert!((out.norm_sqr() - phi.norm_sqr()).abs() < 1e-12);
        let dense = heisenberg_matrix(&hi(&u), n, 1).unwrap();
        for (x, y) in dense.matvec(phi.values()).iter().zip(out.values()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
        let tneg = heisenberg_matrix(&hi(&u).neg(), n, 1).unwrap();
        prop_assert!(dense.adjoint().sub(&tneg).max_abs() < 1e-12);
        prop_assert!(dense.matmul(&tneg).sub(&CMatrix::identity(n as usize)).max_abs() < 1e-12);
    }

    #[test]
    fn counters_agree_on_random_u(u in prop::collection::vec(-12i64..12, 2), s in 1u32..=2) {
        prop_assume!(u.iter().any(|x| x.rem_euclid(5) != 0));
        let ctx = PrimePowerModulus::new(5, 1).unwrap();
        // 5 is not a good prime for A1, so A1 is counted mod 7
        let ctx7 = PrimePowerModulus::new(7, 1).unwrap();
        prop_assume!(u.iter().any(|x| x.rem_euclid(7) != 0));
        let a2 = fixtures::a2();
        let x = count_q(&a2, &ctx, &u, s, &NaiveCounter).unwrap();
        let y = count_q(&a2, &ctx, &u, s, &MeetInTheMiddle).unwrap();
        prop_assert_eq!(x.count, y.count);
        let x = count_q(&fixtures::a1(), &ctx7, &u, s, &NaiveCounter).unwrap();
        let y = count_q(&fixtures::a1(), &ctx7, &u, s, &MeetInTheMiddle).unwrap();
        prop_assert_eq!(x.count, y.count);
        // diagonal solutions are always present
        prop_assert!(y.count >= y.t.pow(s));
    }

    #[test]
    fn period_divides_lcm_and_is_minimal(a in prop::collection::vec(0i64..125, 2), r in 1u32..=3) {
        let sd = spectral_data(&fixtures::a2(), 5, 3).unwrap();
        let t = sequence_period(&sd, &a, r).unwrap();
        let l = sd.orders_mod(r).unwrap().into_iter().fold(1, arith::lcm);
        prop_assert_eq!(l % t, 0);
        let m = 5u64.pow(r);
        let lam = sd.lambdas_mod(r).unwrap();
        let val = |x: u64| {
            (0..2).fold(0u64, |acc, i| {
                arith::add_mod(acc, arith::mul_mod(a[i].rem_euclid(m as i64) as u64, arith::pow_mod(lam[i], x, m), m), m)
            })
        };
        for q in arith::divisors(t).into_iter().filter(|&q| q < t) {
            prop_assert!((0..l).any(|x| val(x) != val(x + q)));
        }
        prop_assert!((0..l).all(|x| val(x) == val(x + t)));
    }

    #[test]
    fn saving_at_most_one(a in prop::collection::vec(1i64..25, 2)) {
        prop_assume!(a.iter().any(|x| x % 5 != 0));
        let sd = spectral_data(&fixtures::a2(), 5, 2).unwrap();
        let s = saving_exponent(&sd, &a, 2).unwrap();
        prop_assert!(s <= 1.0 + 1e-12);
    }

    #[test]
    fn orbit_matrix_nonsingular(u in prop::collection::vec(-10i64..=10, 2)) {
        prop_assume!(u.iter().any(|&x| x != 0));
        for a in [fixtures::a1(), fixtures::a2()] {
            let r = u_orbit_matrix(&u, &a, 5).unwrap();
            prop_assert!(r.det_x != 0);
        }
    }
}

#[test]
fn orders_over_good_primes() {
    let adm = admit(&fixtures::a1(), false).unwrap();
    for p in good_primes(&adm, 60) {
        let mut prev = 1;
        for k in 1..=4 {
            let o = matrix_order(adm.matrix(), p, k).unwrap();
            assert_eq!(o % prev, 0);
            assert!(o / prev == 1 || o / prev == p || k == 1);
            prev = o;
        }
    }
}

#[test]
fn rate_invariants() {
    for d in 1..=5 {
        let r = RateConstants::new(d);
        assert_eq!(r.eta(r.s0()), r.kappa());
        for s in 1..=100 {
            assert!(r.eta(s + 1) > r.eta(s));
        }
    }
}
