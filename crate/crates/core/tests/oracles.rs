//! Library results checked against independent implementations written
//! directly from the definitions.

use std::f64::consts::PI;

use catlab_core::arith::PrimePowerModulus;
use catlab_core::fixtures;
use catlab_core::linalg::{CMatrix, Jacobi, HermitianEigensolver, C64};
use catlab_core::quantization::{build_propagator_mod, heisenberg_matrix, observable_operator, HeisenbergIndex};
use catlab_core::spectra::{discrepancy, discrepancy_from, spectral_decomposition, SpectralOptions};
use catlab_core::symplectic::{matrix_order, SymplecticMatrix};
use catlab_core::verify::{count_q, MeetInTheMiddle};

/// `T_N(u)` straight from its action on basis vectors, for `d = 1`.
fn oracle_t(u: (i64, i64), n: i64) -> CMatrix {
    let (u1, u2) = u;
    let mut m = CMatrix::zeros(n as usize, n as usize);
    for w in 0..n {
        let phase = PI * (u1 * u2) as f64 / n as f64 + 2.0 * PI * (u2 * w) as f64 / n as f64;
        m[(w as usize, (w + u1).rem_euclid(n) as usize)] = C64::from_polar(1.0, phase);
    }
    m
}

fn row_times(a: &SymplecticMatrix, u: (i64, i64)) -> (i64, i64) {
    let v = a.row_times(&[u.0, u.1]).unwrap();
    (v[0], v[1])
}

#[test]
fn heisenberg_matches_definition() {
    for n in [3i64, 5, 7, 9, 25] {
        for u in [(0, 0), (1, 0), (0, 1), (2, 3), (-4, 7), (11, -6)] {
            let lib = heisenberg_matrix(&HeisenbergIndex::new(vec![u.0, u.1]).unwrap(), n as u64, 1).unwrap();
            assert!(lib.sub(&oracle_t(u, n)).max_abs() < 1e-12, "N={n} u={u:?}");
        }
    }
}

#[test]
fn egorov_against_definition() {
    for (a, n) in [(fixtures::a1(), 7i64), (fixtures::a1(), 49), (fixtures::a2(), 25), (fixtures::a2(), 19)] {
        let u = build_propagator_mod(&a, n as u64).unwrap();
        let m = u.matrix();
        for v in [(1, 0), (0, 1), (3, 4), (-2, 9)] {
            let lhs = m.adjoint().matmul(&oracle_t(v, n)).matmul(m);
            let rhs = oracle_t(row_times(&a, v), n);
            assert!(lhs.sub(&rhs).max_abs() < 1e-10, "N={n} u={v:?}");
        }
    }
}

#[test]
fn propagator_unique_up_to_phase() {
    // A rephased propagator is a scalar multiple of the original.
    let a = fixtures::a2();
    let u = build_propagator_mod(&a, 25).unwrap();
    let v = u.with_global_phase(0.7);
    let ratio = v.matrix()[(0, 0)] / u.matrix()[(0, 0)];
    assert!(v.matrix().sub(&u.matrix().scale(ratio)).max_abs() < 1e-12);
}

/// Eigenprojectors of `U` from `U^T = c I`, without any eigensolver:
/// `P_j = T^-1 sum_m (conj(z_j) U)^m` for the `T` roots `z_j` of `z^T = c`.
fn projector_discrepancy(a: &SymplecticMatrix, p: u64, k: u32) -> f64 {
    let n = p.pow(k);
    let t = matrix_order(a, p, k).unwrap();
    let u = build_propagator_mod(a, n).unwrap();
    let um = u.matrix().clone();
    let c = um.pow(t)[(0, 0)];
    let dim = n as usize;
    let f = fixtures::cos_x1(1);
    let b = observable_operator(&f, n).unwrap();
    let mut powers = vec![CMatrix::identity(dim)];
    for _ in 1..t {
        powers.push(powers.last().unwrap().matmul(&um));
    }
    let mut delta: f64 = 0.0;
    let mut rank_total = 0.0;
    for j in 0..t {
        let z = C64::from_polar(1.0, (c.arg() + 2.0 * PI * j as f64) / t as f64);
        let mut proj = CMatrix::zeros(dim, dim);
        for (m, pw) in powers.iter().enumerate() {
            proj = proj.add(&pw.scale(z.conj().powu(m as u32)));
        }
        let proj = proj.scale(C64::new(1.0 / t as f64, 0.0));
        let rank = proj.trace().re;
        rank_total += rank;
        if rank < 0.5 {
            continue;
        }
        let comp = proj.adjoint().matmul(&b).matmul(&proj);
        let comp = comp.add(&comp.adjoint()).scale(C64::new(0.5, 0.0));
        let eig = Jacobi::default().solve(&comp).unwrap();
        delta = delta.max(eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max));
    }
    assert!((rank_total - dim as f64).abs() < 1e-8);
    delta
}

#[test]
fn discrepancy_matches_projector_oracle() {
    let a = fixtures::a2();
    for k in 1..=2 {
        let ctx = PrimePowerModulus::new(5, k).unwrap();
        let lib = discrepancy(&a, &ctx, &fixtures::cos_x1(1), &SpectralOptions::default()).unwrap();
        let oracle = projector_discrepancy(&a, 5, k);
        assert!((lib.delta - oracle).abs() < 1e-9, "k={k}: {} vs {oracle}", lib.delta);
    }
}

#[test]
fn discrepancy_regression_values() {
    let a = fixtures::a2();
    let f = fixtures::cos_x1(1);
    for (k, want) in [(1u32, 0.7416119972858434), (2, 0.4842915805643157), (3, 0.25)] {
        let ctx = PrimePowerModulus::new(5, k).unwrap();
        let r = discrepancy(&a, &ctx, &f, &SpectralOptions::default()).unwrap();
        assert!((r.delta - want).abs() < 1e-9, "k={k}: {}", r.delta);
    }
}

#[test]
fn discrepancy_independent_of_solver_and_seed() {
    let u = build_propagator_mod(&fixtures::a2(), 25).unwrap();
    let f = fixtures::cos_x1(1);
    let mut seen = Vec::new();
    for (solver, seed) in [("jacobi", 0), ("householder-ql", 0), ("auto", 42)] {
        let opts = SpectralOptions::with_solver(solver, seed).unwrap();
        let dec = catlab_core::spectra::spectral_decomposition_with(&u, &opts).unwrap();
        seen.push(discrepancy_from(&dec, &f, 25, 2, 20).unwrap().delta);
    }
    assert!(seen.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-9));
}

#[test]
fn eigenphases_are_roots_of_the_scalar() {
    let a = fixtures::a2();
    let u = build_propagator_mod(&a, 25).unwrap();
    let c = u.matrix().pow(20)[(0, 0)];
    let dec = spectral_decomposition(&u).unwrap();
    for theta in dec.eigenphases() {
        let z = C64::from_polar(1.0, 2.0 * PI * theta).powu(20);
        assert!((z - c).norm() < 1e-8);
    }
}

/// Brute force over all `2s`-tuples of exponents, using direct matrix powers.
fn oracle_q(a: &SymplecticMatrix, n: u64, u: (i64, i64), s: usize) -> u64 {
    let t = matrix_order(a, 5, if n == 5 { 1 } else { 2 }).unwrap();
    let mut vecs = Vec::new();
    let mut cur = (u.0.rem_euclid(n as i64), u.1.rem_euclid(n as i64));
    for _ in 0..t {
        cur = row_times(a, cur);
        cur = (cur.0.rem_euclid(n as i64), cur.1.rem_euclid(n as i64));
        vecs.push(cur);
    }
    let tt = vecs.len();
    let mut count = 0;
    let total = tt.pow(2 * s as u32);
    for code in 0..total {
        let mut c = code;
        let mut sum = (0i64, 0i64);
        for slot in 0..2 * s {
            let v = vecs[c % tt];
            c /= tt;
            let sign = if slot < s { 1 } else { -1 };
            sum = (sum.0 + sign * v.0, sum.1 + sign * v.1);
        }
        if sum.0.rem_euclid(n as i64) == 0 && sum.1.rem_euclid(n as i64) == 0 {
            count += 1;
        }
    }
    count
}

#[test]
fn congruence_counts_match_brute_force() {
    let a = fixtures::a2();
    for (k, s) in [(1u32, 1usize), (1, 2), (2, 1), (1, 3)] {
        let n = 5u64.pow(k);
        for u in [(1, 0), (0, 1), (2, 7)] {
            let ctx = PrimePowerModulus::new(5, k).unwrap();
            let lib = count_q(&a, &ctx, &[u.0, u.1], s as u32, &MeetInTheMiddle).unwrap();
            assert_eq!(lib.count, oracle_q(&a, n, u, s), "k={k} s={s} u={u:?}");
        }
    }
}
