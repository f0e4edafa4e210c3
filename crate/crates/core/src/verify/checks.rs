//! Checks tying eigenfunction coefficients to congruence counts, and the
//! reduction of matrix congruences to eigenvalue congruences.

use crate::arith::{self, residue, PrimePowerModulus};
use crate::error::{CatError, Result};
use crate::quantization::HeisenbergIndex;
use crate::spectra::{max_matrix_coefficient, EigenDecomposition};
use crate::symplectic::{u_orbit_matrix, ModMatrix, SymplecticMatrix};

use super::counting::{count_q, CongruenceCounter, Solution};
use super::spectral_data::SpectralData;

#[derive(Debug, Clone, PartialEq)]
pub struct KrReport {
    pub n: u64,
    pub u: Vec<i64>,
    pub s: u32,
    /// Largest `|<T(u) psi, psi>|` over eigenfunctions.
    pub max_coefficient: f64,
    /// The same maximum over basis vectors only.
    pub per_vector_max: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub q: u64,
    pub t: u64,
    pub holds: bool,
}

/// Checks `max |<T(u) psi, psi>|^{2s} <= N^d Q_s(N; u) / T^{2s}` on a
/// computed eigenbasis of `U_N(A)`.
pub fn kr_inequality_check(
    dec: &EigenDecomposition,
    a: &SymplecticMatrix,
    ctx: &PrimePowerModulus,
    u: &[i64],
    s: u32,
    counter: &dyn CongruenceCounter,
) -> Result<KrReport> {
    let q = count_q(a, ctx, u, s, counter)?;
    let (max_coefficient, per_vector_max) = max_matrix_coefficient(dec, &HeisenbergIndex::new(u.to_vec())?)?;
    let lhs = max_coefficient.powi(2 * s as i32);
    let n = ctx.n() as f64;
    let rhs = n.powi(a.d() as i32) * q.count as f64 / (q.t as f64).powi(2 * s as i32);
    Ok(KrReport {
        n: ctx.n(),
        u: u.to_vec(),
        s,
        max_coefficient,
        per_vector_max,
        lhs,
        rhs,
        q: q.count,
        t: q.t,
        holds: lhs <= rhs * (1.0 + 1e-9),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionReport {
    /// `nu_p(det X(u))`.
    pub m: u32,
    /// `p^{k-m}`, or 1 once `m >= k`.
    pub modulus: u64,
    /// `B = sum A^{x_i} - sum A^{y_i} = 0 mod p^{k-m}`.
    pub matrix_ok: bool,
    /// `sum lambda_i^{x_j} = sum lambda_i^{y_j} mod p^{k-m}` for all `i`.
    pub eigen_ok: bool,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.matrix_ok && self.eigen_ok
    }
}

fn power_sum(am: &ModMatrix, xs: &[u64]) -> ModMatrix {
    let mut acc = ModMatrix::zeros(am.dim(), am.modulus());
    for &x in xs {
        acc = acc.add(&am.pow(x));
    }
    acc
}

/// Given a solution of `u (sum A^{x_i} - sum A^{y_i}) = 0 mod p^k`, checks
/// that `B` itself vanishes modulo `p^{k-m}` and so do the eigenvalue sums.
pub fn reduction_check(
    a: &SymplecticMatrix,
    sd: &SpectralData,
    u: &[i64],
    solution: &Solution,
) -> Result<ReductionReport> {
    let p = sd.p();
    let k = sd.k();
    let n = p.pow(k);
    if solution.xs.len() != solution.ys.len() {
        return Err(CatError::NotASolution("sides have different lengths".into()));
    }
    let am = a.reduce_mod(n);
    let b = power_sum(&am, &solution.xs).sub(&power_sum(&am, &solution.ys));
    let uu: Vec<u64> = u.iter().map(|&x| residue(x as i128, n)).collect();
    if b.row_times(&uu).iter().any(|&x| x != 0) {
        return Err(CatError::NotASolution(format!("u B != 0 mod {n} for {solution:?}")));
    }
    let m = u_orbit_matrix(u, a, p)?.m;
    if m >= k {
        return Ok(ReductionReport { m, modulus: 1, matrix_ok: true, eigen_ok: true });
    }
    let modulus = p.pow(k - m);
    let matrix_ok = b.divisible_by(modulus);
    let lambdas = sd.lambdas_mod(k - m)?;
    let eigen_ok = lambdas.iter().all(|&l| {
        let side = |xs: &[u64]| xs.iter().fold(0u64, |acc, &x| arith::add_mod(acc, arith::pow_mod(l, x, modulus), modulus));
        side(&solution.xs) == side(&solution.ys)
    });
    Ok(ReductionReport { m, modulus, matrix_ok, eigen_ok })
}
