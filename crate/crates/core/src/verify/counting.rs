//! Counting solutions of additive congruences
//! `v_{x_1} + ... + v_{x_s} = v_{y_1} + ... + v_{y_s}` over a list of
//! residue vectors `v_1, ..., v_T`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::arith::{residue, PrimePowerModulus};
use crate::error::{CatError, Result};
use crate::registry::{Named, Registry};
use crate::symplectic::{matrix_order, SymplecticMatrix};

use super::spectral_data::SpectralData;

/// Largest number of one-sided sums `T^s` a meet-in-the-middle count builds.
pub const MITM_BUDGET: u128 = 100_000_000;
/// Largest number of full tuples `T^{2s}` the naive count walks.
pub const NAIVE_BUDGET: u128 = 10_000_000;

/// A way of counting ordered `2s`-tuples with equal sums.
pub trait CongruenceCounter: Named + Send + Sync {
    fn count(&self, vectors: &[Vec<u64>], modulus: u64, s: u32) -> Result<u64>;
}

fn check_budget(t: usize, exp: u32, budget: u128) -> Result<()> {
    let mut total: u128 = 1;
    for _ in 0..exp {
        total = total.saturating_mul(t as u128);
    }
    if total > budget {
        return Err(CatError::InstanceTooLarge(format!("{t}^{exp} = {total} exceeds {budget}")));
    }
    Ok(())
}

fn add_into(acc: &mut [u64], v: &[u64], m: u64) {
    for (a, &b) in acc.iter_mut().zip(v) {
        *a = ((*a as u128 + b as u128) % m as u128) as u64;
    }
}

/// Walks every ordered `2s`-tuple and compares the two sides directly.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveCounter;

impl Named for NaiveCounter {
    fn name(&self) -> &'static str {
        "naive"
    }
}

impl CongruenceCounter for NaiveCounter {
    fn count(&self, vectors: &[Vec<u64>], modulus: u64, s: u32) -> Result<u64> {
        check_budget(vectors.len(), 2 * s, NAIVE_BUDGET)?;
        let t = vectors.len();
        let width = vectors.first().map_or(0, Vec::len);
        let slots = 2 * s as usize;
        let mut idx = vec![0usize; slots];
        let mut count = 0u64;
        if t == 0 {
            return Ok(0);
        }
        loop {
            let mut left = vec![0u64; width];
            let mut right = vec![0u64; width];
            for (pos, &i) in idx.iter().enumerate() {
                if pos < s as usize {
                    add_into(&mut left, &vectors[i], modulus);
                } else {
                    add_into(&mut right, &vectors[i], modulus);
                }
            }
            if left == right {
                count += 1;
            }
            // odometer increment
            let mut pos = 0;
            loop {
                if pos == slots {
                    return Ok(count);
                }
                idx[pos] += 1;
                if idx[pos] < t {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }
}

/// Tabulates the multiplicity of every one-sided sum and returns the sum
/// of squared multiplicities.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeetInTheMiddle;

impl Named for MeetInTheMiddle {
    fn name(&self) -> &'static str {
        "meet-in-the-middle"
    }
}

impl CongruenceCounter for MeetInTheMiddle {
    fn count(&self, vectors: &[Vec<u64>], modulus: u64, s: u32) -> Result<u64> {
        let table = one_sided_sums(vectors, modulus, s)?;
        Ok(table.values().map(|&m| m * m).sum())
    }
}

fn one_sided_sums(vectors: &[Vec<u64>], modulus: u64, s: u32) -> Result<HashMap<Vec<u64>, u64>> {
    check_budget(vectors.len(), s, MITM_BUDGET)?;
    let width = vectors.first().map_or(0, Vec::len);
    let mut table: HashMap<Vec<u64>, u64> = HashMap::new();
    table.insert(vec![0u64; width], 1);
    for _ in 0..s {
        let mut next: HashMap<Vec<u64>, u64> = HashMap::with_capacity(table.len() * vectors.len());
        for (sum, &mult) in &table {
            for v in vectors {
                let mut k = sum.clone();
                add_into(&mut k, v, modulus);
                *next.entry(k).or_insert(0) += mult;
            }
        }
        table = next;
    }
    Ok(table)
}

/// Registry with `naive` and `meet-in-the-middle`.
pub fn counters() -> &'static Registry<dyn CongruenceCounter> {
    static REG: OnceLock<Registry<dyn CongruenceCounter>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn CongruenceCounter> = Registry::new();
        r.register(Arc::new(NaiveCounter));
        r.register(Arc::new(MeetInTheMiddle));
        r
    })
}

/// An ordered solution: indices `x_1..x_s` and `y_1..y_s`, each in `1..=T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub xs: Vec<u64>,
    pub ys: Vec<u64>,
}

/// Every ordered solution, grouped through the one-sided sums.
pub fn enumerate_solutions(vectors: &[Vec<u64>], modulus: u64, s: u32) -> Result<Vec<Solution>> {
    check_budget(vectors.len(), s, MITM_BUDGET)?;
    let t = vectors.len();
    let width = vectors.first().map_or(0, Vec::len);
    let mut groups: HashMap<Vec<u64>, Vec<Vec<u64>>> = HashMap::new();
    let mut idx = vec![0usize; s as usize];
    loop {
        let mut sum = vec![0u64; width];
        for &i in &idx {
            add_into(&mut sum, &vectors[i], modulus);
        }
        groups.entry(sum).or_default().push(idx.iter().map(|&i| i as u64 + 1).collect());
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                let mut out = Vec::new();
                let mut keys: Vec<&Vec<u64>> = groups.keys().collect();
                keys.sort();
                for key in keys {
                    let g = &groups[key];
                    for xs in g {
                        for ys in g {
                            out.push(Solution { xs: xs.clone(), ys: ys.clone() });
                        }
                    }
                }
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < t {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceCount {
    pub n: u64,
    pub u: Vec<i64>,
    pub s: u32,
    pub t: u64,
    pub count: u64,
    pub method: &'static str,
}

impl CongruenceCount {
    pub const CSV_HEADER: &'static str = "N,u,s,T,Q,method";

    pub fn csv_row(&self) -> String {
        let u: Vec<String> = self.u.iter().map(i64::to_string).collect();
        format!("{},{},{},{},{},{}", self.n, u.join(" "), self.s, self.t, self.count, self.method)
    }
}

impl fmt::Display for CongruenceCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q_{}(N={}; u={:?}) = {} (T = {}, {})", self.s, self.n, self.u, self.count, self.t, self.method)
    }
}

/// The orbit `u A^x mod N`, `x = 1..=T`.
pub fn orbit_vectors(a: &SymplecticMatrix, n: u64, u: &[i64], t: u64) -> Result<Vec<Vec<u64>>> {
    if u.len() != a.dim() {
        return Err(CatError::DimensionMismatch { expected: a.dim(), got: u.len() });
    }
    let am = a.reduce_mod(n);
    let mut cur: Vec<u64> = u.iter().map(|&x| residue(x as i128, n)).collect();
    if cur.iter().all(|&x| x == 0) {
        return Err(CatError::ZeroVector);
    }
    let mut out = Vec::with_capacity(t as usize);
    for _ in 0..t {
        cur = am.row_times(&cur);
        out.push(cur.clone());
    }
    Ok(out)
}

/// `Q_s(N; u)`: ordered solutions of `u (A^{x_1} + ... - A^{y_s}) = 0 mod N`
/// with `1 <= x_i, y_i <= ord(A, N)`.
pub fn count_q(
    a: &SymplecticMatrix,
    ctx: &PrimePowerModulus,
    u: &[i64],
    s: u32,
    counter: &dyn CongruenceCounter,
) -> Result<CongruenceCount> {
    let t = matrix_order(a, ctx.p(), ctx.k())?;
    let vectors = orbit_vectors(a, ctx.n(), u, t)?;
    let count = counter.count(&vectors, ctx.n(), s)?;
    Ok(CongruenceCount { n: ctx.n(), u: u.to_vec(), s, t, count, method: counter.name() })
}

/// The vectors `(lambda_1^x, ..., lambda_{2d}^x) mod p^r`, `x = 1..=T`.
pub fn lambda_vectors(sd: &SpectralData, r: u32, t: u64) -> Result<Vec<Vec<u64>>> {
    let lambdas = sd.lambdas_mod(r)?;
    let m = sd.p().pow(r);
    let mut cur = vec![1 % m; lambdas.len()];
    let mut out = Vec::with_capacity(t as usize);
    for _ in 0..t {
        for (c, &l) in cur.iter_mut().zip(&lambdas) {
            *c = crate::arith::mul_mod(*c, l, m);
        }
        out.push(cur.clone());
    }
    Ok(out)
}

/// Ordered solutions of the simultaneous eigenvalue congruences
/// `sum lambda_i^{x_j} = sum lambda_i^{y_j} mod p^r` for all `i`.
pub fn count_lambda_system(
    sd: &SpectralData,
    r: u32,
    s: u32,
    t: u64,
    counter: &dyn CongruenceCounter,
) -> Result<u64> {
    let vectors = lambda_vectors(sd, r, t)?;
    counter.count(&vectors, sd.p().pow(r), s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::verify::spectral_data::spectral_data;

    fn ctx(p: u64, k: u32) -> PrimePowerModulus {
        PrimePowerModulus::new(p, k).unwrap()
    }

    #[test]
    fn q_examples() {
        let a = fixtures::a2();
        let mitm = MeetInTheMiddle;
        assert_eq!(count_q(&a, &ctx(5, 1), &[1, 0], 1, &mitm).unwrap().count, 4);
        assert_eq!(count_q(&a, &ctx(5, 1), &[1, 0], 2, &mitm).unwrap().count, 36);
        assert_eq!(count_q(&a, &ctx(5, 2), &[1, 0], 1, &mitm).unwrap().count, 20);
        assert_eq!(count_q(&a, &ctx(5, 2), &[1, 0], 2, &mitm).unwrap().count, 2100);
        assert_eq!(count_q(&a, &ctx(5, 1), &[0, 0], 1, &mitm), Err(CatError::ZeroVector));
        assert_eq!(count_q(&a, &ctx(5, 1), &[5, 10], 1, &mitm), Err(CatError::ZeroVector));
    }

    #[test]
    fn orbit_vectors_example() {
        let v = orbit_vectors(&fixtures::a2(), 5, &[1, 0], 4).unwrap();
        assert_eq!(v, vec![vec![1, 4], vec![4, 0], vec![4, 1], vec![1, 0]]);
    }

    #[test]
    fn counters_agree() {
        let a = fixtures::a2();
        for (k, s) in [(1u32, 1u32), (1, 2), (2, 1), (1, 3)] {
            for u in [[1i64, 0], [2, 3], [0, 1]] {
                let n = count_q(&a, &ctx(5, k), &u, s, &NaiveCounter).unwrap();
                let m = count_q(&a, &ctx(5, k), &u, s, &MeetInTheMiddle).unwrap();
                assert_eq!(n.count, m.count);
                assert_eq!(n.method, "naive");
            }
        }
    }

    #[test]
    fn count_at_least_diagonal() {
        // permutations of (x_1..x_s) always solve; for s = 2 there are 2T^2 - T
        let a = fixtures::a1();
        let c = count_q(&a, &ctx(7, 1), &[1, 0], 2, &MeetInTheMiddle).unwrap();
        assert!(c.count >= 2 * c.t * c.t - c.t);
    }

    #[test]
    fn lambda_system_examples() {
        let sd = spectral_data(&fixtures::a2(), 5, 2).unwrap();
        let m = MeetInTheMiddle;
        assert_eq!(count_lambda_system(&sd, 1, 1, 4, &m).unwrap(), 4);
        assert_eq!(count_lambda_system(&sd, 1, 2, 4, &m).unwrap(), 36);
        assert_eq!(count_lambda_system(&sd, 2, 1, 20, &m).unwrap(), 20);
        assert_eq!(count_lambda_system(&sd, 2, 1, 20, &NaiveCounter).unwrap(), 20);
    }

    #[test]
    fn enumeration_matches_count() {
        let a = fixtures::a2();
        let t = matrix_order(&a, 5, 2).unwrap();
        let v = orbit_vectors(&a, 25, &[1, 0], t).unwrap();
        let sols = enumerate_solutions(&v, 25, 2).unwrap();
        assert_eq!(sols.len(), 2100);
        assert!(sols.iter().all(|s| s.xs.iter().chain(&s.ys).all(|&x| (1..=t).contains(&x))));
    }

    #[test]
    fn budgets_and_registry() {
        let v = vec![vec![1u64]; 1000];
        assert!(matches!(NaiveCounter.count(&v, 7, 3), Err(CatError::InstanceTooLarge(_))));
        assert_eq!(counters().names(), vec!["meet-in-the-middle", "naive"]);
        assert!(counters().get("fft").is_err());
    }
}
