//! Complete exponential sums over eigenvalue sequences
//! `x -> a_1 lambda_1^x + ... + a_{2d} lambda_{2d}^x mod p^r`, and the moment
//! identity that turns their `2s`-th power mean into a solution count.

use std::f64::consts::PI;
use std::io::Write;

use crate::arith::{self, divisors, lcm, mul_mod, residue};
use crate::error::{CatError, Result};
use crate::format::fmt_sig12;
use crate::linalg::C64;

use super::counting::{count_lambda_system, CongruenceCounter};
use super::spectral_data::SpectralData;

/// Largest number of coefficient vectors the moment identity sums over.
pub const MOMENT_BUDGET: u64 = 10_000_000;

/// Sums with modulus below this are treated as exact cancellation.
const ZERO_SUM_TOL: f64 = 1e-9;

/// Compensated summation of complex numbers.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: C64,
    comp: C64,
}

impl KahanSum {
    pub fn add(&mut self, x: C64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> C64 {
        self.sum
    }
}

/// Table of `e_m(j)`, `j = 0..m`.
fn roots_of_unity(m: u64) -> Vec<C64> {
    (0..m).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)).collect()
}

/// Values of the sequence `sum_i a_i lambda_i^x mod p^r` for `x` in `xs`.
fn sequence_values(lambdas: &[u64], a: &[u64], m: u64, xs: impl Iterator<Item = u64>) -> Vec<u64> {
    xs.map(|x| {
        lambdas.iter().zip(a).fold(0u64, |acc, (&l, &ai)| {
            arith::add_mod(acc, mul_mod(ai, arith::pow_mod(l, x, m), m), m)
        })
    })
    .collect()
}

fn reduce_coeffs(sd: &SpectralData, a: &[i64], m: u64) -> Result<Vec<u64>> {
    let width = 2 * sd.d();
    if a.len() != width {
        return Err(CatError::DimensionMismatch { expected: width, got: a.len() });
    }
    Ok(a.iter().map(|&x| residue(x as i128, m)).collect())
}

/// Minimal period `t_r` of the sequence modulo `p^r`. The sequence obeys a
/// linear recurrence of order `2d`, so agreement at `2d` consecutive points
/// proves periodicity; candidates are the divisors of the lcm of orders.
pub fn sequence_period(sd: &SpectralData, a: &[i64], r: u32) -> Result<u64> {
    let m = sd.p().pow(r);
    let coeffs = reduce_coeffs(sd, a, m)?;
    let lambdas = sd.lambdas_mod(r)?;
    let l = sd.orders_mod(r)?.into_iter().fold(1, lcm);
    let width = 2 * sd.d() as u64;
    let base = sequence_values(&lambdas, &coeffs, m, 0..width);
    for t in divisors(l) {
        if sequence_values(&lambdas, &coeffs, m, t..t + width) == base {
            return Ok(t);
        }
    }
    unreachable!("the lcm of the orders is always a period")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumRecord {
    pub a: Vec<i64>,
    pub r: u32,
    pub t_r: u64,
    pub range_len: u64,
    pub value: C64,
    /// `log |S| / log t_r`; `None` when `t_r = 1`.
    pub saving: Option<f64>,
}

impl ExpSumRecord {
    pub const CSV_HEADER: &'static str = "r,t_r,abs_S,saving";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.r,
            self.t_r,
            fmt_sig12(self.value.norm()),
            self.saving.map_or_else(|| "undefined".to_string(), fmt_sig12)
        )
    }
}

/// `S_r(a) = sum_{x=1}^{range_len} e_{p^r}(sum_i a_i lambda_i^x)`.
pub fn exp_sum(sd: &SpectralData, a: &[i64], r: u32, range_len: u64) -> Result<ExpSumRecord> {
    let m = sd.p().pow(r);
    let coeffs = reduce_coeffs(sd, a, m)?;
    let lambdas = sd.lambdas_mod(r)?;
    let t_r = sequence_period(sd, a, r)?;
    let table = roots_of_unity(m);
    let mut acc = KahanSum::default();
    for v in sequence_values(&lambdas, &coeffs, m, 1..=range_len) {
        acc.add(table[v as usize]);
    }
    let value = acc.value();
    // A sum that cancels exactly leaves rounding noise; its saving is -inf.
    let modulus = if value.norm() < ZERO_SUM_TOL { 0.0 } else { value.norm() };
    let saving = (t_r > 1).then(|| modulus.ln() / (t_r as f64).ln());
    Ok(ExpSumRecord { a: a.to_vec(), r, t_r, range_len, value, saving })
}

/// `log |S_r(a)| / log t_r` over one full period, for `a` not divisible by
/// `p`.
pub fn saving_exponent(sd: &SpectralData, a: &[i64], r: u32) -> Result<f64> {
    if a.iter().all(|&x| residue(x as i128, sd.p()) == 0) {
        return Err(CatError::CoefficientsDivisibleByP);
    }
    let t_r = sequence_period(sd, a, r)?;
    exp_sum(sd, a, r, t_r)?.saving.ok_or(CatError::TrivialPeriod)
}

/// Result of sweeping every coefficient vector `a mod p^r` with
/// `gcd(a, p) = 1`.
#[derive(Debug, Clone)]
pub struct SavingSweep {
    pub r: u32,
    pub vectors: usize,
    pub max_saving: f64,
    pub argmax: Vec<i64>,
    pub records: Vec<ExpSumRecord>,
    /// `|S| <= t_r` and `t_r | lcm of orders` held throughout.
    pub structural_ok: bool,
}

/// All `2d`-vectors with entries in `0..m`, lexicographic.
fn all_vectors(width: usize, m: u64) -> impl Iterator<Item = Vec<i64>> {
    let total = (m as u128).pow(width as u32) as u64;
    (0..total).map(move |mut code| {
        let mut v = vec![0i64; width];
        for slot in v.iter_mut().rev() {
            *slot = (code % m) as i64;
            code /= m;
        }
        v
    })
}

pub fn saving_sweep(sd: &SpectralData, r: u32) -> Result<SavingSweep> {
    let m = sd.p().pow(r);
    let width = 2 * sd.d();
    let l = sd.orders_mod(r)?.into_iter().fold(1, lcm);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut records = Vec::new();
    let mut structural_ok = true;
    for a in all_vectors(width, m) {
        if a.iter().all(|&x| (x as u64).is_multiple_of(sd.p())) {
            continue;
        }
        let t_r = sequence_period(sd, &a, r)?;
        let rec = exp_sum(sd, &a, r, t_r)?;
        structural_ok &= rec.value.norm() <= t_r as f64 + 1e-9 && l % t_r == 0;
        if let Some(sv) = rec.saving {
            if sv > best.0 {
                best = (sv, a.clone());
            }
        }
        records.push(rec);
    }
    Ok(SavingSweep { r, vectors: records.len(), max_saving: best.0, argmax: best.1, records, structural_ok })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub r: u32,
    pub s: u32,
    pub t: u64,
    /// `sum_a |sum_{x=1}^T e_{p^r}(sum_i a_i lambda_i^x)|^{2s}`.
    pub lhs: f64,
    /// `p^{2dr}` times the eigenvalue-system solution count.
    pub rhs: u128,
    /// `W_j`: contribution of the `a` with `gcd(a, p^r) = p^{r-j}`.
    pub w: Vec<f64>,
}

impl MomentReport {
    /// `lhs` is within `1e-6` relative of an integer equal to `rhs`, and
    /// the class sums add up to `lhs`.
    pub fn matches(&self) -> bool {
        let scale = self.lhs.abs().max(1.0);
        let rounded = self.lhs.round();
        let near_int = (self.lhs - rounded).abs() <= 1e-6 * scale;
        let w_total: f64 = self.w.iter().sum();
        near_int && rounded == self.rhs as f64 && (w_total - self.lhs).abs() <= 1e-6 * scale
    }

    pub fn csv_header(max_r: u32) -> String {
        let mut h = String::from("r,s,T,lhs,rhs,match");
        for j in 0..=max_r {
            h.push_str(&format!(",W_{j}"));
        }
        h
    }

    /// Row padded with empty cells up to `max_r`.
    pub fn csv_row(&self, max_r: u32) -> String {
        let mut row = format!(
            "{},{},{},{},{},{}",
            self.r,
            self.s,
            self.t,
            fmt_sig12(self.lhs),
            self.rhs,
            self.matches()
        );
        for j in 0..=max_r as usize {
            row.push(',');
            if let Some(w) = self.w.get(j) {
                row.push_str(&fmt_sig12(*w));
            }
        }
        row
    }
}

pub fn write_moments_csv(reports: &[MomentReport], mut w: impl Write) -> std::io::Result<()> {
    let max_r = reports.iter().map(|r| r.r).max().unwrap_or(0);
    writeln!(w, "{}", MomentReport::csv_header(max_r))?;
    for r in reports {
        writeln!(w, "{}", r.csv_row(max_r))?;
    }
    Ok(())
}

/// Orthogonality of additive characters: the `2s`-th moment of the sums
/// over all `a mod p^r` equals `p^{2dr}` times the number of solutions of
/// the eigenvalue congruence system.
pub fn moment_identity(
    sd: &SpectralData,
    r: u32,
    s: u32,
    t: u64,
    counter: &dyn CongruenceCounter,
) -> Result<MomentReport> {
    let p = sd.p();
    let m = p.pow(r);
    let width = 2 * sd.d();
    let total = (m as u128).pow(width as u32);
    if total > MOMENT_BUDGET as u128 {
        return Err(CatError::InstanceTooLarge(format!("{total} coefficient vectors exceed {MOMENT_BUDGET}")));
    }
    let lambdas = sd.lambdas_mod(r)?;
    // powers[x][i] = lambda_i^x mod m
    let powers: Vec<Vec<u64>> =
        (1..=t).map(|x| lambdas.iter().map(|&l| arith::pow_mod(l, x, m)).collect()).collect();
    let table = roots_of_unity(m);
    let mut lhs = KahanSum::default();
    let mut w = vec![KahanSum::default(); r as usize + 1];
    for a in all_vectors(width, m) {
        let mut acc = KahanSum::default();
        for pw in &powers {
            let v = pw.iter().zip(&a).fold(0u64, |acc, (&l, &ai)| arith::add_mod(acc, mul_mod(l, ai as u64, m), m));
            acc.add(table[v as usize]);
        }
        let term = C64::new(acc.value().norm_sqr().powi(s as i32), 0.0);
        lhs.add(term);
        let v = a
            .iter()
            .map(|&x| if x == 0 { r } else { arith::valuation(x as i128, p).expect("nonzero").min(r) })
            .min()
            .unwrap_or(r);
        w[(r - v) as usize].add(term);
    }
    let count = count_lambda_system(sd, r, s, t, counter)?;
    let rhs = total * count as u128;
    Ok(MomentReport { r, s, t, lhs: lhs.value().re, rhs, w: w.iter().map(|k| k.value().re).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::verify::counting::MeetInTheMiddle;
    use crate::verify::spectral_data::spectral_data;

    fn sd(k: u32) -> SpectralData {
        spectral_data(&fixtures::a2(), 5, k).unwrap()
    }

    #[test]
    fn period_examples() {
        let sd = sd(3);
        assert_eq!(sequence_period(&sd, &[1, 0], 2).unwrap(), 20);
        assert_eq!(sequence_period(&sd, &[1, 1], 1).unwrap(), 4);
        assert_eq!(sequence_period(&sd, &[0, 0], 3).unwrap(), 1);
    }

    #[test]
    fn period_minimal_and_divides_lcm() {
        let sd = sd(2);
        let m = 25;
        let l = sd.orders_mod(2).unwrap().into_iter().fold(1, lcm);
        let lambdas = sd.lambdas_mod(2).unwrap();
        for a in all_vectors(2, m).step_by(7) {
            let t = sequence_period(&sd, &a, 2).unwrap();
            assert_eq!(l % t, 0);
            let coeffs: Vec<u64> = a.iter().map(|&x| x as u64).collect();
            // brute-force minimal period over a full lcm window
            let seq = sequence_values(&lambdas, &coeffs, m, 0..2 * l);
            let brute = (1..=l).find(|&q| (0..l).all(|x| seq[x as usize] == seq[(x + q) as usize])).unwrap();
            assert_eq!(t, brute);
        }
    }

    #[test]
    fn exp_sum_examples() {
        let sd = sd(2);
        let s = exp_sum(&sd, &[1, 0], 1, 4).unwrap();
        assert!((s.value - C64::new(-1.0, 0.0)).norm() < 1e-15);
        let s = exp_sum(&sd, &[1, 1], 1, 4).unwrap();
        assert!((s.value.re - (2.0 + 2.0 * (4.0 * PI / 5.0).cos())).abs() < 1e-14);
        assert!(s.value.im.abs() < 1e-14);
        let s = exp_sum(&sd, &[0, 0], 2, 17).unwrap();
        assert!((s.value - C64::new(17.0, 0.0)).norm() < 1e-13);
        assert!(exp_sum(&sd, &[1, 0], 3, 4).is_err());
        // e_25 over all 20 units congruent to powers of 12 cancels exactly
        assert_eq!(exp_sum(&sd, &[1, 0], 2, 20).unwrap().saving, Some(f64::NEG_INFINITY));
    }

    #[test]
    fn saving_examples() {
        let sd = sd(1);
        assert!(saving_exponent(&sd, &[1, 0], 1).unwrap().abs() < 1e-15);
        assert_eq!(saving_exponent(&sd, &[0, 0], 1), Err(CatError::CoefficientsDivisibleByP));
        assert_eq!(saving_exponent(&sd, &[5, 10], 1), Err(CatError::CoefficientsDivisibleByP));
    }

    #[test]
    fn moment_examples() {
        let m = MeetInTheMiddle;
        let r = moment_identity(&sd(1), 1, 1, 4, &m).unwrap();
        assert_eq!(r.rhs, 100);
        assert!(r.matches());
        assert_eq!(r.w[0], 16.0);
        let r = moment_identity(&sd(1), 1, 2, 4, &m).unwrap();
        assert_eq!(r.rhs, 900);
        assert!(r.matches());
        assert_eq!(r.w[0], 256.0);
        for s in 1..=2 {
            let r = moment_identity(&sd(2), 2, s, 20, &m).unwrap();
            assert!(r.matches(), "{r:?}");
            assert_eq!(r.w[0], 20f64.powi(2 * s as i32));
        }
    }

    #[test]
    fn moments_csv_pads_rows() {
        let m = MeetInTheMiddle;
        let reports = vec![moment_identity(&sd(2), 1, 1, 4, &m).unwrap(), moment_identity(&sd(2), 2, 1, 20, &m).unwrap()];
        let mut buf = Vec::new();
        write_moments_csv(&reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "r,s,T,lhs,rhs,match,W_0,W_1,W_2");
        assert_eq!(lines[1], "1,1,4,100,100,true,16,84,");
        assert_eq!(lines[2], "2,1,20,12500,12500,true,400,2100,10000");
    }
}
