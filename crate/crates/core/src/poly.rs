//! Integer polynomials and the handful of polynomial algorithms the rest of
//! the crate needs: arithmetic over `F_p`, exact resultants, and gcds over
//! the rationals.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{mul_mod, pow_mod};
use crate::error::{CatError, Result};

/// Integer polynomial, lowest degree coefficient first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<i128>,
}

impl IntPoly {
    /// Builds a polynomial of degree at least one. Trailing zero coefficients
    /// are stripped so that the leading coefficient is nonzero.
    pub fn new(mut coeffs: Vec<i128>) -> Result<Self> {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(CatError::InvalidPolynomial("degree must be at least 1".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> i128 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    pub fn derivative(&self) -> Vec<i128> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as i128)
            .collect()
    }

    /// Value at `x` modulo `m`, Horner's rule on canonical residues.
    pub fn eval_mod(&self, x: u64, m: u64) -> u64 {
        eval_mod(&self.coeffs, x, m)
    }

    /// Exact value at an integer point; `None` on overflow.
    pub fn eval_checked(&self, x: i128) -> Option<i128> {
        let mut acc: i128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc.checked_mul(x)?.checked_add(c)?;
        }
        Some(acc)
    }

    /// Coefficients reduced into `[0, p)`.
    pub fn reduce_mod(&self, p: u64) -> Vec<u64> {
        let mut v: Vec<u64> = self.coeffs.iter().map(|&c| reduce(c, p)).collect();
        trim(&mut v);
        v
    }

    pub fn to_big(&self) -> Vec<BigInt> {
        self.coeffs.iter().map(|&c| BigInt::from(c)).collect()
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.unsigned_abs();
            match (i, a) {
                (0, _) => write!(f, "{a}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "{a}x")?,
                (_, 1) => write!(f, "x^{i}")?,
                _ => write!(f, "{a}x^{i}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

pub(crate) fn reduce(c: i128, m: u64) -> u64 {
    c.rem_euclid(m as i128) as u64
}

pub(crate) fn eval_mod(coeffs: &[i128], x: u64, m: u64) -> u64 {
    let mut acc = 0u64;
    for &c in coeffs.iter().rev() {
        acc = (mul_mod(acc, x, m) + reduce(c, m)) % m;
    }
    acc
}

// ---------------------------------------------------------------------------
// Polynomials over F_p (coefficient vectors of canonical residues).

pub(crate) fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn inv_mod_p(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

pub(crate) fn fp_make_monic(f: &[u64], p: u64) -> Vec<u64> {
    let lc = *f.last().expect("nonzero polynomial");
    let inv = inv_mod_p(lc, p);
    f.iter().map(|&c| mul_mod(c, inv, p)).collect()
}

pub(crate) fn fp_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out.push((x + p - y) % p);
    }
    trim(&mut out);
    out
}

pub(crate) fn fp_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    trim(&mut out);
    out
}

/// Remainder of `a` modulo a nonzero `m`.
pub(crate) fn fp_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let dm = m.len() - 1;
    let inv = inv_mod_p(*m.last().unwrap(), p);
    while r.len() > dm {
        let top = r.len() - 1;
        let q = mul_mod(r[top], inv, p);
        let shift = top - dm;
        for (i, &c) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - mul_mod(q, c, p)) % p;
        }
        trim(&mut r);
    }
    r
}

pub(crate) fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = fp_rem(&x, &y, p);
        x = y;
        y = r;
    }
    if x.is_empty() {
        x
    } else {
        fp_make_monic(&x, p)
    }
}

/// `base^e mod (m, p)` by square-and-multiply, for `e` given as a `u128`.
pub(crate) fn fp_powmod(base: &[u64], mut e: u128, m: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut b = fp_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            result = fp_rem(&fp_mul(&result, &b, p), m, p);
        }
        b = fp_rem(&fp_mul(&b, &b, p), m, p);
        e >>= 1;
    }
    fp_rem(&result, m, p)
}

/// `X^(p^j) mod f` computed by repeated `p`-th powering.
pub(crate) fn fp_frobenius_power(j: usize, f: &[u64], p: u64) -> Vec<u64> {
    let mut x = fp_rem(&[0, 1], f, p);
    for _ in 0..j {
        x = fp_powmod(&x, p as u128, f, p);
    }
    x
}

pub(crate) fn fp_derivative(f: &[u64], p: u64) -> Vec<u64> {
    let mut d: Vec<u64> = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| mul_mod(c, i as u64 % p, p))
        .collect();
    trim(&mut d);
    d
}

/// Rabin's irreducibility test for a polynomial over `F_p` whose leading
/// coefficient is a unit.
pub(crate) fn fp_is_irreducible(f: &[u64], p: u64) -> bool {
    let mut f = f.to_vec();
    trim(&mut f);
    if f.len() < 2 {
        return false;
    }
    let f = fp_make_monic(&f, p);
    let n = f.len() - 1;
    if n == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    let xn = fp_frobenius_power(n, &f, p);
    if !fp_sub(&xn, &fp_rem(&x, &f, p), p).is_empty() {
        return false;
    }
    for q in prime_factors(n as u64) {
        let xq = fp_frobenius_power(n / q as usize, &f, p);
        let g = fp_gcd(&fp_sub(&xq, &x, p), &f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            out.push(q);
            while n.is_multiple_of(q) {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// ---------------------------------------------------------------------------
// Exact arithmetic over Z and Q.

/// Determinant of an integer matrix by fraction-free Bareiss elimination.
pub(crate) fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Resultant of two integer polynomials given with *formal* degrees
/// `a.len() - 1` and `b.len() - 1` (leading zeros are allowed).
pub(crate) fn resultant(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let m = a.len() - 1;
    let n = b.len() - 1;
    let size = m + n;
    if size == 0 {
        return BigInt::one();
    }
    let mut s = vec![vec![BigInt::zero(); size]; size];
    // Sylvester rows: highest degree first.
    for r in 0..n {
        for (i, c) in a.iter().rev().enumerate() {
            s[r][r + i] = c.clone();
        }
    }
    for r in 0..m {
        for (i, c) in b.iter().rev().enumerate() {
            s[n + r][r + i] = c.clone();
        }
    }
    bareiss_det(s)
}

/// Polynomial with rational coefficients, lowest degree first, trimmed.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct QPoly(pub Vec<BigRational>);

impl QPoly {
    pub fn from_ints(c: &[BigInt]) -> Self {
        let mut p = QPoly(c.iter().map(|x| BigRational::from_integer(x.clone())).collect());
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn rem(&self, m: &QPoly) -> QPoly {
        let mut r = self.clone();
        let dm = m.0.len() - 1;
        let lc = m.0.last().unwrap().clone();
        while !r.is_zero() && r.0.len() > dm {
            let top = r.0.len() - 1;
            let q = &r.0[top] / &lc;
            let shift = top - dm;
            for (i, c) in m.0.iter().enumerate() {
                let v = &r.0[shift + i] - &q * c;
                r.0[shift + i] = v;
            }
            r.trim();
        }
        r
    }

    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }
}

/// Integer coefficient vectors (trimmed) of the cyclotomic polynomials
/// `Phi_1 ..= Phi_max`; index 0 is unused.
pub(crate) fn cyclotomic_table(max: usize) -> Vec<Vec<BigInt>> {
    let mut table: Vec<Vec<BigInt>> = vec![Vec::new(); max + 1];
    for n in 1..=max {
        // x^n - 1
        let mut num = vec![BigInt::zero(); n + 1];
        num[0] = -BigInt::one();
        num[n] = BigInt::one();
        for (d, phi) in table.iter().enumerate().take(n).skip(1) {
            if n % d == 0 {
                num = exact_div_monic(&num, phi);
            }
        }
        table[n] = num;
    }
    table
}

/// Quotient of `a` by a monic divisor `m`; the division must be exact.
pub(crate) fn exact_div_monic(a: &[BigInt], m: &[BigInt]) -> Vec<BigInt> {
    let dm = m.len() - 1;
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - dm];
    for top in (dm..a.len()).rev() {
        let c = r[top].clone();
        q[top - dm] = c.clone();
        for (i, mc) in m.iter().enumerate() {
            r[top - dm + i] -= &c * mc;
        }
    }
    debug_assert!(r.iter().all(|c| c.is_zero()));
    q
}

/// Interpolates integer-valued samples `values[i] = g(i)` for `i = 0..=deg`
/// back to coefficients (lowest first) using Newton divided differences.
pub(crate) fn interpolate_integer_points(values: &[BigInt]) -> Vec<BigRational> {
    let n = values.len();
    let mut dd: Vec<BigRational> = values.iter().map(|v| BigRational::from_integer(v.clone())).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            let denom = BigRational::from_integer(BigInt::from(level as i64));
            dd[i] = (&dd[i] - &dd[i - 1]) / denom;
        }
    }
    // Horner on the Newton form: sum dd[i] prod_{j<i} (x - j).
    let mut poly: Vec<BigRational> = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        // poly = poly * (x - i) + dd[i]
        let mut next = vec![BigRational::zero(); n];
        for (j, c) in poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if j + 1 < n {
                next[j + 1] += c.clone();
            }
            next[j] -= c * BigRational::from_integer(BigInt::from(i as i64));
        }
        next[0] += dd[i].clone();
        poly = next;
    }
    poly
}

pub(crate) fn rational_to_int(r: &BigRational) -> Option<BigInt> {
    if r.is_integer() {
        Some(r.to_integer())
    } else {
        None
    }
}

pub(crate) fn big_to_i128(b: &BigInt) -> Option<i128> {
    b.to_i128()
}

pub(crate) fn big_abs_divisors_small(c: &BigInt, cap: u64) -> Option<Vec<u64>> {
    let a = c.abs().to_u64()?;
    if a == 0 || a > cap {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= a {
        if a % d == 0 {
            out.push(d);
            if d != a / d {
                out.push(a / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn display_matches_conventional_form() {
        let f = IntPoly::new(vec![1, -10, 1]).unwrap();
        assert_eq!(f.to_string(), "x^2 - 10x + 1");
        let g = IntPoly::new(vec![0, 1]).unwrap();
        assert_eq!(g.to_string(), "x");
    }

    #[test]
    fn rejects_constants() {
        assert!(IntPoly::new(vec![3, 0, 0]).is_err());
    }

    #[test]
    fn resultant_of_linear_factors() {
        // Res(x - 2, x - 5) = 2 - 5 = -3 for monic linear polynomials.
        assert_eq!(resultant(&big(&[-2, 1]), &big(&[-5, 1])), BigInt::from(-3));
        // Res(x^2 - 10x + 1, 2x - 10) = -96 relates to the discriminant.
        assert_eq!(resultant(&big(&[1, -10, 1]), &big(&[-10, 2])), BigInt::from(-96));
    }

    #[test]
    fn cyclotomics_are_right() {
        let t = cyclotomic_table(12);
        assert_eq!(t[1], big(&[-1, 1]));
        assert_eq!(t[4], big(&[1, 0, 1]));
        assert_eq!(t[6], big(&[1, -1, 1]));
        assert_eq!(t[12], big(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn interpolation_recovers_cubic() {
        // g(y) = 2y^3 - y + 7
        let vals: Vec<BigInt> = (0..4).map(|y: i64| BigInt::from(2 * y * y * y - y + 7)).collect();
        let c = interpolate_integer_points(&vals);
        let ints: Vec<BigInt> = c.iter().map(|r| rational_to_int(r).unwrap()).collect();
        assert_eq!(ints, big(&[7, -1, 0, 2]));
    }

    #[test]
    fn rabin_test_small_cases() {
        // x^2 + 1 irreducible mod 3, reducible mod 5.
        assert!(fp_is_irreducible(&[1, 0, 1], 3));
        assert!(!fp_is_irreducible(&[1, 0, 1], 5));
        // x^2 - 10x + 1 = x^2 + 4x + 1 mod 7 is irreducible (96 is a non-residue).
        assert!(fp_is_irreducible(&[1, 4, 1], 7));
    }

    #[test]
    fn qpoly_gcd_detects_common_factor() {
        // (x - 1)(x + 2) and (x - 1)(x - 3)
        let a = QPoly::from_ints(&big(&[-2, 1, 1]));
        let b = QPoly::from_ints(&big(&[3, -4, 1]));
        assert_eq!(a.gcd(&b).degree(), Some(1));
    }
}
