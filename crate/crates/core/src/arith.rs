//! Exact arithmetic over `Z/p^k Z`.
//!
//! Residues are canonical `u64` values in `[0, N)`; products are formed in
//! `u128`, which is exact because moduli are capped below `2^63` (so that
//! `2N^2` fits in 128 bits).

use crate::error::{CatError, Result};
use crate::poly::{self, IntPoly};

/// Largest admissible modulus. `2 * MAX_MODULUS^2` fits in a `u128`.
pub const MAX_MODULUS: u64 = 1 << 63;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

/// Canonical residue of a signed integer.
#[inline]
pub fn residue(z: i128, m: u64) -> u64 {
    z.rem_euclid(m as i128) as u64
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The first `count` primes, ascending.
pub fn first_primes(count: usize) -> Vec<u64> {
    (2u64..).filter(|&n| is_prime(n)).take(count).collect()
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q.saturating_mul(q) <= n {
        if n.is_multiple_of(q) {
            let mut e = 0;
            while n.is_multiple_of(q) {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (q, e) in factorize(n) {
        let current = divs.clone();
        let mut pw = 1u64;
        for _ in 0..e {
            pw *= q;
            divs.extend(current.iter().map(|d| d * pw));
        }
    }
    divs.sort_unstable();
    divs
}

/// Largest `e` with `p^e | z`.
pub fn valuation(z: i128, p: u64) -> Result<u32> {
    if z == 0 {
        return Err(CatError::ValuationOfZero);
    }
    let p = p as i128;
    let mut z = z;
    let mut e = 0;
    while z % p == 0 {
        z /= p;
        e += 1;
    }
    Ok(e)
}

/// `N = p^k` for an odd prime `p`, stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimePowerModulus {
    p: u64,
    k: u32,
    n: u64,
}

impl PrimePowerModulus {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(CatError::NotPrime(p));
        }
        if p == 2 {
            return Err(CatError::EvenModulus);
        }
        if k == 0 {
            return Err(CatError::PrecisionExceeded { r: 0, k: 0 });
        }
        let n = p
            .checked_pow(k)
            .filter(|&n| n <= MAX_MODULUS)
            .ok_or(CatError::ModulusTooLarge { p, k })?;
        Ok(Self { p, k, n })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// The modulus `N = p^k`.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// The modulus `p^r` for `r <= k`.
    pub fn power(&self, r: u32) -> u64 {
        self.p.pow(r)
    }
}

/// Largest exponent `k` with `p^k <= MAX_MODULUS`.
pub fn max_exponent(p: u64) -> u32 {
    let mut k = 0;
    let mut n: u64 = 1;
    while let Some(next) = n.checked_mul(p).filter(|&x| x <= MAX_MODULUS) {
        n = next;
        k += 1;
    }
    k
}

/// Multiplicative order of `lambda` modulo the prime `p`, found among the
/// divisors of `p - 1`.
pub fn order_mod_prime(lambda: i128, p: u64) -> Result<u64> {
    let l = residue(lambda, p);
    if l == 0 {
        return Err(CatError::NotAUnit(lambda, p));
    }
    Ok(divisors(p - 1)
        .into_iter()
        .find(|&t| pow_mod(l, t, p) == 1)
        .expect("Fermat"))
}

/// `gamma = nu_p(lambda^ord(lambda, p) - 1)` for the integer `lambda`.
///
/// For `lambda = +-1` the difference vanishes and no finite `gamma` exists.
pub fn korobov_gamma(lambda: i128, p: u64) -> Result<u32> {
    let o = order_mod_prime(lambda, p)?;
    let kmax = max_exponent(p);
    let m = p.pow(kmax);
    let y = pow_mod(residue(lambda, m), o, m);
    let diff = (y as i128 - 1).rem_euclid(m as i128);
    if diff == 0 {
        if lambda == 1 || lambda == -1 {
            return Err(CatError::GammaUnbounded(lambda));
        }
        return Err(CatError::Overflow("korobov_gamma"));
    }
    valuation(diff, p)
}

/// Minimal `t >= 1` with `lambda^t = 1 mod p^k`.
///
/// Uses Korobov's growth law `ord(lambda, p^k) = ord(lambda, p) p^(k - gamma)`
/// whenever `k >= gamma`; below that threshold the order is found by a divisor
/// search over `phi(p^k)`.
pub fn mult_order(lambda: i128, p: u64, k: u32) -> Result<u64> {
    let modulus = PrimePowerModulus::new(p, k)?;
    let n = modulus.n();
    let o = order_mod_prime(lambda, p)?;
    let l = residue(lambda, n);
    let y = pow_mod(l, o, n);
    if y != 1 {
        // gamma < k, read off modulo p^k
        let gamma = valuation(y as i128 - 1, p)?;
        return Ok(o * p.pow(k - gamma));
    }
    Ok(order_by_divisor_search(l, n, (p - 1) * p.pow(k - 1)))
}

/// Smallest divisor `t` of `multiple` with `l^t = 1 mod n`.
pub fn order_by_divisor_search(l: u64, n: u64, multiple: u64) -> u64 {
    divisors(multiple)
        .into_iter()
        .find(|&t| pow_mod(l, t, n) == 1)
        .expect("multiple is a known exponent of the group")
}

/// Order by stepping through powers; used as an oracle for small moduli.
pub fn mult_order_brute(lambda: i128, n: u64) -> Result<u64> {
    let l = residue(lambda, n);
    if gcd(l, n) != 1 {
        return Err(CatError::NotAUnit(lambda, n));
    }
    let mut t = 1u64;
    let mut y = l;
    while y != 1 % n {
        y = mul_mod(y, l, n);
        t += 1;
    }
    Ok(t)
}

/// Roots of `f` modulo `p` by exhaustive evaluation (`p` is small in scope).
pub fn roots_mod_prime(f: &IntPoly, p: u64) -> Vec<u64> {
    (0..p).filter(|&x| f.eval_mod(x, p) == 0).collect()
}

/// Lifts the `deg f` simple roots of `f` modulo `p` to roots modulo `p^k`
/// by Newton iteration, doubling the precision each step. The output is
/// ordered by the underlying root modulo `p`.
pub fn hensel_lift_roots(f: &IntPoly, p: u64, k: u32) -> Result<Vec<u64>> {
    let modulus = PrimePowerModulus::new(p, k)?;
    if residue(f.leading(), p) == 0 {
        return Err(CatError::PrimeNotAdmissible(format!("{p} divides the leading coefficient")));
    }
    let roots = roots_mod_prime(f, p);
    if roots.len() != f.degree() {
        return Err(CatError::PrimeNotAdmissible(format!(
            "{f} has {} roots modulo {p}, expected {}",
            roots.len(),
            f.degree()
        )));
    }
    let df = f.derivative();
    if roots.iter().any(|&r| poly::eval_mod(&df, r, p) == 0) {
        return Err(CatError::PrimeNotAdmissible(format!("{f} has a repeated root modulo {p}")));
    }
    let mut lifted = Vec::with_capacity(roots.len());
    for r0 in roots {
        let mut r = r0;
        let mut e = 1u32;
        while e < k {
            e = (2 * e).min(k);
            let m = p.pow(e);
            let fr = f.eval_mod(r, m);
            let dfr = poly::eval_mod(&df, r, m);
            let inv = inv_mod(dfr, m).expect("simple root: f'(r) is a unit");
            r = (r as u128 + m as u128 - mul_mod(fr, inv, m) as u128) as u64 % m;
        }
        lifted.push(r % modulus.n());
    }
    Ok(lifted)
}

/// True iff `f` is squarefree modulo `p` and divides `X^p - X` there.
pub fn splits_completely(f: &IntPoly, p: u64) -> bool {
    let fp = f.reduce_mod(p);
    if fp.len() != f.degree() + 1 {
        return false;
    }
    let fp = poly::fp_make_monic(&fp, p);
    let df = poly::fp_derivative(&fp, p);
    if df.is_empty() || poly::fp_gcd(&fp, &df, p).len() != 1 {
        return false;
    }
    let xp = poly::fp_frobenius_power(1, &fp, p);
    let x = poly::fp_rem(&[0, 1], &fp, p);
    poly::fp_sub(&xp, &x, p).is_empty()
}

/// `disc(f) = (-1)^(n(n-1)/2) Res(f, f') / lc(f)`.
pub fn poly_discriminant(f: &IntPoly) -> Result<i128> {
    let n = f.degree();
    if n < 2 {
        return Err(CatError::InvalidPolynomial("discriminant needs degree >= 2".into()));
    }
    let a = f.to_big();
    let mut d: Vec<num_bigint::BigInt> = f.derivative().into_iter().map(Into::into).collect();
    d.resize(n, num_bigint::BigInt::from(0));
    let res = poly::resultant(&a, &d);
    let mut disc = res / num_bigint::BigInt::from(f.leading());
    if (n * (n - 1) / 2) % 2 == 1 {
        disc = -disc;
    }
    poly::big_to_i128(&disc).ok_or(CatError::Overflow("poly_discriminant"))
}
