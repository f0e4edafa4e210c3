//! The classical map: validation of an integer symplectic matrix, its
//! characteristic polynomial, good primes, orders modulo prime powers and
//! orbit matrices `X(u)` with rows `u, uA, ..., uA^(2d-1)`.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, lcm, mul_mod, residue, PrimePowerModulus};
use crate::error::{CatError, Result};
use crate::poly::{self, IntPoly, QPoly};

/// Number of small primes searched for an irreducibility witness.
pub const IRREDUCIBILITY_PRIMES: usize = 25;

/// Matrix orders are cross-checked by direct powering up to this modulus.
pub const DIRECT_ORDER_CHECK_MAX: u64 = 10_000;

/// A `2d x 2d` integer matrix, row-major. Construction only checks the
/// shape; see [`validate_matrix`] for the symplectic conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticMatrix {
    d: usize,
    entries: Vec<i64>,
}

/// On-disk form: `{"d": <int>, "rows": [[int, ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub d: usize,
    pub rows: Vec<Vec<i64>>,
}

impl SymplecticMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(CatError::InvalidMatrix("matrix must be square and non-empty".into()));
        }
        if n % 2 == 1 {
            return Err(CatError::InvalidMatrix(format!("dimension {n} is odd")));
        }
        Ok(Self { d: n / 2, entries: rows.iter().flatten().copied().collect() })
    }

    pub fn identity(d: usize) -> Self {
        let n = 2 * d;
        let rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        Self::from_rows(&rows).expect("identity is square and even")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MatrixFile = serde_json::from_str(text).map_err(|e| CatError::Parse(e.to_string()))?;
        let m = Self::from_rows(&file.rows)?;
        if m.d != file.d {
            return Err(CatError::InvalidMatrix(format!(
                "declared d = {} but rows describe d = {}",
                file.d, m.d
            )));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixFile { d: self.d, rows: self.rows() }).expect("serializable")
    }

    /// Half-dimension `d`.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Full dimension `2d`.
    pub fn dim(&self) -> usize {
        2 * self.d
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim() + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.dim()).map(<[i64]>::to_vec).collect()
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    /// Row vector times matrix over the integers.
    pub fn row_times(&self, u: &[i64]) -> Result<Vec<i64>> {
        let n = self.dim();
        if u.len() != n {
            return Err(CatError::DimensionMismatch { expected: n, got: u.len() });
        }
        (0..n)
            .map(|j| {
                let mut acc: i128 = 0;
                for (i, &ui) in u.iter().enumerate() {
                    acc += ui as i128 * self.get(i, j) as i128;
                }
                i64::try_from(acc).map_err(|_| CatError::Overflow("row_times"))
            })
            .collect()
    }

    pub fn mul(&self, other: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        let n = self.dim();
        let mut rows = vec![vec![0i64; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                let mut acc: i128 = 0;
                for k in 0..n {
                    acc += self.get(i, k) as i128 * other.get(k, j) as i128;
                }
                *out = i64::try_from(acc).map_err(|_| CatError::Overflow("matrix product"))?;
            }
        }
        Self::from_rows(&rows)
    }

    fn to_i128(&self) -> Vec<Vec<i128>> {
        self.rows().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect()
    }

    pub fn reduce_mod(&self, n: u64) -> ModMatrix {
        ModMatrix {
            dim: self.dim(),
            n,
            entries: self.entries.iter().map(|&x| residue(x as i128, n)).collect(),
        }
    }

    pub fn determinant(&self) -> i128 {
        let m: Vec<Vec<BigInt>> =
            self.rows().into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
        poly::big_to_i128(&poly::bareiss_det(m)).expect("determinant of a small integer matrix")
    }
}

impl fmt::Display for SymplecticMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

/// Square matrix over `Z/NZ`, row-major canonical residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModMatrix {
    dim: usize,
    n: u64,
    entries: Vec<u64>,
}

impl ModMatrix {
    pub fn zeros(dim: usize, n: u64) -> Self {
        Self { dim, n, entries: vec![0; dim * dim] }
    }

    pub fn identity(dim: usize, n: u64) -> Self {
        let mut entries = vec![0u64; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1 % n;
        }
        Self { dim, n, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.dim + j]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim, self.n)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &ModMatrix) -> ModMatrix {
        let d = self.dim;
        let n = self.n;
        let mut entries = vec![0u64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0u128;
                for k in 0..d {
                    acc += mul_mod(self.get(i, k), other.get(k, j), n) as u128;
                }
                entries[i * d + j] = (acc % n as u128) as u64;
            }
        }
        ModMatrix { dim: d, n, entries }
    }

    pub fn add(&self, other: &ModMatrix) -> ModMatrix {
        let n = self.n;
        ModMatrix {
            dim: self.dim,
            n,
            entries: self.entries.iter().zip(&other.entries).map(|(&a, &b)| arith::add_mod(a, b, n)).collect(),
        }
    }

    pub fn sub(&self, other: &ModMatrix) -> ModMatrix {
        let n = self.n;
        ModMatrix {
            dim: self.dim,
            n,
            entries: self.entries.iter().zip(&other.entries).map(|(&a, &b)| arith::add_mod(a, n - b, n)).collect(),
        }
    }

    pub fn pow(&self, mut e: u64) -> ModMatrix {
        let mut acc = Self::identity(self.dim, self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Row vector `u` (canonical residues) times this matrix.
    pub fn row_times(&self, u: &[u64]) -> Vec<u64> {
        let n = self.n;
        (0..self.dim)
            .map(|j| {
                let mut acc = 0u128;
                for (i, &ui) in u.iter().enumerate() {
                    acc += mul_mod(ui, self.get(i, j), n) as u128;
                }
                (acc % n as u128) as u64
            })
            .collect()
    }

    /// Reduction to a smaller modulus `m | N`.
    pub fn reduce(&self, m: u64) -> ModMatrix {
        ModMatrix { dim: self.dim, n: m, entries: self.entries.iter().map(|&x| x % m).collect() }
    }

    /// True when every entry is divisible by `m`.
    pub fn divisible_by(&self, m: u64) -> bool {
        self.entries.iter().all(|&x| x % m == 0)
    }
}

/// Three-valued outcome of a check that may not be decidable cheaply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Proved,
    Refuted,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Proved => "proved",
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub symplectic: bool,
    pub parity_ok: bool,
    pub irreducible: Verdict,
    pub root_of_unity_free: Verdict,
    pub details: Vec<String>,
}

impl ValidationReport {
    /// All four checks passed outright.
    pub fn admitted(&self) -> bool {
        self.admitted_with(false)
    }

    /// As [`admitted`](Self::admitted), optionally accepting an inconclusive
    /// irreducibility verdict.
    pub fn admitted_with(&self, assume_irreducible: bool) -> bool {
        let irreducible_ok = match self.irreducible {
            Verdict::Proved => true,
            Verdict::Inconclusive => assume_irreducible,
            Verdict::Refuted => false,
        };
        self.symplectic && self.parity_ok && irreducible_ok && self.root_of_unity_free == Verdict::Proved
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yn = |b: bool| if b { "yes" } else { "no" };
        writeln!(f, "{:<20} {}", "symplectic", yn(self.symplectic))?;
        writeln!(f, "{:<20} {}", "parity (A = I mod 2)", yn(self.parity_ok))?;
        writeln!(f, "{:<20} {}", "irreducible", self.irreducible)?;
        writeln!(f, "{:<20} {}", "root-of-unity free", self.root_of_unity_free)?;
        for d in &self.details {
            writeln!(f, "  - {d}")?;
        }
        Ok(())
    }
}

/// Characteristic polynomial `det(xI - A)` by exact Faddeev-LeVerrier.
pub fn char_poly(a: &SymplecticMatrix) -> IntPoly {
    char_poly_i128(&a.to_i128()).expect("characteristic polynomial of a small integer matrix")
}

fn char_poly_i128(a: &[Vec<i128>]) -> Result<IntPoly> {
    let n = a.len();
    let ov = || CatError::Overflow("char_poly");
    // coefficients c[0..=n], c[n] = 1
    let mut c = vec![0i128; n + 1];
    c[n] = 1;
    let mut m = vec![vec![0i128; n]; n]; // M_0 = 0
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0i128; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: i128 = 0;
                for l in 0..n {
                    acc = acc.checked_add(a[i][l].checked_mul(m[l][j]).ok_or_else(ov)?).ok_or_else(ov)?;
                }
                next[i][j] = acc;
            }
            next[i][i] = next[i][i].checked_add(c[n - k + 1]).ok_or_else(ov)?;
        }
        m = next;
        // c_{n-k} = -tr(A M_k) / k
        let mut tr: i128 = 0;
        for i in 0..n {
            for l in 0..n {
                tr = tr.checked_add(a[i][l].checked_mul(m[l][i]).ok_or_else(ov)?).ok_or_else(ov)?;
            }
        }
        debug_assert_eq!(tr % k as i128, 0);
        c[n - k] = -tr / k as i128;
    }
    IntPoly::new(c)
}

/// Checks the symplectic, parity, irreducibility and root-of-unity
/// conditions on the classical map.
pub fn validate_matrix(a: &SymplecticMatrix) -> ValidationReport {
    let mut details = Vec::new();
    let symplectic = is_symplectic(a);
    if !symplectic {
        details.push(format!("A^T J A != J (det A = {})", a.determinant()));
    }
    let parity_ok = a.reduce_mod(2).is_identity();
    if !parity_ok {
        details.push("A is not congruent to the identity modulo 2".into());
    }
    let f = char_poly(a);
    details.push(format!("characteristic polynomial {f}"));
    let irreducible = irreducibility(&f, &mut details);
    let root_of_unity_free = root_of_unity_check(&f, a.d(), &mut details);
    ValidationReport { symplectic, parity_ok, irreducible, root_of_unity_free, details }
}

fn is_symplectic(a: &SymplecticMatrix) -> bool {
    let d = a.d();
    let n = a.dim();
    let j = |r: usize, c: usize| -> i128 {
        if r < d && c == r + d {
            1
        } else if r >= d && c + d == r {
            -1
        } else {
            0
        }
    };
    let m = a.to_i128();
    // (A^T J A)[r][c] = sum_{i,k} A[i][r] J[i][k] A[k][c]
    for r in 0..n {
        for c in 0..n {
            let mut acc: i128 = 0;
            for i in 0..n {
                for k in 0..n {
                    let jv = j(i, k);
                    if jv != 0 {
                        acc += m[i][r] * jv * m[k][c];
                    }
                }
            }
            if acc != j(r, c) {
                return false;
            }
        }
    }
    true
}

fn irreducibility(f: &IntPoly, details: &mut Vec<String>) -> Verdict {
    for p in arith::first_primes(IRREDUCIBILITY_PRIMES) {
        if residue(f.leading(), p) == 0 {
            continue;
        }
        if poly::fp_is_irreducible(&f.reduce_mod(p), p) {
            details.push(format!("irreducible modulo {p}"));
            return Verdict::Proved;
        }
    }
    if let Some(r) = rational_root(f) {
        details.push(format!("rational root {r}"));
        return Verdict::Refuted;
    }
    if f.degree() <= 3 {
        details.push("no rational root and degree <= 3".into());
        return Verdict::Proved;
    }
    details.push(format!("no irreducibility witness among the first {IRREDUCIBILITY_PRIMES} primes"));
    Verdict::Inconclusive
}

fn rational_root(f: &IntPoly) -> Option<String> {
    let c = f.coeffs();
    if c[0] == 0 {
        return Some("0".into());
    }
    let num = poly::big_abs_divisors_small(&BigInt::from(c[0]), 1 << 40)?;
    let den = poly::big_abs_divisors_small(&BigInt::from(f.leading()), 1 << 40)?;
    for &q in &den {
        for &p in &num {
            for sign in [1i128, -1] {
                // q^n f(p/q) = sum c_i p^i q^(n-i)
                let n = f.degree() as u32;
                let mut acc = BigInt::zero();
                for (i, &ci) in c.iter().enumerate() {
                    acc += BigInt::from(ci)
                        * BigInt::from(sign * p as i128).pow(i as u32)
                        * BigInt::from(q).pow(n - i as u32);
                }
                if acc.is_zero() {
                    return Some(if q == 1 { format!("{}", sign * p as i128) } else { format!("{}/{q}", sign * p as i128) });
                }
            }
        }
    }
    None
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    arith::factorize(n).into_iter().fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// All `n` with `phi(n) <= bound`, ascending.
pub fn orders_with_phi_at_most(bound: u64) -> Vec<u64> {
    // phi(n) >= sqrt(n / 2), so n <= 2 bound^2 covers everything.
    (1..=2 * bound * bound + 2).filter(|&n| euler_phi(n) <= bound).collect()
}

/// Numerical roots of a monic polynomial by Weierstrass (Durand-Kerner)
/// iteration.
pub fn numeric_roots(f: &IntPoly) -> Vec<Complex64> {
    let n = f.degree();
    let lc = f.leading() as f64;
    let c: Vec<f64> = f.coeffs().iter().map(|&x| x as f64 / lc).collect();
    let eval = |z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ci| acc * z + ci);
    let radius = 1.0 + c[..n].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(radius, 0.4 + std::f64::consts::TAU * k as f64 / n as f64)).collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm() / z[i].norm().max(1.0));
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Exact ratio polynomial `Res_x(f(x), f(xy)) / (y - 1)^n`, whose roots are
/// the ratios `lambda_i / lambda_j` for `i != j`.
pub(crate) fn ratio_polynomial(f: &IntPoly) -> Vec<BigInt> {
    let n = f.degree();
    let fb = f.to_big();
    let samples: Vec<BigInt> = (0..=n * n)
        .map(|y| {
            let yb = BigInt::from(y as i64);
            let scaled: Vec<BigInt> = fb.iter().enumerate().map(|(i, c)| c * yb.pow(i as u32)).collect();
            poly::resultant(&fb, &scaled)
        })
        .collect();
    let coeffs = poly::interpolate_integer_points(&samples);
    let mut g: Vec<BigInt> = coeffs.iter().map(|r| poly::rational_to_int(r).expect("integer resultant")).collect();
    while g.len() > 1 && g.last().is_some_and(|c| c.is_zero()) {
        g.pop();
    }
    let y_minus_one = vec![-BigInt::one(), BigInt::one()];
    for _ in 0..n {
        g = poly::exact_div_monic(&g, &y_minus_one);
    }
    g
}

fn root_of_unity_check(f: &IntPoly, d: usize, details: &mut Vec<String>) -> Verdict {
    // Screen: roots of unity lie on the unit circle.
    let roots = numeric_roots(f);
    let near_circle = |z: Complex64| (z.norm() - 1.0).abs() < 1e-6;
    let mut suspicious = roots.iter().any(|&z| near_circle(z));
    for (i, &a) in roots.iter().enumerate() {
        for (j, &b) in roots.iter().enumerate() {
            if i != j && b.norm() > 0.0 && near_circle(a / b) {
                suspicious = true;
            }
        }
    }
    if !suspicious {
        details.push("no eigenvalue or eigenvalue ratio on the unit circle".into());
        return Verdict::Proved;
    }

    let bound = (4 * d * d) as u64;
    let candidates = orders_with_phi_at_most(bound);
    let nmax = *candidates.last().unwrap() as usize;
    let cyclo = poly::cyclotomic_table(nmax);
    let fq = QPoly::from_ints(&f.to_big());
    let hq = QPoly::from_ints(&ratio_polynomial(f));
    let mut verdict = Verdict::Proved;
    for &n in &candidates {
        let phi = QPoly::from_ints(&cyclo[n as usize]);
        if fq.gcd(&phi).degree().unwrap_or(0) > 0 {
            details.push(format!("an eigenvalue is a root of unity of order {n}"));
            verdict = Verdict::Refuted;
        }
        if !hq.is_zero() && hq.gcd(&phi).degree().unwrap_or(0) > 0 {
            details.push(format!("a nontrivial eigenvalue ratio is a root of unity of order {n}"));
            verdict = Verdict::Refuted;
        }
    }
    if verdict == Verdict::Proved {
        details.push(format!("exact cyclotomic test passed for all n with phi(n) <= {bound}"));
    }
    verdict
}

/// A matrix that passed validation, with its invariants precomputed.
#[derive(Debug, Clone)]
pub struct AdmittedMatrix {
    matrix: SymplecticMatrix,
    char_poly: IntPoly,
    discriminant: i128,
    determinant: i128,
    report: ValidationReport,
}

impl AdmittedMatrix {
    pub fn matrix(&self) -> &SymplecticMatrix {
        &self.matrix
    }

    pub fn char_poly(&self) -> &IntPoly {
        &self.char_poly
    }

    pub fn discriminant(&self) -> i128 {
        self.discriminant
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    /// Whether `p` satisfies every good-prime condition.
    pub fn is_good_prime(&self, p: u64) -> bool {
        arith::is_prime(p)
            && p > 2 * self.matrix.d() as u64
            && self.discriminant % p as i128 != 0
            && self.determinant % p as i128 != 0
            && arith::splits_completely(&self.char_poly, p)
    }
}

/// Validates `a` and wraps it, or explains why it was rejected.
pub fn admit(a: &SymplecticMatrix, assume_irreducible: bool) -> Result<AdmittedMatrix> {
    let report = validate_matrix(a);
    if !report.admitted_with(assume_irreducible) {
        return Err(CatError::NotAdmitted(report.details.join("; ")));
    }
    let char_poly = char_poly(a);
    let discriminant = arith::poly_discriminant(&char_poly)?;
    Ok(AdmittedMatrix { matrix: a.clone(), char_poly, discriminant, determinant: a.determinant(), report })
}

/// Good primes `p <= limit`, ascending.
pub fn good_primes(a: &AdmittedMatrix, limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&p| a.is_good_prime(p)).collect()
}

/// Order of `A` modulo `N` by stepping through powers, or `None` past `cap`.
pub fn matrix_order_by_powering(a: &SymplecticMatrix, n: u64, cap: u64) -> Option<u64> {
    let base = a.reduce_mod(n);
    let mut acc = base.clone();
    for t in 1..=cap {
        if acc.is_identity() {
            return Some(t);
        }
        acc = acc.mul(&base);
    }
    None
}

/// `ord(A, p^k)` as the lcm of the orders of the Hensel-lifted eigenvalues,
/// cross-checked by direct powering when `p^k <= 10^4`.
pub fn matrix_order(a: &SymplecticMatrix, p: u64, k: u32) -> Result<u64> {
    let modulus = PrimePowerModulus::new(p, k)?;
    if a.reduce_mod(modulus.n()).is_identity() {
        return Ok(1);
    }
    let f = char_poly(a);
    let disc = arith::poly_discriminant(&f)?;
    if p <= 2 * a.d() as u64 || disc % p as i128 == 0 || !arith::splits_completely(&f, p) {
        return Err(CatError::NotGoodPrime { p });
    }
    let lambdas = arith::hensel_lift_roots(&f, p, k)?;
    let mut order = 1u64;
    for &l in &lambdas {
        order = lcm(order, arith::mult_order(l as i128, p, k)?);
    }
    if modulus.n() <= DIRECT_ORDER_CHECK_MAX {
        let direct = matrix_order_by_powering(a, modulus.n(), order.max(1) * 2)
            .ok_or(CatError::OrderMismatch { eigen: order, direct: 0 })?;
        if direct != order {
            return Err(CatError::OrderMismatch { eigen: order, direct });
        }
    }
    Ok(order)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitMatrixReport {
    pub u: Vec<i64>,
    /// Rows `u A^j`, `j = 0..2d-1`.
    pub x: Vec<Vec<i128>>,
    pub det_x: i128,
    /// `nu_p(det X)`: the exact modulus drop used by the reduction checks.
    pub m: u32,
}

pub fn u_orbit_matrix(u: &[i64], a: &SymplecticMatrix, p: u64) -> Result<OrbitMatrixReport> {
    let n = a.dim();
    if u.len() != n {
        return Err(CatError::DimensionMismatch { expected: n, got: u.len() });
    }
    if u.iter().all(|&x| x == 0) {
        return Err(CatError::ZeroVector);
    }
    let mut rows: Vec<Vec<i128>> = Vec::with_capacity(n);
    let mut cur: Vec<i128> = u.iter().map(|&x| x as i128).collect();
    for _ in 0..n {
        rows.push(cur.clone());
        let mut next = vec![0i128; n];
        for (j, out) in next.iter_mut().enumerate() {
            let mut acc: i128 = 0;
            for (i, &ci) in cur.iter().enumerate() {
                acc = acc
                    .checked_add(ci.checked_mul(a.get(i, j) as i128).ok_or(CatError::Overflow("orbit matrix"))?)
                    .ok_or(CatError::Overflow("orbit matrix"))?;
            }
            *out = acc;
        }
        cur = next;
    }
    let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let det = poly::bareiss_det(big);
    if det.is_zero() {
        return Err(CatError::LinearDependence);
    }
    let det_x = poly::big_to_i128(&det).ok_or(CatError::Overflow("det X"))?;
    let m = arith::valuation(det_x, p)?;
    Ok(OrbitMatrixReport { u: u.to_vec(), x: rows, det_x, m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn char_poly_examples() {
        assert_eq!(char_poly(&SymplecticMatrix::identity(1)).coeffs(), &[1, -2, 1]);
        assert_eq!(char_poly(&fixtures::a2()).coeffs(), &[1, -10, 1]);
        assert_eq!(char_poly(&fixtures::a1()).coeffs(), &[1, -6, 1]);
        assert_eq!(char_poly(&fixtures::d2()).coeffs(), &[1, -24, -34, -24, 1]);
    }

    #[test]
    fn validation_of_fixtures() {
        for a in [fixtures::a1(), fixtures::a2(), fixtures::d2()] {
            let r = validate_matrix(&a);
            assert!(r.admitted(), "{a}: {r}");
        }
    }

    #[test]
    fn validation_rejects_j() {
        let r = validate_matrix(&fixtures::j_matrix());
        assert!(r.symplectic);
        assert!(!r.parity_ok);
        assert_eq!(r.root_of_unity_free, Verdict::Refuted);
        assert!(!r.admitted());
    }

    #[test]
    fn validation_rejects_non_symplectic_and_identity() {
        let m = SymplecticMatrix::from_rows(&[vec![1, 1], vec![0, 2]]).unwrap();
        assert!(!validate_matrix(&m).symplectic);
        let r = validate_matrix(&SymplecticMatrix::identity(1));
        assert_eq!(r.irreducible, Verdict::Refuted);
        assert_eq!(r.root_of_unity_free, Verdict::Refuted);
    }

    #[test]
    fn shape_errors() {
        assert!(SymplecticMatrix::from_rows(&[vec![1, 2, 3], vec![1, 2, 3], vec![1, 2, 3]]).is_err());
        assert!(SymplecticMatrix::from_rows(&[vec![1, 2], vec![1]]).is_err());
        assert!(SymplecticMatrix::from_json(r#"{"d": 2, "rows": [[1,4],[2,9]]}"#).is_err());
        let a = SymplecticMatrix::from_json(r#"{"d": 1, "rows": [[1,4],[2,9]]}"#).unwrap();
        assert_eq!(a, fixtures::a2());
        assert_eq!(SymplecticMatrix::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn ratio_polynomial_of_a2() {
        // roots t, 1/t with t + 1/t = 10: ratios t^2 and t^-2 satisfy y^2 - 98y + 1.
        let h = ratio_polynomial(&char_poly(&fixtures::a2()));
        let ints: Vec<i64> = h.iter().map(|c| i64::try_from(c.clone()).unwrap()).collect();
        assert_eq!(ints, vec![1, -98, 1]);
    }

    #[test]
    fn d2_needs_exact_root_of_unity_test() {
        // Two eigenvalues sit on the unit circle, so the screen cannot decide.
        let roots = numeric_roots(&char_poly(&fixtures::d2()));
        assert_eq!(roots.iter().filter(|z| (z.norm() - 1.0).abs() < 1e-9).count(), 2);
        let r = validate_matrix(&fixtures::d2());
        assert!(r.details.iter().any(|d| d.contains("exact cyclotomic")), "{r}");
    }

    #[test]
    fn phi_bound_orders() {
        assert_eq!(orders_with_phi_at_most(4), vec![1, 2, 3, 4, 5, 6, 8, 10, 12]);
        assert_eq!(*orders_with_phi_at_most(16).last().unwrap(), 60);
    }

    #[test]
    fn good_prime_examples() {
        let a2 = admit(&fixtures::a2(), false).unwrap();
        assert_eq!(good_primes(&a2, 30), vec![5, 19, 23, 29]);
        let a1 = admit(&fixtures::a1(), false).unwrap();
        assert_eq!(good_primes(&a1, 30), vec![7, 17, 23]);
        assert!(matches!(admit(&SymplecticMatrix::identity(1), false), Err(CatError::NotAdmitted(_))));
        let d2 = admit(&fixtures::d2(), false).unwrap();
        assert_eq!(good_primes(&d2, 200), vec![101, 109, 149, 181]);
    }

    #[test]
    fn good_primes_prefix_property() {
        let a2 = admit(&fixtures::a2(), false).unwrap();
        let big = good_primes(&a2, 400);
        for limit in [10, 50, 100, 250] {
            let small = good_primes(&a2, limit);
            assert_eq!(&big[..small.len()], &small[..]);
            assert!(big[small.len()..].iter().all(|&p| p > limit));
        }
    }

    #[test]
    fn matrix_order_examples() {
        let a2 = fixtures::a2();
        assert_eq!(matrix_order(&a2, 5, 1).unwrap(), 4);
        assert_eq!(matrix_order(&a2, 5, 2).unwrap(), 20);
        assert_eq!(matrix_order(&SymplecticMatrix::identity(1), 7, 3).unwrap(), 1);
        assert!(matches!(matrix_order(&a2, 7, 1), Err(CatError::NotGoodPrime { p: 7 })));
    }

    #[test]
    fn matrix_order_divisibility_chain() {
        for (a, p) in [(fixtures::a2(), 5u64), (fixtures::a2(), 19), (fixtures::a1(), 7), (fixtures::a1(), 17)] {
            let mut prev = matrix_order(&a, p, 1).unwrap();
            for k in 2..=4 {
                let o = matrix_order(&a, p, k).unwrap();
                assert_eq!(o % prev, 0);
                assert!(o / prev == 1 || o / prev == p);
                let n = p.pow(k);
                if n <= DIRECT_ORDER_CHECK_MAX {
                    assert!(a.reduce_mod(n).pow(o).is_identity());
                }
                prev = o;
            }
        }
    }

    #[test]
    fn orbit_matrix_examples() {
        let a2 = fixtures::a2();
        let r = u_orbit_matrix(&[1, 0], &a2, 5).unwrap();
        assert_eq!(r.x, vec![vec![1, 0], vec![1, 4]]);
        assert_eq!((r.det_x, r.m), (4, 0));
        let r = u_orbit_matrix(&[5, 0], &a2, 5).unwrap();
        assert_eq!((r.det_x, r.m), (100, 2));
        assert_eq!(u_orbit_matrix(&[0, 0], &a2, 5), Err(CatError::ZeroVector));
        // I has every vector as an eigenvector
        assert_eq!(u_orbit_matrix(&[1, 0], &SymplecticMatrix::identity(1), 5), Err(CatError::LinearDependence));
    }

    #[test]
    fn orbit_matrices_nonsingular_on_box() {
        for a in [fixtures::a1(), fixtures::a2()] {
            for u0 in -10..=10 {
                for u1 in -10..=10 {
                    if (u0, u1) == (0, 0) {
                        continue;
                    }
                    assert!(u_orbit_matrix(&[u0, u1], &a, 5).is_ok());
                }
            }
        }
    }

    #[test]
    fn orbit_matrices_nonsingular_d2() {
        let a = fixtures::d2();
        let range = -10i64..=10;
        for u0 in range.clone() {
            for u1 in range.clone() {
                for u2 in range.clone() {
                    for u3 in range.clone() {
                        if (u0, u1, u2, u3) == (0, 0, 0, 0) {
                            continue;
                        }
                        assert!(u_orbit_matrix(&[u0, u1, u2, u3], &a, 101).is_ok());
                    }
                }
            }
        }
    }

    #[test]
    fn split_primes_lift_to_twelve() {
        let a2 = admit(&fixtures::a2(), false).unwrap();
        for p in good_primes(&a2, 60) {
            for k in 1..=12 {
                if PrimePowerModulus::new(p, k).is_ok() {
                    assert!(arith::hensel_lift_roots(a2.char_poly(), p, k).is_ok());
                }
            }
        }
    }
}
