//! The finite Hilbert space `C^(N^d)`, Heisenberg operators `T_N(u)`,
//! quantized observables and the propagator `U_N(A)`.
//!
//! Positions `w in (Z_N)^d` are indexed lexicographically with `w_1` most
//! significant. Phases are integers modulo `2N` until they are turned into
//! complex numbers.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{residue, PrimePowerModulus};
use crate::error::{CatError, Result};
use crate::linalg::{CMatrix, C64};
use crate::symplectic::SymplecticMatrix;

/// Dense operators are materialized only when `N^d` is at most this.
pub const DENSE_CAP: usize = 4096;

/// Full unitarity checks run up to this dimension; larger propagators are
/// checked on a sample of rows.
const FULL_UNITARITY_MAX: usize = 512;

/// `e_q(x) = exp(2 pi i x / q)`.
pub fn e_q(x: i128, q: u64) -> C64 {
    let r = residue(x, q);
    C64::from_polar(1.0, 2.0 * PI * r as f64 / q as f64)
}

/// `N^d`, or a budget error when it exceeds [`DENSE_CAP`].
pub fn dense_dim(n: u64, d: usize) -> Result<usize> {
    let mut dim: u128 = 1;
    for _ in 0..d {
        dim *= n as u128;
        if dim > DENSE_CAP as u128 {
            return Err(CatError::DenseBudget { dim: usize::try_from(dim).unwrap_or(usize::MAX), cap: DENSE_CAP });
        }
    }
    Ok(dim as usize)
}

fn checked_dim(n: u64, d: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..d {
        dim = dim.checked_mul(n as usize).ok_or(CatError::Overflow("state dimension"))?;
    }
    Ok(dim)
}

fn require_odd(n: u64) -> Result<()> {
    if n.is_multiple_of(2) || n < 3 {
        return Err(CatError::EvenModulus);
    }
    Ok(())
}

/// Position `w` of a lexicographic index.
pub fn position(mut idx: usize, n: u64, d: usize) -> Vec<u64> {
    let mut w = vec![0u64; d];
    for slot in w.iter_mut().rev() {
        *slot = (idx as u64) % n;
        idx /= n as usize;
    }
    w
}

/// Lexicographic index of a position with entries in `[0, N)`.
pub fn index_of(w: &[u64], n: u64) -> usize {
    w.iter().fold(0usize, |acc, &x| acc * n as usize + x as usize)
}

/// Element of `L^2((Z_N)^d)` with the normalized inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: u64,
    d: usize,
    values: Vec<C64>,
}

impl StateVector {
    pub fn new(n: u64, d: usize, values: Vec<C64>) -> Result<Self> {
        let dim = checked_dim(n, d)?;
        if values.len() != dim {
            return Err(CatError::DimensionMismatch { expected: dim, got: values.len() });
        }
        Ok(Self { n, d, values })
    }

    /// The constant function 1, which is normalized.
    pub fn constant_one(n: u64, d: usize) -> Result<Self> {
        let dim = checked_dim(n, d)?;
        Self::new(n, d, vec![C64::new(1.0, 0.0); dim])
    }

    /// Rescales a unit vector in the plain `l^2` norm to the normalized
    /// convention `sum |psi|^2 = N^d`.
    pub fn from_unit_l2(n: u64, d: usize, v: &[C64]) -> Result<Self> {
        let dim = checked_dim(n, d)?;
        let s = (dim as f64).sqrt();
        Self::new(n, d, v.iter().map(|x| x * s).collect())
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `<self, other> = N^-d sum self(w) conj(other(w))`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(CatError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s / self.dim() as f64)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|x| x.norm_sqr()).sum::<f64>() / self.dim() as f64
    }
}

/// Integer index `u = (u_1, u_2) in Z^(2d)` of a Heisenberg operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeisenbergIndex {
    u: Vec<i64>,
}

impl HeisenbergIndex {
    pub fn new(u: Vec<i64>) -> Result<Self> {
        if u.is_empty() || u.len() % 2 == 1 {
            return Err(CatError::DimensionMismatch { expected: 2 * (u.len() / 2 + 1), got: u.len() });
        }
        Ok(Self { u })
    }

    /// Representative with entries in `[0, N)`.
    pub fn canonical(&self, n: u64) -> Self {
        Self { u: self.u.iter().map(|&x| residue(x as i128, n) as i64).collect() }
    }

    pub fn d(&self) -> usize {
        self.u.len() / 2
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.u
    }

    pub fn u1(&self) -> &[i64] {
        &self.u[..self.d()]
    }

    pub fn u2(&self) -> &[i64] {
        &self.u[self.d()..]
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().all(|&x| x == 0)
    }

    pub fn neg(&self) -> Self {
        Self { u: self.u.iter().map(|x| -x).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { u: self.u.iter().zip(&other.u).map(|(a, b)| a + b).collect() }
    }
}

/// `omega(x, y) = x_1 . y_2 - x_2 . y_1`.
pub fn omega(x: &HeisenbergIndex, y: &HeisenbergIndex) -> i128 {
    let dot = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(&p, &q)| p as i128 * q as i128).sum::<i128>();
    dot(x.u1(), y.u2()) - dot(x.u2(), y.u1())
}

/// Monomial form of `T_N(u)`: row `w` has its single nonzero entry
/// `e_{2N}(exps[w])` in column `cols[w]`.
#[derive(Debug, Clone)]
pub struct MonomialOperator {
    n: u64,
    cols: Vec<usize>,
    exps: Vec<u64>,
}

impl MonomialOperator {
    pub fn heisenberg(u: &HeisenbergIndex, n: u64) -> Result<Self> {
        let d = u.d();
        let dim = checked_dim(n, d)?;
        let two_n = 2 * n;
        let u1: Vec<u64> = u.u1().iter().map(|&x| residue(x as i128, n)).collect();
        let u2: Vec<u64> = u.u2().iter().map(|&x| residue(x as i128, n)).collect();
        let base: i128 = u.u1().iter().zip(u.u2()).map(|(&a, &b)| a as i128 * b as i128).sum();
        let base = residue(base, two_n);
        let mut cols = Vec::with_capacity(dim);
        let mut exps = Vec::with_capacity(dim);
        for idx in 0..dim {
            let w = position(idx, n, d);
            let shifted: Vec<u64> = w.iter().zip(&u1).map(|(&a, &b)| (a + b) % n).collect();
            let dot = w.iter().zip(&u2).fold(0u128, |acc, (&a, &b)| (acc + a as u128 * b as u128) % n as u128) as u64;
            cols.push(index_of(&shifted, n));
            exps.push((base + 2 * dot) % two_n);
        }
        Ok(Self { n, cols, exps })
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    fn phase(&self, w: usize) -> C64 {
        e_q(self.exps[w] as i128, 2 * self.n)
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for w in 0..self.dim() {
            m[(w, self.cols[w])] = self.phase(w);
        }
        m
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim()).map(|w| self.phase(w) * v[self.cols[w]]).collect()
    }

    /// `T M`.
    pub fn left_mul(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(m.rows(), m.cols());
        for w in 0..self.dim() {
            let ph = self.phase(w);
            let src = m.row(self.cols[w]).to_vec();
            for (o, s) in out.row_mut(w).iter_mut().zip(src) {
                *o = ph * s;
            }
        }
        out
    }

    /// `M T`.
    pub fn right_mul(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(m.rows(), m.cols());
        let phases: Vec<C64> = (0..self.dim()).map(|w| self.phase(w)).collect();
        for i in 0..m.rows() {
            let row = m.row(i).to_vec();
            let orow = out.row_mut(i);
            for w in 0..phases.len() {
                orow[self.cols[w]] = row[w] * phases[w];
            }
        }
        out
    }
}

/// `T_N(u) phi` in `O(N^d)` without materializing a matrix.
pub fn apply_heisenberg(u: &HeisenbergIndex, phi: &StateVector) -> Result<StateVector> {
    if u.d() != phi.d() {
        return Err(CatError::DimensionMismatch { expected: 2 * phi.d(), got: u.as_slice().len() });
    }
    let n = phi.n();
    let d = phi.d();
    let two_n = 2 * n;
    let u1: Vec<u64> = u.u1().iter().map(|&x| residue(x as i128, n)).collect();
    let u2: Vec<u64> = u.u2().iter().map(|&x| residue(x as i128, n)).collect();
    let base: i128 = u.u1().iter().zip(u.u2()).map(|(&a, &b)| a as i128 * b as i128).sum();
    let base = residue(base, two_n);
    let mut out = Vec::with_capacity(phi.dim());
    let mut w = vec![0u64; d];
    let mut shifted = vec![0u64; d];
    for idx in 0..phi.dim() {
        let mut r = idx as u64;
        for j in (0..d).rev() {
            w[j] = r % n;
            r /= n;
            shifted[j] = (w[j] + u1[j]) % n;
        }
        let dot = w.iter().zip(&u2).fold(0u128, |acc, (&a, &b)| (acc + a as u128 * b as u128) % n as u128) as u64;
        let exp = (base + 2 * dot) % two_n;
        out.push(e_q(exp as i128, two_n) * phi.values()[index_of(&shifted, n)]);
    }
    StateVector::new(n, d, out)
}

/// Dense `T_N(u)`.
pub fn heisenberg_matrix(u: &HeisenbergIndex, n: u64, d: usize) -> Result<CMatrix> {
    if u.d() != d {
        return Err(CatError::DimensionMismatch { expected: 2 * d, got: u.as_slice().len() });
    }
    dense_dim(n, d)?;
    Ok(MonomialOperator::heisenberg(u, n)?.to_dense())
}

/// A real trigonometric polynomial on the `2d`-torus, stored by its Fourier
/// coefficients `f^(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    d: usize,
    terms: BTreeMap<Vec<i64>, C64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableTerm {
    pub u: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

/// On-disk form: `{"d": <int>, "terms": [{"u": [...], "re": x, "im": y}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableFile {
    pub d: usize,
    pub terms: Vec<ObservableTerm>,
}

const HERMITIAN_TOL: f64 = 1e-12;

impl Observable {
    /// Builds from `(u, f^(u))` pairs, summing repeated `u`. Rejects
    /// coefficient sets without Hermitian symmetry unless `symmetrize`, in
    /// which case `f^` is replaced by `(f^(u) + conj f^(-u)) / 2`.
    pub fn from_terms(d: usize, terms: &[(Vec<i64>, C64)], symmetrize: bool) -> Result<Self> {
        let mut map: BTreeMap<Vec<i64>, C64> = BTreeMap::new();
        for (u, c) in terms {
            if u.len() != 2 * d {
                return Err(CatError::DimensionMismatch { expected: 2 * d, got: u.len() });
            }
            *map.entry(u.clone()).or_insert(C64::new(0.0, 0.0)) += c;
        }
        let conj_of = |map: &BTreeMap<Vec<i64>, C64>, u: &Vec<i64>| {
            let neg: Vec<i64> = u.iter().map(|x| -x).collect();
            map.get(&neg).copied().unwrap_or_default().conj()
        };
        if symmetrize {
            let keys: Vec<Vec<i64>> = map.keys().flat_map(|u| [u.clone(), u.iter().map(|x| -x).collect()]).collect();
            let mut sym = BTreeMap::new();
            for u in keys {
                let c = (map.get(&u).copied().unwrap_or_default() + conj_of(&map, &u)) / 2.0;
                sym.insert(u, c);
            }
            map = sym;
        } else {
            for (u, c) in &map {
                let partner = conj_of(&map, u);
                if (c - partner).norm() > HERMITIAN_TOL {
                    return Err(CatError::NonHermitianObservable(format!(
                        "f^({u:?}) = {c} but conj f^(-u) = {partner}"
                    )));
                }
            }
        }
        map.retain(|_, c| c.norm() > 0.0);
        Ok(Self { d, terms: map })
    }

    pub fn constant(d: usize, c: f64) -> Self {
        Self::from_terms(d, &[(vec![0; 2 * d], C64::new(c, 0.0))], false).expect("real constant")
    }

    /// `cos(2 pi u . x)`.
    pub fn cosine(u: &[i64]) -> Self {
        let neg: Vec<i64> = u.iter().map(|x| -x).collect();
        let half = C64::new(0.5, 0.0);
        Self::from_terms(u.len() / 2, &[(u.to_vec(), half), (neg, half)], false).expect("cosine is real")
    }

    pub fn from_json(text: &str, symmetrize: bool) -> Result<Self> {
        let file: ObservableFile = serde_json::from_str(text).map_err(|e| CatError::Parse(e.to_string()))?;
        let terms: Vec<(Vec<i64>, C64)> = file.terms.into_iter().map(|t| (t.u, C64::new(t.re, t.im))).collect();
        Self::from_terms(file.d, &terms, symmetrize)
    }

    pub fn to_json(&self) -> String {
        let terms = self.terms.iter().map(|(u, c)| ObservableTerm { u: u.clone(), re: c.re, im: c.im }).collect();
        serde_json::to_string(&ObservableFile { d: self.d, terms }).expect("serializable")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &C64)> {
        self.terms.iter()
    }

    /// The mean `f^(0)`.
    pub fn mean(&self) -> C64 {
        self.terms.get(&vec![0; 2 * self.d]).copied().unwrap_or_default()
    }

    /// `sum_{u != 0} |f^(u)|`, an upper bound for the discrepancy.
    pub fn oscillation_bound(&self) -> f64 {
        self.terms.iter().filter(|(u, _)| u.iter().any(|&x| x != 0)).map(|(_, c)| c.norm()).sum()
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        self.terms
            .iter()
            .map(|(u, c)| format!("{u:?}:{}{:+}i", c.re, c.im))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// `Op_N(f) = sum_u f^(u) T_N(u)`.
pub fn observable_operator(f: &Observable, n: u64) -> Result<CMatrix> {
    require_odd(n)?;
    let dim = dense_dim(n, f.d())?;
    let mut op = CMatrix::zeros(dim, dim);
    for (u, &c) in f.terms() {
        let t = MonomialOperator::heisenberg(&HeisenbergIndex::new(u.clone())?, n)?;
        for w in 0..dim {
            op[(w, t.cols[w])] += c * t.phase(w);
        }
    }
    Ok(op)
}

/// `U_N(A)`: the unitary satisfying `U^H T(u) U = T(uA)` for all `u`.
#[derive(Debug, Clone)]
pub struct Propagator {
    n: u64,
    d: usize,
    matrix: CMatrix,
    /// Per row, `(column, exponent mod 2N)` of each nonzero entry; every
    /// nonzero entry has modulus `1 / sqrt(support)`.
    phase_exponents: Option<Vec<Vec<(usize, u64)>>>,
}

impl Propagator {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn phase_exponents(&self) -> Option<&[Vec<(usize, u64)>]> {
        self.phase_exponents.as_deref()
    }

    /// Nonzero entries per row.
    pub fn support(&self) -> Option<usize> {
        self.phase_exponents.as_ref().map(|rows| rows[0].len())
    }

    /// Copy multiplied by the unit scalar `e^(i theta)`.
    pub fn with_global_phase(&self, theta: f64) -> Propagator {
        Propagator {
            n: self.n,
            d: self.d,
            matrix: self.matrix.scale(C64::from_polar(1.0, theta)),
            phase_exponents: None,
        }
    }

    /// Copy with columns `a` and `b` exchanged, for fault injection.
    pub fn with_swapped_columns(&self, a: usize, b: usize) -> Propagator {
        let mut matrix = self.matrix.clone();
        matrix.swap_columns(a, b);
        Propagator { n: self.n, d: self.d, matrix, phase_exponents: None }
    }

    /// `max |U U^H - I|`; sampled over rows for large dimensions.
    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.matrix)
    }
}

fn unitarity_residual(u: &CMatrix) -> f64 {
    let dim = u.rows();
    if dim <= FULL_UNITARITY_MAX {
        return u.unitarity_residual();
    }
    let step = dim / 16;
    let mut worst: f64 = 0.0;
    for i in (0..dim).step_by(step.max(1)) {
        let ri = u.row(i);
        for j in 0..dim {
            let v: C64 = ri.iter().zip(u.row(j)).map(|(a, b)| a * b.conj()).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).norm());
        }
    }
    worst
}

/// Builds `U_N(A)` for `N = p^k`.
pub fn build_propagator(a: &SymplecticMatrix, ctx: &PrimePowerModulus) -> Result<Propagator> {
    build_propagator_mod(a, ctx.n())
}

/// Builds `U_N(A)` for any odd `N >= 3`.
///
/// The unknown `U` satisfies `T(e_i) U = U T(e_i A)` for the `2d` standard
/// generators. Entrywise, each relation ties `U[a + u_1][c + v_1]` to
/// `U[a][c]` through a root-of-unity factor `e_{2N}(phi_v(c) - phi_u(a))`,
/// where `u = e_i`, `v = e_i A` and `phi_u(a) = u_1.u_2 + 2 u_2.a`. The
/// relations split the index pairs into components; phases are propagated
/// by breadth-first search with exact cycle checks, and the solution is
/// supported on the single consistent component.
pub fn build_propagator_mod(a: &SymplecticMatrix, n: u64) -> Result<Propagator> {
    require_odd(n)?;
    let d = a.d();
    let dim = dense_dim(n, d)?;
    let two_n = 2 * n;

    struct Generator {
        shift_u: Vec<usize>,
        shift_v: Vec<usize>,
        unshift_u: Vec<usize>,
        unshift_v: Vec<usize>,
        phi_u: Vec<u64>,
        phi_v: Vec<u64>,
    }

    let tables = |u: &[i64]| -> (Vec<usize>, Vec<usize>, Vec<u64>) {
        let u1: Vec<u64> = u[..d].iter().map(|&x| residue(x as i128, n)).collect();
        let u2: Vec<u64> = u[d..].iter().map(|&x| residue(x as i128, n)).collect();
        let base: i128 = u[..d].iter().zip(&u[d..]).map(|(&p, &q)| p as i128 * q as i128).sum();
        let base = residue(base, two_n);
        let mut shift = vec![0usize; dim];
        let mut unshift = vec![0usize; dim];
        let mut phi = vec![0u64; dim];
        for (idx, (s, ph)) in shift.iter_mut().zip(phi.iter_mut()).enumerate() {
            let w = position(idx, n, d);
            let moved: Vec<u64> = w.iter().zip(&u1).map(|(&x, &y)| (x + y) % n).collect();
            *s = index_of(&moved, n);
            let dot = w.iter().zip(&u2).fold(0u128, |acc, (&x, &y)| (acc + x as u128 * y as u128) % n as u128);
            *ph = (base + 2 * dot as u64) % two_n;
        }
        for (idx, &s) in shift.iter().enumerate() {
            unshift[s] = idx;
        }
        (shift, unshift, phi)
    };

    let mut gens = Vec::with_capacity(2 * d);
    for i in 0..2 * d {
        let mut e = vec![0i64; 2 * d];
        e[i] = 1;
        let v = a.row_times(&e)?;
        let (shift_u, unshift_u, phi_u) = tables(&e);
        let (shift_v, unshift_v, phi_v) = tables(&v);
        gens.push(Generator { shift_u, shift_v, unshift_u, unshift_v, phi_u, phi_v });
    }

    const UNSEEN: u32 = u32::MAX;
    let nodes = dim * dim;
    let mut exps = vec![UNSEEN; nodes];
    let mut comp = vec![UNSEEN; nodes];
    let mut consistent: Vec<bool> = Vec::new();
    let mut queue = VecDeque::new();
    let sub = |x: u64, y: u64| (x + two_n - y) % two_n;

    for start in 0..nodes {
        if comp[start] != UNSEEN {
            continue;
        }
        let id = consistent.len() as u32;
        consistent.push(true);
        comp[start] = id;
        exps[start] = 0;
        queue.push_back(start);
        while let Some(node) = queue.pop_front() {
            let (ra, rc) = (node / dim, node % dim);
            let e0 = exps[node] as u64;
            for g in &gens {
                // forward: U[a+u1][c+v1] = U[a][c] e(phi_v(c) - phi_u(a))
                let fwd = g.shift_u[ra] * dim + g.shift_v[rc];
                let fe = (e0 + sub(g.phi_v[rc], g.phi_u[ra])) % two_n;
                // backward: U[a-u1][c-v1] = U[a][c] e(phi_u(a-u1) - phi_v(c-v1))
                let (pa, pc) = (g.unshift_u[ra], g.unshift_v[rc]);
                let bwd = pa * dim + pc;
                let be = (e0 + sub(g.phi_u[pa], g.phi_v[pc])) % two_n;
                for (next, ne) in [(fwd, fe), (bwd, be)] {
                    if comp[next] == UNSEEN {
                        comp[next] = id;
                        exps[next] = ne as u32;
                        queue.push_back(next);
                    } else if exps[next] as u64 != ne {
                        consistent[id as usize] = false;
                    }
                }
            }
        }
    }

    let good: Vec<u32> = (0..consistent.len() as u32).filter(|&c| consistent[c as usize]).collect();
    if good.len() != 1 {
        return Err(CatError::IntertwinerDimension(good.len()));
    }
    let good = good[0];

    let mut rows: Vec<Vec<(usize, u64)>> = vec![Vec::new(); dim];
    for node in 0..nodes {
        if comp[node] == good {
            rows[node / dim].push((node % dim, exps[node] as u64));
        }
    }
    let support = rows[0].len();
    if support == 0 || rows.iter().any(|r| r.len() != support) {
        return Err(CatError::NotUnitary(1.0));
    }
    let shift = rows[0][0].1;
    for row in &mut rows {
        for entry in row.iter_mut() {
            entry.1 = sub(entry.1, shift);
        }
    }
    let scale = 1.0 / (support as f64).sqrt();
    let mut matrix = CMatrix::zeros(dim, dim);
    for (r, row) in rows.iter().enumerate() {
        for &(c, e) in row {
            matrix[(r, c)] = e_q(e as i128, two_n) * scale;
        }
    }
    let residual = unitarity_residual(&matrix);
    if residual > 1e-8 {
        return Err(CatError::NotUnitary(residual));
    }
    Ok(Propagator { n, d, matrix, phase_exponents: Some(rows) })
}

/// `|| T(u) U - U T(uA) ||_F / N^(d/2)` for one `u`. Equal to the norm of
/// `U^H T(u) U - T(uA)` whenever `U` is unitary.
pub fn egorov_defect(u: &[i64], prop: &Propagator, a: &SymplecticMatrix) -> Result<f64> {
    let n = prop.n();
    let ua = a.row_times(u)?;
    let tu = MonomialOperator::heisenberg(&HeisenbergIndex::new(u.to_vec())?, n)?;
    let tv = MonomialOperator::heisenberg(&HeisenbergIndex::new(ua)?, n)?;
    let diff = tu.left_mul(prop.matrix()).sub(&tv.right_mul(prop.matrix()));
    Ok(diff.frobenius_norm() / (prop.dim() as f64).sqrt())
}

/// Largest Egorov defect over the `2d` standard generators plus
/// `sample_size` uniformly random `u in [0, N)^(2d)`.
pub fn egorov_residual(prop: &Propagator, a: &SymplecticMatrix, sample_size: usize, seed: u64) -> Result<f64> {
    let d2 = 2 * prop.d();
    let mut worst: f64 = 0.0;
    for i in 0..d2 {
        let mut e = vec![0i64; d2];
        e[i] = 1;
        worst = worst.max(egorov_defect(&e, prop, a)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..sample_size {
        let u: Vec<i64> = (0..d2).map(|_| rng.gen_range(0..prop.n() as i64)).collect();
        worst = worst.max(egorov_defect(&u, prop, a)?);
    }
    Ok(worst)
}
