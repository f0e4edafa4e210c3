//! Dense Hermitian eigensolvers.
//!
//! Two independent implementations: cyclic complex Jacobi, and Householder
//! reduction to a real tridiagonal matrix followed by implicit QL. `auto`
//! picks Jacobi up to [`JACOBI_MAX_DIM`] and Householder+QL above.

use std::sync::{Arc, OnceLock};

use super::{CMatrix, C64};
use crate::error::{CatError, Result};
use crate::registry::{Named, Registry};

pub const JACOBI_MAX_DIM: usize = 512;

/// Eigenvalues ascending; eigenvectors are the matching columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub trait HermitianEigensolver: Named + Send + Sync {
    fn solve(&self, h: &CMatrix) -> Result<HermitianEigen>;
}

/// Registry with `jacobi`, `householder-ql` and `auto`.
pub fn eigensolvers() -> &'static Registry<dyn HermitianEigensolver> {
    static REG: OnceLock<Registry<dyn HermitianEigensolver>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn HermitianEigensolver> = Registry::new();
        r.register(Arc::new(Jacobi::default()));
        r.register(Arc::new(HouseholderQl));
        r.register(Arc::new(AutoSolver));
        r
    })
}

/// Convenience wrapper around the `auto` solver.
pub fn solve_hermitian(h: &CMatrix) -> Result<HermitianEigen> {
    AutoSolver.solve(h)
}

fn check_square(h: &CMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(CatError::DimensionMismatch { expected: h.rows(), got: h.cols() });
    }
    Ok(())
}

fn sorted(values: Vec<f64>, vectors: CMatrix) -> HermitianEigen {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let vals = idx.iter().map(|&i| values[i]).collect();
    let vecs = CMatrix::from_fn(vectors.rows(), n, |r, c| vectors[(r, idx[c])]);
    HermitianEigen { values: vals, vectors: vecs }
}

#[derive(Debug, Clone, Copy)]
pub struct Jacobi {
    pub max_sweeps: usize,
}

impl Default for Jacobi {
    fn default() -> Self {
        Self { max_sweeps: 100 }
    }
}

impl Named for Jacobi {
    fn name(&self) -> &'static str {
        "jacobi"
    }
}

impl HermitianEigensolver for Jacobi {
    fn solve(&self, h: &CMatrix) -> Result<HermitianEigen> {
        check_square(h)?;
        let n = h.rows();
        let mut a = h.clone();
        // symmetrize, force real diagonal
        for i in 0..n {
            a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
            for j in i + 1..n {
                let v = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
                a[(i, j)] = v;
                a[(j, i)] = v.conj();
            }
        }
        let mut v = CMatrix::identity(n);
        let total = a.frobenius_norm().max(f64::MIN_POSITIVE);

        for _sweep in 0..self.max_sweeps {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * total {
                let values = (0..n).map(|i| a[(i, i)].re).collect();
                return Ok(sorted(values, v));
            }
            for p in 0..n {
                for q in p + 1..n {
                    let b = a[(p, q)];
                    let babs = b.norm();
                    if babs <= 1e-300 {
                        continue;
                    }
                    let alpha = a[(p, p)].re;
                    let beta = a[(q, q)].re;
                    let phase = b / babs; // e^{i phi}
                    let tau = (beta - alpha) / (2.0 * babs);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on (p, q).
                    let ep = phase.conj();
                    let g_pp = C64::new(c, 0.0);
                    let g_pq = C64::new(s, 0.0);
                    let g_qp = -ep * s;
                    let g_qq = ep * c;
                    // A <- A G
                    for r in 0..n {
                        let ap = a[(r, p)];
                        let aq = a[(r, q)];
                        a[(r, p)] = ap * g_pp + aq * g_qp;
                        a[(r, q)] = ap * g_pq + aq * g_qq;
                    }
                    // A <- G^H A
                    for col in 0..n {
                        let ap = a[(p, col)];
                        let aq = a[(q, col)];
                        a[(p, col)] = g_pp.conj() * ap + g_qp.conj() * aq;
                        a[(q, col)] = g_pq.conj() * ap + g_qq.conj() * aq;
                    }
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                    for r in 0..n {
                        let vp = v[(r, p)];
                        let vq = v[(r, q)];
                        v[(r, p)] = vp * g_pp + vq * g_qp;
                        v[(r, q)] = vp * g_pq + vq * g_qq;
                    }
                }
            }
        }
        Err(CatError::SpectralFailure("Jacobi sweeps did not converge".into()))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HouseholderQl;

impl Named for HouseholderQl {
    fn name(&self) -> &'static str {
        "householder-ql"
    }
}

impl HermitianEigensolver for HouseholderQl {
    fn solve(&self, h: &CMatrix) -> Result<HermitianEigen> {
        check_square(h)?;
        let n = h.rows();
        if n == 0 {
            return Ok(HermitianEigen { values: vec![], vectors: CMatrix::zeros(0, 0) });
        }
        let mut a = h.clone();
        let mut q = CMatrix::identity(n);

        // Householder: A <- P A P with P = I - 2 v v^H / (v^H v)
        for k in 0..n.saturating_sub(2) {
            let xnorm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
            if xnorm == 0.0 {
                continue;
            }
            let x0 = a[(k + 1, k)];
            let ph = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
            let alpha = -ph * xnorm;
            let mut v = vec![C64::new(0.0, 0.0); n];
            for i in k + 1..n {
                v[i] = a[(i, k)];
            }
            v[k + 1] -= alpha;
            let vv: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            if vv == 0.0 {
                continue;
            }
            let beta = 2.0 / vv;
            // A <- A - beta v (v^H A)
            let mut w = vec![C64::new(0.0, 0.0); n];
            for i in k + 1..n {
                let vi = v[i].conj();
                for (j, wj) in w.iter_mut().enumerate() {
                    *wj += vi * a[(i, j)];
                }
            }
            for i in k + 1..n {
                for j in 0..n {
                    let d = v[i] * w[j] * beta;
                    a[(i, j)] -= d;
                }
            }
            // A <- A - beta (A v) v^H
            apply_right_reflector(&mut a, &v, beta, k + 1);
            apply_right_reflector(&mut q, &v, beta, k + 1);
        }

        // Hermitian tridiagonal -> real symmetric tridiagonal via diagonal phases.
        let mut diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        let mut off = vec![0.0f64; n];
        let mut phases = vec![C64::new(1.0, 0.0); n];
        for k in 0..n - 1 {
            let e = a[(k + 1, k)];
            let en = e.norm();
            off[k] = en;
            phases[k + 1] = if en == 0.0 { phases[k] } else { phases[k] * (e / en) };
        }
        let mut z = vec![vec![0.0f64; n]; n];
        for (i, row) in z.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        tql_implicit(&mut diag, &mut off, &mut z)?;

        // eigenvectors = Q D Z
        let mut vecs = CMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for m in 0..n {
                    acc += q[(r, m)] * phases[m] * z[m][c];
                }
                vecs[(r, c)] = acc;
            }
        }
        Ok(sorted(diag, vecs))
    }
}

fn apply_right_reflector(m: &mut CMatrix, v: &[C64], beta: f64, start: usize) {
    let n = m.cols();
    for r in 0..m.rows() {
        let mut s = C64::new(0.0, 0.0);
        for j in start..n {
            s += m[(r, j)] * v[j];
        }
        if s.norm() == 0.0 {
            continue;
        }
        s *= beta;
        for j in start..n {
            let d = s * v[j].conj();
            m[(r, j)] -= d;
        }
    }
}

/// Implicit QL on a real symmetric tridiagonal matrix. `off[i]` couples
/// `i` and `i + 1`; `z` accumulates the rotations (columns are eigenvectors).
fn tql_implicit(d: &mut [f64], e: &mut [f64], z: &mut [Vec<f64>]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(CatError::SpectralFailure("QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AutoSolver;

impl Named for AutoSolver {
    fn name(&self) -> &'static str {
        "auto"
    }
}

impl HermitianEigensolver for AutoSolver {
    fn solve(&self, h: &CMatrix) -> Result<HermitianEigen> {
        if h.rows() <= JACOBI_MAX_DIM {
            Jacobi::default().solve(h)
        } else {
            HouseholderQl.solve(h)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in i + 1..n {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    fn check(solver: &dyn HermitianEigensolver, h: &CMatrix) {
        let e = solver.solve(h).unwrap();
        let n = h.rows();
        // A V = V diag
        let av = h.matmul(&e.vectors);
        for c in 0..n {
            for r in 0..n {
                let d = av[(r, c)] - e.vectors[(r, c)] * e.values[c];
                assert!(d.norm() < 1e-11, "{}: residual {}", solver.name(), d.norm());
            }
        }
        assert!(e.vectors.adjoint().matmul(&e.vectors).sub(&CMatrix::identity(n)).max_abs() < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let tr: f64 = e.values.iter().sum();
        assert!((tr - h.trace().re).abs() < 1e-10);
    }

    #[test]
    fn both_solvers_diagonalize_random_hermitian() {
        for (n, seed) in [(1, 1), (2, 2), (7, 3), (30, 4), (64, 5)] {
            let h = random_hermitian(n, seed);
            for name in ["jacobi", "householder-ql", "auto"] {
                check(eigensolvers().get(name).unwrap().as_ref(), &h);
            }
        }
    }

    #[test]
    fn solvers_agree_on_spectrum() {
        let h = random_hermitian(40, 9);
        let a = Jacobi::default().solve(&h).unwrap();
        let b = HouseholderQl.solve(&h).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn degenerate_spectrum() {
        // Projector of rank 3 in dimension 6: eigenvalues 0 (x3) and 1 (x3).
        let n = 6;
        let mut p = CMatrix::zeros(n, n);
        for i in 0..3 {
            p[(i, i)] = C64::new(1.0, 0.0);
        }
        // conjugate by a unitary built from a Hermitian eigenbasis
        let u = Jacobi::default().solve(&random_hermitian(n, 11)).unwrap().vectors;
        let h = u.matmul(&p).matmul(&u.adjoint());
        for name in ["jacobi", "householder-ql"] {
            let e = eigensolvers().get(name).unwrap().solve(&h).unwrap();
            for (i, v) in e.values.iter().enumerate() {
                let expect = if i < 3 { 0.0 } else { 1.0 };
                assert!((v - expect).abs() < 1e-12, "{name}");
            }
            check(eigensolvers().get(name).unwrap().as_ref(), &h);
        }
    }

    #[test]
    fn rejects_rectangular() {
        assert!(Jacobi::default().solve(&CMatrix::zeros(2, 3)).is_err());
    }
}
