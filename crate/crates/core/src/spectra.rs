//! Eigendecomposition of the propagator, matrix coefficients
//! `<T(u) psi, psi>`, the discrepancy `Delta_A(f, N)` and decay experiments.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::PrimePowerModulus;
use crate::error::{CatError, Result};
use crate::format::fmt_sig12;
use crate::linalg::{self, eigensolvers, CMatrix, HermitianEigensolver, C64};
use crate::quantization::{
    apply_heisenberg, build_propagator, HeisenbergIndex, MonomialOperator, Observable, Propagator, StateVector,
};
use crate::symplectic::{matrix_order, SymplecticMatrix};
use crate::verify::rates::RateConstants;

/// Attempts with independent rotation angles before giving up.
pub const SPECTRAL_ATTEMPTS: usize = 3;
/// Eigenvalues of the rotated Hermitian part closer than this are treated
/// as one cluster and split using the rotated skew part.
const CLUSTER_TOL: f64 = 1e-6;
/// Eigenphases closer than this (on the circle) share an eigenspace.
const PHASE_TOL: f64 = 1e-6;
/// Maximum residual `||U psi - e(theta) psi||` for a unit `psi`.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Cross-eigenspace orthogonality is checked in full up to this dimension.
const FULL_ORTHOGONALITY_MAX: usize = 512;

/// Solver and randomness used by [`spectral_decomposition_with`].
#[derive(Clone)]
pub struct SpectralOptions {
    pub solver: Arc<dyn HermitianEigensolver>,
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { solver: eigensolvers().get("auto").expect("auto solver registered"), seed: 0 }
    }
}

impl SpectralOptions {
    pub fn with_solver(name: &str, seed: u64) -> Result<Self> {
        Ok(Self { solver: eigensolvers().get(name)?, seed })
    }
}

/// One eigenspace of `U`: eigenphase `theta in [0, 1)` and an orthonormal
/// basis stored as unit `l^2` columns.
#[derive(Debug, Clone)]
pub struct Eigenspace {
    pub theta: f64,
    pub basis: CMatrix,
    pub residuals: Vec<f64>,
}

impl Eigenspace {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// Basis vectors as states normalized by `sum |psi|^2 = N^d`.
    pub fn states(&self, n: u64, d: usize) -> Result<Vec<StateVector>> {
        (0..self.dim()).map(|j| StateVector::from_unit_l2(n, d, &self.basis.column(j))).collect()
    }
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    n: u64,
    d: usize,
    pub spaces: Vec<Eigenspace>,
    /// Rotation angle that produced this decomposition.
    pub angle: f64,
}

impl EigenDecomposition {
    pub fn eigenphases(&self) -> Vec<f64> {
        self.spaces.iter().map(|s| s.theta).collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.spaces.iter().map(Eigenspace::dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.spaces.iter().map(Eigenspace::dim).sum()
    }

    pub fn max_residual(&self) -> f64 {
        self.spaces.iter().flat_map(|s| s.residuals.iter().copied()).fold(0.0, f64::max)
    }

    /// Every basis vector as a normalized state.
    pub fn states(&self) -> Result<Vec<StateVector>> {
        let mut out = Vec::with_capacity(self.total_dim());
        for s in &self.spaces {
            out.extend(s.states(self.n, self.d)?);
        }
        Ok(out)
    }

    /// `sum_j e(theta_j) V_j V_j^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let dim = self.total_dim();
        let mut out = CMatrix::zeros(dim, dim);
        for s in &self.spaces {
            let ph = C64::from_polar(1.0, 2.0 * PI * s.theta);
            let part = s.basis.matmul(&s.basis.adjoint()).scale(ph);
            out = out.add(&part);
        }
        out
    }
}

/// Eigendecomposition with the default solver and seed 0.
pub fn spectral_decomposition(u: &Propagator) -> Result<EigenDecomposition> {
    spectral_decomposition_with(u, &SpectralOptions::default())
}

/// Random-rotation Hermitian reduction. For an angle `t`, the Hermitian
/// matrix `(e(t) U + conj(e(t)) U^H) / 2` has the same eigenvectors as `U`
/// with eigenvalues `cos 2 pi (theta + t)`. Clusters of equal cosines are
/// split by the companion `(e(t) U - conj(e(t)) U^H) / 2i`, then vectors
/// are grouped by their Rayleigh eigenphase and re-orthonormalized.
pub fn spectral_decomposition_with(u: &Propagator, opts: &SpectralOptions) -> Result<EigenDecomposition> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut last_err = String::new();
    for _ in 0..SPECTRAL_ATTEMPTS {
        let angle: f64 = rng.gen_range(0.0..1.0);
        match decompose_once(u, opts.solver.as_ref(), angle) {
            Ok(dec) => return Ok(dec),
            Err(e) => last_err = e,
        }
    }
    Err(CatError::SpectralFailure(last_err))
}

fn decompose_once(
    prop: &Propagator,
    solver: &dyn HermitianEigensolver,
    angle: f64,
) -> std::result::Result<EigenDecomposition, String> {
    let u = prop.matrix();
    let dim = u.rows();
    let z = C64::from_polar(1.0, 2.0 * PI * angle);
    let uh = u.adjoint();
    let zu = u.scale(z);
    let zuh = uh.scale(z.conj());
    let h_cos = zu.add(&zuh).scale(C64::new(0.5, 0.0));
    let h_sin = zu.sub(&zuh).scale(C64::new(0.0, -0.5));

    let eig = solver.solve(&h_cos).map_err(|e| e.to_string())?;
    let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(dim);
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && eig.values[end] - eig.values[end - 1] < CLUSTER_TOL {
            end += 1;
        }
        let cols: Vec<Vec<C64>> = (start..end).map(|j| eig.vectors.column(j)).collect();
        if cols.len() == 1 {
            vectors.extend(cols);
        } else {
            let v = CMatrix::from_columns(&cols);
            let s = v.adjoint().matmul(&h_sin.matmul(&v));
            let inner = solver.solve(&s).map_err(|e| e.to_string())?;
            let rotated = v.matmul(&inner.vectors);
            vectors.extend((0..rotated.cols()).map(|j| rotated.column(j)));
        }
        start = end;
    }

    // Rayleigh eigenphases.
    let mut tagged: Vec<(f64, Vec<C64>)> = vectors
        .into_iter()
        .map(|v| {
            let uv = u.matvec(&v);
            let q = linalg::dot(&uv, &v);
            (q.arg().rem_euclid(2.0 * PI) / (2.0 * PI) % 1.0, v)
        })
        .collect();
    tagged.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut groups: Vec<Vec<(f64, Vec<C64>)>> = Vec::new();
    for item in tagged {
        match groups.last_mut() {
            Some(g) if item.0 - g.last().unwrap().0 < PHASE_TOL => g.push(item),
            _ => groups.push(vec![item]),
        }
    }
    if groups.len() > 1 {
        let first = groups[0][0].0;
        let last = groups.last().unwrap().last().unwrap().0;
        if first + 1.0 - last < PHASE_TOL {
            let tail = groups.pop().unwrap();
            groups[0].extend(tail.into_iter().map(|(t, v)| (t - 1.0, v)));
        }
    }

    let mut spaces = Vec::with_capacity(groups.len());
    for g in groups {
        let m = g.len();
        let theta = circular_mean(g.iter().map(|(t, _)| *t));
        let mut vs: Vec<Vec<C64>> = g.into_iter().map(|(_, v)| v).collect();
        if linalg::orthonormalize(&mut vs, 1e-6) != m {
            return Err(format!("eigenspace at phase {theta} lost rank during orthonormalization"));
        }
        let ph = C64::from_polar(1.0, 2.0 * PI * theta);
        let mut residuals = Vec::with_capacity(m);
        for v in &vs {
            let uv = u.matvec(v);
            let r: f64 = uv.iter().zip(v).map(|(a, b)| (a - ph * b).norm_sqr()).sum::<f64>().sqrt();
            if r > RESIDUAL_TOL {
                return Err(format!("residual {r:.3e} at phase {theta}"));
            }
            residuals.push(r);
        }
        spaces.push(Eigenspace { theta, basis: CMatrix::from_columns(&vs), residuals });
    }

    if dim <= FULL_ORTHOGONALITY_MAX {
        for (i, a) in spaces.iter().enumerate() {
            for b in &spaces[i + 1..] {
                let cross = a.basis.adjoint().matmul(&b.basis).max_abs();
                if cross > RESIDUAL_TOL {
                    return Err(format!("eigenspaces {} and {} overlap by {cross:.3e}", a.theta, b.theta));
                }
            }
        }
    }
    Ok(EigenDecomposition { n: prop.n(), d: prop.d(), spaces, angle })
}

fn circular_mean(thetas: impl Iterator<Item = f64>) -> f64 {
    let s: C64 = thetas.map(|t| C64::from_polar(1.0, 2.0 * PI * t)).sum();
    (s.arg() / (2.0 * PI)).rem_euclid(1.0) % 1.0
}

/// `<T_N(u) psi, psi>` for a normalized `psi`.
pub fn matrix_coefficient(u: &HeisenbergIndex, psi: &StateVector) -> Result<C64> {
    let nrm = psi.norm_sqr();
    if (nrm - 1.0).abs() > 1e-8 {
        return Err(CatError::NotNormalized(nrm));
    }
    apply_heisenberg(u, psi)?.inner(psi)
}

/// `V^H B V` for an operator given by its action on the columns of `V`.
fn compress(space: &Eigenspace, apply: &dyn Fn(&CMatrix) -> CMatrix) -> CMatrix {
    space.basis.adjoint().matmul(&apply(&space.basis))
}

/// `(Op_N(f) - f^(0)) V`.
fn centered_observable_apply(f: &Observable, n: u64) -> Result<impl Fn(&CMatrix) -> CMatrix> {
    let mut parts = Vec::new();
    for (u, &c) in f.terms() {
        if u.iter().all(|&x| x == 0) {
            continue;
        }
        parts.push((MonomialOperator::heisenberg(&HeisenbergIndex::new(u.clone())?, n)?, c));
    }
    Ok(move |v: &CMatrix| {
        let mut out = CMatrix::zeros(v.rows(), v.cols());
        for (t, c) in &parts {
            out = out.add(&t.left_mul(v).scale(*c));
        }
        out
    })
}

/// Spectral radius of a Hermitian matrix.
pub fn hermitian_spectral_radius(m: &CMatrix) -> Result<f64> {
    if m.rows() == 1 {
        return Ok(m[(0, 0)].norm());
    }
    let eig = linalg::solve_hermitian(m)?;
    Ok(eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max))
}

/// Numerical radius `max_{|x| = 1} |x^H M x|`, computed as the maximum over
/// `phi` of the top eigenvalue of `(e^{i phi} M + e^{-i phi} M^H) / 2`.
pub fn numerical_radius(m: &CMatrix) -> Result<f64> {
    if m.rows() == 1 {
        return Ok(m[(0, 0)].norm());
    }
    let mh = m.adjoint();
    let top = |phi: f64| -> Result<f64> {
        let z = C64::from_polar(1.0, phi);
        let h = m.scale(z).add(&mh.scale(z.conj())).scale(C64::new(0.5, 0.0));
        Ok(*linalg::solve_hermitian(&h)?.values.last().expect("non-empty"))
    };
    const GRID: usize = 128;
    let step = 2.0 * PI / GRID as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..GRID {
        let phi = i as f64 * step;
        let v = top(phi)?;
        if v > best.1 {
            best = (phi, v);
        }
    }
    // golden-section refinement around the best grid angle
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (top(x1)?, top(x2)?);
    while hi - lo > 1e-10 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = top(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = top(x1)?;
        }
    }
    Ok(best.1.max(f1).max(f2))
}

/// Largest `|<T(u) psi, psi>|` over unit vectors of each eigenspace, that is
/// the numerical radius of the compression `V^H T(u) V`, maximized over
/// eigenspaces; also returns the per-basis-vector maximum.
pub fn max_matrix_coefficient(dec: &EigenDecomposition, u: &HeisenbergIndex) -> Result<(f64, f64)> {
    let t = MonomialOperator::heisenberg(u, dec.n)?;
    let mut best: f64 = 0.0;
    let mut per_vector: f64 = 0.0;
    for s in &dec.spaces {
        let c = compress(s, &|v| t.left_mul(v));
        best = best.max(numerical_radius(&c)?);
        for j in 0..c.rows() {
            per_vector = per_vector.max(c[(j, j)].norm());
        }
    }
    Ok((best, per_vector))
}

#[derive(Debug, Clone)]
pub struct DiscrepancyReport {
    pub n: u64,
    pub k: u32,
    /// `ord(A, N)`.
    pub t: u64,
    pub dim: usize,
    pub delta: f64,
    /// `(theta_j, spectral radius of the compressed centered observable)`.
    pub per_eigenspace: Vec<(f64, f64)>,
    /// `max |<(Op - f^(0)) psi, psi>|` over basis vectors only.
    pub per_vector_max: f64,
    pub observable: String,
}

/// Discrepancy for an already decomposed propagator.
pub fn discrepancy_from(
    dec: &EigenDecomposition,
    f: &Observable,
    n: u64,
    k: u32,
    t: u64,
) -> Result<DiscrepancyReport> {
    let apply = centered_observable_apply(f, n)?;
    let mut per_eigenspace = Vec::with_capacity(dec.spaces.len());
    let mut per_vector_max: f64 = 0.0;
    for s in &dec.spaces {
        let c = compress(s, &apply);
        // symmetrize away rounding before the Hermitian solve
        let c = c.add(&c.adjoint()).scale(C64::new(0.5, 0.0));
        per_eigenspace.push((s.theta, hermitian_spectral_radius(&c)?));
        for j in 0..c.rows() {
            per_vector_max = per_vector_max.max(c[(j, j)].norm());
        }
    }
    let delta = per_eigenspace.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    Ok(DiscrepancyReport {
        n,
        k,
        t,
        dim: dec.total_dim(),
        delta,
        per_eigenspace,
        per_vector_max,
        observable: f.id(),
    })
}

/// `Delta_A(f, N)` for `N = p^k`.
pub fn discrepancy(
    a: &SymplecticMatrix,
    ctx: &PrimePowerModulus,
    f: &Observable,
    opts: &SpectralOptions,
) -> Result<DiscrepancyReport> {
    if f.d() != a.d() {
        return Err(CatError::DimensionMismatch { expected: a.d(), got: f.d() });
    }
    let t = matrix_order(a, ctx.p(), ctx.k())?;
    let prop = build_propagator(a, ctx)?;
    let dec = spectral_decomposition_with(&prop, opts)?;
    discrepancy_from(&dec, f, ctx.n(), ctx.k(), t)
}

/// Least-squares slope of `log y` against `log x`; `None` with fewer than
/// two points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone)]
pub struct DecayRow {
    pub report: DiscrepancyReport,
    /// `N^{-kappa_d}`.
    pub kappa_bound: f64,
    pub slope_so_far: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DecayExperiment {
    pub rows: Vec<DecayRow>,
    pub slope: Option<f64>,
    pub kappa: f64,
    pub kappa_text: String,
}

impl DecayExperiment {
    pub const CSV_HEADER: &'static str = "k,N,T,dim,delta,kappa_bound,slope_so_far";

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for row in &self.rows {
            let r = &row.report;
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.k,
                r.n,
                r.t,
                r.dim,
                fmt_sig12(r.delta),
                fmt_sig12(row.kappa_bound),
                row.slope_so_far.map_or_else(|| "undefined".to_string(), fmt_sig12)
            )?;
        }
        Ok(())
    }

    /// Strict decrease of `Delta` along the rows.
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].report.delta < w[0].report.delta)
    }
}

/// Runs [`discrepancy`] for each `k`, fitting the slope of `log Delta`
/// against `log N` over rows with `Delta > 0`.
pub fn decay_experiment(
    a: &SymplecticMatrix,
    p: u64,
    ks: &[u32],
    f: &Observable,
    opts: &SpectralOptions,
) -> Result<DecayExperiment> {
    let rates = RateConstants::new(a.d() as u32);
    let kappa = rates.kappa_f64();
    let mut rows = Vec::with_capacity(ks.len());
    let mut points = Vec::new();
    for &k in ks {
        let ctx = PrimePowerModulus::new(p, k)?;
        let report = discrepancy(a, &ctx, f, opts)?;
        if report.delta > 0.0 {
            points.push((report.n as f64, report.delta));
        }
        let kappa_bound = (report.n as f64).powf(-kappa);
        rows.push(DecayRow { report, kappa_bound, slope_so_far: log_log_slope(&points) });
    }
    Ok(DecayExperiment { rows, slope: log_log_slope(&points), kappa, kappa_text: rates.kappa().to_string() })
}
