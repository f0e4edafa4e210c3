//! The verification battery behind `catlab verify`: one pass/fail result
//! per checked statement.

use std::fmt;

use crate::arith::{lcm, PrimePowerModulus};
use crate::error::Result;
use crate::quantization::{build_propagator, egorov_residual};
use crate::spectra::{spectral_decomposition_with, SpectralOptions};
use crate::symplectic::{matrix_order, SymplecticMatrix};

use super::counting::{enumerate_solutions, orbit_vectors, CongruenceCounter};
use super::expsum::{exp_sum, moment_identity, saving_sweep};
use super::checks::{kr_inequality_check, reduction_check};
use super::spectral_data::spectral_data;

/// Tolerance for the Egorov residual and propagator unitarity.
pub const EGOROV_TOL: f64 = 1e-10;
/// Random `u` sampled per modulus in the Egorov check.
pub const EGOROV_SAMPLES: usize = 100;
/// Slack added to `1 - 1/(2d)` in the saving diagnostic.
pub const SAVING_SLACK: f64 = 0.2;

pub struct SuiteConfig<'a> {
    pub matrix: SymplecticMatrix,
    pub p: u64,
    pub k_max: u32,
    pub s_max: u32,
    pub u: Vec<i64>,
    pub seed: u64,
    /// Swap two propagator columns before the Egorov check.
    pub fault: bool,
    pub counter: &'a dyn CongruenceCounter,
    pub spectral: SpectralOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub params: String,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<20} [{}] {}", self.name, self.params, self.detail)
    }
}

fn check(name: &'static str, params: String, outcome: Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((pass, detail)) => CheckResult { name, params, pass, detail },
        Err(e) => CheckResult { name, params, pass: false, detail: format!("error: {e}") },
    }
}

fn egorov(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut worst_unitary: f64 = 0.0;
    for k in 1..=cfg.k_max {
        let ctx = PrimePowerModulus::new(cfg.p, k)?;
        let mut prop = build_propagator(&cfg.matrix, &ctx)?;
        if cfg.fault {
            prop = prop.with_swapped_columns(0, 1);
        }
        worst_unitary = worst_unitary.max(prop.unitarity_residual());
        worst = worst.max(egorov_residual(&prop, &cfg.matrix, EGOROV_SAMPLES, cfg.seed)?);
    }
    Ok((
        worst < EGOROV_TOL && worst_unitary < EGOROV_TOL,
        format!("max residual {worst:.3e}, unitarity {worst_unitary:.3e}"),
    ))
}

fn eigenfunction_bound(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let mut all = true;
    let mut parts = Vec::new();
    for k in 1..=cfg.k_max {
        let ctx = PrimePowerModulus::new(cfg.p, k)?;
        let prop = build_propagator(&cfg.matrix, &ctx)?;
        let dec = spectral_decomposition_with(&prop, &cfg.spectral)?;
        for s in 1..=cfg.s_max {
            let r = kr_inequality_check(&dec, &cfg.matrix, &ctx, &cfg.u, s, cfg.counter)?;
            all &= r.holds;
            parts.push(format!("N={} s={}: {:.4} <= {:.4}", r.n, s, r.lhs, r.rhs));
        }
    }
    Ok((all, parts.join("; ")))
}

fn reduction(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let k = cfg.k_max;
    let n = cfg.p.pow(k);
    let sd = spectral_data(&cfg.matrix, cfg.p, k)?;
    let t = matrix_order(&cfg.matrix, cfg.p, k)?;
    let vectors = orbit_vectors(&cfg.matrix, n, &cfg.u, t)?;
    let mut checked = 0usize;
    let mut m = 0;
    let mut all = true;
    for s in 1..=cfg.s_max {
        for sol in enumerate_solutions(&vectors, n, s)? {
            let r = reduction_check(&cfg.matrix, &sd, &cfg.u, &sol)?;
            all &= r.passed();
            m = r.m;
            checked += 1;
        }
    }
    Ok((all, format!("{checked} solutions at N={n}, m={m}")))
}

fn korobov_orders(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let k_top = cfg.k_max + 2;
    let sd = spectral_data(&cfg.matrix, cfg.p, k_top)?;
    let base = sd.orders_mod(1)?;
    let mut all = true;
    let mut orders = Vec::new();
    for k in 1..=k_top {
        // matrix_order cross-checks against direct powering for small p^k
        let o = matrix_order(&cfg.matrix, cfg.p, k)?;
        let mut predicted = 1;
        for (i, &o1) in base.iter().enumerate() {
            let g = sd.gammas[i];
            let lam = if k >= g { o1 * cfg.p.pow(k - g) } else { sd.orders_mod(k)?[i] };
            predicted = lcm(predicted, lam);
        }
        all &= o == predicted;
        if cfg.p.pow(k) <= 10_000 {
            all &= cfg.matrix.reduce_mod(cfg.p.pow(k)).pow(o).is_identity();
        }
        orders.push(o.to_string());
    }
    Ok((all, format!("ord = {} for k = 1..{k_top}", orders.join(", "))))
}

fn exp_sums(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let sd = spectral_data(&cfg.matrix, cfg.p, cfg.k_max)?;
    let width = 2 * cfg.matrix.d();
    let mut e1 = vec![0i64; width];
    e1[0] = 1;
    let first = exp_sum(&sd, &e1, 1, sd.orders_mod(1)?.into_iter().fold(1, lcm))?;
    let mut all = true;
    let mut max_saving = f64::NEG_INFINITY;
    let mut argmax = (0, Vec::new());
    for r in 1..=cfg.k_max {
        let sweep = saving_sweep(&sd, r)?;
        all &= sweep.structural_ok;
        if sweep.max_saving > max_saving {
            max_saving = sweep.max_saving;
            argmax = (r, sweep.argmax.clone());
        }
    }
    let target = 1.0 - 1.0 / width as f64 + SAVING_SLACK;
    let first_ok = (first.value.re + 1.0).abs() < 1e-12 && first.value.im.abs() < 1e-12;
    let detail = format!(
        "|S| <= t_r and t_r | lcm orders; S(e_1, r=1) = {:.3}{:+.3}i; max saving {:.4} at r={} a={:?} (diagnostic target {:.2})",
        first.value.re, first.value.im, max_saving, argmax.0, argmax.1, target
    );
    Ok((all && first_ok, detail))
}

fn moments(cfg: &SuiteConfig) -> Result<(bool, String)> {
    let sd = spectral_data(&cfg.matrix, cfg.p, cfg.k_max)?;
    let mut all = true;
    let mut parts = Vec::new();
    for r in 1..=cfg.k_max {
        let t = matrix_order(&cfg.matrix, cfg.p, r)?;
        for s in 1..=cfg.s_max {
            let rep = moment_identity(&sd, r, s, t, cfg.counter)?;
            all &= rep.matches();
            parts.push(format!("r={r} s={s}: {}", rep.rhs));
        }
    }
    Ok((all, parts.join("; ")))
}

/// Runs every check; the results are in a fixed order.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<CheckResult> {
    let base = format!("p={} k<={}", cfg.p, cfg.k_max);
    let with_s = format!("{base} s<={} u={:?}", cfg.s_max, cfg.u);
    vec![
        check("egorov", base.clone(), egorov(cfg)),
        check("eigenfunction-bound", with_s.clone(), eigenfunction_bound(cfg)),
        check("reduction", with_s, reduction(cfg)),
        check("korobov-orders", base.clone(), korobov_orders(cfg)),
        check("exp-sum", base.clone(), exp_sums(cfg)),
        check("moment-identity", format!("{base} s<={}", cfg.s_max), moments(cfg)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::verify::counting::MeetInTheMiddle;

    fn cfg(fault: bool) -> SuiteConfig<'static> {
        SuiteConfig {
            matrix: fixtures::a2(),
            p: 5,
            k_max: 2,
            s_max: 2,
            u: vec![1, 0],
            seed: 0,
            fault,
            counter: &MeetInTheMiddle,
            spectral: SpectralOptions::default(),
        }
    }

    #[test]
    fn default_suite_passes() {
        let results = run_suite(&cfg(false));
        assert_eq!(results.len(), 6);
        for r in &results {
            assert!(r.pass, "{r}");
        }
    }

    #[test]
    fn fault_fails_egorov_only() {
        let results = run_suite(&cfg(true));
        assert!(!results[0].pass);
        assert!(results[1..].iter().all(|r| r.pass));
    }
}
