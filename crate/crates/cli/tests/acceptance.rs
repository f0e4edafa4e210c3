//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use catlab_core::arith::{hensel_lift_roots, PrimePowerModulus};
use catlab_core::fixtures;
use catlab_core::poly::IntPoly;
use catlab_core::quantization::{
    build_propagator, e_q, egorov_residual, heisenberg_matrix, omega, HeisenbergIndex,
};
use catlab_core::spectra::{decay_experiment, spectral_decomposition, SpectralOptions};
use catlab_core::symplectic::matrix_order;
use catlab_core::verify::{
    count_q, enumerate_solutions, exp_sum, kr_inequality_check, moment_identity, orbit_vectors,
    reduction_check, saving_sweep, spectral_data, MeetInTheMiddle, NaiveCounter, RateConstants,
};

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn heisenberg_algebra() -> Result<Outcome> {
    let start = Instant::now();
    let n = 5;
    let mut worst: f64 = 0.0;
    for c in 0..625i64 {
        let u = HeisenbergIndex::new(vec![c % 5, (c / 5) % 5])?;
        let v = HeisenbergIndex::new(vec![(c / 25) % 5, c / 125])?;
        let lhs = heisenberg_matrix(&u, n, 1)?.matmul(&heisenberg_matrix(&v, n, 1)?);
        let rhs = heisenberg_matrix(&u.add(&v), n, 1)?.scale(e_q(omega(&u, &v), 2 * n));
        worst = worst.max(lhs.sub(&rhs).max_abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-12 && elapsed < Duration::from_secs(1),
        format!("625 pairs at N=5, max error {worst:.2e}"),
    )
}

fn egorov_property() -> Result<Outcome> {
    let a = fixtures::a2();
    let mut parts = Vec::new();
    let mut pass = true;
    for k in 1..=3 {
        let start = Instant::now();
        let ctx = PrimePowerModulus::new(5, k)?;
        let u = build_propagator(&a, &ctx)?;
        let res = egorov_residual(&u, &a, 100, 0)?;
        let unit = u.unitarity_residual();
        let t = matrix_order(&a, 5, k)?;
        let ut = u.matrix().pow(t);
        let c = ut[(0, 0)];
        let scalar = ut.sub(&catlab_core::linalg::CMatrix::identity(u.dim()).scale(c)).max_abs();
        let elapsed = start.elapsed();
        pass &= res < 1e-10 && unit < 1e-10 && scalar < 1e-9 && elapsed < Duration::from_secs(60);
        parts.push(format!("k={k}: egorov {res:.1e} unitary {unit:.1e} U^{t} scalar {scalar:.1e} ({elapsed:.2?})"));
    }
    outcome(pass, parts.join("; "))
}

fn orders() -> Result<Outcome> {
    let a = fixtures::a2();
    let mut pass = true;
    let mut found = Vec::new();
    for k in 1..=6 {
        let o = matrix_order(&a, 5, k)?;
        pass &= o == 4 * 5u64.pow(k - 1);
        if k <= 3 {
            let n = 5u64.pow(k);
            let m = a.reduce_mod(n);
            let mut acc = m.clone();
            let mut brute = 1;
            while !acc.is_identity() {
                acc = acc.mul(&m);
                brute += 1;
            }
            pass &= brute == o;
        }
        found.push(o.to_string());
    }
    outcome(pass, format!("ord = {} for k = 1..6; brute force agrees for k <= 3", found.join(", ")))
}

fn hensel() -> Result<Outcome> {
    let f = IntPoly::new(vec![1, -10, 1])?;
    let mut pass = true;
    for k in 1..=12 {
        let m = 5u64.pow(k);
        let roots = hensel_lift_roots(&f, 5, k)?;
        pass &= roots.len() == 2 && roots.iter().all(|&r| f.eval_mod(r, m) == 0);
    }
    let mut at2 = hensel_lift_roots(&f, 5, 2)?;
    at2.sort_unstable();
    pass &= at2 == [12, 23];
    outcome(pass, format!("roots vanish mod 5^k for k <= 12; k=2 roots {at2:?}"))
}

fn moment_identities() -> Result<Outcome> {
    let sd = spectral_data(&fixtures::a2(), 5, 2)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (r, s, t, expected) in [(1, 1, 4, Some(100)), (1, 2, 4, Some(900)), (2, 1, 20, None), (2, 2, 20, None)] {
        let rep = moment_identity(&sd, r, s, t, &MeetInTheMiddle)?;
        pass &= rep.matches() && expected.is_none_or(|e| rep.rhs == e);
        parts.push(format!("(r={r},s={s},T={t}) lhs={:.6} rhs={}", rep.lhs, rep.rhs));
    }
    outcome(pass, parts.join("; "))
}

fn counting_oracle() -> Result<Outcome> {
    let a = fixtures::a2();
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, s) in [(1, 1), (1, 2), (2, 1)] {
        let ctx = PrimePowerModulus::new(5, k)?;
        let fast = count_q(&a, &ctx, &[1, 0], s, &MeetInTheMiddle)?;
        let naive = count_q(&a, &ctx, &[1, 0], s, &NaiveCounter)?;
        pass &= fast.count == naive.count;
        if (k, s) == (1, 1) {
            pass &= fast.count == 4;
        }
        parts.push(format!("Q_{s}({}) = {}", ctx.n(), fast.count));
    }
    outcome(pass, parts.join(", "))
}

fn kr_bridge() -> Result<Outcome> {
    let a = fixtures::a2();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=3 {
        let ctx = PrimePowerModulus::new(5, k)?;
        let dec = spectral_decomposition(&build_propagator(&a, &ctx)?)?;
        for s in 1..=2 {
            let r = kr_inequality_check(&dec, &a, &ctx, &[1, 0], s, &MeetInTheMiddle)?;
            pass &= r.lhs <= r.rhs + 1e-9;
            parts.push(format!("N={} s={s}: {:.4} <= {:.4}", r.n, r.lhs, r.rhs));
        }
    }
    outcome(pass, parts.join("; "))
}

fn reduction() -> Result<Outcome> {
    let a = fixtures::a2();
    let sd = spectral_data(&a, 5, 2)?;
    let t = matrix_order(&a, 5, 2)?;
    let vectors = orbit_vectors(&a, 25, &[1, 0], t)?;
    let solutions = enumerate_solutions(&vectors, 25, 2)?;
    let mut pass = !solutions.is_empty();
    let mut ms = std::collections::BTreeSet::new();
    for sol in &solutions {
        let r = reduction_check(&a, &sd, &[1, 0], sol)?;
        pass &= r.passed() && r.m == 0;
        ms.insert(r.m);
    }
    outcome(pass, format!("{} solutions checked, m in {ms:?}", solutions.len()))
}

fn exp_sum_saving() -> Result<Outcome> {
    let sd = spectral_data(&fixtures::a2(), 5, 3)?;
    let bound = 0.5 + 0.2;
    let mut pass = true;
    let mut parts = Vec::new();
    for r in 1..=3 {
        let sweep = saving_sweep(&sd, r)?;
        pass &= sweep.structural_ok && sweep.max_saving <= bound;
        parts.push(format!("r={r}: max saving {:.4} at a={:?}", sweep.max_saving, sweep.argmax));
    }
    let first = exp_sum(&sd, &[1, 0], 1, 4)?;
    let exact = (first.value.re + 1.0).abs() < 1e-12 && first.value.im.abs() < 1e-12;
    pass &= exact;
    parts.push(format!("S(a=(1,0), r=1) = {:.3}{:+.3}i; bound {bound}", first.value.re, first.value.im));
    outcome(pass, parts.join("; "))
}

fn discrepancy_decay() -> Result<Outcome> {
    let start = Instant::now();
    let exp = decay_experiment(&fixtures::a2(), 5, &[1, 2, 3], &fixtures::cos_x1(1), &SpectralOptions::default())?;
    let elapsed = start.elapsed();
    let slope = exp.slope.unwrap_or(f64::NAN);
    let deltas: Vec<String> = exp.rows.iter().map(|r| format!("{:.6}", r.report.delta)).collect();
    outcome(
        exp.strictly_decreasing() && slope <= -0.25 && elapsed < Duration::from_secs(300),
        format!("delta = {}; slope {slope:.4} ({elapsed:.2?})", deltas.join(" > ")),
    )
}

fn rate_constants() -> Result<Outcome> {
    let mut pass = RateConstants::new(1).kappa().to_string() == "1/4"
        && RateConstants::new(2).kappa().to_string() == "1/7";
    for d in 1..=5 {
        let rc = RateConstants::new(d);
        pass &= rc.eta(rc.s0()) == rc.kappa();
        pass &= (1..100).all(|s| rc.eta(s) < rc.eta(s + 1));
    }
    let list: Vec<String> = (1..=5).map(|d| RateConstants::new(d).kappa().to_string()).collect();
    outcome(pass, format!("kappa_1..5 = {}", list.join(", ")))
}

fn determinism() -> Result<Outcome> {
    let fixtures_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let dir = tempfile::tempdir()?;
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_catlab"))
            .args(["discrepancy", "--matrix"])
            .arg(fixtures_dir.join("a2.json"))
            .args(["-p", "5", "--k-min", "1", "--k-max", "2", "--seed", "0", "--out"])
            .arg(&out)
            .output()?;
        if !status.status.success() {
            return outcome(false, format!("run {i} exited with {}", status.status));
        }
        outputs.push(std::fs::read(&out)?);
    }
    outcome(outputs[0] == outputs[1], format!("two runs, {} bytes each", outputs[0].len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("heisenberg algebra", heisenberg_algebra),
        ("egorov property", egorov_property),
        ("orders", orders),
        ("hensel lifting", hensel),
        ("moment identity", moment_identities),
        ("counting oracle", counting_oracle),
        ("eigenfunction bound", kr_bridge),
        ("reduction", reduction),
        ("exponential-sum saving", exp_sum_saving),
        ("discrepancy decay", discrepancy_decay),
        ("rate constants", rate_constants),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name:<24} {:>8.2?}  {detail}", i + 1, start.elapsed());
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
