//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! with the measured values, then asserts.

use std::process::Command;
use std::time::{Duration, Instant};

use pais_uhlenbeck::verify::{run_suite, SuiteResult, VerifyConfig};

fn report(id: u32, label: &str, ok: bool, detail: &str) {
    println!("{} criterion {id:>2} {label}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn summarize(r: &SuiteResult) -> String {
    let failing: Vec<String> = r
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| match c.target {
            Some(t) => format!("{} (value {:.4}, target {t} +/- {:.2e})", c.name, c.value, c.tolerance),
            None => format!("{} (value {:.4e}, tol {:.4e})", c.name, c.value, c.tolerance),
        })
        .collect();
    let mut s = format!("{} checks in {:.2}s", r.checks.len(), r.elapsed.as_secs_f64());
    if !failing.is_empty() {
        s.push_str("; failing: ");
        s.push_str(&failing.join("; "));
    }
    if let Some(e) = &r.error {
        s.push_str("; error: ");
        s.push_str(e);
    }
    s
}

fn criterion(id: u32, label: &str, budget: Duration) {
    let r = run_suite(id, &VerifyConfig::default());
    let in_budget = r.elapsed <= budget;
    let ok = r.passed() && in_budget;
    let mut detail = summarize(&r);
    if !in_budget {
        detail.push_str(&format!("; over budget {:.0}s", budget.as_secs_f64()));
    }
    report(id, label, ok, &detail);
    assert!(ok, "criterion {id}: {detail}");
}

#[test]
fn acceptance_01_regimes_and_frequencies() {
    criterion(1, "regimes, frequencies, Vieta", Duration::from_secs(1));
}

#[test]
fn acceptance_02_canonical_structure() {
    criterion(2, "symplectic maps and Hamiltonian identities", Duration::from_secs(1));
}

#[test]
fn acceptance_03_classical_dynamics() {
    criterion(3, "RK4 vs closed form, energy drift", Duration::from_secs(5));
}

#[test]
fn acceptance_04_spectra() {
    criterion(4, "level formulas and truncated eigensolve", Duration::from_secs(10));
}

#[test]
fn acceptance_05_eigenfunction_residuals() {
    criterion(5, "orthonormality and FD residuals", Duration::from_secs(10));
}

#[test]
fn acceptance_06_quadrature_vs_closed_form() {
    criterion(6, "quadrature form equals closed form", Duration::from_secs(30));
}

#[test]
fn acceptance_07_equal_frequency_limit() {
    criterion(7, "monotone convergence to the Bessel eigenfunctions", Duration::from_secs(120));
}

#[test]
fn acceptance_08_sqrt_epsilon_prefactor() {
    criterion(8, "norm ratio slope 0.5", Duration::from_secs(120));
}

#[test]
fn acceptance_09_adjoint_blowup() {
    criterion(9, "adjoint coefficient slope -2", Duration::from_secs(10));
}

#[test]
fn acceptance_10_degenerate_algebra() {
    criterion(10, "degenerate algebra for mu in {1, 2}", Duration::from_secs(10));
}

#[test]
fn acceptance_11_exact_structure() {
    criterion(11, "exact Jordan structure and zero norms, n <= 64", Duration::from_secs(60));
}

#[test]
fn acceptance_12_verify_all_exits_zero() {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_pu")).arg("verify-all").output().expect("binary runs");
    let stdout = String::from_utf8_lossy(&out.stdout);
    let failed: Vec<&str> = stdout.lines().filter(|l| l.starts_with("FAIL suite")).collect();
    let ok = out.status.code() == Some(0);
    let detail = format!("exit {:?} in {:.1}s; {}", out.status.code(), start.elapsed().as_secs_f64(), if failed.is_empty() { "no failing suites".to_string() } else { failed.join(" | ") });
    report(12, "verify-all on default config", ok, &detail);
    assert!(ok, "{detail}");
}
