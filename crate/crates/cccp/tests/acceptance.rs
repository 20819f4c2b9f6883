//! Acceptance gate: one test per release criterion, each printing a
//! `[PASS]`/`[FAIL]` line (visible with `--nocapture`).
//!
//! Run with `cargo test --test acceptance -- --nocapture --test-threads=1`
//! to get the per-criterion report in order.

use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use cccp::bounds::{unconditional_lower_bound, unconditional_upper_bound};
use cccp::chain::{step_full, FullState, Params};
use cccp::hitting::{
    dense_oracle_solve, expected_hitting_time, harmonic, solve_hitting_times,
};
use cccp::marginal::MarginalModel;
use cccp::sim::{
    batch_hitting_stats, estimate_marginal, replication_rng, simulate_coupled,
    simulate_trajectory_rep,
};
use rand::Rng;

fn params(n: usize, p: f64) -> Params {
    Params::new(n, p).unwrap()
}

/// Criteria 1, 3, 6 and 12 carry wall-clock budgets, so the whole suite
/// runs serialized regardless of the harness thread count: concurrent
/// criteria would bill each other's CPU time.
fn serialize() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn report(id: u32, what: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id}: {what} — {detail}");
    assert!(pass, "criterion {id} failed: {detail}");
}

#[test]
fn criterion_01_classical_baseline() {
    let _serial = serialize();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 1..=1000usize {
        let h0 = expected_hitting_time(&params(n, 0.0)).unwrap();
        let exact = n as f64 * harmonic(n);
        worst = worst.max(((h0 - exact) / exact).abs());
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && elapsed.as_secs_f64() < 10.0;
    report(
        1,
        "p=0 matches n·H_n for n in 1..=1000",
        pass,
        &format!("max rel err {worst:.2e}, {:.2}s", elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_02_n1_closed_form() {
    let _serial = serialize();
    let mut worst = 0.0f64;
    let grid: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).chain([0.99]).collect();
    for &p in &grid {
        let h0 = expected_hitting_time(&params(1, p)).unwrap();
        let exact = 1.0 / (1.0 - p);
        worst = worst.max(((h0 - exact) / exact).abs());
    }
    report(
        2,
        "n=1 equals 1/(1-p) to 1e-12",
        worst <= 1e-12,
        &format!("max rel err {worst:.2e}"),
    );
}

#[test]
fn criterion_03_solver_vs_oracle() {
    let _serial = serialize();
    // Expected to fail: a double-precision dense LU with partial pivoting
    // has forward error ~ u·h(0) (the system's condition number), and h(0)
    // reaches ~1e270 inside this grid while still being finite. The
    // specialized solver is the accurate side — it is validated to 1e-13
    // against a 120-digit-precision elimination in the unit tests — so the
    // disagreement recorded here measures the oracle's breakdown, not a
    // product defect. See the README's numerical-accuracy note.
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_at = (0usize, 0.0f64);
    let mut compared = 0u32;
    for n in 1..=200usize {
        for &p in &[0.0, 0.01, 0.1, 0.3, 0.6, 0.9] {
            let fast = solve_hitting_times(&params(n, p)).unwrap();
            let slow = dense_oracle_solve(&params(n, p)).unwrap();
            let mut any_finite = false;
            for (a, b) in fast.h.iter().zip(&slow.h) {
                if !a.is_finite() || !b.is_finite() {
                    continue;
                }
                any_finite = true;
                let rel = ((a - b) / b).abs();
                if rel > worst {
                    worst = rel;
                    worst_at = (n, p);
                }
            }
            if any_finite {
                compared += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && elapsed.as_secs_f64() < 60.0;
    report(
        3,
        "Hessenberg vs dense-LU oracle to 1e-9 over n<=200 grid",
        pass,
        &format!(
            "max rel diff {worst:.2e} at (n={}, p={}), {compared} grid points, {:.1}s",
            worst_at.0,
            worst_at.1,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_04_rigorous_sandwich() {
    let _serial = serialize();
    let mut violations = 0u32;
    let mut checked = 0u32;
    for n in 2..=12usize {
        for &p in &[0.05, 0.1, 0.2, 0.3, 0.5] {
            let pr = params(n, p);
            let q_star = MarginalModel::from_params(&pr).q_star();
            let sol = solve_hitting_times(&pr).unwrap();
            assert!(!sol.overflow);
            let ln_h0 = sol.h0().ln();
            let lb = unconditional_lower_bound(&pr);
            let ub = unconditional_upper_bound(&pr, 0.1 * q_star).unwrap();
            checked += 1;
            if lb.ln() > ln_h0 + 1e-12 || ln_h0 > ub.ln() + 1e-12 {
                violations += 1;
            }
        }
    }
    report(
        4,
        "1/(5 q*^n) <= h(0) <= T_mix + ceil(n ln n)/rho on the 2..=12 grid",
        violations == 0,
        &format!("{violations} violations over {checked} instances"),
    );
}

#[test]
fn criterion_05_hand_checked_instance() {
    let _serial = serialize();
    let h0 = expected_hitting_time(&params(2, 0.1)).unwrap();
    let err = (h0 - 3.7311).abs();
    report(
        5,
        "h(0) at (n=2, p=0.1) equals 3.7311 within 1e-3",
        err <= 1e-3,
        &format!("h(0) = {h0:.6}, abs err {err:.2e}"),
    );
}

#[test]
fn criterion_06_monte_carlo_vs_exact() {
    let _serial = serialize();
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for &p in &[0.0, 0.01, 0.05, 0.1] {
        let pr = params(10, p);
        let exact = expected_hitting_time(&pr).unwrap();
        let stats = batch_hitting_stats(&pr, 20_000, 20_260_823, 1_000_000);
        let mean = stats.mean.unwrap();
        let se = stats.stderr().unwrap();
        let z = (mean - exact).abs() / se;
        if stats.censored != 0 || z > 3.0 {
            pass = false;
        }
        details.push(format!("p={p}: z={z:.2}, censored={}", stats.censored));
    }
    let elapsed = start.elapsed();
    pass = pass && elapsed.as_secs_f64() < 120.0;
    report(
        6,
        "sample mean within 3 SE of exact h(0), no censoring",
        pass,
        &format!("{} ({:.1}s)", details.join("; "), elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_07_marginal_law() {
    let _serial = serialize();
    let pr = params(10, 0.1);
    let model = MarginalModel::from_params(&pr);
    let mut pass = true;
    let mut details = Vec::new();
    for &t in &[1u64, 5, 20] {
        let est = estimate_marginal(&pr, t, 100_000, 7_700 + t);
        let q = model.q_at(t, 0.0);
        let z = (est.estimate - q).abs() / est.stderr;
        if z > 3.0 {
            pass = false;
        }
        details.push(format!("t={t}: emp={:.4} vs q_t={q:.4}, z={z:.2}", est.estimate));
    }
    report(
        7,
        "empirical Pr(1 in S_t) within 3 SE of closed-form q_t",
        pass,
        &details.join("; "),
    );
}

#[test]
fn criterion_08_monotone_coupling() {
    let _serial = serialize();
    let mut rng = replication_rng(0x5EED_C0DE, 0);
    let mut violations = 0u32;
    for trial in 0..1000u64 {
        let n = rng.random_range(1..=10usize);
        let mut p1: f64 = rng.random_range(0.0..0.95);
        let mut p2: f64 = rng.random_range(0.0..0.95);
        if p1 > p2 {
            std::mem::swap(&mut p1, &mut p2);
        }
        let out = simulate_coupled(&params(n, p1), &params(n, p2), trial, 10_000).unwrap();
        if !out.inclusion_held {
            violations += 1;
        }
    }
    report(
        8,
        "pathwise inclusion over 1000 coupled runs",
        violations == 0,
        &format!("{violations} violations"),
    );
}

#[test]
fn criterion_09_metastability_plateau_and_band() {
    let _serial = serialize();
    // Plateau: n=200, p=2/200, mean |S_t|/n over 1000 runs within 0.03 of
    // q* throughout [T_mix, T_mix + 5000].
    let pr = params(200, 2.0 / 200.0);
    let model = MarginalModel::from_params(&pr);
    let q_star = model.q_star();
    let t_mix = model.mixing_time(q_star / 200.0);
    let horizon = t_mix + 5000;
    let runs = 1000u64;
    let mut sum = vec![0.0f64; horizon as usize + 1];
    for r in 0..runs {
        let rec = simulate_trajectory_rep(&pr, 0x3_1415, r, horizon);
        for (t, &k) in rec.sizes.iter().enumerate() {
            sum[t] += k as f64;
        }
    }
    let mut plateau_worst = 0.0f64;
    for t in t_mix as usize..=horizon as usize {
        let mean_frac = sum[t] / runs as f64 / 200.0;
        plateau_worst = plateau_worst.max((mean_frac - q_star).abs());
    }
    let plateau_ok = plateau_worst <= 0.03;

    // Band violations: n=300, p=2/300, delta=0.2; a run violates when
    // |S_t|/n leaves the band q* +- 2 delta q* anywhere in a 1e4-step
    // window after T_mix(delta q*/2). At most 1% of 100 runs.
    let pr = params(300, 2.0 / 300.0);
    let model = MarginalModel::from_params(&pr);
    let q_star = model.q_star();
    let delta = 0.2;
    let t_mix = model.mixing_time(delta * q_star / 2.0);
    let window = 10_000u64;
    let mut violating_runs = 0u32;
    for r in 0..100u64 {
        let rec = simulate_trajectory_rep(&pr, 0x2_7182, r, t_mix + window);
        let violated = rec.sizes[t_mix as usize..]
            .iter()
            .any(|&k| (k as f64 / 300.0 - q_star).abs() > 2.0 * delta * q_star);
        if violated {
            violating_runs += 1;
        }
    }
    let band_ok = violating_runs <= 1;

    report(
        9,
        "metastable plateau (n=200) and band occupancy (n=300)",
        plateau_ok && band_ok,
        &format!(
            "plateau max dev {plateau_worst:.4} (cap 0.03); {violating_runs}/100 band-violating runs (cap 1)"
        ),
    );
}

#[test]
fn criterion_10_negative_covariance() {
    let _serial = serialize();
    let pr = params(5, 0.2);
    let t = 30u64;
    let runs = 100_000u64;
    let mut x_sum = 0.0f64; // indicator {1 in S_t}
    let mut y_sum = 0.0f64; // indicator {2 in S_t}
    let mut xy_sum = 0.0f64;
    for r in 0..runs {
        let mut rng = replication_rng(0xC0_7A11, r);
        let mut state = FullState::empty();
        for _ in 0..t {
            state = step_full(&state, &pr, &mut rng);
        }
        let x = state.contains(1) as u32 as f64;
        let y = state.contains(2) as u32 as f64;
        x_sum += x;
        y_sum += y;
        xy_sum += x * y;
    }
    let m = runs as f64;
    let (ex, ey, exy) = (x_sum / m, y_sum / m, xy_sum / m);
    let cov = exy - ex * ey;
    // SE of the sample covariance of two Bernoullis, delta-method estimate.
    let var_xy = exy * (1.0 - exy);
    let se = ((var_xy + ex * ex * ey * (1.0 - ey) + ey * ey * ex * (1.0 - ex)) / m).sqrt();
    report(
        10,
        "empirical Cov(1 in S_t, 2 in S_t) <= +3 SE of 0",
        cov <= 3.0 * se,
        &format!("cov = {cov:.5}, 3 SE = {:.5}", 3.0 * se),
    );
}

#[test]
fn criterion_11_monotone_in_p() {
    let _serial = serialize();
    let mut prev = 0.0f64;
    let mut pass = true;
    for i in 0..=25 {
        let p = i as f64 * 0.02;
        let h0 = expected_hitting_time(&params(10, p)).unwrap();
        if h0 < prev {
            pass = false;
        }
        prev = h0;
    }
    report(
        11,
        "exact h(0) nondecreasing across p = 0:0.5:0.02 at n=10",
        pass,
        &format!("final h(0) = {prev:.4e}"),
    );
}

#[test]
fn criterion_12_quadratic_scaling() {
    let _serial = serialize();
    // p chosen so h stays finite at both sizes and the residual pass (also
    // O(n^2)) is exercised identically.
    let time_solve = |n: usize| {
        let pr = params(n, 1e-5);
        let mut best = f64::INFINITY;
        for _ in 0..3 {
            let start = Instant::now();
            let sol = solve_hitting_times(&pr).unwrap();
            assert!(!sol.overflow);
            best = best.min(start.elapsed().as_secs_f64());
        }
        best
    };
    let t2000 = time_solve(2000);
    let t4000 = time_solve(4000);
    let ratio = t4000 / t2000;
    report(
        12,
        "solve time at n=4000 is 3x-6x that at n=2000",
        (3.0..=6.0).contains(&ratio),
        &format!("t(2000) = {t2000:.3}s, t(4000) = {t4000:.3}s, ratio {ratio:.2}"),
    );
}
