//! Browser surface for the demo page: three operations, each returning a
//! JSON string so the page needs no generated TypeScript glue beyond
//! `wasm-bindgen`'s default output.
//!
//! Build with `wasm-pack build --target web crates/cccp-wasm` (or
//! `cargo build --target wasm32-unknown-unknown` plus `wasm-bindgen`); the
//! functions are ordinary Rust on native targets, which is how the tests
//! exercise them.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use cccp::bounds::{hitting_regime, unconditional_lower_bound, unconditional_upper_bound, HittingRegime};
use cccp::chain::Params;
use cccp::hitting::solve_hitting_times;
use cccp::marginal::{default_epsilon, MarginalModel};
use cccp::sim::simulate_trajectory_rep;

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable report")
}

#[derive(Serialize)]
struct ErrorReport {
    error: String,
}

fn error(msg: impl Into<String>) -> String {
    json(&ErrorReport { error: msg.into() })
}

fn regime_label(r: HittingRegime) -> &'static str {
    match r {
        HittingRegime::Classical => "Classical",
        HittingRegime::SuperClassical => "SuperClassical",
        HittingRegime::MetastableI => "Metastable I",
        HittingRegime::MetastableII => "Metastable II",
        HittingRegime::MetastableIII => "Metastable III",
        HittingRegime::Infinite => "Infinite",
    }
}

#[derive(Serialize)]
struct CurvePoint {
    p: f64,
    /// log10 of the exact expected hitting time (null when p = 1).
    h0_log10: Option<f64>,
    lb_log10: f64,
    ub_log10: Option<f64>,
    regime: &'static str,
}

/// Exact expected hitting time and rigorous bounds across a `p` grid, as a
/// JSON array. `steps` is the number of grid intervals between `p_min` and
/// `p_max` inclusive.
#[wasm_bindgen]
pub fn hitting_curve(n: usize, p_min: f64, p_max: f64, steps: u32) -> String {
    if steps == 0 || !(0.0..=1.0).contains(&p_min) || !(p_min..=1.0).contains(&p_max) {
        return error("need 0 <= p_min <= p_max <= 1 and steps >= 1");
    }
    let mut points = Vec::with_capacity(steps as usize + 1);
    for i in 0..=steps {
        let p = p_min + (p_max - p_min) * i as f64 / steps as f64;
        let params = match Params::new(n, p) {
            Ok(params) => params,
            Err(e) => return error(e.to_string()),
        };
        let q_star = MarginalModel::from_params(&params).q_star();
        let h0_log10 = solve_hitting_times(&params)
            .ok()
            .map(|sol| sol.h0().log10());
        let ub_log10 = (p < 1.0).then(|| {
            unconditional_upper_bound(&params, 0.1 * q_star)
                .expect("epsilon in range")
                .log10()
        });
        points.push(CurvePoint {
            p,
            h0_log10,
            lb_log10: unconditional_lower_bound(&params).log10(),
            ub_log10,
            regime: regime_label(hitting_regime(&params).regime),
        });
    }
    json(&points)
}

#[derive(Serialize)]
struct TrajectoryPoint {
    t: u64,
    mean_fraction: f64,
    theory: f64,
}

#[derive(Serialize)]
struct TrajectoryReport {
    q_star: f64,
    t_mix: u64,
    points: Vec<TrajectoryPoint>,
}

/// Mean collection fraction `|S_t|/n` over seeded replications, with the
/// closed-form marginal `q_t` for comparison and the fixed point `q*`.
#[wasm_bindgen]
pub fn trajectory_mean(n: usize, p: f64, horizon: u32, runs: u32, seed: u64) -> String {
    if horizon == 0 || runs == 0 || horizon > 200_000 || runs > 10_000 {
        return error("need 1 <= horizon <= 200000 and 1 <= runs <= 10000");
    }
    let params = match Params::new(n, p) {
        Ok(params) => params,
        Err(e) => return error(e.to_string()),
    };
    let model = MarginalModel::from_params(&params);
    let mut sum = vec![0.0f64; horizon as usize + 1];
    for r in 0..runs as u64 {
        let rec = simulate_trajectory_rep(&params, seed, r, horizon as u64);
        for (t, &k) in rec.sizes.iter().enumerate() {
            sum[t] += k as f64;
        }
    }
    let scale = 1.0 / (runs as f64 * n as f64);
    let points = sum
        .iter()
        .enumerate()
        .map(|(t, &s)| TrajectoryPoint {
            t: t as u64,
            mean_fraction: s * scale,
            theory: model.q_at(t as u64, 0.0),
        })
        .collect();
    json(&TrajectoryReport {
        q_star: model.q_star(),
        t_mix: model.mixing_time(default_epsilon(&params)),
        points,
    })
}

#[derive(Serialize)]
struct Summary {
    n: usize,
    p: f64,
    q_star: f64,
    t_mix: u64,
    regime: &'static str,
    scale_log10: f64,
    h0_log10: Option<f64>,
    lb_log10: f64,
    ub_log10: Option<f64>,
}

/// One-instance summary: fixed point, mixing time, regime, and the exact
/// value with its rigorous sandwich (all hitting quantities as log10).
#[wasm_bindgen]
pub fn instance_summary(n: usize, p: f64) -> String {
    let params = match Params::new(n, p) {
        Ok(params) => params,
        Err(e) => return error(e.to_string()),
    };
    let model = MarginalModel::from_params(&params);
    let q_star = model.q_star();
    let regime = hitting_regime(&params);
    json(&Summary {
        n,
        p,
        q_star,
        t_mix: model.mixing_time(default_epsilon(&params)),
        regime: regime_label(regime.regime),
        scale_log10: regime.scale.log10(),
        h0_log10: solve_hitting_times(&params).ok().map(|sol| sol.h0().log10()),
        lb_log10: unconditional_lower_bound(&params).log10(),
        ub_log10: (p < 1.0)
            .then(|| unconditional_upper_bound(&params, 0.1 * q_star).expect("valid epsilon").log10()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_has_expected_shape() {
        let v: serde_json::Value = serde_json::from_str(&hitting_curve(10, 0.0, 0.1, 5)).unwrap();
        let points = v.as_array().unwrap();
        assert_eq!(points.len(), 6);
        assert!((points[0]["h0_log10"].as_f64().unwrap() - 29.2897f64.log10()).abs() < 1e-6);
        let mut prev = f64::NEG_INFINITY;
        for pt in points {
            let h = pt["h0_log10"].as_f64().unwrap();
            assert!(h >= prev);
            assert!(pt["lb_log10"].as_f64().unwrap() <= h);
            assert!(h <= pt["ub_log10"].as_f64().unwrap());
            prev = h;
        }
    }

    #[test]
    fn curve_handles_p_one_endpoint() {
        let v: serde_json::Value = serde_json::from_str(&hitting_curve(5, 0.8, 1.0, 2)).unwrap();
        let last = &v.as_array().unwrap()[2];
        assert!(last["h0_log10"].is_null());
        assert_eq!(last["regime"], "Infinite");
    }

    #[test]
    fn trajectory_tracks_theory() {
        let v: serde_json::Value =
            serde_json::from_str(&trajectory_mean(10, 0.1, 50, 400, 1)).unwrap();
        assert!((v["q_star"].as_f64().unwrap() - 0.9 / 1.9).abs() < 1e-12);
        let points = v["points"].as_array().unwrap();
        assert_eq!(points.len(), 51);
        assert_eq!(points[0]["mean_fraction"].as_f64(), Some(0.0));
        for pt in points {
            let diff =
                (pt["mean_fraction"].as_f64().unwrap() - pt["theory"].as_f64().unwrap()).abs();
            assert!(diff < 0.08, "at t = {}: {diff}", pt["t"]);
        }
    }

    #[test]
    fn summary_fields() {
        let v: serde_json::Value = serde_json::from_str(&instance_summary(100, 0.01)).unwrap();
        assert_eq!(v["regime"], "Metastable II");
        assert!((v["scale_log10"].as_f64().unwrap() - 30.3).abs() < 0.5);
        let h = v["h0_log10"].as_f64().unwrap();
        assert!(v["lb_log10"].as_f64().unwrap() <= h);
        assert!(h <= v["ub_log10"].as_f64().unwrap());
    }

    #[test]
    fn bad_input_reports_error_json() {
        let v: serde_json::Value = serde_json::from_str(&hitting_curve(10, 0.5, 0.1, 5)).unwrap();
        assert!(v["error"].is_string());
        let v: serde_json::Value = serde_json::from_str(&instance_summary(0, 0.1)).unwrap();
        assert!(v["error"].is_string());
    }
}
