//! Scaling probes over sweeps: convergence step versus n log n, and the
//! direction of the total-weight effect.

use diverse_pop::harness::stats::regression_slope;
use diverse_pop::harness::{run_sweep, EngineKind, ExperimentConfig, InitialCondition};

fn sweep_config(n: u64, weights: Vec<f64>, steps: u64) -> ExperimentConfig {
    let mut config = ExperimentConfig::minimal(n, weights, steps, 0);
    config.initial = InitialCondition::AdversarialWorst;
    config.engine = EngineKind::Counts;
    config
}

#[test]
fn convergence_step_scales_like_n_log_n() {
    // median convergence step across n in {1e3, 1e4, 1e5} at fixed weights;
    // log-log slope against n ln n within 1 +- 0.15
    let seeds = [1u64, 2, 3, 4, 5];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in &[1_000u64, 10_000, 100_000] {
        let w = 2.0f64;
        let horizon = (8.0 * w * w * n as f64 * (n as f64).ln()).ceil() as u64;
        let config = sweep_config(n, vec![1.0, 1.0], horizon);
        let outcome = run_sweep(&config, &seeds, Some(1)).unwrap();
        assert!(outcome.complete);
        let median = outcome
            .median_convergence_step()
            .unwrap_or_else(|| panic!("no convergence at n = {n}"));
        xs.push((n as f64 * (n as f64).ln()).ln());
        ys.push(median.ln());
    }
    let slope = regression_slope(&xs, &ys).unwrap();
    assert!(
        (slope - 1.0).abs() <= 0.15,
        "log-log slope of median convergence vs n ln n is {slope:.3}"
    );
}

#[test]
fn heavier_weights_slow_convergence() {
    // doubling every weight doubles w and slows the coin; the median
    // convergence step must increase (direction only)
    let seeds = [11u64, 12, 13, 14, 15];
    let n = 2_000u64;
    let horizon = 4_000_000u64;
    let light = run_sweep(&sweep_config(n, vec![1.0, 1.0], horizon), &seeds, Some(1)).unwrap();
    let heavy = run_sweep(&sweep_config(n, vec![2.0, 2.0], horizon), &seeds, Some(1)).unwrap();
    let light_median = light.median_convergence_step().expect("light sweep converged");
    let heavy_median = heavy.median_convergence_step().expect("heavy sweep converged");
    assert!(
        heavy_median > light_median,
        "doubling w should slow convergence: {light_median:.0} -> {heavy_median:.0}"
    );
}
