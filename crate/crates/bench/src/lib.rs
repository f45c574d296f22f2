//! Fixtures shared by the benchmarks.

use fracdiff::{EstimatorParams, FracOrder, SampledSignal, SignalExpr};

/// `exp_sin` sampled on `[0, 4]` at `dt = 1e-3`.
pub fn exp_sin_fixture() -> SampledSignal {
    fracdiff::signals::sample_expression(&SignalExpr::ExpSin, 0.0, 1e-3, 4001).expect("fixture signal")
}

pub fn params(alpha: f64, window: f64) -> EstimatorParams {
    let order = FracOrder::new(alpha).expect("order");
    EstimatorParams::for_step(order, 0.0, 0.0, window, 1e-3).expect("params")
}
