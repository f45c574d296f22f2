use fracdiff::estimators::{AffineKernels, PreparedEstimator};
use fracdiff::harness::csvio::{format_f64, read_signal, write_signal};
use fracdiff::signals::{sample_expression, GaussianStream};
use fracdiff::{
    add_noise, affine_fractional_estimate, minimal_fractional_kernel, sliding_estimate, EstimatorKind,
    EstimatorParams, FracOrder, FracTaylorSignal, NoiseSpec, SampledSignal, SignalExpr,
};
use proptest::prelude::*;

const DT: f64 = 1e-3;

fn gaussian_signal(seed: u64, len: usize) -> SampledSignal {
    let mut g = GaussianStream::new(seed);
    SampledSignal::new(0.0, DT, (0..len).map(|_| g.next_standard()).collect()).unwrap()
}

fn kind_strategy() -> impl Strategy<Value = EstimatorKind> {
    prop_oneof![
        Just(EstimatorKind::MinimalInteger),
        Just(EstimatorKind::MinimalFractional),
        Just(EstimatorKind::AffineFractional),
    ]
}

/// Orders valid for every kind: integers for the integer kind, orders with
/// `α - n >= 0.05` otherwise.
fn order_for(kind: EstimatorKind, raw: f64) -> f64 {
    match kind {
        EstimatorKind::MinimalInteger => raw.ceil(),
        _ => {
            let n = raw.floor();
            n + 0.05 + (raw - n) * 0.95
        }
    }
}

fn exps() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(0.5), Just(1.0), Just(2.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn linearity(
        kind in kind_strategy(),
        raw in 0.01f64..2.99,
        k in exps(),
        mu in exps(),
        m in 8usize..80,
        seeds in (0u64..1000, 1000u64..2000),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let alpha = order_for(kind, raw);
        let p = EstimatorParams::new(FracOrder::new(alpha).unwrap(), k, mu, m as f64 * DT, m).unwrap();
        let y1 = gaussian_signal(seeds.0, 3 * m);
        let y2 = gaussian_signal(seeds.1, 3 * m);
        let mix = y1.combine(a, &y2, b).unwrap();
        let e1 = sliding_estimate(&y1, &p, kind).unwrap();
        let e2 = sliding_estimate(&y2, &p, kind).unwrap();
        let em = sliding_estimate(&mix, &p, kind).unwrap();
        let norm = e1.values.iter().zip(&e2.values).map(|(u, v)| a.abs() * u.abs() + b.abs() * v.abs()).fold(1.0, f64::max);
        for i in 0..em.len() {
            let lhs = em.values[i];
            let rhs = a * e1.values[i] + b * e2.values[i];
            prop_assert!((lhs - rhs).abs() <= 1e-12 * norm, "i={} {} vs {}", i, lhs, rhs);
        }
    }

    #[test]
    fn affine_identity_is_bitwise(raw in 0.01f64..2.99, k in exps(), mu in exps(), seed in 0u64..10_000, m in 8usize..60) {
        let alpha = order_for(EstimatorKind::AffineFractional, raw);
        let order = FracOrder::new(alpha).unwrap();
        let p = EstimatorParams::new(order, k, mu, m as f64 * DT, m).unwrap();
        let y = gaussian_signal(seed, 2 * m);
        let lambda = fracdiff::affine_lambda(alpha, k, order.n()).unwrap();
        let e1 = minimal_fractional_kernel(&p.with_exponents(k, mu + 1.0).unwrap()).unwrap();
        let e2 = minimal_fractional_kernel(&p.with_exponents(k + 1.0, mu).unwrap()).unwrap();
        for i0 in [0, m / 2, m - 1] {
            let w = &y.values()[i0..=i0 + m];
            let expected = lambda * e1.apply(w).unwrap() + (1.0 - lambda) * e2.apply(w).unwrap();
            let got = affine_fractional_estimate(&y, &p, y.time(i0)).unwrap();
            prop_assert_eq!(got.to_bits(), expected.to_bits());
        }
    }

    #[test]
    fn sliding_matches_pointwise(raw in 0.01f64..1.99, seed in 0u64..10_000, m in 8usize..60) {
        let alpha = order_for(EstimatorKind::AffineFractional, raw);
        let p = EstimatorParams::new(FracOrder::new(alpha).unwrap(), 0.0, 0.0, m as f64 * DT, m).unwrap();
        let y = gaussian_signal(seed, 4 * m);
        let s = sliding_estimate(&y, &p, EstimatorKind::AffineFractional).unwrap();
        prop_assert_eq!(s.len(), y.len() - m);
        for i in (0..s.len()).step_by(7) {
            let v = affine_fractional_estimate(&y, &p, s.t0s[i]).unwrap();
            prop_assert_eq!(v.to_bits(), s.values[i].to_bits());
        }
    }

    #[test]
    fn csv_round_trip(values in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 2..60), t0 in -10.0f64..10.0) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let s = SampledSignal::new(t0, 0.25, values).unwrap();
        write_signal(&path, &s).unwrap();
        let back = read_signal(&path).unwrap();
        let bits = |x: &SampledSignal| x.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&s));
    }

    #[test]
    fn number_format_round_trips(x in prop::num::f64::ANY) {
        let text = format_f64(x);
        let back: f64 = text.parse().unwrap();
        if x.is_nan() {
            prop_assert!(back.is_nan());
        } else {
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}

#[test]
fn scale_covariance_on_pure_power() {
    // x(t0 + s) = s^α / Γ(α+1): every window length sees c_α = 1
    for alpha in [0.3, 0.5, 0.7, 1.4] {
        let order = FracOrder::new(alpha).unwrap();
        let c = vec![0.0; order.n() + 1];
        let sig = FracTaylorSignal::new(0.0, order, c, 1.0, None).unwrap();
        let m = 4000;
        let estimates: Vec<f64> = [0.1, 0.2, 0.4, 1.6]
            .iter()
            .map(|&t| {
                let p = EstimatorParams::new(order, 0.0, 0.0, t, m).unwrap();
                let samples: Vec<f64> = (0..=m).map(|i| sig.eval(t * i as f64 / m as f64)).collect();
                minimal_fractional_kernel(&p).unwrap().apply(&samples).unwrap()
            })
            .collect();
        for e in &estimates {
            assert!((e - 1.0).abs() < 1e-4, "alpha={alpha}: {e}");
            assert!((e - estimates[0]).abs() < 1e-12, "alpha={alpha}: {estimates:?}");
        }
    }
}

#[test]
fn prepared_estimator_shared_across_windows() {
    let y = sample_expression(&SignalExpr::ExpSin, 0.0, DT, 1500).unwrap();
    let p = EstimatorParams::for_step(FracOrder::new(0.7).unwrap(), 0.0, 0.0, 0.28, DT).unwrap();
    let prepared = PreparedEstimator::new(&p, EstimatorKind::AffineFractional).unwrap();
    let direct = AffineKernels::new(&p).unwrap();
    assert_eq!(prepared, PreparedEstimator::Affine(direct));
    let s = sliding_estimate(&y, &p, EstimatorKind::AffineFractional).unwrap();
    for i in [0, 400, s.len() - 1] {
        let v = prepared.apply(&y.values()[i..=i + p.m]).unwrap();
        assert_eq!(v.to_bits(), s.values[i].to_bits());
    }
}

#[test]
fn sliding_is_deterministic() {
    let y = add_noise(
        &sample_expression(&SignalExpr::ExpSin, 0.0, DT, 4001).unwrap(),
        &NoiseSpec { target_snr_db: 28.07, seed: 9 },
    )
    .unwrap()
    .noisy;
    let p = EstimatorParams::for_step(FracOrder::new(0.5).unwrap(), 0.0, 0.0, 0.26, DT).unwrap();
    let a = sliding_estimate(&y, &p, EstimatorKind::AffineFractional).unwrap();
    let b = sliding_estimate(&y, &p, EstimatorKind::AffineFractional).unwrap();
    assert_eq!(a, b);
}

#[test]
fn noise_calibration_and_mean() {
    for (seed, len, snr) in [(1u64, 1000usize, 28.07), (2, 4001, 28.07), (3, 2000, 10.0), (4, 5000, 40.0)] {
        let x = sample_expression(&SignalExpr::ExpSin, 0.0, DT, len).unwrap();
        let obs = add_noise(&x, &NoiseSpec { target_snr_db: snr, seed }).unwrap();
        assert!((obs.achieved_snr_db - snr).abs() <= 0.05, "{}", obs.achieved_snr_db);
        let mean = obs.noise.values().iter().sum::<f64>() / len as f64;
        assert!(mean.abs() <= 4.0 * obs.sigma / (len as f64).sqrt(), "seed {seed}: mean {mean}");
        let var = obs.noise.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / len as f64;
        assert!((var.sqrt() / obs.sigma - 1.0).abs() < 0.1);
    }
}

#[test]
fn noise_rejects_infinite_target() {
    let x = sample_expression(&SignalExpr::ExpSin, 0.0, DT, 100).unwrap();
    assert!(add_noise(&x, &NoiseSpec { target_snr_db: f64::INFINITY, seed: 1 }).is_err());
}
