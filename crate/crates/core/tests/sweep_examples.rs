//! Detrending-sweep behavior on constructed inputs: a polynomial trend
//! produces a crossover that vanishes at higher orders, and a clean
//! long-memory surrogate shows no crossover at all.

use fluctus_core::*;

#[test]
fn quadratic_trend_vanishes_at_order_three() {
    // Long-memory surrogate plus a strong quadratic trend: the trend's
    // profile is cubic, so linear and quadratic detrending leave a
    // crossover that cubic detrending removes exactly.
    let model = ArfimaParams::fractional(0.3).unwrap();
    let x = gen_arfima(&model, 32_400, derive_seed(0xE1, 4)).unwrap();
    let trended = add_trend(
        &x,
        &TrendSpec::Polynomial {
            amplitude: 1000.0,
            power: 2.0,
        },
    )
    .unwrap();
    let p = Profile::from_values(&trended, 1.0).unwrap();
    let sweep = detrending_sweep_profile(&p, &[1, 2, 3, 4], &ScaleConfig::default()).unwrap();

    let fired: Vec<bool> = sweep
        .per_order
        .iter()
        .map(|o| o.crossover.has_crossover)
        .collect();
    assert_eq!(fired, vec![true, true, false, false]);
    assert_eq!(sweep.classification, SweepClassification::Artificial);
    assert_eq!(sweep.recommended_order, Some(3));
}

#[test]
fn clean_long_memory_surrogate_has_no_crossover() {
    let model = ArfimaParams::fractional(0.3).unwrap();
    let x = gen_arfima(&model, 32_400, derive_seed(0xE2, 2)).unwrap();
    let p = Profile::from_values(&x, 1.0).unwrap();
    let sweep = detrending_sweep_profile(&p, &[1, 2, 3, 4], &ScaleConfig::default()).unwrap();
    assert_eq!(sweep.classification, SweepClassification::NoCrossover);
    assert_eq!(sweep.recommended_order, Some(1));
    for o in &sweep.per_order {
        assert!(
            (o.fit.alpha - 0.8).abs() < 0.05,
            "order {}: alpha {}",
            o.order,
            o.fit.alpha
        );
        assert!(o.test.reject_at_5pct, "order {} should reject d=0", o.order);
    }
}
