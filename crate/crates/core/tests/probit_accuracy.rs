//! Validates the library quantile against the independent oracle.

#[path = "support/quantile_oracle.rs"]
mod quantile_oracle;

use norms_core::detection::probit;

#[test]
fn oracle_matches_frozen_scipy_table() {
    quantile_oracle::validate_oracle();
}

#[test]
fn oracle_round_trips_through_its_own_cdf() {
    // The lower tail keeps full relative precision; above z = 0 the CDF
    // value sits close to 1.0 in f64, so the representation itself caps
    // the achievable round-trip accuracy.
    let mut z = -8.0;
    while z <= 6.0 {
        let p = quantile_oracle::normal_cdf(z);
        let tolerance = if z <= 0.0 { 1e-9 } else { 1e-6 };
        let back = quantile_oracle::quantile(p);
        assert!((back - z).abs() <= tolerance, "z={z} back={back}");
        z += 0.0625;
    }
}

#[test]
fn probit_tracks_the_oracle_across_the_full_range() {
    // 1000 log-spaced points in [1e-9, 1-1e-9], plus the mirror image so
    // both tails get equal pressure.
    let n = 1000;
    let lo: f64 = 1e-9;
    let hi: f64 = 1.0 - 1e-9;
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    let mut worst = 0.0f64;
    for i in 0..n {
        let p = lo * ratio.powi(i);
        for p in [p, 1.0 - p] {
            let got = probit(p).unwrap();
            let expected = quantile_oracle::quantile(p);
            worst = worst.max((got - expected).abs());
        }
    }
    assert!(
        worst <= 1e-7,
        "worst |probit - oracle| = {worst:e}, bound 1e-7"
    );
}

#[test]
fn probit_round_trips_through_the_oracle_cdf() {
    // |probit(Phi(z)) - z| <= 1e-6 across z in [-6, 6]
    let mut z = -6.0;
    while z <= 6.0 {
        let p = quantile_oracle::normal_cdf(z);
        let back = probit(p).unwrap();
        assert!(
            (back - z).abs() <= 1e-6,
            "probit(Phi({z})) = {back}, drift {}",
            (back - z).abs()
        );
        z += 0.013;
    }
}
