//! Independent standard-normal quantile oracle used only by tests.
//!
//! This is deliberately a different algorithm from the library's quantile
//! routine: the CDF is computed from a Taylor series around zero and the
//! Laplace continued fraction in the tails, and the quantile is recovered
//! by bisection plus Newton polish. Nothing here is shared with the
//! implementation under test.
//!
//! Shared by several test targets via `#[path]`; not every target uses
//! every helper.
#![allow(dead_code)]

const INV_SQRT_2PI: f64 = 0.3989422804014327;

pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Phi(z) - 0.5 via the Taylor series; accurate near the center.
fn cdf_taylor(z: f64) -> f64 {
    let zz = z * z;
    let mut term = z;
    let mut total = z;
    for k in 1..=500u32 {
        term *= zz / f64::from(2 * k + 1);
        let next = total + term;
        if next == total {
            break;
        }
        total = next;
    }
    0.5 + normal_pdf(z) * total
}

/// Upper tail P(Z > x) for x > 0 via the Laplace continued fraction,
/// evaluated bottom-up. Relative accuracy near machine precision for x >= 3.
fn upper_tail_cf(x: f64) -> f64 {
    let mut cf = 0.0;
    for n in (1..=300u32).rev() {
        cf = f64::from(n) / (x + cf);
    }
    normal_pdf(x) / (x + cf)
}

/// Phi(z) for z <= 0, computed without subtracting from 1 so the tail
/// keeps full relative precision.
pub fn normal_cdf_lower(z: f64) -> f64 {
    debug_assert!(z <= 0.0);
    if z >= -3.0 {
        cdf_taylor(z)
    } else {
        upper_tail_cf(-z)
    }
}

/// Phi(z) for any z. Upper-half values lose relative (not absolute)
/// precision to the final subtraction, which is fine for the round-trip
/// checks this oracle backs.
pub fn normal_cdf(z: f64) -> f64 {
    if z <= 0.0 {
        normal_cdf_lower(z)
    } else {
        1.0 - normal_cdf_lower(-z)
    }
}

fn quantile_lower_half(q: f64) -> f64 {
    debug_assert!(q > 0.0 && q <= 0.5);
    let mut lo = -45.0;
    let mut hi = 0.0;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf_lower(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..8 {
        let f = normal_cdf_lower(z) - q;
        let d = normal_pdf(z);
        if d == 0.0 {
            break;
        }
        let mut next = z - f / d;
        if next < lo {
            next = 0.5 * (z + lo);
        }
        if next > hi {
            next = 0.5 * (z + hi);
        }
        z = next;
    }
    z
}

/// Standard-normal quantile, p in (0, 1). For p > 1/2 the reflection
/// uses 1 - p, which is exact in f64 for p >= 1/2.
pub fn quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "oracle quantile requires p in (0,1)");
    if p == 0.5 {
        0.0
    } else if p < 0.5 {
        quantile_lower_half(p)
    } else {
        -quantile_lower_half(1.0 - p)
    }
}

/// Reference values computed with scipy.stats.norm.ppf (double precision),
/// used to validate the oracle itself before it is trusted as a check on
/// anything else.
pub const REFERENCE_QUANTILES: &[(f64, f64)] = &[
    (1e-9, -5.9978070150076865),
    (1e-8, -5.612001244174789),
    (1e-7, -5.1993375821928165),
    (1e-6, -4.753424308822899),
    (1e-5, -4.264890793922825),
    (1e-4, -3.7190164854556804),
    (1e-3, -3.090232306167813),
    (0.01, -2.3263478740408408),
    (0.025, -1.9599639845400545),
    (0.05, -1.6448536269514729),
    (0.1, -1.2815515655446004),
    (0.19, -0.8778962950512288),
    (0.25, -0.6744897501960817),
    (0.3, -0.5244005127080409),
    (0.48, -0.05015358346473367),
    (0.5, 0.0),
    (0.51, 0.02506890825871106),
    (0.58, 0.20189347914185074),
    (0.64, 0.3584587932511938),
    (0.67, 0.4399131656732339),
    (0.7, 0.5244005127080407),
    (0.75, 0.6744897501960817),
    (0.76, 0.7063025628400874),
    (0.77, 0.7388468491852137),
    (0.81, 0.8778962950512289),
    (0.9, 1.2815515655446004),
    (0.95, 1.6448536269514722),
    (0.975, 1.959963984540054),
    (0.99, 2.3263478740408408),
    (0.999, 3.090232306167813),
    (0.9999, 3.719016485455709),
    (0.999999, 4.753424308817087),
    (0.999999999, 5.997807019601637),
];

/// Asserts the oracle agrees with the frozen scipy table to 1e-12.
pub fn validate_oracle() {
    for &(p, expected) in REFERENCE_QUANTILES {
        let got = quantile(p);
        assert!(
            (got - expected).abs() <= 1e-12,
            "oracle drifted from reference at p={p}: got {got}, expected {expected}"
        );
    }
}
