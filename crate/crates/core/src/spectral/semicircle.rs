//! The semicircle law `(1/2pi) sqrt(4 - x^2)` on `[-2, 2]`.

use std::f64::consts::PI;

use crate::error::{param, Result};

pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// Smallest `b` with `cdf(b) = q`, by bisection on the closed-form CDF.
pub fn semicircle_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return param(format!("quantile level {q} outside (0, 1]"));
    }
    if q == 1.0 {
        return Ok(2.0);
    }
    let (mut lo, mut hi) = (-2.0f64, 2.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if semicircle_cdf(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
