//! Upper-tail probabilities for the F, t and studentized-range distributions.

use alloc::vec::Vec;

use super::special::{betainc, gauss_legendre, integrate, ln_gamma, normal_cdf, normal_pdf};
use super::StatsError;

/// `P(F_{df1,df2} > f)`.
pub fn f_survival(f: f64, df1: u32, df2: u32) -> Result<f64, StatsError> {
    if df1 == 0 || df2 == 0 {
        return Err(StatsError::InvalidDegreesOfFreedom { df1, df2 });
    }
    if f.is_nan() {
        return Err(StatsError::InvalidDegreesOfFreedom { df1, df2 });
    }
    if f <= 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    let (d1, d2) = (df1 as f64, df2 as f64);
    let x = d2 / (d2 + d1 * f);
    Ok(betainc(d2 / 2.0, d1 / 2.0, x).clamp(0.0, 1.0))
}

/// `P(|T_df| > t)`.
pub fn t_two_sided_survival(t: f64, df: u32) -> Result<f64, StatsError> {
    if df == 0 || t.is_nan() {
        return Err(StatsError::InvalidDegreesOfFreedom { df1: 1, df2: df });
    }
    let d = df as f64;
    Ok(betainc(d / 2.0, 0.5, d / (d + t * t)).clamp(0.0, 1.0))
}

const INNER_PANELS: usize = 16;
const OUTER_PANELS: usize = 24;
const NODES: usize = 12;
const Z_LIMIT: f64 = 8.5;

/// `P(range of k standard normals < w)`.
fn range_cdf(w: f64, k: u32, rule: &[(f64, f64)]) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let km1 = (k - 1) as i32;
    let v = integrate(
        |z| normal_pdf(z) * libm::pow(normal_cdf(z) - normal_cdf(z - w), km1 as f64),
        -Z_LIMIT,
        Z_LIMIT,
        INNER_PANELS,
        rule,
    );
    (k as f64 * v).clamp(0.0, 1.0)
}

/// `P(Q_{k,df} > q)` by integrating the range distribution against the
/// density of `s = sqrt(χ²_df / df)`.
pub fn studentized_range_survival(q: f64, k_groups: u32, df_error: u32) -> Result<f64, StatsError> {
    if k_groups < 2 || df_error == 0 || !q.is_finite() || q < 0.0 {
        return Err(StatsError::InvalidParameters {
            q,
            k: k_groups,
            df: df_error,
        });
    }
    if q == 0.0 {
        return Ok(1.0);
    }
    let rule: Vec<(f64, f64)> = gauss_legendre(NODES);
    let nu = df_error as f64;
    // ln of the density of s: ln(2) + (ν/2)ln(ν/2) − lnΓ(ν/2) + (ν−1)ln s − ν s²/2
    let ln_c = libm::log(2.0) + 0.5 * nu * libm::log(0.5 * nu) - ln_gamma(0.5 * nu);
    let spread = 10.0 / libm::sqrt(2.0 * nu);
    let lo = (1.0 - spread).max(0.0);
    let hi = 1.0 + spread.max(8.0 / libm::sqrt(nu));
    let tail = integrate(
        |s| {
            if s <= 0.0 {
                return 0.0;
            }
            let dens = libm::exp(ln_c + (nu - 1.0) * libm::log(s) - 0.5 * nu * s * s);
            dens * (1.0 - range_cdf(q * s, k_groups, &rule))
        },
        lo,
        hi,
        OUTER_PANELS,
        &rule,
    );
    Ok(tail.clamp(0.0, 1.0))
}
