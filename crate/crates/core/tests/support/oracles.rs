//! Independent numerical oracles shared by test targets.
//!
//! Nothing here calls into the library under test.

#![allow(dead_code)]

use rand_chacha::rand_core::Rng;
use rand_chacha::ChaCha8Rng;

pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), eps, 40)
}

pub fn composite_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for i in 1..intervals {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Upper tail of F by integrating its density over `[f, ∞)` mapped to `[0, 1)`.
pub fn f_tail_oracle(f: f64, d1: f64, d2: f64) -> f64 {
    let ln_b = libm::lgamma(d1 / 2.0) + libm::lgamma(d2 / 2.0) - libm::lgamma((d1 + d2) / 2.0);
    let density = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        let ln = 0.5 * (d1 * libm::log(d1 * x) + d2 * libm::log(d2) - (d1 + d2) * libm::log(d1 * x + d2)) - libm::log(x) - ln_b;
        libm::exp(ln)
    };
    let mapped = |t: f64| {
        let x = f + t / (1.0 - t);
        density(x) / ((1.0 - t) * (1.0 - t))
    };
    adaptive_simpson(&mapped, 0.0, 1.0 - 1e-9, 1e-10)
}

pub fn phi(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / core::f64::consts::SQRT_2))
}

/// Upper tail of the studentized range, integrating over log χ² with Simpson's rule.
pub fn q_tail_oracle(q: f64, k: u32, df: u32) -> f64 {
    let nu = df as f64;
    let range_cdf = |w: f64| {
        let inner = |z: f64| {
            libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * core::f64::consts::PI) * libm::pow(phi(z) - phi(z - w), (k - 1) as f64)
        };
        (k as f64 * composite_simpson(inner, -10.0, 10.0, 600)).min(1.0)
    };
    let ln_norm = -(0.5 * nu) * libm::log(2.0) - libm::lgamma(0.5 * nu);
    // x = e^t, χ² density times the Jacobian e^t
    let integrand = |t: f64| {
        let x = libm::exp(t);
        let dens = libm::exp(ln_norm + 0.5 * nu * t - 0.5 * x);
        dens * (1.0 - range_cdf(q * libm::sqrt(x / nu)))
    };
    let hi = libm::log(nu + 40.0 * libm::sqrt(2.0 * nu) + 60.0);
    let lo = -40.0 / nu.min(40.0) - 4.0;
    composite_simpson(integrand, lo, hi, 400)
}

pub struct BruteForce {
    pub ss_a: f64,
    pub ss_b: f64,
    pub ss_ab: f64,
    pub ss_e: f64,
    pub ss_t: f64,
}

/// Sums of squares straight from their textbook definitions, via
/// explicit index loops and no shared helpers.
pub fn brute_force(y: &[Vec<Vec<f64>>]) -> BruteForce {
    let a = y.len();
    let b = y[0].len();
    let n = y[0][0].len();
    let mut grand = 0.0;
    for i in 0..a {
        for j in 0..b {
            for r in 0..n {
                grand += y[i][j][r];
            }
        }
    }
    grand /= (a * b * n) as f64;
    let mut ss_t = 0.0;
    let mut ss_e = 0.0;
    let mut ss_ab = 0.0;
    let mut ss_a = 0.0;
    let mut ss_b = 0.0;
    let mut ai = vec![0.0; a];
    let mut bj = vec![0.0; b];
    for i in 0..a {
        for j in 0..b {
            for r in 0..n {
                ai[i] += y[i][j][r] / (b * n) as f64;
                bj[j] += y[i][j][r] / (a * n) as f64;
            }
        }
    }
    for i in 0..a {
        ss_a += (b * n) as f64 * (ai[i] - grand).powi(2);
    }
    for j in 0..b {
        ss_b += (a * n) as f64 * (bj[j] - grand).powi(2);
    }
    for i in 0..a {
        for j in 0..b {
            let cell: f64 = y[i][j].iter().sum::<f64>() / n as f64;
            ss_ab += n as f64 * (cell - ai[i] - bj[j] + grand).powi(2);
            for r in 0..n {
                ss_t += (y[i][j][r] - grand).powi(2);
                ss_e += (y[i][j][r] - cell).powi(2);
            }
        }
    }
    BruteForce { ss_a, ss_b, ss_ab, ss_e, ss_t }
}

pub fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn random_cells(rng: &mut ChaCha8Rng, a: usize, b: usize, n: usize) -> Vec<Vec<Vec<f64>>> {
    (0..a)
        .map(|_| {
            (0..b)
                .map(|_| (0..n).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64).collect())
                .collect()
        })
        .collect()
}
