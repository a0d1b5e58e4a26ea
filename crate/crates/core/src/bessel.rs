//! Integer-order Bessel functions of the first kind.
//!
//! Small arguments are summed from the ascending power series. Everything
//! else goes through a Miller-type backward recurrence normalized with the
//! identity `J_0(x)^2 + 2 * sum_{n>=1} J_n(x)^2 = 1`. Forward recurrence is
//! never used because it is unstable once the order exceeds the argument.
//!
//! The stationary-phase form [`bessel_asymptotic`] is provided for checking
//! and analysis only; it is not an evaluator.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Constant `b` in `|J_n(x)| < b * x^(-1/3)`, valid for all integer `n` and `x > 0`.
pub const LANDAU_BOUND: f64 = 0.6749;

/// Largest supported `|n|`.
pub const MAX_ORDER: u64 = 1_000_000;

/// Largest supported argument for the recurrence.
pub const MAX_ARGUMENT: f64 = 1.0e7;

// Below this argument the power series converges in a handful of terms.
const SERIES_LIMIT: f64 = 1.0;

// Rescale the recurrence when a value exceeds this magnitude.
const RESCALE_AT: f64 = 1.0e100;
const RESCALE_BY: f64 = 1.0e-100;

/// Signed integer Bessel order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BesselOrder(pub i64);

impl BesselOrder {
    /// `|n|` together with the sign `s` such that `J_n = s * J_|n|`.
    pub fn reflect(self) -> (u64, f64) {
        let m = self.0.unsigned_abs();
        let sign = if self.0 < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
        (m, sign)
    }
}

fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "Bessel argument must be finite and nonnegative, got {x}"
        )));
    }
    if x > MAX_ARGUMENT {
        return Err(Error::Domain(format!(
            "Bessel argument {x} exceeds supported maximum {MAX_ARGUMENT}"
        )));
    }
    Ok(())
}

fn check_order(m: u64) -> Result<()> {
    if m > MAX_ORDER {
        return Err(Error::Domain(format!(
            "Bessel order {m} exceeds supported maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

/// `J_n(x)` for integer `n` and `x >= 0`.
pub fn bessel_j(n: i64, x: f64) -> Result<f64> {
    check_argument(x)?;
    let (m, sign) = BesselOrder(n).reflect();
    check_order(m)?;
    Ok(sign * single_order(m as usize, x))
}

/// `J_n'(x) = (J_{n-1}(x) - J_{n+1}(x)) / 2`.
pub fn bessel_j_prime(n: i64, x: f64) -> Result<f64> {
    let lo = bessel_j(n - 1, x)?;
    let hi = bessel_j(n + 1, x)?;
    Ok(0.5 * (lo - hi))
}

/// `J_0(x), ..., J_{n_max}(x)` from one recurrence sweep.
pub fn bessel_j_orders(n_max: usize, x: f64) -> Result<Vec<f64>> {
    check_argument(x)?;
    check_order(n_max as u64)?;
    if x == 0.0 {
        let mut out = vec![0.0; n_max + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    if x < SERIES_LIMIT {
        return Ok(series_orders(n_max, x));
    }
    Ok(miller(n_max, x, |_| true))
}

fn single_order(m: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_LIMIT {
        return series(m, x);
    }
    let v = miller(m, x, |k| k == m);
    v[m]
}

/// Leading term `(x/2)^m / m!`, built incrementally so large `m` underflows to
/// zero instead of overflowing.
fn leading_term(m: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut t = 1.0;
    for j in 1..=m {
        t *= half / j as f64;
        if t == 0.0 {
            break;
        }
    }
    t
}

fn series_from_leading(m: usize, x: f64, lead: f64) -> f64 {
    if lead == 0.0 {
        return 0.0;
    }
    let q = -0.25 * x * x;
    let mut term = lead;
    let mut sum = lead;
    for k in 1..60 {
        term *= q / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn series(m: usize, x: f64) -> f64 {
    series_from_leading(m, x, leading_term(m, x))
}

fn series_orders(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut lead = 1.0;
    for m in 0..=n_max {
        if m > 0 {
            lead *= 0.5 * x / m as f64;
        }
        out.push(series_from_leading(m, x, lead));
    }
    out
}

/// Starting index for the backward sweep. The minimal solution must have
/// decayed far below the dominant one, which takes roughly a dozen
/// transition-zone widths `x^(1/3)` past `max(n, x)`.
fn miller_start(n_max: usize, x: f64) -> usize {
    let base = (n_max as f64).max(x.ceil());
    (base + (12.0 * x.cbrt()).ceil() + 30.0) as usize
}

/// Backward recurrence. Returns a vector of length `n_max + 1` holding the
/// normalized values for every order `k` where `keep(k)` is true (others are
/// left at zero).
fn miller(n_max: usize, x: f64, keep: impl Fn(usize) -> bool) -> Vec<f64> {
    let start = miller_start(n_max, x);
    let two_over_x = 2.0 / x;

    // Stored values carry the number of rescalings applied before they were
    // recorded; the missing factors are applied once at the end.
    let mut out = vec![0.0; n_max + 1];
    let mut stamp = vec![0_i32; n_max + 1];
    let mut rescalings = 0_i32;

    let mut next = 0.0_f64; // f_{m+1}
    let mut cur = 1.0e-30_f64; // f_m, m = start
    let mut sum_sq = 0.0_f64; // 2 * sum_{m>=1} f_m^2, f_0^2 added at the end

    let mut m = start;
    while m > 0 {
        if m <= n_max && keep(m) {
            out[m] = cur;
            stamp[m] = rescalings;
        }
        sum_sq += 2.0 * cur * cur;
        let prev = two_over_x * m as f64 * cur - next;
        next = cur;
        cur = prev;
        m -= 1;
        if cur.abs() > RESCALE_AT {
            cur *= RESCALE_BY;
            next *= RESCALE_BY;
            sum_sq *= RESCALE_BY * RESCALE_BY;
            rescalings += 1;
        }
    }
    if keep(0) {
        out[0] = cur;
        stamp[0] = rescalings;
    }
    sum_sq += cur * cur;

    let norm = sum_sq.sqrt();
    for (v, s) in out.iter_mut().zip(&stamp) {
        if *v != 0.0 {
            *v = *v * RESCALE_BY.powi(rescalings - s) / norm;
        }
    }
    out
}

/// Stationary-phase approximations of `J_n(R)` and `J_n'(R)` for `0 <= n < R`.
///
/// With `cos(a) = n / R` the approximations are
/// `sqrt(2 / (pi R sin a)) cos(R (sin a - a cos a) - pi/4)` and
/// `-sqrt(2 / (pi R sin a)) sin a sin(R (sin a - a cos a) - pi/4)`.
/// The error against the true values is `O(1/R)` for `n/R` bounded away from 1.
pub fn bessel_asymptotic(n: u64, r: f64) -> Result<(f64, f64)> {
    if !r.is_finite() || (n as f64) >= r {
        return Err(Error::Precondition(format!(
            "stationary-phase form needs n < R, got n = {n}, R = {r}"
        )));
    }
    let cos_a = n as f64 / r;
    let alpha = cos_a.acos();
    let sin_a = alpha.sin();
    let amp = (2.0 / (PI * r * sin_a)).sqrt();
    let phase = r * (sin_a - alpha * cos_a) - 0.25 * PI;
    Ok((amp * phase.cos(), -amp * sin_a * phase.sin()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: `J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt`.
    /// The integrand is smooth and periodic, so the trapezoid rule converges
    /// geometrically once the number of nodes exceeds `n + x`.
    fn integral_oracle(n: i64, x: f64) -> f64 {
        let nodes = 2 * (n.unsigned_abs() as usize + x.ceil() as usize) + 128;
        let h = 2.0 * PI / nodes as f64;
        let mut acc = 0.0;
        for j in 0..nodes {
            let t = j as f64 * h;
            acc += (n as f64 * t - x * t.sin()).cos();
        }
        acc / nodes as f64
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(-3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn j0_at_one_matches_series() {
        // Power series summed in f64 to machine precision.
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..30 {
            term *= -0.25 / (k * k) as f64;
            sum += term;
        }
        assert!((sum - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(0, 1.0).unwrap() - sum).abs() < 1e-14);
    }

    #[test]
    fn matches_integral_oracle_on_grid() {
        let mut worst = 0.0_f64;
        for &x in &[0.01, 0.3, 0.99, 1.0, 2.5, 7.0, 19.3, 50.0, 123.4, 300.0, 500.0] {
            for n in (-200..=200).step_by(7) {
                let err = (bessel_j(n, x).unwrap() - integral_oracle(n, x)).abs();
                worst = worst.max(err);
            }
        }
        assert!(worst <= 1e-12, "worst abs error {worst:e}");
    }

    #[test]
    fn orders_agree_with_single_evaluation() {
        for &x in &[0.5, 3.0, 40.0] {
            let all = bessel_j_orders(60, x).unwrap();
            for (n, v) in all.iter().enumerate() {
                assert!((v - bessel_j(n as i64, x).unwrap()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn negative_argument_is_domain_error() {
        assert!(matches!(bessel_j(0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_j(2, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(
            bessel_j(MAX_ORDER as i64 + 1, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn huge_orders_underflow_cleanly() {
        assert_eq!(bessel_j(1_000_000, 1.0).unwrap(), 0.0);
        let v = bessel_j(400, 100.0).unwrap();
        assert!((0.0..1e-60).contains(&v));
    }

    #[test]
    fn derivative_special_cases() {
        for &x in &[0.2, 1.0, 9.0, 33.0] {
            let d = bessel_j_prime(0, x).unwrap();
            assert!((d + bessel_j(1, x).unwrap()).abs() < 1e-15);
        }
        assert_eq!(bessel_j_prime(1, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-5;
        let fd = (bessel_j(2, 1.0 + h).unwrap() - bessel_j(2, 1.0 - h).unwrap()) / (2.0 * h);
        assert!((bessel_j_prime(2, 1.0).unwrap() - fd).abs() < 1e-6);
    }

    #[test]
    fn asymptotic_order_zero_is_classical_form() {
        let r = 37.5;
        let (j, _) = bessel_asymptotic(0, r).unwrap();
        let classical = (2.0 / (PI * r)).sqrt() * (r - 0.25 * PI).cos();
        assert!((j - classical).abs() < 1e-14);
    }

    #[test]
    fn asymptotic_rejects_turning_point() {
        assert!(bessel_asymptotic(10, 10.0).is_err());
        assert!(bessel_asymptotic(11, 10.0).is_err());
    }

    #[test]
    fn asymptotic_error_scales_like_inverse_radius() {
        let err = |n: u64, r: f64| {
            let (j, jp) = bessel_asymptotic(n, r).unwrap();
            let ej = (j - bessel_j(n as i64, r).unwrap()).abs();
            let ejp = (jp - bessel_j_prime(n as i64, r).unwrap()).abs();
            ej.max(ejp)
        };
        // Worst case over a short window of radii, since a single point can sit
        // near a zero of the error.
        let window = |n: u64, r: f64| (0..12).map(|d| err(n, r + 0.37 * d as f64)).fold(0.0, f64::max);
        // O(1/R): a 100x larger radius shrinks the error at least 100x. The
        // remainder actually decays like R^(-3/2), so the ratio sits near 1000.
        let ratio = window(10, 20.0) / window(10, 2000.0);
        assert!(ratio >= 100.0, "ratio {ratio}");

        // C calibrated once on a grid with n / R <= 1/2, then used at (50, 100).
        let mut c = 0.0_f64;
        for r in [60.0, 100.0, 150.0, 200.0] {
            for n in 0..(r as u64 / 2) {
                c = c.max(err(n, r) * r);
            }
        }
        assert!(c < 0.06, "calibrated constant {c}");
        assert!(err(50, 100.0) <= c / 100.0);
    }
}
