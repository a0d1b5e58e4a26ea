//! Squared singular values `s_n^2(R)` of the restricted far field operator and
//! the power threshold that separates detectable from evanescent modes.
//!
//! All radii are in wavelength-scaled units (`k = 1`); callers working at
//! another wavenumber pass `k * R`.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j_orders, BesselOrder};
use crate::error::{Error, Result};

// Gamma(2/3).
const GAMMA_TWO_THIRDS: f64 = 1.354_117_939_426_400_4;

fn check_radius(r: f64) -> Result<()> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

/// Closed form `pi * ((R J_n'(R))^2 + (R^2 - n^2) J_n(R)^2)` from the three
/// consecutive values `J_{n-1}, J_n, J_{n+1}`.
fn closed_form(n: u64, r: f64, prev: f64, cur: f64, next: f64) -> f64 {
    let deriv = 0.5 * (prev - next);
    let nf = n as f64;
    PI * ((r * deriv).powi(2) + (r * r - nf * nf) * cur * cur)
}

/// Extra orders past `n_max` for the tail series.
fn tail_padding(r: f64) -> usize {
    (12.0 * r.cbrt()).ceil() as usize + 40
}

/// `s_n^2(R)` for `n = 0..=n_max` from one Bessel sweep.
///
/// Orders below `R` use the closed form. Above it the closed form cancels,
/// so the positive series `s_n^2 = sum_m 4 pi (n+1+2m) J_{n+1+2m}^2` is
/// accumulated downward instead.
fn sweep(r: f64, n_max: usize) -> Result<Vec<f64>> {
    let top = n_max + tail_padding(r);
    let j = bessel_j_orders(top + 1, r)?;
    let mut tail = vec![0.0; top + 2];
    for n in (0..top).rev() {
        let m = n + 1;
        tail[n] = tail[n + 2] + 4.0 * PI * m as f64 * j[m] * j[m];
    }
    Ok((0..=n_max)
        .map(|n| {
            if (n as f64) >= r {
                tail[n]
            } else {
                let prev = if n == 0 { -j[1] } else { j[n - 1] };
                closed_form(n as u64, r, prev, j[n], j[n + 1])
            }
        })
        .collect())
}

/// `s_n^2(R) = 2 pi int_0^R J_n(r)^2 r dr`.
pub fn squared_singular_value(n: i64, r: f64) -> Result<f64> {
    check_radius(r)?;
    let (m, _) = BesselOrder(n).reflect();
    let values = sweep(r, m as usize)?;
    Ok(values[m as usize])
}

/// Table of `s_n^2(R)` for `n = 0..=n_max`; negative orders by symmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardSpectrum {
    pub radius: f64,
    pub values: Vec<f64>,
}

impl PicardSpectrum {
    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `s_n^2(R)` for any `|n| <= n_max`.
    pub fn get(&self, n: i64) -> Option<f64> {
        self.values.get(n.unsigned_abs() as usize).copied()
    }

    /// `s_0^2 + 2 * sum_{n=1}^{n_max} s_n^2`.
    pub fn symmetric_sum(&self) -> f64 {
        let tail: f64 = self.values[1..].iter().sum();
        self.values[0] + 2.0 * tail
    }

    /// Upper bound on `2 * sum_{n > n_max} s_n^2` from [`decay_bound`].
    ///
    /// The bound terms decay super-exponentially, so the sum stops once they
    /// fall below `1e-30` of the running total.
    pub fn tail_bound(&self) -> f64 {
        let mut n = self.n_max() as i64 + 1;
        if (n as f64) < self.radius {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        loop {
            let term = decay_bound(n, self.radius).unwrap_or(f64::INFINITY);
            acc += 2.0 * term;
            if term <= 1e-30 * acc || term == 0.0 || n > self.n_max() as i64 + 10_000 {
                break;
            }
            n += 1;
        }
        acc
    }

    /// Asymptote `2 sqrt(R^2 - n^2)` (zero for `|n| >= R`).
    pub fn asymptote_curve(&self, n: i64) -> f64 {
        let nf = n as f64;
        2.0 * (self.radius * self.radius - nf * nf).max(0.0).sqrt()
    }
}

/// Default truncation order for spectra and sum checks, `ceil(3R) + 50`.
pub fn default_n_max(r: f64) -> usize {
    (3.0 * r).ceil() as usize + 50
}

/// `s_n^2(R)` for `n = 0..=n_max`, sharing one Bessel sweep.
pub fn spectrum(r: f64, n_max: usize) -> Result<PicardSpectrum> {
    check_radius(r)?;
    if (n_max as f64) < r.ceil() {
        return Err(Error::Precondition(format!(
            "n_max = {n_max} must be at least ceil(R) = {}",
            r.ceil()
        )));
    }
    let values = sweep(r, n_max)?;
    Ok(PicardSpectrum { radius: r, values })
}

/// Super-exponential upper bound on `s_n^2(R)` valid for `|n| >= R`.
pub fn decay_bound(n: i64, r: f64) -> Result<f64> {
    check_radius(r)?;
    let nf = n.unsigned_abs() as f64;
    if nf < r {
        return Err(Error::Precondition(format!(
            "decay bound needs |n| >= R, got n = {n}, R = {r}"
        )));
    }
    let q = (r / nf).powi(2);
    // Assemble in log space; the factors under- and overflow separately.
    let log_const = PI.ln() + (2.0 / 3.0) * 2f64.ln()
        - (4.0 / 3.0) * 3f64.ln()
        - 2.0 * GAMMA_TWO_THIRDS.ln();
    let log_bound = log_const
        + (2.0 / 3.0) * nf.ln()
        + (nf + 1.0) * ((nf + 0.5) / nf).ln()
        + nf * (q.ln() + 1.0 - q)
        + q.ln();
    Ok(log_bound.exp())
}

/// `lim_{R -> inf} s^2_{ceil(nu R)}(R) / (2R)`: `sqrt(1 - nu^2)` for `nu <= 1`, else 0.
pub fn asymptote(nu: f64) -> Result<f64> {
    if !(nu >= 0.0) {
        return Err(Error::Domain(format!("nu must be nonnegative, got {nu}")));
    }
    Ok(if nu <= 1.0 { (1.0 - nu * nu).sqrt() } else { 0.0 })
}

/// Source power bound `P` and receiver threshold `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    source_power: f64,
    receiver_threshold: f64,
}

impl PowerBudget {
    pub fn new(source_power: f64, receiver_threshold: f64) -> Result<Self> {
        if !(source_power > 0.0 && source_power.is_finite())
            || !(receiver_threshold > 0.0 && receiver_threshold.is_finite())
        {
            return Err(Error::Domain(format!(
                "power budget needs P > 0 and p > 0, got P = {source_power}, p = {receiver_threshold}"
            )));
        }
        Ok(Self {
            source_power,
            receiver_threshold,
        })
    }

    /// Budget with `P = 1` and `p = ratio`.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        Self::new(1.0, ratio)
    }

    pub fn source_power(&self) -> f64 {
        self.source_power
    }

    pub fn receiver_threshold(&self) -> f64 {
        self.receiver_threshold
    }

    /// Level `2 pi p / P` a squared singular value must reach to be detectable.
    pub fn level(&self) -> f64 {
        2.0 * PI * self.receiver_threshold / self.source_power
    }
}

/// Largest `n >= 0` with `s_n^2(R) >= 2 pi p / P`, or `None` when no mode
/// reaches the level.
///
/// Even and odd orders are scanned separately; each chain is non-increasing,
/// so a scan stops at its first failure.
pub fn picard_threshold(r: f64, budget: PowerBudget) -> Result<Option<usize>> {
    check_radius(r)?;
    let level = budget.level();
    // The whole spectrum sums to pi R^2, so nothing clears a larger level.
    if level > PI * r * r {
        return Ok(None);
    }
    let mut n_max = default_n_max(r);
    loop {
        let spec = spectrum(r, n_max)?;
        let mut best: Option<usize> = None;
        let mut exhausted = false;
        for parity in 0..2 {
            let mut n = parity;
            while n <= n_max && spec.values[n] >= level {
                best = Some(best.map_or(n, |b| b.max(n)));
                n += 2;
            }
            if n > n_max {
                exhausted = true;
            }
        }
        if !exhausted {
            return Ok(best);
        }
        n_max *= 2;
    }
}

/// Default truncation order `ceil((e/2) k R)`; 0 for a point source.
pub fn default_truncation_order(k: f64, r: f64) -> usize {
    if r <= 0.0 {
        return 0;
    }
    (0.5 * E * k * r).ceil() as usize
}
