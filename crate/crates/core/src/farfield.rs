//! Far fields on the unit circle in sample and Fourier coefficient form.
//!
//! Conventions, fixed throughout the crate:
//!
//! * grid angles `t_j = 2 pi j / M`, `j = 0..M`;
//! * coefficients `alpha_n = (1/sqrt(2 pi)) int alpha(t) e^{-i n t} dt` (trapezoid rule);
//! * synthesis `alpha(t) = (1/sqrt(2 pi)) sum_n alpha_n e^{i n t}`;
//! * coefficient window `n in [-M/2 + 1, M/2]`;
//! * translation `T_c alpha(theta) = e^{i k c . theta} alpha(theta)`, so that
//!   `(T_c alpha)_n = sum_m i^m J_m(k|c|) e^{-i m phi_c} alpha_{n-m}`.
//!
//! With these choices the discrete Parseval identity
//! `sum |alpha_n|^2 = h sum |alpha(t_j)|^2` (`h = 2 pi / M`) is exact.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j_orders;
use crate::error::{Error, Result};

pub type C64 = Complex64;

const SQRT_TAU: f64 = 2.506_628_274_631_000_2;

/// Default relative tolerance for [`FarField::l0_support`].
pub const L0_TOL: f64 = 1e-8;

/// Convolution kernels are cut where `|J_n(k|c|)|` drops below this.
pub const TRANSLATION_CUTOFF: f64 = 1e-14;

/// Equispaced grid of `M` points on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AngularGrid {
    size: usize,
}

impl AngularGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size < 4 || !size.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "grid size must be even and at least 4, got {size}"
            )));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Quadrature weight `2 pi / M`.
    pub fn step(&self) -> f64 {
        TAU / self.size as f64
    }

    pub fn angle(&self, j: usize) -> f64 {
        TAU * j as f64 / self.size as f64
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.size).map(|j| self.angle(j))
    }

    /// Lowest coefficient index, `-M/2 + 1`.
    pub fn n_min(&self) -> i64 {
        1 - (self.size / 2) as i64
    }

    /// Highest coefficient index, `M/2`.
    pub fn n_max(&self) -> i64 {
        (self.size / 2) as i64
    }

    fn slot(&self, n: i64) -> Option<usize> {
        if n < self.n_min() || n > self.n_max() {
            None
        } else {
            Some((n - self.n_min()) as usize)
        }
    }

    fn fft_bin(&self, n: i64) -> usize {
        n.rem_euclid(self.size as i64) as usize
    }
}

/// Which representation a norm is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// `L^p(S^1)` norms of the samples with trapezoid weights.
    Samples,
    /// `l^p` norms of the coefficient sequence.
    Coeffs,
}

/// Exponent of an `L^p` / `l^p` norm. `Zero` counts the support
/// (measure of the support for samples).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lp {
    Zero,
    One,
    Two,
    Inf,
}

/// Which part of the circle [`FarField::mask`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Inside,
    Outside,
}

/// A far field held as samples and coefficients at once.
#[derive(Debug, Clone, PartialEq)]
pub struct FarField {
    grid: AngularGrid,
    samples: Vec<C64>,
    coeffs: Vec<C64>,
}

fn forward(samples: &[C64]) -> Vec<C64> {
    let m = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = SQRT_TAU / m as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

fn inverse(bins: &[C64]) -> Vec<C64> {
    let m = bins.len();
    let mut buf = bins.to_vec();
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / SQRT_TAU;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Coefficients on the window `[-M/2+1, M/2]` from grid samples.
pub fn coeffs_from_samples(samples: &[C64], grid: AngularGrid) -> Result<Vec<C64>> {
    if samples.len() != grid.size() {
        return Err(Error::LengthMismatch {
            expected: grid.size(),
            found: samples.len(),
        });
    }
    let bins = forward(samples);
    Ok((grid.n_min()..=grid.n_max())
        .map(|n| bins[grid.fft_bin(n)])
        .collect())
}

/// Grid samples from coefficients on the window `[-M/2+1, M/2]`.
pub fn samples_from_coeffs(coeffs: &[C64], grid: AngularGrid) -> Result<Vec<C64>> {
    if coeffs.len() != grid.size() {
        return Err(Error::LengthMismatch {
            expected: grid.size(),
            found: coeffs.len(),
        });
    }
    let mut bins = vec![C64::new(0.0, 0.0); grid.size()];
    for (n, &v) in (grid.n_min()..=grid.n_max()).zip(coeffs) {
        bins[grid.fft_bin(n)] = v;
    }
    Ok(inverse(&bins))
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// `i^n` exactly.
pub fn i_pow(n: i64) -> C64 {
    match n.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

impl FarField {
    pub fn zeros(grid: AngularGrid) -> Self {
        Self {
            grid,
            samples: vec![zero(); grid.size()],
            coeffs: vec![zero(); grid.size()],
        }
    }

    pub fn from_samples(grid: AngularGrid, samples: Vec<C64>) -> Result<Self> {
        let coeffs = coeffs_from_samples(&samples, grid)?;
        Ok(Self {
            grid,
            samples,
            coeffs,
        })
    }

    /// From the full coefficient window `[-M/2+1, M/2]`.
    pub fn from_coeffs(grid: AngularGrid, coeffs: Vec<C64>) -> Result<Self> {
        let samples = samples_from_coeffs(&coeffs, grid)?;
        Ok(Self {
            grid,
            samples,
            coeffs,
        })
    }

    /// Samples of `f(t_j)`.
    pub fn from_fn(grid: AngularGrid, f: impl Fn(f64) -> C64) -> Self {
        let samples = grid.angles().map(f).collect();
        Self::from_samples(grid, samples).expect("length matches grid")
    }

    /// Embeds a coefficient window into the grid window.
    pub fn from_window(grid: AngularGrid, window: &CoeffWindow) -> Result<Self> {
        if window.order() as i64 > grid.n_max() - 1 {
            return Err(Error::Precondition(format!(
                "window order {} does not fit grid of size {}",
                window.order(),
                grid.size()
            )));
        }
        let mut coeffs = vec![zero(); grid.size()];
        for (n, v) in window.iter() {
            coeffs[grid.slot(n).expect("checked above")] = v;
        }
        Self::from_coeffs(grid, coeffs)
    }

    pub fn grid(&self) -> AngularGrid {
        self.grid
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    /// Coefficients ordered from `n_min` to `n_max`.
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// `alpha_n`, zero outside the grid window.
    pub fn coeff(&self, n: i64) -> C64 {
        self.grid.slot(n).map_or(zero(), |s| self.coeffs[s])
    }

    /// Coefficients `n in [-order, order]`.
    pub fn window(&self, order: usize) -> CoeffWindow {
        let values = (-(order as i64)..=order as i64)
            .map(|n| self.coeff(n))
            .collect();
        CoeffWindow::new(order, values).expect("length 2N+1")
    }

    pub fn lp_norm(&self, p: Lp, repr: Representation) -> f64 {
        match repr {
            Representation::Coeffs => sequence_norm(&self.coeffs, p),
            Representation::Samples => {
                let h = self.grid.step();
                match p {
                    Lp::Zero => h * self.samples.iter().filter(|v| v.norm() > 0.0).count() as f64,
                    Lp::One => h * self.samples.iter().map(|v| v.norm()).sum::<f64>(),
                    Lp::Two => (h * self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt(),
                    Lp::Inf => self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max),
                }
            }
        }
    }

    /// `||alpha||_2` via the coefficients.
    pub fn norm(&self) -> f64 {
        sequence_norm(&self.coeffs, Lp::Two)
    }

    /// Indices `n` with `|alpha_n| > tol * max |alpha_n|`.
    pub fn l0_support(&self, tol: f64) -> Vec<i64> {
        support(&self.coeffs, tol)
            .into_iter()
            .map(|s| self.grid.n_min() + s as i64)
            .collect()
    }

    /// `<self, other> = sum alpha_n conj(beta_n)`.
    pub fn inner(&self, other: &FarField) -> Result<C64> {
        self.same_grid(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum())
    }

    fn same_grid(&self, other: &FarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::LengthMismatch {
                expected: self.grid.size(),
                found: other.grid.size(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &FarField) -> Result<FarField> {
        self.same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            samples: zip_with(&self.samples, &other.samples, |a, b| a + b),
            coeffs: zip_with(&self.coeffs, &other.coeffs, |a, b| a + b),
        })
    }

    pub fn sub(&self, other: &FarField) -> Result<FarField> {
        self.same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            samples: zip_with(&self.samples, &other.samples, |a, b| a - b),
            coeffs: zip_with(&self.coeffs, &other.coeffs, |a, b| a - b),
        })
    }

    pub fn scale(&self, s: C64) -> FarField {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|v| v * s).collect(),
            coeffs: self.coeffs.iter().map(|v| v * s).collect(),
        }
    }

    /// Keeps the samples inside (or outside) `omega`, zeroing the rest.
    pub fn mask(&self, omega: &ArcMask, keep: Region) -> FarField {
        let samples = self
            .grid
            .angles()
            .zip(&self.samples)
            .map(|(t, &v)| {
                let inside = omega.contains(t);
                if inside == (keep == Region::Inside) {
                    v
                } else {
                    zero()
                }
            })
            .collect();
        Self::from_samples(self.grid, samples).expect("length matches grid")
    }

    /// `T_c alpha`, multiplying samples by `e^{i k c . theta}`.
    pub fn translate(&self, c: [f64; 2], k: f64) -> FarField {
        let samples = self
            .grid
            .angles()
            .zip(&self.samples)
            .map(|(t, &v)| v * C64::from_polar(1.0, k * (c[0] * t.cos() + c[1] * t.sin())))
            .collect();
        Self::from_samples(self.grid, samples).expect("length matches grid")
    }

    /// `T_c^* alpha = T_{-c} alpha`.
    pub fn translate_adjoint(&self, c: [f64; 2], k: f64) -> FarField {
        self.translate([-c[0], -c[1]], k)
    }

    /// `T_c alpha` by convolving coefficients with `i^m J_m(k|c|) e^{-i m phi_c}`.
    ///
    /// Output outside the grid window is dropped.
    pub fn translate_coefficients(&self, c: [f64; 2], k: f64) -> Result<FarField> {
        let kernel = translation_kernel(c, k)?;
        let half = (kernel.len() / 2) as i64;
        let mut out = vec![zero(); self.grid.size()];
        for (slot, n) in (self.grid.n_min()..=self.grid.n_max()).enumerate() {
            let mut acc = zero();
            for (idx, w) in kernel.iter().enumerate() {
                let m = idx as i64 - half;
                acc += w * self.coeff(n - m);
            }
            out[slot] = acc;
        }
        Self::from_coeffs(self.grid, out)
    }
}

/// Kernel `i^m J_m(k|c|) e^{-i m phi_c}` for `m in [-K, K]`, with `K` the last
/// order where `|J_m| >= TRANSLATION_CUTOFF`.
pub fn translation_kernel(c: [f64; 2], k: f64) -> Result<Vec<C64>> {
    let r = k * c[0].hypot(c[1]);
    let phi = c[1].atan2(c[0]);
    if r == 0.0 {
        return Ok(vec![C64::new(1.0, 0.0)]);
    }
    let top = r.ceil() as usize + (12.0 * r.cbrt()).ceil() as usize + 40;
    let j = bessel_j_orders(top, r)?;
    let cut = j
        .iter()
        .rposition(|v| v.abs() >= TRANSLATION_CUTOFF)
        .unwrap_or(0) as i64;
    Ok((-cut..=cut)
        .map(|m| {
            let jm = if m < 0 && m % 2 != 0 {
                -j[m.unsigned_abs() as usize]
            } else {
                j[m.unsigned_abs() as usize]
            };
            i_pow(m) * jm * C64::from_polar(1.0, -(m as f64) * phi)
        })
        .collect())
}

fn zip_with(a: &[C64], b: &[C64], f: impl Fn(C64, C64) -> C64) -> Vec<C64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

/// `l^p` norm of a coefficient sequence; `Zero` counts nonzero entries.
pub fn sequence_norm(v: &[C64], p: Lp) -> f64 {
    match p {
        Lp::Zero => v.iter().filter(|x| x.norm() > 0.0).count() as f64,
        Lp::One => v.iter().map(|x| x.norm()).sum(),
        Lp::Two => v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt(),
        Lp::Inf => v.iter().map(|x| x.norm()).fold(0.0, f64::max),
    }
}

/// Positions with `|v_i| > tol * max |v|`.
pub fn support(v: &[C64], tol: f64) -> Vec<usize> {
    let peak = sequence_norm(v, Lp::Inf);
    if peak == 0.0 {
        return Vec::new();
    }
    v.iter()
        .enumerate()
        .filter(|(_, x)| x.norm() > tol * peak)
        .map(|(i, _)| i)
        .collect()
}

/// Coefficients `alpha_n` for `n in [-N, N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffWindow {
    order: usize,
    values: Vec<C64>,
}

impl CoeffWindow {
    pub fn new(order: usize, values: Vec<C64>) -> Result<Self> {
        if values.len() != 2 * order + 1 {
            return Err(Error::LengthMismatch {
                expected: 2 * order + 1,
                found: values.len(),
            });
        }
        Ok(Self { order, values })
    }

    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            values: vec![zero(); 2 * order + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    /// `alpha_n`, zero for `|n| > N`.
    pub fn get(&self, n: i64) -> C64 {
        if n.unsigned_abs() as usize > self.order {
            zero()
        } else {
            self.values[(n + self.order as i64) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let n0 = -(self.order as i64);
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (n0 + i as i64, v))
    }

    pub fn norm(&self, p: Lp) -> f64 {
        sequence_norm(&self.values, p)
    }

    /// `||self - other||_2` with both windows padded by zeros.
    pub fn distance(&self, other: &CoeffWindow) -> f64 {
        let order = self.order.max(other.order) as i64;
        (-order..=order)
            .map(|n| (self.get(n) - other.get(n)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Indices `n` with `|alpha_n| > tol * max |alpha_n|`.
    pub fn l0_support(&self, tol: f64) -> Vec<i64> {
        support(&self.values, tol)
            .into_iter()
            .map(|i| i as i64 - self.order as i64)
            .collect()
    }
}

/// Finite union of half-open arcs `[start, end)` on `[0, 2 pi)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct ArcMask {
    arcs: Vec<(f64, f64)>,
}

impl ArcMask {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The whole circle.
    pub fn full() -> Self {
        Self {
            arcs: vec![(0.0, TAU)],
        }
    }

    /// Arcs `(start, end)` with `end >= start`; arcs may wrap past `2 pi`.
    pub fn new(arcs: &[(f64, f64)]) -> Result<Self> {
        let mut pieces = Vec::new();
        for &(s, e) in arcs {
            if !s.is_finite() || !e.is_finite() || e < s {
                return Err(Error::Domain(format!("invalid arc ({s}, {e})")));
            }
            let len = e - s;
            if len >= TAU {
                return Ok(Self::full());
            }
            if len == 0.0 {
                continue;
            }
            let s = s.rem_euclid(TAU);
            let e = s + len;
            if e > TAU {
                pieces.push((s, TAU));
                pieces.push((0.0, e - TAU));
            } else {
                pieces.push((s, e));
            }
        }
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (s, e) in pieces {
            match merged.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        Ok(Self { arcs: merged })
    }

    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Total arc length `|Omega|`.
    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(|(s, e)| e - s).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        let t = t.rem_euclid(TAU);
        self.arcs.iter().any(|&(s, e)| s <= t && t < e)
    }

    /// Grid indices `j` with `t_j` in the mask.
    pub fn grid_points(&self, grid: AngularGrid) -> Vec<usize> {
        (0..grid.size())
            .filter(|&j| self.contains(grid.angle(j)))
            .collect()
    }

    /// Quadrature measure `h * #points` of the mask on `grid`.
    pub fn discrete_measure(&self, grid: AngularGrid) -> f64 {
        grid.step() * self.grid_points(grid).len() as f64
    }
}

impl TryFrom<Vec<(f64, f64)>> for ArcMask {
    type Error = Error;

    fn try_from(arcs: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(&arcs)
    }
}

impl From<ArcMask> for Vec<(f64, f64)> {
    fn from(mask: ArcMask) -> Self {
        mask.arcs
    }
}

/// JSON form of a far field: grid size, wavenumber, and the coefficient window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldDocument {
    pub grid_size: usize,
    pub k: f64,
    pub n_min: i64,
    pub coeffs_re: Vec<f64>,
    pub coeffs_im: Vec<f64>,
}

impl FarField {
    pub fn to_document(&self, k: f64) -> FarFieldDocument {
        FarFieldDocument {
            grid_size: self.grid.size(),
            k,
            n_min: self.grid.n_min(),
            coeffs_re: self.coeffs.iter().map(|v| v.re).collect(),
            coeffs_im: self.coeffs.iter().map(|v| v.im).collect(),
        }
    }

    /// Rebuilds the field keeping the stored coefficients exactly. Returns `k`.
    pub fn from_document(doc: &FarFieldDocument) -> Result<(Self, f64)> {
        let grid = AngularGrid::new(doc.grid_size)?;
        if doc.n_min != grid.n_min() {
            return Err(Error::Parse(format!(
                "n_min {} does not match grid size {}",
                doc.n_min, doc.grid_size
            )));
        }
        if doc.coeffs_im.len() != doc.coeffs_re.len() {
            return Err(Error::LengthMismatch {
                expected: doc.coeffs_re.len(),
                found: doc.coeffs_im.len(),
            });
        }
        let coeffs = doc
            .coeffs_re
            .iter()
            .zip(&doc.coeffs_im)
            .map(|(&re, &im)| C64::new(re, im))
            .collect();
        Ok((Self::from_coeffs(grid, coeffs)?, doc.k))
    }

    pub fn to_json(&self, k: f64) -> Result<String> {
        self.check_finite()?;
        Ok(serde_json::to_string_pretty(&self.to_document(k))?)
    }

    pub fn from_json(text: &str) -> Result<(Self, f64)> {
        let doc: FarFieldDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }

    /// CSV with header `t,re,im` and one row per grid point.
    pub fn to_csv(&self) -> Result<String> {
        self.check_finite()?;
        let mut out = String::from("t,re,im\n");
        for (t, v) in self.grid.angles().zip(&self.samples) {
            writeln!(out, "{t},{},{}", v.re, v.im).expect("write to string");
        }
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (line_no == 0 && line.starts_with('t')) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected 3 columns, found {}",
                    line_no + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("line {}: {e}: {s:?}", line_no + 1))
                })
            };
            samples.push(C64::new(parse(cols[1])?, parse(cols[2])?));
        }
        let grid = AngularGrid::new(samples.len())?;
        Self::from_samples(grid, samples)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_csv()?)?)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: &Path, k: f64) -> Result<()> {
        Ok(std::fs::write(path, self.to_json(k)?)?)
    }

    pub fn read_json(path: &Path) -> Result<(Self, f64)> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn check_finite(&self) -> Result<()> {
        if self
            .samples
            .iter()
            .chain(&self.coeffs)
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Domain("far field has non-finite values".into()));
        }
        Ok(())
    }
}

/// `1/sqrt(2 pi)`.
pub fn inv_sqrt_tau() -> f64 {
    1.0 / SQRT_TAU
}

/// `sqrt(2 pi)`.
pub fn sqrt_tau() -> f64 {
    SQRT_TAU
}
