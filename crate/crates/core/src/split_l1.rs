//! Basis-pursuit splitting and completion: minimizes
//! `||gamma - P(sum_i T_{c_i}^* alpha_i)||_2^2 + mu sum_i a_i ||alpha_i||_1`
//! with `P` the restriction to the observed arc, by monotone FISTA with
//! backtracking.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farfield::{inv_sqrt_tau, sqrt_tau, AngularGrid, ArcMask, CoeffWindow, FarField, C64};
use crate::split_ls::{Diagnostics, Method, SplitSolution};
use crate::synth::check_distinct_centers;

/// `v max(1 - tau/|v|, 0)`.
pub fn soft_threshold(v: C64, tau: f64) -> C64 {
    let r = v.norm();
    if r <= tau {
        C64::new(0.0, 0.0)
    } else {
        v * (1.0 - tau / r)
    }
}

/// Per-component penalty weights `a_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weights {
    Uniform,
    /// `a_i^2 = max_{j != i} (2 / (k|c_i - c_j|))^{1/3}`.
    Auto,
    Explicit(Vec<f64>),
}

impl Weights {
    pub fn resolve(&self, centers: &[[f64; 2]], k: f64) -> Result<Vec<f64>> {
        let n = centers.len();
        let w = match self {
            Weights::Uniform => vec![1.0; n],
            Weights::Auto => auto_weights(centers, k),
            Weights::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        found: v.len(),
                    });
                }
                v.clone()
            }
        };
        if w.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::Domain("weights must be positive".into()));
        }
        Ok(w)
    }
}

fn auto_weights(centers: &[[f64; 2]], k: f64) -> Vec<f64> {
    let kc: Vec<[f64; 2]> = centers.iter().map(|c| [k * c[0], k * c[1]]).collect();
    (0..kc.len())
        .map(|i| {
            let a2 = (0..kc.len())
                .filter(|&j| j != i)
                .map(|j| (2.0 / (kc[i][0] - kc[j][0]).hypot(kc[i][1] - kc[j][1])).cbrt())
                .fold(f64::NEG_INFINITY, f64::max);
            if a2.is_finite() {
                a2.sqrt()
            } else {
                1.0
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Config {
    pub mu: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub weights: Weights,
    /// Initial Lipschitz estimate; `None` uses `2 I`.
    pub lipschitz: Option<f64>,
    /// Coefficient window per component; `None` uses `M/4` for all.
    pub windows: Option<Vec<usize>>,
}

impl Default for L1Config {
    fn default() -> Self {
        Self {
            mu: 1e-3,
            max_iters: 1000,
            tol: 1e-10,
            weights: Weights::Uniform,
            lipschitz: None,
            windows: None,
        }
    }
}

impl L1Config {
    fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::Domain(format!("mu must be positive, got {}", self.mu)));
        }
        if self.max_iters == 0 {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Domain(format!("tol must be nonnegative, got {}", self.tol)));
        }
        if let Some(l) = self.lipschitz {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Domain(format!("Lipschitz estimate must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

/// Centers, missing arc, grid and wavenumber; no truncation orders needed.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Geometry {
    pub k: f64,
    pub grid: AngularGrid,
    pub centers: Vec<[f64; 2]>,
    pub omega: ArcMask,
}

impl L1Geometry {
    pub fn new(k: f64, grid: AngularGrid, centers: Vec<[f64; 2]>, omega: ArcMask) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
        }
        if centers.is_empty() {
            return Err(Error::Geometry("no component centers".into()));
        }
        check_distinct_centers(&centers)?;
        Ok(Self {
            k,
            grid,
            centers,
            omega,
        })
    }
}

/// One row of the objective trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub objective: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct L1Result {
    pub solution: SplitSolution,
    pub trace: Vec<TraceEntry>,
    /// Weights `a_i` actually used.
    pub weights: Vec<f64>,
    /// Final Lipschitz estimate after backtracking.
    pub lipschitz: f64,
}

impl L1Result {
    /// CSV with columns `iter,objective,residual`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,objective,residual\n");
        for e in &self.trace {
            out.push_str(&format!("{},{},{}\n", e.iter, e.objective, e.residual));
        }
        out
    }
}

type Coeffs = Vec<Vec<C64>>;

/// The stacked map `(alpha_i) -> P(sum T_{c_i}^* alpha_i)` in sample space.
struct Operator {
    grid: AngularGrid,
    windows: Vec<usize>,
    phases: Vec<Vec<C64>>,
    observed: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Operator {
    fn new(geometry: &L1Geometry, windows: Vec<usize>) -> Self {
        let grid = geometry.grid;
        let phases = geometry
            .centers
            .iter()
            .map(|c| {
                grid.angles()
                    .map(|t| C64::from_polar(1.0, -geometry.k * (c[0] * t.cos() + c[1] * t.sin())))
                    .collect()
            })
            .collect();
        let observed = grid.angles().map(|t| !geometry.omega.contains(t)).collect();
        let mut planner = FftPlanner::new();
        Self {
            grid,
            windows,
            phases,
            observed,
            forward: planner.plan_fft_forward(grid.size()),
            inverse: planner.plan_fft_inverse(grid.size()),
        }
    }

    fn zeros(&self) -> Coeffs {
        self.windows
            .iter()
            .map(|&n| vec![C64::new(0.0, 0.0); 2 * n + 1])
            .collect()
    }

    /// Samples of `sum_i T_{c_i}^* alpha_i` on the whole circle.
    fn synthesize(&self, x: &Coeffs) -> Vec<C64> {
        let m = self.grid.size();
        let mut out = vec![C64::new(0.0, 0.0); m];
        let mut buf = vec![C64::new(0.0, 0.0); m];
        for (i, xi) in x.iter().enumerate() {
            buf.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            let n0 = self.windows[i] as i64;
            for (idx, v) in xi.iter().enumerate() {
                let n = idx as i64 - n0;
                buf[n.rem_euclid(m as i64) as usize] = *v;
            }
            self.inverse.process(&mut buf);
            for ((o, b), p) in out.iter_mut().zip(&buf).zip(&self.phases[i]) {
                *o += b * p * inv_sqrt_tau();
            }
        }
        out
    }

    fn apply(&self, x: &Coeffs) -> Vec<C64> {
        let mut s = self.synthesize(x);
        for (v, &obs) in s.iter_mut().zip(&self.observed) {
            if !obs {
                *v = C64::new(0.0, 0.0);
            }
        }
        s
    }

    /// Adjoint of [`Operator::apply`] with the trapezoid inner product.
    fn adjoint(&self, r: &[C64]) -> Coeffs {
        let m = self.grid.size();
        let scale = sqrt_tau() / m as f64;
        let mut buf = vec![C64::new(0.0, 0.0); m];
        self.windows
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                for j in 0..m {
                    buf[j] = if self.observed[j] {
                        r[j] * self.phases[i][j].conj()
                    } else {
                        C64::new(0.0, 0.0)
                    };
                }
                self.forward.process(&mut buf);
                (-(n as i64)..=n as i64)
                    .map(|q| buf[q.rem_euclid(m as i64) as usize] * scale)
                    .collect()
            })
            .collect()
    }

    fn sample_norm_sqr(&self, v: &[C64]) -> f64 {
        self.grid.step() * v.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}

fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn coeff_dot_re(a: &Coeffs, b: &Coeffs) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u.conj() * v).re))
        .sum()
}

fn coeff_norm_sqr(a: &Coeffs) -> f64 {
    a.iter().flatten().map(|v| v.norm_sqr()).sum()
}

fn coeff_diff(a: &Coeffs, b: &Coeffs) -> Coeffs {
    a.iter().zip(b).map(|(x, y)| sub(x, y)).collect()
}

fn weighted_l1(x: &Coeffs, weights: &[f64]) -> f64 {
    x.iter()
        .zip(weights)
        .map(|(xi, a)| a * xi.iter().map(|v| v.norm()).sum::<f64>())
        .sum()
}

struct Problem<'a> {
    op: Operator,
    gamma: &'a [C64],
    mu: f64,
    weights: Vec<f64>,
}

impl Problem<'_> {
    fn data_term(&self, x: &Coeffs) -> (f64, Vec<C64>) {
        let r = sub(self.gamma, &self.op.apply(x));
        (self.op.sample_norm_sqr(&r), r)
    }

    fn objective(&self, x: &Coeffs) -> f64 {
        self.data_term(x).0 + self.mu * weighted_l1(x, &self.weights)
    }

    /// Gradient `-2 A^*(gamma - A x)` and the data term at `x`.
    fn gradient(&self, x: &Coeffs) -> (f64, Coeffs) {
        let (f, r) = self.data_term(x);
        let g = self
            .op
            .adjoint(&r)
            .into_iter()
            .map(|gi| gi.into_iter().map(|v| v * -2.0).collect())
            .collect();
        (f, g)
    }

    fn prox_step(&self, y: &Coeffs, g: &Coeffs, l: f64) -> Coeffs {
        y.iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((yi, gi), a)| {
                let tau = self.mu * a / l;
                yi.iter()
                    .zip(gi)
                    .map(|(v, d)| soft_threshold(v - d / l, tau))
                    .collect()
            })
            .collect()
    }
}

fn resolve_windows(config: &L1Config, geometry: &L1Geometry) -> Result<Vec<usize>> {
    let grid = geometry.grid;
    let windows = match &config.windows {
        Some(w) => {
            if w.len() != geometry.centers.len() {
                return Err(Error::LengthMismatch {
                    expected: geometry.centers.len(),
                    found: w.len(),
                });
            }
            w.clone()
        }
        None => vec![grid.size() / 4; geometry.centers.len()],
    };
    if let Some(&n) = windows.iter().find(|&&n| n as i64 >= grid.n_max()) {
        return Err(Error::Precondition(format!(
            "window {n} does not fit grid of size {}",
            grid.size()
        )));
    }
    Ok(windows)
}

fn to_coeffs(windows: &[CoeffWindow], sizes: &[usize]) -> Coeffs {
    windows
        .iter()
        .zip(sizes)
        .map(|(w, &n)| (-(n as i64)..=n as i64).map(|q| w.get(q)).collect())
        .collect()
}

/// `||gamma - P(sum T^* alpha_i)||^2 + mu sum a_i ||alpha_i||_1` for the given windows.
pub fn objective(
    alphas: &[CoeffWindow],
    gamma: &FarField,
    geometry: &L1Geometry,
    config: &L1Config,
) -> Result<f64> {
    let sizes: Vec<usize> = alphas.iter().map(|a| a.order()).collect();
    let problem = Problem {
        op: Operator::new(geometry, sizes.clone()),
        gamma: gamma.samples(),
        mu: config.mu,
        weights: config.weights.resolve(&geometry.centers, geometry.k)?,
    };
    Ok(problem.objective(&to_coeffs(alphas, &sizes)))
}

/// Proximal fixed-point residual `||x - prox(x - grad/L)||` at the given windows.
pub fn stationarity(
    alphas: &[CoeffWindow],
    gamma: &FarField,
    geometry: &L1Geometry,
    config: &L1Config,
    lipschitz: f64,
) -> Result<f64> {
    let sizes: Vec<usize> = alphas.iter().map(|a| a.order()).collect();
    let problem = Problem {
        op: Operator::new(geometry, sizes.clone()),
        gamma: gamma.samples(),
        mu: config.mu,
        weights: config.weights.resolve(&geometry.centers, geometry.k)?,
    };
    let x = to_coeffs(alphas, &sizes);
    let (_, g) = problem.gradient(&x);
    let z = problem.prox_step(&x, &g, lipschitz);
    Ok(coeff_norm_sqr(&coeff_diff(&x, &z)).sqrt())
}

/// Monotone FISTA from the zero initial guess.
pub fn fista_split(gamma: &FarField, geometry: &L1Geometry, config: &L1Config) -> Result<L1Result> {
    fista_from(gamma, geometry, config, None)
}

fn fista_from(
    gamma: &FarField,
    geometry: &L1Geometry,
    config: &L1Config,
    start: Option<&[CoeffWindow]>,
) -> Result<L1Result> {
    config.validate()?;
    if gamma.grid() != geometry.grid {
        return Err(Error::LengthMismatch {
            expected: geometry.grid.size(),
            found: gamma.grid().size(),
        });
    }
    let windows = resolve_windows(config, geometry)?;
    let problem = Problem {
        op: Operator::new(geometry, windows.clone()),
        gamma: gamma.samples(),
        mu: config.mu,
        weights: config.weights.resolve(&geometry.centers, geometry.k)?,
    };
    let mut lip = config
        .lipschitz
        .unwrap_or(2.0 * geometry.centers.len() as f64);
    let mut x = match start {
        Some(s) => to_coeffs(s, &windows),
        None => problem.op.zeros(),
    };
    let mut psi_x = problem.objective(&x);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut trace = Vec::new();
    let mut iterations = 0;
    for iter in 1..=config.max_iters {
        iterations = iter;
        let (f_y, g) = problem.gradient(&y);
        let (z, f_z) = loop {
            let z = problem.prox_step(&y, &g, lip);
            let d = coeff_diff(&z, &y);
            let (f_z, _) = problem.data_term(&z);
            let model = f_y + coeff_dot_re(&g, &d) + 0.5 * lip * coeff_norm_sqr(&d);
            if f_z <= model + 1e-12 * f_y.abs().max(f64::MIN_POSITIVE) {
                break (z, f_z);
            }
            lip *= 2.0;
        };
        let psi_z = f_z + problem.mu * weighted_l1(&z, &problem.weights);
        let step = coeff_norm_sqr(&coeff_diff(&z, &y)).sqrt();
        let accepted = psi_z <= psi_x;
        let x_new = if accepted { z.clone() } else { x.clone() };
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = x_new
            .iter()
            .zip(&z)
            .zip(&x)
            .map(|((xn, zi), xo)| {
                xn.iter()
                    .zip(zi)
                    .zip(xo)
                    .map(|((a, b), c)| a + (b - a) * (t / t_new) + (a - c) * ((t - 1.0) / t_new))
                    .collect()
            })
            .collect();
        x = x_new;
        t = t_new;
        if accepted {
            psi_x = psi_z;
        }
        let (f_x, _) = problem.data_term(&x);
        trace.push(TraceEntry {
            iter,
            objective: psi_x,
            residual: f_x.sqrt(),
        });
        let scale = coeff_norm_sqr(&z).sqrt();
        if accepted && step <= config.tol * scale {
            break;
        }
    }
    let alphas = x
        .iter()
        .zip(&windows)
        .map(|(xi, &n)| CoeffWindow::new(n, xi.clone()))
        .collect::<Result<Vec<_>>>()?;
    let model = problem.op.synthesize(&x);
    let beta: Vec<C64> = model
        .iter()
        .zip(&problem.op.observed)
        .map(|(v, &obs)| if obs { C64::new(0.0, 0.0) } else { -v })
        .collect();
    let residual = trace.last().map_or(0.0, |e| e.residual);
    let solution = SplitSolution {
        method: Method::L1,
        k: geometry.k,
        centers: geometry.centers.clone(),
        alphas,
        beta: FarField::from_samples(geometry.grid, beta)?,
        residual,
        diagnostics: Diagnostics {
            condition_number: None,
            iterations: Some(iterations),
            objective: Some(psi_x),
        },
    };
    Ok(L1Result {
        solution,
        trace,
        weights: problem.weights,
        lipschitz: lip,
    })
}

/// Decreases `mu` geometrically (warm-started) until the residual is at most
/// `delta` or `max_steps` runs are spent. Returns the last run and its `mu`.
pub fn continuation(
    gamma: &FarField,
    geometry: &L1Geometry,
    config: &L1Config,
    delta: f64,
    factor: f64,
    max_steps: usize,
) -> Result<(L1Result, f64)> {
    if !(factor > 0.0 && factor < 1.0) {
        return Err(Error::Domain(format!("continuation factor must be in (0, 1), got {factor}")));
    }
    let mut cfg = config.clone();
    let mut run = fista_split(gamma, geometry, &cfg)?;
    for _ in 1..max_steps.max(1) {
        if run.solution.residual <= delta {
            break;
        }
        cfg.mu *= factor;
        let start = run.solution.alphas.clone();
        run = fista_from(gamma, geometry, &cfg, Some(&start))?;
    }
    Ok((run, cfg.mu))
}
