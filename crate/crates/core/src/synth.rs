//! Analytic forward models: modal and point sources, line-segment (strip)
//! sources, multi-component scenes with missing arcs and noise.
//!
//! A component centered at `c` radiates `T_c^* alpha` where `alpha` is its far
//! field in its own frame.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farfield::{inv_sqrt_tau, AngularGrid, ArcMask, CoeffWindow, FarField, Region, C64};
use crate::picard::{default_truncation_order, spectrum, squared_singular_value};

pub const SCENE_VERSION: u32 = 1;

/// How a component produces its far field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Generator {
    /// Fourier-Bessel modes `i^n J_n(k|x|) e^{i n phi}` with coefficients `a_n`.
    Modal,
    /// Zero-radius source with a single coefficient.
    Point,
    /// Single layer on a segment of half-length `width`, rotated by `orientation`.
    Strip {
        width: f64,
        #[serde(default)]
        orientation: f64,
    },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Modal => "modal",
            Generator::Point => "point",
            Generator::Strip { .. } => "strip",
        }
    }
}

/// One source supported in `B_R(c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceComponent {
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    pub generator: Generator,
    /// `[re, im]` pairs for `n = -N..=N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<[f64; 2]>>,
}

impl SourceComponent {
    pub fn modal(center: [f64; 2], radius: f64, order: usize, coeffs: &[C64]) -> Self {
        Self {
            center,
            radius,
            order: Some(order),
            generator: Generator::Modal,
            coefficients: Some(coeffs.iter().map(|v| [v.re, v.im]).collect()),
        }
    }

    pub fn point(center: [f64; 2], amplitude: C64) -> Self {
        Self {
            center,
            radius: 0.0,
            order: Some(0),
            generator: Generator::Point,
            coefficients: Some(vec![[amplitude.re, amplitude.im]]),
        }
    }

    pub fn strip(center: [f64; 2], width: f64, orientation: f64) -> Self {
        Self {
            center,
            radius: width,
            order: None,
            generator: Generator::Strip { width, orientation },
            coefficients: None,
        }
    }

    /// Truncation order: explicit `N`, else `ceil((e/2) k R)`; 0 for points.
    pub fn resolved_order(&self, k: f64) -> usize {
        match self.generator {
            Generator::Point => 0,
            _ => self
                .order
                .unwrap_or_else(|| default_truncation_order(k, self.radius)),
        }
    }

    pub fn coefficient_values(&self) -> Option<Vec<C64>> {
        self.coefficients
            .as_ref()
            .map(|v| v.iter().map(|&[re, im]| C64::new(re, im)).collect())
    }

    fn validate(&self, k: f64, grid: AngularGrid) -> Result<()> {
        if !self.center.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("component center must be finite".into()));
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::Domain(format!(
                "component radius must be nonnegative, got {}",
                self.radius
            )));
        }
        let order = self.resolved_order(k);
        match &self.generator {
            Generator::Point => {
                if self.radius != 0.0 || self.order.is_some_and(|n| n != 0) {
                    return Err(Error::Domain(
                        "point sources need radius 0 and N = 0".into(),
                    ));
                }
            }
            Generator::Modal => {
                if self.radius <= 0.0 {
                    return Err(Error::Domain("modal sources need radius > 0".into()));
                }
            }
            Generator::Strip { width, orientation } => {
                if !(*width > 0.0) || !orientation.is_finite() {
                    return Err(Error::Domain(format!("invalid strip width {width}")));
                }
                if self.coefficients.is_some() {
                    return Err(Error::Domain(
                        "strip sources do not take coefficients".into(),
                    ));
                }
            }
        }
        if order as i64 >= grid.n_max() {
            return Err(Error::Precondition(format!(
                "order {order} does not fit grid of size {}",
                grid.size()
            )));
        }
        if let Some(c) = &self.coefficients {
            if c.len() != 2 * order + 1 {
                return Err(Error::LengthMismatch {
                    expected: 2 * order + 1,
                    found: c.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub level: f64,
    pub seed: u64,
}

/// A full synthetic problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    #[serde(default = "default_version")]
    pub version: u32,
    pub k: f64,
    pub grid_size: usize,
    pub components: Vec<SourceComponent>,
    #[serde(default)]
    pub omega: ArcMask,
    #[serde(default)]
    pub noise: NoiseModel,
}

fn default_version() -> u32 {
    SCENE_VERSION
}

impl Scene {
    pub fn from_json(text: &str) -> Result<Self> {
        let scene: Scene = serde_json::from_str(text)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn grid(&self) -> Result<AngularGrid> {
        AngularGrid::new(self.grid_size)
    }

    pub fn centers(&self) -> Vec<[f64; 2]> {
        self.components.iter().map(|c| c.center).collect()
    }

    pub fn orders(&self) -> Vec<usize> {
        self.components
            .iter()
            .map(|c| c.resolved_order(self.k))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCENE_VERSION {
            return Err(Error::Parse(format!(
                "unsupported scene version {}",
                self.version
            )));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::Domain(format!("wavenumber must be positive, got {}", self.k)));
        }
        let grid = self.grid()?;
        if self.components.is_empty() {
            return Err(Error::Geometry("scene has no components".into()));
        }
        for c in &self.components {
            c.validate(self.k, grid)?;
        }
        check_distinct_centers(&self.centers())?;
        if !(self.noise.level >= 0.0 && self.noise.level.is_finite()) {
            return Err(Error::Domain(format!(
                "noise level must be nonnegative, got {}",
                self.noise.level
            )));
        }
        if self.omega.measure() >= TAU {
            return Err(Error::Geometry("missing arc covers the whole circle".into()));
        }
        Ok(())
    }

    /// Copy with every order and coefficient list filled in. Missing modal
    /// and point coefficients are drawn from the noise seed (one stream per
    /// component) and scaled to unit far-field norm.
    pub fn resolve(&self) -> Result<Scene> {
        self.validate()?;
        let mut out = self.clone();
        for (i, comp) in out.components.iter_mut().enumerate() {
            let order = comp.resolved_order(self.k);
            if !matches!(comp.generator, Generator::Point) {
                comp.order = Some(order);
            }
            if comp.coefficients.is_none() && !matches!(comp.generator, Generator::Strip { .. }) {
                let mut rng = ChaCha8Rng::seed_from_u64(self.noise.seed);
                rng.set_stream(i as u64 + 1);
                let kr = self.k * comp.radius;
                let a = random_coefficients(order, kr, &mut rng)?;
                comp.coefficients = Some(a.iter().map(|v| [v.re, v.im]).collect());
            }
        }
        Ok(out)
    }
}

/// Rejects coincident centers.
pub fn check_distinct_centers(centers: &[[f64; 2]]) -> Result<()> {
    for i in 0..centers.len() {
        for j in 0..i {
            if centers[i] == centers[j] {
                return Err(Error::Geometry(format!(
                    "components {j} and {i} share center ({}, {})",
                    centers[i][0], centers[i][1]
                )));
            }
        }
    }
    Ok(())
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// I.i.d. complex Gaussian `a_n`, `|n| <= N`, scaled so the radiated far field
/// `a_n s_n^2(kR)` has unit norm (`|a_0| = 1` for `kR = 0`).
pub fn random_coefficients(order: usize, kr: f64, rng: &mut ChaCha8Rng) -> Result<Vec<C64>> {
    let a: Vec<C64> = (0..2 * order + 1).map(|_| gaussian(rng)).collect();
    let gains = modal_gains(order, kr)?;
    let norm = a
        .iter()
        .zip(&gains)
        .map(|(v, g)| v.norm_sqr() * g * g)
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        return Err(Error::Domain("radiated field vanishes".into()));
    }
    Ok(a.into_iter().map(|v| v / norm).collect())
}

/// `s_n^2(kR)` for `n = -N..=N`; all ones for a point source.
fn modal_gains(order: usize, kr: f64) -> Result<Vec<f64>> {
    if kr == 0.0 {
        return Ok(vec![1.0; 2 * order + 1]);
    }
    let n_max = order.max(kr.ceil() as usize);
    let spec = spectrum(kr, n_max)?;
    Ok((-(order as i64)..=order as i64)
        .map(|n| spec.get(n).expect("within table"))
        .collect())
}

/// Far field of `component` in its own frame (before translation).
pub fn local_farfield(component: &SourceComponent, k: f64, grid: AngularGrid) -> Result<FarField> {
    match component.generator {
        Generator::Strip { width, orientation } => Ok(oriented_strip(k * width, orientation, grid)),
        Generator::Modal | Generator::Point => {
            let order = component.resolved_order(k);
            let a = component.coefficient_values().ok_or_else(|| {
                Error::Precondition("component coefficients are not resolved".into())
            })?;
            let kr = k * component.radius;
            let gains = modal_gains(order, kr)?;
            let values = a.iter().zip(&gains).map(|(v, g)| v * g).collect();
            FarField::from_window(grid, &CoeffWindow::new(order, values)?)
        }
    }
}

/// Far field `T_c^* alpha` of a modal or point component.
pub fn modal_farfield(component: &SourceComponent, k: f64, grid: AngularGrid) -> Result<FarField> {
    if matches!(component.generator, Generator::Strip { .. }) {
        return Err(Error::GeneratorMismatch {
            expected: "modal",
            found: component.generator.name(),
        });
    }
    Ok(local_farfield(component, k, grid)?.translate_adjoint(component.center, k))
}

/// Far field of any component, placed at its center.
pub fn component_farfield(component: &SourceComponent, k: f64, grid: AngularGrid) -> Result<FarField> {
    Ok(local_farfield(component, k, grid)?.translate_adjoint(component.center, k))
}

/// Coefficients below this fraction of `||alpha||_2` count as roundoff.
pub const POWER_FLOOR: f64 = 1e-13;

/// Power `(1/2pi) sum |alpha_n|^2 / s_n^2(R)` of the minimal-norm source in
/// `B_R(0)` radiating `alpha`, summed over the grid window.
///
/// Coefficients at or below `POWER_FLOOR * ||alpha||_2` are skipped.
pub fn minimal_power(alpha: &FarField, r: f64) -> Result<f64> {
    let grid = alpha.grid();
    let n_max = (grid.n_max() as usize).max(r.ceil() as usize);
    let spec = spectrum(r, n_max)?;
    let total = alpha.norm().powi(2);
    let floor = POWER_FLOOR * POWER_FLOOR * total;
    let mut acc = 0.0;
    for n in grid.n_min()..=grid.n_max() {
        let a2 = alpha.coeff(n).norm_sqr();
        if a2 <= floor {
            continue;
        }
        let term = a2 / spec.get(n).expect("within table");
        if !(term <= 1e16 * total) {
            return Err(Error::InfinitePower { mode: n });
        }
        acc += term;
    }
    Ok(acc / TAU)
}

fn strip_profile(w: f64, u: f64) -> f64 {
    if u == 0.0 {
        2.0 * w.sqrt()
    } else {
        2.0 * (w * u).sin() / (w.sqrt() * u)
    }
}

/// `2 sin(W cos t) / (sqrt(W) cos t) e^{-i d sin t}` on `grid`.
pub fn strip_farfield(w: f64, d: f64, grid: AngularGrid) -> Result<FarField> {
    if !(w > 0.0 && w.is_finite()) || !d.is_finite() {
        return Err(Error::Domain(format!("strip needs W > 0, got W = {w}, d = {d}")));
    }
    Ok(FarField::from_fn(grid, |t| {
        C64::from_polar(strip_profile(w, t.cos()), -d * t.sin())
    }))
}

fn oriented_strip(w: f64, orientation: f64, grid: AngularGrid) -> FarField {
    FarField::from_fn(grid, |t| C64::new(strip_profile(w, (t - orientation).cos()), 0.0))
}

/// `<alpha_f, alpha_g>` for the strip pair at separation `d`, by the
/// trapezoid rule on a grid resolving the phase `d sin t`.
pub fn strip_inner_product(w: f64, d: f64) -> Result<f64> {
    if !(w > 0.0 && w.is_finite()) || !(d >= 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("strip needs W > 0, d >= 0, got W = {w}, d = {d}")));
    }
    let m = strip_quadrature_size(w, d);
    let h = TAU / m as f64;
    // The imaginary part cancels between t and -t.
    let sum: f64 = (0..m)
        .map(|j| {
            let t = h * j as f64;
            let a = strip_profile(w, t.cos());
            a * a * (d * t.sin()).cos()
        })
        .sum();
    Ok(h * sum)
}

/// Power-of-two grid size `>= 4 (d + W) + 64`.
pub fn strip_quadrature_size(w: f64, d: f64) -> usize {
    ((4.0 * (d + w) + 64.0).ceil() as usize).next_power_of_two()
}

/// Result of [`scene_farfield`].
#[derive(Debug, Clone)]
pub struct SceneFarField {
    /// Measured data: noisy, zero on `Omega`.
    pub gamma: FarField,
    /// Noise-free, unmasked total far field.
    pub clean: FarField,
    /// Per-component far fields, translated to their centers.
    pub components: Vec<FarField>,
    /// Component-frame coefficient windows `|n| <= N_i`.
    pub truth: Vec<CoeffWindow>,
    /// `-alpha|_Omega`, so that `gamma = beta + sum T^* alpha_i + noise`.
    pub beta_truth: FarField,
    /// Noise actually added (zero on `Omega`).
    pub noise: FarField,
}

/// Superposes the components, masks out `Omega`, and adds noise of exact
/// relative level `noise.level` on the observed region.
pub fn scene_farfield(scene: &Scene) -> Result<SceneFarField> {
    let scene = scene.resolve()?;
    let grid = scene.grid()?;
    let mut clean = FarField::zeros(grid);
    let mut components = Vec::with_capacity(scene.components.len());
    let mut truth = Vec::with_capacity(scene.components.len());
    for comp in &scene.components {
        let local = local_farfield(comp, scene.k, grid)?;
        truth.push(local.window(comp.resolved_order(scene.k)));
        let placed = local.translate_adjoint(comp.center, scene.k);
        clean = clean.add(&placed)?;
        components.push(placed);
    }
    let observed = clean.mask(&scene.omega, Region::Outside);
    let beta_truth = clean.mask(&scene.omega, Region::Inside).scale(C64::new(-1.0, 0.0));
    let noise = scaled_noise(&scene, grid, observed.norm())?;
    let gamma = observed.add(&noise)?;
    Ok(SceneFarField {
        gamma,
        clean,
        components,
        truth,
        beta_truth,
        noise,
    })
}

fn scaled_noise(scene: &Scene, grid: AngularGrid, reference: f64) -> Result<FarField> {
    if scene.noise.level == 0.0 || reference == 0.0 {
        return Ok(FarField::zeros(grid));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scene.noise.seed);
    let raw: Vec<C64> = grid
        .angles()
        .map(|t| {
            let v = gaussian(&mut rng);
            if scene.omega.contains(t) {
                C64::new(0.0, 0.0)
            } else {
                v
            }
        })
        .collect();
    let raw = FarField::from_samples(grid, raw)?;
    let n = raw.norm();
    if n == 0.0 {
        return Ok(FarField::zeros(grid));
    }
    Ok(raw.scale(C64::new(scene.noise.level * reference / n, 0.0)))
}

/// `s_0^2(R) / sqrt(2 pi)`, the constant far field of the `a_0 = 1` mode.
pub fn monopole_level(r: f64) -> Result<f64> {
    Ok(squared_singular_value(0, r)? * inv_sqrt_tau())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picard::squared_singular_value;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn grid() -> AngularGrid {
        AngularGrid::new(512).unwrap()
    }

    fn three_ball_scene() -> Scene {
        Scene {
            version: 1,
            k: 1.0,
            grid_size: 512,
            components: vec![
                SourceComponent { center: [24.0, -4.0], radius: 5.0, order: None, generator: Generator::Modal, coefficients: None },
                SourceComponent { center: [-22.0, 23.0], radius: 6.0, order: None, generator: Generator::Modal, coefficients: None },
                SourceComponent { center: [-15.0, -20.0], radius: 4.0, order: None, generator: Generator::Modal, coefficients: None },
            ],
            omega: ArcMask::new(&[(FRAC_PI_2, FRAC_PI_2 + PI / 3.0)]).unwrap(),
            noise: NoiseModel { level: 0.0, seed: 4 },
        }
    }

    #[test]
    fn monopole_is_constant() {
        let c = SourceComponent::modal([0.0, 0.0], 3.0, 0, &[C64::new(1.0, 0.0)]);
        let f = modal_farfield(&c, 1.0, grid()).unwrap();
        let level = monopole_level(3.0).unwrap();
        for v in f.samples() {
            assert!((v - C64::new(level, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn centered_modal_norm() {
        let a: Vec<C64> = (0..7).map(|i| C64::new(i as f64 - 3.0, 0.5)).collect();
        let c = SourceComponent::modal([0.0, 0.0], 2.5, 3, &a);
        let f = modal_farfield(&c, 1.0, grid()).unwrap();
        let expect: f64 = a
            .iter()
            .zip(-3..=3)
            .map(|(v, n)| v.norm_sqr() * squared_singular_value(n, 2.5).unwrap().powi(2))
            .sum();
        assert!((f.norm().powi(2) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn translated_component_spreads_but_keeps_norm() {
        let a = vec![C64::new(1.0, 0.0); 5];
        let here = SourceComponent::modal([0.0, 0.0], 2.0, 2, &a);
        let there = SourceComponent::modal([10.0, -3.0], 2.0, 2, &a);
        let f = modal_farfield(&here, 1.0, grid()).unwrap();
        let g = modal_farfield(&there, 1.0, grid()).unwrap();
        assert!((f.norm() - g.norm()).abs() < 1e-12 * f.norm());
        assert!(g.coeff(8).norm() > 1e-3);
    }

    #[test]
    fn strip_rejected_by_modal_farfield() {
        let s = SourceComponent::strip([0.0, 0.0], 2.0, 0.0);
        assert!(matches!(
            modal_farfield(&s, 1.0, grid()),
            Err(Error::GeneratorMismatch { found: "strip", .. })
        ));
    }

    #[test]
    fn minimal_power_of_single_mode() {
        let r = 4.0;
        for n in [0i64, 3, -5] {
            let f = FarField::from_fn(grid(), |t| C64::from_polar(1.0, n as f64 * t));
            let p = minimal_power(&f, r).unwrap();
            let expect = 1.0 / squared_singular_value(n, r).unwrap();
            assert!((p - expect).abs() < 1e-9 * expect, "n = {n}");
        }
    }

    #[test]
    fn minimal_power_of_modal_source() {
        let a: Vec<C64> = (0..5).map(|i| C64::new(1.0, i as f64)).collect();
        let r = 3.0;
        let c = SourceComponent::modal([0.0, 0.0], r, 2, &a);
        let f = modal_farfield(&c, 1.0, grid()).unwrap();
        let expect: f64 = a
            .iter()
            .zip(-2..=2)
            .map(|(v, n)| v.norm_sqr() * squared_singular_value(n, r).unwrap())
            .sum::<f64>()
            / TAU;
        let p = minimal_power(&f, r).unwrap();
        assert!((p - expect).abs() < 1e-12 * expect);
        let p2 = minimal_power(&f.scale(C64::new(2.0, 0.0)), r).unwrap();
        assert!((p2 - 4.0 * p).abs() < 1e-12 * p2);
    }

    #[test]
    fn minimal_power_flags_evanescent_content() {
        let f = FarField::from_fn(grid(), |t| C64::from_polar(1.0, 200.0 * t));
        assert!(matches!(minimal_power(&f, 2.0), Err(Error::InfinitePower { .. })));
    }

    #[test]
    fn strip_limit_and_norm() {
        let w = 10.0;
        let f = strip_farfield(w, 0.0, AngularGrid::new(1024).unwrap()).unwrap();
        assert!((f.samples()[256].re - 2.0 * w.sqrt()).abs() < 1e-12);
        assert!(f.norm().powi(2) >= 8.0 * (PI - 2.0 / w));
        assert!(strip_farfield(0.0, 1.0, grid()).is_err());
    }

    #[test]
    fn strip_inner_product_matches_grid_inner_product() {
        let w = 3.0;
        let d = 40.0;
        let g = AngularGrid::new(strip_quadrature_size(w, d)).unwrap();
        let f = strip_farfield(w, 0.0, g).unwrap();
        let h = strip_farfield(w, d, g).unwrap();
        let ip = f.inner(&h).unwrap();
        let direct = strip_inner_product(w, d).unwrap();
        assert!((ip.re - direct).abs() < 1e-10 * f.norm().powi(2));
        assert!(ip.im.abs() < 1e-10 * f.norm().powi(2));
    }

    #[test]
    fn strip_component_at_offset_matches_formula() {
        let g = AngularGrid::new(256).unwrap();
        let s = SourceComponent::strip([0.0, 7.0], 2.0, 0.0);
        let f = component_farfield(&s, 1.0, g).unwrap();
        let h = strip_farfield(2.0, 7.0, g).unwrap();
        assert!(f.sub(&h).unwrap().norm() < 1e-12);
    }

    #[test]
    fn single_component_scene_is_its_far_field() {
        let a = vec![C64::new(0.3, -0.2); 7];
        let comp = SourceComponent::modal([3.0, 1.0], 2.0, 3, &a);
        let scene = Scene {
            version: 1,
            k: 1.0,
            grid_size: 128,
            components: vec![comp.clone()],
            omega: ArcMask::empty(),
            noise: NoiseModel::default(),
        };
        let out = scene_farfield(&scene).unwrap();
        let f = modal_farfield(&comp, 1.0, AngularGrid::new(128).unwrap()).unwrap();
        assert_eq!(out.gamma.samples(), f.samples());
        assert_eq!(out.truth[0].order(), 3);
    }

    #[test]
    fn noise_has_exact_relative_level() {
        let mut scene = three_ball_scene();
        scene.noise.level = 0.05;
        let noisy = scene_farfield(&scene).unwrap();
        let observed = noisy.clean.mask(&scene.omega, Region::Outside);
        let rel = noisy.gamma.sub(&observed).unwrap().norm() / observed.norm();
        assert!((rel - 0.05).abs() < 1e-12);
    }

    #[test]
    fn three_ball_scene_masks_arc_and_is_deterministic() {
        let scene = three_ball_scene();
        let a = scene_farfield(&scene).unwrap();
        let b = scene_farfield(&scene).unwrap();
        assert_eq!(a.gamma.samples(), b.gamma.samples());
        let zeroed = a.gamma.samples().iter().filter(|v| v.norm() == 0.0).count();
        assert!((84..=86).contains(&zeroed));
        assert_eq!(scene.orders(), vec![7, 9, 6]);
        let recon = a.gamma.sub(&a.beta_truth).unwrap();
        assert!(recon.sub(&a.clean).unwrap().norm() < 1e-12 * a.clean.norm());
    }

    #[test]
    fn superposition_is_linear() {
        let scene = three_ball_scene().resolve().unwrap();
        let mut clean = scene.clone();
        clean.omega = ArcMask::empty();
        let all = scene_farfield(&clean).unwrap().gamma;
        let mut sum = FarField::zeros(all.grid());
        for comp in &clean.components {
            let mut single = clean.clone();
            single.components = vec![comp.clone()];
            sum = sum.add(&scene_farfield(&single).unwrap().gamma).unwrap();
        }
        assert!(sum.sub(&all).unwrap().norm() < 1e-12 * all.norm());
    }

    #[test]
    fn scene_json_round_trip() {
        let scene = three_ball_scene().resolve().unwrap();
        let text = scene.to_json().unwrap();
        let back = Scene::from_json(&text).unwrap();
        assert_eq!(back, scene);
    }

    #[test]
    fn invalid_scenes_rejected() {
        let mut s = three_ball_scene();
        s.components[1].center = s.components[0].center;
        assert!(matches!(s.validate(), Err(Error::Geometry(_))));
        let mut s = three_ball_scene();
        s.k = 0.0;
        assert!(s.validate().is_err());
        let mut s = three_ball_scene();
        s.noise.level = -1.0;
        assert!(s.validate().is_err());
        let mut s = three_ball_scene();
        s.components[0].coefficients = Some(vec![[1.0, 0.0]; 3]);
        assert!(matches!(s.validate(), Err(Error::LengthMismatch { .. })));
        let text = r#"{"k":1,"grid_size":64,"components":[{"center":[0,0],"radius":1,"generator":{"type":"point"}}]}"#;
        assert!(Scene::from_json(text).is_err());
    }

    #[test]
    fn random_coefficients_have_unit_far_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_coefficients(5, 4.0, &mut rng).unwrap();
        let c = SourceComponent::modal([1.0, 1.0], 4.0, 5, &a);
        let f = modal_farfield(&c, 1.0, grid()).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-12);
    }
}
