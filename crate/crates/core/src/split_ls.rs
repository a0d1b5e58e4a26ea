//! Least-squares splitting and completion by Galerkin projection onto
//! `V_Omega + V_1 + ... + V_I`, with `V_Omega = L^2(Omega)` and
//! `V_i = T_{c_i}^* l^2(-N_i, N_i)`.
//!
//! Each subspace gets an orthonormal basis: pulses `1/sqrt(h)` at the grid
//! points inside `Omega`, and translated modes `T_{c_i}^* e^{int}/sqrt(2 pi)`.
//! The Gram matrix of the stacked bases is the system matrix; its diagonal
//! blocks are identities.

use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farfield::{inv_sqrt_tau, AngularGrid, ArcMask, CoeffWindow, FarField, Region, C64};
use crate::synth::{check_distinct_centers, Scene};

/// Systems with a larger 2-norm condition number are refused by [`GalerkinSystem::solve`].
pub const MAX_CONDITION: f64 = 1e12;

/// Centers, truncation orders, missing arc, grid and wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub k: f64,
    pub grid: AngularGrid,
    pub centers: Vec<[f64; 2]>,
    pub orders: Vec<usize>,
    pub omega: ArcMask,
}

impl Geometry {
    pub fn new(
        k: f64,
        grid: AngularGrid,
        centers: Vec<[f64; 2]>,
        orders: Vec<usize>,
        omega: ArcMask,
    ) -> Result<Self> {
        let g = Self {
            k,
            grid,
            centers,
            orders,
            omega,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn from_scene(scene: &Scene) -> Result<Self> {
        Self::new(
            scene.k,
            scene.grid()?,
            scene.centers(),
            scene.orders(),
            scene.omega.clone(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::Domain(format!("wavenumber must be positive, got {}", self.k)));
        }
        if self.centers.len() != self.orders.len() {
            return Err(Error::LengthMismatch {
                expected: self.centers.len(),
                found: self.orders.len(),
            });
        }
        check_distinct_centers(&self.centers)?;
        let limit = self.grid.size() / 8;
        if let Some(&n) = self.orders.iter().find(|&&n| n > limit) {
            return Err(Error::Precondition(format!(
                "order {n} exceeds grid_size/8 = {limit}"
            )));
        }
        if !self.omega.is_empty() && self.omega.grid_points(self.grid).is_empty() {
            return Err(Error::Precondition(
                "missing arc contains no grid point".into(),
            ));
        }
        Ok(())
    }

    pub fn component_count(&self) -> usize {
        self.centers.len()
    }
}

/// `P_i alpha = T_c^* (truncate_{[-N,N]} (T_c alpha))`.
pub fn project_component(alpha: &FarField, c: [f64; 2], order: usize, k: f64) -> Result<FarField> {
    let local = alpha.translate(c, k).window(order);
    Ok(FarField::from_window(alpha.grid(), &local)?.translate_adjoint(c, k))
}

/// `P_Omega alpha`: `alpha` times the indicator of `Omega`.
pub fn project_mask(alpha: &FarField, omega: &ArcMask) -> FarField {
    alpha.mask(omega, Region::Inside)
}

/// Which solver produced a [`SplitSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ls,
    L1,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_number: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
}

/// Recovered components and missing segment.
///
/// `beta` follows the data model `gamma = beta + sum T_{c_i}^* alpha_i`, so it
/// approximates `-alpha|_Omega`; [`SplitSolution::restored_segment`] flips the sign.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSolution {
    pub method: Method,
    pub k: f64,
    pub centers: Vec<[f64; 2]>,
    pub alphas: Vec<CoeffWindow>,
    pub beta: FarField,
    pub residual: f64,
    pub diagnostics: Diagnostics,
}

impl SplitSolution {
    /// `T_{c_i}^* alpha_i` on the grid.
    pub fn component_farfield(&self, i: usize) -> Result<FarField> {
        let grid = self.beta.grid();
        Ok(FarField::from_window(grid, &self.alphas[i])?.translate_adjoint(self.centers[i], self.k))
    }

    /// `sum_i T_{c_i}^* alpha_i`.
    pub fn model(&self) -> Result<FarField> {
        let mut acc = FarField::zeros(self.beta.grid());
        for i in 0..self.alphas.len() {
            acc = acc.add(&self.component_farfield(i)?)?;
        }
        Ok(acc)
    }

    /// Estimate of the far field on `Omega` (`-beta`).
    pub fn restored_segment(&self) -> FarField {
        self.beta.scale(C64::new(-1.0, 0.0))
    }

    /// `gamma` with the missing segment filled in.
    pub fn completed(&self, gamma: &FarField) -> Result<FarField> {
        gamma.sub(&self.beta)
    }

    pub fn to_document(&self) -> SolutionDocument {
        SolutionDocument {
            method: self.method,
            k: self.k,
            grid_size: self.beta.grid().size(),
            components: self
                .centers
                .iter()
                .zip(&self.alphas)
                .map(|(c, a)| ComponentDocument {
                    center: *c,
                    order: a.order(),
                    re: a.values().iter().map(|v| v.re).collect(),
                    im: a.values().iter().map(|v| v.im).collect(),
                })
                .collect(),
            beta_re: self.beta.samples().iter().map(|v| v.re).collect(),
            beta_im: self.beta.samples().iter().map(|v| v.im).collect(),
            residual: self.residual,
            diagnostics: self.diagnostics.clone(),
        }
    }

    pub fn from_document(doc: &SolutionDocument) -> Result<Self> {
        let grid = AngularGrid::new(doc.grid_size)?;
        let mut alphas = Vec::new();
        for c in &doc.components {
            let values = join(&c.re, &c.im)?;
            alphas.push(CoeffWindow::new(c.order, values)?);
        }
        Ok(Self {
            method: doc.method,
            k: doc.k,
            centers: doc.components.iter().map(|c| c.center).collect(),
            alphas,
            beta: FarField::from_samples(grid, join(&doc.beta_re, &doc.beta_im)?)?,
            residual: doc.residual,
            diagnostics: doc.diagnostics.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?)
    }
}

fn join(re: &[f64], im: &[f64]) -> Result<Vec<C64>> {
    if re.len() != im.len() {
        return Err(Error::LengthMismatch {
            expected: re.len(),
            found: im.len(),
        });
    }
    Ok(re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDocument {
    pub center: [f64; 2],
    #[serde(rename = "N")]
    pub order: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// JSON form of a [`SplitSolution`]; `beta` is stored as grid samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub method: Method,
    pub k: f64,
    pub grid_size: usize,
    pub components: Vec<ComponentDocument>,
    pub beta_re: Vec<f64>,
    pub beta_im: Vec<f64>,
    pub residual: f64,
    pub diagnostics: Diagnostics,
}

/// Samples of `T_c^* e^{int} / sqrt(2 pi)` scaled by `sqrt(h)`, for `|n| <= N`.
fn component_columns(grid: AngularGrid, c: [f64; 2], order: usize, k: f64) -> DMatrix<C64> {
    let m = grid.size();
    let scale = grid.step().sqrt() * inv_sqrt_tau();
    let cols = 2 * order + 1;
    DMatrix::from_fn(m, cols, |j, col| {
        let t = grid.angle(j);
        let n = col as f64 - order as f64;
        let phase = n * t - k * (c[0] * t.cos() + c[1] * t.sin());
        C64::from_polar(scale, phase)
    })
}

/// Assembled Galerkin system for a fixed geometry.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    geometry: Geometry,
    omega_points: Vec<usize>,
    basis: DMatrix<C64>,
    gram: DMatrix<C64>,
    condition: f64,
}

/// Builds the system matrix and its 2-norm condition number.
pub fn assemble(geometry: &Geometry) -> Result<GalerkinSystem> {
    geometry.validate()?;
    let grid = geometry.grid;
    let m = grid.size();
    let omega_points = geometry.omega.grid_points(grid);
    let dim = omega_points.len() + geometry.orders.iter().map(|n| 2 * n + 1).sum::<usize>();
    let mut basis = DMatrix::<C64>::zeros(m, dim);
    for (col, &j) in omega_points.iter().enumerate() {
        basis[(j, col)] = C64::new(1.0, 0.0);
    }
    let mut col = omega_points.len();
    for (c, &n) in geometry.centers.iter().zip(&geometry.orders) {
        let block = component_columns(grid, *c, n, geometry.k);
        basis.columns_mut(col, block.ncols()).copy_from(&block);
        col += block.ncols();
    }
    let gram = basis.adjoint() * &basis;
    let sv = gram.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    Ok(GalerkinSystem {
        geometry: geometry.clone(),
        omega_points,
        basis,
        gram,
        condition,
    })
}

impl GalerkinSystem {
    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn dimension(&self) -> usize {
        self.gram.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.gram
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    /// Grid indices carrying the `V_Omega` pulses.
    pub fn omega_points(&self) -> &[usize] {
        &self.omega_points
    }

    /// Column ranges: `V_Omega` first (possibly empty), then `V_1 .. V_I`.
    pub fn block_ranges(&self) -> Vec<Range<usize>> {
        let mut out = Vec::with_capacity(self.geometry.orders.len() + 1);
        out.push(0..self.omega_points.len());
        let mut start = self.omega_points.len();
        for &n in &self.geometry.orders {
            out.push(start..start + 2 * n + 1);
            start += 2 * n + 1;
        }
        out
    }

    /// Gram block between `V_a` and `V_b` (block 0 is `V_Omega`).
    pub fn block(&self, a: usize, b: usize) -> DMatrix<C64> {
        let r = self.block_ranges();
        self.gram
            .view((r[a].start, r[b].start), (r[a].len(), r[b].len()))
            .into_owned()
    }

    fn check_condition(&self) -> Result<()> {
        if !(self.condition <= MAX_CONDITION) {
            return Err(Error::Singular {
                condition: self.condition,
            });
        }
        Ok(())
    }

    /// Least-squares components of `gamma`.
    pub fn solve(&self, gamma: &FarField) -> Result<SplitSolution> {
        let grid = self.geometry.grid;
        if gamma.grid() != grid {
            return Err(Error::LengthMismatch {
                expected: grid.size(),
                found: gamma.grid().size(),
            });
        }
        self.check_condition()?;
        let sqrt_h = grid.step().sqrt();
        let data = DMatrix::from_iterator(grid.size(), 1, gamma.samples().iter().map(|v| v * sqrt_h));
        let rhs = self.basis.adjoint() * data;
        let x = self
            .gram
            .clone()
            .col_piv_qr()
            .solve(&rhs)
            .ok_or(Error::Singular {
                condition: self.condition,
            })?;
        let ranges = self.block_ranges();
        let mut beta = vec![C64::new(0.0, 0.0); grid.size()];
        for (slot, &j) in self.omega_points.iter().enumerate() {
            beta[j] = x[(slot, 0)] / sqrt_h;
        }
        let alphas = self
            .geometry
            .orders
            .iter()
            .zip(&ranges[1..])
            .map(|(&n, r)| CoeffWindow::new(n, r.clone().map(|i| x[(i, 0)]).collect()))
            .collect::<Result<Vec<_>>>()?;
        let mut solution = SplitSolution {
            method: Method::Ls,
            k: self.geometry.k,
            centers: self.geometry.centers.clone(),
            alphas,
            beta: FarField::from_samples(grid, beta)?,
            residual: 0.0,
            diagnostics: Diagnostics {
                condition_number: Some(self.condition),
                ..Default::default()
            },
        };
        let fit = solution.model()?.add(&solution.beta)?;
        solution.residual = gamma.sub(&fit)?.norm();
        Ok(solution)
    }

    /// Operator norm of `gamma -> (block b of the solution)` on the span of
    /// the bases: `sqrt(lambda_max(E_b G^{-1} E_b^T))`.
    pub fn solve_map_norm(&self, b: usize) -> Result<f64> {
        self.check_condition()?;
        let r = self.block_ranges()[b].clone();
        if r.is_empty() {
            return Ok(0.0);
        }
        let dim = self.dimension();
        let selector = DMatrix::from_fn(dim, r.len(), |i, j| {
            if i == r.start + j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let x = self
            .gram
            .clone()
            .col_piv_qr()
            .solve(&selector)
            .ok_or(Error::Singular {
                condition: self.condition,
            })?;
        let inner = x.rows(r.start, r.len()).into_owned();
        Ok(inner.singular_values().max().sqrt())
    }
}

/// Cosine, cosecant and its a-priori bound for the angle between `V_1` and `V_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceConditioning {
    pub cos_angle: f64,
    pub csc_angle: f64,
    /// `(1 - (2N_1+1)(2N_2+1)/(k|c_1-c_2|))^{-1/2}`, `None` when infeasible.
    pub bound_csc: Option<f64>,
}

pub fn subspace_conditioning(
    c1: [f64; 2],
    n1: usize,
    c2: [f64; 2],
    n2: usize,
    k: f64,
    grid: AngularGrid,
) -> Result<SubspaceConditioning> {
    let geometry = Geometry::new(k, grid, vec![c1, c2], vec![n1, n2], ArcMask::empty())?;
    let a = component_columns(grid, c1, n1, geometry.k);
    let b = component_columns(grid, c2, n2, geometry.k);
    let cross = a.adjoint() * b;
    let cos_angle = cross.singular_values().max().min(1.0);
    let sin2 = 1.0 - cos_angle * cos_angle;
    let csc_angle = if sin2 > 0.0 { sin2.sqrt().recip() } else { f64::INFINITY };
    let dist = (k * c1[0] - k * c2[0]).hypot(k * c1[1] - k * c2[1]);
    let ratio = ((2 * n1 + 1) * (2 * n2 + 1)) as f64 / dist;
    let bound_csc = (ratio < 1.0).then(|| (1.0 - ratio).sqrt().recip());
    Ok(SubspaceConditioning {
        cos_angle,
        csc_angle,
        bound_csc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_j;
    use crate::farfield::i_pow;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn grid() -> AngularGrid {
        AngularGrid::new(256).unwrap()
    }

    fn random_field(g: AngularGrid, rng: &mut ChaCha8Rng) -> FarField {
        let s = (0..g.size())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        FarField::from_samples(g, s).unwrap()
    }

    fn random_window(order: usize, rng: &mut ChaCha8Rng) -> CoeffWindow {
        let v = (0..2 * order + 1)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        CoeffWindow::new(order, v).unwrap()
    }

    #[test]
    fn component_projection_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = [7.0, -3.0];
        let a = random_field(grid(), &mut rng);
        let b = random_field(grid(), &mut rng);
        let pa = project_component(&a, c, 5, 1.0).unwrap();
        let ppa = project_component(&pa, c, 5, 1.0).unwrap();
        assert!(ppa.sub(&pa).unwrap().norm() < 1e-10 * pa.norm());
        let pb = project_component(&b, c, 5, 1.0).unwrap();
        let lhs = pa.inner(&b).unwrap();
        let rhs = a.inner(&pb).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * a.norm() * b.norm());
        let inside = FarField::from_window(grid(), &random_window(5, &mut rng))
            .unwrap()
            .translate_adjoint(c, 1.0);
        let back = project_component(&inside, c, 5, 1.0).unwrap();
        assert!(back.sub(&inside).unwrap().norm() < 1e-10 * inside.norm());
    }

    #[test]
    fn mask_projection_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_field(grid(), &mut rng);
        let b = random_field(grid(), &mut rng);
        let omega = ArcMask::new(&[(1.0, 2.0)]).unwrap();
        assert_eq!(project_mask(&a, &ArcMask::full()).samples(), a.samples());
        let pa = project_mask(&a, &omega);
        assert_eq!(project_mask(&pa, &omega).samples(), pa.samples());
        let lhs = pa.inner(&b).unwrap();
        let rhs = a.inner(&project_mask(&b, &omega)).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * a.norm() * b.norm());
        assert!(pa.norm() <= a.norm());
    }

    #[test]
    fn single_component_is_identity() {
        let g = Geometry::new(1.0, grid(), vec![[3.0, 4.0]], vec![4], ArcMask::empty()).unwrap();
        let sys = assemble(&g).unwrap();
        assert_eq!(sys.dimension(), 9);
        let eye = DMatrix::<C64>::identity(9, 9);
        assert!((sys.matrix() - eye).norm() < 1e-12);
        assert!((sys.condition_number() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cross_block_matches_bessel_entries() {
        let c1 = [5.0, 1.0];
        let c2 = [-8.0, 6.0];
        let g = Geometry::new(1.0, grid(), vec![c1, c2], vec![2, 3], ArcMask::empty()).unwrap();
        let sys = assemble(&g).unwrap();
        let block = sys.block(1, 2);
        let dx = [c1[0] - c2[0], c1[1] - c2[1]];
        let r = dx[0].hypot(dx[1]);
        let phi = dx[1].atan2(dx[0]);
        for (a, n) in (-2i64..=2).enumerate() {
            for (b, m) in (-3i64..=3).enumerate() {
                let d = n - m;
                let expect = i_pow(d) * bessel_j(d, r).unwrap() * C64::from_polar(1.0, -(d as f64) * phi);
                assert!((block[(a, b)] - expect).norm() < 1e-12, "({n},{m})");
            }
        }
    }

    #[test]
    fn cross_block_norm_below_one_when_separated() {
        let g = Geometry::new(1.0, AngularGrid::new(512).unwrap(), vec![[0.0, 0.0], [60.0, 0.0]], vec![2, 2], ArcMask::empty()).unwrap();
        let sys = assemble(&g).unwrap();
        assert!(sys.block(1, 2).singular_values().max() < 1.0);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(matches!(
            Geometry::new(1.0, grid(), vec![[1.0, 1.0], [1.0, 1.0]], vec![1, 1], ArcMask::empty()),
            Err(Error::Geometry(_))
        ));
        assert!(Geometry::new(1.0, grid(), vec![[0.0, 0.0]], vec![33], ArcMask::empty()).is_err());
        let tiny = ArcMask::new(&[(0.001, 0.002)]).unwrap();
        assert!(Geometry::new(1.0, grid(), vec![[0.0, 0.0]], vec![1], tiny).is_err());
    }

    #[test]
    fn consistent_data_recovered_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = [[10.0, 0.0], [-10.0, 5.0]];
        let g = Geometry::new(1.0, grid(), c.to_vec(), vec![3, 4], ArcMask::empty()).unwrap();
        let w = random_window(3, &mut rng);
        let gamma = FarField::from_window(grid(), &w).unwrap().translate_adjoint(c[0], 1.0);
        let sol = assemble(&g).unwrap().solve(&gamma).unwrap();
        assert!(sol.alphas[0].distance(&w) < 1e-10);
        assert!(sol.alphas[1].norm(crate::farfield::Lp::Two) < 1e-10);
        assert!(sol.residual < 1e-8);
        assert!(sol.beta.norm() == 0.0);
    }

    #[test]
    fn completion_recovers_masked_segment() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = [[12.0, -2.0], [-9.0, 9.0]];
        let omega = ArcMask::new(&[(FRAC_PI_2, FRAC_PI_2 + PI / 6.0)]).unwrap();
        let g = Geometry::new(1.0, grid(), c.to_vec(), vec![3, 3], omega.clone()).unwrap();
        let w0 = random_window(3, &mut rng);
        let w1 = random_window(3, &mut rng);
        let alpha = FarField::from_window(grid(), &w0)
            .unwrap()
            .translate_adjoint(c[0], 1.0)
            .add(&FarField::from_window(grid(), &w1).unwrap().translate_adjoint(c[1], 1.0))
            .unwrap();
        let gamma = alpha.mask(&omega, Region::Outside);
        let sol = assemble(&g).unwrap().solve(&gamma).unwrap();
        let truth = alpha.mask(&omega, Region::Inside);
        assert!(sol.restored_segment().sub(&truth).unwrap().norm() < 1e-8 * truth.norm());
        assert!(sol.alphas[0].distance(&w0) < 1e-8);
        assert!(sol.completed(&gamma).unwrap().sub(&alpha).unwrap().norm() < 1e-8 * alpha.norm());
    }

    #[test]
    fn mask_free_solution_matches_direct_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = vec![[8.0, 3.0], [-6.0, -7.0], [1.0, 12.0]];
        let orders = vec![2, 3, 1];
        let g = Geometry::new(1.0, grid(), c.clone(), orders.clone(), ArcMask::empty()).unwrap();
        let gamma = random_field(grid(), &mut rng);
        let sol = assemble(&g).unwrap().solve(&gamma).unwrap();
        let blocks: Vec<_> = c
            .iter()
            .zip(&orders)
            .map(|(c, &n)| component_columns(grid(), *c, n, 1.0))
            .collect();
        let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
        let mut a = DMatrix::<C64>::zeros(grid().size(), cols);
        let mut at = 0;
        for b in &blocks {
            a.columns_mut(at, b.ncols()).copy_from(b);
            at += b.ncols();
        }
        let sqrt_h = grid().step().sqrt();
        let y = DMatrix::from_iterator(grid().size(), 1, gamma.samples().iter().map(|v| v * sqrt_h));
        let x = a.svd(true, true).solve(&y, 1e-14).unwrap();
        let got: Vec<C64> = sol.alphas.iter().flat_map(|w| w.values().to_vec()).collect();
        for (i, v) in got.iter().enumerate() {
            assert!((v - x[(i, 0)]).norm() < 1e-10);
        }
    }

    #[test]
    fn three_ball_geometry_condition_number() {
        let omega = ArcMask::new(&[(FRAC_PI_2, FRAC_PI_2 + PI / 3.0)]).unwrap();
        let g = Geometry::new(
            1.0,
            AngularGrid::new(512).unwrap(),
            vec![[24.0, -4.0], [-22.0, 23.0], [-15.0, -20.0]],
            vec![7, 9, 6],
            omega,
        )
        .unwrap();
        let sys = assemble(&g).unwrap();
        assert_eq!(sys.dimension(), 86 + 15 + 19 + 13);
        let cond = sys.condition_number();
        assert!(cond > 5.4e4 / 2.0 && cond < 5.4e4 * 2.0, "cond = {cond}");
    }

    #[test]
    fn conditioning_bounds() {
        let s = subspace_conditioning([0.0, 0.0], 0, [3.0, 0.0], 0, 1.0, grid()).unwrap();
        let music = (1.0f64 - 1.0 / 3.0).sqrt().recip();
        assert!((s.bound_csc.unwrap() - music).abs() < 1e-15);
        assert!(s.csc_angle <= music);
        let s = subspace_conditioning([0.0, 0.0], 0, [20.0, 0.0], 3, 1.0, grid()).unwrap();
        let lin = (1.0f64 - 7.0 / 20.0).sqrt().recip();
        assert!((s.bound_csc.unwrap() - lin).abs() < 1e-15);
        let s = subspace_conditioning([0.0, 0.0], 2, [5.0, 0.0], 2, 1.0, grid()).unwrap();
        assert!(s.bound_csc.is_none());
    }

    #[test]
    fn solution_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let omega = ArcMask::new(&[(0.3, 0.9)]).unwrap();
        let g = Geometry::new(1.0, grid(), vec![[5.0, 5.0]], vec![3], omega).unwrap();
        let sol = assemble(&g).unwrap().solve(&random_field(grid(), &mut rng)).unwrap();
        let text = sol.to_json().unwrap();
        let back = SplitSolution::from_json(&text).unwrap();
        assert_eq!(back.alphas, sol.alphas);
        assert_eq!(back.beta.samples(), sol.beta.samples());
        assert_eq!(back.to_json().unwrap(), text);
    }
}
