//! Stability constants and uncertainty inequalities for splitting and
//! completion, with hypothesis checks.
//!
//! Every distance enters as `k|c_i - c_j|`. Constants are `(1 - q)^{-1}` for
//! the stability estimates and `(1 - q)^{-1/2}` for the conditioning ones.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j, bessel_j_orders};
use crate::error::{Error, Result};
use crate::farfield::{i_pow, C64};

/// Upper bound constant for `r J_n(r)^2` when `|n| < M + N < r/2 - 1`.
pub const KRASIKOV_B: f64 = 0.7595;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "U_l0")]
    UncertaintyL0,
    #[serde(rename = "U_band")]
    UncertaintyBand,
    #[serde(rename = "U_mixed")]
    UncertaintyMixed,
    #[serde(rename = "LS_two")]
    LsTwo,
    #[serde(rename = "LS_complete")]
    LsComplete,
    #[serde(rename = "LS_multi")]
    LsMulti,
    #[serde(rename = "LS_complete_multi")]
    LsCompleteMulti,
    #[serde(rename = "L1_two")]
    L1Two,
    #[serde(rename = "L1_two_band")]
    L1TwoBand,
    #[serde(rename = "L1_two_band_apriori")]
    L1TwoBandApriori,
    #[serde(rename = "L1_complete")]
    L1Complete,
    #[serde(rename = "L1_complete_unknown_omega")]
    L1CompleteUnknownOmega,
    #[serde(rename = "L1_multi")]
    L1Multi,
    #[serde(rename = "L1_multi_band")]
    L1MultiBand,
    #[serde(rename = "L1_complete_multi")]
    L1CompleteMulti,
    #[serde(rename = "L1_complete_multi_band")]
    L1CompleteMultiBand,
    #[serde(rename = "L1_multi_weighted")]
    L1MultiWeighted,
    #[serde(rename = "L1_multi_weighted_band")]
    L1MultiWeightedBand,
    #[serde(rename = "L1_complete_multi_weighted")]
    L1CompleteMultiWeighted,
    #[serde(rename = "L1_complete_multi_weighted_band")]
    L1CompleteMultiWeightedBand,
    #[serde(rename = "COND_two")]
    CondTwo,
    #[serde(rename = "COND_point")]
    CondPoint,
    #[serde(rename = "COND_music")]
    CondMusic,
}

impl TheoremId {
    pub const ALL: [TheoremId; 23] = [
        TheoremId::UncertaintyL0,
        TheoremId::UncertaintyBand,
        TheoremId::UncertaintyMixed,
        TheoremId::LsTwo,
        TheoremId::LsComplete,
        TheoremId::LsMulti,
        TheoremId::LsCompleteMulti,
        TheoremId::L1Two,
        TheoremId::L1TwoBand,
        TheoremId::L1TwoBandApriori,
        TheoremId::L1Complete,
        TheoremId::L1CompleteUnknownOmega,
        TheoremId::L1Multi,
        TheoremId::L1MultiBand,
        TheoremId::L1CompleteMulti,
        TheoremId::L1CompleteMultiBand,
        TheoremId::L1MultiWeighted,
        TheoremId::L1MultiWeightedBand,
        TheoremId::L1CompleteMultiWeighted,
        TheoremId::L1CompleteMultiWeightedBand,
        TheoremId::CondTwo,
        TheoremId::CondPoint,
        TheoremId::CondMusic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::UncertaintyL0 => "U_l0",
            TheoremId::UncertaintyBand => "U_band",
            TheoremId::UncertaintyMixed => "U_mixed",
            TheoremId::LsTwo => "LS_two",
            TheoremId::LsComplete => "LS_complete",
            TheoremId::LsMulti => "LS_multi",
            TheoremId::LsCompleteMulti => "LS_complete_multi",
            TheoremId::L1Two => "L1_two",
            TheoremId::L1TwoBand => "L1_two_band",
            TheoremId::L1TwoBandApriori => "L1_two_band_apriori",
            TheoremId::L1Complete => "L1_complete",
            TheoremId::L1CompleteUnknownOmega => "L1_complete_unknown_omega",
            TheoremId::L1Multi => "L1_multi",
            TheoremId::L1MultiBand => "L1_multi_band",
            TheoremId::L1CompleteMulti => "L1_complete_multi",
            TheoremId::L1CompleteMultiBand => "L1_complete_multi_band",
            TheoremId::L1MultiWeighted => "L1_multi_weighted",
            TheoremId::L1MultiWeightedBand => "L1_multi_weighted_band",
            TheoremId::L1CompleteMultiWeighted => "L1_complete_multi_weighted",
            TheoremId::L1CompleteMultiWeightedBand => "L1_complete_multi_weighted_band",
            TheoremId::CondTwo => "COND_two",
            TheoremId::CondPoint => "COND_point",
            TheoremId::CondMusic => "COND_music",
        }
    }

    fn kind(self) -> Kind {
        use TheoremId::*;
        match self {
            UncertaintyL0 | UncertaintyBand | UncertaintyMixed => Kind::Uncertainty,
            LsTwo | LsComplete | LsMulti | LsCompleteMulti => Kind::LeastSquares,
            CondTwo | CondPoint | CondMusic => Kind::Conditioning,
            _ => Kind::L1,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('Ω', "_omega");
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(&key))
            .ok_or_else(|| Error::Parse(format!("unknown theorem id {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Uncertainty,
    LeastSquares,
    L1,
    Conditioning,
}

/// How to read the Omega term of the weighted (and band) complete-and-split
/// constants, which are printed as `(1 - A + B)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignVariant {
    #[default]
    AsPrinted,
    /// `(1 - A - B)^{-1}`.
    Conservative,
}

/// Weight definition for the weighted multi-component estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    /// `a_i^2 = max_{j != i} (2/d_ij)^p`.
    #[default]
    Pair,
    /// `a_i^2 = max_{j != i, l != i,j} (1/d_ij + 1/d_il)^p`; needs three components.
    Triple,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundGeometry {
    pub k: f64,
    pub centers: Vec<[f64; 2]>,
    #[serde(default)]
    pub orders: Option<Vec<usize>>,
    /// `||alpha_i^0||_{l0}` per component.
    #[serde(default)]
    pub l0: Option<Vec<f64>>,
    /// Measure of the missing arc.
    #[serde(default)]
    pub omega_measure: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundData {
    /// `||gamma^1 - gamma^0||_2` for least squares, `delta` for l1,
    /// `||alpha||_2 ||beta||_2` for the uncertainty inequalities. Defaults to 1.
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundOptions {
    #[serde(default)]
    pub sign: SignVariant,
    #[serde(default)]
    pub weights: WeightRule,
}

/// A condition `lhs < rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentBound {
    pub label: String,
    pub constant: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: TheoremId,
    pub hypotheses_ok: bool,
    pub hypotheses: Vec<Hypothesis>,
    /// Largest constant over the estimated quantities.
    pub constant: f64,
    pub rhs: f64,
    pub components: Vec<ComponentBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub options: BoundOptions,
    pub geometry: BoundGeometry,
    pub data: BoundData,
}

impl BoundReport {
    pub fn violated(&self) -> Vec<&str> {
        self.hypotheses
            .iter()
            .filter(|h| !h.ok)
            .map(|h| h.name.as_str())
            .collect()
    }

    pub fn component(&self, label: &str) -> Option<&ComponentBound> {
        self.components.iter().find(|c| c.label == label)
    }
}

fn inverse(x: f64) -> f64 {
    if x > 0.0 {
        1.0 / x
    } else {
        f64::INFINITY
    }
}

struct Builder {
    hypotheses: Vec<Hypothesis>,
    constants: Vec<(String, f64)>,
}

impl Builder {
    fn new() -> Self {
        Self {
            hypotheses: Vec::new(),
            constants: Vec::new(),
        }
    }

    fn require(&mut self, name: impl Into<String>, lhs: f64, rhs: f64) {
        self.hypotheses.push(Hypothesis {
            name: name.into(),
            ok: lhs < rhs,
            lhs,
            rhs,
        });
    }

    fn small(&mut self, name: impl Into<String>, q: f64) {
        self.require(name, q, 1.0);
    }

    fn constant(&mut self, label: impl Into<String>, value: f64) {
        self.constants.push((label.into(), value));
    }
}

struct Scaled {
    k_centers: Vec<[f64; 2]>,
}

impl Scaled {
    fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.k_centers[i], self.k_centers[j]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    fn len(&self) -> usize {
        self.k_centers.len()
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    fn min_distance(&self) -> f64 {
        self.pairs()
            .map(|(i, j)| self.distance(i, j))
            .fold(f64::INFINITY, f64::min)
    }
}

fn need<'a, T>(field: &'a Option<Vec<T>>, name: &str, count: usize) -> Result<&'a [T]> {
    let v = field
        .as_deref()
        .ok_or_else(|| Error::Precondition(format!("{name} required")))?;
    if v.len() != count {
        return Err(Error::LengthMismatch {
            expected: count,
            found: v.len(),
        });
    }
    Ok(v)
}

fn need_omega(g: &BoundGeometry) -> Result<f64> {
    match g.omega_measure {
        Some(w) if w >= 0.0 && w.is_finite() => Ok(w),
        Some(w) => Err(Error::Domain(format!("omega measure must be nonnegative, got {w}"))),
        None => Err(Error::Precondition("omega measure required".into())),
    }
}

fn need_centers(g: &BoundGeometry, theorem: TheoremId, exact: Option<usize>, min: usize) -> Result<()> {
    let n = g.centers.len();
    let ok = match exact {
        Some(e) => n == e,
        None => n >= min,
    };
    if !ok {
        let want = exact.map_or(format!("at least {min}"), |e| e.to_string());
        return Err(Error::Precondition(format!(
            "{theorem} needs {want} components, got {n}"
        )));
    }
    Ok(())
}

fn separation(b: &mut Builder, s: &Scaled, orders: &[usize]) {
    for (i, j) in s.pairs() {
        b.require(
            format!("separation({},{})", i + 1, j + 1),
            2.0 * (orders[i] + orders[j] + 1) as f64,
            s.distance(i, j),
        );
    }
}

fn rank(n: usize) -> f64 {
    (2 * n + 1) as f64
}

/// `max_{j != l} d_jl^{-p}`.
fn max_inverse_distance(s: &Scaled, p: f64) -> f64 {
    s.min_distance().powf(-p)
}

/// Weights `a_i` for the weighted multi-component estimates with exponent `p`.
pub fn weight_values(centers: &[[f64; 2]], k: f64, rule: WeightRule, p: f64) -> Result<Vec<f64>> {
    let s = Scaled {
        k_centers: centers.iter().map(|c| [k * c[0], k * c[1]]).collect(),
    };
    let n = s.len();
    if n < 2 || (rule == WeightRule::Triple && n < 3) {
        return Err(Error::Precondition(format!(
            "{rule:?} weights need {} components, got {n}",
            if rule == WeightRule::Triple { 3 } else { 2 }
        )));
    }
    Ok((0..n)
        .map(|i| {
            let a2 = match rule {
                WeightRule::Pair => (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (2.0 / s.distance(i, j)).powf(p))
                    .fold(f64::NEG_INFINITY, f64::max),
                WeightRule::Triple => (0..n)
                    .filter(|&j| j != i)
                    .flat_map(|j| {
                        let s = &s;
                        (0..n)
                            .filter(move |&l| l != i && l != j)
                            .map(move |l| (1.0 / s.distance(i, j) + 1.0 / s.distance(i, l)).powf(p))
                    })
                    .fold(f64::NEG_INFINITY, f64::max),
            };
            a2.sqrt()
        })
        .collect())
}

/// Evaluates the hypotheses and constant(s) of one estimate.
pub fn evaluate_bound(
    theorem: TheoremId,
    geometry: &BoundGeometry,
    data: &BoundData,
    options: &BoundOptions,
) -> Result<BoundReport> {
    use TheoremId::*;
    let k = geometry.k;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    if geometry.centers.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Domain("centers must be finite".into()));
    }
    if let Some(v) = data.value {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("data value must be nonnegative, got {v}")));
        }
    }
    if let Some(l0) = &geometry.l0 {
        if l0.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::Domain("l0 counts must be nonnegative".into()));
        }
    }
    let s = Scaled {
        k_centers: geometry.centers.iter().map(|c| [k * c[0], k * c[1]]).collect(),
    };
    let n = s.len();
    let tau2 = 2.0 * std::f64::consts::PI;
    let sqrt_tau = tau2.sqrt();
    let mut b = Builder::new();
    let mut weights = None;

    match theorem {
        UncertaintyL0 => {
            need_centers(geometry, theorem, Some(2), 2)?;
            let l0 = need(&geometry.l0, "l0 counts", 2)?;
            let d = s.distance(0, 1);
            b.require("nonzero translation", 0.0, d);
            b.constant("uncertainty", (l0[0] * l0[1]).sqrt() / d.cbrt());
        }
        UncertaintyBand => {
            need_centers(geometry, theorem, Some(2), 2)?;
            let o = need(&geometry.orders, "orders", 2)?;
            let d = s.distance(0, 1);
            b.require("band order M >= 1", 0.5, o[0] as f64);
            b.require("band order N >= 1", 0.5, o[1] as f64);
            separation(&mut b, &s, o);
            b.constant("uncertainty", (rank(o[0]) * rank(o[1]) / d).sqrt());
        }
        UncertaintyMixed => {
            let l0 = need(&geometry.l0, "l0 counts", 1)?;
            let w = need_omega(geometry)?;
            b.constant("uncertainty", (l0[0] * w / tau2).sqrt());
        }
        LsTwo => {
            need_centers(geometry, theorem, Some(2), 2)?;
            let o = need(&geometry.orders, "orders", 2)?;
            separation(&mut b, &s, o);
            let q = rank(o[0]) * rank(o[1]) / s.distance(0, 1);
            b.small("positivity", q);
            let c = inverse(1.0 - q);
            b.constant("alpha_1", c);
            b.constant("alpha_2", c);
        }
        LsComplete => {
            need_centers(geometry, theorem, Some(1), 1)?;
            let o = need(&geometry.orders, "orders", 1)?;
            let q = rank(o[0]) * need_omega(geometry)? / tau2;
            b.small("positivity", q);
            let c = inverse(1.0 - q);
            b.constant("alpha_1", c);
            b.constant("beta", c);
        }
        LsMulti => {
            need_centers(geometry, theorem, None, 2)?;
            let o = need(&geometry.orders, "orders", n)?;
            separation(&mut b, &s, o);
            for i in 0..n {
                let sum: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (rank(o[j]) / s.distance(i, j)).sqrt())
                    .sum();
                let q = rank(o[i]).sqrt() * sum;
                b.small(format!("positivity(alpha_{})", i + 1), q);
                b.constant(format!("alpha_{}", i + 1), inverse(1.0 - q));
            }
        }
        LsCompleteMulti => {
            need_centers(geometry, theorem, None, 1)?;
            let o = need(&geometry.orders, "orders", n)?;
            let w = (need_omega(geometry)? / tau2).sqrt();
            separation(&mut b, &s, o);
            let qb = w * o.iter().map(|&m| rank(m).sqrt()).sum::<f64>();
            b.small("positivity(beta)", qb);
            for i in 0..n {
                let sum: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (rank(o[i]) / s.distance(i, j)).sqrt())
                    .sum();
                let q = rank(o[i]).sqrt() * (w + sum);
                b.small(format!("positivity(alpha_{})", i + 1), q);
                b.constant(format!("alpha_{}", i + 1), inverse(1.0 - q));
            }
            b.constant("beta", inverse(1.0 - qb));
        }
        L1Two | L1TwoBand => {
            need_centers(geometry, theorem, Some(2), 2)?;
            let l0 = need(&geometry.l0, "l0 counts", 2)?;
            let p = if theorem == L1Two {
                1.0 / 3.0
            } else {
                separation(&mut b, &s, need(&geometry.orders, "orders", 2)?);
                0.5
            };
            let d = s.distance(0, 1).powf(p);
            for i in 0..2 {
                let q = 4.0 * l0[i] / d;
                b.small(format!("sparsity(alpha_{})", i + 1), q);
                b.constant(format!("alpha_{}", i + 1), inverse(1.0 - q));
            }
        }
        L1TwoBandApriori => {
            need_centers(geometry, theorem, Some(2), 2)?;
            let o = need(&geometry.orders, "orders", 2)?;
            separation(&mut b, &s, o);
            let q = rank(o[0]) * rank(o[1]) / s.distance(0, 1);
            b.small("positivity", q);
            let c = inverse(1.0 - q);
            b.constant("alpha_1", c);
            b.constant("alpha_2", c);
        }
        L1Complete => {
            need_centers(geometry, theorem, Some(1), 1)?;
            let l0 = need(&geometry.l0, "l0 counts", 1)?;
            let q = 2.0 * l0[0] * need_omega(geometry)? / std::f64::consts::PI;
            b.small("sparsity", q);
            let c = inverse(1.0 - q);
            b.constant("alpha_1", c);
            b.constant("beta", c);
        }
        L1CompleteUnknownOmega => {
            need_centers(geometry, theorem, Some(1), 1)?;
            let l0 = need(&geometry.l0, "l0 counts", 1)?;
            let w = need_omega(geometry)?;
            let tau = data
                .tau
                .ok_or_else(|| Error::Precondition("tau required".into()))?;
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::Domain(format!("tau must be positive, got {tau}")));
            }
            let qa = 4.0 / sqrt_tau * l0[0] / (tau * tau);
            let qb = 4.0 / sqrt_tau * tau * tau * w;
            b.small("sparsity(alpha_1)", qa);
            b.small("sparsity(beta)", qb);
            b.constant("alpha_1", inverse(1.0 - qa));
            b.constant("beta", inverse(1.0 - qb));
        }
        L1Multi | L1MultiBand => {
            need_centers(geometry, theorem, None, 2)?;
            let l0 = need(&geometry.l0, "l0 counts", n)?;
            let p = if theorem == L1Multi {
                1.0 / 3.0
            } else {
                separation(&mut b, &s, need(&geometry.orders, "orders", n)?);
                0.5
            };
            let m = max_inverse_distance(&s, p);
            for i in 0..n {
                let q = m * 4.0 * (n - 1) as f64 * l0[i];
                b.small(format!("sparsity(alpha_{})", i + 1), q);
                b.constant(format!("alpha_{}", i + 1), inverse(1.0 - q));
            }
        }
        L1CompleteMulti | L1CompleteMultiBand => {
            need_centers(geometry, theorem, None, 2)?;
            let l0 = need(&geometry.l0, "l0 counts", n)?;
            let w = need_omega(geometry)?;
            let p = if theorem == L1CompleteMulti {
                1.0 / 3.0
            } else {
                separation(&mut b, &s, need(&geometry.orders, "orders", n)?);
                0.5
            };
            let m = max_inverse_distance(&s, p);
            let qb = 2.0 / sqrt_tau * l0.iter().map(|&x| (w * x).sqrt()).sum::<f64>();
            b.small("sparsity(beta)", qb);
            for i in 0..n {
                let a = m * 4.0 * (n - 1) as f64 * l0[i];
                let o = 2.0 / sqrt_tau * (w * l0[i]).sqrt();
                b.small(format!("sparsity(alpha_{})", i + 1), a + o);
                let denom = if theorem == L1CompleteMultiBand && options.sign == SignVariant::AsPrinted {
                    1.0 - a + o
                } else {
                    1.0 - a - o
                };
                b.constant(format!("alpha_{}", i + 1), inverse(denom));
            }
            b.constant("beta", inverse(1.0 - qb));
        }
        L1MultiWeighted | L1MultiWeightedBand => {
            need_centers(geometry, theorem, None, 2)?;
            let l0 = need(&geometry.l0, "l0 counts", n)?;
            let p = if theorem == L1MultiWeighted {
                1.0 / 3.0
            } else {
                separation(&mut b, &s, need(&geometry.orders, "orders", n)?);
                0.5
            };
            let a = weight_values(&geometry.centers, k, options.weights, p)?;
            for i in 0..n {
                let q = 4.0 * (n - 1) as f64 * a[i] * a[i] * l0[i];
                b.small(format!("sparsity(alpha_{})", i + 1), q);
                b.constant(format!("alpha_{}", i + 1), inverse(1.0 - q));
            }
            weights = Some(a);
        }
        L1CompleteMultiWeighted | L1CompleteMultiWeightedBand => {
            need_centers(geometry, theorem, None, 2)?;
            let l0 = need(&geometry.l0, "l0 counts", n)?;
            let w = need_omega(geometry)?;
            let p = if theorem == L1CompleteMultiWeighted {
                1.0 / 3.0
            } else {
                separation(&mut b, &s, need(&geometry.orders, "orders", n)?);
                0.5
            };
            let a = weight_values(&geometry.centers, k, options.weights, p)?;
            let m = a.iter().map(|x| 1.0 / x).fold(f64::NEG_INFINITY, f64::max);
            let qb = 2.0 / sqrt_tau * m * (0..n).map(|i| a[i] * (w * l0[i]).sqrt()).sum::<f64>();
            b.small("sparsity(beta)", qb);
            for i in 0..n {
                let sep = 4.0 * (n - 1) as f64 * a[i] * a[i] * l0[i];
                let o = 2.0 / sqrt_tau * m * a[i] * (w * l0[i]).sqrt();
                b.small(format!("sparsity(alpha_{})", i + 1), sep + o);
                let denom = match options.sign {
                    SignVariant::AsPrinted => 1.0 - sep + o,
                    SignVariant::Conservative => 1.0 - sep - o,
                };
                b.constant(format!("alpha_{}", i + 1), inverse(denom));
            }
            b.constant("beta", inverse(1.0 - qb));
            weights = Some(a);
        }
        CondTwo | CondPoint | CondMusic => {
            need_centers(geometry, theorem, Some(2), 2)?;
            let num = match theorem {
                CondTwo => {
                    let o = need(&geometry.orders, "orders", 2)?;
                    rank(o[0]) * rank(o[1])
                }
                CondPoint => {
                    let o = need(&geometry.orders, "orders", 2)?;
                    rank(o[1])
                }
                _ => 1.0,
            };
            let q = num / s.distance(0, 1);
            b.small("positivity", q);
            b.constant("csc", inverse(1.0 - q).sqrt());
        }
    }

    let hypotheses_ok = b.hypotheses.iter().all(|h| h.ok);
    let value = data.value.unwrap_or(1.0);
    let factor = match theorem.kind() {
        Kind::Uncertainty => value,
        Kind::LeastSquares => value * value,
        Kind::L1 => 4.0 * value * value,
        Kind::Conditioning => 1.0,
    };
    let components: Vec<ComponentBound> = b
        .constants
        .into_iter()
        .map(|(label, constant)| ComponentBound {
            rhs: if hypotheses_ok {
                constant * factor
            } else {
                f64::INFINITY
            },
            label,
            constant,
        })
        .collect();
    let constant = components
        .iter()
        .map(|c| c.constant)
        .fold(f64::NEG_INFINITY, f64::max);
    let rhs = components
        .iter()
        .map(|c| c.rhs)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundReport {
        theorem,
        hypotheses_ok,
        hypotheses: b.hypotheses,
        constant,
        rhs,
        components,
        weights,
        options: *options,
        geometry: geometry.clone(),
        data: *data,
    })
}

/// Reports for every theorem whose required inputs are present.
pub fn evaluate_all(geometry: &BoundGeometry, data: &BoundData, options: &BoundOptions) -> Vec<BoundReport> {
    TheoremId::ALL
        .into_iter()
        .filter_map(|t| evaluate_bound(t, geometry, data, options).ok())
        .collect()
}

/// CSV table `theorem,feasible,constant,rhs,violated`.
pub fn reports_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from("theorem,feasible,constant,rhs,violated\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{:.17e},{:.17e},{}\n",
            r.theorem,
            r.hypotheses_ok,
            r.constant,
            r.rhs,
            r.violated().join(";")
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyStats {
    pub theorem: TheoremId,
    pub trials: usize,
    pub max_ratio: f64,
    pub violations: usize,
}

/// Relative slack allowed before a trial counts as a violation.
const RATIO_SLACK: f64 = 1e-10;

fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_support(rng: &mut ChaCha8Rng, count: usize, lo: i64, hi: i64) -> Vec<i64> {
    let mut s: Vec<i64> = Vec::with_capacity(count);
    while s.len() < count {
        let n = rng.gen_range(lo..=hi);
        if !s.contains(&n) {
            s.push(n);
        }
    }
    s
}

fn sparse_norm(v: &[(i64, C64)]) -> f64 {
    v.iter().map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Coefficients of `T_c beta` at the requested indices.
fn translate_at(beta: &[(i64, C64)], c: [f64; 2], at: &[i64]) -> Result<Vec<C64>> {
    let r = c[0].hypot(c[1]);
    let phi = c[1].atan2(c[0]);
    at.iter()
        .map(|&m| {
            beta.iter().try_fold(C64::new(0.0, 0.0), |acc, &(n, b)| {
                let q = m - n;
                let kappa = i_pow(q) * bessel_j(q, r)? * C64::from_polar(1.0, -(q as f64) * phi);
                Ok(acc + kappa * b)
            })
        })
        .collect()
}

/// `|<alpha, T_c beta>|` for sparse sequences; the second value is the
/// alignment-maximizing choice `alpha = P_S T_c beta`.
fn translated_inner(alpha: &[(i64, C64)], beta: &[(i64, C64)], c: [f64; 2], aligned: bool) -> Result<(f64, Vec<(i64, C64)>)> {
    let idx: Vec<i64> = alpha.iter().map(|(n, _)| *n).collect();
    let tb = translate_at(beta, c, &idx)?;
    let alpha: Vec<(i64, C64)> = if aligned {
        idx.iter().copied().zip(tb.iter().copied()).collect()
    } else {
        alpha.to_vec()
    };
    let s: C64 = alpha.iter().zip(&tb).map(|((_, a), t)| a * t.conj()).sum();
    Ok((s.norm(), alpha))
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

fn random_direction(rng: &mut ChaCha8Rng, r: f64) -> [f64; 2] {
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    [r * phi.cos(), r * phi.sin()]
}

fn trial(theorem: TheoremId, rng: &mut ChaCha8Rng, index: usize) -> Result<f64> {
    let aligned = index % 2 == 1;
    let degenerate = index == 0;
    match theorem {
        TheoremId::UncertaintyL0 => {
            let s1 = rng.gen_range(1..=8);
            let s2 = rng.gen_range(1..=8);
            let mut alpha: Vec<(i64, C64)> = random_support(rng, s1, -40, 40)
                .into_iter()
                .map(|n| (n, random_complex(rng)))
                .collect();
            if degenerate {
                alpha.iter_mut().for_each(|(_, z)| *z = C64::new(0.0, 0.0));
            }
            let beta: Vec<(i64, C64)> = random_support(rng, s2, -40, 40)
                .into_iter()
                .map(|n| (n, random_complex(rng)))
                .collect();
            let r = 10f64.powf(rng.gen_range(-0.5..2.5));
            let c = random_direction(rng, r);
            let (lhs, alpha) = translated_inner(&alpha, &beta, c, aligned && !degenerate)?;
            let bound = ((s1 * s2) as f64).sqrt() / r.cbrt() * sparse_norm(&alpha) * sparse_norm(&beta);
            Ok(ratio(lhs, bound))
        }
        TheoremId::UncertaintyBand => {
            let m = rng.gen_range(1..=6i64);
            let n = rng.gen_range(1..=6i64);
            let edge = 2.0 * (m + n + 1) as f64;
            let r = edge * (1.0 + 10f64.powf(rng.gen_range(-6.0..1.3)));
            let c = random_direction(rng, r);
            let mut alpha: Vec<(i64, C64)> = (-m..=m).map(|q| (q, random_complex(rng))).collect();
            if degenerate {
                alpha.iter_mut().for_each(|(_, z)| *z = C64::new(0.0, 0.0));
            }
            let beta: Vec<(i64, C64)> = (-n..=n).map(|q| (q, random_complex(rng))).collect();
            let (lhs, alpha) = translated_inner(&alpha, &beta, c, aligned && !degenerate)?;
            let bound = (((2 * m + 1) * (2 * n + 1)) as f64 / r).sqrt() * sparse_norm(&alpha) * sparse_norm(&beta);
            Ok(ratio(lhs, bound))
        }
        TheoremId::UncertaintyMixed => {
            let s1 = rng.gen_range(1..=8);
            let mut alpha: Vec<(i64, C64)> = random_support(rng, s1, -30, 30)
                .into_iter()
                .map(|n| (n, random_complex(rng)))
                .collect();
            if degenerate {
                alpha.iter_mut().for_each(|(_, z)| *z = C64::new(0.0, 0.0));
            }
            let width = rng.gen_range(0.01..std::f64::consts::TAU);
            let start = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = rng.gen_range(0.0..100.0);
            let c = random_direction(rng, r);
            let beta_modes: Vec<(i64, C64)> = (-3..=3).map(|q| (q, random_complex(rng))).collect();
            let points = 4096;
            let h = width / points as f64;
            let eval = |coeffs: &[(i64, C64)], t: f64| -> C64 {
                coeffs
                    .iter()
                    .map(|&(n, a)| a * C64::from_polar(1.0, n as f64 * t))
                    .sum::<C64>()
                    / std::f64::consts::TAU.sqrt()
            };
            let (mut inner, mut beta_sq) = (C64::new(0.0, 0.0), 0.0);
            for j in 0..points {
                let t = start + (j as f64 + 0.5) * h;
                let ta = C64::from_polar(1.0, c[0] * t.cos() + c[1] * t.sin()) * eval(&alpha, t);
                let b = if aligned { ta } else { eval(&beta_modes, t) };
                inner += ta * b.conj() * h;
                beta_sq += b.norm_sqr() * h;
            }
            let bound = (s1 as f64 * width / std::f64::consts::TAU).sqrt() * sparse_norm(&alpha) * beta_sq.sqrt();
            Ok(ratio(inner.norm(), bound))
        }
        other => Err(Error::Precondition(format!("{other} is not an uncertainty inequality"))),
    }
}

/// Random trials of an uncertainty inequality; trial `i` uses ChaCha8 stream `i`
/// of `seed`.
pub fn verify_uncertainty(theorem: TheoremId, trials: usize, seed: u64) -> Result<UncertaintyStats> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    if theorem.kind() != Kind::Uncertainty {
        return Err(Error::Precondition(format!("{theorem} is not an uncertainty inequality")));
    }
    let ratios = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            trial(theorem, &mut rng, i)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(UncertaintyStats {
        theorem,
        trials,
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        violations: ratios.iter().filter(|&&r| r > 1.0 + RATIO_SLACK).count(),
    })
}

/// `max r J_n(r)^2` over `|n| < M + N` and the given samples.
pub fn krasikov_check(m: usize, n: usize, r_samples: &[f64]) -> Result<f64> {
    if m < 1 || n < 1 {
        return Err(Error::Domain("band orders must be at least 1".into()));
    }
    let edge = 2.0 * (m + n + 1) as f64;
    if let Some(r) = r_samples.iter().find(|&&r| !(r > edge && r.is_finite())) {
        return Err(Error::Precondition(format!("sample r = {r} not above {edge}")));
    }
    r_samples.iter().try_fold(0.0f64, |acc, &r| {
        let j = bessel_j_orders(m + n - 1, r)?;
        Ok(j.iter().fold(acc, |a, v| a.max(r * v * v)))
    })
}
