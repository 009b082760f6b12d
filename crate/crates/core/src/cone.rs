//! Desingularising a cone into a surface ε-isometric to a flat cylinder.
//!
//! The base map `f₀(x, y) = (y cos 2πx, y sin 2πx, y)/√2` on
//! `ℝ/ℤ × [-0.1, 0.1]` is singular at `y = 0`. The section
//! `𝔖₀ = (f₀, (v₁, ∂₂f₀))` is a formal solution of `Is(ε)` for every `ε`, and a
//! subsolution in the direction `∂₁` as long as `|y| < 1/(√2 π)`. One
//! Corrugation Process with the loops
//!
//! `γ(x, y, t) = (cos g(t) + η cos θ) v₁ + sin g(t) n`,  `θ = arccos(√2 π y)`
//!
//! yields `f₁`, whose derivatives are computed here in closed form.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::corrugation::{LoopFamily, PatternField, Subsolution};
use crate::exec::Execution;
use crate::grid::{MapSample, SurfaceGrid};
use crate::jets::{Direction, DomainPoint, Jet, Metric};
use crate::pattern::{Pattern, PatternParams};
use crate::surrounding::ShapedLoop;
use crate::{Error, Result, Vec3};

/// `1/(√2 π)`: `𝔖₀` is a subsolution exactly for `|y|` below this value.
pub const SUBSOLUTION_BOUND: f64 = 1.0 / (SQRT_2 * PI);

fn angle(x: f64) -> (f64, f64) {
    (2.0 * PI * x).sin_cos()
}

/// `f₀(x, y)`.
pub fn cone_map(x: f64, y: f64) -> Vec3 {
    let (s, c) = angle(x);
    Vec3::new(y * c, y * s, y) / SQRT_2
}

/// `v₁(x) = (-sin 2πx, cos 2πx, 0)`.
pub fn v1(x: f64) -> Vec3 {
    let (s, c) = angle(x);
    Vec3::new(-s, c, 0.0)
}

/// `∂₁f₀ = √2 π y v₁`.
pub fn d1_f0(x: f64, y: f64) -> Vec3 {
    v1(x) * (SQRT_2 * PI * y)
}

/// `∂₂f₀ = (cos 2πx, sin 2πx, 1)/√2`.
pub fn d2_f0(x: f64) -> Vec3 {
    let (s, c) = angle(x);
    Vec3::new(c, s, 1.0) / SQRT_2
}

/// `n = v₁ ∧ ∂₂f₀ = (cos 2πx, sin 2πx, -1)/√2`.
pub fn cone_normal(x: f64) -> Vec3 {
    let (s, c) = angle(x);
    Vec3::new(c, s, -1.0) / SQRT_2
}

/// `∂₁v₁`.
pub fn d1_v1(x: f64) -> Vec3 {
    let (s, c) = angle(x);
    Vec3::new(c, s, 0.0) * (-2.0 * PI)
}

/// `∂₁n = √2 π v₁`.
pub fn d1_normal(x: f64) -> Vec3 {
    v1(x) * (SQRT_2 * PI)
}

/// `𝔖₀(x, y) = (x, f₀, (v₁, ∂₂f₀))`.
pub fn cone_formal_solution(x: f64, y: f64) -> Jet {
    Jet::from_columns(DomainPoint::new(x, y), cone_map(x, y), v1(x), d2_f0(x))
}

/// `θ(y) = arccos(√2 π y)`.
pub fn cone_theta(y: f64) -> Result<f64> {
    if !(y.abs() < SUBSOLUTION_BOUND) {
        return Err(Error::OutOfSubsolution { y });
    }
    Ok((SQRT_2 * PI * y).acos())
}

/// `θ'(y) = -√2 π / sqrt(1 - 2π² y²)`.
pub fn cone_theta_derivative(y: f64) -> f64 {
    -SQRT_2 * PI / (1.0 - 2.0 * PI * PI * y * y).sqrt()
}

/// `(η, arccos(√2 π y), ½)`.
pub fn cone_pattern_params(y: f64, eta: f64) -> Result<PatternParams> {
    PatternParams::new(eta, cone_theta(y)?, 0.5)
}

/// The cone loop as a pattern placed on the frame `(v₁, n, 0)`.
pub fn cone_shaped_loop(x: f64, y: f64, eta: f64) -> Result<ShapedLoop> {
    let pattern = Pattern::new(cone_pattern_params(y, eta)?);
    Ok(ShapedLoop::new(pattern, v1(x), cone_normal(x), Vec3::zeros()))
}

/// `γ(x, y, t)`.
pub fn cone_loop(x: f64, y: f64, eta: f64, t: f64) -> Result<Vec3> {
    let p = cone_pattern_params(y, eta)?;
    let g = Pattern::new(p).angle(t);
    Ok(v1(x) * (g.cos() + eta * p.theta().cos()) + cone_normal(x) * g.sin())
}

/// The cone loops as a [`PatternField`] over `f₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeField {
    pub eta: f64,
}

impl PatternField for ConeField {
    fn base_map(&self, x: DomainPoint) -> Vec3 {
        cone_map(x.x1, x.x2)
    }

    fn shaped_loop(&self, x: DomainPoint) -> Result<ShapedLoop> {
        cone_shaped_loop(x.x1, x.x2, self.eta)
    }
}

/// The cone loops as a plain [`LoopFamily`], for the quadrature path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeLoops {
    pub eta: f64,
}

impl LoopFamily for ConeLoops {
    fn eval(&self, x: DomainPoint, t: f64) -> Vec3 {
        cone_loop(x.x1, x.x2, self.eta, t).unwrap_or(Vec3::repeat(f64::NAN))
    }

    fn breakpoints(&self, x: DomainPoint) -> Vec<f64> {
        cone_pattern_params(x.x2, self.eta).map(|p| Pattern::new(p).knot_times().collect()).unwrap_or_default()
    }
}

/// `𝔖₀` as a subsolution of `Is(ε)` over the flat metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeSubsolution {
    pub eps: f64,
}

impl Subsolution for ConeSubsolution {
    fn base_map(&self, x: DomainPoint) -> Vec3 {
        cone_map(x.x1, x.x2)
    }

    fn base_derivative(&self, x: DomainPoint, direction: Direction) -> Vec3 {
        match direction {
            Direction::First => d1_f0(x.x1, x.x2),
            Direction::Second => d2_f0(x.x1),
        }
    }

    fn section(&self, x: DomainPoint) -> Jet {
        cone_formal_solution(x.x1, x.x2)
    }

    fn metric(&self, _: DomainPoint) -> Metric {
        Metric::euclidean()
    }

    fn eps(&self) -> f64 {
        self.eps
    }
}

/// `f₁` and its first-order data at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConePoint {
    pub f0: Vec3,
    pub f1: Vec3,
    /// `∂₁f₁`.
    pub d1: Vec3,
    /// `∂₂f₁`.
    pub d2: Vec3,
    /// `γ(x, y, N x)`.
    pub gamma: Vec3,
}

impl ConePoint {
    /// `(e₁₁, e₁₂, e₂₂)` of `g - f₁*h` for the flat metric.
    pub fn defect(&self) -> (f64, f64, f64) {
        (1.0 - self.d1.norm_squared(), -self.d1.dot(&self.d2), 1.0 - self.d2.norm_squared())
    }

    /// `‖∂₁f₁ ∧ ∂₂f₁‖`.
    pub fn immersion_margin(&self) -> f64 {
        self.d1.cross(&self.d2).norm()
    }
}

/// Closed-form `f₁ = f₀ + Γ(x, y, Nx)/N` and its partial derivatives.
pub fn corrugated_cone(x: f64, y: f64, n: f64, eta: f64) -> Result<ConePoint> {
    let params = cone_pattern_params(y, eta)?;
    let pattern = Pattern::new(params);
    let t = (n * x).rem_euclid(1.0);
    let (v, nrm) = (v1(x), cone_normal(x));

    let g = pattern.angle(t);
    let gamma = v * (g.cos() + eta * params.theta().cos()) + nrm * g.sin();
    let c = pattern.primitive(t);
    let dc = pattern.primitive_dtheta(t);
    let f0 = cone_map(x, y);

    let f1 = f0 + (v * c.re + nrm * c.im) / n;
    let d1 = gamma + (d1_v1(x) * c.re + d1_normal(x) * c.im) / n;
    let d2 = d2_f0(x) + (v * dc.re + nrm * dc.im) * (cone_theta_derivative(y) / n);
    Ok(ConePoint { f0, f1, d1, d2, gamma })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeConfig {
    /// Corrugation number `N`.
    pub n: u32,
    pub eta: f64,
    pub eps: f64,
    /// Columns; `40 N` when unset.
    pub nx: Option<usize>,
    pub ny: usize,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for ConeConfig {
    fn default() -> Self {
        ConeConfig { n: 12, eta: 0.2, eps: 0.5, nx: None, ny: 100, y_min: -0.1, y_max: 0.1 }
    }
}

impl ConeConfig {
    pub fn nx(&self) -> usize {
        self.nx.unwrap_or(40 * self.n as usize)
    }

    pub fn grid(&self) -> Result<SurfaceGrid> {
        SurfaceGrid::new(self.nx(), self.ny, self.y_min, self.y_max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("N must be a positive integer".into()));
        }
        if !(self.eta > 0.0 && self.eta < 0.5) {
            return Err(Error::InvalidConfig(format!("eta must lie in (0, 0.5), got {}", self.eta)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidConfig(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.eta < self.eps) {
            return Err(Error::InvalidConfig(format!("eta ({}) must be smaller than eps ({})", self.eta, self.eps)));
        }
        let nx = self.nx();
        if nx < 8 * self.n as usize {
            return Err(Error::InvalidConfig(format!(
                "grid needs at least 8 columns per corrugation: nx = {nx} < 8·{}",
                self.n
            )));
        }
        for y in [self.y_min, self.y_max] {
            if !(y.abs() < SUBSOLUTION_BOUND) {
                return Err(Error::OutOfSubsolution { y });
            }
        }
        self.grid().map(|_| ())
    }
}

/// Entries of `g - f₁*h` over the grid and the distance from `f₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    #[serde(rename = "N")]
    pub n: u32,
    pub eta: f64,
    pub eps: f64,
    /// `[nx, ny]`.
    pub grid: [usize; 2],
    pub max_e11: f64,
    pub max_e12: f64,
    pub max_e22: f64,
    pub c0_distance: f64,
    pub min_immersion_margin: f64,
}

impl DefectReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Largest entry of the defect, the ε the surface achieves in the
    /// max-entry norm.
    pub fn max_defect(&self) -> f64 {
        self.max_e11.max(self.max_e12).max(self.max_e22)
    }
}

/// All [`ConePoint`]s of the grid, row-major.
pub fn sample_cone(cfg: &ConeConfig, exec: Execution) -> Result<(SurfaceGrid, Vec<ConePoint>)> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let n = f64::from(cfg.n);
    let rows = exec.try_map(grid.rows(), |j| {
        let y = grid.y(j);
        (0..grid.nx).map(|i| corrugated_cone(grid.x(i), y, n, cfg.eta)).collect::<Result<Vec<_>>>()
    })?;
    Ok((grid, rows.into_iter().flatten().collect()))
}

/// Samples `f₁` on the grid of `cfg` and measures its defect.
pub fn build_cone_surface(cfg: &ConeConfig, exec: Execution) -> Result<(MapSample, DefectReport)> {
    let (grid, points) = sample_cone(cfg, exec)?;
    if cfg.y_min < 0.0 {
        log::info!(
            "for y < 0 the loop offset uses the signed η cos θ = η√2πy, not η‖∂₁f₀‖ = η√2π|y|; \
             the latter would move the loop average off ∂₁f₀"
        );
    }

    let mut report = DefectReport {
        n: cfg.n,
        eta: cfg.eta,
        eps: cfg.eps,
        grid: [grid.nx, grid.ny],
        max_e11: 0.0,
        max_e12: 0.0,
        max_e22: 0.0,
        c0_distance: 0.0,
        min_immersion_margin: f64::INFINITY,
    };
    for p in &points {
        let (e11, e12, e22) = p.defect();
        report.max_e11 = report.max_e11.max(e11.abs());
        report.max_e12 = report.max_e12.max(e12.abs());
        report.max_e22 = report.max_e22.max(e22.abs());
        report.c0_distance = report.c0_distance.max((p.f1 - p.f0).norm());
        report.min_immersion_margin = report.min_immersion_margin.min(p.immersion_margin());
    }

    let sample = MapSample {
        grid,
        values: points.iter().map(|p| p.f1).collect(),
        d1: Some(points.iter().map(|p| p.d1).collect()),
        d2: Some(points.iter().map(|p| p.d2).collect()),
    };
    log::debug!("finite-difference check: {:e}", derivative_cross_check(cfg, 100)?);
    Ok((sample, report))
}

/// Sup-norm deviations measured by the corrugation rate laws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deviations {
    /// `sup ‖f₁ - f₀‖`.
    pub c0: f64,
    /// `sup ‖∂₁f₁ - γ(·, N·)‖`.
    pub d1_from_loop: f64,
    /// `sup ‖∂₂f₁ - ∂₂f₀‖`.
    pub d2_from_f0: f64,
}

pub fn cone_deviations(cfg: &ConeConfig, exec: Execution) -> Result<Deviations> {
    let (grid, points) = sample_cone(cfg, exec)?;
    let mut dev = Deviations { c0: 0.0, d1_from_loop: 0.0, d2_from_f0: 0.0 };
    for (k, p) in points.iter().enumerate() {
        let x = grid.x(k % grid.nx);
        dev.c0 = dev.c0.max((p.f1 - p.f0).norm());
        dev.d1_from_loop = dev.d1_from_loop.max((p.d1 - p.gamma).norm());
        dev.d2_from_f0 = dev.d2_from_f0.max((p.d2 - d2_f0(x)).norm());
    }
    Ok(dev)
}

/// Largest gap between the closed-form derivatives and Richardson-extrapolated
/// finite differences of `f₁`, over every `stride`-th grid node. Nodes whose
/// `∂₁` stencil straddles a pattern knot are skipped: `f₁` is only `C¹` there.
pub fn derivative_cross_check(cfg: &ConeConfig, stride: usize) -> Result<f64> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let n = f64::from(cfg.n);
    let f1 = |p: DomainPoint| corrugated_cone(p.x1, p.x2, n, cfg.eta).map(|c| c.f1).unwrap_or(Vec3::repeat(f64::NAN));
    let (hx, hy) = (1e-5 / n, 1e-5);
    let mut worst: f64 = 0.0;
    for k in (0..grid.len()).step_by(stride.max(1)) {
        let (i, j) = (k % grid.nx, k / grid.nx);
        let p = grid.point(i, j);
        // keep the y stencil inside the subsolution domain
        let y = p.x2.clamp(grid.y_min + 2.0 * hy, grid.y_max - 2.0 * hy);
        let p = DomainPoint::new(p.x1, y);
        let exact = corrugated_cone(p.x1, p.x2, n, cfg.eta)?;
        let phase = (n * p.x1).rem_euclid(1.0);
        let reach = n * hx * 1.01;
        let straddles = Pattern::new(cone_pattern_params(p.x2, cfg.eta)?)
            .knot_times()
            .any(|k| (phase - k).abs() < reach || (phase - k + 1.0).abs() < reach || (phase - k - 1.0).abs() < reach);
        let (d1, _) = crate::corrugation::derivative_richardson(f1, p, Direction::First, hx);
        let (d2, _) = crate::corrugation::derivative_richardson(f1, p, Direction::Second, hy);
        if !straddles {
            worst = worst.max((d1 - exact.d1).norm());
        }
        worst = worst.max((d2 - exact.d2).norm());
    }
    Ok(worst)
}

/// `|f₁(0, y) - f₁(1⁻, y)|` maximised over the grid rows.
pub fn seam_mismatch(cfg: &ConeConfig) -> Result<f64> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let n = f64::from(cfg.n);
    let mut worst: f64 = 0.0;
    for j in 0..grid.rows() {
        let y = grid.y(j);
        let a = corrugated_cone(0.0, y, n, cfg.eta)?.f1;
        let b = corrugated_cone(1.0 - 1e-13, y, n, cfg.eta)?.f1;
        worst = worst.max((a - b).norm());
    }
    Ok(worst)
}

/// Which component of `∂₁f₁ - ∂₁f₀` to follow around a row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    /// Along `v₁`.
    Tangent,
    /// Along the cone normal `n`.
    Normal,
}

/// Cyclic sign changes of `⟨∂₁f₁ - ∂₁f₀, e⟩` along row `j` of a sampled
/// surface, zeros skipped.
pub fn row_sign_changes(sample: &MapSample, j: usize, component: Component) -> Option<usize> {
    let d1 = sample.d1.as_ref()?;
    let g = &sample.grid;
    let y = g.y(j);
    let signs: Vec<bool> = (0..g.nx)
        .filter_map(|i| {
            let x = g.x(i);
            let diff = d1[g.index(i, j)] - d1_f0(x, y);
            let axis = match component {
                Component::Tangent => v1(x),
                Component::Normal => cone_normal(x),
            };
            let v = diff.dot(&axis);
            (v != 0.0).then_some(v > 0.0)
        })
        .collect();
    if signs.is_empty() {
        return Some(0);
    }
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let wrap = usize::from(signs[0] != signs[signs.len() - 1]);
    Some(changes + wrap)
}
