//! Surrounding loops for the ε-isometric relation in codimension one.
//!
//! Given a jet `σ = (x, y, L)` in `Is(ε)` and a target average `w` in the
//! convex hull of the slice `Is(ε)(σ, dx_j, ∂_j)`, the loop
//! `γ(t) = c₁(t) e₁ + c₂(t) e₂ + e₃` is the pattern `c(η, θ, β, ·)` placed in
//! the plane `P_u(w)` through the frame `(e₁, e₂, e₃)`. It averages to `w`,
//! stays in the annulus `A(r̃(1-η), r̃(1+η)) ⊂ A(r_min, r_max)` and is joined
//! to `L(u)` by an explicit base-point homotopy.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::jets::{slice_geometry, Direction, Jet, Metric, SliceGeometry};
use crate::pattern::{Pattern, PatternParams};
use crate::{Error, Result, Vec3};

/// Below this value of `sin θ` the disk inversion treats `w` as lying on the
/// real axis and picks `β = ½`.
pub const AXIS_TOL: f64 = 1e-12;

/// Tolerance on `‖proj_P L(u) - proj_P w‖`, relative to `1 + ‖w‖`.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Identification of the complex plane with `P_u(w)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisOrder {
    /// `1 ↦ ν`, `i ↦ e_t`: the real axis is the surface normal.
    #[default]
    NormalTangent,
    /// `1 ↦ e_t`, `i ↦ ν`: the real axis is the tangential direction. This is
    /// the convention of the explicit cone loop.
    TangentNormal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurroundingInput {
    pub jet: Jet,
    pub w: Vec3,
    pub metric: Metric,
    pub eps: f64,
    pub direction: Direction,
}

impl SurroundingInput {
    pub fn new(jet: Jet, w: Vec3, metric: Metric, eps: f64, direction: Direction) -> Self {
        SurroundingInput { jet, w, metric, eps, direction }
    }

    pub fn geometry(&self) -> Result<SliceGeometry> {
        slice_geometry(&self.jet, &self.metric, self.eps, &self.w, self.direction)
    }

    /// `L(u)`.
    pub fn lu(&self) -> Vec3 {
        self.jet.column(self.direction)
    }

    /// The same input with `σ` replaced by the endpoint of the normalising
    /// homotopy.
    pub fn normalized(&self, samples: usize) -> Result<(Normalization, SurroundingInput)> {
        let norm = normalize_w(&self.jet, &self.w, self.direction, samples)?;
        let input = SurroundingInput { jet: norm.jet, ..*self };
        Ok((norm, input))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopOptions {
    pub axes: AxisOrder,
    /// Fixed `η`; when `None` it is chosen from the distances `d₁`, `d₂`.
    pub eta: Option<f64>,
    /// Samples per leg of the sampled homotopies.
    pub samples: usize,
}

impl Default for LoopOptions {
    fn default() -> Self {
        LoopOptions { axes: AxisOrder::NormalTangent, eta: None, samples: 64 }
    }
}

/// Sampled homotopy `σ_t` making `proj_P L(u)` equal to `proj_P w`.
///
/// Only `L(u)` moves; the paths record the successive values `v_t = L_t(u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    pub original: Jet,
    pub direction: Direction,
    /// Pre-homotopy `ṽ_t` lengthening `L(u)` to `‖w‖`; empty when not needed.
    pub pre_path: Vec<Vec3>,
    /// Main homotopy `v_t`, of constant norm `‖V₀‖`.
    pub main_path: Vec<Vec3>,
    /// `‖V₀‖`.
    pub v0_norm: f64,
    /// Endpoint `σ₁`.
    pub jet: Jet,
}

impl Normalization {
    /// The sampled jets `σ_t`, pre-homotopy first.
    pub fn jets(&self) -> Vec<Jet> {
        self.pre_path.iter().chain(&self.main_path).map(|v| self.original.with_column(self.direction, *v)).collect()
    }
}

fn unit_steps(samples: usize) -> impl Iterator<Item = f64> {
    let n = samples.max(1);
    (0..=n).map(move |k| k as f64 / n as f64)
}

/// Homotopy of `L(u)` inside the slice ending at a jet with
/// `proj_P L₁(u) = proj_P w`, where `P = L(ker dx_j)`.
pub fn normalize_w(jet: &Jet, w: &Vec3, direction: Direction, samples: usize) -> Result<Normalization> {
    let k = jet.column(direction.other());
    if k.norm() == 0.0 {
        return Err(Error::DegeneratePlane("L(ker λ) has rank 0"));
    }
    let p = k.normalize();
    let proj = |v: &Vec3| p * p.dot(v);

    let v0 = jet.column(direction);
    let pv0 = proj(&v0);
    let perp0 = v0 - pv0;
    let perp0_norm = perp0.norm();
    if perp0_norm == 0.0 {
        return Err(Error::DegeneratePlane("L(u) lies in L(ker λ)"));
    }

    let w_norm = w.norm();
    let mut pre_path = Vec::new();
    let big_v0 = if v0.norm() < w_norm {
        let target = (w_norm * w_norm - pv0.norm_squared()).max(0.0).sqrt() / perp0_norm;
        pre_path.extend(unit_steps(samples).map(|t| pv0 + perp0 * ((1.0 - t) + t * target)));
        *pre_path.last().expect("non-empty path")
    } else {
        v0
    };

    let v0_norm = big_v0.norm();
    let pbig = proj(&big_v0);
    let perp = big_v0 - pbig;
    let perp_sq = perp.norm_squared();
    let pw = proj(w);
    let main_path: Vec<Vec3> = unit_steps(samples)
        .map(|t| {
            let m = pw * t + pbig * (1.0 - t);
            let phi = ((v0_norm * v0_norm - m.norm_squared()) / perp_sq).max(0.0).sqrt();
            m + perp * phi
        })
        .collect();
    let end = *main_path.last().expect("non-empty path");

    Ok(Normalization { original: *jet, direction, pre_path, main_path, v0_norm, jet: jet.with_column(direction, end) })
}

fn in_plane_radius(v: &Vec3, p_dir: &Vec3) -> f64 {
    (v.norm_squared() - p_dir.dot(v).powi(2)).max(0.0).sqrt()
}

fn check_normalized(input: &SurroundingInput, geo: &SliceGeometry) -> Result<()> {
    let gap = (geo.frame.center - geo.frame.plane_offset).norm();
    if gap > NORMALIZATION_TOL * (1.0 + input.w.norm()) {
        return Err(Error::NotNormalized { gap });
    }
    Ok(())
}

/// `d₁(w) = r_max - ρ_w`: distance from `w` to the boundary of the convex hull
/// of the slice.
fn distance_to_hull_boundary(input: &SurroundingInput, geo: &SliceGeometry) -> Result<f64> {
    let d1 = geo.r_max - geo.frame.plane_radius(&input.w);
    if !(d1 > 0.0) {
        return Err(Error::DegenerateInput(format!("w is not inside the convex hull (d₁ = {d1})")));
    }
    Ok(d1)
}

/// `r̃ = max(ρ_L, ρ_w + d₁/3)` with `ρ` the distance to the axis `e₃ + P`.
pub fn disk_radius(input: &SurroundingInput) -> Result<f64> {
    let geo = input.geometry()?;
    disk_radius_in(input, &geo)
}

fn disk_radius_in(input: &SurroundingInput, geo: &SliceGeometry) -> Result<f64> {
    check_normalized(input, geo)?;
    let p_dir = geo.frame.p_direction();
    let rho_l = in_plane_radius(&input.lu(), &p_dir);
    let rho_w = in_plane_radius(&input.w, &p_dir);
    let d1 = distance_to_hull_boundary(input, geo)?;
    Ok(rho_l.max(rho_w + d1 / 3.0))
}

/// `η = min(d₁(w), d₂(L(u))) / (3 r̃)`, kept strictly below `½`.
pub fn eta_selection(input: &SurroundingInput, r_tilde: f64) -> Result<f64> {
    let geo = input.geometry()?;
    eta_selection_in(input, &geo, r_tilde)
}

fn eta_selection_in(input: &SurroundingInput, geo: &SliceGeometry, r_tilde: f64) -> Result<f64> {
    let d1 = distance_to_hull_boundary(input, geo)?;
    let rho_l = geo.frame.plane_radius(&input.lu());
    let d2 = (rho_l - geo.r_min).abs().min((geo.r_max - rho_l).abs());
    let d = d1.min(d2);
    if !(d > 0.0) || !(r_tilde > 0.0) {
        return Err(Error::DegenerateInput(format!("d₁ = {d1}, d₂ = {d2}, r̃ = {r_tilde}")));
    }
    Ok((d / (3.0 * r_tilde)).min(0.5 * (1.0 - f64::EPSILON)))
}

/// Inverse of `b(θ, β) = β r̃ e^{iθ} + (1 - β) r̃ e^{-iθ}` on the open disk,
/// with `w_plane` relative to the disk center.
pub fn invert_disk_parametrization(w_plane: Complex64, r_tilde: f64) -> (f64, f64) {
    let theta = (w_plane.re / r_tilde).clamp(-1.0, 1.0).acos();
    let s = theta.sin();
    let beta = if s > AXIS_TOL { 0.5 * (1.0 + w_plane.im / (r_tilde * s)) } else { 0.5 };
    (theta, beta)
}

/// `b(θ, β)` relative to the disk center.
pub fn disk_parametrization(theta: f64, beta: f64, r_tilde: f64) -> Complex64 {
    (Complex64::cis(theta) * beta + Complex64::cis(-theta) * (1.0 - beta)) * r_tilde
}

/// A pattern placed in space: `t ↦ Re c(t) e₁ + Im c(t) e₂ + e₃`.
#[derive(Clone, Debug)]
pub struct ShapedLoop {
    pub pattern: Pattern,
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
}

impl ShapedLoop {
    pub fn new(pattern: Pattern, e1: Vec3, e2: Vec3, e3: Vec3) -> Self {
        ShapedLoop { pattern, e1, e2, e3 }
    }

    fn place(&self, z: Complex64, s: f64) -> Vec3 {
        self.e1 * z.re + self.e2 * z.im + self.e3 * s
    }

    pub fn eval(&self, t: f64) -> Vec3 {
        let c = self.pattern.value(t);
        self.place(c.z, c.s)
    }

    pub fn average(&self) -> Vec3 {
        let c = self.pattern.average();
        self.place(c.z, c.s)
    }

    /// Parameters in `[0, 1]` where `γ` has a kink.
    pub fn knot_times(&self) -> Vec<f64> {
        self.pattern.knot_times().collect()
    }

    /// `∫_0^t γ - γ̄`, exact.
    pub fn primitive(&self, t: f64) -> Vec3 {
        self.place(self.pattern.primitive(t), 0.0)
    }
}

/// The loop `γ(σ, w)` together with the data it was built from.
#[derive(Clone, Debug)]
pub struct SurroundingLoop {
    pub shape: ShapedLoop,
    pub r_tilde: f64,
    pub geometry: SliceGeometry,
    pub axes: AxisOrder,
    pub direction: Direction,
}

impl SurroundingLoop {
    pub fn params(&self) -> &PatternParams {
        self.shape.pattern.params()
    }

    pub fn eval(&self, t: f64) -> Vec3 {
        self.shape.eval(t)
    }

    pub fn average(&self) -> Vec3 {
        self.shape.average()
    }

    /// Distance of a point of the plane to the loop axis `e₃ + P`.
    pub fn radius(&self, v: &Vec3) -> f64 {
        self.geometry.frame.plane_radius(v)
    }
}

pub fn build_loop(input: &SurroundingInput) -> Result<SurroundingLoop> {
    build_loop_with(input, &LoopOptions::default())
}

/// Builds `γ(σ, w)` for a normalised input.
pub fn build_loop_with(input: &SurroundingInput, opts: &LoopOptions) -> Result<SurroundingLoop> {
    let geo = input.geometry()?;
    let r_tilde = disk_radius_in(input, &geo)?;
    let f = geo.frame;
    let (a, b) = f.plane_coords(&input.w);
    let w_plane = match opts.axes {
        AxisOrder::NormalTangent => Complex64::new(a, b),
        AxisOrder::TangentNormal => Complex64::new(b, a),
    };
    let (theta, beta) = invert_disk_parametrization(w_plane, r_tilde);
    let eta = match opts.eta {
        Some(eta) => eta,
        // the selected η may exceed the margin β allows in the parameter space
        None => eta_selection_in(input, &geo, r_tilde)?.min(beta).min(1.0 - beta),
    };
    let params = PatternParams::new(eta, theta, beta)?;

    let inner = r_tilde * (1.0 - eta);
    let outer = r_tilde * (1.0 + eta);
    if !(outer < geo.r_max && inner > geo.r_min) {
        return Err(Error::AnnulusViolation { inner, outer, r_min: geo.r_min, r_max: geo.r_max });
    }

    let (e1, e2) = match opts.axes {
        AxisOrder::NormalTangent => (f.e_normal * r_tilde, f.e_tangent * r_tilde),
        AxisOrder::TangentNormal => (f.e_tangent * r_tilde, f.e_normal * r_tilde),
    };
    Ok(SurroundingLoop {
        shape: ShapedLoop::new(Pattern::new(params), e1, e2, f.center),
        r_tilde,
        geometry: geo,
        axes: opts.axes,
        direction: input.direction,
    })
}

/// Sampled path from `γ(0)` to `L(u)` inside the annulus `A(r_min, r_max)`.
///
/// The first leg rotates the unit circle of the pattern from `e₁` to the axis
/// carrying `L(u)`, the second is a straight segment. With
/// [`AxisOrder::TangentNormal`] `L(u)` already lies on the `e₁` axis and the
/// first leg is empty.
pub fn base_point_homotopy(lp: &SurroundingLoop, jet: &Jet, samples: usize) -> Result<Vec<Vec3>> {
    let (eta, theta) = (lp.params().eta(), lp.params().theta());
    let s = &lp.shape;
    let offset = s.e1 * (eta * theta.cos()) + s.e3;
    let sweep = match lp.axes {
        AxisOrder::NormalTangent => FRAC_PI_2,
        AxisOrder::TangentNormal => 0.0,
    };
    let n = samples.max(1);
    let mut path = Vec::with_capacity(2 * n + 2);
    if sweep > 0.0 {
        path.extend(unit_steps(n).map(|u| {
            let a = u * sweep;
            s.e1 * a.cos() + s.e2 * a.sin() + offset
        }));
    } else {
        path.push(s.e1 + offset);
    }
    let start = *path.last().expect("non-empty path");
    let lu = jet.column(lp.direction);
    path.extend(unit_steps(n).skip(1).map(|u| start * (1.0 - u) + lu * u));
    if let Some(last) = path.last_mut() {
        *last = lu;
    }

    let geo = &lp.geometry;
    let tol = 1e-9 * (1.0 + lu.norm());
    for (index, v) in path.iter().enumerate() {
        if !geo.annulus_contains(v, tol) {
            return Err(Error::PathEscapesSlice {
                index,
                radius: geo.frame.plane_radius(v),
                r_min: geo.r_min,
                r_max: geo.r_max,
            });
        }
    }
    Ok(path)
}
