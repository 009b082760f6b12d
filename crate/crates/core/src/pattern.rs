//! The loop pattern `c(η, θ, β, t) = (exp(i g(t)) + η cos θ, 1)`.
//!
//! `g` is the continuous piecewise-linear angular function that climbs from 0
//! to 2π on `[0, ½]` with plateaus at `θ` and `2π - θ`, and comes back down
//! symmetrically on `[½, 1]`. Every ramp has slope `±4π/η`, so the ramps
//! sweep the full circle uniformly and contribute nothing to the average. The
//! plateaus last `β - η/2` (at `θ`) and `1 - β - η/2` (at `2π - θ`) in total,
//! which together with the `η cos θ` offset puts the average at
//! `β e^{iθ} + (1 - β) e^{-iθ}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const TAU: f64 = 2.0 * PI;

/// Point `(η, θ, β)` of the parameter space
/// `A = {η ∈ (0, ½), θ ∈ [0, π], β ∈ [η, 1 - η]}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternParams {
    eta: f64,
    theta: f64,
    beta: f64,
}

impl PatternParams {
    pub fn new(eta: f64, theta: f64, beta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 0.5) {
            return Err(Error::InvalidParams(format!("η = {eta} not in (0, ½)")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParams(format!("θ = {theta} not in [0, π]")));
        }
        if !(beta >= eta && beta <= 1.0 - eta) {
            return Err(Error::InvalidParams(format!("β = {beta} not in [η, 1 - η] = [{eta}, {}]", 1.0 - eta)));
        }
        Ok(PatternParams { eta, theta, beta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `β' = β - η/2`, the total time spent on the plateau at `θ`.
    pub fn beta_shifted(&self) -> f64 {
        self.beta - 0.5 * self.eta
    }
}

/// Which part of the angular function a segment belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentKind {
    Ramp,
    /// `g = θ`.
    LowPlateau,
    /// `g = 2π - θ`.
    HighPlateau,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    start: f64,
    g_start: f64,
    slope: f64,
    kind: SegmentKind,
    // ∫_0^start exp(i g)
    integral_before: Complex64,
    // time spent on each plateau before `start`
    low_before: f64,
    high_before: f64,
}

impl Segment {
    fn angle(&self, t: f64) -> f64 {
        match self.kind {
            SegmentKind::Ramp => self.g_start + self.slope * (t - self.start),
            _ => self.g_start,
        }
    }

    // ∫_start^t exp(i g)
    fn partial_integral(&self, t: f64) -> Complex64 {
        let dt = t - self.start;
        let start = Complex64::cis(self.g_start);
        match self.kind {
            SegmentKind::Ramp => (Complex64::cis(self.angle(t)) - start) / Complex64::new(0.0, self.slope),
            _ => start * dt,
        }
    }
}

/// Knots `(t, g(t))` of the angular function over one period `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AngularBreakpoints {
    pub knots: Vec<(f64, f64)>,
}

/// Value of the pattern: `z` in the plane, `s` the constant third component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatternValue {
    pub z: Complex64,
    pub s: f64,
}

/// A pattern with its segment table precomputed.
#[derive(Clone, Debug)]
pub struct Pattern {
    params: PatternParams,
    segments: Vec<Segment>,
    average: Complex64,
}

impl Pattern {
    pub fn new(params: PatternParams) -> Self {
        let PatternParams { eta, theta, .. } = params;
        let bp = params.beta_shifted();
        let slope = 4.0 * PI / eta;

        // knot times on [0, ½]
        let t1 = eta * theta / (4.0 * PI);
        let t2 = 0.5 * bp + eta * theta / (4.0 * PI);
        let t3 = 0.5 * bp + eta * (TAU - theta) / (4.0 * PI);
        let t4 = 0.5 - eta * theta / (4.0 * PI);
        let half = [
            (0.0, t1, 0.0, slope, SegmentKind::Ramp),
            (t1, t2, theta, 0.0, SegmentKind::LowPlateau),
            (t2, t3, theta, slope, SegmentKind::Ramp),
            (t3, t4, TAU - theta, 0.0, SegmentKind::HighPlateau),
            (t4, 0.5, TAU - theta, slope, SegmentKind::Ramp),
        ];
        // mirror image on [½, 1]: g(t) = g(1 - t)
        let mirrored = half.iter().rev().map(|&(a, b, g_a, k, kind)| {
            let g_end = match kind {
                SegmentKind::Ramp => g_a + k * (b - a),
                _ => g_a,
            };
            (1.0 - b, 1.0 - a, g_end, -k, kind)
        });

        let mut segments = Vec::with_capacity(10);
        let mut integral = Complex64::new(0.0, 0.0);
        let (mut low, mut high) = (0.0, 0.0);
        for (start, end, g_start, slope, kind) in half.into_iter().chain(mirrored) {
            if end <= start {
                continue;
            }
            let seg =
                Segment { start, g_start, slope, kind, integral_before: integral, low_before: low, high_before: high };
            integral += seg.partial_integral(end);
            match kind {
                SegmentKind::LowPlateau => low += end - start,
                SegmentKind::HighPlateau => high += end - start,
                SegmentKind::Ramp => {}
            }
            segments.push(seg);
        }

        let beta = params.beta;
        let average = Complex64::cis(theta) * beta + Complex64::cis(-theta) * (1.0 - beta);
        Pattern { params, segments, average }
    }

    pub fn params(&self) -> &PatternParams {
        &self.params
    }

    fn segment(&self, t: f64) -> (&Segment, f64) {
        let t = t.rem_euclid(1.0);
        let k = self.segments.partition_point(|s| s.start <= t).saturating_sub(1);
        (&self.segments[k], t)
    }

    pub fn breakpoints(&self) -> AngularBreakpoints {
        let mut knots: Vec<(f64, f64)> = self.segments.iter().map(|s| (s.start, s.g_start)).collect();
        knots.push((1.0, 0.0));
        AngularBreakpoints { knots }
    }

    /// Segment boundaries in `[0, 1]`, including both endpoints.
    pub fn knot_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().map(|s| s.start).chain(std::iter::once(1.0))
    }

    /// `g_{θ,β}(t)`, 1-periodic.
    pub fn angle(&self, t: f64) -> f64 {
        let (seg, t) = self.segment(t);
        seg.angle(t)
    }

    /// Largest slope of the angular function.
    pub fn max_slope(&self) -> f64 {
        4.0 * PI / self.params.eta
    }

    /// `c(t)`.
    pub fn value(&self, t: f64) -> PatternValue {
        let z = Complex64::cis(self.angle(t)) + self.params.eta * self.params.theta.cos();
        PatternValue { z, s: 1.0 }
    }

    /// `c̄ = (β e^{iθ} + (1 - β) e^{-iθ}, 1)`.
    pub fn average(&self) -> PatternValue {
        PatternValue { z: self.average, s: 1.0 }
    }

    /// Planar part of the periodic primitive `C(t) = ∫_0^t c(s) - c̄ ds`.
    ///
    /// The third component of `c` equals its average, so its primitive is 0.
    pub fn primitive(&self, t: f64) -> Complex64 {
        let (seg, t) = self.segment(t);
        let integral = seg.integral_before + seg.partial_integral(t);
        integral + (self.params.eta * self.params.theta.cos() - self.average) * t
    }

    /// `∂C/∂θ` at fixed `(η, β, t)`.
    ///
    /// Ramps do not move with `θ` (each ramp is `4π/η · (t - const)` with a
    /// `θ`-independent constant), so only the plateaus contribute.
    pub fn primitive_dtheta(&self, t: f64) -> Complex64 {
        let (seg, t) = self.segment(t);
        let dt = t - seg.start;
        let (mut low, mut high) = (seg.low_before, seg.high_before);
        match seg.kind {
            SegmentKind::LowPlateau => low += dt,
            SegmentKind::HighPlateau => high += dt,
            SegmentKind::Ramp => {}
        }
        let PatternParams { eta, theta, beta } = self.params;
        let i = Complex64::i();
        let e_plus = Complex64::cis(theta);
        let e_minus = Complex64::cis(-theta);
        let d_offset = -eta * theta.sin() - i * (e_plus * beta - e_minus * (1.0 - beta));
        i * e_plus * low - i * e_minus * high + d_offset * t
    }
}

/// `g_{θ,β}(t)`.
pub fn angular_function(p: &PatternParams, t: f64) -> f64 {
    Pattern::new(*p).angle(t)
}

/// `c(η, θ, β, t)`.
pub fn shape(p: &PatternParams, t: f64) -> PatternValue {
    Pattern::new(*p).value(t)
}

/// `c̄(η, θ, β)`.
pub fn shape_average(p: &PatternParams) -> PatternValue {
    Pattern::new(*p).average()
}

/// Planar component of `C(η, θ, β, t)`.
pub fn shape_primitive(p: &PatternParams, t: f64) -> Complex64 {
    Pattern::new(*p).primitive(t)
}
