//! The Corrugation Process
//!
//! `f₁(x) = f₀(x) + (1/N) ∫_0^{N x_j} (γ(x, s) - γ̄(x)) ds`
//!
//! in the direction `∂_j`, for a Euclidean target. The integrand is 1-periodic
//! and mean-free in `s`, so the integral only depends on `frac(N x_j)`.
//! [`corrugate_generic`] evaluates it by adaptive quadrature for an arbitrary
//! loop family; [`corrugate_analytic`] uses the exact primitive of the pattern
//! when the loops are pattern-shaped.

use serde::{Deserialize, Serialize};

use crate::jets::{Direction, DomainPoint, Jet, Metric};
use crate::quadrature::{integrate_piecewise, QuadOptions};
use crate::surrounding::{build_loop_with, LoopOptions, ShapedLoop, SurroundingInput};
use crate::{Error, Result, Vec3};

/// A family of loops `t ↦ γ(x, t)`, 1-periodic in `t`.
pub trait LoopFamily: Sync {
    fn eval(&self, x: DomainPoint, t: f64) -> Vec3;

    /// Parameters in `[0, 1]` where `γ(x, ·)` is not smooth. Quadrature splits
    /// there, so features narrower than its initial panels are not missed.
    fn breakpoints(&self, _x: DomainPoint) -> Vec<f64> {
        Vec::new()
    }
}

impl<F> LoopFamily for F
where
    F: Fn(DomainPoint, f64) -> Vec3 + Sync,
{
    fn eval(&self, x: DomainPoint, t: f64) -> Vec3 {
        self(x, t)
    }
}

/// A base map together with pattern-shaped loops at every point: the data
/// needed by the closed-form Corrugation Process.
pub trait PatternField: Sync {
    fn base_map(&self, x: DomainPoint) -> Vec3;
    fn shaped_loop(&self, x: DomainPoint) -> Result<ShapedLoop>;
}

/// Views a [`PatternField`] as a plain loop family. Every evaluation rebuilds
/// the loop at `x`; meant for cross-checks, not for production sweeps.
pub struct ShapedFamily<'a, F: ?Sized>(pub &'a F);

impl<F: PatternField + ?Sized> LoopFamily for ShapedFamily<'_, F> {
    fn eval(&self, x: DomainPoint, t: f64) -> Vec3 {
        self.0.shaped_loop(x).map(|l| l.eval(t)).unwrap_or_else(|_| Vec3::repeat(f64::NAN))
    }

    fn breakpoints(&self, x: DomainPoint) -> Vec<f64> {
        self.0.shaped_loop(x).map(|l| l.knot_times()).unwrap_or_default()
    }
}

/// A formal solution `𝔖 = (f₀, L)` with base-map derivatives, over a domain
/// metric `g`, for the relation `Is(ε)`.
pub trait Subsolution: Sync {
    fn base_map(&self, x: DomainPoint) -> Vec3;
    /// `df₀(∂_j)`.
    fn base_derivative(&self, x: DomainPoint, direction: Direction) -> Vec3;
    fn section(&self, x: DomainPoint) -> Jet;
    fn metric(&self, x: DomainPoint) -> Metric;
    fn eps(&self) -> f64;
}

/// Pattern field obtained from a subsolution through its surrounding loops,
/// `γ(x, ·) = 𝛄(𝔖(x), df₀(∂_j))`.
pub struct SurroundedField<'a, S: ?Sized> {
    pub subsolution: &'a S,
    pub direction: Direction,
    pub options: LoopOptions,
}

impl<'a, S: Subsolution + ?Sized> SurroundedField<'a, S> {
    pub fn new(subsolution: &'a S, direction: Direction, options: LoopOptions) -> Self {
        SurroundedField { subsolution, direction, options }
    }

    pub fn input(&self, x: DomainPoint) -> SurroundingInput {
        let s = self.subsolution;
        SurroundingInput::new(s.section(x), s.base_derivative(x, self.direction), s.metric(x), s.eps(), self.direction)
    }
}

impl<S: Subsolution + ?Sized> PatternField for SurroundedField<'_, S> {
    fn base_map(&self, x: DomainPoint) -> Vec3 {
        self.subsolution.base_map(x)
    }

    fn shaped_loop(&self, x: DomainPoint) -> Result<ShapedLoop> {
        let (_, input) = self.input(x).normalized(1)?;
        Ok(build_loop_with(&input, &self.options)?.shape)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrugationConfig {
    /// Corrugation number `N`.
    pub n: f64,
    pub direction: Direction,
    /// Gauss–Kronrod nodes of the initial uniform partition (generic path).
    pub quadrature_nodes: usize,
}

impl CorrugationConfig {
    pub fn new(n: f64, direction: Direction) -> Result<Self> {
        let cfg = CorrugationConfig { n, direction, quadrature_nodes: 64 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n > 0.0 && self.n.is_finite()) {
            return Err(Error::InvalidConfig(format!("N must be positive, got {}", self.n)));
        }
        if self.quadrature_nodes < 64 {
            return Err(Error::InvalidConfig(format!(
                "quadrature_nodes must be at least 64, got {}",
                self.quadrature_nodes
            )));
        }
        Ok(())
    }

    /// `frac(N x_j)`, the phase of `x` along the corrugations.
    pub fn phase(&self, x: DomainPoint) -> f64 {
        (self.n * x.coord(self.direction)).rem_euclid(1.0)
    }

    fn quad_options(&self) -> QuadOptions {
        QuadOptions {
            abs_tol: 1e-11,
            rel_tol: 0.0,
            max_intervals: 20_000,
            initial_panels: self.quadrature_nodes.div_ceil(15),
        }
    }
}

/// `∫_0^s γ - s γ̄` for a single loop, with `γ̄` itself obtained by quadrature.
pub fn loop_primitive_by_quadrature<F>(gamma: F, s: f64, breakpoints: &[f64], opts: &QuadOptions) -> Result<Vec3>
where
    F: Fn(f64) -> Vec3,
{
    let mean = integrate_piecewise(&gamma, 0.0, 1.0, breakpoints, opts)?.value;
    let partial = integrate_piecewise(&gamma, 0.0, s, breakpoints, opts)?.value;
    Ok(partial - mean * s)
}

/// Corrugation Process by quadrature.
pub fn corrugate_generic<F0, L>(f0: F0, gamma: &L, cfg: &CorrugationConfig, x: DomainPoint) -> Result<Vec3>
where
    F0: Fn(DomainPoint) -> Vec3,
    L: LoopFamily + ?Sized,
{
    cfg.validate()?;
    let s = cfg.phase(x);
    let knots = gamma.breakpoints(x);
    let offset = loop_primitive_by_quadrature(|t| gamma.eval(x, t), s, &knots, &cfg.quad_options())?;
    Ok(f0(x) + offset / cfg.n)
}

/// Corrugation Process through the exact pattern primitive:
/// `f₁ = f₀ + (1/N) (C₁ e₁ + C₂ e₂)` at `t = N x_j`.
pub fn corrugate_analytic<F>(field: &F, cfg: &CorrugationConfig, x: DomainPoint) -> Result<Vec3>
where
    F: PatternField + ?Sized,
{
    cfg.validate()?;
    let lp = field.shaped_loop(x)?;
    Ok(field.base_map(x) + lp.primitive(cfg.phase(x)) / cfg.n)
}

/// Central difference `(f(x + h) - f(x - h)) / 2h` along `direction`.
pub fn derivative_along<F>(f: F, x: DomainPoint, direction: Direction, step: f64) -> Vec3
where
    F: Fn(DomainPoint) -> Vec3,
{
    assert!(step > 0.0, "step must be positive");
    (f(x.shifted(direction, step)) - f(x.shifted(direction, -step))) / (2.0 * step)
}

/// Richardson-extrapolated central difference, `(4 D(h/2) - D(h)) / 3`.
/// Returns the estimate and its distance to the plain `D(h/2)`.
pub fn derivative_richardson<F>(f: F, x: DomainPoint, direction: Direction, step: f64) -> (Vec3, f64)
where
    F: Fn(DomainPoint) -> Vec3,
{
    let coarse = derivative_along(&f, x, direction, step);
    let fine = derivative_along(&f, x, direction, 0.5 * step);
    let extrapolated = (fine * 4.0 - coarse) / 3.0;
    (extrapolated, (extrapolated - fine).norm())
}

/// `L₁ = L₀ + (df₁(u) - L₀(u)) ⊗ dx_j`.
pub fn update_formal_solution(jet: &Jet, df1_u: &Vec3, direction: Direction) -> Jet {
    jet.with_column(direction, *df1_u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{metric_defect, DefectNorm};
    use crate::pattern::{Pattern, PatternParams};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, SQRT_2};

    fn v1(x: f64) -> Vec3 {
        Vec3::new(-(2.0 * PI * x).sin(), (2.0 * PI * x).cos(), 0.0)
    }
    fn d2f0(x: f64) -> Vec3 {
        Vec3::new((2.0 * PI * x).cos(), (2.0 * PI * x).sin(), 1.0) / SQRT_2
    }

    struct Cone {
        eps: f64,
    }

    impl Subsolution for Cone {
        fn base_map(&self, x: DomainPoint) -> Vec3 {
            let a = 2.0 * PI * x.x1;
            Vec3::new(a.cos(), a.sin(), 1.0) * (x.x2 / SQRT_2)
        }
        fn base_derivative(&self, x: DomainPoint, direction: Direction) -> Vec3 {
            match direction {
                Direction::First => v1(x.x1) * (SQRT_2 * PI * x.x2),
                Direction::Second => d2f0(x.x1),
            }
        }
        fn section(&self, x: DomainPoint) -> Jet {
            Jet::from_columns(x, self.base_map(x), v1(x.x1), d2f0(x.x1))
        }
        fn metric(&self, _: DomainPoint) -> Metric {
            Metric::euclidean()
        }
        fn eps(&self) -> f64 {
            self.eps
        }
    }

    #[test]
    fn constant_loop_leaves_f0_unchanged() {
        let cfg = CorrugationConfig::new(7.0, Direction::First).unwrap();
        let f0 = |x: DomainPoint| Vec3::new(x.x1, x.x2, 1.0);
        let gamma = |_: DomainPoint, _: f64| Vec3::new(0.3, -1.0, 2.0);
        let x = DomainPoint::new(0.37, 0.02);
        assert_abs_diff_eq!(corrugate_generic(f0, &gamma, &cfg, x).unwrap(), f0(x), epsilon = 1e-14);
    }

    #[test]
    fn c0_distance_bounded_by_primitive() {
        let sub = Cone { eps: 0.3 };
        let field = SurroundedField::new(&sub, Direction::First, LoopOptions::default());
        let x = DomainPoint::new(0.23, 0.06);
        let lp = field.shaped_loop(x).unwrap();
        let sup = (0..2000).map(|k| lp.primitive(k as f64 / 2000.0).norm()).fold(0.0, f64::max);
        for n in [10.0, 100.0, 1000.0] {
            let cfg = CorrugationConfig::new(n, Direction::First).unwrap();
            let f1 = corrugate_analytic(&field, &cfg, x).unwrap();
            assert!((f1 - sub.base_map(x)).norm() <= sup / n * (1.0 + 1e-6));
        }
    }

    #[test]
    fn generic_matches_analytic() {
        let sub = Cone { eps: 0.3 };
        let field = SurroundedField::new(&sub, Direction::First, LoopOptions::default());
        let cfg = CorrugationConfig::new(6.0, Direction::First).unwrap();
        for (x1, x2) in [(0.1, 0.05), (0.25, -0.05), (0.9, 0.0)] {
            let x = DomainPoint::new(x1, x2);
            let a = corrugate_analytic(&field, &cfg, x).unwrap();
            let g = corrugate_generic(|p| sub.base_map(p), &ShapedFamily(&field), &cfg, x).unwrap();
            assert!((a - g).norm() < 1e-9, "{x:?}: {}", (a - g).norm());
        }
    }

    #[test]
    fn integer_phase_gives_f0() {
        let sub = Cone { eps: 0.3 };
        let field = SurroundedField::new(&sub, Direction::First, LoopOptions::default());
        let cfg = CorrugationConfig::new(8.0, Direction::First).unwrap();
        let x = DomainPoint::new(0.25, 0.07);
        assert_abs_diff_eq!(corrugate_analytic(&field, &cfg, x).unwrap(), sub.base_map(x), epsilon = 1e-15);
    }

    #[test]
    fn second_direction_corrugation() {
        // a loop family that only depends on t, corrugating along x2
        let p = Pattern::new(PatternParams::new(0.2, 1.0, 0.4).unwrap());
        let gamma = |_: DomainPoint, t: f64| {
            let c = p.value(t);
            Vec3::new(c.z.re, c.z.im, c.s)
        };
        let cfg = CorrugationConfig::new(3.0, Direction::Second).unwrap();
        let x = DomainPoint::new(0.9, 0.1);
        let f1 = corrugate_generic(|_| Vec3::zeros(), &gamma, &cfg, x).unwrap();
        let c = p.primitive(0.3);
        assert_abs_diff_eq!(f1, Vec3::new(c.re, c.im, 0.0) / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn config_validation() {
        assert!(CorrugationConfig::new(0.0, Direction::First).is_err());
        assert!(CorrugationConfig::new(-1.0, Direction::First).is_err());
        let mut cfg = CorrugationConfig::new(1.5, Direction::First).unwrap();
        cfg.quadrature_nodes = 63;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn finite_differences() {
        let f = |x: DomainPoint| Vec3::new(2.0 * x.x1 - x.x2, 3.0 * x.x2, 0.5);
        let x = DomainPoint::new(0.3, -0.02);
        let d = derivative_along(f, x, Direction::First, 1e-6);
        assert!((d - Vec3::new(2.0, 0.0, 0.0)).norm() < 1e-9);
        let (d, gap) =
            derivative_richardson(|x: DomainPoint| Vec3::new(x.x2.sin(), 0.0, 0.0), x, Direction::Second, 1e-2);
        assert_abs_diff_eq!(d.x, (-0.02f64).cos(), epsilon = 1e-10);
        assert!(gap < 1e-4);
    }

    #[test]
    fn update_keeps_kernel_column() {
        let sub = Cone { eps: 0.3 };
        let x = DomainPoint::new(0.4, 0.05);
        let jet = sub.section(x);
        assert_eq!(update_formal_solution(&jet, &jet.column(Direction::First), Direction::First), jet);
        let field = SurroundedField::new(&sub, Direction::First, LoopOptions::default());
        let cfg = CorrugationConfig::new(200.0, Direction::First).unwrap();
        let f1 = |p: DomainPoint| corrugate_analytic(&field, &cfg, p).unwrap();
        let d1 = derivative_along(f1, x, Direction::First, 1e-7);
        let updated = update_formal_solution(&jet, &d1, Direction::First);
        assert_eq!(updated.column(Direction::Second), jet.column(Direction::Second));
        let defect = metric_defect(&Metric::euclidean(), &updated.l, DefectNorm::MaxEntry);
        assert!(defect < sub.eps, "defect {defect}");
    }
}
