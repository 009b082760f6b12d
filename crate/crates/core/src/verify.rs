//! Seeded property checks over random instances of the cone configuration:
//! loop averages, annulus containment, normalisation invariants, corrugation
//! rates and analytic-versus-quadrature agreement.

use std::f64::consts::PI;

use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{self, cone_deviations, ConeConfig, ConeField};
use crate::corrugation::{corrugate_analytic, corrugate_generic, CorrugationConfig};
use crate::exec::Execution;
use crate::jets::{metric_defect, slice_geometry, DefectNorm, Direction, DomainPoint, Metric, SliceGeometry};
use crate::pattern::{Pattern, PatternParams};
use crate::quadrature::{integrate_piecewise, QuadOptions};
use crate::surrounding::{build_loop_with, normalize_w, AxisOrder, LoopOptions, SurroundingInput};
use crate::Result;

/// Deliberate bugs used to check that the checks can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Inner radius computed from `‖u‖ + ε` instead of `‖u‖ - ε`.
    RminSign,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random `(σ, w)` pairs for the loop checks.
    pub instances: usize,
    /// Points sampled on every loop for the containment check.
    pub loop_samples: usize,
    pub homotopy_instances: usize,
    pub oracle_points: usize,
    /// Corrugation numbers for the rate checks, each twice the previous one.
    pub rate_ns: Vec<u32>,
    pub rate_rows: usize,
    pub fault: Option<Fault>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 42,
            instances: 1000,
            loop_samples: 100,
            homotopy_instances: 500,
            oracle_points: 1000,
            rate_ns: vec![50, 100, 200, 400],
            rate_rows: 10,
            fault: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Measured quantity.
    pub value: f64,
    pub detail: String,
}

impl CheckResult {
    fn below(name: &str, value: f64, threshold: f64) -> Self {
        CheckResult {
            name: name.into(),
            passed: value < threshold,
            value,
            detail: format!("{value:.3e} < {threshold:.1e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifySummary {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A `(σ, w)` pair built around the cone configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Instance {
    pub input: SurroundingInput,
    /// `σ = 𝔖₀(x, y)` and `w = ∂₁f₀` exactly, in the original frame.
    pub pure_cone: bool,
    pub axes: AxisOrder,
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation3<f64> {
    Rotation3::from_euler_angles(
        rng.random_range(-PI..PI),
        rng.random_range(-PI / 2.0..PI / 2.0),
        rng.random_range(-PI..PI),
    )
}

/// Even-indexed instances are pure cone data. Odd ones tilt `L(∂₁)` towards
/// `L(∂₂)`, place `w` anywhere in 95% of the convex hull (so `‖w‖` may exceed
/// `‖L(u)‖`) and rotate the whole target.
pub fn random_instances(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let x = rng.random_range(0.0..1.0);
            let y = rng.random_range(-0.1..0.1);
            let eps = rng.random_range(0.05..0.5);
            let axes = if k % 3 == 2 { AxisOrder::TangentNormal } else { AxisOrder::NormalTangent };
            let jet = cone::cone_formal_solution(x, y);
            if k % 2 == 0 {
                let input = SurroundingInput::new(jet, cone::d1_f0(x, y), Metric::euclidean(), eps, Direction::First);
                return Instance { input, pure_cone: true, axes };
            }
            let tau = rng.random_range(-0.4..0.4) * eps;
            let jet = jet.with_column(Direction::First, cone::v1(x) + cone::d2_f0(x) * tau);
            let c = rng.random_range(-0.3..0.3) * eps;
            let rho = rng.random_range(0.0..0.95) * ((1.0 + eps).powi(2) - c * c).sqrt();
            let phi: f64 = rng.random_range(0.0..2.0 * PI);
            let w = cone::d2_f0(x) * c + (cone::cone_normal(x) * phi.cos() + cone::v1(x) * phi.sin()) * rho;
            let rot = random_rotation(&mut rng).into_inner();
            let input =
                SurroundingInput::new(jet.transformed(&rot), rot * w, Metric::euclidean(), eps, Direction::First);
            Instance { input, pure_cone: false, axes }
        })
        .collect()
}

fn loop_quad_options() -> QuadOptions {
    QuadOptions { abs_tol: 1e-12, rel_tol: 0.0, max_intervals: 20_000, initial_panels: 16 }
}

fn faulty_geometry(geo: &SliceGeometry, input: &SurroundingInput) -> SliceGeometry {
    let u_norm = input.metric.norm(&input.direction.unit());
    let pw_sq = geo.frame.plane_offset.norm_squared();
    let r_min = ((u_norm + input.eps).powi(2) - pw_sq).max(0.0).sqrt();
    SliceGeometry { r_min, ..*geo }
}

/// `max |∫γ - w|` over the instances.
pub fn check_loop_average(instances: &[Instance], exec: Execution) -> Result<CheckResult> {
    let errors = exec.try_map(instances.len(), |k| {
        let inst = &instances[k];
        let (_, input) = inst.input.normalized(1)?;
        let lp = build_loop_with(&input, &LoopOptions { axes: inst.axes, ..LoopOptions::default() })?;
        let avg = integrate_piecewise(|t| lp.eval(t), 0.0, 1.0, &lp.shape.knot_times(), &loop_quad_options())?.value;
        Ok((avg - inst.input.w).norm())
    })?;
    Ok(CheckResult::below("loop_average", errors.into_iter().fold(0.0, f64::max), 1e-8))
}

/// Every loop sample lies in `A(r_min, r_max)` of `P_u(w)`; for pure cone
/// instances the jet `L_v` also satisfies the max-entry `ε` bound.
pub fn check_containment(
    instances: &[Instance],
    samples: usize,
    fault: Option<Fault>,
    exec: Execution,
) -> Result<CheckResult> {
    let counts = exec.try_map(instances.len(), |k| {
        let inst = &instances[k];
        let (_, input) = inst.input.normalized(1)?;
        let lp = build_loop_with(&input, &LoopOptions { axes: inst.axes, ..LoopOptions::default() })?;
        let geo = input.geometry()?;
        let geo = match fault {
            Some(Fault::RminSign) => faulty_geometry(&geo, &input),
            None => geo,
        };
        let tol = 1e-12 * (1.0 + input.w.norm());
        let mut bad = 0usize;
        for s in 0..samples {
            let v = lp.eval((s as f64 + 0.5) / samples as f64);
            let mut ok = geo.annulus_contains(&v, tol);
            if inst.pure_cone {
                let l = input.jet.with_column(input.direction, v).l;
                ok &= metric_defect(&input.metric, &l, DefectNorm::MaxEntry) < input.eps;
            }
            bad += usize::from(!ok);
        }
        Ok(bad)
    })?;
    let bad: usize = counts.iter().sum();
    let total = instances.len() * samples;
    Ok(CheckResult {
        name: "containment".into(),
        passed: bad == 0,
        value: bad as f64,
        detail: format!("{bad} of {total} loop points outside the slice annulus"),
    })
}

/// Norm preservation along the main normalising homotopy and the endpoint
/// projection identity.
pub fn check_homotopy(instances: &[Instance]) -> Result<Vec<CheckResult>> {
    let mut norm_gap: f64 = 0.0;
    let mut proj_gap: f64 = 0.0;
    let mut pre = 0;
    for inst in instances {
        let input = &inst.input;
        let n = normalize_w(&input.jet, &input.w, input.direction, 64)?;
        pre += usize::from(!n.pre_path.is_empty());
        for v in &n.main_path {
            norm_gap = norm_gap.max((v.norm() - n.v0_norm).abs());
        }
        let p = input.jet.column(input.direction.other()).normalize();
        let end = n.jet.column(input.direction);
        proj_gap = proj_gap.max((p * p.dot(&end) - p * p.dot(&input.w)).norm());
    }
    let mut norm = CheckResult::below("homotopy_norm", norm_gap, 1e-10);
    norm.detail += &format!(" ({pre} of {} with pre-homotopy)", instances.len());
    Ok(vec![norm, CheckResult::below("homotopy_projection", proj_gap, 1e-12)])
}

/// Sup-norm deviations for successive `N` and their ratios.
pub fn rate_table(ns: &[u32], eta: f64, rows: usize, exec: Execution) -> Result<Vec<(u32, cone::Deviations)>> {
    ns.iter()
        .map(|&n| {
            let cfg = ConeConfig { n, eta, ny: rows, ..ConeConfig::default() };
            Ok((n, cone_deviations(&cfg, exec)?))
        })
        .collect()
}

fn ratio_check(name: &str, values: &[f64], lo: f64, hi: f64) -> CheckResult {
    let ratios: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
    let passed = !ratios.is_empty() && ratios.iter().all(|r| (lo..=hi).contains(r));
    let worst =
        ratios.iter().copied().fold(0.5, |acc: f64, r| if (r - 0.5).abs() > (acc - 0.5).abs() { r } else { acc });
    CheckResult { name: name.into(), passed, value: worst, detail: format!("ratios {ratios:.4?} in [{lo}, {hi}]") }
}

pub fn check_rates(ns: &[u32], rows: usize, exec: Execution) -> Result<Vec<CheckResult>> {
    let table = rate_table(ns, 0.2, rows, exec)?;
    let c0: Vec<f64> = table.iter().map(|(_, d)| d.c0).collect();
    let d2: Vec<f64> = table.iter().map(|(_, d)| d.d2_from_f0).collect();
    let d1: Vec<f64> = table.iter().map(|(_, d)| d.d1_from_loop).collect();
    Ok(vec![
        ratio_check("rate_c0", &c0, 0.45, 0.55),
        ratio_check("rate_d2", &d2, 0.4, 0.6),
        ratio_check("rate_d1", &d1, 0.4, 0.6),
    ])
}

/// Closed-form versus quadrature Corrugation Process at random cone points.
pub fn oracle_gap(seed: u64, points: usize, exec: Execution) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(f64, f64, f64, f64)> = (0..points)
        .map(|_| {
            (
                rng.random_range(0.0..1.0),
                rng.random_range(-0.1..0.1),
                f64::from(rng.random_range(1u32..=100)),
                rng.random_range(0.05..0.45),
            )
        })
        .collect();
    let gaps = exec.try_map(points, |k| {
        let (x1, x2, n, eta) = cases[k];
        let x = DomainPoint::new(x1, x2);
        let cfg = CorrugationConfig::new(n, Direction::First)?;
        let field = ConeField { eta };
        let analytic = corrugate_analytic(&field, &cfg, x)?;
        let generic = corrugate_generic(|p| cone::cone_map(p.x1, p.x2), &cone::ConeLoops { eta }, &cfg, x)?;
        Ok((analytic - generic).norm())
    })?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// Exact pattern primitive versus a cumulative trapezoid rule on `nodes`
/// intervals, for random parameters with `η ≥ 0.05`.
pub fn primitive_trapezoid_gap(seed: u64, patterns: usize, nodes: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..patterns {
        let eta = rng.random_range(0.05..0.45);
        let theta = rng.random_range(0.0..=PI);
        let beta = rng.random_range(eta..=1.0 - eta);
        let p = Pattern::new(PatternParams::new(eta, theta, beta)?);
        let cbar = p.average().z;
        let h = 1.0 / nodes as f64;
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        let mut prev = p.value(0.0).z - cbar;
        for k in 1..=nodes {
            let t = k as f64 * h;
            let cur = p.value(t).z - cbar;
            acc += (prev + cur) * (0.5 * h);
            prev = cur;
            worst = worst.max((acc - p.primitive(t)).norm());
        }
    }
    Ok(worst)
}

pub fn run_verify(cfg: &VerifyConfig, exec: Execution) -> Result<VerifySummary> {
    let instances = random_instances(cfg.seed, cfg.instances);
    let homotopy = random_instances(cfg.seed.wrapping_add(1), cfg.homotopy_instances);
    let mut checks =
        vec![check_loop_average(&instances, exec)?, check_containment(&instances, cfg.loop_samples, cfg.fault, exec)?];
    checks.extend(check_homotopy(&homotopy)?);
    checks.extend(check_rates(&cfg.rate_ns, cfg.rate_rows, exec)?);
    checks.push(CheckResult::below(
        "oracle_equivalence",
        oracle_gap(cfg.seed.wrapping_add(2), cfg.oracle_points, exec)?,
        1e-6,
    ));
    checks.push(CheckResult::below(
        "primitive_trapezoid",
        primitive_trapezoid_gap(cfg.seed.wrapping_add(3), 4, 100_000)?,
        1e-6,
    ));
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifySummary { seed: cfg.seed, passed, checks })
}

/// The slice annulus a verifier compares loops against, with an optional
/// fault applied.
pub fn checked_geometry(input: &SurroundingInput, fault: Option<Fault>) -> Result<SliceGeometry> {
    let geo = slice_geometry(&input.jet, &input.metric, input.eps, &input.w, input.direction)?;
    Ok(match fault {
        Some(Fault::RminSign) => faulty_geometry(&geo, input),
        None => geo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_seeded() {
        let a = random_instances(5, 20);
        let b = random_instances(5, 20);
        assert_eq!(a, b);
        assert_ne!(a, random_instances(6, 20));
        assert!(a.iter().filter(|i| i.pure_cone).count() == 10);
    }

    #[test]
    fn small_run_passes_and_fault_is_caught() {
        let cfg = VerifyConfig {
            instances: 40,
            loop_samples: 50,
            homotopy_instances: 40,
            oracle_points: 20,
            rate_ns: vec![20, 40],
            rate_rows: 4,
            ..VerifyConfig::default()
        };
        let summary = run_verify(&cfg, Execution::Parallel).unwrap();
        assert!(summary.passed, "{summary:#?}");
        let again = run_verify(&cfg, Execution::Sequential).unwrap();
        assert_eq!(summary.to_json().unwrap(), again.to_json().unwrap());

        let instances = random_instances(cfg.seed, 10);
        let c = check_containment(&instances, 20, Some(Fault::RminSign), Execution::Parallel).unwrap();
        assert!(!c.passed);
        assert_eq!(c.value, 200.0);
    }

    #[test]
    fn homotopy_instances_include_pre_homotopies() {
        let instances = random_instances(1, 200);
        let longer = instances.iter().filter(|i| i.input.w.norm() > i.input.lu().norm()).count();
        assert!(longer > 10, "{longer}");
        let checks = check_homotopy(&instances).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
    }
}
