//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol · |I|)`. Integrands with kinks
//! (the piecewise-linear angular function) converge by local refinement.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::{Error, Result, Vec3};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Values that can be integrated: closed under addition and real scaling,
/// with a magnitude for error control.
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Integrand for Vec3 {
    fn zero() -> Self {
        Vec3::zeros()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the number of subintervals before giving up.
    pub max_intervals: usize,
    /// Number of uniform panels the refinement starts from.
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-11, rel_tol: 1e-12, max_intervals: 4000, initial_panels: 4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn gk15<T: Integrand, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Panel<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod = kronrod + sum * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + sum * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).magnitude();
    Panel { a, b, value, error }
}

/// `∫_a^b f`. An empty or reversed interval integrates to zero or to the
/// negated integral respectively.
pub fn integrate<T, F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Estimate<T>>
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    if a == b {
        return Ok(Estimate { value: T::zero(), error: 0.0, intervals: 0 });
    }
    if b < a {
        let est = integrate(f, b, a, opts)?;
        return Ok(Estimate { value: est.value * -1.0, ..est });
    }

    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut panels: Vec<Panel<T>> = (0..n0)
        .map(|k| {
            let lo = a + width * k as f64;
            let hi = if k + 1 == n0 { b } else { a + width * (k + 1) as f64 };
            gk15(&f, lo, hi)
        })
        .collect();

    loop {
        let value = panels.iter().fold(T::zero(), |acc, p| acc + p.value);
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let tolerance = opts.abs_tol.max(opts.rel_tol * value.magnitude());
        if error <= tolerance {
            return Ok(Estimate { value, error, intervals: panels.len() });
        }
        if panels.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailure { error, tolerance, intervals: panels.len() });
        }
        let (worst, _) =
            panels.iter().enumerate().max_by(|x, y| x.1.error.total_cmp(&y.1.error)).expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // interval cannot be split further in floating point
            return Err(Error::QuadratureFailure { error, tolerance, intervals: panels.len() + 1 });
        }
        panels.push(gk15(&f, p.a, mid));
        panels.push(gk15(&f, mid, p.b));
    }
}

/// `∫_a^b f`, split at the given interior points (kinks or jumps of `f`).
/// Points outside `(a, b)` are ignored; `a ≤ b` is required.
pub fn integrate_piecewise<T, F>(f: F, a: f64, b: f64, breakpoints: &[f64], opts: &QuadOptions) -> Result<Estimate<T>>
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&p| p > a && p < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = Estimate { value: T::zero(), error: 0.0, intervals: 0 };
    let mut lo = a;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        let est = integrate(&f, lo, hi, opts)?;
        total.value = total.value + est.value;
        total.error += est.error;
        total.intervals += est.intervals;
        lo = hi;
    }
    Ok(total)
}
