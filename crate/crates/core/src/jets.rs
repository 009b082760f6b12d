//! 1-jets of maps from a two-dimensional domain into Euclidean 3-space, and
//! the slices of the isometric and ε-isometric relations they carry.

use serde::{Deserialize, Serialize};

use crate::{Error, LinearMap, Mat2, Result, Vec2, Vec3};

/// Relative singular-value threshold below which a linear map is treated as
/// rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Coordinate direction `∂_j` of the domain, paired with the submersion
/// `π(x) = x_j` and the covector `λ = dx_j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[default]
    First,
    Second,
}

impl Direction {
    /// One-based index, as in `∂_1`, `∂_2`.
    pub fn from_index(index: usize) -> Option<Self> {
        match index {
            1 => Some(Direction::First),
            2 => Some(Direction::Second),
            _ => None,
        }
    }

    /// Zero-based column index into a [`LinearMap`].
    pub fn column(self) -> usize {
        match self {
            Direction::First => 0,
            Direction::Second => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Direction::First => Direction::Second,
            Direction::Second => Direction::First,
        }
    }

    pub fn unit(self) -> Vec2 {
        match self {
            Direction::First => Vec2::new(1.0, 0.0),
            Direction::Second => Vec2::new(0.0, 1.0),
        }
    }
}

/// Point of the cylinder `ℝ/ℤ × [a, b]`; `x1` is periodic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainPoint {
    pub x1: f64,
    pub x2: f64,
}

impl DomainPoint {
    pub fn new(x1: f64, x2: f64) -> Self {
        DomainPoint { x1, x2 }
    }

    /// Reduces `x1` into `[0, 1)`.
    pub fn normalized(self) -> Self {
        let x1 = self.x1.rem_euclid(1.0);
        // rem_euclid can round up to exactly 1.0 for tiny negative inputs
        let x1 = if x1 >= 1.0 { 0.0 } else { x1 };
        DomainPoint { x1, x2: self.x2 }
    }

    pub fn coord(&self, direction: Direction) -> f64 {
        match direction {
            Direction::First => self.x1,
            Direction::Second => self.x2,
        }
    }

    /// The point moved by `h` along `direction`.
    pub fn shifted(&self, direction: Direction, h: f64) -> Self {
        match direction {
            Direction::First => DomainPoint::new(self.x1 + h, self.x2),
            Direction::Second => DomainPoint::new(self.x1, self.x2 + h),
        }
    }
}

/// A 1-jet `(x, y, L)`: domain point, image point and candidate differential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub x: DomainPoint,
    pub y: Vec3,
    pub l: LinearMap,
}

impl Jet {
    pub fn new(x: DomainPoint, y: Vec3, l: LinearMap) -> Self {
        Jet { x, y, l }
    }

    pub fn from_columns(x: DomainPoint, y: Vec3, d1: Vec3, d2: Vec3) -> Self {
        Jet { x, y, l: LinearMap::from_columns(&[d1, d2]) }
    }

    /// `L(∂_j)`.
    pub fn column(&self, direction: Direction) -> Vec3 {
        self.l.column(direction.column()).into_owned()
    }

    /// The jet with linear part `L + (v - L(u)) ⊗ λ` for `u = ∂_j`, `λ = dx_j`:
    /// it agrees with `L` on `ker λ` and sends `u` to `v`.
    pub fn with_column(&self, direction: Direction, v: Vec3) -> Jet {
        let mut l = self.l;
        l.set_column(direction.column(), &v);
        Jet { l, ..*self }
    }

    /// Applies a linear map of the target (typically a rotation) to `y` and `L`.
    pub fn transformed(&self, m: &nalgebra::Matrix3<f64>) -> Jet {
        Jet { x: self.x, y: m * self.y, l: m * self.l }
    }
}

/// Riemannian metric of the domain at a point: a symmetric positive-definite
/// 2×2 matrix. The target metric is always the Euclidean one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metric(Mat2);

impl Metric {
    pub fn new(m: Mat2) -> Result<Self> {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidMetric("non-finite entry"));
        }
        let scale = m.abs().max().max(f64::MIN_POSITIVE);
        if (m[(0, 1)] - m[(1, 0)]).abs() > 1e-12 * scale {
            return Err(Error::InvalidMetric("not symmetric"));
        }
        let (lo, _) = sym_eigenvalues(&m);
        if lo <= 0.0 {
            return Err(Error::InvalidMetric("not positive definite"));
        }
        Ok(Metric(m))
    }

    pub fn euclidean() -> Self {
        Metric(Mat2::identity())
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn inner(&self, a: &Vec2, b: &Vec2) -> f64 {
        a.dot(&(self.0 * b))
    }

    pub fn norm(&self, a: &Vec2) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }
}

/// Eigenvalues `(min, max)` of a symmetric 2×2 matrix.
pub fn sym_eigenvalues(m: &Mat2) -> (f64, f64) {
    let a = m[(0, 0)];
    let d = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    (mean - radius, mean + radius)
}

/// Pullback `L*h = Lᵀ L` of the Euclidean metric: the Gram matrix of the
/// columns of `L`.
pub fn pullback_metric(l: &LinearMap) -> Mat2 {
    l.transpose() * l
}

/// Norm used to measure `g - L*h`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefectNorm {
    /// Largest absolute entry in the coordinates `(x1, x2)`.
    #[default]
    MaxEntry,
    /// Operator norm of the `g`-self-adjoint endomorphism `g⁻¹ (g - L*h)`.
    OperatorWrtG,
}

impl DefectNorm {
    pub fn apply(self, g: &Metric, defect: &Mat2) -> f64 {
        match self {
            DefectNorm::MaxEntry => defect.abs().max(),
            DefectNorm::OperatorWrtG => {
                // g⁻¹A is similar to the symmetric g^{-1/2} A g^{-1/2}, so its
                // eigenvalues are real
                let inv = g.matrix().try_inverse().expect("metric is positive definite");
                let m = inv * defect;
                let tr = m.trace();
                let det = m.determinant();
                let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
                (0.5 * (tr + disc)).abs().max((0.5 * (tr - disc)).abs())
            }
        }
    }
}

/// `‖g - L*h‖` under `norm`.
pub fn metric_defect(g: &Metric, l: &LinearMap, norm: DefectNorm) -> f64 {
    norm.apply(g, &(g.matrix() - pullback_metric(l)))
}

/// Orthonormal frame of the slice plane.
///
/// `P = L(ker λ)` is a line; `e_normal` and `e_tangent` span `P^⊥`, and the
/// affine plane `P_u(w)` is `plane_offset + P^⊥` with `plane_offset = proj_P w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceFrame {
    /// `proj_P L(u)`.
    pub center: Vec3,
    /// Unit normal `ν` of `L(T_x M)`, oriented by `L(∂_1) ∧ L(∂_2)`.
    pub e_normal: Vec3,
    /// Unit direction of `L(u) - proj_P L(u)`.
    pub e_tangent: Vec3,
    pub plane_offset: Vec3,
}

impl SliceFrame {
    /// Unit vector spanning `P`.
    pub fn p_direction(&self) -> Vec3 {
        self.e_normal.cross(&self.e_tangent)
    }

    pub fn proj_p(&self, v: &Vec3) -> Vec3 {
        let p = self.p_direction();
        p * p.dot(v)
    }

    /// Coordinates of the `P^⊥` component of `v - center` in `(e_normal, e_tangent)`.
    pub fn plane_coords(&self, v: &Vec3) -> (f64, f64) {
        let d = v - self.center;
        (d.dot(&self.e_normal), d.dot(&self.e_tangent))
    }

    /// Distance from the axis `center + P` measured inside the plane.
    pub fn plane_radius(&self, v: &Vec3) -> f64 {
        let (a, b) = self.plane_coords(v);
        a.hypot(b)
    }

    /// Distance of `v` from the affine plane `P_u(w)`.
    pub fn plane_gap(&self, v: &Vec3) -> f64 {
        (self.proj_p(v) - self.plane_offset).norm()
    }
}

/// `Is(ε)(σ, λ, u) ∩ P_u(w)`: an annulus `A(r_min, r_max)`, or the disk
/// `D(r_max)` when `r_min = 0`, around the exact slice circle of radius
/// `r_exact`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceGeometry {
    pub frame: SliceFrame,
    pub r_min: f64,
    pub r_max: f64,
    pub r_exact: f64,
}

impl SliceGeometry {
    /// Open-annulus membership of `v`, with `plane_tol` slack on the distance
    /// to the plane `P_u(w)`.
    pub fn annulus_contains(&self, v: &Vec3, plane_tol: f64) -> bool {
        let rho = self.frame.plane_radius(v);
        self.frame.plane_gap(v) <= plane_tol && rho > self.r_min && rho < self.r_max
    }
}

fn largest_singular_value(l: &LinearMap) -> f64 {
    sym_eigenvalues(&pullback_metric(l)).1.max(0.0).sqrt()
}

/// Slice of `Is(ε)` over `σ` in the direction `u = ∂_j`, intersected with the
/// affine plane through `w`.
pub fn slice_geometry(jet: &Jet, g: &Metric, eps: f64, w: &Vec3, direction: Direction) -> Result<SliceGeometry> {
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig(format!("eps must be positive, got {eps}")));
    }
    let smax = largest_singular_value(&jet.l);
    let lu = jet.column(direction);
    let lk = jet.column(direction.other());
    if smax == 0.0 || lk.norm() <= RANK_TOL * smax {
        return Err(Error::DegeneratePlane("L(ker λ) has rank 0"));
    }
    let cross = jet.column(Direction::First).cross(&jet.column(Direction::Second));
    if cross.norm() <= RANK_TOL * smax * smax {
        return Err(Error::DegeneratePlane("L(T_x M) has rank < 2"));
    }
    let e_normal = cross.normalize();
    let p = lk.normalize();
    let center = p * p.dot(&lu);
    let e_tangent = (lu - center).normalize();
    let plane_offset = p * p.dot(w);

    let u = direction.unit();
    let u_norm = g.norm(&u);
    let pw_sq = plane_offset.norm_squared();
    let r_max_sq = (u_norm + eps).powi(2) - pw_sq;
    if r_max_sq <= 0.0 {
        return Err(Error::EmptySlice { r_max_sq });
    }
    let r_min_sq = ((u_norm - eps).max(0.0).powi(2) - pw_sq).max(0.0);

    Ok(SliceGeometry {
        frame: SliceFrame { center, e_normal, e_tangent, plane_offset },
        r_min: r_min_sq.sqrt(),
        r_max: r_max_sq.sqrt(),
        r_exact: subsolution_radius(g, &u, &direction.other().unit()),
    })
}

/// `r = sqrt(‖u‖_g² - ‖proj₀ u‖_g²)` where `proj₀` is the `g`-orthogonal
/// projection onto `ker λ = span(ker_direction)`.
pub fn subsolution_radius(g: &Metric, u: &Vec2, ker_direction: &Vec2) -> f64 {
    let k = ker_direction;
    let proj = k * (g.inner(u, k) / g.inner(k, k));
    (g.inner(u, u) - g.inner(&proj, &proj)).max(0.0).sqrt()
}

/// Whether `df₀(u)` lies in `IntConv Is(ε)(σ, λ, u)`, i.e. in the open disk
/// `D(r_max)` of the plane `P_u(df₀(u))`.
pub fn is_subsolution(jet: &Jet, df0_u: &Vec3, g: &Metric, eps: f64, direction: Direction) -> Result<bool> {
    match slice_geometry(jet, g, eps, df0_u, direction) {
        Ok(geo) => Ok(geo.frame.plane_radius(df0_u) < geo.r_max),
        Err(Error::EmptySlice { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}
