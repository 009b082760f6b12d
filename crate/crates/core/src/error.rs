use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// `L(ker λ)` or `L(T_x M)` does not have full rank.
    #[error("degenerate plane: {0}")]
    DegeneratePlane(&'static str),

    #[error("empty slice: r_max² = {r_max_sq} ≤ 0")]
    EmptySlice { r_max_sq: f64 },

    #[error("invalid pattern parameters: {0}")]
    InvalidParams(String),

    #[error("invalid metric: {0}")]
    InvalidMetric(&'static str),

    #[error("target not normalised: |proj_P L(u) - proj_P w| = {gap:e}")]
    NotNormalized { gap: f64 },

    #[error("degenerate surrounding input: {0}")]
    DegenerateInput(String),

    /// The support annulus `A(r̃(1-η), r̃(1+η))` is not inside `A(r_min, r_max)`.
    #[error("loop annulus [{inner}, {outer}] not inside slice annulus ({r_min}, {r_max})")]
    AnnulusViolation { inner: f64, outer: f64, r_min: f64, r_max: f64 },

    #[error("homotopy sample {index} leaves the slice (radius {radius}, allowed ({r_min}, {r_max}))")]
    PathEscapesSlice { index: usize, radius: f64, r_min: f64, r_max: f64 },

    #[error("quadrature did not converge: error {error:e} > tolerance {tolerance:e} after {intervals} intervals")]
    QuadratureFailure { error: f64, tolerance: f64, intervals: usize },

    #[error("|y| = {y} is outside the subsolution bound (√2 π)⁻¹")]
    OutOfSubsolution { y: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
