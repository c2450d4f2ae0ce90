//! Error types shared across the crate.

use thiserror::Error;

/// Structural errors from the jet kernel.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum JetError {
    #[error("jets have different basepoints")]
    BasepointMismatch,
    #[error("jet order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("operation needs order >= {needed}, jet has order {have}")]
    InsufficientOrder { needed: usize, have: usize },
    #[error("map jets carry antiholomorphic coefficients")]
    NotHolomorphic,
    #[error("jet order exceeds the supported maximum {max}")]
    OrderTooLarge { max: usize },
    #[error("coefficient vector has length {got}, expected {expected}")]
    CoefficientCount { expected: usize, got: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),

    // surfaces
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("perturbation violates reality symmetry")]
    NotRealSymmetric,
    #[error("pseudoconvexity guard failed: eps * Hessian bound = {0:.3} >= 0.5")]
    PscGuard(f64),
    #[error("log-torus surface is undefined on the coordinate axes")]
    AxisPoint,
    #[error("point is off the surface: |rho| = {0:.3e}")]
    OffSurface(f64),
    #[error("radial projection did not converge within {0} iterations")]
    ChartNoConvergence(usize),

    // tensor
    #[error("Levi form degenerate or wrongly oriented: J = {0:.6e} <= 0")]
    LeviDegenerate(f64),
    #[error("scan aborted: Levi form degenerate at theta = {theta:?} (J = {j:.6e})")]
    ScanAborted { theta: [f64; 3], j: f64 },

    // locus
    #[error("grid sides must be at least 4")]
    GridTooCoarse,
    #[error("no umbilical zero found from the seed (stopped after {0} steps)")]
    NoZeroFound(usize),
    #[error("locus Jacobian is rank-deficient (possible 2-surface locus)")]
    RankDeficientLocus,
    #[error("point is not umbilical: |Q| = {0:.3e}, tolerance {1:.3e}")]
    NotUmbilical(f64, f64),

    // index
    #[error("curve meets the umbilical locus: min |Q| = {0:.3e} of median {1:.3e}")]
    CurveMeetsLocus(f64, f64),
    #[error("phase unwrapping did not stabilize at {0} samples")]
    SamplingUnstable(usize),
    #[error("local index did not stabilize under radius refinement")]
    UnstableIndex,

    // perturb
    #[error("numerator root lies on the winding circle within tolerance")]
    BoundaryRoot,
    #[error("Laurent function is identically zero at this parameter")]
    DegenerateWinding,
    #[error("companion-matrix winding {0} disagrees with phase-sampled winding {1}")]
    WindingMismatch(i64, i64),

    // io / config
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("TOML parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
