use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum MgtError {
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("stability constraint m*tau < 1 violated: m*tau = {mtau}")]
    StabilityViolated { mtau: f64 },

    #[error("invalid radial grid: {0}")]
    InvalidGrid(String),

    #[error("Fourier tail exponent a = {a} too small for L^2 in dimension n = {n} (need a > n/2)")]
    InsufficientDecay { a: f64, n: f64 },

    #[error("leading quartic coefficient is zero")]
    DegenerateLeadingCoefficient,

    #[error("root polishing failed to reach residual tolerance (worst residual {residual:e})")]
    PolishDivergence { residual: f64 },

    #[error(
        "branch matching ambiguous at r = {r}: two pairings within tolerance, refine the grid"
    )]
    BranchAmbiguity { r: f64 },

    #[error("frequency r = {r} lies outside the {zone} zone")]
    OutOfZone { r: f64, zone: &'static str },

    #[error("characteristic roots too close (min gap {gap:e}) for the Vandermonde solve")]
    DegenerateRoots { gap: f64 },

    #[error(
        "oracle step dt = {dt} too large for |lambda|_max = {lambda_max} (need |lambda| dt < 0.5)"
    )]
    StepTooLarge { dt: f64, lambda_max: f64 },

    #[error("norm integrand diverges at the origin (exponent {exponent} <= -1)")]
    DivergentAtOrigin { exponent: f64 },

    #[error(
        "quadrature tail beyond r_max contributes {tail:e} of the total, above tolerance {tol:e}"
    )]
    TruncationWarning { tail: f64, tol: f64 },

    #[error("oscillatory quadrature would need {panels} panels, above the budget {budget}")]
    ResolutionBudgetExceeded { panels: usize, budget: usize },

    #[error("decay fit needs at least {need} samples, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("decay fit requires positive values (found {0})")]
    NonPositiveValues(f64),

    #[error("dimension n = {0} not supported here (need n >= 2)")]
    UnsupportedDimension(f64),

    #[error("pointwise bound evaluated before calibration")]
    UncalibratedConstants,

    #[error("finite-difference stencil leaves t >= 0 (t = {t}, dt = {dt})")]
    StencilOutOfRange { t: f64, dt: f64 },

    #[error("weighted data norm diverges: s0 = {s0} too small for the data family")]
    WeightDivergence { s0: f64 },

    #[error("energy trajectory is missing auxiliary fields")]
    MissingAuxiliaries,

    #[error("dealiasing mask missing on spectral state")]
    AliasingMaskMissing,

    #[error("Picard iteration does not contract (factor {factor} after {iters} iterations)")]
    NoContraction { factor: f64, iters: usize },

    #[error("Duhamel quadrature under-resolved: refinement changed the result by {change:e}")]
    QuadratureUnderResolved { change: f64 },

    #[error("time-step refinement failed: halving dt changed the endpoint by {change:e}")]
    StepRefinementFailed { change: f64 },

    #[error("trajectory does not store the derivatives required by this norm")]
    MissingDerivatives,

    #[error("fit window holds only {got} usable samples, need at least {need}")]
    WindowTooShort { got: usize, need: usize },
}

pub type Result<T> = std::result::Result<T, MgtError>;
