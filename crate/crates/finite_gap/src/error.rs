use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("gap ordering violated: {0}")]
    GapOrdering(String),
    #[error("gap endpoint {0} must exceed -1")]
    GapOutOfRange(f64),
    #[error("invalid divisor: {0}")]
    InvalidDivisor(String),
    #[error("lambda_star = {0} violates the requirement lambda_star < -1")]
    InvalidLambdaStar(f64),
    #[error("invalid comb data: {0}")]
    InvalidComb(String),
    #[error("invalid Verblunsky coefficient at index {index}: |v| = {modulus} (need < 1)")]
    InvalidVerblunsky { index: i64, modulus: f64 },
    #[error("z = 1/(lambda - lambda_star) has a pole at lambda = lambda_star")]
    PoleAtLambdaStar,
    #[error("from_z is singular at z = 0")]
    PoleAtZero,
    #[error("no convergence in {what} after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: String,
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("singular period matrix (condition estimate {0:e})")]
    SingularPeriodMatrix(f64),
    #[error("evaluation at a pole ({0})")]
    EvalAtPole(f64),
    #[error("evaluation on the spectrum at {0}")]
    EvalOnSpectrum(f64),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("singular 2x2 resolvent inverse at z = {0}")]
    SingularMatrix(String),
    #[error("spectral measure mass deficit {0:e}")]
    MassDeficit(f64),
    #[error("lost positivity in recurrence at index {index} (a^2 = {value:e})")]
    LostPositivity { index: usize, value: f64 },
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("ambiguous pole assignment in gap {gap} (residues {plus:e}, {minus:e})")]
    AmbiguousPole { gap: usize, plus: f64, minus: f64 },
    #[error("integration step failure: {0}")]
    StepFailure(String),
    #[error("Riccati blow-up at x = {0}")]
    BlowUp(f64),
    #[error("singular finite section at pivot {0}")]
    SingularSection(usize),
    #[error("depth {depth} exceeds the coefficient window ({available} available)")]
    DepthExceedsWindow { depth: usize, available: usize },
    #[error("periodic comb solver failure: {0}")]
    SolverFailure(String),
}

impl Error {
    /// True for errors caused by invalid input data rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::GapOrdering(_)
                | Error::GapOutOfRange(_)
                | Error::InvalidDivisor(_)
                | Error::InvalidLambdaStar(_)
                | Error::InvalidComb(_)
                | Error::InvalidVerblunsky { .. }
                | Error::PoleAtLambdaStar
                | Error::PoleAtZero
                | Error::WindowMismatch(_)
                | Error::DepthExceedsWindow { .. }
        )
    }
}
