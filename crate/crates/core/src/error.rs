use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a precondition (e.g. `a > b` for an interval).
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: requested {requested:e}, achieved {achieved:e}")]
    Quadrature { requested: f64, achieved: f64 },

    /// The Riccati integration produced a non-finite state.
    #[error("riccati blow-up: state became non-finite, last valid time {last_valid}")]
    BlowUp { last_valid: f64 },

    /// Invalid configuration of schedules, grids or instrument specs.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Missing realized fixings or off-grid data requests.
    #[error("missing data: {0}")]
    Data(String),

    /// Drift bootstrap could not bracket or converge on a pillar.
    #[error("calibration failed at pillar {pillar}: {reason}")]
    Calibration { pillar: f64, reason: String },

    /// A request the model does not cover (e.g. futures with roll-over
    /// atoms inside the reference window).
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
