use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate flow map for star {star}: Jacobian {jacobian:.3e} at node {node} (minimum {j_min:.1e})")]
    DegenerateMap {
        star: usize,
        node: usize,
        jacobian: f64,
        j_min: f64,
    },

    #[error("near contact between stars {star} and {other}: separation {separation:.3e} below {d_safe}")]
    NearContact {
        star: usize,
        other: usize,
        separation: f64,
        d_safe: f64,
    },

    #[error("strong separation condition failed: {value:.6} < {required:.6}")]
    SeparationFailed { value: f64, required: f64 },

    #[error("initial domains overlap: minimum center distance {min_distance:.6} <= 2")]
    Overlap { min_distance: f64 },

    #[error("close encounter between particles {i} and {j} at t = {t:.6}")]
    CloseEncounter { i: usize, j: usize, t: f64 },

    #[error("linear algebra failure: {0}")]
    Singular(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
