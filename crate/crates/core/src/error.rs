use thiserror::Error;

/// Errors raised when constructing buffers or validating parameters.
///
/// Processing operations themselves do not fail on valid inputs; every
/// fallible path is a constructor or a parameter check.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },

    #[error("{width}x{height} overflows the addressable sample count")]
    DimensionOverflow { width: usize, height: usize },

    #[error("buffer holds {actual} samples, expected {expected}")]
    BufferSize { expected: usize, actual: usize },

    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },

    #[error("plane dimensions disagree: {0}x{1} vs {2}x{3}")]
    PlaneMismatch(usize, usize, usize, usize),

    #[error("sample {index} is {value}, outside [{min}, {max}]")]
    OutOfRange {
        index: usize,
        value: f32,
        min: f32,
        max: f32,
    },

    #[error("invalid {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
}
