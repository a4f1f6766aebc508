use thiserror::Error;

/// Matrix cell address: (component row, demodulation column).
pub type Cell = (usize, usize);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("scheme has no classical components")]
    EmptyScheme,

    #[error("component {0} has non-positive or non-finite power")]
    NonPositivePower(usize),

    #[error("component {0} lies at or below zero absolute optical frequency")]
    NonPositiveFrequency(usize),

    #[error("detection bands of components {0} and {1} overlap")]
    OverlappingComponents(usize, usize),

    #[error("bandwidth {bandwidth_hz} Hz is not small against the reference frequency {f0_hz} Hz")]
    BandwidthTooLarge { bandwidth_hz: f64, f0_hz: f64 },

    #[error("invalid detection configuration: {0}")]
    InvalidConfig(String),

    #[error("demodulation stage {0} must have a positive, finite frequency and finite phase")]
    InvalidDemod(usize),

    #[error("too many demodulation stages ({0}); at most {max} supported", max = crate::freq_matrix::MAX_DEMODS)]
    TooManyDemods(usize),

    #[error("squeezer {0} has a negative or non-finite squeezing factor or phase")]
    InvalidSqueezer(usize),

    #[error("column index {index} out of range for {columns} columns")]
    IndexOutOfRange { index: usize, columns: usize },

    #[error("matrix entries {0:?} and {1:?} overlap partially")]
    PartialOverlap(Cell, Cell),

    #[error("squeezer reference {ref_offset_hz} Hz is not centred on group frequency {group_hz} Hz")]
    SqueezerNotCentered { ref_offset_hz: f64, group_hz: f64 },

    #[error("squeezer {0} does not coincide with any frequency-matrix entry")]
    UnmatchedSqueezer(usize),

    #[error("squeezers {0} and {1} attach to the same matrix entry")]
    MultipleSqueezers(usize, usize),

    #[error("transfer sets have different reference frequencies or validity bands")]
    MismatchedReference,

    #[error("complex amplitude must be nonzero")]
    ZeroAmplitude,

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("sample rate {sample_rate_hz} Hz aliases entries up to {max_offset_hz} Hz with bandwidth {bandwidth_hz} Hz")]
    AliasedScheme {
        sample_rate_hz: f64,
        max_offset_hz: f64,
        bandwidth_hz: f64,
    },

    #[error("squeezer reference {ref_offset_hz} Hz does not sit on the synthesis grid (spacing {spacing_hz} Hz)")]
    MisalignedSqueezer { ref_offset_hz: f64, spacing_hz: f64 },

    #[error("invalid oracle configuration: {0}")]
    InvalidOracleConfig(String),

    #[error("series of {len} samples is shorter than two segments of {segment_len}")]
    TooShort { len: usize, segment_len: usize },

    #[error("spectra are not on compatible grids: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
