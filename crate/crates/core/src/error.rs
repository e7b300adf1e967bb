use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    #[error("{name} = {value} is outside [-1, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("quantizer modulus must be positive")]
    ZeroModulus,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KeyError {
    #[error("key component {name} = {value} is outside [-1, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("key component {name} has {digits} fractional digits, at most 14 are allowed")]
    TooPrecise { name: &'static str, digits: usize },
    #[error("cannot parse {0:?} as a decimal key component")]
    Syntax(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CipherError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },
    #[error("pixel buffer holds {actual} bytes, {width}x{height} needs {expected}")]
    BufferSize {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("shape mismatch: expected {expected_width}x{expected_height}, got {width}x{height}")]
    Shape {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },
    #[error("invalid keystreams: {0}")]
    Keystreams(String),
    #[error("keystream dump: {0}")]
    Dump(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error(transparent)]
    Cipher(#[from] CipherError),
    #[error("attack model violated in {stage}: {line} {index} has {zeros} zero pixel(s) in the differential, expected exactly one")]
    Marker {
        stage: &'static str,
        line: &'static str,
        index: usize,
        zeros: usize,
    },
    #[error("attack model violated in {stage}: differential value {value} at ({i}, {j}) is neither 0 nor 255")]
    UnexpectedValue {
        stage: &'static str,
        i: usize,
        j: usize,
        value: u8,
    },
    #[error("oracle failed: {0}")]
    Oracle(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error(transparent)]
    Cipher(#[from] CipherError),
    #[error("bit position (pixel {pixel}, bit {bit}) is outside a {pixels}-pixel image")]
    BitPosition {
        pixel: usize,
        bit: u8,
        pixels: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RandomnessError {
    #[error("{test} needs at least {needed} bits, sequence has {actual}")]
    TooShort {
        test: &'static str,
        needed: usize,
        actual: usize,
    },
    #[error("invalid bit string: {0}")]
    Parse(String),
}
