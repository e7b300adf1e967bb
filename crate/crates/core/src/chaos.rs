//! The two Chebyshev-type chaotic maps, the compound generator that
//! alternates between them, and the quantizers that turn samples into
//! keystream integers.
//!
//! All arithmetic is IEEE-754 binary64. Polynomials are evaluated with
//! explicit multiplications in a fixed order and without fused
//! multiply-add so that every keystream is reproducible bit for bit.

use std::fmt;
use std::str::FromStr;

use crate::error::{ChaosError, KeyError};

/// Maximum number of fractional digits accepted when parsing a key value.
pub const KEY_FRACTION_DIGITS: usize = 14;

/// `f0(x) = 8x^4 - 8x^2 + 1` without a domain check.
#[inline]
pub(crate) fn f0(x: f64) -> f64 {
    let x4 = x * x * x * x;
    let x2 = x * x;
    clamp_unit(8.0 * x4 - 8.0 * x2 + 1.0)
}

/// `f1(y) = 4y^3 - 3y` without a domain check.
#[inline]
pub(crate) fn f1(y: f64) -> f64 {
    let y3 = y * y * y;
    clamp_unit(4.0 * y3 - 3.0 * y)
}

// Rounding can push the polynomial one ulp past +/-1 near its extrema.
#[inline]
fn clamp_unit(v: f64) -> f64 {
    v.clamp(-1.0, 1.0)
}

fn check_unit(name: &'static str, value: f64) -> Result<(), ChaosError> {
    if (-1.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ChaosError::OutOfRange { name, value })
    }
}

/// Evaluates `8x^4 - 8x^2 + 1` for `x` in `[-1, 1]`.
pub fn iterate_f0(x: f64) -> Result<f64, ChaosError> {
    check_unit("x", x)?;
    Ok(f0(x))
}

/// Evaluates `4y^3 - 3y` for `y` in `[-1, 1]`.
pub fn iterate_f1(y: f64) -> Result<f64, ChaosError> {
    check_unit("y", y)?;
    Ok(f1(y))
}

/// The single-variable piecewise map: `f0` on the negative half, `f1` on
/// the non-negative half. The cipher never uses it; it exists so the
/// generator can be compared against it.
pub fn eval_compound_f(x: f64) -> Result<f64, ChaosError> {
    check_unit("x", x)?;
    Ok(if x < 0.0 { f0(x) } else { f1(x) })
}

/// Maps a sample in `[-1, 1]` to a byte: `floor((1 + z) / 2 * 256)`, with
/// `z = 1` sent to 255.
pub fn quantize_byte(z: f64) -> Result<u8, ChaosError> {
    check_unit("z", z)?;
    Ok(quantize(z, 256) as u8)
}

/// Maps `x` in `[-1, 1]` to a horizontal shift in `[0, width - 1]`.
pub fn quantize_row_shift(x: f64, width: usize) -> Result<usize, ChaosError> {
    check_unit("x", x)?;
    if width == 0 {
        return Err(ChaosError::ZeroModulus);
    }
    Ok(quantize(x, width))
}

/// Maps `y` in `[-1, 1]` to a vertical shift in `[0, height - 1]`.
pub fn quantize_col_shift(y: f64, height: usize) -> Result<usize, ChaosError> {
    check_unit("y", y)?;
    if height == 0 {
        return Err(ChaosError::ZeroModulus);
    }
    Ok(quantize(y, height))
}

/// `floor((1 + v) / 2 * levels)` capped at `levels - 1`.
///
/// The cap is not only for `v = 1`: for `v = 1 - 2^-53` the sum `1 + v`
/// already rounds to 2.0, so the unclamped formula would give `levels`.
#[inline]
pub(crate) fn quantize(v: f64, levels: usize) -> usize {
    if v >= 1.0 {
        return levels - 1;
    }
    let q = ((1.0 + v) / 2.0 * levels as f64).floor();
    if q <= 0.0 {
        0
    } else {
        (q as usize).min(levels - 1)
    }
}

/// The cipher key: initial states of the two maps.
#[derive(Clone, Copy, PartialEq)]
pub struct SecretKey {
    x0: f64,
    y0: f64,
}

impl SecretKey {
    pub fn new(x0: f64, y0: f64) -> Result<Self, KeyError> {
        for (name, v) in [("x0", x0), ("y0", y0)] {
            if !(-1.0..=1.0).contains(&v) {
                return Err(KeyError::OutOfRange { name, value: v });
            }
        }
        Ok(Self { x0, y0 })
    }

    /// Parses a key from two decimal strings with at most
    /// [`KEY_FRACTION_DIGITS`] fractional digits each.
    pub fn parse(x0: &str, y0: &str) -> Result<Self, KeyError> {
        Self::new(parse_key_value("x0", x0)?, parse_key_value("y0", y0)?)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    /// The generator state before the first step.
    pub fn initial_state(&self) -> ChaosState {
        ChaosState {
            x: self.x0,
            y: self.y0,
            k0: 0,
            k1: 0,
        }
    }
}

// Keys are secrets; keep them out of logs by default.
impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

impl fmt::Display for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x0, self.y0)
    }
}

impl FromStr for SecretKey {
    type Err = KeyError;

    /// Accepts `"x0,y0"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (x, y) = s
            .split_once(',')
            .ok_or_else(|| KeyError::Syntax(s.to_string()))?;
        Self::parse(x.trim(), y.trim())
    }
}

fn parse_key_value(name: &'static str, s: &str) -> Result<f64, KeyError> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    let well_formed = !(int_part.is_empty() && frac_part.is_empty())
        && int_part.bytes().all(|b| b.is_ascii_digit())
        && frac_part.bytes().all(|b| b.is_ascii_digit());
    if !well_formed {
        return Err(KeyError::Syntax(s.to_string()));
    }
    if frac_part.len() > KEY_FRACTION_DIGITS {
        return Err(KeyError::TooPrecise {
            name,
            digits: frac_part.len(),
        });
    }
    s.parse::<f64>()
        .map_err(|_| KeyError::Syntax(s.to_string()))
}

/// Which map produced a compound sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    F0,
    F1,
}

/// State of the compound generator: both map states and how many times
/// each map has been applied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChaosState {
    pub x: f64,
    pub y: f64,
    pub k0: u64,
    pub k1: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompoundSample {
    pub z: f64,
    pub branch: Branch,
}

impl ChaosState {
    pub fn new(x: f64, y: f64) -> Result<Self, ChaosError> {
        check_unit("x", x)?;
        check_unit("y", y)?;
        Ok(Self { x, y, k0: 0, k1: 0 })
    }

    /// Total number of compound steps taken.
    pub fn steps(&self) -> u64 {
        self.k0 + self.k1
    }
}

/// One step of the compound generator: apply `f0` to `x` when `x + y < 0`,
/// otherwise apply `f1` to `y`. A sum of exactly zero takes the `f1` branch.
pub fn compound_step(state: ChaosState) -> (ChaosState, CompoundSample) {
    let mut next = state;
    if state.x + state.y < 0.0 {
        next.x = f0(state.x);
        next.k0 += 1;
        (
            next,
            CompoundSample {
                z: next.x,
                branch: Branch::F0,
            },
        )
    } else {
        next.y = f1(state.y);
        next.k1 += 1;
        (
            next,
            CompoundSample {
                z: next.y,
                branch: Branch::F1,
            },
        )
    }
}

/// Iterator over the compound sample stream.
#[derive(Clone, Debug)]
pub struct CompoundGenerator {
    state: ChaosState,
}

impl CompoundGenerator {
    pub fn new(key: &SecretKey) -> Self {
        Self {
            state: key.initial_state(),
        }
    }

    pub fn from_state(state: ChaosState) -> Self {
        Self { state }
    }

    pub fn state(&self) -> ChaosState {
        self.state
    }
}

impl Iterator for CompoundGenerator {
    type Item = CompoundSample;

    fn next(&mut self) -> Option<CompoundSample> {
        let (state, sample) = compound_step(self.state);
        self.state = state;
        Some(sample)
    }
}

/// Sentinel-free result of comparing the compound stream with the iterated
/// piecewise map.
#[derive(Clone, Debug, PartialEq)]
pub struct Divergence {
    pub compound: Vec<f64>,
    pub piecewise: Vec<f64>,
    /// Zero-based index of the first disagreement, `None` if the streams
    /// agree on all `n` samples.
    pub first_difference: Option<usize>,
}

/// Runs the compound generator and the iterated piecewise map (seeded
/// with `x0` alone) side by side for `n` samples.
pub fn divergence_demo(key: &SecretKey, n: usize) -> Divergence {
    let compound: Vec<f64> = CompoundGenerator::new(key).take(n).map(|s| s.z).collect();
    let mut piecewise = Vec::with_capacity(n);
    let mut w = key.x0();
    for _ in 0..n {
        w = if w < 0.0 { f0(w) } else { f1(w) };
        piecewise.push(w);
    }
    let first_difference = compound
        .iter()
        .zip(&piecewise)
        .position(|(a, b)| a.to_bits() != b.to_bits());
    Divergence {
        compound,
        piecewise,
        first_difference,
    }
}
