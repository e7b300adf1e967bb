//! Weak keys, equivalent keys and plaintext sensitivity.
//!
//! The maps have fixed points `f0(1) = 1`, `f1(1) = 1`, `f1(0) = 0`,
//! `f1(-1) = -1`, and points one step away from them (`f0(0) = f0(-1) = 1`,
//! `f1(0.5) = -1`, `f1(-0.5) = 1`). A key whose trajectory reaches any of
//! them freezes one or both maps and degrades the keystreams.

use std::fmt;

use crate::chaos::{compound_step, f0, f1, SecretKey};
use crate::cipher::{self, derive_keystreams, forward_position, Image, Keystreams};
use crate::error::{AnalysisError, CipherError};

/// The weak-key classes known in closed form, each with the keystream
/// shape it forces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeakClass {
    /// `x0 = 1`
    XOne,
    /// `y0 = 1`
    YOne,
    /// `y0 = -1`
    YMinusOne,
    /// `x0 >= 0, y0 = 0`
    NonNegativeXZeroY,
    /// `x0 = 1, y0 = 1`
    XOneYOne,
    /// `x0 = 1, y0 = -1`
    XOneYMinusOne,
    /// `x0 = 1, y0 = 0`
    XOneYZero,
    /// `x0 in {0, -1}, y0 in {-0.5, 1}`
    PreFixedXSaturating,
    /// `x0 = 0, y0 = 0.5`
    XZeroYHalf,
    /// `x0 = 0, y0 = -1`, or `x0 = -1, y0 in {-1, 0.5}`
    PreFixedXSinkingY,
    /// `x0 = 0, y0 = 0`
    XZeroYZero,
    /// `x0 = -1, y0 = 0`
    XMinusOneYZero,
}

impl WeakClass {
    pub const GENERAL: [WeakClass; 4] = [
        WeakClass::XOne,
        WeakClass::YOne,
        WeakClass::YMinusOne,
        WeakClass::NonNegativeXZeroY,
    ];

    pub const EXTREME: [WeakClass; 3] = [
        WeakClass::XOneYOne,
        WeakClass::XOneYMinusOne,
        WeakClass::XOneYZero,
    ];

    pub const DERIVED_EXTREME: [WeakClass; 5] = [
        WeakClass::PreFixedXSaturating,
        WeakClass::XZeroYHalf,
        WeakClass::PreFixedXSinkingY,
        WeakClass::XZeroYZero,
        WeakClass::XMinusOneYZero,
    ];

    pub fn all() -> impl Iterator<Item = WeakClass> {
        Self::GENERAL
            .into_iter()
            .chain(Self::EXTREME)
            .chain(Self::DERIVED_EXTREME)
    }

    pub fn name(self) -> &'static str {
        match self {
            WeakClass::XOne => "x0=1",
            WeakClass::YOne => "y0=1",
            WeakClass::YMinusOne => "y0=-1",
            WeakClass::NonNegativeXZeroY => "x0>=0,y0=0",
            WeakClass::XOneYOne => "x0=1,y0=1",
            WeakClass::XOneYMinusOne => "x0=1,y0=-1",
            WeakClass::XOneYZero => "x0=1,y0=0",
            WeakClass::PreFixedXSaturating => "x0in{0,-1},y0in{-0.5,1}",
            WeakClass::XZeroYHalf => "x0=0,y0=0.5",
            WeakClass::PreFixedXSinkingY => "x0=0,y0=-1|x0=-1,y0in{-1,0.5}",
            WeakClass::XZeroYZero => "x0=0,y0=0",
            WeakClass::XMinusOneYZero => "x0=-1,y0=0",
        }
    }

    pub fn matches(self, key: &SecretKey) -> bool {
        let (x, y) = (key.x0(), key.y0());
        match self {
            WeakClass::XOne => x == 1.0,
            WeakClass::YOne => y == 1.0,
            WeakClass::YMinusOne => y == -1.0,
            WeakClass::NonNegativeXZeroY => x >= 0.0 && y == 0.0,
            WeakClass::XOneYOne => x == 1.0 && y == 1.0,
            WeakClass::XOneYMinusOne => x == 1.0 && y == -1.0,
            WeakClass::XOneYZero => x == 1.0 && y == 0.0,
            WeakClass::PreFixedXSaturating => (x == 0.0 || x == -1.0) && (y == -0.5 || y == 1.0),
            WeakClass::XZeroYHalf => x == 0.0 && y == 0.5,
            WeakClass::PreFixedXSinkingY => {
                (x == 0.0 && y == -1.0) || (x == -1.0 && (y == -1.0 || y == 0.5))
            }
            WeakClass::XZeroYZero => x == 0.0 && y == 0.0,
            WeakClass::XMinusOneYZero => x == -1.0 && y == 0.0,
        }
    }

    /// The keystream shape this class forces. Streams the class says
    /// nothing about are `None`.
    pub fn prediction(self) -> StreamPrediction {
        use S1Pattern::*;
        use ShiftPattern::*;
        let p = |s1, s2, s3| StreamPrediction { s1, s2, s3 };
        match self {
            WeakClass::XOne => p(None, Some(Max), None),
            WeakClass::YOne => p(Some(Constant(255)), None, Some(Max)),
            WeakClass::YMinusOne => p(None, None, Some(Zero)),
            WeakClass::NonNegativeXZeroY => p(Some(Constant(128)), None, Some(Half)),
            WeakClass::XOneYOne => p(Some(Constant(255)), Some(Max), Some(Max)),
            WeakClass::XOneYMinusOne => p(Some(Constant(0)), Some(Max), Some(Zero)),
            WeakClass::XOneYZero => p(Some(Constant(128)), Some(Max), Some(Half)),
            WeakClass::PreFixedXSaturating => p(Some(Constant(255)), Some(Max), Some(Max)),
            WeakClass::XZeroYHalf => p(
                Some(Spike {
                    index: 1,
                    value: 255,
                    rest: 0,
                }),
                Some(Max),
                Some(Zero),
            ),
            WeakClass::PreFixedXSinkingY => p(
                Some(Spike {
                    index: 0,
                    value: 255,
                    rest: 0,
                }),
                Some(Max),
                Some(Zero),
            ),
            WeakClass::XZeroYZero => p(Some(Constant(128)), Some(Max), Some(Half)),
            WeakClass::XMinusOneYZero => p(
                Some(Spike {
                    index: 0,
                    value: 255,
                    rest: 128,
                }),
                Some(Max),
                Some(Half),
            ),
        }
    }
}

/// Predicted shape of `s1`. Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum S1Pattern {
    Constant(u8),
    /// `s1[index] = value`, every other element `rest`.
    Spike {
        index: usize,
        value: u8,
        rest: u8,
    },
}

impl S1Pattern {
    pub fn expected(self, k: usize) -> u8 {
        match self {
            S1Pattern::Constant(v) => v,
            S1Pattern::Spike { index, value, rest } => {
                if k == index {
                    value
                } else {
                    rest
                }
            }
        }
    }
}

/// Predicted constant value of a shift sequence over `0..modulus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftPattern {
    Zero,
    /// `floor(modulus / 2)`, the quantizer's image of 0.
    Half,
    /// `modulus - 1`
    Max,
}

impl ShiftPattern {
    pub fn expected(self, modulus: usize) -> usize {
        match self {
            ShiftPattern::Zero => 0,
            ShiftPattern::Half => modulus / 2,
            ShiftPattern::Max => modulus - 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamPrediction {
    pub s1: Option<S1Pattern>,
    pub s2: Option<ShiftPattern>,
    pub s3: Option<ShiftPattern>,
}

impl StreamPrediction {
    /// Returns the first element of `ks` that contradicts the prediction.
    pub fn first_violation(&self, ks: &Keystreams) -> Option<(Stream, usize)> {
        if let Some(p) = self.s1 {
            if let Some(k) = (0..ks.s1.len()).find(|&k| ks.s1[k] != p.expected(k)) {
                return Some((Stream::S1, k));
            }
        }
        if let Some(p) = self.s2 {
            let v = p.expected(ks.width());
            if let Some(j) = ks.s2.iter().position(|&s| s != v) {
                return Some((Stream::S2, j));
            }
        }
        if let Some(p) = self.s3 {
            let v = p.expected(ks.height());
            if let Some(i) = ks.s3.iter().position(|&s| s != v) {
                return Some((Stream::S3, i));
            }
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    S1,
    S2,
    S3,
}

impl fmt::Display for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stream::S1 => "s1",
            Stream::S2 => "s2",
            Stream::S3 => "s3",
        })
    }
}

/// A trajectory point that freezes (or is one step from freezing) a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FixedPointCondition {
    /// `x = 1`
    XFixed,
    /// `x in {0, -1}`, one `f0` step from 1
    XPreFixed,
    /// `y in {-1, 0, 1}`
    YFixed,
    /// `y = +/-0.5`, one `f1` step from -1 or 1
    YPreFixed,
    /// `x = -0.5`, the other dyadic fixed point of `f0`
    XHalfFixed,
    /// `x = 0.5`, one `f0` step from -0.5
    XHalfPreFixed,
}

impl FixedPointCondition {
    fn of_x(x: f64) -> Option<Self> {
        if x == 1.0 {
            Some(Self::XFixed)
        } else if x == 0.0 || x == -1.0 {
            Some(Self::XPreFixed)
        } else if x == -0.5 {
            Some(Self::XHalfFixed)
        } else if x == 0.5 {
            Some(Self::XHalfPreFixed)
        } else {
            None
        }
    }

    fn of_y(y: f64) -> Option<Self> {
        if y == 1.0 || y == 0.0 || y == -1.0 {
            Some(Self::YFixed)
        } else if y == 0.5 || y == -0.5 {
            Some(Self::YPreFixed)
        } else {
            None
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::XFixed => "x=1",
            Self::XPreFixed => "x in {0,-1}",
            Self::YFixed => "y in {-1,0,1}",
            Self::YPreFixed => "y=+-0.5",
            Self::XHalfFixed => "x=-0.5",
            Self::XHalfPreFixed => "x=0.5",
        }
    }
}

/// First trajectory step at which a fixed or pre-fixed point was reached.
/// Step 0 is the key itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedPointHit {
    pub condition: FixedPointCondition,
    pub step: usize,
}

/// How degenerate one keystream is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamProfile {
    /// The value if every element is equal.
    pub constant: Option<usize>,
    pub longest_run: usize,
    pub longest_run_value: usize,
}

impl StreamProfile {
    fn of(values: impl IntoIterator<Item = usize>) -> Self {
        let mut it = values.into_iter();
        let Some(first) = it.next() else {
            return Self {
                constant: None,
                longest_run: 0,
                longest_run_value: 0,
            };
        };
        let (mut best, mut best_v) = (1, first);
        let (mut run, mut prev) = (1, first);
        let mut constant = true;
        for v in it {
            if v == prev {
                run += 1;
            } else {
                constant = false;
                run = 1;
                prev = v;
            }
            if run > best {
                best = run;
                best_v = v;
            }
        }
        Self {
            constant: constant.then_some(first),
            longest_run: best,
            longest_run_value: best_v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakKeyReport {
    pub key: SecretKey,
    pub width: usize,
    pub height: usize,
    /// Closed-form classes the key belongs to.
    pub classes: Vec<WeakClass>,
    /// First fixed or pre-fixed point reached within the horizon.
    pub hit: Option<FixedPointHit>,
    pub s1: StreamProfile,
    pub s2: StreamProfile,
    pub s3: StreamProfile,
}

impl WeakKeyReport {
    pub fn is_weak(&self) -> bool {
        !self.classes.is_empty() || self.hit.is_some()
    }
}

impl fmt::Display for WeakKeyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let classes: Vec<_> = self.classes.iter().map(|c| c.name()).collect();
        let konst = |p: &StreamProfile| match p.constant {
            Some(v) => v.to_string(),
            None => format!(
                "none(longest_run={}x{})",
                p.longest_run, p.longest_run_value
            ),
        };
        writeln!(f, "key: {},{}", self.key.x0(), self.key.y0())?;
        writeln!(f, "size: {}x{}", self.width, self.height)?;
        writeln!(
            f,
            "class: {}",
            if classes.is_empty() {
                "none".to_string()
            } else {
                classes.join(";")
            }
        )?;
        match self.hit {
            Some(h) => writeln!(f, "hit_step: {} ({})", h.step, h.condition.name())?,
            None => writeln!(f, "hit_step: none")?,
        }
        writeln!(f, "s1_const: {}", konst(&self.s1))?;
        writeln!(f, "s2_const: {}", konst(&self.s2))?;
        writeln!(f, "s3_const: {}", konst(&self.s3))?;
        writeln!(f, "weak: {}", self.is_weak())
    }
}

/// Default trajectory horizon: one full keystream derivation.
pub fn default_horizon(width: usize, height: usize) -> usize {
    width * height + width + height
}

/// Classifies `key` and profiles the keystreams it produces for a
/// `width x height` image. The trajectory is followed for `horizon` steps:
/// the compound steps first, then the extra `f0` and `f1` iterations used
/// for the shifts. Horizons beyond one derivation keep iterating both maps
/// in the compound fashion.
pub fn detect_weak_key(
    key: &SecretKey,
    width: usize,
    height: usize,
    horizon: usize,
) -> Result<WeakKeyReport, CipherError> {
    let ks = derive_keystreams(key, width, height)?;
    let classes = WeakClass::all().filter(|c| c.matches(key)).collect();
    let hit = trajectory_hit(key, width, height, horizon);
    Ok(WeakKeyReport {
        key: *key,
        width,
        height,
        classes,
        hit,
        s1: StreamProfile::of(ks.s1.iter().map(|&b| b as usize)),
        s2: StreamProfile::of(ks.s2.iter().copied()),
        s3: StreamProfile::of(ks.s3.iter().copied()),
    })
}

fn trajectory_hit(
    key: &SecretKey,
    width: usize,
    height: usize,
    horizon: usize,
) -> Option<FixedPointHit> {
    let check = |x: f64, y: f64, step: usize| {
        FixedPointCondition::of_x(x)
            .or_else(|| FixedPointCondition::of_y(y))
            .map(|condition| FixedPointHit { condition, step })
    };
    let mut state = key.initial_state();
    if let Some(h) = check(state.x, state.y, 0) {
        return Some(h);
    }
    let compound = width * height;
    let mut step = 0;
    while step < horizon.min(compound) {
        state = compound_step(state).0;
        step += 1;
        if let Some(h) = check(state.x, state.y, step) {
            return Some(h);
        }
    }
    let (mut x, mut y) = (state.x, state.y);
    for _ in 0..height {
        if step >= horizon {
            return None;
        }
        x = f0(x);
        step += 1;
        if let Some(condition) = FixedPointCondition::of_x(x) {
            return Some(FixedPointHit { condition, step });
        }
    }
    for _ in 0..width {
        if step >= horizon {
            return None;
        }
        y = f1(y);
        step += 1;
        if let Some(condition) = FixedPointCondition::of_y(y) {
            return Some(FixedPointHit { condition, step });
        }
    }
    while step < horizon {
        state = compound_step(state).0;
        step += 1;
        if let Some(h) = check(state.x, state.y, step) {
            return Some(h);
        }
    }
    None
}

/// Outcome of comparing the keystreams of two keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Equivalence {
    pub equivalent: bool,
    /// First differing element, in `s1`, `s2`, `s3` order.
    pub first_difference: Option<(Stream, usize)>,
}

impl fmt::Display for Equivalence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "equivalent: {}", self.equivalent)?;
        match self.first_difference {
            Some((s, k)) => writeln!(f, "first_diff_index: {s}[{k}]"),
            None => writeln!(f, "first_diff_index: none"),
        }
    }
}

/// Two keys are reported equivalent when their keystreams are identical,
/// which makes their ciphertexts identical for every plaintext.
pub fn check_equivalent_keys(
    a: &SecretKey,
    b: &SecretKey,
    width: usize,
    height: usize,
) -> Result<Equivalence, CipherError> {
    let ka = derive_keystreams(a, width, height)?;
    let kb = derive_keystreams(b, width, height)?;
    let first = |s: Stream, x: &[usize], y: &[usize]| {
        x.iter().zip(y).position(|(p, q)| p != q).map(|k| (s, k))
    };
    let first_difference = ka
        .s1
        .iter()
        .zip(&kb.s1)
        .position(|(p, q)| p != q)
        .map(|k| (Stream::S1, k))
        .or_else(|| first(Stream::S2, &ka.s2, &kb.s2))
        .or_else(|| first(Stream::S3, &ka.s3, &kb.s3));
    Ok(Equivalence {
        equivalent: first_difference.is_none(),
        first_difference,
    })
}

/// A single plaintext bit: pixel index in raster order and bit index
/// within the byte (0 = least significant).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BitPosition {
    pub pixel: usize,
    pub bit: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SensitivityReport {
    pub flipped: BitPosition,
    /// Every ciphertext bit that differs between the two encryptions.
    pub differing: Vec<BitPosition>,
    pub hamming: usize,
}

impl fmt::Display for SensitivityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "flipped: pixel={} bit={}",
            self.flipped.pixel, self.flipped.bit
        )?;
        for d in &self.differing {
            writeln!(f, "differing: pixel={} bit={}", d.pixel, d.bit)?;
        }
        writeln!(f, "hamming: {}", self.hamming)
    }
}

/// Encrypts `plain` and a copy with one bit flipped under the same key and
/// reports which ciphertext bits differ.
pub fn measure_sensitivity(
    key: &SecretKey,
    plain: &Image,
    bit: BitPosition,
) -> Result<SensitivityReport, AnalysisError> {
    let ks = derive_keystreams(key, plain.width(), plain.height())?;
    measure_sensitivity_with(&ks, plain, bit)
}

pub fn measure_sensitivity_with(
    ks: &Keystreams,
    plain: &Image,
    bit: BitPosition,
) -> Result<SensitivityReport, AnalysisError> {
    if bit.pixel >= plain.len() || bit.bit > 7 {
        return Err(AnalysisError::BitPosition {
            pixel: bit.pixel,
            bit: bit.bit,
            pixels: plain.len(),
        });
    }
    let mut flipped = plain.clone();
    flipped.pixels_mut()[bit.pixel] ^= 1 << bit.bit;
    let c0 = cipher::encrypt(plain, ks)?;
    let c1 = cipher::encrypt(&flipped, ks)?;
    let differing: Vec<BitPosition> = c0
        .pixels()
        .iter()
        .zip(c1.pixels())
        .enumerate()
        .flat_map(|(pixel, (a, b))| {
            let d = a ^ b;
            (0..8u8)
                .filter(move |k| d >> k & 1 == 1)
                .map(move |k| BitPosition { pixel, bit: k })
        })
        .collect();
    Ok(SensitivityReport {
        flipped: bit,
        hamming: differing.len(),
        differing,
    })
}

/// Raster index of the ciphertext pixel that plaintext pixel `pixel` is
/// moved to.
pub fn permuted_pixel(ks: &Keystreams, pixel: usize) -> usize {
    let (i, j) = (pixel % ks.width(), pixel / ks.width());
    let (ic, jc) = forward_position(ks, i, j);
    jc * ks.width() + ic
}
