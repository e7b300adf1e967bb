//! FIPS 140-2 (Change Notice 1) power-up statistical tests.
//!
//! All four tests look at the first 20000 bits only.

use std::fmt;

use super::BitSequence;
use crate::error::RandomnessError;

pub const BLOCK_BITS: usize = 20_000;

/// Inclusive bounds for the number of ones.
pub const MONOBIT_INTERVAL: (usize, usize) = (9725, 10275);

/// Inclusive bounds on run counts for lengths 1, 2, 3, 4, 5 and 6+.
pub const RUNS_INTERVALS: [(usize, usize); 6] = [
    (2315, 2685),
    (1114, 1386),
    (527, 723),
    (240, 384),
    (103, 209),
    (103, 209),
];

/// A run this long or longer fails the long-run test.
pub const LONG_RUN: usize = 26;

/// Exclusive bounds for the poker statistic.
pub const POKER_INTERVAL: (f64, f64) = (2.16, 46.17);

fn block<'a>(bits: &'a BitSequence, test: &'static str) -> Result<&'a [u8], RandomnessError> {
    if bits.len() < BLOCK_BITS {
        return Err(RandomnessError::TooShort {
            test,
            needed: BLOCK_BITS,
            actual: bits.len(),
        });
    }
    Ok(&bits.as_slice()[..BLOCK_BITS])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonobitResult {
    pub ones: usize,
    pub pass: bool,
}

pub fn fips_monobit(bits: &BitSequence) -> Result<MonobitResult, RandomnessError> {
    let ones = block(bits, "monobit")?.iter().map(|&b| b as usize).sum();
    let (lo, hi) = MONOBIT_INTERVAL;
    Ok(MonobitResult {
        ones,
        pass: (lo..=hi).contains(&ones),
    })
}

/// Maximal runs in `block`, as `(value, length)` pairs.
fn runs(block: &[u8]) -> impl Iterator<Item = (u8, usize)> + '_ {
    let mut pos = 0;
    std::iter::from_fn(move || {
        let &v = block.get(pos)?;
        let len = block[pos..].iter().take_while(|&&b| b == v).count();
        pos += len;
        Some((v, len))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunsResult {
    /// Runs of zeros with length 1..=5 and 6+.
    pub zeros: [usize; 6],
    /// Runs of ones, same buckets.
    pub ones: [usize; 6],
    pub pass: [bool; 6],
}

impl RunsResult {
    pub fn all_pass(&self) -> bool {
        self.pass.iter().all(|&p| p)
    }
}

pub fn fips_runs(bits: &BitSequence) -> Result<RunsResult, RandomnessError> {
    let block = block(bits, "runs")?;
    let mut counts = [[0usize; 6]; 2];
    for (v, len) in runs(block) {
        counts[v as usize][len.min(6) - 1] += 1;
    }
    let mut pass = [false; 6];
    for (r, (lo, hi)) in RUNS_INTERVALS.iter().enumerate() {
        pass[r] = (lo..=hi).contains(&&counts[0][r]) && (lo..=hi).contains(&&counts[1][r]);
    }
    Ok(RunsResult {
        zeros: counts[0],
        ones: counts[1],
        pass,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LongRunResult {
    pub longest: usize,
    /// Number of zero-runs and one-runs of length 26 or more.
    pub long_zero_runs: usize,
    pub long_one_runs: usize,
    pub pass: bool,
}

pub fn fips_long_run(bits: &BitSequence) -> Result<LongRunResult, RandomnessError> {
    let block = block(bits, "long run")?;
    let mut longest = 0;
    let mut long = [0usize; 2];
    for (v, len) in runs(block) {
        longest = longest.max(len);
        if len >= LONG_RUN {
            long[v as usize] += 1;
        }
    }
    Ok(LongRunResult {
        longest,
        long_zero_runs: long[0],
        long_one_runs: long[1],
        pass: longest < LONG_RUN,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PokerResult {
    pub statistic: f64,
    pub pass: bool,
}

/// `X = 16/5000 * sum(n_i^2) - 5000` over the 5000 nibbles of the block.
pub fn fips_poker(bits: &BitSequence) -> Result<PokerResult, RandomnessError> {
    let block = block(bits, "poker")?;
    let mut counts = [0u64; 16];
    for nibble in block.chunks_exact(4) {
        let v = nibble.iter().fold(0usize, |acc, &b| acc << 1 | b as usize);
        counts[v] += 1;
    }
    Ok(poker_from_counts(&counts))
}

pub(crate) fn poker_from_counts(counts: &[u64; 16]) -> PokerResult {
    let segments: u64 = counts.iter().sum();
    let sum_sq: u64 = counts.iter().map(|c| c * c).sum();
    let statistic = 16.0 / segments as f64 * sum_sq as f64 - segments as f64;
    let (lo, hi) = POKER_INTERVAL;
    PokerResult {
        statistic,
        pass: statistic > lo && statistic < hi,
    }
}

/// All four tests on one sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FipsReport {
    pub monobit: MonobitResult,
    pub runs: RunsResult,
    pub long_run: LongRunResult,
    pub poker: PokerResult,
}

impl FipsReport {
    pub fn pass(&self) -> bool {
        self.monobit.pass && self.runs.all_pass() && self.long_run.pass && self.poker.pass
    }
}

pub fn fips_battery(bits: &BitSequence) -> Result<FipsReport, RandomnessError> {
    Ok(FipsReport {
        monobit: fips_monobit(bits)?,
        runs: fips_runs(bits)?,
        long_run: fips_long_run(bits)?,
        poker: fips_poker(bits)?,
    })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

impl fmt::Display for FipsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = MONOBIT_INTERVAL;
        writeln!(
            f,
            "test=monobit statistic={} interval=[{lo},{hi}] verdict={}",
            self.monobit.ones,
            verdict(self.monobit.pass)
        )?;
        for (r, &(lo, hi)) in RUNS_INTERVALS.iter().enumerate() {
            let label = if r == 5 {
                "6+".to_string()
            } else {
                (r + 1).to_string()
            };
            writeln!(
                f,
                "test=runs r={label} statistic={},{} interval=[{lo},{hi}] verdict={}",
                self.runs.zeros[r],
                self.runs.ones[r],
                verdict(self.runs.pass[r])
            )?;
        }
        writeln!(
            f,
            "test=long_run r>={LONG_RUN} statistic={},{} longest={} interval=[0,0] verdict={}",
            self.long_run.long_zero_runs,
            self.long_run.long_one_runs,
            self.long_run.longest,
            verdict(self.long_run.pass)
        )?;
        let (lo, hi) = POKER_INTERVAL;
        writeln!(
            f,
            "test=poker statistic={:.2} interval=({lo},{hi}) verdict={}",
            self.poker.statistic,
            verdict(self.poker.pass)
        )
    }
}
