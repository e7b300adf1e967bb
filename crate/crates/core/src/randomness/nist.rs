//! The nine SP 800-22 tests used to characterise the compound keystream.
//!
//! Each test function takes explicit parameters and only checks that the
//! input is long enough for the computation to be defined. The battery
//! runs them with fixed parameters and additionally enforces the
//! recommended minimum input lengths.

use std::fmt;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use super::BitSequence;
use crate::error::RandomnessError;

pub const SIGNIFICANCE: f64 = 0.01;

/// Block length of the block frequency test.
pub const BLOCK_FREQUENCY_M: usize = 100;
/// The aperiodic template searched by the non-overlapping template test.
pub const TEMPLATE: [u8; 9] = [1, 0, 1, 0, 0, 1, 1, 0, 0];
/// Number of blocks in the non-overlapping template test.
pub const TEMPLATE_BLOCKS: usize = 8;
pub const SERIAL_M: usize = 16;
pub const APEN_M: usize = 10;

/// Upper regularized incomplete gamma function `Q(a, x)`.
pub fn igamc(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        gamma_ur(a, x)
    }
}

/// Standard normal CDF.
fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NistTest {
    Frequency,
    BlockFrequency,
    CumulativeSumsForward,
    Runs,
    Rank,
    NonOverlappingTemplate,
    Serial,
    ApproximateEntropy,
    Fft,
}

impl NistTest {
    pub const ALL: [NistTest; 9] = [
        NistTest::Frequency,
        NistTest::BlockFrequency,
        NistTest::CumulativeSumsForward,
        NistTest::Runs,
        NistTest::Rank,
        NistTest::NonOverlappingTemplate,
        NistTest::Serial,
        NistTest::ApproximateEntropy,
        NistTest::Fft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NistTest::Frequency => "Frequency",
            NistTest::BlockFrequency => "BlockFrequency",
            NistTest::CumulativeSumsForward => "CumulativeSums-Forward",
            NistTest::Runs => "Runs",
            NistTest::Rank => "Rank",
            NistTest::NonOverlappingTemplate => "NonOverlappingTemplate",
            NistTest::Serial => "Serial",
            NistTest::ApproximateEntropy => "ApproximateEntropy",
            NistTest::Fft => "FFT",
        }
    }

    pub fn parameters(self) -> &'static str {
        match self {
            NistTest::BlockFrequency => "m=100",
            NistTest::NonOverlappingTemplate => "m=9,B=101001100",
            NistTest::Serial => "m=16",
            NistTest::ApproximateEntropy => "m=10",
            _ => "-",
        }
    }

    /// Recommended minimum input length in bits.
    pub fn min_len(self) -> usize {
        match self {
            NistTest::Frequency
            | NistTest::BlockFrequency
            | NistTest::CumulativeSumsForward
            | NistTest::Runs => 100,
            NistTest::Rank => 38 * RANK_ROWS * RANK_COLS,
            // at least one full template per block and m < log2(M)
            NistTest::NonOverlappingTemplate => TEMPLATE_BLOCKS * (1 << 10),
            // m < floor(log2 n) - 2
            NistTest::Serial => 1 << (SERIAL_M + 3),
            // m < floor(log2 n) - 5
            NistTest::ApproximateEntropy => 1 << (APEN_M + 6),
            NistTest::Fft => 1000,
        }
    }

    pub fn run(self, bits: &BitSequence) -> Result<TestOutcome, RandomnessError> {
        if bits.len() < self.min_len() {
            return Err(RandomnessError::TooShort {
                test: self.name(),
                needed: self.min_len(),
                actual: bits.len(),
            });
        }
        match self {
            NistTest::Frequency => frequency(bits),
            NistTest::BlockFrequency => block_frequency(bits, BLOCK_FREQUENCY_M),
            NistTest::CumulativeSumsForward => cumulative_sums_forward(bits),
            NistTest::Runs => runs(bits),
            NistTest::Rank => rank(bits),
            NistTest::NonOverlappingTemplate => {
                non_overlapping_template(bits, &TEMPLATE, TEMPLATE_BLOCKS)
            }
            NistTest::Serial => serial(bits, SERIAL_M),
            NistTest::ApproximateEntropy => approximate_entropy(bits, APEN_M),
            NistTest::Fft => dft(bits),
        }
    }
}

impl fmt::Display for NistTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of one test on one sequence. A test passes when every p-value is
/// at least [`SIGNIFICANCE`].
#[derive(Clone, Debug, PartialEq)]
pub struct TestOutcome {
    pub statistics: Vec<(&'static str, f64)>,
    pub p_values: Vec<f64>,
}

impl TestOutcome {
    fn new(statistics: Vec<(&'static str, f64)>, p_values: Vec<f64>) -> Self {
        Self {
            statistics,
            p_values,
        }
    }

    pub fn p_value(&self) -> f64 {
        self.p_values[0]
    }

    pub fn passed(&self) -> bool {
        self.p_values.iter().all(|&p| p >= SIGNIFICANCE)
    }
}

fn require(test: &'static str, needed: usize, bits: &BitSequence) -> Result<(), RandomnessError> {
    if bits.len() < needed {
        Err(RandomnessError::TooShort {
            test,
            needed,
            actual: bits.len(),
        })
    } else {
        Ok(())
    }
}

pub fn frequency(bits: &BitSequence) -> Result<TestOutcome, RandomnessError> {
    require("Frequency", 1, bits)?;
    let n = bits.len() as f64;
    let sum = 2.0 * bits.ones() as f64 - n;
    let s_obs = sum.abs() / n.sqrt();
    let p = erfc(s_obs / std::f64::consts::SQRT_2);
    Ok(TestOutcome::new(vec![("s_obs", s_obs)], vec![p]))
}

pub fn block_frequency(bits: &BitSequence, m: usize) -> Result<TestOutcome, RandomnessError> {
    require("BlockFrequency", m.max(1), bits)?;
    let blocks = bits.len() / m;
    let chi2: f64 = bits
        .as_slice()
        .chunks_exact(m)
        .map(|block| {
            let pi = block.iter().map(|&b| b as f64).sum::<f64>() / m as f64;
            (pi - 0.5) * (pi - 0.5)
        })
        .sum::<f64>()
        * 4.0
        * m as f64;
    let p = igamc(blocks as f64 / 2.0, chi2 / 2.0);
    Ok(TestOutcome::new(vec![("chi2", chi2)], vec![p]))
}

pub fn cumulative_sums_forward(bits: &BitSequence) -> Result<TestOutcome, RandomnessError> {
    require("CumulativeSums", 1, bits)?;
    let n = bits.len() as f64;
    let mut s = 0i64;
    let mut z = 0i64;
    for &b in bits.as_slice() {
        s += if b == 1 { 1 } else { -1 };
        z = z.max(s.abs());
    }
    let len = bits.len() as i64;
    let sqrt_n = n.sqrt();
    let zf = z as f64;

    // summation bounds use truncating integer division
    let finish = (len / z - 1) / 4;
    let mut sum1 = 0.0;
    for k in ((-len / z + 1) / 4)..=finish {
        let k = k as f64;
        sum1 += phi((4.0 * k + 1.0) * zf / sqrt_n) - phi((4.0 * k - 1.0) * zf / sqrt_n);
    }
    let mut sum2 = 0.0;
    for k in ((-len / z - 3) / 4)..=finish {
        let k = k as f64;
        sum2 += phi((4.0 * k + 3.0) * zf / sqrt_n) - phi((4.0 * k + 1.0) * zf / sqrt_n);
    }
    let p = 1.0 - sum1 + sum2;
    Ok(TestOutcome::new(vec![("z", zf)], vec![p]))
}

pub fn runs(bits: &BitSequence) -> Result<TestOutcome, RandomnessError> {
    require("Runs", 2, bits)?;
    let n = bits.len() as f64;
    let pi = bits.ones() as f64 / n;
    let tau = 2.0 / n.sqrt();
    if (pi - 0.5).abs() >= tau {
        // frequency prerequisite failed; the test is not applicable
        return Ok(TestOutcome::new(vec![("pi", pi)], vec![0.0]));
    }
    let s = bits.as_slice();
    let v_obs = 1 + s.windows(2).filter(|w| w[0] != w[1]).count();
    let v = v_obs as f64;
    let p =
        erfc((v - 2.0 * n * pi * (1.0 - pi)).abs() / (2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi)));
    Ok(TestOutcome::new(vec![("pi", pi), ("v_obs", v)], vec![p]))
}

const RANK_ROWS: usize = 32;
const RANK_COLS: usize = 32;

/// Probability that a random `rows x cols` binary matrix has rank `r`.
fn rank_probability(r: usize, rows: usize, cols: usize) -> f64 {
    let exponent = (r * (rows + cols - r)) as f64 - (rows * cols) as f64;
    let mut product = 1.0;
    for i in 0..r {
        let i = i as f64;
        let num = (1.0 - 2f64.powf(i - rows as f64)) * (1.0 - 2f64.powf(i - cols as f64));
        let den = 1.0 - 2f64.powf(i - r as f64);
        product *= num / den;
    }
    2f64.powf(exponent) * product
}

/// Rank over GF(2) of a matrix given as row bitmasks.
pub fn gf2_rank(mut rows: Vec<u64>, cols: usize) -> usize {
    let mut rank = 0;
    for col in (0..cols).rev() {
        let bit = 1u64 << col;
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row & bit != 0 {
                *row ^= p;
            }
        }
        rank += 1;
    }
    rank
}

pub fn rank(bits: &BitSequence) -> Result<TestOutcome, RandomnessError> {
    let per_matrix = RANK_ROWS * RANK_COLS;
    require("Rank", per_matrix, bits)?;
    let matrices = bits.len() / per_matrix;
    let (mut full, mut full_minus_one) = (0usize, 0usize);
    for m in bits.as_slice().chunks_exact(per_matrix) {
        let rows: Vec<u64> = m
            .chunks_exact(RANK_COLS)
            .map(|row| row.iter().fold(0u64, |acc, &b| acc << 1 | b as u64))
            .collect();
        match gf2_rank(rows, RANK_COLS) {
            r if r == RANK_ROWS => full += 1,
            r if r == RANK_ROWS - 1 => full_minus_one += 1,
            _ => {}
        }
    }
    let rest = matrices - full - full_minus_one;
    let p_full = rank_probability(RANK_ROWS, RANK_ROWS, RANK_COLS);
    let p_minus = rank_probability(RANK_ROWS - 1, RANK_ROWS, RANK_COLS);
    let p_rest = 1.0 - p_full - p_minus;
    let n = matrices as f64;
    let term = |observed: usize, p: f64| {
        let e = p * n;
        (observed as f64 - e).powi(2) / e
    };
    let chi2 = term(full, p_full) + term(full_minus_one, p_minus) + term(rest, p_rest);
    let p = (-chi2 / 2.0).exp();
    Ok(TestOutcome::new(
        vec![
            ("chi2", chi2),
            ("full_rank", full as f64),
            ("rank_minus_one", full_minus_one as f64),
        ],
        vec![p],
    ))
}

pub fn non_overlapping_template(
    bits: &BitSequence,
    template: &[u8],
    blocks: usize,
) -> Result<TestOutcome, RandomnessError> {
    let m = template.len();
    require("NonOverlappingTemplate", blocks * m, bits)?;
    let block_len = bits.len() / blocks;
    let mu = (block_len - m + 1) as f64 / 2f64.powi(m as i32);
    let var = block_len as f64
        * (1.0 / 2f64.powi(m as i32) - (2.0 * m as f64 - 1.0) / 2f64.powi(2 * m as i32));
    let mut chi2 = 0.0;
    for block in bits.as_slice().chunks_exact(block_len).take(blocks) {
        let mut hits = 0usize;
        let mut pos = 0;
        while pos + m <= block_len {
            if &block[pos..pos + m] == template {
                hits += 1;
                pos += m;
            } else {
                pos += 1;
            }
        }
        chi2 += (hits as f64 - mu).powi(2) / var;
    }
    let p = igamc(blocks as f64 / 2.0, chi2 / 2.0);
    Ok(TestOutcome::new(vec![("chi2", chi2)], vec![p]))
}

/// Frequencies of every overlapping `m`-bit pattern, wrapping around the
/// end of the sequence.
fn pattern_counts(bits: &[u8], m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; 1 << m];
    if m == 0 {
        counts[0] = bits.len() as u64;
        return counts;
    }
    let n = bits.len();
    let mask = (1usize << m) - 1;
    let mut window = 0usize;
    for &b in &bits[..m - 1] {
        window = window << 1 | b as usize;
    }
    for k in 0..n {
        window = (window << 1 | bits[(k + m - 1) % n] as usize) & mask;
        counts[window] += 1;
    }
    counts
}

fn psi_squared(bits: &[u8], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len() as f64;
    let sum: f64 = pattern_counts(bits, m)
        .iter()
        .map(|&c| (c * c) as f64)
        .sum();
    sum * 2f64.powi(m as i32) / n - n
}

pub fn serial(bits: &BitSequence, m: usize) -> Result<TestOutcome, RandomnessError> {
    require("Serial", m.max(3), bits)?;
    let s = bits.as_slice();
    let psi_m = psi_squared(s, m);
    let psi_m1 = psi_squared(s, m - 1);
    let psi_m2 = psi_squared(s, m.saturating_sub(2));
    let del1 = psi_m - psi_m1;
    let del2 = psi_m - 2.0 * psi_m1 + psi_m2;
    let p1 = igamc(2f64.powi(m as i32 - 2), del1 / 2.0);
    let p2 = igamc(2f64.powi(m as i32 - 3), del2 / 2.0);
    Ok(TestOutcome::new(
        vec![("del_psi2", del1), ("del2_psi2", del2)],
        vec![p1, p2],
    ))
}

fn phi_m(bits: &[u8], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len() as f64;
    pattern_counts(bits, m)
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum()
}

pub fn approximate_entropy(bits: &BitSequence, m: usize) -> Result<TestOutcome, RandomnessError> {
    require("ApproximateEntropy", m + 1, bits)?;
    let s = bits.as_slice();
    let n = s.len() as f64;
    let apen = phi_m(s, m) - phi_m(s, m + 1);
    let chi2 = 2.0 * n * (std::f64::consts::LN_2 - apen);
    let p = igamc(2f64.powi(m as i32 - 1), chi2 / 2.0);
    Ok(TestOutcome::new(
        vec![("apen", apen), ("chi2", chi2)],
        vec![p],
    ))
}

/// Spectral test: counts DFT peaks below the 95% threshold.
pub fn dft(bits: &BitSequence) -> Result<TestOutcome, RandomnessError> {
    require("FFT", 2, bits)?;
    let n = bits.len();
    let mut buf: Vec<Complex<f64>> = bits
        .as_slice()
        .iter()
        .map(|&b| Complex::new(if b == 1 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let nf = n as f64;
    let threshold = ((1.0f64 / 0.05).ln() * nf).sqrt();
    let below = buf[..n / 2].iter().filter(|c| c.norm() < threshold).count();
    let expected = 0.95 * nf / 2.0;
    let d = (below as f64 - expected) / (nf * 0.95 * 0.05 / 4.0).sqrt();
    let p = erfc(d.abs() / std::f64::consts::SQRT_2);
    Ok(TestOutcome::new(
        vec![("n1", below as f64), ("d", d)],
        vec![p],
    ))
}

/// All nine tests on one sequence. A failing length check is recorded for
/// that test only.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceResult {
    pub sequence_id: usize,
    pub outcomes: Vec<(NistTest, Result<TestOutcome, RandomnessError>)>,
}

impl SequenceResult {
    pub fn passed(&self, test: NistTest) -> bool {
        self.outcomes
            .iter()
            .any(|(t, o)| *t == test && o.as_ref().is_ok_and(TestOutcome::passed))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NistBatteryReport {
    pub sequences: Vec<SequenceResult>,
}

impl NistBatteryReport {
    pub fn pass_count(&self, test: NistTest) -> usize {
        self.sequences.iter().filter(|s| s.passed(test)).count()
    }

    pub fn pass_counts(&self) -> Vec<(NistTest, usize)> {
        NistTest::ALL
            .iter()
            .map(|&t| (t, self.pass_count(t)))
            .collect()
    }
}

pub fn run_sequence(sequence_id: usize, bits: &BitSequence) -> SequenceResult {
    SequenceResult {
        sequence_id,
        outcomes: NistTest::ALL.iter().map(|&t| (t, t.run(bits))).collect(),
    }
}

/// Runs the battery on every sequence. Sequences are processed in
/// parallel; the report keeps input order.
pub fn nist_battery(sequences: &[BitSequence]) -> NistBatteryReport {
    let sequences = sequences
        .par_iter()
        .enumerate()
        .map(|(id, bits)| run_sequence(id, bits))
        .collect();
    NistBatteryReport { sequences }
}

fn join(values: impl Iterator<Item = String>) -> String {
    values.collect::<Vec<_>>().join(",")
}

impl fmt::Display for NistBatteryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for seq in &self.sequences {
            for (test, outcome) in &seq.outcomes {
                write!(
                    f,
                    "sequence_id={} test={} parameters={} ",
                    seq.sequence_id,
                    test.name(),
                    test.parameters()
                )?;
                match outcome {
                    Ok(o) => writeln!(
                        f,
                        "statistics={} p_values={} verdict={}",
                        join(o.statistics.iter().map(|(k, v)| format!("{k}:{v:.6}"))),
                        join(o.p_values.iter().map(|p| format!("{p:.6}"))),
                        if o.passed() { "PASS" } else { "FAIL" }
                    )?,
                    Err(e) => writeln!(f, "error=\"{e}\" verdict=ERROR")?,
                }
            }
        }
        writeln!(
            f,
            "summary sequences={} alpha={SIGNIFICANCE}",
            self.sequences.len()
        )?;
        for (test, count) in self.pass_counts() {
            writeln!(
                f,
                "summary test={} parameters={} passed={}/{}",
                test.name(),
                test.parameters(),
                count,
                self.sequences.len()
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Worked examples published with the test suite description.
    const EPSILON_100: &str = "11001001000011111101101010100010001000010110100011\
                               00001000110100110001001100011001100010100010111000";

    fn bits(s: &str) -> BitSequence {
        BitSequence::from_ascii(s).unwrap()
    }

    fn close(actual: f64, expected: f64) {
        assert!(
            (actual - expected).abs() < 5e-7,
            "p = {actual}, expected {expected}"
        );
    }

    #[test]
    fn frequency_examples() {
        close(frequency(&bits("1011010101")).unwrap().p_value(), 0.527089);
        close(frequency(&bits(EPSILON_100)).unwrap().p_value(), 0.109599);
    }

    #[test]
    fn block_frequency_examples() {
        close(
            block_frequency(&bits("0110011010"), 3).unwrap().p_value(),
            0.801252,
        );
        close(
            block_frequency(&bits(EPSILON_100), 10).unwrap().p_value(),
            0.706438,
        );
    }

    #[test]
    fn cusum_examples() {
        close(
            cumulative_sums_forward(&bits("1011010111"))
                .unwrap()
                .p_value(),
            0.4116588,
        );
        close(
            cumulative_sums_forward(&bits(EPSILON_100))
                .unwrap()
                .p_value(),
            0.219194,
        );
    }

    #[test]
    fn runs_examples() {
        close(runs(&bits("1001101011")).unwrap().p_value(), 0.147232);
        close(runs(&bits(EPSILON_100)).unwrap().p_value(), 0.500798);
    }

    #[test]
    fn template_example() {
        let r = non_overlapping_template(&bits("10100100101110010110"), &[0, 0, 1], 2).unwrap();
        close(r.statistics[0].1, 2.133333);
        close(r.p_value(), 0.344154);
    }

    #[test]
    fn serial_example() {
        let r = serial(&bits("0011011101"), 3).unwrap();
        close(r.p_values[0], 0.808792);
        close(r.p_values[1], 0.670320);
    }

    #[test]
    fn apen_examples() {
        close(
            approximate_entropy(&bits("0100110101"), 3)
                .unwrap()
                .p_value(),
            0.261961,
        );
        close(
            approximate_entropy(&bits(EPSILON_100), 2)
                .unwrap()
                .p_value(),
            0.235301,
        );
    }

    // Expected values computed independently with numpy.fft; the worked
    // examples printed for this test disagree with their own threshold.
    #[test]
    fn dft_examples() {
        let r = dft(&bits("1001010011")).unwrap();
        assert_eq!(r.statistics[0], ("n1", 5.0));
        close(r.p_value(), 0.468159910);
        let r = dft(&bits(EPSILON_100)).unwrap();
        assert_eq!(r.statistics[0], ("n1", 48.0));
        close(r.p_value(), 0.646355196);
    }

    #[test]
    fn rank_probabilities() {
        assert!((rank_probability(32, 32, 32) - 0.288788).abs() < 1e-6);
        assert!((rank_probability(31, 32, 32) - 0.577576).abs() < 1e-6);
        // 3x3 worked example: ranks 3, 2
        assert!((rank_probability(3, 3, 3) - 0.328125).abs() < 1e-9);
    }

    #[test]
    fn gf2_rank_small() {
        assert_eq!(gf2_rank(vec![0b010, 0b110, 0b001], 3), 3);
        assert_eq!(gf2_rank(vec![0b110, 0b110, 0b001], 3), 2);
        assert_eq!(gf2_rank(vec![0, 0, 0], 3), 0);
        assert_eq!(gf2_rank(vec![u32::MAX as u64; 32], 32), 1);
    }

    #[test]
    fn all_zero_fails_frequency() {
        let z = BitSequence::from_bits(vec![false; 1 << 19]);
        let r = NistTest::Frequency.run(&z).unwrap();
        assert!(r.p_value() < 1e-100);
        assert!(!r.passed());
    }

    #[test]
    fn battery_length_errors_are_per_test() {
        let short = BitSequence::from_bits((0..5000).map(|k| (k * 7 + k / 3) % 2 == 0));
        let report = nist_battery(&[short]);
        let seq = &report.sequences[0];
        assert_eq!(seq.outcomes.len(), 9);
        for (test, outcome) in &seq.outcomes {
            match test {
                NistTest::Rank
                | NistTest::Serial
                | NistTest::ApproximateEntropy
                | NistTest::NonOverlappingTemplate => {
                    assert!(
                        matches!(outcome, Err(RandomnessError::TooShort { .. })),
                        "{test}"
                    )
                }
                _ => assert!(outcome.is_ok(), "{test}"),
            }
        }
        let text = report.to_string();
        assert!(text.contains("sequence_id=0 test=Rank parameters=- error="));
        assert!(text.contains("summary test=Serial parameters=m=16 passed=0/1"));
    }

    #[test]
    fn igamc_large_shape() {
        // Q(a, a) tends to 1/2 for large a
        let q = igamc(16384.0, 16384.0);
        assert!((q - 0.5).abs() < 0.003, "{q}");
        assert_eq!(igamc(3.0, 0.0), 1.0);
    }
}
