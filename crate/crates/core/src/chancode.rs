//! Binary linear channel codes mapped to BPSK.
//!
//! Codewords are stored as packed bit columns (`u64` words, bit `t` of a
//! column lives in word `t / 64`). Reed-Muller messages are numbered so that
//! the all-ones generator row is the most significant message bit; the
//! first half of the message space therefore never contains a codeword
//! together with its complement.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

/// Upper limit on stored words (`2^k` codewords times words per codeword).
const MAX_STORED_WORDS: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CodeMeta {
    /// `(m, r)` for Reed-Muller codebooks.
    pub reed_muller: Option<(u32, u32)>,
    /// The columns form a complete linear code (closed under XOR, contains 0).
    pub linear: bool,
}

/// `T x N` binary codebook, one codeword per column.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryCodebook {
    len: usize,
    words: usize,
    data: Vec<u64>,
    meta: CodeMeta,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BinaryCodebook {
    /// Builds a generic (non-linear flagged) codebook from bit columns.
    pub fn from_columns(columns: &[Vec<bool>]) -> Result<Self> {
        let len = columns.first().map_or(0, |c| c.len());
        if len == 0 {
            return Err(Error::InvalidCodebook("codewords must have positive length".into()));
        }
        let words = words_for(len);
        let mut data = vec![0u64; words * columns.len()];
        for (n, col) in columns.iter().enumerate() {
            if col.len() != len {
                return Err(Error::InvalidCodebook(format!(
                    "column {n} has length {}, expected {len}",
                    col.len()
                )));
            }
            for (t, &bit) in col.iter().enumerate() {
                if bit {
                    data[n * words + t / 64] |= 1 << (t % 64);
                }
            }
        }
        Self::from_packed(len, data, CodeMeta::default())
    }

    fn from_packed(len: usize, data: Vec<u64>, meta: CodeMeta) -> Result<Self> {
        let words = words_for(len);
        let code = BinaryCodebook { len, words, data, meta };
        let n = code.size();
        if n < 2 {
            return Err(Error::TooFewCodewords(n));
        }
        let mut seen = HashSet::with_capacity(n);
        for i in 0..n {
            if !seen.insert(code.column(i)) {
                return Err(Error::InvalidCodebook(format!("duplicate codeword at column {i}")));
            }
        }
        Ok(code)
    }

    /// Codeword length `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of codewords `N_g`.
    pub fn size(&self) -> usize {
        self.data.len() / self.words
    }

    pub fn meta(&self) -> CodeMeta {
        self.meta
    }

    /// Packed words of column `n`.
    pub fn column(&self, n: usize) -> &[u64] {
        &self.data[n * self.words..(n + 1) * self.words]
    }

    pub fn bit(&self, t: usize, n: usize) -> bool {
        self.column(n)[t / 64] >> (t % 64) & 1 == 1
    }

    pub fn column_bits(&self, n: usize) -> Vec<bool> {
        (0..self.len).map(|t| self.bit(t, n)).collect()
    }

    pub fn weight(&self, n: usize) -> usize {
        self.column(n).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hamming(&self, i: usize, j: usize) -> usize {
        self.column(i)
            .iter()
            .zip(self.column(j))
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Index of the column equal to `bits`, if any.
    pub fn find(&self, bits: &[u64]) -> Option<usize> {
        (0..self.size()).find(|&n| self.column(n) == bits)
    }

    fn select(&self, indices: &[usize]) -> Result<BinaryCodebook> {
        let mut data = Vec::with_capacity(indices.len() * self.words);
        for &i in indices {
            data.extend_from_slice(self.column(i));
        }
        Self::from_packed(self.len, data, CodeMeta { reed_muller: self.meta.reed_muller, linear: false })
    }

    /// Largest `|T - 2 d_Ham|` over pairs drawn from `indices`, stopping early
    /// once a complementary pair is found.
    fn max_bpsk_correlation(&self, indices: &[usize]) -> usize {
        let t = self.len;
        let mut worst = 0;
        for (a, &i) in indices.iter().enumerate() {
            for &j in &indices[a + 1..] {
                let c = t.abs_diff(2 * self.hamming(i, j));
                if c > worst {
                    worst = c;
                    if worst == t {
                        return worst;
                    }
                }
            }
        }
        worst
    }

    /// Minimum subspace distance of the BPSK-mapped columns, computed in
    /// exact integer arithmetic from pairwise Hamming distances.
    pub fn bpsk_min_subspace_distance(&self) -> f64 {
        let all: Vec<usize> = (0..self.size()).collect();
        self.subset_bpsk_min_subspace_distance(&all)
    }

    fn subset_bpsk_min_subspace_distance(&self, indices: &[usize]) -> f64 {
        correlation_to_distance(self.max_bpsk_correlation(indices), self.len)
    }

    /// `d_min` of the BPSK code formed by the first `N` columns, for every
    /// `N = 2..=size` (entry `N - 2`).
    pub fn prefix_min_subspace_series(&self) -> Vec<f64> {
        let t = self.len;
        let mut worst = 0;
        let mut out = Vec::with_capacity(self.size().saturating_sub(1));
        for n in 1..self.size() {
            if worst < t {
                let newest = (0..n)
                    .into_par_iter()
                    .map(|j| t.abs_diff(2 * self.hamming(j, n)))
                    .max()
                    .unwrap_or(0);
                worst = worst.max(newest);
            }
            out.push(correlation_to_distance(worst, t));
        }
        out
    }
}

fn correlation_to_distance(corr: usize, t: usize) -> f64 {
    let c = corr as f64 / t as f64;
    (1.0 - c * c).clamp(0.0, 1.0)
}

fn binomial(n: u32, k: u32) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Monomials of degree `<= r` in `m` variables: degree ascending, then
/// lexicographic in the variable indices.
fn monomials(m: u32, r: u32) -> Vec<Vec<u32>> {
    fn combos(start: u32, m: u32, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for v in start..m {
            cur.push(v);
            combos(v + 1, m, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=r {
        combos(0, m, d, &mut Vec::new(), &mut out);
    }
    out
}

/// Full Reed-Muller code `RM(m, r)`: column `n` is the codeword of message `n`.
///
/// Generator row `i` evaluates the `i`-th monomial at the points
/// `j = 0..2^m`, where bit `v` of `j` is the value of variable `x_v`. Row 0
/// (the constant monomial) is the most significant message bit.
pub fn reed_muller(m: u32, r: u32) -> Result<BinaryCodebook> {
    let invalid = |reason: &str| Error::InvalidReedMuller { m, r, reason: reason.into() };
    if r > m {
        return Err(invalid("r must not exceed m"));
    }
    if m > 16 {
        return Err(invalid("m must be at most 16"));
    }
    let t = 1usize << m;
    let k: u64 = (0..=r).map(|i| binomial(m, i)).sum();
    let words = words_for(t);
    if k >= 40 || (1usize << k).saturating_mul(words) > MAX_STORED_WORDS {
        return Err(invalid("codebook too large to enumerate"));
    }
    let k = k as usize;
    let rows: Vec<Vec<u64>> = monomials(m, r)
        .into_iter()
        .map(|mono| {
            let mut row = vec![0u64; words];
            for j in 0..t {
                if mono.iter().all(|&v| j >> v & 1 == 1) {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
            row
        })
        .collect();
    debug_assert_eq!(rows.len(), k);

    let size = 1usize << k;
    let mut data = vec![0u64; size * words];
    for n in 1..size {
        // codeword(n) = codeword(n without its lowest set bit) ^ that bit's row
        let low = n.trailing_zeros() as usize;
        let prev = n & (n - 1);
        let row = &rows[k - 1 - low];
        for w in 0..words {
            data[n * words + w] = data[prev * words + w] ^ row[w];
        }
    }
    BinaryCodebook::from_packed(t, data, CodeMeta { reed_muller: Some((m, r)), linear: true })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HammingStats {
    pub d_min: usize,
    pub d_max: usize,
    pub rho: f64,
}

impl HammingStats {
    pub fn new(d_min: usize, d_max: usize) -> Result<Self> {
        if d_min == 0 || d_min > d_max {
            return Err(Error::InconsistentStats(format!("d_min={d_min}, d_max={d_max}")));
        }
        Ok(HammingStats { d_min, d_max, rho: d_min as f64 / d_max as f64 })
    }
}

/// Hamming statistics, using the weight enumeration for complete linear codes.
pub fn hamming_stats(code: &BinaryCodebook) -> HammingStats {
    if code.meta.linear {
        hamming_stats_linear(code)
    } else {
        hamming_stats_pairwise(code)
    }
}

/// Min/max weight over nonzero codewords. Only meaningful for linear codes.
pub fn hamming_stats_linear(code: &BinaryCodebook) -> HammingStats {
    let (lo, hi) = (0..code.size())
        .map(|n| code.weight(n))
        .filter(|&w| w > 0)
        .fold((usize::MAX, 0), |(lo, hi), w| (lo.min(w), hi.max(w)));
    HammingStats::new(lo, hi).expect("distinct codewords give positive weights")
}

/// Exhaustive pairwise Hamming distances.
pub fn hamming_stats_pairwise(code: &BinaryCodebook) -> HammingStats {
    let n = code.size();
    let (lo, hi) = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| code.hamming(i, j))
                .fold((usize::MAX, 0), |(lo, hi), d| (lo.min(d), hi.max(d)))
        })
        .reduce(|| (usize::MAX, 0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    HammingStats::new(lo, hi).expect("distinct codewords give positive distances")
}

/// BPSK image of a binary codebook: `0 -> +1`, `1 -> -1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BpskCodebook {
    len: usize,
    data: Vec<i8>,
}

impl BpskCodebook {
    /// Column-major `T x N` entries, each `+1` or `-1`.
    pub fn new(len: usize, data: Vec<i8>) -> Result<Self> {
        if len == 0 || !data.len().is_multiple_of(len) {
            return Err(Error::InvalidCodebook("entry count not a multiple of the length".into()));
        }
        if data.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::InvalidCodebook("BPSK entries must be +1 or -1".into()));
        }
        Ok(BpskCodebook { len, data })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn size(&self) -> usize {
        self.data.len() / self.len
    }

    pub fn column(&self, n: usize) -> &[i8] {
        &self.data[n * self.len..(n + 1) * self.len]
    }

    pub fn entry(&self, t: usize, n: usize) -> i8 {
        self.data[n * self.len + t]
    }
}

pub fn to_bpsk(code: &BinaryCodebook) -> BpskCodebook {
    let mut data = Vec::with_capacity(code.len * code.size());
    for n in 0..code.size() {
        data.extend((0..code.len).map(|t| if code.bit(t, n) { -1i8 } else { 1 }));
    }
    BpskCodebook { len: code.len, data }
}

/// `u^T v` for BPSK words, cross-checked against `T - 2 d_Ham(u, v)`.
pub fn bpsk_inner_product_identity(u: &[i8], v: &[i8]) -> Result<i64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch { left: u.len(), right: v.len() });
    }
    if u.iter().chain(v).any(|&x| x != 1 && x != -1) {
        return Err(Error::InvalidCodebook("BPSK entries must be +1 or -1".into()));
    }
    let dot: i64 = u.iter().zip(v).map(|(&a, &b)| a as i64 * b as i64).sum();
    let d_ham = u.iter().zip(v).filter(|(a, b)| a != b).count() as i64;
    if dot != u.len() as i64 - 2 * d_ham {
        return Err(Error::Internal(format!("inner product {dot} != T - 2 d_Ham")));
    }
    Ok(dot)
}

/// Closed-form minimum subspace distance of a BPSK codebook from its
/// minimum and maximum Hamming distances:
/// `1 - max(1 - 2 d_min / T, 2 d_max / T - 1)^2`.
pub fn min_subspace_from_hamming(stats: &HammingStats, t: usize) -> Result<f64> {
    if stats.d_min == 0 || stats.d_min > stats.d_max || stats.d_max > t {
        return Err(Error::InconsistentStats(format!(
            "d_min={}, d_max={} with T={t}",
            stats.d_min, stats.d_max
        )));
    }
    let t = t as f64;
    Ok(min_subspace_from_normalized(stats.d_min as f64 / t, stats.d_max as f64 / t))
}

/// Same closed form over normalized distances `x_min = d_min/T`, `x_max = d_max/T`.
pub fn min_subspace_from_normalized(x_min: f64, x_max: f64) -> f64 {
    let c = (1.0 - 2.0 * x_min).max(2.0 * x_max - 1.0);
    (1.0 - c * c).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HammingTarget {
    /// `d_min` balancing both branches of the closed form: `T rho / (1 + rho)`.
    pub d_min: f64,
    /// Matching `d_max = T - d_min = T / (1 + rho)`.
    pub d_max: f64,
    /// Resulting minimum subspace distance `1 - ((1 - rho)/(1 + rho))^2`.
    pub min_subspace: f64,
}

pub fn optimal_hamming_target(rho: f64, t: usize) -> Result<HammingTarget> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidRatio(rho));
    }
    let q = (1.0 - rho) / (1.0 + rho);
    let t = t as f64;
    Ok(HammingTarget { d_min: t * rho / (1.0 + rho), d_max: t / (1.0 + rho), min_subspace: 1.0 - q * q })
}

/// The first `n` columns.
pub fn prune_deterministic(code: &BinaryCodebook, n: usize) -> Result<BinaryCodebook> {
    if n > code.size() {
        return Err(Error::PruneTooLarge { requested: n, available: code.size() });
    }
    if n == code.size() {
        return Ok(code.clone());
    }
    let indices: Vec<usize> = (0..n).collect();
    code.select(&indices)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomPruneStats {
    /// Minimum subspace distance of each trial's pruned BPSK codebook.
    pub values: Vec<f64>,
    /// Lower-middle order statistic of `values`.
    pub median: f64,
}

/// Lower median: element `(len - 1) / 2` of the sorted values.
pub fn lower_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

/// Chooses `n` distinct columns uniformly at random in each trial. Trial `i`
/// draws from ChaCha stream `i` of `seed`, so results do not depend on how
/// trials are scheduled.
pub fn prune_random(code: &BinaryCodebook, n: usize, trials: usize, seed: u64) -> Result<RandomPruneStats> {
    if n > code.size() {
        return Err(Error::PruneTooLarge { requested: n, available: code.size() });
    }
    if n < 2 {
        return Err(Error::TooFewCodewords(n));
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("at least one trial required".into()));
    }
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let picked = rand::seq::index::sample(&mut rng, code.size(), n).into_vec();
            code.subset_bpsk_min_subspace_distance(&picked)
        })
        .collect();
    let median = lower_median(&values);
    Ok(RandomPruneStats { values, median })
}
