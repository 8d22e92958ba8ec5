//! Finite binary words, lazily generated infinite words, and the product-type
//! source measures that generate them.
//!
//! Finite words are ordered shortlex (length first, then lexicographically);
//! that order is the canonical vertex order for every tree in the crate. The
//! prefix order and lexicographic comparison are exposed separately through
//! [`prefix_rel`] and [`lex_compare`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, ProjectRng};

/// Bits pulled from a pair of streams before a meet gives up.
pub const DEFAULT_DEPTH_CAP: usize = 4096;

/// A finite word over `{0,1}`. The empty word is the root of every tree.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    bits: Vec<u8>,
}

impl Word {
    pub fn empty() -> Self {
        Word { bits: Vec::new() }
    }

    /// Builds a word from bits; every entry must be 0 or 1.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        let bits: Vec<u8> = bits.into_iter().collect();
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        Word { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// The `k`-th bit, 0-based.
    pub fn bit(&self, k: usize) -> u8 {
        self.bits[k]
    }

    pub fn last(&self) -> Option<u8> {
        self.bits.last().copied()
    }

    pub fn child(&self, b: u8) -> Word {
        debug_assert!(b <= 1);
        let mut bits = Vec::with_capacity(self.bits.len() + 1);
        bits.extend_from_slice(&self.bits);
        bits.push(b);
        Word { bits }
    }

    pub fn parent(&self) -> Option<Word> {
        if self.is_empty() {
            None
        } else {
            Some(self.prefix(self.len() - 1))
        }
    }

    /// `v₁…v_{m−1}v̄_m`; the root has no sibling.
    pub fn sibling(&self) -> Option<Word> {
        let mut bits = self.bits.clone();
        let last = bits.last_mut()?;
        *last ^= 1;
        Some(Word { bits })
    }

    /// The prefix of length `len` (clamped to the word length).
    pub fn prefix(&self, len: usize) -> Word {
        Word {
            bits: self.bits[..len.min(self.bits.len())].to_vec(),
        }
    }

    /// `self ≤ other` in the prefix order.
    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.bits.starts_with(&self.bits)
    }

    /// `self < other` in the prefix order.
    pub fn is_strict_prefix_of(&self, other: &Word) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    /// The longest common prefix `self ∧ other`.
    pub fn meet(&self, other: &Word) -> Word {
        let p = common_prefix_len(&self.bits, &other.bits);
        self.prefix(p)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        Word { bits }
    }

    /// Removes `prefix` from the front, if it is one.
    pub fn strip_prefix(&self, prefix: &Word) -> Option<Word> {
        self.bits.strip_prefix(prefix.bits.as_slice()).map(|rest| Word {
            bits: rest.to_vec(),
        })
    }

    /// The word with the bit at 0-based position `idx` deleted.
    pub fn without_bit(&self, idx: usize) -> Word {
        let mut bits = self.bits.clone();
        bits.remove(idx);
        Word { bits }
    }

    /// All prefixes `u ≤ self`, shortest first (including `∅` and `self`).
    pub fn prefixes(&self) -> impl Iterator<Item = Word> + '_ {
        (0..=self.len()).map(move |l| self.prefix(l))
    }

    /// The word `0^{len-1} 1`.
    pub fn zeros_then_one(len: usize) -> Word {
        assert!(len >= 1);
        let mut bits = vec![0u8; len];
        bits[len - 1] = 1;
        Word { bits }
    }

    /// All words of length `len`, in lexicographic order.
    pub fn all_of_length(len: usize) -> Vec<Word> {
        (0..1u64 << len)
            .map(|x| Word::from_bits((0..len).map(|k| ((x >> (len - 1 - k)) & 1) as u8)))
            .collect()
    }

    /// The CLI form: `e` for the empty word, otherwise the bits.
    pub fn to_cli_string(&self) -> String {
        if self.is_empty() {
            "e".to_string()
        } else {
            self.to_string()
        }
    }
}

fn common_prefix_len(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl Ord for Word {
    /// Shortlex: shorter words first, equal lengths lexicographically.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("∅")
        } else {
            write!(f, "{self}")
        }
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Accepts `""` or `"e"` for the empty word.
    fn from_str(s: &str) -> Result<Self> {
        if s == "e" {
            return Ok(Word::empty());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("invalid bit {c:?} in word {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(|bits| Word { bits })
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Outcome of comparing two words in the prefix order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixRel {
    /// `u` is a strict prefix of `v`.
    Lt,
    /// `v` is a strict prefix of `u`.
    Gt,
    Eq,
    Incomparable,
}

pub fn prefix_rel(u: &Word, v: &Word) -> PrefixRel {
    let p = common_prefix_len(&u.bits, &v.bits);
    match (p == u.len(), p == v.len()) {
        (true, true) => PrefixRel::Eq,
        (true, false) => PrefixRel::Lt,
        (false, true) => PrefixRel::Gt,
        (false, false) => PrefixRel::Incomparable,
    }
}

/// Lexicographic comparison on the first differing bit.
///
/// Only defined for prefix-incomparable (or equal) words.
pub fn lex_compare(u: &Word, v: &Word) -> Result<Ordering> {
    match prefix_rel(u, v) {
        PrefixRel::Eq => Ok(Ordering::Equal),
        PrefixRel::Lt | PrefixRel::Gt => {
            Err(Error::IncomparabilityViolated(u.to_cli_string(), v.to_cli_string()))
        }
        PrefixRel::Incomparable => {
            let p = common_prefix_len(&u.bits, &v.bits);
            Ok(u.bit(p).cmp(&v.bit(p)))
        }
    }
}

/// Anything that can yield bits on demand: a finite word (which ends) or an
/// infinite stream (which never does).
pub trait BitSource {
    /// The `k`-th bit, or `None` past the end of a finite word.
    fn bit_at(&mut self, k: usize) -> Option<u8>;
}

impl BitSource for Word {
    fn bit_at(&mut self, k: usize) -> Option<u8> {
        self.bits.get(k).copied()
    }
}

impl BitSource for &Word {
    fn bit_at(&mut self, k: usize) -> Option<u8> {
        self.bits.get(k).copied()
    }
}

impl BitSource for WordStream {
    fn bit_at(&mut self, k: usize) -> Option<u8> {
        Some(self.bit(k))
    }
}

impl BitSource for &mut WordStream {
    fn bit_at(&mut self, k: usize) -> Option<u8> {
        Some(self.bit(k))
    }
}

/// The longest common prefix of two finite or infinite words, pulling at most
/// `depth_cap` bits from each.
pub fn meet<A: BitSource, B: BitSource>(mut u: A, mut v: B, depth_cap: usize) -> Result<Word> {
    let len = common_prefix_len_capped(&mut u, &mut v, depth_cap)?;
    let mut bits = Vec::with_capacity(len);
    for k in 0..len {
        bits.push(u.bit_at(k).expect("within common prefix"));
    }
    Ok(Word { bits })
}

/// Length of the longest common prefix; errors once `depth_cap` bits agree on
/// two sources that have not ended.
pub fn common_prefix_len_capped<A: BitSource, B: BitSource>(
    u: &mut A,
    v: &mut B,
    depth_cap: usize,
) -> Result<usize> {
    let mut k = 0;
    loop {
        match (u.bit_at(k), v.bit_at(k)) {
            (Some(a), Some(b)) if a == b => {
                k += 1;
                if k >= depth_cap && u.bit_at(k).is_some() && v.bit_at(k).is_some() {
                    return Err(Error::DepthCapExceeded { cap: depth_cap });
                }
            }
            _ => return Ok(k),
        }
    }
}

/// Per-coordinate success probabilities of a product of Bernoulli laws.
#[derive(Clone, Debug, PartialEq)]
pub enum BernoulliSchedule {
    /// `p_j ≡ p`.
    Constant(BigRational),
    /// `p_j = 1/(j+1)`.
    Harmonic,
}

impl BernoulliSchedule {
    /// Probability that coordinate `j` (1-based) is a 1.
    pub fn success(&self, j: usize) -> BigRational {
        match self {
            BernoulliSchedule::Constant(p) => p.clone(),
            BernoulliSchedule::Harmonic => {
                BigRational::new(BigInt::one(), BigInt::from(j as u64 + 1))
            }
        }
    }

    fn success_f64(&self, j: usize) -> f64 {
        match self {
            BernoulliSchedule::Constant(p) => p.to_f64().unwrap_or(f64::NAN),
            BernoulliSchedule::Harmonic => 1.0 / (j as f64 + 1.0),
        }
    }
}

/// A diffuse probability measure on infinite binary words drawn from the
/// product family: fair coins, products of Bernoulli laws, and either of those
/// behind a fixed prefix.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceMeasure {
    FairCoin,
    ProductBernoulli(BernoulliSchedule),
    Prefixed {
        prefix: Word,
        inner: Box<SourceMeasure>,
    },
}

/// Law of a single coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoordinateLaw {
    Fixed(u8),
    Fair,
    Bernoulli(f64),
}

impl SourceMeasure {
    pub fn fair() -> Self {
        SourceMeasure::FairCoin
    }

    /// `⊗ Ber(1/(j+1))`.
    pub fn harmonic() -> Self {
        SourceMeasure::ProductBernoulli(BernoulliSchedule::Harmonic)
    }

    /// i.i.d. `Ber(p)` coordinates; `p` must lie strictly between 0 and 1.
    pub fn bernoulli(p: BigRational) -> Result<Self> {
        if p <= BigRational::zero() || p >= BigRational::one() {
            return Err(Error::InvalidMeasure(format!(
                "bernoulli parameter {p} must lie in (0,1)"
            )));
        }
        Ok(SourceMeasure::ProductBernoulli(BernoulliSchedule::Constant(p)))
    }

    pub fn prefixed(prefix: Word, inner: SourceMeasure) -> Self {
        SourceMeasure::Prefixed {
            prefix,
            inner: Box::new(inner),
        }
    }

    /// Law of coordinate `j` (1-based).
    pub fn coordinate_law(&self, j: usize) -> CoordinateLaw {
        match self {
            SourceMeasure::FairCoin => CoordinateLaw::Fair,
            SourceMeasure::ProductBernoulli(s) => CoordinateLaw::Bernoulli(s.success_f64(j)),
            SourceMeasure::Prefixed { prefix, inner } => {
                if j <= prefix.len() {
                    CoordinateLaw::Fixed(prefix.bit(j - 1))
                } else {
                    inner.coordinate_law(j - prefix.len())
                }
            }
        }
    }

    /// Exact `ν(τ(y))`, the mass of all infinite extensions of `y`.
    pub fn cylinder_prob(&self, y: &Word) -> BigRational {
        match self {
            SourceMeasure::FairCoin => {
                BigRational::new(BigInt::one(), BigInt::one() << y.len())
            }
            SourceMeasure::ProductBernoulli(s) => {
                let mut acc = BigRational::one();
                for (k, &b) in y.bits().iter().enumerate() {
                    let p = s.success(k + 1);
                    acc *= if b == 1 { p } else { BigRational::one() - p };
                }
                acc
            }
            SourceMeasure::Prefixed { prefix, inner } => match prefix_rel(y, prefix) {
                PrefixRel::Lt | PrefixRel::Eq => BigRational::one(),
                PrefixRel::Gt => {
                    let rest = y.strip_prefix(prefix).expect("prefix relation checked");
                    inner.cylinder_prob(&rest)
                }
                PrefixRel::Incomparable => BigRational::zero(),
            },
        }
    }

    pub fn cylinder_prob_f64(&self, y: &Word) -> f64 {
        self.cylinder_prob(y).to_f64().unwrap_or(0.0)
    }

    /// A fresh `ν`-distributed stream determined by `seed`.
    pub fn sample(&self, seed: u64) -> WordStream {
        WordStream::new(Arc::new(self.clone()), Word::empty(), seed)
    }

    /// A stream distributed as `ν` conditioned on starting with `y`.
    pub fn sample_conditioned(&self, y: &Word, seed: u64) -> Result<WordStream> {
        if self.cylinder_prob(y).is_zero() {
            return Err(Error::ZeroMassLeaf(y.to_cli_string()));
        }
        Ok(WordStream::new(Arc::new(self.clone()), y.clone(), seed))
    }
}

impl fmt::Display for SourceMeasure {
    /// The CLI mini-language form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceMeasure::FairCoin => f.write_str("fair"),
            SourceMeasure::ProductBernoulli(BernoulliSchedule::Harmonic) => f.write_str("harmonic"),
            SourceMeasure::ProductBernoulli(BernoulliSchedule::Constant(p)) => {
                write!(f, "bernoulli:{p}")
            }
            SourceMeasure::Prefixed { prefix, inner } => {
                write!(f, "prefix:{},{}", prefix.to_cli_string(), inner)
            }
        }
    }
}

impl FromStr for SourceMeasure {
    type Err = Error;

    /// `fair`, `harmonic`, `bernoulli:<p>` (decimal or `a/b`), or
    /// `prefix:<bits>,<inner>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "fair" => return Ok(SourceMeasure::FairCoin),
            "harmonic" => return Ok(SourceMeasure::harmonic()),
            _ => {}
        }
        if let Some(p) = s.strip_prefix("bernoulli:") {
            return SourceMeasure::bernoulli(parse_rational(p)?);
        }
        if let Some(rest) = s.strip_prefix("prefix:") {
            let (bits, inner) = rest
                .split_once(',')
                .ok_or_else(|| Error::InvalidMeasure(format!("expected prefix:<bits>,<inner>, got {s:?}")))?;
            return Ok(SourceMeasure::prefixed(bits.parse()?, inner.parse()?));
        }
        Err(Error::InvalidMeasure(format!("unknown measure {s:?}")))
    }
}

/// Parses `0.25`, `1/4` or `1` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidMeasure(format!("cannot parse probability {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.chars().any(|c| !c.is_ascii_digit()) || int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let digits = format!("{}{}", if int.is_empty() { "0" } else { int }, frac);
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Ok(BigRational::new(num, den))
}

/// A lazily generated infinite word.
///
/// Bits are produced on demand from a seeded generator and cached, so
/// `bit(k)` is deterministic and repeated reads agree. A stream may start
/// with a forced prefix, which is how conditioning on a cylinder `τ(y)` is
/// realized for product measures.
#[derive(Clone, Debug)]
pub struct WordStream {
    measure: Arc<SourceMeasure>,
    forced: Word,
    seed: u64,
    rng: ProjectRng,
    cache: Vec<u8>,
    fair_buf: u64,
    fair_left: u32,
}

impl WordStream {
    fn new(measure: Arc<SourceMeasure>, forced: Word, seed: u64) -> Self {
        WordStream {
            measure,
            forced,
            seed,
            rng: rng_from_seed(seed),
            cache: Vec::new(),
            fair_buf: 0,
            fair_left: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn measure(&self) -> &SourceMeasure {
        &self.measure
    }

    /// The `k`-th bit (0-based).
    pub fn bit(&mut self, k: usize) -> u8 {
        while self.cache.len() <= k {
            let b = self.next_bit();
            self.cache.push(b);
        }
        self.cache[k]
    }

    /// Materializes the first `len` bits.
    pub fn prefix(&mut self, len: usize) -> Word {
        if len > 0 {
            self.bit(len - 1);
        }
        Word {
            bits: self.cache[..len].to_vec(),
        }
    }

    /// Number of bits generated so far.
    pub fn materialized(&self) -> usize {
        self.cache.len()
    }

    fn next_bit(&mut self) -> u8 {
        let k = self.cache.len();
        if k < self.forced.len() {
            return self.forced.bit(k);
        }
        match self.measure.coordinate_law(k + 1) {
            CoordinateLaw::Fixed(b) => b,
            CoordinateLaw::Fair => {
                if self.fair_left == 0 {
                    self.fair_buf = self.rng.random();
                    self.fair_left = 64;
                }
                let b = (self.fair_buf & 1) as u8;
                self.fair_buf >>= 1;
                self.fair_left -= 1;
                b
            }
            CoordinateLaw::Bernoulli(p) => u8::from(self.rng.random::<f64>() < p),
        }
    }
}
