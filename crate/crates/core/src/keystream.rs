//! Running-key generation.
//!
//! A secret key of `L` bits seeds a Fibonacci LFSR. The register holds the
//! last `L` stream bits; the seed bits are emitted first, in order, and every
//! later bit obeys `s[t] = XOR over p in taps of s[t - p]`. Tap positions are
//! the exponents of the feedback polynomial and must include `L` itself.
//!
//! Basis indices are cut from the stream in chunks of `log2(M/2)` bits, most
//! significant bit first.

use rand::Rng;

use crate::error::{Error, Result};
use crate::protocol::SymbolCount;

/// An `L`-bit secret key. Bit 0 is the most significant bit of the key's
/// integer value and the first bit the generator emits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SecretKey {
    bits: Vec<bool>,
}

impl SecretKey {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidKey(
                "key length must be at least 1 bit".into(),
            ));
        }
        Ok(Self { bits })
    }

    /// Key whose integer value is `value`, written big-endian over `len` bits.
    pub fn from_value(value: u64, len: usize) -> Result<Self> {
        if len == 0 || len > 64 {
            return Err(Error::InvalidKey(format!(
                "integer keys support 1..=64 bits, got {len}"
            )));
        }
        if len < 64 && value >> len != 0 {
            return Err(Error::InvalidKey(format!(
                "value {value:#x} does not fit in {len} bits"
            )));
        }
        let bits = (0..len)
            .map(|i| (value >> (len - 1 - i)) & 1 == 1)
            .collect();
        Ok(Self { bits })
    }

    /// Parses a hex integer (optionally `0x`-prefixed) into an `len`-bit key.
    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidKey(
                "key length must be at least 1 bit".into(),
            ));
        }
        let digits = hex.trim().trim_start_matches("0x").trim_start_matches("0X");
        if digits.is_empty() {
            return Err(Error::InvalidKey("empty hex key".into()));
        }
        let mut raw = Vec::with_capacity(digits.len() * 4);
        for c in digits.chars() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::InvalidKey(format!("non-hex character {c:?} in key")))?;
            raw.extend((0..4).rev().map(|s| (nibble >> s) & 1 == 1));
        }
        // Right-align the integer into `len` bits.
        if raw.len() > len {
            let excess = raw.len() - len;
            if raw[..excess].iter().any(|&b| b) {
                return Err(Error::InvalidKey(format!(
                    "hex key has more than {len} significant bits"
                )));
            }
            raw.drain(..excess);
        } else {
            let mut padded = vec![false; len - raw.len()];
            padded.extend(raw);
            raw = padded;
        }
        Ok(Self { bits: raw })
    }

    /// Uniformly random non-zero key.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidKey(
                "key length must be at least 1 bit".into(),
            ));
        }
        loop {
            let bits: Vec<bool> = (0..len).map(|_| rng.gen()).collect();
            if bits.iter().any(|&b| b) {
                return Ok(Self { bits });
            }
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&b| !b)
    }

    /// Integer value, for keys of at most 64 bits.
    pub fn value(&self) -> Option<u64> {
        (self.bits.len() <= 64)
            .then(|| self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    pub fn to_hex(&self) -> String {
        let pad = (4 - self.bits.len() % 4) % 4;
        let padded: Vec<bool> = std::iter::repeat_n(false, pad)
            .chain(self.bits.iter().copied())
            .collect();
        padded
            .chunks(4)
            .map(|c| {
                let v = c.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
                std::char::from_digit(v, 16).unwrap()
            })
            .collect()
    }
}

/// Feedback tap positions of a Fibonacci LFSR, stored in descending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Taps {
    positions: Vec<usize>,
}

/// Primitive feedback polynomials (maximal-length taps) for small registers.
const PRIMITIVE_TAPS: &[&[usize]] = &[
    &[],
    &[1],
    &[2, 1],
    &[3, 2],
    &[4, 3],
    &[5, 3],
    &[6, 5],
    &[7, 6],
    &[8, 6, 5, 4],
    &[9, 5],
    &[10, 7],
    &[11, 9],
    &[12, 6, 4, 1],
    &[13, 4, 3, 1],
    &[14, 5, 3, 1],
    &[15, 14],
    &[16, 15, 13, 4],
    &[17, 14],
    &[18, 11],
    &[19, 6, 2, 1],
    &[20, 17],
    &[21, 19],
    &[22, 21],
    &[23, 18],
    &[24, 23, 22, 17],
];

impl Taps {
    pub fn new(positions: &[usize], len: usize) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidTaps("tap set is empty".into()));
        }
        let mut sorted = positions.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        sorted.dedup();
        if sorted.len() != positions.len() {
            return Err(Error::InvalidTaps("duplicate tap positions".into()));
        }
        if let Some(bad) = sorted.iter().find(|&&p| p == 0 || p > len) {
            return Err(Error::InvalidTaps(format!("tap {bad} outside 1..={len}")));
        }
        if sorted[0] != len {
            return Err(Error::InvalidTaps(format!(
                "taps must include the register length {len}"
            )));
        }
        Ok(Self { positions: sorted })
    }

    /// Maximal-length taps for `len` in `1..=24`.
    pub fn primitive(len: usize) -> Option<Self> {
        PRIMITIVE_TAPS
            .get(len)
            .filter(|t| !t.is_empty())
            .map(|t| Self {
                positions: t.to_vec(),
            })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Register length implied by the taps.
    pub fn len(&self) -> usize {
        self.positions[0]
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Half-circle basis index `k` in `[0, M/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(u32);

impl BasisIndex {
    pub fn new(value: u32, m: SymbolCount) -> Result<Self> {
        if value >= m.half() {
            return Err(Error::InvalidParameter(format!(
                "basis index {value} outside [0, {})",
                m.half()
            )));
        }
        Ok(Self(value))
    }

    pub(crate) fn new_unchecked(value: u32) -> Self {
        Self(value)
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

/// A source of running-key bits.
pub trait BitSource {
    fn next_bit(&mut self) -> bool;

    /// Bits produced so far.
    fn emitted_count(&self) -> u64;

    fn next_bits(&mut self, n: usize) -> Vec<bool> {
        (0..n).map(|_| self.next_bit()).collect()
    }

    /// Consumes `log2(M/2)` bits, MSB first.
    fn next_basis(&mut self, m: SymbolCount) -> BasisIndex {
        let value = (0..m.basis_bits()).fold(0u32, |acc, _| (acc << 1) | self.next_bit() as u32);
        BasisIndex(value)
    }
}

/// Fibonacci LFSR keystream generator.
#[derive(Debug, Clone)]
pub struct KeystreamGenerator {
    taps: Taps,
    // Ring buffer over the last `L` stream bits; `head` is the next output.
    window: Vec<bool>,
    head: usize,
    emitted: u64,
}

impl KeystreamGenerator {
    pub fn new(key: &SecretKey, taps: &Taps) -> Result<Self> {
        if taps.len() != key.len() {
            return Err(Error::InvalidTaps(format!(
                "taps describe a {}-bit register but the key has {} bits",
                taps.len(),
                key.len()
            )));
        }
        if key.is_zero() {
            return Err(Error::DegenerateSeed);
        }
        Ok(Self {
            taps: taps.clone(),
            window: key.bits().to_vec(),
            head: 0,
            emitted: 0,
        })
    }

    pub fn taps(&self) -> &Taps {
        &self.taps
    }

    /// Current register contents, oldest (next to be emitted) bit first.
    pub fn state(&self) -> Vec<bool> {
        let l = self.window.len();
        (0..l).map(|i| self.window[(self.head + i) % l]).collect()
    }
}

impl BitSource for KeystreamGenerator {
    fn next_bit(&mut self) -> bool {
        let l = self.window.len();
        let out = self.window[self.head];
        // Position of s[t + L - p] relative to s[t] at `head`.
        let feedback = self
            .taps
            .positions
            .iter()
            .fold(false, |acc, &p| acc ^ self.window[(self.head + l - p) % l]);
        self.window[self.head] = feedback;
        self.head = (self.head + 1) % l;
        self.emitted += 1;
        out
    }

    fn emitted_count(&self) -> u64 {
        self.emitted
    }
}
