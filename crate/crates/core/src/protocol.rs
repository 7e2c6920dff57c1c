//! αη symbol mapping and decoders, plus the additive stream-cipher baseline.
//!
//! Alice maps basis `k` in `[0, M/2)` and message bit `b` to the phase index
//! `j = ((k mod 2) XOR b) * M/2 + k`. The basis picks an antipodal pair of
//! phases; the signal bit picks the half-circle.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keystream::{BasisIndex, BitSource, KeystreamGenerator, SecretKey, Taps};

/// Number of phase positions `M`: a power of two, at least 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct SymbolCount(u32);

impl SymbolCount {
    pub fn new(m: u64) -> Result<Self> {
        if m < 4 || !m.is_power_of_two() || m > 1 << 30 {
            return Err(Error::InvalidParameter(format!(
                "M must be a power of two in [4, 2^30], got {m}"
            )));
        }
        Ok(Self(m as u32))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    pub fn half(self) -> u32 {
        self.0 / 2
    }

    /// Bits of running key consumed per symbol, `log2(M/2)`.
    pub fn basis_bits(self) -> u32 {
        self.0.trailing_zeros() - 1
    }
}

/// Position on the phase circle in units of `2π/M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolIndex(u32);

impl SymbolIndex {
    pub fn new(value: u32, m: SymbolCount) -> Result<Self> {
        if value >= m.get() {
            return Err(Error::InvalidParameter(format!(
                "symbol index {value} outside [0, {})",
                m.get()
            )));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

/// One transmitted symbol: basis, message bit, sent index and (once passed
/// through a channel) the received phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolTrace {
    pub k: BasisIndex,
    pub b: bool,
    pub j: SymbolIndex,
    pub j_received: Option<f64>,
}

pub fn encode_symbol(k: BasisIndex, b: bool, m: SymbolCount) -> Result<SymbolIndex> {
    let k = k.value();
    if k >= m.half() {
        return Err(Error::InvalidParameter(format!(
            "basis index {k} outside [0, {})",
            m.half()
        )));
    }
    let signal = (k & 1 == 1) ^ b;
    Ok(SymbolIndex(signal as u32 * m.half() + k))
}

/// Circular distance between two positions on a circle of circumference `m`.
pub fn circular_distance(a: f64, b: f64, m: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(m);
    d.min(m - d)
}

/// Keyed decoder: `x = 0` when the received phase lies within a quarter
/// circle of the basis phase, and the bit is `x XOR (k mod 2)`.
/// A distance of exactly `M/4` decodes as `x = 1`.
pub fn bob_decode(k: BasisIndex, j_received: f64, m: SymbolCount) -> bool {
    let d = circular_distance(j_received, k.value() as f64, m.as_f64());
    let x = !(d < m.as_f64() / 4.0);
    x ^ (k.value() & 1 == 1)
}

/// Rounds half-up to the nearest integer symbol, modulo `M`.
pub fn round_symbol(j_received: f64, m: SymbolCount) -> u32 {
    ((j_received + 0.5).floor().rem_euclid(m.as_f64())) as u32
}

/// Keyless decoder: round to the nearest symbol `r` and invert the mapping,
/// `b = floor(2r/M) XOR (r mod 2)`.
pub fn eve_naive_decode(j_received: f64, m: SymbolCount) -> bool {
    let r = round_symbol(j_received, m);
    (r >= m.half()) ^ (r & 1 == 1)
}

/// Encodes a message under the running key of `key`, one symbol per bit.
pub fn encode_message(
    key: &SecretKey,
    taps: &Taps,
    message: &[bool],
    m: SymbolCount,
) -> Result<Vec<SymbolTrace>> {
    let mut gen = KeystreamGenerator::new(key, taps)?;
    encode_with(&mut gen, message, m)
}

/// Encodes a message drawing bases from any bit source.
pub fn encode_with<S: BitSource>(
    source: &mut S,
    message: &[bool],
    m: SymbolCount,
) -> Result<Vec<SymbolTrace>> {
    message
        .iter()
        .map(|&b| {
            let k = source.next_basis(m);
            Ok(SymbolTrace {
                k,
                b,
                j: encode_symbol(k, b, m)?,
                j_received: None,
            })
        })
        .collect()
}

pub fn additive_encrypt(k_bit: bool, b: bool) -> bool {
    k_bit ^ b
}

pub fn additive_decrypt(k_bit: bool, c: bool) -> bool {
    k_bit ^ c
}

/// XORs `bits` with the running key of a fresh generator.
pub fn additive_stream(key: &SecretKey, taps: &Taps, bits: &[bool]) -> Result<Vec<bool>> {
    let mut gen = KeystreamGenerator::new(key, taps)?;
    Ok(bits
        .iter()
        .map(|&b| additive_encrypt(gen.next_bit(), b))
        .collect())
}

/// Statistical model of the plaintext.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessagePrior {
    /// Independent fair bits.
    Uniform,
    /// Fair bits, each repeated this many times.
    Repetition(usize),
}

impl MessagePrior {
    /// Symbols sharing one free message bit.
    pub fn block_len(&self) -> usize {
        match *self {
            MessagePrior::Uniform => 1,
            MessagePrior::Repetition(r) => r.max(1),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<bool> {
        let r = self.block_len();
        let mut bits = Vec::with_capacity(n);
        while bits.len() < n {
            let b: bool = rng.gen();
            bits.extend(std::iter::repeat_n(b, r.min(n - bits.len())));
        }
        bits
    }

    /// Every length-`n` message the prior can produce; all are equally likely.
    pub fn support(&self, n: usize) -> Vec<Vec<bool>> {
        let r = self.block_len();
        let blocks = n.div_ceil(r);
        assert!(blocks < 32, "message support too large to enumerate");
        (0u32..1 << blocks)
            .map(|pattern| {
                (0..n)
                    .map(|q| (pattern >> (blocks - 1 - q / r)) & 1 == 1)
                    .collect()
            })
            .collect()
    }
}

/// Expands bytes into bits, most significant bit first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |s| (byte >> s) & 1 == 1))
        .collect()
}

/// Writes traces as CSV with columns `q,k,b,j,j_received`.
pub fn write_trace_csv<W: Write>(mut out: W, traces: &[SymbolTrace]) -> Result<()> {
    writeln!(out, "q,k,b,j,j_received")?;
    for (q, t) in traces.iter().enumerate() {
        let received = t.j_received.map(|v| format!("{v:.6}")).unwrap_or_default();
        writeln!(
            out,
            "{q},{},{},{},{received}",
            t.k.value(),
            t.b as u8,
            t.j.value()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(v: u64) -> SymbolCount {
        SymbolCount::new(v).unwrap()
    }

    fn k(v: u32, mm: SymbolCount) -> BasisIndex {
        BasisIndex::new(v, mm).unwrap()
    }

    #[test]
    fn symbol_count_validation() {
        assert!(SymbolCount::new(2).is_err());
        assert!(SymbolCount::new(12).is_err());
        assert!(SymbolCount::new(0).is_err());
        assert_eq!(m(4).basis_bits(), 1);
        assert_eq!(m(32).basis_bits(), 4);
        assert_eq!(m(4096).basis_bits(), 11);
    }

    #[test]
    fn encode_examples() {
        let m32 = m(32);
        assert_eq!(encode_symbol(k(0, m32), false, m32).unwrap().value(), 0);
        assert_eq!(encode_symbol(k(5, m32), false, m32).unwrap().value(), 21);
        assert_eq!(encode_symbol(k(5, m32), true, m32).unwrap().value(), 5);
        let out_of_range = BasisIndex::new_unchecked(16);
        assert!(encode_symbol(out_of_range, false, m32).is_err());
        assert!(BasisIndex::new(16, m32).is_err());
    }

    #[test]
    fn encode_is_a_bijection() {
        for exp in 2..=12 {
            let mm = m(1 << exp);
            let mut hit = vec![false; mm.get() as usize];
            for kv in 0..mm.half() {
                for b in [false, true] {
                    let j = encode_symbol(k(kv, mm), b, mm).unwrap().value() as usize;
                    assert!(!hit[j]);
                    hit[j] = true;
                }
            }
            assert!(hit.iter().all(|&h| h));
        }
    }

    #[test]
    fn bob_examples() {
        let m32 = m(32);
        assert!(!bob_decode(k(5, m32), 21.0, m32));
        assert!(bob_decode(k(5, m32), 5.0, m32));
        // Exactly a quarter circle away counts as the far half-plane.
        assert!(bob_decode(k(0, m32), 8.0, m32));
        assert!(!bob_decode(k(0, m32), 7.999, m32));
    }

    #[test]
    fn noiseless_decoders_invert_encoding() {
        for exp in 2..=12 {
            let mm = m(1 << exp);
            for kv in 0..mm.half() {
                for b in [false, true] {
                    let j = encode_symbol(k(kv, mm), b, mm).unwrap().value() as f64;
                    assert_eq!(bob_decode(k(kv, mm), j, mm), b);
                    assert_eq!(eve_naive_decode(j, mm), b);
                }
            }
        }
    }

    #[test]
    fn eve_examples() {
        let m32 = m(32);
        assert!(!eve_naive_decode(21.2, m32));
        assert!(eve_naive_decode(20.2, m32));
        // Rounds half up and wraps.
        assert_eq!(round_symbol(31.5, m32), 0);
        assert_eq!(round_symbol(0.49, m32), 0);
    }

    #[test]
    fn adjacent_symbols_decode_to_opposite_bits() {
        for exp in 2..=10 {
            let mm = m(1 << exp);
            for r in 0..mm.get() {
                let next = (r + 1) % mm.get();
                let same = eve_naive_decode(r as f64, mm) == eve_naive_decode(next as f64, mm);
                // Crossing a half-circle boundary flips both the half and the
                // basis parity, so the bit survives there and only there.
                assert_eq!(same, next % mm.half() == 0, "M={} r={r}", mm.get());
            }
        }
    }

    #[test]
    fn message_encoding_follows_keystream() {
        let key = SecretKey::from_value(1, 4).unwrap();
        let taps = Taps::new(&[4, 3], 4).unwrap();
        assert!(encode_message(&key, &taps, &[], m(8)).unwrap().is_empty());

        // Stream 0001 0011 ...; M=8 takes two bits per symbol: k = 0, 1, 0, 3.
        let traces = encode_message(&key, &taps, &[true, false, false, true], m(8)).unwrap();
        let ks: Vec<u32> = traces.iter().map(|t| t.k.value()).collect();
        assert_eq!(ks, vec![0, 1, 0, 3]);
        let js: Vec<u32> = traces.iter().map(|t| t.j.value()).collect();
        assert_eq!(js, vec![4, 5, 0, 3]);

        // The sent indices alone determine the message.
        let decoded: Vec<bool> = traces
            .iter()
            .map(|t| eve_naive_decode(t.j.value() as f64, m(8)))
            .collect();
        assert_eq!(decoded, vec![true, false, false, true]);
    }

    #[test]
    fn additive_truth_table_and_round_trip() {
        assert!(!additive_encrypt(false, false));
        assert!(!additive_encrypt(true, true));
        for kb in [false, true] {
            for b in [false, true] {
                assert_eq!(additive_decrypt(kb, additive_encrypt(kb, b)), b);
            }
        }
        let key = SecretKey::from_value(9, 4).unwrap();
        let taps = Taps::new(&[4, 3], 4).unwrap();
        let msg = bytes_to_bits(b"stream");
        let ct = additive_stream(&key, &taps, &msg).unwrap();
        assert_ne!(ct, msg);
        assert_eq!(additive_stream(&key, &taps, &ct).unwrap(), msg);
    }

    #[test]
    fn bytes_are_msb_first() {
        assert_eq!(
            bytes_to_bits(&[0b1000_0001]),
            vec![true, false, false, false, false, false, false, true]
        );
    }

    #[test]
    fn trace_csv_layout() {
        let mm = m(32);
        let mut t = SymbolTrace {
            k: k(5, mm),
            b: false,
            j: SymbolIndex::new(21, mm).unwrap(),
            j_received: None,
        };
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &[t]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "q,k,b,j,j_received\n0,5,0,21,\n"
        );
        t.j_received = Some(20.75);
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &[t]).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .ends_with("0,5,0,21,20.750000\n"));
    }

    #[test]
    fn message_priors() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(5);
        let rep = MessagePrior::Repetition(3).sample(10, &mut rng);
        assert_eq!(rep.len(), 10);
        assert!(rep.chunks(3).all(|c| c.iter().all(|&b| b == c[0])));
        assert_eq!(MessagePrior::Uniform.support(3).len(), 8);
        let support = MessagePrior::Repetition(2).support(3);
        assert_eq!(
            support,
            vec![
                vec![false, false, false],
                vec![false, false, true],
                vec![true, true, false],
                vec![true, true, true],
            ]
        );
    }

    proptest! {
        #[test]
        fn half_plane_symmetry(exp in 2u32..13, kv in 0u32..4096, j in 0.0f64..1.0) {
            let mm = m(1 << exp);
            let kv = kv % mm.half();
            let jr = j * mm.as_f64();
            let flipped = (jr + mm.half() as f64).rem_euclid(mm.as_f64());
            // Skip the measure-zero boundary where both sides sit at exactly M/4.
            let d = circular_distance(jr, kv as f64, mm.as_f64());
            prop_assume!((d - mm.as_f64() / 4.0).abs() > 1e-9);
            prop_assert_eq!(bob_decode(k(kv, mm), jr, mm), !bob_decode(k(kv, mm), flipped, mm));
        }
    }
}
