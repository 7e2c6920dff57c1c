use alphaeta::attack::recover_seed;
use alphaeta::channel::{wrap, wrap_centered, ChannelParams};
use alphaeta::infotheory::symbol_posterior;
use alphaeta::keystream::{BasisIndex, BitSource, KeystreamGenerator, SecretKey, Taps};
use alphaeta::protocol::{
    additive_stream, bob_decode, encode_symbol, eve_naive_decode, SymbolCount,
};
use proptest::prelude::*;

fn symbol_count() -> impl Strategy<Value = SymbolCount> {
    (2u32..=12).prop_map(|e| SymbolCount::new(1 << e).unwrap())
}

proptest! {
    #[test]
    fn noiseless_decoding_inverts_encoding(m in symbol_count(), k in any::<u32>(), b in any::<bool>()) {
        let k = BasisIndex::new(k % m.half(), m).unwrap();
        let j = encode_symbol(k, b, m).unwrap();
        prop_assert!(j.value() < m.get());
        prop_assert_eq!(bob_decode(k, j.value() as f64, m), b);
        prop_assert_eq!(eve_naive_decode(j.value() as f64, m), b);
    }

    #[test]
    fn bob_tolerates_sub_quarter_deviations(
        m in symbol_count(), k in any::<u32>(), b in any::<bool>(), frac in -0.999f64..0.999,
    ) {
        let k = BasisIndex::new(k % m.half(), m).unwrap();
        let j = encode_symbol(k, b, m).unwrap().value() as f64;
        let received = wrap(j + frac * m.as_f64() / 4.0, m.as_f64());
        prop_assert_eq!(bob_decode(k, received, m), b);
    }

    #[test]
    fn wrapping_lands_in_range(x in -1e7f64..1e7, m in symbol_count()) {
        let mf = m.as_f64();
        let w = wrap(x, mf);
        prop_assert!((0.0..mf).contains(&w));
        let c = wrap_centered(x, mf);
        prop_assert!((-mf / 2.0..mf / 2.0).contains(&c));
        prop_assert!((wrap(c, mf) - w).abs() < 1e-6);
    }

    #[test]
    fn symbol_posterior_is_a_distribution(
        e in 3u32..=10, sigma in 0.3f64..200.0, frac in 0.0f64..1.0,
    ) {
        let m = SymbolCount::new(1 << e).unwrap();
        let params = ChannelParams::from_sigma(m, sigma).unwrap();
        let post = symbol_posterior(frac * m.as_f64(), &params);
        prop_assert_eq!(post.len(), m.get() as usize);
        let total: f64 = post.probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        let h = post.entropy();
        prop_assert!(h >= -1e-12 && h <= e as f64 + 1e-9);
    }

    #[test]
    fn keystream_reads_compose(value in 1u64..(1 << 16), a in 0usize..50, b in 0usize..50) {
        let key = SecretKey::from_value(value, 16).unwrap();
        let taps = Taps::primitive(16).unwrap();
        let mut whole = KeystreamGenerator::new(&key, &taps).unwrap();
        let mut split = KeystreamGenerator::new(&key, &taps).unwrap();
        let mut parts = split.next_bits(a);
        parts.extend(split.next_bits(b));
        prop_assert_eq!(whole.next_bits(a + b), parts);
        prop_assert_eq!(split.emitted_count(), (a + b) as u64);
    }

    #[test]
    fn seed_recovery_from_any_window(len in 2usize..=24, raw in any::<u64>(), offset in 0usize..64) {
        let value = (raw % ((1u64 << len) - 1)) + 1;
        let key = SecretKey::from_value(value, len).unwrap();
        let taps = Taps::primitive(len).unwrap();
        let stream = KeystreamGenerator::new(&key, &taps).unwrap().next_bits(offset + len);
        prop_assert_eq!(recover_seed(&stream[offset..], offset, &taps).unwrap(), key);
    }

    #[test]
    fn additive_cipher_round_trips(value in 1u64..4096, bits in proptest::collection::vec(any::<bool>(), 0..200)) {
        let key = SecretKey::from_value(value, 12).unwrap();
        let taps = Taps::primitive(12).unwrap();
        let cipher = additive_stream(&key, &taps, &bits).unwrap();
        prop_assert_eq!(additive_stream(&key, &taps, &cipher).unwrap(), bits);
    }
}
