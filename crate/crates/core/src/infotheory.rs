//! Posteriors, entropies and the leak budget.
//!
//! An observation `j'` narrows Eve's uniform prior over the `M` symbols
//! (entropy `log2 M`) to a wrapped-Gaussian posterior of entropy about
//! `log2(σ √(2πe))`. The difference is the per-symbol gain; one bit of it is
//! masked by the message, leaving `U` bits per symbol about the running key
//! and a unicity distance of `L / U` symbols.
//!
//! All logarithms are base 2.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use rand::Rng;
use serde::Serialize;

use crate::channel::{normal_cdf, normal_sf, wrap_centered, ChannelParams};
use crate::error::{Error, Result};
use crate::keystream::{BitSource, KeystreamGenerator, SecretKey, Taps};
use crate::protocol::{bob_decode, encode_symbol, eve_naive_decode, MessagePrior, SymbolIndex};
use crate::seeding::{self, Role};

/// Probability vector over a finite outcome space.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    probs: Vec<f64>,
    label: String,
}

impl Posterior {
    /// Normalizes non-negative weights.
    pub fn from_weights(mut weights: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "posterior weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter(
                "posterior weights sum to zero".into(),
            ));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self {
            probs: weights,
            label: label.into(),
        })
    }

    /// Softmax of log-weights (natural log).
    pub fn from_log_weights(log_weights: &[f64], label: impl Into<String>) -> Result<Self> {
        let max = log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::InvalidParameter(
                "log-weights have no finite maximum".into(),
            ));
        }
        Self::from_weights(log_weights.iter().map(|l| (l - max).exp()).collect(), label)
    }

    pub fn uniform(n: usize, label: impl Into<String>) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
            label: label.into(),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }

    /// Most probable outcome, lowest index on ties, and whether a tie
    /// occurred.
    pub fn argmax(&self) -> (usize, bool) {
        let mut best = 0;
        let mut tie = false;
        for (i, &p) in self.probs.iter().enumerate().skip(1) {
            if p > self.probs[best] {
                best = i;
                tie = false;
            } else if p == self.probs[best] {
                tie = true;
            }
        }
        (best, tie)
    }
}

pub fn entropy(p: &Posterior) -> f64 {
    p.entropy()
}

/// Shannon entropy in bits; zero entries contribute nothing.
pub fn entropy_of(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Eve's posterior over the sent symbol after observing `j_received`, with a
/// uniform prior. Bin `m` carries the channel mass over `[m - ½, m + ½)`
/// around the observation.
pub fn symbol_posterior(j_received: f64, params: &ChannelParams) -> Posterior {
    let m = params.m().get() as usize;
    let mf = m as f64;
    let sigma = params.applied_sigma();
    let mut weights = vec![0.0; m];
    // Beyond 40σ every bin underflows, so plain Gaussian channels only need
    // the window around the observation.
    let reach = 40.0 * sigma + 1.0;
    if !params.dsr() && reach < mf / 2.0 {
        let lo = (j_received - reach).floor() as i64;
        let hi = (j_received + reach).ceil() as i64;
        // Each bin edge is evaluated once, on whichever tail keeps precision.
        let tail = |x: f64| {
            if x >= 0.0 {
                normal_sf(x)
            } else {
                normal_cdf(x)
            }
        };
        let edge = |raw: i64| (raw as f64 - 0.5 - j_received) / sigma;
        let mut left = edge(lo);
        let mut left_tail = tail(left);
        for raw in lo..=hi {
            let right = edge(raw + 1);
            let right_tail = tail(right);
            let mass = if left >= 0.0 {
                left_tail - right_tail
            } else if right <= 0.0 {
                right_tail - left_tail
            } else {
                1.0 - left_tail - right_tail
            };
            weights[raw.rem_euclid(m as i64) as usize] += mass;
            left = right;
            left_tail = right_tail;
        }
    } else {
        for (bin, w) in weights.iter_mut().enumerate() {
            let d = wrap_centered(bin as f64 - j_received, mf);
            *w = params.deviation_mass(d - 0.5, d + 0.5);
        }
    }
    Posterior::from_weights(weights, "symbol")
        .expect("channel mass is positive near the observation")
}

/// `log2(M / (σ √(2πe)))`, the per-symbol gain on `j`.
pub fn info_gain_closed_form(params: &ChannelParams) -> f64 {
    (params.m().as_f64() / (params.sigma() * (2.0 * PI * E).sqrt())).log2()
}

/// The rounded form `½ log2(ηN) + 1.6`.
pub fn info_gain_approx(params: &ChannelParams) -> f64 {
    0.5 * params.effective_photons().log2() + 1.6
}

/// Leak budget for an `L`-bit key.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoReport {
    pub h0: f64,
    pub h1: f64,
    pub gain_per_symbol: f64,
    pub gain_approx: f64,
    pub key_gain_per_symbol: f64,
    /// `None` when `U = 0` and the key is never pinned down.
    pub unicity: Option<f64>,
    pub key_bits: usize,
    pub alpha: f64,
    pub sigma: f64,
}

pub fn key_rate_and_unicity(params: &ChannelParams, key_bits: usize) -> Result<InfoReport> {
    if key_bits == 0 {
        return Err(Error::InvalidParameter(
            "key length must be at least 1 bit".into(),
        ));
    }
    let h0 = params.m().as_f64().log2();
    let h1 = (params.sigma() * (2.0 * PI * E).sqrt())
        .log2()
        .clamp(0.0, h0);
    let gain = info_gain_closed_form(params);
    let u = (gain - 1.0).max(0.0);
    Ok(InfoReport {
        h0,
        h1,
        gain_per_symbol: gain,
        gain_approx: info_gain_approx(params),
        key_gain_per_symbol: u,
        unicity: (u > 0.0).then(|| key_bits as f64 / u),
        key_bits,
        alpha: params.alpha(),
        sigma: params.sigma(),
    })
}

/// A Monte-Carlo estimate with its closed-form counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub analytic: Option<f64>,
    pub stderr: f64,
}

impl Estimate {
    fn from_samples(samples: &[f64], analytic: Option<f64>) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            estimate: mean,
            analytic,
            stderr: (var / n).sqrt(),
        }
    }

    /// Bernoulli rate with its binomial standard error.
    fn from_rate(errors: u64, n: u64, analytic: Option<f64>) -> Self {
        let p = errors as f64 / n as f64;
        Self {
            estimate: p,
            analytic,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }
}

const BLOCK: u64 = 4096;

/// Mean of `H0 - H(posterior)` over uniformly random sent symbols.
pub fn monte_carlo_info_gain(params: &ChannelParams, trials: u64, seed: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let m = params.m();
    let h0 = m.as_f64().log2();
    let samples: Vec<f64> = seeding::par_blocks(trials, BLOCK, |b, range| {
        let mut sym_rng = seeding::stream(seed, Role::Symbol, b);
        let mut noise_rng = seeding::stream(seed, Role::EveNoise, b);
        range
            .map(|_| {
                let j = SymbolIndex::new(sym_rng.gen_range(0..m.get()), m).unwrap();
                let observed = params.transmit(j, &mut noise_rng);
                h0 - symbol_posterior(observed, params).entropy()
            })
            .collect::<Vec<f64>>()
    })
    .concat();
    Ok(Estimate::from_samples(
        &samples,
        Some(info_gain_closed_form(params)),
    ))
}

/// Bit error rates of the keyed and keyless decoders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerReport {
    pub trials: u64,
    pub bob: Estimate,
    pub eve: Estimate,
}

/// Probability that the keyed decoder errs: the total deviation lands a
/// quarter circle or more from the sent phase.
pub fn bob_ber_analytic(params: &ChannelParams) -> f64 {
    let q = params.m().as_f64() / 4.0;
    (1.0 - params.deviation_mass(-q, q)).max(0.0)
}

/// Probability that the keyless rounding decoder errs, averaged over the
/// sent symbol.
pub fn eve_ber_analytic(params: &ChannelParams) -> f64 {
    let m = params.m();
    let mi = m.get() as i64;
    // P(rounded deviation = δ) for δ in [0, M).
    let cell: Vec<f64> = (0..mi)
        .map(|delta| {
            let d = wrap_centered(delta as f64, m.as_f64());
            params.deviation_mass(d - 0.5, d + 0.5)
        })
        .collect();
    let decode = |r: i64| (r >= mi / 2) ^ (r & 1 == 1);
    let mut total = 0.0;
    for j in 0..mi {
        let sent = decode(j);
        for (delta, &p) in cell.iter().enumerate() {
            if p > 0.0 && decode((j + delta as i64) % mi) != sent {
                total += p;
            }
        }
    }
    total / mi as f64
}

/// Monte-Carlo BER for Bob and Eve on a keyed transmission. Both receivers
/// see the same sent phase (including any DSR offset) with independent
/// measurement noise.
pub fn ber_curves(
    bob: &ChannelParams,
    eve: &ChannelParams,
    key: &SecretKey,
    taps: &Taps,
    prior: MessagePrior,
    trials: u64,
    seed: u64,
) -> Result<BerReport> {
    let mut msg_rng = seeding::stream(seed, Role::Message, 0);
    let message = prior.sample(trials as usize, &mut msg_rng);
    ber_curves_for_message(bob, eve, key, taps, &message, seed)
}

/// [`ber_curves`] for a fixed message; one symbol per message bit.
pub fn ber_curves_for_message(
    bob: &ChannelParams,
    eve: &ChannelParams,
    key: &SecretKey,
    taps: &Taps,
    message: &[bool],
    seed: u64,
) -> Result<BerReport> {
    let trials = message.len() as u64;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if bob.m() != eve.m() || bob.dsr() != eve.dsr() {
        return Err(Error::InvalidParameter(
            "Bob and Eve must observe the same symbol alphabet and DSR setting".into(),
        ));
    }
    let m = bob.m();
    let mut gen = KeystreamGenerator::new(key, taps)?;
    let bases: Vec<_> = (0..trials).map(|_| gen.next_basis(m)).collect();

    let partial = seeding::par_blocks(trials, BLOCK, |b, range| {
        let mut dsr_rng = seeding::stream(seed, Role::Dsr, b);
        let mut bob_rng = seeding::stream(seed, Role::BobNoise, b);
        let mut eve_rng = seeding::stream(seed, Role::EveNoise, b);
        let mut errors = (0u64, 0u64);
        for q in range {
            let (k, bit) = (bases[q as usize], message[q as usize]);
            let j = encode_symbol(k, bit, m).expect("keystream bases are in range");
            let phase = j.value() as f64 + bob.draw_offset(&mut dsr_rng).unwrap_or(0.0);
            let at_bob = bob.observe(phase, &mut bob_rng);
            let at_eve = eve.observe(phase, &mut eve_rng);
            errors.0 += (bob_decode(k, at_bob, m) != bit) as u64;
            errors.1 += (eve_naive_decode(at_eve, m) != bit) as u64;
        }
        errors
    });
    let (bob_err, eve_err) = partial
        .into_iter()
        .fold((0, 0), |(a, b), (c, d)| (a + c, b + d));
    Ok(BerReport {
        trials,
        bob: Estimate::from_rate(bob_err, trials, Some(bob_ber_analytic(bob))),
        eve: Estimate::from_rate(eve_err, trials, Some(eve_ber_analytic(eve))),
    })
}

/// Mutual information from a joint count table (`rows × cols`, row-major).
/// Cells whose ratio is exactly one contribute exactly zero.
pub fn mutual_info_from_counts(counts: &[u64], rows: usize, cols: usize) -> f64 {
    assert_eq!(counts.len(), rows * cols);
    let total: u128 = counts.iter().map(|&c| c as u128).sum();
    if total == 0 {
        return 0.0;
    }
    let row_sums: Vec<u128> = counts
        .chunks(cols)
        .map(|r| r.iter().map(|&c| c as u128).sum())
        .collect();
    let mut col_sums = vec![0u128; cols];
    for row in counts.chunks(cols) {
        col_sums
            .iter_mut()
            .zip(row)
            .for_each(|(s, &c)| *s += c as u128);
    }
    let mut mi = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let n = counts[r * cols + c] as u128;
            if n == 0 {
                continue;
            }
            let num = n * total;
            let den = row_sums[r] * col_sums[c];
            if num != den {
                mi += (n as f64 / total as f64) * (num as f64 / den as f64).log2();
            }
        }
    }
    mi
}

/// Mutual information between rows and columns of a joint probability table.
pub fn mutual_info_from_joint(joint: &[f64], rows: usize, cols: usize) -> f64 {
    assert_eq!(joint.len(), rows * cols);
    let row_sums: Vec<f64> = joint.chunks(cols).map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|c| (0..rows).map(|r| joint[r * cols + c]).sum())
        .collect();
    let mut mi = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let p = joint[r * cols + c];
            if p > 0.0 {
                mi += p * (p / (row_sums[r] * col_sums[c])).log2();
            }
        }
    }
    mi
}

/// Observation grid: `resolution` cells per symbol unit, aligned to integers.
fn deviation_cells(params: &ChannelParams, resolution: usize) -> Vec<f64> {
    let m = params.m().get() as usize;
    let g = m * resolution;
    let h = 1.0 / resolution as f64;
    (0..g)
        .map(|i| params.deviation_mass(i as f64 * h, (i + 1) as f64 * h))
        .collect()
}

/// `I(J; J')` for a uniformly distributed sent symbol, with `J'` quantized to
/// `resolution` cells per symbol.
pub fn symbol_mutual_info(params: &ChannelParams, resolution: usize) -> Result<f64> {
    if resolution == 0 {
        return Err(Error::InvalidParameter(
            "resolution must be at least 1".into(),
        ));
    }
    let m = params.m().get() as usize;
    let g = m * resolution;
    let cells = deviation_cells(params, resolution);
    let mut joint = vec![0.0; m * g];
    for j in 0..m {
        for c in 0..g {
            joint[j * g + c] = cells[(c + g - j * resolution) % g] / m as f64;
        }
    }
    Ok(mutual_info_from_joint(&joint, m, g))
}

/// Small cipher instance for exact enumeration: every non-zero seed of the
/// LFSR described by `taps` is a candidate key.
#[derive(Debug, Clone)]
pub struct ToySystem {
    pub taps: Taps,
    pub params: ChannelParams,
    pub prior: MessagePrior,
    pub plaintext_known: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ExactMiOptions {
    pub n_symbols: usize,
    /// Observation cells per symbol unit.
    pub resolution: usize,
    /// Upper bound on enumerated (observation cell × hypothesis) pairs.
    pub budget: u128,
}

impl Default for ExactMiOptions {
    fn default() -> Self {
        Self {
            n_symbols: 1,
            resolution: 4,
            budget: 1 << 32,
        }
    }
}

/// Exact key leakage for the αη toy system and for the additive cipher
/// driven by the same LFSR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactMi {
    pub alpha_eta_bits: f64,
    pub additive_bits: f64,
    pub key_bits: usize,
    pub n_symbols: usize,
    pub distinct_basis_tuples: usize,
}

pub const MAX_EXACT_KEY_BITS: usize = 16;

/// Enumerates every key, message and quantized observation to compute
/// `I(K; J'_1..J'_n)`, conditioned on the message when it is known.
pub fn exact_key_mutual_info(system: &ToySystem, opts: &ExactMiOptions) -> Result<ExactMi> {
    let l = system.taps.len();
    if l > MAX_EXACT_KEY_BITS {
        return Err(Error::Infeasible {
            required: 1u128 << l,
            budget: 1u128 << MAX_EXACT_KEY_BITS,
        });
    }
    if opts.resolution == 0 {
        return Err(Error::InvalidParameter(
            "resolution must be at least 1".into(),
        ));
    }
    let n = opts.n_symbols;
    let m = system.params.m();
    let keys = 1u64 << l;

    // Key -> (basis tuple, keystream bits); keys sharing a basis tuple are
    // indistinguishable through the channel.
    let mut tuples: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    let mut streams = Vec::with_capacity(keys as usize - 1);
    for value in 1..keys {
        let key = SecretKey::from_value(value, l)?;
        let mut gen = KeystreamGenerator::new(&key, &system.taps)?;
        let t: Vec<u32> = (0..n).map(|_| gen.next_basis(m).value()).collect();
        *tuples.entry(t).or_default() += 1;
        let mut additive = KeystreamGenerator::new(&key, &system.taps)?;
        streams.push(additive.next_bits(n));
    }
    let messages = system.prior.support(n);
    let g = m.get() as u128 * opts.resolution as u128;
    let cells_total = g.checked_pow(n as u32).unwrap_or(u128::MAX);
    let contexts = if system.plaintext_known {
        messages.len() as u128
    } else {
        1
    };
    let required = cells_total
        .saturating_mul(tuples.len() as u128)
        .saturating_mul(contexts);
    if required > opts.budget {
        return Err(Error::Infeasible {
            required,
            budget: opts.budget,
        });
    }

    let alpha_eta_bits = alpha_eta_key_info(system, opts, &tuples, &messages, keys - 1);
    let additive_bits = additive_key_info(&streams, &messages, system.plaintext_known, n);
    Ok(ExactMi {
        alpha_eta_bits,
        additive_bits,
        key_bits: l,
        n_symbols: n,
        distinct_basis_tuples: tuples.len(),
    })
}

fn alpha_eta_key_info(
    system: &ToySystem,
    opts: &ExactMiOptions,
    tuples: &BTreeMap<Vec<u32>, u64>,
    messages: &[Vec<bool>],
    key_count: u64,
) -> f64 {
    let n = opts.n_symbols;
    if n == 0 {
        return 0.0;
    }
    let m = system.params.m();
    let res = opts.resolution;
    let g = m.get() as usize * res;
    let cells = deviation_cells(&system.params, res);
    let weights: Vec<f64> = tuples
        .values()
        .map(|&c| c as f64 / key_count as f64)
        .collect();
    let bases: Vec<&Vec<u32>> = tuples.keys().collect();
    let sym = |t: u32, b: bool| -> usize {
        let k = crate::keystream::BasisIndex::new(t, m).unwrap();
        encode_symbol(k, b, m).unwrap().value() as usize * res
    };
    // offset[T][q][b] = grid offset of the symbol sent for basis T[q], bit b.
    let offsets: Vec<Vec<[usize; 2]>> = bases
        .iter()
        .map(|t| t.iter().map(|&k| [sym(k, false), sym(k, true)]).collect())
        .collect();
    let p_cell = |c: usize, off: usize| cells[(c + g - off) % g];
    let r = system.prior.block_len();

    // Likelihood of one observation cell tuple under hypothesis T, either
    // for a fixed message or mixed over the prior.
    let likelihood = |obs: &[usize], off: &[[usize; 2]], msg: Option<&[bool]>| -> f64 {
        match msg {
            Some(bits) => obs
                .iter()
                .zip(off)
                .zip(bits)
                .map(|((&c, o), &b)| p_cell(c, o[b as usize]))
                .product(),
            None => (0..n)
                .step_by(r)
                .map(|start| {
                    let end = (start + r).min(n);
                    let block = |b: usize| -> f64 {
                        (start..end).map(|q| p_cell(obs[q], off[q][b])).product()
                    };
                    0.5 * (block(0) + block(1))
                })
                .product(),
        }
    };

    let info_for = |msg: Option<&[bool]>| -> f64 {
        let total = g.pow(n as u32);
        let mut obs = vec![0usize; n];
        let mut cond = vec![0.0; offsets.len()];
        let mut mi = 0.0;
        for idx in 0..total {
            let mut rest = idx;
            for o in obs.iter_mut().rev() {
                *o = rest % g;
                rest /= g;
            }
            let mut marginal = 0.0;
            for (slot, off) in cond.iter_mut().zip(&offsets) {
                *slot = likelihood(&obs, off, msg);
            }
            for (&p, &w) in cond.iter().zip(&weights) {
                marginal += w * p;
            }
            if marginal <= 0.0 {
                continue;
            }
            for (&p, &w) in cond.iter().zip(&weights) {
                if p > 0.0 && p != marginal {
                    mi += w * p * (p / marginal).log2();
                }
            }
        }
        mi
    };

    if system.plaintext_known {
        messages.iter().map(|msg| info_for(Some(msg))).sum::<f64>() / messages.len() as f64
    } else {
        info_for(None)
    }
}

/// Exact `I(K; C_1..C_n)` for the additive cipher alone, where `C` is `n`
/// ciphertext bits of the LFSR keystream XOR a message drawn from `prior`.
pub fn additive_key_mutual_info(
    taps: &Taps,
    prior: MessagePrior,
    plaintext_known: bool,
    n: usize,
) -> Result<f64> {
    let l = taps.len();
    let required = (1u128 << l.min(127)).saturating_mul(1u128 << n.min(127));
    if l > MAX_EXACT_KEY_BITS || n > 20 || required > 1 << 30 {
        return Err(Error::Infeasible {
            required,
            budget: 1 << 30,
        });
    }
    let streams = (1..1u64 << l)
        .map(|value| {
            let key = SecretKey::from_value(value, l)?;
            Ok(KeystreamGenerator::new(&key, taps)?.next_bits(n))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(additive_key_info(
        &streams,
        &prior.support(n),
        plaintext_known,
        n,
    ))
}

fn additive_key_info(
    streams: &[Vec<bool>],
    messages: &[Vec<bool>],
    plaintext_known: bool,
    n: usize,
) -> f64 {
    let cols = 1usize << n;
    let pack = |bits: &[bool]| bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    let packed: Vec<usize> = messages.iter().map(|m| pack(m)).collect();
    let table = |msgs: &[usize]| {
        let mut counts = vec![0u64; streams.len() * cols];
        for (row, ks) in streams.iter().enumerate() {
            let ks = pack(ks);
            let counts = &mut counts[row * cols..(row + 1) * cols];
            for &msg in msgs {
                counts[ks ^ msg] += 1;
            }
        }
        mutual_info_from_counts(&counts, streams.len(), cols)
    };
    if plaintext_known {
        packed
            .iter()
            .map(|msg| table(std::slice::from_ref(msg)))
            .sum::<f64>()
            / messages.len() as f64
    } else {
        table(&packed)
    }
}
