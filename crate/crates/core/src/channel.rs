//! Classical phase-noise channel.
//!
//! The receiver sees `j' = (j + w) mod M` with `w ~ Normal(0, σ²)` and
//! `σ = M / (4π √(ηN))`. Deliberate signal randomization adds a uniform
//! offset `β ∈ [-M/4, M/4)` before the noise: `j' = (j + w + β) mod M`.
//! Noise is wrapped, never truncated, and `j'` stays real-valued.

use std::f64::consts::{PI, SQRT_2};

use libm::{erf, erfc};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{SymbolCount, SymbolIndex};

/// Thresholds for the `M ≫ σ ≫ 1` regime check. Outside it the Gaussian
/// information-gain approximation is flagged, not refused.
pub const REGIME_MIN_SIGMA: f64 = 2.0;
pub const REGIME_MIN_M_OVER_SIGMA: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    m: SymbolCount,
    photons: f64,
    eta: f64,
    dsr: bool,
    dsr_sigma_zero: bool,
}

impl ChannelParams {
    pub fn new(m: SymbolCount, photons: f64, eta: f64) -> Result<Self> {
        if !(photons.is_finite() && photons > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mean photon number N must be positive, got {photons}"
            )));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "efficiency eta must lie in (0, 1], got {eta}"
            )));
        }
        Ok(Self {
            m,
            photons,
            eta,
            dsr: false,
            dsr_sigma_zero: false,
        })
    }

    /// Parameters realizing a given noise width, with η = 1 and
    /// `N = (M / 4πσ)²`.
    pub fn from_sigma(m: SymbolCount, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        let photons = (m.as_f64() / (4.0 * PI * sigma)).powi(2);
        Self::new(m, photons, 1.0)
    }

    /// Enables deliberate signal randomization. With `sigma_zero` the
    /// Gaussian term is suppressed and only the uniform offset remains.
    pub fn with_dsr(mut self, sigma_zero: bool) -> Self {
        self.dsr = true;
        self.dsr_sigma_zero = sigma_zero;
        self
    }

    pub fn with_eta(self, eta: f64) -> Result<Self> {
        let mut p = Self::new(self.m, self.photons, eta)?;
        p.dsr = self.dsr;
        p.dsr_sigma_zero = self.dsr_sigma_zero;
        Ok(p)
    }

    pub fn m(&self) -> SymbolCount {
        self.m
    }

    pub fn photons(&self) -> f64 {
        self.photons
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dsr(&self) -> bool {
        self.dsr
    }

    pub fn dsr_sigma_zero(&self) -> bool {
        self.dsr && self.dsr_sigma_zero
    }

    /// Effective photon number ηN.
    pub fn effective_photons(&self) -> f64 {
        self.eta * self.photons
    }

    /// Phase-noise standard deviation in symbol units.
    pub fn sigma(&self) -> f64 {
        self.m.as_f64() / (4.0 * PI * self.effective_photons().sqrt())
    }

    /// Width of the Gaussian term actually applied (zero when DSR
    /// suppresses it).
    pub fn applied_sigma(&self) -> f64 {
        if self.dsr_sigma_zero() {
            0.0
        } else {
            self.sigma()
        }
    }

    /// Coherent amplitude `α = 2√(ηN)`.
    pub fn alpha(&self) -> f64 {
        2.0 * self.effective_photons().sqrt()
    }

    pub fn in_analysis_regime(&self) -> bool {
        let s = self.sigma();
        s >= REGIME_MIN_SIGMA && self.m.as_f64() / s >= REGIME_MIN_M_OVER_SIGMA
    }

    /// Warning text when `M ≫ σ ≫ 1` does not hold.
    pub fn regime_warning(&self) -> Option<String> {
        (!self.in_analysis_regime()).then(|| {
            format!(
                "sigma = {:.4} with M = {} is outside the M >> sigma >> 1 regime \
                 (need sigma >= {REGIME_MIN_SIGMA} and M/sigma >= {REGIME_MIN_M_OVER_SIGMA}); \
                 closed-form information estimates are approximate",
                self.sigma(),
                self.m.get()
            )
        })
    }

    /// Density of the wrapped deviation `j' - j`, evaluated at `d` (any real;
    /// the density is periodic in `M`).
    pub fn deviation_density(&self, d: f64) -> f64 {
        let m = self.m.as_f64();
        let d = wrap_centered(d, m);
        let sigma = self.applied_sigma();
        match (self.dsr, sigma > 0.0) {
            (false, _) => wrapped_normal_density(d, sigma, m),
            (true, false) => {
                if (-m / 4.0..m / 4.0).contains(&d) {
                    2.0 / m
                } else {
                    0.0
                }
            }
            (true, true) => {
                let c = m / 4.0;
                let wraps = wrap_count(sigma + c, m);
                (-wraps..=wraps)
                    .map(|w| {
                        let x = d + w as f64 * m;
                        normal_cdf_diff((x - c) / sigma, (x + c) / sigma)
                    })
                    .sum::<f64>()
                    * 2.0
                    / m
            }
        }
    }

    /// Natural log of [`Self::deviation_density`], computed without underflow
    /// for narrow Gaussian noise.
    pub fn log_deviation_density(&self, d: f64) -> f64 {
        let m = self.m.as_f64();
        let sigma = self.applied_sigma();
        if self.dsr || sigma > m / 4.0 {
            return self.deviation_density(d).ln();
        }
        let d = wrap_centered(d, m);
        let exponents: Vec<f64> = (-3..=3)
            .map(|w| {
                let x = (d + w as f64 * m) / sigma;
                -0.5 * x * x
            })
            .collect();
        let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = exponents.iter().map(|e| (e - max).exp()).sum();
        max + sum.ln() - (sigma * (2.0 * PI).sqrt()).ln()
    }

    /// Probability that the wrapped deviation falls in `[a, b)` with
    /// `a <= b` and `b - a <= M`.
    pub fn deviation_mass(&self, a: f64, b: f64) -> f64 {
        let m = self.m.as_f64();
        let sigma = self.applied_sigma();
        match (self.dsr, sigma > 0.0) {
            (false, _) => {
                let wraps = wrap_count(sigma + (b - a).abs(), m);
                (-wraps..=wraps)
                    .map(|w| {
                        let shift = w as f64 * m;
                        normal_cdf_diff((a + shift) / sigma, (b + shift) / sigma)
                    })
                    .sum()
            }
            (true, false) => {
                let c = m / 4.0;
                (-1..=1)
                    .map(|w| {
                        let shift = w as f64 * m;
                        let lo = (a + shift).max(-c);
                        let hi = (b + shift).min(c);
                        (hi - lo).max(0.0)
                    })
                    .sum::<f64>()
                    * 2.0
                    / m
            }
            (true, true) => {
                // ∫ Φ(x) dx = xΦ(x) + φ(x).
                let c = m / 4.0;
                let g = |x: f64| x * normal_cdf(x) + normal_pdf(x);
                let wraps = wrap_count(sigma + c + (b - a).abs(), m);
                (-wraps..=wraps)
                    .map(|w| {
                        let shift = w as f64 * m;
                        let (a, b) = (a + shift, b + shift);
                        let upper = g((b + c) / sigma) - g((a + c) / sigma);
                        let lower = g((b - c) / sigma) - g((a - c) / sigma);
                        sigma * (upper - lower)
                    })
                    .sum::<f64>()
                    * 2.0
                    / m
            }
        }
    }

    /// Alice's randomization offset `β`, present only with DSR.
    pub fn draw_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        self.dsr.then(|| {
            let q = self.m.as_f64() / 4.0;
            rng.gen_range(-q..q)
        })
    }

    /// Receiver-side measurement of a sent phase: adds `w` and wraps.
    pub fn observe<R: Rng + ?Sized>(&self, phase: f64, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        wrap(phase + z * self.applied_sigma(), self.m.as_f64())
    }

    /// Draws one noise realization (`β` first, then `w`).
    pub fn draw_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> NoiseDraw {
        let beta = self.draw_offset(rng);
        let z: f64 = rng.sample(StandardNormal);
        NoiseDraw {
            w: z * self.applied_sigma(),
            beta,
        }
    }

    /// Sends symbol `j` through the channel.
    pub fn transmit<R: Rng + ?Sized>(&self, j: SymbolIndex, rng: &mut R) -> f64 {
        self.transmit_with_draw(j, rng).0
    }

    pub fn transmit_with_draw<R: Rng + ?Sized>(
        &self,
        j: SymbolIndex,
        rng: &mut R,
    ) -> (f64, NoiseDraw) {
        let draw = self.draw_noise(rng);
        let raw = j.value() as f64 + draw.w + draw.beta.unwrap_or(0.0);
        (wrap(raw, self.m.as_f64()), draw)
    }
}

/// Noise applied to a single symbol, in symbol units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseDraw {
    pub w: f64,
    pub beta: Option<f64>,
}

/// Product of efficiency factors, each in `(0, 1]`.
pub fn compose_eta(factors: &[f64]) -> Result<f64> {
    if let Some(bad) = factors.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "efficiency factor {bad} outside (0, 1]"
        )));
    }
    Ok(factors.iter().product())
}

/// Reduces `x` into `[0, m)`.
pub fn wrap(x: f64, m: f64) -> f64 {
    let r = x.rem_euclid(m);
    if r >= m {
        0.0
    } else {
        r
    }
}

/// Reduces `x` into `[-m/2, m/2)`.
pub fn wrap_centered(x: f64, m: f64) -> f64 {
    wrap(x + m / 2.0, m) - m / 2.0
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail `1 - Φ(x)`, accurate far into the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// `Φ(b) - Φ(a)` without cancellation in either tail.
pub fn normal_cdf_diff(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        normal_sf(a) - normal_sf(b)
    } else if b <= 0.0 {
        normal_cdf(b) - normal_cdf(a)
    } else {
        0.5 * (erf(b / SQRT_2) - erf(a / SQRT_2))
    }
}

/// Number of wraps on each side needed to cover `reach` (in units where
/// the Gaussian tails are negligible beyond 40 standard deviations).
fn wrap_count(reach: f64, m: f64) -> i64 {
    (((40.0 * reach) / m).ceil() as i64).clamp(3, 100_000)
}

fn wrapped_normal_density(d: f64, sigma: f64, m: f64) -> f64 {
    if sigma > m / 4.0 {
        // Fourier series converges quickly once the noise spans the circle.
        let mut acc = 1.0;
        for n in 1..64 {
            let n = n as f64;
            let coef = (-2.0 * (PI * n * sigma / m).powi(2)).exp();
            if coef < 1e-18 {
                break;
            }
            acc += 2.0 * coef * (2.0 * PI * n * d / m).cos();
        }
        return acc / m;
    }
    let wraps = wrap_count(sigma, m);
    (-wraps..=wraps)
        .map(|w| normal_pdf((d + w as f64 * m) / sigma))
        .sum::<f64>()
        / sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn m(v: u64) -> SymbolCount {
        SymbolCount::new(v).unwrap()
    }

    #[test]
    fn sigma_examples() {
        let p = ChannelParams::new(m(4096), 40_000.0, 0.1).unwrap();
        assert!((4.0 * PI * 4000f64.sqrt() - 794.7).abs() < 0.1);
        assert!((p.sigma() - 5.1537).abs() < 1e-3, "{}", p.sigma());

        let mm = m(64);
        let n = 64.0f64.powi(2) / (16.0 * PI * PI);
        let p = ChannelParams::new(mm, n, 1.0).unwrap();
        assert!((p.sigma() - 1.0).abs() < 1e-12);

        let a = ChannelParams::new(mm, 1000.0, 0.25).unwrap();
        let b = a.with_eta(0.5).unwrap();
        assert!((a.sigma() / b.sigma() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn from_sigma_round_trips() {
        let p = ChannelParams::from_sigma(m(16), 1.5).unwrap();
        assert!((p.sigma() - 1.5).abs() < 1e-12);
        assert_eq!(p.eta(), 1.0);
    }

    #[test]
    fn alpha_accessor() {
        let p = ChannelParams::new(m(4096), 22_500.0, 1.0).unwrap();
        assert!((p.alpha() - 300.0).abs() < 1e-12);
    }

    #[test]
    fn parameter_validation() {
        assert!(ChannelParams::new(m(16), 0.0, 0.5).is_err());
        assert!(ChannelParams::new(m(16), 10.0, 0.0).is_err());
        assert!(ChannelParams::new(m(16), 10.0, 1.5).is_err());
        assert!(ChannelParams::new(m(16), 10.0, 1.0).is_ok());
    }

    #[test]
    fn eta_composition() {
        assert!((compose_eta(&[0.1, 0.5, 0.8]).unwrap() - 0.04).abs() < 1e-15);
        assert_eq!(compose_eta(&[]).unwrap(), 1.0);
        assert_eq!(compose_eta(&[1.0, 0.37]).unwrap(), 0.37);
        assert!(compose_eta(&[0.5, 1.2]).is_err());
        assert!(compose_eta(&[0.0]).is_err());
    }

    #[test]
    fn regime_flag() {
        assert!(ChannelParams::new(m(4096), 40_000.0, 0.1)
            .unwrap()
            .in_analysis_regime());
        let toy = ChannelParams::from_sigma(m(16), 1.5).unwrap();
        assert!(!toy.in_analysis_regime());
        assert!(toy.regime_warning().is_some());
    }

    #[test]
    fn tiny_noise_rounds_back() {
        let p = ChannelParams::new(m(64), 1e12, 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for j in 0..64 {
            let jr = p.transmit(SymbolIndex::new(j, m(64)).unwrap(), &mut rng);
            assert_eq!(crate::protocol::round_symbol(jr, m(64)), j);
        }
    }

    #[test]
    fn seeded_transmission_is_reproducible() {
        let p = ChannelParams::new(m(256), 500.0, 0.3)
            .unwrap()
            .with_dsr(false);
        let run = || {
            let mut rng = ChaCha20Rng::seed_from_u64(99);
            (0..100)
                .map(|j| {
                    p.transmit(SymbolIndex::new(j, m(256)).unwrap(), &mut rng)
                        .to_bits()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn outputs_stay_on_the_circle() {
        let p = ChannelParams::from_sigma(m(8), 30.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let jr = p.transmit(SymbolIndex::new(7, m(8)).unwrap(), &mut rng);
            assert!((0.0..8.0).contains(&jr));
        }
        assert_eq!(wrap(-1e-18, 8.0), 0.0);
    }

    fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn densities_integrate_to_one() {
        let mm = m(16);
        for params in [
            ChannelParams::from_sigma(mm, 1.5).unwrap(),
            ChannelParams::from_sigma(mm, 40.0).unwrap(),
            ChannelParams::from_sigma(mm, 1.5).unwrap().with_dsr(false),
            ChannelParams::from_sigma(mm, 1.5).unwrap().with_dsr(true),
        ] {
            let total = integrate(|d| params.deviation_density(d), -8.0, 8.0, 16_000);
            assert!((total - 1.0).abs() < 1e-9, "{params:?}: {total}");
            assert!((params.deviation_mass(-8.0, 8.0) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mass_matches_density_integral() {
        let mm = m(16);
        for params in [
            ChannelParams::from_sigma(mm, 2.5).unwrap(),
            ChannelParams::from_sigma(mm, 2.5).unwrap().with_dsr(false),
            ChannelParams::from_sigma(mm, 2.5).unwrap().with_dsr(true),
        ] {
            for (a, b) in [(-0.5, 0.5), (3.5, 4.5), (-8.0, -2.0), (6.0, 9.0)] {
                let quad = integrate(|d| params.deviation_density(d), a, b, 24_000);
                let mass = params.deviation_mass(a, b);
                assert!((quad - mass).abs() < 1e-9, "{a}..{b}: {quad} vs {mass}");
            }
        }
    }

    #[test]
    fn fourier_and_image_sums_agree() {
        let mm = 32.0;
        let sigma = 8.01;
        for d in [-15.0, -3.3, 0.0, 7.7, 15.9] {
            let images: f64 = (-200..=200)
                .map(|w| normal_pdf((d + w as f64 * mm) / sigma))
                .sum::<f64>()
                / sigma;
            assert!((wrapped_normal_density(d, sigma, mm) - images).abs() < 1e-14);
        }
    }

    #[test]
    fn log_density_survives_underflow() {
        let p = ChannelParams::from_sigma(m(16), 0.05).unwrap();
        for d in [0.0, 0.3, -1.0, 1.5] {
            let direct = p.deviation_density(d).ln();
            assert!((p.log_deviation_density(d) - direct).abs() < 1e-9);
        }
        let far = p.log_deviation_density(8.0);
        assert!(far.is_finite() && far < -10_000.0);
        let dsr = ChannelParams::from_sigma(m(16), 1.0)
            .unwrap()
            .with_dsr(true);
        assert_eq!(dsr.log_deviation_density(6.0), f64::NEG_INFINITY);
    }

    #[test]
    fn cdf_difference_tails() {
        let v = normal_cdf_diff(-1.0, 1.0);
        assert!((v - 0.682_689_492_137_085_9).abs() < 1e-12, "{v:e}");
        let tail = normal_cdf_diff(30.0, 31.0);
        assert!(tail > 0.0 && tail < 1e-190);
        assert!((normal_sf(4.0) - 3.167_124_183_311_992e-5).abs() < 1e-18);
    }
}
