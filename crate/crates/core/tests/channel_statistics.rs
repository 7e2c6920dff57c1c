//! Sampling statistics of the phase channel.

use alphaeta::channel::{wrap_centered, ChannelParams};
use alphaeta::protocol::{SymbolCount, SymbolIndex};
use alphaeta::seeding::{stream, Role};

const DRAWS: usize = 1_000_000;

fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Asymptotic Kolmogorov survival function with the small-sample correction
/// `(√n + 0.12 + 0.11/√n) D`.
fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_statistic_uniform(mut xs: Vec<f64>, lo: f64, hi: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = (x - lo) / (hi - lo);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[test]
fn kolmogorov_p_value_reference_points() {
    // Critical values of the limiting distribution.
    assert!((ks_p_value(1.3581 / 1e4, 100_000_000) - 0.05).abs() < 1e-3);
    assert!((ks_p_value(1.6276 / 1e4, 100_000_000) - 0.01).abs() < 1e-3);
}

#[test]
fn wrapped_deviation_sd_matches_sigma() {
    let m = SymbolCount::new(4096).unwrap();
    for params in [
        ChannelParams::new(m, 40000.0, 0.1).unwrap(),
        ChannelParams::from_sigma(m, 16.0).unwrap(),
    ] {
        let mut rng = stream(11, Role::EveNoise, 0);
        let j = SymbolIndex::new(4000, m).unwrap();
        let devs: Vec<f64> = (0..DRAWS)
            .map(|_| wrap_centered(params.transmit(j, &mut rng) - 4000.0, 4096.0))
            .collect();
        let (mean, sd) = mean_and_sd(&devs);
        let rel = (sd - params.sigma()).abs() / params.sigma();
        assert!(rel < 0.005, "sd {sd} vs sigma {}", params.sigma());
        assert!(
            mean.abs() < 5.0 * params.sigma() / (DRAWS as f64).sqrt(),
            "mean {mean}"
        );
    }
}

#[test]
fn dsr_offsets_are_uniform_on_the_half_circle() {
    let m = SymbolCount::new(4096).unwrap();
    let params = ChannelParams::from_sigma(m, 5.0).unwrap().with_dsr(true);
    let mut rng = stream(5, Role::Dsr, 0);
    let n = 200_000;
    let betas: Vec<f64> = (0..n)
        .map(|_| params.draw_offset(&mut rng).unwrap())
        .collect();
    assert!(betas.iter().all(|&b| (-1024.0..1024.0).contains(&b)));
    let d = ks_statistic_uniform(betas, -1024.0, 1024.0);
    let p = ks_p_value(d, n);
    assert!(p > 0.01, "KS D = {d}, p = {p}");

    // With sigma-zero DSR the received deviation is exactly β.
    let mut rng = stream(6, Role::Dsr, 0);
    let j = SymbolIndex::new(7, m).unwrap();
    let devs: Vec<f64> = (0..n)
        .map(|_| wrap_centered(params.transmit(j, &mut rng) - 7.0, 4096.0))
        .collect();
    let p = ks_p_value(ks_statistic_uniform(devs, -1024.0, 1024.0), n);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn bob_and_eve_noise_is_uncorrelated() {
    let m = SymbolCount::new(256).unwrap();
    let params = ChannelParams::from_sigma(m, 3.0).unwrap().with_dsr(false);
    let mut dsr = stream(9, Role::Dsr, 0);
    let mut bob = stream(9, Role::BobNoise, 0);
    let mut eve = stream(9, Role::EveNoise, 0);
    let n = 200_000;
    let (mut xb, mut xe) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let phase = 100.0 + params.draw_offset(&mut dsr).unwrap();
        xb.push(wrap_centered(
            params.observe(phase, &mut bob) - phase,
            256.0,
        ));
        xe.push(wrap_centered(
            params.observe(phase, &mut eve) - phase,
            256.0,
        ));
    }
    let (mb, sb) = mean_and_sd(&xb);
    let (me, se) = mean_and_sd(&xe);
    let cov = xb
        .iter()
        .zip(&xe)
        .map(|(a, b)| (a - mb) * (b - me))
        .sum::<f64>()
        / (n as f64 - 1.0);
    let corr = cov / (sb * se);
    assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "corr {corr}");
}
