//! Experiment runner: validated configs in, reports out.
//!
//! [`run`] dispatches one scenario and returns an [`ExperimentReport`]. The
//! report's CSV body ([`ExperimentReport::to_csv`]) carries only the metric
//! table, so two runs of the same config and seed produce identical bytes;
//! the JSON form adds the config echo, provenance and scenario details.

mod config;
mod presets;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::attack::{self, AttackConfig, AttackReport, KeySpace};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::infotheory::{
    self, BerReport, Estimate, ExactMi, ExactMiOptions, InfoReport, ToySystem,
};
use crate::keystream::{SecretKey, Taps};
use crate::protocol::{self, MessagePrior, SymbolCount};
use crate::seeding::{self, Role};

pub use config::{
    AttackSection, ChannelSection, ConfigFile, EveSection, ExactSection, ExperimentConfig,
    InfoSection, KeySection, MessageKind, MessagePlan, MessageSection, OutputFormat, OutputSection,
    ResolvedKey, Scenario,
};
pub use presets::{preset, preset_names, PRESETS};

pub const SCHEMA_VERSION: u32 = 1;

/// Directory used for reports when no `--output` path is given.
pub const OUTPUT_DIR_ENV: &str = "ALPHAETA_OUTPUT_DIR";

/// Budget for exact enumeration, in (observation cell × hypothesis) pairs.
const EXACT_BUDGET: u128 = 1 << 34;

/// One row of the metric table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub parameter: String,
    pub estimate: f64,
    pub analytic: Option<f64>,
    pub stderr: Option<f64>,
}

impl Metric {
    fn exact(parameter: impl Into<String>, value: f64) -> Self {
        Self {
            parameter: parameter.into(),
            estimate: value,
            analytic: Some(value),
            stderr: None,
        }
    }

    fn measured(parameter: impl Into<String>, e: Estimate) -> Self {
        Self {
            parameter: parameter.into(),
            estimate: e.estimate,
            analytic: e.analytic,
            stderr: Some(e.stderr),
        }
    }

    fn plain(parameter: impl Into<String>, estimate: f64, analytic: Option<f64>) -> Self {
        Self {
            parameter: parameter.into(),
            estimate,
            analytic,
            stderr: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub generator: &'static str,
    pub timestamp_unix: u64,
}

/// Values derived from the config during validation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub channel: ChannelParams,
    pub sigma: f64,
    pub alpha: f64,
    pub eve: ChannelParams,
    pub eve_sigma: f64,
    pub key_bits: Option<usize>,
    pub key_hex: Option<String>,
    pub taps: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainPoint {
    pub sigma: f64,
    pub gain: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Details {
    Unicity {
        info: InfoReport,
        monte_carlo_gain: Option<Estimate>,
    },
    InfoGain {
        points: Vec<GainPoint>,
    },
    Ber {
        ber: BerReport,
    },
    AttackSweep {
        reports: Vec<AttackReport>,
        median_fit: Option<LinearFit>,
    },
    Dsr {
        exact: ExactMi,
        symbol_mutual_info: f64,
        ber: BerReport,
        repetition_attack: AttackReport,
    },
    AdditiveBaseline {
        exact: ExactMi,
        additive_key_mutual_info: f64,
        additive_ciphertext_bits: usize,
        recovered_key_hex: String,
        plaintext_bits_used: usize,
        regenerates_ciphertext: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub config: ConfigFile,
    pub resolved: Resolved,
    pub provenance: Provenance,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub metrics: Vec<Metric>,
    pub details: Details,
}

impl ExperimentReport {
    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.parameter == name)
    }

    /// Metric table as CSV: `parameter,estimate,analytic,stderr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,estimate,analytic,stderr\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for m in &self.metrics {
            out.push_str(&format!(
                "{},{},{},{}\n",
                m.parameter,
                m.estimate,
                opt(m.analytic),
                opt(m.stderr)
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }

    /// Attack reports carried by this experiment, for trajectory export.
    pub fn attack_reports(&self) -> Vec<&AttackReport> {
        match &self.details {
            Details::AttackSweep { reports, .. } => reports.iter().collect(),
            Details::Dsr {
                repetition_attack, ..
            } => vec![repetition_attack],
            _ => Vec::new(),
        }
    }
}

/// Per-trial key-posterior entropy as CSV: `trial,n,entropy_bits`.
pub fn write_entropy_trajectory_csv<W: Write>(mut out: W, report: &AttackReport) -> Result<()> {
    writeln!(out, "trial,n,entropy_bits")?;
    for t in &report.trials {
        for (n, h) in t.entropy_trajectory.iter().enumerate() {
            writeln!(out, "{},{},{}", t.trial, n, h)?;
        }
    }
    Ok(())
}

/// Where a report goes when no explicit path is given.
pub fn default_output_path(scenario: Scenario, format: OutputFormat) -> Option<PathBuf> {
    let dir = std::env::var_os(OUTPUT_DIR_ENV)?;
    let ext = match format {
        OutputFormat::Json => "json",
        OutputFormat::Csv => "csv",
    };
    Some(Path::new(&dir).join(format!("{}.{ext}", scenario.name())))
}

/// Ordinary least squares of `ys` on `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Runs a validated experiment.
///
/// `progress` receives human-readable status lines; pass a no-op closure to
/// silence it.
pub fn run(config: &ExperimentConfig, progress: &mut dyn FnMut(&str)) -> Result<ExperimentReport> {
    let mut ctx = Context {
        config,
        warnings: Vec::new(),
        notes: Vec::new(),
        metrics: Vec::new(),
    };
    for params in [&config.channel, &config.eve] {
        if let Some(w) = params.regime_warning() {
            if !ctx.warnings.contains(&w) {
                ctx.warnings.push(w);
            }
        }
    }
    progress(&format!(
        "running scenario `{}` (seed {})",
        config.scenario().name(),
        config.seed()
    ));
    let details = match config.scenario() {
        Scenario::Unicity => ctx.unicity(progress)?,
        Scenario::InfoGain => ctx.info_gain(progress)?,
        Scenario::Ber => ctx.ber(progress)?,
        Scenario::AttackSweep => ctx.attack_sweep(progress)?,
        Scenario::Dsr => ctx.dsr(progress)?,
        Scenario::AdditiveBaseline => ctx.additive_baseline(progress)?,
    };
    for w in &ctx.warnings {
        progress(&format!("warning: {w}"));
    }

    let key = config.key.as_ref();
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        scenario: config.scenario(),
        config: config.raw.clone(),
        resolved: Resolved {
            channel: config.channel,
            sigma: config.channel.sigma(),
            alpha: config.channel.alpha(),
            eve: config.eve,
            eve_sigma: config.eve.sigma(),
            key_bits: key.map(|k| k.key.len()),
            key_hex: key.map(|k| k.key.to_hex()),
            taps: key
                .and_then(|k| k.taps.as_ref())
                .map(|t| t.positions().to_vec()),
        },
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seed: config.seed(),
            generator: seeding::GENERATOR_NAME,
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        },
        warnings: ctx.warnings,
        notes: ctx.notes,
        metrics: ctx.metrics,
        details,
    })
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    warnings: Vec<String>,
    notes: Vec<String>,
    metrics: Vec<Metric>,
}

impl Context<'_> {
    fn seed(&self) -> u64 {
        self.config.seed()
    }

    fn key(&self) -> Result<&ResolvedKey> {
        self.config
            .key
            .as_ref()
            .ok_or_else(|| Error::Config("a [key] table is required".into()))
    }

    fn exact(&self) -> Result<&ExactSection> {
        self.config
            .raw
            .exact
            .as_ref()
            .ok_or_else(|| Error::Config("an [exact] table is required".into()))
    }

    fn random_prior(&self, purpose: &str) -> Result<MessagePrior> {
        match &self.config.message {
            MessagePlan::Random(prior) => Ok(*prior),
            _ => Err(Error::Config(format!(
                "{purpose} needs a random message source (random or repetition)"
            ))),
        }
    }

    /// `count` message bits according to the configured source.
    fn message_bits(&self, count: usize) -> Result<Vec<bool>> {
        Ok(match &self.config.message {
            MessagePlan::Random(prior) => {
                prior.sample(count, &mut seeding::stream(self.seed(), Role::Message, 0))
            }
            MessagePlan::Zeros => vec![false; count],
            MessagePlan::File(path) => {
                let bytes = std::fs::read(path).map_err(|e| {
                    Error::Config(format!("cannot read message file {}: {e}", path.display()))
                })?;
                let mut bits = protocol::bytes_to_bits(&bytes);
                if bits.is_empty() {
                    return Err(Error::Config(format!(
                        "message file {} is empty",
                        path.display()
                    )));
                }
                bits.truncate(count);
                bits
            }
        })
    }

    fn channel_rows(&mut self) {
        let c = &self.config.channel;
        self.metrics.push(Metric::exact("m", c.m().as_f64()));
        self.metrics.push(Metric::exact("photons", c.photons()));
        self.metrics.push(Metric::exact("eta", c.eta()));
        self.metrics.push(Metric::exact("sigma", c.sigma()));
        self.metrics.push(Metric::exact("alpha", c.alpha()));
    }

    fn unicity(&mut self, progress: &mut dyn FnMut(&str)) -> Result<Details> {
        let key_bits = self.key()?.key.len();
        let params = self.config.channel;
        let info = infotheory::key_rate_and_unicity(&params, key_bits)?;
        let mc_trials = self.config.raw.info.monte_carlo_trials;
        let monte_carlo_gain = if mc_trials > 0 {
            progress(&format!(
                "Monte-Carlo gain cross-check over {mc_trials} symbols"
            ));
            Some(infotheory::monte_carlo_info_gain(
                &params,
                mc_trials,
                self.seed(),
            )?)
        } else {
            None
        };

        self.channel_rows();
        self.metrics
            .push(Metric::exact("key_bits", key_bits as f64));
        self.metrics.push(Metric::exact("h0", info.h0));
        self.metrics.push(Metric::exact("h1", info.h1));
        self.metrics
            .push(Metric::exact("gain_per_symbol", info.gain_per_symbol));
        if let Some(mc) = monte_carlo_gain {
            self.metrics
                .push(Metric::measured("gain_per_symbol_monte_carlo", mc));
        }
        self.metrics.push(Metric::plain(
            "gain_per_symbol_approx",
            info.gain_approx,
            Some(info.gain_per_symbol),
        ));
        self.metrics.push(Metric::exact(
            "key_gain_per_symbol",
            info.key_gain_per_symbol,
        ));
        if let Some(n0) = info.unicity {
            self.metrics.push(Metric::exact("unicity_symbols", n0));
        } else {
            self.warnings
                .push("key gain per symbol is zero: unicity distance is unbounded".into());
        }
        self.notes.push(
            "the per-symbol gain and U do not depend on M: sigma scales with M, so M/sigma = 4*pi*sqrt(eta*N)"
                .into(),
        );
        self.notes.push(format!(
            "attack bound: S0 >> g/U = g/{:.4} (g/{:.4} with known plaintext)",
            info.key_gain_per_symbol,
            info.key_gain_per_symbol + 1.0
        ));
        Ok(Details::Unicity {
            info,
            monte_carlo_gain,
        })
    }

    fn info_gain(&mut self, progress: &mut dyn FnMut(&str)) -> Result<Details> {
        let trials = self.config.trials();
        let base = self.config.channel;
        let mut channels = vec![base];
        for &sigma in &self.config.raw.info.sigma_sweep {
            let p = ChannelParams::from_sigma(base.m(), sigma)
                .map_err(|e| Error::Config(format!("info.sigma_sweep: {e}")))?;
            if let Some(w) = p.regime_warning() {
                self.warnings.push(w);
            }
            channels.push(p);
        }
        self.channel_rows();
        let mut points = Vec::new();
        for (i, params) in channels.iter().enumerate() {
            progress(&format!(
                "Monte-Carlo gain at sigma = {:.4} over {trials} symbols",
                params.sigma()
            ));
            let gain = infotheory::monte_carlo_info_gain(
                params,
                trials,
                self.seed().wrapping_add(i as u64),
            )?;
            let name = if i == 0 {
                "gain_per_symbol".to_string()
            } else {
                format!("gain_per_symbol.sigma_{}", params.sigma())
            };
            self.metrics.push(Metric::measured(name, gain));
            points.push(GainPoint {
                sigma: params.sigma(),
                gain,
            });
        }
        Ok(Details::InfoGain { points })
    }

    fn ber_report(&self, trials: u64, progress: &mut dyn FnMut(&str)) -> Result<BerReport> {
        let key = self.key()?;
        let taps = key.taps()?;
        progress(&format!("simulating {trials} symbols for Bob and Eve"));
        let (bob, eve) = (&self.config.channel, &self.config.eve);
        match &self.config.message {
            MessagePlan::Random(prior) => {
                infotheory::ber_curves(bob, eve, &key.key, taps, *prior, trials, self.seed())
            }
            _ => {
                let message = self.message_bits(trials as usize)?;
                infotheory::ber_curves_for_message(bob, eve, &key.key, taps, &message, self.seed())
            }
        }
    }

    fn ber_rows(&mut self, ber: &BerReport) {
        self.metrics
            .push(Metric::exact("eve_eta", self.config.eve.eta()));
        self.metrics
            .push(Metric::exact("eve_sigma", self.config.eve.sigma()));
        self.metrics
            .push(Metric::exact("symbols", ber.trials as f64));
        self.metrics.push(Metric::measured("bob_ber", ber.bob));
        self.metrics.push(Metric::measured("eve_ber", ber.eve));
    }

    fn ber(&mut self, progress: &mut dyn FnMut(&str)) -> Result<Details> {
        let ber = self.ber_report(self.config.trials(), progress)?;
        self.channel_rows();
        self.ber_rows(&ber);
        Ok(Details::Ber { ber })
    }

    fn attack_sweep(&mut self, progress: &mut dyn FnMut(&str)) -> Result<Details> {
        let section = self
            .config
            .raw
            .attack
            .clone()
            .ok_or_else(|| Error::Config("an [attack] table is required".into()))?;
        let params = self.config.channel;
        let prior = self.random_prior("the attack sweep")?;
        let u = infotheory::key_rate_and_unicity(&params, 1)?.key_gain_per_symbol;
        let trials = usize::try_from(self.config.trials())
            .map_err(|_| Error::Config("trials does not fit in memory".into()))?;

        self.channel_rows();
        self.metrics.push(Metric::exact("key_gain_per_symbol", u));
        let mut reports = Vec::new();
        for &g in &section.g {
            let taps = match &self.config.key {
                Some(k) if k.key.len() == g && k.taps.is_some() => k.taps.clone().unwrap(),
                _ => Taps::primitive(g).ok_or_else(|| {
                    Error::Config(format!("no built-in taps for a {g}-bit register"))
                })?,
            };
            let symbol_budget = match (section.symbol_budget, section.budget_factor) {
                (Some(b), _) => b,
                (None, factor) => {
                    if u <= 0.0 {
                        return Err(Error::Config(
                            "U is zero at this channel; give attack.symbol_budget explicitly"
                                .into(),
                        ));
                    }
                    (factor.unwrap_or(4.0) * g as f64 / u).ceil() as usize
                }
            };
            let config = AttackConfig {
                taps,
                key_space: KeySpace::all_nonzero(g)?,
                params,
                prior,
                plaintext_known: section.plaintext_known,
                trials,
                success_threshold: section.success_threshold,
                symbol_budget,
                seed: self.seed(),
            };
            progress(&format!(
                "attacking g = {g}: {trials} trials, budget {symbol_budget} symbols"
            ));
            let report = attack::measure_s0(&config)?;
            self.attack_rows(&report, &format!("g{g}"));
            reports.push(report);
        }

        let (xs, ys): (Vec<f64>, Vec<f64>) = reports
            .iter()
            .filter_map(|r| r.median_s0.map(|m| (r.g as f64, m)))
            .unzip();
        let median_fit = linear_fit(&xs, &ys);
        if let Some(fit) = &median_fit {
            self.metrics
                .push(Metric::plain("median_s0_fit.slope", fit.slope, None));
            self.metrics.push(Metric::plain(
                "median_s0_fit.intercept",
                fit.intercept,
                None,
            ));
            self.metrics.push(Metric::plain(
                "median_s0_fit.r_squared",
                fit.r_squared,
                None,
            ));
        }
        Ok(Details::AttackSweep {
            reports,
            median_fit,
        })
    }

    fn attack_rows(&mut self, report: &AttackReport, tag: &str) {
        let floor = if report.plaintext_known {
            report.bound_s0_known_plaintext
        } else {
            report.bound_s0
        };
        let s0: Vec<f64> = report
            .trials
            .iter()
            .filter_map(|t| t.s0.map(|s| s as f64))
            .collect();
        if let Some(median) = report.median_s0 {
            // Large-sample standard error of a median, from the sample spread.
            let n = s0.len() as f64;
            let mean = s0.iter().sum::<f64>() / n;
            let sd = if s0.len() > 1 {
                (s0.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            self.metrics.push(Metric {
                parameter: format!("median_s0.{tag}"),
                estimate: median,
                analytic: Some(floor),
                stderr: Some((std::f64::consts::PI / 2.0).sqrt() * sd / n.sqrt()),
            });
        }
        if let Some(min) = s0.iter().copied().reduce(f64::min) {
            self.metrics
                .push(Metric::plain(format!("min_s0.{tag}"), min, Some(floor)));
        }
        let below = s0.iter().filter(|&&s| s < floor).count();
        self.metrics.push(Metric::plain(
            format!("trials_below_bound.{tag}"),
            below as f64,
            Some(0.0),
        ));
        let n = report.trials.len() as f64;
        let p = report.success_rate;
        self.metrics.push(Metric {
            parameter: format!("success_rate.{tag}"),
            estimate: p,
            analytic: None,
            stderr: Some((p * (1.0 - p) / n).sqrt()),
        });
        self.metrics.push(Metric::plain(
            format!("ties_flagged.{tag}"),
            report.ties_flagged as f64,
            None,
        ));
        if report.ties_flagged > 0 {
            self.warnings.push(format!(
                "{tag}: {} trials had equal-likelihood ties at S0 (broken by smallest key value)",
                report.ties_flagged
            ));
        }
        if below > 0 {
            self.warnings.push(format!(
                "{tag}: {below} recovered trials finished below the information floor {floor:.3}"
            ));
        }
    }

    fn toy_channel(&self, exact: &ExactSection) -> Result<ChannelParams> {
        let m = SymbolCount::new(exact.m).map_err(|e| Error::Config(format!("exact.m: {e}")))?;
        ChannelParams::from_sigma(m, exact.sigma)
            .map_err(|e| Error::Config(format!("exact.sigma: {e}")))
    }

    fn toy_taps(&self, exact: &ExactSection) -> Result<Taps> {
        Taps::primitive(exact.key_bits).ok_or_else(|| {
            Error::Config(format!(
                "no built-in taps for a {}-bit register",
                exact.key_bits
            ))
        })
    }

    fn dsr(&mut self, progress: &mut dyn FnMut(&str)) -> Result<Details> {
        let exact = self.exact()?.clone();
        let toy = self.toy_channel(&exact)?;
        let taps = self.toy_taps(&exact)?;

        progress("exact enumeration with noiseless DSR");
        let noiseless = toy.with_dsr(true);
        let system = ToySystem {
            taps: taps.clone(),
            params: noiseless,
            prior: MessagePrior::Uniform,
            plaintext_known: false,
        };
        let opts = ExactMiOptions {
            n_symbols: exact.n_symbols,
            resolution: 1,
            budget: EXACT_BUDGET,
        };
        let exact_mi = infotheory::exact_key_mutual_info(&system, &opts).map_err(shrink_hint)?;
        let symbol_mi = infotheory::symbol_mutual_info(&noiseless, 1)?;

        let ber = self.ber_report(self.config.trials(), progress)?;

        let repeat = exact.repeat.unwrap_or(3);
        let budget = exact.attack_symbols.unwrap_or(20 * repeat);
        let attack_trials = exact.attack_trials.unwrap_or(100);
        let attack_config = AttackConfig {
            taps,
            key_space: KeySpace::all_nonzero(exact.key_bits)?,
            params: toy.with_dsr(false),
            prior: MessagePrior::Repetition(repeat),
            plaintext_known: false,
            trials: attack_trials,
            success_threshold: 0.99,
            symbol_budget: budget,
            seed: self.seed(),
        };
        progress(&format!(
            "repetition-code attack under DSR: {attack_trials} trials, {budget} symbols"
        ));
        let repetition_attack = attack::measure_s0(&attack_config)?;

        self.channel_rows();
        self.metrics.push(Metric::plain(
            "key_mutual_info_dsr_noiseless",
            exact_mi.alpha_eta_bits,
            Some(0.0),
        ));
        self.metrics.push(Metric::plain(
            "symbol_mutual_info_dsr_noiseless",
            symbol_mi,
            Some(1.0),
        ));
        self.ber_rows(&ber);
        let trajectory = &repetition_attack.mean_entropy_trajectory;
        let boundaries: Vec<f64> = trajectory.iter().step_by(repeat).copied().collect();
        for (i, h) in boundaries.iter().enumerate() {
            self.metrics.push(Metric::plain(
                format!("repetition.mean_entropy.n{}", i * repeat),
                *h,
                None,
            ));
        }
        let min_drop = boundaries
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min);
        self.metrics.push(Metric::plain(
            "repetition.min_block_entropy_drop",
            min_drop,
            None,
        ));
        self.metrics.push(Metric::plain(
            "repetition.success_rate",
            repetition_attack.success_rate,
            None,
        ));
        self.notes.push(
            "Bob's BER under DSR is an order-of-magnitude check; it depends on the assumed receiver efficiencies"
                .into(),
        );
        Ok(Details::Dsr {
            exact: exact_mi,
            symbol_mutual_info: symbol_mi,
            ber,
            repetition_attack,
        })
    }

    fn additive_baseline(&mut self, progress: &mut dyn FnMut(&str)) -> Result<Details> {
        let exact = self.exact()?.clone();
        let toy = self.toy_channel(&exact)?;
        let system = ToySystem {
            taps: self.toy_taps(&exact)?,
            params: toy,
            prior: MessagePrior::Uniform,
            plaintext_known: false,
        };
        progress(&format!(
            "exact enumeration over {} key bits and {} symbols",
            exact.key_bits, exact.n_symbols
        ));
        let opts = ExactMiOptions {
            n_symbols: exact.n_symbols,
            resolution: exact.resolution,
            budget: EXACT_BUDGET,
        };
        let exact_mi = infotheory::exact_key_mutual_info(&system, &opts).map_err(shrink_hint)?;
        let additive_bits = exact.additive_bits.unwrap_or(exact.key_bits);
        let additive_mi = infotheory::additive_key_mutual_info(
            &system.taps,
            MessagePrior::Uniform,
            false,
            additive_bits,
        )
        .map_err(shrink_hint)?;

        let key = self.key()?.clone();
        let taps = key.taps()?.clone();
        let l = key.key.len();
        let total = (self.config.trials() as usize).max(l);
        let plaintext = self.message_bits(total)?;
        if plaintext.len() < l {
            return Err(Error::Config(format!(
                "the message supplies {} bits; the known-plaintext attack needs {l}",
                plaintext.len()
            )));
        }
        let ciphertext = protocol::additive_stream(&key.key, &taps, &plaintext)?;
        progress(&format!("known-plaintext attack from {l} bits"));
        let recovered: SecretKey =
            attack::known_plaintext_attack_additive(&ciphertext[..l], &plaintext[..l], &taps)?;
        let regenerates = protocol::additive_stream(&recovered, &taps, &plaintext)? == ciphertext;

        self.metrics
            .push(Metric::exact("exact.key_bits", exact.key_bits as f64));
        self.metrics
            .push(Metric::exact("exact.n_symbols", exact.n_symbols as f64));
        self.metrics.push(Metric::plain(
            "additive_key_mutual_info",
            additive_mi,
            Some(0.0),
        ));
        self.metrics.push(Metric::exact(
            "additive_ciphertext_bits",
            additive_bits as f64,
        ));
        self.metrics.push(Metric::plain(
            "additive_key_mutual_info.short",
            exact_mi.additive_bits,
            Some(0.0),
        ));
        self.metrics.push(Metric::plain(
            "alpha_eta_key_mutual_info",
            exact_mi.alpha_eta_bits,
            None,
        ));
        self.metrics
            .push(Metric::exact("known_plaintext.key_bits", l as f64));
        self.metrics.push(Metric::plain(
            "known_plaintext.bits_used",
            l as f64,
            Some(l as f64),
        ));
        self.metrics.push(Metric::plain(
            "known_plaintext.recovered",
            (recovered == key.key) as u8 as f64,
            Some(1.0),
        ));
        self.metrics.push(Metric::plain(
            "known_plaintext.regenerates_ciphertext",
            regenerates as u8 as f64,
            Some(1.0),
        ));
        Ok(Details::AdditiveBaseline {
            exact: exact_mi,
            additive_key_mutual_info: additive_mi,
            additive_ciphertext_bits: additive_bits,
            recovered_key_hex: recovered.to_hex(),
            plaintext_bits_used: l,
            regenerates_ciphertext: regenerates,
        })
    }
}

fn shrink_hint(e: Error) -> Error {
    match e {
        Error::Infeasible { required, budget } => Error::Config(format!(
            "exact enumeration needs {required} evaluations (budget {budget}); reduce exact.key_bits, exact.m or exact.n_symbols"
        )),
        other => other,
    }
}
