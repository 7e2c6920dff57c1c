//! Experiment configuration files.
//!
//! Configs are TOML. A minimal file names a scenario and a channel:
//!
//! ```toml
//! scenario = "unicity"
//! seed = 7
//!
//! [channel]
//! m = 4096
//! n = 40000
//! eta = 0.1
//!
//! [key]
//! bits = 4400
//! ```
//!
//! `eta` may be replaced by `eta_factors = [..]` (multiplied together) and
//! `n`/`eta` by `sigma` (which fixes η = 1). See the README for every table.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::channel::{compose_eta, ChannelParams};
use crate::error::{Error, Result};
use crate::keystream::{SecretKey, Taps};
use crate::protocol::{MessagePrior, SymbolCount};
use crate::seeding::{self, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Ber,
    InfoGain,
    Unicity,
    AttackSweep,
    Dsr,
    AdditiveBaseline,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Ber => "ber",
            Scenario::InfoGain => "info_gain",
            Scenario::Unicity => "unicity",
            Scenario::AttackSweep => "attack_sweep",
            Scenario::Dsr => "dsr",
            Scenario::AdditiveBaseline => "additive_baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub m: u64,
    pub n: Option<f64>,
    pub eta: Option<f64>,
    pub eta_factors: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    #[serde(default)]
    pub dsr: bool,
    #[serde(default)]
    pub dsr_sigma_zero: bool,
}

/// Eve's receiver, when it differs from Bob's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EveSection {
    pub eta: Option<f64>,
    pub eta_factors: Option<Vec<f64>>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct KeySection {
    pub bits: usize,
    pub hex: Option<String>,
    pub taps: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    #[default]
    Random,
    Zeros,
    File,
    Repetition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MessageSection {
    #[serde(default)]
    pub source: MessageKind,
    pub path: Option<PathBuf>,
    pub repeat: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSection {
    pub g: Vec<usize>,
    #[serde(default = "default_true")]
    pub plaintext_known: bool,
    #[serde(default = "default_threshold")]
    pub success_threshold: f64,
    /// Symbol budget as a multiple of `g / U`.
    pub budget_factor: Option<f64>,
    pub symbol_budget: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InfoSection {
    /// Symbols for the Monte-Carlo gain cross-check; 0 skips it.
    #[serde(default)]
    pub monte_carlo_trials: u64,
    #[serde(default)]
    pub sigma_sweep: Vec<f64>,
}

/// Toy system for the exact-enumeration oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSection {
    pub key_bits: usize,
    pub m: u64,
    pub sigma: f64,
    #[serde(default = "default_one")]
    pub n_symbols: usize,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Repetition factor for the redundancy experiment under DSR.
    pub repeat: Option<usize>,
    /// Symbols fed to the DSR repetition attack.
    pub attack_symbols: Option<usize>,
    /// Trials of the DSR repetition attack.
    pub attack_trials: Option<usize>,
    /// Ciphertext bits for the additive-cipher leakage; defaults to `key_bits`.
    pub additive_bits: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

/// Raw, deserialized config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    pub channel: ChannelSection,
    pub eve: Option<EveSection>,
    pub key: Option<KeySection>,
    #[serde(default)]
    pub message: MessageSection,
    pub attack: Option<AttackSection>,
    #[serde(default)]
    pub info: InfoSection,
    pub exact: Option<ExactSection>,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_true() -> bool {
    true
}

fn default_threshold() -> f64 {
    0.99
}

fn default_one() -> usize {
    1
}

fn default_resolution() -> usize {
    4
}

fn default_trials() -> u64 {
    1000
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every invariant and resolves derived values.
    pub fn validate(&self) -> Result<ExperimentConfig> {
        let channel = channel_params(&self.channel)?;
        let eve = match &self.eve {
            Some(e) => eve_params(&channel, e)?,
            None => channel,
        };
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let key = self
            .key
            .as_ref()
            .map(|k| resolve_key(k, self.seed))
            .transpose()?;
        let message = self.message_plan()?;

        let needs = |what: &str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "scenario `{}` requires {what}",
                    self.scenario.name()
                )))
            }
        };
        match self.scenario {
            Scenario::Unicity => needs("a [key] table", key.is_some())?,
            Scenario::Ber => needs("a [key] table", key.is_some())?,
            Scenario::AttackSweep => {
                needs("an [attack] table", self.attack.is_some())?;
                let attack = self.attack.as_ref().unwrap();
                if attack.g.is_empty() {
                    return Err(Error::Config(
                        "attack.g must list at least one key size".into(),
                    ));
                }
                if !(attack.success_threshold > 0.0 && attack.success_threshold < 1.0) {
                    return Err(Error::Config(format!(
                        "attack.success_threshold must lie in (0, 1), got {}",
                        attack.success_threshold
                    )));
                }
            }
            Scenario::Dsr => {
                needs("channel.dsr = true", channel.dsr())?;
                needs("an [exact] table", self.exact.is_some())?;
                needs("a [key] table", key.is_some())?;
            }
            Scenario::AdditiveBaseline => {
                needs("a [key] table", key.is_some())?;
                needs("an [exact] table", self.exact.is_some())?;
            }
            Scenario::InfoGain => {}
        }
        if let Some(exact) = &self.exact {
            SymbolCount::new(exact.m)?;
            if exact.key_bits == 0 || exact.key_bits > crate::infotheory::MAX_EXACT_KEY_BITS {
                return Err(Error::Config(format!(
                    "exact.key_bits must lie in 1..={}",
                    crate::infotheory::MAX_EXACT_KEY_BITS
                )));
            }
            if !(exact.sigma > 0.0) {
                return Err(Error::Config("exact.sigma must be positive".into()));
            }
        }
        Ok(ExperimentConfig {
            raw: self.clone(),
            channel,
            eve,
            key,
            message,
        })
    }

    fn message_plan(&self) -> Result<MessagePlan> {
        Ok(match self.message.source {
            MessageKind::Random => MessagePlan::Random(MessagePrior::Uniform),
            MessageKind::Repetition => {
                let r = self.message.repeat.unwrap_or(0);
                if r == 0 {
                    return Err(Error::Config(
                        "message.repeat must be at least 1 for a repetition source".into(),
                    ));
                }
                MessagePlan::Random(MessagePrior::Repetition(r))
            }
            MessageKind::Zeros => MessagePlan::Zeros,
            MessageKind::File => {
                let path = self.message.path.clone().ok_or_else(|| {
                    Error::Config("message.path is required for a file source".into())
                })?;
                MessagePlan::File(path)
            }
        })
    }
}

fn channel_params(c: &ChannelSection) -> Result<ChannelParams> {
    let m = SymbolCount::new(c.m).map_err(|e| Error::Config(format!("channel.m: {e}")))?;
    let params = match c.sigma {
        Some(sigma) => {
            if c.n.is_some() || c.eta.is_some() || c.eta_factors.is_some() {
                return Err(Error::Config(
                    "channel.sigma cannot be combined with n/eta/eta_factors".into(),
                ));
            }
            ChannelParams::from_sigma(m, sigma)
        }
        None => {
            let n = c.n.ok_or_else(|| {
                Error::Config("channel.n (mean photon number) is required".into())
            })?;
            let eta = resolve_eta(c.eta, c.eta_factors.as_deref(), "channel")?;
            ChannelParams::new(m, n, eta)
        }
    }
    .map_err(|e| Error::Config(format!("channel: {e}")))?;
    Ok(if c.dsr {
        params.with_dsr(c.dsr_sigma_zero)
    } else {
        params
    })
}

fn eve_params(bob: &ChannelParams, e: &EveSection) -> Result<ChannelParams> {
    let params = match e.sigma {
        Some(sigma) => ChannelParams::from_sigma(bob.m(), sigma),
        None => {
            let eta = resolve_eta(e.eta, e.eta_factors.as_deref(), "eve")?;
            ChannelParams::new(bob.m(), bob.photons(), eta)
        }
    }
    .map_err(|err| Error::Config(format!("eve: {err}")))?;
    Ok(if bob.dsr() {
        params.with_dsr(bob.dsr_sigma_zero())
    } else {
        params
    })
}

fn resolve_eta(eta: Option<f64>, factors: Option<&[f64]>, table: &str) -> Result<f64> {
    match (eta, factors) {
        (Some(_), Some(_)) => Err(Error::Config(format!(
            "{table}: give either eta or eta_factors, not both"
        ))),
        (Some(eta), None) => {
            if eta > 0.0 && eta <= 1.0 {
                Ok(eta)
            } else {
                Err(Error::Config(format!(
                    "{table}.eta = {eta} violates 0 < eta <= 1"
                )))
            }
        }
        (None, Some(f)) => {
            compose_eta(f).map_err(|e| Error::Config(format!("{table}.eta_factors: {e}")))
        }
        (None, None) => Ok(1.0),
    }
}

fn resolve_key(k: &KeySection, seed: u64) -> Result<ResolvedKey> {
    if k.bits == 0 {
        return Err(Error::Config("key.bits must be at least 1".into()));
    }
    let taps = match &k.taps {
        Some(t) => Some(Taps::new(t, k.bits).map_err(|e| Error::Config(format!("key.taps: {e}")))?),
        None => Taps::primitive(k.bits),
    };
    let key = match &k.hex {
        Some(hex) => {
            SecretKey::from_hex(hex, k.bits).map_err(|e| Error::Config(format!("key.hex: {e}")))?
        }
        None => SecretKey::random(&mut seeding::stream(seed, Role::Key, 0), k.bits)?,
    };
    if key.is_zero() {
        return Err(Error::Config(
            "key.hex: all-zero key is a degenerate LFSR seed".into(),
        ));
    }
    Ok(ResolvedKey { key, taps })
}

#[derive(Debug, Clone)]
pub struct ResolvedKey {
    pub key: SecretKey,
    /// `None` when no taps were given and no built-in table covers the length.
    pub taps: Option<Taps>,
}

impl ResolvedKey {
    pub fn taps(&self) -> Result<&Taps> {
        self.taps.as_ref().ok_or_else(|| {
            Error::Config(format!(
                "key.taps is required for a {}-bit register (built-in taps cover 1..=24 bits)",
                self.key.len()
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MessagePlan {
    Random(MessagePrior),
    Zeros,
    File(PathBuf),
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub raw: ConfigFile,
    pub channel: ChannelParams,
    pub eve: ChannelParams,
    pub key: Option<ResolvedKey>,
    pub message: MessagePlan,
}

impl ExperimentConfig {
    pub fn scenario(&self) -> Scenario {
        self.raw.scenario
    }

    pub fn seed(&self) -> u64 {
        self.raw.seed
    }

    pub fn trials(&self) -> u64 {
        self.raw.trials
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
scenario = "unicity"
seed = 3
[channel]
m = 4096
n = 40000
eta = 0.1
[key]
bits = 4400
"#;

    #[test]
    fn parses_minimal_unicity_config() {
        let cfg = ConfigFile::from_toml(BASE).unwrap().validate().unwrap();
        assert_eq!(cfg.scenario(), Scenario::Unicity);
        assert!((cfg.channel.eta() - 0.1).abs() < 1e-15);
        assert_eq!(cfg.key.as_ref().unwrap().key.len(), 4400);
        assert!(cfg.key.as_ref().unwrap().taps().is_err());
    }

    #[test]
    fn eta_factors_compose() {
        let text = BASE.replace("eta = 0.1", "eta_factors = [0.1, 0.5, 0.8]");
        let cfg = ConfigFile::from_toml(&text).unwrap().validate().unwrap();
        assert!((cfg.channel.eta() - 0.04).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_eta_names_the_invariant() {
        let text = BASE.replace("eta = 0.1", "eta = 1.5");
        let err = ConfigFile::from_toml(&text)
            .unwrap()
            .validate()
            .unwrap_err();
        assert!(err.to_string().contains("0 < eta <= 1"), "{err}");
    }

    #[test]
    fn unknown_fields_and_scenarios_rejected() {
        assert!(ConfigFile::from_toml(&format!("{BASE}\nbogus = 1")).is_err());
        assert!(ConfigFile::from_toml(&BASE.replace("unicity", "teleport")).is_err());
    }

    #[test]
    fn scenario_requirements() {
        let text = BASE.replace("unicity", "attack_sweep");
        let err = ConfigFile::from_toml(&text)
            .unwrap()
            .validate()
            .unwrap_err();
        assert!(err.to_string().contains("[attack]"));
        let text = BASE.replace("unicity", "dsr");
        assert!(ConfigFile::from_toml(&text).unwrap().validate().is_err());
    }

    #[test]
    fn sigma_shortcut_is_exclusive() {
        let text = BASE.replace("eta = 0.1", "eta = 0.1\nsigma = 2.0");
        assert!(ConfigFile::from_toml(&text).unwrap().validate().is_err());
        let text = BASE.replace("n = 40000\neta = 0.1", "sigma = 2.0");
        let cfg = ConfigFile::from_toml(&text).unwrap().validate().unwrap();
        assert!((cfg.channel.sigma() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn random_key_is_seeded() {
        let a = ConfigFile::from_toml(BASE).unwrap().validate().unwrap();
        let b = ConfigFile::from_toml(BASE).unwrap().validate().unwrap();
        assert_eq!(a.key.unwrap().key, b.key.unwrap().key);
    }

    #[test]
    fn toml_round_trip() {
        let raw = ConfigFile::from_toml(BASE).unwrap();
        assert_eq!(ConfigFile::from_toml(&raw.to_toml()).unwrap(), raw);
    }
}
