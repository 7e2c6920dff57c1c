//! Built-in experiment configs.

use super::config::ConfigFile;

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub toml: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "paper-example",
        summary: "4400-bit key, N = 40000, eta = 0.1, M = 4096: gain, U and unicity distance with a Monte-Carlo cross-check",
        toml: r#"
scenario = "unicity"
seed = 1

[channel]
m = 4096
n = 40000
eta = 0.1

[key]
bits = 4400

[info]
monte_carlo_trials = 100000
"#,
    },
    Preset {
        name: "eta-bob",
        summary: "Bob's efficiency as the product 0.1 * 0.5 * 0.8",
        toml: r#"
scenario = "unicity"
seed = 1

[channel]
m = 4096
n = 40000
eta_factors = [0.1, 0.5, 0.8]

[key]
bits = 4400
"#,
    },
    Preset {
        name: "alpha-300",
        summary: "alpha = 2 sqrt(eta N) = 300: the attack bound g/U",
        toml: r#"
scenario = "unicity"
seed = 1

[channel]
m = 4096
n = 22500
eta = 1.0

[key]
bits = 4400
"#,
    },
    Preset {
        name: "info-sweep",
        summary: "Monte-Carlo information gain at the worked example and at sigma = 4, 8, 16 (M = 4096)",
        toml: r#"
scenario = "info_gain"
seed = 1
trials = 100000

[channel]
m = 4096
n = 40000
eta = 0.1

[info]
sigma_sweep = [4.0, 8.0, 16.0]
"#,
    },
    Preset {
        name: "bob-ber",
        summary: "Bob's and Eve's bit error rates at M = 64, sigma = M/16 over 10^6 symbols",
        toml: r#"
scenario = "ber"
seed = 1
trials = 1000000

[channel]
m = 64
sigma = 4.0

[key]
bits = 16
hex = "ace1"
"#,
    },
    Preset {
        name: "attack-toy",
        summary: "exhaustive Bayesian key ranking, M = 16, sigma = 1.5, g = 6..12, known plaintext",
        toml: r#"
scenario = "attack_sweep"
seed = 1
trials = 100

[channel]
m = 16
sigma = 1.5

[attack]
g = [6, 8, 10, 12]
plaintext_known = true
success_threshold = 0.99
budget_factor = 4.0
"#,
    },
    Preset {
        name: "dsr-noiseless",
        summary: "DSR: exact leakage without noise, Bob's BER at fiber efficiencies, repetition-code attack",
        toml: r#"
scenario = "dsr"
seed = 1
trials = 200000

[channel]
m = 4096
n = 40000
eta_factors = [0.1, 0.5, 0.8]
dsr = true

[eve]
eta = 0.1

[key]
bits = 16
hex = "ace1"

[exact]
key_bits = 8
m = 16
sigma = 1.5
n_symbols = 3
repeat = 3
attack_symbols = 60
attack_trials = 100
"#,
    },
    Preset {
        name: "additive-baseline",
        summary: "additive stream cipher: zero key leakage without plaintext, seed recovery from L known bits",
        toml: r#"
scenario = "additive_baseline"
seed = 1
trials = 1024

[channel]
m = 16
sigma = 1.5

[key]
bits = 12
hex = "b5d"

[exact]
key_bits = 12
m = 16
sigma = 1.5
n_symbols = 2
additive_bits = 16
"#,
    },
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.name)
}

pub fn preset(name: &str) -> Option<ConfigFile> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .map(|p| ConfigFile::from_toml(p.toml).expect("built-in presets parse"))
}
