//! Experiment configuration: built-in presets, structured-text files and
//! command-line overrides, applied in that order.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adversary::{plan_attack_fraction, AttackStrategy};
use crate::channel::ChannelConfig;
use crate::protocol::{Mode, OrderingPolicy, ProtocolError, Scheme, SessionConfig};

use super::HarnessError;

const PRESETS: [(&str, &str); 7] = [
    ("honest", include_str!("../../presets/honest.toml")),
    (
        "opaque-vulnerable",
        include_str!("../../presets/opaque-vulnerable.toml"),
    ),
    ("opaque-no-cheat", include_str!("../../presets/opaque-no-cheat.toml")),
    (
        "opaque-sifting-classical",
        include_str!("../../presets/opaque-sifting-classical.toml"),
    ),
    (
        "opaque-sifting-state-sharing",
        include_str!("../../presets/opaque-sifting-state-sharing.toml"),
    ),
    ("hardened", include_str!("../../presets/hardened.toml")),
    ("hbb", include_str!("../../presets/hbb.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Passive,
    OpaqueDeferred,
    EarlyBell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlannedTag {
    #[serde(rename = "planned")]
    Planned,
}

/// Either a fixed attack fraction or the largest one the loss budget allows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FractionSpec {
    Fixed(f64),
    Planned(PlannedTag),
}

impl Default for FractionSpec {
    fn default() -> Self {
        FractionSpec::Planned(PlannedTag::Planned)
    }
}

fn default_cheating() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    #[serde(default)]
    pub attack_fraction: FractionSpec,
    #[serde(default = "default_cheating")]
    pub cheating: bool,
}

impl Default for StrategySpec {
    fn default() -> Self {
        Self {
            kind: StrategyKind::Passive,
            attack_fraction: FractionSpec::default(),
            cheating: true,
        }
    }
}

impl StrategySpec {
    /// Concrete strategy for a channel; a planned fraction is resolved with
    /// [`plan_attack_fraction`].
    pub fn resolve(&self, channel: &ChannelConfig) -> AttackStrategy {
        let f = match self.attack_fraction {
            FractionSpec::Fixed(f) => f,
            FractionSpec::Planned(_) => plan_attack_fraction(channel),
        };
        match self.kind {
            StrategyKind::Passive => AttackStrategy::Passive,
            StrategyKind::OpaqueDeferred => AttackStrategy::OpaqueDeferred {
                attack_fraction: f,
                cheating: self.cheating,
            },
            StrategyKind::EarlyBell => AttackStrategy::EarlyBell { attack_fraction: f },
        }
    }
}

/// A fully specified experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub session: SessionConfig,
    pub strategy: StrategySpec,
    pub repetitions: u32,
    /// Sweep axis for `sweep`.
    pub eta_prime_list: Vec<f64>,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            session: SessionConfig::default(),
            strategy: StrategySpec::default(),
            repetitions: 1,
            eta_prime_list: Vec::new(),
            out: None,
            format: ReportFormat::Json,
        }
    }
}

/// Partial configuration; every present field replaces the current value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverlay {
    pub name: Option<String>,
    pub mode: Option<Mode>,
    pub scheme: Option<Scheme>,
    pub rounds: Option<u64>,
    pub test_fraction: Option<f64>,
    pub ordering: Option<OrderingPolicy>,
    pub eta: Option<f64>,
    pub eta_prime: Option<f64>,
    pub error_threshold: Option<f64>,
    pub efficiency_tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub repetitions: Option<u32>,
    pub strategy: Option<StrategySpec>,
    pub eta_prime_list: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub format: Option<ReportFormat>,
}

impl ConfigOverlay {
    pub fn parse(text: &str, source: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Parse {
            origin: source.to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn apply(&self, c: &mut ExperimentConfig) {
        macro_rules! set {
            ($src:ident => $($dst:tt)+) => {
                if let Some(v) = self.$src.clone() {
                    c.$($dst)+ = v;
                }
            };
        }
        set!(name => name);
        set!(mode => session.mode);
        set!(scheme => session.scheme);
        set!(rounds => session.rounds);
        set!(test_fraction => session.test_fraction);
        set!(ordering => session.ordering);
        set!(eta => session.channel.eta);
        set!(eta_prime => session.channel.eta_prime);
        set!(error_threshold => session.error_threshold);
        set!(efficiency_tolerance => session.efficiency_tolerance);
        set!(seed => session.seed);
        set!(repetitions => repetitions);
        set!(strategy => strategy);
        set!(eta_prime_list => eta_prime_list);
        if let Some(out) = &self.out {
            c.out = Some(out.clone());
        }
        set!(format => format);
    }
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self, HarnessError> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| HarnessError::UnknownPreset(name.to_string()))?;
        let mut c = ExperimentConfig::default();
        ConfigOverlay::parse(text, name)?.apply(&mut c);
        Ok(c)
    }

    pub fn strategy(&self) -> AttackStrategy {
        self.strategy.resolve(&self.session.channel)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.session.validate().map_err(|e| match e {
            ProtocolError::Config { field, message } => HarnessError::Config {
                field: field.to_string(),
                message,
            },
            other => HarnessError::Protocol(other),
        })?;
        if self.repetitions < 1 {
            return Err(HarnessError::config("repetitions", "must be at least 1"));
        }
        if let Some(v) = self.eta_prime_list.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(HarnessError::config("eta_prime_list", format!("{v} is not in [0, 1]")));
        }
        if let FractionSpec::Fixed(f) = self.strategy.attack_fraction {
            if !(0.0..=1.0).contains(&f) {
                return Err(HarnessError::config("attack_fraction", format!("{f} is not in [0, 1]")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_loads_and_validates() {
        for name in preset_names() {
            let c = ExperimentConfig::preset(name).unwrap();
            assert_eq!(c.name, name);
            c.validate().unwrap();
        }
    }

    #[test]
    fn planned_fraction_resolves_from_channel() {
        let c = ExperimentConfig::preset("hardened").unwrap();
        match c.strategy() {
            AttackStrategy::OpaqueDeferred {
                attack_fraction,
                cheating,
            } => {
                assert!((attack_fraction - 0.5).abs() < 1e-12);
                assert!(cheating);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_preset_is_reported() {
        assert!(matches!(
            ExperimentConfig::preset("nope"),
            Err(HarnessError::UnknownPreset(_))
        ));
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        assert!(matches!(
            ConfigOverlay::parse("etta = 0.3", "inline"),
            Err(HarnessError::Parse { .. })
        ));
    }

    #[test]
    fn invalid_values_name_the_field() {
        let mut c = ExperimentConfig::default();
        ConfigOverlay::parse("test_fraction = 1.5", "inline")
            .unwrap()
            .apply(&mut c);
        match c.validate() {
            Err(HarnessError::Config { field, .. }) => assert_eq!(field, "test_fraction"),
            other => panic!("unexpected {other:?}"),
        }
        let c = ExperimentConfig {
            repetitions: 0,
            ..ExperimentConfig::default()
        };
        assert!(matches!(c.validate(), Err(HarnessError::Config { field, .. }) if field == "repetitions"));
    }

    #[test]
    fn overlay_overrides_preset() {
        let mut c = ExperimentConfig::preset("honest").unwrap();
        ConfigOverlay::parse("eta = 0.4\nrounds = 10", "inline")
            .unwrap()
            .apply(&mut c);
        assert_eq!(c.session.channel.eta, 0.4);
        assert_eq!(c.session.rounds, 10);
        assert_eq!(c.session.test_fraction, 0.25);
    }
}
