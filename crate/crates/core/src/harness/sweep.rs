//! Sweep of the replacement-channel efficiency against the planned attack
//! fraction `min(1, 2(η′−η)/η′)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::plan_attack_fraction;
use crate::channel::ChannelConfig;

use super::config::{ExperimentConfig, FractionSpec, PlannedTag, StrategyKind, StrategySpec};
use super::experiment::{run_experiment, SessionReport};
use super::HarnessError;

/// Allowed gap between measured and planned attack fraction.
pub const PE_TOLERANCE: f64 = 0.02;
/// Allowed gap between observed efficiencies and the honest η.
pub const EFFICIENCY_PIN: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eta_prime: f64,
    pub formula: f64,
    pub measured: f64,
    pub difference: f64,
    pub within_tolerance: bool,
    pub efficiency_pinned: bool,
    pub report: SessionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub eta_prime: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub eta: f64,
    pub points: Vec<SweepPoint>,
    pub skipped: Vec<SkippedPoint>,
    pub pass: bool,
}

impl SweepResult {
    pub fn reports(&self) -> Vec<SessionReport> {
        self.points.iter().map(|p| p.report.clone()).collect()
    }
}

/// Runs `base` once per η′ with the opaque attack at its planned fraction.
pub fn sweep_pe(base: &ExperimentConfig, eta_primes: &[f64]) -> Result<SweepResult, HarnessError> {
    base.validate()?;
    let eta = base.session.channel.eta;
    let mut skipped = Vec::new();
    let mut configs = Vec::new();
    for &eta_prime in eta_primes {
        if !(0.0..=1.0).contains(&eta_prime) {
            return Err(HarnessError::config(
                "eta_prime_list",
                format!("{eta_prime} is not in [0, 1]"),
            ));
        }
        if eta_prime < eta {
            skipped.push(SkippedPoint {
                eta_prime,
                note: format!("η′ = {eta_prime} is below η = {eta}; attacking would only add loss"),
            });
            continue;
        }
        let mut c = base.clone();
        c.name = format!("{}@eta_prime={eta_prime}", base.name);
        c.session.channel.eta_prime = eta_prime;
        c.strategy = StrategySpec {
            kind: StrategyKind::OpaqueDeferred,
            attack_fraction: FractionSpec::Planned(PlannedTag::Planned),
            cheating: true,
        };
        configs.push(c);
    }
    let points: Vec<SweepPoint> = configs
        .par_iter()
        .map(|c| {
            let report = run_experiment(c)?;
            let channel = ChannelConfig {
                eta,
                eta_prime: c.session.channel.eta_prime,
            };
            let formula = plan_attack_fraction(&channel);
            let measured = report.attacked_fraction.value;
            let difference = measured - formula;
            let efficiency_pinned = (report.eff_bob.value - eta).abs() <= EFFICIENCY_PIN
                && (report.eff_charlie.value - eta).abs() <= EFFICIENCY_PIN;
            Ok(SweepPoint {
                eta_prime: channel.eta_prime,
                formula,
                measured,
                difference,
                within_tolerance: difference.abs() <= PE_TOLERANCE,
                efficiency_pinned,
                report,
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    let pass = points.iter().all(|p| p.within_tolerance && p.efficiency_pinned);
    Ok(SweepResult {
        eta,
        points,
        skipped,
        pass,
    })
}
