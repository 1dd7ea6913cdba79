//! Runs repetitions of a session and summarizes them.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::AttackStrategy;
use crate::protocol::{
    ratio, simulate_rounds, CheckReport, Mode, OrderingPolicy, Scheme, SessionConfig, Tally, Verdict,
};

use super::config::ExperimentConfig;
use super::stats::{wilson, Interval};
use super::HarnessError;

/// Seed of repetition `index`. Repetition 0 uses the root seed itself, so a
/// single-repetition experiment reproduces `run_session` with that seed.
pub fn repetition_seed(root: u64, index: u32) -> u64 {
    if index == 0 {
        return root;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    // Stream ids from the top of the range never collide with round ids.
    rng.set_stream(u64::MAX - u64::from(index));
    rng.next_u64()
}

/// A binomial rate with its counts and 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub value: f64,
    pub successes: u64,
    pub trials: u64,
    pub ci: Interval,
}

impl Rate {
    pub fn new(successes: u64, trials: u64) -> Self {
        Self {
            value: ratio(successes, trials),
            successes,
            trials,
            ci: wilson(successes, trials),
        }
    }
}

/// Aggregated statistics of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub scenario: String,
    pub scheme: Scheme,
    pub mode: Mode,
    pub ordering: OrderingPolicy,
    pub strategy: AttackStrategy,
    pub eta: f64,
    pub eta_prime: f64,
    /// Rounds per repetition.
    pub rounds: u64,
    pub repetitions: u32,
    pub seed: u64,
    /// Pooled test error rate (entangled tests and product-state legs).
    pub error_rate: Rate,
    pub bob_leg_error_rate: Option<Rate>,
    pub charlie_leg_error_rate: Option<Rate>,
    /// Error rate on attacked test rounds with correlated bases.
    pub attacked_error_rate: Rate,
    /// Charlie-leg error rate on attacked product-state test rounds.
    pub attacked_charlie_leg_error_rate: Rate,
    pub eff_bob: Rate,
    pub eff_charlie: Rate,
    pub sift_rate: Rate,
    /// Sifted non-test rounds, i.e. distilled key length.
    pub key_length: u64,
    /// Share of sifted key bits with `K_A = K_B ⊕ K_C`.
    pub key_agreement: Rate,
    /// Share of sifted key rounds on which Bob learned both Alice's and
    /// Charlie's bit: the measured P_e. In state-sharing mode, the share of
    /// message rounds Bob intercepted.
    pub attacked_fraction: Rate,
    pub planned_fraction: f64,
    pub ka_acc: Option<f64>,
    pub kc_acc: Option<f64>,
    /// Uncorrectable Bell outcomes among attacked test rounds Bob swapped.
    pub bad_bell_fraction: Rate,
    /// Loss claims among attacked test rounds Bob swapped.
    pub declared_loss_fraction: Rate,
    pub attacked_message_rounds: u64,
    pub message_pairs_held: u64,
    pub message_pairs_faithful: u64,
    pub verdict: Verdict,
    pub tally: Tally,
}

impl SessionReport {
    pub fn from_tally(config: &ExperimentConfig, strategy: AttackStrategy, t: &Tally) -> Self {
        let check = CheckReport::from_tally(t, &config.session);
        let (err_k, err_n) = t.test_error_counts();
        let legs = t.has_product_legs();
        let acc = |k: u64| (t.recovered_key_rounds > 0).then(|| ratio(k, t.recovered_key_rounds));
        Self {
            scenario: config.name.clone(),
            scheme: config.session.scheme,
            mode: config.session.mode,
            ordering: config.session.ordering,
            strategy,
            eta: config.session.channel.eta,
            eta_prime: config.session.channel.eta_prime,
            rounds: config.session.rounds,
            repetitions: config.repetitions,
            seed: config.session.seed,
            error_rate: Rate::new(err_k, err_n),
            bob_leg_error_rate: legs.then(|| Rate::new(t.bob_leg_errors, t.bob_leg_checked)),
            charlie_leg_error_rate: legs.then(|| Rate::new(t.charlie_leg_errors, t.charlie_leg_checked)),
            attacked_error_rate: Rate::new(t.attacked_test_errors, t.attacked_test_checked),
            attacked_charlie_leg_error_rate: Rate::new(t.attacked_charlie_leg_errors, t.attacked_charlie_leg_checked),
            eff_bob: Rate::new(t.bob_detected, t.detection_slots),
            eff_charlie: Rate::new(t.charlie_detected, t.detection_slots),
            sift_rate: Rate::new(t.correlated, t.both_detected),
            key_length: t.sifted_key_rounds,
            key_agreement: Rate::new(t.key_agreements, t.sifted_key_rounds),
            attacked_fraction: match config.session.mode {
                Mode::ClassicalKey => Rate::new(t.recovered_key_rounds, t.sifted_key_rounds),
                Mode::StateSharing => Rate::new(t.attacked_message_rounds, t.message_rounds),
            },
            planned_fraction: strategy.attack_fraction(),
            ka_acc: acc(t.recovered_alice_correct),
            kc_acc: acc(t.recovered_charlie_correct),
            bad_bell_fraction: Rate::new(t.attacked_test_bad_bell, t.attacked_test_bell),
            declared_loss_fraction: Rate::new(t.attacked_test_declared_loss, t.attacked_test_bell),
            attacked_message_rounds: t.attacked_message_rounds,
            message_pairs_held: t.message_pairs_held,
            message_pairs_faithful: t.message_pairs_faithful,
            verdict: check.verdict,
            tally: *t,
        }
    }
}

/// Tally of one session without keeping its transcript.
pub fn session_tally(config: &SessionConfig, strategy: &AttackStrategy) -> Result<Tally, HarnessError> {
    let family = config.scheme.family();
    let mut tally = Tally::default();
    simulate_rounds(config, strategy, |r| tally.add_round(family, &r))?;
    Ok(tally)
}

/// Runs all repetitions (in parallel) and merges their tallies in
/// repetition order, so the result does not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<SessionReport, HarnessError> {
    config.validate()?;
    let strategy = config.strategy();
    strategy.validate()?;
    let tallies: Vec<Tally> = (0..config.repetitions)
        .into_par_iter()
        .map(|i| {
            let session = SessionConfig {
                seed: repetition_seed(config.session.seed, i),
                ..config.session.clone()
            };
            session_tally(&session, &strategy)
        })
        .collect::<Result<_, _>>()?;
    let mut total = Tally::default();
    for t in tallies {
        total += t;
    }
    if total.test_rounds == 0 {
        return Err(HarnessError::Protocol(crate::protocol::ProtocolError::NoTestRounds));
    }
    Ok(SessionReport::from_tally(config, strategy, &total))
}
