//! Collective eavesdropping check and key distillation.
//!
//! All statistics are kept as integer counts in a [`Tally`], so tallies from
//! independent sessions merge by plain addition in any order.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::qcore::{Family, TOLERANCE};

use super::convention::{correlated_bases, extract_bits};
use super::session::Transcript;
use super::types::{AliceChoice, RoundKind, RoundRecord, SessionConfig};
use super::ProtocolError;

/// Event counts over one or more sessions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub rounds: u64,
    pub test_rounds: u64,
    pub key_rounds: u64,
    pub message_rounds: u64,

    /// Rounds on which an agent publicly declared detection or loss.
    pub detection_slots: u64,
    pub bob_detected: u64,
    pub charlie_detected: u64,

    /// Entangled rounds with both detections, and those with correlated bases.
    pub both_detected: u64,
    pub correlated: u64,

    /// Entangled test rounds compared against Alice's state.
    pub test_checked: u64,
    pub test_errors: u64,
    pub attacked_test_checked: u64,
    pub attacked_test_errors: u64,

    /// Product-state test legs compared against Alice's leg states.
    pub bob_leg_checked: u64,
    pub bob_leg_errors: u64,
    pub charlie_leg_checked: u64,
    pub charlie_leg_errors: u64,
    pub attacked_charlie_leg_checked: u64,
    pub attacked_charlie_leg_errors: u64,

    /// Attacked test rounds on which Bob performed the Bell measurement.
    pub attacked_test_bell: u64,
    pub attacked_test_bad_bell: u64,
    pub attacked_test_declared_loss: u64,

    /// Non-test rounds that survive sifting.
    pub sifted_key_rounds: u64,
    /// Sifted key rounds where `K_A = K_B ⊕ K_C`.
    pub key_agreements: u64,
    pub attacked_key_rounds: u64,
    pub recovered_key_rounds: u64,
    pub recovered_alice_correct: u64,
    pub recovered_charlie_correct: u64,

    pub attacked_message_rounds: u64,
    pub message_pairs_held: u64,
    pub message_pairs_faithful: u64,
}

impl AddAssign for Tally {
    fn add_assign(&mut self, o: Tally) {
        macro_rules! add {
            ($($f:ident),* $(,)?) => { $( self.$f += o.$f; )* };
        }
        add!(
            rounds,
            test_rounds,
            key_rounds,
            message_rounds,
            detection_slots,
            bob_detected,
            charlie_detected,
            both_detected,
            correlated,
            test_checked,
            test_errors,
            attacked_test_checked,
            attacked_test_errors,
            bob_leg_checked,
            bob_leg_errors,
            charlie_leg_checked,
            charlie_leg_errors,
            attacked_charlie_leg_checked,
            attacked_charlie_leg_errors,
            attacked_test_bell,
            attacked_test_bad_bell,
            attacked_test_declared_loss,
            sifted_key_rounds,
            key_agreements,
            attacked_key_rounds,
            recovered_key_rounds,
            recovered_alice_correct,
            recovered_charlie_correct,
            attacked_message_rounds,
            message_pairs_held,
            message_pairs_faithful,
        );
    }
}

/// `num / den`, or 0 for an empty denominator.
pub fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Tally {
    pub fn from_transcript(t: &Transcript) -> Result<Self, ProtocolError> {
        let family = t.config.scheme.family();
        let mut tally = Tally::default();
        for r in &t.rounds {
            tally.add_round(family, r)?;
        }
        Ok(tally)
    }

    /// Adds one finished round.
    pub fn add_round(&mut self, family: Family, r: &RoundRecord) -> Result<(), ProtocolError> {
        self.rounds += 1;
        match r.kind {
            RoundKind::Test => self.test_rounds += 1,
            RoundKind::Key => self.key_rounds += 1,
            RoundKind::Message => self.message_rounds += 1,
        }
        let attack = r.attack.filter(|a| a.attacked);

        if r.kind == RoundKind::Message {
            if attack.is_some() {
                self.attacked_message_rounds += 1;
            }
            if let Some(res) = &r.residue {
                if res.bob_holds_pair {
                    self.message_pairs_held += 1;
                    if res.pair_overlap.is_some_and(|o| o >= 1.0 - TOLERANCE) {
                        self.message_pairs_faithful += 1;
                    }
                }
            }
            return Ok(());
        }

        self.detection_slots += 1;
        self.bob_detected += u64::from(r.bob_detected == Some(true));
        self.charlie_detected += u64::from(r.charlie_detected == Some(true));

        if let Some(a) = attack {
            if r.kind == RoundKind::Test && a.bell.is_some() && !matches!(r.alice, AliceChoice::Product { .. }) {
                self.attacked_test_bell += 1;
                if a.correction.is_none() {
                    self.attacked_test_bad_bell += 1;
                }
                if a.branch == Some(crate::adversary::AttackBranch::DeclaredLoss) {
                    self.attacked_test_declared_loss += 1;
                }
            }
        }

        match r.alice {
            AliceChoice::Product { bob, charlie } => {
                if r.bob_detected == Some(true) && r.bob_basis == Some(bob.basis) {
                    self.bob_leg_checked += 1;
                    self.bob_leg_errors += u64::from(r.bob_outcome != Some(bob.outcome));
                }
                if r.charlie_detected == Some(true) && r.charlie_basis == Some(charlie.basis) {
                    let err = u64::from(r.charlie_outcome != Some(charlie.outcome));
                    self.charlie_leg_checked += 1;
                    self.charlie_leg_errors += err;
                    if attack.is_some() {
                        self.attacked_charlie_leg_checked += 1;
                        self.attacked_charlie_leg_errors += err;
                    }
                }
            }
            AliceChoice::Entangled(p) => {
                if !r.both_detected() {
                    return Ok(());
                }
                self.both_detected += 1;
                let (Some(bb), Some(cb)) = (r.bob_basis, r.charlie_basis) else {
                    return Ok(());
                };
                if !correlated_bases(family, p.class(), bb, cb)? {
                    return Ok(());
                }
                self.correlated += 1;
                if r.kind == RoundKind::Test {
                    let err = match extract_bits(family, r, p.class()) {
                        Ok((kb, kc)) => u64::from(kb ^ kc != p.bit()),
                        Err(ProtocolError::MissingData { .. }) => 1,
                        Err(e) => return Err(e),
                    };
                    self.test_checked += 1;
                    self.test_errors += err;
                    if attack.is_some() {
                        self.attacked_test_checked += 1;
                        self.attacked_test_errors += err;
                    }
                } else {
                    self.sifted_key_rounds += 1;
                    if let Ok((kb, kc)) = extract_bits(family, r, p.class()) {
                        self.key_agreements += u64::from(kb ^ kc == p.bit());
                    }
                    if let Some(a) = attack {
                        self.attacked_key_rounds += 1;
                        if a.recovered_both() {
                            self.recovered_key_rounds += 1;
                            self.recovered_alice_correct += u64::from(a.recovered_alice_bit == Some(p.bit()));
                            self.recovered_charlie_correct +=
                                u64::from(a.recovered_charlie_outcome == r.charlie_outcome);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Pooled error rate over entangled tests and product-state legs.
    pub fn test_error_rate(&self) -> f64 {
        ratio(
            self.test_errors + self.bob_leg_errors + self.charlie_leg_errors,
            self.test_checked + self.bob_leg_checked + self.charlie_leg_checked,
        )
    }

    pub fn test_error_counts(&self) -> (u64, u64) {
        (
            self.test_errors + self.bob_leg_errors + self.charlie_leg_errors,
            self.test_checked + self.bob_leg_checked + self.charlie_leg_checked,
        )
    }

    pub fn eff_bob(&self) -> f64 {
        ratio(self.bob_detected, self.detection_slots)
    }

    pub fn eff_charlie(&self) -> f64 {
        ratio(self.charlie_detected, self.detection_slots)
    }

    pub fn sift_rate(&self) -> f64 {
        ratio(self.correlated, self.both_detected)
    }

    pub fn has_product_legs(&self) -> bool {
        self.bob_leg_checked + self.charlie_leg_checked > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Secure,
    Compromised,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Secure => "secure",
            Verdict::Compromised => "compromised",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub test_error_rate: f64,
    /// Per-leg rates for product-state test rounds, when there are any.
    pub bob_leg_error_rate: Option<f64>,
    pub charlie_leg_error_rate: Option<f64>,
    pub eff_bob: f64,
    pub eff_charlie: f64,
    pub sift_rate: f64,
    pub verdict: Verdict,
}

impl CheckReport {
    /// Applies the thresholds of `config` to an aggregated tally.
    pub fn from_tally(tally: &Tally, config: &SessionConfig) -> Self {
        let legs = tally.has_product_legs();
        let bob_leg = legs.then(|| ratio(tally.bob_leg_errors, tally.bob_leg_checked));
        let charlie_leg = legs.then(|| ratio(tally.charlie_leg_errors, tally.charlie_leg_checked));
        let error = tally.test_error_rate();
        let eta = config.channel.eta;
        let too_many_errors = [Some(error), bob_leg, charlie_leg]
            .into_iter()
            .flatten()
            .any(|e| e > config.error_threshold);
        let off_efficiency = [tally.eff_bob(), tally.eff_charlie()]
            .into_iter()
            .any(|e| (e - eta).abs() > config.efficiency_tolerance);
        Self {
            test_error_rate: error,
            bob_leg_error_rate: bob_leg,
            charlie_leg_error_rate: charlie_leg,
            eff_bob: tally.eff_bob(),
            eff_charlie: tally.eff_charlie(),
            sift_rate: tally.sift_rate(),
            verdict: if too_many_errors || off_efficiency {
                Verdict::Compromised
            } else {
                Verdict::Secure
            },
        }
    }
}

/// Error rate over designated test rounds with correlated bases, observed
/// efficiency per leg, and the resulting verdict.
pub fn check_eavesdropping(transcript: &Transcript, config: &SessionConfig) -> Result<CheckReport, ProtocolError> {
    if !transcript.rounds.iter().any(|r| r.kind == RoundKind::Test) {
        return Err(ProtocolError::NoTestRounds);
    }
    Ok(CheckReport::from_tally(&Tally::from_transcript(transcript)?, config))
}

/// Alice's key and the two agents' shares over sifted non-test rounds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistilledKeys {
    pub k_a: Vec<u8>,
    pub k_b: Vec<u8>,
    pub k_c: Vec<u8>,
}

impl DistilledKeys {
    pub fn len(&self) -> usize {
        self.k_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_a.is_empty()
    }

    /// Whether `K_A = K_B ⊕ K_C` bit by bit.
    pub fn consistent(&self) -> bool {
        self.k_a
            .iter()
            .zip(&self.k_b)
            .zip(&self.k_c)
            .all(|((a, b), c)| *a == b ^ c)
    }
}

pub fn distill_keys(transcript: &Transcript) -> Result<DistilledKeys, ProtocolError> {
    let family = transcript.config.scheme.family();
    let mut keys = DistilledKeys::default();
    for r in transcript
        .rounds
        .iter()
        .filter(|r| r.kind == RoundKind::Key && r.both_detected())
    {
        let Some(p) = r.alice.entangled() else { continue };
        let (Some(bb), Some(cb)) = (r.bob_basis, r.charlie_basis) else {
            continue;
        };
        if !correlated_bases(family, p.class(), bb, cb)? {
            continue;
        }
        let (kb, kc) = extract_bits(family, r, p.class())?;
        keys.k_a.push(p.bit());
        keys.k_b.push(kb);
        keys.k_c.push(kc);
    }
    Ok(keys)
}
