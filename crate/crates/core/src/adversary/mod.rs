//! The dishonest agent (Bob): he intercepts both photons of Alice's pair,
//! hands Charlie one half of a fake Bell pair, and postpones every decision
//! until the public discussion tells him which rounds are tested.
//!
//! On a test round he entanglement-swaps his fake half with Alice's photon C,
//! realigns Alice's photon B when the Bell outcome allows it, and otherwise
//! claims the photon was lost. On a key round he learns Alice's bit from a
//! joint measurement of B and C and Charlie's outcome from the fake half B′.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{loss_filter, transmit, ChannelConfig};
use crate::protocol::{ProtocolError, RoundKind};
use crate::qcore::{
    class_basis, prepare_state, Basis, BellOutcome, Family, Lab, Outcome, PauliCorrection, Qubit, StateClass,
    StatePreparation, TwoQubitBasis,
};

/// Bob's policy for a session.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AttackStrategy {
    /// Bob follows the protocol.
    #[default]
    Passive,
    /// Intercept, substitute, and defer the Bell measurement until the test
    /// designation is public. With `cheating`, bad Bell outcomes on test
    /// rounds are reported as losses.
    OpaqueDeferred { attack_fraction: f64, cheating: bool },
    /// Intercept and Bell-measure on arrival, before any announcement, keeping
    /// only rounds with a correctable outcome.
    EarlyBell { attack_fraction: f64 },
}

impl AttackStrategy {
    pub fn attack_fraction(&self) -> f64 {
        match *self {
            AttackStrategy::Passive => 0.0,
            AttackStrategy::OpaqueDeferred { attack_fraction, .. } | AttackStrategy::EarlyBell { attack_fraction } => {
                attack_fraction
            }
        }
    }

    pub fn is_passive(&self) -> bool {
        matches!(self, AttackStrategy::Passive)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let f = self.attack_fraction();
        if !(0.0..=1.0).contains(&f) {
            return Err(ProtocolError::Config {
                field: "attack_fraction",
                message: format!("{f} is not in [0, 1]"),
            });
        }
        Ok(())
    }

    /// Short name used in reports.
    pub fn label(&self) -> String {
        match *self {
            AttackStrategy::Passive => "passive".into(),
            AttackStrategy::OpaqueDeferred {
                attack_fraction,
                cheating,
            } => {
                format!("opaque-deferred(f={attack_fraction:.4},cheating={cheating})")
            }
            AttackStrategy::EarlyBell { attack_fraction } => format!("early-bell(f={attack_fraction:.4})"),
        }
    }
}

/// Largest attack fraction whose induced losses stay within the honest loss
/// budget: `min(1, 2(η′−η)/η′)`, or 0 when the replacement channel is no
/// better than the honest one.
pub fn plan_attack_fraction(channel: &ChannelConfig) -> f64 {
    let (eta, eta_prime) = (channel.eta, channel.eta_prime);
    if eta_prime <= eta || eta_prime <= 0.0 {
        return 0.0;
    }
    (2.0 * (eta_prime - eta) / eta_prime).min(1.0)
}

/// Correction that turns Alice's photon B back into a faithful partner of
/// Charlie's fake photon after a Bell measurement on (B′, C). `None` marks
/// the outcomes for which no single correction works across all four signal
/// states, so Bob cannot answer a test without risking an error.
pub fn swap_correction(family: Family, bell: BellOutcome) -> Option<PauliCorrection> {
    match (family, bell) {
        (_, BellOutcome::PhiPlus) => Some(PauliCorrection::Identity),
        (Family::Kki, BellOutcome::PsiMinus) => Some(PauliCorrection::ISigmaY),
        (Family::Hbb, BellOutcome::PhiMinus) => Some(PauliCorrection::SigmaZ),
        _ => None,
    }
}

/// How Bob's answer to a round came about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackBranch {
    /// Good Bell outcome, B realigned (possibly by the identity) and measured.
    Aligned,
    /// Bad Bell outcome reported as a lost photon.
    DeclaredLoss,
    /// Bad Bell outcome answered anyway.
    Unmasked,
    /// Photon B measured without any swap (product-state test rounds).
    Honest,
    /// Bob did not hold the photons this round needed.
    Missing,
}

/// Per-round adversary annotations carried in the transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AttackAnnotation {
    pub attacked: bool,
    /// Bob holds Alice's B and C in memory.
    pub intercepted: bool,
    pub bell: Option<BellOutcome>,
    pub correction: Option<PauliCorrection>,
    pub branch: Option<AttackBranch>,
    pub recovered_alice_bit: Option<u8>,
    pub recovered_charlie_outcome: Option<Outcome>,
}

impl AttackAnnotation {
    pub fn recovered_both(&self) -> bool {
        self.recovered_alice_bit.is_some() && self.recovered_charlie_outcome.is_some()
    }
}

/// What Bob keeps for one attacked round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoredRound {
    /// Alice's B and C are in Bob's memory and untouched.
    pub pair_held: bool,
    /// The retained fake half B′ is in Bob's memory.
    pub fake_half_held: bool,
}

/// Bob's memory across a session. The photons themselves live in the round's
/// [`Lab`]; the store tracks which of them Bob may still use.
#[derive(Debug, Clone, Default)]
pub struct AdversaryStore {
    rounds: BTreeMap<u64, StoredRound>,
}

impl AdversaryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, round_id: u64) -> Option<StoredRound> {
        self.rounds.get(&round_id).copied()
    }

    pub fn attacked_rounds(&self) -> impl Iterator<Item = u64> + '_ {
        self.rounds.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// Forgets a finished round.
    pub fn release(&mut self, round_id: u64) {
        self.rounds.remove(&round_id);
    }

    fn entry(&mut self, round_id: u64) -> &mut StoredRound {
        self.rounds.entry(round_id).or_insert(StoredRound {
            pair_held: false,
            fake_half_held: false,
        })
    }
}

/// Routing of an attacked round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substitution {
    pub pair_held: bool,
    /// The fake photon C′ reached Charlie.
    pub fake_delivered: bool,
}

/// Intercepts Alice's pair over the replacement channel and sends Charlie the
/// C′ half of a fresh `Φ⁺` pair, thinned so Charlie sees the honest η.
pub fn substitute<R: Rng + ?Sized>(
    store: &mut AdversaryStore,
    round_id: u64,
    lab: &mut Lab,
    channel: &ChannelConfig,
    rng: &mut R,
) -> Result<Substitution, ProtocolError> {
    let pair_held = transmit(channel.eta_prime, rng)?.delivered();
    if !pair_held {
        lab.discard(Qubit::B, rng)?;
        lab.discard(Qubit::C, rng)?;
    }
    lab.insert(prepare_state(StatePreparation::Bell(
        BellOutcome::PhiPlus,
        Qubit::BPrime,
        Qubit::CPrime,
    ))?)?;
    let keep = if channel.eta_prime > 0.0 {
        (channel.eta / channel.eta_prime).min(1.0)
    } else {
        0.0
    };
    let fake_delivered = transmit(channel.eta_prime, rng)?.delivered() && loss_filter(keep, rng)?.kept();
    if !fake_delivered {
        lab.discard(Qubit::CPrime, rng)?;
    }
    *store.entry(round_id) = StoredRound {
        pair_held,
        fake_half_held: true,
    };
    Ok(Substitution {
        pair_held,
        fake_delivered,
    })
}

/// Bob's public answer for a test round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestResponse {
    Announce { basis: Basis, outcome: Outcome },
    DeclareLoss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestReply {
    pub response: TestResponse,
    pub bell: Option<BellOutcome>,
    pub correction: Option<PauliCorrection>,
    pub branch: AttackBranch,
}

fn random_basis<R: Rng + ?Sized>(family: Family, rng: &mut R) -> Basis {
    family.agent_bases()[rng.gen_range(0..2)]
}

/// Bell-measures the fake half B′ together with Alice's C and applies the
/// realigning correction to B when one exists.
pub fn entanglement_swap<R: Rng + ?Sized>(
    store: &mut AdversaryStore,
    round_id: u64,
    lab: &mut Lab,
    family: Family,
    rng: &mut R,
) -> Result<Option<(BellOutcome, Option<PauliCorrection>)>, ProtocolError> {
    let stored = store.entry(round_id);
    if !(stored.pair_held && stored.fake_half_held) {
        return Ok(None);
    }
    let idx = lab.measure_pair((Qubit::BPrime, Qubit::C), &TwoQubitBasis::bell(), rng)?;
    stored.fake_half_held = false;
    stored.pair_held = false;
    let bell = BellOutcome::from_index(idx).expect("Bell basis has four outcomes");
    let correction = swap_correction(family, bell);
    if let Some(c) = correction {
        lab.apply(Qubit::B, c)?;
    }
    Ok(Some((bell, correction)))
}

/// Answers a test round: swap, then announce a measurement of B, or claim a
/// loss for an uncorrectable outcome when `cheating` is on and Bob has not
/// yet declared detection (`loss_available`).
pub fn respond_test<R: Rng + ?Sized>(
    store: &mut AdversaryStore,
    round_id: u64,
    lab: &mut Lab,
    family: Family,
    cheating: bool,
    loss_available: bool,
    rng: &mut R,
) -> Result<TestReply, ProtocolError> {
    let Some((bell, correction)) = entanglement_swap(store, round_id, lab, family, rng)? else {
        return Ok(TestReply {
            response: TestResponse::DeclareLoss,
            bell: None,
            correction: None,
            branch: AttackBranch::Missing,
        });
    };
    if correction.is_none() && cheating && loss_available {
        return Ok(TestReply {
            response: TestResponse::DeclareLoss,
            bell: Some(bell),
            correction,
            branch: AttackBranch::DeclaredLoss,
        });
    }
    let basis = random_basis(family, rng);
    let outcome = lab.measure(Qubit::B, basis, rng)?;
    Ok(TestReply {
        response: TestResponse::Announce { basis, outcome },
        bell: Some(bell),
        correction,
        branch: if correction.is_some() {
            AttackBranch::Aligned
        } else {
            AttackBranch::Unmasked
        },
    })
}

/// Answers a product-state test round by measuring B as an honest agent would.
pub fn respond_honestly<R: Rng + ?Sized>(
    store: &mut AdversaryStore,
    round_id: u64,
    lab: &mut Lab,
    family: Family,
    rng: &mut R,
) -> Result<TestReply, ProtocolError> {
    let stored = store.entry(round_id);
    if !stored.pair_held {
        return Ok(TestReply {
            response: TestResponse::DeclareLoss,
            bell: None,
            correction: None,
            branch: AttackBranch::Missing,
        });
    }
    stored.pair_held = false;
    let basis = random_basis(family, rng);
    let outcome = lab.measure(Qubit::B, basis, rng)?;
    Ok(TestReply {
        response: TestResponse::Announce { basis, outcome },
        bell: None,
        correction: None,
        branch: AttackBranch::Honest,
    })
}

/// Alice's bit from a joint measurement of B and C in the basis that
/// discriminates the two states of the announced class.
pub fn recover_alice_bit<R: Rng + ?Sized>(
    store: &mut AdversaryStore,
    round_id: u64,
    lab: &mut Lab,
    family: Family,
    class: StateClass,
    rng: &mut R,
) -> Result<Option<u8>, ProtocolError> {
    let stored = store.entry(round_id);
    if !stored.pair_held {
        return Ok(None);
    }
    stored.pair_held = false;
    let idx = lab.measure_pair((Qubit::B, Qubit::C), &class_basis(family, class), rng)?;
    Ok((idx < 2).then_some(idx as u8))
}

/// Charlie's outcome from the fake half B′. Measuring C′ in a basis leaves B′
/// in the complex conjugate of Charlie's eigenstate, so B′ is read out in the
/// conjugated basis; for Z and X this is the same basis.
pub fn recover_charlie_bit<R: Rng + ?Sized>(
    store: &mut AdversaryStore,
    round_id: u64,
    lab: &mut Lab,
    charlie_basis: Basis,
    rng: &mut R,
) -> Result<Option<Outcome>, ProtocolError> {
    let stored = store.entry(round_id);
    if !stored.fake_half_held {
        return Ok(None);
    }
    stored.fake_half_held = false;
    Ok(Some(lab.measure_in(
        Qubit::BPrime,
        &charlie_basis.conjugate_eigenvectors(),
        rng,
    )?))
}

/// Fraction of Bob's would-be detections he must report so that his declared
/// detection rate matches the honest η. `known` is the round's designation
/// when Bob already knows it at the time he declares detection.
pub fn detection_keep_probability(
    strategy: &AttackStrategy,
    channel: &ChannelConfig,
    product_tests: bool,
    known: Option<RoundKind>,
) -> f64 {
    let f = strategy.attack_fraction();
    let natural = match *strategy {
        AttackStrategy::Passive => return 1.0,
        AttackStrategy::OpaqueDeferred { cheating, .. } => {
            if cheating && !product_tests && known == Some(RoundKind::Test) {
                channel.eta_prime * (1.0 - f / 2.0)
            } else {
                channel.eta_prime
            }
        }
        AttackStrategy::EarlyBell { .. } => channel.eta_prime * (1.0 - f / 2.0),
    };
    if natural <= 0.0 {
        1.0
    } else {
        (channel.eta / natural).min(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::SignalState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ch(eta: f64, eta_prime: f64) -> ChannelConfig {
        ChannelConfig::new(eta, eta_prime).unwrap()
    }

    #[test]
    fn planned_fraction_examples() {
        assert!((plan_attack_fraction(&ch(0.3, 0.5)) - 0.8).abs() < 1e-12);
        assert_eq!(plan_attack_fraction(&ch(0.3, 0.6)), 1.0);
        assert_eq!(plan_attack_fraction(&ch(0.3, 0.3)), 0.0);
        assert_eq!(plan_attack_fraction(&ch(0.5, 0.3)), 0.0);
        assert_eq!(plan_attack_fraction(&ch(0.2, 0.9)), 1.0);
    }

    #[test]
    fn planned_fraction_balances_test_detections() {
        for (eta, eta_prime) in [(0.25, 0.3), (0.25, 0.4), (0.3, 0.5), (0.3, 0.6)] {
            let f = plan_attack_fraction(&ch(eta, eta_prime));
            let blended = f * eta_prime / 2.0 + (1.0 - f) * eta_prime;
            assert!((blended - eta).abs() < 1e-12);
        }
    }

    #[test]
    fn strategy_rejects_out_of_range_fraction() {
        let s = AttackStrategy::OpaqueDeferred {
            attack_fraction: 1.5,
            cheating: true,
        };
        assert!(matches!(
            s.validate(),
            Err(ProtocolError::Config {
                field: "attack_fraction",
                ..
            })
        ));
    }

    fn attacked_lab(signal: SignalState, rng: &mut ChaCha8Rng) -> (AdversaryStore, Lab) {
        let mut lab = Lab::new();
        lab.insert(signal.state()).unwrap();
        let mut store = AdversaryStore::new();
        let s = substitute(&mut store, 0, &mut lab, &ch(1.0, 1.0), rng).unwrap();
        assert!(s.pair_held && s.fake_delivered);
        (store, lab)
    }

    #[test]
    fn lossless_substitution_keeps_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (store, lab) = attacked_lab(SignalState::new(Family::Kki, StateClass::One, 0), &mut rng);
        assert_eq!(
            store.get(0),
            Some(StoredRound {
                pair_held: true,
                fake_half_held: true
            })
        );
        for q in [Qubit::B, Qubit::C, Qubit::BPrime, Qubit::CPrime] {
            assert!(lab.holds(q));
        }
    }

    #[test]
    fn recovers_alice_bit_for_every_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for family in [Family::Kki, Family::Hbb] {
            for signal in SignalState::all(family) {
                for _ in 0..20 {
                    let (mut store, mut lab) = attacked_lab(signal, &mut rng);
                    let bit = recover_alice_bit(&mut store, 0, &mut lab, family, signal.class, &mut rng).unwrap();
                    assert_eq!(bit, Some(signal.bit));
                }
            }
        }
    }

    #[test]
    fn recovers_charlie_outcome_in_every_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for basis in Basis::ALL {
            for _ in 0..50 {
                let (mut store, mut lab) = attacked_lab(SignalState::new(Family::Kki, StateClass::Two, 1), &mut rng);
                let charlie = lab.measure(Qubit::CPrime, basis, &mut rng).unwrap();
                let got = recover_charlie_bit(&mut store, 0, &mut lab, basis, &mut rng).unwrap();
                assert_eq!(got, Some(charlie), "basis {basis}");
            }
        }
    }

    #[test]
    fn cheating_declares_loss_on_bad_outcomes_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut losses = 0;
        for _ in 0..2000 {
            let (mut store, mut lab) = attacked_lab(SignalState::new(Family::Kki, StateClass::One, 1), &mut rng);
            let reply = respond_test(&mut store, 0, &mut lab, Family::Kki, true, true, &mut rng).unwrap();
            let bad = swap_correction(Family::Kki, reply.bell.unwrap()).is_none();
            assert_eq!(bad, reply.response == TestResponse::DeclareLoss);
            losses += bad as u32;
        }
        let frac = f64::from(losses) / 2000.0;
        assert!((frac - 0.5).abs() < 0.05, "{frac}");
    }

    #[test]
    fn aligned_answers_match_charlie() {
        // Alice sends φ⁻ (class 1); with equal bases, the honest outcomes are
        // equal, so an aligned B must reproduce Charlie's outcome.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let (mut store, mut lab) = attacked_lab(SignalState::new(Family::Kki, StateClass::One, 1), &mut rng);
            let charlie = lab.measure(Qubit::CPrime, Basis::Z, &mut rng).unwrap();
            let Some((_, Some(_))) = entanglement_swap(&mut store, 0, &mut lab, Family::Kki, &mut rng).unwrap() else {
                continue;
            };
            assert_eq!(lab.measure(Qubit::B, Basis::Z, &mut rng).unwrap(), charlie);
        }
    }

    #[test]
    fn missing_pair_means_declared_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut lab = Lab::new();
        lab.insert(SignalState::new(Family::Kki, StateClass::One, 0).state())
            .unwrap();
        let mut store = AdversaryStore::new();
        let s = substitute(&mut store, 7, &mut lab, &ch(0.0, 0.0), &mut rng).unwrap();
        assert!(!s.pair_held && !s.fake_delivered);
        let reply = respond_test(&mut store, 7, &mut lab, Family::Kki, false, false, &mut rng).unwrap();
        assert_eq!(reply.response, TestResponse::DeclareLoss);
        assert_eq!(reply.branch, AttackBranch::Missing);
        assert_eq!(
            recover_alice_bit(&mut store, 7, &mut lab, Family::Kki, StateClass::One, &mut rng).unwrap(),
            None
        );
    }

    #[test]
    fn keep_probabilities() {
        let c = ch(0.3, 0.6);
        let opaque = AttackStrategy::OpaqueDeferred {
            attack_fraction: 1.0,
            cheating: true,
        };
        assert_eq!(
            detection_keep_probability(&AttackStrategy::Passive, &c, false, None),
            1.0
        );
        assert!((detection_keep_probability(&opaque, &c, false, Some(RoundKind::Test)) - 1.0).abs() < 1e-12);
        assert!((detection_keep_probability(&opaque, &c, false, Some(RoundKind::Key)) - 0.5).abs() < 1e-12);
        assert!((detection_keep_probability(&opaque, &c, false, None) - 0.5).abs() < 1e-12);
        assert!((detection_keep_probability(&opaque, &c, true, Some(RoundKind::Test)) - 0.5).abs() < 1e-12);
    }
}
