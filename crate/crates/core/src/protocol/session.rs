//! Round-by-round execution of a session.
//!
//! Each round draws from its own counter-based random stream, so a round's
//! trajectory depends only on the session seed and its id. Within a round the
//! parties act phase by phase in the configured order and the adversary only
//! uses what has been made public by then. Announcements are numbered at the
//! end: one phase at a time across all rounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{
    detection_keep_probability, entanglement_swap, recover_alice_bit, recover_charlie_bit, respond_honestly,
    respond_test, substitute, AdversaryStore, AttackAnnotation, AttackBranch, AttackStrategy, TestReply, TestResponse,
};
use crate::channel::{loss_filter, transmit};
use crate::qcore::{prepare_state, Basis, Family, Lab, Qubit, SignalState, StatePreparation};

use super::convention::{correlated_bases, BitConvention};
use super::hardened::prepare_hardened_test_round;
use super::hbb::{hbb_reduce, hbb_signal};
use super::types::{
    AliceChoice, Announcement, AnnouncementContent, MessageResidue, Mode, Party, Phase, PreparedState, RoundKind,
    RoundRecord, Scheme, SessionConfig,
};
use super::ProtocolError;

/// Everything a session produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transcript {
    pub config: SessionConfig,
    pub strategy: AttackStrategy,
    pub rounds: Vec<RoundRecord>,
}

impl Transcript {
    /// All announcements in sequence order.
    pub fn announcement_log(&self) -> Vec<Announcement> {
        let mut log: Vec<Announcement> = self
            .rounds
            .iter()
            .flat_map(|r| r.announcements.iter().copied())
            .collect();
        log.sort_by_key(|a| a.seq);
        log
    }
}

/// Per-round random stream derived from the session seed.
pub(crate) fn round_rng(seed: u64, round_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round_id);
    rng
}

pub fn run_session(config: &SessionConfig, strategy: &AttackStrategy) -> Result<Transcript, ProtocolError> {
    let mut rounds = Vec::with_capacity(config.rounds as usize);
    simulate_rounds(config, strategy, |r| {
        rounds.push(r);
        Ok(())
    })?;
    assign_sequence(&mut rounds, config);
    Ok(Transcript {
        config: config.clone(),
        strategy: *strategy,
        rounds,
    })
}

/// Runs every round of a session and hands each finished record to `sink`
/// without keeping the transcript. Announcement sequence numbers are left
/// unassigned.
pub fn simulate_rounds<F>(config: &SessionConfig, strategy: &AttackStrategy, mut sink: F) -> Result<(), ProtocolError>
where
    F: FnMut(RoundRecord) -> Result<(), ProtocolError>,
{
    config.validate()?;
    strategy.validate()?;
    let mut store = AdversaryStore::new();
    for round_id in 0..config.rounds {
        sink(RoundRunner::new(config, strategy, round_id).run(&mut store)?)?;
        store.release(round_id);
    }
    Ok(())
}

/// Numbers announcements phase by phase across all rounds, preserving each
/// round's order within a phase.
fn assign_sequence(rounds: &mut [RoundRecord], config: &SessionConfig) {
    let mut seq = 0;
    for phase in config.ordering.phases(config.mode) {
        for round in rounds.iter_mut() {
            for a in round.announcements.iter_mut().filter(|a| a.content.phase() == phase) {
                a.seq = seq;
                seq += 1;
            }
        }
    }
    for round in rounds.iter_mut() {
        round.announcements.sort_by_key(|a| a.seq);
    }
}

struct RoundRunner<'a> {
    config: &'a SessionConfig,
    strategy: &'a AttackStrategy,
    family: Family,
    rng: ChaCha8Rng,
    lab: Lab,
    record: RoundRecord,
    /// Qubit Charlie measures: Alice's C, or the fake C′ on attacked rounds.
    charlie_qubit: Qubit,
    /// Bob's honest photon B is still available to him.
    bob_holds_b: bool,
    test_reply: Option<TestReply>,
}

impl<'a> RoundRunner<'a> {
    fn new(config: &'a SessionConfig, strategy: &'a AttackStrategy, round_id: u64) -> Self {
        Self {
            config,
            strategy,
            family: config.scheme.family(),
            rng: round_rng(config.seed, round_id),
            lab: Lab::new(),
            record: RoundRecord {
                round_id,
                kind: RoundKind::Key,
                alice: AliceChoice::Entangled(PreparedState {
                    tag: SignalState::new(Family::Kki, crate::qcore::StateClass::One, 0),
                }),
                bob_received: false,
                charlie_received: false,
                bob_detected: None,
                charlie_detected: None,
                bob_basis: None,
                charlie_basis: None,
                bob_outcome: None,
                charlie_outcome: None,
                announcements: Vec::new(),
                attack: None,
                residue: None,
            },
            charlie_qubit: Qubit::C,
            bob_holds_b: false,
            test_reply: None,
        }
    }

    fn random_basis(&mut self) -> Basis {
        self.family.agent_bases()[self.rng.gen_range(0..2)]
    }

    fn announce(&mut self, party: Party, content: AnnouncementContent) {
        self.record.announcements.push(Announcement {
            seq: 0,
            round_id: self.record.round_id,
            party,
            content,
        });
    }

    fn attack(&mut self) -> &mut AttackAnnotation {
        self.record.attack.get_or_insert_with(AttackAnnotation::default)
    }

    fn attacked(&self) -> bool {
        self.record.is_attacked()
    }

    fn product_test(&self) -> bool {
        matches!(self.record.alice, AliceChoice::Product { .. })
    }

    fn run(mut self, store: &mut AdversaryStore) -> Result<RoundRecord, ProtocolError> {
        self.designate_and_prepare()?;
        self.transmit(store)?;
        self.measure_on_arrival()?;
        let phases = self.config.ordering.phases(self.config.mode);
        let designation_known = phases[0] == Phase::Designation;
        self.declare_detection(store, designation_known)?;
        self.answer_after_designation(store)?;
        self.recover_key_round(store)?;
        self.record_residue();
        self.emit_announcements();
        Ok(self.record)
    }

    fn designate_and_prepare(&mut self) -> Result<(), ProtocolError> {
        let is_test = self.rng.gen_bool(self.config.test_fraction);
        self.record.kind = match (is_test, self.config.mode) {
            (true, _) => RoundKind::Test,
            (false, Mode::ClassicalKey) => RoundKind::Key,
            (false, Mode::StateSharing) => RoundKind::Message,
        };
        self.record.alice = if self.config.scheme == Scheme::HardenedKki && is_test {
            let round = prepare_hardened_test_round(self.family, &mut self.rng);
            let (b, c) = round.photons();
            self.lab.insert(b)?;
            self.lab.insert(c)?;
            AliceChoice::Product {
                bob: round.bob,
                charlie: round.charlie,
            }
        } else if self.family == Family::Hbb {
            let basis = [Basis::X, Basis::Y][self.rng.gen_range(0..2)];
            let ghz = prepare_state(StatePreparation::Ghz)?;
            let (outcome, bc) = hbb_reduce(&ghz, basis, &mut self.rng)?;
            self.lab.insert(bc)?;
            AliceChoice::Entangled(PreparedState {
                tag: hbb_signal(basis, outcome).expect("X or Y"),
            })
        } else {
            let tag = SignalState::all(self.family)[self.rng.gen_range(0..4)];
            self.lab.insert(tag.state())?;
            AliceChoice::Entangled(PreparedState { tag })
        };
        Ok(())
    }

    fn transmit(&mut self, store: &mut AdversaryStore) -> Result<(), ProtocolError> {
        let channel = self.config.channel;
        let f = self.strategy.attack_fraction();
        let attacking = !self.strategy.is_passive() && self.rng.gen_bool(f);
        if attacking {
            let sub = substitute(store, self.record.round_id, &mut self.lab, &channel, &mut self.rng)?;
            self.record.bob_received = sub.pair_held;
            self.record.charlie_received = sub.fake_delivered;
            self.charlie_qubit = Qubit::CPrime;
            *self.attack() = AttackAnnotation {
                attacked: true,
                intercepted: sub.pair_held,
                ..AttackAnnotation::default()
            };
            if let AttackStrategy::EarlyBell { .. } = self.strategy {
                let swap = entanglement_swap(store, self.record.round_id, &mut self.lab, self.family, &mut self.rng)?;
                let a = self.attack();
                match swap {
                    Some((bell, correction)) => {
                        a.bell = Some(bell);
                        a.correction = correction;
                        a.branch = Some(if correction.is_some() {
                            AttackBranch::Aligned
                        } else {
                            AttackBranch::DeclaredLoss
                        });
                        self.bob_holds_b = correction.is_some();
                    }
                    None => a.branch = Some(AttackBranch::Missing),
                }
            }
        } else {
            // Once Bob runs his own replacement channel, his photon travels it
            // whether or not the round is attacked.
            let bob_eff = if self.strategy.is_passive() {
                channel.eta
            } else {
                channel.eta_prime
            };
            self.record.bob_received = transmit(bob_eff, &mut self.rng)?.delivered();
            if !self.record.bob_received {
                self.lab.discard(Qubit::B, &mut self.rng)?;
            }
            self.bob_holds_b = self.record.bob_received;
            self.record.charlie_received = transmit(channel.eta, &mut self.rng)?.delivered();
            if !self.record.charlie_received {
                self.lab.discard(Qubit::C, &mut self.rng)?;
            }
        }
        Ok(())
    }

    /// Whether agents measure at all this round: always in classical mode,
    /// only on test rounds in state-sharing mode.
    fn measured_round(&self) -> bool {
        self.config.mode == Mode::ClassicalKey || self.record.kind == RoundKind::Test
    }

    fn measure_on_arrival(&mut self) -> Result<(), ProtocolError> {
        if !self.measured_round() {
            return Ok(());
        }
        if self.record.charlie_received {
            let basis = self.random_basis();
            let outcome = self.lab.measure(self.charlie_qubit, basis, &mut self.rng)?;
            self.record.charlie_basis = Some(basis);
            self.record.charlie_outcome = Some(outcome);
        }
        let deferred = self.attacked() && matches!(self.strategy, AttackStrategy::OpaqueDeferred { .. });
        if self.bob_holds_b && !deferred {
            self.measure_bob()?;
        }
        Ok(())
    }

    fn measure_bob(&mut self) -> Result<(), ProtocolError> {
        let basis = self.random_basis();
        let outcome = self.lab.measure(Qubit::B, basis, &mut self.rng)?;
        self.record.bob_basis = Some(basis);
        self.record.bob_outcome = Some(outcome);
        self.bob_holds_b = false;
        Ok(())
    }

    fn test_response(&mut self, store: &mut AdversaryStore, loss_available: bool) -> Result<TestReply, ProtocolError> {
        let cheating = matches!(self.strategy, AttackStrategy::OpaqueDeferred { cheating: true, .. });
        let id = self.record.round_id;
        let reply = if self.product_test() {
            respond_honestly(store, id, &mut self.lab, self.family, &mut self.rng)?
        } else {
            respond_test(
                store,
                id,
                &mut self.lab,
                self.family,
                cheating,
                loss_available,
                &mut self.rng,
            )?
        };
        let a = self.attack();
        a.bell = reply.bell;
        a.correction = reply.correction;
        a.branch = Some(reply.branch);
        if let TestResponse::Announce { basis, outcome } = reply.response {
            self.record.bob_basis = Some(basis);
            self.record.bob_outcome = Some(outcome);
        }
        self.test_reply = Some(reply);
        Ok(reply)
    }

    fn declare_detection(&mut self, store: &mut AdversaryStore, designation_known: bool) -> Result<(), ProtocolError> {
        if self.record.kind == RoundKind::Message {
            return Ok(());
        }
        self.record.charlie_detected = Some(self.record.charlie_received);
        let known = designation_known.then_some(self.record.kind);
        let would = match self.strategy {
            AttackStrategy::OpaqueDeferred { .. } if self.attacked() => self.record.bob_received,
            AttackStrategy::EarlyBell { .. } if self.attacked() => {
                self.bob_holds_b || self.record.bob_outcome.is_some()
            }
            _ => self.record.bob_received,
        };
        let keep = detection_keep_probability(self.strategy, &self.config.channel, self.product_test(), known);
        let mut declared = would && (keep >= 1.0 || loss_filter(keep, &mut self.rng)?.kept());
        let deferred_test = self.attacked()
            && matches!(self.strategy, AttackStrategy::OpaqueDeferred { .. })
            && self.record.kind == RoundKind::Test;
        if declared && deferred_test && designation_known {
            let reply = self.test_response(store, true)?;
            declared = reply.response != TestResponse::DeclareLoss;
        }
        self.record.bob_detected = Some(declared);
        Ok(())
    }

    fn answer_after_designation(&mut self, store: &mut AdversaryStore) -> Result<(), ProtocolError> {
        let pending_test = self.attacked()
            && matches!(self.strategy, AttackStrategy::OpaqueDeferred { .. })
            && self.record.kind == RoundKind::Test
            && self.test_reply.is_none();
        if pending_test && self.record.bob_detected == Some(true) {
            // Detection is already public, so a loss claim is no longer possible.
            self.test_response(store, false)?;
        }
        // In state-sharing mode honest agents measure only once a round is
        // known to be a test.
        if self.record.kind == RoundKind::Test && self.bob_holds_b && self.record.bob_outcome.is_none() {
            self.measure_bob()?;
        }
        Ok(())
    }

    /// On attacked key rounds Bob announces a fake basis, then after sifting
    /// reads out Alice's bit and Charlie's outcome and reports an outcome
    /// consistent with both.
    fn recover_key_round(&mut self, store: &mut AdversaryStore) -> Result<(), ProtocolError> {
        let deferred = self.attacked() && matches!(self.strategy, AttackStrategy::OpaqueDeferred { .. });
        if !deferred || self.record.kind != RoundKind::Key || self.record.bob_detected != Some(true) {
            return Ok(());
        }
        let fake_basis = self.random_basis();
        self.record.bob_basis = Some(fake_basis);
        let (Some(charlie_basis), true) = (self.record.charlie_basis, self.record.both_detected()) else {
            return Ok(());
        };
        let prepared = self.record.alice.entangled().expect("key rounds are entangled");
        let class = prepared.class();
        if !correlated_bases(self.family, class, fake_basis, charlie_basis)? {
            return Ok(());
        }
        let id = self.record.round_id;
        let ka = recover_alice_bit(store, id, &mut self.lab, self.family, class, &mut self.rng)?;
        let kc = recover_charlie_bit(store, id, &mut self.lab, charlie_basis, &mut self.rng)?;
        let a = self.attack();
        a.recovered_alice_bit = ka;
        a.recovered_charlie_outcome = kc;
        if let (Some(ka), Some(kc)) = (ka, kc) {
            let table = BitConvention::shipped();
            let kc_bit = table
                .bit(self.family, class, fake_basis, charlie_basis, Party::Charlie, kc)
                .expect("correlated row");
            self.record.bob_outcome =
                table.outcome_for(self.family, class, fake_basis, charlie_basis, Party::Bob, ka ^ kc_bit);
        }
        Ok(())
    }

    fn record_residue(&mut self) {
        if self.record.kind != RoundKind::Message {
            return;
        }
        let holds_pair = self.attacked()
            && matches!(self.strategy, AttackStrategy::OpaqueDeferred { .. })
            && self.record.attack.is_some_and(|a| a.intercepted);
        let pair_state = holds_pair
            .then(|| self.lab.joint_state(&[Qubit::B, Qubit::C]))
            .flatten();
        let pair_overlap = match (&pair_state, self.record.alice.entangled()) {
            (Some(s), Some(p)) => s.overlap(&p.tag.state()).ok(),
            _ => None,
        };
        self.record.residue = Some(MessageResidue {
            bob_holds_pair: pair_state.is_some(),
            pair_overlap,
            pair_state,
        });
    }

    fn emit_announcements(&mut self) {
        use AnnouncementContent as A;
        let kind = self.record.kind;
        self.announce(Party::Alice, A::Designation(kind));
        if kind == RoundKind::Message {
            return;
        }
        let bob_det = self.record.bob_detected == Some(true);
        let charlie_det = self.record.charlie_detected == Some(true);
        self.announce(Party::Bob, A::Detection(bob_det));
        self.announce(Party::Charlie, A::Detection(charlie_det));

        // Who declares the outcome first; that party declares its basis last.
        let first = if kind == RoundKind::Test && self.config.ordering.alternates() && self.rng.gen_bool(0.5) {
            Party::Charlie
        } else {
            Party::Bob
        };
        let second = if first == Party::Bob {
            Party::Charlie
        } else {
            Party::Bob
        };
        let detected = |p: Party| if p == Party::Bob { bob_det } else { charlie_det };
        let product = self.product_test();
        let speaks = |p: Party| if product { detected(p) } else { bob_det && charlie_det };
        let outcome_of = |r: &RoundRecord, p: Party| {
            if p == Party::Bob {
                r.bob_outcome
            } else {
                r.charlie_outcome
            }
        };
        let basis_of = |r: &RoundRecord, p: Party| if p == Party::Bob { r.bob_basis } else { r.charlie_basis };

        if kind == RoundKind::Test {
            for p in [first, second] {
                if speaks(p) {
                    if let Some(o) = outcome_of(&self.record, p) {
                        self.announce(p, A::Outcome(o));
                    }
                }
            }
            let basis_order = if self.config.ordering.alternates() {
                [second, first]
            } else {
                [Party::Bob, Party::Charlie]
            };
            for p in basis_order {
                if speaks(p) {
                    if let Some(b) = basis_of(&self.record, p) {
                        self.announce(p, A::Basis(b));
                    }
                }
            }
        } else if bob_det && charlie_det {
            for p in [Party::Bob, Party::Charlie] {
                if let Some(b) = basis_of(&self.record, p) {
                    self.announce(p, A::Basis(b));
                }
            }
        }

        match self.record.alice {
            AliceChoice::Product { bob, charlie } => {
                if bob_det || charlie_det {
                    self.announce(
                        Party::Alice,
                        A::LegBases {
                            bob: bob.basis,
                            charlie: charlie.basis,
                        },
                    );
                    self.announce(Party::Alice, A::LegStates { bob, charlie });
                }
            }
            AliceChoice::Entangled(p) => {
                if bob_det && charlie_det {
                    self.announce(Party::Alice, A::Class(p.class()));
                    if kind == RoundKind::Test {
                        self.announce(Party::Alice, A::State(p.tag));
                    }
                }
            }
        }
    }
}
