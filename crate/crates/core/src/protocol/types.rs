use std::fmt;

use serde::{Deserialize, Serialize};

use crate::adversary::AttackAnnotation;
use crate::channel::ChannelConfig;
use crate::qcore::{Basis, Family, Outcome, SignalState, StateClass, StateVector};

use super::ProtocolError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "kki")]
    Kki,
    #[serde(rename = "hbb")]
    Hbb,
    /// KKI with product-state test rounds checked leg by leg.
    #[serde(rename = "hardened-kki")]
    HardenedKki,
}

impl Scheme {
    pub fn family(self) -> Family {
        match self {
            Scheme::Kki | Scheme::HardenedKki => Family::Kki,
            Scheme::Hbb => Family::Hbb,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "classical")]
    ClassicalKey,
    /// Non-test rounds carry an unknown state and are never measured.
    #[serde(rename = "state-sharing")]
    StateSharing,
}

/// Order in which the public announcements of a session are made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderingPolicy {
    /// Test designation, then detections, outcomes and bases with Bob
    /// always speaking first.
    #[serde(rename = "vulnerable")]
    Vulnerable,
    /// As above, but per test bit whoever declares the outcome first
    /// declares the basis last.
    #[serde(rename = "refined")]
    Refined,
    /// Detections are declared before the test designation.
    #[serde(rename = "sifting")]
    SiftingFirst,
}

/// Groups of announcements, emitted one group at a time across all rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Designation,
    Detection,
    Outcome,
    Basis,
    Class,
    State,
}

impl OrderingPolicy {
    /// Phase sequence for a session.
    ///
    /// In state-sharing mode photons can only be registered as detected once
    /// they are measured, and only test photons are measured, so detection
    /// always follows designation there.
    pub fn phases(self, mode: Mode) -> [Phase; 6] {
        use Phase::*;
        match (self, mode) {
            (OrderingPolicy::SiftingFirst, Mode::ClassicalKey) => {
                [Detection, Designation, Outcome, Basis, Class, State]
            }
            _ => [Designation, Detection, Outcome, Basis, Class, State],
        }
    }

    /// Whether the per-bit "first to declare the outcome is last to declare
    /// the basis" rule applies.
    pub fn alternates(self) -> bool {
        !matches!(self, OrderingPolicy::Vulnerable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundKind {
    Test,
    Key,
    Message,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
    Charlie,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
            Party::Charlie => "charlie",
        })
    }
}

/// Alice's entangled signal: tag plus the class and bit it encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PreparedState {
    pub tag: SignalState,
}

impl PreparedState {
    pub fn class(self) -> StateClass {
        self.tag.class
    }

    pub fn bit(self) -> u8 {
        self.tag.bit
    }
}

/// A single-photon eigenstate sent on one leg of a hardened test round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LegState {
    pub basis: Basis,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AliceChoice {
    Entangled(PreparedState),
    Product { bob: LegState, charlie: LegState },
}

impl AliceChoice {
    pub fn tag(&self) -> String {
        match self {
            AliceChoice::Entangled(p) => p.tag.tag().to_string(),
            AliceChoice::Product { bob, charlie } => {
                format!(
                    "product({}{},{}{})",
                    bob.basis, bob.outcome, charlie.basis, charlie.outcome
                )
            }
        }
    }

    pub fn entangled(&self) -> Option<PreparedState> {
        match self {
            AliceChoice::Entangled(p) => Some(*p),
            AliceChoice::Product { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum AnnouncementContent {
    Designation(RoundKind),
    Detection(bool),
    Outcome(Outcome),
    Basis(Basis),
    Class(StateClass),
    LegBases { bob: Basis, charlie: Basis },
    State(SignalState),
    LegStates { bob: LegState, charlie: LegState },
}

impl AnnouncementContent {
    pub fn phase(&self) -> Phase {
        match self {
            AnnouncementContent::Designation(_) => Phase::Designation,
            AnnouncementContent::Detection(_) => Phase::Detection,
            AnnouncementContent::Outcome(_) => Phase::Outcome,
            AnnouncementContent::Basis(_) => Phase::Basis,
            AnnouncementContent::Class(_) | AnnouncementContent::LegBases { .. } => Phase::Class,
            AnnouncementContent::State(_) | AnnouncementContent::LegStates { .. } => Phase::State,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Announcement {
    pub seq: u64,
    pub round_id: u64,
    pub party: Party,
    pub content: AnnouncementContent,
}

/// What is left of a message round in state-sharing mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MessageResidue {
    /// Bob ended up holding both photons of Alice's pair.
    pub bob_holds_pair: bool,
    /// Fidelity of the pair Bob holds with Alice's preparation.
    pub pair_overlap: Option<f64>,
    #[serde(skip)]
    pub pair_state: Option<StateVector>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_id: u64,
    pub kind: RoundKind,
    pub alice: AliceChoice,
    /// Bob physically holds the photon(s) he needs for this round.
    pub bob_received: bool,
    pub charlie_received: bool,
    pub bob_detected: Option<bool>,
    pub charlie_detected: Option<bool>,
    pub bob_basis: Option<Basis>,
    pub charlie_basis: Option<Basis>,
    pub bob_outcome: Option<Outcome>,
    pub charlie_outcome: Option<Outcome>,
    pub announcements: Vec<Announcement>,
    pub attack: Option<AttackAnnotation>,
    pub residue: Option<MessageResidue>,
}

impl RoundRecord {
    pub fn both_detected(&self) -> bool {
        self.bob_detected == Some(true) && self.charlie_detected == Some(true)
    }

    pub fn is_attacked(&self) -> bool {
        self.attack.as_ref().is_some_and(|a| a.attacked)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub mode: Mode,
    pub scheme: Scheme,
    pub rounds: u64,
    pub test_fraction: f64,
    pub ordering: OrderingPolicy,
    pub channel: ChannelConfig,
    pub error_threshold: f64,
    pub efficiency_tolerance: f64,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            mode: Mode::ClassicalKey,
            scheme: Scheme::Kki,
            rounds: 10_000,
            test_fraction: 0.25,
            ordering: OrderingPolicy::Refined,
            channel: ChannelConfig {
                eta: 1.0,
                eta_prime: 1.0,
            },
            error_threshold: 0.02,
            efficiency_tolerance: 0.03,
            seed: 0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |field: &'static str, message: String| Err(ProtocolError::Config { field, message });
        if self.rounds < 1 {
            return bad("rounds", "must be at least 1".into());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad("test_fraction", format!("{} is not in (0, 1)", self.test_fraction));
        }
        if !(0.0..=1.0).contains(&self.error_threshold) {
            return bad("error_threshold", format!("{} is not in [0, 1]", self.error_threshold));
        }
        if !(0.0..=1.0).contains(&self.efficiency_tolerance) {
            return bad(
                "efficiency_tolerance",
                format!("{} is not in [0, 1]", self.efficiency_tolerance),
            );
        }
        if let Err(e @ crate::channel::ChannelError::OutOfRange { name, .. }) = self.channel.validate() {
            return bad(name, e.to_string());
        }
        Ok(())
    }
}
