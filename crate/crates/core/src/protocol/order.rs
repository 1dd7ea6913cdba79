//! Checks that a log of public announcements follows an ordering policy.

use std::collections::BTreeMap;

use thiserror::Error;

use super::types::{Announcement, AnnouncementContent, Mode, OrderingPolicy, Party, Phase};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderViolation {
    #[error("sequence number {seq} is used twice")]
    DuplicateSeq { seq: u64 },
    #[error("announcement {seq} ({phase:?}) comes after a {after:?} announcement")]
    PhaseOutOfOrder { seq: u64, phase: Phase, after: Phase },
    #[error("announcement {seq}: {party} may not make a {phase:?} announcement")]
    WrongParty { seq: u64, party: Party, phase: Phase },
    #[error("round {round_id} has {count} designations")]
    Designation { round_id: u64, count: usize },
    #[error("round {round_id}: outcome and basis declarations break the speaking order")]
    SpeakingOrder { round_id: u64 },
}

fn allowed(phase: Phase, party: Party) -> bool {
    match phase {
        Phase::Designation | Phase::Class | Phase::State => party == Party::Alice,
        Phase::Detection | Phase::Outcome | Phase::Basis => party != Party::Alice,
    }
}

/// Validates `log` against `ordering` in `mode`. The log may be in any
/// order; sequence numbers define the order.
pub fn validate_order(log: &[Announcement], ordering: OrderingPolicy, mode: Mode) -> Result<(), OrderViolation> {
    let phases = ordering.phases(mode);
    let rank = |p: Phase| phases.iter().position(|&q| q == p).expect("every phase is ranked");
    let mut sorted: Vec<&Announcement> = log.iter().collect();
    sorted.sort_by_key(|a| a.seq);

    let mut last: Option<(u64, Phase)> = None;
    for a in &sorted {
        let phase = a.content.phase();
        if let Some((seq, prev)) = last {
            if seq == a.seq {
                return Err(OrderViolation::DuplicateSeq { seq });
            }
            if rank(phase) < rank(prev) {
                return Err(OrderViolation::PhaseOutOfOrder {
                    seq: a.seq,
                    phase,
                    after: prev,
                });
            }
        }
        if !allowed(phase, a.party) {
            return Err(OrderViolation::WrongParty {
                seq: a.seq,
                party: a.party,
                phase,
            });
        }
        last = Some((a.seq, phase));
    }

    let mut per_round: BTreeMap<u64, Vec<&Announcement>> = BTreeMap::new();
    for a in &sorted {
        per_round.entry(a.round_id).or_default().push(a);
    }
    for (&round_id, anns) in &per_round {
        let count = anns
            .iter()
            .filter(|a| matches!(a.content, AnnouncementContent::Designation(_)))
            .count();
        if count != 1 {
            return Err(OrderViolation::Designation { round_id, count });
        }
        let outcome_speakers: Vec<Party> = anns
            .iter()
            .filter(|a| a.content.phase() == Phase::Outcome)
            .map(|a| a.party)
            .collect();
        let basis_speakers: Vec<Party> = anns
            .iter()
            .filter(|a| matches!(a.content, AnnouncementContent::Basis(_)))
            .map(|a| a.party)
            .collect();
        let ok = if ordering.alternates() {
            // The first to declare the outcome is the last to declare the basis.
            match (outcome_speakers.as_slice(), basis_speakers.as_slice()) {
                ([first, _], [_, last]) => first == last,
                _ => true,
            }
        } else {
            // Bob always speaks first.
            [&outcome_speakers, &basis_speakers]
                .iter()
                .all(|s| s.len() < 2 || s[0] == Party::Bob)
        };
        if !ok {
            return Err(OrderViolation::SpeakingOrder { round_id });
        }
    }
    Ok(())
}
