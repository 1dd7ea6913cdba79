//! Which basis pairs are correlated for a class, and how each agent turns an
//! outcome into a key bit so that Alice's bit is the XOR of the two.
//!
//! The per-party table is shipped in `data/bit_convention.tsv` and can be
//! regenerated from the signal-state definitions with [`BitConvention::generate`].

use std::sync::OnceLock;

use crate::qcore::{Basis, Family, Outcome, Qubit, SignalState, StateClass, StateVector};

use super::types::{Party, RoundRecord};
use super::ProtocolError;

const SHIPPED: &str = include_str!("../../data/bit_convention.tsv");

fn check_allowed(family: Family, basis: Basis) -> Result<(), ProtocolError> {
    if family.agent_bases().contains(&basis) {
        Ok(())
    } else {
        Err(ProtocolError::BasisNotAllowed { family, basis })
    }
}

/// Whether agents measuring in `bob` and `charlie` obtain perfectly
/// correlated outcomes for every state of `class`. Class 1 correlates equal
/// bases, class 2 unequal ones, in both families.
pub fn correlated_bases(family: Family, class: StateClass, bob: Basis, charlie: Basis) -> Result<bool, ProtocolError> {
    check_allowed(family, bob)?;
    check_allowed(family, charlie)?;
    Ok(match class {
        StateClass::One => bob == charlie,
        StateClass::Two => bob != charlie,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ConventionRow {
    pub family: Family,
    pub class: StateClass,
    pub bob_basis: Basis,
    pub charlie_basis: Basis,
    pub party: Party,
    pub outcome: Outcome,
    pub bit: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitConvention {
    rows: Vec<ConventionRow>,
}

fn joint_distribution(state: &StateVector, bob: Basis, charlie: Basis) -> [[f64; 2]; 2] {
    let mut p = [[0.0; 2]; 2];
    for ob in [Outcome::Plus, Outcome::Minus] {
        let (pb, rest) = state.project_qubit(Qubit::B, &bob.eigenvector(ob)).expect("B present");
        if let Some(rest) = rest {
            let pc = rest.outcome_probabilities(Qubit::C, charlie).expect("C present");
            p[ob.index()] = [pb * pc[0], pb * pc[1]];
        }
    }
    p
}

/// For a deterministic-correlated distribution, Charlie's outcome as a
/// function of Bob's.
fn partner_map(p: &[[f64; 2]; 2]) -> Option<[Outcome; 2]> {
    let mut map = [Outcome::Plus; 2];
    for ob in 0..2 {
        let row = p[ob];
        if (row[0] + row[1] - 0.5).abs() > 1e-9 {
            return None;
        }
        map[ob] = if row[1] < 1e-9 {
            Outcome::Plus
        } else if row[0] < 1e-9 {
            Outcome::Minus
        } else {
            return None;
        };
    }
    Some(map)
}

/// Brute-force check of whether a basis pair yields deterministic
/// correlations that distinguish the two states of `class`.
pub fn correlated_by_enumeration(family: Family, class: StateClass, bob: Basis, charlie: Basis) -> bool {
    let m0 = partner_map(&joint_distribution(
        &SignalState::new(family, class, 0).state(),
        bob,
        charlie,
    ));
    let m1 = partner_map(&joint_distribution(
        &SignalState::new(family, class, 1).state(),
        bob,
        charlie,
    ));
    matches!((m0, m1), (Some(a), Some(b)) if a[0] != b[0] && a[1] != b[1])
}

impl BitConvention {
    /// Rebuilds the table from the signal-state amplitudes. Charlie's bit is
    /// his outcome; Bob's bit is chosen so the bit-0 state of the class XORs
    /// to 0.
    pub fn generate() -> Self {
        let mut rows = Vec::new();
        for family in [Family::Kki, Family::Hbb] {
            for class in StateClass::ALL {
                for bob in family.agent_bases() {
                    for charlie in family.agent_bases() {
                        if !correlated_by_enumeration(family, class, bob, charlie) {
                            continue;
                        }
                        let s0 = SignalState::new(family, class, 0).state();
                        let map = partner_map(&joint_distribution(&s0, bob, charlie)).expect("correlated");
                        for ob in [Outcome::Plus, Outcome::Minus] {
                            rows.push(ConventionRow {
                                family,
                                class,
                                bob_basis: bob,
                                charlie_basis: charlie,
                                party: Party::Bob,
                                outcome: ob,
                                bit: map[ob.index()].bit(),
                            });
                        }
                        for oc in [Outcome::Plus, Outcome::Minus] {
                            rows.push(ConventionRow {
                                family,
                                class,
                                bob_basis: bob,
                                charlie_basis: charlie,
                                party: Party::Charlie,
                                outcome: oc,
                                bit: oc.bit(),
                            });
                        }
                    }
                }
            }
        }
        rows.sort();
        Self { rows }
    }

    /// The checked-in table.
    pub fn shipped() -> &'static BitConvention {
        static TABLE: OnceLock<BitConvention> = OnceLock::new();
        TABLE.get_or_init(|| Self::parse(SHIPPED).expect("shipped bit convention parses"))
    }

    pub fn rows(&self) -> &[ConventionRow] {
        &self.rows
    }

    pub fn rows_for(&self, family: Family) -> impl Iterator<Item = &ConventionRow> {
        self.rows.iter().filter(move |r| r.family == family)
    }

    pub fn bit(
        &self,
        family: Family,
        class: StateClass,
        bob: Basis,
        charlie: Basis,
        party: Party,
        outcome: Outcome,
    ) -> Option<u8> {
        self.rows
            .iter()
            .find(|r| {
                r.family == family
                    && r.class == class
                    && r.bob_basis == bob
                    && r.charlie_basis == charlie
                    && r.party == party
                    && r.outcome == outcome
            })
            .map(|r| r.bit)
    }

    /// Outcome that `party` must report to end up with `bit`.
    pub fn outcome_for(
        &self,
        family: Family,
        class: StateClass,
        bob: Basis,
        charlie: Basis,
        party: Party,
        bit: u8,
    ) -> Option<Outcome> {
        [Outcome::Plus, Outcome::Minus]
            .into_iter()
            .find(|&o| self.bit(family, class, bob, charlie, party, o) == Some(bit))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("family\tclass\tbob_basis\tcharlie_basis\tparty\toutcome\tbit\n");
        for r in &self.rows {
            let family = match r.family {
                Family::Kki => "kki",
                Family::Hbb => "hbb",
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                family,
                r.class.number(),
                r.bob_basis,
                r.charlie_basis,
                r.party,
                r.outcome,
                r.bit
            ));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let basis = |s: &str| match s {
            "Z" => Ok(Basis::Z),
            "X" => Ok(Basis::X),
            "Y" => Ok(Basis::Y),
            other => Err(format!("bad basis {other:?}")),
        };
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 7 {
                return Err(format!("line {}: expected 7 fields", n + 1));
            }
            let family = match f[0] {
                "kki" => Family::Kki,
                "hbb" => Family::Hbb,
                other => return Err(format!("line {}: bad family {other:?}", n + 1)),
            };
            let class = f[1]
                .parse::<u8>()
                .ok()
                .and_then(StateClass::from_number)
                .ok_or_else(|| format!("line {}: bad class", n + 1))?;
            let party = match f[4] {
                "bob" => Party::Bob,
                "charlie" => Party::Charlie,
                other => return Err(format!("line {}: bad party {other:?}", n + 1)),
            };
            let outcome = match f[5] {
                "+" => Outcome::Plus,
                "-" => Outcome::Minus,
                other => return Err(format!("line {}: bad outcome {other:?}", n + 1)),
            };
            let bit = match f[6] {
                "0" => 0,
                "1" => 1,
                other => return Err(format!("line {}: bad bit {other:?}", n + 1)),
            };
            rows.push(ConventionRow {
                family,
                class,
                bob_basis: basis(f[2])?,
                charlie_basis: basis(f[3])?,
                party,
                outcome,
                bit,
            });
        }
        rows.sort();
        Ok(Self { rows })
    }
}

/// Key bits `(k_B, k_C)` for a round whose class Alice has announced.
pub fn extract_bits(
    family: Family,
    record: &RoundRecord,
    announced_class: StateClass,
) -> Result<(u8, u8), ProtocolError> {
    let (Some(bb), Some(cb)) = (record.bob_basis, record.charlie_basis) else {
        return Err(ProtocolError::MissingData {
            round_id: record.round_id,
            what: "basis",
        });
    };
    let (Some(ob), Some(oc)) = (record.bob_outcome, record.charlie_outcome) else {
        return Err(ProtocolError::MissingData {
            round_id: record.round_id,
            what: "outcome",
        });
    };
    if !correlated_bases(family, announced_class, bb, cb)? {
        return Err(ProtocolError::UncorrelatedBases {
            round_id: record.round_id,
        });
    }
    let table = BitConvention::shipped();
    let kb = table.bit(family, announced_class, bb, cb, Party::Bob, ob);
    let kc = table.bit(family, announced_class, bb, cb, Party::Charlie, oc);
    match (kb, kc) {
        (Some(kb), Some(kc)) => Ok((kb, kc)),
        _ => Err(ProtocolError::UncorrelatedBases {
            round_id: record.round_id,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::types::{AliceChoice, PreparedState, RoundKind};

    fn record(tag: SignalState, bases: (Basis, Basis), outcomes: (Outcome, Outcome)) -> RoundRecord {
        RoundRecord {
            round_id: 0,
            kind: RoundKind::Key,
            alice: AliceChoice::Entangled(PreparedState { tag }),
            bob_received: true,
            charlie_received: true,
            bob_detected: Some(true),
            charlie_detected: Some(true),
            bob_basis: Some(bases.0),
            charlie_basis: Some(bases.1),
            bob_outcome: Some(outcomes.0),
            charlie_outcome: Some(outcomes.1),
            announcements: vec![],
            attack: None,
            residue: None,
        }
    }

    use Basis::{X, Z};
    use Outcome::{Minus, Plus};

    #[test]
    fn correlated_examples() {
        assert!(correlated_bases(Family::Kki, StateClass::One, Z, Z).unwrap());
        assert!(!correlated_bases(Family::Kki, StateClass::One, Z, X).unwrap());
        assert!(correlated_bases(Family::Kki, StateClass::Two, Z, X).unwrap());
        assert!(matches!(
            correlated_bases(Family::Kki, StateClass::One, Basis::Y, Z),
            Err(ProtocolError::BasisNotAllowed { .. })
        ));
        assert!(correlated_bases(Family::Hbb, StateClass::One, Z, X).is_err());
    }

    #[test]
    fn correlation_rule_matches_enumeration() {
        for family in [Family::Kki, Family::Hbb] {
            for class in StateClass::ALL {
                for b in family.agent_bases() {
                    for c in family.agent_bases() {
                        assert_eq!(
                            correlated_bases(family, class, b, c).unwrap(),
                            correlated_by_enumeration(family, class, b, c),
                            "{family:?} {class:?} {b} {c}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn uncorrelated_pair_is_uniform() {
        let s = SignalState::new(Family::Kki, StateClass::One, 0).state();
        let p = joint_distribution(&s, Z, X);
        for row in p {
            for v in row {
                assert!((v - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn extract_examples() {
        let kki = |class, bit| SignalState::new(Family::Kki, class, bit);
        let (b, c) = extract_bits(
            Family::Kki,
            &record(kki(StateClass::One, 0), (Z, Z), (Plus, Minus)),
            StateClass::One,
        )
        .unwrap();
        assert_eq!(b ^ c, 0);
        let (b, c) = extract_bits(
            Family::Kki,
            &record(kki(StateClass::One, 1), (X, X), (Plus, Minus)),
            StateClass::One,
        )
        .unwrap();
        assert_eq!(b ^ c, 1);
        let (b, c) = extract_bits(
            Family::Kki,
            &record(kki(StateClass::Two, 0), (Z, X), (Plus, Plus)),
            StateClass::Two,
        )
        .unwrap();
        assert_eq!(b ^ c, 0);
    }

    #[test]
    fn extract_rejects_uncorrelated() {
        let s = SignalState::new(Family::Kki, StateClass::One, 0);
        let r = extract_bits(Family::Kki, &record(s, (Z, X), (Plus, Plus)), StateClass::One);
        assert!(matches!(r, Err(ProtocolError::UncorrelatedBases { .. })));
    }

    #[test]
    fn table_has_sixteen_rows_per_family() {
        let t = BitConvention::shipped();
        assert_eq!(t.rows_for(Family::Kki).count(), 16);
        assert_eq!(t.rows_for(Family::Hbb).count(), 16);
    }

    #[test]
    fn shipped_table_regenerates() {
        let generated = BitConvention::generate();
        assert_eq!(
            &generated,
            BitConvention::shipped(),
            "regenerated table:\n{}",
            generated.to_tsv()
        );
        assert_eq!(generated.to_tsv(), SHIPPED);
    }

    #[test]
    fn honest_completeness_over_all_supported_outcomes() {
        let t = BitConvention::shipped();
        for family in [Family::Kki, Family::Hbb] {
            for s in SignalState::all(family) {
                for b in family.agent_bases() {
                    for c in family.agent_bases() {
                        if !correlated_bases(family, s.class, b, c).unwrap() {
                            continue;
                        }
                        let p = joint_distribution(&s.state(), b, c);
                        for ob in [Plus, Minus] {
                            for oc in [Plus, Minus] {
                                if p[ob.index()][oc.index()] > 1e-12 {
                                    let kb = t.bit(family, s.class, b, c, Party::Bob, ob).unwrap();
                                    let kc = t.bit(family, s.class, b, c, Party::Charlie, oc).unwrap();
                                    assert_eq!(kb ^ kc, s.bit, "{s} {b}{c} {ob}{oc}");
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
