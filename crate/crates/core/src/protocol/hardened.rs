//! Countermeasure: test rounds carry two independent single photons, so each
//! agent's leg is checked against Alice alone, BB84 style.

use rand::Rng;

use crate::qcore::{Family, Outcome, Qubit, StateVector};

use super::types::LegState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardenedTestRound {
    pub bob: LegState,
    pub charlie: LegState,
}

impl HardenedTestRound {
    /// Photon B for Bob and photon C for Charlie.
    pub fn photons(&self) -> (StateVector, StateVector) {
        let b = StateVector::single(Qubit::B, self.bob.basis.eigenvector(self.bob.outcome)).expect("eigenstate");
        let c =
            StateVector::single(Qubit::C, self.charlie.basis.eigenvector(self.charlie.outcome)).expect("eigenstate");
        (b, c)
    }
}

fn random_leg<R: Rng + ?Sized>(family: Family, rng: &mut R) -> LegState {
    let bases = family.agent_bases();
    LegState {
        basis: bases[rng.gen_range(0..2)],
        outcome: Outcome::from_index(rng.gen_range(0..2)),
    }
}

pub fn prepare_hardened_test_round<R: Rng + ?Sized>(family: Family, rng: &mut R) -> HardenedTestRound {
    HardenedTestRound {
        bob: random_leg(family, rng),
        charlie: random_leg(family, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Schmidt rank of a two-qubit state via the 2×2 coefficient determinant.
    fn is_product(s: &StateVector) -> bool {
        let a = s.amplitudes();
        (a[0] * a[3] - a[1] * a[2]).norm() < 1e-12
    }

    #[test]
    fn photons_form_a_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let round = prepare_hardened_test_round(Family::Kki, &mut rng);
            let (b, c) = round.photons();
            assert!(is_product(&b.tensor(&c).unwrap()));
        }
    }

    #[test]
    fn legs_cover_both_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rounds: Vec<_> = (0..400)
            .map(|_| prepare_hardened_test_round(Family::Kki, &mut rng))
            .collect();
        for basis in Family::Kki.agent_bases() {
            assert!(rounds.iter().any(|r| r.bob.basis == basis));
            assert!(rounds.iter().any(|r| r.charlie.basis == basis));
        }
    }
}
