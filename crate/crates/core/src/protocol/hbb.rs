//! GHZ-based variant: Alice keeps photon A and measures it in X or Y, which
//! leaves B and C in one of the primed pair states.

use rand::Rng;

use crate::qcore::{
    prepare_state, Basis, Family, Outcome, Qubit, SignalState, StateClass, StatePreparation, StateVector, TOLERANCE,
};

use super::ProtocolError;

/// Measures A of a GHZ state in `alice_basis` and returns the outcome with
/// the remaining (B, C) state.
pub fn hbb_reduce<R: Rng + ?Sized>(
    ghz: &StateVector,
    alice_basis: Basis,
    rng: &mut R,
) -> Result<(Outcome, StateVector), ProtocolError> {
    if alice_basis == Basis::Z {
        return Err(ProtocolError::BasisNotAllowed {
            family: Family::Hbb,
            basis: Basis::Z,
        });
    }
    let reference = prepare_state(StatePreparation::Ghz)?;
    if ghz.labels() != reference.labels() || ghz.overlap(&reference)? < 1.0 - TOLERANCE {
        return Err(ProtocolError::NotGhz);
    }
    let m = ghz.measure_qubit(Qubit::A, alice_basis, rng)?;
    Ok((m.outcome, m.post_state))
}

/// The pair state Alice's measurement leaves behind:
/// X+ → φ′⁻, X− → ψ′⁺, Y+ → Φ′⁻, Y− → Ψ′⁺.
pub fn hbb_signal(alice_basis: Basis, outcome: Outcome) -> Option<SignalState> {
    let class = match alice_basis {
        Basis::X => StateClass::One,
        Basis::Y => StateClass::Two,
        Basis::Z => return None,
    };
    let bit = match outcome {
        Outcome::Plus => 1,
        Outcome::Minus => 0,
    };
    Some(SignalState::new(Family::Hbb, class, bit))
}
