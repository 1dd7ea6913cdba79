//! Exact check of the states the three participants end up with after the
//! entanglement swap, for every Alice state and Charlie outcome.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qcore::{
    prepare_state, Basis, BellOutcome, Family, Outcome, PauliCorrection, Qubit, SignalState, StateClass,
    StatePreparation, StateVector, TOLERANCE,
};

use super::HarnessError;

/// Alice states in table column order: φ⁻, ψ⁺, Φ⁻, Ψ⁺.
pub const COLUMNS: [(StateClass, u8); 4] = [
    (StateClass::One, 1),
    (StateClass::One, 0),
    (StateClass::Two, 1),
    (StateClass::Two, 0),
];

/// Charlie outcomes in table row order: +z, −z, +x, −x.
pub const ROWS: [(Basis, Outcome); 4] = [
    (Basis::Z, Outcome::Plus),
    (Basis::Z, Outcome::Minus),
    (Basis::X, Outcome::Plus),
    (Basis::X, Outcome::Minus),
];

use Basis::{X, Z};
use Outcome::{Minus as M, Plus as P};

/// Bob's photon B after a `Φ⁺` swap, frozen from the published table.
pub const EXPECTED: [[(Basis, Outcome); 4]; 4] = [
    [(Z, P), (Z, M), (X, M), (X, P)],
    [(Z, M), (Z, P), (X, P), (X, M)],
    [(X, M), (X, P), (Z, M), (Z, P)],
    [(X, P), (X, M), (Z, P), (Z, M)],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Cell {
    pub alice: String,
    pub charlie: String,
    pub expected_bob: String,
    /// Overlap of B with the expected state after a `Φ⁺` outcome.
    pub phi_plus_overlap: f64,
    /// Same after a `Ψ⁻` outcome and the `iσ_y` correction.
    pub psi_minus_overlap: f64,
    /// Overlap with the closed-form collapse in terms of Charlie's (a, b).
    pub collapse_overlap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Result {
    pub cells: Vec<Table1Cell>,
    pub pass: bool,
}

fn label(basis: Basis, outcome: Outcome) -> String {
    format!("{outcome}{}", basis.symbol().to_lowercase())
}

/// B's state when Bob's Bell measurement on (B′, C) gives `bell` (then
/// corrected by `correction`) and Charlie finds C′ in `charlie`.
pub fn swapped_bob_state(
    signal: SignalState,
    bell: BellOutcome,
    correction: PauliCorrection,
    charlie: [Complex64; 2],
) -> Result<StateVector, HarnessError> {
    let alice = signal.state_on(Qubit::B, Qubit::C);
    let fake = prepare_state(StatePreparation::Bell(
        BellOutcome::PhiPlus,
        Qubit::BPrime,
        Qubit::CPrime,
    ))?;
    let joint = alice.tensor(&fake)?;
    let (_, swapped) = joint.project_pair((Qubit::BPrime, Qubit::C), &bell.vector())?;
    let swapped = swapped.ok_or(HarnessError::Assertion("Bell outcome has zero probability".into()))?;
    let corrected = swapped.apply_correction(Qubit::B, correction)?;
    let (_, bob) = corrected.project_qubit(Qubit::CPrime, &charlie)?;
    bob.ok_or(HarnessError::Assertion("Charlie outcome has zero probability".into()))
}

/// Closed-form B for Charlie's state `a|+z⟩ + b|−z⟩` (real amplitudes).
pub fn collapse_formula(signal: SignalState, a: f64, b: f64) -> [f64; 2] {
    match (signal.class, signal.bit) {
        (StateClass::One, 1) => [a, -b],
        (StateClass::One, _) => [b, a],
        (StateClass::Two, 1) => [a - b, -(a + b)],
        (StateClass::Two, _) => [a + b, a - b],
    }
}

pub fn verify_table1() -> Result<Table1Result, HarnessError> {
    let mut cells = Vec::with_capacity(16);
    for (row, &(cb, co)) in ROWS.iter().enumerate() {
        for (col, &(class, bit)) in COLUMNS.iter().enumerate() {
            let signal = SignalState::new(Family::Kki, class, bit);
            let charlie = cb.eigenvector(co);
            let (eb, eo) = EXPECTED[row][col];
            let expected = StateVector::single(Qubit::B, eb.eigenvector(eo))?;
            let direct = swapped_bob_state(signal, BellOutcome::PhiPlus, PauliCorrection::Identity, charlie)?;
            let via_psi = swapped_bob_state(signal, BellOutcome::PsiMinus, PauliCorrection::ISigmaY, charlie)?;
            let [a, b] = collapse_formula(signal, charlie[0].re, charlie[1].re);
            let closed = StateVector::single(Qubit::B, [Complex64::new(a, 0.0), Complex64::new(b, 0.0)])?;
            let phi_plus_overlap = direct.overlap(&expected)?;
            let psi_minus_overlap = via_psi.overlap(&expected)?;
            let collapse_overlap = direct.overlap(&closed)?;
            let pass = [phi_plus_overlap, psi_minus_overlap, collapse_overlap]
                .iter()
                .all(|&o| o >= 1.0 - TOLERANCE);
            cells.push(Table1Cell {
                alice: signal.tag().to_string(),
                charlie: label(cb, co),
                expected_bob: label(eb, eo),
                phi_plus_overlap,
                psi_minus_overlap,
                collapse_overlap,
                pass,
            });
        }
    }
    let pass = cells.iter().all(|c| c.pass);
    Ok(Table1Result { cells, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_cells_pass() {
        let r = verify_table1().unwrap();
        assert_eq!(r.cells.len(), 16);
        assert!(r.pass, "{:#?}", r.cells.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }

    #[test]
    fn named_cells() {
        let r = verify_table1().unwrap();
        let find = |alice: &str, charlie: &str| {
            r.cells
                .iter()
                .find(|c| c.alice == alice && c.charlie == charlie)
                .unwrap()
        };
        assert_eq!(find("phi-", "+z").expected_bob, "+z");
        assert_eq!(find("Psi+", "-x").expected_bob, "-z");
    }

    #[test]
    fn collapse_formula_for_arbitrary_real_amplitudes() {
        for k in 0..24 {
            let theta = k as f64 * 0.27;
            let (a, b) = (theta.cos(), theta.sin());
            let charlie = [Complex64::new(a, 0.0), Complex64::new(b, 0.0)];
            for signal in SignalState::all(Family::Kki) {
                let bob = swapped_bob_state(signal, BellOutcome::PhiPlus, PauliCorrection::Identity, charlie).unwrap();
                let [x, y] = collapse_formula(signal, a, b);
                let closed = StateVector::single(Qubit::B, [Complex64::new(x, 0.0), Complex64::new(y, 0.0)]).unwrap();
                assert!(bob.overlap(&closed).unwrap() > 1.0 - 1e-9);
            }
        }
    }
}
