use rand::Rng;

use super::basis::{Basis, Ket, Outcome, PauliCorrection, TwoQubitBasis};
use super::state::{Qubit, StateVector};
use super::QcoreError;

/// All photons of one protocol round, kept as a set of mutually unentangled
/// registers. Registers are merged on demand when a joint measurement spans
/// two of them and shrink as qubits are measured.
#[derive(Debug, Clone, Default)]
pub struct Lab {
    registers: Vec<StateVector>,
}

impl Lab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, state: StateVector) -> Result<(), QcoreError> {
        if let Some(&q) = state.labels().iter().find(|&&q| self.holds(q)) {
            return Err(QcoreError::DuplicateLabel(q));
        }
        if state.num_qubits() > 0 {
            self.registers.push(state);
        }
        Ok(())
    }

    pub fn holds(&self, qubit: Qubit) -> bool {
        self.registers.iter().any(|r| r.contains(qubit))
    }

    fn index_of(&self, qubit: Qubit) -> Result<usize, QcoreError> {
        self.registers
            .iter()
            .position(|r| r.contains(qubit))
            .ok_or(QcoreError::UnknownQubit(qubit))
    }

    fn replace(&mut self, idx: usize, state: StateVector) {
        if state.num_qubits() == 0 {
            self.registers.swap_remove(idx);
        } else {
            self.registers[idx] = state;
        }
    }

    pub fn measure<R: Rng + ?Sized>(&mut self, qubit: Qubit, basis: Basis, rng: &mut R) -> Result<Outcome, QcoreError> {
        self.measure_in(qubit, &basis.eigenvectors(), rng)
    }

    pub fn measure_in<R: Rng + ?Sized>(
        &mut self,
        qubit: Qubit,
        kets: &[Ket; 2],
        rng: &mut R,
    ) -> Result<Outcome, QcoreError> {
        let idx = self.index_of(qubit)?;
        let m = self.registers[idx].measure_qubit_in(qubit, kets, rng)?;
        self.replace(idx, m.post_state);
        Ok(m.outcome)
    }

    /// Joint measurement of an ordered pair; returns the basis index.
    pub fn measure_pair<R: Rng + ?Sized>(
        &mut self,
        pair: (Qubit, Qubit),
        basis: &TwoQubitBasis,
        rng: &mut R,
    ) -> Result<usize, QcoreError> {
        let i = self.index_of(pair.0)?;
        let j = self.index_of(pair.1)?;
        let idx = if i == j {
            i
        } else {
            let (lo, hi) = if i < j { (i, j) } else { (j, i) };
            let second = self.registers.swap_remove(hi);
            let merged = self.registers[lo].tensor(&second)?;
            self.registers[lo] = merged;
            lo
        };
        let m = self.registers[idx].measure_pair(pair, basis, rng)?;
        self.replace(idx, m.post_state);
        Ok(m.index)
    }

    pub fn apply(&mut self, qubit: Qubit, correction: PauliCorrection) -> Result<(), QcoreError> {
        let idx = self.index_of(qubit)?;
        self.registers[idx] = self.registers[idx].apply_correction(qubit, correction)?;
        Ok(())
    }

    /// Removes a photon that left the experiment. Measuring it in Z and
    /// forgetting the result gives the remaining photons the same statistics
    /// as tracing it out.
    pub fn discard<R: Rng + ?Sized>(&mut self, qubit: Qubit, rng: &mut R) -> Result<(), QcoreError> {
        self.measure(qubit, Basis::Z, rng).map(|_| ())
    }

    /// The joint state of exactly `qubits`, in that order, provided they are
    /// not entangled with anything else in the lab.
    pub fn joint_state(&self, qubits: &[Qubit]) -> Option<StateVector> {
        let mut idxs: Vec<usize> = Vec::new();
        for &q in qubits {
            let i = self.index_of(q).ok()?;
            if !idxs.contains(&i) {
                idxs.push(i);
            }
        }
        let mut combined = StateVector::empty();
        for i in idxs {
            combined = combined.tensor(&self.registers[i]).ok()?;
        }
        if combined.num_qubits() != qubits.len() {
            return None;
        }
        combined.reordered(qubits).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{prepare_state, BellOutcome, StatePreparation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pair_measurement_merges_registers() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut lab = Lab::new();
        lab.insert(prepare_state(StatePreparation::Bell(BellOutcome::PsiPlus, Qubit::B, Qubit::C)).unwrap())
            .unwrap();
        lab.insert(
            prepare_state(StatePreparation::Bell(
                BellOutcome::PhiPlus,
                Qubit::BPrime,
                Qubit::CPrime,
            ))
            .unwrap(),
        )
        .unwrap();
        lab.measure_pair((Qubit::BPrime, Qubit::C), &TwoQubitBasis::bell(), &mut rng)
            .unwrap();
        assert!(!lab.holds(Qubit::C));
        let bc = lab.joint_state(&[Qubit::B, Qubit::CPrime]).unwrap();
        assert_eq!(bc.num_qubits(), 2);
    }

    #[test]
    fn joint_state_refuses_partial_register() {
        let mut lab = Lab::new();
        lab.insert(prepare_state(StatePreparation::Bell(BellOutcome::PhiPlus, Qubit::B, Qubit::C)).unwrap())
            .unwrap();
        assert!(lab.joint_state(&[Qubit::B]).is_none());
        assert!(lab.joint_state(&[Qubit::C, Qubit::B]).is_some());
    }

    #[test]
    fn duplicate_insert_rejected() {
        let mut lab = Lab::new();
        let s = prepare_state(StatePreparation::Ghz).unwrap();
        lab.insert(s.clone()).unwrap();
        assert!(lab.insert(s).is_err());
    }
}
