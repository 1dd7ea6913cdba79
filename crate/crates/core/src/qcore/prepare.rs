use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{c, kron, Basis, BellOutcome, Ket, Outcome, PairKet, TwoQubitBasis};
use super::state::{Qubit, StateVector};
use super::QcoreError;

/// Which family of two-photon signal states a scheme uses.
///
/// `Kki` states are built from Z and X eigenstates; `Hbb` states are the
/// pair states left after Alice measures her GHZ photon, built from X and Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Kki,
    Hbb,
}

impl Family {
    /// Bases the agents choose between.
    pub fn agent_bases(self) -> [Basis; 2] {
        match self {
            Family::Kki => [Basis::Z, Basis::X],
            Family::Hbb => [Basis::X, Basis::Y],
        }
    }
}

/// Basis set (class) Alice announces: 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateClass {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl StateClass {
    pub const ALL: [StateClass; 2] = [StateClass::One, StateClass::Two];

    pub fn number(self) -> u8 {
        match self {
            StateClass::One => 1,
            StateClass::Two => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(StateClass::One),
            2 => Some(StateClass::Two),
            _ => None,
        }
    }
}

/// One of the four two-photon states Alice may send.
///
/// For the KKI family: class 1 holds `ψ⁺` (bit 0) and `φ⁻` (bit 1); class 2
/// holds `Ψ⁺` (bit 0) and `Φ⁻` (bit 1). The HBB family uses the primed
/// counterparts with the same class and bit layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignalState {
    pub family: Family,
    pub class: StateClass,
    pub bit: u8,
}

/// A pair state of the form `(|b₀⟩|c₀⟩ ± |b₁⟩|c₁⟩)/√2`.
#[derive(Debug, Clone, Copy)]
struct PairTemplate {
    b: [Ket; 2],
    c: [Ket; 2],
    negative: bool,
}

impl PairTemplate {
    fn vector(&self, flip_sign: bool) -> PairKet {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let sign = if self.negative ^ flip_sign { -1.0 } else { 1.0 };
        let t0 = kron(&self.b[0], &self.c[0]);
        let t1 = kron(&self.b[1], &self.c[1]);
        let mut v = [c(0.0, 0.0); 4];
        for i in 0..4 {
            v[i] = (t0[i] + t1[i] * sign) * h;
        }
        v
    }
}

impl SignalState {
    pub fn new(family: Family, class: StateClass, bit: u8) -> Self {
        assert!(bit <= 1, "signal bit must be 0 or 1");
        Self { family, class, bit }
    }

    pub fn all(family: Family) -> [SignalState; 4] {
        [
            Self::new(family, StateClass::One, 0),
            Self::new(family, StateClass::One, 1),
            Self::new(family, StateClass::Two, 0),
            Self::new(family, StateClass::Two, 1),
        ]
    }

    fn template(self) -> PairTemplate {
        use Outcome::{Minus as M, Plus as P};
        let k = |b: Basis, o: Outcome| b.eigenvector(o);
        let (bb, cb) = match self.family {
            Family::Kki => (
                Basis::Z,
                if self.class == StateClass::One {
                    Basis::Z
                } else {
                    Basis::X
                },
            ),
            Family::Hbb => (
                Basis::X,
                if self.class == StateClass::One {
                    Basis::X
                } else {
                    Basis::Y
                },
            ),
        };
        // Bob's half always runs |+⟩, |−⟩; Charlie's order and the sign vary.
        let (c_order, negative) = match (self.family, self.class, self.bit) {
            (Family::Kki, StateClass::One, 0) => ([M, P], false), // ψ⁺
            (Family::Kki, StateClass::One, _) => ([P, M], true),  // φ⁻
            (Family::Kki, StateClass::Two, 0) => ([P, M], false), // Ψ⁺
            (Family::Kki, StateClass::Two, _) => ([M, P], true),  // Φ⁻
            (Family::Hbb, StateClass::One, 0) => ([M, P], false), // ψ′⁺
            (Family::Hbb, StateClass::One, _) => ([P, M], false), // φ′⁻
            (Family::Hbb, StateClass::Two, 0) => ([P, M], false), // Ψ′⁺
            (Family::Hbb, StateClass::Two, _) => ([M, P], false), // Φ′⁻
        };
        PairTemplate {
            b: [k(bb, P), k(bb, M)],
            c: [k(cb, c_order[0]), k(cb, c_order[1])],
            negative,
        }
    }

    /// Amplitudes over (B, C).
    pub fn vector(self) -> PairKet {
        self.template().vector(false)
    }

    /// The orthogonal partner obtained by flipping the relative sign.
    pub fn complement_vector(self) -> PairKet {
        self.template().vector(true)
    }

    pub fn state(self) -> StateVector {
        self.state_on(Qubit::B, Qubit::C)
    }

    pub fn state_on(self, first: Qubit, second: Qubit) -> StateVector {
        StateVector::new(vec![first, second], self.vector().to_vec()).expect("signal states are normalized")
    }

    /// ASCII tag used in transcripts: `psi+`, `phi-`, `Psi+`, `Phi-`, primed for HBB.
    pub fn tag(self) -> &'static str {
        match (self.family, self.class, self.bit) {
            (Family::Kki, StateClass::One, 0) => "psi+",
            (Family::Kki, StateClass::One, _) => "phi-",
            (Family::Kki, StateClass::Two, 0) => "Psi+",
            (Family::Kki, StateClass::Two, _) => "Phi-",
            (Family::Hbb, StateClass::One, 0) => "psi'+",
            (Family::Hbb, StateClass::One, _) => "phi'-",
            (Family::Hbb, StateClass::Two, 0) => "Psi'+",
            (Family::Hbb, StateClass::Two, _) => "Phi'-",
        }
    }
}

impl fmt::Display for SignalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Joint basis that discriminates the two signal states of one class:
/// `[bit-0 state, bit-1 state, complement of bit 0, complement of bit 1]`.
pub fn class_basis(family: Family, class: StateClass) -> TwoQubitBasis {
    let s0 = SignalState::new(family, class, 0);
    let s1 = SignalState::new(family, class, 1);
    TwoQubitBasis::new([s0.vector(), s1.vector(), s0.complement_vector(), s1.complement_vector()])
        .expect("class bases are orthonormal")
}

/// Recipe for [`prepare_state`].
#[derive(Debug, Clone, PartialEq)]
pub enum StatePreparation {
    /// One of Alice's signal states on (B, C).
    Signal(SignalState),
    /// Z-basis Bell state on the given ordered pair.
    Bell(BellOutcome, Qubit, Qubit),
    /// `(|+z+z+z⟩ + |−z−z−z⟩)/√2` on (A, B, C).
    Ghz,
    /// `a|+z⟩ + b|−z⟩`, normalized.
    SingleQubit { qubit: Qubit, a: Complex64, b: Complex64 },
    /// Eigenstate of a basis.
    Eigen {
        qubit: Qubit,
        basis: Basis,
        outcome: Outcome,
    },
    Explicit {
        labels: Vec<Qubit>,
        amplitudes: Vec<Complex64>,
    },
}

pub fn prepare_state(spec: StatePreparation) -> Result<StateVector, QcoreError> {
    match spec {
        StatePreparation::Signal(s) => Ok(s.state()),
        StatePreparation::Bell(b, q1, q2) => StateVector::new(vec![q1, q2], b.vector().to_vec()),
        StatePreparation::Ghz => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut amps = vec![c(0.0, 0.0); 8];
            amps[0] = c(h, 0.0);
            amps[7] = c(h, 0.0);
            StateVector::new(vec![Qubit::A, Qubit::B, Qubit::C], amps)
        }
        StatePreparation::SingleQubit { qubit, a, b } => StateVector::single(qubit, [a, b]),
        StatePreparation::Eigen { qubit, basis, outcome } => StateVector::single(qubit, basis.eigenvector(outcome)),
        StatePreparation::Explicit { labels, amplitudes } => StateVector::new(labels, amplitudes),
    }
}
