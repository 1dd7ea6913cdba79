use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::QcoreError;

/// Single-qubit amplitudes `(⟨+z|v⟩, ⟨−z|v⟩)`.
pub type Ket = [Complex64; 2];

/// Two-qubit amplitudes in Z product order, first qubit most significant.
pub type PairKet = [Complex64; 4];

pub(crate) const TOLERANCE: f64 = 1e-9;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn kron(a: &Ket, b: &Ket) -> PairKet {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

/// Spin measurement axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    /// Eigenvectors `[|+⟩, |−⟩]` of this basis.
    pub fn eigenvectors(self) -> [Ket; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Basis::Z => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
            Basis::X => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
            Basis::Y => [[c(h, 0.0), c(0.0, h)], [c(h, 0.0), c(0.0, -h)]],
        }
    }

    pub fn eigenvector(self, outcome: Outcome) -> Ket {
        self.eigenvectors()[outcome.index()]
    }

    /// Complex-conjugated eigenvectors. Measuring one half of `Φ⁺` in this
    /// basis reproduces the outcome obtained on the other half in `self`.
    pub fn conjugate_eigenvectors(self) -> [Ket; 2] {
        self.eigenvectors().map(|k| [k[0].conj(), k[1].conj()])
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Basis::Z => "Z",
            Basis::X => "X",
            Basis::Y => "Y",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Result of a single-qubit projective measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Outcome {
    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    /// `+` encodes 0, `−` encodes 1.
    pub fn bit(self) -> u8 {
        self.index() as u8
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+",
            Outcome::Minus => "-",
        })
    }
}

/// The four Z-basis Bell states, in the order used by [`TwoQubitBasis::bell`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    pub fn vector(self) -> PairKet {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = c(0.0, 0.0);
        match self {
            BellOutcome::PhiPlus => [c(h, 0.0), z, z, c(h, 0.0)],
            BellOutcome::PhiMinus => [c(h, 0.0), z, z, c(-h, 0.0)],
            BellOutcome::PsiPlus => [z, c(h, 0.0), c(h, 0.0), z],
            BellOutcome::PsiMinus => [z, c(h, 0.0), c(-h, 0.0), z],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellOutcome::PhiPlus => "Phi+",
            BellOutcome::PhiMinus => "Phi-",
            BellOutcome::PsiPlus => "Psi+",
            BellOutcome::PsiMinus => "Psi-",
        })
    }
}

/// Local unitary used by the attacker to realign a swapped photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliCorrection {
    Identity,
    /// `|+z⟩⟨−z| − |−z⟩⟨+z|`
    ISigmaY,
    SigmaX,
    SigmaZ,
}

impl PauliCorrection {
    /// Row-major 2×2 matrix.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = c(1.0, 0.0);
        let z = c(0.0, 0.0);
        match self {
            PauliCorrection::Identity => [[o, z], [z, o]],
            PauliCorrection::ISigmaY => [[z, o], [-o, z]],
            PauliCorrection::SigmaX => [[z, o], [o, z]],
            PauliCorrection::SigmaZ => [[o, z], [z, -o]],
        }
    }
}

/// Four orthonormal two-qubit vectors defining a joint projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitBasis {
    vectors: [PairKet; 4],
}

impl TwoQubitBasis {
    pub fn new(vectors: [PairKet; 4]) -> Result<Self, QcoreError> {
        for i in 0..4 {
            for j in 0..4 {
                let ip: Complex64 = vectors[i]
                    .iter()
                    .zip(vectors[j].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                if (ip - c(expected, 0.0)).norm() > TOLERANCE {
                    return Err(QcoreError::NonOrthonormalBasis { i, j });
                }
            }
        }
        Ok(Self { vectors })
    }

    pub fn bell() -> Self {
        Self {
            vectors: BellOutcome::ALL.map(BellOutcome::vector),
        }
    }

    pub fn vectors(&self) -> &[PairKet; 4] {
        &self.vectors
    }
}
