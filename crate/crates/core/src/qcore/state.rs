use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::basis::{c, Basis, Ket, Outcome, PauliCorrection, TwoQubitBasis, TOLERANCE};
use super::QcoreError;

/// Largest register the simulator will build. Four qubits are needed when a
/// Bell measurement joins Alice's pair with the attacker's fake pair before
/// either far end has been measured.
pub const MAX_QUBITS: usize = 4;

const MIN_NORM: f64 = 1e-12;

/// Photon identifiers used throughout the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Qubit {
    A,
    B,
    C,
    #[serde(rename = "B'")]
    BPrime,
    #[serde(rename = "C'")]
    CPrime,
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Qubit::A => "A",
            Qubit::B => "B",
            Qubit::C => "C",
            Qubit::BPrime => "B'",
            Qubit::CPrime => "C'",
        })
    }
}

/// Normalized pure state over a small set of labeled qubits.
///
/// Amplitudes are stored in Z product order with the first label as the most
/// significant bit, `|+z⟩` before `|−z⟩`. Values are immutable; every
/// operation returns a fresh state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    labels: Vec<Qubit>,
    amps: Vec<Complex64>,
}

/// Single-qubit measurement result.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: Outcome,
    pub probability: f64,
    /// Remaining qubits; empty when the measured qubit was the last one.
    pub post_state: StateVector,
}

/// Joint two-qubit measurement result.
#[derive(Debug, Clone)]
pub struct PairMeasurement {
    pub index: usize,
    pub probability: f64,
    pub post_state: StateVector,
}

impl StateVector {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn new(labels: Vec<Qubit>, amps: Vec<Complex64>) -> Result<Self, QcoreError> {
        if labels.len() > MAX_QUBITS {
            return Err(QcoreError::TooManyQubits(labels.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(QcoreError::DuplicateLabel(*l));
            }
        }
        let expected = 1usize << labels.len();
        if amps.len() != expected {
            return Err(QcoreError::AmplitudeCount {
                expected,
                got: amps.len(),
            });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm.is_nan() || norm < MIN_NORM {
            return Err(QcoreError::NotNormalizable);
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(Self { labels, amps })
    }

    /// The zero-qubit state, left over once every qubit has been measured.
    pub fn empty() -> Self {
        Self {
            labels: Vec::new(),
            amps: vec![c(1.0, 0.0)],
        }
    }

    pub fn single(qubit: Qubit, ket: Ket) -> Result<Self, QcoreError> {
        Self::new(vec![qubit], ket.to_vec())
    }

    pub fn labels(&self) -> &[Qubit] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn contains(&self, qubit: Qubit) -> bool {
        self.labels.contains(&qubit)
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn position(&self, qubit: Qubit) -> Result<usize, QcoreError> {
        self.labels
            .iter()
            .position(|&l| l == qubit)
            .ok_or(QcoreError::UnknownQubit(qubit))
    }

    fn weight(&self, pos: usize) -> usize {
        1 << (self.labels.len() - 1 - pos)
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &StateVector) -> Result<Self, QcoreError> {
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self::new(labels, amps)
    }

    /// Same state with qubits listed in `order`, which must be a permutation
    /// of the current labels.
    pub fn reordered(&self, order: &[Qubit]) -> Result<Self, QcoreError> {
        if order.len() != self.labels.len() {
            return Err(QcoreError::LabelMismatch);
        }
        let src_pos: Vec<usize> = order.iter().map(|&q| self.position(q)).collect::<Result<_, _>>()?;
        let n = order.len();
        let mut amps = vec![c(0.0, 0.0); self.amps.len()];
        for (dst, amp) in amps.iter_mut().enumerate() {
            let mut src = 0;
            for (k, &p) in src_pos.iter().enumerate() {
                let bit = (dst >> (n - 1 - k)) & 1;
                src |= bit << (n - 1 - p);
            }
            *amp = self.amps[src];
        }
        Self::new(order.to_vec(), amps)
    }

    /// Applies a 2×2 matrix to one tensor factor.
    pub fn apply_single(&self, qubit: Qubit, m: &[[Complex64; 2]; 2]) -> Result<Self, QcoreError> {
        let w = self.weight(self.position(qubit)?);
        let mut amps = self.amps.clone();
        for i in 0..self.amps.len() {
            if i & w == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | w];
                amps[i] = m[0][0] * a0 + m[0][1] * a1;
                amps[i | w] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Self::new(self.labels.clone(), amps)
    }

    pub fn apply_correction(&self, qubit: Qubit, correction: PauliCorrection) -> Result<Self, QcoreError> {
        self.apply_single(qubit, &correction.matrix())
    }

    /// Contracts `qubits` against `bra` (given as a ket, conjugated here).
    /// Returns the unnormalized remainder and the labels it lives on.
    fn contract(&self, qubits: &[Qubit], ket: &[Complex64]) -> Result<(Vec<Qubit>, Vec<Complex64>), QcoreError> {
        let positions: Vec<usize> = qubits.iter().map(|&q| self.position(q)).collect::<Result<_, _>>()?;
        let rest: Vec<Qubit> = self.labels.iter().copied().filter(|l| !qubits.contains(l)).collect();
        let rest_pos: Vec<usize> = rest.iter().map(|&q| self.position(q)).collect::<Result<_, _>>()?;
        let m = qubits.len();
        let r = rest.len();
        let mut out = vec![c(0.0, 0.0); 1 << r];
        for (ri, o) in out.iter_mut().enumerate() {
            let mut base = 0;
            for (k, &p) in rest_pos.iter().enumerate() {
                if (ri >> (r - 1 - k)) & 1 == 1 {
                    base |= self.weight(p);
                }
            }
            for (mi, coeff) in ket.iter().enumerate() {
                let mut idx = base;
                for (k, &p) in positions.iter().enumerate() {
                    if (mi >> (m - 1 - k)) & 1 == 1 {
                        idx |= self.weight(p);
                    }
                }
                *o += coeff.conj() * self.amps[idx];
            }
        }
        Ok((rest, out))
    }

    /// Projects `qubit` onto `ket`. Returns the Born probability and the
    /// normalized remainder, or `None` for the remainder when the
    /// probability vanishes.
    pub fn project_qubit(&self, qubit: Qubit, ket: &Ket) -> Result<(f64, Option<StateVector>), QcoreError> {
        self.project(&[qubit], ket)
    }

    /// Projects an ordered pair of qubits onto a two-qubit vector.
    pub fn project_pair(
        &self,
        pair: (Qubit, Qubit),
        ket: &[Complex64; 4],
    ) -> Result<(f64, Option<StateVector>), QcoreError> {
        if pair.0 == pair.1 {
            return Err(QcoreError::DuplicateLabel(pair.0));
        }
        self.project(&[pair.0, pair.1], ket)
    }

    fn project(&self, qubits: &[Qubit], ket: &[Complex64]) -> Result<(f64, Option<StateVector>), QcoreError> {
        let (rest, out) = self.contract(qubits, ket)?;
        let p: f64 = out.iter().map(|a| a.norm_sqr()).sum();
        if p < MIN_NORM {
            return Ok((p, None));
        }
        Ok((p, Some(StateVector::new(rest, out)?)))
    }

    /// Measures one qubit in `basis`, removing it from the returned state.
    pub fn measure_qubit<R: Rng + ?Sized>(
        &self,
        qubit: Qubit,
        basis: Basis,
        rng: &mut R,
    ) -> Result<Measurement, QcoreError> {
        self.measure_qubit_in(qubit, &basis.eigenvectors(), rng)
    }

    /// Measures one qubit against an arbitrary orthonormal pair `[|+⟩, |−⟩]`.
    pub fn measure_qubit_in<R: Rng + ?Sized>(
        &self,
        qubit: Qubit,
        kets: &[Ket; 2],
        rng: &mut R,
    ) -> Result<Measurement, QcoreError> {
        let (p0, s0) = self.project_qubit(qubit, &kets[0])?;
        let (p1, s1) = self.project_qubit(qubit, &kets[1])?;
        let total = p0 + p1;
        let draw: f64 = rng.gen::<f64>() * total;
        let pick_plus = s0.is_some() && (s1.is_none() || draw < p0);
        let (outcome, p, s) = if pick_plus {
            (Outcome::Plus, p0, s0)
        } else {
            (Outcome::Minus, p1, s1)
        };
        Ok(Measurement {
            outcome,
            probability: p / total,
            post_state: s.ok_or(QcoreError::NotNormalizable)?,
        })
    }

    /// Measures an ordered pair of qubits in a four-outcome basis.
    pub fn measure_pair<R: Rng + ?Sized>(
        &self,
        pair: (Qubit, Qubit),
        basis: &TwoQubitBasis,
        rng: &mut R,
    ) -> Result<PairMeasurement, QcoreError> {
        let mut branches = Vec::with_capacity(4);
        for v in basis.vectors() {
            branches.push(self.project_pair(pair, v)?);
        }
        let total: f64 = branches.iter().map(|b| b.0).sum();
        let mut draw: f64 = rng.gen::<f64>() * total;
        let mut chosen = None;
        for (i, (p, _)) in branches.iter().enumerate() {
            if *p >= MIN_NORM {
                chosen = Some(i);
                if draw < *p {
                    break;
                }
                draw -= p;
            }
        }
        let index = chosen.ok_or(QcoreError::NotNormalizable)?;
        let (p, s) = branches.swap_remove(index);
        Ok(PairMeasurement {
            index,
            probability: p / total,
            post_state: s.ok_or(QcoreError::NotNormalizable)?,
        })
    }

    /// Born probabilities of the two outcomes of `basis` on `qubit`.
    pub fn outcome_probabilities(&self, qubit: Qubit, basis: Basis) -> Result<[f64; 2], QcoreError> {
        let [k0, k1] = basis.eigenvectors();
        Ok([self.project_qubit(qubit, &k0)?.0, self.project_qubit(qubit, &k1)?.0])
    }

    /// Phase-insensitive fidelity `|⟨self|other⟩|²`. Label order may differ.
    pub fn overlap(&self, other: &StateVector) -> Result<f64, QcoreError> {
        if self.labels.len() != other.labels.len() {
            return Err(QcoreError::DimensionMismatch {
                left: self.labels.len(),
                right: other.labels.len(),
            });
        }
        let other = if self.labels == other.labels {
            other.clone()
        } else {
            other.reordered(&self.labels)?
        };
        let ip: Complex64 = self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum();
        Ok(ip.norm_sqr().min(1.0))
    }

    /// Whether this state is within tolerance of unit norm.
    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= TOLERANCE
    }
}
