//! Brute-force swap oracle shared by the integration tests.
//!
//! Everything here works on raw 16-amplitude vectors over (B, C, B′, C′),
//! index `8b + 4c + 2b′ + c′`, with the signal states written out by hand
//! from their textbook definitions. None of the crate's state machinery is
//! used to produce the oracle values; the crate is only compared against it.

#![allow(dead_code)]

use num_complex::Complex64;

use qss_core::harness::COLUMNS;
use qss_core::qcore::{BellOutcome, PauliCorrection, StateClass};

pub type C = Complex64;
pub const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn r(x: f64) -> C {
    C::new(x, 0.0)
}

/// (B, C) amplitudes in Z order for the four KKI signals, keyed by (class, bit).
pub fn alice_pair(class: StateClass, bit: u8) -> [C; 4] {
    match (class, bit) {
        // ψ⁺ = (|01⟩ + |10⟩)/√2
        (StateClass::One, 0) => [r(0.0), r(H), r(H), r(0.0)],
        // φ⁻ = (|00⟩ − |11⟩)/√2
        (StateClass::One, _) => [r(H), r(0.0), r(0.0), r(-H)],
        // Ψ⁺ = (|0⟩|+x⟩ + |1⟩|−x⟩)/√2
        (StateClass::Two, 0) => [r(0.5), r(0.5), r(0.5), r(-0.5)],
        // Φ⁻ = (|0⟩|−x⟩ − |1⟩|+x⟩)/√2
        (StateClass::Two, _) => [r(0.5), r(-0.5), r(-0.5), r(-0.5)],
    }
}

pub fn bell(b: BellOutcome) -> [C; 4] {
    match b {
        BellOutcome::PhiPlus => [r(H), r(0.0), r(0.0), r(H)],
        BellOutcome::PhiMinus => [r(H), r(0.0), r(0.0), r(-H)],
        BellOutcome::PsiPlus => [r(0.0), r(H), r(H), r(0.0)],
        BellOutcome::PsiMinus => [r(0.0), r(H), r(-H), r(0.0)],
    }
}

pub const ZP: [f64; 2] = [1.0, 0.0];
pub const ZM: [f64; 2] = [0.0, 1.0];
pub const XP: [f64; 2] = [H, H];
pub const XM: [f64; 2] = [H, -H];

pub fn ket(basis_x: bool, plus: bool) -> [f64; 2] {
    match (basis_x, plus) {
        (false, true) => ZP,
        (false, false) => ZM,
        (true, true) => XP,
        (true, false) => XM,
    }
}

/// Alice's pair on (B, C) times the fake Φ⁺ on (B′, C′).
pub fn joint(class: StateClass, bit: u8) -> [C; 16] {
    let a = alice_pair(class, bit);
    let f = bell(BellOutcome::PhiPlus);
    let mut v = [r(0.0); 16];
    for (i, ai) in a.iter().enumerate() {
        for (j, fj) in f.iter().enumerate() {
            v[4 * i + j] = ai * fj;
        }
    }
    v
}

pub fn idx(b: usize, c: usize, bp: usize, cp: usize) -> usize {
    8 * b + 4 * c + 2 * bp + cp
}

/// Projects (B′, C) onto `bell_vec` and C′ onto `charlie`, returning the
/// unnormalised amplitudes left on B.
pub fn project(v: &[C; 16], bell_vec: &[C; 4], charlie: [f64; 2]) -> [C; 2] {
    let mut out = [r(0.0); 2];
    for b in 0..2 {
        for bp in 0..2 {
            for c in 0..2 {
                for cp in 0..2 {
                    out[b] += bell_vec[2 * bp + c].conj() * r(charlie[cp]) * v[idx(b, c, bp, cp)];
                }
            }
        }
    }
    out
}

pub fn correct(v: [C; 2], corr: PauliCorrection) -> [C; 2] {
    match corr {
        PauliCorrection::Identity => v,
        PauliCorrection::ISigmaY => [v[1], -v[0]],
        PauliCorrection::SigmaX => [v[1], v[0]],
        PauliCorrection::SigmaZ => [v[0], -v[1]],
    }
}

pub fn fidelity(v: [C; 2], target: [f64; 2]) -> f64 {
    let n: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    let ip = v[0].conj() * target[0] + v[1].conj() * target[1];
    ip.norm_sqr() / n
}

/// Exact statistics of the attack without loss cheating, averaged over
/// signals, Bell outcomes and correlated basis pairs:
/// `(bad Bell fraction, error rate on correlated test rounds, error rate
/// given a bad Bell outcome)`.
pub fn no_cheat_oracle() -> (f64, f64, f64) {
    let bases = [false, true]; // Z, X
    let mut bad_weight = 0.0;
    let mut err = 0.0;
    let mut bad_err = 0.0;
    let mut total = 0.0;
    for &(class, bit) in &COLUMNS {
        let v = joint(class, bit);
        let original = alice_pair(class, bit);
        for b in BellOutcome::ALL {
            let good = matches!(b, BellOutcome::PhiPlus | BellOutcome::PsiMinus);
            for &bob_x in &bases {
                for &charlie_x in &bases {
                    // Class 1 correlates on equal bases, class 2 on different ones.
                    let correlated = (bob_x == charlie_x) == (class == StateClass::One);
                    if !correlated {
                        continue;
                    }
                    for bob_plus in [true, false] {
                        for charlie_plus in [true, false] {
                            let cket = ket(charlie_x, charlie_plus);
                            let mut bket = project(&v, &bell(b), cket);
                            if b == BellOutcome::PsiMinus {
                                bket = correct(bket, PauliCorrection::ISigmaY);
                            }
                            let bt = ket(bob_x, bob_plus);
                            // Joint probability of (Bell outcome, Charlie, Bob).
                            let amp = bket[0] * bt[0] + bket[1] * bt[1];
                            let p = amp.norm_sqr();
                            // An outcome pair is an error when Alice's state
                            // never produces it.
                            let ideal = {
                                let mut a = r(0.0);
                                for i in 0..2 {
                                    for j in 0..2 {
                                        a += r(bt[i] * cket[j]) * original[2 * i + j];
                                    }
                                }
                                a.norm_sqr()
                            };
                            total += p;
                            if ideal < 1e-12 {
                                err += p;
                                if !good {
                                    bad_err += p;
                                }
                            }
                            if !good {
                                bad_weight += p;
                            }
                        }
                    }
                }
            }
        }
    }
    (bad_weight / total, err / total, bad_err / bad_weight)
}
