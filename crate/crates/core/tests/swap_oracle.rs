//! The entanglement swap checked against an independent brute-force oracle.

mod common;

use common::{bell, correct, fidelity, joint, ket, no_cheat_oracle, project, r};
use qss_core::harness::{run_experiment, swapped_bob_state, verify_table1, ExperimentConfig, COLUMNS, EXPECTED, ROWS};
use qss_core::qcore::{Basis, BellOutcome, Family, Outcome, PauliCorrection, SignalState};

#[test]
fn oracle_reproduces_every_table_cell_for_both_good_outcomes() {
    for (row, &(cb, co)) in ROWS.iter().enumerate() {
        for (col, &(class, bit)) in COLUMNS.iter().enumerate() {
            let charlie = ket(cb == Basis::X, co == Outcome::Plus);
            let (eb, eo) = EXPECTED[row][col];
            let expected = ket(eb == Basis::X, eo == Outcome::Plus);
            let v = joint(class, bit);
            let direct = project(&v, &bell(BellOutcome::PhiPlus), charlie);
            let via_psi = correct(
                project(&v, &bell(BellOutcome::PsiMinus), charlie),
                PauliCorrection::ISigmaY,
            );
            assert!(fidelity(direct, expected) >= 1.0 - 1e-9, "cell ({row},{col}) Φ⁺");
            assert!(fidelity(via_psi, expected) >= 1.0 - 1e-9, "cell ({row},{col}) Ψ⁻");
        }
    }
}

#[test]
fn crate_swap_matches_oracle_for_all_bell_outcomes() {
    for &(cb, co) in &ROWS {
        for &(class, bit) in &COLUMNS {
            let charlie = ket(cb == Basis::X, co == Outcome::Plus);
            for b in BellOutcome::ALL {
                let oracle = project(&joint(class, bit), &bell(b), charlie);
                let signal = SignalState::new(Family::Kki, class, bit);
                let ours =
                    swapped_bob_state(signal, b, PauliCorrection::Identity, [r(charlie[0]), r(charlie[1])]).unwrap();
                let amps = ours.amplitudes();
                let n: f64 = oracle.iter().map(|a| a.norm_sqr()).sum();
                let ip = oracle[0].conj() * amps[0] + oracle[1].conj() * amps[1];
                assert!(
                    (ip.norm_sqr() / n - 1.0).abs() < 1e-9,
                    "{signal} {b} charlie {charlie:?}"
                );
            }
        }
    }
}

#[test]
fn verify_table1_agrees_with_oracle() {
    assert!(verify_table1().unwrap().pass);
}

#[test]
fn no_cheat_attack_has_quarter_error_exactly() {
    let (bad, err, bad_err) = no_cheat_oracle();
    assert!((bad - 0.5).abs() < 1e-12, "bad Bell fraction {bad}");
    assert!((bad_err - 0.5).abs() < 1e-12, "error after a bad outcome {bad_err}");
    assert!((err - 0.25).abs() < 1e-12, "error {err}");
}

#[test]
fn simulated_no_cheat_attack_matches_oracle() {
    let mut c = ExperimentConfig::preset("opaque-no-cheat").unwrap();
    c.session.rounds = 40_000;
    let r = run_experiment(&c).unwrap();
    let (bad, err, _) = no_cheat_oracle();
    assert!(
        (r.attacked_error_rate.value - err).abs() < 0.01,
        "{:?}",
        r.attacked_error_rate
    );
    assert!(
        (r.bad_bell_fraction.value - bad).abs() < 0.01,
        "{:?}",
        r.bad_bell_fraction
    );
}
