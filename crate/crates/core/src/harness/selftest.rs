//! Quick built-in invariant suites, runnable from the command line.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::AttackStrategy;
use crate::protocol::{
    check_eavesdropping, correlated_bases, correlated_by_enumeration, distill_keys, hbb_reduce, hbb_signal,
    run_session, validate_order, BitConvention, Mode, OrderingPolicy, SessionConfig, Verdict,
};
use crate::qcore::{prepare_state, Basis, Family, Qubit, StateClass, StatePreparation, StateVector, TOLERANCE};

use super::config::ExperimentConfig;
use super::experiment::run_experiment;
use super::table1::verify_table1;
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub checks: Vec<SelftestCheck>,
    pub pass: bool,
}

const LABELS: [Qubit; 3] = [Qubit::A, Qubit::B, Qubit::C];

/// A random normalized state on the first `n` of A, B, C.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StateVector {
    loop {
        let amps: Vec<Complex64> = (0..1 << n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        if let Ok(s) = StateVector::new(LABELS[..n].to_vec(), amps) {
            return s;
        }
    }
}

/// Norm, probability completeness and collapse idempotence over `count`
/// random states. Returns the number of violations.
pub fn qcore_invariants(count: usize, seed: u64) -> Result<usize, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for i in 0..count {
        let n = 1 + i % 3;
        let s = random_state(n, &mut rng);
        if (s.norm() - 1.0).abs() > TOLERANCE {
            violations += 1;
        }
        let q = LABELS[rng.gen_range(0..n)];
        let basis = Basis::ALL[rng.gen_range(0..3)];
        let p = s.outcome_probabilities(q, basis)?;
        if (p[0] + p[1] - 1.0).abs() > TOLERANCE {
            violations += 1;
        }
        let m = s.measure_qubit(q, basis, &mut rng)?;
        if m.post_state.num_qubits() > 0 && (m.post_state.norm() - 1.0).abs() > TOLERANCE {
            violations += 1;
        }
        // Re-preparing the collapsed qubit and measuring it again in the same
        // basis must reproduce the outcome.
        let again = StateVector::single(q, basis.eigenvector(m.outcome))?.outcome_probabilities(q, basis)?;
        if (again[m.outcome.index()] - 1.0).abs() > TOLERANCE {
            violations += 1;
        }
    }
    Ok(violations)
}

fn check(name: &str, pass: bool, detail: impl Into<String>) -> SelftestCheck {
    SelftestCheck {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

pub fn selftest() -> Result<SelftestReport, HarnessError> {
    let mut checks = Vec::new();

    let t1 = verify_table1()?;
    let passing = t1.cells.iter().filter(|c| c.pass).count();
    checks.push(check("table-1", t1.pass, format!("{passing}/16 cells")));

    let regenerated = BitConvention::generate();
    checks.push(check(
        "bit-convention",
        &regenerated == BitConvention::shipped(),
        format!("{} rows", regenerated.rows().len()),
    ));

    let mut rule_ok = true;
    for family in [Family::Kki, Family::Hbb] {
        for class in StateClass::ALL {
            for b in family.agent_bases() {
                for c in family.agent_bases() {
                    rule_ok &= correlated_bases(family, class, b, c)? == correlated_by_enumeration(family, class, b, c);
                }
            }
        }
    }
    checks.push(check("correlated-bases", rule_ok, "rule matches enumeration"));

    let violations = qcore_invariants(3000, 17)?;
    checks.push(check(
        "qcore-invariants",
        violations == 0,
        format!("{violations} violations over 3000 states"),
    ));

    let ghz = prepare_state(StatePreparation::Ghz)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut hbb_ok = true;
    for _ in 0..100 {
        for basis in [Basis::X, Basis::Y] {
            let (o, bc) = hbb_reduce(&ghz, basis, &mut rng)?;
            let expected = hbb_signal(basis, o).expect("X or Y").state();
            hbb_ok &= bc.overlap(&expected)? >= 1.0 - TOLERANCE;
        }
    }
    checks.push(check("ghz-reduction", hbb_ok, "200 reductions"));

    for ordering in [
        OrderingPolicy::Vulnerable,
        OrderingPolicy::Refined,
        OrderingPolicy::SiftingFirst,
    ] {
        for mode in [Mode::ClassicalKey, Mode::StateSharing] {
            let cfg = SessionConfig {
                rounds: 2000,
                ordering,
                mode,
                seed: 9,
                ..SessionConfig::default()
            };
            let t = run_session(&cfg, &AttackStrategy::Passive)?;
            let order = validate_order(&t.announcement_log(), ordering, mode);
            let report = check_eavesdropping(&t, &cfg)?;
            let keys = distill_keys(&t)?;
            let pass = order.is_ok()
                && report.test_error_rate == 0.0
                && report.verdict == Verdict::Secure
                && keys.consistent();
            checks.push(check(
                &format!("honest-{ordering:?}-{mode:?}").to_lowercase(),
                pass,
                format!("order {order:?}, error {}, key {}", report.test_error_rate, keys.len()),
            ));
        }
    }

    let mut attack = ExperimentConfig::preset("opaque-vulnerable")?;
    attack.session.rounds = 20_000;
    let r = run_experiment(&attack)?;
    checks.push(check(
        "opaque-attack-hidden",
        r.error_rate.successes == 0 && r.ka_acc == Some(1.0) && r.kc_acc == Some(1.0),
        format!(
            "errors {}, ka_acc {:?}, kc_acc {:?}",
            r.error_rate.successes, r.ka_acc, r.kc_acc
        ),
    ));

    let pass = checks.iter().all(|c| c.pass);
    Ok(SelftestReport { checks, pass })
}
