//! Coverage of the reported 95% intervals and reproducibility of runs.

use qss_core::harness::{render_json, run_experiment, ExperimentConfig};
use qss_core::protocol::{read_transcript_jsonl, run_session, write_transcript_jsonl};

/// With 100 independent replications and nominal 95% coverage, fewer than 88
/// hits has probability below 0.5%.
const MIN_HITS: usize = 88;

#[test]
fn wilson_intervals_cover_true_rates() {
    let eta = 0.7;
    let mut eff_hits = 0;
    let mut sift_hits = 0;
    for seed in 0..100 {
        let mut c = ExperimentConfig::preset("honest").unwrap();
        c.session.rounds = 2_000;
        c.session.channel.eta = eta;
        c.session.channel.eta_prime = eta;
        c.session.seed = 1_000 + seed;
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.error_rate.successes, 0);
        eff_hits += usize::from(r.eff_bob.ci.contains(eta));
        sift_hits += usize::from(r.sift_rate.ci.contains(0.5));
    }
    assert!(eff_hits >= MIN_HITS, "efficiency coverage {eff_hits}/100");
    assert!(sift_hits >= MIN_HITS, "sift coverage {sift_hits}/100");
}

#[test]
fn reports_are_byte_identical_for_a_seed() {
    let mut c = ExperimentConfig::preset("opaque-vulnerable").unwrap();
    c.session.rounds = 5_000;
    c.repetitions = 3;
    let a = render_json(&[run_experiment(&c).unwrap()]).unwrap();
    let b = render_json(&[run_experiment(&c).unwrap()]).unwrap();
    assert_eq!(a, b);
    c.session.seed += 1;
    let other = render_json(&[run_experiment(&c).unwrap()]).unwrap();
    assert_ne!(a, other);
}

#[test]
fn transcripts_are_reproducible_and_round_trip() {
    let c = ExperimentConfig::preset("opaque-sifting-classical").unwrap();
    let mut session = c.session.clone();
    session.rounds = 400;
    let t = run_session(&session, &c.strategy()).unwrap();
    let mut first = Vec::new();
    write_transcript_jsonl(&t, &mut first).unwrap();
    let mut second = Vec::new();
    write_transcript_jsonl(&run_session(&session, &c.strategy()).unwrap(), &mut second).unwrap();
    assert_eq!(first, second);
    let lines = read_transcript_jsonl(first.as_slice()).unwrap();
    assert_eq!(lines.len(), 400);
    assert!(lines.iter().enumerate().all(|(i, l)| l.round_id == i as u64));
}
