//! Simulator for entanglement-based three-party quantum secret sharing and
//! the opaque attack a dishonest agent can mount against its collective
//! eavesdropping check.
//!
//! * [`qcore`] — exact statevector algebra for up to four photons.
//! * [`channel`] — erasure loss on the honest and replacement channels.
//! * [`protocol`] — rounds, announcement orderings, sifting, the check and
//!   key distillation, plus the GHZ and hardened variants.
//! * [`adversary`] — the dishonest agent's substitution, deferred Bell
//!   measurement, loss cheating and key recovery.
//! * [`harness`] — presets, repetitions, sweeps, intervals and reports.

pub mod adversary;
pub mod channel;
pub mod harness;
pub mod protocol;
pub mod qcore;
