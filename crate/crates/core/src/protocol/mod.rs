//! The three-party protocol: preparation, transmission, measurement, public
//! announcements in a configurable order, the collective eavesdropping check
//! and key distillation.

mod check;
mod convention;
mod export;
mod hardened;
mod hbb;
mod order;
mod session;
mod types;

pub use check::{check_eavesdropping, distill_keys, ratio, CheckReport, DistilledKeys, Tally, Verdict};
pub use convention::{correlated_bases, correlated_by_enumeration, extract_bits, BitConvention, ConventionRow};
pub use export::{read_transcript_jsonl, transcript_line, write_transcript_jsonl, TranscriptLine};
pub use hardened::{prepare_hardened_test_round, HardenedTestRound};
pub use hbb::{hbb_reduce, hbb_signal};
pub use order::{validate_order, OrderViolation};
pub use session::{run_session, simulate_rounds, Transcript};
pub use types::{
    AliceChoice, Announcement, AnnouncementContent, LegState, MessageResidue, Mode, OrderingPolicy, Party, Phase,
    PreparedState, RoundKind, RoundRecord, Scheme, SessionConfig,
};

use thiserror::Error;

use crate::channel::ChannelError;
use crate::qcore::{Basis, Family, QcoreError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: &'static str, message: String },
    #[error("basis {basis} is not used by the {family:?} family")]
    BasisNotAllowed { family: Family, basis: Basis },
    #[error("round {round_id} has no {what}")]
    MissingData { round_id: u64, what: &'static str },
    #[error("round {round_id}: bases are not correlated for the announced class")]
    UncorrelatedBases { round_id: u64 },
    #[error("transcript contains no test rounds")]
    NoTestRounds,
    #[error("input is not the three-photon GHZ state")]
    NotGhz,
    #[error(transparent)]
    Quantum(#[from] QcoreError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}
