//! Message-level simulation of the privacy-preserving primal-dual protocol.
//!
//! Per iteration the system operator (SO) draws mask weights, sends each agent
//! its share of the offsets, receives one encrypted upload per agent, sums the
//! uploads in ciphertext space and broadcasts the encrypted aggregates. Agents
//! decrypt, update their own primal variable and a replicated copy of the dual
//! variable. Every message is appended to an ordered transcript that the
//! adversary audit replays.

mod audit;
mod masks;
mod message;
mod roles;
mod run;

pub use audit::{adversary_audit, AuditReport, DegenerateMask, GroundTruth};
pub use masks::{generate_masks, MaskMode, MaskSet};
pub use message::{AdversaryTap, Message, MessageKind, Observer, Payload, Role, Transcript, TranscriptRecord};
pub use roles::{Agent, SystemOperator};
pub use run::{
    run_protocol, CryptoSettings, ProtocolConfig, ProtocolIteration, ProtocolRun, SchemeChoice,
    DEFAULT_B_MAX,
};
