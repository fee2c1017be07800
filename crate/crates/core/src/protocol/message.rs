use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::crypto::{Ciphertext, SchemeKind};
use crate::error::Error;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    SystemOperator,
    Agent(usize),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::SystemOperator => f.write_str("so"),
            Role::Agent(i) => write!(f, "agent{i}"),
        }
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "so" {
            return Ok(Role::SystemOperator);
        }
        s.strip_prefix("agent")
            .and_then(|i| i.parse().ok())
            .map(Role::Agent)
            .ok_or_else(|| Error::Experiment(format!("unknown role `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    MaskShare,
    AgentUpload,
    AggregateBroadcast,
}

impl MessageKind {
    pub fn name(self) -> &'static str {
        match self {
            MessageKind::MaskShare => "mask_share",
            MessageKind::AgentUpload => "agent_upload",
            MessageKind::AggregateBroadcast => "aggregate_broadcast",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "mask_share" => Some(MessageKind::MaskShare),
            "agent_upload" => Some(MessageKind::AgentUpload),
            "aggregate_broadcast" => Some(MessageKind::AggregateBroadcast),
            _ => None,
        }
    }
}

/// Message bodies. Only the SO's mask shares are plaintext, and they carry
/// `r_i·c` and `s_i·d`, never a decision variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload<T> {
    MaskShare {
        objective: Vec<T>,
        constraint: Vec<T>,
    },
    /// `E(A_ui x_i + r_i c)` and `E(A_gi x_i + s_i d)`
    AgentUpload {
        objective: Vec<Ciphertext>,
        constraint: Vec<Ciphertext>,
    },
    /// `E(Σ A_ui x_i + c)` and `E(Σ A_gi x_i + d)`
    AggregateBroadcast {
        objective: Vec<Ciphertext>,
        constraint: Vec<Ciphertext>,
    },
}

impl<T> Payload<T> {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::MaskShare { .. } => MessageKind::MaskShare,
            Payload::AgentUpload { .. } => MessageKind::AgentUpload,
            Payload::AggregateBroadcast { .. } => MessageKind::AggregateBroadcast,
        }
    }

    /// Ciphertext halves, if this is a ciphertext-carrying message.
    pub fn ciphertexts(&self) -> Option<(&[Ciphertext], &[Ciphertext])> {
        match self {
            Payload::AgentUpload { objective, constraint }
            | Payload::AggregateBroadcast { objective, constraint } => Some((objective, constraint)),
            Payload::MaskShare { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message<T> {
    pub k: usize,
    pub sender: Role,
    pub receiver: Role,
    pub payload: Payload<T>,
}

impl<T> Message<T> {
    pub fn kind(&self) -> MessageKind {
        self.payload.kind()
    }
}

/// Line-delimited export form of a message; all numbers are decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptRecord {
    pub k: usize,
    pub sender: String,
    pub receiver: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<u32>,
    pub payload: RecordPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordPayload {
    pub objective: Vec<String>,
    pub constraint: Vec<String>,
}

impl<T: Real> From<&Message<T>> for TranscriptRecord {
    fn from(m: &Message<T>) -> Self {
        let (scheme, scale, objective, constraint) = match &m.payload {
            Payload::MaskShare { objective, constraint } => (
                None,
                None,
                objective.iter().map(|v| v.to_string()).collect(),
                constraint.iter().map(|v| v.to_string()).collect(),
            ),
            Payload::AgentUpload { objective, constraint }
            | Payload::AggregateBroadcast { objective, constraint } => (
                objective.first().or(constraint.first()).map(Ciphertext::scheme),
                objective.first().or(constraint.first()).map(Ciphertext::scale),
                objective.iter().map(Ciphertext::to_decimal).collect(),
                constraint.iter().map(Ciphertext::to_decimal).collect(),
            ),
        };
        TranscriptRecord {
            k: m.k,
            sender: m.sender.to_string(),
            receiver: m.receiver.to_string(),
            kind: m.kind().name().to_string(),
            scheme,
            scale,
            payload: RecordPayload { objective, constraint },
        }
    }
}

impl TranscriptRecord {
    pub fn to_message<T: Real>(&self) -> Result<Message<T>, Error> {
        let bad = |what: &str| Error::Experiment(format!("transcript record k={}: {what}", self.k));
        let kind = MessageKind::parse(&self.kind).ok_or_else(|| bad("unknown kind"))?;
        let reals = |v: &[String]| -> Result<Vec<T>, Error> {
            v.iter()
                .map(|s| s.parse::<f64>().map(T::lit).map_err(|_| bad("malformed real")))
                .collect()
        };
        let cts = |v: &[String]| -> Result<Vec<Ciphertext>, Error> {
            let scheme = self.scheme.ok_or_else(|| bad("missing scheme"))?;
            let scale = self.scale.unwrap_or(1);
            v.iter()
                .map(|s| {
                    BigUint::parse_bytes(s.as_bytes(), 10)
                        .map(|b| Ciphertext::from_parts(b, scheme, scale))
                        .ok_or_else(|| bad("malformed ciphertext"))
                })
                .collect()
        };
        let p = &self.payload;
        let payload = match kind {
            MessageKind::MaskShare => Payload::MaskShare {
                objective: reals(&p.objective)?,
                constraint: reals(&p.constraint)?,
            },
            MessageKind::AgentUpload => Payload::AgentUpload {
                objective: cts(&p.objective)?,
                constraint: cts(&p.constraint)?,
            },
            MessageKind::AggregateBroadcast => Payload::AggregateBroadcast {
                objective: cts(&p.objective)?,
                constraint: cts(&p.constraint)?,
            },
        };
        Ok(Message {
            k: self.k,
            sender: self.sender.parse()?,
            receiver: self.receiver.parse()?,
            payload,
        })
    }
}

/// Who is looking at the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observer {
    /// Follows the protocol, holds the shared key, and wiretaps peer uploads.
    CuriousAgent(usize),
    /// Sees every message on every link but holds no key.
    ExternalEavesdropper,
    SystemOperator,
}

impl Observer {
    pub fn sees<T>(&self, m: &Message<T>) -> bool {
        match self {
            Observer::ExternalEavesdropper => true,
            Observer::SystemOperator => {
                m.sender == Role::SystemOperator || m.receiver == Role::SystemOperator
            }
            Observer::CuriousAgent(j) => {
                m.sender == Role::Agent(*j)
                    || m.receiver == Role::Agent(*j)
                    || m.kind() == MessageKind::AgentUpload
            }
        }
    }
}

/// A read-only copy of what one observer saw.
#[derive(Debug, Clone)]
pub struct AdversaryTap<T> {
    pub observer: Observer,
    pub messages: Vec<Message<T>>,
}

/// Ordered, append-only log of every message exchanged during a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transcript<T> {
    messages: Vec<Message<T>>,
}

impl<T: Real> Transcript<T> {
    pub fn new() -> Self {
        Self { messages: Vec::new() }
    }

    pub fn push(&mut self, m: Message<T>) {
        self.messages.push(m);
    }

    pub fn extend(&mut self, ms: impl IntoIterator<Item = Message<T>>) {
        self.messages.extend(ms);
    }

    pub fn messages(&self) -> &[Message<T>] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn tap(&self, observer: Observer) -> AdversaryTap<T> {
        AdversaryTap {
            observer,
            messages: self.messages.iter().filter(|m| observer.sees(m)).cloned().collect(),
        }
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for m in &self.messages {
            serde_json::to_writer(&mut out, &TranscriptRecord::from(m))?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, Error> {
        let mut t = Self::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: TranscriptRecord = serde_json::from_str(&line)
                .map_err(|e| Error::Experiment(format!("transcript: {e}")))?;
            t.push(rec.to_message()?);
        }
        Ok(t)
    }
}
