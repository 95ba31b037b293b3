//! Append-only message store.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, MutexGuard};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Delivered,
    Blocked,
}

/// Sequence-bearing id rendered as `m` plus ten digits, so ids sort like
/// their sequence numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MessageId(pub u64);

impl MessageId {
    pub fn parse(s: &str) -> Option<MessageId> {
        let digits = s.strip_prefix('m')?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        digits.parse().ok().map(MessageId)
    }
}

impl std::fmt::Display for MessageId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "m{:010}", self.0)
    }
}

impl Serialize for MessageId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MessageId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        MessageId::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad message id {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub id: MessageId,
    pub sender: String,
    pub recipient: String,
    pub body: String,
    pub created_at: DateTime<Utc>,
    pub status: Status,
    /// Naive Bayes log-joint gap or SVM margin.
    pub score: f64,
    pub classify_elapsed_us: u64,
}

/// What the screen decided for a body, recorded with the message.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub blocked: bool,
    pub score: f64,
    pub classify_elapsed_us: u64,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("message log {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("message log {path}, line {line}: {detail}")]
    CorruptLog { path: PathBuf, line: usize, detail: String },
}

#[derive(Default)]
struct Inner {
    messages: Vec<Message>,
    /// Positions into `messages`, ascending.
    by_sender: HashMap<String, Vec<usize>>,
    delivered_to: HashMap<String, Vec<usize>>,
    next_seq: u64,
    last_created: Option<DateTime<Utc>>,
    log: Option<(PathBuf, File)>,
}

impl Inner {
    fn index(&mut self, message: Message) {
        let pos = self.messages.len();
        self.by_sender.entry(message.sender.clone()).or_default().push(pos);
        if message.status == Status::Delivered {
            self.delivered_to.entry(message.recipient.clone()).or_default().push(pos);
        }
        self.next_seq = self.next_seq.max(message.id.0 + 1);
        self.last_created = Some(self.last_created.map_or(message.created_at, |t| t.max(message.created_at)));
        self.messages.push(message);
    }

    fn select(&self, positions: Option<&Vec<usize>>, since: Option<MessageId>) -> Vec<Message> {
        let Some(positions) = positions else {
            return Vec::new();
        };
        let start = match since {
            Some(cursor) => positions.partition_point(|&p| self.messages[p].id <= cursor),
            None => 0,
        };
        positions[start..].iter().map(|&p| self.messages[p].clone()).collect()
    }
}

/// All mutations go through one lock, so they are atomic and totally
/// ordered; reads copy out a consistent snapshot.
#[derive(Default)]
pub struct MessageStore {
    inner: Mutex<Inner>,
}

impl MessageStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replays `path` if it exists and appends every new message to it as
    /// one JSON line. A torn final line (no trailing newline) is dropped.
    pub fn with_log(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let io = |source| StoreError::Io { path: path.clone(), source };
        let mut inner = Inner::default();
        let mut valid_len = 0u64;
        if path.exists() {
            let mut reader = BufReader::new(File::open(&path).map_err(io)?);
            let mut line = String::new();
            let mut number = 0;
            loop {
                line.clear();
                let read = reader.read_line(&mut line).map_err(io)?;
                if read == 0 || !line.ends_with('\n') {
                    break;
                }
                number += 1;
                valid_len += read as u64;
                if line.trim().is_empty() {
                    continue;
                }
                let message: Message = serde_json::from_str(&line).map_err(|e| StoreError::CorruptLog {
                    path: path.clone(),
                    line: number,
                    detail: e.to_string(),
                })?;
                if message.id.0 < inner.next_seq {
                    return Err(StoreError::CorruptLog {
                        path: path.clone(),
                        line: number,
                        detail: format!("id {} out of order", message.id),
                    });
                }
                inner.index(message);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        file.set_len(valid_len).map_err(io)?;
        inner.log = Some((path, file));
        Ok(MessageStore { inner: Mutex::new(inner) })
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        // a panic elsewhere cannot leave Inner half-updated: index() only
        // pushes after all fallible work is done
        self.inner.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    /// Stores a message with the next id and a timestamp no earlier than any
    /// before it.
    pub fn append(&self, sender: &str, recipient: &str, body: &str, verdict: Verdict) -> Result<Message, StoreError> {
        let mut inner = self.lock();
        let now = Utc::now();
        let created_at = inner.last_created.map_or(now, |t| t.max(now));
        let message = Message {
            id: MessageId(inner.next_seq),
            sender: sender.to_string(),
            recipient: recipient.to_string(),
            body: body.to_string(),
            created_at,
            status: if verdict.blocked { Status::Blocked } else { Status::Delivered },
            score: verdict.score,
            classify_elapsed_us: verdict.classify_elapsed_us,
        };
        if let Some((path, file)) = inner.log.as_mut() {
            let mut line = serde_json::to_string(&message).expect("message serializes");
            line.push('\n');
            file.write_all(line.as_bytes()).map_err(|source| StoreError::Io {
                path: path.clone(),
                source,
            })?;
        }
        inner.index(message.clone());
        Ok(message)
    }

    /// Delivered messages addressed to `user`, oldest first, after `since`.
    pub fn inbox(&self, user: &str, since: Option<MessageId>) -> Vec<Message> {
        let inner = self.lock();
        inner.select(inner.delivered_to.get(user), since)
    }

    /// Everything `user` sent, any status, oldest first, after `since`.
    pub fn outbox(&self, user: &str, since: Option<MessageId>) -> Vec<Message> {
        let inner = self.lock();
        inner.select(inner.by_sender.get(user), since)
    }

    pub fn get(&self, id: MessageId) -> Option<Message> {
        let inner = self.lock();
        let pos = inner.messages.binary_search_by_key(&id, |m| m.id).ok()?;
        Some(inner.messages[pos].clone())
    }

    pub fn len(&self) -> usize {
        self.lock().messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> Vec<Message> {
        self.lock().messages.clone()
    }
}
