use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Digit-serial or digit-parallel, crossed with output-bulk or output-chunked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DataflowKind {
    #[serde(rename = "DSOB")]
    Dsob,
    #[serde(rename = "DPOB")]
    Dpob,
    #[serde(rename = "DSOC")]
    Dsoc,
    #[serde(rename = "DPOC")]
    Dpoc,
}

impl DataflowKind {
    pub const ALL: [DataflowKind; 4] = [Self::Dsob, Self::Dpob, Self::Dsoc, Self::Dpoc];

    pub fn name(self) -> &'static str {
        match self {
            Self::Dsob => "DSOB",
            Self::Dpob => "DPOB",
            Self::Dsoc => "DSOC",
            Self::Dpoc => "DPOC",
        }
    }

    pub fn is_chunked(self) -> bool {
        matches!(self, Self::Dsoc | Self::Dpoc)
    }

    pub fn is_digit_parallel(self) -> bool {
        matches!(self, Self::Dpob | Self::Dpoc)
    }
}

impl fmt::Display for DataflowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DataflowKind {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "DSOB" => Ok(Self::Dsob),
            "DPOB" => Ok(Self::Dpob),
            "DSOC" => Ok(Self::Dsoc),
            "DPOC" => Ok(Self::Dpoc),
            _ => Err(ScheduleError::UnknownKind(s.to_string())),
        }
    }
}

pub const MIN_CHUNKS: usize = 2;
pub const MAX_CHUNKS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("{kind} needs chunks {expected}, got {chunks}")]
    InvalidChunks { kind: DataflowKind, chunks: usize, expected: &'static str },
    #[error("unknown dataflow `{0}` (expected DSOB, DPOB, DSOC or DPOC)")]
    UnknownKind(String),
}

/// A dataflow strategy with its chunk count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct ScheduleSpec {
    kind: DataflowKind,
    chunks: usize,
}

impl ScheduleSpec {
    pub fn new(kind: DataflowKind, chunks: usize) -> Result<Self, ScheduleError> {
        let ok = if kind.is_chunked() { (MIN_CHUNKS..=MAX_CHUNKS).contains(&chunks) } else { chunks == 1 };
        if !ok {
            let expected = if kind.is_chunked() { "in 2..=10" } else { "= 1" };
            return Err(ScheduleError::InvalidChunks { kind, chunks, expected });
        }
        Ok(Self { kind, chunks })
    }

    pub fn dsob() -> Self {
        Self { kind: DataflowKind::Dsob, chunks: 1 }
    }

    pub fn dpob() -> Self {
        Self { kind: DataflowKind::Dpob, chunks: 1 }
    }

    pub fn dsoc(chunks: usize) -> Result<Self, ScheduleError> {
        Self::new(DataflowKind::Dsoc, chunks)
    }

    pub fn dpoc(chunks: usize) -> Result<Self, ScheduleError> {
        Self::new(DataflowKind::Dpoc, chunks)
    }

    pub fn kind(&self) -> DataflowKind {
        self.kind
    }

    pub fn chunks(&self) -> usize {
        self.chunks
    }

    /// Every valid spec: the two bulk strategies, then each chunked one for c = 2..=10.
    pub fn all() -> Vec<Self> {
        let mut out = vec![Self::dsob(), Self::dpob()];
        for kind in [DataflowKind::Dsoc, DataflowKind::Dpoc] {
            out.extend((MIN_CHUNKS..=MAX_CHUNKS).map(|c| Self { kind, chunks: c }));
        }
        out
    }
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind.is_chunked() {
            write!(f, "{}(c={})", self.kind, self.chunks)
        } else {
            write!(f, "{}", self.kind)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    kind: DataflowKind,
    chunks: usize,
}

impl TryFrom<RawSpec> for ScheduleSpec {
    type Error = ScheduleError;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        ScheduleSpec::new(raw.kind, raw.chunks)
    }
}

impl From<ScheduleSpec> for RawSpec {
    fn from(s: ScheduleSpec) -> Self {
        RawSpec { kind: s.kind, chunks: s.chunks }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_validation() {
        assert!(ScheduleSpec::new(DataflowKind::Dsob, 1).is_ok());
        assert!(ScheduleSpec::new(DataflowKind::Dsob, 2).is_err());
        assert!(ScheduleSpec::new(DataflowKind::Dpoc, 1).is_err());
        assert!(ScheduleSpec::new(DataflowKind::Dpoc, 11).is_err());
        assert!(ScheduleSpec::new(DataflowKind::Dsoc, 10).is_ok());
        assert_eq!(ScheduleSpec::all().len(), 20);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("dpoc".parse::<DataflowKind>().unwrap(), DataflowKind::Dpoc);
        assert!("xyz".parse::<DataflowKind>().is_err());
        assert_eq!(ScheduleSpec::dsoc(3).unwrap().to_string(), "DSOC(c=3)");
        assert_eq!(ScheduleSpec::dpob().to_string(), "DPOB");
    }

    #[test]
    fn serde_rejects_invalid_chunks() {
        let s = serde_json::to_string(&ScheduleSpec::dpoc(4).unwrap()).unwrap();
        assert_eq!(s, r#"{"kind":"DPOC","chunks":4}"#);
        assert!(serde_json::from_str::<ScheduleSpec>(r#"{"kind":"DSOB","chunks":3}"#).is_err());
    }
}
