//! Account records, dataset containers, and JSONL loading/saving.
//!
//! One record per account: identity metadata, a class label, an optional
//! bot-provider tag, and the raw post creation times (epoch seconds, UTC).

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Account class. `Unknown` exists so ranking can score unlabeled accounts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Bot,
    Genuine,
    Unknown,
}

impl Label {
    /// Binary encoding used by every classifier: genuine = 0, bot = 1.
    pub fn as_binary(self) -> Option<u8> {
        match self {
            Label::Genuine => Some(0),
            Label::Bot => Some(1),
            Label::Unknown => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Bot => "bot",
            Label::Genuine => "genuine",
            Label::Unknown => "unknown",
        }
    }
}

/// One account: metadata counts, label, optional provider tag, post times.
///
/// Counts are stored signed so that invalid (negative) inputs can be
/// represented and reported by [`validate_record`] instead of failing at
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountRecord {
    pub id: String,
    pub label: Label,
    pub provider: Option<String>,
    pub username_length: i64,
    pub full_name_length: i64,
    pub biography_length: i64,
    pub followers_count: i64,
    pub followings_count: i64,
    pub post_times: Vec<i64>,
}

impl AccountRecord {
    /// Provider tag, treating an empty string the same as absent.
    pub fn provider_tag(&self) -> Option<&str> {
        self.provider.as_deref().filter(|p| !p.is_empty())
    }
}

/// Checks every record invariant; returns one description per violation.
pub fn validate_record(record: &AccountRecord) -> Vec<String> {
    let mut violations = Vec::new();
    let counts = [
        ("username_length", record.username_length),
        ("full_name_length", record.full_name_length),
        ("biography_length", record.biography_length),
        ("followers_count", record.followers_count),
        ("followings_count", record.followings_count),
    ];
    for (name, value) in counts {
        if value < 0 {
            violations.push(format!("{name} must be >= 0, got {value}"));
        }
    }
    if let Some(t) = record.post_times.iter().find(|&&t| t < 0) {
        violations.push(format!("post_times entries must be >= 0, got {t}"));
    }
    if record.provider_tag().is_some() && record.label != Label::Bot {
        violations.push(format!(
            "provider `{}` set on a record labeled {}; providers tag bots only",
            record.provider_tag().unwrap(),
            record.label.as_str()
        ));
    }
    violations
}

/// Where a dataset came from. Metadata only; never serialized and not part
/// of dataset equality.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub source: String,
    pub loaded_at_unix: Option<i64>,
}

/// An ordered collection of account records with unique ids.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub records: Vec<AccountRecord>,
    pub provenance: Provenance,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

impl Dataset {
    /// Builds a dataset, rejecting duplicate ids.
    pub fn new(records: Vec<AccountRecord>, source: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert(r.id.clone()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        Ok(Dataset {
            records,
            provenance: Provenance {
                source: source.into(),
                loaded_at_unix: None,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Supported interchange formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
}

/// Loads a dataset from a JSONL file: one record object per line, order
/// preserved. Malformed or invariant-violating lines are reported with
/// their 1-based line number.
pub fn load_dataset(path: impl AsRef<Path>, format: Format) -> Result<Dataset> {
    let Format::Jsonl = format;
    let path = path.as_ref();
    let file = File::open(path)?;
    let reader = BufReader::new(file);

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            return Err(Error::MalformedLine {
                line: line_no,
                msg: "empty line".into(),
            });
        }
        let record: AccountRecord =
            serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
                line: line_no,
                msg: e.to_string(),
            })?;
        let violations = validate_record(&record);
        if !violations.is_empty() {
            return Err(Error::MalformedLine {
                line: line_no,
                msg: violations.join("; "),
            });
        }
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId(record.id.clone()));
        }
        records.push(record);
    }

    let loaded_at = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .ok();
    Ok(Dataset {
        records,
        provenance: Provenance {
            source: path.display().to_string(),
            loaded_at_unix: loaded_at,
        },
    })
}

/// Writes a dataset as JSONL, one record per line in record order.
pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_records(dataset, &mut w)?;
    w.flush()?;
    Ok(())
}

/// JSONL-serializes records to any writer.
pub fn write_records(dataset: &Dataset, w: &mut impl Write) -> Result<()> {
    for record in &dataset.records {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::InvalidArgument(format!("serialize record: {e}")))?;
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
