use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{AccountPayload, BotClass, Label, LabeledDataset, LabeledRecord};
use crate::error::{Error, Result};

pub const PAYLOADS_FILE: &str = "payloads.jsonl";
pub const LABELS_FILE: &str = "labels.csv";

/// Reads a JSON-lines file. Blank lines are skipped; parse failures carry the
/// 1-based line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            file: path.display().to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    items: impl IntoIterator<Item = &'a T>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_payloads(path: &Path) -> Result<Vec<AccountPayload>> {
    read_jsonl(path)
}

pub fn write_payloads(path: &Path, payloads: &[AccountPayload]) -> Result<()> {
    write_jsonl(path, payloads)
}

#[derive(Debug, serde::Deserialize, Serialize)]
struct LabelRow {
    user_id: String,
    label: String,
    #[serde(default)]
    bot_class: Option<String>,
}

fn read_labels(path: &Path) -> Result<HashMap<String, (Label, Option<BotClass>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    let mut labels = HashMap::new();
    for (idx, row) in reader.deserialize::<LabelRow>().enumerate() {
        let line = idx + 2;
        let parse_err = |message: String| Error::Parse {
            file: path.display().to_string(),
            line,
            message,
        };
        let row = row.map_err(|e| parse_err(e.to_string()))?;
        let label: Label = row
            .label
            .parse()
            .map_err(|e: Error| parse_err(e.to_string()))?;
        let class = match row.bot_class.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(s) => Some(s.parse().map_err(|e: Error| parse_err(e.to_string()))?),
        };
        labels.insert(row.user_id, (label, class));
    }
    Ok(labels)
}

/// Loads `payloads.jsonl` + `labels.csv` from `dir`. Every payload is
/// validated here, so a returned dataset never holds a malformed record.
pub fn load_dataset(dir: &Path, name: &str) -> Result<LabeledDataset> {
    let payloads = read_payloads(&dir.join(PAYLOADS_FILE))?;
    let labels = read_labels(&dir.join(LABELS_FILE))?;
    let mut records = Vec::with_capacity(payloads.len());
    for payload in payloads {
        let (label, bot_class) = labels
            .get(&payload.user.user_id)
            .copied()
            .ok_or_else(|| Error::MissingLabel(payload.user.user_id.clone()))?;
        records.push(LabeledRecord {
            payload,
            label,
            bot_class,
        });
    }
    LabeledDataset::new(name, records)
}

pub fn save_dataset(dataset: &LabeledDataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_jsonl(
        &dir.join(PAYLOADS_FILE),
        dataset.records().iter().map(|r| &r.payload),
    )?;
    let path = dir.join(LABELS_FILE);
    let mut w =
        csv::Writer::from_path(&path).map_err(|e| Error::io(&path, std::io::Error::other(e)))?;
    let csv_err = |e: csv::Error| Error::io(&path, std::io::Error::other(e));
    w.write_record(["user_id", "label", "bot_class"])
        .map_err(csv_err)?;
    for r in dataset.records() {
        w.write_record([
            r.user_id(),
            r.label.as_str(),
            r.bot_class.map(BotClass::as_str).unwrap_or(""),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}
