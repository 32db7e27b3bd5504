//! Append-only JSON-lines persistence, one file per collection, with an
//! in-memory index rebuilt on open.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Collection {
    Scenes,
    Sessions,
    Traces,
    Assertions,
}

impl Collection {
    pub const ALL: [Collection; 4] = [
        Collection::Scenes,
        Collection::Sessions,
        Collection::Traces,
        Collection::Assertions,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Collection::Scenes => "scenes",
            Collection::Sessions => "sessions",
            Collection::Traces => "traces",
            Collection::Assertions => "assertions",
        }
    }
}

impl fmt::Display for Collection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreRecord {
    pub collection: Collection,
    pub id: String,
    pub body: serde_json::Value,
    pub created_at: String,
}

#[derive(Debug, Default)]
struct Index {
    records: BTreeMap<String, StoreRecord>,
    /// Ids in first-write order.
    order: Vec<String>,
}

/// Later writes to an id replace earlier ones in the index; the file keeps
/// every version.
#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    index: BTreeMap<Collection, Index>,
}

impl Store {
    /// Opens or creates a store under `dir`. A torn final line (from a crash
    /// mid-append) is ignored; a bad line anywhere else is an error.
    pub fn open(dir: impl AsRef<Path>) -> io::Result<Store> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let mut index = BTreeMap::new();
        for c in Collection::ALL {
            let mut idx = Index::default();
            let path = dir.join(format!("{c}.jsonl"));
            if path.exists() {
                let lines: Vec<String> = BufReader::new(File::open(&path)?).lines().collect::<Result<_, _>>()?;
                let last = lines.len();
                for (i, line) in lines.iter().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    match serde_json::from_str::<StoreRecord>(line) {
                        Ok(rec) => idx.insert(rec),
                        Err(_) if i + 1 == last => {
                            eprintln!("warning: {}: ignoring torn final line", path.display());
                        }
                        Err(e) => {
                            return Err(io::Error::new(
                                io::ErrorKind::InvalidData,
                                format!("{}:{}: {e}", path.display(), i + 1),
                            ))
                        }
                    }
                }
            }
            index.insert(c, idx);
        }
        Ok(Store { dir, index })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Appends and syncs the record before indexing it.
    pub fn put(&mut self, collection: Collection, id: &str, body: serde_json::Value) -> io::Result<StoreRecord> {
        let rec = StoreRecord {
            collection,
            id: id.to_string(),
            body,
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        };
        let mut line = serde_json::to_string(&rec).map_err(io::Error::other)?;
        line.push('\n');
        let path = self.dir.join(format!("{collection}.jsonl"));
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        f.write_all(line.as_bytes())?;
        f.sync_data()?;
        self.index.entry(collection).or_default().insert(rec.clone());
        Ok(rec)
    }

    pub fn get(&self, collection: Collection, id: &str) -> Option<&StoreRecord> {
        self.index.get(&collection)?.records.get(id)
    }

    /// Current records in first-write order.
    pub fn all(&self, collection: Collection) -> impl Iterator<Item = &StoreRecord> {
        let idx = self.index.get(&collection);
        idx.into_iter()
            .flat_map(|i| i.order.iter().map(move |id| &i.records[id]))
    }

    pub fn len(&self, collection: Collection) -> usize {
        self.index.get(&collection).map_or(0, |i| i.order.len())
    }
}

impl Index {
    fn insert(&mut self, rec: StoreRecord) {
        if !self.records.contains_key(&rec.id) {
            self.order.push(rec.id.clone());
        }
        self.records.insert(rec.id.clone(), rec);
    }
}
